//! Finite-dimensional operator algebra on tensor products of spins,
//! truncated bosonic Fock spaces, and on-site fermion pairs.
//!
//! Conventions:
//! * spins are two-level with `sigma_z = diag(1, -1)` (excited state first);
//! * a bosonic factor with cutoff `d` carries the Fock states `|0> .. |d-1>`
//!   and the truncated ladder satisfies the CCR away from the top level;
//! * a fermion site is four-dimensional with basis order
//!   `|vac>, |+>, |->, |+->`, on-site CAR, and operators at *different*
//!   sites commute (plain tensor products, no Jordan-Wigner string).

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg;

/// Default cap on the total Hilbert-space dimension.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// One tensor factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    /// Two-level system.
    Spin,
    /// Truncated bosonic mode with the given Fock cutoff (>= 2).
    Boson(usize),
    /// Four-dimensional on-site fermion pair (b_+, b_-).
    FermionSite,
}

impl FactorKind {
    pub fn dim(&self) -> usize {
        match self {
            FactorKind::Spin => 2,
            FactorKind::Boson(d) => *d,
            FactorKind::FermionSite => 4,
        }
    }
}

/// Ordered list of tensor factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertSpec {
    factors: Vec<FactorKind>,
}

impl HilbertSpec {
    /// Build a spec under the default dimension cap.
    pub fn new(factors: Vec<FactorKind>) -> Result<Self> {
        Self::with_cap(factors, DEFAULT_DIM_CAP)
    }

    /// Build a spec, enforcing local-dimension rules and the dimension cap.
    pub fn with_cap(factors: Vec<FactorKind>, cap: usize) -> Result<Self> {
        let mut dim: usize = 1;
        for f in &factors {
            if let FactorKind::Boson(d) = f {
                if *d < 2 {
                    return Err(Error::BadCutoff(*d));
                }
            }
            dim = dim.saturating_mul(f.dim());
            if dim > cap {
                return Err(Error::DimensionCap { dim, cap });
            }
        }
        Ok(HilbertSpec { factors })
    }

    pub fn single(factor: FactorKind) -> Self {
        HilbertSpec {
            factors: vec![factor],
        }
    }

    pub fn factors(&self) -> &[FactorKind] {
        &self.factors
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim()).product()
    }
}

/// Dense complex matrix attached to a [`HilbertSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    space: HilbertSpec,
    entries: Array2<C64>,
}

impl OperatorMatrix {
    pub fn new(space: HilbertSpec, entries: Array2<C64>) -> Result<Self> {
        let d = space.dim();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::SpaceMismatch {
                left: d,
                right: entries.nrows(),
            });
        }
        Ok(OperatorMatrix { space, entries })
    }

    pub fn identity(space: &HilbertSpec) -> Self {
        let d = space.dim();
        OperatorMatrix {
            space: space.clone(),
            entries: Array2::eye(d),
        }
    }

    pub fn zero(space: &HilbertSpec) -> Self {
        let d = space.dim();
        OperatorMatrix {
            space: space.clone(),
            entries: Array2::zeros((d, d)),
        }
    }

    pub fn space(&self) -> &HilbertSpec {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<C64> {
        self.entries
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim();
        let mut out = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self.entries[(j, i)].conj();
            }
        }
        OperatorMatrix {
            space: self.space.clone(),
            entries: out,
        }
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().sum()
    }

    pub fn fro_norm(&self) -> f64 {
        linalg::fro_norm(&self.entries)
    }

    pub fn scale(&self, c: C64) -> Self {
        OperatorMatrix {
            space: self.space.clone(),
            entries: self.entries.mapv(|z| c * z),
        }
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(OperatorMatrix {
            space: self.space.clone(),
            entries: self.entries.dot(&other.entries),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(OperatorMatrix {
            space: self.space.clone(),
            entries: &self.entries + &other.entries,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(OperatorMatrix {
            space: self.space.clone(),
            entries: &self.entries - &other.entries,
        })
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        linalg::hermiticity_defect(&self.entries) <= tol
    }

    /// Density-matrix predicate: hermitian, unit trace, positive
    /// semidefinite, each up to `tol`.
    pub fn is_density(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol) {
            return false;
        }
        if (self.trace() - C64::new(1.0, 0.0)).norm() > tol {
            return false;
        }
        linalg::hermitian_min_eigenvalue(&self.entries) >= -tol
    }

    /// Largest hermiticity / trace / positivity defect, for diagnostics.
    pub fn density_defect(&self) -> f64 {
        let h = linalg::hermiticity_defect(&self.entries);
        let t = (self.trace() - C64::new(1.0, 0.0)).norm();
        let p = (-linalg::hermitian_min_eigenvalue(&self.entries)).max(0.0);
        h.max(t).max(p)
    }
}

impl std::ops::Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        self.add(rhs).expect("space mismatch in +")
    }
}

impl std::ops::Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        self.sub(rhs).expect("space mismatch in -")
    }
}

impl std::ops::Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        self.matmul(rhs).expect("space mismatch in *")
    }
}

/// `AB - BA`.
pub fn commutator(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    a.matmul(b)?.sub(&b.matmul(a)?)
}

/// `AB + BA`.
pub fn anticommutator(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    a.matmul(b)?.add(&b.matmul(a)?)
}

fn single(factor: FactorKind, entries: Array2<C64>) -> OperatorMatrix {
    OperatorMatrix {
        space: HilbertSpec::single(factor),
        entries,
    }
}

pub fn sigma_x() -> OperatorMatrix {
    let mut m = Array2::zeros((2, 2));
    m[(0, 1)] = C64::new(1.0, 0.0);
    m[(1, 0)] = C64::new(1.0, 0.0);
    single(FactorKind::Spin, m)
}

pub fn sigma_y() -> OperatorMatrix {
    let mut m = Array2::zeros((2, 2));
    m[(0, 1)] = C64::new(0.0, -1.0);
    m[(1, 0)] = C64::new(0.0, 1.0);
    single(FactorKind::Spin, m)
}

pub fn sigma_z() -> OperatorMatrix {
    let mut m = Array2::zeros((2, 2));
    m[(0, 0)] = C64::new(1.0, 0.0);
    m[(1, 1)] = C64::new(-1.0, 0.0);
    single(FactorKind::Spin, m)
}

/// `sigma_+ = (sigma_x + i sigma_y)/2`, raising into the excited state.
pub fn sigma_plus() -> OperatorMatrix {
    let mut m = Array2::zeros((2, 2));
    m[(0, 1)] = C64::new(1.0, 0.0);
    single(FactorKind::Spin, m)
}

pub fn sigma_minus() -> OperatorMatrix {
    let mut m = Array2::zeros((2, 2));
    m[(1, 0)] = C64::new(1.0, 0.0);
    single(FactorKind::Spin, m)
}

/// Truncated bosonic ladder `(a, a^dag)` with `a|n> = sqrt(n)|n-1>`.
pub fn boson_ladder(cutoff: usize) -> Result<(OperatorMatrix, OperatorMatrix)> {
    if cutoff < 2 {
        return Err(Error::BadCutoff(cutoff));
    }
    let mut a = Array2::<C64>::zeros((cutoff, cutoff));
    for n in 1..cutoff {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    let a_op = single(FactorKind::Boson(cutoff), a);
    let a_dag = a_op.adjoint();
    Ok((a_op, a_dag))
}

/// On-site fermion pair `(b_+, b_-)` on the 4-dimensional site.
///
/// Basis order `|vac>, |+>, |->, |+->` with `|+-> = b_+^dag b_-^dag |vac>`.
/// The pair anticommutes on site ({b_+, b_-^dag} = 0) via an in-site sign
/// factor; embedded copies at different sites commute.
pub fn fermion_site_pair() -> (OperatorMatrix, OperatorMatrix) {
    // Index = n_plus + 2 n_minus.
    let mut b_plus = Array2::<C64>::zeros((4, 4));
    let one = C64::new(1.0, 0.0);
    // b_+ |+> = |vac>, b_+ |+-> = |->.
    b_plus[(0, 1)] = one;
    b_plus[(2, 3)] = one;
    // b_- |-> = |vac>, b_- |+-> = -|+> (sign from passing b_+^dag).
    let mut b_minus = Array2::<C64>::zeros((4, 4));
    b_minus[(0, 2)] = one;
    b_minus[(1, 3)] = -one;
    (
        single(FactorKind::FermionSite, b_plus),
        single(FactorKind::FermionSite, b_minus),
    )
}

/// Embed a single-factor operator as `1 x .. x local x .. x 1`.
pub fn embed_site_operator(
    space: &HilbertSpec,
    site: usize,
    local: &OperatorMatrix,
) -> Result<OperatorMatrix> {
    if site >= space.num_factors() {
        return Err(Error::SiteOutOfRange {
            site,
            factors: space.num_factors(),
        });
    }
    let expected = space.factors()[site].dim();
    if local.dim() != expected {
        return Err(Error::SiteDimensionMismatch {
            site,
            expected,
            found: local.dim(),
        });
    }
    let mut acc = Array2::<C64>::eye(1);
    for (k, f) in space.factors().iter().enumerate() {
        if k == site {
            acc = ndarray::linalg::kron(&acc, local.entries());
        } else {
            acc = ndarray::linalg::kron(&acc, &Array2::<C64>::eye(f.dim()));
        }
    }
    OperatorMatrix::new(space.clone(), acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Independent Kronecker-product oracle (nested loops, no ndarray::kron).
    fn kron_oracle(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
        let (ra, ca) = (a.nrows(), a.ncols());
        let (rb, cb) = (b.nrows(), b.ncols());
        let mut out = Array2::<C64>::zeros((ra * rb, ca * cb));
        for i in 0..ra {
            for j in 0..ca {
                for k in 0..rb {
                    for l in 0..cb {
                        out[(i * rb + k, j * cb + l)] = a[(i, j)] * b[(k, l)];
                    }
                }
            }
        }
        out
    }

    #[test]
    fn pauli_algebra() {
        let (sx, sy, sz) = (sigma_x(), sigma_y(), sigma_z());
        // sigma_x sigma_y = i sigma_z
        let xy = &sx * &sy;
        let isz = sz.scale(c(0.0, 1.0));
        assert!((&xy - &isz).fro_norm() < 1e-15);
        // {sigma_x, sigma_y} = 0
        assert!(anticommutator(&sx, &sy).unwrap().fro_norm() < 1e-15);
        // [sigma_+, sigma_-] = sigma_z
        let comm = commutator(&sigma_plus(), &sigma_minus()).unwrap();
        assert!((&comm - &sz).fro_norm() < 1e-15);
        // [A, A] = 0
        assert!(commutator(&sx, &sx).unwrap().fro_norm() == 0.0);
    }

    #[test]
    fn embed_single_factor_is_identity_map() {
        let space = HilbertSpec::single(FactorKind::Spin);
        let e = embed_site_operator(&space, 0, &sigma_z()).unwrap();
        assert!((e.entries() - sigma_z().entries()).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn embedded_disjoint_sites_commute() {
        let space = HilbertSpec::new(vec![FactorKind::Spin, FactorKind::Spin]).unwrap();
        let p0 = embed_site_operator(&space, 0, &sigma_plus()).unwrap();
        let m1 = embed_site_operator(&space, 1, &sigma_minus()).unwrap();
        assert!(commutator(&p0, &m1).unwrap().fro_norm() == 0.0);
    }

    #[test]
    fn embed_matches_kron_oracle_on_three_factors() {
        let space = HilbertSpec::new(vec![
            FactorKind::Spin,
            FactorKind::Spin,
            FactorKind::Boson(4),
        ])
        .unwrap();
        let e = embed_site_operator(&space, 1, &sigma_z()).unwrap();
        let id2 = Array2::<C64>::eye(2);
        let id4 = Array2::<C64>::eye(4);
        let oracle = kron_oracle(&kron_oracle(&id2, sigma_z().entries()), &id4);
        assert_eq!(e.dim(), 16);
        let diff: f64 = (e.entries() - &oracle).iter().map(|z| z.norm()).sum();
        assert!(diff == 0.0);
        assert!(e.trace().norm() < 1e-15);
        // Frozen from the oracle: |1 x sigma_z x 1|_F = sqrt(2)*sqrt(2)*2 = 4.
        assert!((e.fro_norm() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn embed_is_a_homomorphism_and_respects_adjoints() {
        let space = HilbertSpec::new(vec![
            FactorKind::Boson(3),
            FactorKind::Spin,
            FactorKind::FermionSite,
        ])
        .unwrap();
        let (a, adag) = boson_ladder(3).unwrap();
        let prod_local = a.matmul(&adag).unwrap();
        let lhs = embed_site_operator(&space, 0, &prod_local).unwrap();
        let rhs = embed_site_operator(&space, 0, &a)
            .unwrap()
            .matmul(&embed_site_operator(&space, 0, &adag).unwrap())
            .unwrap();
        assert!((&lhs - &rhs).fro_norm() == 0.0);

        let emb_dag = embed_site_operator(&space, 0, &a).unwrap().adjoint();
        let dag_emb = embed_site_operator(&space, 0, &adag).unwrap();
        assert!((&emb_dag - &dag_emb).fro_norm() == 0.0);
    }

    #[test]
    fn embed_dimension_mismatch_is_reported() {
        let space = HilbertSpec::new(vec![FactorKind::Spin, FactorKind::Boson(4)]).unwrap();
        let err = embed_site_operator(&space, 1, &sigma_z()).unwrap_err();
        match err {
            Error::SiteDimensionMismatch { site, expected, found } => {
                assert_eq!((site, expected, found), (1, 4, 2));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn boson_ladder_truncation() {
        let (a, _) = boson_ladder(2).unwrap();
        assert!((a.entries()[(0, 1)] - c(1.0, 0.0)).norm() == 0.0);
        assert!(a.entries()[(1, 0)].norm() == 0.0);

        let (a, adag) = boson_ladder(8).unwrap();
        let n = adag.matmul(&a).unwrap();
        for k in 0..8 {
            assert!((n.entries()[(k, k)].re - k as f64).abs() < 1e-14);
        }
        // CCR on the sub-cutoff block.
        let ccr = commutator(&a, &adag).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ccr.entries()[(i, j)] - c(expect, 0.0)).norm() < 1e-14);
            }
        }
        assert!(boson_ladder(1).is_err());
    }

    #[test]
    fn fermion_site_relations() {
        let (bp, bm) = fermion_site_pair();
        let id = OperatorMatrix::identity(bp.space());
        // {b_s, b_s^dag} = 1
        let acp = anticommutator(&bp, &bp.adjoint()).unwrap();
        let acm = anticommutator(&bm, &bm.adjoint()).unwrap();
        assert!((&acp - &id).fro_norm() < 1e-15);
        assert!((&acm - &id).fro_norm() < 1e-15);
        // {b_+, b_-^dag} = 0 and {b_+, b_-} = 0 on site
        assert!(anticommutator(&bp, &bm.adjoint()).unwrap().fro_norm() == 0.0);
        assert!(anticommutator(&bp, &bm).unwrap().fro_norm() == 0.0);
        // nilpotency
        assert!(bp.matmul(&bp).unwrap().fro_norm() == 0.0);

        // sigma_z analog spectrum {-1, 0, 0, 1}
        let np = bp.adjoint().matmul(&bp).unwrap();
        let nm = bm.adjoint().matmul(&bm).unwrap();
        let sz = &np - &nm;
        let eigs = linalg::hermitian_eigenvalues(sz.entries());
        let expect = [-1.0, 0.0, 0.0, 1.0];
        for (e, x) in eigs.iter().zip(expect.iter()) {
            assert!((e - x).abs() < 1e-14);
        }
    }

    #[test]
    fn cross_site_fermions_commute() {
        let space =
            HilbertSpec::new(vec![FactorKind::FermionSite, FactorKind::FermionSite]).unwrap();
        let (bp, bm) = fermion_site_pair();
        let bp0 = embed_site_operator(&space, 0, &bp).unwrap();
        let bm1 = embed_site_operator(&space, 1, &bm).unwrap();
        assert!(commutator(&bp0, &bm1).unwrap().fro_norm() == 0.0);
        assert!(commutator(&bp0, &bm1.adjoint()).unwrap().fro_norm() == 0.0);
    }

    #[test]
    fn local_defining_relations_batch() {
        // Every factor kind satisfies its defining relations to < 1e-13.
        let (a, adag) = boson_ladder(6).unwrap();
        let ccr = commutator(&a, &adag).unwrap();
        let mut defect = 0.0_f64;
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j { 1.0 } else { 0.0 };
                defect += (ccr.entries()[(i, j)] - c(expect, 0.0)).norm_sqr();
            }
        }
        assert!(defect.sqrt() < 1e-13);

        let comm = commutator(&sigma_plus(), &sigma_minus()).unwrap();
        assert!((&comm - &sigma_z()).fro_norm() < 1e-13);

        let (bp, _) = fermion_site_pair();
        let id = OperatorMatrix::identity(bp.space());
        assert!(
            (&anticommutator(&bp, &bp.adjoint()).unwrap() - &id).fro_norm() < 1e-13
        );
    }

    #[test]
    fn dimension_cap_is_enforced() {
        let err = HilbertSpec::with_cap(vec![FactorKind::Boson(100), FactorKind::Boson(100)], 4096);
        assert!(matches!(err, Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn density_predicate() {
        let space = HilbertSpec::single(FactorKind::Spin);
        let mut rho = Array2::<C64>::zeros((2, 2));
        rho[(0, 0)] = c(0.25, 0.0);
        rho[(1, 1)] = c(0.75, 0.0);
        rho[(0, 1)] = c(0.1, 0.05);
        rho[(1, 0)] = c(0.1, -0.05);
        let rho = OperatorMatrix::new(space.clone(), rho).unwrap();
        assert!(rho.is_density(1e-12));
        let not_pos = OperatorMatrix::new(space, sigma_z().entries().clone()).unwrap();
        assert!(!not_pos.is_density(1e-12));
    }
}
