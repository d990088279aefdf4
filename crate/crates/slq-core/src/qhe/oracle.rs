//! Brute-force transport cross-check.
//!
//! Assembles the full pair-hopping generator as a matrix on the fermionic
//! Fock space over the LLL block (exact anticommuting ladder via a
//! Jordan-Wigner string), evaluates `<psi_I| L(X) |psi_I>` directly, and
//! takes field derivatives by finite differences. Independent of the
//! response-sum route in the parent module; used by tests and the
//! acceptance suite.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use super::{
    kernel_at, level_energy_at, position_elements_at, LambdaTable, LandauConfig, OccupationSet,
    PositionComponent,
};
use crate::error::{Error, Result};

/// Exact CAR annihilators on the `2^n` Fock space:
/// `a_j = Z x .. x Z x c x 1 x .. x 1` with the string over slots `< j`.
pub fn jw_annihilators(n_levels: usize) -> Vec<Array2<C64>> {
    let one = C64::new(1.0, 0.0);
    let mut c = Array2::<C64>::zeros((2, 2));
    c[(0, 1)] = one; // |empty><occupied|
    let mut z = Array2::<C64>::zeros((2, 2));
    z[(0, 0)] = one;
    z[(1, 1)] = -one;
    let eye = Array2::<C64>::eye(2);

    (0..n_levels)
        .map(|j| {
            let mut acc = Array2::<C64>::eye(1);
            for k in 0..n_levels {
                let factor = if k < j {
                    &z
                } else if k == j {
                    &c
                } else {
                    &eye
                };
                acc = ndarray::linalg::kron(&acc, factor);
            }
            acc
        })
        .collect()
}

fn adjoint(a: &Array2<C64>) -> Array2<C64> {
    let n = a.nrows();
    let mut out = Array2::<C64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = a[(j, i)].conj();
        }
    }
    out
}

/// `a^dag_{i1} .. a^dag_{iN} |0>` in the order listed by `occ`.
pub fn fock_state(
    occ: &OccupationSet,
    level_slot: &dyn Fn(super::LevelIndex) -> Option<usize>,
    ladder: &[Array2<C64>],
) -> Result<Array1<C64>> {
    let dim = 1usize << ladder.len();
    let mut psi = Array1::<C64>::zeros(dim);
    psi[dim - 1 - (dim - 1)] = C64::new(1.0, 0.0); // vacuum = index 0
    for idx in occ.levels().iter().rev() {
        let slot = level_slot(*idx).ok_or(Error::LevelOutOfBounds {
            n: idx.n,
            p: idx.p,
            n_max: 0,
            p_max: 0,
        })?;
        psi = adjoint(&ladder[slot]).dot(&psi);
    }
    Ok(psi)
}

/// `<psi_I| L(X) |psi_I>` with the generator assembled index-by-index:
///
/// `L(X) = e^2 sum delta(eps_ab, eps_cd) { [a^dag_a a_b, X] a^dag_d a_c G
///         - a^dag_c a_d [a^dag_b a_a, X] conj(G) }`,
///
/// degeneracy pattern frozen at the reference field and the kernels taken
/// from the linear model at `e_field`.
pub fn generator_expectation(
    cfg: &LandauConfig,
    occ: &OccupationSet,
    table: &LambdaTable,
    x_kind: PositionComponent,
    e_field: f64,
) -> Result<f64> {
    let levels = cfg.lll_levels();
    let n = levels.len();
    let ladder = jw_annihilators(n);
    let slot_of = |idx: super::LevelIndex| levels.iter().position(|l| *l == idx);

    // Number-conserving hops a^dag_i a_j.
    let mut hop = vec![vec![Array2::<C64>::zeros((0, 0)); n]; n];
    for i in 0..n {
        let adag = adjoint(&ladder[i]);
        for j in 0..n {
            hop[i][j] = adag.dot(&ladder[j]);
        }
    }

    // Position observable.
    let dim = 1 << n;
    let mut x = Array2::<C64>::zeros((dim, dim));
    for (gi, g) in levels.iter().enumerate() {
        for (mi, m) in levels.iter().enumerate() {
            let el = position_elements_at(cfg, g.p, m.p, e_field)?;
            let val = match x_kind {
                PositionComponent::X1 => el.x1,
                PositionComponent::X2 => C64::new(el.x2, 0.0),
            };
            if val != C64::new(0.0, 0.0) {
                x = x + hop[gi][mi].mapv(|z| val * z);
            }
        }
    }

    let e0 = cfg.e_field();
    let tol = cfg.energy_tol();
    let e2 = cfg.e_charge * cfg.e_charge;
    let mut l_x = Array2::<C64>::zeros((dim, dim));
    for (ai, a) in levels.iter().enumerate() {
        for (bi, b) in levels.iter().enumerate() {
            let eps_ab = level_energy_at(cfg, *a, e0) - level_energy_at(cfg, *b, e0);
            // [a^dag_a a_b, X] once per (a, b).
            let comm_ab = hop[ai][bi].dot(&x) - x.dot(&hop[ai][bi]);
            let comm_ba = hop[bi][ai].dot(&x) - x.dot(&hop[bi][ai]);
            for (ci, c) in levels.iter().enumerate() {
                for (di, d) in levels.iter().enumerate() {
                    let eps_cd = level_energy_at(cfg, *c, e0) - level_energy_at(cfg, *d, e0);
                    if (eps_ab - eps_cd).abs() > tol {
                        continue;
                    }
                    let g = kernel_at(cfg, table, (*a, *b, *c, *d), e0, e_field);
                    if g == C64::new(0.0, 0.0) {
                        continue;
                    }
                    l_x = l_x + comm_ab.dot(&hop[di][ci]).mapv(|z| g * z)
                        - hop[ci][di].dot(&comm_ba).mapv(|z| g.conj() * z);
                }
            }
        }
    }

    let psi = fock_state(occ, &slot_of, &ladder)?;
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..dim {
        for j in 0..dim {
            acc += psi[i].conj() * l_x[(i, j)] * psi[j];
        }
    }
    Ok(e2 * acc.re)
}

/// Central finite-difference transport entries
/// `(sigma_xy, sigma_yy) = alpha_c (d<L(X1)>/dE, d<L(X2)>/dE)`.
pub fn transport_fd(
    cfg: &LandauConfig,
    occ: &OccupationSet,
    table: &LambdaTable,
    d_e: f64,
) -> Result<(f64, f64)> {
    let e0 = cfg.e_field();
    let mut out = [0.0_f64; 2];
    for (k, kind) in [PositionComponent::X1, PositionComponent::X2]
        .into_iter()
        .enumerate()
    {
        let plus = generator_expectation(cfg, occ, table, kind, e0 + d_e)?;
        let minus = generator_expectation(cfg, occ, table, kind, e0 - d_e)?;
        out[k] = cfg.alpha_c * (plus - minus) / (2.0 * d_e);
    }
    Ok((out[0], out[1]))
}
