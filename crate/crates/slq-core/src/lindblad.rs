//! Lindblad-type generators in Heisenberg form, their Schrödinger duals,
//! a fixed-step master-equation integrator, and structural certificates
//! (unitality, duality, complete positivity via the Choi matrix).
//!
//! The canonical representation is the Heisenberg-form map
//!
//! ```text
//! L(X) = i[H, X] + sum_k { G_k [A_k^dag, X] A_k - conj(G_k) A_k^dag [A_k, X] }
//! ```
//!
//! with complex damping constants `G_k` (`Re G_k >= 0` for a completely
//! positive semigroup). Splitting `G = g/2 + iS` recovers the familiar
//! dissipator `g (A^dag X A - {A^dag A, X}/2) + iS [A^dag A, X]`, i.e. the
//! imaginary parts are Lamb-type shifts. See Lindblad, Commun. Math. Phys.
//! 48, 119 (1976) for the general form.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::{FactorKind, HilbertSpec, OperatorMatrix};

const HERMITICITY_TOL: f64 = 1e-12;
const DENSITY_TOL: f64 = 1e-9;
const TRACE_DRIFT_ABORT: f64 = 1e-6;
const MIN_EIG_ABORT: f64 = -1e-6;
const TOP_FOCK_ABORT: f64 = 1e-6;
const MAX_SAMPLES: usize = 2001;

/// Hamiltonian part plus a list of (jump operator, complex damping) terms.
#[derive(Debug, Clone)]
pub struct GeneratorSpec {
    space: HilbertSpec,
    hamiltonian: OperatorMatrix,
    terms: Vec<(OperatorMatrix, C64)>,
}

impl GeneratorSpec {
    pub fn new(
        space: HilbertSpec,
        hamiltonian: OperatorMatrix,
        terms: Vec<(OperatorMatrix, C64)>,
    ) -> Result<Self> {
        if hamiltonian.space() != &space {
            return Err(Error::SpaceMismatch {
                left: space.dim(),
                right: hamiltonian.dim(),
            });
        }
        let defect = linalg::hermiticity_defect(hamiltonian.entries());
        let scale = hamiltonian.fro_norm().max(1.0);
        if defect > HERMITICITY_TOL * scale {
            return Err(Error::NonHermitianHamiltonian {
                defect,
                tol: HERMITICITY_TOL * scale,
            });
        }
        for (a, _) in &terms {
            if a.space() != &space {
                return Err(Error::SpaceMismatch {
                    left: space.dim(),
                    right: a.dim(),
                });
            }
        }
        Ok(GeneratorSpec {
            space,
            hamiltonian,
            terms,
        })
    }

    /// Generator with no Hamiltonian part.
    pub fn dissipative(space: HilbertSpec, terms: Vec<(OperatorMatrix, C64)>) -> Result<Self> {
        let h = OperatorMatrix::zero(&space);
        Self::new(space, h, terms)
    }

    pub fn space(&self) -> &HilbertSpec {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn hamiltonian(&self) -> &OperatorMatrix {
        &self.hamiltonian
    }

    pub fn terms(&self) -> &[(OperatorMatrix, C64)] {
        &self.terms
    }

    /// True when some damping constant has a negative real part; the Choi
    /// certificate will fail for such generators.
    pub fn has_negative_rates(&self) -> bool {
        self.terms.iter().any(|(_, g)| g.re < 0.0)
    }

    /// `|L(1)|_F`, which vanishes identically for this generator gauge.
    pub fn unitality_defect(&self) -> f64 {
        let one = OperatorMatrix::identity(&self.space);
        apply_heisenberg_raw(self, one.entries())
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Crude spectral-scale estimate used to pick integrator steps.
    pub fn rate_scale(&self) -> f64 {
        let mut s = 2.0 * self.hamiltonian.fro_norm();
        for (a, g) in &self.terms {
            let na = a.fro_norm();
            s += 4.0 * g.norm() * na * na;
        }
        s.max(1e-12)
    }

    /// Fixed step satisfying `dt <= 0.01 / |L|` for the estimate above.
    pub fn suggested_dt(&self) -> f64 {
        0.01 / self.rate_scale()
    }
}

fn apply_heisenberg_raw(gen: &GeneratorSpec, x: &Array2<C64>) -> Array2<C64> {
    let h = gen.hamiltonian.entries();
    let i = C64::new(0.0, 1.0);
    let mut out = (h.dot(x) - x.dot(h)).mapv(|z| i * z);
    for (a, g) in &gen.terms {
        let am = a.entries();
        let adag = a.adjoint();
        let adm = adag.entries();
        let p = adm.dot(am); // A^dag A
        let axa = adm.dot(&x.dot(am));
        out = out + axa.mapv(|z| 2.0 * g.re * z) - x.dot(&p).mapv(|z| *g * z)
            - p.dot(x).mapv(|z| g.conj() * z);
    }
    out
}

fn adjoint_raw(a: &Array2<C64>) -> Array2<C64> {
    let n = a.nrows();
    let mut out = Array2::<C64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = a[(j, i)].conj();
        }
    }
    out
}

/// `M_L = -iH - sum_k G_k A_k^dag A_k`, the left multiplier of the dual.
fn left_multiplier(gen: &GeneratorSpec) -> Array2<C64> {
    let i = C64::new(0.0, 1.0);
    let mut ml = gen.hamiltonian.entries().mapv(|z| -i * z);
    for (a, g) in &gen.terms {
        let adag = a.adjoint();
        let p = adag.entries().dot(a.entries());
        ml = ml + p.mapv(|z| -*g * z);
    }
    ml
}

fn apply_schrodinger_prepared(
    gen: &GeneratorSpec,
    ml: &Array2<C64>,
    rho: &Array2<C64>,
) -> Array2<C64> {
    // L*(rho) = M_L rho + rho M_L^dag + sum_k 2 Re G_k  A_k rho A_k^dag.
    let mut out = ml.dot(rho) + rho.dot(&adjoint_raw(ml));
    for (a, g) in &gen.terms {
        let am = a.entries();
        let arho = am.dot(rho);
        out = out + arho.dot(&adjoint_raw(am)).mapv(|z| 2.0 * g.re * z);
    }
    out
}

fn apply_schrodinger_raw(gen: &GeneratorSpec, rho: &Array2<C64>) -> Array2<C64> {
    let ml = left_multiplier(gen);
    apply_schrodinger_prepared(gen, &ml, rho)
}

/// Heisenberg action `L(X)`.
pub fn apply_heisenberg(gen: &GeneratorSpec, x: &OperatorMatrix) -> Result<OperatorMatrix> {
    if x.space() != gen.space() {
        return Err(Error::SpaceMismatch {
            left: gen.dim(),
            right: x.dim(),
        });
    }
    OperatorMatrix::new(gen.space.clone(), apply_heisenberg_raw(gen, x.entries()))
}

/// Schrödinger action `L*(rho)` on a density matrix (checked to 1e-9).
pub fn apply_schrodinger(gen: &GeneratorSpec, rho: &OperatorMatrix) -> Result<OperatorMatrix> {
    if !rho.is_density(DENSITY_TOL) {
        return Err(Error::NotDensity {
            defect: rho.density_defect(),
            tol: DENSITY_TOL,
        });
    }
    apply_schrodinger_unchecked(gen, rho)
}

/// Schrödinger action without the density-matrix check.
pub fn apply_schrodinger_unchecked(
    gen: &GeneratorSpec,
    rho: &OperatorMatrix,
) -> Result<OperatorMatrix> {
    if rho.space() != gen.space() {
        return Err(Error::SpaceMismatch {
            left: gen.dim(),
            right: rho.dim(),
        });
    }
    OperatorMatrix::new(gen.space.clone(), apply_schrodinger_raw(gen, rho.entries()))
}

/// Matrix of the Heisenberg generator on the basis `E_ab`: column `a*d + b`
/// holds `L(E_ab)` flattened row-major. Two generators are the same map iff
/// these matrices coincide.
pub fn heisenberg_matrix(gen: &GeneratorSpec) -> Array2<C64> {
    let d = gen.dim();
    let mut out = Array2::<C64>::zeros((d * d, d * d));
    let mut basis = Array2::<C64>::zeros((d, d));
    for a in 0..d {
        for b in 0..d {
            basis[(a, b)] = C64::new(1.0, 0.0);
            let l = apply_heisenberg_raw(gen, &basis);
            basis[(a, b)] = C64::new(0.0, 0.0);
            let col = a * d + b;
            for i in 0..d {
                for j in 0..d {
                    out[(i * d + j, col)] = l[(i, j)];
                }
            }
        }
    }
    out
}

/// One recorded master-equation trajectory.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `|tr rho(t) - 1|` per sample.
    pub trace_drift: Vec<f64>,
    /// Minimum eigenvalue of `rho(t)` per sample.
    pub min_eig: Vec<f64>,
    /// Max population of the top Fock level over bosonic factors, when any.
    pub top_fock: Option<Vec<f64>>,
    /// Expectation values `tr(rho X)` per observable.
    pub observables: Vec<(String, Vec<C64>)>,
    pub final_state: OperatorMatrix,
    /// Diagnostic when the integration aborted early.
    pub abort: Option<String>,
}

impl Trajectory {
    /// CSV export: `t,trace_drift,min_eig,<observable columns>` (real parts).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,trace_drift,min_eig");
        for (name, _) in &self.observables {
            s.push(',');
            s.push_str(name);
        }
        s.push('\n');
        for k in 0..self.times.len() {
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e}",
                self.times[k], self.trace_drift[k], self.min_eig[k]
            ));
            for (_, vals) in &self.observables {
                s.push_str(&format!(",{:.16e}", vals[k].re));
            }
            s.push('\n');
        }
        s
    }
}

fn top_fock_population(space: &HilbertSpec, rho: &Array2<C64>) -> Option<f64> {
    let factors = space.factors();
    if !factors.iter().any(|f| matches!(f, FactorKind::Boson(_))) {
        return None;
    }
    let dims: Vec<usize> = factors.iter().map(|f| f.dim()).collect();
    let mut max_pop = 0.0_f64;
    for (k, f) in factors.iter().enumerate() {
        if let FactorKind::Boson(d) = f {
            let stride: usize = dims[k + 1..].iter().product();
            let block = stride * d;
            let mut pop = 0.0;
            for i in 0..space.dim() {
                if (i % block) / stride == d - 1 {
                    pop += rho[(i, i)].re;
                }
            }
            max_pop = max_pop.max(pop);
        }
    }
    Some(max_pop)
}

/// Classic fixed-step RK4 on the vectorized master equation, recording trace
/// drift, minimum eigenvalue, top-Fock population, and the requested
/// observables. Monitor violations are recorded in `abort` and stop the
/// integration; the partial trajectory is still returned.
pub fn evolve_monitored(
    gen: &GeneratorSpec,
    rho0: &OperatorMatrix,
    t_final: f64,
    dt: f64,
    observables: &[(String, OperatorMatrix)],
) -> Result<Trajectory> {
    if !(dt > 0.0) {
        return Err(Error::BadTimeStep(dt));
    }
    if !rho0.is_density(DENSITY_TOL) {
        return Err(Error::NotDensity {
            defect: rho0.density_defect(),
            tol: DENSITY_TOL,
        });
    }
    for (_, x) in observables {
        if x.space() != gen.space() {
            return Err(Error::SpaceMismatch {
                left: gen.dim(),
                right: x.dim(),
            });
        }
    }

    let ml = left_multiplier(gen);
    let n_steps = (t_final / dt).ceil().max(1.0) as usize;
    let sample_every = (n_steps / (MAX_SAMPLES - 1)).max(1);

    let mut rho = rho0.entries().clone();
    let mut traj = Trajectory {
        times: Vec::new(),
        trace_drift: Vec::new(),
        min_eig: Vec::new(),
        top_fock: top_fock_population(gen.space(), &rho).map(|_| Vec::new()),
        observables: observables
            .iter()
            .map(|(n, _)| (n.clone(), Vec::new()))
            .collect(),
        final_state: rho0.clone(),
        abort: None,
    };

    let record = |rho: &Array2<C64>, t: f64, traj: &mut Trajectory| -> Option<String> {
        let trace: C64 = rho.diag().sum();
        let drift = (trace - C64::new(1.0, 0.0)).norm();
        let min_eig = linalg::hermitian_min_eigenvalue(rho);
        traj.times.push(t);
        traj.trace_drift.push(drift);
        traj.min_eig.push(min_eig);
        if let Some(tf) = &mut traj.top_fock {
            tf.push(top_fock_population(gen.space(), rho).unwrap_or(0.0));
        }
        for ((_, vals), (_, x)) in traj.observables.iter_mut().zip(observables.iter()) {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..rho.nrows() {
                for j in 0..rho.ncols() {
                    acc += rho[(i, j)] * x.entries()[(j, i)];
                }
            }
            vals.push(acc);
        }
        if drift > TRACE_DRIFT_ABORT {
            return Some(format!(
                "trace drift {drift:.3e} exceeds {TRACE_DRIFT_ABORT:.1e}"
            ));
        }
        if min_eig < MIN_EIG_ABORT {
            return Some(format!(
                "minimum eigenvalue {min_eig:.3e} below {MIN_EIG_ABORT:.1e}"
            ));
        }
        if let Some(tf) = &traj.top_fock {
            let pop = *tf.last().unwrap();
            if pop > TOP_FOCK_ABORT {
                return Some(format!(
                    "top Fock-level population {pop:.3e} exceeds {TOP_FOCK_ABORT:.1e}"
                ));
            }
        }
        None
    };

    if let Some(reason) = record(&rho, 0.0, &mut traj) {
        traj.abort = Some(format!("t = 0: {reason}"));
        traj.final_state = OperatorMatrix::new(gen.space().clone(), rho)?;
        return Ok(traj);
    }

    let mut t = 0.0_f64;
    for step in 1..=n_steps {
        let h = dt.min(t_final - t);
        let k1 = apply_schrodinger_prepared(gen, &ml, &rho);
        let k2 = apply_schrodinger_prepared(gen, &ml, &(&rho + &k1.mapv(|z| z * (h / 2.0))));
        let k3 = apply_schrodinger_prepared(gen, &ml, &(&rho + &k2.mapv(|z| z * (h / 2.0))));
        let k4 = apply_schrodinger_prepared(gen, &ml, &(&rho + &k3.mapv(|z| z * h)));
        rho = &rho
            + &(k1 + k2.mapv(|z| 2.0 * z) + k3.mapv(|z| 2.0 * z) + k4).mapv(|z| z * (h / 6.0));
        t += h;

        if step % sample_every == 0 || step == n_steps || t >= t_final {
            if let Some(reason) = record(&rho, t, &mut traj) {
                traj.abort = Some(format!("t = {t:.6}: {reason}"));
                break;
            }
        }
        if t >= t_final {
            break;
        }
    }

    traj.final_state = OperatorMatrix::new(gen.space().clone(), rho)?;
    Ok(traj)
}

/// Stricter wrapper around [`evolve_monitored`]: monitor violations become
/// hard errors.
pub fn evolve(
    gen: &GeneratorSpec,
    rho0: &OperatorMatrix,
    t_final: f64,
    dt: f64,
    observables: &[(String, OperatorMatrix)],
) -> Result<Trajectory> {
    let traj = evolve_monitored(gen, rho0, t_final, dt, observables)?;
    if let Some(reason) = &traj.abort {
        return Err(Error::EvolveAborted {
            t: *traj.times.last().unwrap_or(&0.0),
            reason: reason.clone(),
        });
    }
    Ok(traj)
}

/// Minimum eigenvalue of the Choi matrix of the first-order step map
/// `Phi = id + dt L*`.
///
/// The Choi matrix of this map lives in the Hilbert-Schmidt span of
/// `{I, M_L, A_k}`, so its nonzero spectrum is computed exactly on that
/// low-rank compression; the orthogonal complement contributes 0.
pub fn choi_min_eigenvalue(gen: &GeneratorSpec, dt: f64) -> f64 {
    let d = gen.dim();
    let ml = left_multiplier(gen);
    let eye = Array2::<C64>::eye(d);

    let jumps: Vec<&Array2<C64>> = gen.terms.iter().map(|(a, _)| a.entries()).collect();
    let mut raw: Vec<&Array2<C64>> = vec![&eye, &ml];
    raw.extend(jumps.iter());

    if raw.len() >= d * d {
        // No room for compression; assemble densely.
        let choi = dense_choi_step(gen, dt);
        return linalg::hermitian_min_eigenvalue(&choi);
    }

    let scale = raw
        .iter()
        .map(|m| linalg::fro_norm(m))
        .fold(1.0_f64, f64::max);
    let mut basis: Vec<Array2<C64>> = Vec::new();
    for m in raw {
        let mut v = m.clone();
        for q in &basis {
            let c = linalg::hs_dot(q, &v);
            v = v - q.mapv(|z| c * z);
        }
        let n = linalg::fro_norm(&v);
        if n > 1e-12 * scale {
            basis.push(v.mapv(|z| z / n));
        }
    }
    let r = basis.len();

    // Compressed Choi:
    // R_uv = <Qu,I><I,Qv> + dt [ <Qu,ML><I,Qv> + <Qu,I><ML,Qv>
    //        + sum_k 2 Re G_k <Qu,Ak><Ak,Qv> ].
    let qi: Vec<C64> = basis.iter().map(|q| linalg::hs_dot(q, &eye)).collect();
    let qm: Vec<C64> = basis.iter().map(|q| linalg::hs_dot(q, &ml)).collect();
    let qa: Vec<Vec<C64>> = jumps
        .iter()
        .map(|a| basis.iter().map(|q| linalg::hs_dot(q, *a)).collect())
        .collect();

    let mut compressed = Array2::<C64>::zeros((r, r));
    for u in 0..r {
        for v in 0..r {
            let mut val = qi[u] * qi[v].conj();
            val += dt * (qm[u] * qi[v].conj() + qi[u] * qm[v].conj());
            for (k, (_, g)) in gen.terms.iter().enumerate() {
                val += dt * 2.0 * g.re * qa[k][u] * qa[k][v].conj();
            }
            compressed[(u, v)] = val;
        }
    }
    linalg::hermitian_min_eigenvalue(&compressed).min(0.0)
}

/// Dense Choi matrix of `id + dt L*`, `C[(i,a),(j,b)] = Phi(E_ab)[i,j]`.
/// Quadratic in memory; cross-check route for small dimensions.
pub fn dense_choi_step(gen: &GeneratorSpec, dt: f64) -> Array2<C64> {
    let d = gen.dim();
    let mut choi = Array2::<C64>::zeros((d * d, d * d));
    let mut basis = Array2::<C64>::zeros((d, d));
    for a in 0..d {
        for b in 0..d {
            basis[(a, b)] = C64::new(1.0, 0.0);
            let mut phi = apply_schrodinger_raw(gen, &basis).mapv(|z| z * dt);
            phi[(a, b)] += 1.0;
            basis[(a, b)] = C64::new(0.0, 0.0);
            for i in 0..d {
                for j in 0..d {
                    choi[(i * d + a, j * d + b)] = phi[(i, j)];
                }
            }
        }
    }
    choi
}
