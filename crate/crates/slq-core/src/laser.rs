//! Matter-radiation generators: the dissipative Alli-Sewell (AS) laser
//! model, the weak-coupling limit of the Hepp-Lieb (HL) model, and the
//! weak-coupling limit of the Dicke-Haken-Lax (DHL) model, together with
//! the parameter matchings under which the three give the same dynamics.
//!
//! The AS matter generator acts per site as
//!
//! ```text
//! L_at sigma_(+-) = -(gamma1 -+ i eps) sigma_(+-)
//! L_at sigma_z    = -gamma2 (sigma_z - eta)
//! ```
//!
//! subject to `0 < gamma2 <= 2 gamma1`, `-1 <= eta <= 1`; the radiation part
//! damps each mode at rate `kappa_l` around frequency `omega_l`, and the
//! dipolar interaction is `H_int = sum_r (sigma_{r,+} phi_r + h.c.)` with
//! the site field `phi_r = -i (2N+1)^{-1/2} sum_l lambda_l a_l e^{2 pi i l r / n}`.
//!
//! The HL and DHL generators are parametrized directly by the complex
//! damping constants produced by their reservoir kernels; the matching maps
//! below translate them into AS parameters and certify the equivalences.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lindblad::{self, GeneratorSpec};
use crate::operators::{
    boson_ladder, embed_site_operator, fermion_site_pair, sigma_minus, sigma_plus, sigma_z,
    FactorKind, HilbertSpec, OperatorMatrix, DEFAULT_DIM_CAP,
};

const RESONANCE_TOL: f64 = 1e-12;

/// Alli-Sewell model parameters: `2N+1` two-level atoms coupled to `n`
/// damped radiation modes.
#[derive(Debug, Clone)]
pub struct ASParams {
    /// Chain half-length N; the chain carries `2N+1` sites.
    pub n_pairs: usize,
    pub n_modes: usize,
    /// Atomic level splitting (>= 0).
    pub epsilon: f64,
    /// Transverse damping.
    pub gamma1: f64,
    /// Longitudinal damping, `0 < gamma2 <= 2 gamma1`.
    pub gamma2: f64,
    /// Pump parameter in [-1, 1].
    pub eta: f64,
    /// Mode frequencies (> 0), one per mode.
    pub omega: Vec<f64>,
    /// Mode dampings (> 0), one per mode.
    pub kappa: Vec<f64>,
    /// Real matter-radiation couplings, one per mode.
    pub lambda: Vec<f64>,
    /// Bosonic Fock cutoff per mode.
    pub fock_cutoff: usize,
}

impl ASParams {
    pub fn atoms(&self) -> usize {
        2 * self.n_pairs + 1
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma2 > 0.0 && self.gamma2 <= 2.0 * self.gamma1) {
            return Err(Error::BadParameter(format!(
                "atomic dampings violate the admissible restrictions 0 < gamma2 <= 2*gamma1 \
                 (gamma1 = {}, gamma2 = {})",
                self.gamma1, self.gamma2
            )));
        }
        if !(-1.0..=1.0).contains(&self.eta) {
            return Err(Error::BadParameter(format!(
                "pump parameter must satisfy -1 <= eta <= 1, got {}",
                self.eta
            )));
        }
        if self.epsilon < 0.0 {
            return Err(Error::BadParameter(format!(
                "level splitting must be non-negative, got {}",
                self.epsilon
            )));
        }
        if self.omega.len() != self.n_modes
            || self.kappa.len() != self.n_modes
            || self.lambda.len() != self.n_modes
        {
            return Err(Error::BadParameter(
                "omega/kappa/lambda must each carry one entry per mode".into(),
            ));
        }
        if self.omega.iter().any(|w| *w <= 0.0) || self.kappa.iter().any(|k| *k <= 0.0) {
            return Err(Error::BadParameter(
                "mode frequencies and dampings must be positive".into(),
            ));
        }
        if self.n_modes > 0 && self.fock_cutoff < 2 {
            return Err(Error::BadCutoff(self.fock_cutoff));
        }
        Ok(())
    }
}

fn matter_radiation_space(
    matter: FactorKind,
    sites: usize,
    n_modes: usize,
    cutoff: usize,
    cap: usize,
) -> Result<HilbertSpec> {
    let mut factors = vec![matter; sites];
    factors.extend(std::iter::repeat(FactorKind::Boson(cutoff)).take(n_modes));
    HilbertSpec::with_cap(factors, cap)
}

/// Site fields `phi_r = -i sites^{-1/2} sum_l lambda_l a_l e^{2 pi i l r / n}`,
/// indexed by the site slot `0..sites` (site label `r = slot - N`).
fn site_fields(
    space: &HilbertSpec,
    sites: usize,
    n_modes: usize,
    lambda: &[f64],
) -> Result<Vec<OperatorMatrix>> {
    let norm = 1.0 / (sites as f64).sqrt();
    let half = (sites as i64 - 1) / 2;
    let mut fields = Vec::with_capacity(sites);
    for slot in 0..sites {
        let r = slot as i64 - half;
        let mut phi = OperatorMatrix::zero(space);
        for l in 0..n_modes {
            let cutoff = match space.factors()[sites + l] {
                FactorKind::Boson(d) => d,
                _ => unreachable!(),
            };
            let (a, _) = boson_ladder(cutoff)?;
            let a_l = embed_site_operator(space, sites + l, &a)?;
            let phase = 2.0 * std::f64::consts::PI * (l as f64) * (r as f64) / (n_modes as f64);
            let coeff = C64::new(0.0, -1.0) * norm * lambda[l] * C64::new(0.0, phase).exp();
            phi = phi.add(&a_l.scale(coeff))?;
        }
        fields.push(phi);
    }
    Ok(fields)
}

/// Interaction Hamiltonian `sum_r (raise_r phi_r + h.c.)`.
fn dipolar_interaction(
    space: &HilbertSpec,
    raises: &[OperatorMatrix],
    fields: &[OperatorMatrix],
) -> Result<OperatorMatrix> {
    let mut m = OperatorMatrix::zero(space);
    for (raise, phi) in raises.iter().zip(fields.iter()) {
        m = m.add(&raise.matmul(phi)?)?;
    }
    m.add(&m.adjoint())
}

/// Assemble the AS generator `L = L_mat + L_rad + i[H_int, .]`.
pub fn build_as_generator(p: &ASParams) -> Result<GeneratorSpec> {
    build_as_generator_capped(p, DEFAULT_DIM_CAP)
}

pub fn build_as_generator_capped(p: &ASParams, cap: usize) -> Result<GeneratorSpec> {
    p.validate()?;
    let sites = p.atoms();
    let space = matter_radiation_space(FactorKind::Spin, sites, p.n_modes, p.fock_cutoff, cap)?;

    let mut h = OperatorMatrix::zero(&space);
    let mut terms: Vec<(OperatorMatrix, C64)> = Vec::new();

    // Matter: per-site splitting eps/2 sigma_z plus decay / pump / dephasing
    // rates chosen to reproduce the AS matter action. gamma2 < 2 gamma1
    // requires the extra dephasing channel (sigma_z, (2 gamma1 - gamma2)/8).
    let g_down = p.gamma2 * (1.0 - p.eta) / 4.0;
    let g_up = p.gamma2 * (1.0 + p.eta) / 4.0;
    let g_phase = (2.0 * p.gamma1 - p.gamma2) / 8.0;
    let mut raises = Vec::with_capacity(sites);
    for r in 0..sites {
        let sz = embed_site_operator(&space, r, &sigma_z())?;
        let sm = embed_site_operator(&space, r, &sigma_minus())?;
        let sp = embed_site_operator(&space, r, &sigma_plus())?;
        h = h.add(&sz.scale(C64::new(0.5 * p.epsilon, 0.0)))?;
        if g_down != 0.0 {
            terms.push((sm, C64::new(g_down, 0.0)));
        }
        if g_up != 0.0 {
            terms.push((sp.clone(), C64::new(g_up, 0.0)));
        }
        if g_phase != 0.0 {
            terms.push((sz, C64::new(g_phase, 0.0)));
        }
        raises.push(sp);
    }

    // Radiation: per-mode frequency in H, damping as a jump term.
    for l in 0..p.n_modes {
        let (a, adag) = boson_ladder(p.fock_cutoff)?;
        let a_l = embed_site_operator(&space, sites + l, &a)?;
        let n_l = embed_site_operator(&space, sites + l, &adag)?.matmul(&a_l)?;
        h = h.add(&n_l.scale(C64::new(p.omega[l], 0.0)))?;
        terms.push((a_l, C64::new(p.kappa[l], 0.0)));
    }

    // Dipolar interaction.
    if p.n_modes > 0 && p.lambda.iter().any(|l| *l != 0.0) {
        let fields = site_fields(&space, sites, p.n_modes, &p.lambda)?;
        h = h.add(&dipolar_interaction(&space, &raises, &fields)?)?;
    }

    GeneratorSpec::new(space, h, terms)
}

/// Hepp-Lieb model after the weak-coupling limit: complex kernels per
/// reservoir, plus the resonance data `omega_R = 2 mu` of the underlying
/// Hamiltonian.
#[derive(Debug, Clone)]
pub struct HLParams {
    pub n_pairs: usize,
    pub n_modes: usize,
    /// Radiation kernels, one per mode.
    pub gamma_g: Vec<C64>,
    /// Matter kernel of the sigma_- reservoir.
    pub gamma_h1: C64,
    /// Matter kernel of the sigma_+ reservoir.
    pub gamma_h2: C64,
    pub lambda: Vec<f64>,
    /// Bare radiation frequency; construction requires `omega_r = 2 mu`.
    pub omega_r: f64,
    /// Bare atomic splitting.
    pub mu: f64,
    /// Rotating-wave flag; the limit generator is the same either way.
    pub rwa: bool,
    pub fock_cutoff: usize,
}

impl HLParams {
    pub fn atoms(&self) -> usize {
        2 * self.n_pairs + 1
    }

    pub fn validate(&self) -> Result<()> {
        if (self.omega_r - 2.0 * self.mu).abs() > RESONANCE_TOL * self.omega_r.abs().max(1.0) {
            return Err(Error::OffResonance);
        }
        if self.gamma_g.len() != self.n_modes || self.lambda.len() != self.n_modes {
            return Err(Error::BadParameter(
                "gamma_g/lambda must each carry one entry per mode".into(),
            ));
        }
        if self.gamma_g.iter().any(|g| g.re < 0.0)
            || self.gamma_h1.re < 0.0
            || self.gamma_h2.re < 0.0
        {
            return Err(Error::BadParameter(
                "HL kernels must have non-negative real parts".into(),
            ));
        }
        if self.n_modes > 0 && self.fock_cutoff < 2 {
            return Err(Error::BadCutoff(self.fock_cutoff));
        }
        Ok(())
    }
}

/// Assemble the HL limit generator: per-mode terms `(a_j, Gamma_g_j)`,
/// per-site terms `(sigma_-, Gamma_h1)` and `(sigma_+, Gamma_h2)`, plus the
/// dipolar Hamiltonian part.
pub fn build_hl_generator(p: &HLParams) -> Result<GeneratorSpec> {
    build_hl_generator_capped(p, DEFAULT_DIM_CAP)
}

pub fn build_hl_generator_capped(p: &HLParams, cap: usize) -> Result<GeneratorSpec> {
    p.validate()?;
    let sites = p.atoms();
    let space = matter_radiation_space(FactorKind::Spin, sites, p.n_modes, p.fock_cutoff, cap)?;

    let mut terms: Vec<(OperatorMatrix, C64)> = Vec::new();
    let mut raises = Vec::with_capacity(sites);
    for r in 0..sites {
        let sm = embed_site_operator(&space, r, &sigma_minus())?;
        let sp = embed_site_operator(&space, r, &sigma_plus())?;
        terms.push((sm, p.gamma_h1));
        terms.push((sp.clone(), p.gamma_h2));
        raises.push(sp);
    }
    for l in 0..p.n_modes {
        let (a, _) = boson_ladder(p.fock_cutoff)?;
        let a_l = embed_site_operator(&space, sites + l, &a)?;
        terms.push((a_l, p.gamma_g[l]));
    }

    let mut h = OperatorMatrix::zero(&space);
    if p.n_modes > 0 && p.lambda.iter().any(|l| *l != 0.0) {
        let fields = site_fields(&space, sites, p.n_modes, &p.lambda)?;
        h = h.add(&dipolar_interaction(&space, &raises, &fields)?)?;
    }
    GeneratorSpec::new(space, h, terms)
}

/// Result of matching an HL kernel set onto AS parameters.
#[derive(Debug, Clone)]
pub struct HlMatch {
    pub as_params: ASParams,
    /// The matching forces `gamma2 = 2 gamma1`; this is `|gamma2 - 2 gamma1|`.
    pub gamma2_constraint_defect: f64,
}

/// Solve the matching conditions
/// `omega_j = Im Gamma_g_j`, `kappa_j = Re Gamma_g_j`,
/// `gamma1 = Re(Gamma_h1 + Gamma_h2)`, `eps = Im(Gamma_h1 - Gamma_h2)`,
/// `gamma2 (1 -+ eta)/4 = Re Gamma_h{1,2}` for the AS parameter set.
pub fn match_hl_to_as(p: &HLParams) -> Result<HlMatch> {
    p.validate()?;
    let re_sum = p.gamma_h1.re + p.gamma_h2.re;
    if re_sum == 0.0 {
        return Err(Error::EtaUndefined);
    }
    let gamma1 = re_sum;
    let gamma2 = 2.0 * re_sum;
    let eta = (p.gamma_h2.re - p.gamma_h1.re) / re_sum;
    let epsilon = p.gamma_h1.im - p.gamma_h2.im;
    let as_params = ASParams {
        n_pairs: p.n_pairs,
        n_modes: p.n_modes,
        epsilon,
        gamma1,
        gamma2,
        eta,
        omega: p.gamma_g.iter().map(|g| g.im).collect(),
        kappa: p.gamma_g.iter().map(|g| g.re).collect(),
        lambda: p.lambda.clone(),
        fock_cutoff: p.fock_cutoff,
    };
    as_params.validate()?;
    Ok(HlMatch {
        gamma2_constraint_defect: (as_params.gamma2 - 2.0 * as_params.gamma1).abs(),
        as_params,
    })
}

/// Report of the counter-rotating-term check: the limit generator is
/// insensitive to the rotating-wave flag because the counter-rotating
/// contribution dies in the weak-coupling limit at resonance.
#[derive(Debug, Clone)]
pub struct CounterRotatingReport {
    /// `max |L_rwa - L_full|` on the operator basis (identically zero).
    pub max_matrix_defect: f64,
    pub generators_identical: bool,
    /// The standing resonance condition.
    pub resonance_condition: String,
}

pub fn counter_rotating_vanishes(p: &HLParams) -> Result<CounterRotatingReport> {
    let mut with_rwa = p.clone();
    with_rwa.rwa = true;
    let mut without = p.clone();
    without.rwa = false;
    let m1 = lindblad::heisenberg_matrix(&build_hl_generator(&with_rwa)?);
    let m2 = lindblad::heisenberg_matrix(&build_hl_generator(&without)?);
    let defect = (&m1 - &m2).iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(CounterRotatingReport {
        max_matrix_defect: defect,
        generators_identical: defect == 0.0,
        resonance_condition: "omega_R = 2 mu".to_string(),
    })
}

/// Dicke-Haken-Lax model after the weak-coupling limit: fermionic matter
/// sites with dissipation (`B` reservoirs) and pump (`C` reservoirs).
#[derive(Debug, Clone)]
pub struct DHLParams {
    pub n_sites: usize,
    pub n_modes: usize,
    pub gamma_g: Vec<C64>,
    pub gamma_b_plus: C64,
    pub gamma_b_minus: C64,
    pub gamma_c_plus: C64,
    pub gamma_c_minus: C64,
    pub lambda: Vec<f64>,
    pub omega_r: f64,
    pub mu: f64,
    pub fock_cutoff: usize,
}

impl DHLParams {
    pub fn validate(&self) -> Result<()> {
        if (self.omega_r - 2.0 * self.mu).abs() > RESONANCE_TOL * self.omega_r.abs().max(1.0) {
            return Err(Error::OffResonance);
        }
        if self.n_sites == 0 {
            return Err(Error::BadParameter("DHL needs at least one site".into()));
        }
        if self.gamma_g.len() != self.n_modes || self.lambda.len() != self.n_modes {
            return Err(Error::BadParameter(
                "gamma_g/lambda must each carry one entry per mode".into(),
            ));
        }
        for g in [
            self.gamma_b_plus,
            self.gamma_b_minus,
            self.gamma_c_plus,
            self.gamma_c_minus,
        ] {
            if g.re < 0.0 {
                return Err(Error::BadParameter(
                    "DHL kernels must have non-negative real parts".into(),
                ));
            }
        }
        if self.n_modes > 0 && self.fock_cutoff < 2 {
            return Err(Error::BadCutoff(self.fock_cutoff));
        }
        Ok(())
    }
}

/// Assemble the DHL limit generator: per-mode `(a_j, Gamma_g_j)`, per-site
/// dissipation `(b_+, Gamma_B+)`, `(b_-, Gamma_B-)` and pump
/// `(b_+^dag, Gamma_C+)`, `(b_-^dag, Gamma_C-)`, plus the quadratic dipolar
/// Hamiltonian `sum_l (phi_l b_+^dag b_- + h.c.)`.
pub fn build_dhl_generator(p: &DHLParams) -> Result<GeneratorSpec> {
    build_dhl_generator_capped(p, DEFAULT_DIM_CAP)
}

pub fn build_dhl_generator_capped(p: &DHLParams, cap: usize) -> Result<GeneratorSpec> {
    p.validate()?;
    let space = matter_radiation_space(
        FactorKind::FermionSite,
        p.n_sites,
        p.n_modes,
        p.fock_cutoff,
        cap,
    )?;
    let (bp, bm) = fermion_site_pair();

    let mut terms: Vec<(OperatorMatrix, C64)> = Vec::new();
    let mut raises = Vec::with_capacity(p.n_sites);
    for l in 0..p.n_sites {
        let bp_l = embed_site_operator(&space, l, &bp)?;
        let bm_l = embed_site_operator(&space, l, &bm)?;
        if p.gamma_b_plus != C64::new(0.0, 0.0) {
            terms.push((bp_l.clone(), p.gamma_b_plus));
        }
        if p.gamma_c_plus != C64::new(0.0, 0.0) {
            terms.push((bp_l.adjoint(), p.gamma_c_plus));
        }
        if p.gamma_b_minus != C64::new(0.0, 0.0) {
            terms.push((bm_l.clone(), p.gamma_b_minus));
        }
        if p.gamma_c_minus != C64::new(0.0, 0.0) {
            terms.push((bm_l.adjoint(), p.gamma_c_minus));
        }
        // sigma_+ analog b_+^dag b_-.
        raises.push(bp_l.adjoint().matmul(&bm_l)?);
    }
    for l in 0..p.n_modes {
        let (a, _) = boson_ladder(p.fock_cutoff)?;
        let a_l = embed_site_operator(&space, p.n_sites + l, &a)?;
        terms.push((a_l, p.gamma_g[l]));
    }

    let mut h = OperatorMatrix::zero(&space);
    if p.n_modes > 0 && p.lambda.iter().any(|l| *l != 0.0) {
        let fields = site_fields(&space, p.n_sites, p.n_modes, &p.lambda)?;
        h = h.add(&dipolar_interaction(&space, &raises, &fields)?)?;
    }
    GeneratorSpec::new(space, h, terms)
}

/// Equivalence report between the DHL limit generator and the AS form.
#[derive(Debug, Clone)]
pub struct DhlEquivalenceReport {
    /// `|Re(Gamma_B+ + Gamma_C+) - Re(Gamma_B- + Gamma_C-)|`: the condition
    /// for the sigma_z-analog equation to close in AS form.
    pub residual: f64,
    pub equivalent: bool,
    /// Transverse rate read off the sigma_+-analog equation.
    pub gamma1: f64,
    /// Longitudinal rate read off the sigma_z-analog equation (equals
    /// gamma1 when the residual vanishes).
    pub gamma2: f64,
    /// Implied pump parameter; flagged when it falls outside [-1, 1].
    pub eta: f64,
    pub eta_in_range: bool,
    /// Effective splitting from the imaginary parts.
    pub epsilon: f64,
}

/// Check `Re(Gamma_B+ + Gamma_C+) = Re(Gamma_B- + Gamma_C-)` and extract the
/// AS parameters implied by the quadratic equations of motion.
pub fn check_dhl_as_equivalence(p: &DHLParams) -> Result<DhlEquivalenceReport> {
    p.validate()?;
    let s_plus = p.gamma_b_plus.re + p.gamma_c_plus.re;
    let s_minus = p.gamma_b_minus.re + p.gamma_c_minus.re;
    let residual = (s_plus - s_minus).abs();
    let gamma1 = s_plus + s_minus;
    let gamma2 = gamma1; // forced when the residual vanishes
    let eta = if gamma2 != 0.0 {
        2.0 * (p.gamma_c_plus.re - p.gamma_c_minus.re) / gamma2
    } else {
        f64::NAN
    };
    let epsilon =
        p.gamma_b_plus.im - p.gamma_b_minus.im - p.gamma_c_plus.im + p.gamma_c_minus.im;
    Ok(DhlEquivalenceReport {
        residual,
        equivalent: residual <= 1e-12 * gamma1.max(1.0),
        gamma1,
        gamma2,
        eta,
        eta_in_range: eta.abs() <= 1.0 + 1e-12,
        epsilon,
    })
}

/// Map the DHL equivalence data onto a radiation-free AS parameter set
/// (used for twin-trajectory comparisons).
pub fn dhl_matched_as_params(report: &DhlEquivalenceReport) -> Result<ASParams> {
    let p = ASParams {
        n_pairs: 0,
        n_modes: 0,
        epsilon: report.epsilon,
        gamma1: report.gamma1,
        gamma2: report.gamma2,
        eta: report.eta,
        omega: vec![],
        kappa: vec![],
        lambda: vec![],
        fock_cutoff: 0,
    };
    p.validate()?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{apply_heisenberg, evolve, heisenberg_matrix};
    use ndarray::Array2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn single_atom(gamma1: f64, gamma2: f64, eta: f64, epsilon: f64) -> ASParams {
        ASParams {
            n_pairs: 0,
            n_modes: 0,
            epsilon,
            gamma1,
            gamma2,
            eta,
            omega: vec![],
            kappa: vec![],
            lambda: vec![],
            fock_cutoff: 0,
        }
    }

    #[test]
    fn as_matter_action_on_sigma_pm_and_sigma_z() {
        let (g1, g2, eta, eps) = (0.9, 1.1, 0.3, 0.7);
        let p = single_atom(g1, g2, eta, eps);
        let gen = build_as_generator(&p).unwrap();
        let space = gen.space().clone();

        // L(sigma_-) = -(gamma1 + i eps) sigma_-.
        let sm = embed_site_operator(&space, 0, &sigma_minus()).unwrap();
        let lsm = apply_heisenberg(&gen, &sm).unwrap();
        let expect = sm.scale(c(-g1, -eps));
        assert!((&lsm - &expect).fro_norm() < 1e-14);

        // L(sigma_+) = -(gamma1 - i eps) sigma_+.
        let sp = embed_site_operator(&space, 0, &sigma_plus()).unwrap();
        let lsp = apply_heisenberg(&gen, &sp).unwrap();
        let expect = sp.scale(c(-g1, eps));
        assert!((&lsp - &expect).fro_norm() < 1e-14);

        // L(sigma_z) = -gamma2 (sigma_z - eta).
        let sz = embed_site_operator(&space, 0, &sigma_z()).unwrap();
        let lsz = apply_heisenberg(&gen, &sz).unwrap();
        let expect = sz
            .sub(&OperatorMatrix::identity(&space).scale(c(eta, 0.0)))
            .unwrap()
            .scale(c(-g2, 0.0));
        assert!((&lsz - &expect).fro_norm() < 1e-14);
    }

    #[test]
    fn as_radiation_action_on_photon_number() {
        let p = ASParams {
            n_pairs: 0,
            n_modes: 1,
            epsilon: 0.5,
            gamma1: 1.0,
            gamma2: 1.0,
            eta: 0.0,
            omega: vec![1.0],
            kappa: vec![0.35],
            lambda: vec![0.0],
            fock_cutoff: 5,
        };
        let gen = build_as_generator(&p).unwrap();
        let space = gen.space().clone();
        let (a, adag) = boson_ladder(5).unwrap();
        let n = embed_site_operator(&space, 1, &adag)
            .unwrap()
            .matmul(&embed_site_operator(&space, 1, &a).unwrap())
            .unwrap();
        let ln = apply_heisenberg(&gen, &n).unwrap();
        let expect = n.scale(c(-2.0 * 0.35, 0.0));
        assert!((&ln - &expect).fro_norm() < 1e-13);

        // With the coupling off, the matter action is untouched by the mode:
        // L(sigma_-) = -(gamma1 + i eps) sigma_- on the product space too.
        let sm = embed_site_operator(&space, 0, &sigma_minus()).unwrap();
        let lsm = apply_heisenberg(&gen, &sm).unwrap();
        assert!((&lsm - &sm.scale(c(-p.gamma1, -p.epsilon))).fro_norm() < 1e-13);
    }

    #[test]
    fn as_single_atom_reaches_eta_fixed_point() {
        for eta in [-1.0, 0.0, 0.5, 1.0] {
            let p = single_atom(0.8, 1.2, eta, 0.4);
            let gen = build_as_generator(&p).unwrap();
            let space = gen.space().clone();
            let mut rho = Array2::<C64>::zeros((2, 2));
            rho[(0, 0)] = c(1.0, 0.0); // excited state
            let rho = OperatorMatrix::new(space.clone(), rho).unwrap();
            let sz = embed_site_operator(&space, 0, &sigma_z()).unwrap();
            let t_final = 20.0 / p.gamma2;
            let traj = evolve(&gen, &rho, t_final, gen.suggested_dt(), &[("sz".into(), sz)])
                .unwrap();
            let sz_t = traj.observables[0].1.last().unwrap().re;
            assert!((sz_t - eta).abs() < 1e-6, "eta {eta}: <sigma_z>(T) = {sz_t}");
            assert!(traj.trace_drift.iter().all(|d| *d < 1e-8));
        }
    }

    #[test]
    fn as_validation_rejects_bad_parameters() {
        let bad = single_atom(0.4, 1.0, 0.0, 0.5); // gamma2 > 2 gamma1
        assert!(matches!(build_as_generator(&bad), Err(Error::BadParameter(_))));
        let bad = single_atom(1.0, 1.0, 1.5, 0.5); // |eta| > 1
        assert!(build_as_generator(&bad).is_err());
        let mut bad = single_atom(1.0, 1.0, 0.0, 0.5);
        bad.n_modes = 1;
        bad.omega = vec![-1.0];
        bad.kappa = vec![0.2];
        bad.lambda = vec![0.1];
        bad.fock_cutoff = 4;
        assert!(build_as_generator(&bad).is_err());
    }

    fn hl_one_atom_one_mode(gh1: C64, gh2: C64, gg: C64, lambda: f64) -> HLParams {
        HLParams {
            n_pairs: 0,
            n_modes: 1,
            gamma_g: vec![gg],
            gamma_h1: gh1,
            gamma_h2: gh2,
            lambda: vec![lambda],
            omega_r: 2.0,
            mu: 1.0,
            rwa: true,
            fock_cutoff: 4,
        }
    }

    #[test]
    fn hl_matching_solves_the_linear_system() {
        // Gamma_h1 = Gamma_h2 = gamma/4 -> eta = 0, gamma1 = gamma/2,
        // gamma2 = gamma.
        let gamma = 0.8;
        let p = hl_one_atom_one_mode(c(gamma / 4.0, 0.0), c(gamma / 4.0, 0.0), c(0.3, 1.2), 0.25);
        let m = match_hl_to_as(&p).unwrap();
        assert!((m.as_params.eta - 0.0).abs() < 1e-15);
        assert!((m.as_params.gamma1 - gamma / 2.0).abs() < 1e-15);
        assert!((m.as_params.gamma2 - gamma).abs() < 1e-15);
        assert!((m.as_params.omega[0] - 1.2).abs() < 1e-15);
        assert!((m.as_params.kappa[0] - 0.3).abs() < 1e-15);
        assert_eq!(m.gamma2_constraint_defect, 0.0);

        // Gamma_h2 = 0 -> eta = -1 (single matter reservoir).
        let p = hl_one_atom_one_mode(c(0.5, 0.2), c(0.0, 0.0), c(0.3, 1.2), 0.25);
        let m = match_hl_to_as(&p).unwrap();
        assert!((m.as_params.eta + 1.0).abs() < 1e-15);

        // Both real parts zero: eta undefined.
        let p = hl_one_atom_one_mode(c(0.0, 0.4), c(0.0, -0.1), c(0.3, 1.2), 0.25);
        assert!(matches!(match_hl_to_as(&p), Err(Error::EtaUndefined)));
    }

    #[test]
    fn hl_and_matched_as_generators_are_the_same_map() {
        let p = hl_one_atom_one_mode(c(0.30, 0.45), c(0.10, 0.15), c(0.25, 0.9), 0.4);
        let hl = build_hl_generator(&p).unwrap();
        assert!(hl.unitality_defect() < 1e-13);
        let m = match_hl_to_as(&p).unwrap();
        let as_gen = build_as_generator(&m.as_params).unwrap();
        let mh = heisenberg_matrix(&hl);
        let ma = heisenberg_matrix(&as_gen);
        let scale = mh.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
        let defect = (&mh - &ma).iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
        assert!(defect < 1e-12 * scale.max(1.0), "defect {defect}");
    }

    #[test]
    fn hl_gamma_h2_zero_reduces_to_single_reservoir_form() {
        // eta = -1 pins the matched matter generator to the pure-decay form:
        // L(sigma_z) = -gamma2 (sigma_z + 1) with gamma2 = 2 Re Gamma_h1.
        let p = hl_one_atom_one_mode(c(0.5, 0.0), c(0.0, 0.0), c(0.2, 0.8), 0.0);
        let hl = build_hl_generator(&p).unwrap();
        let space = hl.space().clone();
        let sz = embed_site_operator(&space, 0, &sigma_z()).unwrap();
        let lsz = apply_heisenberg(&hl, &sz).unwrap();
        let expect = sz
            .add(&OperatorMatrix::identity(&space))
            .unwrap()
            .scale(c(-1.0, 0.0));
        assert!((&lsz - &expect).fro_norm() < 1e-13);
    }

    #[test]
    fn counter_rotating_term_never_enters() {
        let p = hl_one_atom_one_mode(c(0.3, 0.4), c(0.1, 0.1), c(0.2, 0.7), 0.3);
        let rep = counter_rotating_vanishes(&p).unwrap();
        assert!(rep.generators_identical);
        assert_eq!(rep.max_matrix_defect, 0.0);
        assert_eq!(rep.resonance_condition, "omega_R = 2 mu");

        // Off resonance the construction refuses.
        let mut off = p.clone();
        off.omega_r = 2.5;
        let err = build_hl_generator(&off).unwrap_err();
        assert!(err
            .to_string()
            .contains("off-resonance: SL interaction Hamiltonian time-dependent"));
    }

    fn dhl_single_site(gb_p: C64, gb_m: C64, gc_p: C64, gc_m: C64) -> DHLParams {
        DHLParams {
            n_sites: 1,
            n_modes: 0,
            gamma_g: vec![],
            gamma_b_plus: gb_p,
            gamma_b_minus: gb_m,
            gamma_c_plus: gc_p,
            gamma_c_minus: gc_m,
            lambda: vec![],
            omega_r: 2.0,
            mu: 1.0,
            fock_cutoff: 0,
        }
    }

    #[test]
    fn dhl_quadratic_closed_forms() {
        let (gbp, gbm, gcp, gcm) = (c(0.3, 0.12), c(0.2, -0.07), c(0.15, 0.05), c(0.25, 0.02));
        let p = dhl_single_site(gbp, gbm, gcp, gcm);
        let gen = build_dhl_generator(&p).unwrap();
        let space = gen.space().clone();
        let (bp, bm) = fermion_site_pair();
        let bp0 = embed_site_operator(&space, 0, &bp).unwrap();
        let bm0 = embed_site_operator(&space, 0, &bm).unwrap();

        // L(b_+^dag b_-) = -(Re[sum] - i Im[B+ - B- - C+ + C-]) b_+^dag b_-.
        let sp_analog = bp0.adjoint().matmul(&bm0).unwrap();
        let l_sp = apply_heisenberg(&gen, &sp_analog).unwrap();
        let re_sum = gbp.re + gbm.re + gcp.re + gcm.re;
        let im_comb = gbp.im - gbm.im - gcp.im + gcm.im;
        let expect = sp_analog.scale(c(-re_sum, im_comb));
        assert!((&l_sp - &expect).fro_norm() < 1e-12);

        // L(n_+ - n_-) = 2(-n_+ Re[B+ + C+] + Re C+ + n_- Re[B- + C-] - Re C-).
        let n_plus = bp0.adjoint().matmul(&bp0).unwrap();
        let n_minus = bm0.adjoint().matmul(&bm0).unwrap();
        let sz_analog = n_plus.sub(&n_minus).unwrap();
        let l_sz = apply_heisenberg(&gen, &sz_analog).unwrap();
        let one = OperatorMatrix::identity(&space);
        let expect = n_plus
            .scale(c(-2.0 * (gbp.re + gcp.re), 0.0))
            .add(&one.scale(c(2.0 * gcp.re, 0.0)))
            .unwrap()
            .add(&n_minus.scale(c(2.0 * (gbm.re + gcm.re), 0.0)))
            .unwrap()
            .add(&one.scale(c(-2.0 * gcm.re, 0.0)))
            .unwrap();
        assert!((&l_sz - &expect).fro_norm() < 1e-12);

        // Unitality.
        assert!(gen.unitality_defect() < 1e-14);
    }

    #[test]
    fn dhl_equivalence_report() {
        // All four kernels equal and real: equivalence holds, eta = 0.
        let g = c(0.2, 0.0);
        let p = dhl_single_site(g, g, g, g);
        let rep = check_dhl_as_equivalence(&p).unwrap();
        assert!(rep.equivalent);
        assert_eq!(rep.residual, 0.0);
        assert!((rep.gamma1 - 0.8).abs() < 1e-15);
        assert!((rep.gamma2 - rep.gamma1).abs() < 1e-15);
        assert!((rep.eta - 0.0).abs() < 1e-15);

        // Perturbing Gamma_C+ by delta shows up linearly in the residual.
        let delta = 0.037;
        let p = dhl_single_site(g, g, c(0.2 + delta, 0.0), g);
        let rep = check_dhl_as_equivalence(&p).unwrap();
        assert!((rep.residual - delta).abs() < 1e-15);
        assert!(!rep.equivalent);
    }

    #[test]
    fn dhl_and_as_twin_trajectories_agree() {
        let p = dhl_single_site(c(0.30, 0.0), c(0.22, 0.0), c(0.10, 0.0), c(0.18, 0.0));
        let rep = check_dhl_as_equivalence(&p).unwrap();
        assert!(rep.equivalent);
        let as_params = dhl_matched_as_params(&rep).unwrap();

        let dhl = build_dhl_generator(&p).unwrap();
        let as_gen = build_as_generator(&as_params).unwrap();

        // Matched initial states: spin state embedded in the
        // single-excitation block |+>, |-> of the fermion site.
        let (p_ee, p_gg) = (0.85, 0.15);
        let coh = c(0.2, -0.1);
        let mut rho_spin = Array2::<C64>::zeros((2, 2));
        rho_spin[(0, 0)] = c(p_ee, 0.0);
        rho_spin[(1, 1)] = c(p_gg, 0.0);
        rho_spin[(0, 1)] = coh;
        rho_spin[(1, 0)] = coh.conj();
        let rho_spin = OperatorMatrix::new(as_gen.space().clone(), rho_spin).unwrap();

        let mut rho_f = Array2::<C64>::zeros((4, 4));
        rho_f[(1, 1)] = c(p_ee, 0.0);
        rho_f[(2, 2)] = c(p_gg, 0.0);
        rho_f[(1, 2)] = coh;
        rho_f[(2, 1)] = coh.conj();
        let rho_f = OperatorMatrix::new(dhl.space().clone(), rho_f).unwrap();

        let sz = embed_site_operator(as_gen.space(), 0, &sigma_z()).unwrap();
        let (bp, bm) = fermion_site_pair();
        let bp0 = embed_site_operator(dhl.space(), 0, &bp).unwrap();
        let bm0 = embed_site_operator(dhl.space(), 0, &bm).unwrap();
        let sz_analog = bp0
            .adjoint()
            .matmul(&bp0)
            .unwrap()
            .sub(&bm0.adjoint().matmul(&bm0).unwrap())
            .unwrap();
        let sp_analog = bp0.adjoint().matmul(&bm0).unwrap();
        let sp = embed_site_operator(as_gen.space(), 0, &sigma_plus()).unwrap();

        let t_final = 10.0 / rep.gamma1;
        let dt = as_gen.suggested_dt().min(dhl.suggested_dt());
        let t_as = evolve(
            &as_gen,
            &rho_spin,
            t_final,
            dt,
            &[("sz".into(), sz), ("sp".into(), sp)],
        )
        .unwrap();
        let t_dhl = evolve(
            &dhl,
            &rho_f,
            t_final,
            dt,
            &[("sz".into(), sz_analog), ("sp".into(), sp_analog)],
        )
        .unwrap();
        assert_eq!(t_as.times.len(), t_dhl.times.len());
        for obs in 0..2 {
            for (a, b) in t_as.observables[obs]
                .1
                .iter()
                .zip(t_dhl.observables[obs].1.iter())
            {
                assert!((a - b).norm() < 1e-8, "observable {obs}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn dhl_unitality_with_modes() {
        let p = DHLParams {
            n_sites: 1,
            n_modes: 1,
            gamma_g: vec![c(0.2, 0.5)],
            gamma_b_plus: c(0.3, 0.1),
            gamma_b_minus: c(0.3, -0.1),
            gamma_c_plus: c(0.1, 0.0),
            gamma_c_minus: c(0.1, 0.0),
            lambda: vec![0.3],
            omega_r: 2.0,
            mu: 1.0,
            fock_cutoff: 4,
        };
        let gen = build_dhl_generator(&p).unwrap();
        assert!(gen.unitality_defect() < 1e-13);
        let one = OperatorMatrix::identity(gen.space());
        assert!(apply_heisenberg(&gen, &one).unwrap().fro_norm() < 1e-13);
    }
}
