//! Complex damping coefficients from reservoir spectral densities.
//!
//! The central object is the half-time-axis integral
//!
//! ```text
//! Gamma(J, e0, s) = int_{-inf}^0 dtau int de J(e) exp(s*i*tau*(e - e0))
//!                 = pi J(e0)  -  s*i * PV int J(e)/(e - e0) de
//! ```
//!
//! for a compactly supported density `J`. The real part is the on-shell
//! (golden-rule) rate, the imaginary part the principal-value Hilbert
//! transform (Lamb-type shift). Densities are tabulated on a strictly
//! increasing grid with linear interpolation; the PV integral is evaluated
//! in singularity-subtracted form with the piecewise-linear model integrated
//! exactly on every interval, so grid refinement is the only accuracy knob.
//!
//! Finite temperature enters through the canonical (Fock-anti-Fock) split of
//! a thermal boson into two vacuum families with Bose weights
//! `m(e) = 1/(1 - exp(-beta e))` and `n(e) = exp(-beta e)/(1 - exp(-beta e))`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Orientation of the phase `exp(s*i*tau*(e - e0))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Tabulated reservoir spectral function with compact support and linear
/// interpolation. Complex weights are allowed (off-diagonal form-factor
/// products); diagonal densities carry real non-negative weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    grid: Vec<f64>,
    weights: Vec<C64>,
}

impl SpectralDensity {
    pub fn new(grid: Vec<f64>, weights: Vec<C64>) -> Result<Self> {
        if grid.is_empty() || grid.len() != weights.len() {
            return Err(Error::BadGrid);
        }
        if grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::BadGrid);
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadGrid);
        }
        if weights.iter().any(|w| !w.re.is_finite() || !w.im.is_finite()) {
            return Err(Error::BadWeights);
        }
        Ok(SpectralDensity { grid, weights })
    }

    /// Diagonal density (`f = f'`): real non-negative weights.
    pub fn new_diagonal(grid: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| *w < 0.0) {
            return Err(Error::NotDiagonal);
        }
        Self::new(grid, weights.into_iter().map(|w| C64::new(w, 0.0)).collect())
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn weights(&self) -> &[C64] {
        &self.weights
    }

    pub fn support(&self) -> (f64, f64) {
        (self.grid[0], *self.grid.last().unwrap())
    }

    pub fn is_diagonal(&self) -> bool {
        self.weights.iter().all(|w| w.im == 0.0 && w.re >= 0.0)
    }

    /// Linearly interpolated value; identically zero outside the support.
    pub fn value_at(&self, e: f64) -> C64 {
        let (a, b) = self.support();
        if e < a || e > b {
            return C64::new(0.0, 0.0);
        }
        match self.grid.binary_search_by(|x| x.partial_cmp(&e).unwrap()) {
            Ok(i) => self.weights[i],
            Err(i) => {
                let (x0, x1) = (self.grid[i - 1], self.grid[i]);
                let t = (e - x0) / (x1 - x0);
                self.weights[i - 1] * (1.0 - t) + self.weights[i] * t
            }
        }
    }

    pub fn scaled(&self, c: C64) -> Self {
        SpectralDensity {
            grid: self.grid.clone(),
            weights: self.weights.iter().map(|w| c * w).collect(),
        }
    }

    /// Principal-value integral `PV int J(e)/(e - e0) de` in
    /// singularity-subtracted form, with the piecewise-linear interpolant
    /// integrated exactly per interval:
    ///
    /// `PV int J/(e-e0) = sum_i int (J - J0)/(e - e0) + J0 ln|(b-e0)/(a-e0)|`.
    pub fn pv_integral(&self, e0: f64) -> Result<C64> {
        if !e0.is_finite() {
            return Err(Error::BadResonance);
        }
        let (a, b) = self.support();
        let j0 = self.value_at(e0);
        if (e0 == a || e0 == b) && j0.norm() > 0.0 {
            return Err(Error::PvEndpointSingularity { resonance: e0 });
        }
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.grid.len() - 1 {
            let (x0, x1) = (self.grid[i], self.grid[i + 1]);
            let (w0, w1) = (self.weights[i], self.weights[i + 1]);
            let slope = (w1 - w0) / (x1 - x0);
            // Value of this interval's extended line at e0.
            let line_at_e0 = w0 + slope * (e0 - x0);
            // int (J - J0)/(e - e0) over [x0, x1]
            //   = slope*(x1 - x0) + (line(e0) - J0) * ln|(x1-e0)/(x0-e0)|.
            acc += slope * (x1 - x0);
            let coeff = line_at_e0 - j0;
            if coeff.norm() > 0.0 {
                // e0 is outside this interval's closure here (the coefficient
                // vanishes on intervals whose line passes through (e0, J0)),
                // except when e0 coincides with a node of a kinked density;
                // the PV of the log term is still the symmetric limit.
                let num = (x1 - e0).abs();
                let den = (x0 - e0).abs();
                if num > 0.0 && den > 0.0 {
                    acc += coeff * (num / den).ln();
                }
            }
        }
        if j0.norm() > 0.0 {
            acc += j0 * ((b - e0).abs() / (a - e0).abs()).ln();
        }
        Ok(acc)
    }

    /// Parse the two/three-column text table `(e, Re J [, Im J])`.
    /// Whitespace-separated; lines starting with `#` are comments.
    pub fn from_table_str(text: &str) -> Result<Self> {
        let mut grid = Vec::new();
        let mut weights = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 2 && cols.len() != 3 {
                return Err(Error::TableParse {
                    line: lineno + 1,
                    reason: format!("expected 2 or 3 columns, got {}", cols.len()),
                });
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|e| Error::TableParse {
                    line: lineno + 1,
                    reason: format!("bad number {s:?}: {e}"),
                })
            };
            let e = parse(cols[0])?;
            let re = parse(cols[1])?;
            let im = if cols.len() == 3 { parse(cols[2])? } else { 0.0 };
            grid.push(e);
            weights.push(C64::new(re, im));
        }
        SpectralDensity::new(grid, weights)
    }

    /// Write the same table format (three columns when any weight is
    /// complex, two otherwise).
    pub fn to_table_string(&self) -> String {
        let complex = self.weights.iter().any(|w| w.im != 0.0);
        let mut out = String::from("# e  Re J");
        if complex {
            out.push_str("  Im J");
        }
        out.push('\n');
        for (e, w) in self.grid.iter().zip(self.weights.iter()) {
            if complex {
                out.push_str(&format!("{:.17e} {:.17e} {:.17e}\n", e, w.re, w.im));
            } else {
                out.push_str(&format!("{:.17e} {:.17e}\n", e, w.re));
            }
        }
        out
    }
}

/// Complex damping constant with its evaluation context.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaCoefficient {
    pub value: C64,
    pub resonance: f64,
    pub orientation: Sign,
}

/// `Gamma = pi J(e0) - s*i * PV int J(e)/(e - e0) de`.
pub fn gamma(density: &SpectralDensity, resonance: f64, orientation: Sign) -> Result<GammaCoefficient> {
    if !resonance.is_finite() {
        return Err(Error::BadResonance);
    }
    let on_shell = density.value_at(resonance) * std::f64::consts::PI;
    let pv = density.pv_integral(resonance)?;
    let value = on_shell - C64::new(0.0, orientation.factor()) * pv;
    Ok(GammaCoefficient {
        value,
        resonance,
        orientation,
    })
}

/// Result of the damped-quadrature oracle.
#[derive(Debug, Clone, Copy)]
pub struct BruteGamma {
    pub value: C64,
    /// False when the Richardson ladder did not contract.
    pub converged: bool,
}

/// Brute-force evaluation of the same half-time-axis integral with an
/// explicit damping `exp(eta*tau)` and Richardson extrapolation `eta -> 0+`.
///
/// The inner energy integral of the piecewise-linear density is done in
/// closed form per interval; the tau integral uses composite Simpson on
/// `[-T, 0]` with `T = 40/eta`. Test/oracle use only.
pub fn gamma_brute(
    density: &SpectralDensity,
    resonance: f64,
    orientation: Sign,
    etas: &[f64],
) -> Result<BruteGamma> {
    if etas.len() < 3
        || etas.iter().any(|e| *e <= 0.0)
        || etas.windows(2).any(|w| w[0] <= w[1])
    {
        return Err(Error::BadEtaLadder);
    }
    if !resonance.is_finite() {
        return Err(Error::BadResonance);
    }

    let s = orientation.factor();
    let (a, b) = density.support();
    let omega_max = (a - resonance).abs().max((b - resonance).abs()).max(1e-12);

    // 10-point Gauss-Legendre nodes and weights on [-1, 1].
    const GL_X: [f64; 10] = [
        -0.9739065285171717,
        -0.8650633666889845,
        -0.6794095682990244,
        -0.4333953941292472,
        -0.14887433898163122,
        0.14887433898163122,
        0.4333953941292472,
        0.6794095682990244,
        0.8650633666889845,
        0.9739065285171717,
    ];
    const GL_W: [f64; 10] = [
        0.06667134430868814,
        0.14945134915058059,
        0.21908636251598204,
        0.26926671930999635,
        0.29552422471475287,
        0.29552422471475287,
        0.26926671930999635,
        0.21908636251598204,
        0.14945134915058059,
        0.06667134430868814,
    ];

    let value_at_eta = |eta: f64| -> C64 {
        let t_max = 40.0 / eta;
        // One oscillation period per Gauss panel keeps the rule near-exact.
        let panel = (2.0 * std::f64::consts::PI / omega_max).min(2.0 / eta);
        let n_panels = (t_max / panel).ceil().max(4.0) as usize;
        let h = t_max / n_panels as f64;

        let integrand = |tau: f64| -> C64 {
            // int de J(e) exp(i*s*tau*(e - e0)), exact per linear interval.
            let phi = s * tau;
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..density.grid.len() - 1 {
                let (x0, x1) = (density.grid[i], density.grid[i + 1]);
                let (w0, w1) = (density.weights[i], density.weights[i + 1]);
                let d = x1 - x0;
                let m = (w1 - w0) / d;
                let base = C64::new(0.0, phi * (x0 - resonance)).exp();
                let z = phi * d;
                let (i0, i1) = if z.abs() < 1e-4 {
                    // Series for int_0^d e^{i phi u} du and int_0^d u e^{i phi u} du.
                    let iz = C64::new(0.0, z);
                    let i0 = d * (C64::new(1.0, 0.0) + iz / 2.0 + iz * iz / 6.0 + iz * iz * iz / 24.0);
                    let i1 = d * d
                        * (C64::new(0.5, 0.0) + iz / 3.0 + iz * iz / 8.0 + iz * iz * iz / 30.0);
                    (i0, i1)
                } else {
                    let eiz = C64::new(0.0, z).exp();
                    let iphi = C64::new(0.0, phi);
                    let i0 = (eiz - 1.0) / iphi;
                    let i1 = d * eiz / iphi - (eiz - 1.0) / (iphi * iphi);
                    (i0, i1)
                };
                acc += base * (w0 * i0 + m * i1);
            }
            acc * (eta * tau).exp()
        };

        // Composite Gauss-Legendre over tau in [-T, 0].
        let mut sum = C64::new(0.0, 0.0);
        for k in 0..n_panels {
            let lo = -t_max + k as f64 * h;
            let mid = lo + 0.5 * h;
            for (x, w) in GL_X.iter().zip(GL_W.iter()) {
                sum += *w * integrand(mid + 0.5 * h * x);
            }
        }
        sum * (0.5 * h)
    };

    let raw: Vec<C64> = etas.iter().map(|&eta| value_at_eta(eta)).collect();

    // Neville polynomial extrapolation in eta to eta = 0.
    let mut table = raw.clone();
    let n = table.len();
    let mut prev_step = f64::INFINITY;
    let mut converged = true;
    for level in 1..n {
        for i in 0..n - level {
            let e_i = etas[i];
            let e_j = etas[i + level];
            table[i] = (table[i] * e_j - table[i + 1] * e_i) / (e_j - e_i);
        }
        let step = (table[0] - raw[0]).norm();
        if level >= 2 && step > 4.0 * prev_step.max(1e-14) {
            converged = false;
        }
        prev_step = step;
    }
    Ok(BruteGamma {
        value: table[0],
        converged,
    })
}

/// Bose factors of the canonical thermal representation.
#[derive(Debug, Clone, Copy)]
pub struct ThermalSplit {
    pub beta: f64,
}

impl ThermalSplit {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::BadBeta(beta));
        }
        Ok(ThermalSplit { beta })
    }

    /// `m(e) = 1/(1 - exp(-beta e))`.
    pub fn m(&self, e: f64) -> f64 {
        1.0 / (-(-self.beta * e).exp_m1())
    }

    /// `n(e) = exp(-beta e)/(1 - exp(-beta e)) = m(e) - 1`.
    pub fn n(&self, e: f64) -> f64 {
        let x = (-self.beta * e).exp();
        x / (1.0 - x)
    }
}

/// Split a diagonal density into its Fock / anti-Fock thermal parts
/// `J_m(e) = m(e) J(e)` and `J_n(e) = n(e) J(e)` on the same grid.
pub fn thermal_split_density(
    density: &SpectralDensity,
    beta: f64,
) -> Result<(SpectralDensity, SpectralDensity)> {
    let split = ThermalSplit::new(beta)?;
    if !density.is_diagonal() {
        return Err(Error::NotDiagonal);
    }
    if density.grid.iter().any(|&e| e <= 0.0) {
        return Err(Error::NonPositiveGrid);
    }
    let jm: Vec<f64> = density
        .grid
        .iter()
        .zip(density.weights.iter())
        .map(|(&e, w)| split.m(e) * w.re)
        .collect();
    let jn: Vec<f64> = density
        .grid
        .iter()
        .zip(density.weights.iter())
        .map(|(&e, w)| split.n(e) * w.re)
        .collect();
    Ok((
        SpectralDensity::new_diagonal(density.grid.clone(), jm)?,
        SpectralDensity::new_diagonal(density.grid.clone(), jn)?,
    ))
}

/// On-shell real parts of the thermal pair at frequency `omega`.
#[derive(Debug, Clone, Copy)]
pub struct OnshellPair {
    /// `pi * m(omega) * J(omega)` — emission-side rate.
    pub re_gamma_a: f64,
    /// `pi * n(omega) * J(omega)` — absorption-side rate.
    pub re_gamma_b: f64,
    /// True when `omega` lies outside the density support (both rates zero).
    pub off_shell: bool,
}

/// `(Re Gamma_+^{(a)}, Re Gamma_+^{(b)})` with the KMS ratio `exp(beta omega)`
/// built in: `pi e^{bw}/(e^{bw}-1) J(w)` and `pi/(e^{bw}-1) J(w)`.
pub fn onshell_gamma_pair(density: &SpectralDensity, beta: f64, omega: f64) -> Result<OnshellPair> {
    let split = ThermalSplit::new(beta)?;
    if !(omega > 0.0) {
        return Err(Error::BadParameter(format!(
            "on-shell frequency must be positive, got {omega}"
        )));
    }
    if !density.is_diagonal() {
        return Err(Error::NotDiagonal);
    }
    let (a, b) = density.support();
    if omega < a || omega > b {
        return Ok(OnshellPair {
            re_gamma_a: 0.0,
            re_gamma_b: 0.0,
            off_shell: true,
        });
    }
    let j = density.value_at(omega).re;
    Ok(OnshellPair {
        re_gamma_a: std::f64::consts::PI * split.m(omega) * j,
        re_gamma_b: std::f64::consts::PI * split.n(omega) * j,
        off_shell: false,
    })
}
