//! Landau-level transport in crossed fields: level data and form factors,
//! the fine-tuning condition (FTC) on the field ratio, the damping-weighted
//! response sums `Theta_x` / `Theta_y`, and the conductivity / resistivity
//! tensors they imply.
//!
//! Geometry: a 2d layer in the (x, y) plane, electric field `E` along y,
//! magnetic field `B` along z, Landau gauge with periodic boundary along x
//! (length `L_x`). The single-electron levels are
//!
//! ```text
//! eps_{n,p} = hbar w (n + 1/2) - (e E / 2 m w^2)(e E - 4 hbar w pi p / L_x)
//! ```
//!
//! with `w = e B / (m c)`. The x-component of the field-derivative of the
//! current is nonzero only when the dimensionless ratio
//! `2 pi e E / (m w^2 L_x)` equals one of the finitely many rationals
//! `(n_b - n_b') / (p_b' - p_b)` reachable inside the configured index
//! bounds; that arithmetic test is the FTC.
//!
//! Position matrix elements are implemented in closed form for the lowest
//! Landau level (LLL); all response sums run over the LLL block.

use std::collections::HashMap;

use num_complex::Complex64 as C64;
use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::kernels::{self, SpectralDensity, Sign};

pub mod oracle;

/// Geometry, fields and index bounds.
#[derive(Debug, Clone)]
pub struct LandauConfig {
    /// Electron charge (natural-unit default 1).
    pub e_charge: f64,
    /// Electron mass.
    pub mass: f64,
    /// Speed of light.
    pub c_light: f64,
    pub hbar: f64,
    /// Electric field along y (>= 0); ignored when `ratio` is pinned.
    pub e_field: f64,
    /// Magnetic field along z (> 0).
    pub b_field: f64,
    /// Layer length along x.
    pub l_x: f64,
    /// Max Landau index.
    pub n_max: u32,
    /// Momentum labels run over `-p_max ..= p_max`.
    pub p_max: i64,
    /// Current-response proportionality constant.
    pub alpha_c: f64,
    /// When set, the FTC ratio is this exact rational and the electric
    /// field is derived from it; membership tests become exact.
    pub ratio: Option<Rational64>,
    /// Read `h` as `2 pi hbar` (default); `false` reads `h = hbar` for
    /// convention-sensitivity checks.
    pub h_is_two_pi_hbar: bool,
    /// Tolerance for float FTC membership.
    pub ftc_tol: f64,
    /// Cap on the index-set size.
    pub dim_cap: usize,
}

impl LandauConfig {
    /// Natural units (`e = m = c = hbar = 1`, `alpha_c = 1`).
    pub fn natural(b_field: f64, e_field: f64, l_x: f64, n_max: u32, p_max: i64) -> Self {
        LandauConfig {
            e_charge: 1.0,
            mass: 1.0,
            c_light: 1.0,
            hbar: 1.0,
            e_field,
            b_field,
            l_x,
            n_max,
            p_max,
            alpha_c: 1.0,
            ratio: None,
            h_is_two_pi_hbar: true,
            ftc_tol: 1e-9,
            dim_cap: 4096,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b_field > 0.0) || !(self.l_x > 0.0) || self.e_field_raw() < 0.0 {
            return Err(Error::BadParameter(
                "fields require E >= 0, B > 0, L_x > 0".into(),
            ));
        }
        if self.p_max < 1 {
            return Err(Error::BadParameter("p_max must be at least 1".into()));
        }
        let states = (self.n_max as usize + 1) * (2 * self.p_max as usize + 1);
        if states > self.dim_cap {
            return Err(Error::DimensionCap {
                dim: states,
                cap: self.dim_cap,
            });
        }
        Ok(())
    }

    /// Cyclotron frequency `w = e B / (m c)`.
    pub fn omega(&self) -> f64 {
        self.e_charge * self.b_field / (self.mass * self.c_light)
    }

    /// `h` in the transport prefactors.
    pub fn h(&self) -> f64 {
        if self.h_is_two_pi_hbar {
            2.0 * std::f64::consts::PI * self.hbar
        } else {
            self.hbar
        }
    }

    /// Electric field, derived from the pinned ratio when present.
    pub fn e_field(&self) -> f64 {
        match self.ratio {
            Some(r) => {
                let w = self.omega();
                let rf = *r.numer() as f64 / *r.denom() as f64;
                rf * self.mass * w * w * self.l_x / (2.0 * std::f64::consts::PI * self.e_charge)
            }
            None => self.e_field,
        }
    }

    fn e_field_raw(&self) -> f64 {
        self.e_field()
    }

    /// FTC ratio `2 pi e E / (m w^2 L_x)`.
    pub fn ratio_f64(&self) -> f64 {
        let w = self.omega();
        2.0 * std::f64::consts::PI * self.e_charge * self.e_field()
            / (self.mass * w * w * self.l_x)
    }

    /// Exact rational ratio when it is known exactly (pinned, or E = 0).
    pub fn ratio_exact(&self) -> Option<Rational64> {
        if let Some(r) = self.ratio {
            Some(r)
        } else if self.e_field == 0.0 {
            Some(Rational64::new(0, 1))
        } else {
            None
        }
    }

    /// Degeneracy tolerance for energy-delta comparisons.
    pub fn energy_tol(&self) -> f64 {
        1e-10 * self.hbar * self.omega()
    }

    pub fn in_bounds(&self, idx: LevelIndex) -> bool {
        idx.n <= self.n_max && idx.p.abs() <= self.p_max
    }

    /// All `(n, p)` levels within the bounds.
    pub fn levels(&self) -> Vec<LevelIndex> {
        let mut v = Vec::new();
        for n in 0..=self.n_max {
            for p in -self.p_max..=self.p_max {
                v.push(LevelIndex { n, p });
            }
        }
        v
    }

    /// The LLL block.
    pub fn lll_levels(&self) -> Vec<LevelIndex> {
        (-self.p_max..=self.p_max)
            .map(|p| LevelIndex { n: 0, p })
            .collect()
    }

    /// Copy with a raw electric field (clears a pinned ratio).
    pub fn with_e_field(&self, e_field: f64) -> Self {
        let mut cfg = self.clone();
        cfg.ratio = None;
        cfg.e_field = e_field;
        cfg
    }
}

/// Landau quantum numbers `(n, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LevelIndex {
    pub n: u32,
    pub p: i64,
}

impl LevelIndex {
    pub fn new(n: u32, p: i64) -> Self {
        LevelIndex { n, p }
    }
}

/// Single-electron energy at the configured field.
pub fn level_energy(cfg: &LandauConfig, idx: LevelIndex) -> Result<f64> {
    if !cfg.in_bounds(idx) {
        return Err(Error::LevelOutOfBounds {
            n: idx.n,
            p: idx.p,
            n_max: cfg.n_max,
            p_max: cfg.p_max,
        });
    }
    Ok(level_energy_at(cfg, idx, cfg.e_field()))
}

/// Energy with an explicit field value (used by field derivatives).
pub(crate) fn level_energy_at(cfg: &LandauConfig, idx: LevelIndex, e_field: f64) -> f64 {
    let w = cfg.omega();
    let e = cfg.e_charge;
    cfg.hbar * w * (idx.n as f64 + 0.5)
        - (e * e_field / (2.0 * cfg.mass * w * w))
            * (e * e_field
                - 4.0 * cfg.hbar * w * std::f64::consts::PI * idx.p as f64 / cfg.l_x)
}

/// Guiding-centre offset `y0^(p) = (hbar w 2 pi p / L_x - e E) / (m w^2)`.
pub(crate) fn y0_at(cfg: &LandauConfig, p: i64, e_field: f64) -> f64 {
    let w = cfg.omega();
    (cfg.hbar * w * 2.0 * std::f64::consts::PI * p as f64 / cfg.l_x
        - cfg.e_charge * e_field)
        / (cfg.mass * w * w)
}

pub fn y0(cfg: &LandauConfig, p: i64) -> f64 {
    y0_at(cfg, p, cfg.e_field())
}

/// LLL position matrix elements between `gamma` and `mu`.
#[derive(Debug, Clone, Copy)]
pub struct PositionElements {
    /// x-component element (purely imaginary off the diagonal).
    pub x1: C64,
    /// y-component element (diagonal in p).
    pub x2: f64,
    /// `x~ = i x1`, real.
    pub x1_tilde: f64,
}

pub fn position_matrix_elements(
    cfg: &LandauConfig,
    gamma: LevelIndex,
    mu: LevelIndex,
) -> Result<PositionElements> {
    // TODO: route n > 0 through numerical Hermite-function overlaps behind
    // this same interface; only the LLL has closed forms today.
    if gamma.n != 0 {
        return Err(Error::NotLll(gamma.n));
    }
    if mu.n != 0 {
        return Err(Error::NotLll(mu.n));
    }
    if !cfg.in_bounds(gamma) || !cfg.in_bounds(mu) {
        return Err(Error::LevelOutOfBounds {
            n: gamma.n.max(mu.n),
            p: gamma.p.abs().max(mu.p.abs()) * gamma.p.signum().max(1),
            n_max: cfg.n_max,
            p_max: cfg.p_max,
        });
    }
    position_elements_at(cfg, gamma.p, mu.p, cfg.e_field())
}

pub(crate) fn position_elements_at(
    cfg: &LandauConfig,
    p_gamma: i64,
    p_mu: i64,
    e_field: f64,
) -> Result<PositionElements> {
    let q = p_mu - p_gamma;
    if q == 0 {
        return Ok(PositionElements {
            x1: C64::new(0.0, 0.0),
            x2: y0_at(cfg, p_gamma, e_field),
            x1_tilde: 0.0,
        });
    }
    let w = cfg.omega();
    let y = std::f64::consts::PI / cfg.l_x * (cfg.hbar / (cfg.mass * w)).sqrt() * q as f64;
    let sign = if q.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let x1_tilde = sign * cfg.l_x * (-y * y).exp() / (2.0 * std::f64::consts::PI * q as f64);
    Ok(PositionElements {
        // 1/(2 pi i q) = -i/(2 pi q).
        x1: C64::new(0.0, -x1_tilde),
        x2: 0.0,
        x1_tilde,
    })
}

/// LLL matrix element of the plane wave `e^{i k r}` between `(0, p_a)` and
/// `(0, p_b)`: the x-integral gives a periodic sinc in
/// `k_x + 2 pi (p_b - p_a)/L_x`, the y-integral a Gaussian overlap.
pub fn lll_plane_wave_element(
    cfg: &LandauConfig,
    p_a: i64,
    p_b: i64,
    k_x: f64,
    k_y: f64,
) -> C64 {
    let theta = k_x + 2.0 * std::f64::consts::PI * (p_b - p_a) as f64 / cfg.l_x;
    let arg = theta * cfg.l_x / 2.0;
    let sinc = if arg.abs() < 1e-8 {
        1.0 - arg * arg / 6.0
    } else {
        arg.sin() / arg
    };
    let e = cfg.e_field();
    let (ya, yb) = (y0_at(cfg, p_a, e), y0_at(cfg, p_b, e));
    let w = cfg.omega();
    let gauss = (-cfg.mass * w * (ya - yb) * (ya - yb) / (4.0 * cfg.hbar)
        - cfg.hbar * k_y * k_y / (4.0 * cfg.mass * w))
        .exp();
    C64::new(0.0, k_y * 0.5 * (ya + yb)).exp() * sinc * gauss
}

/// Reservoir-weighted transition density
/// `J(eps) = int d^2k g_{ab}(k) conj(g_{cd}(k)) delta(eps - w(|k|))`
/// for LLL indices, with `g = V / sqrt((2 pi)^3 2 w(k))` and the plane-wave
/// elements above; the radial delta is resolved along the (strictly
/// monotone) dispersion and the angular integral done by the trapezoid rule.
pub fn form_factor_density(
    cfg: &LandauConfig,
    a: LevelIndex,
    b: LevelIndex,
    c: LevelIndex,
    d: LevelIndex,
    dispersion: &dyn Fn(f64) -> f64,
    k_grid: &[f64],
    n_theta: usize,
) -> Result<SpectralDensity> {
    for idx in [a, b, c, d] {
        if idx.n != 0 {
            return Err(Error::NotLll(idx.n));
        }
    }
    if k_grid.len() < 2 || k_grid.windows(2).any(|w| w[0] >= w[1]) || k_grid[0] <= 0.0 {
        return Err(Error::BadGrid);
    }
    let eps: Vec<f64> = k_grid.iter().map(|&k| dispersion(k)).collect();
    if eps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NonMonotoneDispersion);
    }

    let two_pi = 2.0 * std::f64::consts::PI;
    let mut weights = Vec::with_capacity(k_grid.len());
    for (i, &k) in k_grid.iter().enumerate() {
        // dk/deps by centered differences on the dispersion table.
        let dk_deps = if i == 0 {
            (k_grid[1] - k_grid[0]) / (eps[1] - eps[0])
        } else if i == k_grid.len() - 1 {
            (k_grid[i] - k_grid[i - 1]) / (eps[i] - eps[i - 1])
        } else {
            (k_grid[i + 1] - k_grid[i - 1]) / (eps[i + 1] - eps[i - 1])
        };
        let mut angular = C64::new(0.0, 0.0);
        for t in 0..n_theta {
            let theta = two_pi * t as f64 / n_theta as f64;
            let (kx, ky) = (k * theta.cos(), k * theta.sin());
            let vab = lll_plane_wave_element(cfg, a.p, b.p, kx, ky);
            let vcd = lll_plane_wave_element(cfg, c.p, d.p, kx, ky);
            angular += vab * vcd.conj();
        }
        angular *= two_pi / n_theta as f64;
        let norm = 1.0 / (two_pi.powi(3) * 2.0 * eps[i]);
        weights.push(angular * norm * k * dk_deps);
    }
    SpectralDensity::new(eps, weights)
}

/// FTC report: the finite rational set is enumerated over the configured
/// index bounds and the field ratio tested for membership.
#[derive(Debug, Clone)]
pub struct FtcReport {
    pub satisfied: bool,
    pub ratio: f64,
    pub ratio_exact: Option<Rational64>,
    /// Example witness pairs `(beta, beta')` with
    /// `(n_b - n_b')/(p_b' - p_b)` equal to the ratio (capped).
    pub witnesses: Vec<(LevelIndex, LevelIndex)>,
}

pub fn ftc_check(cfg: &LandauConfig) -> Result<FtcReport> {
    cfg.validate()?;
    let ratio = cfg.ratio_f64();
    let exact = cfg.ratio_exact();
    let levels = cfg.levels();
    let mut witnesses = Vec::new();
    for &b in &levels {
        for &bp in &levels {
            if b.p == bp.p {
                continue;
            }
            let q = Rational64::new(b.n as i64 - bp.n as i64, bp.p - b.p);
            let hit = match exact {
                Some(r) => q == r,
                None => {
                    let qf = *q.numer() as f64 / *q.denom() as f64;
                    (qf - ratio).abs() <= cfg.ftc_tol
                }
            };
            if hit {
                if witnesses.len() < 32 {
                    witnesses.push((b, bp));
                } else {
                    return Ok(FtcReport {
                        satisfied: true,
                        ratio,
                        ratio_exact: exact,
                        witnesses,
                    });
                }
            }
        }
    }
    Ok(FtcReport {
        satisfied: !witnesses.is_empty(),
        ratio,
        ratio_exact: exact,
        witnesses,
    })
}

/// Ordered set of occupied levels.
#[derive(Debug, Clone)]
pub struct OccupationSet {
    levels: Vec<LevelIndex>,
}

impl OccupationSet {
    pub fn new(levels: Vec<LevelIndex>) -> Result<Self> {
        for (i, a) in levels.iter().enumerate() {
            for b in levels.iter().skip(i + 1) {
                if a == b {
                    return Err(Error::DuplicateOccupation);
                }
            }
        }
        Ok(OccupationSet { levels })
    }

    pub fn empty() -> Self {
        OccupationSet { levels: vec![] }
    }

    pub fn levels(&self) -> &[LevelIndex] {
        &self.levels
    }

    /// Characteristic function.
    pub fn chi(&self, idx: LevelIndex) -> f64 {
        if self.levels.contains(&idx) {
            1.0
        } else {
            0.0
        }
    }
}

type Quad = (LevelIndex, LevelIndex, LevelIndex, LevelIndex);

/// Table of damping coefficients per index quadruple: the field-derivative
/// kernels `Lambda` and (optionally) base kernels `Gamma0` at the reference
/// field. Missing entries read as zero.
#[derive(Debug, Clone, Default)]
pub struct LambdaTable {
    lambda: HashMap<Quad, C64>,
    gamma0: HashMap<Quad, C64>,
}

impl LambdaTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert_lambda(&mut self, quad: Quad, value: C64) {
        self.lambda.insert(quad, value);
    }

    pub fn insert_gamma0(&mut self, quad: Quad, value: C64) {
        self.gamma0.insert(quad, value);
    }

    pub fn lambda(&self, a: LevelIndex, b: LevelIndex, c: LevelIndex, d: LevelIndex) -> C64 {
        self.lambda
            .get(&(a, b, c, d))
            .copied()
            .unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn gamma0(&self, a: LevelIndex, b: LevelIndex, c: LevelIndex, d: LevelIndex) -> C64 {
        self.gamma0
            .get(&(a, b, c, d))
            .copied()
            .unwrap_or(C64::new(0.0, 0.0))
    }

    /// Parse the 10-column table
    /// `(n_a, p_a, n_b, p_b, n_c, p_c, n_d, p_d, Re, Im)`;
    /// `#` starts a comment.
    pub fn from_table_str(text: &str) -> Result<Self> {
        let mut table = LambdaTable::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 10 {
                return Err(Error::TableParse {
                    line: lineno + 1,
                    reason: format!("expected 10 columns, got {}", cols.len()),
                });
            }
            let int = |s: &str| -> Result<i64> {
                s.parse::<i64>().map_err(|e| Error::TableParse {
                    line: lineno + 1,
                    reason: format!("bad integer {s:?}: {e}"),
                })
            };
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|e| Error::TableParse {
                    line: lineno + 1,
                    reason: format!("bad number {s:?}: {e}"),
                })
            };
            let quad = (
                LevelIndex::new(int(cols[0])? as u32, int(cols[1])?),
                LevelIndex::new(int(cols[2])? as u32, int(cols[3])?),
                LevelIndex::new(int(cols[4])? as u32, int(cols[5])?),
                LevelIndex::new(int(cols[6])? as u32, int(cols[7])?),
            );
            table.insert_lambda(quad, C64::new(num(cols[8])?, num(cols[9])?));
        }
        Ok(table)
    }

    pub fn to_table_string(&self) -> String {
        let mut rows: Vec<(&Quad, &C64)> = self.lambda.iter().collect();
        rows.sort_by_key(|(q, _)| {
            (q.0.n, q.0.p, q.1.n, q.1.p, q.2.n, q.2.p, q.3.n, q.3.p)
        });
        let mut s =
            String::from("# n_a p_a n_b p_b n_c p_c n_d p_d Re(Lambda) Im(Lambda)\n");
        for (q, v) in rows {
            s.push_str(&format!(
                "{} {} {} {} {} {} {} {} {:.17e} {:.17e}\n",
                q.0.n, q.0.p, q.1.n, q.1.p, q.2.n, q.2.p, q.3.n, q.3.p, v.re, v.im
            ));
        }
        s
    }

    /// Deterministic synthetic table over the LLL block, for demos and
    /// brute-force cross-checks. Capture-type quadruples with a diagonal
    /// transition on either side are zero, mirroring the plane-wave
    /// x-orthogonality of the physical form factors.
    pub fn synthetic(levels: &[LevelIndex]) -> Self {
        let u = |a: LevelIndex, b: LevelIndex| -> C64 {
            let (p, q) = (a.p as f64, b.p as f64);
            C64::new(
                0.5 + 0.13 * (p - q) + 0.07 * (p + q),
                0.11 * (p - q) * (p + q) + 0.05,
            )
        };
        let v = |a: LevelIndex, b: LevelIndex| -> f64 {
            let (p, q) = (a.p as f64, b.p as f64);
            0.4 + 0.21 * (1.3 * p - 0.7 * q).sin() + 0.09 * (p + q)
        };
        let w = |a: LevelIndex, b: LevelIndex| -> C64 {
            let (p, q) = (a.p as f64, b.p as f64);
            C64::new(0.3 + 0.08 * (p * p - q * q), 0.12 * (p - q))
        };
        let mut table = LambdaTable::new();
        for &a in levels {
            for &b in levels {
                for &c in levels {
                    for &d in levels {
                        if a == b || c == d {
                            continue;
                        }
                        let lam = u(a, b) * u(c, d).conj()
                            + C64::new(0.0, 1.0) * v(a, b) * v(c, d);
                        table.insert_lambda((a, b, c, d), lam);
                        table.insert_gamma0((a, b, c, d), w(a, b) * w(c, d).conj());
                    }
                }
            }
        }
        table
    }

    /// Build the field-derivative kernels from the physical form factors:
    /// `Lambda^{abcd} = i d/d(eps) Gamma(J_{abcd}, eps)` at the transition
    /// resonance, with the transition densities from [`form_factor_density`]
    /// and the derivative taken by central differences. Base kernels are
    /// stored too.
    pub fn from_form_factors(
        cfg: &LandauConfig,
        dispersion: &dyn Fn(f64) -> f64,
        k_grid: &[f64],
        n_theta: usize,
    ) -> Result<Self> {
        let lll = cfg.lll_levels();
        let e0 = cfg.e_field();
        let mut table = LambdaTable::new();
        let mut quads: Vec<Quad> = Vec::new();
        for &a in &lll {
            for &b in &lll {
                for &bp in &lll {
                    quads.push((a, b, a, bp));
                    quads.push((b, a, bp, a));
                }
            }
        }
        quads.sort_by_key(|q| (q.0.p, q.1.p, q.2.p, q.3.p));
        quads.dedup();
        let delta = 1e-5 * cfg.hbar * cfg.omega();
        for quad in quads {
            let density =
                form_factor_density(cfg, quad.0, quad.1, quad.2, quad.3, dispersion, k_grid, n_theta)?;
            let res = level_energy_at(cfg, quad.0, e0) - level_energy_at(cfg, quad.1, e0);
            let g_plus = kernels::gamma(&density, res + delta, Sign::Plus)?.value;
            let g_minus = kernels::gamma(&density, res - delta, Sign::Plus)?.value;
            let g_base = kernels::gamma(&density, res, Sign::Plus)?.value;
            let lam = C64::new(0.0, 1.0) * (g_plus - g_minus) / (2.0 * delta);
            table.insert_lambda(quad, lam);
            table.insert_gamma0(quad, g_base);
        }
        Ok(table)
    }
}

/// The two response sums over the LLL block.
///
/// `Theta_x` runs over occupied/unoccupied pairs restricted to degenerate
/// `(beta, beta')` with `p_beta != p_beta'` (the FTC-selected pairs);
/// `Theta_y` is the diagonal-in-transition sum weighted by `Im Lambda`.
pub fn theta_sums(
    cfg: &LandauConfig,
    occ: &OccupationSet,
    table: &LambdaTable,
) -> Result<(f64, f64)> {
    cfg.validate()?;
    for idx in occ.levels() {
        if idx.n != 0 {
            return Err(Error::NotLll(idx.n));
        }
        if !cfg.in_bounds(*idx) {
            return Err(Error::LevelOutOfBounds {
                n: idx.n,
                p: idx.p,
                n_max: cfg.n_max,
                p_max: cfg.p_max,
            });
        }
    }
    let lll = cfg.lll_levels();
    let e0 = cfg.e_field();
    let tol = cfg.energy_tol();

    let mut theta_x = 0.0;
    for &beta in &lll {
        for &beta_p in &lll {
            if beta.p == beta_p.p {
                continue;
            }
            let de = level_energy_at(cfg, beta, e0) - level_energy_at(cfg, beta_p, e0);
            if de.abs() > tol {
                continue;
            }
            let x_tilde = position_elements_at(cfg, beta.p, beta_p.p, e0)?.x1_tilde;
            for &alpha in &lll {
                let chi_a = occ.chi(alpha);
                let chi_bp = occ.chi(beta_p);
                let term = chi_a * (1.0 - chi_bp) * 2.0 * table.lambda(alpha, beta, alpha, beta_p).re
                    - chi_bp * (1.0 - chi_a) * 2.0 * table.lambda(beta, alpha, beta_p, alpha).re;
                theta_x += (beta.p - alpha.p) as f64 * x_tilde * term;
            }
        }
    }

    let mut theta_y = 0.0;
    for &alpha in &lll {
        for &beta in &lll {
            let weight = occ.chi(alpha) * (1.0 - occ.chi(beta));
            if weight == 0.0 {
                continue;
            }
            let dp = (alpha.p - beta.p) as f64;
            theta_y += dp * dp * weight * table.lambda(alpha, beta, alpha, beta).im;
        }
    }
    Ok((theta_x, theta_y))
}

/// Conductivity / resistivity output.
#[derive(Debug, Clone)]
pub struct TransportResult {
    /// `[[s_xx, s_xy], [s_yx, s_yy]]` with `s_xx = s_yy`, `s_xy = -s_yx`.
    pub sigma: [[f64; 2]; 2],
    /// Same layout for the resistivity.
    pub rho: [[f64; 2]; 2],
    pub ftc_satisfied: bool,
    pub ratio: f64,
    pub ratio_exact: Option<Rational64>,
    pub theta_x: f64,
    pub theta_y: f64,
    pub alpha_c: f64,
}

/// Assemble the field-derivative currents
/// `j_x = alpha_c h e^3/(m w L_x) Theta_x`,
/// `j_y = -2 alpha_c e^3 (h/(m w L_x))^2 Theta_y`,
/// the conductivity `s_xx = s_yy = j_y`, `s_xy = -s_yx = j_x`, and the
/// resistivity `rho = sigma / (s_yy^2 + s_xy^2)` componentwise.
pub fn transport(
    cfg: &LandauConfig,
    occ: &OccupationSet,
    table: &LambdaTable,
) -> Result<TransportResult> {
    let ftc = ftc_check(cfg)?;
    let (theta_x, theta_y) = theta_sums(cfg, occ, table)?;
    let w = cfg.omega();
    let e3 = cfg.e_charge.powi(3);
    let h = cfg.h();
    let scale = h / (cfg.mass * w * cfg.l_x);
    let j_x = cfg.alpha_c * e3 * scale * theta_x;
    let j_y = -2.0 * cfg.alpha_c * e3 * scale * scale * theta_y;

    let sigma = [[j_y, j_x], [-j_x, j_y]];
    let denom = j_y * j_y + j_x * j_x;
    if denom == 0.0 {
        return Err(Error::ResistivitySingular);
    }
    let rho = [[j_y / denom, j_x / denom], [-j_x / denom, j_y / denom]];
    Ok(TransportResult {
        sigma,
        rho,
        ftc_satisfied: ftc.satisfied,
        ratio: ftc.ratio,
        ratio_exact: ftc.ratio_exact,
        theta_x,
        theta_y,
        alpha_c: cfg.alpha_c,
    })
}

/// Expectation of the pair-hopping part of the generator on the Fock state
/// of `occ`: the contribution whose transitions conserve single-level
/// energies (`eps_alpha = eps_beta`). Evaluated at an explicit field with
/// the kernel linear model
/// `G(E) = Gamma0 - i (E - E0) (h e / m w L_x)(p_a - p_b) Lambda`.
pub fn l1_expectation(
    cfg: &LandauConfig,
    occ: &OccupationSet,
    table: &LambdaTable,
    x_kind: PositionComponent,
    e_field: f64,
) -> Result<f64> {
    let lll = cfg.lll_levels();
    let tol = cfg.energy_tol();
    let e0 = cfg.e_field();
    let e2 = cfg.e_charge * cfg.e_charge;
    let mut acc = 0.0;
    for &alpha in &lll {
        for &beta in &lll {
            let de = level_energy_at(cfg, alpha, e_field) - level_energy_at(cfg, beta, e_field);
            if de.abs() > tol {
                continue;
            }
            let occ_factor = occ.chi(alpha) - occ.chi(beta);
            if occ_factor == 0.0 {
                continue;
            }
            let x = position_component(cfg, beta, alpha, x_kind, e_field)?;
            for &alpha_p in &lll {
                if occ.chi(alpha_p) == 0.0 {
                    continue;
                }
                let g = kernel_at(cfg, table, (alpha, beta, alpha_p, alpha_p), e0, e_field);
                acc += occ_factor * 2.0 * (x * g).re;
            }
        }
    }
    Ok(e2 * acc)
}

/// Which position component an expectation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositionComponent {
    X1,
    X2,
}

fn position_component(
    cfg: &LandauConfig,
    row: LevelIndex,
    col: LevelIndex,
    kind: PositionComponent,
    e_field: f64,
) -> Result<C64> {
    let el = position_elements_at(cfg, row.p, col.p, e_field)?;
    Ok(match kind {
        PositionComponent::X1 => el.x1,
        PositionComponent::X2 => C64::new(el.x2, 0.0),
    })
}

/// Kernel linear model around the reference field.
pub(crate) fn kernel_at(
    cfg: &LandauConfig,
    table: &LambdaTable,
    quad: Quad,
    e_ref: f64,
    e_field: f64,
) -> C64 {
    let base = table.gamma0(quad.0, quad.1, quad.2, quad.3);
    let lam = table.lambda(quad.0, quad.1, quad.2, quad.3);
    let w = cfg.omega();
    let pref = cfg.h() * cfg.e_charge / (cfg.mass * w * cfg.l_x);
    base + C64::new(0.0, -1.0) * (e_field - e_ref) * pref * (quad.0.p - quad.1.p) as f64 * lam
}

/// Maximum field-derivative of the energy-conserving contribution for the
/// x-position observable: finite differences at `E +- dE`, with the
/// degeneracy pattern re-evaluated at each shifted field. Vanishing of this
/// derivative is the E-independence property of that contribution.
pub fn e_independence_check(
    cfg: &LandauConfig,
    occ: &OccupationSet,
    table: &LambdaTable,
    d_e: f64,
) -> Result<f64> {
    cfg.validate()?;
    let e0 = cfg.e_field();
    let plus = l1_expectation(cfg, occ, table, PositionComponent::X1, e0 + d_e)?;
    let minus = l1_expectation(cfg, occ, table, PositionComponent::X1, e0 - d_e)?;
    Ok(((plus - minus) / (2.0 * d_e)).abs())
}

/// Full pair sum of the exchange contribution for a position component at
/// the reference field (all `(alpha, beta, beta')` with degenerate
/// `eps_beta = eps_beta'`).
pub fn l2_full_expectation(
    cfg: &LandauConfig,
    occ: &OccupationSet,
    table: &LambdaTable,
    x_kind: PositionComponent,
) -> Result<f64> {
    let lll = cfg.lll_levels();
    let tol = cfg.energy_tol();
    let e0 = cfg.e_field();
    let e2 = cfg.e_charge * cfg.e_charge;
    let mut acc = C64::new(0.0, 0.0);
    for &alpha in &lll {
        for &beta in &lll {
            for &beta_p in &lll {
                let de = level_energy_at(cfg, beta, e0) - level_energy_at(cfg, beta_p, e0);
                if de.abs() > tol {
                    continue;
                }
                let x_bbp = position_component(cfg, beta, beta_p, x_kind, e0)?;
                let x_bpb = position_component(cfg, beta_p, beta, x_kind, e0)?;
                let g_abab = kernel_at(cfg, table, (alpha, beta, alpha, beta_p), e0, e0);
                let g_babpa = kernel_at(cfg, table, (beta, alpha, beta_p, alpha), e0, e0);
                let chi_a = occ.chi(alpha);
                let chi_bp = occ.chi(beta_p);
                acc += x_bbp
                    * (g_abab * chi_a * (1.0 - chi_bp) - g_babpa.conj() * chi_bp * (1.0 - chi_a));
                acc -= x_bpb
                    * (g_babpa * chi_bp * (1.0 - chi_a) - g_abab.conj() * chi_a * (1.0 - chi_bp));
            }
        }
    }
    Ok(e2 * acc.re)
}

/// Reduced diagonal form of the same contribution for the y-position
/// observable: `e^2 sum_{a,b} (y0_b - y0_a) chi(a)(1 - chi(b)) 2 Re G^{abab}`.
pub fn l2_restricted_expectation_y(
    cfg: &LandauConfig,
    occ: &OccupationSet,
    table: &LambdaTable,
) -> Result<f64> {
    let lll = cfg.lll_levels();
    let e0 = cfg.e_field();
    let e2 = cfg.e_charge * cfg.e_charge;
    let mut acc = 0.0;
    for &alpha in &lll {
        for &beta in &lll {
            let weight = occ.chi(alpha) * (1.0 - occ.chi(beta));
            if weight == 0.0 {
                continue;
            }
            let dy = y0_at(cfg, beta.p, e0) - y0_at(cfg, alpha.p, e0);
            let g = kernel_at(cfg, table, (alpha, beta, alpha, beta), e0, e0);
            acc += dy * weight * 2.0 * g.re;
        }
    }
    Ok(e2 * acc)
}
