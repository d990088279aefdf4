//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch at site {site}: local operator is {found}x{found}, factor expects {expected}x{expected}")]
    SiteDimensionMismatch {
        site: usize,
        expected: usize,
        found: usize,
    },

    #[error("operators live on different spaces ({left} vs {right})")]
    SpaceMismatch { left: usize, right: usize },

    #[error("site index {site} out of range (space has {factors} factors)")]
    SiteOutOfRange { site: usize, factors: usize },

    #[error("total dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("bosonic Fock cutoff must be at least 2, got {0}")]
    BadCutoff(usize),

    #[error("spectral density grid must be strictly increasing and finite")]
    BadGrid,

    #[error("spectral density weights must be finite")]
    BadWeights,

    #[error("diagonal spectral density requires real non-negative weights")]
    NotDiagonal,

    #[error("PV endpoint singularity: resonance {resonance} sits on the support boundary with nonzero weight")]
    PvEndpointSingularity { resonance: f64 },

    #[error("resonance must be finite")]
    BadResonance,

    #[error("Bose factors singular: thermal split requires all grid energies > 0")]
    NonPositiveGrid,

    #[error("inverse temperature must be positive, got {0}")]
    BadBeta(f64),

    #[error("gamma_brute needs at least 3 strictly decreasing positive damping values")]
    BadEtaLadder,

    #[error("hamiltonian is not hermitian (defect {defect:.3e} > tol {tol:.3e})")]
    NonHermitianHamiltonian { defect: f64, tol: f64 },

    #[error("input is not a density matrix (hermiticity/trace/positivity defect {defect:.3e} > tol {tol:.3e})")]
    NotDensity { defect: f64, tol: f64 },

    #[error("time step must be positive, got {0}")]
    BadTimeStep(f64),

    #[error("evolution aborted at t = {t:.6}: {reason}")]
    EvolveAborted { t: f64, reason: String },

    #[error("level index (n = {n}, p = {p}) out of configured bounds (n_max = {n_max}, p_max = {p_max})")]
    LevelOutOfBounds { n: u32, p: i64, n_max: u32, p_max: i64 },

    #[error("matrix elements implemented for LLL only (got n = {0})")]
    NotLll(u32),

    #[error("dispersion must be strictly monotone on the radial grid")]
    NonMonotoneDispersion,

    #[error("occupation set contains duplicate level indices")]
    DuplicateOccupation,

    #[error("resistivity singular: sigma_yy^2 + sigma_xy^2 = 0")]
    ResistivitySingular,

    #[error("missing damping coefficient for index quadruple {0}")]
    MissingLambda(String),

    #[error("invalid model parameter: {0}")]
    BadParameter(String),

    #[error("off-resonance: SL interaction Hamiltonian time-dependent (requires omega_R = 2 mu)")]
    OffResonance,

    #[error("eta undefined: Re Gamma_h1 + Re Gamma_h2 = 0")]
    EtaUndefined,

    #[error("degenerate frequency; use semiclassical_evolve (omega = 0)")]
    DegenerateFrequency,

    #[error("resonant degeneracy: |omega +- g*S0| below tolerance")]
    ResonantDegeneracy,

    #[error("table parse error on line {line}: {reason}")]
    TableParse { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
