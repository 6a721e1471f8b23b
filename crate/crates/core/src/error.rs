use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {0} out of range for gamma matrices (expected 0..=3)")]
    GammaIndex(usize),

    #[error("zero vector where an angle is required")]
    ZeroVector,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("mass condition 2M > m > 0 violated (M = {big}, m = {small}); set allow_resonant to override")]
    MassCondition { big: f64, small: f64 },

    #[error("invalid mass parameters: {0}")]
    InvalidMass(String),

    #[error("grid size {0} must be a power of two and at least 4")]
    GridSize(usize),

    #[error("field representation mismatch: expected {expected}, found {found}")]
    Representation {
        expected: &'static str,
        found: &'static str,
    },

    #[error("lattice mismatch between fields")]
    LatticeMismatch,

    #[error("cube center {0:?} is not on the lattice 2^{1} Z^3")]
    CubeCenter([i64; 3], u32),

    #[error("cap index {index} out of range for level {level} ({count} caps)")]
    CapIndex {
        index: usize,
        level: u32,
        count: usize,
    },

    #[error("caps are not separated: distance {dist:.3e} < required {required:.3e}")]
    CapsNotSeparated { dist: f64, required: f64 },

    #[error("modulation scale 2^{j} not resolved by the time window (resolvable j in [{lo}, {hi}])")]
    Unresolved { j: i32, lo: i32, hi: i32 },

    #[error("empty resolvable modulation range")]
    EmptyModulationRange,

    #[error("invalid exponent pair ({0}, {1}); expected (3,6) or (6,3)")]
    ExponentPair(u32, u32),

    #[error("dyadic shell k = {k} is not resolved by the lattice (max resolvable k = {max})")]
    UnresolvedShell { k: u32, max: u32 },

    #[error("CFL violation: dt * max<xi>_m = {0:.3} > 2")]
    Cfl(f64),

    #[error("non-finite value at t = {0}")]
    NonFinite(f64),

    #[error("blow-up detected at t = {t}: norm grew by a factor {factor:.3e}")]
    BlowUp { t: f64, factor: f64 },

    #[error("negative entry in sequence at index {0}")]
    NegativeEntry(usize),

    #[error("quadrature refinement disagreement {0:.3} exceeds tolerance")]
    Quadrature(f64),

    #[error("degenerate sampler: {0}")]
    Sampler(String),

    #[error("snapshot format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
