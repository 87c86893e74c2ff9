use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed rational {0:?}")]
    MalformedRational(String),
    #[error("constant term forbidden")]
    ConstantTerm,
    #[error("linear term {0:?} forbidden (the gradient must vanish at the origin)")]
    LinearTerm(Vec<u32>),
    #[error("phase has no nonzero terms")]
    EmptyPhase,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error in {field}: {message}")]
    Parse { field: String, message: String },
    #[error("no facet normals: degenerate polyhedron")]
    NoFacets,
    #[error("floor functional vanishes at {0}")]
    ZeroFloor(String),
    #[error("face is not a compact face of this polyhedron")]
    FaceNotInLattice,
    #[error("unbounded enumeration: polyhedron is not convenient and no beta bound was supplied")]
    UnboundedEnumeration,
    #[error("degenerate phase: face {face} has infimum {infimum:e}")]
    DegeneratePhase { face: String, infimum: f64 },
    #[error("insufficient decay order: N_max = {n_max} must exceed {floor}")]
    InsufficientDecayOrder { n_max: u32, floor: String },
    #[error("panel budget exceeded: {needed} panels requested, budget {budget}")]
    PanelBudget { needed: u64, budget: u64 },
    #[error("sweep failure: every row was flagged")]
    SweepFailure,
    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),
    #[error("basis collinear on the window (condition number {0:e})")]
    Collinear(f64),
    #[error("not enough data: {0}")]
    NotEnoughData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
