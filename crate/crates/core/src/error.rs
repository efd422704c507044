//! Crate-wide error type. Every fallible geometric or numerical operation
//! reports one of these variants; they map one-to-one onto the failure modes
//! named in the public API contracts.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vector norm {0:e} is too small to normalize")]
    NearZeroVector(f64),

    #[error("displacement is not tangent to the base point (defect {0:e})")]
    NotTangent(f64),

    #[error("transport endpoints are antipodal within tolerance")]
    AntipodalPoints,

    #[error("a closed curve needs at least {min} vertices, got {got}")]
    TooFewVertices { min: usize, got: usize },

    #[error("degenerate edge at vertex {index} (geodesic length {length:e})")]
    DegenerateEdge { index: usize, length: f64 },

    #[error("segment {index} unusable for intersection tests (length {length:e})")]
    DegenerateSegment { index: usize, length: f64 },

    #[error("step size {0:e} fell below dt_min with energy still increasing")]
    StepSizeUnderflow(f64),

    #[error("non-finite coordinates appeared during the flow")]
    BlowUp,

    #[error("flow trace is inconsistent: {0}")]
    InconsistentTrace(String),

    #[error("modulus {0} outside the admissible range")]
    ModulusOutOfRange(f64),

    #[error("adaptive integrator failed: {0}")]
    IntegratorFailure(String),

    #[error("ratio {m}/{n} outside (0, 2 - sqrt(2))")]
    RatioOutOfRange { m: u32, n: u32 },

    #[error("wave indices {m} and {n} are not coprime")]
    NotCoprime { m: u32, n: u32 },

    #[error("perturbation profiles are malformed: {0}")]
    MalformedPerturbation(String),

    #[error("profile does not close smoothly at the basepoint (mismatch {0:e})")]
    NotSmoothlyClosing(f64),

    #[error("eps {got} outside (0, {max}]")]
    EpsOutOfRange { got: f64, max: f64 },

    #[error("frame sampling too coarse: {0}")]
    SamplingTooCoarse(String),

    #[error("quaternion lift lost sign continuity: {0}")]
    DiscontinuousPath(String),

    #[error("hopf lift drifted from the base curve (defect {0:e})")]
    LiftDrift(f64),

    #[error("grid unusable for surface quadrature: {0}")]
    DegenerateGrid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
