use thiserror::Error;

use crate::surgery::HomologyClass;

/// Errors raised by the model, metric, surgery and verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model parameters p={p}, k={k}: need p >= 1 and 0 <= k < p")]
    InvalidParams { p: u32, k: u32 },

    #[error("point lives in the {found}-prong plane but the operation expects p={expected}")]
    ProngMismatch { expected: u32, found: u32 },

    #[error("non-finite or negative coordinate: {0}")]
    InvalidCoordinate(String),

    #[error("angle {theta} is outside the chart domain of sector {sector}")]
    ChartDomain { sector: u32, theta: f64 },

    #[error("cover point ({x}, {y}) is not in the closed upper half-plane")]
    CoverDomain { x: f64, y: f64 },

    #[error("operation undefined on the blown-up boundary circle (r = 0)")]
    BoundaryPoint,

    #[error("the euclidean metric is undefined on boundary points; use the polar metric")]
    MetricRequiresPolar,

    #[error("quadrant base angle {0} is not a multiple of pi/2 in range")]
    NotQuadrantAngle(f64),

    #[error("point is not in the source quadrant of the isometry")]
    OutsideQuadrant,

    #[error("point is outside the standard polygon V_c")]
    OutsidePolygon,

    #[error("point lies on the singular orbit; its exit window is unbounded on both sides")]
    SingularOrbit,

    #[error("iterate overflowed double precision")]
    Overflow,

    #[error("class {sigma} is not admissible for (p={p}, k={k}): {reason}")]
    Inadmissible {
        sigma: HomologyClass,
        p: u32,
        k: u32,
        reason: &'static str,
    },

    #[error("surgery along {sigma} produces a one-prong orbit; no local model exists")]
    OneProng { sigma: HomologyClass },

    #[error("class {0} has a vertical direction and cannot be realized transverse to the flow")]
    NotTransverse(HomologyClass),

    #[error("inverse surgery requires an expansive surgery (prong count != 1)")]
    NotExpansive,

    #[error("empty sampling region: {0}")]
    EmptyRegion(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
