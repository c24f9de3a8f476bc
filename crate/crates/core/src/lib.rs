//! Local models of pseudo-hyperbolic periodic orbits of 3-flows.
//!
//! The crate implements the p-prong plane maps `ϕ_{pk}`, their mapping-torus
//! suspensions and blow-ups, the arithmetic of surgery along a periodic orbit,
//! and an empirical harness that checks closeness, convergence and expansivity
//! estimates on the models.

pub mod cli;
pub mod error;
pub mod metrics;
pub mod plane;
pub mod surgery;
pub mod suspension;
pub mod verify;

pub use error::{Error, Result};
pub use metrics::{d_eucl, d_pol, PlaneMetricKind};
pub use plane::{
    CartesianPoint, Direction, ModelParams, ProngId, ProngKind, ProngPoint, QuadrantIndex,
};
pub use surgery::{HomologyClass, SurgeryVerdict};
pub use suspension::{StandardPolygonSpec, TorusPoint};
