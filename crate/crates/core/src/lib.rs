//! Search-based generation of challenging roads for lane-keeping tests.
//!
//! A road is one Bezier curve over a handful of control points. A genetic
//! search moves those control points around, builds and validates the road,
//! drives it with a lane-keeping vehicle and keeps whatever pushes the vehicle
//! furthest out of its lane.
//!
//! * [`geometry`]: Bezier curves, discrete Fréchet distance, polyline checks.
//! * [`road`]: centerline and lane boundaries, validity rules.
//! * [`simulator`]: the built-in vehicle, controller and out-of-lane oracle.
//! * [`search`]: the genetic search in its three restart variants.
//! * [`harness`]: configuration files, the external SUT protocol, reports,
//!   archives and replay.

pub mod geometry;
pub mod harness;
pub mod road;
pub mod search;
pub mod simulator;

pub use geometry::{ControlPointSet, Point2D, Polyline};
pub use road::{build_road, validate, RoadParams, RoadSpec, ValidityReport};
pub use search::{run_search, SearchConfig, Variant};
pub use simulator::{run_test, SimParams, TestResult, VehicleParams, Verdict};

/// Version recorded in run archives.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
