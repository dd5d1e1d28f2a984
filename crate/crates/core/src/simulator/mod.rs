//! Built-in system under test: a constant-speed kinematic bicycle steered by
//! pure pursuit along the centre of the right lane, with an out-of-lane oracle.

mod oob;
mod pursuit;
mod vehicle;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use oob::{clip_polygon, oob_percent, signed_area, vehicle_rectangle, LaneStrip};
pub use pursuit::{pure_pursuit, PathTracker, Pursuit};
pub use vehicle::{normalize_angle, step, VehicleParams, VehicleState};

use crate::geometry::GeometryError;
use crate::road::RoadSpec;

/// A test fails once more than this share (percent) of the bounding box is
/// outside the lane.
pub const FAIL_THRESHOLD: f64 = 95.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid vehicle parameter `{key}`: {reason}")]
    Param { key: &'static str, reason: String },
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Invalid,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Invalid => "INVALID",
        })
    }
}

impl FromStr for Verdict {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "PASS" => Ok(Verdict::Pass),
            "FAIL" => Ok(Verdict::Fail),
            "INVALID" => Ok(Verdict::Invalid),
            other => Err(format!("unknown verdict `{other}`")),
        }
    }
}

/// Integration settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    /// Fixed Euler step, seconds.
    pub dt: f64,
    /// Hard stop, seconds of simulated time.
    pub max_time: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            dt: 0.05,
            max_time: 120.0,
        }
    }
}

impl SimParams {
    pub fn check(&self) -> Result<(), SimError> {
        for (key, v) in [("dt", self.dt), ("max_time", self.max_time)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SimError::Param {
                    key,
                    reason: format!("must be positive, got {v}"),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OobSample {
    pub time: f64,
    pub oob_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub verdict: Verdict,
    /// One state per simulated instant, starting with the initial state.
    pub trajectory: Vec<VehicleState>,
    /// Aligned with `trajectory`.
    pub oob_trace: Vec<OobSample>,
    pub max_oob: f64,
    /// The vehicle reached the end of the road.
    pub completed: bool,
}

impl TestResult {
    pub fn invalid() -> Self {
        Self {
            verdict: Verdict::Invalid,
            trajectory: Vec::new(),
            oob_trace: Vec::new(),
            max_oob: 0.0,
            completed: false,
        }
    }

    /// Ran out of simulated time before reaching the road end.
    pub fn timed_out(&self) -> bool {
        self.verdict == Verdict::Pass && !self.completed
    }
}

/// Drives the road with the built-in vehicle.
///
/// The rear axle starts on the right-lane centre, far enough in that the
/// whole body is on the road, heading along the lane. The loop ends when the
/// front bumper reaches the road end, when `max_time` elapses, or as soon as
/// the out-of-lane share exceeds [`FAIL_THRESHOLD`]. The caller is expected to
/// have validated the road.
pub fn run_test(
    road: &RoadSpec,
    vparams: &VehicleParams,
    sim: &SimParams,
) -> Result<TestResult, SimError> {
    vparams.check()?;
    sim.check()?;
    let lane = road.lane_center()?;
    let strip = LaneStrip::new(road)?;
    let tracker = PathTracker::new(&lane);
    let end = tracker.length() - vparams.front_extent();

    let start = vparams.rear_overhang() + 0.1;
    let mut state = VehicleState::new(tracker.point_at(start), {
        let t = tracker.tangent_at(start);
        t.y.atan2(t.x)
    });

    // Closest-point search only looks a bounded distance ahead of the last
    // projection, so the vehicle cannot jump to a later pass of the road.
    let window = 2.0 * vparams.lookahead + 2.0 * vparams.speed * sim.dt + 10.0;
    let mut seg = tracker.segment_at(start);

    let mut trajectory = Vec::new();
    let mut oob_trace = Vec::new();
    let mut max_oob: f64 = 0.0;
    let mut completed = false;
    let mut verdict = Verdict::Pass;

    loop {
        let oob = strip.oob_percent(&state, vparams);
        trajectory.push(state);
        oob_trace.push(OobSample {
            time: state.time,
            oob_percent: oob,
        });
        max_oob = max_oob.max(oob);
        if oob > FAIL_THRESHOLD {
            verdict = Verdict::Fail;
            break;
        }

        let lo = seg.saturating_sub(1);
        let hi = tracker.segment_at(tracker.arc_at(seg) + window) + 1;
        let (found, progress) = tracker.project(state.position, lo..hi.min(tracker.segments()));
        seg = found;
        // Stop one step short of carrying the front bumper past the road end.
        if progress + vparams.speed * sim.dt > end {
            completed = true;
            break;
        }
        if state.time + sim.dt > sim.max_time + 1e-12 {
            break;
        }
        let cmd = tracker.steer_towards(&state, progress, vparams);
        if cmd.completed {
            completed = true;
            break;
        }
        state = step(&state, cmd.steer, vparams, sim.dt)?;
    }

    Ok(TestResult {
        verdict,
        trajectory,
        oob_trace,
        max_oob,
        completed,
    })
}
