use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::geometry::Point2D;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleParams {
    /// Distance between the axles, meters.
    pub wheelbase: f64,
    /// Body width, meters.
    pub width: f64,
    /// Body length, meters.
    pub length: f64,
    /// Constant forward speed, m/s.
    pub speed: f64,
    /// Steering limit, radians.
    pub max_steer: f64,
    /// Pure-pursuit lookahead distance, meters.
    pub lookahead: f64,
    /// Steering actuator slew limit, rad/s.
    pub max_steer_rate: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            wheelbase: 2.5,
            width: 1.8,
            length: 4.3,
            speed: 12.0,
            max_steer: 0.6,
            lookahead: 8.0,
            max_steer_rate: 0.5,
        }
    }
}

impl VehicleParams {
    pub fn check(&self) -> Result<(), SimError> {
        let fields = [
            ("wheelbase", self.wheelbase),
            ("width", self.width),
            ("length", self.length),
            ("speed", self.speed),
            ("max_steer", self.max_steer),
            ("lookahead", self.lookahead),
            ("max_steer_rate", self.max_steer_rate),
        ];
        for (key, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SimError::Param {
                    key,
                    reason: format!("must be positive, got {v}"),
                });
            }
        }
        if self.max_steer >= FRAC_PI_2 {
            return Err(SimError::Param {
                key: "max_steer",
                reason: format!("must be below pi/2, got {}", self.max_steer),
            });
        }
        Ok(())
    }

    /// Distance from the rear axle to the body centre.
    pub fn body_center_offset(&self) -> f64 {
        self.wheelbase / 2.0
    }

    /// Distance the body extends behind the rear axle.
    pub fn rear_overhang(&self) -> f64 {
        self.length / 2.0 - self.body_center_offset()
    }

    /// Distance from the rear axle to the front bumper.
    pub fn front_extent(&self) -> f64 {
        self.body_center_offset() + self.length / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    /// Rear-axle midpoint.
    pub position: Point2D,
    /// Yaw angle in (-pi, pi].
    pub heading: f64,
    pub steer: f64,
    pub time: f64,
}

impl VehicleState {
    pub fn new(position: Point2D, heading: f64) -> Self {
        Self {
            position,
            heading: normalize_angle(heading),
            steer: 0.0,
            time: 0.0,
        }
    }

    pub fn direction(&self) -> Point2D {
        Point2D::new(self.heading.cos(), self.heading.sin())
    }

    pub fn body_center(&self, params: &VehicleParams) -> Point2D {
        self.position + self.direction() * params.body_center_offset()
    }
}

/// Wraps an angle into (-pi, pi].
pub fn normalize_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// One explicit Euler step of the kinematic bicycle model at constant speed.
///
/// The commanded angle is first slew-limited against the current steering
/// angle, then clamped to `max_steer`. The vehicle advances along its current
/// heading, then turns by `travel / wheelbase * tan(steer)`.
pub fn step(
    state: &VehicleState,
    steer_cmd: f64,
    params: &VehicleParams,
    dt: f64,
) -> Result<VehicleState, SimError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SimError::Domain(format!("dt must be positive, got {dt}")));
    }
    if !steer_cmd.is_finite() || !state.position.is_finite() || !state.heading.is_finite() {
        return Err(SimError::Domain("non-finite vehicle input".into()));
    }
    let slew = params.max_steer_rate * dt;
    let steer = steer_cmd
        .clamp(state.steer - slew, state.steer + slew)
        .clamp(-params.max_steer, params.max_steer);
    let travel = params.speed * dt;
    let position = state.position + state.direction() * travel;
    let heading = normalize_angle(state.heading + travel / params.wheelbase * steer.tan());
    Ok(VehicleState {
        position,
        heading,
        steer,
        time: state.time + dt,
    })
}
