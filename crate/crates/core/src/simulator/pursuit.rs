use super::vehicle::{normalize_angle, VehicleParams, VehicleState};
use super::SimError;
use crate::geometry::{Point2D, Polyline};

/// Controller output for one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pursuit {
    pub steer: f64,
    /// The vehicle has reached or passed the end of the path.
    pub completed: bool,
    /// Arc length of the vehicle's projection onto the path.
    pub progress: f64,
}

/// Closest-point queries and arc-length lookups along a reference path.
#[derive(Debug, Clone)]
pub struct PathTracker<'a> {
    points: &'a [Point2D],
    arc: Vec<f64>,
}

impl<'a> PathTracker<'a> {
    pub fn new(path: &'a Polyline) -> Self {
        Self {
            points: path.points(),
            arc: path.cumulative_lengths(),
        }
    }

    pub fn length(&self) -> f64 {
        self.arc[self.arc.len() - 1]
    }

    /// Projects `p` onto segments `range`; returns (segment, arc length).
    pub fn project(&self, p: Point2D, range: std::ops::Range<usize>) -> (usize, f64) {
        let mut best = (f64::INFINITY, 0, 0.0);
        for i in range {
            let (a, b) = (self.points[i], self.points[i + 1]);
            let ab = b - a;
            let t = ((p - a).dot(&ab) / ab.dot(&ab)).clamp(0.0, 1.0);
            let d = p.distance(&(a + ab * t));
            if d < best.0 {
                best = (d, i, self.arc[i] + t * (self.arc[i + 1] - self.arc[i]));
            }
        }
        (best.1, best.2)
    }

    /// Arc length at vertex `i`.
    pub fn arc_at(&self, i: usize) -> f64 {
        self.arc[i]
    }

    pub fn segments(&self) -> usize {
        self.points.len() - 1
    }

    /// Last segment whose start lies at or before arc length `s`.
    pub fn segment_at(&self, s: f64) -> usize {
        let idx = self.arc.partition_point(|&a| a <= s);
        idx.saturating_sub(1).min(self.segments() - 1)
    }

    /// Point at arc length `s`; beyond the end the last segment is extended.
    pub fn point_at(&self, s: f64) -> Point2D {
        let i = self.segment_at(s.max(0.0));
        let (a, b) = (self.points[i], self.points[i + 1]);
        let span = self.arc[i + 1] - self.arc[i];
        a.lerp(&b, (s - self.arc[i]) / span)
    }

    /// Unit tangent at arc length `s`.
    pub fn tangent_at(&self, s: f64) -> Point2D {
        let i = self.segment_at(s.max(0.0));
        (self.points[i + 1] - self.points[i])
            .normalized()
            .expect("distinct points")
    }

    /// Pure-pursuit steering given the vehicle's arc-length progress.
    pub fn steer_towards(
        &self,
        state: &VehicleState,
        progress: f64,
        params: &VehicleParams,
    ) -> Pursuit {
        if progress >= self.length() - 1e-9 {
            return Pursuit {
                steer: 0.0,
                completed: true,
                progress,
            };
        }
        let goal = self.point_at(progress + params.lookahead);
        let to_goal = goal - state.position;
        let alpha = normalize_angle(to_goal.y.atan2(to_goal.x) - state.heading);
        let steer = (2.0 * params.wheelbase * alpha.sin() / params.lookahead)
            .atan()
            .clamp(-params.max_steer, params.max_steer);
        Pursuit {
            steer,
            completed: false,
            progress,
        }
    }
}

/// Pure-pursuit steering toward the point `lookahead` meters further along
/// `lane_center` than the vehicle's closest point on it.
///
/// `steer = atan(2 * wheelbase * sin(alpha) / lookahead)` with `alpha` the
/// heading error to the goal, clamped to the steering limit.
pub fn pure_pursuit(
    state: &VehicleState,
    lane_center: &Polyline,
    params: &VehicleParams,
) -> Result<Pursuit, SimError> {
    if !state.position.is_finite() || !state.heading.is_finite() {
        return Err(SimError::Domain("non-finite vehicle state".into()));
    }
    let tracker = PathTracker::new(lane_center);
    let (_, progress) = tracker.project(state.position, 0..tracker.segments());
    Ok(tracker.steer_towards(state, progress, params))
}
