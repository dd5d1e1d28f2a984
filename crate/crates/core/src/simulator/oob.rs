//! Out-of-lane measurement: how much of the vehicle's bounding rectangle lies
//! outside the driving lane.

use super::vehicle::{VehicleParams, VehicleState};
use super::SimError;
use crate::geometry::Point2D;
use crate::road::RoadSpec;

/// Values below this are reported as exactly zero; they are clipping noise.
const NOISE_FLOOR: f64 = 1e-9;

/// Signed polygon area (positive for counter-clockwise).
pub fn signed_area(poly: &[Point2D]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        acc += poly[i].cross(&poly[(i + 1) % n]);
    }
    acc / 2.0
}

/// Sutherland-Hodgman: clips `subject` (any simple polygon) against the convex
/// counter-clockwise polygon `clip`.
pub fn clip_polygon(subject: &[Point2D], clip: &[Point2D]) -> Vec<Point2D> {
    let mut out = subject.to_vec();
    for k in 0..clip.len() {
        if out.is_empty() {
            break;
        }
        let a = clip[k];
        let b = clip[(k + 1) % clip.len()];
        let edge = b - a;
        let side = |p: Point2D| edge.cross(&(p - a));
        let input = std::mem::take(&mut out);
        for i in 0..input.len() {
            let s = input[i];
            let e = input[(i + 1) % input.len()];
            let (ds, de) = (side(s), side(e));
            match (ds >= 0.0, de >= 0.0) {
                (true, true) => out.push(e),
                (true, false) => out.push(s.lerp(&e, ds / (ds - de))),
                (false, true) => {
                    out.push(s.lerp(&e, ds / (ds - de)));
                    out.push(e);
                }
                (false, false) => {}
            }
        }
    }
    out
}

/// Corners of the vehicle's bounding rectangle, counter-clockwise.
pub fn vehicle_rectangle(state: &VehicleState, params: &VehicleParams) -> [Point2D; 4] {
    let c = state.body_center(params);
    let fwd = state.direction() * (params.length / 2.0);
    let side = state.direction().perp() * (params.width / 2.0);
    [
        c - fwd - side,
        c + fwd - side,
        c + fwd + side,
        c - fwd + side,
    ]
}

/// The right lane as a chain of quads between centerline and right boundary.
#[derive(Debug, Clone)]
pub struct LaneStrip {
    quads: Vec<([Point2D; 4], [f64; 4])>,
}

impl LaneStrip {
    pub fn new(road: &RoadSpec) -> Result<Self, SimError> {
        let c = road.centerline.points();
        let r = road.right_boundary.points();
        if c.len() != r.len() || c.len() < 2 {
            return Err(SimError::Domain(format!(
                "degenerate lane polygon: {} centerline vs {} boundary points",
                c.len(),
                r.len()
            )));
        }
        let quads = (0..c.len() - 1)
            .map(|i| {
                let q = [c[i], c[i + 1], r[i + 1], r[i]];
                let bbox = [
                    q.iter().map(|p| p.x).fold(f64::INFINITY, f64::min),
                    q.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max),
                    q.iter().map(|p| p.y).fold(f64::INFINITY, f64::min),
                    q.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max),
                ];
                (q, bbox)
            })
            .collect();
        Ok(Self { quads })
    }

    /// Area of `rect` (convex, counter-clockwise) inside the lane.
    pub fn area_inside(&self, rect: &[Point2D; 4]) -> f64 {
        let min_x = rect.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        let max_x = rect.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
        let min_y = rect.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
        let max_y = rect.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
        self.quads
            .iter()
            .filter(|(_, b)| b[0] <= max_x && b[1] >= min_x && b[2] <= max_y && b[3] >= min_y)
            .map(|(q, _)| signed_area(&clip_polygon(q, rect)).abs())
            .sum()
    }

    /// Percentage of the vehicle rectangle outside the lane, in [0, 100].
    pub fn oob_percent(&self, state: &VehicleState, params: &VehicleParams) -> f64 {
        let rect = vehicle_rectangle(state, params);
        let total = params.length * params.width;
        let outside = 100.0 * (1.0 - self.area_inside(&rect) / total);
        if outside < NOISE_FLOOR {
            0.0
        } else {
            outside.min(100.0)
        }
    }
}

/// Percentage of the vehicle's bounding rectangle outside the right lane.
pub fn oob_percent(
    state: &VehicleState,
    road: &RoadSpec,
    params: &VehicleParams,
) -> Result<f64, SimError> {
    Ok(LaneStrip::new(road)?.oob_percent(state, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polyline;
    use crate::road::{road_from_centerline, RoadParams};

    fn straight_road() -> RoadSpec {
        let c = Polyline::new(
            (0..=20)
                .map(|i| Point2D::new(i as f64 * 10.0, 100.0))
                .collect(),
        )
        .unwrap();
        road_from_centerline(c, &RoadParams::default()).unwrap()
    }

    /// Places the body centre at (x, y) heading +x.
    fn at(x: f64, y: f64, p: &VehicleParams) -> VehicleState {
        VehicleState::new(Point2D::new(x - p.body_center_offset(), y), 0.0)
    }

    #[test]
    fn centered_in_lane() {
        let p = VehicleParams::default();
        // Right lane spans y in [96, 100]; its centre is 98.
        let v = oob_percent(&at(50.0, 98.0, &p), &straight_road(), &p).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn in_opposite_lane() {
        let p = VehicleParams::default();
        let v = oob_percent(&at(50.0, 102.0, &p), &straight_road(), &p).unwrap();
        assert_eq!(v, 100.0);
    }

    #[test]
    fn straddling_the_centerline() {
        let p = VehicleParams::default();
        let v = oob_percent(&at(50.0, 100.0, &p), &straight_road(), &p).unwrap();
        assert!((v - 50.0).abs() < 0.5, "{v}");
        // Analytic: a 0.3 m overlap across the centerline out of 1.8 m width.
        let v = oob_percent(&at(50.0, 99.4, &p), &straight_road(), &p).unwrap();
        assert!((v - 100.0 * 0.3 / 1.8).abs() < 1e-9, "{v}");
    }

    #[test]
    fn rotated_vehicle_partially_out() {
        let p = VehicleParams::default();
        let mut s = at(50.0, 98.0, &p);
        s.heading = std::f64::consts::FRAC_PI_2;
        // Rotated upright the 4.3 m body spans y in [95.85, 100.15]: 0.15 m
        // sticks out at each end, 0.3 m of 4.3 m in total.
        let body = s.body_center(&p);
        s.position = s.position - (body - Point2D::new(50.0, 98.0));
        let v = oob_percent(&s, &straight_road(), &p).unwrap();
        assert!((v - 100.0 * 0.3 / 4.3).abs() < 1e-9, "{v}");
    }

    #[test]
    fn clip_square_by_square() {
        let a: Vec<Point2D> = [(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)]
            .into_iter()
            .map(Into::into)
            .collect();
        let b: Vec<Point2D> = [(1.0, 1.0), (3.0, 1.0), (3.0, 3.0), (1.0, 3.0)]
            .into_iter()
            .map(Into::into)
            .collect();
        assert!((signed_area(&clip_polygon(&a, &b)) - 1.0).abs() < 1e-12);
    }
}
