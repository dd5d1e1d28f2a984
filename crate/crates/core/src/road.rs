//! From control points to a drivable two-lane road, plus the pre-execution
//! validity check.
//!
//! The road is two lanes wide. The centerline separates them, the vehicle
//! keeps the right lane, so the driving lane is the strip between
//! `centerline` and `right_boundary`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    min_curvature_radius, resample_uniform, sample_bezier, self_intersects_with_gap,
    ControlPointSet, GeometryError, Point2D, Polyline,
};

/// The curve is sampled this many times denser than `num_samples` before
/// arc-length resampling, so the chords of the final centerline stay close to
/// the true arc length even through tight bends.
const OVERSAMPLING: usize = 8;

#[derive(Debug, Error)]
pub enum RoadError {
    #[error("invalid road parameter `{key}`: {reason}")]
    Param { key: &'static str, reason: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoadParams {
    /// Width of a single lane, meters.
    pub lane_width: f64,
    /// Number of centerline points.
    pub num_samples: usize,
    /// Sharpest admissible centerline radius, meters.
    pub min_radius: f64,
    /// Side length of the square map, meters.
    pub map_size: f64,
    /// Clearance between non-neighbouring parts of the centerline, meters.
    pub overlap_buffer: f64,
}

impl Default for RoadParams {
    fn default() -> Self {
        Self::with_lane_width(4.0)
    }
}

impl RoadParams {
    /// Defaults with the given lane width; the overlap buffer follows it.
    pub fn with_lane_width(lane_width: f64) -> Self {
        Self {
            lane_width,
            num_samples: 100,
            min_radius: 7.0,
            map_size: 200.0,
            overlap_buffer: 2.0 * lane_width,
        }
    }

    pub fn check(&self) -> Result<(), RoadError> {
        let positive = |key, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(RoadError::Param {
                    key,
                    reason: format!("must be positive, got {v}"),
                })
            }
        };
        positive("lane_width", self.lane_width)?;
        positive("min_radius", self.min_radius)?;
        positive("map_size", self.map_size)?;
        if !(self.overlap_buffer >= 0.0 && self.overlap_buffer.is_finite()) {
            return Err(RoadError::Param {
                key: "overlap_buffer",
                reason: format!("must be non-negative, got {}", self.overlap_buffer),
            });
        }
        if self.num_samples < 3 {
            return Err(RoadError::Param {
                key: "num_samples",
                reason: format!("must be at least 3, got {}", self.num_samples),
            });
        }
        Ok(())
    }

    /// Along-path distance below which centerline segments are never compared
    /// for overlap: half a turn around a circle of one lane width.
    pub fn overlap_arc_exemption(&self) -> f64 {
        PI * self.lane_width
    }
}

/// The phenotype: centerline with left and right boundaries, all with the
/// same number of points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadSpec {
    pub centerline: Polyline,
    pub left_boundary: Polyline,
    pub right_boundary: Polyline,
    pub params: RoadParams,
}

impl RoadSpec {
    /// Centre of the right (driving) lane.
    pub fn lane_center(&self) -> Result<Polyline, GeometryError> {
        let pts = self
            .centerline
            .points()
            .iter()
            .zip(self.right_boundary.points())
            .map(|(c, r)| c.lerp(r, 0.5))
            .collect::<Vec<_>>();
        Polyline::new(pts)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("road serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationKind {
    OutOfMap,
    Overlap,
    TooSharp,
    TooShort,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::OutOfMap => "OUT_OF_MAP",
            ViolationKind::Overlap => "OVERLAP",
            ViolationKind::TooSharp => "TOO_SHARP",
            ViolationKind::TooShort => "TOO_SHORT",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidityReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

/// Builds the road for a genotype.
///
/// The Bezier curve is sampled densely, resampled to `num_samples` points
/// spaced uniformly in arc length, and offset by `±lane_width` along per-vertex
/// normals. The normal at an interior vertex is perpendicular to the average of
/// the two adjacent unit segment directions.
pub fn build_road(cps: &ControlPointSet, params: &RoadParams) -> Result<RoadSpec, RoadError> {
    params.check()?;
    let dense = sample_bezier(cps, params.num_samples * OVERSAMPLING)?;
    let centerline = resample_uniform(&dense, params.num_samples)?;
    road_from_centerline(centerline, params)
}

/// Offsets an existing centerline into a full road.
pub fn road_from_centerline(
    centerline: Polyline,
    params: &RoadParams,
) -> Result<RoadSpec, RoadError> {
    let normals = vertex_normals(centerline.points());
    let w = params.lane_width;
    let left = centerline
        .points()
        .iter()
        .zip(&normals)
        .map(|(c, n)| *c + *n * w)
        .collect();
    let right = centerline
        .points()
        .iter()
        .zip(&normals)
        .map(|(c, n)| *c - *n * w)
        .collect();
    Ok(RoadSpec {
        left_boundary: Polyline::new(left)?,
        right_boundary: Polyline::new(right)?,
        centerline,
        params: params.clone(),
    })
}

/// Left-pointing unit normals.
fn vertex_normals(pts: &[Point2D]) -> Vec<Point2D> {
    let dirs: Vec<Point2D> = pts
        .windows(2)
        .map(|w| (w[1] - w[0]).normalized().expect("distinct points"))
        .collect();
    (0..pts.len())
        .map(|i| {
            let tangent = match i {
                0 => dirs[0],
                _ if i == pts.len() - 1 => dirs[i - 1],
                _ => (dirs[i - 1] + dirs[i]).normalized().unwrap_or(dirs[i]),
            };
            tangent.perp()
        })
        .collect()
}

/// Runs every validity rule and collects the violations.
pub fn validate(road: &RoadSpec) -> ValidityReport {
    let params = &road.params;
    let mut violations = Vec::new();

    let length = road.centerline.length();
    if length < 4.0 * params.lane_width {
        violations.push(Violation {
            kind: ViolationKind::TooShort,
            detail: format!(
                "centerline length {length:.2} m is below {:.2} m",
                4.0 * params.lane_width
            ),
        });
    }

    match self_intersects_with_gap(
        &road.centerline,
        params.overlap_buffer,
        params.overlap_arc_exemption(),
    ) {
        Ok(true) => violations.push(Violation {
            kind: ViolationKind::Overlap,
            detail: format!(
                "centerline comes within {} m of itself",
                params.overlap_buffer
            ),
        }),
        Ok(false) => {}
        Err(e) => violations.push(Violation {
            kind: ViolationKind::Overlap,
            detail: e.to_string(),
        }),
    }

    if road.centerline.len() >= 3 {
        let r = min_curvature_radius(&road.centerline).unwrap_or(f64::INFINITY);
        if r < params.min_radius {
            violations.push(Violation {
                kind: ViolationKind::TooSharp,
                detail: format!("minimum radius {r:.3} m is below {} m", params.min_radius),
            });
        }
    }

    let inside = |p: &Point2D| {
        (0.0..=params.map_size).contains(&p.x) && (0.0..=params.map_size).contains(&p.y)
    };
    if let Some(p) = road
        .left_boundary
        .points()
        .iter()
        .chain(road.right_boundary.points())
        .find(|p| !inside(p))
    {
        violations.push(Violation {
            kind: ViolationKind::OutOfMap,
            detail: format!("boundary point {p} leaves the {} m map", params.map_size),
        });
    }

    ValidityReport {
        valid: violations.is_empty(),
        violations,
    }
}
