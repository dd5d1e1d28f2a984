//! Planar geometry kernel.
//!
//! Everything in here is a pure function of its inputs: Bezier evaluation and
//! sampling, discrete Fréchet distance (plus a brute-force oracle), polyline
//! self-intersection with a clearance buffer, and circumradius-based curvature
//! estimation.

mod bezier;
mod frechet;
mod polyline;

use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bezier::{bezier_point, sample_bezier};
pub use frechet::{discrete_frechet, frechet_bruteforce, BRUTEFORCE_MAX_CELLS};
pub use polyline::{
    circumradius, min_curvature_radius, point_segment_distance, resample_uniform, segment_distance,
    segments_intersect, self_intersects, self_intersects_with_gap,
};

/// Absolute tolerance used for floating-point comparisons, in meters.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("parameter t = {0} is outside [0, 1]")]
    ParameterOutOfRange(f64),
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("non-finite coordinate at index {0}")]
    NonFinite(usize),
    #[error("consecutive points at index {0} and the next coincide")]
    DuplicatePoint(usize),
    #[error("control point {index} ({x}, {y}) lies outside the {map_size} m map")]
    OutsideMap {
        index: usize,
        x: f64,
        y: f64,
        map_size: f64,
    },
    #[error("map size must be positive and finite, got {0}")]
    BadMapSize(f64),
    #[error("input of {0} coupling cells is too large for brute-force enumeration")]
    TooLarge(usize),
    #[error("{0}")]
    Domain(String),
}

/// A point in the plane, coordinates in meters.
///
/// Serialized as a two-element array `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(&self, other: &Point2D) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(&self, other: &Point2D) -> f64 {
        self.x * other.y - self.y * other.x
    }

    /// Rotated by +90°.
    pub fn perp(&self) -> Point2D {
        Point2D::new(-self.y, self.x)
    }

    pub fn normalized(&self) -> Option<Point2D> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| Point2D::new(self.x / n, self.y / n))
    }

    pub fn lerp(&self, other: &Point2D, t: f64) -> Point2D {
        Point2D::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Point2D {
    fn from([x, y]: [f64; 2]) -> Self {
        Point2D::new(x, y)
    }
}

impl From<Point2D> for [f64; 2] {
    fn from(p: Point2D) -> Self {
        [p.x, p.y]
    }
}

impl From<(f64, f64)> for Point2D {
    fn from((x, y): (f64, f64)) -> Self {
        Point2D::new(x, y)
    }
}

impl Add for Point2D {
    type Output = Point2D;
    fn add(self, rhs: Point2D) -> Point2D {
        Point2D::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2D {
    type Output = Point2D;
    fn sub(self, rhs: Point2D) -> Point2D {
        Point2D::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2D {
    type Output = Point2D;
    fn mul(self, rhs: f64) -> Point2D {
        Point2D::new(self.x * rhs, self.y * rhs)
    }
}

impl fmt::Display for Point2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// An ordered point sequence with at least two points and no zero-length
/// segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2D>", into = "Vec<Point2D>")]
pub struct Polyline {
    points: Vec<Point2D>,
}

impl Polyline {
    pub fn new(points: Vec<Point2D>) -> Result<Self, GeometryError> {
        if points.len() < 2 {
            return Err(GeometryError::TooFewPoints {
                needed: 2,
                got: points.len(),
            });
        }
        for (i, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(GeometryError::NonFinite(i));
            }
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[0] == w[1] {
                return Err(GeometryError::DuplicatePoint(i));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point2D] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> Point2D {
        self.points[0]
    }

    pub fn last(&self) -> Point2D {
        self.points[self.points.len() - 1]
    }

    /// Cumulative arc length at every vertex; starts at 0.
    pub fn cumulative_lengths(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.points.len());
        out.push(0.0);
        for w in self.points.windows(2) {
            acc += w[0].distance(&w[1]);
            out.push(acc);
        }
        out
    }

    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].distance(&w[1])).sum()
    }

    /// Applies `f` to every point. Fails if the image is not a valid polyline.
    pub fn map_points(&self, f: impl Fn(Point2D) -> Point2D) -> Result<Polyline, GeometryError> {
        Polyline::new(self.points.iter().copied().map(f).collect())
    }

    pub fn into_points(self) -> Vec<Point2D> {
        self.points
    }
}

impl TryFrom<Vec<Point2D>> for Polyline {
    type Error = GeometryError;
    fn try_from(points: Vec<Point2D>) -> Result<Self, Self::Error> {
        Polyline::new(points)
    }
}

impl From<Polyline> for Vec<Point2D> {
    fn from(p: Polyline) -> Self {
        p.points
    }
}

/// The genotype of one search individual: ordered control points inside a
/// square map of side `map_size`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawControlPoints", into = "RawControlPoints")]
pub struct ControlPointSet {
    points: Vec<Point2D>,
    map_size: f64,
}

#[derive(Serialize, Deserialize)]
struct RawControlPoints {
    points: Vec<Point2D>,
    map_size: f64,
}

impl TryFrom<RawControlPoints> for ControlPointSet {
    type Error = GeometryError;
    fn try_from(raw: RawControlPoints) -> Result<Self, Self::Error> {
        ControlPointSet::new(raw.points, raw.map_size)
    }
}

impl From<ControlPointSet> for RawControlPoints {
    fn from(c: ControlPointSet) -> Self {
        RawControlPoints {
            points: c.points,
            map_size: c.map_size,
        }
    }
}

impl ControlPointSet {
    pub fn new(points: Vec<Point2D>, map_size: f64) -> Result<Self, GeometryError> {
        if !(map_size > 0.0 && map_size.is_finite()) {
            return Err(GeometryError::BadMapSize(map_size));
        }
        if points.len() < 2 {
            return Err(GeometryError::TooFewPoints {
                needed: 2,
                got: points.len(),
            });
        }
        for (index, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(GeometryError::NonFinite(index));
            }
            if !(0.0..=map_size).contains(&p.x) || !(0.0..=map_size).contains(&p.y) {
                return Err(GeometryError::OutsideMap {
                    index,
                    x: p.x,
                    y: p.y,
                    map_size,
                });
            }
        }
        Ok(Self { points, map_size })
    }

    pub fn points(&self) -> &[Point2D] {
        &self.points
    }

    pub fn map_size(&self) -> f64 {
        self.map_size
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Stable sort by x-coordinate (ties keep their relative order).
    pub fn sorted_by_x(mut self) -> Self {
        self.points.sort_by(|a, b| a.x.total_cmp(&b.x));
        self
    }
}
