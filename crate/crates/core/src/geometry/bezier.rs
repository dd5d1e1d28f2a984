use super::{ControlPointSet, GeometryError, Point2D, Polyline};

/// Evaluates the Bezier curve of degree `n - 1` defined by all control points
/// at parameter `t` using the de Casteljau recurrence.
pub fn bezier_point(cps: &ControlPointSet, t: f64) -> Result<Point2D, GeometryError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(GeometryError::ParameterOutOfRange(t));
    }
    Ok(de_casteljau(cps.points(), t))
}

pub(crate) fn de_casteljau(points: &[Point2D], t: f64) -> Point2D {
    // Exact endpoints regardless of rounding in the recurrence.
    if t == 0.0 {
        return points[0];
    }
    if t == 1.0 {
        return points[points.len() - 1];
    }
    let mut work = points.to_vec();
    for level in (1..work.len()).rev() {
        for i in 0..level {
            work[i] = work[i].lerp(&work[i + 1], t);
        }
    }
    work[0]
}

/// Samples the curve at `num_samples` uniformly spaced parameter values.
///
/// Consecutive samples that coincide exactly are collapsed into one, so the
/// result may be shorter than `num_samples`. Fails if the whole curve
/// degenerates to a single point.
pub fn sample_bezier(cps: &ControlPointSet, num_samples: usize) -> Result<Polyline, GeometryError> {
    if num_samples < 2 {
        return Err(GeometryError::Domain(format!(
            "num_samples must be at least 2, got {num_samples}"
        )));
    }
    let last = (num_samples - 1) as f64;
    let mut out: Vec<Point2D> = Vec::with_capacity(num_samples);
    for i in 0..num_samples {
        let p = de_casteljau(cps.points(), i as f64 / last);
        if out.last() != Some(&p) {
            out.push(p);
        }
    }
    Polyline::new(out)
}
