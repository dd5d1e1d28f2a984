use super::{GeometryError, Point2D, Polyline};

/// Distance from `p` to the closed segment `a`-`b`.
pub fn point_segment_distance(p: Point2D, a: Point2D, b: Point2D) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(&ab);
    if len2 == 0.0 {
        return p.distance(&a);
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    p.distance(&(a + ab * t))
}

fn orient(a: Point2D, b: Point2D, c: Point2D) -> f64 {
    (b - a).cross(&(c - a))
}

fn on_segment(p: Point2D, a: Point2D, b: Point2D) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// True when the closed segments `a1`-`a2` and `b1`-`b2` share at least one
/// point.
pub fn segments_intersect(a1: Point2D, a2: Point2D, b1: Point2D, b2: Point2D) -> bool {
    let d1 = orient(b1, b2, a1);
    let d2 = orient(b1, b2, a2);
    let d3 = orient(a1, a2, b1);
    let d4 = orient(a1, a2, b2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(a1, b1, b2))
        || (d2 == 0.0 && on_segment(a2, b1, b2))
        || (d3 == 0.0 && on_segment(b1, a1, a2))
        || (d4 == 0.0 && on_segment(b2, a1, a2))
}

/// Minimum distance between two closed segments.
pub fn segment_distance(a1: Point2D, a2: Point2D, b1: Point2D, b2: Point2D) -> f64 {
    if segments_intersect(a1, a2, b1, b2) {
        return 0.0;
    }
    point_segment_distance(a1, b1, b2)
        .min(point_segment_distance(a2, b1, b2))
        .min(point_segment_distance(b1, a1, a2))
        .min(point_segment_distance(b2, a1, a2))
}

/// True iff two non-adjacent segments of `p` touch or come closer than
/// `buffer`. Segments sharing a vertex index are exempt.
pub fn self_intersects(p: &Polyline, buffer: f64) -> Result<bool, GeometryError> {
    self_intersects_with_gap(p, buffer, 0.0)
}

/// Like [`self_intersects`], but additionally exempts segment pairs whose
/// separation along the polyline (arc length strictly between them) is below
/// `min_arc_gap`. A bend of a road is then not mistaken for an overlap with
/// its own immediate neighbourhood.
pub fn self_intersects_with_gap(
    p: &Polyline,
    buffer: f64,
    min_arc_gap: f64,
) -> Result<bool, GeometryError> {
    if !(buffer >= 0.0) {
        return Err(GeometryError::Domain(format!(
            "buffer must be non-negative, got {buffer}"
        )));
    }
    let pts = p.points();
    let arc = p.cumulative_lengths();
    let nseg = pts.len() - 1;
    for i in 0..nseg {
        let (a1, a2) = (pts[i], pts[i + 1]);
        let (lo_x, hi_x) = (a1.x.min(a2.x) - buffer, a1.x.max(a2.x) + buffer);
        let (lo_y, hi_y) = (a1.y.min(a2.y) - buffer, a1.y.max(a2.y) + buffer);
        for j in (i + 2)..nseg {
            if arc[j] - arc[i + 1] < min_arc_gap {
                continue;
            }
            let (b1, b2) = (pts[j], pts[j + 1]);
            if b1.x.max(b2.x) < lo_x
                || b1.x.min(b2.x) > hi_x
                || b1.y.max(b2.y) < lo_y
                || b1.y.min(b2.y) > hi_y
            {
                continue;
            }
            if segments_intersect(a1, a2, b1, b2) || segment_distance(a1, a2, b1, b2) < buffer {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Radius of the circle through three points; `+inf` when they are collinear.
pub fn circumradius(a: Point2D, b: Point2D, c: Point2D) -> f64 {
    let twice_area = orient(a, b, c).abs();
    if twice_area == 0.0 {
        return f64::INFINITY;
    }
    a.distance(&b) * b.distance(&c) * c.distance(&a) / (2.0 * twice_area)
}

/// Smallest circumradius over all consecutive vertex triples.
pub fn min_curvature_radius(p: &Polyline) -> Result<f64, GeometryError> {
    if p.len() < 3 {
        return Err(GeometryError::TooFewPoints {
            needed: 3,
            got: p.len(),
        });
    }
    Ok(p.points()
        .windows(3)
        .map(|w| circumradius(w[0], w[1], w[2]))
        .fold(f64::INFINITY, f64::min))
}

/// Resamples `p` to `count` points equally spaced in arc length, keeping both
/// endpoints.
pub fn resample_uniform(p: &Polyline, count: usize) -> Result<Polyline, GeometryError> {
    if count < 2 {
        return Err(GeometryError::Domain(format!(
            "resample count must be at least 2, got {count}"
        )));
    }
    let pts = p.points();
    let arc = p.cumulative_lengths();
    let total = arc[arc.len() - 1];
    let mut out = Vec::with_capacity(count);
    out.push(pts[0]);
    let mut seg = 0;
    for k in 1..count - 1 {
        let target = total * k as f64 / (count - 1) as f64;
        while seg + 1 < arc.len() - 1 && arc[seg + 1] < target {
            seg += 1;
        }
        let span = arc[seg + 1] - arc[seg];
        let t = ((target - arc[seg]) / span).clamp(0.0, 1.0);
        out.push(pts[seg].lerp(&pts[seg + 1], t));
    }
    out.push(pts[pts.len() - 1]);
    out.dedup();
    Polyline::new(out)
}
