use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roadsearch_core::geometry::*;

fn pt() -> impl Strategy<Value = Point2D> {
    (0.0..200.0f64, 0.0..200.0f64).prop_map(|(x, y)| Point2D::new(x, y))
}

fn cps() -> impl Strategy<Value = ControlPointSet> {
    prop::collection::vec(pt(), 2..10).prop_map(|p| ControlPointSet::new(p, 200.0).unwrap())
}

fn pts(max: usize) -> impl Strategy<Value = Vec<Point2D>> {
    prop::collection::vec(pt(), 1..=max)
}

/// Andrew's monotone chain, counter-clockwise without collinear points.
fn hull(points: &[Point2D]) -> Vec<Point2D> {
    let mut p = points.to_vec();
    p.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: Point2D, a: Point2D, b: Point2D| (a - o).cross(&(b - o));
    let mut h: Vec<Point2D> = Vec::new();
    for pass in 0..2 {
        let start = h.len();
        let iter: Box<dyn Iterator<Item = &Point2D>> = if pass == 0 {
            Box::new(p.iter())
        } else {
            Box::new(p.iter().rev())
        };
        for &q in iter {
            while h.len() >= start + 2 && cross(h[h.len() - 2], h[h.len() - 1], q) <= 0.0 {
                h.pop();
            }
            h.push(q);
        }
        h.pop();
    }
    h
}

/// Distance from `q` to the hull, 0 inside.
fn hull_distance(h: &[Point2D], q: Point2D) -> f64 {
    match h.len() {
        1 => q.distance(&h[0]),
        2 => point_segment_distance(q, h[0], h[1]),
        n => {
            let inside = (0..n).all(|i| (h[(i + 1) % n] - h[i]).cross(&(q - h[i])) >= 0.0);
            if inside {
                0.0
            } else {
                (0..n)
                    .map(|i| point_segment_distance(q, h[i], h[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

#[test]
fn bezier_stays_in_convex_hull() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut violations = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(2..=10);
        let p: Vec<Point2D> = (0..n)
            .map(|_| Point2D::new(rng.gen_range(0.0..=200.0), rng.gen_range(0.0..=200.0)))
            .collect();
        let h = hull(&p);
        let c = ControlPointSet::new(p, 200.0).unwrap();
        for _ in 0..100 {
            let b = bezier_point(&c, rng.gen_range(0.0..=1.0)).unwrap();
            if hull_distance(&h, b) > 1e-9 {
                violations += 1;
            }
        }
    }
    assert_eq!(violations, 0);
}

#[test]
fn frechet_matches_bruteforce_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<Point2D> {
        let n = rng.gen_range(1..=5);
        (0..n)
            .map(|_| Point2D::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)))
            .collect()
    };
    for _ in 0..200 {
        let (p, q) = (draw(&mut rng), draw(&mut rng));
        let fast = discrete_frechet(&p, &q).unwrap();
        let slow = frechet_bruteforce(&p, &q).unwrap();
        assert!((fast - slow).abs() <= 1e-9, "{p:?} {q:?}: {fast} vs {slow}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bezier_interpolates_endpoints(c in cps()) {
        let first = c.points()[0];
        let last = *c.points().last().unwrap();
        prop_assert!(bezier_point(&c, 0.0).unwrap().distance(&first) <= 1e-9);
        prop_assert!(bezier_point(&c, 1.0).unwrap().distance(&last) <= 1e-9);
    }

    #[test]
    fn frechet_identity_and_symmetry(p in pts(12), q in pts(12)) {
        prop_assert_eq!(discrete_frechet(&p, &p).unwrap(), 0.0);
        let pq = discrete_frechet(&p, &q).unwrap();
        let qp = discrete_frechet(&q, &p).unwrap();
        prop_assert!((pq - qp).abs() <= 1e-9);
        let ends = p[0].distance(&q[0]).max(p.last().unwrap().distance(q.last().unwrap()));
        prop_assert!(pq >= ends - 1e-9);
    }

    #[test]
    fn frechet_translation_invariant(p in pts(12), q in pts(12), dx in -500.0..500.0f64, dy in -500.0..500.0f64) {
        let shift = |v: &[Point2D]| v.iter().map(|a| *a + Point2D::new(dx, dy)).collect::<Vec<_>>();
        let d0 = discrete_frechet(&p, &q).unwrap();
        let d1 = discrete_frechet(&shift(&p), &shift(&q)).unwrap();
        prop_assert!((d0 - d1).abs() <= 1e-9, "{} vs {}", d0, d1);
    }

    #[test]
    fn frechet_oracle_small(p in pts(5), q in pts(5)) {
        let fast = discrete_frechet(&p, &q).unwrap();
        let slow = frechet_bruteforce(&p, &q).unwrap();
        prop_assert!((fast - slow).abs() <= 1e-9);
    }

    #[test]
    fn overlap_monotone_in_buffer(p in prop::collection::vec(pt(), 3..15), b in 0.0..20.0f64, extra in 0.0..20.0f64) {
        let Ok(line) = Polyline::new(p) else { return Ok(()) };
        if self_intersects(&line, b).unwrap() {
            prop_assert!(self_intersects(&line, b + extra).unwrap());
        }
    }

    #[test]
    fn resampling_spacing_uniform(c in cps(), n in 3usize..200) {
        let Ok(curve) = sample_bezier(&c, 400) else { return Ok(()) };
        let r = resample_uniform(&curve, n).unwrap();
        prop_assert_eq!(r.len(), n);
        prop_assert!(r.first().distance(&curve.first()) <= 1e-9);
        prop_assert!(r.last().distance(&curve.last()) <= 1e-9);
        prop_assert!(r.length() <= curve.length() + 1e-9);
    }
}
