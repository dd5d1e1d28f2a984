use rand::Rng;

use super::{Individual, SearchConfig, SearchError};
use crate::geometry::{ControlPointSet, Point2D};

/// Uniform control points over the map, sorted by x.
pub fn random_individual<R: Rng + ?Sized>(
    rng: &mut R,
    config: &SearchConfig,
    map_size: f64,
) -> Individual {
    let points = (0..config.num_control_points)
        .map(|_| Point2D::new(rng.gen_range(0.0..=map_size), rng.gen_range(0.0..=map_size)))
        .collect();
    Individual::new(
        ControlPointSet::new(points, map_size)
            .expect("points drawn inside the map")
            .sorted_by_x(),
    )
}

/// Tournament selection with replacement; returns the index of the winner.
/// Ties go to the lower index.
pub fn select<R: Rng + ?Sized>(
    pop: &[Individual],
    rng: &mut R,
    config: &SearchConfig,
) -> Result<usize, SearchError> {
    if pop.is_empty() {
        return Err(SearchError::EmptyPopulation);
    }
    let mut best: Option<(usize, f64)> = None;
    for _ in 0..config.tournament_size.max(1) {
        let i = rng.gen_range(0..pop.len());
        let f = pop[i].fitness().ok_or(SearchError::Unevaluated(i))?;
        best = match best {
            Some((bi, bf)) if bf > f || (bf == f && bi < i) => Some((bi, bf)),
            _ => Some((i, f)),
        };
    }
    Ok(best.unwrap().0)
}

/// One-point crossover at `cut`: the first child takes `a[..cut]` and
/// `b[cut..]`, the second the complement. Children are re-sorted by x and
/// unevaluated.
pub fn crossover_at(
    a: &Individual,
    b: &Individual,
    cut: usize,
) -> Result<(Individual, Individual), SearchError> {
    let (pa, pb) = (a.genotype.points(), b.genotype.points());
    if pa.len() != pb.len() {
        return Err(SearchError::LengthMismatch(pa.len(), pb.len()));
    }
    let cut = cut.min(pa.len());
    let map = a.genotype.map_size();
    let join = |x: &[Point2D], y: &[Point2D]| {
        let pts = x[..cut].iter().chain(&y[cut..]).copied().collect();
        Individual::new(
            ControlPointSet::new(pts, map)
                .expect("points come from in-map parents")
                .sorted_by_x(),
        )
    };
    Ok((join(pa, pb), join(pb, pa)))
}

/// With probability `crossover_prob`, one-point crossover at a uniform cut in
/// `[1, n - 1]`; otherwise unevaluated copies of the parents.
pub fn crossover<R: Rng + ?Sized>(
    a: &Individual,
    b: &Individual,
    rng: &mut R,
    config: &SearchConfig,
) -> Result<(Individual, Individual), SearchError> {
    let n = a.genotype.len();
    if n != b.genotype.len() {
        return Err(SearchError::LengthMismatch(n, b.genotype.len()));
    }
    if n >= 2 && rng.gen_bool(config.crossover_prob) {
        let cut = rng.gen_range(1..n);
        crossover_at(a, b, cut)
    } else {
        Ok((
            Individual::new(a.genotype.clone().sorted_by_x()),
            Individual::new(b.genotype.clone().sorted_by_x()),
        ))
    }
}

/// Each control point is, with probability `mutation_prob`, redrawn from the
/// square of half side `mutation_range` around it, clipped to the map.
pub fn mutate<R: Rng + ?Sized>(ind: &Individual, rng: &mut R, config: &SearchConfig) -> Individual {
    let map = ind.genotype.map_size();
    let r = config.mutation_range;
    let points = ind
        .genotype
        .points()
        .iter()
        .map(|p| {
            if rng.gen_bool(config.mutation_prob) {
                let x = rng.gen_range((p.x - r)..=(p.x + r)).clamp(0.0, map);
                let y = rng.gen_range((p.y - r)..=(p.y + r)).clamp(0.0, map);
                Point2D::new(x, y)
            } else {
                *p
            }
        })
        .collect();
    Individual::new(
        ControlPointSet::new(points, map)
            .expect("clipped to the map")
            .sorted_by_x(),
    )
}
