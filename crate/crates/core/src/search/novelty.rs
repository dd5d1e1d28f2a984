//! Fréchet-distance diversity: population averages, the novelty admission
//! rule and the archive of failing roads.

use serde::{Deserialize, Serialize};

use super::Individual;
use crate::geometry::{discrete_frechet, Polyline};
use crate::road::RoadParams;

/// The road centerline of an individual, if its genotype yields a road.
pub fn centerline_of(ind: &Individual, road: &RoadParams) -> Option<Polyline> {
    super::evaluate::centerline_or_none(&ind.genotype, road)
}

fn frechet(a: &Polyline, b: &Polyline) -> f64 {
    discrete_frechet(a.points(), b.points()).expect("polylines are non-empty")
}

/// Symmetric matrix of pairwise discrete Fréchet distances.
pub fn pairwise_frechet(curves: &[Polyline]) -> Vec<Vec<f64>> {
    let n = curves.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = frechet(&curves[i], &curves[j]);
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}

fn mean_upper(d: &[Vec<f64>]) -> Option<f64> {
    let n = d.len();
    if n < 2 {
        return None;
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += d[i][j];
        }
    }
    Some(sum / (n * (n - 1) / 2) as f64)
}

/// Mean discrete Fréchet distance over all unordered pairs; `None` for fewer
/// than two curves.
pub fn population_avg_frechet(curves: &[Polyline]) -> Option<f64> {
    mean_upper(&pairwise_frechet(curves))
}

/// How much the population average must grow for a candidate to be admitted.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoveltyPolicy {
    /// Required increase in meters; 0 means any strict increase.
    pub min_gain: f64,
}

/// Would swapping the population member closest to `candidate` for the
/// candidate raise the population's average Fréchet distance by more than
/// `policy.min_gain`?
///
/// Populations of fewer than two curves have no average and always accept.
pub fn novelty_accept(candidate: &Polyline, pop: &[Polyline], policy: NoveltyPolicy) -> bool {
    let matrix = pairwise_frechet(pop);
    novelty_accept_with(candidate, pop, &matrix, policy)
}

/// [`novelty_accept`] with a precomputed [`pairwise_frechet`] matrix.
pub(crate) fn novelty_accept_with(
    candidate: &Polyline,
    pop: &[Polyline],
    matrix: &[Vec<f64>],
    policy: NoveltyPolicy,
) -> bool {
    let Some(before) = mean_upper(matrix) else {
        return true;
    };
    let to_candidate: Vec<f64> = pop.iter().map(|c| frechet(candidate, c)).collect();
    let closest = to_candidate
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty population");
    let mut swapped = matrix.to_vec();
    for j in 0..pop.len() {
        if j != closest {
            swapped[closest][j] = to_candidate[j];
            swapped[j][closest] = to_candidate[j];
        }
    }
    let after = mean_upper(&swapped).expect("same size");
    after > before + policy.min_gain
}

/// Failing roads found so far, with their pairwise Fréchet distances.
#[derive(Debug, Clone, Default)]
pub struct FailureArchive {
    ids: Vec<u64>,
    curves: Vec<Polyline>,
    dist: Vec<Vec<f64>>,
}

impl FailureArchive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, id: u64, centerline: Polyline) {
        let row: Vec<f64> = self
            .curves
            .iter()
            .map(|c| frechet(c, &centerline))
            .collect();
        for (r, v) in self.dist.iter_mut().zip(&row) {
            r.push(*v);
        }
        let mut own = row;
        own.push(0.0);
        self.dist.push(own);
        self.ids.push(id);
        self.curves.push(centerline);
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn distances(&self) -> &[Vec<f64>] {
        &self.dist
    }

    /// Mean pairwise distance; `None` below two failures.
    pub fn avg(&self) -> Option<f64> {
        mean_upper(&self.dist)
    }

    /// Largest pairwise distance; `None` below two failures.
    pub fn max(&self) -> Option<f64> {
        (self.len() >= 2).then(|| {
            self.dist
                .iter()
                .flat_map(|r| r.iter().copied())
                .fold(0.0, f64::max)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2D;

    fn flat(y: f64) -> Polyline {
        Polyline::new((0..5).map(|i| Point2D::new(i as f64, y)).collect()).unwrap()
    }

    #[test]
    fn identical_curves_average_zero() {
        assert_eq!(population_avg_frechet(&[flat(0.0), flat(0.0)]), Some(0.0));
        assert_eq!(population_avg_frechet(&[flat(0.0)]), None);
        assert_eq!(population_avg_frechet(&[]), None);
    }

    #[test]
    fn arithmetic_mean_of_pairs() {
        // Translated copies of one short segment on a 3-4-5 triangle.
        let p = |x: f64, y: f64| {
            Polyline::new(vec![Point2D::new(x, y), Point2D::new(x + 0.5, y)]).unwrap()
        };
        let curves = [p(0.0, 0.0), p(3.0, 0.0), p(0.0, 4.0)];
        let avg = population_avg_frechet(&curves).unwrap();
        assert!((avg - 4.0).abs() < 1e-12, "{avg}");
    }

    #[test]
    fn novelty_examples() {
        let pop = [flat(0.0), flat(0.0), flat(10.0)];
        assert!(!novelty_accept(&flat(0.0), &pop, NoveltyPolicy::default()));
        assert!(!novelty_accept(&flat(10.0), &pop, NoveltyPolicy::default()));
        assert!(novelty_accept(&flat(50.0), &pop, NoveltyPolicy::default()));
        assert!(!novelty_accept(
            &flat(50.0),
            &pop,
            NoveltyPolicy { min_gain: 1000.0 }
        ));
        assert!(novelty_accept(
            &flat(1.0),
            &[flat(0.0)],
            NoveltyPolicy::default()
        ));
    }

    #[test]
    fn archive_aggregates() {
        let mut a = FailureArchive::new();
        a.push(0, flat(0.0));
        assert_eq!((a.avg(), a.max()), (None, None));
        a.push(1, flat(3.0));
        a.push(2, flat(10.0));
        // Pairwise 3, 10, 7.
        assert!((a.avg().unwrap() - 20.0 / 3.0).abs() < 1e-12);
        assert_eq!(a.max(), Some(10.0));
        assert_eq!(a.ids(), &[0, 1, 2]);
    }
}
