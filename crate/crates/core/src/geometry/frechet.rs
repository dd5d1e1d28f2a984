use super::{GeometryError, Point2D};

/// Largest `|p| * |q|` accepted by [`frechet_bruteforce`].
pub const BRUTEFORCE_MAX_CELLS: usize = 64;

/// Discrete Fréchet distance between two point sequences.
///
/// Iterative dynamic program over the coupling table, keeping only one row.
/// `O(|p| * |q|)` time, `O(|q|)` memory.
pub fn discrete_frechet(p: &[Point2D], q: &[Point2D]) -> Result<f64, GeometryError> {
    if p.is_empty() || q.is_empty() {
        return Err(GeometryError::TooFewPoints { needed: 1, got: 0 });
    }
    let mut row = vec![0.0f64; q.len()];
    for (i, a) in p.iter().enumerate() {
        let mut diag = 0.0;
        for (j, b) in q.iter().enumerate() {
            let d = a.distance(b);
            let prev = row[j];
            row[j] = match (i, j) {
                (0, 0) => d,
                (0, _) => row[j - 1].max(d),
                (_, 0) => prev.max(d),
                _ => prev.min(diag).min(row[j - 1]).max(d),
            };
            diag = prev;
        }
    }
    Ok(row[q.len() - 1])
}

/// Minimum over all monotone couplings of the maximum paired distance, found
/// by explicit enumeration of every coupling path. Test oracle only.
pub fn frechet_bruteforce(p: &[Point2D], q: &[Point2D]) -> Result<f64, GeometryError> {
    if p.is_empty() || q.is_empty() {
        return Err(GeometryError::TooFewPoints { needed: 1, got: 0 });
    }
    let cells = p.len() * q.len();
    if cells > BRUTEFORCE_MAX_CELLS {
        return Err(GeometryError::TooLarge(cells));
    }
    let mut best = f64::INFINITY;
    let mut path = vec![(0usize, 0usize)];
    enumerate(p, q, &mut path, &mut best);
    Ok(best)
}

fn enumerate(p: &[Point2D], q: &[Point2D], path: &mut Vec<(usize, usize)>, best: &mut f64) {
    let &(i, j) = path.last().unwrap();
    if i == p.len() - 1 && j == q.len() - 1 {
        let worst = path
            .iter()
            .map(|&(a, b)| p[a].distance(&q[b]))
            .fold(0.0, f64::max);
        if worst < *best {
            *best = worst;
        }
        return;
    }
    for (di, dj) in [(1, 0), (0, 1), (1, 1)] {
        let (ni, nj) = (i + di, j + dj);
        if ni < p.len() && nj < q.len() {
            path.push((ni, nj));
            enumerate(p, q, path, best);
            path.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Point2D> {
        v.iter().map(|&p| p.into()).collect()
    }

    #[test]
    fn single_points() {
        let p = pts(&[(0.0, 0.0)]);
        let q = pts(&[(3.0, 4.0)]);
        assert_eq!(discrete_frechet(&p, &q).unwrap(), 5.0);
        assert_eq!(frechet_bruteforce(&p, &q).unwrap(), 5.0);
    }

    #[test]
    fn identity_and_translation() {
        let p = pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        let q = pts(&[(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)]);
        assert_eq!(discrete_frechet(&p, &p).unwrap(), 0.0);
        assert_eq!(discrete_frechet(&p, &q).unwrap(), 1.0);
    }

    #[test]
    fn bruteforce_examples() {
        let p = pts(&[(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(frechet_bruteforce(&p, &p).unwrap(), 0.0);
        let p = pts(&[(0.0, 0.0), (2.0, 0.0)]);
        let q = pts(&[(0.0, 1.0)]);
        assert_eq!(frechet_bruteforce(&p, &q).unwrap(), 5f64.sqrt());
        assert_eq!(discrete_frechet(&p, &q).unwrap(), 5f64.sqrt());
    }

    #[test]
    fn empty_input() {
        let p = pts(&[(0.0, 0.0)]);
        assert!(discrete_frechet(&p, &[]).is_err());
        assert!(discrete_frechet(&[], &p).is_err());
        assert!(frechet_bruteforce(&[], &p).is_err());
    }

    #[test]
    fn bruteforce_refuses_large_inputs() {
        let p: Vec<Point2D> = (0..9).map(|i| Point2D::new(i as f64, 0.0)).collect();
        assert!(matches!(
            frechet_bruteforce(&p, &p),
            Err(GeometryError::TooLarge(81))
        ));
        assert!(frechet_bruteforce(&p[..8], &p[..8]).is_ok());
    }

    #[test]
    fn greedy_is_not_enough() {
        // The index-aligned coupling costs 2.5; pairing q[1] with p[0] gives 1.
        let p = pts(&[(0.0, 0.0), (3.0, 0.0), (4.0, 0.0)]);
        let q = pts(&[(0.0, 0.0), (0.5, 0.0), (4.0, 0.0)]);
        let d = discrete_frechet(&p, &q).unwrap();
        assert_eq!(d, frechet_bruteforce(&p, &q).unwrap());
        assert_eq!(d, 1.0);
    }
}
