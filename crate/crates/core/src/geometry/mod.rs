//! Simulation domain, Poisson sampling and nearest-point queries.

mod domain;
mod grid;

pub use domain::{Boundary, PointSet, SimDomain};
pub use grid::{GridIndex, Neighbor, NeighborIter, RankedNeighbors, RingSearch};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Deterministic generator used throughout; identical seeds replay identical runs.
pub type SimRng = rand_chacha::ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Homogeneous Poisson process of the given intensity on the domain box.
pub fn sample_poisson<T: Scalar, R: Rng + ?Sized>(
    domain: &SimDomain<T>,
    intensity: f64,
    rng: &mut R,
) -> Result<PointSet<T>> {
    if !(intensity > 0.0) || !intensity.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "intensity must be positive and finite, got {intensity}"
        )));
    }
    let mean = intensity * domain.volume().as_f64();
    let count = Poisson::new(mean)
        .map_err(|e| Error::InvalidParameter(format!("Poisson mean {mean}: {e}")))?
        .sample(rng) as usize;
    Ok(sample_uniform(domain, count, rng))
}

/// `count` iid uniform points in the box.
pub fn sample_uniform<T: Scalar, R: Rng + ?Sized>(
    domain: &SimDomain<T>,
    count: usize,
    rng: &mut R,
) -> PointSet<T> {
    let side = domain.side().as_f64();
    let coords = (0..count * domain.dim())
        .map(|_| domain.wrap(T::lit(rng.random::<f64>() * side)))
        .collect();
    PointSet::from_flat(domain.dim(), coords).expect("coordinate count is a multiple of dim")
}

/// Points within distance `r` (inclusive) of `center`, optionally skipping one index.
pub fn count_in_ball<T: Scalar>(
    domain: &SimDomain<T>,
    points: &PointSet<T>,
    center: &[T],
    r: T,
    exclude: Option<usize>,
) -> usize {
    // compared as distances so that `r = kth_nearest_distance(..)` is inclusive
    points
        .iter()
        .enumerate()
        .filter(|&(j, p)| Some(j) != exclude && domain.distance(center, p) <= r)
        .count()
}

/// Distance from `center` to its `k`-th nearest point (k starts at 1).
pub fn kth_nearest_distance<T: Scalar>(
    domain: &SimDomain<T>,
    points: &PointSet<T>,
    center: &[T],
    k: usize,
    exclude: Option<usize>,
) -> Result<T> {
    let mut d2: Vec<T> = points
        .iter()
        .enumerate()
        .filter(|&(j, _)| Some(j) != exclude)
        .map(|(_, p)| domain.sq_distance(center, p))
        .collect();
    if k == 0 || k > d2.len() {
        return Err(Error::InsufficientPoints {
            requested: k,
            available: d2.len(),
        });
    }
    let (_, kth, _) = d2.select_nth_unstable_by(k - 1, |a, b| a.partial_cmp(b).unwrap());
    Ok(kth.sqrt())
}

/// Eligible points ranked by distance from point `query`, ties broken by index.
pub fn neighbors_sorted<'a, T: Scalar>(
    domain: &SimDomain<T>,
    points: &'a PointSet<T>,
    query: usize,
    mask: &[bool],
) -> RankedNeighbors<'a, T> {
    let grid = GridIndex::new(domain, points, Some(mask));
    RankedNeighbors::new(grid, query)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64], side: f64) -> (SimDomain<f64>, PointSet<f64>) {
        let d = SimDomain::torus(1, side).unwrap();
        let p = PointSet::from_line(&d, xs).unwrap();
        (d, p)
    }

    #[test]
    fn sample_poisson_rejects_bad_parameters() {
        let d = SimDomain::torus(2, 3.0).unwrap();
        let mut rng = seeded_rng(1);
        assert!(sample_poisson(&d, 0.0, &mut rng).is_err());
        assert!(sample_poisson(&d, -1.0, &mut rng).is_err());
    }

    #[test]
    fn sample_poisson_is_deterministic() {
        let d = SimDomain::torus(2, 10.0).unwrap();
        let a: PointSet<f64> = sample_poisson(&d, 1.0, &mut seeded_rng(9)).unwrap();
        let b: PointSet<f64> = sample_poisson(&d, 1.0, &mut seeded_rng(9)).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| d.contains(p)));
    }

    #[test]
    fn f32_points_stay_inside() {
        let d = SimDomain::torus(3, 4.0f32).unwrap();
        let p: PointSet<f32> = sample_poisson(&d, 5.0, &mut seeded_rng(3)).unwrap();
        assert!(p.iter().all(|q| d.contains(q)));
    }

    #[test]
    fn count_in_ball_examples() {
        let (d, p) = line(&[0.5, 2.0, 9.0], 10.0);
        assert_eq!(count_in_ball(&d, &p, &[0.0], 1.2, None), 2);
        assert_eq!(count_in_ball(&d, &p, &[0.0], 0.0, None), 0);
        assert_eq!(count_in_ball(&d, &p, &[0.0], 5.0, None), 3);
        assert_eq!(count_in_ball(&d, &p, &[0.5], 1.2, Some(0)), 0);
        assert_eq!(count_in_ball(&d, &p, &[0.5], 1.5, Some(0)), 2);
    }

    #[test]
    fn kth_nearest_examples() {
        let (d, p) = line(&[0.5, 2.0, 9.0], 10.0);
        assert_eq!(kth_nearest_distance(&d, &p, &[0.0], 1, None).unwrap(), 0.5);
        assert_eq!(kth_nearest_distance(&d, &p, &[0.0], 2, None).unwrap(), 1.0);
        assert_eq!(kth_nearest_distance(&d, &p, &[0.0], 3, None).unwrap(), 2.0);
        assert_eq!(
            kth_nearest_distance(&d, &p, &[0.0], 4, None),
            Err(Error::InsufficientPoints { requested: 4, available: 3 })
        );
    }

    #[test]
    fn neighbors_sorted_examples() {
        let (d, p) = line(&[0.0, 1.0, 3.0, 7.0], 100.0);
        let order: Vec<usize> = neighbors_sorted(&d, &p, 2, &[true; 4]).map(|n| n.index).collect();
        assert_eq!(order, vec![1, 0, 3]);

        let mask = [false, true, true, false];
        let order: Vec<usize> = neighbors_sorted(&d, &p, 2, &mask).map(|n| n.index).collect();
        assert_eq!(order, vec![1]);

        let order: Vec<usize> = neighbors_sorted(&d, &p, 2, &[false; 4]).map(|n| n.index).collect();
        assert!(order.is_empty());
    }

    #[test]
    fn equal_distances_rank_by_index() {
        let (d, p) = line(&[5.0, 4.0, 6.0, 3.0], 100.0);
        let order: Vec<usize> = neighbors_sorted(&d, &p, 0, &[true; 4]).map(|n| n.index).collect();
        assert_eq!(order, vec![1, 2, 3]);
    }
}
