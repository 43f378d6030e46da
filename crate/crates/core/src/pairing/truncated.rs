use rand::Rng;

use super::lattice::{claiming_rounds, overlay_lattice, CubeClass};
use super::sam::{sam_on_sites, RandomChoices};
use super::{rsmc, Edge, Pairing, Stage, UnpairedStub};
use crate::degrees::{DegreeDistribution, MarkedPointSet};
use crate::error::{Error, Result};
use crate::geometry::SimDomain;
use crate::scalar::Scalar;

/// Target for `P(aggregate cube degree > m)` when choosing `m` automatically.
pub const DEFAULT_TRUNCATION_TAIL: f64 = 1e-3;

const MAX_TRUNCATION: u64 = 1 << 20;

/// Smallest `m` with `P(D̃ > m) <= DEFAULT_TRUNCATION_TAIL`, where `D̃` is the
/// total degree of a Poisson(1) number of independent `F`-distributed points
/// (the stub count of a unit cube at unit intensity).
///
/// Uses the Panjer recursion `g_k = (1/k) Σ_{j=1}^{k} j f_j g_{k-j}`.
pub fn default_truncation(dist: &DegreeDistribution) -> u64 {
    let f = dist.pmf();
    let mut g = vec![(-(1.0 - f[0])).exp()];
    let mut cdf = g[0];
    let mut m = 0u64;
    while 1.0 - cdf > DEFAULT_TRUNCATION_TAIL && m < MAX_TRUNCATION {
        let k = g.len();
        let top = k.min(f.len() - 1);
        let gk = (1..=top).map(|j| j as f64 * f[j] * g[k - j]).sum::<f64>() / k as f64;
        g.push(gk);
        cdf += gk;
        m += 1;
    }
    m.max(1)
}

/// Truncated lattice scheme.
///
/// Stubs are pooled into the unit cubes of a shifted lattice. Cubes holding
/// more than `m` stubs are attached to nearby low cubes by claiming rounds.
/// The remaining low-cube stubs are then paired by SAM over the cube sites
/// when `d = 1`, or by RSMC over the residual point degrees when `d >= 2`.
/// High-cube stubs left when no low cube can be claimed are recorded as
/// unpaired at level 0.
pub fn truncated_scheme<T: Scalar, R: Rng + ?Sized>(
    domain: &SimDomain<T>,
    marked: &MarkedPointSet<T>,
    m: u64,
    rng: &mut R,
) -> Result<Pairing> {
    if m < 1 {
        return Err(Error::InvalidParameter("truncation m must be at least 1".into()));
    }
    let mut overlay = overlay_lattice(domain, marked, m, rng)?;
    let claimed = claiming_rounds(domain, &mut overlay);
    let mut pairing = Pairing { edges: claimed.edges, ..Pairing::default() };

    let num_cubes = overlay.num_cubes();
    let mut leftovers: Vec<Vec<usize>> = Vec::with_capacity(num_cubes);
    for cube in 0..num_cubes {
        let rest: Vec<usize> = std::iter::from_fn(|| overlay.take_stub(cube)).collect();
        if overlay.class(cube) == CubeClass::High {
            pairing.stranded_high_stubs += rest.len();
            pairing
                .unpaired
                .extend(rest.into_iter().map(|point| UnpairedStub { point, level: 0 }));
            leftovers.push(Vec::new());
        } else {
            leftovers.push(rest);
        }
    }

    if domain.dim() == 1 {
        let counts: Vec<u32> = leftovers.iter().map(|s| s.len() as u32).collect();
        let sites = sam_on_sites(&counts, true, &mut RandomChoices(rng));
        let stub = |cube: usize, level: u32| leftovers[cube][level as usize - 1];
        pairing.edges.extend(
            sites
                .edges
                .iter()
                .map(|&(a, b, level)| Edge::new(stub(a, level), stub(b, level), level, Stage::Sam)),
        );
        pairing.unpaired.extend(
            sites
                .unpaired
                .iter()
                .map(|&(s, level)| UnpairedStub { point: stub(s, level), level }),
        );
    } else {
        let mut residual = vec![0u32; marked.len()];
        for &x in leftovers.iter().flatten() {
            residual[x] += 1;
        }
        let rest = MarkedPointSet::new(marked.points().clone(), residual)?;
        pairing.merge(rsmc(domain, &rest, rng));
    }
    Ok(pairing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degrees::{mark_points, DegreeFamily};
    use crate::geometry::{sample_poisson, seeded_rng, PointSet};
    use crate::pairing::validate_pairing;

    #[test]
    fn default_truncation_for_constant_three() {
        let f = DegreeDistribution::deterministic(3);
        // D̃ = 3 N with N ~ Poisson(1); P(N > 5) ≈ 5.9e-4, P(N > 4) ≈ 3.7e-3
        assert_eq!(default_truncation(&f), 15);
    }

    #[test]
    fn default_truncation_matches_monte_carlo() {
        let f = DegreeDistribution::new(DegreeFamily::Geometric { q: 0.4 }).unwrap();
        let m = default_truncation(&f);
        let mut rng = seeded_rng(9);
        let poisson = rand_distr::Poisson::new(1.0).unwrap();
        let trials = 200_000;
        let mut above = [0usize; 2];
        for _ in 0..trials {
            let n: f64 = rand_distr::Distribution::sample(&poisson, &mut rng);
            let total: u64 = (0..n as usize).map(|_| f.sample(&mut rng) as u64).sum();
            above[0] += (total > m) as usize;
            above[1] += (total > m - 1) as usize;
        }
        assert!((above[0] as f64 / trials as f64) < 1.3e-3);
        assert!((above[1] as f64 / trials as f64) > 0.7e-3);
    }

    #[test]
    fn zero_degrees_give_empty_pairing() {
        for dim in 1..=3 {
            let d = SimDomain::torus(dim, 6.0).unwrap();
            let mut rng = seeded_rng(1);
            let p: PointSet<f64> = sample_poisson(&d, 1.0, &mut rng).unwrap();
            let n = p.len();
            let m = MarkedPointSet::new(p, vec![0; n]).unwrap();
            assert_eq!(truncated_scheme(&d, &m, 3, &mut rng).unwrap(), Pairing::default());
        }
    }

    #[test]
    fn without_high_cubes_it_is_rsmc() {
        let d = SimDomain::torus(2, 12.0).unwrap();
        let mut rng = seeded_rng(5);
        let p = sample_poisson(&d, 1.0, &mut rng).unwrap();
        let m = mark_points(p, &DegreeDistribution::deterministic(1), &mut rng);
        let mut a = seeded_rng(77);
        let mut b = a.clone();
        let out = truncated_scheme(&d, &m, 50, &mut a).unwrap();
        overlay_lattice(&d, &m, 50, &mut b).unwrap();
        assert_eq!(out, rsmc(&d, &m, &mut b));
    }

    #[test]
    fn valid_on_heavy_tails() {
        let f = DegreeDistribution::zipf(3.0, Some(10_000)).unwrap();
        let mtr = default_truncation(&f);
        for (dim, side) in [(1, 400.0), (2, 30.0), (3, 9.0)] {
            let d = SimDomain::torus(dim, side).unwrap();
            let mut rng = seeded_rng(dim as u64);
            let p = sample_poisson(&d, 1.0, &mut rng).unwrap();
            let m = mark_points(p, &f, &mut rng);
            let out = truncated_scheme(&d, &m, mtr, &mut rng).unwrap();
            let report = validate_pairing(&d, &m, &out);
            assert!(report.is_valid(), "dim {dim}: {report:?}");
        }
    }

    #[test]
    fn small_truncation_forces_claims() {
        let d = SimDomain::torus(2, 20.0).unwrap();
        let mut rng = seeded_rng(3);
        let p = sample_poisson(&d, 1.0, &mut rng).unwrap();
        let m = mark_points(p, &DegreeDistribution::deterministic(2), &mut rng);
        let out = truncated_scheme(&d, &m, 2, &mut rng).unwrap();
        assert!(out.edges.iter().any(|e| e.stage == Stage::Claim));
        assert!(validate_pairing(&d, &m, &out).is_valid());
    }

    #[test]
    fn rejects_bad_inputs() {
        let d = SimDomain::torus(1, 5.0).unwrap();
        let p = PointSet::from_line(&d, &[1.0]).unwrap();
        let m = MarkedPointSet::new(p, vec![1]).unwrap();
        assert!(truncated_scheme(&d, &m, 0, &mut seeded_rng(1)).is_err());
    }
}
