use std::collections::HashSet;

use rand::Rng;

use super::{Edge, Pairing, Stage, UnpairedStub};
use crate::degrees::MarkedPointSet;
use crate::error::{Error, Result};
use crate::geometry::SimDomain;
use crate::scalar::Scalar;

/// Random decisions consumed by shifted adjacent matching.
pub trait SamChoices {
    /// Which of the two alternating adjacent matchings to use at `level`:
    /// 0 pairs ranks `(0, 1), (2, 3), ...`, 1 pairs `(1, 2), (3, 4), ...`.
    fn parity(&mut self, level: u32) -> usize;
    /// Rank of the site that sits out when a cyclic level has odd size.
    fn sit_out(&mut self, level: u32, population: usize) -> usize;
}

pub struct RandomChoices<'r, R: ?Sized>(pub &'r mut R);

impl<R: Rng + ?Sized> SamChoices for RandomChoices<'_, R> {
    fn parity(&mut self, _level: u32) -> usize {
        self.0.random_bool(0.5) as usize
    }

    fn sit_out(&mut self, _level: u32, population: usize) -> usize {
        self.0.random_range(0..population)
    }
}

/// Predetermined choices, for reproducing hand traces.
#[derive(Debug, Clone)]
pub struct FixedChoices {
    /// Parity per level, starting at level 1; missing entries mean 0.
    pub parities: Vec<usize>,
    pub sit_out: usize,
}

impl SamChoices for FixedChoices {
    fn parity(&mut self, level: u32) -> usize {
        self.parities.get(level as usize - 1).copied().unwrap_or(0) & 1
    }

    fn sit_out(&mut self, _level: u32, population: usize) -> usize {
        self.sit_out % population
    }
}

/// Output of SAM on abstract sites: `(site, site, level)` edges and
/// `(site, level)` leftovers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SitePairing {
    pub edges: Vec<(usize, usize, u32)>,
    pub unpaired: Vec<(usize, u32)>,
}

/// Shifted adjacent matching on sites listed in left-to-right order.
///
/// On level `i`, the sites with at least `i` stubs are split into adjacent
/// pairs; the left member of each pair is right-oriented and sends its level
/// `i` stub to the `i`-th left-oriented site to its right. With `cyclic` the
/// order wraps around and odd levels first drop one site. On a line the
/// stubs that find no target stay unpaired. A pair already joined on a lower
/// level (possible only when a level wraps onto itself) is left unpaired.
pub fn sam_on_sites(degrees: &[u32], cyclic: bool, choices: &mut dyn SamChoices) -> SitePairing {
    let mut out = SitePairing::default();
    let mut joined: HashSet<(usize, usize)> = HashSet::new();
    let max = degrees.iter().copied().max().unwrap_or(0);

    for level in 1..=max {
        let mut sites: Vec<usize> = (0..degrees.len()).filter(|&s| degrees[s] >= level).collect();
        if sites.is_empty() {
            continue;
        }
        let shift = 2 * level as usize - 1;
        let mut link = |a: usize, b: usize, out: &mut SitePairing| {
            if joined.insert((a.min(b), a.max(b))) {
                out.edges.push((a, b, level));
            } else {
                out.unpaired.push((a, level));
                out.unpaired.push((b, level));
            }
        };

        if cyclic {
            if sites.len() % 2 == 1 {
                let k = choices.sit_out(level, sites.len());
                out.unpaired.push((sites.remove(k), level));
            }
            let n = sites.len();
            if n == 0 {
                continue;
            }
            let parity = choices.parity(level);
            for right in (parity..n + parity).step_by(2) {
                let a = sites[right % n];
                let b = sites[(right + shift) % n];
                link(a, b, &mut out);
            }
        } else {
            let n = sites.len();
            let parity = choices.parity(level).min(n);
            let pairs = (n - parity) / 2;
            let matched_end = parity + 2 * pairs;
            let mut targeted = vec![false; n];
            for rank in (0..parity).chain(matched_end..n) {
                out.unpaired.push((sites[rank], level));
            }
            for right in (parity..matched_end).step_by(2) {
                let target = right + shift;
                if target < matched_end {
                    targeted[target] = true;
                    link(sites[right], sites[target], &mut out);
                } else {
                    out.unpaired.push((sites[right], level));
                }
            }
            for left in (parity + 1..matched_end).step_by(2) {
                if !targeted[left] {
                    out.unpaired.push((sites[left], level));
                }
            }
        }
    }
    out
}

/// Shifted adjacent matching of the points of a one-dimensional domain.
pub fn sam<T: Scalar, R: Rng + ?Sized>(
    domain: &SimDomain<T>,
    marked: &MarkedPointSet<T>,
    rng: &mut R,
) -> Result<Pairing> {
    sam_with(domain, marked, &mut RandomChoices(rng))
}

/// [`sam`] with explicit choices.
///
/// On the torus the cyclic order is read starting from point 0, so the result
/// does not depend on where the coordinate origin sits.
pub fn sam_with<T: Scalar>(
    domain: &SimDomain<T>,
    marked: &MarkedPointSet<T>,
    choices: &mut dyn SamChoices,
) -> Result<Pairing> {
    if domain.dim() != 1 {
        return Err(Error::InvalidDimension {
            dim: domain.dim(),
            reason: "shifted adjacent matching needs a one-dimensional domain",
        });
    }
    let points = marked.points();
    let mut order: Vec<usize> = (0..marked.len()).collect();
    order.sort_by(|&a, &b| {
        points.point(a)[0]
            .partial_cmp(&points.point(b)[0])
            .expect("finite coordinates")
            .then(a.cmp(&b))
    });
    if domain.is_torus() {
        if let Some(start) = order.iter().position(|&x| x == 0) {
            order.rotate_left(start);
        }
    }
    let degrees: Vec<u32> = order.iter().map(|&x| marked.degree(x)).collect();
    let sites = sam_on_sites(&degrees, domain.is_torus(), choices);
    Ok(Pairing {
        edges: sites
            .edges
            .into_iter()
            .map(|(a, b, level)| Edge::new(order[a], order[b], level, Stage::Sam))
            .collect(),
        unpaired: sites
            .unpaired
            .into_iter()
            .map(|(s, level)| UnpairedStub { point: order[s], level })
            .collect(),
        stranded_high_stubs: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{seeded_rng, PointSet};
    use crate::pairing::{incident_lengths, validate_pairing};

    fn marked(xs: &[f64], side: f64, degrees: &[u32]) -> (SimDomain<f64>, MarkedPointSet<f64>) {
        let d = SimDomain::torus(1, side).unwrap();
        let p = PointSet::from_line(&d, xs).unwrap();
        (d, MarkedPointSet::new(p, degrees.to_vec()).unwrap())
    }

    #[test]
    fn six_point_hand_trace() {
        let (d, m) = marked(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0], 6.0, &[2; 6]);
        let mut fixed = FixedChoices { parities: vec![0, 0], sit_out: 0 };
        let out = sam_with(&d, &m, &mut fixed).unwrap();
        let level = |l: u32| {
            let mut v: Vec<_> = out.edges_at_level(l).map(|e| e.key()).collect();
            v.sort();
            v
        };
        assert_eq!(level(1), vec![(0, 1), (2, 3), (4, 5)]);
        assert_eq!(level(2), vec![(0, 3), (1, 4), (2, 5)]);
        let t = incident_lengths(&d, m.points(), &out);
        assert_eq!(t[0], 4.0);
        assert!(validate_pairing(&d, &m, &out).is_valid());
    }

    #[test]
    fn degree_one_equals_adjacent_matching() {
        let (d, m) = marked(&[0.5, 2.5, 4.0, 7.0], 10.0, &[1; 4]);
        let out = sam_with(&d, &m, &mut FixedChoices { parities: vec![1], sit_out: 0 }).unwrap();
        assert_eq!(out.edge_keys(), vec![(0, 3), (1, 2)]);
        let out = sam_with(&d, &m, &mut FixedChoices { parities: vec![0], sit_out: 0 }).unwrap();
        assert_eq!(out.edge_keys(), vec![(0, 1), (2, 3)]);
    }

    #[test]
    fn odd_population_leaves_one_stub() {
        let (d, m) = marked(&[1.0, 4.0, 6.0], 10.0, &[1; 3]);
        let out = sam(&d, &m, &mut seeded_rng(2)).unwrap();
        assert_eq!(out.edges.len(), 1);
        assert_eq!(out.unpaired.len(), 1);
        assert!(validate_pairing(&d, &m, &out).is_valid());
    }

    #[test]
    fn rejects_higher_dimensions() {
        let d = SimDomain::torus(2, 10.0).unwrap();
        let m = MarkedPointSet::new(PointSet::empty(2), vec![]).unwrap();
        assert!(matches!(
            sam(&d, &m, &mut seeded_rng(1)),
            Err(Error::InvalidDimension { dim: 2, .. })
        ));
    }

    #[test]
    fn small_cycles_never_repeat_pairs() {
        // four sites, three levels: level 3 wraps onto lower-level partners
        for parities in [[0, 0, 0], [1, 0, 1], [0, 1, 1], [1, 1, 0]] {
            let mut choices = FixedChoices { parities: parities.to_vec(), sit_out: 0 };
            let out = sam_on_sites(&[3, 3, 3, 3], true, &mut choices);
            let mut keys: Vec<_> = out.edges.iter().map(|&(a, b, _)| (a.min(b), a.max(b))).collect();
            let n = keys.len();
            keys.sort();
            keys.dedup();
            assert_eq!(keys.len(), n);
            assert_eq!(out.edges.len() * 2 + out.unpaired.len(), 12);
        }
    }

    #[test]
    fn linear_mode_conserves_stubs() {
        let degrees = [2, 1, 3, 2, 2, 1, 3];
        for p in 0..2 {
            let out = sam_on_sites(&degrees, false, &mut FixedChoices { parities: vec![p; 3], sit_out: 0 });
            let total: u32 = degrees.iter().sum();
            assert_eq!(out.edges.len() * 2 + out.unpaired.len(), total as usize);
            for &(a, b, _) in &out.edges {
                assert!(a < b);
            }
        }
    }
}
