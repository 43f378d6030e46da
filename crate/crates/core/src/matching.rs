//! Stable matching of a point subset by iterated mutually-nearest pairing.
//!
//! All comparisons use squared distances with ties broken by point index, so
//! every point has a unique nearest neighbour and the matching is unique.

use crate::error::{Error, Result};
use crate::geometry::{GridIndex, PointSet, SimDomain};
use crate::scalar::Scalar;

/// A partial matching restricted to an eligibility mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    partner: Vec<Option<usize>>,
    mask: Vec<bool>,
}

impl Matching {
    /// Builds a matching from explicit pairs, checking symmetry and eligibility.
    pub fn from_pairs(mask: Vec<bool>, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut partner = vec![None; mask.len()];
        for &(a, b) in pairs {
            if a == b {
                return Err(Error::InvalidParameter(format!("point {a} matched to itself")));
            }
            if a >= mask.len() || b >= mask.len() || !mask[a] || !mask[b] {
                return Err(Error::InvalidParameter(format!("pair ({a}, {b}) is not eligible")));
            }
            if partner[a].is_some() || partner[b].is_some() {
                return Err(Error::InvalidParameter(format!("pair ({a}, {b}) overlaps another pair")));
            }
            partner[a] = Some(b);
            partner[b] = Some(a);
        }
        Ok(Self { partner, mask })
    }

    pub fn partner(&self, i: usize) -> Option<usize> {
        self.partner[i]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn len(&self) -> usize {
        self.partner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partner.is_empty()
    }

    /// Matched pairs `(i, j)` with `i < j`, sorted.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.partner
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.filter(|&j| i < j).map(|j| (i, j)))
            .collect()
    }

    /// Eligible points left without a partner.
    pub fn unmatched(&self) -> Vec<usize> {
        (0..self.partner.len())
            .filter(|&i| self.mask[i] && self.partner[i].is_none())
            .collect()
    }
}

/// Pairs whose members are each other's nearest eligible point.
pub fn mutual_nearest_pairs<T: Scalar>(
    domain: &SimDomain<T>,
    points: &PointSet<T>,
    mask: &[bool],
) -> Vec<(usize, usize)> {
    let grid = GridIndex::new(domain, points, Some(mask));
    let nearest: Vec<Option<usize>> = (0..points.len())
        .map(|i| {
            if mask[i] {
                grid.nearest(points.point(i), Some(i)).map(|n| n.index)
            } else {
                None
            }
        })
        .collect();
    (0..points.len())
        .filter_map(|i| {
            let j = nearest[i]?;
            (i < j && nearest[j] == Some(i)).then_some((i, j))
        })
        .collect()
}

/// The stable matching of the eligible points.
///
/// Implemented with a nearest-neighbour chain: follow nearest-eligible
/// pointers until two consecutive chain members point at each other, match
/// them, and resume from the remaining chain. This finds exactly the pairs
/// produced by repeatedly matching all mutually nearest pairs.
pub fn stable_match<T: Scalar>(
    domain: &SimDomain<T>,
    points: &PointSet<T>,
    mask: &[bool],
) -> Matching {
    assert_eq!(mask.len(), points.len(), "mask length mismatch");
    let n = points.len();
    let mut grid = GridIndex::new(domain, points, Some(mask));
    let mut partner = vec![None; n];
    let mut chain: Vec<usize> = Vec::new();
    let mut cursor = 0;

    loop {
        if chain.is_empty() {
            while cursor < n && !grid.contains(cursor) {
                cursor += 1;
            }
            if cursor == n {
                break;
            }
            chain.push(cursor);
        }
        let top = *chain.last().expect("chain is non-empty");
        let Some(next) = grid.nearest(points.point(top), Some(top)) else {
            // last eligible point standing
            grid.remove(top);
            chain.clear();
            continue;
        };
        let len = chain.len();
        if len >= 2 && chain[len - 2] == next.index {
            partner[top] = Some(next.index);
            partner[next.index] = Some(top);
            grid.remove(top);
            grid.remove(next.index);
            chain.truncate(len - 2);
            if grid.num_cells() > 64 && grid.len() * 8 < grid.num_cells() {
                let remaining: Vec<bool> = (0..n).map(|i| grid.contains(i)).collect();
                grid = GridIndex::new(domain, points, Some(&remaining));
            }
        } else {
            chain.push(next.index);
        }
    }
    Matching {
        partner,
        mask: mask.to_vec(),
    }
}

/// Stable matching of the points listed in `indices`, reported in the
/// original indexing: matched pairs `(i, j)` with `i < j`, then leftovers.
pub fn stable_match_indices<T: Scalar>(
    domain: &SimDomain<T>,
    points: &PointSet<T>,
    indices: &[usize],
) -> (Vec<(usize, usize)>, Vec<usize>) {
    let coords = indices
        .iter()
        .flat_map(|&i| points.point(i).iter().copied())
        .collect();
    let sub = PointSet::from_flat(points.dim(), coords).expect("dimension preserved");
    let m = stable_match(domain, &sub, &vec![true; indices.len()]);
    let pairs = m
        .pairs()
        .into_iter()
        .map(|(a, b)| {
            let (x, y) = (indices[a], indices[b]);
            (x.min(y), x.max(y))
        })
        .collect();
    let unmatched = m.unmatched().into_iter().map(|a| indices[a]).collect();
    (pairs, unmatched)
}

/// Brute-force stability check.
///
/// Returns a pair of eligible points, not matched to each other, that are
/// strictly closer to each other than each is to its current partner
/// (unmatched points count as infinitely far from theirs).
pub fn find_blocking_pair<T: Scalar>(
    domain: &SimDomain<T>,
    points: &PointSet<T>,
    matching: &Matching,
) -> Option<(usize, usize)> {
    let eligible: Vec<usize> = (0..points.len()).filter(|&i| matching.mask[i]).collect();
    let partner_dist: Vec<T> = (0..points.len())
        .map(|i| match matching.partner[i] {
            Some(j) => domain.distance(points.point(i), points.point(j)),
            None => T::infinity(),
        })
        .collect();
    for (a, &x) in eligible.iter().enumerate() {
        for &y in &eligible[a + 1..] {
            if matching.partner[x] == Some(y) {
                continue;
            }
            let d = domain.distance(points.point(x), points.point(y));
            if d < partner_dist[x] && d < partner_dist[y] {
                return Some((x, y));
            }
        }
    }
    None
}
