//! Unit-lattice overlay and the high-to-low claiming procedure.
//!
//! Points are grouped into the unit cubes of a randomly shifted integer
//! lattice; each cube carries the stubs of its points. Cubes holding more
//! than `m` stubs are *high* and get their stubs attached to nearby *low*
//! cubes, one stub per low cube, over successive claiming rounds.
//!
//! Cubes are labelled relative to the cube containing point 0 and every
//! per-cube random draw happens in that label order, so relabelling the
//! torus by a whole-cube shift leaves the procedure unchanged.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Edge, Stage};
use crate::degrees::MarkedPointSet;
use crate::error::{Error, Result};
use crate::geometry::{GridIndex, PointSet, SimDomain};
use crate::scalar::Scalar;

/// Largest jitter applied to a lattice site, along one axis.
pub const MAX_JITTER: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CubeClass {
    High,
    Low,
}

#[derive(Debug, Clone)]
pub struct LatticeOverlay<T> {
    dim: usize,
    per_axis: usize,
    threshold: u64,
    offset: Vec<T>,
    anchor: [usize; 3],
    cube_of_point: Vec<usize>,
    positions: PointSet<T>,
    agg_degree: Vec<u64>,
    class: Vec<CubeClass>,
    stub_order: Vec<Vec<usize>>,
    used: Vec<usize>,
    connected: Vec<bool>,
}

impl<T: Scalar> LatticeOverlay<T> {
    pub fn num_cubes(&self) -> usize {
        self.agg_degree.len()
    }

    /// Lattice offset `x0`, in `[0, 1)^d`.
    pub fn offset(&self) -> &[T] {
        &self.offset
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn cube_of_point(&self, point: usize) -> usize {
        self.cube_of_point[point]
    }

    /// Absolute lattice coordinates of a cube: its centre is `offset + coords`.
    pub fn cube_coords(&self, cube: usize) -> Vec<usize> {
        let n = self.per_axis;
        (0..self.dim)
            .map(|a| {
                let rel = (cube / n.pow(a as u32)) % n;
                (rel + self.anchor[a]) % n
            })
            .collect()
    }

    /// Cube label for absolute lattice coordinates.
    pub fn cube_at(&self, coords: &[usize]) -> usize {
        let n = self.per_axis;
        coords
            .iter()
            .enumerate()
            .map(|(a, &c)| ((c + n - self.anchor[a] % n) % n) * n.pow(a as u32))
            .sum()
    }

    /// Jittered site positions, one per cube.
    pub fn positions(&self) -> &PointSet<T> {
        &self.positions
    }

    pub fn agg_degree(&self, cube: usize) -> u64 {
        self.agg_degree[cube]
    }

    pub fn class(&self, cube: usize) -> CubeClass {
        self.class[cube]
    }

    /// Stub labels (originating point indices) of a cube in numbering order.
    pub fn stub_order(&self, cube: usize) -> &[usize] {
        &self.stub_order[cube]
    }

    pub fn remaining(&self, cube: usize) -> usize {
        self.stub_order[cube].len() - self.used[cube]
    }

    /// Whether a low cube has already been joined to a high cube.
    pub fn is_connected(&self, cube: usize) -> bool {
        self.connected[cube]
    }

    fn claimable(&self, cube: usize) -> bool {
        self.class[cube] == CubeClass::Low && !self.connected[cube] && self.remaining(cube) > 0
    }

    /// Consumes the lowest-numbered unused stub and returns its point.
    pub fn take_stub(&mut self, cube: usize) -> Option<usize> {
        let stub = *self.stub_order[cube].get(self.used[cube])?;
        self.used[cube] += 1;
        Some(stub)
    }
}

fn check_lattice_domain<T: Scalar>(domain: &SimDomain<T>) -> Result<usize> {
    if !domain.is_torus() {
        return Err(Error::InvalidParameter(
            "the lattice overlay needs a torus domain".into(),
        ));
    }
    let side = domain.side().as_f64();
    let rounded = side.round();
    if (side - rounded).abs() > 1e-9 * side.max(1.0) || rounded < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "the lattice overlay needs an integer box side, got {side}"
        )));
    }
    Ok(rounded as usize)
}

/// Builds the overlay with a uniformly drawn lattice offset.
pub fn overlay_lattice<T: Scalar, R: Rng + ?Sized>(
    domain: &SimDomain<T>,
    marked: &MarkedPointSet<T>,
    m: u64,
    rng: &mut R,
) -> Result<LatticeOverlay<T>> {
    check_lattice_domain(domain)?;
    let offset: Vec<T> = (0..domain.dim()).map(|_| T::lit(rng.random::<f64>())).collect();
    overlay_lattice_with_offset(domain, marked, m, &offset, rng)
}

/// Builds the overlay for a given lattice offset `x0`.
///
/// Each point belongs to the unit cube centred at the nearest lattice site
/// `x0 + z`. Sites are jittered by a `U(0, 0.1)` distance along a random
/// axis direction, and each cube numbers its stubs by shuffling its points
/// and then taking one stub from each in turn until all are used.
pub fn overlay_lattice_with_offset<T: Scalar, R: Rng + ?Sized>(
    domain: &SimDomain<T>,
    marked: &MarkedPointSet<T>,
    m: u64,
    offset: &[T],
    rng: &mut R,
) -> Result<LatticeOverlay<T>> {
    let n = check_lattice_domain(domain)?;
    let dim = domain.dim();
    if offset.len() != dim || offset.iter().any(|&x| !(x >= T::zero() && x < T::one())) {
        return Err(Error::InvalidParameter(format!(
            "lattice offset must lie in [0, 1)^{dim}, got {offset:?}"
        )));
    }
    let num_cubes = n.pow(dim as u32);
    let points = marked.points();
    let half = T::lit(0.5);

    let abs_coords = |p: &[T]| -> [usize; 3] {
        let mut c = [0usize; 3];
        for a in 0..dim {
            let k = (p[a] - offset[a] + half).floor().to_i64().unwrap_or(0);
            c[a] = k.rem_euclid(n as i64) as usize;
        }
        c
    };
    let anchor = if points.is_empty() { [0; 3] } else { abs_coords(points.point(0)) };
    let label = |c: &[usize; 3]| -> usize {
        (0..dim)
            .map(|a| ((c[a] + n - anchor[a]) % n) * n.pow(a as u32))
            .sum()
    };

    let cube_of_point: Vec<usize> = points.iter().map(|p| label(&abs_coords(p))).collect();
    let mut members = vec![Vec::new(); num_cubes];
    let mut agg_degree = vec![0u64; num_cubes];
    for (x, &cube) in cube_of_point.iter().enumerate() {
        members[cube].push(x);
        agg_degree[cube] += marked.degree(x) as u64;
    }
    let class = agg_degree
        .iter()
        .map(|&d| if d > m { CubeClass::High } else { CubeClass::Low })
        .collect();

    let mut coords = Vec::with_capacity(num_cubes * dim);
    for cube in 0..num_cubes {
        let axis = rng.random_range(0..dim);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let shift = T::lit(sign * MAX_JITTER * rng.random::<f64>());
        for a in 0..dim {
            let rel = (cube / n.pow(a as u32)) % n;
            let site = offset[a] + T::lit(((rel + anchor[a]) % n) as f64);
            let x = if a == axis { site + shift } else { site };
            coords.push(domain.wrap(x));
        }
    }
    let positions = PointSet::from_flat(dim, coords)?;

    let mut stub_order = Vec::with_capacity(num_cubes);
    for cube_members in &mut members {
        cube_members.shuffle(rng);
        let mut left: Vec<u32> = cube_members.iter().map(|&x| marked.degree(x)).collect();
        let mut order = Vec::new();
        loop {
            let before = order.len();
            for (k, &x) in cube_members.iter().enumerate() {
                if left[k] > 0 {
                    left[k] -= 1;
                    order.push(x);
                }
            }
            if order.len() == before {
                break;
            }
        }
        stub_order.push(order);
    }

    Ok(LatticeOverlay {
        dim,
        per_axis: n,
        threshold: m,
        offset: offset.to_vec(),
        anchor,
        cube_of_point,
        positions,
        agg_degree,
        class,
        used: vec![0; num_cubes],
        connected: vec![false; num_cubes],
        stub_order,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClaimOutcome {
    /// Edges between the points originating the matched stubs, tagged with the round.
    pub edges: Vec<Edge>,
    pub rounds: u32,
}

/// Runs claiming rounds until no high cube has stubs left or no low cube can
/// be claimed.
///
/// In each round every high cube with `r > 0` remaining stubs claims its `r`
/// nearest claimable low cubes (low, unconnected, holding a stub). A claimed
/// cube joins the nearest high cube that claimed it, spending one stub on
/// each side. Distances are between jittered sites; ties go to the lower
/// cube label.
pub fn claiming_rounds<T: Scalar>(
    domain: &SimDomain<T>,
    overlay: &mut LatticeOverlay<T>,
) -> ClaimOutcome {
    let num_cubes = overlay.num_cubes();
    let lattice = SimDomain::torus(overlay.dim, T::lit(overlay.per_axis as f64))
        .expect("overlay built on a valid torus");
    debug_assert_eq!(lattice.side(), domain.side());
    let positions = overlay.positions.clone();
    let claimable: Vec<bool> = (0..num_cubes).map(|c| overlay.claimable(c)).collect();
    let mut lows = GridIndex::new(&lattice, &positions, Some(&claimable));

    let mut outcome = ClaimOutcome::default();
    let mut claimant: Vec<Option<(T, usize)>> = vec![None; num_cubes];
    let mut claimed: Vec<usize> = Vec::new();
    loop {
        let highs: Vec<usize> = (0..num_cubes)
            .filter(|&c| overlay.class[c] == CubeClass::High && overlay.remaining(c) > 0)
            .collect();
        if highs.is_empty() || lows.is_empty() {
            break;
        }
        outcome.rounds += 1;
        for &h in &highs {
            let want = overlay.remaining(h);
            for nb in lows.neighbors(positions.point(h), None).take(want) {
                let slot = &mut claimant[nb.index];
                match slot {
                    None => {
                        claimed.push(nb.index);
                        *slot = Some((nb.sq_distance, h));
                    }
                    Some((d2, owner)) => {
                        if (nb.sq_distance, h) < (*d2, *owner) {
                            *slot = Some((nb.sq_distance, h));
                        }
                    }
                }
            }
        }
        claimed.sort_unstable();
        for &low in &claimed {
            let (_, high) = claimant[low].take().expect("claimed cube has a claimant");
            let from = overlay.take_stub(high).expect("claims never exceed remaining stubs");
            let to = overlay.take_stub(low).expect("claimable cubes hold a stub");
            overlay.connected[low] = true;
            lows.remove(low);
            outcome
                .edges
                .push(Edge::new(from, to, outcome.rounds, Stage::Claim));
        }
        claimed.clear();
    }
    outcome
}
