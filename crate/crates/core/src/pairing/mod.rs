//! Stub pairing schemes and pairing validation.

mod lattice;
mod rsmc;
mod sam;
mod truncated;

pub use lattice::{
    claiming_rounds, overlay_lattice, overlay_lattice_with_offset, ClaimOutcome, CubeClass,
    LatticeOverlay,
};
pub use rsmc::rsmc;
pub use sam::{sam, sam_on_sites, sam_with, FixedChoices, RandomChoices, SamChoices, SitePairing};
pub use truncated::{default_truncation, truncated_scheme, DEFAULT_TRUNCATION_TAIL};

use std::collections::HashSet;

use crate::degrees::MarkedPointSet;
use crate::geometry::{GridIndex, PointSet, SimDomain};
use crate::scalar::Scalar;

/// Which part of a scheme created an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    /// Per-level stable matching (RSMC).
    Stable,
    /// Shifted adjacent matching.
    Sam,
    /// High-to-low claiming on the lattice overlay.
    Claim,
}

impl Stage {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stage::Stable => "stable",
            Stage::Sam => "sam",
            Stage::Claim => "claim",
        }
    }
}

/// One paired stub couple. `level` is the stub level for stable/SAM edges
/// and the claiming round for claim edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub level: u32,
    pub stage: Stage,
}

impl Edge {
    pub fn new(i: usize, j: usize, level: u32, stage: Stage) -> Self {
        Self { i, j, level, stage }
    }

    /// The endpoints as an ordered pair `(min, max)`.
    pub fn key(&self) -> (usize, usize) {
        (self.i.min(self.j), self.i.max(self.j))
    }

    pub fn length<T: Scalar>(&self, domain: &SimDomain<T>, points: &PointSet<T>) -> T {
        domain.distance(points.point(self.i), points.point(self.j))
    }
}

/// A stub left without a partner. Level 0 marks high-cube stubs stranded by
/// the claiming stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UnpairedStub {
    pub point: usize,
    pub level: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Pairing {
    pub edges: Vec<Edge>,
    pub unpaired: Vec<UnpairedStub>,
    /// High-cube stubs left over when the box ran out of claimable cubes.
    pub stranded_high_stubs: usize,
}

impl Pairing {
    pub fn merge(&mut self, other: Pairing) {
        self.edges.extend(other.edges);
        self.unpaired.extend(other.unpaired);
        self.stranded_high_stubs += other.stranded_high_stubs;
    }

    /// Unordered edge keys, sorted; handy for comparing schemes.
    pub fn edge_keys(&self) -> Vec<(usize, usize)> {
        let mut keys: Vec<_> = self.edges.iter().map(Edge::key).collect();
        keys.sort_unstable();
        keys
    }

    pub fn edges_at_level(&self, level: u32) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(move |e| e.level == level && e.stage != Stage::Claim)
    }

    pub fn max_level(&self) -> u32 {
        self.edges
            .iter()
            .filter(|e| e.stage != Stage::Claim)
            .map(|e| e.level)
            .max()
            .unwrap_or(0)
    }
}

/// `masks[i - 1][x]` is true iff point `x` has degree at least `i`.
pub fn level_sets<T: Scalar>(marked: &MarkedPointSet<T>) -> Vec<Vec<bool>> {
    (1..=marked.max_degree())
        .map(|level| marked.degrees().iter().map(|&d| d >= level).collect())
        .collect()
}

/// Sum of incident edge lengths at every point.
pub fn incident_lengths<T: Scalar>(
    domain: &SimDomain<T>,
    points: &PointSet<T>,
    pairing: &Pairing,
) -> Vec<T> {
    let mut total = vec![T::zero(); points.len()];
    for e in &pairing.edges {
        let len = e.length(domain, points);
        total[e.i] = total[e.i] + len;
        if e.j != e.i {
            total[e.j] = total[e.j] + len;
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ValidationReport {
    pub self_loop_count: usize,
    pub duplicate_edge_count: usize,
    pub degree_mismatch_count: usize,
    /// Unpaired stubs over all stubs.
    pub unpaired_fraction: f64,
    pub pointwise_lower_bound_violations: usize,
}

impl ValidationReport {
    pub fn violations(&self) -> usize {
        self.self_loop_count
            + self.duplicate_edge_count
            + self.degree_mismatch_count
            + self.pointwise_lower_bound_violations
    }

    pub fn is_valid(&self) -> bool {
        self.violations() == 0
    }
}

/// Checks a pairing against its stub configuration.
///
/// Besides the structural checks, every point whose stubs are all paired must
/// have total edge length at least the summed distances to its `D` nearest
/// other points, since its partners are `D` distinct other points.
pub fn validate_pairing<T: Scalar>(
    domain: &SimDomain<T>,
    marked: &MarkedPointSet<T>,
    pairing: &Pairing,
) -> ValidationReport {
    let n = marked.len();
    let points = marked.points();
    let mut report = ValidationReport::default();

    let mut seen = HashSet::with_capacity(pairing.edges.len());
    let mut used = vec![0u64; n];
    for e in &pairing.edges {
        if e.i == e.j {
            report.self_loop_count += 1;
        } else if !seen.insert(e.key()) {
            report.duplicate_edge_count += 1;
        }
        used[e.i] += 1;
        used[e.j] += 1;
    }
    let mut unpaired = vec![0u64; n];
    for u in &pairing.unpaired {
        unpaired[u.point] += 1;
    }
    report.degree_mismatch_count = (0..n)
        .filter(|&x| used[x] + unpaired[x] != marked.degree(x) as u64)
        .count();
    let stubs = marked.total_stubs();
    report.unpaired_fraction = if stubs == 0 {
        0.0
    } else {
        pairing.unpaired.len() as f64 / stubs as f64
    };

    let totals = incident_lengths(domain, points, pairing);
    let grid = GridIndex::new(domain, points, None);
    for x in 0..n {
        let degree = marked.degree(x) as usize;
        // only points whose stubs are all paired, and paired exactly
        if degree == 0 || unpaired[x] > 0 || used[x] != degree as u64 {
            continue;
        }
        let bound = grid
            .neighbors(points.point(x), Some(x))
            .take(degree)
            .fold(T::zero(), |acc, nb| acc + nb.distance());
        let tol = T::epsilon() * T::lit((4 * degree + 16) as f64);
        if totals[x] < bound * (T::one() - tol) {
            report.pointwise_lower_bound_violations += 1;
        }
    }
    report
}
