//! Palm averages of total edge length, its distribution function, per-level
//! edge statistics, tail fits and component sizes.

use std::collections::BTreeMap;

use crate::degrees::MarkedPointSet;
use crate::error::{Error, Result};
use crate::geometry::{PointSet, SimDomain};
use crate::pairing::{incident_lengths, Pairing, Stage};
use crate::scalar::Scalar;
use crate::theory::expected_rn;

/// Which points stand in for the typical point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Window {
    /// Every point. On the torus all points are exchangeable.
    #[default]
    All,
    /// Points at least this far from the box boundary; ignored on the torus.
    Margin(f64),
}

impl Window {
    pub fn includes<T: Scalar>(&self, domain: &SimDomain<T>, p: &[T]) -> bool {
        match *self {
            Window::All => true,
            Window::Margin(_) if domain.is_torus() => true,
            Window::Margin(m) => domain.distance_to_boundary(p).as_f64() >= m,
        }
    }
}

/// `3 E[R_D]` for the largest observed degree `D`, or 0 without stubs.
pub fn default_window_margin<T: Scalar>(marked: &MarkedPointSet<T>, intensity: f64, dim: usize) -> Result<f64> {
    match marked.max_degree() {
        0 => Ok(0.0),
        u => Ok(3.0 * expected_rn(u as u64, intensity, dim)?),
    }
}

/// Per-point total incident edge length `T` over one realisation.
#[derive(Debug, Clone, PartialEq)]
pub struct PalmStats<T> {
    pub samples: Vec<T>,
    pub mean: f64,
    pub count: usize,
    pub window: Window,
}

pub fn palm_mean_t<T: Scalar>(
    domain: &SimDomain<T>,
    marked: &MarkedPointSet<T>,
    pairing: &Pairing,
    window: Window,
) -> PalmStats<T> {
    let points = marked.points();
    let totals = incident_lengths(domain, points, pairing);
    let samples: Vec<T> = totals
        .into_iter()
        .zip(points.iter())
        .filter(|(_, p)| window.includes(domain, p))
        .map(|(t, _)| t)
        .collect();
    let count = samples.len();
    let mean = if count == 0 {
        0.0
    } else {
        samples.iter().map(|t| t.as_f64()).sum::<f64>() / count as f64
    };
    PalmStats { samples, mean, count, window }
}

/// Pooled estimate over independent replicates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicateSummary {
    /// Mean over all pooled samples.
    pub mean: f64,
    /// Standard deviation of replicate means over `sqrt(replicates)`; NaN
    /// with fewer than two non-empty replicates.
    pub stderr: f64,
    pub count: usize,
    pub replicates: usize,
}

pub fn aggregate_replicates<T>(runs: &[PalmStats<T>]) -> ReplicateSummary {
    let count: usize = runs.iter().map(|r| r.count).sum();
    let mean = if count == 0 {
        0.0
    } else {
        runs.iter().map(|r| r.mean * r.count as f64).sum::<f64>() / count as f64
    };
    let means: Vec<f64> = runs.iter().filter(|r| r.count > 0).map(|r| r.mean).collect();
    let stderr = if means.len() < 2 {
        f64::NAN
    } else {
        let k = means.len() as f64;
        let m = means.iter().sum::<f64>() / k;
        let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (k - 1.0);
        (var / k).sqrt()
    };
    ReplicateSummary { mean, stderr, count, replicates: runs.len() }
}

/// Empirical distribution function of `T` on a grid of radii.
#[derive(Debug, Clone, PartialEq)]
pub struct HCurve {
    pub r: Vec<f64>,
    pub h: Vec<f64>,
}

impl HCurve {
    /// `H(r) = #{T <= r} / n` at each grid value; `samples` need not be sorted.
    pub fn from_samples(samples: &[f64], r_grid: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyCurve);
        }
        if r_grid.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::PreconditionViolation("r grid must be sorted ascending".into()));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let h = r_grid
            .iter()
            .map(|&r| sorted.partition_point(|&t| t <= r) as f64 / n)
            .collect();
        Ok(Self { r: r_grid.to_vec(), h })
    }
}

pub fn empirical_h<T: Scalar>(
    domain: &SimDomain<T>,
    marked: &MarkedPointSet<T>,
    pairing: &Pairing,
    window: Window,
    r_grid: &[f64],
) -> Result<HCurve> {
    let stats = palm_mean_t(domain, marked, pairing, window);
    let samples: Vec<f64> = stats.samples.iter().map(|t| t.as_f64()).collect();
    HCurve::from_samples(&samples, r_grid)
}

/// Empirical quantile by rank rounding; `q` in `[0, 1]`, `sorted` non-empty.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

/// 200 log-spaced radii between the 1st and 99.9th percentiles of the
/// positive samples. Falls back to `[0]` when nothing is positive.
pub fn default_r_grid(samples: &[f64]) -> Vec<f64> {
    const POINTS: usize = 200;
    let mut pos: Vec<f64> = samples.iter().copied().filter(|&t| t > 0.0).collect();
    if pos.is_empty() {
        return vec![0.0];
    }
    pos.sort_by(f64::total_cmp);
    let lo = quantile(&pos, 0.01);
    let hi = quantile(&pos, 0.999);
    if hi <= lo {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..POINTS)
        .map(|k| (a + (b - a) * k as f64 / (POINTS - 1) as f64).exp())
        .collect()
}

/// Lengths of non-claim edges tagged with one level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelStats {
    pub level: u32,
    pub count: usize,
    /// NaN when the level has no edges.
    pub mean_length: f64,
    pub lengths: Vec<f64>,
}

pub fn level_edge_stats<T: Scalar>(
    domain: &SimDomain<T>,
    points: &PointSet<T>,
    pairing: &Pairing,
    level: u32,
) -> LevelStats {
    let lengths: Vec<f64> = pairing
        .edges_at_level(level)
        .map(|e| e.length(domain, points).as_f64())
        .collect();
    let count = lengths.len();
    let mean_length = if count == 0 {
        f64::NAN
    } else {
        lengths.iter().sum::<f64>() / count as f64
    };
    LevelStats { level, count, mean_length, lengths }
}

/// Least-squares fit of `log P(X > r)` against `log r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    pub slope: f64,
    pub intercept: f64,
    /// Fewer than two distinct survival levels on the range; slope is NaN.
    pub degenerate: bool,
    pub samples_above: usize,
}

/// Minimum number of samples beyond the lower end of the fitting range.
pub const MIN_TAIL_SAMPLES: usize = 1000;
const TAIL_FIT_POINTS: usize = 40;

/// Fits the survival exponent of positive samples over `[lo, hi]` at 40
/// log-spaced radii.
pub fn tail_exponent(samples: &[f64], range: (f64, f64)) -> Result<TailFit> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidParameter(format!("bad fitting range [{lo}, {hi}]")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let above = n - sorted.partition_point(|&x| x <= lo);
    let degenerate_fit = TailFit { slope: f64::NAN, intercept: f64::NAN, degenerate: true, samples_above: above };
    if n > 0 && sorted[0] == sorted[n - 1] {
        return Ok(degenerate_fit);
    }
    if above < MIN_TAIL_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "{above} samples above {lo}, need {MIN_TAIL_SAMPLES}"
        )));
    }

    let (a, b) = (lo.ln(), hi.ln());
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in 0..TAIL_FIT_POINTS {
        let r = (a + (b - a) * k as f64 / (TAIL_FIT_POINTS - 1) as f64).exp();
        let surv = (n - sorted.partition_point(|&x| x <= r)) as f64 / n as f64;
        if surv > 0.0 {
            xs.push(r.ln());
            ys.push(surv.ln());
        }
    }
    let distinct = ys.windows(2).filter(|w| w[0] != w[1]).count();
    if xs.len() < 2 || distinct == 0 {
        return Ok(degenerate_fit);
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(TailFit { slope, intercept: my - slope * mx, degenerate: false, samples_above: above })
}

/// Connected component sizes of the pairing graph, largest first.
pub fn component_sizes<T: Scalar>(marked: &MarkedPointSet<T>, pairing: &Pairing) -> Vec<usize> {
    let n = marked.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for e in &pairing.edges {
        let (a, b) = (find(&mut parent, e.i), find(&mut parent, e.j));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut size = vec![0usize; n];
    for x in 0..n {
        let root = find(&mut parent, x);
        size[root] += 1;
    }
    let mut sizes: Vec<usize> = size.into_iter().filter(|&s| s > 0).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

/// `size -> number of components` histogram.
pub fn size_histogram(sizes: &[usize]) -> BTreeMap<usize, usize> {
    let mut hist = BTreeMap::new();
    for &s in sizes {
        *hist.entry(s).or_insert(0) += 1;
    }
    hist
}

/// Sum of per-point totals against twice the summed edge lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conservation {
    pub total_t: f64,
    pub twice_edge_length: f64,
}

impl Conservation {
    pub fn holds(&self, rel_tol: f64) -> bool {
        (self.total_t - self.twice_edge_length).abs() <= rel_tol * self.twice_edge_length.max(1.0)
    }
}

pub fn conservation_check<T: Scalar>(
    domain: &SimDomain<T>,
    points: &PointSet<T>,
    pairing: &Pairing,
) -> Conservation {
    let total_t = incident_lengths(domain, points, pairing).iter().map(|t| t.as_f64()).sum();
    let twice_edge_length = 2.0
        * pairing
            .edges
            .iter()
            .map(|e| e.length(domain, points).as_f64())
            .sum::<f64>();
    Conservation { total_t, twice_edge_length }
}

/// Whether every non-claim edge of level `i` joins two points of degree `>= i`.
pub fn levels_nested<T: Scalar>(marked: &MarkedPointSet<T>, pairing: &Pairing) -> bool {
    pairing
        .edges
        .iter()
        .filter(|e| e.stage != Stage::Claim)
        .all(|e| marked.degree(e.i) >= e.level && marked.degree(e.j) >= e.level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::seeded_rng;
    use crate::pairing::Edge;
    use rand::Rng;

    fn two_points(len: f64) -> (SimDomain<f64>, MarkedPointSet<f64>, Pairing) {
        let d = SimDomain::torus(1, 50.0).unwrap();
        let p = PointSet::from_line(&d, &[1.0, 1.0 + len]).unwrap();
        let m = MarkedPointSet::new(p, vec![1, 1]).unwrap();
        let pairing = Pairing { edges: vec![Edge::new(0, 1, 1, Stage::Stable)], ..Default::default() };
        (d, m, pairing)
    }

    #[test]
    fn palm_means() {
        let (d, m, pairing) = two_points(2.5);
        let s = palm_mean_t(&d, &m, &pairing, Window::All);
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.count, 2);
        let empty = palm_mean_t(&d, &m, &Pairing::default(), Window::All);
        assert_eq!(empty.mean, 0.0);
    }

    #[test]
    fn window_margin_applies_off_torus() {
        let d = SimDomain::window(1, 10.0).unwrap();
        let p = PointSet::from_line(&d, &[0.5, 5.0, 9.8]).unwrap();
        let m = MarkedPointSet::new(p, vec![0; 3]).unwrap();
        let s = palm_mean_t(&d, &m, &Pairing::default(), Window::Margin(1.0));
        assert_eq!(s.count, 1);
        let t = SimDomain::torus(1, 10.0).unwrap();
        assert_eq!(palm_mean_t(&t, &m, &Pairing::default(), Window::Margin(1.0)).count, 3);
    }

    #[test]
    fn replicate_pooling() {
        let mk = |mean: f64, count: usize| PalmStats::<f64> { samples: vec![], mean, count, window: Window::All };
        let agg = aggregate_replicates(&[mk(1.0, 10), mk(3.0, 30)]);
        assert_eq!(agg.mean, 2.5);
        assert!((agg.stderr - 1.0).abs() < 1e-12);
        assert!(aggregate_replicates(&[mk(1.0, 10)]).stderr.is_nan());
    }

    #[test]
    fn h_curve_axioms() {
        let samples = [2.0; 5];
        let c = HCurve::from_samples(&samples, &[0.0, 1.9, 2.0, 3.0]).unwrap();
        assert_eq!(c.h, vec![0.0, 0.0, 1.0, 1.0]);
        assert_eq!(HCurve::from_samples(&[], &[1.0]), Err(Error::EmptyCurve));
        assert!(HCurve::from_samples(&[1.0], &[2.0, 1.0]).is_err());

        let mut rng = seeded_rng(2);
        let xs: Vec<f64> = (0..1000).map(|_| rng.random::<f64>() * 5.0).collect();
        let grid = default_r_grid(&xs);
        assert_eq!(grid.len(), 200);
        let c = HCurve::from_samples(&xs, &grid).unwrap();
        assert!(c.h.windows(2).all(|w| w[0] <= w[1]));
        let top = xs.iter().copied().fold(0.0, f64::max);
        assert_eq!(HCurve::from_samples(&xs, &[top]).unwrap().h, vec![1.0]);
    }

    #[test]
    fn empty_window_is_flagged() {
        let d = SimDomain::window(1, 2.0).unwrap();
        let p = PointSet::from_line(&d, &[0.5]).unwrap();
        let m = MarkedPointSet::new(p, vec![0]).unwrap();
        let r = empirical_h(&d, &m, &Pairing::default(), Window::Margin(1.0), &[1.0]);
        assert_eq!(r, Err(Error::EmptyCurve));
    }

    #[test]
    fn level_stats() {
        let (d, m, pairing) = two_points(1.5);
        let s = level_edge_stats(&d, m.points(), &pairing, 1);
        assert_eq!((s.count, s.mean_length), (1, 1.5));
        let s = level_edge_stats(&d, m.points(), &pairing, 2);
        assert_eq!(s.count, 0);
    }

    #[test]
    fn pareto_tail_slope() {
        // survival r^-2 for r >= 1 via inverse transform
        let mut rng = seeded_rng(11);
        let xs: Vec<f64> = (0..200_000).map(|_| (1.0 - rng.random::<f64>()).powf(-0.5)).collect();
        let fit = tail_exponent(&xs, (1.0, 10.0)).unwrap();
        assert!((fit.slope + 2.0).abs() < 0.1, "{fit:?}");
    }

    #[test]
    fn exponential_tail_is_steep() {
        let mut rng = seeded_rng(12);
        let xs: Vec<f64> = (0..200_000).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let fit = tail_exponent(&xs, (1.0, 8.0)).unwrap();
        assert!(fit.slope < -3.0, "{fit:?}");
    }

    #[test]
    fn tail_fit_edge_cases() {
        assert!(tail_exponent(&[3.0; 5000], (1.0, 10.0)).unwrap().degenerate);
        let few: Vec<f64> = (1..500).map(|k| k as f64).collect();
        assert!(matches!(tail_exponent(&few, (1.0, 10.0)), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn components() {
        let (_, m, pairing) = two_points(1.0);
        assert_eq!(component_sizes(&m, &pairing), vec![2]);
        assert_eq!(component_sizes(&m, &Pairing::default()), vec![1, 1]);
        let hist = size_histogram(&[3, 1, 1]);
        assert_eq!(hist.get(&1), Some(&2));
    }

    #[test]
    fn conservation() {
        let (d, m, pairing) = two_points(4.0);
        let c = conservation_check(&d, m.points(), &pairing);
        assert_eq!(c.total_t, 8.0);
        assert!(c.holds(1e-12));
    }
}
