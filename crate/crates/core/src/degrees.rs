//! Degree distributions on the non-negative integers and degree marking.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::scalar::Scalar;

/// Support cap applied to zipf laws when no cutoff is requested.
pub const DEFAULT_ZIPF_CUTOFF: u64 = 1_000_000;

/// Unbounded families are tabulated until the neglected tail drops below this.
const TABLE_TAIL_EPS: f64 = 1e-17;
const MAX_TABLE_LEN: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum DegreeFamily {
    /// Point mass at `u`.
    Deterministic(u32),
    /// `P(D = k) = q (1 - q)^(k - 1)` for `k >= 1`.
    Geometric { q: f64 },
    Poisson { mu: f64 },
    /// `P(D = n)` proportional to `n^-tau` on `1..=cutoff`; `None` means the
    /// analytically unbounded law, tabulated up to [`DEFAULT_ZIPF_CUTOFF`].
    Zipf { tau: f64, cutoff: Option<u64> },
    /// Explicit `(value, weight)` list; weights are renormalised.
    Explicit(Vec<(u32, f64)>),
}

/// Finite or infinite, for moment and mean-length verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Finiteness {
    Finite,
    Infinite,
}

/// Largest degree carrying mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Support {
    Bounded(u32),
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moment {
    /// `sum i^alpha p_i` over the tabulated support.
    pub value: f64,
    /// Whether the moment of the untruncated family is finite.
    pub uncapped: Finiteness,
}

/// A degree law with its normalised probability table.
#[derive(Debug, Clone)]
pub struct DegreeDistribution {
    family: DegreeFamily,
    pmf: Vec<f64>,
    /// `tail[i] = P(D >= i)`, one entry longer than `pmf`.
    tail: Vec<f64>,
}

impl DegreeDistribution {
    pub fn new(family: DegreeFamily) -> Result<Self> {
        let weights = match &family {
            DegreeFamily::Deterministic(u) => {
                let mut w = vec![0.0; *u as usize + 1];
                w[*u as usize] = 1.0;
                w
            }
            DegreeFamily::Geometric { q } => {
                if !(*q > 0.0 && *q <= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "geometric q must lie in (0, 1], got {q}"
                    )));
                }
                let mut w = vec![0.0];
                let mut survive = 1.0;
                while survive > TABLE_TAIL_EPS && w.len() < MAX_TABLE_LEN {
                    w.push(survive * q);
                    survive *= 1.0 - q;
                }
                w
            }
            DegreeFamily::Poisson { mu } => {
                if !(*mu >= 0.0) || !mu.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "poisson mean must be non-negative, got {mu}"
                    )));
                }
                let mut w = Vec::new();
                let mut k = 0usize;
                loop {
                    let kf = k as f64;
                    let log_p = if *mu == 0.0 {
                        if k == 0 { 0.0 } else { f64::NEG_INFINITY }
                    } else {
                        -mu + kf * mu.ln() - statrs::function::gamma::ln_gamma(kf + 1.0)
                    };
                    let p = log_p.exp();
                    w.push(p);
                    k += 1;
                    // past the mode the terms shrink faster than geometrically
                    if (kf > *mu && p < TABLE_TAIL_EPS) || w.len() >= MAX_TABLE_LEN {
                        break;
                    }
                }
                w
            }
            DegreeFamily::Zipf { tau, cutoff } => {
                let n = cutoff.unwrap_or(DEFAULT_ZIPF_CUTOFF);
                if !(*tau > 0.0) || !tau.is_finite() {
                    return Err(Error::InvalidParameter(format!("zipf tau must be positive, got {tau}")));
                }
                if cutoff.is_none() && *tau <= 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "uncapped zipf needs tau > 1 to be normalisable, got {tau}"
                    )));
                }
                if n == 0 || n as usize >= MAX_TABLE_LEN {
                    return Err(Error::InvalidParameter(format!(
                        "zipf cutoff must lie in 1..{MAX_TABLE_LEN}, got {n}"
                    )));
                }
                let mut w = Vec::with_capacity(n as usize + 1);
                w.push(0.0);
                w.extend((1..=n).map(|i| (i as f64).powf(-tau)));
                w
            }
            DegreeFamily::Explicit(entries) => {
                if entries.is_empty() {
                    return Err(Error::InvalidParameter("explicit pmf has no entries".into()));
                }
                let max = entries.iter().map(|&(i, _)| i).max().unwrap_or(0) as usize;
                let mut w = vec![0.0; max + 1];
                for &(i, p) in entries {
                    if !(p >= 0.0) || !p.is_finite() {
                        return Err(Error::InvalidParameter(format!(
                            "explicit pmf weight for {i} must be non-negative, got {p}"
                        )));
                    }
                    w[i as usize] += p;
                }
                w
            }
        };
        Self::from_weights(family, weights)
    }

    fn from_weights(family: DegreeFamily, mut pmf: Vec<f64>) -> Result<Self> {
        while pmf.len() > 1 && pmf.last() == Some(&0.0) {
            pmf.pop();
        }
        // Summing from the small end keeps the long zipf tables accurate.
        let total: f64 = pmf.iter().rev().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidParameter("degree weights sum to zero".into()));
        }
        for p in &mut pmf {
            *p /= total;
        }
        let mut tail = vec![0.0; pmf.len() + 1];
        for i in (0..pmf.len()).rev() {
            tail[i] = tail[i + 1] + pmf[i];
        }
        tail[0] = 1.0;
        Ok(Self { family, pmf, tail })
    }

    pub fn deterministic(u: u32) -> Self {
        Self::new(DegreeFamily::Deterministic(u)).expect("point mass is valid")
    }

    pub fn zipf(tau: f64, cutoff: Option<u64>) -> Result<Self> {
        Self::new(DegreeFamily::Zipf { tau, cutoff })
    }

    pub fn explicit(entries: &[(u32, f64)]) -> Result<Self> {
        Self::new(DegreeFamily::Explicit(entries.to_vec()))
    }

    /// Uniform law on `lo..=hi`.
    pub fn uniform(lo: u32, hi: u32) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidParameter(format!("empty range {lo}..={hi}")));
        }
        let entries: Vec<(u32, f64)> = (lo..=hi).map(|i| (i, 1.0)).collect();
        Self::explicit(&entries)
    }

    pub fn family(&self) -> &DegreeFamily {
        &self.family
    }

    /// Normalised probabilities `P(D = i)` for `i` in `0..pmf().len()`.
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn prob(&self, i: u64) -> f64 {
        usize::try_from(i).ok().and_then(|i| self.pmf.get(i)).copied().unwrap_or(0.0)
    }

    /// `P(D >= i)`.
    pub fn tail_prob(&self, i: u64) -> f64 {
        usize::try_from(i).ok().and_then(|i| self.tail.get(i)).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.moment(1.0).value
    }

    /// Largest tabulated degree with positive mass.
    pub fn table_max(&self) -> u32 {
        (self.pmf.len() - 1) as u32
    }

    pub fn moment(&self, alpha: f64) -> Moment {
        let value = self
            .pmf
            .iter()
            .enumerate()
            .rev()
            .map(|(i, &p)| if p > 0.0 { (i as f64).powf(alpha) * p } else { 0.0 })
            .sum();
        let uncapped = match &self.family {
            DegreeFamily::Zipf { tau, .. } => {
                // sum n^(alpha - tau) converges iff alpha - tau < -1
                if alpha - tau < -1.0 {
                    Finiteness::Finite
                } else {
                    Finiteness::Infinite
                }
            }
            _ => Finiteness::Finite,
        };
        Moment { value, uncapped }
    }

    pub fn max_support(&self) -> Support {
        match &self.family {
            DegreeFamily::Zipf { cutoff: None, .. }
            | DegreeFamily::Geometric { .. }
            | DegreeFamily::Poisson { .. } => Support::Unbounded,
            _ => Support::Bounded(self.table_max()),
        }
    }

    /// Inverse-CDF draw from the tabulated law.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        // D = max{i : P(D >= i) >= v} with v uniform on (0, 1]
        let v = 1.0 - rng.random::<f64>();
        let above = self.tail.partition_point(|&t| t >= v);
        above.saturating_sub(1) as u32
    }
}

/// Points carrying an iid number of stubs each.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkedPointSet<T> {
    points: PointSet<T>,
    degrees: Vec<u32>,
}

impl<T: Scalar> MarkedPointSet<T> {
    pub fn new(points: PointSet<T>, degrees: Vec<u32>) -> Result<Self> {
        if points.len() != degrees.len() {
            return Err(Error::InvalidParameter(format!(
                "{} points but {} degree marks",
                points.len(),
                degrees.len()
            )));
        }
        Ok(Self { points, degrees })
    }

    pub fn points(&self) -> &PointSet<T> {
        &self.points
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn degree(&self, i: usize) -> u32 {
        self.degrees[i]
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn max_degree(&self) -> u32 {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn total_stubs(&self) -> u64 {
        self.degrees.iter().map(|&d| d as u64).sum()
    }

    /// Same marks on a different point configuration of equal size.
    pub fn with_points(&self, points: PointSet<T>) -> Result<Self> {
        Self::new(points, self.degrees.clone())
    }

    pub fn into_parts(self) -> (PointSet<T>, Vec<u32>) {
        (self.points, self.degrees)
    }
}

pub fn sample_degree<R: Rng + ?Sized>(dist: &DegreeDistribution, rng: &mut R) -> u32 {
    dist.sample(rng)
}

/// Attaches iid degrees, drawn in point-index order.
pub fn mark_points<T: Scalar, R: Rng + ?Sized>(
    points: PointSet<T>,
    dist: &DegreeDistribution,
    rng: &mut R,
) -> MarkedPointSet<T> {
    let degrees = (0..points.len()).map(|_| dist.sample(rng)).collect();
    MarkedPointSet { points, degrees }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::seeded_rng;

    #[test]
    fn tail_examples() {
        let det = DegreeDistribution::deterministic(3);
        assert_eq!(det.tail_prob(0), 1.0);
        assert_eq!(det.tail_prob(2), 1.0);
        assert_eq!(det.tail_prob(4), 0.0);
        let ex = DegreeDistribution::explicit(&[(1, 0.5), (2, 0.5)]).unwrap();
        assert_eq!(ex.tail_prob(2), 0.5);
        let z = DegreeDistribution::zipf(3.0, Some(1_000_000)).unwrap();
        assert!((z.tail_prob(1) - 1.0).abs() < 1e-12);
        assert_eq!(z.prob(0), 0.0);
    }

    #[test]
    fn normalisation_within_tolerance() {
        for fam in [
            DegreeFamily::Geometric { q: 0.3 },
            DegreeFamily::Poisson { mu: 4.5 },
            DegreeFamily::Zipf { tau: 2.4, cutoff: None },
            DegreeFamily::Explicit(vec![(1, 1.0), (2, 1.0), (3, 1.0)]),
        ] {
            let d = DegreeDistribution::new(fam.clone()).unwrap();
            let s: f64 = d.pmf().iter().rev().sum();
            assert!((s - 1.0).abs() <= 1e-12, "{fam:?}: {s}");
            assert!(d.pmf().iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn moment_examples() {
        let det = DegreeDistribution::deterministic(3);
        assert!((det.moment(1.5).value - 27f64.sqrt()).abs() < 1e-12);
        let z3 = DegreeDistribution::zipf(3.0, None).unwrap();
        assert_eq!(z3.moment(1.5).uncapped, Finiteness::Finite);
        let z24 = DegreeDistribution::zipf(2.4, None).unwrap();
        assert_eq!(z24.moment(1.5).uncapped, Finiteness::Infinite);
    }

    #[test]
    fn max_support_examples() {
        assert_eq!(DegreeDistribution::deterministic(3).max_support(), Support::Bounded(3));
        assert_eq!(
            DegreeDistribution::explicit(&[(1, 0.5), (2, 0.5)]).unwrap().max_support(),
            Support::Bounded(2)
        );
        assert_eq!(DegreeDistribution::zipf(3.0, None).unwrap().max_support(), Support::Unbounded);
        assert_eq!(
            DegreeDistribution::zipf(3.0, Some(50)).unwrap().max_support(),
            Support::Bounded(50)
        );
    }

    #[test]
    fn degenerate_samples() {
        let mut rng = seeded_rng(5);
        let det = DegreeDistribution::deterministic(3);
        assert!((0..1000).all(|_| sample_degree(&det, &mut rng) == 3));
        let zero = DegreeDistribution::explicit(&[(0, 1.0)]).unwrap();
        assert!((0..1000).all(|_| sample_degree(&zero, &mut rng) == 0));
    }

    #[test]
    fn explicit_mean_of_draws() {
        let mut rng = seeded_rng(6);
        let d = DegreeDistribution::explicit(&[(1, 0.5), (2, 0.5)]).unwrap();
        let n = 100_000;
        let mean = (0..n).map(|_| d.sample(&mut rng) as f64).sum::<f64>() / n as f64;
        assert!((1.49..=1.51).contains(&mean), "{mean}");
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(DegreeDistribution::new(DegreeFamily::Geometric { q: 0.0 }).is_err());
        assert!(DegreeDistribution::new(DegreeFamily::Poisson { mu: -1.0 }).is_err());
        assert!(DegreeDistribution::zipf(1.0, None).is_err());
        assert!(DegreeDistribution::explicit(&[(1, -0.5)]).is_err());
        assert!(DegreeDistribution::explicit(&[(1, 0.0)]).is_err());
        assert!(DegreeDistribution::uniform(3, 1).is_err());
    }

    #[test]
    fn marking() {
        let mut rng = seeded_rng(1);
        let d = crate::geometry::SimDomain::torus(1, 10.0).unwrap();
        let empty = mark_points(PointSet::<f64>::empty(1), &DegreeDistribution::deterministic(2), &mut rng);
        assert!(empty.is_empty());
        let pts = PointSet::from_line(&d, &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let m = mark_points(pts, &DegreeDistribution::deterministic(2), &mut rng);
        assert_eq!(m.degrees(), &[2, 2, 2, 2, 2]);
        assert_eq!(m.total_stubs(), 10);
    }
}
