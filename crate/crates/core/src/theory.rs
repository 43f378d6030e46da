//! Closed-form and series predictions used as oracles.

use statrs::function::gamma::ln_gamma;

use crate::degrees::{DegreeDistribution, Finiteness};
use crate::error::{Error, Result};

/// Extended non-negative real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TheoryValue {
    Finite(f64),
    Infinite,
}

impl TheoryValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, TheoryValue::Finite(_))
    }

    /// The value as `f64`, with `+inf` for [`TheoryValue::Infinite`].
    pub fn as_f64(&self) -> f64 {
        match *self {
            TheoryValue::Finite(v) => v,
            TheoryValue::Infinite => f64::INFINITY,
        }
    }
}

/// A theoretical quantity tagged with its formula and inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryResult {
    pub value: TheoryValue,
    pub formula: &'static str,
    pub params: Vec<(&'static str, f64)>,
}

fn check_dim(d: usize) -> Result<()> {
    if (1..=3).contains(&d) {
        Ok(())
    } else {
        Err(Error::InvalidDimension { dim: d, reason: "supported dimensions are 1, 2 and 3" })
    }
}

/// Volume `c` of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> Result<f64> {
    check_dim(d)?;
    Ok(match d {
        1 => 2.0,
        2 => std::f64::consts::PI,
        _ => 4.0 * std::f64::consts::PI / 3.0,
    })
}

/// `C = c^(-1/d) / d`.
pub fn series_constant(d: usize) -> Result<f64> {
    Ok(unit_ball_volume(d)?.powf(-1.0 / d as f64) / d as f64)
}

fn check_rn_args(n: u64, lambda: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("intensity must be positive, got {lambda}")));
    }
    Ok(())
}

/// Mean distance from a typical location to the `n`-th nearest point of a
/// Poisson process of intensity `lambda`:
/// `Γ(n + 1/d) / Γ(n) · (λ c)^(-1/d)`, since `λ c R_n^d` is Gamma(n, 1).
pub fn expected_rn(n: u64, lambda: f64, d: usize) -> Result<f64> {
    check_rn_args(n, lambda)?;
    let c = unit_ball_volume(d)?;
    let inv = 1.0 / d as f64;
    let n = n as f64;
    Ok((ln_gamma(n + inv) - ln_gamma(n)).exp() * (lambda * c).powf(-inv))
}

/// `C λ^(-1/d) Σ_{k=0}^{upper} Γ(k + 1/d) / Γ(k + 1)`.
fn rn_series(upper: u64, lambda: f64, d: usize) -> Result<f64> {
    let inv = 1.0 / d as f64;
    let sum: f64 = (0..=upper)
        .map(|k| (ln_gamma(k as f64 + inv) - ln_gamma(k as f64 + 1.0)).exp())
        .sum();
    Ok(series_constant(d)? * lambda.powf(-inv) * sum)
}

/// The summation form of `E[R_n]` with the sum running to `n`. It overshoots
/// [`expected_rn`] by exactly the `k = n` term.
pub fn expected_rn_series_to_n(n: u64, lambda: f64, d: usize) -> Result<f64> {
    check_rn_args(n, lambda)?;
    rn_series(n, lambda, d)
}

/// The summation form with the sum running to `n - 1`, which follows from
/// `P(R_n > r) = P(N(B(r)) <= n - 1)` and equals [`expected_rn`] exactly via
/// `Σ_{k<n} Γ(k + 1/d)/Γ(k + 1) = d Γ(n + 1/d)/Γ(n)`.
pub fn expected_rn_series(n: u64, lambda: f64, d: usize) -> Result<f64> {
    check_rn_args(n, lambda)?;
    rn_series(n - 1, lambda, d)
}

/// [`expected_rn`] with its formula tag.
pub fn expected_rn_result(n: u64, lambda: f64, d: usize) -> Result<TheoryResult> {
    Ok(TheoryResult {
        value: TheoryValue::Finite(expected_rn(n, lambda, d)?),
        formula: "gamma(n+1/d)/gamma(n)*(lambda*c)^(-1/d)",
        params: vec![("n", n as f64), ("lambda", lambda), ("d", d as f64)],
    })
}

/// Palm mean of `T` for shifted adjacent matching at unit intensity when
/// every point has degree `u`.
pub fn sam_expected_total(u: u64) -> Result<f64> {
    if u == 0 {
        return Err(Error::InvalidParameter("u must be at least 1".into()));
    }
    Ok((u as f64).powi(2))
}

/// Mean length of the level-`i` SAM edge at a typical point of the level
/// set, at unit intensity in one dimension: `(2i - 1) / P(D >= i)`.
pub fn sam_level_mean(dist: &DegreeDistribution, level: u64) -> TheoryValue {
    let p = dist.tail_prob(level);
    if level == 0 || p <= 0.0 {
        TheoryValue::Infinite
    } else {
        TheoryValue::Finite((2 * level - 1) as f64 / p)
    }
}

/// Partial sums `S(1..=N)` of `Σ_n (Σ_{i<=n} P(D >= i)^(-1/d)) P(D = n)`,
/// the scale-free lower bound series for RSMC.
///
/// Degrees beyond the support contribute nothing, so the sequence is flat
/// from there on.
pub fn rsmc_lower_bound_partial(dist: &DegreeDistribution, d: usize, n_max: u64) -> Result<Vec<f64>> {
    check_dim(d)?;
    if n_max == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    let inv = 1.0 / d as f64;
    let mut out = Vec::with_capacity(n_max as usize);
    let mut inner = 0.0;
    let mut total = 0.0;
    for n in 1..=n_max {
        let tail = dist.tail_prob(n);
        if tail > 0.0 {
            inner += tail.powf(-inv);
            total += inner * dist.prob(n);
        }
        out.push(total);
    }
    Ok(out)
}

/// Whether the degree law has a finite moment of order `(d + 1) / d`,
/// judged on the untruncated family.
pub fn moment_condition(dist: &DegreeDistribution, d: usize) -> Result<Finiteness> {
    check_dim(d)?;
    Ok(dist.moment((d as f64 + 1.0) / d as f64).uncapped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degrees::DegreeFamily;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn ball_volumes() {
        assert_eq!(unit_ball_volume(1).unwrap(), 2.0);
        assert!(close(unit_ball_volume(2).unwrap(), std::f64::consts::PI, 1e-15));
        assert!(close(unit_ball_volume(3).unwrap(), 4.18879020478639, 1e-13));
        assert!(unit_ball_volume(0).is_err());
        assert!(unit_ball_volume(4).is_err());
    }

    #[test]
    fn nearest_point_means() {
        assert!(close(expected_rn(1, 1.0, 1).unwrap(), 0.5, 1e-12));
        assert!(close(expected_rn(1, 1.0, 2).unwrap(), 0.5, 1e-12));
        // Γ(4.5) / Γ(4) / √π = (3.5 · 2.5 · 1.5 · 0.5) / 6
        assert!(close(expected_rn(4, 1.0, 2).unwrap(), 6.5625 / 6.0, 1e-12));
        // d = 1: the n-th neighbour on either side of a line, mean n / 2
        for n in 1..20 {
            assert!(close(expected_rn(n, 1.0, 1).unwrap(), n as f64 / 2.0, 1e-12));
        }
        assert!(expected_rn(0, 1.0, 2).is_err());
        assert!(expected_rn(1, 0.0, 2).is_err());
    }

    #[test]
    fn intensity_scaling_is_exact() {
        for d in 1..=3 {
            let base = expected_rn(5, 1.0, d).unwrap();
            for lambda in [0.25, 2.0, 17.0] {
                let scaled = expected_rn(5, lambda, d).unwrap();
                assert!(close(scaled, base * lambda.powf(-1.0 / d as f64), 1e-12));
            }
        }
    }

    #[test]
    fn strictly_increasing_in_n() {
        for d in 1..=3 {
            let v: Vec<f64> = (1..100).map(|n| expected_rn(n, 1.0, d).unwrap()).collect();
            assert!(v.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn stirling_limit() {
        for d in 1..=3 {
            let limit = unit_ball_volume(d).unwrap().powf(-1.0 / d as f64);
            let ratio = expected_rn(200, 1.0, d).unwrap() / (200f64).powf(1.0 / d as f64);
            assert!(close(ratio, limit, 0.02), "d={d}: {ratio} vs {limit}");
        }
    }

    #[test]
    fn series_forms() {
        for d in 1..=3 {
            for n in [1, 2, 5, 40] {
                let exact = expected_rn(n, 1.3, d).unwrap();
                assert!(close(expected_rn_series(n, 1.3, d).unwrap(), exact, 1e-10));
                let over = expected_rn_series_to_n(n, 1.3, d).unwrap();
                let extra = series_constant(d).unwrap()
                    * 1.3f64.powf(-1.0 / d as f64)
                    * (ln_gamma(n as f64 + 1.0 / d as f64) - ln_gamma(n as f64 + 1.0)).exp();
                assert!(close(over - exact, extra, 1e-8));
            }
        }
    }

    #[test]
    fn sam_totals() {
        assert_eq!(sam_expected_total(1).unwrap(), 1.0);
        assert_eq!(sam_expected_total(3).unwrap(), 9.0);
        assert_eq!(sam_expected_total(10).unwrap(), 100.0);
        assert!(sam_expected_total(0).is_err());
        // summing the per-level means of a point mass recovers u^2
        let f = DegreeDistribution::deterministic(7);
        let sum: f64 = (1..=7).map(|i| sam_level_mean(&f, i).as_f64()).sum();
        assert_eq!(sum, 49.0);
    }

    #[test]
    fn lower_bound_series() {
        let one = DegreeDistribution::deterministic(1);
        let s = rsmc_lower_bound_partial(&one, 2, 50).unwrap();
        assert!(s.iter().all(|&v| v == 1.0));

        let light = DegreeDistribution::zipf(5.0, None).unwrap();
        let s = rsmc_lower_bound_partial(&light, 2, 100_000).unwrap();
        assert!(s.windows(2).all(|w| w[1] >= w[0]));
        for n in [1_000usize, 10_000, 100_000] {
            assert!((s[n - 1] - s[999]) / s[999] < 1e-3);
        }

        let heavy = DegreeDistribution::zipf(3.0, None).unwrap();
        let s = rsmc_lower_bound_partial(&heavy, 2, 10_000).unwrap();
        assert!(s.windows(2).all(|w| w[1] >= w[0]));
        assert!(s[9_999] > s[99]);

        let capped = DegreeDistribution::zipf(2.0, Some(10)).unwrap();
        let s = rsmc_lower_bound_partial(&capped, 1, 30).unwrap();
        assert!(s[10..].iter().all(|&v| v == s[9]));
    }

    #[test]
    fn moment_verdicts() {
        for d in 1..=3 {
            let f = DegreeDistribution::deterministic(4);
            assert_eq!(moment_condition(&f, d).unwrap(), Finiteness::Finite);
        }
        let z3 = DegreeDistribution::zipf(3.0, None).unwrap();
        assert_eq!(moment_condition(&z3, 2).unwrap(), Finiteness::Finite);
        let z24 = DegreeDistribution::new(DegreeFamily::Zipf { tau: 2.4, cutoff: Some(1000) }).unwrap();
        assert_eq!(moment_condition(&z24, 2).unwrap(), Finiteness::Infinite);
        // d = 1 needs a second moment
        assert_eq!(moment_condition(&z3, 1).unwrap(), Finiteness::Infinite);
    }
}
