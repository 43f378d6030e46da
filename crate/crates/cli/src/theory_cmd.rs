//! `theory` subcommand: closed-form values as JSON.

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};
use stubgraph::theory::{
    expected_rn, expected_rn_series, expected_rn_series_to_n, moment_condition, rsmc_lower_bound_partial,
    sam_expected_total, sam_level_mean, unit_ball_volume, TheoryValue,
};
use stubgraph::{default_truncation, DegreeDistribution, Finiteness};

use crate::config::parse_degree_spec;

pub const QUERIES: &[&str] = &[
    "unit_ball_volume",
    "expected_rn",
    "expected_rn_series",
    "sam_expected_total",
    "sam_level_mean",
    "rsmc_lower_bound_partial",
    "moment_condition",
    "default_truncation",
];

fn number(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!("inf")
    }
}

fn arg<T: std::str::FromStr>(args: &[String], k: usize, name: &str) -> Result<T>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    args.get(k)
        .ok_or_else(|| anyhow!("missing argument `{name}` (position {})", k + 1))?
        .trim()
        .parse()
        .with_context(|| format!("argument `{name}`"))
}

fn degree(spec: Option<&str>) -> Result<DegreeDistribution> {
    let spec = spec.ok_or_else(|| anyhow!("this query needs --degree, e.g. \"family=zipf;tau=3\""))?;
    Ok(DegreeDistribution::new(parse_degree_spec(spec)?)?)
}

/// Evaluates `query` on positional `args` (and a degree law where needed).
pub fn evaluate(query: &str, args: &[String], degree_spec: Option<&str>) -> Result<Value> {
    let (formula, params, value) = match query {
        "unit_ball_volume" => {
            let d: usize = arg(args, 0, "d")?;
            ("c_d", json!({ "d": d }), number(unit_ball_volume(d)?))
        }
        "expected_rn" => {
            let (n, lambda, d): (u64, f64, usize) = (arg(args, 0, "n")?, arg(args, 1, "lambda")?, arg(args, 2, "d")?);
            let value = number(expected_rn(n, lambda, d)?);
            ("gamma(n+1/d)/gamma(n)*(lambda*c)^(-1/d)", json!({ "n": n, "lambda": lambda, "d": d }), value)
        }
        "expected_rn_series" => {
            let (n, lambda, d): (u64, f64, usize) = (arg(args, 0, "n")?, arg(args, 1, "lambda")?, arg(args, 2, "d")?);
            let value = json!({
                "closed_form": expected_rn(n, lambda, d)?,
                "sum_to_n_minus_1": expected_rn_series(n, lambda, d)?,
                "sum_to_n": expected_rn_series_to_n(n, lambda, d)?,
            });
            ("C*lambda^(-1/d)*sum_k gamma(k+1/d)/gamma(k+1)", json!({ "n": n, "lambda": lambda, "d": d }), value)
        }
        "sam_expected_total" => {
            let u: u64 = arg(args, 0, "u")?;
            ("u^2", json!({ "u": u }), number(sam_expected_total(u)?))
        }
        "sam_level_mean" => {
            let i: u64 = arg(args, 0, "i")?;
            let f = degree(degree_spec)?;
            ("(2i-1)/P(D>=i)", json!({ "i": i }), number(sam_level_mean(&f, i).as_f64()))
        }
        "rsmc_lower_bound_partial" => {
            let (d, n): (usize, u64) = (arg(args, 0, "d")?, arg(args, 1, "N")?);
            let f = degree(degree_spec)?;
            let sums = rsmc_lower_bound_partial(&f, d, n)?;
            let value = number(*sums.last().expect("N >= 1"));
            ("sum_n (sum_{i<=n} P(D>=i)^(-1/d)) P(D=n)", json!({ "d": d, "N": n }), value)
        }
        "moment_condition" => {
            let d: usize = arg(args, 0, "d")?;
            let f = degree(degree_spec)?;
            let verdict = match moment_condition(&f, d)? {
                Finiteness::Finite => TheoryValue::Finite(f.moment((d as f64 + 1.0) / d as f64).value),
                Finiteness::Infinite => TheoryValue::Infinite,
            };
            let value = json!({ "finite": verdict.is_finite(), "moment": number(verdict.as_f64()) });
            ("E[D^((d+1)/d)]", json!({ "d": d }), value)
        }
        "default_truncation" => {
            let f = degree(degree_spec)?;
            ("min m: P(aggregate cube degree > m) <= 1e-3", json!({}), json!(default_truncation(&f)))
        }
        other => bail!("unknown query `{other}`; available: {}", QUERIES.join(", ")),
    };
    Ok(json!({ "query": query, "formula": formula, "params": params, "value": value, "degree": degree_spec }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn closed_forms() {
        let v = evaluate("expected_rn", &args(&["1", "1", "2"]), None).unwrap();
        assert!((v["value"].as_f64().unwrap() - 0.5).abs() < 1e-12);
        let v = evaluate("sam_expected_total", &args(&["3"]), None).unwrap();
        assert_eq!(v["value"], json!(9.0));
        let v = evaluate("moment_condition", &args(&["2"]), Some("family=zipf;tau=2.4")).unwrap();
        assert_eq!(v["value"]["finite"], json!(false));
        assert_eq!(v["value"]["moment"], json!("inf"));
        let v = evaluate("default_truncation", &[], Some("family=deterministic;u=3")).unwrap();
        assert_eq!(v["value"], json!(15));
    }

    #[test]
    fn errors_are_reported() {
        assert!(evaluate("nope", &[], None).is_err());
        assert!(evaluate("expected_rn", &args(&["1"]), None).is_err());
        assert!(evaluate("moment_condition", &args(&["2"]), None).is_err());
    }
}
