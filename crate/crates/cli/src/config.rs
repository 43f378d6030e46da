//! Flat `key = value` experiment configuration.
//!
//! One assignment per line; `#` starts a comment. Keys:
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `dim` | required | 1, 2 or 3 |
//! | `box_side` | required | side length `L` |
//! | `intensity` | 1 | Poisson intensity |
//! | `boundary` | `torus` | `torus` or `euclidean_window` |
//! | `degree.family` | required | `deterministic`, `uniform`, `geometric`, `poisson`, `zipf`, `explicit` |
//! | `degree.u` | | deterministic value |
//! | `degree.lo`, `degree.hi` | | uniform range, inclusive |
//! | `degree.q` | | geometric success probability |
//! | `degree.mu` | | Poisson mean |
//! | `degree.tau`, `degree.cutoff` | cutoff `none` | zipf exponent and support cap |
//! | `degree.pmf` | | explicit law as `value:weight;value:weight` (`,` also separates) |
//! | `scheme` | required | `rsmc`, `sam` or `truncated` |
//! | `truncation_m` | `auto` | threshold of the truncated scheme |
//! | `replicates` | 1 | independent replicates |
//! | `seed` | required | base seed; replicate `r` uses `seed ^ r` |
//! | `r_grid` | `auto` | comma list of radii for the `H` curve |
//! | `output_dir` | `out` | where result files go |
//! | `workers` | all cores | replicate threads |
//! | `window_margin` | `auto` | boundary margin in `euclidean_window` mode |

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use stubgraph::{Boundary, DegreeDistribution, DegreeFamily};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { key: String, line: usize },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("bad value `{value}` for `{key}`: {reason}")]
    Malformed { key: String, value: String, reason: String },
    #[error("invalid `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

const KEYS: &[&str] = &[
    "dim",
    "box_side",
    "intensity",
    "boundary",
    "degree.family",
    "degree.u",
    "degree.lo",
    "degree.hi",
    "degree.q",
    "degree.mu",
    "degree.tau",
    "degree.cutoff",
    "degree.pmf",
    "scheme",
    "truncation_m",
    "replicates",
    "seed",
    "r_grid",
    "output_dir",
    "workers",
    "window_margin",
];

/// Keys a sweep may vary.
pub const SWEEP_PARAMS: &[&str] = &["box_side", "degree.tau", "truncation_m"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Rsmc,
    Sam,
    Truncated,
}

impl SchemeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeKind::Rsmc => "rsmc",
            SchemeKind::Sam => "sam",
            SchemeKind::Truncated => "truncated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    Auto,
    Fixed(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub box_side: f64,
    pub intensity: f64,
    pub boundary: Boundary,
    pub degree: DegreeFamily,
    pub scheme: SchemeKind,
    pub truncation_m: Truncation,
    pub replicates: u32,
    pub seed: u64,
    /// `None` selects the default log grid.
    pub r_grid: Option<Vec<f64>>,
    pub output_dir: PathBuf,
    pub workers: Option<usize>,
    pub window_margin: Option<f64>,
    /// The assignments as written, for echoing into reports.
    pub raw: BTreeMap<String, String>,
}

/// Parses configuration text; see the module docs for the keys.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut raw = BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        let line_no = k + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: line_no,
            text: body.to_string(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey { key: key.to_string(), line: line_no });
        }
        if raw.insert(key.to_string(), value.to_string()).is_some() {
            return Err(ConfigError::Duplicate { key: key.to_string(), line: line_no });
        }
    }
    from_map(raw)
}

/// Builds a config from raw assignments, applying defaults and validation.
pub fn from_map(raw: BTreeMap<String, String>) -> Result<ExperimentConfig, ConfigError> {
    let get = |key: &str| raw.get(key).map(String::as_str);
    let require = |key: &'static str| get(key).ok_or(ConfigError::Missing(key));

    let dim: usize = parse_value("dim", require("dim")?)?;
    if !(1..=3).contains(&dim) {
        return Err(invalid("dim", format!("unsupported dimension {dim}; use 1, 2 or 3")));
    }
    let box_side: f64 = parse_value("box_side", require("box_side")?)?;
    if !(box_side > 0.0 && box_side.is_finite()) {
        return Err(invalid("box_side", "must be positive and finite"));
    }
    let intensity: f64 = get("intensity").map_or(Ok(1.0), |v| parse_value("intensity", v))?;
    if !(intensity > 0.0 && intensity.is_finite()) {
        return Err(invalid("intensity", "must be positive and finite"));
    }
    let boundary = match get("boundary").unwrap_or("torus") {
        "torus" => Boundary::Torus,
        "euclidean_window" => Boundary::EuclideanWindow,
        other => return Err(malformed("boundary", other, "expected `torus` or `euclidean_window`")),
    };
    let degree = degree_from_map(&raw)?;
    let scheme = match require("scheme")? {
        "rsmc" => SchemeKind::Rsmc,
        "sam" => SchemeKind::Sam,
        "truncated" => SchemeKind::Truncated,
        other => return Err(malformed("scheme", other, "expected `rsmc`, `sam` or `truncated`")),
    };
    if scheme == SchemeKind::Sam && dim != 1 {
        return Err(invalid("scheme", format!("sam needs dim = 1, got {dim}")));
    }
    if scheme == SchemeKind::Truncated {
        if boundary != Boundary::Torus {
            return Err(invalid("scheme", "truncated needs boundary = torus"));
        }
        if box_side.fract() != 0.0 {
            return Err(invalid("box_side", "truncated needs an integer box side"));
        }
    }
    let truncation_m = match get("truncation_m").unwrap_or("auto") {
        "auto" => Truncation::Auto,
        v => {
            let m: u64 = parse_value("truncation_m", v)?;
            if m == 0 {
                return Err(invalid("truncation_m", "must be at least 1"));
            }
            Truncation::Fixed(m)
        }
    };
    let replicates: u32 = get("replicates").map_or(Ok(1), |v| parse_value("replicates", v))?;
    if replicates == 0 {
        return Err(invalid("replicates", "must be at least 1"));
    }
    let seed: u64 = parse_value("seed", require("seed")?)?;
    let r_grid = match get("r_grid").unwrap_or("auto") {
        "auto" => None,
        v => {
            let grid = parse_list("r_grid", v)?;
            if grid.is_empty() || grid.windows(2).any(|w| !(w[0] <= w[1])) {
                return Err(invalid("r_grid", "must be a non-empty ascending list"));
            }
            Some(grid)
        }
    };
    let output_dir = PathBuf::from(get("output_dir").unwrap_or("out"));
    let workers = match get("workers") {
        None | Some("auto") => None,
        Some(v) => match parse_value::<usize>("workers", v)? {
            0 => return Err(invalid("workers", "must be at least 1")),
            n => Some(n),
        },
    };
    let window_margin = match get("window_margin") {
        None | Some("auto") => None,
        Some(v) => {
            let m: f64 = parse_value("window_margin", v)?;
            if !(m >= 0.0) {
                return Err(invalid("window_margin", "must be non-negative"));
            }
            Some(m)
        }
    };

    Ok(ExperimentConfig {
        dim,
        box_side,
        intensity,
        boundary,
        degree,
        scheme,
        truncation_m,
        replicates,
        seed,
        r_grid,
        output_dir,
        workers,
        window_margin,
        raw,
    })
}

impl ExperimentConfig {
    /// A copy with one key reassigned and everything revalidated.
    pub fn with_value(&self, key: &str, value: &str) -> Result<Self, ConfigError> {
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey { key: key.to_string(), line: 0 });
        }
        let mut raw = self.raw.clone();
        raw.insert(key.to_string(), value.to_string());
        from_map(raw)
    }

    pub fn distribution(&self) -> DegreeDistribution {
        DegreeDistribution::new(self.degree.clone()).expect("validated while parsing")
    }
}

/// Parses a degree law from `family=zipf;tau=3` style text, keys as in the
/// config without the `degree.` prefix.
pub fn parse_degree_spec(spec: &str) -> Result<DegreeFamily, ConfigError> {
    let mut raw = BTreeMap::new();
    for part in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| ConfigError::Syntax { line: 0, text: part.to_string() })?;
        let key = format!("degree.{}", k.trim());
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { key, line: 0 });
        }
        raw.insert(key, v.trim().to_string());
    }
    degree_from_map(&raw)
}

fn degree_from_map(raw: &BTreeMap<String, String>) -> Result<DegreeFamily, ConfigError> {
    let family = raw.get("degree.family").ok_or(ConfigError::Missing("degree.family"))?;
    let allowed: &[&str] = match family.as_str() {
        "deterministic" => &["degree.u"],
        "uniform" => &["degree.lo", "degree.hi"],
        "geometric" => &["degree.q"],
        "poisson" => &["degree.mu"],
        "zipf" => &["degree.tau", "degree.cutoff"],
        "explicit" => &["degree.pmf"],
        other => {
            return Err(malformed(
                "degree.family",
                other,
                "expected deterministic, uniform, geometric, poisson, zipf or explicit",
            ))
        }
    };
    for key in raw.keys().filter(|k| k.starts_with("degree.") && *k != "degree.family") {
        if !allowed.contains(&key.as_str()) {
            return Err(invalid(key, format!("does not apply to the {family} family")));
        }
    }
    let need = |key: &'static str| raw.get(key).map(String::as_str).ok_or(ConfigError::Missing(key));

    let fam = match family.as_str() {
        "deterministic" => DegreeFamily::Deterministic(parse_value("degree.u", need("degree.u")?)?),
        "uniform" => {
            let lo: u32 = parse_value("degree.lo", need("degree.lo")?)?;
            let hi: u32 = parse_value("degree.hi", need("degree.hi")?)?;
            if lo > hi {
                return Err(invalid("degree.hi", "must be at least degree.lo"));
            }
            DegreeFamily::Explicit((lo..=hi).map(|k| (k, 1.0)).collect())
        }
        "geometric" => DegreeFamily::Geometric { q: parse_value("degree.q", need("degree.q")?)? },
        "poisson" => DegreeFamily::Poisson { mu: parse_value("degree.mu", need("degree.mu")?)? },
        "zipf" => DegreeFamily::Zipf {
            tau: parse_value("degree.tau", need("degree.tau")?)?,
            cutoff: match raw.get("degree.cutoff").map(String::as_str) {
                None | Some("none") => None,
                Some(v) => Some(parse_value("degree.cutoff", v)?),
            },
        },
        _ => {
            let text = need("degree.pmf")?;
            let mut entries = Vec::new();
            for item in text.split([';', ',']).map(str::trim).filter(|s| !s.is_empty()) {
                let (k, w) = item
                    .split_once(':')
                    .ok_or_else(|| malformed("degree.pmf", item, "expected `value:weight`"))?;
                entries.push((parse_value("degree.pmf", k.trim())?, parse_value("degree.pmf", w.trim())?));
            }
            DegreeFamily::Explicit(entries)
        }
    };
    DegreeDistribution::new(fam.clone()).map_err(|e| invalid("degree.family", e.to_string()))?;
    Ok(fam)
}

fn parse_value<V: FromStr>(key: &str, value: &str) -> Result<V, ConfigError>
where
    V::Err: std::fmt::Display,
{
    value.parse().map_err(|e: V::Err| malformed(key, value, e.to_string()))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|v| parse_value(key, v))
        .collect()
}

fn malformed(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Malformed { key: key.to_string(), value: value.to_string(), reason: reason.into() }
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), reason: reason.into() }
}
