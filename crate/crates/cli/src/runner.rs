//! Replicated experiment runs and their output files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use stubgraph::geometry::{sample_poisson, seeded_rng};
use stubgraph::pairing::Stage;
use stubgraph::stats::{
    aggregate_replicates, conservation_check, default_r_grid, default_window_margin, palm_mean_t, HCurve,
    PalmStats, Window,
};
use stubgraph::{default_truncation, mark_points, rsmc, sam, truncated_scheme, SimDomain, ValidationReport};
use stubgraph::{validate_pairing, Pairing};

use crate::config::{ExperimentConfig, SchemeKind, Truncation, SWEEP_PARAMS};

pub const SUMMARY_HEADER: &str =
    "replicate,point_count,mean_T,stderr_T,unpaired_fraction,self_loops,duplicate_edges,degree_mismatches,lb_violations";

/// One replicate's outcome.
#[derive(Debug, Clone, Serialize)]
pub struct ReplicateRow {
    pub replicate: u32,
    pub seed: u64,
    pub point_count: usize,
    /// Points in the estimation window.
    pub window_count: usize,
    pub mean_t: f64,
    /// Per-point standard error within the replicate; ignores dependence.
    pub stderr_t: f64,
    pub total_stubs: u64,
    pub unpaired_stubs: usize,
    pub unpaired_fraction: f64,
    pub stranded_high_stubs: usize,
    pub self_loops: usize,
    pub duplicate_edges: usize,
    pub degree_mismatches: usize,
    pub lb_violations: usize,
    pub conservation_ok: bool,
}

impl ReplicateRow {
    pub fn violations(&self) -> usize {
        self.self_loops + self.duplicate_edges + self.degree_mismatches + self.lb_violations
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AggregateRow {
    pub point_count: usize,
    pub window_count: usize,
    /// Pooled mean over all window points, the count-weighted mean of replicate means.
    pub mean_t: f64,
    /// Replicate-level standard error; NaN with one replicate.
    pub stderr_t: f64,
    pub unpaired_fraction: f64,
    pub stranded_high_stubs: usize,
    pub self_loops: usize,
    pub duplicate_edges: usize,
    pub degree_mismatches: usize,
    pub lb_violations: usize,
}

/// Edge statistics pooled over replicates for one `(stage, level)`.
#[derive(Debug, Clone, Serialize)]
pub struct LevelRow {
    pub stage: &'static str,
    pub level: u32,
    pub edge_count: usize,
    pub mean_length: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scheme: &'static str,
    pub truncation_m: Option<u64>,
    pub replicates: Vec<ReplicateRow>,
    pub aggregate: AggregateRow,
    #[serde(skip)]
    pub h_curve: HCurve,
    pub levels: Vec<LevelRow>,
    pub config: BTreeMap<String, String>,
}

impl RunReport {
    /// True iff every replicate passed the pairing validator.
    pub fn all_valid(&self) -> bool {
        self.replicates.iter().all(|r| r.violations() == 0)
    }
}

struct ReplicateOutcome {
    row: ReplicateRow,
    samples: Vec<f64>,
    /// `(stage, level) -> (count, summed length)`
    levels: BTreeMap<(Stage, u32), (usize, f64)>,
}

fn truncation(cfg: &ExperimentConfig) -> u64 {
    match cfg.truncation_m {
        Truncation::Fixed(m) => m,
        Truncation::Auto => default_truncation(&cfg.distribution()),
    }
}

fn run_replicate(cfg: &ExperimentConfig, replicate: u32) -> Result<ReplicateOutcome> {
    let seed = cfg.seed ^ replicate as u64;
    let mut rng = seeded_rng(seed);
    let domain = SimDomain::new(cfg.dim, cfg.box_side, cfg.boundary)?;
    let points = sample_poisson(&domain, cfg.intensity, &mut rng)?;
    let marked = mark_points(points, &cfg.distribution(), &mut rng);
    let pairing: Pairing = match cfg.scheme {
        SchemeKind::Rsmc => rsmc(&domain, &marked, &mut rng),
        SchemeKind::Sam => sam(&domain, &marked, &mut rng)?,
        SchemeKind::Truncated => truncated_scheme(&domain, &marked, truncation(cfg), &mut rng)?,
    };
    let report: ValidationReport = validate_pairing(&domain, &marked, &pairing);

    let window = if domain.is_torus() {
        Window::All
    } else {
        match cfg.window_margin {
            Some(m) => Window::Margin(m),
            None => Window::Margin(default_window_margin(&marked, cfg.intensity, cfg.dim)?),
        }
    };
    let palm: PalmStats<f64> = palm_mean_t(&domain, &marked, &pairing, window);
    let stderr_t = if palm.count < 2 {
        f64::NAN
    } else {
        let var = palm.samples.iter().map(|t| (t - palm.mean).powi(2)).sum::<f64>() / (palm.count - 1) as f64;
        (var / palm.count as f64).sqrt()
    };

    let mut levels = BTreeMap::new();
    for e in &pairing.edges {
        let slot = levels.entry((e.stage, e.level)).or_insert((0usize, 0.0f64));
        slot.0 += 1;
        slot.1 += e.length(&domain, marked.points());
    }

    let row = ReplicateRow {
        replicate,
        seed,
        point_count: marked.len(),
        window_count: palm.count,
        mean_t: palm.mean,
        stderr_t,
        total_stubs: marked.total_stubs(),
        unpaired_stubs: pairing.unpaired.len(),
        unpaired_fraction: report.unpaired_fraction,
        stranded_high_stubs: pairing.stranded_high_stubs,
        self_loops: report.self_loop_count,
        duplicate_edges: report.duplicate_edge_count,
        degree_mismatches: report.degree_mismatch_count,
        lb_violations: report.pointwise_lower_bound_violations,
        conservation_ok: conservation_check(&domain, marked.points(), &pairing).holds(1e-9),
    };
    Ok(ReplicateOutcome { row, samples: palm.samples, levels })
}

/// Runs all replicates (in parallel, up to `workers` threads) and assembles
/// the report. Results do not depend on the worker count.
pub fn run_experiment(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<RunReport> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers.or(cfg.workers) {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().context("building worker pool")?;
    let outcomes: Vec<ReplicateOutcome> = pool.install(|| {
        (0..cfg.replicates)
            .into_par_iter()
            .map(|r| run_replicate(cfg, r))
            .collect::<Result<_>>()
    })?;

    let palm: Vec<PalmStats<f64>> = outcomes
        .iter()
        .map(|o| PalmStats { samples: Vec::new(), mean: o.row.mean_t, count: o.row.window_count, window: Window::All })
        .collect();
    let pooled = aggregate_replicates(&palm);
    let rows: Vec<ReplicateRow> = outcomes.iter().map(|o| o.row.clone()).collect();
    let sum = |f: fn(&ReplicateRow) -> usize| rows.iter().map(f).sum::<usize>();
    let stubs: u64 = rows.iter().map(|r| r.total_stubs).sum();
    let aggregate = AggregateRow {
        point_count: sum(|r| r.point_count),
        window_count: pooled.count,
        mean_t: pooled.mean,
        stderr_t: pooled.stderr,
        unpaired_fraction: if stubs == 0 { 0.0 } else { sum(|r| r.unpaired_stubs) as f64 / stubs as f64 },
        stranded_high_stubs: sum(|r| r.stranded_high_stubs),
        self_loops: sum(|r| r.self_loops),
        duplicate_edges: sum(|r| r.duplicate_edges),
        degree_mismatches: sum(|r| r.degree_mismatches),
        lb_violations: sum(|r| r.lb_violations),
    };

    let samples: Vec<f64> = outcomes.iter().flat_map(|o| o.samples.iter().copied()).collect();
    let grid = cfg.r_grid.clone().unwrap_or_else(|| default_r_grid(&samples));
    let h_curve = if samples.is_empty() {
        HCurve { r: grid.clone(), h: vec![f64::NAN; grid.len()] }
    } else {
        HCurve::from_samples(&samples, &grid)?
    };

    let mut pooled_levels: BTreeMap<(Stage, u32), (usize, f64)> = BTreeMap::new();
    for o in &outcomes {
        for (&key, &(count, total)) in &o.levels {
            let slot = pooled_levels.entry(key).or_insert((0, 0.0));
            slot.0 += count;
            slot.1 += total;
        }
    }
    let levels = pooled_levels
        .into_iter()
        .map(|((stage, level), (count, total))| LevelRow {
            stage: stage.as_str(),
            level,
            edge_count: count,
            mean_length: total / count as f64,
        })
        .collect();

    Ok(RunReport {
        scheme: cfg.scheme.as_str(),
        truncation_m: (cfg.scheme == SchemeKind::Truncated).then(|| truncation(cfg)),
        replicates: rows,
        aggregate,
        h_curve,
        levels,
        config: cfg.raw.clone(),
    })
}

pub fn summary_csv(report: &RunReport) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for r in &report.replicates {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.replicate,
            r.point_count,
            r.mean_t,
            r.stderr_t,
            r.unpaired_fraction,
            r.self_loops,
            r.duplicate_edges,
            r.degree_mismatches,
            r.lb_violations
        )
        .unwrap();
    }
    let a = &report.aggregate;
    writeln!(
        out,
        "all,{},{},{},{},{},{},{},{}",
        a.point_count,
        a.mean_t,
        a.stderr_t,
        a.unpaired_fraction,
        a.self_loops,
        a.duplicate_edges,
        a.degree_mismatches,
        a.lb_violations
    )
    .unwrap();
    out
}

pub fn h_curve_csv(curve: &HCurve) -> String {
    let mut out = String::from("r,H\n");
    for (r, h) in curve.r.iter().zip(&curve.h) {
        writeln!(out, "{r},{h}").unwrap();
    }
    out
}

pub fn levels_csv(levels: &[LevelRow]) -> String {
    let mut out = String::from("stage,level,edge_count,mean_length\n");
    for l in levels {
        writeln!(out, "{},{},{},{}", l.stage, l.level, l.edge_count, l.mean_length).unwrap();
    }
    out
}

/// `report.json`: the summary rows plus config echo and versions.
pub fn report_json(report: &RunReport) -> Result<String> {
    #[derive(Serialize)]
    struct Versions {
        stubgraph: &'static str,
    }
    #[derive(Serialize)]
    struct Document<'a> {
        #[serde(flatten)]
        report: &'a RunReport,
        all_valid: bool,
        versions: Versions,
    }
    let doc = Document {
        report,
        all_valid: report.all_valid(),
        versions: Versions { stubgraph: env!("CARGO_PKG_VERSION") },
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn write_outputs(report: &RunReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let files = [
        ("summary.csv", summary_csv(report)),
        ("h_curve.csv", h_curve_csv(&report.h_curve)),
        ("levels.csv", levels_csv(&report.levels)),
        ("report.json", report_json(report)?),
    ];
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// Runs one experiment per value of `param`; value `k` (0-based) uses base
/// seed `seed ^ (k << 32)`.
pub fn sweep(cfg: &ExperimentConfig, param: &str, values: &[String], workers: Option<usize>) -> Result<Vec<(String, RunReport)>> {
    if !SWEEP_PARAMS.contains(&param) {
        bail!("cannot sweep `{param}`; supported: {}", SWEEP_PARAMS.join(", "));
    }
    let mut out = Vec::with_capacity(values.len());
    for (k, value) in values.iter().enumerate() {
        let seed = cfg.seed ^ ((k as u64) << 32);
        let run_cfg = cfg.with_value(param, value)?.with_value("seed", &seed.to_string())?;
        out.push((value.clone(), run_experiment(&run_cfg, workers)?));
    }
    Ok(out)
}

pub fn sweep_csv(param: &str, runs: &[(String, RunReport)]) -> String {
    let mut out = format!("param,value,{SUMMARY_HEADER}\n");
    for (value, report) in runs {
        for line in summary_csv(report).lines().skip(1) {
            writeln!(out, "{param},{value},{line}").unwrap();
        }
    }
    out
}
