//! The `sweep`, `point`, `distribution` and `thresholds` subcommands.

use anyhow::anyhow;
use heatlaser::compare::{compare_point, sweep_hot_occupation, SweepRecord};
use heatlaser::photonstats::PhotonDistribution;
use heatlaser::semiclassical::{
    find_thresholds, semiclassical_steady_state, temperature_lasing_condition, LasingCondition,
};
use heatlaser::solver::{partial_trace_atom, wigner, WignerGrid};
use heatlaser::{EngineModel, Execution};
use serde_json::{json, Value};

use crate::config::Config;
use crate::output::{Cell, Sink, Table};
use crate::{CliError, CliResult};

pub const SWEEP_COLUMNS: [&str; 22] = [
    "index",
    "n_h",
    "gain_over_kappa",
    "inversion0",
    "a",
    "a_b",
    "b",
    "analytic_mean",
    "analytic_variance",
    "analytic_fano",
    "numeric_mean",
    "numeric_variance",
    "l1",
    "power",
    "n_max",
    "residual",
    "field_intensity",
    "pop_g",
    "pop_e1",
    "pop_e2",
    "pop_e3",
    "status",
];

/// One output row: the comparison record followed by the semiclassical
/// field intensity and level populations at the same point.
fn record_cells(index: usize, n_h: f64, model: &EngineModel, rec: &Result<SweepRecord, heatlaser::Error>) -> Vec<Cell> {
    let mut row = vec![Cell::Int(index), Cell::Float(n_h)];
    let semi = model.with_hot_occupation(n_h).and_then(|m| semiclassical_steady_state(&m));
    match (rec, semi.as_ref()) {
        (Ok(r), Ok(st)) => {
            row.extend(
                [
                    r.gain_over_kappa,
                    r.inversion0,
                    r.a,
                    r.a_b,
                    r.b,
                    r.analytic_mean,
                    r.analytic_variance,
                    r.analytic_fano,
                    r.numeric_mean,
                    r.numeric_variance,
                    r.l1,
                    r.power,
                ]
                .map(Cell::Float),
            );
            row.push(Cell::Int(r.n_max));
            row.push(Cell::Float(r.residual));
            row.push(Cell::Float(st.field.norm_sqr()));
            let p = &st.populations.0;
            row.extend((0..4).map(|k| p.get(k).map_or(Cell::Empty, |&v| Cell::Float(v))));
            row.push(Cell::Text("ok".into()));
        }
        (Err(e), _) | (Ok(_), Err(e)) => {
            row.extend(std::iter::repeat_n(Cell::Empty, SWEEP_COLUMNS.len() - 3));
            row.push(Cell::Text(format!("error: {e}")));
        }
    }
    row
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub points: usize,
    pub failed: usize,
    pub table: Table,
}

/// Compares analytic and numerical photon statistics along the configured
/// `n_h` sweep. Points that fail are flagged in the status column.
pub fn sweep(cfg: &Config, exec: Execution) -> CliResult<SweepOutcome> {
    let values = cfg.sweep_values()?;
    let model = cfg.model()?;
    let mut opts = cfg.numerics_options();
    opts.steady.exec = exec;
    let results = sweep_hot_occupation(&model, &values, exec, &opts);
    let mut table = Table::new(SWEEP_COLUMNS.to_vec());
    let mut failed = 0;
    for (i, (n_h, rec)) in values.iter().zip(&results).enumerate() {
        if let Err(e) = rec {
            failed += 1;
            log::warn!("sweep point {i} (n_h = {n_h}) failed: {e}");
        }
        table.push(record_cells(i, *n_h, &model, rec));
    }
    Ok(SweepOutcome { points: values.len(), failed, table })
}

pub fn run_sweep(cfg: &Config, exec: Execution) -> CliResult<()> {
    let out = sweep(cfg, exec)?;
    let mut sink = Sink::new(cfg)?;
    sink.table("sweep", &out.table)?;
    let files = sink.finish("sweep", cfg, json!({ "points": out.points, "failed": out.failed }))?;
    println!("sweep: {} points, {} failed", out.points, out.failed);
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

/// The sweep row for a single `n_h`; fails instead of flagging the row.
pub fn point(cfg: &Config, n_h: f64, exec: Execution) -> CliResult<Table> {
    let model = cfg.model()?;
    model.with_hot_occupation(n_h).map_err(|e| CliError::Config(anyhow!("n_h: {e}")))?;
    let mut opts = cfg.numerics_options();
    opts.steady.exec = exec;
    let rec = sweep_hot_occupation(&model, &[n_h], Execution::Sequential, &opts).remove(0);
    if let Err(e) = &rec {
        return Err(CliError::Numeric(anyhow!("n_h = {n_h}: {e}")));
    }
    let mut table = Table::new(SWEEP_COLUMNS.to_vec());
    table.push(record_cells(0, n_h, &model, &rec));
    Ok(table)
}

pub fn run_point(cfg: &Config, n_h: f64, exec: Execution) -> CliResult<()> {
    let table = point(cfg, n_h, exec)?;
    let mut sink = Sink::new(cfg)?;
    sink.table("point", &table)?;
    let json = table.to_json();
    println!("{}", serde_json::to_string_pretty(&json[0])?);
    for f in sink.finish("point", cfg, json!({ "n_h": n_h }))? {
        println!("wrote {}", f.display());
    }
    Ok(())
}

#[derive(Debug)]
pub struct DistributionOutcome {
    pub record: SweepRecord,
    pub table: Table,
    pub wigner: Option<(Table, f64, bool)>,
}

fn padded(p: &PhotonDistribution, len: usize) -> Vec<f64> {
    let mut v = p.probabilities().to_vec();
    v.resize(len, 0.0);
    v
}

/// Analytic, numerical and Poisson photon distributions at one `n_h`, plus
/// the cavity Wigner function when requested.
pub fn distribution(cfg: &Config, exec: Execution) -> CliResult<DistributionOutcome> {
    let d = cfg.distribution.ok_or_else(|| CliError::Config(anyhow!("distribution: section missing")))?;
    let model = cfg
        .model()?
        .with_hot_occupation(d.n_h)
        .map_err(|e| CliError::Config(anyhow!("distribution.n_h: {e}")))?;
    let mut opts = cfg.numerics_options();
    opts.steady.exec = exec;
    let point = compare_point(&model, &opts).map_err(|e| CliError::Numeric(e.into()))?;
    let len = point.analytic.probabilities().len().max(point.numeric.probabilities().len());
    let poisson =
        PhotonDistribution::poisson(point.record.analytic_mean, len - 1).map_err(|e| CliError::Numeric(e.into()))?;
    let (a, n, p) = (padded(&point.analytic, len), padded(&point.numeric, len), padded(&poisson, len));
    let mut table = Table::new(vec!["n", "analytic", "numeric", "poisson"]);
    for k in 0..len {
        table.push(vec![Cell::Int(k), Cell::Float(a[k]), Cell::Float(n[k]), Cell::Float(p[k])]);
    }
    let wigner = if d.wigner {
        let cavity = partial_trace_atom(&point.steady.state, &point.space).map_err(|e| CliError::Numeric(e.into()))?;
        let grid = WignerGrid::square(d.wigner_extent, d.wigner_points)
            .map_err(|e| CliError::Config(anyhow!("distribution.wigner: {e}")))?;
        let field = wigner(&cavity, &grid, exec);
        let mut t = Table::new(vec!["re", "im", "value"]);
        for (re, im, w) in field.triples() {
            t.push(vec![Cell::Float(re), Cell::Float(im), Cell::Float(w)]);
        }
        if field.undersized {
            log::warn!("Wigner grid of extent {} misses more than 2% of the weight", d.wigner_extent);
        }
        Some((t, field.integrate(), field.undersized))
    } else {
        None
    };
    Ok(DistributionOutcome { record: point.record, table, wigner })
}

pub fn run_distribution(cfg: &Config, exec: Execution) -> CliResult<()> {
    let out = distribution(cfg, exec)?;
    let r = &out.record;
    let mut sink = Sink::new(cfg)?;
    sink.table("distribution", &out.table)?;
    let mut summary = json!({
        "n_h": r.n_h,
        "gain_over_kappa": r.gain_over_kappa,
        "analytic_mean": r.analytic_mean,
        "analytic_fano": r.analytic_fano,
        "numeric_mean": r.numeric_mean,
        "numeric_variance": r.numeric_variance,
        "l1": r.l1,
        "n_max": r.n_max,
        "residual": r.residual,
    });
    if let Some((t, integral, undersized)) = &out.wigner {
        sink.table("wigner", t)?;
        summary["wigner_integral"] = json!(integral);
        summary["wigner_undersized"] = json!(undersized);
    }
    let files = sink.finish("distribution", cfg, summary)?;
    println!(
        "n_h = {}: analytic <n> = {:.6}, numeric <n> = {:.6}, L1 = {:.4e}, G/kappa = {:.6}",
        r.n_h, r.analytic_mean, r.numeric_mean, r.l1, r.gain_over_kappa
    );
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

#[derive(Debug)]
pub struct ThresholdOutcome {
    pub roots: Vec<f64>,
    pub condition: Option<LasingCondition>,
}

/// Roots of G(n_h) = κ inside the configured bracket, and the κ → 0 lasing
/// condition when bath temperatures are given.
pub fn thresholds(cfg: &Config) -> CliResult<ThresholdOutcome> {
    let model = cfg.model()?;
    let t = cfg.thresholds;
    let roots = find_thresholds(&model, (t.lower, t.upper)).map_err(|e| CliError::Numeric(e.into()))?;
    let condition = match cfg.thermal_model()? {
        Some(m) => Some(temperature_lasing_condition(&m).map_err(|e| CliError::Config(e.into()))?),
        None => None,
    };
    Ok(ThresholdOutcome { roots, condition })
}

pub fn run_thresholds(cfg: &Config) -> CliResult<()> {
    let out = thresholds(cfg)?;
    let t = cfg.thresholds;
    if out.roots.is_empty() {
        println!("no threshold in bracket [{}, {}]", t.lower, t.upper);
    } else {
        for (i, r) in out.roots.iter().enumerate() {
            println!("threshold {i}: n_h = {r:.10}");
        }
    }
    let condition = out.condition.map(|c| {
        println!(
            "lasing as kappa -> 0: {}; efficiency {:.6}, Carnot bound {:.6}",
            if c.lases { "yes" } else { "no" },
            c.efficiency,
            c.carnot
        );
        json!({ "lases": c.lases, "efficiency": c.efficiency, "carnot": c.carnot })
    });
    let mut table = Table::new(vec!["index", "n_h"]);
    for (i, r) in out.roots.iter().enumerate() {
        table.push(vec![Cell::Int(i), Cell::Float(*r)]);
    }
    let mut sink = Sink::new(cfg)?;
    sink.table("thresholds", &table)?;
    let summary = json!({
        "bracket": [t.lower, t.upper],
        "roots": table.to_json(),
        "temperature_condition": condition.unwrap_or(Value::Null),
    });
    for f in sink.finish("thresholds", cfg, summary)? {
        println!("wrote {}", f.display());
    }
    Ok(())
}
