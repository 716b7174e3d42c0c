use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{InstanceId, Method};
use super::run::RunRecord;
use super::svg::{bar_chart, Series};
use crate::error::{Error, Result};
use crate::problems::{ProblemKind, TopologyClass};
use crate::sim::BasisGate;

/// Mean and sample standard deviation (ddof = 1; `None` below two values).
pub fn mean_std(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some(var.sqrt()))
}

/// One cell of the approximation-ratio table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArRow {
    pub problem: ProblemKind,
    pub topology: TopologyClass,
    pub n: usize,
    pub method: Method,
    pub runs: usize,
    pub ar_mean: f64,
    pub ar_std: Option<f64>,
    pub ar_raw_mean: f64,
    /// An RLVQC method whose mean is strictly above the QAOA mean.
    pub beats_qaoa: bool,
    /// Highest mean among the methods reported for this instance.
    pub is_best: bool,
}

/// Mean circuit composition per method and size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositionRow {
    pub method: Method,
    pub n: usize,
    pub runs: usize,
    pub gate_count: f64,
    pub depth: f64,
    pub frac_h: f64,
    pub frac_rx: f64,
    pub frac_ry: f64,
    pub frac_rz: f64,
    pub frac_cx: f64,
}

impl CompositionRow {
    pub fn fraction(&self, g: BasisGate) -> f64 {
        match g {
            BasisGate::H => self.frac_h,
            BasisGate::Rx => self.frac_rx,
            BasisGate::Ry => self.frac_ry,
            BasisGate::Rz => self.frac_rz,
            BasisGate::Cx => self.frac_cx,
        }
    }
}

/// One row per run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRow {
    pub instance: String,
    pub method: Method,
    pub seed: u64,
    pub ar: f64,
    pub ar_raw: f64,
    pub estimate: f64,
    pub depth: usize,
    pub gate_count: usize,
    pub frac_h: f64,
    pub frac_rx: f64,
    pub frac_ry: f64,
    pub frac_rz: f64,
    pub frac_cx: f64,
    pub wall_time_s: f64,
}

fn run_row(r: &RunRecord) -> RunRow {
    let c = &r.metrics.composition;
    RunRow {
        instance: r.spec.instance.to_string(),
        method: r.spec.method,
        seed: r.spec.seed,
        ar: r.metrics.approximation_ratio,
        ar_raw: r.metrics.approximation_ratio_raw,
        estimate: r.metrics.estimate,
        depth: c.depth,
        gate_count: c.gate_count,
        frac_h: c.fraction(BasisGate::H),
        frac_rx: c.fraction(BasisGate::Rx),
        frac_ry: c.fraction(BasisGate::Ry),
        frac_rz: c.fraction(BasisGate::Rz),
        frac_cx: c.fraction(BasisGate::Cx),
        wall_time_s: r.wall_time_s,
    }
}

/// Aggregated approximation ratios, ordered by problem, topology, size and method.
pub fn ar_table(records: &[RunRecord]) -> Vec<ArRow> {
    let mut groups: BTreeMap<(InstanceId, Method), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.spec.instance, r.spec.method)).or_default().push(r);
    }
    let mut rows: Vec<ArRow> = groups
        .iter()
        .map(|(&(id, method), rs)| {
            let ar: Vec<f64> = rs.iter().map(|r| r.metrics.approximation_ratio).collect();
            let raw: Vec<f64> = rs.iter().map(|r| r.metrics.approximation_ratio_raw).collect();
            let (ar_mean, ar_std) = mean_std(&ar);
            ArRow {
                problem: id.problem,
                topology: id.topology,
                n: id.n,
                method,
                runs: rs.len(),
                ar_mean,
                ar_std,
                ar_raw_mean: mean_std(&raw).0,
                beats_qaoa: false,
                is_best: false,
            }
        })
        .collect();
    let mut by_instance: BTreeMap<InstanceId, Vec<usize>> = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        let id = InstanceId {
            problem: r.problem,
            topology: r.topology,
            n: r.n,
        };
        by_instance.entry(id).or_default().push(i);
    }
    for idx in by_instance.values() {
        let best = idx.iter().map(|&i| rows[i].ar_mean).fold(f64::NEG_INFINITY, f64::max);
        let qaoa = idx
            .iter()
            .find(|&&i| rows[i].method == Method::Qaoa)
            .map(|&i| rows[i].ar_mean);
        for &i in idx {
            rows[i].is_best = rows[i].ar_mean == best;
            rows[i].beats_qaoa = rows[i].method != Method::Qaoa && qaoa.is_some_and(|q| rows[i].ar_mean > q);
        }
    }
    rows
}

/// Mean composition per (method, n).
pub fn composition_table(records: &[RunRecord]) -> Vec<CompositionRow> {
    let mut groups: BTreeMap<(Method, usize), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.spec.method, r.spec.instance.n)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((method, n), rs)| {
            let mean = |f: &dyn Fn(&RunRecord) -> f64| rs.iter().map(|r| f(r)).sum::<f64>() / rs.len() as f64;
            let frac = |g: BasisGate| mean(&|r| r.metrics.composition.fraction(g));
            CompositionRow {
                method,
                n,
                runs: rs.len(),
                gate_count: mean(&|r| r.metrics.composition.gate_count as f64),
                depth: mean(&|r| r.metrics.composition.depth as f64),
                frac_h: frac(BasisGate::H),
                frac_rx: frac(BasisGate::Rx),
                frac_ry: frac(BasisGate::Ry),
                frac_rz: frac(BasisGate::Rz),
                frac_cx: frac(BasisGate::Cx),
            }
        })
        .collect()
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Files written by [`report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub ar_table: PathBuf,
    pub composition: PathBuf,
    pub runs: PathBuf,
    pub plots: Vec<PathBuf>,
}

/// Writes CSV tables and SVG plots for the records whose method is in
/// `methods` (all methods when `None`).
pub fn report(records: &[RunRecord], methods: Option<&[Method]>, out: &Path) -> Result<ReportFiles> {
    let selected: Vec<RunRecord> = records
        .iter()
        .filter(|r| methods.is_none_or(|m| m.contains(&r.spec.method)))
        .cloned()
        .collect();
    if selected.is_empty() {
        return Err(Error::NoRecords);
    }
    fs::create_dir_all(out)?;
    let ar = ar_table(&selected);
    let comp = composition_table(&selected);
    let runs: Vec<RunRow> = selected.iter().map(run_row).collect();
    let files = ReportFiles {
        ar_table: out.join("approximation_ratio.csv"),
        composition: out.join("composition.csv"),
        runs: out.join("runs.csv"),
        plots: vec![
            out.join("gate_count.svg"),
            out.join("depth.svg"),
            out.join("gate_fractions.svg"),
        ],
    };
    write_csv(&files.ar_table, &ar)?;
    write_csv(&files.composition, &comp)?;
    write_csv(&files.runs, &runs)?;

    let sizes: Vec<usize> = {
        let mut s: Vec<usize> = comp.iter().map(|r| r.n).collect();
        s.dedup();
        s.sort();
        s.dedup();
        s
    };
    let present: Vec<Method> = Method::ALL
        .into_iter()
        .filter(|m| comp.iter().any(|r| r.method == *m))
        .collect();
    let lookup = |m: Method, n: usize| comp.iter().find(|r| r.method == m && r.n == n);
    let size_labels: Vec<String> = sizes.iter().map(|n| format!("n = {n}")).collect();
    let per_size = |f: &dyn Fn(&CompositionRow) -> f64| -> Vec<Series> {
        present
            .iter()
            .map(|&m| Series {
                name: m.key().to_string(),
                values: sizes.iter().map(|&n| lookup(m, n).map_or(f64::NAN, f)).collect(),
            })
            .collect()
    };
    fs::write(
        &files.plots[0],
        bar_chart("Mean gate count", "gates", &size_labels, &per_size(&|r| r.gate_count)),
    )?;
    fs::write(
        &files.plots[1],
        bar_chart("Mean circuit depth", "depth", &size_labels, &per_size(&|r| r.depth)),
    )?;
    let mut categories = vec![];
    let mut series: Vec<Series> = BasisGate::ALL
        .iter()
        .map(|g| Series {
            name: g.name().to_string(),
            values: vec![],
        })
        .collect();
    for &m in &present {
        for &n in &sizes {
            if let Some(row) = lookup(m, n) {
                categories.push(format!("{} n={n}", m.key()));
                for (s, g) in series.iter_mut().zip(BasisGate::ALL) {
                    s.values.push(100.0 * row.fraction(g));
                }
            }
        }
    }
    fs::write(
        &files.plots[2],
        bar_chart("Gate usage", "% of total gate count", &categories, &series),
    )?;
    Ok(files)
}
