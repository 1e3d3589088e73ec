use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_experiment, ExperimentConfig, ExperimentReport, Setting};
use crate::error::{DslError, Result};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ExportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ExportFormat {
    type Err = DslError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ExportFormat::Json),
            "csv" => Ok(ExportFormat::Csv),
            _ => Err(DslError::Parse(format!("unknown format {s:?}"))),
        }
    }
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Writes `report.json`, or the CSV tables `layers.csv`, `omega.csv` and
/// `summary.csv`, into `dir`.
pub fn export_report(report: &ExperimentReport, dir: &Path, format: ExportFormat) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    match format {
        ExportFormat::Json => {
            let path = dir.join("report.json");
            write_json(&path, report)?;
            Ok(vec![path])
        }
        ExportFormat::Csv => {
            let mut out = Vec::new();
            if let Some(upper) = &report.upper {
                let path = dir.join("layers.csv");
                let mut w = csv::Writer::from_path(&path)?;
                w.write_record(["j", "candidates", "weight", "omega", "bound"])?;
                for r in &upper.rows {
                    w.write_record([r.j.to_string(), r.candidates.to_string(), r.weight.to_string(), r.omega.to_string(), r.bound.to_string()])?;
                }
                let tail = ["tail".into(), String::new(), upper.tail_constant.to_string(), String::new(), upper.tail.to_string()];
                w.write_record(tail)?;
                w.flush()?;
                out.push(path);
            }
            if !report.omega.is_empty() {
                let path = dir.join("omega.csv");
                let mut w = csv::Writer::from_path(&path)?;
                w.write_record(["j", "measure", "exact"])?;
                for r in &report.omega {
                    w.write_record([r.j.to_string(), r.measure.to_f64().to_string(), r.measure.to_string()])?;
                }
                w.flush()?;
                out.push(path);
            }
            let path = dir.join("summary.csv");
            write_rows(&path, &[SweepRow::from_report(report)])?;
            out.push(path);
            Ok(out)
        }
    }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub setting: Setting,
    pub m: u32,
    pub k: u32,
    pub r: f64,
    pub s: f64,
    pub eta: String,
    pub lhs: Option<f64>,
    pub u: Option<f64>,
    pub l_g: Option<f64>,
    pub a1: Option<f64>,
    pub a2: Option<f64>,
    pub status: String,
}

impl SweepRow {
    fn blank(cfg: &ExperimentConfig, status: String) -> Self {
        SweepRow {
            setting: cfg.setting,
            m: cfg.m,
            k: cfg.k,
            r: cfg.r,
            s: cfg.s,
            eta: format!("{}/{}", cfg.eta.numer(), cfg.eta.denom()),
            lhs: None,
            u: None,
            l_g: None,
            a1: None,
            a2: None,
            status,
        }
    }

    pub fn from_report(rep: &ExperimentReport) -> Self {
        SweepRow {
            lhs: rep.pairing.as_ref().map(|p| p.lhs),
            u: rep.upper.as_ref().map(|u| u.total),
            l_g: rep.greedy.as_ref().map(|g| g.value),
            a1: rep.per_rectangle.as_ref().map(|a| a.a1),
            a2: rep.per_rectangle.as_ref().map(|a| a.a2),
            ..SweepRow::blank(&rep.config, "ok".into())
        }
    }
}

fn write_rows(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["setting", "m", "k", "r", "s", "eta", "LHS", "U", "L_g", "A1", "A2", "status"])?;
    for r in rows {
        w.write_record([
            r.setting.name().to_string(),
            r.m.to_string(),
            r.k.to_string(),
            r.r.to_string(),
            r.s.to_string(),
            r.eta.clone(),
            cell(r.lhs),
            cell(r.u),
            cell(r.l_g),
            cell(r.a1),
            cell(r.a2),
            r.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct SweepSummary {
    pub rows: Vec<SweepRow>,
    #[serde(skip)]
    pub reports: Vec<Option<ExperimentReport>>,
}

/// Runs every configuration on `jobs` threads (0 = all cores). A failing
/// configuration gets a row with its error and the sweep goes on.
pub fn sweep(configs: &[ExperimentConfig], jobs: usize) -> Result<SweepSummary> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| DslError::InvalidConfig(e.to_string()))?;
    let results: Vec<Result<ExperimentReport>> = pool.install(|| configs.par_iter().map(run_experiment).collect());
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for (cfg, res) in configs.iter().zip(results) {
        match res {
            Ok(rep) => {
                rows.push(SweepRow::from_report(&rep));
                reports.push(Some(rep));
            }
            Err(e) => {
                rows.push(SweepRow::blank(cfg, format!("error: {e}")));
                reports.push(None);
            }
        }
    }
    Ok(SweepSummary { rows, reports })
}

/// `summary.csv`, one `report_*.json` per successful configuration, and
/// one plot file per setting and `m` with columns `k LHS U`.
pub fn write_sweep(summary: &SweepSummary, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    let path = dir.join("summary.csv");
    write_rows(&path, &summary.rows)?;
    out.push(path);
    for (i, rep) in summary.reports.iter().enumerate() {
        if let Some(rep) = rep {
            let c = &rep.config;
            let path = dir.join(format!("report_{i:03}_{}_m{}_k{}.json", c.setting.name(), c.m, c.k));
            write_json(&path, rep)?;
            out.push(path);
        }
    }
    let mut groups: Vec<(Setting, u32)> = summary.rows.iter().filter(|r| r.lhs.is_some()).map(|r| (r.setting, r.m)).collect();
    groups.dedup();
    groups.sort_by_key(|(s, m)| (s.name(), *m));
    groups.dedup();
    for (setting, m) in groups {
        let path = dir.join(format!("plot_{}_m{m}.dat", setting.name()));
        let mut text = String::from("# k LHS U\n");
        for r in summary.rows.iter().filter(|r| r.setting == setting && r.m == m && r.lhs.is_some()) {
            text.push_str(&format!("{} {} {}\n", r.k, cell(r.lhs), cell(r.u)));
        }
        fs::write(&path, text)?;
        out.push(path);
    }
    Ok(out)
}
