//! The full pipeline for one configuration, and sweeps over many.

mod export;

pub use export::{export_report, sweep, write_sweep, ExportFormat, SweepRow, SweepSummary};

use std::collections::BTreeMap;
use std::path::PathBuf;
use crate::clock::Stopwatch;

use serde::{Deserialize, Serialize};

use crate::certify::{certify_2d_in, certify_zygmund_in, CertReport, CertSetting};
use crate::dyadic::{DyadicRational, Window};
use crate::error::{DslError, Result};
use crate::flow::Cap;
use crate::measure::{maximal_pairing, omega_measure, GridFunction, PointMassMeasure};
use crate::net::{build_p, build_z, build_z_flag, lift_zygmund, splitmix64, NetConfig, PointFamily};
use crate::sparse::{
    cz_sparse_dominate_1param, greedy_extremal, layered_upper_bound, per_rectangle_bound, ratio_str, ratio_to_f64,
    CandidateProfile, ControlResult, GreedyResult, LayerTable, PerRectangleReport,
};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setting {
    Zygmund,
    Flag,
    Strong2d,
    Control1d,
}

impl Setting {
    pub fn cert_setting(&self) -> Option<CertSetting> {
        match self {
            Setting::Zygmund => Some(CertSetting::Zygmund),
            Setting::Flag => Some(CertSetting::Flag),
            Setting::Strong2d => Some(CertSetting::Strong2d),
            Setting::Control1d => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Setting::Zygmund => "zygmund",
            Setting::Flag => "flag",
            Setting::Strong2d => "strong2d",
            Setting::Control1d => "control1d",
        }
    }
}

impl std::str::FromStr for Setting {
    type Err = DslError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zygmund" => Ok(Setting::Zygmund),
            "flag" => Ok(Setting::Flag),
            "strong2d" => Ok(Setting::Strong2d),
            "control1d" => Ok(Setting::Control1d),
            _ => Err(DslError::Parse(format!("unknown setting {s:?}"))),
        }
    }
}

fn default_eta() -> Cap {
    Cap::new(1, 2)
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub setting: Setting,
    pub m: u32,
    pub k: u32,
    #[serde(default = "one")]
    pub r: f64,
    #[serde(default = "one")]
    pub s: f64,
    #[serde(with = "ratio_str", default = "default_eta")]
    pub eta: Cap,
    #[serde(default)]
    pub offset_seed: u64,
    /// Level window overrides for the maximal function and greedy probe.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coarse: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fine: Option<i32>,
    /// Last tabulated layer of the upper bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(setting: Setting, m: u32, k: u32) -> Self {
        ExperimentConfig {
            setting,
            m,
            k,
            r: 1.0,
            s: 1.0,
            eta: default_eta(),
            offset_seed: 0,
            coarse: None,
            fine: None,
            cutoff: None,
            out: None,
        }
    }

    pub fn net_config(&self) -> NetConfig {
        NetConfig::new(self.m, self.k).with_seed(self.offset_seed)
    }

    pub fn validate(&self) -> Result<()> {
        self.net_config().validate()?;
        if !(self.r >= 1.0 && self.s >= 1.0) {
            return Err(DslError::InvalidConfig("r and s must be at least 1".into()));
        }
        if self.setting != Setting::Control1d && !(1.0 / self.r + 1.0 / self.s > 1.0) {
            return Err(DslError::InvalidConfig("1/r + 1/s must exceed 1".into()));
        }
        if self.eta <= Cap::from_integer(0) || self.eta > Cap::from_integer(1) {
            return Err(DslError::InvalidConfig("eta must lie in (0, 1]".into()));
        }
        Ok(())
    }

    /// `ν`-side lower bound on the pairing: `2^(2k-1)` for Zygmund and
    /// `2^(k-1)` in the plane.
    pub fn lhs_floor(&self) -> f64 {
        let e = if self.setting == Setting::Zygmund { 2 * self.k } else { self.k };
        (e as f64 - 1.0).exp2()
    }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct OmegaRow {
    pub j: u32,
    pub measure: DyadicRational,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct Pairing {
    /// `⟨𝓜μ, ν⟩`.
    pub lhs: f64,
    pub floor: f64,
    pub min_value: f64,
    pub rects_scanned: u64,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certification: Option<CertReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairing: Option<Pairing>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<LayerTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub greedy: Option<GreedyResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_rectangle: Option<PerRectangleReport>,
    /// `k^(1/s) (1 + 1/k)`, the coupled-scale upper bound up to constants.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupled_bound: Option<f64>,
    #[serde(default)]
    pub omega: Vec<OmegaRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<ControlResult>,
}

/// Wall-clock milliseconds per stage. Kept out of reports so identical
/// configurations give identical bytes.
pub type Timings = BTreeMap<&'static str, u128>;

/// `P` and `Z` for a setting, in the space the setting works in.
pub fn build_families(setting: Setting, cfg: &NetConfig) -> Result<(PointFamily, PointFamily)> {
    cfg.validate()?;
    let p = build_p(cfg.m);
    match setting {
        Setting::Strong2d => {
            let z = build_z(&p, cfg)?;
            Ok((p, z))
        }
        Setting::Flag => {
            let z = build_z_flag(&p, cfg)?;
            Ok((p, z))
        }
        Setting::Zygmund => {
            let z = build_z(&p, cfg)?;
            Ok((lift_zygmund(&p, cfg.m)?, lift_zygmund(&z, cfg.m)?))
        }
        Setting::Control1d => Err(DslError::InvalidConfig("control1d has no point families".into())),
    }
}

pub fn certify_families(setting: Setting, p: &PointFamily, z: &PointFamily, cfg: &NetConfig, fine: i32) -> Result<CertReport> {
    match setting.cert_setting() {
        Some(CertSetting::Zygmund) => certify_zygmund_in(p, z, cfg, fine),
        Some(s) => certify_2d_in(p, z, cfg, s, fine),
        None => Err(DslError::InvalidConfig("control1d is not certified".into())),
    }
}

/// Constant background on `[0,1)` at level `m + k` with one spike of height
/// `2^k` at a seeded cell.
pub fn spike_function(cfg: &ExperimentConfig) -> GridFunction {
    let level = (cfg.m + cfg.k) as i32;
    let n = 1i64 << level;
    let spike = (splitmix64(cfg.offset_seed) % n as u64) as i64;
    let cells = (0..n)
        .map(|i| {
            let v = if i == spike { DyadicRational::pow2(cfg.k as i32) } else { DyadicRational::ONE };
            ([i, 0, 0], v)
        })
        .collect();
    GridFunction { dim: 1, level, denominator: 1, cells }
}

fn window_for(cfg: &ExperimentConfig, p: &PointFamily, z: &PointFamily) -> Window {
    let w = Window::for_points(p.points.iter().chain(&z.points));
    Window::new(cfg.coarse.unwrap_or(w.coarse), cfg.fine.unwrap_or(w.fine))
}

/// Build, certify, then bound the pairing from below and every η-sparse
/// form from above. Uncertified configurations produce no report.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_timed(cfg).map(|(r, _)| r)
}

pub fn run_experiment_timed(cfg: &ExperimentConfig) -> Result<(ExperimentReport, Timings)> {
    cfg.validate()?;
    let mut timings = Timings::new();
    let mut report = ExperimentReport {
        config: cfg.clone(),
        certification: None,
        pairing: None,
        upper: None,
        greedy: None,
        per_rectangle: None,
        coupled_bound: None,
        omega: Vec::new(),
        control: None,
    };
    if cfg.setting == Setting::Control1d {
        let t = Stopwatch::start();
        let control = cz_sparse_dominate_1param(&spike_function(cfg))?;
        timings.insert("control", t.elapsed_ms());
        if !control.dominated {
            return Err(DslError::Uncertified("control.domination".into()));
        }
        report.control = Some(control);
        return Ok((report, timings));
    }

    let net = cfg.net_config();
    let mut t = Stopwatch::start();
    let mut lap = |name, timings: &mut Timings| {
        timings.insert(name, t.elapsed_ms());
        t = Stopwatch::start();
    };
    let (p, z) = build_families(cfg.setting, &net)?;
    lap("build", &mut timings);
    let window = window_for(cfg, &p, &z);
    let mut cert = certify_families(cfg.setting, &p, &z, &net, window.fine)?;
    cert.runtime_ms = 0;
    cert.require_certified()?;
    lap("certify", &mut timings);

    let family = cfg.setting.cert_setting().map(|s| s.family()).unwrap();
    let mu = PointMassMeasure::new(&p.points)?;
    let nu = PointMassMeasure::new(&z.points)?;
    let pair = maximal_pairing(&mu, &nu, family, &window)?;
    lap("pairing", &mut timings);

    let cutoff = cfg.cutoff.unwrap_or_else(|| CandidateProfile::default_cutoff(&net));
    let profile = CandidateProfile::build(&mu, &nu, family, cutoff, &window)?;
    let upper = layered_upper_bound(&profile, cfg.r, cfg.s, ratio_to_f64(&cfg.eta))?;
    let per_rect = per_rectangle_bound(&profile, &net, cfg.r, cfg.s);
    lap("upper", &mut timings);
    let greedy = greedy_extremal(&mu, &nu, family, &window, cfg.r, cfg.s, cfg.eta)?;
    lap("greedy", &mut timings);

    report.omega = profile
        .omega
        .iter()
        .enumerate()
        .map(|(j, m)| OmegaRow { j: j as u32, measure: *m })
        .collect();
    let k = cfg.k as f64;
    report.coupled_bound = Some(k.powf(1.0 / cfg.s) * (1.0 + 1.0 / k));
    report.pairing = Some(Pairing {
        lhs: pair.value,
        floor: cfg.lhs_floor(),
        min_value: pair.min_value,
        rects_scanned: pair.rects_scanned,
    });
    report.certification = Some(cert);
    report.upper = Some(upper);
    report.per_rectangle = Some(per_rect);
    report.greedy = Some(greedy);
    Ok((report, timings))
}

/// Standalone `|Ω_j|` table for `j = 0..=max_j`.
pub fn omega_table(setting: Setting, max_j: u32) -> Result<Vec<OmegaRow>> {
    let family = match setting.cert_setting() {
        Some(s) => s.family(),
        None => crate::dyadic::FamilyKind::Cube,
    };
    let dim = match setting {
        Setting::Zygmund => 3,
        Setting::Control1d => 1,
        _ => 2,
    };
    (0..=max_j)
        .map(|j| Ok(OmegaRow { j, measure: omega_measure(family, dim, j)?.measure }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn control_spike_is_dominated() {
        let mut cfg = ExperimentConfig::new(Setting::Control1d, 3, 2);
        cfg.offset_seed = 5;
        let rep = run_experiment(&cfg).unwrap();
        let c = rep.control.unwrap();
        assert!(c.dominated && c.constant <= 4.0);
    }

    #[test]
    fn uncertified_configs_are_refused() {
        let cfg = ExperimentConfig::new(Setting::Strong2d, 2, 1);
        assert!(matches!(run_experiment(&cfg), Err(DslError::Uncertified(_))));
    }

    #[test]
    fn rejects_bad_exponents() {
        let mut cfg = ExperimentConfig::new(Setting::Zygmund, 2, 2);
        cfg.r = 2.0;
        cfg.s = 2.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_round_trip() {
        let mut cfg = ExperimentConfig::new(Setting::Flag, 3, 2);
        cfg.eta = Cap::new(1, 4);
        cfg.r = 1.5;
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("\"eta\":\"1/4\""));
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&text).unwrap(), cfg);
        let minimal: ExperimentConfig = serde_json::from_str(r#"{"setting":"zygmund","m":2,"k":2}"#).unwrap();
        assert_eq!(minimal, ExperimentConfig::new(Setting::Zygmund, 2, 2));
    }
}
