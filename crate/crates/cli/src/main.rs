mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dsl_core::certify::CertReport;
use dsl_core::dyadic::{FamilyKind, Window};
use dsl_core::experiment::{
    build_families, certify_families, export_report, run_experiment_timed, spike_function, sweep, write_sweep,
    ExperimentConfig, ExportFormat, Setting,
};
use dsl_core::measure::omega_measure;
use dsl_core::net::{NetConfig, PointFamily};
use dsl_core::DslError;

use config::ConfigArgs;

/// Builds and certifies dyadic point configurations on which Zygmund, flag
/// and strong maximal functions have no sparse bound, and measures the gap.
#[derive(Parser)]
#[command(name = "dsl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build P and Z and write them as point files.
    Construct(ConfigArgs),
    /// Check every construction clause; exit 1 if one fails.
    Certify {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Certify these point files instead of building them.
        #[arg(long, requires = "z_file")]
        p_file: Option<PathBuf>,
        #[arg(long, requires = "p_file")]
        z_file: Option<PathBuf>,
    },
    /// Certify, then compute the pairing, the layered bound and the greedy probe.
    Experiment {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run a grid of experiments; list values as `1,2` or `1..3`.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run one experiment and write its report or CSV tables.
    Export {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value = "json")]
        format: String,
        /// Also write the superlevel set Ω_J of the unit cube as JSON.
        #[arg(long, value_name = "J")]
        omega: Option<u32>,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn failed(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

impl From<DslError> for Failure {
    fn from(e: DslError) -> Self {
        let code = match e {
            DslError::InvalidConfig(_)
            | DslError::Parse(_)
            | DslError::EmptyWindow { .. }
            | DslError::BadFamilyDimension { .. }
            | DslError::DivergentTail => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::failed(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("dsl: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Construct(args) => construct(&args),
        Command::Certify { cfg, p_file, z_file } => certify(&cfg, p_file.zip(z_file)),
        Command::Experiment { cfg, jobs } => {
            init_threads(jobs)?;
            experiment(&cfg)
        }
        Command::Sweep { cfg, jobs } => run_sweep(&cfg, jobs),
        Command::Export { cfg, format, omega, jobs } => {
            init_threads(jobs)?;
            let format: ExportFormat = format.parse()?;
            export(&cfg, format, omega)
        }
    }
}

fn init_threads(jobs: Option<usize>) -> Result<(), Failure> {
    if let Some(n) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::usage(e.to_string()))?;
    }
    Ok(())
}

fn json<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::failed(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Writes `text` to `dir/name`, or to stdout without a directory.
fn emit(dir: Option<&Path>, name: &str, text: &str) -> Result<(), Failure> {
    match dir {
        Some(d) => {
            fs::create_dir_all(d)?;
            let path = d.join(name);
            fs::write(&path, text)?;
            eprintln!("wrote {}", path.display());
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn construct(args: &ConfigArgs) -> Result<(), Failure> {
    let cfg = args.single()?;
    cfg.validate()?;
    let out = args.out_dir()?;
    if cfg.setting == Setting::Control1d {
        let mut buf = Vec::new();
        spike_function(&cfg).write_csv(&mut buf)?;
        return emit(out.as_deref(), "grid.csv", &String::from_utf8_lossy(&buf));
    }
    let (p, z) = build_families(cfg.setting, &cfg.net_config())?;
    eprintln!("{}: |P| = {}, |Z| = {}", cfg.setting.name(), p.len(), z.len());
    emit(out.as_deref(), "p.txt", &p.to_text())?;
    emit(out.as_deref(), "z.txt", &z.to_text())?;
    if let Some(d) = &out {
        emit(Some(d), "build.json", &json(&z.log)?)?;
    }
    Ok(())
}

fn read_family(path: &Path) -> Result<PointFamily, Failure> {
    let file = fs::File::open(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    Ok(PointFamily::read_text(std::io::BufReader::new(file))?)
}

fn report_certification(cert: &CertReport) -> Result<(), Failure> {
    let asserted = cert.clauses.iter().filter(|c| !c.recorded).count();
    eprintln!("{} clauses checked over {} rectangles", asserted, cert.rectangles_scanned);
    match cert.first_failure() {
        None => Ok(()),
        Some(c) => Err(Failure::failed(format!(
            "clause {} failed{}",
            c.id,
            c.witness.as_deref().map(|w| format!(": {w}")).unwrap_or_default()
        ))),
    }
}

fn certify(args: &ConfigArgs, files: Option<(PathBuf, PathBuf)>) -> Result<(), Failure> {
    let cfg = args.single()?;
    cfg.validate()?;
    if cfg.setting == Setting::Control1d {
        return Err(Failure::usage("control1d has no point families to certify"));
    }
    let (p, z) = match files {
        Some((pf, zf)) => (read_family(&pf)?, read_family(&zf)?),
        None => build_families(cfg.setting, &cfg.net_config())?,
    };
    // Point files carry their own parameters.
    let net = NetConfig::new(z.m, z.k).with_seed(z.seed);
    let fine = Window::for_points(p.points.iter().chain(&z.points)).fine;
    let mut cert = certify_families(cfg.setting, &p, &z, &net, fine)?;
    cert.runtime_ms = 0;
    emit(args.out_dir()?.as_deref(), "cert.json", &json(&cert)?)?;
    report_certification(&cert)
}

fn experiment_report(cfg: &ExperimentConfig) -> Result<dsl_core::experiment::ExperimentReport, Failure> {
    let (report, timings) = run_experiment_timed(cfg)?;
    let stages: Vec<String> = timings.iter().map(|(k, v)| format!("{k} {v}ms")).collect();
    eprintln!("{}", stages.join(", "));
    if let (Some(pair), Some(upper)) = (&report.pairing, &report.upper) {
        eprintln!("LHS = {:.6} (floor {}), U = {:.6}", pair.lhs, pair.floor, upper.total);
    }
    Ok(report)
}

fn experiment(args: &ConfigArgs) -> Result<(), Failure> {
    let cfg = args.single()?;
    let report = experiment_report(&cfg)?;
    emit(args.out_dir()?.as_deref(), "report.json", &json(&report)?)
}

fn run_sweep(args: &ConfigArgs, jobs: Option<usize>) -> Result<(), Failure> {
    let grid = args.grid()?;
    let out = args.out_dir()?.ok_or_else(|| Failure::usage("sweep needs --out"))?;
    let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let summary = sweep(&grid, jobs)?;
    write_sweep(&summary, &out)?;
    let failed = summary.rows.iter().filter(|r| r.status != "ok").count();
    eprintln!("{} configurations, {} failed; wrote {}", grid.len(), failed, out.display());
    if failed > 0 {
        return Err(Failure::failed(format!("{failed} configurations failed")));
    }
    Ok(())
}

fn export(args: &ConfigArgs, format: ExportFormat, omega: Option<u32>) -> Result<(), Failure> {
    let cfg = args.single()?;
    let out = args.out_dir()?.ok_or_else(|| Failure::usage("export needs --out"))?;
    let report = experiment_report(&cfg)?;
    for path in export_report(&report, &out, format)? {
        eprintln!("wrote {}", path.display());
    }
    if let Some(j) = omega {
        let (family, dim) = match cfg.setting {
            Setting::Zygmund => (FamilyKind::Zygmund, 3),
            Setting::Flag => (FamilyKind::Flag, 2),
            Setting::Strong2d => (FamilyKind::Full, 2),
            Setting::Control1d => (FamilyKind::Cube, 1),
        };
        emit(Some(&out), &format!("omega_{j}.json"), &json(&omega_measure(family, dim, j)?)?)?;
    }
    Ok(())
}
