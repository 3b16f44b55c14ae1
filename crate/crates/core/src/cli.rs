//! Command-line front end: `run`, `check` and `list`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::checks::run_checks;
use crate::error::Error;
use crate::harness::config::{
    schema_template, ExperimentConfig, ManifoldId, PlanType, TestFunctionId,
};
use crate::harness::experiment::{run_experiment, ErrorReport};
use crate::harness::output::{write_errors_csv, write_report_json};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "manifold-hermite",
    version,
    about = "Hermite interpolation of manifold-valued functions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment and write errors.csv, report.json and manifest.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; falls back to `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        /// Start every barycenter descent from the first sample.
        #[arg(long)]
        stateless_bhi: bool,
    },
    /// Run the fast invariant suite.
    Check {
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        #[arg(long, default_value_t = 20240501)]
        seed: u64,
        #[arg(long, default_value_t = 1.0, hide = true)]
        tolerance_scale: f64,
    },
    /// List manifolds, test functions, plan types and the config schema.
    List,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config_path: String,
    config: Option<&'a ExperimentConfig>,
    started: String,
    finished: String,
    outputs: Vec<String>,
    status: &'static str,
    exit_code: u8,
    message: Option<String>,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

pub fn list_text() -> String {
    let mut s = String::new();
    s.push_str("manifolds:\n");
    for m in ManifoldId::ALL {
        s.push_str(&format!("  {}\n", m.name()));
    }
    s.push_str("test functions:\n");
    for f in TestFunctionId::ALL {
        s.push_str(&format!("  {} (into {})\n", f.name(), f.manifold().name()));
    }
    s.push_str("plan types:\n");
    for p in PlanType::ALL {
        s.push_str(&format!("  {}\n", p.name()));
    }
    s.push_str("config schema:\n");
    s.push_str(&schema_template());
    s
}

fn write_manifest(dir: &Path, manifest: &Manifest<'_>) {
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    if let Err(e) = std::fs::write(&path, text) {
        eprintln!("error: cannot write {}: {e}", path.display());
    }
}

fn write_outputs(dir: &Path, report: &ErrorReport) -> Result<Vec<String>, Error> {
    let csv = dir.join("errors.csv");
    let json = dir.join("report.json");
    write_errors_csv(report, &csv)?;
    write_report_json(report, &json)?;
    Ok(vec![csv.display().to_string(), json.display().to_string()])
}

pub fn cmd_run(
    config: &Path,
    out: Option<&Path>,
    threads: Option<usize>,
    stateless_bhi: bool,
) -> u8 {
    let started = now();
    let parsed = ExperimentConfig::from_path(config).and_then(|mut cfg| {
        if let Some(t) = threads {
            cfg.threads = t;
        }
        cfg.stateless_bhi |= stateless_bhi;
        cfg.validate()?;
        Ok(cfg)
    });
    let out_dir = out.map(Path::to_path_buf).or_else(|| {
        parsed
            .as_ref()
            .ok()
            .and_then(|c| c.output_dir.clone())
            .map(PathBuf::from)
    });
    let Some(out_dir) = out_dir else {
        eprintln!("error: no output directory; pass --out or set output_dir");
        return EXIT_VALIDATION;
    };
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        eprintln!("error: cannot create {}: {e}", out_dir.display());
        return EXIT_VALIDATION;
    }
    let mut manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config_path: config.display().to_string(),
        config: None,
        started,
        finished: String::new(),
        outputs: Vec::new(),
        status: "ok",
        exit_code: EXIT_OK,
        message: None,
    };

    let cfg = match parsed {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            manifest.status = "invalid_config";
            manifest.exit_code = EXIT_VALIDATION;
            manifest.message = Some(e.to_string());
            manifest.finished = now();
            write_manifest(&out_dir, &manifest);
            return EXIT_VALIDATION;
        }
    };
    manifest.config = Some(&cfg);

    let (report, failure) = match run_experiment(&cfg) {
        Ok(r) => (r, None),
        Err(f) => (*f.partial, Some(f.error)),
    };
    match write_outputs(&out_dir, &report) {
        Ok(paths) => manifest.outputs = paths,
        Err(e) => eprintln!("error: {e}"),
    }
    if let Some(e) = failure {
        eprintln!("error: numerical failure: {e}");
        manifest.status = "numerical_failure";
        manifest.exit_code = EXIT_NUMERICAL;
        manifest.message = Some(e.to_string());
    } else {
        for (name, rep) in [("bhi", &report.bhi), ("thi", &report.thi)] {
            if let Some(r) = rep {
                println!(
                    "{name}: err_max {:.3e} err_avg {:.3e} offline {:.3e} s online {:.3e} s/query",
                    r.err_max.unwrap_or(f64::NAN),
                    r.err_avg.unwrap_or(f64::NAN),
                    r.offline_seconds.unwrap_or(f64::NAN),
                    r.online_seconds_avg.unwrap_or(f64::NAN)
                );
            }
        }
    }
    manifest.finished = now();
    write_manifest(&out_dir, &manifest);
    manifest.exit_code
}

pub fn cmd_check(pairs: usize, seed: u64, tolerance_scale: f64) -> u8 {
    let results = run_checks(pairs, seed, tolerance_scale);
    for r in &results {
        println!("{r}");
    }
    if results.iter().all(|r| r.passed()) {
        EXIT_OK
    } else {
        EXIT_NUMERICAL
    }
}

pub fn dispatch(cli: Cli) -> u8 {
    match cli.command {
        Command::Run {
            config,
            out,
            threads,
            stateless_bhi,
        } => cmd_run(&config, out.as_deref(), threads, stateless_bhi),
        Command::Check {
            pairs,
            seed,
            tolerance_scale,
        } => cmd_check(pairs, seed, tolerance_scale),
        Command::List => {
            print!("{}", list_text());
            EXIT_OK
        }
    }
}

pub fn main() -> ExitCode {
    match Cli::try_parse() {
        Ok(cli) => ExitCode::from(dispatch(cli)),
        Err(e) => {
            // help and version land here too
            let _ = e.print();
            ExitCode::from(if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            })
        }
    }
}
