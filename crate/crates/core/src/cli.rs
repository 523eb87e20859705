//! Batch front end: `ekeland run SPEC` and `ekeland suite DIR`.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::certificate::{Mode, Status};
use crate::problem::{run_text, Expectation, Outcome, Overrides, Report};

#[derive(Debug, Parser)]
#[command(name = "ekeland", version, about = "Compute and certify Ekeland points")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve and certify one problem document.
    Run {
        spec: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Solve and certify every `*.json` document in a directory.
    Suite {
        dir: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Standard,
    SecondOrder,
    Remark,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Standard => Mode::Standard,
            ModeArg::SecondOrder => Mode::SecondOrder,
            ModeArg::Remark => Mode::RemarkRescaled,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Override the document's epsilon.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Seed for the solver's and verifier's samplers.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of sampled witnesses for the perturbation check on normed spaces.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Directory for certificate and trace reports.
    #[arg(long, default_value = "ekeland-reports")]
    pub out: PathBuf,
    /// Treat a partial certificate (some items not applicable) as success.
    #[arg(long)]
    pub allow_partial: bool,
}

impl Flags {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            epsilon: self.epsilon,
            mode: self.mode.map(Mode::from),
            seed: self.seed,
            samples: self.samples,
        }
    }
}

/// Writes `contents` to `path` via a temporary sibling and a rename.
fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

/// Report file paths for a spec, under `out`.
pub fn report_paths(spec: &Path, out: &Path) -> (PathBuf, PathBuf) {
    let stem = spec
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "problem".into());
    (
        out.join(format!("{stem}.certificate.json")),
        out.join(format!("{stem}.trace.json")),
    )
}

/// Runs one document and writes its reports. I/O failures count as malformed input.
pub fn run_problem(spec: &Path, flags: &Flags) -> Report {
    let text = match fs::read_to_string(spec) {
        Ok(t) => t,
        Err(e) => {
            return Report {
                outcome: Outcome::Malformed(format!("cannot read {}: {e}", spec.display())),
                expect: Expectation::Pass,
                certificate: None,
                trace: None,
            }
        }
    };
    let mut report = run_text(&text, &flags.overrides());
    if let (Some(cert), Some(trace)) = (&report.certificate, &report.trace) {
        let (cert_path, trace_path) = report_paths(spec, &flags.out);
        let written = fs::create_dir_all(&flags.out)
            .and_then(|_| {
                let json = serde_json::to_string_pretty(cert).map_err(io::Error::other)?;
                write_atomic(&cert_path, &json)
            })
            .and_then(|_| {
                let json = serde_json::to_string_pretty(trace).map_err(io::Error::other)?;
                write_atomic(&trace_path, &json)
            });
        if let Err(e) = written {
            report.outcome = Outcome::Malformed(format!("cannot write reports: {e}"));
        }
    }
    report
}

/// One line of a suite summary.
#[derive(Debug, Clone)]
pub struct SuiteRow {
    pub file: String,
    pub expect: Expectation,
    pub outcome: Outcome,
    pub met: bool,
    /// Smallest margin among applicable items, with its id.
    pub worst: Option<(String, f64)>,
}

#[derive(Debug, Clone)]
pub struct SuiteSummary {
    pub rows: Vec<SuiteRow>,
    pub exit_code: i32,
}

impl SuiteSummary {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<32} {:<8} {:<10} {:<4} worst margin", "problem", "expect", "outcome", "ok");
        for row in &self.rows {
            let worst = row
                .worst
                .as_ref()
                .map(|(id, m)| format!("{id} {m:+.3e}"))
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "{:<32} {:<8} {:<10} {:<4} {worst}",
                row.file,
                format!("{:?}", row.expect).to_lowercase(),
                row.outcome.label(),
                if row.met { "yes" } else { "NO" },
            );
            if let Outcome::Rejected(msg) | Outcome::Malformed(msg) = &row.outcome {
                let _ = writeln!(out, "    {msg}");
            }
        }
        let failed = self.rows.iter().filter(|r| !r.met).count();
        let _ = writeln!(out, "{} problems, {failed} unexpected", self.rows.len());
        out
    }
}

/// Runs every `*.json` file of `dir` in name order.
pub fn run_suite(dir: &Path, flags: &Flags) -> SuiteSummary {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map(|entries| {
            entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect()
        })
        .unwrap_or_default();
    files.sort();
    if files.is_empty() {
        return SuiteSummary {
            rows: Vec::new(),
            exit_code: 3,
        };
    }
    let rows: Vec<SuiteRow> = files
        .iter()
        .map(|path| {
            let report = run_problem(path, flags);
            let worst = report.certificate.as_ref().and_then(|c| {
                c.items
                    .iter()
                    .filter(|i| i.status != Status::NotApplicable)
                    .filter_map(|i| i.margin.map(|m| (format!("{:?}", i.id), m)))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
            });
            SuiteRow {
                file: path
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default(),
                expect: report.expect,
                met: report.outcome.meets(report.expect, flags.allow_partial),
                outcome: report.outcome,
                worst,
            }
        })
        .collect();
    let exit_code = if rows.iter().all(|r| r.met) { 0 } else { 1 };
    SuiteSummary { rows, exit_code }
}

/// Entry point; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    match cli.command {
        Command::Run { spec, flags } => {
            let report = run_problem(&spec, &flags);
            match &report.outcome {
                Outcome::Rejected(msg) | Outcome::Malformed(msg) => eprintln!("{}: {msg}", spec.display()),
                outcome => {
                    if let Some(cert) = &report.certificate {
                        for item in &cert.items {
                            let margin = item
                                .margin
                                .map(|m| format!("{m:+.6e}"))
                                .unwrap_or_else(|| "n/a".into());
                            println!("{:?} {:<15} {margin}", item.id, format!("{:?}", item.status).to_lowercase());
                        }
                    }
                    println!("overall: {}", outcome.label());
                }
            }
            report.outcome.exit_code(flags.allow_partial)
        }
        Command::Suite { dir, flags } => {
            let summary = run_suite(&dir, &flags);
            if summary.rows.is_empty() {
                eprintln!("{}: no *.json problem documents", dir.display());
            } else {
                print!("{}", summary.render());
            }
            summary.exit_code
        }
    }
}
