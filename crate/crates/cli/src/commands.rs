//! Argument definitions and the five subcommands.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use discrepancy_core::dualcert::{main_certificate, CertificateConfig};
use discrepancy_core::dyadic::GridCap;
use discrepancy_core::norms::dn_norm_suite;
use discrepancy_core::pointset::{gen_halton, gen_random, gen_vandercorput, PointSet};
use serde::Serialize;

use crate::family::Family;
use crate::report::{Check, Report, Timing};
use crate::suites::{run_suite, Suite, SuiteParams};
use crate::svg::line_chart;
use crate::sweep::{run_sweep, to_csv, Metric, SweepConfig};

#[derive(Debug, Parser)]
#[command(
    name = "discrepancy",
    version,
    about = "Haar analysis and lower-bound certificates for the discrepancy function"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Write a point set file.
    Gen(GenArgs),
    /// Pair D_N with the sine test function of a point set.
    Pair(PairArgs),
    /// Norms of D_N for a point set.
    Norms(NormsArgs),
    /// Run verification suites; exit 1 if any check fails.
    Verify(VerifyArgs),
    /// Tabulate metrics against n.
    Sweep(SweepArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// van der Corput: 2^m points.
    #[arg(long)]
    pub m: Option<u32>,
    /// Number of points (halton, random).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output file; standard output if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct PairArgs {
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long, default_value_t = CertificateConfig::DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Scale n; defaults to the smallest n with 2N ≤ 2^n.
    #[arg(long)]
    pub scale: Option<u32>,
    #[arg(long, default_value_t = GridCap::default().0)]
    pub grid_cap: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct NormsArgs {
    #[arg(long)]
    pub points: PathBuf,
    /// Per-axis grid level.
    #[arg(long, default_value_t = 8)]
    pub resolution: u32,
    #[arg(long, default_value_t = GridCap::default().0)]
    pub grid_cap: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    #[arg(long, default_value_t = 8)]
    pub max_n: u32,
    /// Repeatable; all families if absent.
    #[arg(long = "family", value_enum)]
    pub families: Vec<Family>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = CertificateConfig::DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Record wall-clock time in the report (makes it non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 4)]
    pub n_min: u32,
    #[arg(long, default_value_t = 10)]
    pub n_max: u32,
    /// Repeatable; l1, l2 and pairing_phi if absent.
    #[arg(long = "metric", value_enum)]
    pub metrics: Vec<Metric>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = CertificateConfig::DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Exponent for hardy_sq_p.
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a line chart of value against n.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Fill the ms column with wall-clock times.
    #[arg(long)]
    pub timing: bool,
}

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    CheckFailed,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::CheckFailed => 1,
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn config_echo(cmd: &Command) -> serde_json::Value {
    serde_json::to_value(cmd).expect("arguments serialize")
}

fn finish(
    mut report: Report,
    out: Option<&Path>,
    timing: bool,
    start: Instant,
) -> anyhow::Result<Status> {
    if timing {
        report.timing = Some(Timing {
            total_ms: start.elapsed().as_millis() as u64,
        });
    }
    emit(out, &report.to_json())?;
    Ok(if report.all_passed() {
        Status::Ok
    } else {
        Status::CheckFailed
    })
}

/// Errors returned here are usage or input errors (exit code 2).
pub fn run(cli: &Cli) -> anyhow::Result<Status> {
    let start = Instant::now();
    let echo = config_echo(&cli.command);
    match &cli.command {
        Command::Gen(a) => {
            let points = generate(a)?;
            emit(a.out.as_deref(), &points.to_text())?;
            Ok(Status::Ok)
        }
        Command::Pair(a) => {
            let points = PointSet::load(&a.points)?;
            let cfg = match a.scale {
                Some(n) => CertificateConfig::new(a.epsilon, n)?,
                None => CertificateConfig::for_points(a.epsilon, points.len())?,
            }
            .with_grid_cap(GridCap(a.grid_cap));
            let rep = main_certificate(&points, &cfg)?;
            let mut checks = vec![
                Check::positive("pairing", rep.pairing),
                Check::at_most("sup norm", rep.sup_norm, 1.0),
                Check::at_most(
                    "linearity",
                    (rep.pairing - rep.pairing_by_linearity).abs(),
                    1e-10,
                ),
            ];
            if !rep.in_window {
                checks.push(Check::logged("outside 2N <= 2^n <= 4N", 0.0));
            }
            let report = Report::new(echo, checks).with_data(serde_json::to_value(&rep)?);
            finish(report, a.out.as_deref(), a.timing, start)
        }
        Command::Norms(a) => {
            let points = PointSet::load(&a.points)?;
            let suite = dn_norm_suite(&points, a.resolution, GridCap(a.grid_cap))?;
            let mut checks = vec![Check::at_least("l2 >= l1", suite.l2.value, suite.l1.value)];
            if let Some(change) = suite.refinement_change {
                checks.push(Check::at_most("refinement change", change, 0.01));
            }
            let report = Report::new(echo, checks).with_data(serde_json::to_value(&suite)?);
            finish(report, a.out.as_deref(), a.timing, start)
        }
        Command::Verify(a) => {
            CertificateConfig::new(a.epsilon, 2)?;
            if a.max_n < 2 {
                bail!("--max-n must be at least 2");
            }
            let mut families = if a.families.is_empty() {
                Family::ALL.to_vec()
            } else {
                a.families.clone()
            };
            families.sort();
            families.dedup();
            let params = SuiteParams {
                families,
                max_n: a.max_n,
                seed: a.seed,
                epsilon: a.epsilon,
            };
            let report = Report::new(echo, run_suite(a.suite, &params));
            finish(report, a.out.as_deref(), a.timing, start)
        }
        Command::Sweep(a) => {
            let metrics = if a.metrics.is_empty() {
                vec![Metric::L1, Metric::L2, Metric::PairingPhi]
            } else {
                a.metrics.clone()
            };
            let cfg = SweepConfig {
                family: a.family,
                dim: a.dim,
                n_min: a.n_min,
                n_max: a.n_max,
                metrics: metrics.clone(),
                seed: a.seed,
                epsilon: a.epsilon,
                p: a.p,
                timing: a.timing,
            };
            let rows = run_sweep(&cfg)?;
            emit(a.out.as_deref(), &to_csv(&rows))?;
            if let Some(path) = &a.svg {
                let series: Vec<(String, Vec<(f64, f64)>)> = metrics
                    .iter()
                    .map(|m| {
                        let pts = rows
                            .iter()
                            .filter(|r| r.metric == *m)
                            .filter_map(|r| r.value.map(|v| (f64::from(r.n), v)))
                            .collect();
                        (m.name().to_string(), pts)
                    })
                    .collect();
                let title = format!("{} d={}", a.family.name(), a.dim);
                fs::write(path, line_chart(&title, "n", &series))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(Status::Ok)
        }
    }
}

fn generate(a: &GenArgs) -> anyhow::Result<PointSet> {
    Ok(match a.family {
        Family::Vdc => {
            if a.dim != 2 {
                bail!(
                    "van der Corput sets are two-dimensional; got --dim {}",
                    a.dim
                );
            }
            let Some(m) = a.m else {
                bail!("--family vdc needs --m")
            };
            gen_vandercorput(m)?
        }
        Family::Halton => {
            let Some(n) = a.n else {
                bail!("--family halton needs --n")
            };
            gen_halton(n, a.dim)?
        }
        Family::Random => {
            let Some(n) = a.n else {
                bail!("--family random needs --n")
            };
            gen_random(n, a.dim, a.seed)?
        }
    })
}
