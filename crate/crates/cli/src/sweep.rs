//! Growth sweeps over `n`, one CSV row per point set and metric.

use std::time::Instant;

use clap::ValueEnum;
use discrepancy_core::dualcert::{
    halasz_certificate, main_certificate, CertificateConfig, PairingReport,
};
use discrepancy_core::dyadic::GridCap;
use discrepancy_core::hardy::hardy_lower_report;
use discrepancy_core::norms::{dn_norm_suite, DnNormSuite};
use discrepancy_core::pointset::PointSet;
use discrepancy_core::{Error, Result};
use serde::Serialize;

use crate::family::Family;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, ValueEnum)]
pub enum Metric {
    #[value(name = "l1")]
    #[serde(rename = "l1")]
    L1,
    #[value(name = "l2")]
    #[serde(rename = "l2")]
    L2,
    #[value(name = "l1logl")]
    #[serde(rename = "l1logl")]
    L1LogL,
    #[value(name = "pairing_psi")]
    #[serde(rename = "pairing_psi")]
    PairingPsi,
    #[value(name = "pairing_phi")]
    #[serde(rename = "pairing_phi")]
    PairingPhi,
    #[value(name = "hardy_sq_p")]
    #[serde(rename = "hardy_sq_p")]
    HardySqP,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::L1 => "l1",
            Metric::L2 => "l2",
            Metric::L1LogL => "l1logl",
            Metric::PairingPsi => "pairing_psi",
            Metric::PairingPhi => "pairing_phi",
            Metric::HardySqP => "hardy_sq_p",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepConfig {
    pub family: Family,
    pub dim: usize,
    pub n_min: u32,
    pub n_max: u32,
    pub metrics: Vec<Metric>,
    pub seed: u64,
    pub epsilon: f64,
    /// Exponent for `hardy_sq_p`.
    pub p: f64,
    pub timing: bool,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.family.supports(self.dim) {
            return Err(Error::UnsupportedDimension {
                dim: self.dim,
                reason: "family does not exist in this dimension",
            });
        }
        if self.dim < 2 {
            return Err(Error::UnsupportedDimension {
                dim: self.dim,
                reason: "sweeps need d ≥ 2",
            });
        }
        if self.n_min < self.dim as u32 || self.n_min > self.n_max || self.n_max > 30 {
            return Err(Error::Domain(format!(
                "n range {}..={} must satisfy d ≤ n_min ≤ n_max ≤ 30",
                self.n_min, self.n_max
            )));
        }
        if self.dim != 2 && self.metrics.contains(&Metric::PairingPsi) {
            return Err(Error::Domain(
                "pairing_psi is defined in two dimensions only".into(),
            ));
        }
        if self.metrics.is_empty() {
            return Err(Error::Domain("no metrics requested".into()));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::Domain(format!("p = {} is not in (0, 1]", self.p)));
        }
        CertificateConfig::new(self.epsilon, 2)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub family: Family,
    pub d: usize,
    pub n: u32,
    pub n_points: usize,
    pub metric: Metric,
    /// `None` when a size guard refused the computation.
    pub value: Option<f64>,
    pub bound: Option<f64>,
    pub ms: u64,
}

pub const CSV_HEADER: &str = "family,d,n,N,metric,value,bound,ms";

fn cell(x: Option<f64>) -> String {
    match x {
        Some(v) => format!("{v}"),
        None => "NA".into(),
    }
}

impl SweepRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.family.name(),
            self.d,
            self.n,
            self.n_points,
            self.metric.name(),
            cell(self.value),
            cell(self.bound),
            self.ms
        )
    }
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

/// Why a metric has no value: a size guard, which becomes an `NA` row, or
/// a real error.
#[derive(Clone, Debug)]
enum Failure {
    Guard,
    Fatal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ResolutionCap { .. } | Error::TooLarge(_) => Failure::Guard,
            other => Failure::Fatal(other.to_string()),
        }
    }
}

type Cached<T> = std::result::Result<T, Failure>;

/// Per-scale cache so that metrics sharing a computation pay for it once.
struct Scale<'a> {
    points: &'a PointSet,
    cfg: &'a SweepConfig,
    n: u32,
    norms: Option<Cached<DnNormSuite>>,
    certificate: Option<Cached<PairingReport>>,
}

impl Scale<'_> {
    fn norms(&mut self) -> Cached<DnNormSuite> {
        let (points, d, n) = (self.points, self.cfg.dim as u32, self.n);
        self.norms
            .get_or_insert_with(|| {
                let cap = GridCap::default();
                Ok(dn_norm_suite(points, (n + 1).min(cap.0 / d), cap)?)
            })
            .clone()
    }

    fn certificate(&mut self) -> Cached<PairingReport> {
        let (points, eps, n) = (self.points, self.cfg.epsilon, self.n);
        self.certificate
            .get_or_insert_with(|| {
                let cfg = CertificateConfig::new(eps, n)?;
                Ok(if points.dim() == 2 {
                    halasz_certificate(points, &cfg)?
                } else {
                    main_certificate(points, &cfg)?
                })
            })
            .clone()
    }
}

fn metric_value(scale: &mut Scale<'_>, metric: Metric) -> Cached<(f64, Option<f64>)> {
    match metric {
        Metric::L1 => {
            let l1 = scale.norms()?.l1.value;
            let bound = if scale.cfg.dim == 2 {
                Some(scale.certificate()?.norm_lower_bound)
            } else {
                None
            };
            Ok((l1, bound))
        }
        Metric::L2 => {
            let s = scale.norms()?;
            Ok((s.l2.value, Some(s.l1.value)))
        }
        Metric::L1LogL => {
            let v = scale.norms()?.llog.value;
            Ok((v, Some(scale.certificate()?.norm_lower_bound)))
        }
        Metric::PairingPsi | Metric::PairingPhi => Ok((scale.certificate()?.pairing, Some(0.0))),
        Metric::HardySqP => {
            let r = hardy_lower_report(scale.points, scale.n, &[scale.cfg.p], GridCap::default())?;
            let c = &r.square_norms[0];
            Ok((c.value, Some(c.floor)))
        }
    }
}

/// Rows in order of `n`, then metric as requested.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for n in cfg.n_min..=cfg.n_max {
        let points = cfg.family.at_scale(cfg.dim, n, cfg.seed)?;
        let mut scale = Scale {
            points: &points,
            cfg,
            n,
            norms: None,
            certificate: None,
        };
        for &metric in &cfg.metrics {
            let start = Instant::now();
            let (value, bound) = match metric_value(&mut scale, metric) {
                Ok((v, b)) => (Some(v), b),
                Err(Failure::Guard) => (None, None),
                Err(Failure::Fatal(msg)) => return Err(Error::Domain(msg)),
            };
            let ms = if cfg.timing {
                start.elapsed().as_millis() as u64
            } else {
                0
            };
            rows.push(SweepRow {
                family: cfg.family,
                d: cfg.dim,
                n,
                n_points: points.len(),
                metric,
                value,
                bound,
                ms,
            });
        }
    }
    Ok(rows)
}
