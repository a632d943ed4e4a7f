//! Versioned report envelopes, CSV slices and atomic file output.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bounds::BoundReport;
use crate::canon::BatteryReport;
use crate::dist::DistSpec;
use crate::error::{Error, Result};
use crate::mc::solver::check_tolerance;
use crate::mc::tail::TailFit;
use crate::mc::verify::{
    DeviationReport, LipschitzReport, MomentEquivalenceReport, SmallestSingularReport,
};
use crate::profile::ProfileDescriptor;

pub const SCHEMA_VERSION: u32 = 1;
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything needed to reproduce a report. The worker count is left out
/// on purpose: it never changes the output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub schema_version: u32,
    pub artifact_version: String,
    pub command: String,
    /// Profile descriptor; absent for the canonical-moment battery.
    pub profile: Option<String>,
    /// Absent for the battery, which sweeps α itself.
    pub dist: Option<DistSpec>,
    /// Trials, pairs or Monte Carlo draws, depending on the command.
    pub trials: usize,
    pub master_seed: u64,
    pub tolerance: f64,
}

impl ReportHeader {
    pub fn new(
        command: &str,
        profile: Option<&str>,
        dist: Option<DistSpec>,
        trials: usize,
        master_seed: u64,
        tolerance: f64,
    ) -> Self {
        ReportHeader {
            schema_version: SCHEMA_VERSION,
            artifact_version: ARTIFACT_VERSION.to_string(),
            command: command.to_string(),
            profile: profile.map(str::to_string),
            dist,
            trials,
            master_seed,
            tolerance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Validation(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.trials == 0 {
            return Err(Error::Validation("trials must be >= 1".into()));
        }
        if let Some(dist) = &self.dist {
            dist.validate()?;
        }
        check_tolerance(self.tolerance)?;
        if let Some(profile) = &self.profile {
            ProfileDescriptor::parse(profile)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub rows: usize,
    pub cols: usize,
    /// Row-major entries.
    pub values: Vec<Vec<f64>>,
    pub spectral_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportBody {
    Sample(SampleReport),
    Bounds(BoundReport),
    Deviation(Box<DeviationReport>),
    Moments(MomentEquivalenceReport),
    Battery(BatteryReport),
    TailFit(TailFit),
    SmallestSingular(SmallestSingularReport),
    Lipschitz(LipschitzReport),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub header: ReportHeader,
    pub body: ReportBody,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Parses and revalidates a JSON report.
    pub fn from_json(text: &str) -> Result<Self> {
        let report: Report = serde_json::from_str(text)?;
        report.header.validate()?;
        Ok(report)
    }

    /// The tabular slice of the body. `path` is only used for error context.
    pub fn to_csv(&self, path: &Path) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        let csv_err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        match &self.body {
            ReportBody::Sample(s) => {
                let mut w = csv::WriterBuilder::new()
                    .has_headers(false)
                    .from_writer(&mut buf);
                for row in &s.values {
                    w.serialize(row).map_err(csv_err)?;
                }
                w.flush().map_err(|source| io_err(path, source))?;
            }
            ReportBody::Bounds(b) => {
                BoundReport::write_csv(std::slice::from_ref(b), &mut buf, path)?
            }
            ReportBody::Battery(b) => b.write_csv(&mut buf, path)?,
            ReportBody::Deviation(d) => write_rows(&mut buf, path, deviation_rows(d))?,
            ReportBody::Moments(m) => write_rows(
                &mut buf,
                path,
                (0..m.p_grid.len()).map(|k| MomentRow {
                    p: m.p_grid[k],
                    empirical_norm_p: m.empirical_norm_p[k],
                    predictor: m.predictor[k],
                    ratio: m.ratios[k],
                    reliable: m.reliable[k],
                }),
            )?,
            ReportBody::TailFit(f) => write_rows(
                &mut buf,
                path,
                f.points
                    .iter()
                    .zip(&f.t)
                    .zip(&f.used)
                    .map(|((p, &t), &used)| TailRow {
                        threshold: p.threshold,
                        t,
                        count: p.count,
                        p_hat: p.p_hat,
                        ci_low: p.ci_low,
                        ci_high: p.ci_high,
                        used,
                    }),
            )?,
            ReportBody::SmallestSingular(s) => write_rows(
                &mut buf,
                path,
                [&s.base, &s.doubled].into_iter().map(|z| SingularRow {
                    rows: z.rows,
                    cols: z.cols,
                    q01: z.quantiles[0],
                    q10: z.quantiles[1],
                    median: z.quantiles[2],
                    min: z.min,
                    c_hat: s.c_hat,
                    count_below_c_hat: z.count_below_c_hat,
                    fixed_c: s.fixed_c,
                    count_below_fixed_c: z.count_below_fixed_c,
                    fraction_below_fixed_c: z.fraction_below_fixed_c,
                }),
            )?,
            ReportBody::Lipschitz(l) => write_rows(&mut buf, path, std::iter::once(l))?,
        }
        Ok(buf)
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_rows<T: Serialize>(
    buf: &mut Vec<u8>,
    path: &Path,
    rows: impl IntoIterator<Item = T>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(buf);
    for row in rows {
        w.serialize(row).map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
    }
    w.flush().map_err(|source| io_err(path, source))
}

#[derive(Serialize)]
struct MomentRow {
    p: f64,
    empirical_norm_p: f64,
    predictor: f64,
    ratio: f64,
    reliable: bool,
}

#[derive(Serialize)]
struct TailRow {
    threshold: f64,
    t: f64,
    count: u64,
    p_hat: f64,
    ci_low: f64,
    ci_high: f64,
    used: bool,
}

#[derive(Serialize)]
struct SingularRow {
    rows: usize,
    cols: usize,
    q01: f64,
    q10: f64,
    median: f64,
    min: f64,
    c_hat: f64,
    count_below_c_hat: usize,
    fixed_c: f64,
    count_below_fixed_c: usize,
    fraction_below_fixed_c: f64,
}

#[derive(Serialize)]
struct DeviationRow {
    envelope: &'static str,
    c3: Option<f64>,
    t: f64,
    count: u64,
    p_hat: f64,
    ci_low: f64,
    ci_high: f64,
    envelope_value: f64,
}

fn deviation_rows(d: &DeviationReport) -> Vec<DeviationRow> {
    let mut rows = Vec::new();
    if let (Some(fit), Some(up)) = (&d.tail_fit, &d.upper) {
        let upper_points = fit
            .t
            .iter()
            .zip(&fit.points)
            .filter(|(&t, _)| t > 0.0)
            .map(|(_, p)| p);
        for ((p, &t), &e) in upper_points.zip(&up.t).zip(&up.envelope) {
            rows.push(DeviationRow {
                envelope: "upper",
                c3: None,
                t,
                count: p.count,
                p_hat: p.p_hat,
                ci_low: p.ci_low,
                ci_high: p.ci_high,
                envelope_value: e,
            });
        }
    }
    for low in &d.lower_scan {
        for ((p, &t), &e) in low.points.iter().zip(&low.t).zip(&low.envelope) {
            rows.push(DeviationRow {
                envelope: "lower",
                c3: Some(low.c_big3),
                t,
                count: p.count,
                p_hat: p.p_hat,
                ci_low: p.ci_low,
                ci_high: p.ci_high,
                envelope_value: e,
            });
        }
    }
    rows
}

/// Writes `bytes` to `path` through a sibling temp file and a rename, so a
/// reader never sees a partial report.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(path, e))?;
    tmp.write_all(bytes).map_err(|e| io_err(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}
