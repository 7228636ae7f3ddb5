//! Stable text formats: jump CSV, report JSON, study CSVs, run configuration.
//!
//! The jump CSV stores one event per row, sorted by time, with 17
//! significant digits so that serialize/parse/serialize round-trips are
//! byte-identical. Reports serialize as pretty JSON with a fixed key order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::EstimationReport;
use crate::marginals::StableParams;
use crate::simulate::{JumpEvent, JumpSeries};
use crate::study::{Scenario, StudyConfig, StudyResult};
use crate::vine::VineSpec;

/// Renders a jump series as CSV with header `time,x1,...,xd`.
pub fn jumps_csv_string(series: &JumpSeries<f64>) -> String {
    let d = series.events.first().map_or(0, |ev| ev.sizes.len());
    let mut out = String::from("time");
    for k in 1..=d {
        out.push_str(&format!(",x{k}"));
    }
    out.push('\n');
    for ev in &series.events {
        out.push_str(&format!("{:.16e}", ev.time));
        for &s in &ev.sizes {
            out.push_str(&format!(",{s:.16e}"));
        }
        out.push('\n');
    }
    out
}

/// Parses a jump CSV produced by [`jumps_csv_string`].
///
/// Returns the events and the dimension count.
pub fn parse_jumps_csv(text: &str) -> Result<(Vec<JumpEvent<f64>>, usize)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::domain("parse_jumps_csv", "empty file".to_string()))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.first() != Some(&"time") || cols.len() < 2 {
        return Err(Error::domain(
            "parse_jumps_csv",
            format!("expected header `time,x1,...`, got {header:?}"),
        ));
    }
    for (k, col) in cols[1..].iter().enumerate() {
        if *col != format!("x{}", k + 1) {
            return Err(Error::domain(
                "parse_jumps_csv",
                format!("unexpected column name {col:?} at position {}", k + 1),
            ));
        }
    }
    let d = cols.len() - 1;
    let mut events = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d + 1 {
            return Err(Error::domain(
                "parse_jumps_csv",
                format!(
                    "row {}: expected {} fields, got {}",
                    lineno + 2,
                    d + 1,
                    fields.len()
                ),
            ));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| {
                Error::domain(
                    "parse_jumps_csv",
                    format!("row {}: unparseable number {s:?}", lineno + 2),
                )
            })
        };
        let time = parse(fields[0])?;
        let sizes = fields[1..]
            .iter()
            .map(|s| parse(s))
            .collect::<Result<Vec<_>>>()?;
        events.push(JumpEvent { time, sizes });
    }
    Ok((events, d))
}

/// Serializes a report as pretty JSON with a trailing newline.
pub fn report_json_string(report: &EstimationReport<f64>) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Parses a report produced by [`report_json_string`].
pub fn parse_report_json(text: &str) -> Result<EstimationReport<f64>> {
    serde_json::from_str(text).map_err(|e| Error::domain("parse_report_json", e.to_string()))
}

/// Study summary table: one row per tree, the column set of the study
/// tables (mean jump count, true value, mean estimate, bias, RMSE).
pub fn study_rows_csv(result: &StudyResult) -> String {
    let mut out = String::from("tree,jumps,true_value,mean,bias,rmse,fitted,unfitted\n");
    for row in &result.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.tree,
            row.jumps,
            row.true_value,
            row.mean,
            row.bias,
            row.rmse,
            row.fitted,
            row.unfitted
        ));
    }
    out
}

/// Raw per-edge estimates for histogramming, one row per fitted edge.
pub fn study_raw_csv(result: &StudyResult) -> String {
    let mut out = String::from("rep,tree,edge,estimate\n");
    for r in &result.raw {
        out.push_str(&format!("{},{},{},{}\n", r.rep, r.tree, r.edge, r.estimate));
    }
    out
}

/// On-disk run configuration; every field optional so command-line flags and
/// scenario presets can fill the gaps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Option<String>,
    pub epsilon: Option<f64>,
    pub horizon: Option<f64>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub safety: Option<f64>,
    pub mc_samples: Option<usize>,
    /// Marginal parameters by dimension; defaults to the scenario margins.
    pub margins: Option<Vec<StableParams<f64>>>,
    /// Full vine override for non-study use.
    pub vine: Option<VineSpec<f64>>,
}

/// A run configuration with every choice made.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub scenario: Option<Scenario>,
    pub spec: VineSpec<f64>,
    pub margins: Vec<StableParams<f64>>,
    pub epsilon: f64,
    pub horizon: f64,
    pub reps: usize,
    pub seed: u64,
    pub safety: f64,
    pub mc_samples: usize,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::domain("RunConfig::parse", e.to_string()))
    }

    /// Fills defaults: an explicit vine plus margins win; otherwise the
    /// scenario presets apply.
    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let scenario = self.scenario.as_deref().map(Scenario::parse).transpose()?;
        let (spec, margins) = match (&self.vine, scenario) {
            (Some(spec), _) => {
                spec.validate().map_err(Error::InvalidVine)?;
                let margins = self.margins.clone().ok_or_else(|| {
                    Error::domain(
                        "RunConfig::resolve",
                        "a vine override needs explicit margins".to_string(),
                    )
                })?;
                if margins.len() != spec.dim() {
                    return Err(Error::domain(
                        "RunConfig::resolve",
                        format!(
                            "{} margins for a {}-dimensional vine",
                            margins.len(),
                            spec.dim()
                        ),
                    ));
                }
                (spec.clone(), margins)
            }
            (None, Some(s)) => {
                let margins = self.margins.clone().unwrap_or_else(|| s.margins());
                if margins.len() != Scenario::DIM {
                    return Err(Error::domain(
                        "RunConfig::resolve",
                        format!("scenario margins must have {} entries", Scenario::DIM),
                    ));
                }
                (s.vine_spec(), margins)
            }
            (None, None) => {
                return Err(Error::domain(
                    "RunConfig::resolve",
                    "config needs either a scenario or a vine override".to_string(),
                ))
            }
        };
        for m in &margins {
            StableParams::new(m.alpha, m.beta)?;
        }
        let safety = self
            .safety
            .unwrap_or_else(|| scenario.map_or(10.0, |s| s.recommended_safety()));
        let resolved = ResolvedConfig {
            scenario,
            spec,
            margins,
            epsilon: self.epsilon.unwrap_or(1e-6),
            horizon: self.horizon.unwrap_or(1.0),
            reps: self.reps.unwrap_or(100),
            seed: self.seed.unwrap_or(1),
            safety,
            mc_samples: self.mc_samples.unwrap_or(100_000),
        };
        if !(resolved.epsilon > 0.0) || !(resolved.horizon > 0.0) || resolved.reps < 1 {
            return Err(Error::domain(
                "RunConfig::resolve",
                "need epsilon > 0, horizon > 0 and reps >= 1".to_string(),
            ));
        }
        Ok(resolved)
    }
}

impl ResolvedConfig {
    /// The study view of this configuration (scenario runs only).
    pub fn study_config(&self) -> Result<StudyConfig> {
        let scenario = self.scenario.ok_or_else(|| {
            Error::domain(
                "ResolvedConfig::study_config",
                "the study command needs a scenario configuration".to_string(),
            )
        })?;
        Ok(StudyConfig {
            scenario,
            epsilon: self.epsilon,
            horizon: self.horizon,
            reps: self.reps,
            seed: self.seed,
            safety: self.safety,
            mc_samples: self.mc_samples,
        })
    }
}
