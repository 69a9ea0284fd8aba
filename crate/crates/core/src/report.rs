//! Machine-readable run reports and per-sample CSV tables.

use std::path::Path;

use serde::Serialize;

use crate::config::{RunConfig, Violation};
use crate::torus::SliceReport;

/// Exit statuses of the command-line tool.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitStatus {
    Success,
    Validation,
    InfeasibleLevelSet,
    HypothesisFailure,
    ResidualBreach,
    NonConvergence,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::Validation => 2,
            ExitStatus::InfeasibleLevelSet => 3,
            ExitStatus::HypothesisFailure => 4,
            ExitStatus::ResidualBreach => 5,
            ExitStatus::NonConvergence => 6,
        }
    }
}

/// Which side of the tolerance a statistic must stay on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Every value must be below the tolerance.
    Max,
    /// Every value must be above the tolerance.
    Min,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualStat {
    pub name: String,
    pub invariant: String,
    pub bound: Bound,
    pub tolerance: f64,
    pub count: usize,
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    pub pass: bool,
}

impl ResidualStat {
    pub fn from_values(name: &str, invariant: &str, bound: Bound, tolerance: f64, values: &[f64]) -> Self {
        let count = values.len();
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = if count == 0 { 0.0 } else { values.iter().sum::<f64>() / count as f64 };
        let pass = values.iter().all(|v| match bound {
            Bound::Max => *v < tolerance,
            Bound::Min => *v > tolerance,
        });
        let (max, min) = if count == 0 { (0.0, 0.0) } else { (max, min) };
        ResidualStat { name: name.into(), invariant: invariant.into(), bound, tolerance, count, max, min, mean, pass }
    }
}

/// Summary statistic without a pass/fail bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Statistic {
    pub name: String,
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl Statistic {
    pub fn from_values(name: &str, values: &[f64]) -> Self {
        let s = ResidualStat::from_values(name, "", Bound::Max, f64::INFINITY, values);
        Statistic { name: name.into(), count: s.count, min: s.min, max: s.max, mean: s.mean }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Census {
    pub total: usize,
    pub failing: usize,
}

impl Census {
    pub fn from_flags(flags: &[bool]) -> Self {
        Census { total: flags.len(), failing: flags.iter().filter(|f| **f).count() }
    }

    pub fn fraction_failing(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.failing as f64 / self.total as f64
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Verdicts {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slice: Option<SliceReport>,
    /// Samples where `dJ` restricted to the kernel directions is not onto.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transversality: Option<Census>,
    /// Samples where the kernel action is not locally free.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub freeness: Option<Census>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypotheses_hold: Option<bool>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionTable {
    pub ambient: usize,
    pub level_set: usize,
    pub quotient: usize,
    /// `dim M + 1 − d − k` for a free, transverse action.
    pub expected_quotient: usize,
    /// The alternative count `dim M − d − m − k`.
    pub printed_formula: i64,
    pub printed_formula_matches: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrataSummary {
    pub positive: usize,
    pub zero: usize,
    pub negative: usize,
    pub leaks: usize,
    pub all_strata_present: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Outcome {
    pub status: ExitStatus,
    pub code: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config: RunConfig,
    pub verdicts: Verdicts,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimensions: Option<DimensionTable>,
    pub residuals: Vec<ResidualStat>,
    pub statistics: Vec<Statistic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strata: Option<StrataSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<Violation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub samples_csv: String,
    pub exit: Outcome,
}

impl RunReport {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        RunReport {
            command: command.into(),
            config: config.clone(),
            verdicts: Verdicts::default(),
            dimensions: None,
            residuals: Vec::new(),
            statistics: Vec::new(),
            strata: None,
            violations: Vec::new(),
            error: None,
            samples_csv: "samples.csv".into(),
            exit: Outcome { status: ExitStatus::Success, code: 0 },
        }
    }

    pub fn residual(&self, name: &str) -> Option<&ResidualStat> {
        self.residuals.iter().find(|r| r.name == name)
    }

    pub fn statistic(&self, name: &str) -> Option<&Statistic> {
        self.statistics.iter().find(|r| r.name == name)
    }

    pub fn set_status(&mut self, status: ExitStatus) {
        self.exit = Outcome { status, code: status.code() };
    }

    /// Residual breach unless a stronger status was already set.
    pub fn finalize(&mut self) {
        if self.exit.status == ExitStatus::Success && self.residuals.iter().any(|r| !r.pass) {
            self.set_status(ExitStatus::ResidualBreach);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Per-sample rows: index, point coordinates, ray parameter, named columns.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SampleTable {
    pub columns: Vec<String>,
    pub rows: Vec<SampleRow>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SampleRow {
    pub index: usize,
    pub point: Vec<f64>,
    pub s: Option<f64>,
    pub values: Vec<f64>,
}

impl SampleTable {
    pub fn new(columns: &[&str]) -> Self {
        SampleTable { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    /// Values of the named column in row order.
    pub fn column(&self, name: &str) -> Vec<f64> {
        match self.columns.iter().position(|c| c == name) {
            Some(i) => self.rows.iter().map(|r| r.values[i]).filter(|v| !v.is_nan()).collect(),
            None => Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let dim = self.rows.iter().map(|r| r.point.len()).max().unwrap_or(0);
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["sample".to_string()];
        for j in 0..dim / 2 {
            header.push(format!("x{j}"));
            header.push(format!("y{j}"));
        }
        header.push("s".into());
        header.extend(self.columns.iter().cloned());
        w.write_record(&header).expect("in-memory csv");
        for r in &self.rows {
            let mut rec = vec![r.index.to_string()];
            rec.extend(r.point.iter().map(|x| x.to_string()));
            rec.push(r.s.map(|s| s.to_string()).unwrap_or_default());
            rec.extend(r.values.iter().map(|v| if v.is_nan() { String::new() } else { v.to_string() }));
            w.write_record(&rec).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }
}

/// Writes `report.json` and `samples.csv` into `dir`.
pub fn write_outputs(dir: &Path, report: &RunReport, table: &SampleTable) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), report.to_json())?;
    std::fs::write(dir.join(&report.samples_csv), table.to_csv())
}
