//! Experiment records and their on-disk layout.
//!
//! An output directory holds
//!
//! * `config.json`, the configuration echo;
//! * `series.csv`, long format `run_id,t,name,value`;
//! * `slopes.json`, fitted slopes, gates, run summaries and truncation notes;
//! * one CSV per table (`spectrum.csv`, `decay.csv`, `selftest.csv`);
//! * `snapshots/<name>.bin` in the format of [`super::snapshot`].

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::snapshot::write_snapshot;
use super::sweep::{RunSummary, SeriesPoint};
use crate::error::Result;
use crate::fit::SlopeFit;
use crate::spectral::SpectralField;

/// A numerical acceptance check `lower ≤ value ≤ upper`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub passed: bool,
}

impl Gate {
    pub fn within(name: impl Into<String>, value: f64, lower: Option<f64>, upper: Option<f64>) -> Self {
        let passed = value.is_finite() && lower.map_or(true, |l| value >= l) && upper.map_or(true, |u| value <= u);
        Self { name: name.into(), value, lower, upper, passed }
    }

    pub fn at_least(name: impl Into<String>, value: f64, lower: f64) -> Self {
        Self::within(name, value, Some(lower), None)
    }

    pub fn at_most(name: impl Into<String>, value: f64, upper: f64) -> Self {
        Self::within(name, value, None, Some(upper))
    }

    /// `|value − target| ≤ tol`.
    pub fn near(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Self::within(name, value, Some(target - tol), Some(target + tol))
    }

    /// A check with no numeric content.
    pub fn flag(name: impl Into<String>, passed: bool) -> Self {
        Self { name: name.into(), value: if passed { 1.0 } else { 0.0 }, lower: Some(1.0), upper: None, passed }
    }

    pub fn describe(&self) -> String {
        let bound = match (self.lower, self.upper) {
            (Some(l), Some(u)) => format!("in [{l}, {u}]"),
            (Some(l), None) => format!("≥ {l}"),
            (None, Some(u)) => format!("≤ {u}"),
            (None, None) => String::new(),
        };
        let status = if self.passed { "PASS" } else { "FAIL" };
        format!("{status} {}: {:.6e} {bound}", self.name, self.value)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeRecord {
    pub name: String,
    pub fit: SlopeFit,
}

/// Resolvable block range, recorded so Besov numbers can be interpreted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationNote {
    pub j_min: i32,
    pub j_max: i32,
    /// `(ε, J_ε)` pairs.
    pub thresholds: Vec<(f64, i32)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub file: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: &str, header: &[&str]) -> Self {
        Self { file: file.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub config: ExperimentConfig,
    pub software_version: String,
    pub truncation: Option<TruncationNote>,
    /// How `∂_t` of the error is approximated.
    pub time_derivative: Option<String>,
    /// Common amplitude applied to the synthesised data.
    pub data_amplitude: Option<f64>,
    pub runs: Vec<RunSummary>,
    pub slopes: Vec<SlopeRecord>,
    pub gates: Vec<Gate>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub series: Vec<SeriesPoint>,
    #[serde(skip)]
    pub tables: Vec<Table>,
    #[serde(skip)]
    pub snapshots: Vec<(String, SpectralField)>,
}

/// Everything written to `slopes.json`.
#[derive(Serialize)]
struct SlopesFile<'a> {
    kind: &'a str,
    software_version: &'a str,
    passed: bool,
    truncation: &'a Option<TruncationNote>,
    time_derivative: &'a Option<String>,
    data_amplitude: Option<f64>,
    slopes: &'a [SlopeRecord],
    gates: &'a [Gate],
    runs: &'a [RunSummary],
    notes: &'a [String],
}

impl ExperimentRecord {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            config: config.clone(),
            software_version: env!("CARGO_PKG_VERSION").to_string(),
            truncation: None,
            time_derivative: None,
            data_amplitude: None,
            runs: Vec::new(),
            slopes: Vec::new(),
            gates: Vec::new(),
            notes: Vec::new(),
            series: Vec::new(),
            tables: Vec::new(),
            snapshots: Vec::new(),
        }
    }

    /// True when every gate passed.
    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }

    pub fn slope(&self, name: &str) -> Option<&SlopeFit> {
        self.slopes.iter().find(|s| s.name == name).map(|s| &s.fit)
    }

    pub fn gate(&self, name: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.name == name)
    }

    pub fn series_csv(&self) -> String {
        let mut out = String::from("run_id,t,name,value\n");
        for p in &self.series {
            let _ = writeln!(out, "{},{},{},{}", p.run_id, p.t, p.name, p.value);
        }
        out
    }

    pub fn slopes_json(&self) -> String {
        let file = SlopesFile {
            kind: self.config.kind.name(),
            software_version: &self.software_version,
            passed: self.passed(),
            truncation: &self.truncation,
            time_derivative: &self.time_derivative,
            data_amplitude: self.data_amplitude,
            slopes: &self.slopes,
            gates: &self.gates,
            runs: &self.runs,
            notes: &self.notes,
        };
        serde_json::to_string_pretty(&file).expect("record serialises")
    }

    /// Writes the record into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("config.json"), self.config.to_json())?;
        fs::write(dir.join("series.csv"), self.series_csv())?;
        fs::write(dir.join("slopes.json"), self.slopes_json())?;
        for t in &self.tables {
            fs::write(dir.join(&t.file), t.to_csv())?;
        }
        if !self.snapshots.is_empty() {
            let snap = dir.join("snapshots");
            fs::create_dir_all(&snap)?;
            for (name, field) in &self.snapshots {
                let mut file = fs::File::create(snap.join(format!("{name}.bin")))?;
                write_snapshot(&mut file, field)?;
            }
        }
        Ok(())
    }

    /// One line per gate.
    pub fn report(&self) -> String {
        let mut out = String::new();
        for g in &self.gates {
            let _ = writeln!(out, "{}", g.describe());
        }
        out
    }
}
