//! CSV and manifest emission. Floats are written in shortest round-trip
//! form, rows end in `\n`, and files are written once, after aggregation.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use dicke_core::ground::{DEGENERACY_GAP, PARITY_TOLERANCE, PSD_TOLERANCE};
use dicke_core::eigen::SolverOptions;
use dicke_core::qfi::SPECTRUM_FLOOR;
use dicke_core::scaling::{sort_records, CollapsePoint, SweepRecord, QFI_ROUNDING_FLOOR};
use dicke_core::thermo::ThermoRow;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;

pub const RECORD_HEADER: &str =
    "n_atoms,lambda,f_q_two_atom,f_a_scaled,jz2_scaled,jx2_scaled,jy2_scaled,gap,n_tr_used,degenerate";

pub const THERMO_HEADER: &str =
    "lambda,mu,beta2,alpha,energy_density,eps_plus,eps_minus,f_q_limit,f_a_limit_scaled,f_a_expansion";

pub const COLLAPSE_HEADER: &str = "n_atoms,lambda,x,y";

pub const TOOL_NAME: &str = "dicke-qfi";

pub const GENERATOR_NOTE: &str = "atomic QFI uses the collective spin along the selected axis; \
     the default x is the coupling axis, the only one whose scaled QFI approaches the critical \
     limit sqrt(omega^2 + delta^2)/delta";

/// Shortest decimal that parses back to the same `f64`.
pub fn float(x: f64) -> String {
    format!("{x:?}")
}

fn join_floats(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&float(*v));
    }
}

/// Sweep records as CSV, sorted by `(n_atoms, lambda)`.
pub fn records_csv(records: &[SweepRecord]) -> String {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut out = String::from(RECORD_HEADER);
    out.push('\n');
    for r in &sorted {
        write!(out, "{},", r.n_atoms).unwrap();
        join_floats(&mut out, &[r.lambda, r.f_q_two_atom, r.f_a_scaled, r.jz2_scaled, r.jx2_scaled, r.jy2_scaled, r.gap]);
        writeln!(out, ",{},{}", r.n_tr_used, u8::from(r.degenerate_flag)).unwrap();
    }
    out
}

pub fn thermo_csv(rows: &[ThermoRow]) -> String {
    let mut out = String::from(THERMO_HEADER);
    out.push('\n');
    for r in rows {
        join_floats(
            &mut out,
            &[
                r.lambda,
                r.mu,
                r.beta2,
                r.alpha,
                r.energy_density,
                r.eps_plus,
                r.eps_minus,
                r.f_q_limit,
                r.f_a_limit_scaled,
                r.f_a_expansion,
            ],
        );
        out.push('\n');
    }
    out
}

pub fn collapse_csv(points: &[CollapsePoint]) -> String {
    let mut out = String::from(COLLAPSE_HEADER);
    out.push('\n');
    for p in points {
        write!(out, "{},", p.n_atoms).unwrap();
        join_floats(&mut out, &[p.lambda, p.x, p.y]);
        out.push('\n');
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn emit_csv(records: &[SweepRecord], path: &Path) -> Result<(), CliError> {
    write_file(path, &records_csv(records))
}

/// `<output>.manifest.json`
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub solver_residual: f64,
    pub dense_threshold: usize,
    pub degeneracy_gap: f64,
    pub parity_tolerance: f64,
    pub psd_tolerance: f64,
    pub spectrum_floor: f64,
    pub qfi_rounding_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let solver = SolverOptions::default();
        Self {
            solver_residual: solver.tol,
            dense_threshold: solver.dense_threshold,
            degeneracy_gap: DEGENERACY_GAP,
            parity_tolerance: PARITY_TOLERANCE,
            psd_tolerance: PSD_TOLERANCE,
            spectrum_floor: SPECTRUM_FLOOR,
            qfi_rounding_floor: QFI_ROUNDING_FLOOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub name: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputManifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub tolerances: Tolerances,
    pub generator_note: String,
    pub stages: Vec<StageTiming>,
    /// Command-specific summary (fits, skipped points).
    pub results: serde_json::Value,
}

impl OutputManifest {
    pub fn new(config: &RunConfig, stages: Vec<StageTiming>, results: serde_json::Value) -> Self {
        Self {
            tool: TOOL_NAME.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            tolerances: Tolerances::default(),
            generator_note: GENERATOR_NOTE.to_string(),
            stages,
            results,
        }
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de)
            .map_err(|e| CliError::config(format!("{}: key `{}`: {}", path.display(), e.path(), e.inner())))
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        write_file(path, &text)
    }
}
