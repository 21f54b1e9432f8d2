use std::io::Write as _;
use std::time::Instant;

use dicke_core::eigen::SolverOptions;
use dicke_core::ground::{boson_gram, solve_ground_with, Parity};
use dicke_core::qfi::{qfi_atomic, GeneratorAxis};
use dicke_core::scaling::{
    atomic_deficit_fit, collapse_transform, compute_records, moment_exponent_suite, scan_sizes_at_critical,
    sweep_lambda, two_atom_fit, two_atom_qfi, RecordOptions, ScalingFit,
};
use dicke_core::thermo::thermo_curve;
use serde::Serialize;
use serde_json::json;

use crate::config::{CommandKind, RunConfig};
use crate::error::CliError;
use crate::output::{collapse_csv, manifest_path, records_csv, thermo_csv, write_file, OutputManifest, StageTiming};

/// Everything a command produces before anything is written.
#[derive(Debug, Clone)]
pub struct RunOutput {
    /// CSV, or JSON for `ground`.
    pub body: String,
    /// Human-readable lines for stderr.
    pub summary: Vec<String>,
    pub results: serde_json::Value,
    pub stages: Vec<StageTiming>,
}

#[derive(Debug, Clone, Serialize)]
struct MomentsReport {
    jz: f64,
    jz2: f64,
    jx2: f64,
    jy2: f64,
    jp_re: f64,
    jp_im: f64,
    jp2_re: f64,
    jp2_im: f64,
}

#[derive(Debug, Clone, Serialize)]
struct RoundReport {
    n_tr: usize,
    energy: f64,
    /// Relative change from the previous round; absent for the first.
    delta_energy: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct GroundReport {
    n_atoms: usize,
    omega: f64,
    delta: f64,
    lambda: f64,
    energy: f64,
    gap: f64,
    residual: f64,
    n_tr_used: usize,
    degenerate: bool,
    parity: &'static str,
    moments: MomentsReport,
    /// Absent for a single atom.
    f_q_two_atom: Option<f64>,
    axis: GeneratorAxis,
    f_a: f64,
    f_a_scaled: f64,
    convergence: Vec<RoundReport>,
}

fn record_options(config: &RunConfig) -> RecordOptions {
    RecordOptions { truncation: config.truncation, axis: config.axis, solver: SolverOptions::default() }
}

fn stage(name: &str, start: Instant) -> StageTiming {
    StageTiming { name: name.to_string(), seconds: start.elapsed().as_secs_f64() }
}

fn fit_line(label: &str, fit: &Result<ScalingFit, dicke_core::Error>) -> String {
    match fit {
        Ok(f) => format!(
            "{label}: exponent {:.4} ± {:.4} (r² {:.5}, {} points, N {}..{})",
            f.exponent, f.stderr_exponent, f.r_squared, f.n_points, f.size_range.0, f.size_range.1
        ),
        Err(e) => format!("{label}: no fit ({e})"),
    }
}

fn fit_json(fit: &Result<ScalingFit, dicke_core::Error>) -> serde_json::Value {
    match fit {
        Ok(f) => serde_json::to_value(f).expect("fit serializes"),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

pub fn run_command(config: &RunConfig) -> Result<RunOutput, CliError> {
    config.validate()?;
    let start = Instant::now();
    let opts = record_options(config);
    let output = match config.command {
        CommandKind::Ground => {
            let lambda = config.lambda.expect("validated");
            let n = config.n_atoms.expect("validated");
            let params = config.model(lambda, n)?;
            let at = |e: dicke_core::Error| -> CliError {
                dicke_core::Error::AtPoint { n_atoms: n, lambda, source: Box::new(e) }.into()
            };
            let state = solve_ground_with(&params, &config.truncation, &opts.solver).map_err(at)?;
            let m = state.moments();
            let f_q = if n >= 2 { Some(two_atom_qfi(&m).map_err(at)?) } else { None };
            let rho = boson_gram(&state).map_err(at)?;
            let f_a = qfi_atomic(&rho, config.axis, n).map_err(at)?.value;
            let report = GroundReport {
                n_atoms: n,
                omega: config.omega,
                delta: config.delta,
                lambda,
                energy: state.energy,
                gap: state.gap,
                residual: state.residual,
                n_tr_used: state.n_tr_used,
                degenerate: state.degenerate_flag,
                parity: match state.parity {
                    Parity::Intrinsic => "intrinsic",
                    Parity::Resolved => "resolved",
                    Parity::Unresolved => "unresolved",
                },
                moments: MomentsReport {
                    jz: m.jz,
                    jz2: m.jz2,
                    jx2: m.jx2,
                    jy2: m.jy2,
                    jp_re: m.jp.re,
                    jp_im: m.jp.im,
                    jp2_re: m.jp2.re,
                    jp2_im: m.jp2.im,
                },
                f_q_two_atom: f_q,
                axis: config.axis,
                f_a,
                f_a_scaled: f_a / n as f64,
                convergence: state
                    .convergence
                    .iter()
                    .map(|r| RoundReport {
                        n_tr: r.n_tr,
                        energy: r.energy,
                        delta_energy: r.delta_energy.is_finite().then_some(r.delta_energy),
                    })
                    .collect(),
            };
            let mut body = serde_json::to_string_pretty(&report).expect("report serializes");
            body.push('\n');
            let mut summary = Vec::new();
            if state.parity == Parity::Unresolved {
                summary.push("warning: parity restoration did not converge".to_string());
            }
            RunOutput { body, summary, results: json!({}), stages: vec![stage("solve", start)] }
        }
        CommandKind::Sweep => {
            let n = config.n_atoms.expect("validated");
            let template = config.model(0.0, n)?;
            let records = sweep_lambda(&template, &config.lambda_grid(), n, &opts)?;
            let body = records_csv(&records);
            RunOutput { body, summary: Vec::new(), results: json!({ "records": records.len() }), stages: vec![stage("sweep", start)] }
        }
        CommandKind::Scaling => {
            let template = config.model(0.0, 2)?;
            let records = scan_sizes_at_critical(&template, &config.sizes, &opts)?;
            let solve = stage("scan", start);
            let fit_start = Instant::now();
            let two_atom = two_atom_fit(&records);
            let atomic = atomic_deficit_fit(&template, &records);
            let moments = moment_exponent_suite(&records);
            let mut summary = vec![
                format!("critical coupling {}", config.critical_coupling()),
                fit_line("F_Q two-atom", &two_atom),
                fit_line("(F_A,inf - F_A)/N", &atomic),
            ];
            let moment_json = match &moments {
                Ok(m) => {
                    summary.push(fit_line("<Jx^2>/N^2", &Ok(m.jx2)));
                    summary.push(fit_line("<Jy^2>/N^2", &Ok(m.jy2)));
                    summary.push(fit_line("1/4 - <Jz^2>/N^2", &Ok(m.jz2_deficit)));
                    serde_json::to_value(m).expect("fits serialize")
                }
                Err(e) => {
                    summary.push(format!("moment fits: no fit ({e})"));
                    json!({ "error": e.to_string() })
                }
            };
            let results = json!({
                "two_atom": fit_json(&two_atom),
                "atomic_deficit": fit_json(&atomic),
                "moments": moment_json,
            });
            RunOutput { body: records_csv(&records), summary, results, stages: vec![solve, stage("fit", fit_start)] }
        }
        CommandKind::Thermo => {
            let template = config.model(0.0, 1)?;
            let rows = thermo_curve(&template, config.lambda_min, config.lambda_max, config.steps)?;
            RunOutput {
                body: thermo_csv(&rows),
                summary: Vec::new(),
                results: json!({ "rows": rows.len() }),
                stages: vec![stage("thermo", start)],
            }
        }
        CommandKind::Collapse => {
            let grid = config.lambda_grid();
            let mut points = Vec::with_capacity(grid.len() * config.sizes.len());
            for &n in &config.sizes {
                for &lambda in &grid {
                    points.push(config.model(lambda, n)?);
                }
            }
            let lc = config.critical_coupling();
            // Points at or below the critical coupling are never solved.
            let (above, below): (Vec<_>, Vec<_>) = points.into_iter().partition(|p| p.lambda > lc);
            let records = compute_records(&above, &opts)?;
            let collapse = collapse_transform(&records, lc);
            let skipped = collapse.skipped + below.len();
            RunOutput {
                body: collapse_csv(&collapse.points),
                summary: vec![format!("skipped {skipped} points with lambda <= {lc}")],
                results: json!({ "points": collapse.points.len(), "skipped": skipped }),
                stages: vec![stage("collapse", start)],
            }
        }
    };
    Ok(output)
}

/// Runs `config` and writes its artifacts: the body to `config.output`
/// (with a manifest beside it) or to stdout, the summary to stderr.
pub fn execute(config: &RunConfig) -> Result<RunOutput, CliError> {
    let mut output = run_command(config)?;
    match &config.output {
        Some(path) => {
            let start = Instant::now();
            write_file(path, &output.body)?;
            output.stages.push(stage("write", start));
            let manifest = OutputManifest::new(config, output.stages.clone(), output.results.clone());
            manifest.write(&manifest_path(path))?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(output.body.as_bytes())
                .and_then(|_| lock.flush())
                .map_err(|e| CliError::io("<stdout>", e))?;
        }
    }
    for line in &output.summary {
        eprintln!("{line}");
    }
    Ok(output)
}
