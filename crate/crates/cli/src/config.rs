//! Run configuration: a flat key-value layer read from a JSON file and from
//! flags, merged with flags on top and resolved into a [`RunConfig`].

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use dicke_core::params::linear_grid;
use dicke_core::qfi::GeneratorAxis;
use dicke_core::scaling::{DEFAULT_SIZES, MIN_FIT_POINTS};
use dicke_core::{ModelParams, TruncationSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Environment variable holding the default thread budget.
pub const THREADS_ENV: &str = "DICKE_QFI_THREADS";

const COLLAPSE_SIZES: [usize; 4] = [64, 128, 256, 512];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Ground,
    Sweep,
    Scaling,
    Thermo,
    Collapse,
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::Ground => "ground",
            Self::Sweep => "sweep",
            Self::Scaling => "scaling",
            Self::Thermo => "thermo",
            Self::Collapse => "collapse",
        };
        f.write_str(name)
    }
}

/// One layer of settings. Every key is optional; the same keys are accepted
/// in a config file (snake_case) and as flags (kebab-case).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    /// Cavity frequency [default: 1]
    #[arg(long)]
    pub omega: Option<f64>,
    /// Atomic splitting [default: 1]
    #[arg(long, conflicts_with = "d")]
    pub delta: Option<f64>,
    /// Detuning ratio; sets delta = d * omega
    #[arg(long)]
    pub d: Option<f64>,
    /// Coupling for `ground`
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Number of atoms for `ground` and `sweep`
    #[arg(long = "n", visible_alias = "n-atoms")]
    pub n_atoms: Option<usize>,
    /// Grid start [default: 0; collapse: lambda_c]
    #[arg(long)]
    pub lambda_min: Option<f64>,
    /// Grid end [default: 4 lambda_c; collapse: 1.2 lambda_c]
    #[arg(long)]
    pub lambda_max: Option<f64>,
    /// Grid intervals [default: thermo 200, sweep 40, collapse 20]
    #[arg(long)]
    pub steps: Option<usize>,
    /// Comma-separated sizes [default: scaling 32..2048 in powers of two; collapse 64,128,256,512]
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Initial boson truncation [default: 24]
    #[arg(long)]
    pub n_tr: Option<usize>,
    /// Truncation increment per round [default: 8]
    #[arg(long)]
    pub n_tr_step: Option<usize>,
    /// Truncation cap [default: 120]
    #[arg(long)]
    pub n_tr_max: Option<usize>,
    /// Relative ground-energy change between rounds [default: 1e-9]
    #[arg(long)]
    pub tol_energy: Option<f64>,
    /// Two-atom QFI change between rounds [default: 1e-8]
    #[arg(long)]
    pub tol_obs: Option<f64>,
    /// Collective generator axis for the atomic QFI [default: x]
    #[arg(long)]
    pub axis: Option<GeneratorAxis>,
    /// Output file; a manifest is written next to it [default: stdout]
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Worker threads across independent points
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
}

impl ConfigLayer {
    /// Reads a flat JSON document. Unknown keys and type mismatches are
    /// reported with the key name.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            if path == "." {
                CliError::config(e.inner().to_string())
            } else {
                CliError::config(format!("key `{path}`: {}", e.inner()))
            }
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// `top` wins key by key. `delta` and `d` count as one key.
    pub fn overlay(self, top: ConfigLayer) -> ConfigLayer {
        let (delta, d) = if top.delta.is_some() || top.d.is_some() { (top.delta, top.d) } else { (self.delta, self.d) };
        ConfigLayer {
            omega: top.omega.or(self.omega),
            delta,
            d,
            lambda: top.lambda.or(self.lambda),
            n_atoms: top.n_atoms.or(self.n_atoms),
            lambda_min: top.lambda_min.or(self.lambda_min),
            lambda_max: top.lambda_max.or(self.lambda_max),
            steps: top.steps.or(self.steps),
            sizes: top.sizes.or(self.sizes),
            n_tr: top.n_tr.or(self.n_tr),
            n_tr_step: top.n_tr_step.or(self.n_tr_step),
            n_tr_max: top.n_tr_max.or(self.n_tr_max),
            tol_energy: top.tol_energy.or(self.tol_energy),
            tol_obs: top.tol_obs.or(self.tol_obs),
            axis: top.axis.or(self.axis),
            output: top.output.or(self.output),
            threads: top.threads.or(self.threads),
        }
    }
}

/// Fully resolved and validated settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandKind,
    pub omega: f64,
    pub delta: f64,
    pub lambda: Option<f64>,
    pub n_atoms: Option<usize>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub steps: usize,
    pub sizes: Vec<usize>,
    pub truncation: TruncationSpec,
    pub axis: GeneratorAxis,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
}

/// Merges `file` and `flags` (flags win), fills defaults and validates.
pub fn parse_config(command: CommandKind, file: Option<&Path>, flags: ConfigLayer) -> Result<RunConfig, CliError> {
    let base = match file {
        Some(path) => ConfigLayer::from_file(path)?,
        None => ConfigLayer::default(),
    };
    resolve(command, base.overlay(flags))
}

pub fn resolve(command: CommandKind, layer: ConfigLayer) -> Result<RunConfig, CliError> {
    if layer.delta.is_some() && layer.d.is_some() {
        return Err(CliError::config("set either `delta` or `d`, not both"));
    }
    let omega = layer.omega.unwrap_or(1.0);
    let delta = match (layer.delta, layer.d) {
        (Some(delta), _) => delta,
        (None, Some(d)) => d * omega,
        (None, None) => 1.0,
    };
    // Validates omega and delta before lambda_c is used for defaults.
    let probe = ModelParams::new(omega, delta, 0.0, 1).map_err(invalid)?;
    let lc = probe.critical_coupling();

    let defaults = TruncationSpec::default();
    let truncation = TruncationSpec {
        n_tr: layer.n_tr.unwrap_or(defaults.n_tr),
        n_tr_step: layer.n_tr_step.unwrap_or(defaults.n_tr_step),
        n_tr_max: layer.n_tr_max.unwrap_or(defaults.n_tr_max.max(layer.n_tr.unwrap_or(0))),
        tol_energy: layer.tol_energy.unwrap_or(defaults.tol_energy),
        tol_obs: layer.tol_obs.unwrap_or(defaults.tol_obs),
    };
    let collapse = command == CommandKind::Collapse;
    let config = RunConfig {
        command,
        omega,
        delta,
        lambda: layer.lambda,
        n_atoms: layer.n_atoms,
        lambda_min: layer.lambda_min.unwrap_or(if collapse { lc } else { 0.0 }),
        lambda_max: layer.lambda_max.unwrap_or(if collapse { 1.2 * lc } else { 4.0 * lc }),
        steps: layer.steps.unwrap_or(match command {
            CommandKind::Sweep => 40,
            CommandKind::Collapse => 20,
            _ => 200,
        }),
        sizes: layer.sizes.unwrap_or_else(|| if collapse { COLLAPSE_SIZES.to_vec() } else { DEFAULT_SIZES.to_vec() }),
        truncation,
        axis: layer.axis.unwrap_or_default(),
        output: layer.output,
        threads: layer.threads,
    };
    config.validate()?;
    Ok(config)
}

fn invalid(e: dicke_core::Error) -> CliError {
    CliError::config(e.to_string())
}

fn required<T: Copy>(value: Option<T>, key: &str, command: CommandKind) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::config(format!("missing required key `{key}` for `{command}`")))
}

impl RunConfig {
    pub fn model(&self, lambda: f64, n_atoms: usize) -> Result<ModelParams, CliError> {
        ModelParams::new(self.omega, self.delta, lambda, n_atoms).map_err(invalid)
    }

    pub fn critical_coupling(&self) -> f64 {
        (self.omega * self.delta).sqrt() / 2.0
    }

    pub fn lambda_grid(&self) -> Vec<f64> {
        linear_grid(self.lambda_min, self.lambda_max, self.steps)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.model(0.0, 1)?;
        self.truncation.validate().map_err(invalid)?;
        if self.threads == Some(0) {
            return Err(CliError::config("`threads` must be >= 1"));
        }
        let uses_grid = !matches!(self.command, CommandKind::Ground | CommandKind::Scaling);
        if uses_grid {
            if self.steps == 0 {
                return Err(CliError::config("`steps` must be >= 1"));
            }
            if !(self.lambda_min >= 0.0 && self.lambda_max > self.lambda_min && self.lambda_max.is_finite()) {
                return Err(CliError::config(format!(
                    "need 0 <= `lambda_min` < `lambda_max`, got {} and {}",
                    self.lambda_min, self.lambda_max
                )));
            }
        }
        match self.command {
            CommandKind::Ground => {
                let lambda = required(self.lambda, "lambda", self.command)?;
                let n = required(self.n_atoms, "n_atoms", self.command)?;
                self.model(lambda, n)?;
            }
            CommandKind::Sweep => {
                let n = required(self.n_atoms, "n_atoms", self.command)?;
                self.model(0.0, n)?;
                if n < 2 {
                    return Err(CliError::config("`n_atoms` must be >= 2 for the two-atom QFI"));
                }
            }
            CommandKind::Scaling | CommandKind::Collapse => {
                if let Some(bad) = self.sizes.iter().find(|&&n| n < 2) {
                    return Err(CliError::config(format!("`sizes` entries must be >= 2, got {bad}")));
                }
                let mut sorted = self.sizes.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != self.sizes.len() {
                    return Err(CliError::config("`sizes` contains duplicates"));
                }
                if self.command == CommandKind::Scaling && self.sizes.len() < MIN_FIT_POINTS {
                    return Err(CliError::config(format!(
                        "`sizes` needs at least {MIN_FIT_POINTS} entries for a fit, got {}",
                        self.sizes.len()
                    )));
                }
            }
            CommandKind::Thermo => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(f: impl FnOnce(&mut ConfigLayer)) -> ConfigLayer {
        let mut layer = ConfigLayer::default();
        f(&mut layer);
        layer
    }

    #[test]
    fn ground_flags_resolve() {
        let layer = flags(|l| {
            l.omega = Some(1.0);
            l.delta = Some(1.0);
            l.lambda = Some(0.6);
            l.n_atoms = Some(64);
        });
        let cfg = resolve(CommandKind::Ground, layer).unwrap();
        assert_eq!((cfg.lambda, cfg.n_atoms), (Some(0.6), Some(64)));
        assert_eq!(cfg.truncation, TruncationSpec::default());
        assert_eq!(cfg.axis, GeneratorAxis::X);
    }

    #[test]
    fn zero_atoms_names_the_key() {
        let layer = flags(|l| {
            l.lambda = Some(0.6);
            l.n_atoms = Some(0);
        });
        let msg = resolve(CommandKind::Ground, layer).unwrap_err().to_string();
        assert!(msg.contains("n_atoms"), "{msg}");
    }

    #[test]
    fn flags_override_file() {
        let file = ConfigLayer::from_json(r#"{"lambda": 0.5, "n_atoms": 8, "d": 0.5}"#).unwrap();
        let cfg = resolve(CommandKind::Ground, file.clone().overlay(flags(|l| l.lambda = Some(0.7)))).unwrap();
        assert_eq!(cfg.lambda, Some(0.7));
        assert_eq!(cfg.delta, 0.5);
        let cfg = resolve(CommandKind::Ground, file.overlay(flags(|l| l.delta = Some(2.0)))).unwrap();
        assert_eq!(cfg.delta, 2.0);
    }

    #[test]
    fn file_errors_name_the_key() {
        let msg = ConfigLayer::from_json(r#"{"lambda": 0.5, "lamda": 1}"#).unwrap_err().to_string();
        assert!(msg.contains("lamda"), "{msg}");
        let msg = ConfigLayer::from_json(r#"{"lambda": "big"}"#).unwrap_err().to_string();
        assert!(msg.contains("lambda"), "{msg}");
        let msg = resolve(CommandKind::Ground, flags(|l| l.n_atoms = Some(4))).unwrap_err().to_string();
        assert!(msg.contains("lambda"), "{msg}");
        let msg = resolve(CommandKind::Sweep, ConfigLayer::default()).unwrap_err().to_string();
        assert!(msg.contains("n_atoms"), "{msg}");
    }

    #[test]
    fn command_defaults() {
        let cfg = resolve(CommandKind::Thermo, flags(|l| l.d = Some(1.0))).unwrap();
        assert_eq!((cfg.lambda_min, cfg.lambda_max, cfg.steps), (0.0, 2.0, 200));
        let cfg = resolve(CommandKind::Collapse, ConfigLayer::default()).unwrap();
        assert_eq!(cfg.lambda_min, 0.5);
        assert_eq!(cfg.sizes, COLLAPSE_SIZES.to_vec());
        let cfg = resolve(CommandKind::Scaling, ConfigLayer::default()).unwrap();
        assert_eq!(cfg.sizes, DEFAULT_SIZES.to_vec());
        assert!(resolve(CommandKind::Scaling, flags(|l| l.sizes = Some(vec![32, 64, 128]))).is_err());
    }

    #[test]
    fn resolved_config_round_trips_through_json() {
        let cfg = resolve(CommandKind::Collapse, flags(|l| l.output = Some("out.csv".into()))).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
    }
}
