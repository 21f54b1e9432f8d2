//! Coupling and size sweeps, power-law fits on log-log data and the
//! scaling-variable transform used for data collapse.
//!
//! Independent `(N, λ)` points are solved in parallel on the current rayon
//! pool; every solve is single-threaded and deterministic, and results are
//! returned sorted by `(n_atoms, lambda)`, so output never depends on the
//! thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::SolverOptions;
use crate::error::{Error, Result};
use crate::ground::{boson_gram, solve_ground_with, SpinMoments};
use crate::params::{critical_coupling, ModelParams, TruncationSpec};
use crate::qfi::{build_two_atom_state, qfi_atomic, qfi_closed_form, GeneratorAxis};
use crate::thermo::qfi_atomic_limit;

/// Powers of two from 32 to 2048.
pub const DEFAULT_SIZES: [usize; 7] = [32, 64, 128, 256, 512, 1024, 2048];

/// Minimum number of points for a power-law fit.
pub const MIN_FIT_POINTS: usize = 4;

/// Two-atom QFI values of smaller magnitude are eigensolver rounding and
/// are reported as exactly zero.
pub const QFI_ROUNDING_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub n_atoms: usize,
    pub lambda: f64,
    pub f_q_two_atom: f64,
    /// `F_A/N` for [`SweepRecord::axis`].
    pub f_a_scaled: f64,
    pub axis: GeneratorAxis,
    /// `<J_z²>/N²`
    pub jz2_scaled: f64,
    pub jx2_scaled: f64,
    pub jy2_scaled: f64,
    pub n_tr_used: usize,
    pub gap: f64,
    pub degenerate_flag: bool,
}

impl SweepRecord {
    fn is_finite(&self) -> bool {
        [self.lambda, self.f_q_two_atom, self.f_a_scaled, self.jz2_scaled, self.jx2_scaled, self.jy2_scaled, self.gap]
            .iter()
            .all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RecordOptions {
    pub truncation: TruncationSpec,
    pub axis: GeneratorAxis,
    pub solver: SolverOptions,
}

/// Closed-form two-atom QFI with [`QFI_ROUNDING_FLOOR`] applied.
pub fn two_atom_qfi(moments: &SpinMoments) -> Result<f64> {
    let f = qfi_closed_form(&build_two_atom_state(moments)?)?.value;
    Ok(if f.abs() < QFI_ROUNDING_FLOOR { 0.0 } else { f })
}

/// Ground state, moments, two-atom QFI and scaled atomic QFI at one point.
pub fn compute_record(params: &ModelParams, opts: &RecordOptions) -> Result<SweepRecord> {
    let at_point = |e: Error| Error::AtPoint { n_atoms: params.n_atoms, lambda: params.lambda, source: Box::new(e) };
    if params.n_atoms < 2 {
        return Err(at_point(Error::InvalidParameter {
            name: "n_atoms",
            reason: "sweeps need at least two atoms".into(),
        }));
    }
    let state = solve_ground_with(params, &opts.truncation, &opts.solver).map_err(at_point)?;
    let moments = state.moments();
    let f_q = two_atom_qfi(&moments).map_err(at_point)?;
    let rho = boson_gram(&state).map_err(at_point)?;
    let f_a = qfi_atomic(&rho, opts.axis, params.n_atoms).map_err(at_point)?.value;
    let n = params.n_atoms as f64;
    let n2 = n * n;
    let record = SweepRecord {
        n_atoms: params.n_atoms,
        lambda: params.lambda,
        f_q_two_atom: f_q,
        f_a_scaled: f_a / n,
        axis: opts.axis,
        jz2_scaled: moments.jz2 / n2,
        jx2_scaled: moments.jx2 / n2,
        jy2_scaled: moments.jy2 / n2,
        n_tr_used: state.n_tr_used,
        gap: state.gap,
        degenerate_flag: state.degenerate_flag,
    };
    if !record.is_finite() {
        return Err(at_point(Error::InvalidState(format!("non-finite record {record:?}"))));
    }
    Ok(record)
}

/// Records for an arbitrary set of points, sorted by `(n_atoms, lambda)`.
pub fn compute_records(points: &[ModelParams], opts: &RecordOptions) -> Result<Vec<SweepRecord>> {
    let mut records = points.par_iter().map(|p| compute_record(p, opts)).collect::<Result<Vec<_>>>()?;
    sort_records(&mut records);
    Ok(records)
}

pub fn sort_records(records: &mut [SweepRecord]) {
    records.sort_by(|a, b| a.n_atoms.cmp(&b.n_atoms).then(a.lambda.total_cmp(&b.lambda)));
}

/// One record per `λ` of a sorted grid at fixed `N`.
pub fn sweep_lambda(
    template: &ModelParams,
    grid: &[f64],
    n_atoms: usize,
    opts: &RecordOptions,
) -> Result<Vec<SweepRecord>> {
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter { name: "lambda_grid", reason: "must be strictly increasing".into() });
    }
    let points: Vec<ModelParams> = grid.iter().map(|&l| template.with_lambda(l).with_n_atoms(n_atoms)).collect();
    compute_records(&points, opts)
}

/// Records at `λ_c` for each size.
pub fn scan_sizes_at_critical(
    template: &ModelParams,
    sizes: &[usize],
    opts: &RecordOptions,
) -> Result<Vec<SweepRecord>> {
    if sizes.is_empty() {
        return Err(Error::InvalidParameter { name: "sizes", reason: "empty size list".into() });
    }
    let lc = critical_coupling(template);
    let points: Vec<ModelParams> = sizes.iter().map(|&n| template.with_lambda(lc).with_n_atoms(n)).collect();
    compute_records(&points, opts)
}

/// Ordinary least-squares fit of `ln y = intercept + exponent · ln N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub intercept: f64,
    pub stderr_exponent: f64,
    pub r_squared: f64,
    pub n_points: usize,
    pub size_range: (f64, f64),
}

pub fn fit_power_law(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints { required: MIN_FIT_POINTS, got: points.len() });
    }
    for (index, &(n, y)) in points.iter().enumerate() {
        if !(n > 0.0 && y > 0.0 && n.is_finite() && y.is_finite()) {
            return Err(Error::NonPositiveData { index, n, y });
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let count = points.len() as f64;
    let mx = xs.iter().sum::<f64>() / count;
    let my = ys.iter().sum::<f64>() / count;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter { name: "sizes", reason: "all sizes are equal".into() });
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - exponent * x).powi(2)).sum();
    let stderr_exponent = (ssr / (count - 2.0) / sxx).sqrt();
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - ssr / syy).clamp(0.0, 1.0) };
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(ScalingFit { exponent, intercept, stderr_exponent, r_squared, n_points: points.len(), size_range: (lo, hi) })
}

fn fit_by<F: Fn(&SweepRecord) -> f64>(records: &[SweepRecord], y: F) -> Result<ScalingFit> {
    let points: Vec<(f64, f64)> = records.iter().map(|r| (r.n_atoms as f64, y(r))).collect();
    fit_power_law(&points)
}

/// Fit of `F_{Q,N}(λ_c)` against `N`.
pub fn two_atom_fit(records: &[SweepRecord]) -> Result<ScalingFit> {
    fit_by(records, |r| r.f_q_two_atom)
}

/// Fit of `(F_{A,∞} - F_{A,N})/N`, with the limit taken at each record's `λ`.
pub fn atomic_deficit_fit(template: &ModelParams, records: &[SweepRecord]) -> Result<ScalingFit> {
    let limits = records
        .iter()
        .map(|r| qfi_atomic_limit(&template.with_lambda(r.lambda)))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(f64, f64)> =
        records.iter().zip(&limits).map(|(r, lim)| (r.n_atoms as f64, lim - r.f_a_scaled)).collect();
    fit_power_law(&points)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentFits {
    /// `1/4 - <J_z²>/N²`; the raw ratio tends to `1/4`.
    pub jz2_deficit: ScalingFit,
    pub jx2: ScalingFit,
    pub jy2: ScalingFit,
}

pub fn moment_exponent_suite(records: &[SweepRecord]) -> Result<MomentFits> {
    Ok(MomentFits {
        jz2_deficit: fit_by(records, |r| 0.25 - r.jz2_scaled)?,
        jx2: fit_by(records, |r| r.jx2_scaled)?,
        jy2: fit_by(records, |r| r.jy2_scaled)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapsePoint {
    pub n_atoms: usize,
    pub lambda: f64,
    /// `N (λ - λ_c)^{3/2}`
    pub x: f64,
    /// `F_{Q,N} N^{2/3}`
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Collapse {
    pub points: Vec<CollapsePoint>,
    /// Records with `λ <= λ_c`.
    pub skipped: usize,
}

pub fn collapse_transform(records: &[SweepRecord], lambda_c: f64) -> Collapse {
    let mut points = Vec::new();
    let mut skipped = 0;
    for r in records {
        if r.lambda <= lambda_c {
            skipped += 1;
            continue;
        }
        let n = r.n_atoms as f64;
        points.push(CollapsePoint {
            n_atoms: r.n_atoms,
            lambda: r.lambda,
            x: n * (r.lambda - lambda_c).powf(1.5),
            y: r.f_q_two_atom * n.powf(2.0 / 3.0),
        });
    }
    points.sort_by(|a, b| a.n_atoms.cmp(&b.n_atoms).then(a.lambda.total_cmp(&b.lambda)));
    Collapse { points, skipped }
}
