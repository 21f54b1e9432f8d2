//! Ground state with adaptive truncation, parity restoration, reduced atomic
//! state and collective-spin moments.
//!
//! States are stored in the rotated coherent basis of [`crate::hamiltonian`],
//! flat index `(m + j)(n_tr + 1) + k`. Moments are always reported for the
//! original-frame operators.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::eigen::{dense_lowest, fix_sign, lowest_eigenpair, LowestPairs, SolverOptions};
use crate::error::{Error, Result};
use crate::hamiltonian::{assemble_coherent_at, assemble_hamiltonian_fock, BlockTridiagonal};
use crate::overlap::overlap_matrix;
use crate::params::{ModelParams, TruncationSpec};
use crate::qfi::qfi_spin_form;
use crate::spin::{spin_ladder_matrices, Banded, OriginalFrame};

/// Gap below which the two lowest states count as a parity doublet.
pub const DEGENERACY_GAP: f64 = 1e-8;
/// Target for `|<J_+>|` after parity restoration.
pub const PARITY_TOLERANCE: f64 = 1e-6;
/// Beyond this, restoration is reported as failed.
pub const PARITY_FAILURE: f64 = 1e-4;
/// Gram eigenvalues in `[-PSD_TOLERANCE, 0)` are clamped to zero.
pub const PSD_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// The solver returned a parity eigenstate.
    Intrinsic,
    /// Restored by mixing the two lowest states.
    Resolved,
    /// No mixture reached `|<J_+>| < PARITY_FAILURE`.
    Unresolved,
}

/// One round of the adaptive truncation loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRound {
    pub n_tr: usize,
    pub energy: f64,
    /// Two-atom QFI; `NaN` for a single atom.
    pub f_q: f64,
    pub delta_energy: f64,
    pub delta_f_q: f64,
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub params: ModelParams,
    pub n_tr_used: usize,
    coeffs: Vec<f64>,
    pub energy: f64,
    /// `E_1 - E_0`.
    pub gap: f64,
    pub residual: f64,
    pub degenerate_flag: bool,
    pub parity: Parity,
    pub convergence: Vec<ConvergenceRound>,
    excited: Vec<f64>,
}

impl GroundState {
    pub fn block_size(&self) -> usize {
        self.n_tr_used + 1
    }

    /// Flat coefficient vector.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficients `c[m][k]` of spin index `m + j`.
    pub fn block(&self, spin_index: usize) -> &[f64] {
        let bs = self.block_size();
        &self.coeffs[spin_index * bs..(spin_index + 1) * bs]
    }

    /// `c[m][k]` as an `(N + 1) × (n_tr + 1)` matrix.
    pub fn coeff_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.params.n_atoms + 1, self.block_size(), &self.coeffs)
    }

    pub fn first_excited(&self) -> &[f64] {
        &self.excited
    }

    /// Band of the reduced atomic state sufficient for spin moments.
    pub fn gram_band(&self) -> Banded<f64> {
        gram_band(self, 2)
    }

    pub fn moments(&self) -> SpinMoments {
        spin_moments(&self.gram_band(), self.params.n_atoms)
    }
}

/// Ground state at fixed or adaptively grown truncation.
///
/// A truncation with `n_tr == n_tr_max` is a single fixed round. Otherwise `n_tr`
/// grows by `n_tr_step` until the relative energy change and the two-atom QFI
/// change both fall below their tolerances.
pub fn solve_ground(params: &ModelParams, trunc: &TruncationSpec) -> Result<GroundState> {
    solve_ground_with(params, trunc, &SolverOptions::default())
}

pub fn solve_ground_with(
    params: &ModelParams,
    trunc: &TruncationSpec,
    opts: &SolverOptions,
) -> Result<GroundState> {
    params.validate()?;
    trunc.validate()?;
    let mut rounds: Vec<ConvergenceRound> = Vec::new();
    let mut n_tr = trunc.n_tr;
    loop {
        let h = assemble_coherent_at(params, n_tr)?;
        let pairs = lowest_eigenpair(&h, opts)?;
        let mut state = from_pairs(params, n_tr, pairs);
        state = resolve_quasi_degeneracy(state, &h);
        let f_q = if params.n_atoms >= 2 { qfi_spin_form(&state.moments())?.value } else { f64::NAN };
        let (delta_energy, delta_f_q) = match rounds.last() {
            Some(prev) => (
                (state.energy - prev.energy).abs() / state.energy.abs().max(1.0),
                (f_q - prev.f_q).abs(),
            ),
            None => (f64::INFINITY, f64::INFINITY),
        };
        rounds.push(ConvergenceRound { n_tr, energy: state.energy, f_q, delta_energy, delta_f_q });

        let obs_ok = params.n_atoms < 2 || delta_f_q < trunc.tol_obs;
        let fixed = trunc.n_tr == trunc.n_tr_max;
        if fixed || (delta_energy < trunc.tol_energy && obs_ok) {
            state.convergence = rounds;
            return Ok(state);
        }
        if n_tr >= trunc.n_tr_max {
            return Err(Error::TruncationExhausted {
                n_tr_max: trunc.n_tr_max,
                trace: rounds.iter().skip(1).map(|r| r.delta_energy).collect(),
            });
        }
        n_tr = (n_tr + trunc.n_tr_step).min(trunc.n_tr_max);
    }
}

fn from_pairs(params: &ModelParams, n_tr: usize, pairs: LowestPairs) -> GroundState {
    let gap = pairs.gap();
    let [v0, v1] = pairs.vectors;
    GroundState {
        params: *params,
        n_tr_used: n_tr,
        coeffs: v0,
        energy: pairs.energies[0],
        gap,
        residual: pairs.residuals[0],
        degenerate_flag: gap < DEGENERACY_GAP,
        parity: Parity::Intrinsic,
        convergence: Vec::new(),
        excited: v1,
    }
}

/// `<J_z'>` of a coefficient vector; for real states this is the original-frame `<J_+>`.
fn coupling_axis_mean(v: &[f64], n_atoms: usize, bs: usize) -> f64 {
    coupling_axis_cross(v, v, n_atoms, bs)
}

fn coupling_axis_cross(a: &[f64], b: &[f64], n_atoms: usize, bs: usize) -> f64 {
    let j = n_atoms as f64 / 2.0;
    let mut acc = 0.0;
    for s in 0..=n_atoms {
        let m = s as f64 - j;
        let blk = s * bs..(s + 1) * bs;
        acc += m * a[blk.clone()].iter().zip(&b[blk]).map(|(x, y)| x * y).sum::<f64>();
    }
    acc
}

/// `<Π>` for `Π = exp(iπ(a†a + J_z + j))`, which in the coherent basis maps
/// `c[m][k]` to `(-1)^k c[-m][k]`.
pub fn parity_expectation(v: &[f64], n_atoms: usize, bs: usize) -> f64 {
    let mut acc = 0.0;
    for s in 0..=n_atoms {
        let a = &v[s * bs..(s + 1) * bs];
        let b = &v[(n_atoms - s) * bs..(n_atoms - s + 1) * bs];
        for k in 0..bs {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * a[k] * b[k];
        }
    }
    acc
}

/// Restores the parity symmetry broken by a quasi-degenerate doublet.
///
/// Real states have `<J_+> = <J_z'>`, so the mixture `cos t v0 + sin t v1`
/// with zero mean is a null vector of a 2×2 quadratic form. Of the two null
/// directions the even one (see [`parity_expectation`]) is kept, which is the
/// branch connected to the uncoupled ground state; energy breaks remaining ties. States whose `<J_+>` is
/// already below [`PARITY_TOLERANCE`] are returned unchanged. Mixing is also
/// applied to non-degenerate states whose `<J_+>` exceeds the tolerance,
/// where the solver residual has leaked some of the partner state in.
pub fn resolve_quasi_degeneracy(mut state: GroundState, h: &BlockTridiagonal) -> GroundState {
    let n = state.params.n_atoms;
    let bs = state.block_size();
    let jp0 = coupling_axis_mean(&state.coeffs, n, bs);
    if jp0.abs() < PARITY_TOLERANCE || state.excited.len() != state.coeffs.len() {
        return state;
    }
    let v0 = &state.coeffs;
    let v1 = &state.excited;
    let a = jp0;
    let b = coupling_axis_cross(v0, v1, n, bs);
    let c = coupling_axis_mean(v1, n, bs);
    let form = nalgebra::Matrix2::new(a, b, b, c).symmetric_eigen();
    let (lo, hi) = if form.eigenvalues[0] <= form.eigenvalues[1] { (0, 1) } else { (1, 0) };
    let (mu_lo, mu_hi) = (form.eigenvalues[lo], form.eigenvalues[hi]);
    let e_lo = form.eigenvectors.column(lo).into_owned();
    let e_hi = form.eigenvectors.column(hi).into_owned();

    let candidates: Vec<nalgebra::Vector2<f64>> = if mu_lo <= 0.0 && mu_hi >= 0.0 && mu_hi > mu_lo {
        let wl = (mu_hi / (mu_hi - mu_lo)).sqrt();
        let wh = (-mu_lo / (mu_hi - mu_lo)).sqrt();
        vec![e_lo * wl + e_hi * wh, e_lo * wl - e_hi * wh]
    } else if mu_lo.abs() <= mu_hi.abs() {
        vec![e_lo]
    } else {
        vec![e_hi]
    };

    let combine = |alpha: f64, beta: f64| -> Vec<f64> {
        let mut out: Vec<f64> = v0.iter().zip(v1).map(|(x, y)| alpha * x + beta * y).collect();
        let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
        out.iter_mut().for_each(|x| *x /= norm);
        fix_sign(&mut out);
        out
    };
    // (parity, energy, vector, residual, mixing)
    let mut best: Option<(f64, f64, Vec<f64>, f64, nalgebra::Vector2<f64>)> = None;
    for coef in candidates {
        let mix = combine(coef[0], coef[1]);
        let (energy, residual) = h.residual(&mix);
        let parity = parity_expectation(&mix, n, bs);
        let better = match &best {
            None => true,
            Some((p, e, ..)) if (parity - p).abs() > 1e-6 => parity > *p,
            Some((_, e, ..)) => energy < *e,
        };
        if better {
            best = Some((parity, energy, mix, residual, coef));
        }
    }
    let (_, energy, mix, residual, coef) = best.expect("at least one candidate");
    let jp = coupling_axis_mean(&mix, n, bs);
    let partner = combine(-coef[1], coef[0]);
    state.coeffs = mix;
    state.excited = partner;
    state.energy = energy;
    state.residual = residual;
    state.parity = if jp.abs() < PARITY_FAILURE { Parity::Resolved } else { Parity::Unresolved };
    state
}

/// Read access to a real symmetric reduced atomic state.
pub trait ReducedState {
    fn dim(&self) -> usize;
    fn entry(&self, row: usize, col: usize) -> f64;
}

impl ReducedState for Banded<f64> {
    fn dim(&self) -> usize {
        Banded::dim(self)
    }

    fn entry(&self, row: usize, col: usize) -> f64 {
        self.get(row, col)
    }
}

impl ReducedState for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn entry(&self, row: usize, col: usize) -> f64 {
        self[(row, col)]
    }
}

/// `ρ_A[m][m + δ] = c[m + δ]ᵀ O(δ Δg) c[m]` for `|δ| <= half_width`.
pub fn gram_band(state: &GroundState, half_width: usize) -> Banded<f64> {
    let n = state.params.n_atoms;
    let dim = n + 1;
    let bs = state.block_size();
    let step = displacement_step(&state.params);
    let mut band = Banded::zeros(dim, half_width.min(n));
    for delta in 0..=half_width.min(n) {
        let o = overlap_matrix(bs, delta as f64 * step);
        for s in 0..dim - delta {
            let v = gram_entry(state, &o, s, s + delta);
            band.set(s, s + delta, v);
            band.set(s + delta, s, v);
        }
    }
    band
}

fn displacement_step(params: &ModelParams) -> f64 {
    2.0 * params.lambda / (params.omega * (params.n_atoms as f64).sqrt())
}

fn gram_entry(state: &GroundState, o: &DMatrix<f64>, s: usize, t: usize) -> f64 {
    let cs = state.block(s);
    let ct = state.block(t);
    let mut acc = 0.0;
    for (k, ctk) in ct.iter().enumerate() {
        if *ctk == 0.0 {
            continue;
        }
        let row: f64 = (0..cs.len()).map(|l| o[(k, l)] * cs[l]).sum();
        acc += ctk * row;
    }
    acc
}

/// Eigen-decomposition of a reduced atomic state, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct AtomicSpectrum {
    pub values: Vec<f64>,
    /// Column `i` belongs to `values[i]`.
    pub vectors: DMatrix<f64>,
    /// Smallest eigenvalue before clamping.
    pub min_raw: f64,
}

/// Full reduced atomic state `ρ_A` in the rotated Dicke basis.
#[derive(Debug, Clone)]
pub struct AtomicDensityMatrix {
    entries: DMatrix<f64>,
    spectrum: OnceLock<Result<AtomicSpectrum>>,
}

/// Overlap blocks whose largest entry is below this are dropped.
const GRAM_OVERLAP_CUTOFF: f64 = 1e-20;
/// Spin rows whose weight is below this are outside the support.
const SUPPORT_CUTOFF: f64 = 1e-30;

impl AtomicDensityMatrix {
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidState("reduced state must be square".into()));
        }
        Ok(Self { entries, spectrum: OnceLock::new() })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    /// Eigenvalues and eigenvectors, computed once on the support of the
    /// diagonal. Eigenvalues in `[-PSD_TOLERANCE, 0)` are clamped to zero and
    /// the spectrum renormalized; more negative ones are an error.
    pub fn spectrum(&self) -> Result<&AtomicSpectrum> {
        self.spectrum.get_or_init(|| decompose(&self.entries)).as_ref().map_err(Clone::clone)
    }
}

impl ReducedState for AtomicDensityMatrix {
    fn dim(&self) -> usize {
        self.entries.nrows()
    }

    fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[(row, col)]
    }
}

fn decompose(rho: &DMatrix<f64>) -> Result<AtomicSpectrum> {
    let dim = rho.nrows();
    let support: Vec<usize> = (0..dim).filter(|&i| rho[(i, i)] > SUPPORT_CUTOFF).collect();
    let sub = DMatrix::from_fn(support.len(), support.len(), |r, c| rho[(support[r], support[c])]);
    let eig = sub.symmetric_eigen();
    let mut order: Vec<usize> = (0..support.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let min_raw = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min_raw < -PSD_TOLERANCE {
        return Err(Error::NotPositive { min_eigenvalue: min_raw });
    }
    let mut values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let sum: f64 = values.iter().sum();
    if !(sum > 0.0) {
        return Err(Error::SpectrumNotNormalized { sum });
    }
    values.iter_mut().for_each(|p| *p /= sum);
    let mut vectors = DMatrix::zeros(dim, order.len());
    for (col, &i) in order.iter().enumerate() {
        for (r, &row) in support.iter().enumerate() {
            vectors[(row, col)] = eig.eigenvectors[(r, i)];
        }
    }
    Ok(AtomicSpectrum { values, vectors, min_raw })
}

/// `(ρ_A)_{m,m'} = Σ_{k,l} c[m'][k] c[m][l] <k|D(g_{m'} - g_m)|l>`, with its
/// spectrum computed and checked for positivity.
pub fn boson_gram(state: &GroundState) -> Result<AtomicDensityMatrix> {
    let n = state.params.n_atoms;
    let dim = n + 1;
    let bs = state.block_size();
    let step = displacement_step(&state.params);
    let weights: Vec<f64> = (0..dim).map(|s| state.block(s).iter().map(|x| x * x).sum()).collect();
    let mut rho = DMatrix::zeros(dim, dim);
    for s in 0..dim {
        rho[(s, s)] = weights[s];
    }
    for delta in 1..dim {
        let o = overlap_matrix(bs, delta as f64 * step);
        if o.amax() < GRAM_OVERLAP_CUTOFF {
            break;
        }
        for s in 0..dim - delta {
            let t = s + delta;
            if weights[s] * weights[t] < SUPPORT_CUTOFF * SUPPORT_CUTOFF {
                continue;
            }
            let v = gram_entry(state, &o, s, t);
            rho[(s, t)] = v;
            rho[(t, s)] = v;
        }
    }
    let gram = AtomicDensityMatrix::from_matrix(rho)?;
    gram.spectrum()?;
    Ok(gram)
}

/// Original-frame collective-spin moments of the ground state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinMoments {
    pub n_atoms: usize,
    pub jz: f64,
    pub jz2: f64,
    pub jp: Complex64,
    pub jp2: Complex64,
    pub jx2: f64,
    pub jy2: f64,
    /// `<J_+ J_z + J_z J_+>`.
    pub anti_pz: Complex64,
}

impl SpinMoments {
    /// `jx2 + jy2 + jz2 - j(j + 1)`.
    pub fn casimir_deviation(&self) -> f64 {
        let j = self.n_atoms as f64 / 2.0;
        self.jx2 + self.jy2 + self.jz2 - j * (j + 1.0)
    }
}

/// Moments of a reduced state in the rotated basis of the coherent solver.
pub fn spin_moments<R: ReducedState + ?Sized>(rho: &R, n_atoms: usize) -> SpinMoments {
    let frame = OriginalFrame::from_rotated(&spin_ladder_matrices(n_atoms));
    spin_moments_in(&frame, rho, n_atoms)
}

/// Moments with the original-frame operators given explicitly in the basis of `rho`.
pub fn spin_moments_in<R: ReducedState + ?Sized>(frame: &OriginalFrame, rho: &R, n_atoms: usize) -> SpinMoments {
    let tr = |op: &Banded<Complex64>| op.trace_with(|r, c| rho.entry(r, c));
    SpinMoments {
        n_atoms,
        jz: tr(&frame.jz).re,
        jz2: tr(&frame.jz.mul(&frame.jz)).re,
        jp: tr(&frame.jplus),
        jp2: tr(&frame.jplus.mul(&frame.jplus)),
        jx2: tr(&frame.jx.mul(&frame.jx)).re,
        jy2: tr(&frame.jy.mul(&frame.jy)).re,
        anti_pz: tr(&frame.jplus.mul(&frame.jz).add(&frame.jz.mul(&frame.jplus))),
    }
}

/// Dense Fock-basis ground state in the original frame.
#[derive(Debug, Clone)]
pub struct FockGround {
    pub params: ModelParams,
    pub n_max: usize,
    pub energy: f64,
    pub gap: f64,
    /// `psi[(n, m + j)]`.
    pub psi: DMatrix<f64>,
    pub moments: SpinMoments,
}

impl FockGround {
    /// Reduced atomic state in the `J_z` Dicke basis.
    pub fn reduced_state(&self) -> DMatrix<f64> {
        self.psi.transpose() * &self.psi
    }

    /// Reduced atomic state in the rotated basis used by the coherent solver.
    pub fn reduced_state_rotated(&self) -> DMatrix<f64> {
        let u = rotation_to_coupling_frame(self.params.n_atoms);
        &u * self.reduced_state() * u.transpose()
    }
}

/// `U = exp((π/2) K)`, `K = (J_+ - J_-)/2`, mapping `U J_x Uᵀ = J_z`, `U J_z Uᵀ = -J_x`.
pub fn rotation_to_coupling_frame(n_atoms: usize) -> DMatrix<f64> {
    let spin = spin_ladder_matrices(n_atoms);
    let (jp, _) = spin.jplus.split();
    let jp = jp.to_dense();
    let k = (&jp - jp.transpose()) * (0.25 * std::f64::consts::PI);
    k.exp()
}

pub fn solve_ground_fock_oracle(params: &ModelParams, n_max: usize) -> Result<FockGround> {
    let h = assemble_hamiltonian_fock(params, n_max)?;
    let pairs = dense_lowest(&h);
    let spin_dim = params.n_atoms + 1;
    let psi = DMatrix::from_row_slice(n_max + 1, spin_dim, &pairs.vectors[0]);
    let rho = psi.transpose() * &psi;
    let frame = OriginalFrame::identity_frame(&spin_ladder_matrices(params.n_atoms));
    let moments = spin_moments_in(&frame, &rho, params.n_atoms);
    Ok(FockGround { params: *params, n_max, energy: pairs.energies[0], gap: pairs.gap(), psi, moments })
}
