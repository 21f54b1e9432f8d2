//! Quantum Fisher information of the reduced two-atom X-state and of the
//! reduced N-atom state.
//!
//! The two-atom state is written in the basis `{↑↑, ↑↓, ↓↑, ↓↓}` as
//!
//! ```text
//! | v+   x+*  x+*  u*  |
//! | x+   w    y    x-* |
//! | x+   y    w    x-* |
//! | u    x-   x-   v-  |
//! ```
//!
//! so that `v+` is the `↑↑` population; the phase-shift generator `σ_z ⊗ I`
//! is `diag(1, 1, -1, -1)`. The QFI is invariant under exchanging the roles of
//! `v+` and `v-`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{ComplexField, DMatrix, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ground::{AtomicDensityMatrix, SpinMoments};
use crate::spin::{spin_ladder_matrices, Banded, OriginalFrame};

/// Eigenvalues below this count as zero in QFI sums.
pub const SPECTRUM_FLOOR: f64 = 1e-12;

const TRACE_TOL: f64 = 1e-9;
const CASIMIR_TOL: f64 = 1e-8;
const POSITIVITY_TOL: f64 = 1e-9;
const PARITY_TOL: f64 = 1e-6;
const IMAG_U_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoAtomXState {
    pub v_plus: f64,
    pub v_minus: f64,
    pub w: f64,
    pub y: f64,
    pub u: Complex64,
    pub x_plus: Complex64,
    pub x_minus: Complex64,
}

impl TwoAtomXState {
    /// A parity-symmetric X-state (`x± = 0`).
    pub fn new(v_plus: f64, v_minus: f64, w: f64, y: f64, u: Complex64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self { v_plus, v_minus, w, y, u, x_plus: zero, x_minus: zero }
    }

    /// Checks unit trace, `w = y`, positivity of the outer block and `x± ≈ 0`.
    pub fn validate(&self) -> Result<()> {
        let fields = [self.v_plus, self.v_minus, self.w, self.y, self.u.re, self.u.im];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidState("non-finite field".into()));
        }
        let trace = self.v_plus + self.v_minus + 2.0 * self.w;
        check("unit trace v+ + v- + 2w = 1", trace - 1.0, TRACE_TOL)?;
        check("w = y", self.w - self.y, CASIMIR_TOL)?;
        let excess = self.u.norm_sqr() - self.v_plus * self.v_minus;
        if excess > POSITIVITY_TOL {
            return Err(Error::InvariantViolation { identity: "v+ v- >= |u|^2", deviation: excess });
        }
        check("x+ = 0", self.x_plus.norm(), PARITY_TOL)?;
        check("x- = 0", self.x_minus.norm(), PARITY_TOL)?;
        check("Im u = 0", self.u.im, IMAG_U_TOL)?;
        Ok(())
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let r = |x: f64| Complex64::new(x, 0.0);
        let (xp, xm, u) = (self.x_plus, self.x_minus, self.u);
        DMatrix::from_row_slice(
            4,
            4,
            &[
                r(self.v_plus), xp.conj(), xp.conj(), u.conj(),
                xp, r(self.w), r(self.y), xm.conj(),
                xp, r(self.y), r(self.w), xm.conj(),
                u, xm, xm, r(self.v_minus),
            ],
        )
    }
}

fn check(identity: &'static str, deviation: f64, tol: f64) -> Result<()> {
    if deviation.abs() > tol {
        Err(Error::InvariantViolation { identity, deviation })
    } else {
        Ok(())
    }
}

/// Reduced state of any two atoms from collective-spin moments.
pub fn build_two_atom_state(moments: &SpinMoments) -> Result<TwoAtomXState> {
    let n = moments.n_atoms;
    if n < 2 {
        return Err(Error::InvalidParameter { name: "n_atoms", reason: format!("need N >= 2, got {n}") });
    }
    let nf = n as f64;
    let denom = nf * (nf - 1.0);
    let base = nf * nf - 2.0 * nf + 4.0 * moments.jz2;
    let state = TwoAtomXState {
        v_plus: (base + 4.0 * (nf - 1.0) * moments.jz) / (4.0 * denom),
        v_minus: (base - 4.0 * (nf - 1.0) * moments.jz) / (4.0 * denom),
        w: (nf * nf - 4.0 * moments.jz2) / (4.0 * denom),
        y: (moments.jx2 + moments.jy2 - nf / 2.0) / denom,
        u: moments.jp2 / denom,
        x_plus: (moments.jp * (nf - 1.0) + moments.anti_pz) / (2.0 * denom),
        x_minus: (moments.jp * (nf - 1.0) - moments.anti_pz) / (2.0 * denom),
    };
    state.validate()?;
    Ok(state)
}

/// Analytic eigensystem of an X-state with `x± = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct XStateSpectrum {
    /// `w + y`, equal to `2w` under `w = y`.
    pub p1: f64,
    /// `w - y`, zero under `w = y`.
    pub p2: f64,
    pub p_plus: f64,
    pub p_minus: f64,
    /// `(v+ - v-)² + 4|u|²`.
    pub gamma: f64,
    /// Eigenvectors for `p1, p2, p_plus, p_minus`.
    pub vectors: [Vector4<Complex64>; 4],
}

impl XStateSpectrum {
    pub fn values(&self) -> [f64; 4] {
        [self.p1, self.p2, self.p_plus, self.p_minus]
    }

    pub fn vector_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(4, 4, |r, c| self.vectors[c][r])
    }
}

pub fn x_state_spectrum(state: &TwoAtomXState) -> Result<XStateSpectrum> {
    let (vp, vm, u) = (state.v_plus, state.v_minus, state.u);
    let gamma = (vp - vm).powi(2) + 4.0 * u.norm_sqr();
    let root = gamma.sqrt();
    let p1 = state.w + state.y;
    let p2 = state.w - state.y;
    let p_plus = 0.5 * (vp + vm + root);
    let p_minus = 0.5 * (vp + vm - root);
    for (p, name) in [(p1, "p1"), (p2, "p2"), (p_plus, "p+"), (p_minus, "p-")] {
        if p < -1e-10 {
            return Err(Error::InvalidState(format!("eigenvalue {name} = {p:e} is negative")));
        }
    }
    let sum = p1 + p2 + p_plus + p_minus;
    if (sum - 1.0).abs() > TRACE_TOL {
        return Err(Error::SpectrumNotNormalized { sum });
    }

    let zero = Complex64::new(0.0, 0.0);
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let phi1 = Vector4::new(zero, s, s, zero);
    let phi2 = Vector4::new(zero, s, -s, zero);
    // (a, 0, 0, b) with a/b = (v+ - v- ± √γ)/(2u) = 2u*/(v- - v+ ± √γ); the
    // form whose scalar avoids cancellation is used.
    let outer = |sign: f64, fallback: usize| -> Vector4<Complex64> {
        let first = vp - vm + sign * root;
        let second = vm - vp + sign * root;
        let (a, b) = if first.abs() >= second.abs() {
            (Complex64::new(first, 0.0), u * 2.0)
        } else {
            (u.conj() * 2.0, Complex64::new(second, 0.0))
        };
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if norm < 1e-300 {
            // u = 0 and v+ = v-: any basis of the outer block will do.
            let mut e = Vector4::from_element(zero);
            e[fallback] = Complex64::new(1.0, 0.0);
            return e;
        }
        Vector4::new(a / norm, zero, zero, b / norm)
    };
    let phi_plus = outer(1.0, 0);
    let phi_minus = outer(-1.0, 3);
    Ok(XStateSpectrum { p1, p2, p_plus, p_minus, gamma, vectors: [phi1, phi2, phi_plus, phi_minus] })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QfiRoute {
    ClosedForm,
    SpinForm,
    Spectral,
    Sld,
}

/// Phase-shift generator axis of the N-atom state, in the original frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorAxis {
    /// The coupling axis; selected as default at bring-up.
    #[default]
    X,
    Y,
    Z,
}

impl GeneratorAxis {
    pub const ALL: [GeneratorAxis; 3] = [GeneratorAxis::X, GeneratorAxis::Y, GeneratorAxis::Z];

    /// The generator `J_axis` in the rotated computational basis.
    pub fn operator(&self, n_atoms: usize) -> Banded<Complex64> {
        let frame = OriginalFrame::from_rotated(&spin_ladder_matrices(n_atoms));
        match self {
            GeneratorAxis::X => frame.jx,
            GeneratorAxis::Y => frame.jy,
            GeneratorAxis::Z => frame.jz,
        }
    }
}

impl fmt::Display for GeneratorAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeneratorAxis::X => "x",
            GeneratorAxis::Y => "y",
            GeneratorAxis::Z => "z",
        })
    }
}

impl FromStr for GeneratorAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(GeneratorAxis::X),
            "y" => Ok(GeneratorAxis::Y),
            "z" => Ok(GeneratorAxis::Z),
            other => Err(Error::InvalidParameter {
                name: "generator",
                reason: format!("expected one of x, y, z, got {other:?}"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    /// `σ_z ⊗ I` on the two-atom state.
    TwoAtomSigmaZ,
    Collective(GeneratorAxis),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QfiValue {
    pub value: f64,
    pub route: QfiRoute,
    pub generator: Generator,
}

/// Rounding excursions up to this size outside `[0, 4]` are snapped back.
const TWO_ATOM_RANGE_SLACK: f64 = 1e-12;

fn two_atom(value: f64, route: QfiRoute) -> QfiValue {
    let value = if (-TWO_ATOM_RANGE_SLACK..0.0).contains(&value) {
        0.0
    } else if value > 4.0 && value <= 4.0 + TWO_ATOM_RANGE_SLACK {
        4.0
    } else {
        value
    };
    QfiValue { value, route, generator: Generator::TwoAtomSigmaZ }
}

/// `σ_z ⊗ I` in the basis `{↑↑, ↑↓, ↓↑, ↓↓}`.
pub fn sigma_z_first() -> DMatrix<Complex64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(
        [1.0, 1.0, -1.0, -1.0].iter().map(|&x| Complex64::new(x, 0.0)).collect(),
    ))
}

/// `F = 16(|u|²/(v+ + v-) + w/2)`.
pub fn qfi_closed_form(state: &TwoAtomXState) -> Result<QfiValue> {
    let outer = state.v_plus + state.v_minus;
    let u2 = state.u.norm_sqr();
    let coherence = if outer > 0.0 {
        u2 / outer
    } else if u2 == 0.0 {
        0.0
    } else {
        return Err(Error::InvalidState("v+ + v- = 0 with u != 0".into()));
    };
    Ok(two_atom(16.0 * (coherence + 0.5 * state.w), QfiRoute::ClosedForm))
}

/// Two-atom QFI directly from moments:
/// `32|<J_+²>|²/(N(N-1)(N² - 2N + 4<J_z²>)) + (2N² - 8<J_z²>)/(N(N-1))`.
pub fn qfi_spin_form(moments: &SpinMoments) -> Result<QfiValue> {
    build_two_atom_state(moments)?;
    let n = moments.n_atoms as f64;
    let nn = n * (n - 1.0);
    let outer = n * n - 2.0 * n + 4.0 * moments.jz2;
    let coherence = if outer > 0.0 { 32.0 * moments.jp2.norm_sqr() / (nn * outer) } else { 0.0 };
    Ok(two_atom(coherence + (2.0 * n * n - 8.0 * moments.jz2) / nn, QfiRoute::SpinForm))
}

fn check_spectrum(p: &[f64]) -> Result<()> {
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > TRACE_TOL {
        return Err(Error::SpectrumNotNormalized { sum });
    }
    if let Some(bad) = p.iter().find(|&&x| x < -1e-10 || !x.is_finite()) {
        return Err(Error::InvalidState(format!("eigenvalue {bad:e} is negative")));
    }
    Ok(())
}

fn floor(p: f64) -> f64 {
    if p < SPECTRUM_FLOOR {
        0.0
    } else {
        p
    }
}

/// `F = Σ_i 4 p_i (δU)²_i - Σ_{i≠j} 8 p_i p_j/(p_i + p_j) |<φ_i|U|φ_j>|²`,
/// where the columns of `v` are the eigenvectors `φ_i`. Only the vectors
/// with nonzero weight need to be supplied; `(δU)²` uses `‖Uφ‖²` in the full
/// space.
pub fn qfi_spectral_general<T>(p: &[f64], v: &DMatrix<T>, u: &DMatrix<T>) -> Result<QfiValue>
where
    T: ComplexField<RealField = f64> + Copy,
{
    check_spectrum(p)?;
    let uv = u * v;
    let w = v.adjoint() * &uv;
    let mut value = 0.0;
    for i in 0..p.len() {
        let pi = floor(p[i]);
        if pi == 0.0 {
            continue;
        }
        let norm2: f64 = uv.column(i).iter().map(|z| z.modulus_squared()).sum();
        value += 4.0 * pi * (norm2 - w[(i, i)].modulus_squared());
        for j in 0..p.len() {
            let pj = floor(p[j]);
            if j != i && pj > 0.0 {
                value -= 8.0 * pi * pj / (pi + pj) * w[(i, j)].modulus_squared();
            }
        }
    }
    Ok(two_atom(value, QfiRoute::Spectral))
}

/// `F = 2 Σ_{i,j} (p_i - p_j)²/(p_i + p_j) |U_ij|²` over a complete eigenbasis.
pub fn qfi_symmetric_form<T>(p: &[f64], v: &DMatrix<T>, u: &DMatrix<T>) -> Result<f64>
where
    T: ComplexField<RealField = f64> + Copy,
{
    check_spectrum(p)?;
    complete_basis(p, v)?;
    let w = v.adjoint() * u * v;
    let mut value = 0.0;
    for i in 0..p.len() {
        for j in 0..p.len() {
            let (pi, pj) = (floor(p[i]), floor(p[j]));
            if pi + pj > SPECTRUM_FLOOR {
                value += 2.0 * (pi - pj).powi(2) / (pi + pj) * w[(i, j)].modulus_squared();
            }
        }
    }
    Ok(value)
}

fn complete_basis<T: ComplexField>(p: &[f64], v: &DMatrix<T>) -> Result<()> {
    if v.nrows() != v.ncols() || v.ncols() != p.len() {
        return Err(Error::InvalidState(format!(
            "need a complete eigenbasis, got {} vectors in dimension {}",
            v.ncols(),
            v.nrows()
        )));
    }
    Ok(())
}

/// `F = Tr(ρ L²)` with the symmetric logarithmic derivative built in the
/// eigenbasis: `(∂ρ)_ij = i (p_i - p_j) U_ij`, `L_ij = 2 (∂ρ)_ij / (p_i + p_j)`.
pub fn qfi_via_sld(p: &[f64], v: &DMatrix<Complex64>, u: &DMatrix<Complex64>) -> Result<QfiValue> {
    check_spectrum(p)?;
    complete_basis(p, v)?;
    let n = p.len();
    let w = v.adjoint() * u * v;
    let i_unit = Complex64::new(0.0, 1.0);
    let l = DMatrix::from_fn(n, n, |a, b| {
        let (pa, pb) = (floor(p[a]), floor(p[b]));
        if pa + pb > SPECTRUM_FLOOR {
            i_unit * (pa - pb) * w[(a, b)] * 2.0 / (pa + pb)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let l2 = &l * &l;
    let value: f64 = (0..n).map(|a| floor(p[a]) * l2[(a, a)].re).sum();
    Ok(two_atom(value, QfiRoute::Sld))
}

/// Spectral route on the analytic X-state eigensystem.
pub fn qfi_spectral_x_state(state: &TwoAtomXState) -> Result<QfiValue> {
    let sp = x_state_spectrum(state)?;
    qfi_spectral_general(&sp.values(), &sp.vector_matrix(), &sigma_z_first())
}

/// SLD route on a dense Hermitian eigendecomposition of the 4×4 matrix.
pub fn qfi_sld_x_state(state: &TwoAtomXState) -> Result<QfiValue> {
    let eig = state.to_matrix().symmetric_eigen();
    let p: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    qfi_via_sld(&p, &eig.eigenvectors, &sigma_z_first())
}

/// QFI assembled term by term from `p±, p1` and `φ±, φ1`:
/// `4Σ p_i (δσ)²_i - 16 p+p-/(p+ + p-)|σ_{+-}|² - Σ_± 16 p± p1/(p± + p1)|σ_{±1}|²`.
pub fn qfi_appendix(state: &TwoAtomXState) -> Result<f64> {
    let sp = x_state_spectrum(state)?;
    let sigma = sigma_z_first();
    let [phi1, _, phi_p, phi_m] = &sp.vectors;
    let as_vec = |v: &Vector4<Complex64>| nalgebra::DVector::from_column_slice(v.as_slice());
    let (v1, vp, vm) = (as_vec(phi1), as_vec(phi_p), as_vec(phi_m));
    let elem = |a: &nalgebra::DVector<Complex64>, b: &nalgebra::DVector<Complex64>| (a.adjoint() * &sigma * b)[(0, 0)];
    let var = |a: &nalgebra::DVector<Complex64>| {
        let s2 = (a.adjoint() * &sigma * &sigma * a)[(0, 0)].re;
        s2 - elem(a, a).norm_sqr()
    };
    let (p1, pp, pm) = (floor(sp.p1), floor(sp.p_plus), floor(sp.p_minus));
    let pair = |a: f64, b: f64| if a + b > SPECTRUM_FLOOR { 16.0 * a * b / (a + b) } else { 0.0 };
    let value = 4.0 * pp * var(&vp) + 4.0 * pm * var(&vm) + 4.0 * p1 * var(&v1)
        - pair(pp, pm) * elem(&vp, &vm).norm_sqr()
        - pair(pp, p1) * elem(&vp, &v1).norm_sqr()
        - pair(pm, p1) * elem(&vm, &v1).norm_sqr();
    Ok(value)
}

/// Two-atom QFI by all four routes: closed form, spin form, spectral, SLD.
pub fn qfi_two_atom_routes(moments: &SpinMoments) -> Result<[QfiValue; 4]> {
    let state = build_two_atom_state(moments)?;
    Ok([
        qfi_closed_form(&state)?,
        qfi_spin_form(moments)?,
        qfi_spectral_x_state(&state)?,
        qfi_sld_x_state(&state)?,
    ])
}

/// QFI of the reduced N-atom state for the collective generator `J_axis`.
pub fn qfi_atomic(rho: &AtomicDensityMatrix, axis: GeneratorAxis, n_atoms: usize) -> Result<QfiValue> {
    let spectrum = rho.spectrum()?;
    if rho.matrix().nrows() != n_atoms + 1 {
        return Err(Error::InvalidState(format!(
            "reduced state has dimension {}, expected {}",
            rho.matrix().nrows(),
            n_atoms + 1
        )));
    }
    let kept: Vec<usize> = (0..spectrum.values.len()).filter(|&i| spectrum.values[i] >= SPECTRUM_FLOOR).collect();
    let p: Vec<f64> = kept.iter().map(|&i| spectrum.values[i]).collect();
    let v = spectrum.vectors.select_columns(&kept);
    let (re, im) = axis.operator(n_atoms).split();
    let value = spectral_real_split(&p, &v, &re, &im);
    let cap = (n_atoms as f64).powi(2);
    if value < -1e-9 * cap.max(1.0) || value > cap * (1.0 + 1e-9) {
        return Err(Error::InvariantViolation { identity: "0 <= F_A <= N^2", deviation: value });
    }
    Ok(QfiValue { value: value.max(0.0), route: QfiRoute::Spectral, generator: Generator::Collective(axis) })
}

/// Spectral QFI for real eigenvectors and a generator `A + iB` with real banded parts.
fn spectral_real_split(p: &[f64], v: &DMatrix<f64>, a: &Banded<f64>, b: &Banded<f64>) -> f64 {
    let sum: f64 = p.iter().sum();
    let p: Vec<f64> = p.iter().map(|x| x / sum).collect();
    let (av, bv) = (a.mul_dense(v), b.mul_dense(v));
    let wa = v.transpose() * &av;
    let wb = v.transpose() * &bv;
    let mut value = 0.0;
    for i in 0..p.len() {
        let norm2 = av.column(i).norm_squared() + bv.column(i).norm_squared();
        value += 4.0 * p[i] * (norm2 - wa[(i, i)].powi(2) - wb[(i, i)].powi(2));
        for j in 0..p.len() {
            if j != i {
                let m2 = wa[(i, j)].powi(2) + wb[(i, j)].powi(2);
                value -= 8.0 * p[i] * p[j] / (p[i] + p[j]) * m2;
            }
        }
    }
    value
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn moments_polarized(n: usize) -> SpinMoments {
        let nf = n as f64;
        SpinMoments {
            n_atoms: n,
            jz: -nf / 2.0,
            jz2: nf * nf / 4.0,
            jp: c(0.0),
            jp2: c(0.0),
            jx2: nf / 4.0,
            jy2: nf / 4.0,
            anti_pz: c(0.0),
        }
    }

    #[test]
    fn polarized_two_atom_state() {
        let s = build_two_atom_state(&moments_polarized(10)).unwrap();
        assert!((s.v_plus).abs() < 1e-15);
        assert!((s.v_minus - 1.0).abs() < 1e-15);
        assert!(s.w.abs() < 1e-15 && s.y.abs() < 1e-15 && s.u.norm() < 1e-15);
        assert_eq!(qfi_closed_form(&s).unwrap().value, 0.0);
        assert!(qfi_spin_form(&moments_polarized(10)).unwrap().value.abs() < 1e-14);
    }

    #[test]
    fn half_filled_limit() {
        // Large-N moments with β² = 1/2: <J_z> = 0, <J_z²> = 0, <J_+²> = N²/4.
        let n = 1_000_000usize;
        let nf = n as f64;
        let m = SpinMoments {
            n_atoms: n,
            jz: 0.0,
            jz2: 0.0,
            jp: c(0.0),
            jp2: c(nf * nf / 4.0),
            jx2: nf * nf / 4.0,
            jy2: nf / 2.0,
            anti_pz: c(0.0),
        };
        // Only valid up to O(1/N), so the invariant checks are bypassed.
        let s = build_two_atom_state_unchecked(&m);
        for v in [s.v_plus, s.v_minus, s.w, s.u.re] {
            assert!((v - 0.25).abs() < 1e-5, "{v}");
        }
    }

    fn build_two_atom_state_unchecked(m: &SpinMoments) -> TwoAtomXState {
        let nf = m.n_atoms as f64;
        let denom = nf * (nf - 1.0);
        let base = nf * nf - 2.0 * nf + 4.0 * m.jz2;
        TwoAtomXState::new(
            (base + 4.0 * (nf - 1.0) * m.jz) / (4.0 * denom),
            (base - 4.0 * (nf - 1.0) * m.jz) / (4.0 * denom),
            (nf * nf - 4.0 * m.jz2) / (4.0 * denom),
            (m.jx2 + m.jy2 - nf / 2.0) / denom,
            m.jp2 / denom,
        )
    }

    #[test]
    fn closed_form_values() {
        let maxed = TwoAtomXState::new(0.25, 0.25, 0.25, 0.25, c(0.25));
        assert!((qfi_closed_form(&maxed).unwrap().value - 4.0).abs() < 1e-14);
        let pure = TwoAtomXState::new(0.0, 1.0, 0.0, 0.0, c(0.0));
        assert_eq!(qfi_closed_form(&pure).unwrap().value, 0.0);
        let mid = TwoAtomXState::new(0.140625, 0.390625, 0.234375, 0.234375, c(0.234375));
        assert!((qfi_closed_form(&mid).unwrap().value - 3.529_411_764_7).abs() < 1e-10);
        let bad = TwoAtomXState::new(0.0, 0.0, 0.5, 0.5, c(0.1));
        assert!(qfi_closed_form(&bad).is_err());
    }

    #[test]
    fn spectrum_examples() {
        let s = x_state_spectrum(&TwoAtomXState::new(0.25, 0.25, 0.25, 0.25, c(0.25))).unwrap();
        let mut got = s.values().to_vec();
        got.sort_by(f64::total_cmp);
        for (g, e) in got.iter().zip([0.0, 0.0, 0.5, 0.5]) {
            assert!((g - e).abs() < 1e-15);
        }
        assert!((s.p1 - 0.5).abs() < 1e-15 && (s.p_plus - 0.5).abs() < 1e-15);

        let s = x_state_spectrum(&TwoAtomXState::new(0.0, 1.0, 0.0, 0.0, c(0.0))).unwrap();
        assert_eq!([s.p1, s.p2, s.p_plus, s.p_minus], [0.0, 0.0, 1.0, 0.0]);
        // Pure |↓↓>: the p+ eigenvector is |↓↓>.
        assert!((s.vectors[2][3].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_outer_block_uses_canonical_vectors() {
        let s = x_state_spectrum(&TwoAtomXState::new(0.3, 0.3, 0.2, 0.2, c(0.0))).unwrap();
        assert_eq!(s.vectors[2][0], c(1.0));
        assert_eq!(s.vectors[3][3], c(1.0));
    }

    #[test]
    fn spectral_examples() {
        let sigma = sigma_z_first();
        let down_down = DMatrix::from_fn(4, 1, |r, _| c(if r == 3 { 1.0 } else { 0.0 }));
        let f = qfi_spectral_general(&[1.0], &down_down, &sigma).unwrap();
        assert!(f.value.abs() < 1e-15);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let ghz = DMatrix::from_fn(4, 1, |r, _| c(if r == 0 || r == 3 { s } else { 0.0 }));
        let f = qfi_spectral_general(&[1.0], &ghz, &sigma).unwrap();
        assert!((f.value - 4.0).abs() < 1e-14);

        assert!(matches!(
            qfi_spectral_general(&[0.5], &ghz, &sigma),
            Err(Error::SpectrumNotNormalized { .. })
        ));
    }

    #[test]
    fn sld_examples() {
        let sigma = sigma_z_first();
        let basis = DMatrix::<Complex64>::identity(4, 4);
        let f = qfi_via_sld(&[0.0, 0.0, 0.0, 1.0], &basis, &sigma).unwrap();
        assert_eq!(f.value, 0.0);
        let f = qfi_via_sld(&[0.25; 4], &basis, &sigma).unwrap();
        assert_eq!(f.value, 0.0);
        let generic = DMatrix::from_fn(4, 4, |r, col| c((r + 2 * col) as f64 * 0.1)).adjoint()
            + DMatrix::from_fn(4, 4, |r, col| c((r + 2 * col) as f64 * 0.1));
        assert!(qfi_via_sld(&[0.25; 4], &basis, &generic).unwrap().value.abs() < 1e-15);
    }

    #[test]
    fn routes_agree_on_mixed_state() {
        let s = TwoAtomXState::new(0.14, 0.39, 0.235, 0.235, c(0.2));
        let closed = qfi_closed_form(&s).unwrap().value;
        let spectral = qfi_spectral_x_state(&s).unwrap().value;
        let sld = qfi_sld_x_state(&s).unwrap().value;
        let appendix = qfi_appendix(&s).unwrap();
        let sp = x_state_spectrum(&s).unwrap();
        let sym = qfi_symmetric_form(&sp.values(), &sp.vector_matrix(), &sigma_z_first()).unwrap();
        for v in [spectral, sld, appendix, sym] {
            assert!((v - closed).abs() < 1e-10, "{v} vs {closed}");
        }
    }

    #[test]
    fn invariant_violations_are_named() {
        let mut m = moments_polarized(6);
        m.jy2 += 0.5;
        match build_two_atom_state(&m) {
            Err(Error::InvariantViolation { identity, .. }) => assert_eq!(identity, "w = y"),
            other => panic!("{other:?}"),
        }
        let mut m = moments_polarized(6);
        m.jp = c(0.5);
        assert!(matches!(build_two_atom_state(&m), Err(Error::InvariantViolation { identity: "x+ = 0", .. })));
        assert!(build_two_atom_state(&moments_polarized(1)).is_err());
    }

    #[test]
    fn generator_axis_parsing() {
        assert_eq!("X".parse::<GeneratorAxis>().unwrap(), GeneratorAxis::X);
        assert_eq!(GeneratorAxis::default(), GeneratorAxis::X);
        assert!("w".parse::<GeneratorAxis>().is_err());
        assert_eq!(GeneratorAxis::Z.to_string(), "z");
    }
}
