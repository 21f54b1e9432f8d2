//! Thermodynamic-limit results: mean-field ground state, limiting two-atom
//! state and QFI, excitation energies and the scaled atomic QFI.
//!
//! Mean-field energy per atom:
//!
//! ```text
//! E(α, β)/N = ω α² - 4 λ α β sqrt(1 - β²) + Δ (β² - 1/2)
//! ```
//!
//! with `μ = 1` in the normal phase and `μ = (λ_c/λ)²` above `λ_c`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{critical_coupling, linear_grid, ModelParams};
use crate::qfi::TwoAtomXState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Normal,
    Superradiant,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldSolution {
    pub mu: f64,
    pub beta2: f64,
    /// Non-negative branch.
    pub beta: f64,
    pub alpha: f64,
    pub energy_density: f64,
    pub phase: Phase,
}

impl MeanFieldSolution {
    /// See [`stationarity_residuals`].
    pub fn residuals(&self, params: &ModelParams) -> (f64, f64) {
        stationarity_residuals(params, self.alpha, self.beta)
    }
}

/// `E(α, β)/N`.
pub fn energy_density(params: &ModelParams, alpha: f64, beta: f64) -> f64 {
    let s = (1.0 - beta * beta).max(0.0).sqrt();
    params.omega * alpha * alpha - 4.0 * params.lambda * alpha * beta * s
        + params.delta * (beta * beta - 0.5)
}

/// `(ωα - 2λβ√(1-β²),  2αλ√(1-β²) - 2αλβ²/√(1-β²) - βΔ)`, i.e.
/// `(½ ∂E/∂α, -½ ∂E/∂β)`.
pub fn stationarity_residuals(params: &ModelParams, alpha: f64, beta: f64) -> (f64, f64) {
    let (w, d, l) = (params.omega, params.delta, params.lambda);
    let s = (1.0 - beta * beta).sqrt();
    let r1 = w * alpha - 2.0 * l * beta * s;
    let r2 = 2.0 * alpha * l * s - 2.0 * alpha * l * beta * beta / s - beta * d;
    (r1, r2)
}

pub fn mean_field_solution(params: &ModelParams) -> MeanFieldSolution {
    let lc = critical_coupling(params);
    let (mu, phase) = if params.lambda <= lc {
        (1.0, Phase::Normal)
    } else {
        ((lc / params.lambda).powi(2), Phase::Superradiant)
    };
    let beta2 = (0.5 * (1.0 - mu)).max(0.0);
    let beta = beta2.sqrt();
    let alpha = 2.0 * params.lambda / params.omega * beta * (1.0 - beta2).sqrt();
    let energy_density = energy_density(params, alpha, beta);
    MeanFieldSolution { mu, beta2, beta, alpha, energy_density, phase }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericMinimum {
    pub alpha: f64,
    pub beta: f64,
    pub energy_density: f64,
}

/// Independent minimization of `E(α, β)/N`: the inner minimum over `α` is
/// `α = 2λβ√(1-β²)/ω`, the outer one over `β ∈ [0, 1)` is found by
/// golden-section search and polished by bisection on the sign of `dE/dβ`.
/// The `β >= 0` member of the `(α, β) -> (-α, -β)` pair is reported.
pub fn minimize_energy_numeric(params: &ModelParams) -> Result<NumericMinimum> {
    params.validate()?;
    let inner_alpha = |beta: f64| 2.0 * params.lambda / params.omega * beta * (1.0 - beta * beta).max(0.0).sqrt();
    let profile = |beta: f64| energy_density(params, inner_alpha(beta), beta);
    // dE/dβ along the inner minimum.
    let slope = |beta: f64| {
        let k = 4.0 * params.lambda * params.lambda / params.omega;
        2.0 * beta * (params.delta - k * (1.0 - 2.0 * beta * beta))
    };

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0f64, 1.0 - 1e-12);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (profile(c), profile(d));
    let mut iterations = 0;
    while b - a > 1e-9 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = profile(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = profile(d);
        }
        iterations += 1;
        if iterations > 500 {
            return Err(Error::NoConvergence { iterations, residual: b - a });
        }
    }

    let width = 1e-6;
    let lo = (a - width).max(0.0);
    let hi = (b + width).min(1.0 - 1e-12);
    let beta = if slope(hi) <= 0.0 {
        hi
    } else if lo == 0.0 && slope(f64::MIN_POSITIVE.max(1e-300)) >= 0.0 {
        // Normal phase: the profile rises from β = 0.
        0.0
    } else if slope(lo) >= 0.0 {
        // Flat minimum inside the golden bracket at the left edge.
        if profile(lo) <= profile(0.0) { lo } else { 0.0 }
    } else {
        let (mut l, mut h) = (lo, hi);
        for _ in 0..200 {
            let m = 0.5 * (l + h);
            if m <= l || m >= h {
                break;
            }
            if slope(m) < 0.0 {
                l = m;
            } else {
                h = m;
            }
        }
        0.5 * (l + h)
    };
    let alpha = inner_alpha(beta);
    Ok(NumericMinimum { alpha, beta, energy_density: energy_density(params, alpha, beta) })
}

/// `v+ = β⁴, v- = (1-β²)², w = y = u = β²(1-β²)`, `x± = 0`.
pub fn two_atom_limit_state(beta2: f64) -> Result<TwoAtomXState> {
    if !(0.0..=1.0).contains(&beta2) {
        return Err(Error::InvalidParameter { name: "beta2", reason: format!("must lie in [0, 1], got {beta2}") });
    }
    let c = beta2 * (1.0 - beta2);
    Ok(TwoAtomXState::new(beta2 * beta2, (1.0 - beta2).powi(2), c, c, num_complex::Complex64::new(c, 0.0)))
}

/// `F_{Q,∞} = 8β²(1-β²)/(β⁴ + (1-β²)²)`.
pub fn qfi_two_atom_limit(params: &ModelParams) -> f64 {
    let b2 = mean_field_solution(params).beta2;
    8.0 * b2 * (1.0 - b2) / (b2 * b2 + (1.0 - b2).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcitationEnergies {
    pub eps_plus: f64,
    pub eps_minus: f64,
}

/// `ε±² = ½(ω² + Δ²/μ²) ± ½√((ω² - Δ²/μ²)² + 16λ²ωΔμ)`.
pub fn excitation_energies(params: &ModelParams) -> Result<ExcitationEnergies> {
    let mu = mean_field_solution(params).mu;
    let (w, d, l) = (params.omega, params.delta, params.lambda);
    let dm2 = (d / mu).powi(2);
    let radicand = (w * w - dm2).powi(2) + 16.0 * l * l * w * d * mu;
    if radicand < 0.0 {
        return Err(Error::InvalidState(format!("negative radicand {radicand:e}")));
    }
    let mean = 0.5 * (w * w + dm2);
    let half_root = 0.5 * radicand.sqrt();
    let plus2 = mean + half_root;
    let mut minus2 = mean - half_root;
    // At λ_c the lower branch vanishes; rounding can leave it slightly negative.
    if minus2 < 0.0 {
        if minus2 < -1e-12 * plus2 {
            return Err(Error::InvalidState(format!("negative excitation energy squared {minus2:e}")));
        }
        minus2 = 0.0;
    }
    Ok(ExcitationEnergies { eps_plus: plus2.sqrt(), eps_minus: minus2.sqrt() })
}

/// Scaled atomic QFI `F_{A,∞}/N = 2μΔ / (ε+ + ε- + (Δ²/μ² - ω²)/(ε+ + ε-))`;
/// at `λ_c` its limit `√(ω² + Δ²)/Δ`.
pub fn qfi_atomic_limit(params: &ModelParams) -> Result<f64> {
    let (w, d) = (params.omega, params.delta);
    if params.lambda == critical_coupling(params) {
        return Ok((w * w + d * d).sqrt() / d);
    }
    let mu = mean_field_solution(params).mu;
    let eps = excitation_energies(params)?;
    let s = eps.eps_plus + eps.eps_minus;
    Ok(2.0 * mu * d / (s + ((d / mu).powi(2) - w * w) / s))
}

/// `√(32ω²λ_c³/(Δ²(16λ_c⁴ + ω⁴)))`, the coefficient of `|λ_c - λ|^{1/2}`.
pub fn critical_expansion_coefficient(params: &ModelParams) -> f64 {
    let (w, d) = (params.omega, params.delta);
    let lc = critical_coupling(params);
    (32.0 * w * w * lc.powi(3) / (d * d * (16.0 * lc.powi(4) + w.powi(4)))).sqrt()
}

/// Two-term expansion of `F_{A,∞}/N` about `λ_c`:
/// `√(ω² + Δ²)/Δ - C |λ_c - λ|^{1/2}`. The critical value is a maximum, so
/// the correction lowers it on either side. Intended for
/// `|λ - λ_c|/λ_c <= 0.05`.
pub fn qfi_atomic_critical_expansion(params: &ModelParams, lambda: f64) -> f64 {
    let (w, d) = (params.omega, params.delta);
    let lc = critical_coupling(params);
    (w * w + d * d).sqrt() / d - critical_expansion_coefficient(params) * (lc - lambda).abs().sqrt()
}

/// Every thermodynamic-limit quantity at one coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoRow {
    pub lambda: f64,
    pub mu: f64,
    pub beta2: f64,
    pub alpha: f64,
    pub energy_density: f64,
    pub eps_plus: f64,
    pub eps_minus: f64,
    pub f_q_limit: f64,
    pub f_a_limit_scaled: f64,
    /// Only meaningful for `|λ - λ_c|/λ_c <= 0.05`.
    pub f_a_expansion: f64,
}

pub fn thermo_row(params: &ModelParams) -> Result<ThermoRow> {
    params.validate()?;
    let mf = mean_field_solution(params);
    let eps = excitation_energies(params)?;
    Ok(ThermoRow {
        lambda: params.lambda,
        mu: mf.mu,
        beta2: mf.beta2,
        alpha: mf.alpha,
        energy_density: mf.energy_density,
        eps_plus: eps.eps_plus,
        eps_minus: eps.eps_minus,
        f_q_limit: qfi_two_atom_limit(params),
        f_a_limit_scaled: qfi_atomic_limit(params)?,
        f_a_expansion: qfi_atomic_critical_expansion(params, params.lambda),
    })
}

/// Rows on `steps + 1` evenly spaced couplings from `lambda_min` to `lambda_max`.
pub fn thermo_curve(template: &ModelParams, lambda_min: f64, lambda_max: f64, steps: usize) -> Result<Vec<ThermoRow>> {
    if steps == 0 || !(lambda_min >= 0.0 && lambda_max > lambda_min && lambda_max.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "lambda_grid",
            reason: format!("need 0 <= lambda_min < lambda_max and steps >= 1, got [{lambda_min}, {lambda_max}] in {steps}"),
        });
    }
    linear_grid(lambda_min, lambda_max, steps).into_iter().map(|l| thermo_row(&template.with_lambda(l))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfi::qfi_closed_form;

    fn unit(lambda: f64) -> ModelParams {
        ModelParams::new(1.0, 1.0, lambda, 1).unwrap()
    }

    #[test]
    fn normal_phase_mean_field() {
        for lambda in [0.0, 0.2, 0.5] {
            let s = mean_field_solution(&unit(lambda));
            assert_eq!((s.beta, s.alpha, s.mu), (0.0, 0.0, 1.0));
            assert_eq!(s.energy_density, -0.5);
            assert_eq!(s.phase, Phase::Normal);
        }
    }

    #[test]
    fn superradiant_reference_point() {
        let p = unit(1.0);
        let s = mean_field_solution(&p);
        assert!((s.mu - 0.25).abs() < 1e-15);
        assert!((s.beta2 - 0.375).abs() < 1e-15);
        assert!((s.alpha - 0.968_245_836_6).abs() < 1e-10);
        assert!((s.energy_density + 1.0625).abs() < 1e-14);
        let (r1, r2) = s.residuals(&p);
        assert!(r1.abs() < 1e-12 && r2.abs() < 1e-12);
    }

    #[test]
    fn numeric_minimum_matches_closed_form() {
        for i in 0..=40 {
            let p = unit(0.05 * i as f64);
            let closed = mean_field_solution(&p);
            let num = minimize_energy_numeric(&p).unwrap();
            assert!((num.energy_density - closed.energy_density).abs() < 1e-8, "lambda {}", p.lambda);
            assert!((num.alpha - closed.alpha).abs() < 1e-8);
            assert!((num.beta * num.beta - closed.beta2).abs() < 1e-8);
            assert!(num.beta >= 0.0);
        }
        let n = minimize_energy_numeric(&unit(0.125)).unwrap();
        assert!(n.alpha.abs() < 1e-8 && n.beta.abs() < 1e-8);
    }

    #[test]
    fn limit_state_and_qfi() {
        let s = two_atom_limit_state(0.0).unwrap();
        assert_eq!((s.v_plus, s.v_minus, s.w, s.y, s.u.re), (0.0, 1.0, 0.0, 0.0, 0.0));
        let s = two_atom_limit_state(0.5).unwrap();
        assert_eq!((s.v_plus, s.v_minus, s.w, s.y, s.u.re), (0.25, 0.25, 0.25, 0.25, 0.25));
        for b2 in [0.0, 0.1, 0.375, 0.49, 1.0] {
            let s = two_atom_limit_state(b2).unwrap();
            assert!((s.v_plus + s.v_minus + 2.0 * s.w - 1.0).abs() < 1e-15);
        }
        assert!(two_atom_limit_state(1.5).is_err());

        assert_eq!(qfi_two_atom_limit(&unit(0.3)), 0.0);
        assert!((qfi_two_atom_limit(&unit(1.0)) - 3.529_411_764_7).abs() < 1e-10);
        assert!((qfi_two_atom_limit(&unit(1e4)) - 4.0).abs() < 1e-6);
        for i in 0..50 {
            let p = ModelParams::new(1.0, 0.7, 0.1 * i as f64, 1).unwrap();
            let b2 = mean_field_solution(&p).beta2;
            let closed = qfi_closed_form(&two_atom_limit_state(b2).unwrap()).unwrap().value;
            assert!((closed - qfi_two_atom_limit(&p)).abs() < 1e-12);
        }
    }

    #[test]
    fn excitation_examples() {
        let e = excitation_energies(&ModelParams::new(1.0, 0.4, 0.0, 1).unwrap()).unwrap();
        assert!((e.eps_plus - 1.0).abs() < 1e-15 && (e.eps_minus - 0.4).abs() < 1e-15);
        let e = excitation_energies(&unit(0.5)).unwrap();
        assert!((e.eps_plus - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(e.eps_minus, 0.0);
        let e = excitation_energies(&unit(1.0)).unwrap();
        assert!((e.eps_plus - 4.008_288_035_459_874).abs() < 1e-12);
        assert!((e.eps_minus - 0.966_243_770_892_843_4).abs() < 1e-12);
    }

    #[test]
    fn atomic_limit_examples() {
        assert!((qfi_atomic_limit(&unit(0.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!((qfi_atomic_limit(&unit(0.5)).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!((qfi_atomic_limit(&unit(1.0)).unwrap() - 0.062_579_076_826_203_64).abs() < 1e-12);
        // Continuous through λ_c.
        let below = qfi_atomic_limit(&unit(0.5 - 1e-12)).unwrap();
        let above = qfi_atomic_limit(&unit(0.5 + 1e-12)).unwrap();
        assert!((below - 2f64.sqrt()).abs() < 1e-5 && (above - 2f64.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn critical_expansion() {
        let p = unit(0.5);
        assert_eq!(qfi_atomic_critical_expansion(&p, 0.5), 2f64.sqrt());
        let c = critical_expansion_coefficient(&p);
        assert!((c * c - 2.0).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for k in 2..=6 {
            let delta = 10f64.powi(-k);
            let exact = qfi_atomic_limit(&unit(0.5 - delta)).unwrap();
            let ratio = (qfi_atomic_critical_expansion(&p, 0.5 - delta) - exact).abs() / delta.sqrt();
            assert!(ratio < prev);
            prev = ratio;
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn dimensionless_outputs_are_scale_invariant() {
        for lambda in [0.2, 0.5, 0.9, 3.0] {
            let p = ModelParams::new(1.0, 0.6, lambda, 1).unwrap();
            let q = p.scaled(3.7);
            let (a, b) = (mean_field_solution(&p), mean_field_solution(&q));
            assert!((a.beta2 - b.beta2).abs() < 1e-14 && (a.mu - b.mu).abs() < 1e-14);
            assert!((qfi_two_atom_limit(&p) - qfi_two_atom_limit(&q)).abs() < 1e-13);
            assert!((qfi_atomic_limit(&p).unwrap() - qfi_atomic_limit(&q).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn curve_grid() {
        let rows = thermo_curve(&unit(0.0), 0.0, 2.0, 200).unwrap();
        assert_eq!(rows.len(), 201);
        assert_eq!(rows[0].lambda, 0.0);
        assert_eq!(rows[200].lambda, 2.0);
        assert!((rows[50].lambda - 0.5).abs() < 1e-15);
        assert!(rows.iter().filter(|r| r.lambda <= 0.5).all(|r| r.f_q_limit == 0.0));
        assert!(thermo_curve(&unit(0.0), 1.0, 0.5, 10).is_err());
        assert!(thermo_curve(&unit(0.0), 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn phase_continuity_and_monotonicity() {
        let below = mean_field_solution(&unit(0.5 - 1e-10));
        let above = mean_field_solution(&unit(0.5 + 1e-10));
        assert!((below.energy_density - above.energy_density).abs() < 1e-9);
        assert!(above.beta2 < 1e-9);
        let mut prev = 0.0;
        for i in 0..200 {
            let f = qfi_two_atom_limit(&unit(0.5 + 0.05 * i as f64));
            assert!(f >= prev && f <= 4.0);
            prev = f;
        }
    }
}
