//! Model constants, truncation settings and the product-basis index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants of the Dicke Hamiltonian
/// `H = omega a†a + delta J_z + (2 lambda / sqrt(N)) (a† + a) J_x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega: f64,
    pub delta: f64,
    pub lambda: f64,
    pub n_atoms: usize,
}

impl ModelParams {
    pub fn new(omega: f64, delta: f64, lambda: f64, n_atoms: usize) -> Result<Self> {
        let params = Self { omega, delta, lambda, n_atoms };
        params.validate()?;
        Ok(params)
    }

    /// Parameters with `omega = 1` and `delta = d`.
    pub fn with_detuning(d: f64, lambda: f64, n_atoms: usize) -> Result<Self> {
        Self::new(1.0, d, lambda, n_atoms)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(invalid("omega", format!("must be finite and > 0, got {}", self.omega)));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(invalid("delta", format!("must be finite and > 0, got {}", self.delta)));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(invalid("lambda", format!("must be finite and >= 0, got {}", self.lambda)));
        }
        if self.n_atoms < 1 {
            return Err(invalid("n_atoms", "must be >= 1".to_string()));
        }
        Ok(())
    }

    /// Total spin `j = N/2`.
    pub fn j(&self) -> f64 {
        self.n_atoms as f64 / 2.0
    }

    /// Detuning ratio `D = delta / omega`.
    pub fn detuning_ratio(&self) -> f64 {
        self.delta / self.omega
    }

    pub fn critical_coupling(&self) -> f64 {
        critical_coupling(self)
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..*self }
    }

    pub fn with_n_atoms(&self, n_atoms: usize) -> Self {
        Self { n_atoms, ..*self }
    }

    /// Multiplies every energy scale by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            omega: self.omega * s,
            delta: self.delta * s,
            lambda: self.lambda * s,
            n_atoms: self.n_atoms,
        }
    }
}

/// Superradiant critical coupling `sqrt(omega * delta) / 2`.
pub fn critical_coupling(params: &ModelParams) -> f64 {
    (params.omega * params.delta).sqrt() / 2.0
}

/// `steps + 1` evenly spaced points from `lo` to `hi`, endpoints exact.
pub fn linear_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 0 {
        return vec![lo];
    }
    (0..=steps).map(|i| if i == steps { hi } else { lo + (hi - lo) * i as f64 / steps as f64 }).collect()
}

/// Displaced-boson truncation and the convergence thresholds of the adaptive solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub n_tr: usize,
    pub n_tr_step: usize,
    pub n_tr_max: usize,
    /// Relative ground-energy change between rounds.
    pub tol_energy: f64,
    /// Absolute change of the two-atom QFI between rounds.
    pub tol_obs: f64,
}

impl Default for TruncationSpec {
    fn default() -> Self {
        Self { n_tr: 24, n_tr_step: 8, n_tr_max: 120, tol_energy: 1e-9, tol_obs: 1e-8 }
    }
}

impl TruncationSpec {
    pub const MIN_N_TR: usize = 8;

    /// A single round at fixed truncation; no adaptive growth.
    pub fn fixed(n_tr: usize) -> Self {
        Self { n_tr, n_tr_step: 1, n_tr_max: n_tr, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_tr < Self::MIN_N_TR {
            return Err(invalid("n_tr", format!("must be >= {}, got {}", Self::MIN_N_TR, self.n_tr)));
        }
        if self.n_tr > self.n_tr_max {
            return Err(invalid(
                "n_tr_max",
                format!("must be >= n_tr ({}), got {}", self.n_tr, self.n_tr_max),
            ));
        }
        if self.n_tr_step == 0 {
            return Err(invalid("n_tr_step", "must be >= 1".to_string()));
        }
        if !(self.tol_energy > 0.0) {
            return Err(invalid("tol_energy", format!("must be > 0, got {}", self.tol_energy)));
        }
        if !(self.tol_obs > 0.0) {
            return Err(invalid("tol_obs", format!("must be > 0, got {}", self.tol_obs)));
        }
        Ok(())
    }
}

/// Position in the rotated product basis `|displaced Fock k> ⊗ |j, m>`.
///
/// `m` is stored as `2m` so half-integer labels stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisIndex {
    pub two_m: i64,
    pub k: usize,
}

impl BasisIndex {
    pub fn m(&self) -> f64 {
        self.two_m as f64 / 2.0
    }

    /// Flat index `(m + j)(n_tr + 1) + k`.
    pub fn flat(&self, n_atoms: usize, n_tr: usize) -> usize {
        let spin = (self.two_m + n_atoms as i64) / 2;
        debug_assert!(spin >= 0 && spin as usize <= n_atoms);
        debug_assert!(self.k <= n_tr);
        spin as usize * (n_tr + 1) + self.k
    }

    pub fn from_flat(flat: usize, n_atoms: usize, n_tr: usize) -> Self {
        let spin = flat / (n_tr + 1);
        let k = flat % (n_tr + 1);
        Self { two_m: 2 * spin as i64 - n_atoms as i64, k }
    }
}

fn invalid(name: &'static str, reason: String) -> Error {
    Error::InvalidParameter { name, reason }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_coupling_values() {
        let p = ModelParams::new(1.0, 1.0, 0.0, 4).unwrap();
        assert_eq!(critical_coupling(&p), 0.5);
        let p = ModelParams::new(1.0, 0.5, 0.0, 4).unwrap();
        assert!((critical_coupling(&p) - 0.3535533906).abs() < 1e-10);
        let p = ModelParams::new(2.0, 2.0, 0.0, 4).unwrap();
        assert_eq!(critical_coupling(&p), 1.0);
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(ModelParams::new(0.0, 1.0, 0.1, 2).is_err());
        assert!(ModelParams::new(1.0, -1.0, 0.1, 2).is_err());
        assert!(ModelParams::new(1.0, 1.0, -0.1, 2).is_err());
        let err = ModelParams::new(1.0, 1.0, 0.1, 0).unwrap_err();
        assert!(err.to_string().contains("n_atoms"));
    }

    #[test]
    fn truncation_validation() {
        assert!(TruncationSpec::default().validate().is_ok());
        assert!(TruncationSpec { n_tr: 4, ..Default::default() }.validate().is_err());
        assert!(TruncationSpec { n_tr_max: 10, ..Default::default() }.validate().is_err());
        assert!(TruncationSpec { tol_obs: 0.0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn flat_index_is_a_bijection() {
        for n_atoms in [1usize, 2, 5] {
            let n_tr = 9;
            let dim = (n_atoms + 1) * (n_tr + 1);
            for flat in 0..dim {
                let idx = BasisIndex::from_flat(flat, n_atoms, n_tr);
                assert!(idx.m().abs() <= n_atoms as f64 / 2.0);
                assert_eq!(idx.flat(n_atoms, n_tr), flat);
            }
        }
    }
}
