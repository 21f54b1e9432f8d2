//! Hamiltonian assembly in the extended coherent-state basis and in the plain
//! Fock basis.
//!
//! The coherent-basis matrix lives in a frame rotated by π/2 about the y axis,
//! where the coupling axis is diagonal: `J_x -> J_z'`, `J_z -> -J_x'`,
//! `J_y -> J_y'`. There
//!
//! ```text
//! H = ω a†a - Δ J_x' + (2λ/√N)(a† + a) J_z'
//! ```
//!
//! and for fixed `m` the boson part is `ω A_m†A_m - ω g_m²` with
//! `A_m = a + g_m`, `g_m = 2mλ/(ω√N)`. The displaced Fock states of `A_m`
//! diagonalize each spin block exactly; the spin flips of `-Δ J_x'` connect
//! neighbouring blocks through displaced-Fock overlaps.

use nalgebra::{DMatrix, DVectorView, DVectorViewMut};

use crate::error::{Error, Result};
use crate::overlap::overlap_matrix;
use crate::params::{ModelParams, TruncationSpec};
use crate::spin::{ladder_coefficient, m_values, spin_ladder_matrices};

/// Largest coherent-basis dimension the assembler accepts.
pub const MAX_COHERENT_DIMENSION: usize = 1 << 21;

/// Largest Fock-basis dimension accepted by the dense oracle.
pub const MAX_FOCK_DIMENSION: usize = 4096;

/// Displacements `g_m = 2mλ/(ω√N)` for `m = -j, ..., j`.
pub fn displacement_sequence(params: &ModelParams) -> Vec<f64> {
    let scale = 2.0 * params.lambda / (params.omega * (params.n_atoms as f64).sqrt());
    m_values(params.n_atoms).into_iter().map(|m| m * scale).collect()
}

/// Symmetric operator used by the eigensolvers.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;
    /// `y = A x`
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Real symmetric block-tridiagonal matrix with square blocks of equal size.
#[derive(Debug, Clone)]
pub struct BlockTridiagonal {
    block_size: usize,
    diag: Vec<DMatrix<f64>>,
    /// `lower[i]` is block `(i + 1, i)`; block `(i, i + 1)` is its transpose.
    lower: Vec<DMatrix<f64>>,
}

impl BlockTridiagonal {
    pub fn new(diag: Vec<DMatrix<f64>>, lower: Vec<DMatrix<f64>>) -> Self {
        assert!(!diag.is_empty());
        assert_eq!(lower.len() + 1, diag.len());
        let block_size = diag[0].nrows();
        for b in diag.iter().chain(lower.iter()) {
            assert_eq!((b.nrows(), b.ncols()), (block_size, block_size));
        }
        Self { block_size, diag, lower }
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn n_blocks(&self) -> usize {
        self.diag.len()
    }

    pub fn diag_block(&self, i: usize) -> &DMatrix<f64> {
        &self.diag[i]
    }

    pub fn lower_block(&self, i: usize) -> &DMatrix<f64> {
        &self.lower[i]
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let bs = self.block_size;
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (i, d) in self.diag.iter().enumerate() {
            m.view_mut((i * bs, i * bs), (bs, bs)).copy_from(d);
        }
        for (i, l) in self.lower.iter().enumerate() {
            m.view_mut(((i + 1) * bs, i * bs), (bs, bs)).copy_from(l);
            m.view_mut((i * bs, (i + 1) * bs), (bs, bs)).copy_from(&l.transpose());
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.diag.iter().chain(self.lower.iter()).map(|b| b.amax()).fold(0.0, f64::max)
    }

    /// `max |H - Hᵀ|` over the stored blocks (off-diagonal blocks are symmetric by construction).
    pub fn symmetry_error(&self) -> f64 {
        self.diag.iter().map(|d| (d - d.transpose()).amax()).fold(0.0, f64::max)
    }

    /// Rayleigh quotient and residual norm `‖Hx - (xᵀHx) x‖` for unit `x`.
    pub fn residual(&self, x: &[f64]) -> (f64, f64) {
        let mut y = vec![0.0; x.len()];
        self.apply(x, &mut y);
        let e: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let r = y.iter().zip(x).map(|(yi, xi)| (yi - e * xi).powi(2)).sum::<f64>().sqrt();
        (e, r)
    }
}

impl SymmetricOperator for BlockTridiagonal {
    fn dim(&self) -> usize {
        self.block_size * self.diag.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let bs = self.block_size;
        let nb = self.diag.len();
        for i in 0..nb {
            let mut yi = DVectorViewMut::from_slice(&mut y[i * bs..(i + 1) * bs], bs);
            let xi = DVectorView::from_slice(&x[i * bs..(i + 1) * bs], bs);
            yi.gemv(1.0, &self.diag[i], &xi, 0.0);
            if i > 0 {
                let xp = DVectorView::from_slice(&x[(i - 1) * bs..i * bs], bs);
                yi.gemv(1.0, &self.lower[i - 1], &xp, 1.0);
            }
            if i + 1 < nb {
                let xn = DVectorView::from_slice(&x[(i + 1) * bs..(i + 2) * bs], bs);
                yi.gemv_tr(1.0, &self.lower[i], &xn, 1.0);
            }
        }
    }
}

impl SymmetricOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.nrows();
        let mut yv = DVectorViewMut::from_slice(y, n);
        yv.gemv(1.0, self, &DVectorView::from_slice(x, n), 0.0);
    }
}

/// Coherent-basis Hamiltonian with truncation `n_tr` (block size `n_tr + 1`).
///
/// Diagonal block `m`: `ω k - ω g_m²`. Block `(m ± 1, m)`:
/// `-(Δ/2) sqrt(j(j+1) - m(m ± 1)) <k|D(g_{m±1} - g_m)|l>`.
pub fn assemble_hamiltonian_coherent(
    params: &ModelParams,
    trunc: &TruncationSpec,
) -> Result<BlockTridiagonal> {
    params.validate()?;
    trunc.validate()?;
    assemble_coherent_at(params, trunc.n_tr)
}

pub(crate) fn assemble_coherent_at(params: &ModelParams, n_tr: usize) -> Result<BlockTridiagonal> {
    let n_atoms = params.n_atoms;
    let bs = n_tr + 1;
    let dim = (n_atoms + 1)
        .checked_mul(bs)
        .ok_or(Error::DimensionOverflow { dim: usize::MAX, cap: MAX_COHERENT_DIMENSION })?;
    if dim > MAX_COHERENT_DIMENSION {
        return Err(Error::DimensionOverflow { dim, cap: MAX_COHERENT_DIMENSION });
    }
    let g = displacement_sequence(params);
    let ms = m_values(n_atoms);
    let j = params.j();
    let omega = params.omega;

    let diag = g
        .iter()
        .map(|gm| {
            let energies: Vec<f64> = (0..bs).map(|k| omega * k as f64 - omega * gm * gm).collect();
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(energies))
        })
        .collect();

    // g_{m+1} - g_m is the same for every m.
    let step = if n_atoms > 0 && g.len() > 1 { g[1] - g[0] } else { 0.0 };
    let overlap = overlap_matrix(bs, step);
    let lower = (0..n_atoms)
        .map(|i| {
            let coupling = -0.5 * params.delta * ladder_coefficient(j, ms[i]);
            &overlap * coupling
        })
        .collect();
    Ok(BlockTridiagonal::new(diag, lower))
}

/// Dense Hamiltonian on `{|n> ⊗ |j, m>}`, `n <= n_max`, untransformed frame.
/// Index `n (N + 1) + (m + j)`.
pub fn assemble_hamiltonian_fock(params: &ModelParams, n_max: usize) -> Result<DMatrix<f64>> {
    params.validate()?;
    let spin_dim = params.n_atoms + 1;
    let dim = (n_max + 1) * spin_dim;
    if dim > MAX_FOCK_DIMENSION {
        return Err(Error::DimensionOverflow { dim, cap: MAX_FOCK_DIMENSION });
    }
    let spin = spin_ladder_matrices(params.n_atoms);
    let coupling = 2.0 * params.lambda / (params.n_atoms as f64).sqrt();
    let ms = m_values(params.n_atoms);

    let mut h = DMatrix::zeros(dim, dim);
    for n in 0..=n_max {
        for (s, m) in ms.iter().enumerate() {
            h[(n * spin_dim + s, n * spin_dim + s)] = params.omega * n as f64 + params.delta * m;
        }
    }
    for n in 0..n_max {
        let amp = coupling * ((n + 1) as f64).sqrt();
        for (r, c, v) in spin.jx.entries() {
            let val = amp * v.re;
            h[((n + 1) * spin_dim + r, n * spin_dim + c)] += val;
            h[(n * spin_dim + c, (n + 1) * spin_dim + r)] += val;
        }
    }
    Ok(h)
}
