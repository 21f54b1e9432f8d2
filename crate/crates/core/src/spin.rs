//! Collective spin operators in the `(N + 1)`-dimensional symmetric Dicke space.
//!
//! Operators are stored by diagonals ([`Banded`]): every collective operator
//! and every product of a few of them has a narrow band, so `N = 4096` costs
//! a few hundred kilobytes rather than a dense `(N+1)²` matrix.
//!
//! Basis index `i = m + j` runs over `m = -j, ..., j`.

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;

/// Square matrix stored by diagonals with offsets `-w ..= w`.
#[derive(Debug, Clone, PartialEq)]
pub struct Banded<T> {
    dim: usize,
    half_width: usize,
    /// `diags[w + off][i]` holds entry `(i, i + off)`; out-of-range slots are zero.
    diags: Vec<Vec<T>>,
}

impl<T: ComplexField<RealField = f64> + Copy> Banded<T> {
    pub fn zeros(dim: usize, half_width: usize) -> Self {
        Self { dim, half_width, diags: vec![vec![T::zero(); dim]; 2 * half_width + 1] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![T::one(); dim])
    }

    pub fn diagonal(values: &[T]) -> Self {
        let mut out = Self::zeros(values.len(), 0);
        out.diags[0].copy_from_slice(values);
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        let off = col as isize - row as isize;
        if off.unsigned_abs() > self.half_width || row >= self.dim || col >= self.dim {
            return T::zero();
        }
        self.diags[(self.half_width as isize + off) as usize][row]
    }

    pub fn set(&mut self, row: usize, col: usize, value: T) {
        let off = col as isize - row as isize;
        assert!(off.unsigned_abs() <= self.half_width, "entry ({row}, {col}) outside the band");
        self.diags[(self.half_width as isize + off) as usize][row] = value;
    }

    /// Nonzero-pattern iterator over `(row, col, value)` inside the band.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        let w = self.half_width as isize;
        (0..self.dim).flat_map(move |row| {
            (-w..=w).filter_map(move |off| {
                let col = row as isize + off;
                if col < 0 || col >= self.dim as isize {
                    None
                } else {
                    Some((row, col as usize, self.diags[(w + off) as usize][row]))
                }
            })
        })
    }

    fn widened(&self, half_width: usize) -> Self {
        if half_width <= self.half_width {
            return self.clone();
        }
        let mut out = Self::zeros(self.dim, half_width);
        for (r, c, v) in self.entries() {
            out.set(r, c, v);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let w = self.half_width.max(other.half_width);
        let mut out = self.widened(w);
        for (r, c, v) in other.entries() {
            let cur = out.get(r, c);
            out.set(r, c, cur + v);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-T::one()))
    }

    pub fn scale(&self, factor: T) -> Self {
        let mut out = self.clone();
        for diag in &mut out.diags {
            for v in diag.iter_mut() {
                *v *= factor;
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let w = self.half_width + other.half_width;
        let mut out = Self::zeros(self.dim, w);
        for (r, k, a) in self.entries() {
            let lo = k.saturating_sub(other.half_width);
            let hi = (k + other.half_width).min(self.dim - 1);
            for c in lo..=hi {
                let b = other.get(k, c);
                let cur = out.get(r, c);
                out.set(r, c, cur + a * b);
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim, self.half_width);
        for (r, c, v) in self.entries() {
            out.set(c, r, v.conjugate());
        }
        out
    }

    /// `Tr(rho A)` for a real symmetric `rho` given entrywise.
    pub fn trace_with<F: Fn(usize, usize) -> f64>(&self, rho: F) -> T {
        let mut acc = T::zero();
        for (r, c, v) in self.entries() {
            acc += v * T::from_real(rho(c, r));
        }
        acc
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }
}

impl Banded<Complex64> {
    /// Splits `A = B + iC` into real banded parts.
    pub fn split(&self) -> (Banded<f64>, Banded<f64>) {
        let mut re = Banded::zeros(self.dim, self.half_width);
        let mut im = Banded::zeros(self.dim, self.half_width);
        for (r, c, v) in self.entries() {
            re.set(r, c, v.re);
            im.set(r, c, v.im);
        }
        (re, im)
    }

    pub fn from_real(real: &Banded<f64>) -> Self {
        let mut out = Self::zeros(real.dim, real.half_width);
        for (r, c, v) in real.entries() {
            out.set(r, c, Complex64::new(v, 0.0));
        }
        out
    }
}

impl Banded<f64> {
    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (r, c, v) in self.entries() {
            y[r] += v * x[c];
        }
    }

    /// `A V` for a dense `V` with `dim` rows.
    pub fn mul_dense(&self, v: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(v.nrows(), self.dim);
        let mut out = DMatrix::zeros(self.dim, v.ncols());
        for col in 0..v.ncols() {
            let x = v.column(col);
            let mut y = out.column_mut(col);
            for (r, c, a) in self.entries() {
                y[r] += a * x[c];
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.diags.iter().all(|d| d.iter().all(|v| *v == 0.0))
    }
}

/// Ladder representation of `J_z, J_±, J_x, J_y` for total spin `j = n_atoms / 2`.
#[derive(Debug, Clone)]
pub struct SpinMatrices {
    pub n_atoms: usize,
    pub jz: Banded<Complex64>,
    pub jplus: Banded<Complex64>,
    pub jminus: Banded<Complex64>,
    pub jx: Banded<Complex64>,
    pub jy: Banded<Complex64>,
}

impl SpinMatrices {
    pub fn j(&self) -> f64 {
        self.n_atoms as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.n_atoms + 1
    }

    pub fn identity(&self) -> Banded<Complex64> {
        Banded::identity(self.dim())
    }
}

/// Magnetic quantum numbers `m = -j, ..., j`.
pub fn m_values(n_atoms: usize) -> Vec<f64> {
    (0..=n_atoms).map(|i| i as f64 - n_atoms as f64 / 2.0).collect()
}

/// `<j, m+1| J_+ |j, m> = sqrt(j(j+1) - m(m+1))`.
pub fn ladder_coefficient(j: f64, m: f64) -> f64 {
    (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
}

/// Collective spin matrices in the Dicke basis of `n_atoms` spins.
pub fn spin_ladder_matrices(n_atoms: usize) -> SpinMatrices {
    assert!(n_atoms >= 1, "need at least one spin");
    let dim = n_atoms + 1;
    let j = n_atoms as f64 / 2.0;
    let ms = m_values(n_atoms);

    let jz = Banded::diagonal(&ms.iter().map(|&m| Complex64::new(m, 0.0)).collect::<Vec<_>>());
    let mut jplus = Banded::zeros(dim, 1);
    for i in 0..dim - 1 {
        jplus.set(i + 1, i, Complex64::new(ladder_coefficient(j, ms[i]), 0.0));
    }
    let jminus = jplus.adjoint();
    let jx = jplus.add(&jminus).scale(Complex64::new(0.5, 0.0));
    // (J_+ - J_-) / 2i
    let jy = jplus.sub(&jminus).scale(Complex64::new(0.0, -0.5));
    SpinMatrices { n_atoms, jz, jplus, jminus, jx, jy }
}

/// Original-frame collective operators expressed in the rotated basis whose
/// `J_z'` is the coupling axis: `J_x -> J_z'`, `J_y -> J_y'`, `J_z -> -J_x'`.
#[derive(Debug, Clone)]
pub struct OriginalFrame {
    pub jx: Banded<Complex64>,
    pub jy: Banded<Complex64>,
    pub jz: Banded<Complex64>,
    pub jplus: Banded<Complex64>,
}

impl OriginalFrame {
    pub fn from_rotated(rotated: &SpinMatrices) -> Self {
        let jx = rotated.jz.clone();
        let jy = rotated.jy.clone();
        let jz = rotated.jx.scale(Complex64::new(-1.0, 0.0));
        let jplus = jx.add(&jy.scale(Complex64::new(0.0, 1.0)));
        Self { jx, jy, jz, jplus }
    }

    /// The untransformed dictionary, for states written in the `J_z` Dicke basis.
    pub fn identity_frame(spin: &SpinMatrices) -> Self {
        Self { jx: spin.jx.clone(), jy: spin.jy.clone(), jz: spin.jz.clone(), jplus: spin.jplus.clone() }
    }
}
