//! Matrix elements `<k|D(d)|l>` of the real displacement operator
//! `D(d) = exp(d (a† - a))` between Fock states.
//!
//! [`displaced_fock_overlap`] evaluates the closed finite sum. Terms are
//! generated by their ratio outward from the largest one, so only a single
//! log-factorial evaluation enters and the error is set by the cancellation
//! of the alternating sum; inputs where that cancellation exceeds
//! [`MAX_CANCELLATION`] are refused. [`overlap_matrix`] fills a whole block
//! from the normalized associated-Laguerre recurrence, which is stable for
//! every index and displacement:
//!
//! ```text
//! <k|D|l> = sgn(d)^(k-l) f_l^(k-l)(d²)   for k >= l,   <k|D(d)|l> = <l|D(-d)|k>
//! f_n = sqrt(n!/(n+a)!) e^{-x/2} x^{a/2} L_n^(a)(x)
//! sqrt((n+1)(n+1+a)) f_{n+1} = (2n+1+a-x) f_n - sqrt(n(n+a)) f_{n-1}
//! ```

use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest Fock index accepted by [`displaced_fock_overlap`].
pub const MAX_FOCK_INDEX: usize = 1000;

/// Largest tolerated `Σ|term|` of the alternating sum, which bounds the
/// absolute rounding error by roughly `MAX_CANCELLATION · min(k, l) · ε`.
pub const MAX_CANCELLATION: f64 = 1e3;

fn ln_factorials() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(MAX_FOCK_INDEX + 1);
        let mut acc = 0.0;
        table.push(0.0);
        for i in 1..=MAX_FOCK_INDEX {
            acc += (i as f64).ln();
            table.push(acc);
        }
        table
    })
}

/// `<k|D(d)|l>` for real `d` from
/// `e^{-d²/2} sqrt(k! l!) Σ_i (-1)^{l-i} d^{k+l-2i} / (i! (k-i)! (l-i)!)`.
pub fn displaced_fock_overlap(k: usize, l: usize, d: f64) -> Result<f64> {
    if k > MAX_FOCK_INDEX || l > MAX_FOCK_INDEX {
        return Err(Error::OverlapUnstable {
            k,
            l,
            d,
            reason: format!("Fock index above {MAX_FOCK_INDEX}"),
        });
    }
    if !d.is_finite() {
        return Err(Error::OverlapUnstable { k, l, d, reason: "non-finite displacement".into() });
    }
    if d == 0.0 {
        return Ok(if k == l { 1.0 } else { 0.0 });
    }
    let lf = ln_factorials();
    let ln_d = d.abs().ln();
    let ln_prefactor = -0.5 * d * d + 0.5 * (lf[k] + lf[l]);
    let ln_term = |i: usize| ln_prefactor + (k + l - 2 * i) as f64 * ln_d - lf[i] - lf[k - i] - lf[l - i];
    let sign = |i: usize| {
        let mut s = if (l - i) % 2 == 0 { 1.0 } else { -1.0 };
        if d < 0.0 && (k + l - 2 * i) % 2 == 1 {
            s = -s;
        }
        s
    };

    let top = k.min(l);
    let peak = (0..=top).max_by(|&a, &b| ln_term(a).total_cmp(&ln_term(b))).unwrap_or(0);
    let peak_term = sign(peak) * ln_term(peak).exp();
    // t_{i+1} / t_i = -(k-i)(l-i) / ((i+1) d²)
    let ratio = |i: usize| -(((k - i) * (l - i)) as f64) / ((i + 1) as f64 * d * d);

    let mut sum = peak_term;
    let mut abs_sum = peak_term.abs();
    let mut t = peak_term;
    for i in peak..top {
        t *= ratio(i);
        sum += t;
        abs_sum += t.abs();
    }
    let mut t = peak_term;
    for i in (0..peak).rev() {
        t /= ratio(i);
        sum += t;
        abs_sum += t.abs();
    }
    if abs_sum > MAX_CANCELLATION {
        return Err(Error::OverlapUnstable {
            k,
            l,
            d,
            reason: format!("alternating sum cancels terms of total size {abs_sum:e}"),
        });
    }
    Ok(sum)
}

/// Block `M[k][l] = <k|D(d)|l>` for `0 <= k, l < size`.
pub fn overlap_matrix(size: usize, d: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(size, size);
    if d == 0.0 {
        m.fill_with_identity();
        return m;
    }
    let x = d * d;
    let ln_x = x.ln();
    let lf = ln_factorials();
    let ln_fact = |n: usize| -> f64 {
        if n <= MAX_FOCK_INDEX {
            lf[n]
        } else {
            lf[MAX_FOCK_INDEX] + ((MAX_FOCK_INDEX + 1)..=n).map(|i| (i as f64).ln()).sum::<f64>()
        }
    };
    for a in 0..size {
        let odd = a % 2 == 1;
        // Sign of d^a below the diagonal, of (-d)^a above it.
        let lower_sign = if odd && d < 0.0 { -1.0 } else { 1.0 };
        let upper_sign = if odd { -lower_sign } else { lower_sign };
        let af = a as f64;
        let mut prev = 0.0;
        let mut cur = (-0.5 * x + 0.5 * af * ln_x - 0.5 * ln_fact(a)).exp();
        for n in 0..size - a {
            m[(n + a, n)] = lower_sign * cur;
            m[(n, n + a)] = upper_sign * cur;
            let nf = n as f64;
            let next = ((2.0 * nf + 1.0 + af - x) * cur - (nf * (nf + af)).sqrt() * prev)
                / ((nf + 1.0) * (nf + 1.0 + af)).sqrt();
            prev = cur;
            cur = next;
        }
    }
    m
}
