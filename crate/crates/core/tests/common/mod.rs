#![allow(dead_code)]

use dicke_core::ground::{FockGround, SpinMoments};
use dicke_core::qfi::TwoAtomXState;
use num_complex::Complex64;
use rand::Rng;

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Two-atom reduced state of a Fock-basis ground state, traced directly
/// through the splitting
/// `|D_N^k> = Σ_q sqrt(C(2,q) C(N-2,k-q) / C(N,k)) |D_2^q> |D_{N-2}^{k-q}>`
/// with `k` the number of excited atoms. Returned in `{↑↑, ↑↓, ↓↑, ↓↓}`.
pub fn two_atom_partial_trace(fock: &FockGround) -> [[f64; 4]; 4] {
    let n = fock.params.n_atoms;
    assert!(n >= 2);
    let amp = |q: usize, r: usize| (binomial(2, q) * binomial(n - 2, r) / binomial(n, q + r)).sqrt();
    // Symmetric two-atom block indexed by q = number of excited atoms.
    let mut sym = [[0.0; 3]; 3];
    for row in 0..fock.psi.nrows() {
        for r in 0..=n - 2 {
            for q in 0..3 {
                for qp in 0..3 {
                    sym[q][qp] += fock.psi[(row, q + r)] * amp(q, r) * fock.psi[(row, qp + r)] * amp(qp, r);
                }
            }
        }
    }
    // |D_2^2> = ↑↑, |D_2^1> = (↑↓ + ↓↑)/√2, |D_2^0> = ↓↓.
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let embed: [[f64; 3]; 4] = [[0.0, 0.0, 1.0], [0.0, s, 0.0], [0.0, s, 0.0], [1.0, 0.0, 0.0]];
    let mut out = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for q in 0..3 {
                for qp in 0..3 {
                    out[a][b] += embed[a][q] * sym[q][qp] * embed[b][qp];
                }
            }
        }
    }
    out
}

/// Moments of a hypothetical symmetric `N`-atom state whose two-atom
/// marginal is `state` (inverse of the moment-to-state map).
pub fn moments_for(state: &TwoAtomXState, n_atoms: usize) -> SpinMoments {
    let n = n_atoms as f64;
    let nn = n * (n - 1.0);
    let jz2 = (n * n - 4.0 * nn * state.w) / 4.0;
    let transverse = nn * state.y + n / 2.0;
    let jp2 = state.u * nn;
    SpinMoments {
        n_atoms,
        jz: n * (state.v_plus - state.v_minus) / 2.0,
        jz2,
        jp: Complex64::new(0.0, 0.0),
        jp2,
        jx2: 0.5 * (transverse + jp2.re),
        jy2: 0.5 * (transverse - jp2.re),
        anti_pz: Complex64::new(0.0, 0.0),
    }
}

/// A valid X-state: random weights, `w = y`, `u` real with `u² <= v+ v-`.
/// Some draws put exact zeros on the diagonal to reach the rank-deficient cases.
pub fn random_x_state<R: Rng>(rng: &mut R) -> TwoAtomXState {
    let mut draw = |zero_chance: f64| if rng.random::<f64>() < zero_chance { 0.0 } else { rng.random::<f64>() };
    let (a, b, c) = (draw(0.1), draw(0.1), draw(0.1));
    let (a, b, c) = if a + b + c == 0.0 { (1.0, 0.0, 0.0) } else { (a, b, c) };
    let s = a + b + c;
    let (v_plus, v_minus, w) = (a / s, b / s, c / (2.0 * s));
    let frac = if rng.random::<f64>() < 0.1 { 1.0 } else { 2.0 * rng.random::<f64>() - 1.0 };
    let u = frac * (v_plus * v_minus).sqrt();
    TwoAtomXState::new(v_plus, v_minus, w, w, Complex64::new(u, 0.0))
}
