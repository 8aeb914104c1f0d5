// Copyright 2026 The confine-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Reference propagators written directly on the computational basis, with
//! no code shared with the library's evolution kernels.

#![allow(dead_code)]

use num_complex::Complex64;

/// Hamiltonian `Σ_i c_x σˣ_i + diag(E)` on `n` qubits.
pub struct SparseHamiltonian {
    pub n: usize,
    pub cx: f64,
    pub diag: Vec<f64>,
}

impl SparseHamiltonian {
    fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        for (b, o) in out.iter_mut().enumerate() {
            let mut acc = v[b] * self.diag[b];
            for i in 0..self.n {
                acc += v[b ^ (1 << i)] * self.cx;
            }
            *o = acc;
        }
    }

    fn bound(&self) -> f64 {
        let d = self.diag.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        d + self.n as f64 * self.cx.abs()
    }

    /// `ψ ← exp(-i H t) ψ` by a Taylor series on sub-steps with `‖H‖τ ≤ 0.5`.
    pub fn propagate(&self, psi: &mut [Complex64], t: f64) {
        let steps = (2.0 * self.bound() * t).ceil().max(1.0) as usize;
        let tau = t / steps as f64;
        let mut term = vec![Complex64::new(0.0, 0.0); psi.len()];
        let mut next = term.clone();
        for _ in 0..steps {
            term.copy_from_slice(psi);
            for k in 1..60 {
                self.apply(&term, &mut next);
                let f = Complex64::new(0.0, -tau / k as f64);
                let mut size = 0.0;
                for (p, (t, x)) in psi.iter_mut().zip(term.iter_mut().zip(&next)) {
                    *t = x * f;
                    *p += *t;
                    size += t.norm_sqr();
                }
                if size < 1e-36 {
                    break;
                }
            }
        }
    }
}

pub fn spin(b: usize, i: usize) -> f64 {
    if (b >> i) & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// `C_d = mean_i (⟨σᶻ_i σᶻ_{i+d}⟩ − ⟨σᶻ_i⟩⟨σᶻ_{i+d}⟩)` over `i` in `[lo, hi - d)`.
pub fn correlations(psi: &[Complex64], n: usize, d_max: usize, margin: usize) -> Vec<f64> {
    let p: Vec<f64> = psi.iter().map(|a| a.norm_sqr()).collect();
    let z = |i: usize| p.iter().enumerate().map(|(b, w)| w * spin(b, i)).sum::<f64>();
    let zz = |i: usize, j: usize| p.iter().enumerate().map(|(b, w)| w * spin(b, i) * spin(b, j)).sum::<f64>();
    (1..=d_max)
        .map(|d| {
            let range = margin..n - margin - d;
            let count = range.len() as f64;
            range.map(|i| zz(i, i + d) - z(i) * z(i + d)).sum::<f64>() / count
        })
        .collect()
}

/// Least-squares slope, intercept and R² of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx, if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 })
}
