// Copyright 2026 The confine-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Reference propagator for small registers.
//!
//! The Hamiltonian is assembled as a dense matrix directly from the
//! occupation-number form `-Ω/2 Σσˣ - Σ Δ_i n_i + Σ U_ij n_i n_j` using
//! Kronecker products, independently of the Pauli expansion used by the
//! Trotter kernel. On each step the controls are frozen at the step midpoint
//! and `exp(-iH h)ψ` is applied with a Taylor series summed to round-off.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::schedule::ControlSource;

use super::trotter::{sorted_samples, step_plan, Snapshot, Trajectory};
use super::StateVector;

pub const ORACLE_MAX_SITES: usize = 12;

fn site_operator(single: &DMatrix<f64>, site: usize, n: usize) -> DMatrix<f64> {
    let id = DMatrix::<f64>::identity(2, 2);
    // basis index = Σ b_i 2^i, so the highest site is the leftmost factor
    let mut m = DMatrix::<f64>::identity(1, 1);
    for k in (0..n).rev() {
        m = m.kronecker(if k == site { single } else { &id });
    }
    m
}

struct DenseModel {
    /// -½ Σ σˣ_i, multiplied by Ω·scale at run time.
    x: DMatrix<f64>,
    /// Diagonals of -Σ n_i, -Σ w_i n_i and -Σ δ_i n_i + Σ U_ij n_i n_j.
    glo: DVector<f64>,
    loc: DVector<f64>,
    fixed: DVector<f64>,
}

impl DenseModel {
    fn new(instance: &Instance) -> Self {
        let n = instance.len();
        let dim = 1usize << n;
        let sx = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let num = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        let number_ops: Vec<DVector<f64>> = (0..n).map(|i| site_operator(&num, i, n).diagonal()).collect();

        let mut x = DMatrix::<f64>::zeros(dim, dim);
        for i in 0..n {
            x -= site_operator(&sx, i, n) * 0.5;
        }
        let mut glo = DVector::<f64>::zeros(dim);
        let mut loc = DVector::<f64>::zeros(dim);
        let mut fixed = DVector::<f64>::zeros(dim);
        for (i, ni) in number_ops.iter().enumerate() {
            glo -= ni;
            loc -= ni * instance.local_weights[i];
            fixed -= ni * instance.detuning_offsets[i];
        }
        for p in instance.couplings.pairs() {
            fixed += number_ops[p.i].component_mul(&number_ops[p.j]) * p.u;
        }
        DenseModel { x, glo, loc, fixed }
    }
}

/// `(re, im) ← exp(-i (a X + diag) h) (re, im)` by Taylor series on a
/// spectrum-centred, norm-scaled generator.
fn apply_exp(re: &mut DVector<f64>, im: &mut DVector<f64>, x: &DMatrix<f64>, a: f64, diag: &DVector<f64>, h: f64) {
    let (lo, hi) = diag.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, u), &d| (l.min(d), u.max(d)));
    let shift = 0.5 * (lo + hi);
    let centred = diag.add_scalar(-shift);
    let max_row_x = x.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let norm = a.abs() * max_row_x + 0.5 * (hi - lo);
    let substeps = (norm * h).ceil().max(1.0) as usize;
    let tau = h / substeps as f64;

    let apply_h = |v: &DVector<f64>| -> DVector<f64> {
        let mut out = x * v;
        out *= a;
        out += centred.component_mul(v);
        out
    };

    for _ in 0..substeps {
        let mut t_re = re.clone();
        let mut t_im = im.clone();
        for k in 1..=80 {
            // term ← (-i τ / k) H term
            let h_re = apply_h(&t_re);
            let h_im = apply_h(&t_im);
            let f = tau / k as f64;
            t_re = h_im * f;
            t_im = h_re * (-f);
            *re += &t_re;
            *im += &t_im;
            let size = t_re.norm_squared() + t_im.norm_squared();
            if size < 1e-34 {
                break;
            }
        }
        // restore the removed global phase e^{-i shift τ}
        let (s, c) = (-shift * tau).sin_cos();
        let new_re = &*re * c - &*im * s;
        let new_im = &*re * s + &*im * c;
        *re = new_re;
        *im = new_im;
    }
}

/// Ground-truth evolution on the midpoint-sampled grid of width `dt_ref`.
pub fn exact_evolve_oracle(
    state: &StateVector,
    source: &dyn ControlSource,
    instance: &Instance,
    dt_ref: f64,
    sample_times: &[f64],
) -> Result<Trajectory> {
    let n = instance.len();
    if n > ORACLE_MAX_SITES {
        return Err(Error::Capacity(format!("oracle supports at most {ORACLE_MAX_SITES} sites, got {n}")));
    }
    if state.n_sites() != n {
        return Err(Error::InvalidArgument("state and instance disagree on the site count".into()));
    }
    let model = DenseModel::new(instance);
    let plan = step_plan(source, sample_times, dt_ref)?;
    let samples = sorted_samples(sample_times);

    let mut re = DVector::from_iterator(1 << n, state.amplitudes().iter().map(|z| z.re));
    let mut im = DVector::from_iterator(1 << n, state.amplitudes().iter().map(|z| z.im));
    let to_state = |re: &DVector<f64>, im: &DVector<f64>| {
        StateVector::from_amplitudes(re.iter().zip(im.iter()).map(|(&r, &i)| Complex64::new(r, i)).collect())
    };

    let mut traj = Trajectory::default();
    let mut next = 0;
    let mut emit = |t: f64, re: &DVector<f64>, im: &DVector<f64>, next: &mut usize| -> Result<()> {
        while *next < samples.len() && (samples[*next] - t).abs() <= 1e-12 {
            traj.snapshots.push(Snapshot {
                t: samples[*next],
                state: to_state(re, im)?,
            });
            *next += 1;
        }
        Ok(())
    };
    emit(0.0, &re, &im, &mut next)?;
    for seg in &plan {
        for k in 0..seg.steps {
            let c = source.controls(seg.start + (k as f64 + 0.5) * seg.h)?;
            let diag = &model.fixed + &model.glo * c.delta_glo + &model.loc * c.delta_loc;
            apply_exp(&mut re, &mut im, &model.x, c.omega * instance.omega_scale, &diag, seg.h);
        }
        emit(seg.end, &re, &im, &mut next)?;
    }
    Ok(traj)
}
