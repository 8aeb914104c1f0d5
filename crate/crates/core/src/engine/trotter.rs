// Copyright 2026 The confine-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Symmetric second-order splitting `e^{-iD dt/2} e^{-iX dt} e^{-iD dt/2}`
//! with D the σᶻ/σᶻσᶻ part and X the σˣ part. Controls are sampled at the
//! midpoint of each step, and steps never straddle a waveform breakpoint or a
//! requested sample time.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::par::{for_each_indexed, for_each_pair, Exec};
use crate::schedule::ControlSource;

use super::terms::{diagonal_energies, DiagonalModel, HamiltonianTerms};
use super::{StateVector, DEFAULT_MAX_SITES};

const TIME_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Target step in µs; each segment uses the largest step ≤ dt that
    /// divides it evenly.
    pub dt: f64,
    pub exec: Exec,
    pub max_sites: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            dt: 1e-3,
            exec: Exec::default(),
            max_sites: DEFAULT_MAX_SITES,
        }
    }
}

/// `steps` equal steps of length `h` covering `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
    pub h: f64,
}

/// Partition `[0, duration]` at every control breakpoint and sample time.
pub fn step_plan(source: &dyn ControlSource, sample_times: &[f64], dt: f64) -> Result<Vec<Segment>> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let shortest = source.shortest_segment();
    if dt > shortest + TIME_EPS {
        return Err(Error::ControlAliasing { dt, segment: shortest });
    }
    let end = source.duration();
    if let Some(&t) = sample_times.iter().find(|&&t| !(t >= -TIME_EPS && t <= end + TIME_EPS)) {
        return Err(Error::OutOfDomain { t, end });
    }
    let mut marks = source.breakpoints();
    marks.extend(sample_times.iter().map(|t| t.clamp(0.0, end)));
    marks.push(0.0);
    marks.push(end);
    marks.sort_by(f64::total_cmp);
    marks.dedup_by(|a, b| (*a - *b).abs() <= TIME_EPS);

    Ok(marks
        .windows(2)
        .map(|w| {
            let len = w[1] - w[0];
            let steps = ((len / dt) - 1e-9).ceil().max(1.0) as usize;
            Segment {
                start: w[0],
                end: w[1],
                steps,
                h: len / steps as f64,
            }
        })
        .collect())
}

pub(crate) fn sorted_samples(sample_times: &[f64]) -> Vec<f64> {
    let mut s = sample_times.to_vec();
    s.sort_by(f64::total_cmp);
    s.dedup_by(|a, b| (*a - *b).abs() <= TIME_EPS);
    s
}

fn apply_phases(exec: Exec, amps: &mut [Complex64], phases: &[Complex64]) {
    for_each_indexed(exec, amps, |b, a| *a *= phases[b]);
}

/// `e^{-iθσˣ}` on one site: `a0 ← cos θ a0 − i sin θ a1` and vice versa.
fn rotate_x(exec: Exec, amps: &mut [Complex64], site: usize, theta: f64) {
    if theta == 0.0 {
        return;
    }
    let (s, c) = theta.sin_cos();
    let mis = Complex64::new(0.0, -s);
    for_each_pair(exec, amps, 1 << site, |a0, a1| {
        let (x0, x1) = (*a0, *a1);
        *a0 = x0 * c + x1 * mis;
        *a1 = x1 * c + x0 * mis;
    });
}

/// One symmetric Trotter step of length `dt` under fixed `terms`.
pub fn trotter_step(state: &mut StateVector, terms: &HamiltonianTerms, dt: f64, exec: Exec) -> Result<()> {
    if terms.n_sites() != state.n_sites() {
        return Err(Error::InvalidArgument("terms and state disagree on the site count".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let energies = diagonal_energies(terms, exec);
    let mut phases = vec![Complex64::new(0.0, 0.0); energies.len()];
    for_each_indexed(exec, &mut phases, |b, p| *p = Complex64::from_polar(1.0, -energies[b] * dt * 0.5));
    let amps = state.amplitudes_mut();
    apply_phases(exec, amps, &phases);
    for (i, &x) in terms.x.iter().enumerate() {
        rotate_x(exec, amps, i, x * dt);
    }
    apply_phases(exec, amps, &phases);
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub state: StateVector,
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
}

/// Reusable propagator for one [`Instance`]: the static part of the diagonal
/// energies is computed once.
pub struct Evolver<'a> {
    instance: &'a Instance,
    diag: DiagonalModel,
    opts: EvolveOptions,
}

struct PhaseCache {
    key: Option<[u64; 3]>,
    phases: Vec<Complex64>,
}

impl<'a> Evolver<'a> {
    pub fn new(instance: &'a Instance, opts: EvolveOptions) -> Result<Self> {
        if instance.len() > opts.max_sites {
            return Err(Error::Capacity(format!("{} sites exceeds the state-vector limit of {}", instance.len(), opts.max_sites)));
        }
        Ok(Evolver {
            instance,
            diag: DiagonalModel::new(instance, opts.exec)?,
            opts,
        })
    }

    pub fn options(&self) -> &EvolveOptions {
        &self.opts
    }

    /// Evolve `state` over the whole of `source`, calling `observe(t, state)`
    /// at each distinct sample time in increasing order.
    pub fn run<F>(&self, state: &mut StateVector, source: &dyn ControlSource, sample_times: &[f64], mut observe: F) -> Result<()>
    where
        F: FnMut(f64, &StateVector) -> Result<()>,
    {
        if state.n_sites() != self.instance.len() {
            return Err(Error::InvalidArgument("state and instance disagree on the site count".into()));
        }
        let exec = self.opts.exec;
        let plan = step_plan(source, sample_times, self.opts.dt)?;
        let samples = sorted_samples(sample_times);
        let mut next = 0;
        let mut emit = |t: f64, st: &StateVector, next: &mut usize| -> Result<()> {
            while *next < samples.len() && (samples[*next] - t).abs() <= TIME_EPS {
                observe(samples[*next], st)?;
                *next += 1;
            }
            Ok(())
        };
        emit(0.0, state, &mut next)?;

        let mut cache = PhaseCache {
            key: None,
            phases: vec![Complex64::new(0.0, 0.0); 1 << self.instance.len()],
        };
        for seg in &plan {
            for k in 0..seg.steps {
                let mid = seg.start + (k as f64 + 0.5) * seg.h;
                let c = source.controls(mid)?;
                let half = 0.5 * seg.h;
                let key = [c.delta_glo.to_bits(), c.delta_loc.to_bits(), half.to_bits()];
                if cache.key != Some(key) {
                    let diag = &self.diag;
                    for_each_indexed(exec, &mut cache.phases, |b, p| {
                        *p = Complex64::from_polar(1.0, -diag.energy(b, c.delta_glo, c.delta_loc) * half);
                    });
                    cache.key = Some(key);
                }
                let theta = -0.5 * c.omega * self.instance.omega_scale * seg.h;
                let amps = state.amplitudes_mut();
                apply_phases(exec, amps, &cache.phases);
                for site in 0..self.instance.len() {
                    rotate_x(exec, amps, site, theta);
                }
                apply_phases(exec, amps, &cache.phases);
            }
            emit(seg.end, state, &mut next)?;
        }
        Ok(())
    }
}

/// Evolve and keep a copy of the state at every sample time.
pub fn evolve(
    state: &StateVector,
    source: &dyn ControlSource,
    instance: &Instance,
    opts: EvolveOptions,
    sample_times: &[f64],
) -> Result<Trajectory> {
    let ev = Evolver::new(instance, opts)?;
    let mut psi = state.clone();
    let mut traj = Trajectory::default();
    ev.run(&mut psi, source, sample_times, |t, s| {
        traj.snapshots.push(Snapshot { t, state: s.clone() });
        Ok(())
    })?;
    Ok(traj)
}
