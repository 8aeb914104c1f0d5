// Copyright 2026 The confine-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Single-meson semiclassics of the quenched Ising chain.
//!
//! Everything here works in units where J = 1: energies in J, times in 1/J,
//! distances in lattice sites. [`front_overlay`] converts to µs at the
//! boundary using `J = U_nn/4`.
//!
//! The Bogoliubov angle is `θ_k(h) = atan2(sin k, cos k − h)` and the
//! pre-quench field defaults to `h = 0`, so `Δθ_k = θ_k(h^x) − k`. The
//! folding in [`meson_distance`] uses the period `k/(|h^z| σ̄)`, which is the
//! reading under which the kink separation starts and returns to zero.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const DEFAULT_PANELS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MesonModel {
    pub hx: f64,
    /// Sign is ignored; only |h^z| enters.
    pub hz: f64,
    pub hx_pre: f64,
    /// Even number of Simpson panels on (0, π).
    pub panels: usize,
}

impl MesonModel {
    pub fn new(hx: f64, hz: f64) -> Result<Self> {
        Self::with_pre_quench(hx, hz, 0.0)
    }

    pub fn with_pre_quench(hx: f64, hz: f64, hx_pre: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&hx) {
            return Err(Error::InvalidArgument(format!("h^x = {hx} outside the ordered phase [0, 1)")));
        }
        Ok(MesonModel {
            hx,
            hz: hz.abs(),
            hx_pre,
            panels: DEFAULT_PANELS,
        })
    }

    pub fn with_panels(mut self, panels: usize) -> Self {
        self.panels = panels.max(2) + panels % 2;
        self
    }
}

/// ε(k) = 2J √((cos k − h^x)² + sin² k)
pub fn dispersion(k: f64, hx: f64, j: f64) -> f64 {
    let c = k.cos() - hx;
    2.0 * j * (c * c + k.sin().powi(2)).sqrt()
}

/// v(k) = ∂ε/∂k = 2J h^x sin k / √(1 − 2h^x cos k + h^x²)
pub fn group_velocity(k: f64, hx: f64, j: f64) -> f64 {
    let c = k.cos() - hx;
    let root = (c * c + k.sin().powi(2)).sqrt();
    if root == 0.0 {
        return 0.0;
    }
    2.0 * j * hx * k.sin() / root
}

/// σ̄ = (1 − h^x²)^{1/8}
pub fn sigma_bar(hx: f64) -> f64 {
    (1.0 - hx * hx).max(0.0).powf(0.125)
}

fn bogoliubov_angle(k: f64, h: f64) -> f64 {
    k.sin().atan2(k.cos() - h)
}

/// 𝒦(k) = tan(Δθ_k/2) + h^z σ̄ v(k)/ε²(k), real-valued.
pub fn kink_amplitude(k: f64, m: &MesonModel) -> f64 {
    let dtheta = bogoliubov_angle(k, m.hx) - bogoliubov_angle(k, m.hx_pre);
    let eps = dispersion(k, m.hx, 1.0);
    (0.5 * dtheta).tan() + m.hz * sigma_bar(m.hx) * group_velocity(k, m.hx, 1.0) / (eps * eps)
}

/// n(k) = |𝒦|²/(1 + |𝒦|²)
pub fn excitation_density(k: f64, m: &MesonModel) -> f64 {
    let kk = kink_amplitude(k, m).powi(2);
    kk / (1.0 + kk)
}

/// Kink-pair separation d(t, k) in sites for a pair created at ±k.
pub fn meson_distance(t: f64, k: f64, m: &MesonModel) -> f64 {
    if m.hz == 0.0 {
        return 2.0 * group_velocity(k, m.hx, 1.0) * t;
    }
    let f = m.hz * sigma_bar(m.hx);
    let period = k / f;
    if period <= 0.0 {
        return 0.0;
    }
    let t_fold = t.rem_euclid(period);
    (dispersion(k, m.hx, 1.0) - dispersion(k - 2.0 * f * t_fold, m.hx, 1.0)) / f
}

/// Composite Simpson on [0, π]. The endpoint limits of the front integrands
/// are finite and supplied by `at_end`.
fn simpson(panels: usize, f: impl Fn(f64) -> f64, at_end: (f64, f64)) -> f64 {
    let h = PI / panels as f64;
    let mut acc = at_end.0 + at_end.1;
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(i as f64 * h);
    }
    acc * h / 3.0
}

/// Density-weighted mean separation ⟨d(t)⟩ = ∫ d n dk / ∫ n dk.
pub fn mean_front(t: f64, m: &MesonModel) -> Result<f64> {
    let ends = (excitation_density(0.0, m), excitation_density(PI, m));
    let norm = simpson(m.panels, |k| excitation_density(k, m), ends);
    if !(norm > 0.0) {
        return Err(Error::UndefinedFront);
    }
    // d(t, k) → 0 as k → 0; at k = π it is regular.
    let num = simpson(
        m.panels,
        |k| meson_distance(t, k, m) * excitation_density(k, m),
        (0.0, meson_distance(t, PI, m) * ends.1),
    );
    Ok(num / norm)
}

/// ⟨d⟩ at the given times (µs after the quench), with J in rad·µs⁻¹.
pub fn front_overlay(m: &MesonModel, j: f64, times_us: &[f64]) -> Result<Vec<(f64, f64)>> {
    times_us.iter().map(|&t| Ok((t, mean_front(j * t, m)?))).collect()
}

pub fn overlay_csv(series: &[(f64, f64)]) -> String {
    let mut out = String::from("t_us,d_sites\n");
    for (t, d) in series {
        let _ = writeln!(out, "{t},{d}");
    }
    out
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// max_k v(k) in units of J.
pub fn max_group_velocity(hx: f64) -> f64 {
    golden_max(|k| group_velocity(k, hx, 1.0), 0.0, PI, 1e-12).1
}
