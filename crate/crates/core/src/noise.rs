// Copyright 2026 The confine-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Quenched disorder: static per-realization draws of every device
//! imperfection, and ensemble averaging of connected correlations.
//!
//! Realization `k` of master seed `s` reads ChaCha8 stream `k` of seed `s`,
//! so it is the same draw whatever the ensemble size or evaluation order.
//! Draws are made in a fixed order (positions, Ω, Δ_glo, Δ_loc, h) for every
//! channel; masking a channel zeroes its draw instead of skipping it, so
//! ablations compare the same underlying disorder.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::analysis::{connected_correlations, CorrelationTable, Frame};
use crate::engine::{EvolveOptions, Evolver, SpinMoments, StateVector};
use crate::error::{Error, Result};
use crate::model::{from_mhz2pi, vdw_couplings, Instance};
use crate::par::{map_collect, Exec};
use crate::schedule::ControlSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    #[default]
    Gaussian,
}

/// Widths of the static disorder, before multiplication by `scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSpec {
    /// µm per coordinate
    pub sigma_pos: f64,
    pub rel_omega: f64,
    /// MHz_2pi, per site
    pub abs_delta_glo: f64,
    pub rel_delta_loc: f64,
    pub abs_h: f64,
    pub scale: f64,
    pub seed: u64,
    pub distribution: Distribution,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            sigma_pos: 0.1,
            rel_omega: 0.02,
            abs_delta_glo: 1.0,
            rel_delta_loc: 0.02,
            abs_h: 0.1,
            scale: 1.5,
            seed: 0,
            distribution: Distribution::Gaussian,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        let widths = [
            ("sigma_pos", self.sigma_pos),
            ("rel_omega", self.rel_omega),
            ("abs_delta_glo", self.abs_delta_glo),
            ("rel_delta_loc", self.rel_delta_loc),
            ("abs_h", self.abs_h),
            ("scale", self.scale),
        ];
        for (name, v) in widths {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("noise.{name} must be finite and ≥ 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn with_scale(&self, scale: f64) -> Self {
        NoiseSpec { scale, ..self.clone() }
    }
}

/// Subset of error channels that are switched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Channels {
    pub positions: bool,
    pub omega: bool,
    pub delta_glo: bool,
    pub delta_loc: bool,
    pub h_pattern: bool,
}

impl Default for Channels {
    fn default() -> Self {
        Channels::ALL
    }
}

impl Channels {
    pub const ALL: Channels = Channels {
        positions: true,
        omega: true,
        delta_glo: true,
        delta_loc: true,
        h_pattern: true,
    };
    pub const NONE: Channels = Channels {
        positions: false,
        omega: false,
        delta_glo: false,
        delta_loc: false,
        h_pattern: false,
    };
    pub const H_PATTERN: Channels = Channels {
        h_pattern: true,
        ..Channels::NONE
    };
    /// Everything except the h-pattern.
    pub const POSITIONS_AND_FIELDS: Channels = Channels {
        h_pattern: false,
        ..Channels::ALL
    };
}

/// One static draw of all disordered parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRealization {
    /// µm
    pub position_offsets: Vec<[f64; 2]>,
    pub omega_factor: f64,
    /// rad·µs⁻¹
    pub delta_glo_offsets: Vec<f64>,
    pub delta_loc_factors: Vec<f64>,
    pub h_offsets: Vec<f64>,
}

impl NoiseRealization {
    pub fn identity(n: usize) -> Self {
        NoiseRealization {
            position_offsets: vec![[0.0, 0.0]; n],
            omega_factor: 1.0,
            delta_glo_offsets: vec![0.0; n],
            delta_loc_factors: vec![1.0; n],
            h_offsets: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.h_offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h_offsets.is_empty()
    }

    /// Reset the channels not in `mask` to their ideal values.
    pub fn masked(mut self, mask: Channels) -> Self {
        let ideal = Self::identity(self.len());
        if !mask.positions {
            self.position_offsets = ideal.position_offsets;
        }
        if !mask.omega {
            self.omega_factor = ideal.omega_factor;
        }
        if !mask.delta_glo {
            self.delta_glo_offsets = ideal.delta_glo_offsets;
        }
        if !mask.delta_loc {
            self.delta_loc_factors = ideal.delta_loc_factors;
        }
        if !mask.h_pattern {
            self.h_offsets = ideal.h_offsets;
        }
        self
    }
}

pub fn sample_realization(spec: &NoiseSpec, n_sites: usize, index: u64) -> NoiseRealization {
    if spec.scale == 0.0 {
        return NoiseRealization::identity(n_sites);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index);
    let mut normal = |sigma: f64| -> f64 {
        let z: f64 = StandardNormal.sample(&mut rng);
        spec.scale * sigma * z
    };
    let position_offsets = (0..n_sites).map(|_| [normal(spec.sigma_pos), normal(spec.sigma_pos)]).collect();
    let omega_factor = 1.0 + normal(spec.rel_omega);
    let glo = from_mhz2pi(spec.abs_delta_glo);
    let delta_glo_offsets = (0..n_sites).map(|_| normal(glo)).collect();
    let delta_loc_factors = (0..n_sites).map(|_| 1.0 + normal(spec.rel_delta_loc)).collect();
    let h_offsets = (0..n_sites).map(|_| normal(spec.abs_h)).collect();
    NoiseRealization {
        position_offsets,
        omega_factor,
        delta_glo_offsets,
        delta_loc_factors,
        h_offsets,
    }
}

/// Apply a realization to a copy of `base`: positions shifted and couplings
/// recomputed, Ω scaled, per-site detuning offsets added, and the h-pattern
/// offset, clipped to [0, 1], then scaled by the Δ_loc factor.
pub fn perturb_instance(base: &Instance, r: &NoiseRealization) -> Result<Instance> {
    let n = base.len();
    if r.len() != n {
        return Err(Error::InvalidArgument(format!("realization has {} sites, instance has {n}", r.len())));
    }
    let geometry = base.geometry.displaced(&r.position_offsets);
    let couplings = vdw_couplings(&geometry, base.c6, base.couplings.truncation)?;
    let detuning_offsets = base.detuning_offsets.iter().zip(&r.delta_glo_offsets).map(|(a, b)| a + b).collect();
    let local_weights = (0..n)
        .map(|i| (base.local_weights[i] + r.h_offsets[i]).clamp(0.0, 1.0) * r.delta_loc_factors[i])
        .collect();
    Ok(Instance {
        geometry,
        c6: base.c6,
        couplings,
        omega_scale: base.omega_scale * r.omega_factor,
        detuning_offsets,
        local_weights,
    })
}

/// What each realization evolves and measures.
#[derive(Debug, Clone)]
pub struct EnsembleRequest {
    pub initial: StateVector,
    pub sample_times: Vec<f64>,
    pub d_max: usize,
    pub bulk_margin: usize,
    pub evolve: EvolveOptions,
}

/// Connected correlations `C_d(t)` of one instance (Rydberg frame, unstaggered).
pub fn correlation_rows(instance: &Instance, source: &dyn ControlSource, req: &EnsembleRequest) -> Result<CorrelationTable> {
    let ev = Evolver::new(instance, req.evolve)?;
    let mut psi = req.initial.clone();
    let mut table = CorrelationTable::new(req.d_max, req.bulk_margin);
    let exec = req.evolve.exec;
    ev.run(&mut psi, source, &req.sample_times, |t, s| {
        let m = SpinMoments::from_state(s, exec);
        table.push(t, connected_correlations(&m, req.d_max, req.bulk_margin, Frame::Rydberg)?)
    })?;
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    /// Mean over realizations; `std` is set when there is more than one.
    pub table: CorrelationTable,
    pub n_realizations: usize,
    /// Per-realization tables in index order.
    pub members: Vec<CorrelationTable>,
}

impl EnsembleResult {
    /// `t_us,d,mean_stagC[,std_stagC],n_realizations`.
    pub fn to_csv(&self) -> String {
        let t = &self.table;
        let mut out = String::from(if t.std.is_some() {
            "t_us,d,mean_stagC,std_stagC,n_realizations\n"
        } else {
            "t_us,d,mean_stagC,n_realizations\n"
        });
        for (ti, time) in t.times.iter().enumerate() {
            for (k, &d) in t.distances.iter().enumerate() {
                let sign = if d % 2 == 1 { -1.0 } else { 1.0 };
                let _ = write!(out, "{time},{d},{}", sign * t.values[ti][k]);
                if let Some(s) = &t.std {
                    let _ = write!(out, ",{}", s[ti][k]);
                }
                let _ = writeln!(out, ",{}", self.n_realizations);
            }
        }
        out
    }
}

/// Mean and sample standard deviation over `members`, accumulated in order.
pub fn aggregate(members: Vec<CorrelationTable>) -> Result<EnsembleResult> {
    let first = members.first().ok_or_else(|| Error::InvalidArgument("empty ensemble".into()))?;
    let n = members.len();
    let mut mean = first.clone();
    mean.std = None;
    for (ti, row) in mean.values.iter_mut().enumerate() {
        for (k, v) in row.iter_mut().enumerate() {
            *v = members.iter().map(|m| m.values[ti][k]).sum::<f64>() / n as f64;
        }
    }
    if n > 1 {
        let std = mean
            .values
            .iter()
            .enumerate()
            .map(|(ti, row)| {
                row.iter()
                    .enumerate()
                    .map(|(k, mu)| {
                        let ss: f64 = members.iter().map(|m| (m.values[ti][k] - mu).powi(2)).sum();
                        (ss / (n - 1) as f64).sqrt()
                    })
                    .collect()
            })
            .collect();
        mean.std = Some(std);
    }
    Ok(EnsembleResult {
        table: mean,
        n_realizations: n,
        members,
    })
}

/// Ensemble restricted to the channels in `mask`; realizations run in
/// parallel under `exec` and are reduced in index order.
pub fn channel_ablation(
    base: &Instance,
    source: &dyn ControlSource,
    spec: &NoiseSpec,
    mask: Channels,
    n_realizations: usize,
    req: &EnsembleRequest,
    exec: Exec,
) -> Result<EnsembleResult> {
    spec.validate()?;
    if n_realizations == 0 {
        return Err(Error::InvalidArgument("n_realizations must be at least 1".into()));
    }
    let indices: Vec<u64> = (0..n_realizations as u64).collect();
    let tables = map_collect(exec, &indices, |&k| -> Result<CorrelationTable> {
        let r = sample_realization(spec, base.len(), k).masked(mask);
        let inst = perturb_instance(base, &r)?;
        correlation_rows(&inst, source, req)
    });
    aggregate(tables.into_iter().collect::<Result<Vec<_>>>()?)
}

pub fn run_ensemble(
    base: &Instance,
    source: &dyn ControlSource,
    spec: &NoiseSpec,
    n_realizations: usize,
    req: &EnsembleRequest,
    exec: Exec,
) -> Result<EnsembleResult> {
    channel_ablation(base, source, spec, Channels::ALL, n_realizations, req, exec)
}
