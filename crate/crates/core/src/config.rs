// Copyright 2026 The confine-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! JSON run configuration and its resolution into a runnable experiment.
//!
//! Frequencies are MHz_2pi numbers and times are µs. Sample times and every
//! time written to output files are measured from the start of the
//! simulation stage (`t1`).

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::engine::{EvolveOptions, StateVector, DEFAULT_MAX_SITES};
use crate::error::{Error, Result};
use crate::model::{
    build_geometry, from_mhz2pi, h_pattern, map_ising_to_rydberg, neel_bits, Boundary, DeltaGloConvention, Geometry,
    HParity, Instance, IsingParams, RydbergParams, Truncation, DEFAULT_C6_MHZ2PI, DEFAULT_SPACING_UM,
};
use crate::noise::{Channels, Distribution, NoiseSpec};
use crate::par::Exec;
use crate::schedule::{build_prep_schedule, build_sim_schedule, concat, ConstantControls, ControlSource, PrepProtocol, PulseSchedule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    #[serde(rename = "L")]
    pub n: usize,
    pub a_um: f64,
    pub turns: Vec<usize>,
    pub turn_angle_deg: f64,
    pub boundary: Boundary,
    pub interactions: Truncation,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            n: 16,
            a_um: DEFAULT_SPACING_UM,
            turns: Vec::new(),
            turn_angle_deg: 60.0,
            boundary: Boundary::Open,
            interactions: Truncation::Full,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsConfig {
    pub hx: f64,
    pub hz: f64,
    /// Pre-quench transverse field, used by the semiclassical overlay.
    pub hx_pre: f64,
    #[serde(rename = "C6_MHz2pi_um6", skip_serializing_if = "Option::is_none")]
    pub c6_mhz2pi_um6: Option<f64>,
    /// Alternative to C6: nearest-neighbour coupling at spacing `a_um`.
    #[serde(rename = "U_nn_MHz2pi", skip_serializing_if = "Option::is_none")]
    pub u_nn_mhz2pi: Option<f64>,
    pub delta_glo_convention: DeltaGloConvention,
    pub h_parity: HParity,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        PhysicsConfig {
            hx: 0.25,
            hz: 0.0,
            hx_pre: 0.0,
            c6_mhz2pi_um6: None,
            u_nn_mhz2pi: None,
            delta_glo_convention: DeltaGloConvention::Derived,
            h_parity: HParity::Odd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Néel preparation from the ground state, then quench, hold and ramp down.
    #[default]
    Device,
    /// Start in the Néel product state and switch the drive on instantly.
    Sudden,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    pub protocol: Protocol,
    #[serde(rename = "omega_pi_MHz2pi")]
    pub omega_pi_mhz2pi: f64,
    pub t_pi_us: f64,
    pub t_quench_us: f64,
    pub t_loc_us: f64,
    #[serde(rename = "delta_loc_min_MHz2pi")]
    pub delta_loc_min_mhz2pi: f64,
    pub t_sim_us: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            protocol: Protocol::Device,
            omega_pi_mhz2pi: 2.05,
            t_pi_us: 0.15,
            t_quench_us: 0.05,
            t_loc_us: 0.2,
            delta_loc_min_mhz2pi: -7.5,
            t_sim_us: 1.5,
        }
    }
}

impl ScheduleConfig {
    pub fn prep_protocol(&self) -> PrepProtocol {
        PrepProtocol {
            omega_pi: from_mhz2pi(self.omega_pi_mhz2pi),
            t_pi: self.t_pi_us,
            t_quench: self.t_quench_us,
            t_loc: self.t_loc_us,
            delta_loc_min: from_mhz2pi(self.delta_loc_min_mhz2pi),
        }
    }

    /// Length of the simulation stage measured from `t1`.
    pub fn sim_duration(&self) -> f64 {
        match self.protocol {
            Protocol::Device => 2.0 * self.t_quench_us + self.t_sim_us,
            Protocol::Sudden => self.t_sim_us,
        }
    }

    /// End of the constant-drive hold, measured from `t1`.
    pub fn hold_end(&self) -> f64 {
        match self.protocol {
            Protocol::Device => self.t_quench_us + self.t_sim_us,
            Protocol::Sudden => self.t_sim_us,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub sigma_pos_um: f64,
    pub rel_omega: f64,
    #[serde(rename = "abs_delta_glo_MHz2pi")]
    pub abs_delta_glo_mhz2pi: f64,
    pub rel_delta_loc: f64,
    pub abs_h: f64,
    pub scale: f64,
    pub distribution: Distribution,
    pub channels: Channels,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        let s = NoiseSpec::default();
        NoiseConfig {
            sigma_pos_um: s.sigma_pos,
            rel_omega: s.rel_omega,
            abs_delta_glo_mhz2pi: s.abs_delta_glo,
            rel_delta_loc: s.rel_delta_loc,
            abs_h: s.abs_h,
            scale: s.scale,
            distribution: s.distribution,
            channels: Channels::ALL,
        }
    }
}

impl NoiseConfig {
    pub fn spec(&self, seed: u64) -> NoiseSpec {
        NoiseSpec {
            sigma_pos: self.sigma_pos_um,
            rel_omega: self.rel_omega,
            abs_delta_glo: self.abs_delta_glo_mhz2pi,
            rel_delta_loc: self.rel_delta_loc,
            abs_h: self.abs_h,
            scale: self.scale,
            seed,
            distribution: self.distribution,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExecutionConfig {
    pub dt_us: f64,
    /// Explicit sample times; when absent a uniform grid of `sample_step_us`
    /// up to the end of the hold is used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_times_us: Option<Vec<f64>>,
    pub sample_step_us: f64,
    pub n_realizations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub seed: u64,
    pub parallel: bool,
    pub max_sites: usize,
}

impl Default for ExecutionConfig {
    fn default() -> Self {
        ExecutionConfig {
            dt_us: 1e-3,
            sample_times_us: None,
            sample_step_us: 0.05,
            n_realizations: 1,
            threads: None,
            seed: 0,
            parallel: true,
            max_sites: DEFAULT_MAX_SITES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    /// Defaults to the largest distance the bulk window allows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_max: Option<usize>,
    pub bulk_margin: usize,
    pub front_threshold: f64,
    pub quadrature_panels: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            d_max: None,
            bulk_margin: 1,
            front_threshold: crate::analysis::DEFAULT_THRESHOLD,
            quadrature_panels: crate::semiclassical::DEFAULT_PANELS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Also write the state at every sample time (`trajectory.bin/.json`).
    pub trajectory: bool,
    /// Also write `schedule.json` and a sampled `schedule.csv`.
    pub schedule: bool,
    /// Sample this many shots per time and write `shots.csv`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_shots: Option<usize>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            trajectory: false,
            schedule: false,
            n_shots: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub physics: PhysicsConfig,
    pub schedule: ScheduleConfig,
    pub noise: NoiseConfig,
    pub execution: ExecutionConfig,
    pub analysis: AnalysisConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let g = &self.geometry;
        if g.n < 3 {
            return bad(format!("geometry.L must be at least 3, got {}", g.n));
        }
        if !(g.a_um > 0.0) {
            return bad(format!("geometry.a_um must be positive, got {}", g.a_um));
        }
        if self.physics.c6_mhz2pi_um6.is_some() && self.physics.u_nn_mhz2pi.is_some() {
            return bad("set at most one of physics.C6_MHz2pi_um6 and physics.U_nn_MHz2pi".into());
        }
        let ex = &self.execution;
        if !(ex.dt_us > 0.0) {
            return bad(format!("execution.dt_us must be positive, got {}", ex.dt_us));
        }
        if ex.sample_times_us.is_none() && !(ex.sample_step_us > 0.0) {
            return bad("execution.sample_step_us must be positive".into());
        }
        if ex.n_realizations == 0 {
            return bad("execution.n_realizations must be at least 1".into());
        }
        if self.analysis.quadrature_panels == 0 {
            return bad("analysis.quadrature_panels must be positive".into());
        }
        self.noise.spec(ex.seed).validate()
    }

    pub fn c6(&self) -> f64 {
        match (self.physics.c6_mhz2pi_um6, self.physics.u_nn_mhz2pi) {
            (_, Some(u)) => from_mhz2pi(u) * self.geometry.a_um.powi(6),
            (Some(c), None) => from_mhz2pi(c),
            (None, None) => from_mhz2pi(DEFAULT_C6_MHZ2PI),
        }
    }

    pub fn u_nn(&self) -> f64 {
        self.c6() / self.geometry.a_um.powi(6)
    }

    pub fn geometry(&self) -> Result<Geometry> {
        let g = &self.geometry;
        match g.boundary {
            Boundary::Open => build_geometry(g.n, g.a_um, &g.turns, g.turn_angle_deg),
            Boundary::Ring => Geometry::ring(g.n, g.a_um),
        }
    }

    pub fn h_pattern(&self) -> Vec<f64> {
        h_pattern(self.geometry.n, self.physics.h_parity)
    }

    pub fn rydberg(&self) -> Result<RydbergParams> {
        let u = self.u_nn();
        let ising = IsingParams::uniform(u / 4.0, self.physics.hx, self.physics.hz, self.geometry.n);
        map_ising_to_rydberg(&ising, u, self.c6(), self.physics.h_parity, self.physics.delta_glo_convention)
    }

    pub fn instance(&self) -> Result<Instance> {
        Instance::new(self.geometry()?, self.c6(), self.geometry.interactions, &self.h_pattern())
    }

    pub fn d_max(&self) -> usize {
        let width = self.geometry.n.saturating_sub(2 * self.analysis.bulk_margin);
        self.analysis.d_max.unwrap_or(width.saturating_sub(1))
    }

    pub fn exec(&self) -> Exec {
        if self.execution.parallel {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }

    pub fn evolve_options(&self) -> EvolveOptions {
        EvolveOptions {
            dt: self.execution.dt_us,
            exec: self.exec(),
            max_sites: self.execution.max_sites,
        }
    }

    /// Sample times relative to `t1`.
    pub fn sample_times(&self) -> Result<Vec<f64>> {
        let end = self.schedule.sim_duration();
        let mut times = match &self.execution.sample_times_us {
            Some(t) => t.clone(),
            None => {
                let step = self.execution.sample_step_us;
                let hold = self.schedule.hold_end();
                let n = (hold / step + 1e-9).floor() as usize;
                (0..=n).map(|k| k as f64 * step).collect()
            }
        };
        if let Some(t) = times.iter().find(|&&t| !(0.0..=end + 1e-12).contains(&t)) {
            return Err(Error::Config(format!("sample time {t} outside the simulation stage [0, {end}]")));
        }
        if times.is_empty() {
            return Err(Error::Config("no sample times".into()));
        }
        times.sort_by(f64::total_cmp);
        times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
        Ok(times)
    }

    pub fn experiment(&self) -> Result<Experiment> {
        self.validate()?;
        let ryd = self.rydberg()?;
        let n = self.geometry.n;
        let parity = self.physics.h_parity;
        let (source, initial, t1) = match self.schedule.protocol {
            Protocol::Device => {
                let prep = build_prep_schedule(&self.schedule.prep_protocol())?;
                let sim = build_sim_schedule(&ryd, self.schedule.t_quench_us, self.schedule.t_sim_us)?;
                let s = concat(&prep, &sim)?;
                let t1 = s.stage_marks[0];
                (Source::Device(s), StateVector::basis_with_limit(&vec![false; n], self.execution.max_sites)?, t1)
            }
            Protocol::Sudden => (
                Source::Sudden(ConstantControls::new(&ryd, self.schedule.t_sim_us)),
                StateVector::basis_with_limit(&neel_bits(n, parity), self.execution.max_sites)?,
                0.0,
            ),
        };
        let relative_times = self.sample_times()?;
        Ok(Experiment {
            instance: self.instance()?,
            ryd,
            source,
            initial,
            t1,
            absolute_times: relative_times.iter().map(|t| t + t1).collect(),
            relative_times,
        })
    }
}

#[derive(Debug, Clone)]
pub enum Source {
    Device(PulseSchedule),
    Sudden(ConstantControls),
}

impl Source {
    pub fn as_dyn(&self) -> &dyn ControlSource {
        match self {
            Source::Device(s) => s,
            Source::Sudden(c) => c,
        }
    }
}

/// A resolved configuration: everything needed to evolve and analyse.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub instance: Instance,
    pub ryd: RydbergParams,
    pub source: Source,
    pub initial: StateVector,
    /// Start of the simulation stage on the schedule clock.
    pub t1: f64,
    pub relative_times: Vec<f64>,
    pub absolute_times: Vec<f64>,
}
