// Copyright 2026 The confine-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Piecewise-linear control waveforms and the two-stage protocol: Néel
//! preparation with a local detuning, then a quench-and-hold of (Ω, Δ_glo,
//! Δ_loc).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{from_mhz2pi, to_mhz2pi, RydbergParams};

const JUNCTION_TOL: f64 = 1e-12;

/// Instantaneous drive values in rad·µs⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Controls {
    pub omega: f64,
    pub delta_glo: f64,
    pub delta_loc: f64,
}

/// Anything the engine can integrate over: a time window `[0, duration]`
/// with controls that are linear between consecutive breakpoints.
pub trait ControlSource: Sync {
    fn duration(&self) -> f64;
    fn controls(&self, t: f64) -> Result<Controls>;
    /// Sorted times (including 0 and `duration`) at which the controls may
    /// have a kink.
    fn breakpoints(&self) -> Vec<f64>;
    /// Shortest interval between consecutive breakpoints of one waveform.
    fn shortest_segment(&self) -> f64;
}

/// Piecewise-linear waveform. Values are stored in MHz_2pi so that the JSON
/// form round-trips exactly; [`Waveform::eval`] returns rad·µs⁻¹.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct Waveform {
    points: Vec<[f64; 2]>,
}

impl TryFrom<Vec<[f64; 2]>> for Waveform {
    type Error = Error;

    fn try_from(points: Vec<[f64; 2]>) -> Result<Self> {
        Waveform::from_mhz2pi(points)
    }
}

impl From<Waveform> for Vec<[f64; 2]> {
    fn from(w: Waveform) -> Self {
        w.points
    }
}

impl Waveform {
    /// Breakpoints as `(µs, MHz_2pi)`.
    pub fn from_mhz2pi(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Schedule("a waveform needs at least two breakpoints".into()));
        }
        if points[0][0] != 0.0 {
            return Err(Error::Schedule(format!("first breakpoint at t = {} instead of 0", points[0][0])));
        }
        if points.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::Schedule("non-finite breakpoint".into()));
        }
        if points.windows(2).any(|w| w[1][0] <= w[0][0]) {
            return Err(Error::Schedule("breakpoint times must be strictly increasing".into()));
        }
        Ok(Waveform { points })
    }

    /// Breakpoints as `(µs, rad·µs⁻¹)`.
    pub fn from_angular(points: &[(f64, f64)]) -> Result<Self> {
        Self::from_mhz2pi(points.iter().map(|&(t, w)| [t, to_mhz2pi(w)]).collect())
    }

    pub fn constant(value: f64, duration: f64) -> Result<Self> {
        Self::from_angular(&[(0.0, value), (duration, value)])
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn end(&self) -> f64 {
        self.points[self.points.len() - 1][0]
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let end = self.end();
        if !(0.0..=end).contains(&t) {
            return Err(Error::OutOfDomain { t, end });
        }
        // first segment whose right end reaches t
        let k = self.points.partition_point(|p| p[0] < t).clamp(1, self.points.len() - 1);
        let [t0, v0] = self.points[k - 1];
        let [t1, v1] = self.points[k];
        let v = v0 + (v1 - v0) * ((t - t0) / (t1 - t0));
        Ok(from_mhz2pi(v))
    }

    /// Exact integral over the whole domain, rad.
    pub fn integral(&self) -> f64 {
        let s: f64 = self.points.windows(2).map(|w| 0.5 * (w[0][1] + w[1][1]) * (w[1][0] - w[0][0])).sum();
        from_mhz2pi(s)
    }

    fn shifted(&self, dt: f64) -> impl Iterator<Item = [f64; 2]> + '_ {
        self.points.iter().map(move |p| [p[0] + dt, p[1]])
    }

    fn shortest_segment(&self) -> f64 {
        self.points.windows(2).map(|w| w[1][0] - w[0][0]).fold(f64::INFINITY, f64::min)
    }
}

/// Preparation-stage timings; defaults are the hardware-tested values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrepProtocol {
    /// rad·µs⁻¹
    pub omega_pi: f64,
    pub t_pi: f64,
    pub t_quench: f64,
    pub t_loc: f64,
    /// rad·µs⁻¹, negative
    pub delta_loc_min: f64,
}

impl Default for PrepProtocol {
    fn default() -> Self {
        PrepProtocol {
            omega_pi: from_mhz2pi(2.05),
            t_pi: 0.15,
            t_quench: 0.05,
            t_loc: 0.2,
            delta_loc_min: from_mhz2pi(-7.5),
        }
    }
}

impl PrepProtocol {
    pub fn t_prep(&self) -> f64 {
        2.0 * self.t_loc + 2.0 * self.t_quench + self.t_pi
    }
}

/// Waveforms on a local time axis starting at 0. An empty fragment has
/// duration 0 and no waveforms.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleFragment {
    waves: Option<[Waveform; 3]>,
    pub duration: f64,
    pub h_pattern: Option<Vec<f64>>,
}

impl ScheduleFragment {
    pub fn empty() -> Self {
        ScheduleFragment {
            waves: None,
            duration: 0.0,
            h_pattern: None,
        }
    }

    pub fn omega(&self) -> Option<&Waveform> {
        self.waves.as_ref().map(|w| &w[0])
    }

    pub fn delta_glo(&self) -> Option<&Waveform> {
        self.waves.as_ref().map(|w| &w[1])
    }

    pub fn delta_loc(&self) -> Option<&Waveform> {
        self.waves.as_ref().map(|w| &w[2])
    }
}

fn check_durations(named: &[(&str, f64)]) -> Result<()> {
    for &(name, v) in named {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Schedule(format!("{name} must be a positive duration, got {v}")));
        }
    }
    Ok(())
}

/// Néel preparation: Δ_loc ramps to its minimum over `t_loc`, Ω performs a
/// trapezoidal pulse (ramps of `t_quench`, flat top `t_pi`) while Δ_loc is
/// held, then Δ_loc ramps back. Δ_glo stays at zero.
pub fn build_prep_schedule(p: &PrepProtocol) -> Result<ScheduleFragment> {
    check_durations(&[("t_pi", p.t_pi), ("t_quench", p.t_quench), ("t_loc", p.t_loc)])?;
    let (tl, tq, tp) = (p.t_loc, p.t_quench, p.t_pi);
    let end = p.t_prep();
    let omega = Waveform::from_angular(&[
        (0.0, 0.0),
        (tl, 0.0),
        (tl + tq, p.omega_pi),
        (tl + tq + tp, p.omega_pi),
        (tl + 2.0 * tq + tp, 0.0),
        (end, 0.0),
    ])?;
    let delta_glo = Waveform::from_angular(&[(0.0, 0.0), (end, 0.0)])?;
    let delta_loc = Waveform::from_angular(&[
        (0.0, 0.0),
        (tl, p.delta_loc_min),
        (tl + 2.0 * tq + tp, p.delta_loc_min),
        (end, 0.0),
    ])?;
    Ok(ScheduleFragment {
        waves: Some([omega, delta_glo, delta_loc]),
        duration: end,
        h_pattern: None,
    })
}

/// Quench from zero to the drive of `ryd` over `t_quench`, hold for `t_sim`,
/// ramp back to zero over `t_quench`.
pub fn build_sim_schedule(ryd: &RydbergParams, t_quench: f64, t_sim: f64) -> Result<ScheduleFragment> {
    check_durations(&[("t_quench", t_quench), ("t_sim", t_sim)])?;
    let trapezoid = |v: f64| {
        Waveform::from_angular(&[(0.0, 0.0), (t_quench, v), (t_quench + t_sim, v), (2.0 * t_quench + t_sim, 0.0)])
    };
    Ok(ScheduleFragment {
        waves: Some([trapezoid(ryd.omega)?, trapezoid(ryd.delta_glo)?, trapezoid(ryd.delta_loc)?]),
        duration: 2.0 * t_quench + t_sim,
        h_pattern: Some(ryd.h_pattern.clone()),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSchedule {
    pub omega: Waveform,
    pub delta_glo: Waveform,
    pub delta_loc: Waveform,
    pub h_pattern: Vec<f64>,
    pub t_prep: f64,
    pub t_end: f64,
    /// `[t1, t2]`: end of preparation and end of the schedule.
    pub stage_marks: [f64; 2],
}

fn join(a: &Waveform, b: &Waveform, offset: f64, name: &str) -> Result<Waveform> {
    let last = a.points[a.points.len() - 1][1];
    let first = b.points[0][1];
    if (last - first).abs() > JUNCTION_TOL * last.abs().max(first.abs()).max(1.0) {
        return Err(Error::Schedule(format!("{name} is discontinuous at the stage junction ({last} vs {first} MHz_2pi)")));
    }
    let mut pts = a.points.clone();
    pts.extend(b.shifted(offset).skip(1));
    Waveform::from_mhz2pi(pts)
}

/// Join a preparation fragment and a simulation fragment into one schedule.
pub fn concat(prep: &ScheduleFragment, sim: &ScheduleFragment) -> Result<PulseSchedule> {
    let h_pattern = sim.h_pattern.clone().or_else(|| prep.h_pattern.clone()).unwrap_or_default();
    let t_prep = prep.duration;
    let [omega, delta_glo, delta_loc] = match (&prep.waves, &sim.waves) {
        (Some(p), Some(s)) => [
            join(&p[0], &s[0], t_prep, "omega")?,
            join(&p[1], &s[1], t_prep, "delta_glo")?,
            join(&p[2], &s[2], t_prep, "delta_loc")?,
        ],
        (Some(w), None) | (None, Some(w)) => w.clone(),
        (None, None) => return Err(Error::Schedule("both fragments are empty".into())),
    };
    let t_end = t_prep + sim.duration;
    let s = PulseSchedule {
        omega,
        delta_glo,
        delta_loc,
        h_pattern,
        t_prep,
        t_end,
        stage_marks: [t_prep, t_end],
    };
    s.validate()?;
    Ok(s)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WaveformsJson {
    omega: Waveform,
    delta_glo: Waveform,
    delta_loc: Waveform,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleJson {
    waveforms: WaveformsJson,
    h_pattern: Vec<f64>,
    t_prep: f64,
    t_end: f64,
    stage_marks: [f64; 2],
}

impl PulseSchedule {
    pub fn validate(&self) -> Result<()> {
        for (name, w) in [("omega", &self.omega), ("delta_glo", &self.delta_glo), ("delta_loc", &self.delta_loc)] {
            if (w.end() - self.t_end).abs() > JUNCTION_TOL * self.t_end.max(1.0) {
                return Err(Error::Schedule(format!("{name} ends at {} but the schedule ends at {}", w.end(), self.t_end)));
            }
        }
        if self.omega.points[0][1] != 0.0 || self.delta_loc.points[0][1] != 0.0 {
            return Err(Error::Schedule("Ω and Δ_loc must start from zero".into()));
        }
        Ok(())
    }

    pub fn sample(&self, t: f64) -> Result<Controls> {
        if !(0.0..=self.t_end).contains(&t) {
            return Err(Error::OutOfDomain { t, end: self.t_end });
        }
        let t = t.min(self.omega.end()).min(self.delta_glo.end()).min(self.delta_loc.end());
        Ok(Controls {
            omega: self.omega.eval(t)?,
            delta_glo: self.delta_glo.eval(t)?,
            delta_loc: self.delta_loc.eval(t)?,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let j = ScheduleJson {
            waveforms: WaveformsJson {
                omega: self.omega.clone(),
                delta_glo: self.delta_glo.clone(),
                delta_loc: self.delta_loc.clone(),
            },
            h_pattern: self.h_pattern.clone(),
            t_prep: self.t_prep,
            t_end: self.t_end,
            stage_marks: self.stage_marks,
        };
        Ok(serde_json::to_string(&j)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: ScheduleJson = serde_json::from_str(s)?;
        let s = PulseSchedule {
            omega: j.waveforms.omega,
            delta_glo: j.waveforms.delta_glo,
            delta_loc: j.waveforms.delta_loc,
            h_pattern: j.h_pattern,
            t_prep: j.t_prep,
            t_end: j.t_end,
            stage_marks: j.stage_marks,
        };
        s.validate()?;
        Ok(s)
    }

    /// SHA-256 of the JSON form, hex encoded.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_json()?.as_bytes())))
    }

    /// `t_us,omega,delta_glo,delta_loc` in MHz_2pi on `n ≥ 2` uniform points.
    pub fn to_csv(&self, n: usize) -> Result<String> {
        let n = n.max(2);
        let mut out = String::from("t_us,omega_MHz2pi,delta_glo_MHz2pi,delta_loc_MHz2pi\n");
        for k in 0..n {
            let t = if k == n - 1 { self.t_end } else { self.t_end * k as f64 / (n - 1) as f64 };
            let c = self.sample(t)?;
            let _ = writeln!(out, "{t},{},{},{}", to_mhz2pi(c.omega), to_mhz2pi(c.delta_glo), to_mhz2pi(c.delta_loc));
        }
        Ok(out)
    }
}

fn merged_breakpoints(waves: &[&Waveform]) -> Vec<f64> {
    let mut ts: Vec<f64> = waves.iter().flat_map(|w| w.points.iter().map(|p| p[0])).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    ts
}

impl ControlSource for PulseSchedule {
    fn duration(&self) -> f64 {
        self.t_end
    }

    fn controls(&self, t: f64) -> Result<Controls> {
        self.sample(t)
    }

    fn breakpoints(&self) -> Vec<f64> {
        merged_breakpoints(&[&self.omega, &self.delta_glo, &self.delta_loc])
    }

    fn shortest_segment(&self) -> f64 {
        self.omega
            .shortest_segment()
            .min(self.delta_glo.shortest_segment())
            .min(self.delta_loc.shortest_segment())
    }
}

/// Controls held fixed for `duration`: an instantaneous quench. This does not
/// satisfy the hardware start-from-zero rule and exists for emulation only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantControls {
    pub controls: Controls,
    pub duration: f64,
}

impl ConstantControls {
    pub fn new(ryd: &RydbergParams, duration: f64) -> Self {
        ConstantControls {
            controls: Controls {
                omega: ryd.omega,
                delta_glo: ryd.delta_glo,
                delta_loc: ryd.delta_loc,
            },
            duration,
        }
    }
}

impl ControlSource for ConstantControls {
    fn duration(&self) -> f64 {
        self.duration
    }

    fn controls(&self, t: f64) -> Result<Controls> {
        if !(0.0..=self.duration).contains(&t) {
            return Err(Error::OutOfDomain { t, end: self.duration });
        }
        Ok(self.controls)
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![0.0, self.duration]
    }

    fn shortest_segment(&self) -> f64 {
        self.duration
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{h_pattern, HParity};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn sim_params(hz: f64) -> RydbergParams {
        let u = from_mhz2pi(18.5);
        RydbergParams {
            c6: 1.0,
            omega: 0.25 * u / 2.0,
            phi: 0.0,
            delta_glo: u * (1.0 + hz / 2.0),
            delta_loc: -u * hz,
            h_pattern: h_pattern(4, HParity::Odd),
        }
    }

    fn device_schedule(hz: f64) -> PulseSchedule {
        let prep = build_prep_schedule(&PrepProtocol::default()).unwrap();
        let sim = build_sim_schedule(&sim_params(hz), 0.05, 1.5).unwrap();
        concat(&prep, &sim).unwrap()
    }

    #[test]
    fn default_prep_duration() {
        let p = PrepProtocol::default();
        assert_relative_eq!(p.t_prep(), 0.65, epsilon = 1e-15);
        let f = build_prep_schedule(&p).unwrap();
        assert_relative_eq!(f.duration, 0.65, epsilon = 1e-15);
        // trapezoid area: Ω_π (t_π + t_quench)
        assert_relative_eq!(f.omega().unwrap().integral(), p.omega_pi * (p.t_pi + p.t_quench), max_relative = 1e-14);
    }

    #[test]
    fn ideal_pi_pulse_flat_top_area() {
        let w = Waveform::constant(from_mhz2pi(2.5), 0.2).unwrap();
        assert_relative_eq!(w.integral(), PI, max_relative = 1e-14);
        // the ramps add Ω_π · t_quench on top of π
        let p = PrepProtocol {
            omega_pi: from_mhz2pi(2.5),
            t_pi: 0.2,
            ..PrepProtocol::default()
        };
        let area = build_prep_schedule(&p).unwrap().omega().unwrap().integral();
        assert_relative_eq!(area - PI, p.omega_pi * p.t_quench, max_relative = 1e-12);
    }

    #[test]
    fn zero_quench_rejected() {
        let p = PrepProtocol {
            t_quench: 0.0,
            ..PrepProtocol::default()
        };
        assert!(matches!(build_prep_schedule(&p), Err(Error::Schedule(_))));
        let p = PrepProtocol {
            t_loc: -0.1,
            ..PrepProtocol::default()
        };
        assert!(build_prep_schedule(&p).is_err());
        assert!(build_sim_schedule(&sim_params(0.0), 0.05, 0.0).is_err());
    }

    #[test]
    fn sim_hold_values() {
        let f = build_sim_schedule(&sim_params(0.0), 0.05, 1.5).unwrap();
        assert_relative_eq!(f.omega().unwrap().eval(0.5).unwrap(), from_mhz2pi(2.3125), max_relative = 1e-14);
        assert_relative_eq!(f.delta_glo().unwrap().eval(0.5).unwrap(), from_mhz2pi(18.5), max_relative = 1e-14);
        assert_eq!(f.delta_loc().unwrap().eval(0.5).unwrap(), 0.0);

        let f = build_sim_schedule(&sim_params(0.1), 0.05, 1.5).unwrap();
        assert_relative_eq!(f.delta_loc().unwrap().eval(1.0).unwrap(), from_mhz2pi(-1.85), max_relative = 1e-12);
        let pts = f.omega().unwrap().points();
        assert_relative_eq!(pts[1][0] - pts[0][0], 0.05);
        assert_relative_eq!(pts[3][0] - pts[2][0], 0.05, epsilon = 1e-14);
    }

    #[test]
    fn concat_durations_and_marks() {
        let s = device_schedule(0.0);
        assert_relative_eq!(s.t_end, 2.25, epsilon = 1e-12);
        assert_eq!(s.stage_marks[0], s.t_prep);
        assert_relative_eq!(s.stage_marks[1], 2.25, epsilon = 1e-12);
        let c = s.sample(0.0).unwrap();
        assert_eq!((c.omega, c.delta_loc), (0.0, 0.0));

        let prep = build_prep_schedule(&PrepProtocol::default()).unwrap();
        let only = concat(&prep, &ScheduleFragment::empty()).unwrap();
        assert_eq!(only.t_end, only.t_prep);
    }

    #[test]
    fn concat_rejects_jumps() {
        let mut prep = build_prep_schedule(&PrepProtocol::default()).unwrap();
        if let Some(w) = prep.waves.as_mut() {
            w[0] = Waveform::from_angular(&[(0.0, 0.0), (0.65, 1.0)]).unwrap();
        }
        let sim = build_sim_schedule(&sim_params(0.0), 0.05, 1.5).unwrap();
        assert!(concat(&prep, &sim).is_err());
    }

    #[test]
    fn sampling_rules() {
        let s = device_schedule(0.04);
        assert!(matches!(s.sample(-1e-9), Err(Error::OutOfDomain { .. })));
        assert!(s.sample(2.26).is_err());
        // midpoint of the Ω ramp-up during preparation
        let mid = s.sample(0.225).unwrap().omega;
        assert_relative_eq!(mid, 0.5 * from_mhz2pi(2.05), max_relative = 1e-14);
        let a = s.sample(1.0).unwrap();
        let b = s.sample(1.5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn json_round_trip_is_byte_stable() {
        let s = device_schedule(0.04);
        let j = s.to_json().unwrap();
        let back = PulseSchedule::from_json(&j).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_json().unwrap(), j);
        assert_eq!(back.hash().unwrap(), s.hash().unwrap());
        assert!(j.contains("\"waveforms\""));
    }

    #[test]
    fn csv_grid() {
        let s = device_schedule(0.0);
        let csv = s.to_csv(5).unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 6);
        assert!(lines[5].starts_with("2.25,"));
    }

    #[test]
    fn constant_controls_source() {
        let c = ConstantControls::new(&sim_params(0.0), 1.0);
        assert_eq!(c.breakpoints(), vec![0.0, 1.0]);
        assert!(c.controls(1.5).is_err());
    }

    proptest! {
        #[test]
        fn midpoint_is_mean(pts in proptest::collection::vec((0.001..1.0f64, -50.0..50.0f64), 2..8)) {
            let mut t = 0.0;
            let mut p = vec![[0.0, pts[0].1]];
            for &(dt, v) in &pts[1..] {
                t += dt;
                p.push([t, v]);
            }
            let w = Waveform::from_mhz2pi(p.clone()).unwrap();
            for seg in p.windows(2) {
                let m = w.eval(0.5 * (seg[0][0] + seg[1][0])).unwrap();
                let mean = from_mhz2pi(0.5 * (seg[0][1] + seg[1][1]));
                let scale = from_mhz2pi(seg[0][1].abs().max(seg[1][1].abs()).max(1.0));
                prop_assert!((m - mean).abs() <= 1e-10 * scale);
            }
        }
    }
}
