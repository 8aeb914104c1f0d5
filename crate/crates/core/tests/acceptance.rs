// Copyright 2026 The confine-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line; the
//! process exits non-zero if any criterion fails. Pass criterion numbers as
//! arguments to run a subset.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;

use confine_sim::analysis::{connected_correlations, front_radius_row, neel_fidelity, Frame};
use confine_sim::engine::{evolve, exact_evolve_oracle, EvolveOptions, SpinMoments, StateVector};
use confine_sim::model::{
    build_geometry, from_mhz2pi, h_pattern, map_ising_to_rydberg, neel_bits, to_mhz2pi, DeltaGloConvention, Geometry,
    HParity, Instance, IsingParams, RydbergParams, Truncation, DEFAULT_C6_MHZ2PI,
};
use confine_sim::noise::{channel_ablation, Channels, EnsembleRequest, EnsembleResult, NoiseSpec};
use confine_sim::par::Exec;
use confine_sim::schedule::{build_prep_schedule, build_sim_schedule, concat, ConstantControls, PrepProtocol, PulseSchedule};
use confine_sim::semiclassical::{group_velocity, max_group_velocity, mean_front, meson_distance, MesonModel};

const HX: f64 = 0.25;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c6() -> f64 {
    from_mhz2pi(DEFAULT_C6_MHZ2PI)
}

fn instance(g: Geometry, trunc: Truncation) -> Instance {
    let n = g.len();
    Instance::new(g, c6(), trunc, &h_pattern(n, HParity::Odd)).unwrap()
}

fn open_chain(n: usize) -> Instance {
    instance(build_geometry(n, 6.0, &[], 0.0).unwrap(), Truncation::Full)
}

fn drive(inst: &Instance, hz: f64) -> RydbergParams {
    let u = inst.nominal_u_nn();
    let ising = IsingParams::uniform(u / 4.0, HX, hz, inst.len());
    map_ising_to_rydberg(&ising, u, inst.c6, HParity::Odd, DeltaGloConvention::Derived).unwrap()
}

fn device_schedule(inst: &Instance, hz: f64) -> PulseSchedule {
    let prep = build_prep_schedule(&PrepProtocol::default()).unwrap();
    let sim = build_sim_schedule(&drive(inst, hz), 0.05, 1.5).unwrap();
    concat(&prep, &sim).unwrap()
}

fn neel(n: usize) -> StateVector {
    StateVector::basis(&neel_bits(n, HParity::Odd)).unwrap()
}

fn ground(n: usize) -> StateVector {
    StateVector::basis(&vec![false; n]).unwrap()
}

fn grid(step: f64, end: f64) -> Vec<f64> {
    let n = (end / step + 1e-9).floor() as usize;
    (0..=n).map(|k| k as f64 * step).collect()
}

/// Front radius at each sample time of a sudden quench from the Néel state.
fn sudden_fronts(inst: &Instance, hz: f64, times: &[f64], d_max: usize, margin: usize) -> Vec<usize> {
    let end = *times.last().unwrap();
    let src = ConstantControls::new(&drive(inst, hz), end);
    let tr = evolve(&neel(inst.len()), &src, inst, EvolveOptions::default(), times).unwrap();
    tr.snapshots
        .iter()
        .map(|s| {
            let m = SpinMoments::from_state(&s.state, Exec::Parallel);
            front_radius_row(&connected_correlations(&m, d_max, margin, Frame::Rydberg).unwrap(), 0.01)
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let inst = open_chain(4);
    let d0 = drive(&inst, 0.0);
    let d4 = drive(&inst, 0.04);
    let omega = to_mhz2pi(d0.omega);
    let glo = to_mhz2pi(d0.delta_glo);
    let loc4 = to_mhz2pi(d4.delta_loc);
    let pass = (omega - 2.31).abs() <= 0.01
        && (omega - 2.3125).abs() < 1e-12
        && (glo - 18.5).abs() < 1e-12
        && d0.delta_loc == 0.0
        && (loc4 + 0.74).abs() <= 0.005;
    outcome(
        pass,
        format!("Omega = {omega:.6}, Delta_glo(h^z=0) = {glo:.6}, Delta_loc(0) = {}, Delta_loc(0.04) = {loc4:.6} (×2π MHz)", d0.delta_loc),
    )
}

fn criterion_2() -> Outcome {
    let n = 8;
    let inst = open_chain(n);
    let mut worst_infidelity = 0.0f64;
    let mut exponents = Vec::new();
    for hz in [0.0, 0.04] {
        let s = device_schedule(&inst, hz);
        let times = grid(0.05, s.t_end);
        let exact = exact_evolve_oracle(&ground(n), &s, &inst, 2.5e-4, &times).unwrap();
        let mut errors = Vec::new();
        for dt in [4e-3, 2e-3, 1e-3] {
            let tr = evolve(&ground(n), &s, &inst, EvolveOptions { dt, ..Default::default() }, &times).unwrap();
            let mut err = 0.0f64;
            for (a, b) in tr.snapshots.iter().zip(&exact.snapshots) {
                err = err.max(a.state.phase_aligned_distance(&b.state));
                if dt == 1e-3 {
                    worst_infidelity = worst_infidelity.max(1.0 - a.state.fidelity(&b.state));
                }
            }
            errors.push((dt, err));
        }
        let x: Vec<f64> = errors.iter().map(|e| e.0.ln()).collect();
        let y: Vec<f64> = errors.iter().map(|e| e.1.ln()).collect();
        exponents.push(common::linear_fit(&x, &y).0);
    }
    let order_ok = exponents.iter().all(|p| (1.8..=2.2).contains(p));
    outcome(
        worst_infidelity <= 1e-6 && order_ok,
        format!("max infidelity at dt=1e-3: {worst_infidelity:.3e} (limit 1e-6); convergence exponents {exponents:.3?} (limit [1.8, 2.2])"),
    )
}

fn criterion_3() -> Outcome {
    let n = 12;
    let inst = instance(Geometry::ring(n, 6.0).unwrap(), Truncation::NearestNeighbor);
    let u = inst.nominal_u_nn();
    let j = u / 4.0;
    let times = grid(0.05, 0.5);
    let (d_max, margin) = (5, 0);
    let mut worst = 0.0f64;
    for hz in [0.0, 0.04, 0.1] {
        let src = ConstantControls::new(&drive(&inst, hz), 0.5);
        let tr = evolve(&neel(n), &src, &inst, EvolveOptions { dt: 2.5e-5, ..Default::default() }, &times).unwrap();

        // Ising frame: -J Σ (h^x σˣ + h^z σᶻ + σᶻσᶻ) on a ring, all spins up.
        let diag: Vec<f64> = (0..1usize << n)
            .map(|b| {
                (0..n)
                    .map(|i| -j * (hz * common::spin(b, i) + common::spin(b, i) * common::spin(b, (i + 1) % n)))
                    .sum()
            })
            .collect();
        let h = common::SparseHamiltonian { n, cx: -j * HX, diag };
        let mut psi = vec![Complex64::new(0.0, 0.0); 1 << n];
        psi[(1 << n) - 1] = Complex64::new(1.0, 0.0);
        let mut t_prev = 0.0;
        for snap in &tr.snapshots {
            h.propagate(&mut psi, snap.t - t_prev);
            t_prev = snap.t;
            let ising = common::correlations(&psi, n, d_max, margin);
            let m = SpinMoments::from_state(&snap.state, Exec::Parallel);
            let signed = connected_correlations(&m, d_max, margin, Frame::Ising).unwrap();
            for (a, b) in ising.iter().zip(&signed) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    outcome(worst <= 1e-6, format!("max |ΔC_d(t)| = {worst:.3e} over h^z ∈ {{0, 0.04, 0.1}} (limit 1e-6)"))
}

fn criterion_4() -> Outcome {
    let n = 16;
    let inst = instance(Geometry::ring(n, 6.0).unwrap(), Truncation::Full);
    let d_max = n / 2;
    let times = grid(0.005, 0.5);
    let fronts = sudden_fronts(&inst, 0.0, &times, d_max, 0);
    // first arrival at each radius before the front reaches the largest distance
    let (mut r, mut t) = (Vec::new(), Vec::new());
    for radius in 1..d_max {
        if let Some(k) = fronts.iter().position(|&f| f >= radius) {
            r.push(radius as f64);
            t.push(times[k]);
        }
    }
    let (v, _, r2) = common::linear_fit(&t, &r);
    let j = inst.nominal_u_nn() / 4.0;
    let predicted = 2.0 * max_group_velocity(HX) * j;
    let rel = v / predicted - 1.0;
    outcome(
        rel.abs() <= 0.15 && r2 >= 0.95 && r.len() == d_max - 1,
        format!("front velocity {v:.2} sites/µs vs 2·max v = {predicted:.2} ({:+.1}%), linear fit R² = {r2:.4}", 100.0 * rel),
    )
}

fn criterion_5() -> Outcome {
    let n = 16;
    let inst = open_chain(n);
    let t = [0.0, 1.0];
    let radius = |hz: f64| sudden_fronts(&inst, hz, &t, 13, 1)[1];
    let (r0, r4, r10) = (radius(0.0), radius(0.04), radius(0.1));
    outcome(r10 < r4 && r4 < r0, format!("front_radius at t = 1.0 µs: h^z=0.1 → {r10}, h^z=0.04 → {r4}, h^z=0 → {r0}"))
}

fn criterion_6() -> Outcome {
    let mut worst_slope = 0.0f64;
    let mut worst_quad = 0.0f64;
    let mut worst_linear = 0.0f64;
    for hz in [0.04, 0.1] {
        let m = MesonModel::new(HX, hz).unwrap();
        for k in [0.3, 0.8, 1.5, 2.2, 2.9] {
            let t = 1e-4;
            let slope = meson_distance(t, k, &m) / t;
            let v = group_velocity(k, HX, 1.0);
            worst_slope = worst_slope.max((slope / (2.0 * v) - 1.0).abs());
        }
        for t in [0.5, 2.0, 8.0, 20.0] {
            let a = mean_front(t, &m).unwrap();
            let b = mean_front(t, &m.with_panels(2 * m.panels)).unwrap();
            worst_quad = worst_quad.max((a - b).abs());
        }
    }
    let free = MesonModel::new(HX, 0.0).unwrap();
    let base = mean_front(1.0, &free).unwrap();
    for t in [0.5, 2.0, 7.0, 30.0] {
        worst_linear = worst_linear.max((mean_front(t, &free).unwrap() - t * base).abs() / (t * base));
    }
    outcome(
        worst_slope <= 0.01 && worst_quad < 1e-4 && worst_linear < 1e-12,
        format!("slope vs 2v(k): {worst_slope:.2e} (limit 1%); quadrature doubling: {worst_quad:.2e} (limit 1e-4); h^z=0 linearity: {worst_linear:.1e}"),
    )
}

struct NoiseStudy {
    times: Vec<f64>,
    ideal: EnsembleResult,
    positions_fields: EnsembleResult,
    h_only: EnsembleResult,
    all: EnsembleResult,
    all_075: EnsembleResult,
}

const N_REAL: usize = 20;
const D: usize = 12;

fn noise_study() -> NoiseStudy {
    let n = 16;
    let inst = open_chain(n);
    let s = device_schedule(&inst, 0.0);
    let t1 = s.stage_marks[0];
    let mut times = grid(0.1, 1.5);
    times.push(1.55);
    let req = EnsembleRequest {
        initial: ground(n),
        sample_times: times.iter().map(|t| t + t1).collect(),
        d_max: 13,
        bulk_margin: 1,
        evolve: EvolveOptions::default(),
    };
    let spec = NoiseSpec { scale: 1.5, ..Default::default() };
    let run = |spec: &NoiseSpec, mask: Channels, count: usize| channel_ablation(&inst, &s, spec, mask, count, &req, Exec::Parallel).unwrap();
    NoiseStudy {
        ideal: run(&spec, Channels::NONE, 1),
        positions_fields: run(&spec, Channels::POSITIONS_AND_FIELDS, N_REAL),
        h_only: run(&spec, Channels::H_PATTERN, N_REAL),
        all: run(&spec, Channels::ALL, N_REAL),
        all_075: run(&spec.with_scale(0.75), Channels::ALL, N_REAL),
        times,
    }
}

/// |ensemble mean of stagC_12| at the final time, and its standard error.
fn final_c12(e: &EnsembleResult) -> (f64, f64) {
    let last = e.table.times.len() - 1;
    let mean = e.table.values[last][D - 1].abs();
    let se = e.table.std.as_ref().map(|s| s[last][D - 1] / (e.n_realizations as f64).sqrt()).unwrap_or(0.0);
    (mean, se)
}

/// RMS over the sample times of the ensemble-mean C_12 minus the ideal one.
fn deviation(e: &EnsembleResult, ideal: &EnsembleResult) -> f64 {
    let rows = e.table.values.len();
    let ss: f64 = (0..rows).map(|t| (e.table.values[t][D - 1] - ideal.table.values[t][D - 1]).powi(2)).sum();
    (ss / rows as f64).sqrt()
}

fn greater(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 - b.0 > a.1 + b.1
}

fn not_less(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 - b.0 >= -(a.1 + b.1)
}

fn criterion_7(s: &NoiseStudy) -> Outcome {
    let ideal = final_c12(&s.ideal);
    let pf = final_c12(&s.positions_fields);
    let h = final_c12(&s.h_only);
    let all = final_c12(&s.all);
    let dev_pf = deviation(&s.positions_fields, &s.ideal);
    let dev_h = deviation(&s.h_only, &s.ideal);
    let checks = [greater(ideal, pf), greater(pf, h), not_less(h, all), dev_h > dev_pf];
    let fmt = |x: (f64, f64)| format!("{:.5}±{:.5}", x.0, x.1);
    outcome(
        checks.iter().all(|&c| c),
        format!(
            "|stagC_12(t={:.2})|: ideal {}, positions+fields {}, h-pattern {}, all {}; RMS deviation h-pattern {dev_h:.5} vs positions+fields {dev_pf:.5}; checks [ideal>pf, pf>h, h≥all, dev_h>dev_pf] = {checks:?}; all-errors suppression {:.0}%",
            s.times.last().unwrap(),
            fmt(ideal),
            fmt(pf),
            fmt(h),
            fmt(all),
            100.0 * (1.0 - all.0 / ideal.0)
        ),
    )
}

fn criterion_8(s: &NoiseStudy) -> Outcome {
    let c0 = final_c12(&s.ideal);
    let c075 = final_c12(&s.all_075);
    let c15 = final_c12(&s.all);
    outcome(
        not_less(c0, c075) && not_less(c075, c15),
        format!("|stagC_12| at final time: scale 0 → {:.5}, 0.75 → {:.5}±{:.5}, 1.5 → {:.5}±{:.5}", c0.0, c075.0, c075.1, c15.0, c15.1),
    )
}

fn cli(dir: &Path, threads: &str, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_confine-sim"))
        .current_dir(dir)
        .env("CONFINE_SIM_THREADS", threads)
        .args(args)
        .output()
        .unwrap()
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn criterion_9() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let config = r#"{
        "geometry": {"L": 10, "turns": [4]},
        "physics": {"hz": 0.04},
        "noise": {"scale": 1.5},
        "execution": {"n_realizations": 3, "seed": 7, "sample_step_us": 0.1},
        "output": {"trajectory": true, "schedule": true, "n_shots": 64}
    }"#;
    let cfg = root.path().join("config.json");
    std::fs::write(&cfg, config).unwrap();
    let cfg = cfg.to_str().unwrap();

    let mut snapshots = Vec::new();
    let mut failures = Vec::new();
    for threads in ["1", "2", "4"] {
        let dir = root.path().join(format!("t{threads}"));
        std::fs::create_dir_all(&dir).unwrap();
        let mut record = Vec::new();
        let map = cli(&dir, threads, &["--config", cfg, "map"]);
        record.push(("map".to_string(), vec![("stdout".to_string(), map.stdout)]));
        for cmd in ["run", "ensemble", "semiclassical"] {
            let out = cli(&dir, threads, &["--config", cfg, "--out", cmd, cmd]);
            if !out.status.success() {
                failures.push(format!("{cmd}: {}", String::from_utf8_lossy(&out.stderr)));
                continue;
            }
            record.push((cmd.to_string(), read_tree(&dir.join(cmd))));
        }
        let shots = dir.join("run").join("shots.csv");
        let out = cli(&dir, threads, &["--config", cfg, "--out", "ingest", "ingest", shots.to_str().unwrap()]);
        if out.status.success() {
            record.push(("ingest".to_string(), read_tree(&dir.join("ingest"))));
        } else {
            failures.push(format!("ingest: {}", String::from_utf8_lossy(&out.stderr)));
        }
        snapshots.push(record);
    }
    let files: usize = snapshots[0].iter().map(|r| r.1.len()).sum();
    let identical = snapshots.windows(2).all(|w| w[0] == w[1]);
    outcome(
        failures.is_empty() && identical && files > 10,
        format!("{files} outputs from map/run/ensemble/semiclassical/ingest compared across 1, 2 and 4 threads: identical = {identical}; failures {failures:?}"),
    )
}

fn criterion_10() -> Outcome {
    let n = 10;
    let inst = open_chain(n);
    let prep = build_prep_schedule(&PrepProtocol::default()).unwrap();
    let empty = confine_sim::schedule::ScheduleFragment::empty();
    let s = concat(&prep, &empty).unwrap();
    let tr = evolve(&ground(n), &s, &inst, EvolveOptions::default(), &[s.t_end]).unwrap();
    let f = neel_fidelity(&tr.snapshots[0].state, HParity::Odd);
    outcome(f >= 0.9, format!("Néel fidelity after preparation, L = 10: {f:.7} (floor 0.9)"))
}

fn main() {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let want = |k: usize| selected.is_empty() || selected.contains(&k);
    let mut failed = Vec::new();
    let mut report = |k: usize, name: &str, f: &dyn Fn() -> Outcome| {
        if !want(k) {
            return;
        }
        let start = Instant::now();
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {k:>2} {tag} {name}: {} [{:.1}s]", o.detail, start.elapsed().as_secs_f64());
        if !o.pass {
            failed.push(k);
        }
    };
    report(1, "parameter mapping", &criterion_1);
    report(2, "oracle equivalence", &criterion_2);
    report(3, "frame equivalence", &criterion_3);
    report(4, "light cone", &criterion_4);
    report(5, "confinement ordering", &criterion_5);
    report(6, "semiclassical self-tests", &criterion_6);
    if want(7) || want(8) {
        let start = Instant::now();
        let study = noise_study();
        eprintln!("noise ensembles computed in {:.1}s", start.elapsed().as_secs_f64());
        report(7, "noise ablation ordering", &|| criterion_7(&study));
        report(8, "noise-scale monotonicity", &|| criterion_8(&study));
    }
    report(9, "determinism across thread counts", &criterion_9);
    report(10, "preparation fidelity", &criterion_10);
    if !failed.is_empty() {
        println!("acceptance: {} criteria failed: {failed:?}", failed.len());
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
