// Copyright 2026 The confine-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! The command implementations behind the `confine-sim` binary.
//!
//! Every command writes `run.json` (the resolved configuration) before any
//! computation, and `meta.json` last. Nothing machine- or time-dependent is
//! written, so outputs are byte-identical for a fixed configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analysis::{connected_correlations, front_radius_row, ingest_shots, shots_csv, CorrelationTable, Frame, ShotGroup};
use crate::config::{Experiment, RunConfig, Source};
use crate::engine::{sample_shots, write_trajectory, Evolver, Snapshot, SpinMoments, Trajectory};
use crate::error::{Error, Result};
use crate::model::{map_ising_to_rydberg, map_rydberg_to_ising, to_mhz2pi, DeltaGloConvention, IsingParams};
use crate::noise::{channel_ablation, EnsembleRequest};
use crate::semiclassical::{front_overlay, overlay_csv, MesonModel};

pub const RUN_FILE: &str = "run.json";
pub const CORRELATIONS_FILE: &str = "correlations.csv";
pub const FRONT_FILE: &str = "front.csv";
pub const META_FILE: &str = "meta.json";

/// Written files, in order, with their SHA-256 digests.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub command: String,
    pub version: String,
    #[serde(rename = "L")]
    pub n_sites: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t1_us: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_realizations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature_self_convergence: Option<f64>,
    pub files: Vec<(String, String)>,
}

struct Outputs {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl Outputs {
    fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, content: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
        self.files.push((name.to_string(), hex::encode(Sha256::digest(content.as_bytes()))));
        Ok(())
    }

    fn record(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        self.files.push((name, hex::encode(Sha256::digest(&bytes))));
        Ok(())
    }

    fn finish(mut self, mut meta: Meta) -> Result<Meta> {
        meta.files = std::mem::take(&mut self.files);
        let text = serde_json::to_string_pretty(&meta)? + "\n";
        let path = self.dir.join(META_FILE);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(meta)
    }
}

fn start(config: &RunConfig) -> Result<Outputs> {
    config.validate()?;
    let mut out = Outputs::create(&config.output.dir)?;
    out.write(RUN_FILE, &(config.to_json()? + "\n"))?;
    Ok(out)
}

fn meta(command: &str, config: &RunConfig) -> Meta {
    Meta {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        n_sites: config.geometry.n,
        seed: config.execution.seed,
        schedule_hash: None,
        t1_us: None,
        n_realizations: None,
        quadrature_self_convergence: None,
        files: Vec::new(),
    }
}

fn front_csv(table: &CorrelationTable, threshold: f64) -> String {
    let mut out = String::from("t_us,front_radius\n");
    for (t, row) in table.times.iter().zip(&table.values) {
        let _ = writeln!(out, "{t},{}", front_radius_row(row, threshold));
    }
    out
}

fn schedule_hash(e: &Experiment) -> Result<Option<String>> {
    match &e.source {
        Source::Device(s) => Ok(Some(s.hash()?)),
        Source::Sudden(_) => Ok(None),
    }
}

/// Parameter report: Rydberg drive for both Δ_glo conventions, the Ising
/// couplings, the nearest-neighbour U table and the mapping round trip.
pub fn cmd_map(config: &RunConfig) -> Result<String> {
    config.validate()?;
    let u = config.u_nn();
    let n = config.geometry.n;
    let ising = IsingParams::uniform(u / 4.0, config.physics.hx, config.physics.hz, n);
    let parity = config.physics.h_parity;
    let derived = map_ising_to_rydberg(&ising, u, config.c6(), parity, DeltaGloConvention::Derived)?;
    let printed = map_ising_to_rydberg(&ising, u, config.c6(), parity, DeltaGloConvention::Printed)?;
    let back = map_rydberg_to_ising(&derived, u)?;
    let residual = back
        .hz
        .iter()
        .map(|h| (h - config.physics.hz).abs())
        .chain([(back.hx - config.physics.hx).abs(), (back.j - ising.j).abs() / ising.j])
        .fold(0.0, f64::max);

    let mut r = String::new();
    let _ = writeln!(r, "L = {n}, a = {} µm, h^x = {}, h^z = {}", config.geometry.a_um, config.physics.hx, config.physics.hz);
    let _ = writeln!(r, "U_nn = {:.6} ·2π MHz, J = U_nn/4 = {:.6} ·2π MHz", to_mhz2pi(u), to_mhz2pi(u / 4.0));
    let _ = writeln!(r, "{:<12} {:>14} {:>14}", "", "derived", "printed");
    for (name, a, b) in [
        ("Omega", derived.omega, printed.omega),
        ("Delta_glo", derived.delta_glo, printed.delta_glo),
        ("Delta_loc", derived.delta_loc, printed.delta_loc),
    ] {
        let _ = writeln!(r, "{name:<12} {:>14.6} {:>14.6}   ·2π MHz", to_mhz2pi(a), to_mhz2pi(b));
    }
    let active = match config.physics.delta_glo_convention {
        DeltaGloConvention::Derived => "derived",
        DeltaGloConvention::Printed => "printed",
    };
    let _ = writeln!(r, "active convention: {active}");
    let _ = writeln!(r, "h-pattern: {:?}", config.h_pattern());
    let instance = config.instance()?;
    let _ = writeln!(r, "U_(i,i+1) table (·2π MHz):");
    for i in 0..n - 1 {
        let _ = writeln!(r, "  {i:>3} {:>3} {:>14.6}", i + 1, to_mhz2pi(instance.couplings.get(i, i + 1)));
    }
    let _ = writeln!(r, "mapping round-trip max residual: {residual:.3e}");
    Ok(r)
}

/// Coherent evolution without noise.
pub fn cmd_run(config: &RunConfig) -> Result<Meta> {
    let mut out = start(config)?;
    let e = config.experiment()?;
    let d_max = config.d_max();
    let margin = config.analysis.bulk_margin;
    let exec = config.exec();
    let ev = Evolver::new(&e.instance, config.evolve_options())?;

    let mut psi = e.initial.clone();
    let mut table = CorrelationTable::new(d_max, margin);
    let mut kept = Trajectory::default();
    let mut shots = Vec::new();
    let mut shot_table = CorrelationTable::new(d_max, margin);
    let mut k = 0u64;
    ev.run(&mut psi, e.source.as_dyn(), &e.absolute_times, |_, s| {
        let rel = e.relative_times[k as usize];
        let m = SpinMoments::from_state(s, exec);
        table.push(rel, connected_correlations(&m, d_max, margin, Frame::Rydberg)?)?;
        if config.output.trajectory {
            kept.snapshots.push(Snapshot { t: rel, state: s.clone() });
        }
        if let Some(n_shots) = config.output.n_shots {
            let draw = sample_shots(s, n_shots, config.execution.seed.wrapping_add(k))?;
            let m = SpinMoments::from_shots(&draw, s.n_sites())?;
            shot_table.push(rel, connected_correlations(&m, d_max, margin, Frame::Rydberg)?)?;
            shots.push(ShotGroup {
                label: format!("{rel}"),
                t: rel,
                shots: draw,
            });
        }
        k += 1;
        Ok(())
    })?;

    out.write(CORRELATIONS_FILE, &table.to_csv())?;
    out.write(FRONT_FILE, &front_csv(&table, config.analysis.front_threshold))?;
    if config.output.n_shots.is_some() {
        out.write("shots.csv", &shots_csv(&shots, config.geometry.n))?;
        out.write("shot_correlations.csv", &shot_table.to_csv())?;
    }
    let hash = schedule_hash(&e)?;
    if config.output.schedule {
        if let Source::Device(s) = &e.source {
            out.write("schedule.json", &(s.to_json()? + "\n"))?;
            out.write("schedule.csv", &s.to_csv(1000)?)?;
        }
    }
    if config.output.trajectory {
        let stem = out.dir.join("trajectory");
        write_trajectory(&stem, &kept, config.execution.dt_us, hash.as_deref().unwrap_or(""))?;
        out.record(&stem.with_extension("bin"))?;
        out.record(&stem.with_extension("json"))?;
    }
    let mut m = meta("run", config);
    m.schedule_hash = hash;
    m.t1_us = Some(e.t1);
    out.finish(m)
}

/// Noise ensemble over the channels enabled in `noise.channels`.
pub fn cmd_ensemble(config: &RunConfig) -> Result<Meta> {
    let mut out = start(config)?;
    let e = config.experiment()?;
    let req = EnsembleRequest {
        initial: e.initial.clone(),
        sample_times: e.absolute_times.clone(),
        d_max: config.d_max(),
        bulk_margin: config.analysis.bulk_margin,
        evolve: config.evolve_options(),
    };
    let n = config.execution.n_realizations;
    let spec = config.noise.spec(config.execution.seed);
    let mut result = channel_ablation(&e.instance, e.source.as_dyn(), &spec, config.noise.channels, n, &req, config.exec())?;
    result.table.times = e.relative_times.clone();
    out.write(CORRELATIONS_FILE, &result.to_csv())?;
    out.write(FRONT_FILE, &front_csv(&result.table, config.analysis.front_threshold))?;
    let mut m = meta("ensemble", config);
    m.schedule_hash = schedule_hash(&e)?;
    m.t1_us = Some(e.t1);
    m.n_realizations = Some(n);
    out.finish(m)
}

/// Semiclassical mean meson separation at the run's sample times.
pub fn cmd_semiclassical(config: &RunConfig) -> Result<Meta> {
    let mut out = start(config)?;
    let p = &config.physics;
    let model = MesonModel::with_pre_quench(p.hx, p.hz, p.hx_pre)?.with_panels(config.analysis.quadrature_panels);
    let times = config.sample_times()?;
    let j = config.u_nn() / 4.0;
    let series = front_overlay(&model, j, &times)?;
    let doubled = front_overlay(&model.with_panels(2 * model.panels), j, &times)?;
    let drift = series.iter().zip(&doubled).map(|(a, b)| (a.1 - b.1).abs()).fold(0.0, f64::max);
    out.write(FRONT_FILE, &overlay_csv(&series))?;
    let mut m = meta("semiclassical", config);
    m.quadrature_self_convergence = Some(drift);
    out.finish(m)
}

/// Shot-estimated correlations from a `t_us,bitstring` file.
pub fn cmd_ingest(config: &RunConfig, shots: &Path) -> Result<Meta> {
    let mut out = start(config)?;
    let groups = ingest_shots(shots, config.geometry.n)?;
    let d_max = config.d_max();
    let margin = config.analysis.bulk_margin;
    let mut table = CorrelationTable::new(d_max, margin);
    for g in &groups {
        let m = SpinMoments::from_shots(&g.shots, config.geometry.n)?;
        table.push(g.t, connected_correlations(&m, d_max, margin, Frame::Rydberg)?)?;
    }
    out.write(CORRELATIONS_FILE, &table.to_csv())?;
    out.write(FRONT_FILE, &front_csv(&table, config.analysis.front_threshold))?;
    out.finish(meta("ingest", config))
}
