// Copyright 2026 The confine-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Trajectory dump: a little-endian binary file of records
//! `t: f64, then 2^L × (re: f64, im: f64)`, plus a JSON sidecar.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::trotter::Trajectory;
use super::{expectation_z, StateVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    #[serde(rename = "L")]
    pub n_sites: usize,
    pub dt_us: f64,
    pub schedule_hash: String,
    pub records: usize,
}

/// Write `<stem>.bin` and `<stem>.json` next to each other.
pub fn write_trajectory(stem: &Path, traj: &Trajectory, dt: f64, schedule_hash: &str) -> Result<TrajectoryMeta> {
    let n_sites = traj.snapshots.first().map(|s| s.state.n_sites()).unwrap_or(0);
    let bin = stem.with_extension("bin");
    let f = File::create(&bin).map_err(|e| Error::io(&bin, e))?;
    let mut w = BufWriter::new(f);
    for snap in &traj.snapshots {
        w.write_all(&snap.t.to_le_bytes()).map_err(|e| Error::io(&bin, e))?;
        for a in snap.state.amplitudes() {
            w.write_all(&a.re.to_le_bytes()).map_err(|e| Error::io(&bin, e))?;
            w.write_all(&a.im.to_le_bytes()).map_err(|e| Error::io(&bin, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(&bin, e))?;

    let meta = TrajectoryMeta {
        n_sites,
        dt_us: dt,
        schedule_hash: schedule_hash.to_string(),
        records: traj.snapshots.len(),
    };
    let side = stem.with_extension("json");
    std::fs::write(&side, serde_json::to_string_pretty(&meta)?).map_err(|e| Error::io(&side, e))?;
    Ok(meta)
}

/// `t_us,site,z` rows of ⟨σᶻ_i⟩(t).
pub fn z_profile_csv(samples: &[(f64, &StateVector)]) -> Result<String> {
    let mut out = String::from("t_us,site,z\n");
    for &(t, s) in samples {
        for i in 0..s.n_sites() {
            let _ = writeln!(out, "{t},{i},{}", expectation_z(s, i)?);
        }
    }
    Ok(out)
}
