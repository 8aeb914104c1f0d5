// Copyright 2026 The confine-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Connected σᶻσᶻ correlations along the chain, Néel fidelity, light-cone
//! front extraction and the shot-file format.
//!
//! Distances are chain-index separations (also across bends), and only pairs
//! with both sites inside the bulk window `[margin, L - margin)` contribute.

use std::fmt::Write as _;
use std::path::Path;

use crate::engine::{SpinMoments, StateVector};
use crate::error::{Error, Result};
use crate::model::{neel_bits, staggering_sign, HParity};

pub const DEFAULT_THRESHOLD: f64 = 0.01;

/// Frame in which the σᶻ moments are read. `Ising` applies the sublattice
/// sign to every σᶻ first, which makes the `(-1)^d` staggering implicit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Frame {
    #[default]
    Rydberg,
    Ising,
}

/// `C_d` for `d = 1..=d_max` (index `d - 1`).
pub fn connected_correlations(m: &SpinMoments, d_max: usize, bulk_margin: usize, frame: Frame) -> Result<Vec<f64>> {
    let n = m.n_sites;
    let width = n.saturating_sub(2 * bulk_margin);
    if d_max == 0 || d_max >= width {
        return Err(Error::InvalidArgument(format!(
            "d_max = {d_max} needs 1 ≤ d_max < L − 2·margin = {width}"
        )));
    }
    let sign = |i: usize| match frame {
        Frame::Rydberg => 1.0,
        Frame::Ising => staggering_sign(i),
    };
    let (lo, hi) = (bulk_margin, n - bulk_margin);
    Ok((1..=d_max)
        .map(|d| {
            let pairs = lo..hi - d;
            let count = pairs.len() as f64;
            pairs
                .map(|i| {
                    let j = i + d;
                    let s = sign(i) * sign(j);
                    s * (m.zz(i, j) - m.z[i] * m.z[j])
                })
                .sum::<f64>()
                / count
        })
        .collect())
}

pub fn correlations_from_state(state: &StateVector, d_max: usize, bulk_margin: usize) -> Result<Vec<f64>> {
    connected_correlations(&SpinMoments::from_state(state, Default::default()), d_max, bulk_margin, Frame::Rydberg)
}

pub fn correlations_from_shots(shots: &[usize], n_sites: usize, d_max: usize, bulk_margin: usize) -> Result<Vec<f64>> {
    connected_correlations(&SpinMoments::from_shots(shots, n_sites)?, d_max, bulk_margin, Frame::Rydberg)
}

/// `(-1)^d` applied to a row indexed from `d = 1`.
pub fn stagger_row(row: &[f64]) -> Vec<f64> {
    row.iter()
        .enumerate()
        .map(|(k, v)| if (k + 1) % 2 == 1 { -v } else { *v })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    pub times: Vec<f64>,
    pub distances: Vec<usize>,
    /// `values[t][d - 1]`
    pub values: Vec<Vec<f64>>,
    pub std: Option<Vec<Vec<f64>>>,
    pub bulk_margin: usize,
    pub staggered: bool,
}

impl CorrelationTable {
    pub fn new(d_max: usize, bulk_margin: usize) -> Self {
        CorrelationTable {
            times: Vec::new(),
            distances: (1..=d_max).collect(),
            values: Vec::new(),
            std: None,
            bulk_margin,
            staggered: false,
        }
    }

    pub fn push(&mut self, t: f64, row: Vec<f64>) -> Result<()> {
        if row.len() != self.distances.len() {
            return Err(Error::InvalidArgument(format!("row has {} distances, table has {}", row.len(), self.distances.len())));
        }
        self.times.push(t);
        self.values.push(row);
        Ok(())
    }

    pub fn time_index(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|&x| (x - t).abs() <= 1e-9)
            .ok_or_else(|| Error::InvalidArgument(format!("time {t} not in table")))
    }

    pub fn value(&self, t_index: usize, d: usize) -> f64 {
        self.values[t_index][d - 1]
    }

    /// `t_us,d,stagC[,std]` rows; values are written staggered.
    pub fn to_csv(&self) -> String {
        let table = if self.staggered { self.clone() } else { staggered(self) };
        let mut out = String::from(if table.std.is_some() { "t_us,d,stagC,std\n" } else { "t_us,d,stagC\n" });
        for (ti, t) in table.times.iter().enumerate() {
            for (k, d) in table.distances.iter().enumerate() {
                let _ = write!(out, "{t},{d},{}", table.values[ti][k]);
                if let Some(s) = &table.std {
                    let _ = write!(out, ",{}", s[ti][k]);
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Multiply every value by `(-1)^d`. Applying it twice is the identity.
pub fn staggered(table: &CorrelationTable) -> CorrelationTable {
    let mut out = table.clone();
    out.values = table.values.iter().map(|r| stagger_row(r)).collect();
    out.staggered = !table.staggered;
    out
}

/// |⟨Néel|ψ⟩|² with Rydberg excitations on the sites where the h-pattern of
/// `parity` is zero.
pub fn neel_fidelity(state: &StateVector, parity: HParity) -> f64 {
    let bits = neel_bits(state.n_sites(), parity);
    let index = bits.iter().enumerate().fold(0usize, |acc, (i, &b)| acc | (usize::from(b) << i));
    state.amplitudes()[index].norm_sqr()
}

/// Largest `d` with `|C_d| ≥ threshold` in a row, 0 if none.
pub fn front_radius_row(row: &[f64], threshold: f64) -> usize {
    (1..=row.len()).rev().find(|&d| row[d - 1].abs() >= threshold).unwrap_or(0)
}

pub fn front_radius(table: &CorrelationTable, t: f64, threshold: f64) -> Result<usize> {
    Ok(front_radius_row(&table.values[table.time_index(t)?], threshold))
}

/// Shots recorded at one time label.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotGroup {
    pub label: String,
    pub t: f64,
    pub shots: Vec<usize>,
}

pub fn bitstring(b: usize, n_sites: usize) -> String {
    (0..n_sites).map(|i| if (b >> i) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Parse `t_us,bitstring` lines; an optional header starting with `t_us` is
/// skipped and blank lines are ignored. Groups keep first-appearance order.
pub fn parse_shots(text: &str, n_sites: usize, origin: &Path) -> Result<Vec<ShotGroup>> {
    let err = |line: usize, msg: String| Error::ShotFormat {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut groups: Vec<ShotGroup> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.trim();
        if line.is_empty() || (k == 0 && line.starts_with("t_us")) {
            continue;
        }
        let (label, bits) = line
            .split_once(',')
            .ok_or_else(|| err(line_no, format!("expected `t_us,bitstring`, got `{line}`")))?;
        let label = label.trim();
        let bits = bits.trim();
        let t: f64 = label.parse().map_err(|_| err(line_no, format!("bad time `{label}`")))?;
        if bits.len() != n_sites {
            return Err(err(line_no, format!("bitstring has {} sites, expected {n_sites}", bits.len())));
        }
        let mut b = 0usize;
        for (i, c) in bits.chars().enumerate() {
            match c {
                '0' => {}
                '1' => b |= 1 << i,
                _ => return Err(err(line_no, format!("invalid character `{c}` in bitstring"))),
            }
        }
        match groups.iter_mut().find(|g| g.label == label) {
            Some(g) => g.shots.push(b),
            None => groups.push(ShotGroup {
                label: label.to_string(),
                t,
                shots: vec![b],
            }),
        }
    }
    if groups.is_empty() {
        return Err(err(0, "no shots in file".into()));
    }
    Ok(groups)
}

pub fn ingest_shots(path: &Path, n_sites: usize) -> Result<Vec<ShotGroup>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_shots(&text, n_sites, path)
}

pub fn shots_csv(groups: &[ShotGroup], n_sites: usize) -> String {
    let mut out = String::from("t_us,bitstring\n");
    for g in groups {
        for &b in &g.shots {
            let _ = writeln!(out, "{},{}", g.label, bitstring(b, n_sites));
        }
    }
    out
}
