// Copyright 2026 The confine-sim Authors
// SPDX-License-Identifier: Apache-2.0

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::par::{reduce_blocks, Exec};

use super::{spin, StateVector};

fn check_site(state: &StateVector, i: usize) -> Result<()> {
    if i >= state.n_sites() {
        return Err(Error::InvalidArgument(format!("site {i} out of range for {} sites", state.n_sites())));
    }
    Ok(())
}

/// ⟨σᶻ_i⟩
pub fn expectation_z(state: &StateVector, i: usize) -> Result<f64> {
    check_site(state, i)?;
    let a = state.amplitudes();
    Ok(reduce_blocks(
        Exec::default(),
        a.len(),
        || 0.0,
        |acc, s, e| acc + (s..e).map(|b| a[b].norm_sqr() * spin(b, i)).sum::<f64>(),
        |x, y| x + y,
    ))
}

/// ⟨σᶻ_i σᶻ_j⟩
pub fn expectation_zz(state: &StateVector, i: usize, j: usize) -> Result<f64> {
    check_site(state, i)?;
    check_site(state, j)?;
    let a = state.amplitudes();
    Ok(reduce_blocks(
        Exec::default(),
        a.len(),
        || 0.0,
        |acc, s, e| acc + (s..e).map(|b| a[b].norm_sqr() * spin(b, i) * spin(b, j)).sum::<f64>(),
        |x, y| x + y,
    ))
}

/// All one- and two-point σᶻ moments of a state or of a shot record.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinMoments {
    pub n_sites: usize,
    pub z: Vec<f64>,
    /// Row-major `n × n`, symmetric, unit diagonal.
    pub zz: Vec<f64>,
}

impl SpinMoments {
    pub fn zz(&self, i: usize, j: usize) -> f64 {
        self.zz[i * self.n_sites + j]
    }

    fn accumulate(n: usize, items: impl Iterator<Item = (usize, f64)>) -> (Vec<f64>, Vec<f64>) {
        let mut z = vec![0.0; n];
        let mut zz = vec![0.0; n * n];
        let mut s = vec![0.0; n];
        for (b, w) in items {
            if w == 0.0 {
                continue;
            }
            for (i, si) in s.iter_mut().enumerate() {
                *si = spin(b, i);
                z[i] += w * *si;
            }
            for i in 0..n {
                let wi = w * s[i];
                let row = &mut zz[i * n..(i + 1) * n];
                for j in i + 1..n {
                    row[j] += wi * s[j];
                }
            }
        }
        (z, zz)
    }

    fn finish(n: usize, z: Vec<f64>, mut zz: Vec<f64>, total: f64) -> Self {
        let z = z.into_iter().map(|v| v / total).collect();
        for i in 0..n {
            zz[i * n + i] = 1.0;
            for j in i + 1..n {
                let v = zz[i * n + j] / total;
                zz[i * n + j] = v;
                zz[j * n + i] = v;
            }
        }
        SpinMoments { n_sites: n, z, zz }
    }

    /// Exact moments from the amplitudes.
    pub fn from_state(state: &StateVector, exec: Exec) -> Self {
        let n = state.n_sites();
        let a = state.amplitudes();
        let (z, zz) = reduce_blocks(
            exec,
            a.len(),
            || (vec![0.0; n], vec![0.0; n * n]),
            |(mut z, mut zz), s, e| {
                let (bz, bzz) = Self::accumulate(n, (s..e).map(|b| (b, a[b].norm_sqr())));
                z.iter_mut().zip(bz).for_each(|(x, y)| *x += y);
                zz.iter_mut().zip(bzz).for_each(|(x, y)| *x += y);
                (z, zz)
            },
            |(mut z, mut zz), (bz, bzz)| {
                z.iter_mut().zip(bz).for_each(|(x, y)| *x += y);
                zz.iter_mut().zip(bzz).for_each(|(x, y)| *x += y);
                (z, zz)
            },
        );
        Self::finish(n, z, zz, 1.0)
    }

    /// Sample means over a multiset of basis-state shots.
    pub fn from_shots(shots: &[usize], n_sites: usize) -> Result<Self> {
        if shots.is_empty() {
            return Err(Error::InvalidArgument("empty shot set".into()));
        }
        let (z, zz) = Self::accumulate(n_sites, shots.iter().map(|&b| (b, 1.0)));
        Ok(Self::finish(n_sites, z, zz, shots.len() as f64))
    }
}

/// `n_shots` i.i.d. draws from |ψ_b|², reproducible per `seed`.
pub fn sample_shots(state: &StateVector, n_shots: usize, seed: u64) -> Result<Vec<usize>> {
    if n_shots == 0 {
        return Err(Error::InvalidArgument("n_shots must be at least 1".into()));
    }
    let mut cdf = Vec::with_capacity(state.amplitudes().len());
    let mut acc = 0.0;
    for a in state.amplitudes() {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let last = cdf.len() - 1;
    Ok((0..n_shots)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * acc;
            // skip zero-probability states sitting on the boundary
            cdf.partition_point(|&c| c <= u).min(last)
        })
        .collect())
}
