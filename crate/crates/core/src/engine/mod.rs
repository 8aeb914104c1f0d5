// Copyright 2026 The confine-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! State-vector time evolution.
//!
//! Basis convention: bit `i` of a basis index is 1 when atom `i` is in the
//! Rydberg state, which is σᶻ = +1.

mod observables;
mod oracle;
mod terms;
mod trajectory;
mod trotter;

pub use observables::{expectation_z, expectation_zz, sample_shots, SpinMoments};
pub use oracle::{exact_evolve_oracle, ORACLE_MAX_SITES};
pub use terms::{build_terms, diagonal_energies, DiagonalModel, HamiltonianTerms};
pub use trajectory::{write_trajectory, z_profile_csv, TrajectoryMeta};
pub use trotter::{evolve, step_plan, trotter_step, EvolveOptions, Evolver, Segment, Snapshot, Trajectory};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::par::{reduce_blocks, Exec};

pub const DEFAULT_MAX_SITES: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
    n_sites: usize,
}

impl StateVector {
    /// Computational basis state; `bits[i]` is the state of atom `i`.
    pub fn basis(bits: &[bool]) -> Result<Self> {
        Self::basis_with_limit(bits, DEFAULT_MAX_SITES)
    }

    pub fn basis_with_limit(bits: &[bool], max_sites: usize) -> Result<Self> {
        let n = bits.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty bitstring".into()));
        }
        if n > max_sites {
            return Err(Error::Capacity(format!("{n} sites exceeds the state-vector limit of {max_sites}")));
        }
        let index = bits.iter().enumerate().fold(0usize, |acc, (i, &b)| acc | (usize::from(b) << i));
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { amps, n_sites: n })
    }

    /// Build from raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() || amps.len() < 2 {
            return Err(Error::InvalidArgument(format!("{} amplitudes is not 2^L with L ≥ 1", amps.len())));
        }
        let n_sites = amps.len().trailing_zeros() as usize;
        Ok(StateVector { amps, n_sites })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.norm_sqr_with(Exec::default())
    }

    pub fn norm_sqr_with(&self, exec: Exec) -> f64 {
        let a = &self.amps;
        reduce_blocks(exec, a.len(), || 0.0, |acc, s, e| acc + a[s..e].iter().map(|z| z.norm_sqr()).sum::<f64>(), |x, y| x + y)
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        let (a, b) = (&self.amps, &other.amps);
        assert_eq!(a.len(), b.len(), "state dimensions differ");
        reduce_blocks(
            Exec::default(),
            a.len(),
            || Complex64::new(0.0, 0.0),
            |acc, s, e| acc + a[s..e].iter().zip(&b[s..e]).map(|(x, y)| x.conj() * y).sum::<Complex64>(),
            |x, y| x + y,
        )
    }

    /// |⟨self|other⟩|²
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Euclidean distance ‖self − other‖ after removing the relative global
    /// phase.
    pub fn phase_aligned_distance(&self, other: &StateVector) -> f64 {
        let ov = self.inner(other);
        let phase = if ov.norm() > 0.0 { ov.conj() / ov.norm() } else { Complex64::new(1.0, 0.0) };
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(x, y)| (x - y * phase).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Spin value ±1 of site `i` in basis state `b`.
#[inline]
pub(crate) fn spin(b: usize, i: usize) -> f64 {
    if (b >> i) & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}
