// Copyright 2026 The confine-sim Authors
// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::par::{for_each_indexed, Exec};
use crate::schedule::Controls;

use super::spin;

/// Pauli-basis coefficients of the Rydberg Hamiltonian, constant term
/// dropped:
///
/// `H = Σ_i x_i σˣ_i + Σ_i z_i σᶻ_i + Σ_{i<j} zz_ij σᶻ_i σᶻ_j`
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianTerms {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    /// `(i, j, coefficient)` with `i < j`.
    pub zz: Vec<(usize, usize, f64)>,
}

impl HamiltonianTerms {
    pub fn n_sites(&self) -> usize {
        self.x.len()
    }
}

/// Expand `n_i = (1 + σᶻ_i)/2`: `x_i = -Ω/2`,
/// `z_i = -(Δ_glo + δ_i + w_i Δ_loc)/2 + Σ_j U_ij/4`, `zz_ij = U_ij/4`.
pub fn build_terms(instance: &Instance, c: Controls) -> Result<HamiltonianTerms> {
    let n = instance.len();
    if instance.couplings.len() != n || instance.detuning_offsets.len() != n || instance.local_weights.len() != n {
        return Err(Error::InvalidArgument("instance arrays disagree on the site count".into()));
    }
    let rows = instance.couplings.row_sums();
    let x = vec![-0.5 * c.omega * instance.omega_scale; n];
    let z = (0..n)
        .map(|i| {
            let detuning = c.delta_glo + instance.detuning_offsets[i] + instance.local_weights[i] * c.delta_loc;
            -0.5 * detuning + 0.25 * rows[i]
        })
        .collect();
    let zz = instance.couplings.pairs().iter().map(|p| (p.i, p.j, 0.25 * p.u)).collect();
    Ok(HamiltonianTerms { x, z, zz })
}

/// Diagonal (σᶻ and σᶻσᶻ) energy of every basis state.
pub fn diagonal_energies(terms: &HamiltonianTerms, exec: Exec) -> Vec<f64> {
    let n = terms.n_sites();
    let mut e = vec![0.0; 1 << n];
    for_each_indexed(exec, &mut e, |b, out| {
        let mut acc = 0.0;
        for (i, &zi) in terms.z.iter().enumerate() {
            acc += zi * spin(b, i);
        }
        for &(i, j, c) in &terms.zz {
            acc += c * spin(b, i) * spin(b, j);
        }
        *out = acc;
    });
    e
}

/// The diagonal energy split by its dependence on the two detuning controls:
/// `E(b) = base(b) + Δ_glo·glo(b) + Δ_loc·loc(b)`.
#[derive(Debug, Clone)]
pub struct DiagonalModel {
    pub base: Vec<f64>,
    pub glo: Vec<f64>,
    pub loc: Vec<f64>,
}

impl DiagonalModel {
    pub fn new(instance: &Instance, exec: Exec) -> Result<Self> {
        let zero = build_terms(instance, Controls::default())?;
        let n = zero.n_sites();
        let base = diagonal_energies(&zero, exec);
        let glo_terms = HamiltonianTerms {
            x: vec![0.0; n],
            z: vec![-0.5; n],
            zz: Vec::new(),
        };
        let loc_terms = HamiltonianTerms {
            x: vec![0.0; n],
            z: instance.local_weights.iter().map(|w| -0.5 * w).collect(),
            zz: Vec::new(),
        };
        Ok(DiagonalModel {
            base,
            glo: diagonal_energies(&glo_terms, exec),
            loc: diagonal_energies(&loc_terms, exec),
        })
    }

    #[inline]
    pub fn energy(&self, b: usize, delta_glo: f64, delta_loc: f64) -> f64 {
        self.base[b] + delta_glo * self.glo[b] + delta_loc * self.loc[b]
    }
}
