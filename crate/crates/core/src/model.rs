// Copyright 2026 The confine-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Register geometry, van der Waals couplings and the Rydberg ↔ Ising
//! parameter mapping.
//!
//! Conventions used throughout the crate:
//!
//! * Angular frequencies are in rad·µs⁻¹. Configuration and export formats use
//!   "MHz_2pi" numbers, where `x` means `x·2π` rad·µs⁻¹.
//! * Sites are indexed from 0. The sublattice sign is `+1` on even sites, so
//!   site 0 here is site 1 of the usual 1-based `(-1)^(i+1)` rotation.
//! * With the default [`HParity::Odd`] the local-detuning pattern is `1` on odd
//!   (0-based) sites, and the Néel state has Rydberg excitations on even sites.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default C6 in MHz_2pi·µm⁶: gives U_nn = 18.5·2π rad·µs⁻¹ at a = 6.0 µm.
pub const DEFAULT_C6_MHZ2PI: f64 = 863_136.0;
pub const DEFAULT_SPACING_UM: f64 = 6.0;

#[inline]
pub fn from_mhz2pi(x: f64) -> f64 {
    x * TAU
}

#[inline]
pub fn to_mhz2pi(w: f64) -> f64 {
    w / TAU
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Open,
    Ring,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    #[default]
    Full,
    NearestNeighbor,
}

/// Which 0-based sublattice carries `h_i = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HParity {
    #[default]
    Odd,
    Even,
}

/// Sign in front of the `h^z/2` correction to the global detuning.
///
/// `Derived` is `Δ_glo = U(1 + s·h^z/2)`, which makes the longitudinal field
/// uniform in the Ising frame. `Printed` flips that sign and reproduces the
/// 18.12·2π MHz figure quoted for `h^z = 0.04`; it leaves a staggered
/// residual field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DeltaGloConvention {
    #[default]
    Derived,
    Printed,
}

/// Sublattice sign of 0-based site `i`: `+1` on even sites, `-1` on odd.
#[inline]
pub fn staggering_sign(i: usize) -> f64 {
    if i % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Alternating 0/1 pattern with `1` on the sites of `parity`.
pub fn h_pattern(n: usize, parity: HParity) -> Vec<f64> {
    let one = match parity {
        HParity::Odd => 1,
        HParity::Even => 0,
    };
    (0..n).map(|i| if i % 2 == one { 1.0 } else { 0.0 }).collect()
}

/// Néel bitstring complementary to the h-pattern of `parity`: Rydberg on the
/// sites with `h_i = 0`.
pub fn neel_bits(n: usize, parity: HParity) -> Vec<bool> {
    h_pattern(n, parity).into_iter().map(|h| h == 0.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    /// Atom positions in µm.
    pub positions: Vec<[f64; 2]>,
    pub lattice_spacing: f64,
    pub turn_indices: Vec<usize>,
    /// Degrees.
    pub turn_angle: f64,
    pub boundary: Boundary,
}

impl Geometry {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let [xi, yi] = self.positions[i];
        let [xj, yj] = self.positions[j];
        (xi - xj).hypot(yi - yj)
    }

    /// Regular polygon with side `a`, closing the chain into a ring.
    pub fn ring(n: usize, a: f64) -> Result<Geometry> {
        if n < 3 {
            return Err(Error::InvalidGeometry(format!("ring needs at least 3 sites, got {n}")));
        }
        if !(a > 0.0) {
            return Err(Error::InvalidGeometry(format!("lattice spacing must be positive, got {a}")));
        }
        let radius = a / (2.0 * (std::f64::consts::PI / n as f64).sin());
        let positions = (0..n)
            .map(|i| {
                let phi = TAU * i as f64 / n as f64;
                [radius * phi.cos(), radius * phi.sin()]
            })
            .collect();
        Ok(Geometry {
            positions,
            lattice_spacing: a,
            turn_indices: Vec::new(),
            turn_angle: 0.0,
            boundary: Boundary::Ring,
        })
    }

    /// Copy with every position shifted by `offsets` (µm).
    pub fn displaced(&self, offsets: &[[f64; 2]]) -> Geometry {
        let mut g = self.clone();
        for (p, d) in g.positions.iter_mut().zip(offsets) {
            p[0] += d[0];
            p[1] += d[1];
        }
        g
    }
}

/// Open chain of `n` sites spaced `a` µm apart. The bond leaving each site in
/// `turns` is rotated counter-clockwise by `turn_angle_deg` relative to the
/// previous bond.
pub fn build_geometry(n: usize, a: f64, turns: &[usize], turn_angle_deg: f64) -> Result<Geometry> {
    if n < 2 {
        return Err(Error::InvalidGeometry(format!("need at least 2 sites, got {n}")));
    }
    if !(a > 0.0) {
        return Err(Error::InvalidGeometry(format!("lattice spacing must be positive, got {a}")));
    }
    for (k, &t) in turns.iter().enumerate() {
        if t == 0 || t + 1 >= n {
            return Err(Error::InvalidGeometry(format!("turn index {t} is not interior to a chain of {n} sites")));
        }
        if k > 0 && turns[k - 1] >= t {
            return Err(Error::InvalidGeometry("turn indices must be strictly increasing".into()));
        }
    }

    let step = turn_angle_deg.to_radians();
    let mut heading = 0.0_f64;
    let mut positions = Vec::with_capacity(n);
    positions.push([0.0, 0.0]);
    for i in 0..n - 1 {
        if turns.contains(&i) {
            heading += step;
        }
        let [x, y] = positions[i];
        positions.push([x + a * heading.cos(), y + a * heading.sin()]);
    }
    Ok(Geometry {
        positions,
        lattice_spacing: a,
        turn_indices: turns.to_vec(),
        turn_angle: turn_angle_deg,
        boundary: Boundary::Open,
    })
}

/// The 35-site register: two 60° turns after sites 11 and 23.
pub fn device_register() -> Geometry {
    build_geometry(35, DEFAULT_SPACING_UM, &[11, 23], 60.0).expect("static register is valid")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    /// rad·µs⁻¹
    pub u: f64,
}

/// Symmetric pair couplings with `i < j`; self-couplings are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    n: usize,
    pairs: Vec<Coupling>,
    pub truncation: Truncation,
}

impl CouplingMatrix {
    pub fn from_pairs(n: usize, mut pairs: Vec<Coupling>, truncation: Truncation) -> Self {
        for p in &mut pairs {
            if p.i > p.j {
                std::mem::swap(&mut p.i, &mut p.j);
            }
        }
        pairs.sort_by_key(|p| (p.i, p.j));
        CouplingMatrix { n, pairs, truncation }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn pairs(&self) -> &[Coupling] {
        &self.pairs
    }

    /// `U_ij`, zero when the pair is not kept (or `i == j`).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.pairs
            .binary_search_by_key(&(a, b), |p| (p.i, p.j))
            .map(|k| self.pairs[k].u)
            .unwrap_or(0.0)
    }

    /// Σ_j U_ij for each site.
    pub fn row_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n];
        for p in &self.pairs {
            s[p.i] += p.u;
            s[p.j] += p.u;
        }
        s
    }
}

/// `U_ij = C6 / r_ij^6` for the kept pairs.
pub fn vdw_couplings(geometry: &Geometry, c6: f64, truncation: Truncation) -> Result<CouplingMatrix> {
    if !(c6 > 0.0) {
        return Err(Error::InvalidArgument(format!("C6 must be positive, got {c6}")));
    }
    let n = geometry.len();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let r = geometry.distance(i, j);
            if r <= 0.0 {
                return Err(Error::SingularCoupling(i, j));
            }
            let keep = match truncation {
                Truncation::Full => true,
                Truncation::NearestNeighbor => {
                    j == i + 1 || (geometry.boundary == Boundary::Ring && i == 0 && j == n - 1 && n > 2)
                }
            };
            if keep {
                pairs.push(Coupling { i, j, u: c6 / r.powi(6) });
            }
        }
    }
    Ok(CouplingMatrix::from_pairs(n, pairs, truncation))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RydbergParams {
    /// rad·µs⁻¹·µm⁶
    pub c6: f64,
    pub omega: f64,
    /// Drive phase; always zero here.
    pub phi: f64,
    pub delta_glo: f64,
    pub delta_loc: f64,
    pub h_pattern: Vec<f64>,
}

impl RydbergParams {
    pub fn validate(&self) -> Result<()> {
        if self.phi != 0.0 {
            return Err(Error::InvalidArgument("drive phase must be zero".into()));
        }
        if let Some(h) = self.h_pattern.iter().find(|h| !(0.0..=1.0).contains(*h)) {
            return Err(Error::InvalidArgument(format!("h-pattern weight {h} outside [0, 1]")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingParams {
    /// rad·µs⁻¹
    pub j: f64,
    pub hx: f64,
    /// Per-site longitudinal field.
    pub hz: Vec<f64>,
}

impl IsingParams {
    pub fn uniform(j: f64, hx: f64, hz: f64, n: usize) -> Self {
        IsingParams { j, hx, hz: vec![hz; n] }
    }
}

/// Ferromagnetic Ising parameters → Rydberg drive for a uniform `h^z`.
pub fn map_ising_to_rydberg(
    ising: &IsingParams,
    u_nn: f64,
    c6: f64,
    parity: HParity,
    convention: DeltaGloConvention,
) -> Result<RydbergParams> {
    if !(u_nn > 0.0) {
        return Err(Error::InvalidArgument(format!("U_nn must be positive, got {u_nn}")));
    }
    let n = ising.hz.len();
    let hz = ising.hz.first().copied().unwrap_or(0.0);
    if ising.hz.iter().any(|&h| h != hz) {
        return Err(Error::InvalidArgument("only a uniform h^z maps onto a single (Δ_glo, Δ_loc) pair".into()));
    }
    // Sign of the sublattice carrying h = 1, and of the one carrying h = 0.
    let s_one = match parity {
        HParity::Odd => -1.0,
        HParity::Even => 1.0,
    };
    let s_zero = -s_one;
    let glo_sign = match convention {
        DeltaGloConvention::Derived => s_zero,
        DeltaGloConvention::Printed => -s_zero,
    };
    Ok(RydbergParams {
        c6,
        omega: ising.hx * u_nn / 2.0,
        phi: 0.0,
        delta_glo: u_nn * (1.0 + glo_sign * hz / 2.0),
        // + 0.0 normalises -0.0 at h^z = 0
        delta_loc: u_nn * hz * s_one + 0.0,
        h_pattern: h_pattern(n, parity),
    })
}

/// Rydberg drive → per-site Ising parameters (nearest-neighbour ring form).
pub fn map_rydberg_to_ising(ryd: &RydbergParams, u_nn: f64) -> Result<IsingParams> {
    if !(u_nn > 0.0) {
        return Err(Error::InvalidArgument(format!("U_nn must be positive, got {u_nn}")));
    }
    let hz = ryd
        .h_pattern
        .iter()
        .enumerate()
        .map(|(i, &h)| (2.0 * (ryd.delta_glo + h * ryd.delta_loc) / u_nn - 2.0) * staggering_sign(i))
        .collect();
    Ok(IsingParams {
        j: u_nn / 4.0,
        hx: 2.0 * ryd.omega / u_nn,
        hz,
    })
}

/// A concrete device: positions, couplings and the static per-site
/// modifiers of the drive. The ideal instance has unit Rabi scale, zero
/// detuning offsets and local weights equal to the h-pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub geometry: Geometry,
    /// rad·µs⁻¹·µm⁶
    pub c6: f64,
    pub couplings: CouplingMatrix,
    /// Multiplies Ω(t) on every site.
    pub omega_scale: f64,
    /// Static additive detuning per site, rad·µs⁻¹.
    pub detuning_offsets: Vec<f64>,
    /// Per-site factor multiplying Δ_loc(t).
    pub local_weights: Vec<f64>,
}

impl Instance {
    pub fn new(geometry: Geometry, c6: f64, truncation: Truncation, h_pattern: &[f64]) -> Result<Instance> {
        if h_pattern.len() != geometry.len() {
            return Err(Error::InvalidArgument(format!(
                "h-pattern has {} entries for {} sites",
                h_pattern.len(),
                geometry.len()
            )));
        }
        let couplings = vdw_couplings(&geometry, c6, truncation)?;
        let n = geometry.len();
        Ok(Instance {
            geometry,
            c6,
            couplings,
            omega_scale: 1.0,
            detuning_offsets: vec![0.0; n],
            local_weights: h_pattern.to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.geometry.len()
    }

    pub fn is_empty(&self) -> bool {
        self.geometry.is_empty()
    }

    /// Coupling between sites 0 and 1 of the unperturbed lattice.
    pub fn nominal_u_nn(&self) -> f64 {
        self.c6 / self.geometry.lattice_spacing.powi(6)
    }
}

/// Flat JSON form of a register plus its Ising-frame parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    #[serde(rename = "L")]
    pub n: usize,
    pub a_um: f64,
    #[serde(default)]
    pub turns: Vec<usize>,
    #[serde(default = "default_turn_angle")]
    pub turn_angle_deg: f64,
    #[serde(rename = "C6_MHz2pi_um6", default = "default_c6")]
    pub c6_mhz2pi_um6: f64,
    pub hx: f64,
    pub hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_pattern: Option<Vec<f64>>,
    #[serde(default)]
    pub boundary: Boundary,
}

fn default_turn_angle() -> f64 {
    60.0
}

fn default_c6() -> f64 {
    DEFAULT_C6_MHZ2PI
}

impl ModelDocument {
    pub fn geometry(&self) -> Result<Geometry> {
        match self.boundary {
            Boundary::Open => build_geometry(self.n, self.a_um, &self.turns, self.turn_angle_deg),
            Boundary::Ring => Geometry::ring(self.n, self.a_um),
        }
    }

    pub fn c6(&self) -> f64 {
        from_mhz2pi(self.c6_mhz2pi_um6)
    }

    pub fn u_nn(&self) -> f64 {
        self.c6() / self.a_um.powi(6)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
