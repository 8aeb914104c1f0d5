// Copyright 2026 The confine-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Pinned outputs of the default protocol. A change here means the physics
//! changed, not just round-off.

use confine_sim::analysis::neel_fidelity;
use confine_sim::engine::{evolve, EvolveOptions, StateVector};
use confine_sim::model::{build_geometry, from_mhz2pi, h_pattern, HParity, Instance, Truncation, DEFAULT_C6_MHZ2PI};
use confine_sim::schedule::{build_prep_schedule, concat, PrepProtocol, ScheduleFragment};

fn prep_fidelity(n: usize) -> f64 {
    let g = build_geometry(n, 6.0, &[], 0.0).unwrap();
    let inst = Instance::new(g, from_mhz2pi(DEFAULT_C6_MHZ2PI), Truncation::Full, &h_pattern(n, HParity::Odd)).unwrap();
    let s = concat(&build_prep_schedule(&PrepProtocol::default()).unwrap(), &ScheduleFragment::empty()).unwrap();
    let psi = StateVector::basis(&vec![false; n]).unwrap();
    let tr = evolve(&psi, &s, &inst, EvolveOptions::default(), &[s.t_end]).unwrap();
    neel_fidelity(&tr.snapshots[0].state, HParity::Odd)
}

#[test]
fn prep_fidelity_l10_is_pinned() {
    let f = prep_fidelity(10);
    assert!((f - 0.55660403916577).abs() <= 1e-6, "{f}");
}
