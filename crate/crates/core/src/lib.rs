// Copyright 2026 The confine-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Emulation of quench dynamics in a driven Rydberg chain that realises a
//! transverse- and longitudinal-field Ising model.

pub mod analysis;
pub mod commands;
pub mod config;
pub mod engine;
pub mod error;
pub mod model;
pub mod noise;
pub mod par;
pub mod schedule;
pub mod semiclassical;

pub use error::{Error, Result};
