// Copyright 2026 The confine-sim Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("singular coupling: atoms {0} and {1} coincide")]
    SingularCoupling(usize, usize),

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("time {t} µs outside waveform domain [0, {end}]")]
    OutOfDomain { t: f64, end: f64 },

    #[error("dt = {dt} µs exceeds the shortest control segment ({segment} µs)")]
    ControlAliasing { dt: f64, segment: f64 },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mean front undefined: excitation density integrates to zero")]
    UndefinedFront,

    #[error("{path}:{line}: {msg}")]
    ShotFormat {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) => 2,
            Error::Io { .. } | Error::ShotFormat { .. } => 4,
            _ => 3,
        }
    }
}
