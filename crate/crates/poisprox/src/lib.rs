//! Simulation, file formats and the command-line pipeline around
//! [`poisprox_core`].

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod psf;
pub mod sim;
pub mod trace;

pub use error::{Error, Result};

/// Splits `key=value,key=value` parameter lists.
pub(crate) fn parse_params(params: &str) -> Result<Vec<(&str, &str)>> {
    params
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::Config(format!("expected key=value, got '{p}'")))
        })
        .collect()
}
