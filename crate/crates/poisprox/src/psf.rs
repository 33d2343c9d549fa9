//! Point-spread function specs: a built-in `gaussian:sigma=<s>,size=<k>`,
//! `box:size=<k>`, `delta`, or a path to a plain-text matrix file.

use std::path::Path;

use poisprox_core::ImageGrid;

use crate::error::{Error, Result};
use crate::io::load_matrix;

pub fn gaussian(sigma: f64, size: usize) -> Result<ImageGrid> {
    if !(sigma > 0.0) || size == 0 {
        return Err(Error::Config(format!(
            "gaussian PSF needs sigma > 0 and size > 0, got sigma={sigma}, size={size}"
        )));
    }
    let c = (size / 2) as f64;
    let px: Vec<f64> = (0..size * size)
        .map(|k| {
            let (r, col) = ((k / size) as f64 - c, (k % size) as f64 - c);
            (-(r * r + col * col) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = px.iter().sum();
    Ok(ImageGrid::new(
        size,
        size,
        px.into_iter().map(|p| p / total).collect(),
    )?)
}

/// Parses a PSF spec string; anything that is not a built-in is read as a
/// matrix file.
pub fn parse_psf(spec: &str) -> Result<ImageGrid> {
    let (kind, params) = spec.split_once(':').unwrap_or((spec, ""));
    match kind {
        "delta" => Ok(ImageGrid::filled(1, 1, 1.0)?),
        "gaussian" | "box" => {
            let mut sigma = 1.5;
            let mut size = if kind == "box" { 3 } else { 7 };
            for (key, value) in crate::parse_params(params)? {
                let bad = || Error::Config(format!("PSF parameter {key}={value} is invalid"));
                match key {
                    "sigma" if kind == "gaussian" => sigma = value.parse().map_err(|_| bad())?,
                    "size" => size = value.parse().map_err(|_| bad())?,
                    other => return Err(Error::Config(format!("unknown PSF parameter '{other}'"))),
                }
            }
            if kind == "box" {
                let w = 1.0 / (size * size) as f64;
                Ok(ImageGrid::filled(size, size, w)?)
            } else {
                gaussian(sigma, size)
            }
        }
        _ => load_matrix(Path::new(spec)),
    }
}
