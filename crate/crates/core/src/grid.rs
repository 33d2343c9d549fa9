//! Image, coefficient and count containers.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Real-valued 2-D pixel array stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl ImageGrid {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "image shape {width}x{height} must be positive"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch {
                context: "ImageGrid::new",
                expected: width * height,
                found: pixels.len(),
            });
        }
        if let Some(i) = pixels.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "pixel {i} is not finite ({})",
                pixels[i]
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::filled(width, height, 0.0)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    pub fn max(&self) -> f64 {
        self.pixels
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sum(&self) -> f64 {
        self.pixels.iter().sum()
    }
}

/// Coefficient vector `α` in the dictionary domain.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector(Vec<f64>);

impl CoeffVector {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("empty coefficient vector".into()));
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "coefficient {i} is not finite"
            )));
        }
        Ok(Self(coeffs))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Observed photon counts, one non-negative integer per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountMap {
    width: usize,
    height: usize,
    counts: Vec<u64>,
}

impl CountMap {
    pub fn new(width: usize, height: usize, counts: Vec<u64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "count map shape {width}x{height} must be positive"
            )));
        }
        if counts.len() != width * height {
            return Err(Error::DimensionMismatch {
                context: "CountMap::new",
                expected: width * height,
                found: counts.len(),
            });
        }
        Ok(Self {
            width,
            height,
            counts,
        })
    }

    /// Builds a count map from signed integers, rejecting negative entries.
    pub fn from_signed(width: usize, height: usize, counts: &[i64]) -> Result<Self> {
        let mut out = Vec::with_capacity(counts.len());
        for (i, &c) in counts.iter().enumerate() {
            if c < 0 {
                return Err(Error::InvalidArgument(format!(
                    "negative count {c} at pixel {i}"
                )));
            }
            out.push(c as u64);
        }
        Self::new(width, height, out)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn max(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }
}
