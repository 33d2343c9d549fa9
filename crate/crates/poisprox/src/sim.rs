//! Synthetic ground truths and Poisson degradation `y ~ P(Hx)`.

use std::fmt;
use std::str::FromStr;

use poisprox_core::{CountMap, ImageGrid};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Switch from sequential-search inversion to transformed rejection.
const INVERSION_LIMIT: f64 = 10.0;

/// Seeded Poisson sampler: inversion for `λ < 10`, Hörmann's PTRS
/// transformed rejection otherwise.
pub struct PoissonSampler {
    rng: ChaCha8Rng,
}

impl PoissonSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn sample(&mut self, lambda: f64) -> u64 {
        if lambda <= 0.0 {
            0
        } else if lambda < INVERSION_LIMIT {
            self.inversion(lambda)
        } else {
            self.ptrs(lambda)
        }
    }

    fn inversion(&mut self, lambda: f64) -> u64 {
        let u: f64 = self.rng.random();
        let mut k = 0u64;
        let mut p = (-lambda).exp();
        let mut cdf = p;
        // The tail beyond a few hundred is below f64 resolution for λ < 10.
        while u > cdf && k < 1000 {
            k += 1;
            p *= lambda / k as f64;
            cdf += p;
        }
        k
    }

    fn ptrs(&mut self, lambda: f64) -> u64 {
        let slam = lambda.sqrt();
        let loglam = lambda.ln();
        let b = 0.931 + 2.53 * slam;
        let a = -0.059 + 0.02483 * b;
        let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        let vr = 0.9277 - 3.6224 / (b - 2.0);
        loop {
            let u: f64 = self.rng.random::<f64>() - 0.5;
            let v: f64 = self.rng.random();
            let us = 0.5 - u.abs();
            let k = ((2.0 * a / us + b) * u + lambda + 0.43).floor();
            if us >= 0.07 && v <= vr {
                return k as u64;
            }
            if k < 0.0 || (us < 0.013 && v > us) {
                continue;
            }
            let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
            let rhs = -lambda + k * loglam - libm::lgamma(k + 1.0);
            if lhs <= rhs {
                return k as u64;
            }
        }
    }
}

/// Independent Poisson draws with the given per-pixel means.
pub fn sample_poisson(mean: &ImageGrid, seed: u64) -> Result<CountMap> {
    if let Some(i) = mean.pixels().iter().position(|&m| m < 0.0) {
        return Err(Error::Config(format!(
            "Poisson mean at pixel {i} is negative ({})",
            mean.pixels()[i]
        )));
    }
    let mut sampler = PoissonSampler::new(seed);
    let counts = mean.pixels().iter().map(|&m| sampler.sample(m)).collect();
    Ok(CountMap::new(mean.width(), mean.height(), counts)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhantomKind {
    Constant,
    PointSources,
    GaussianBlobs,
}

impl PhantomKind {
    fn name(self) -> &'static str {
        match self {
            PhantomKind::Constant => "constant",
            PhantomKind::PointSources => "point-sources",
            PhantomKind::GaussianBlobs => "gaussian-blobs",
        }
    }
}

/// Ground-truth description, written as `kind:key=value,...`, e.g.
/// `point-sources:size=32,count=12,scale=400,background=1,seed=7`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub kind: PhantomKind,
    pub width: usize,
    pub height: usize,
    /// Level for `constant`, peak spike height for `point-sources`, flux per
    /// blob for `gaussian-blobs`.
    pub scale: f64,
    pub count: usize,
    pub background: f64,
    pub blob_sigma: f64,
    pub seed: u64,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        Self {
            kind: PhantomKind::PointSources,
            width: 32,
            height: 32,
            scale: 100.0,
            count: 12,
            background: 1.0,
            blob_sigma: 1.5,
            seed: 7,
        }
    }
}

impl fmt::Display for PhantomSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:width={},height={},scale={},count={},background={},blob_sigma={},seed={}",
            self.kind.name(),
            self.width,
            self.height,
            self.scale,
            self.count,
            self.background,
            self.blob_sigma,
            self.seed
        )
    }
}

impl FromStr for PhantomSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, params) = s.split_once(':').unwrap_or((s, ""));
        let mut spec = PhantomSpec {
            kind: match kind.trim() {
                "constant" => PhantomKind::Constant,
                "point-sources" => PhantomKind::PointSources,
                "gaussian-blobs" => PhantomKind::GaussianBlobs,
                other => return Err(Error::Config(format!("unknown phantom kind '{other}'"))),
            },
            ..Default::default()
        };
        if spec.kind != PhantomKind::PointSources {
            spec.background = 0.0;
        }
        for (key, value) in crate::parse_params(params)? {
            let bad = || Error::Config(format!("phantom parameter {key}={value} is not a number"));
            match key {
                "size" => {
                    spec.width = value.parse().map_err(|_| bad())?;
                    spec.height = spec.width;
                }
                "width" => spec.width = value.parse().map_err(|_| bad())?,
                "height" => spec.height = value.parse().map_err(|_| bad())?,
                "scale" => spec.scale = value.parse().map_err(|_| bad())?,
                "count" => spec.count = value.parse().map_err(|_| bad())?,
                "background" => spec.background = value.parse().map_err(|_| bad())?,
                "blob_sigma" => spec.blob_sigma = value.parse().map_err(|_| bad())?,
                "seed" => spec.seed = value.parse().map_err(|_| bad())?,
                other => {
                    return Err(Error::Config(format!(
                        "unknown phantom parameter '{other}'"
                    )))
                }
            }
        }
        Ok(spec)
    }
}

/// Renders a non-negative ground-truth image.
pub fn make_phantom(spec: &PhantomSpec) -> Result<ImageGrid> {
    if !(spec.scale > 0.0) || !spec.scale.is_finite() {
        return Err(Error::Config(format!(
            "phantom intensity scale {} must be positive",
            spec.scale
        )));
    }
    if !(spec.background >= 0.0) {
        return Err(Error::Config(
            "phantom background must be non-negative".into(),
        ));
    }
    let (w, h) = (spec.width, spec.height);
    if w == 0 || h == 0 {
        return Err(Error::Config("phantom shape must be positive".into()));
    }
    let n = w * h;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pixels = match spec.kind {
        PhantomKind::Constant => vec![spec.scale; n],
        PhantomKind::PointSources => {
            if spec.count > n {
                return Err(Error::Config(format!(
                    "{} point sources do not fit in {w}x{h}",
                    spec.count
                )));
            }
            let mut px = vec![spec.background; n];
            for i in index::sample(&mut rng, n, spec.count) {
                px[i] += spec.scale * rng.random_range(0.5..=1.0);
            }
            px
        }
        PhantomKind::GaussianBlobs => {
            if !(spec.blob_sigma > 0.0) {
                return Err(Error::Config("blob_sigma must be positive".into()));
            }
            let mut px = vec![spec.background; n];
            let s2 = spec.blob_sigma * spec.blob_sigma;
            let amplitude = spec.scale / (2.0 * std::f64::consts::PI * s2);
            for _ in 0..spec.count {
                let cr = rng.random_range(0.0..h as f64);
                let cc = rng.random_range(0.0..w as f64);
                for r in 0..h {
                    let dr = periodic_offset(r as f64 - cr, h as f64);
                    for c in 0..w {
                        let dc = periodic_offset(c as f64 - cc, w as f64);
                        px[r * w + c] += amplitude * (-(dr * dr + dc * dc) / (2.0 * s2)).exp();
                    }
                }
            }
            px
        }
    };
    Ok(ImageGrid::new(w, h, pixels)?)
}

fn periodic_offset(d: f64, period: f64) -> f64 {
    let d = d.rem_euclid(period);
    if d > period / 2.0 {
        d - period
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_mean_gives_zero_counts() {
        let c = sample_poisson(&ImageGrid::zeros(8, 8).unwrap(), 3).unwrap();
        assert_eq!(c.total(), 0);
    }

    #[test]
    fn negative_mean_rejected() {
        let m = ImageGrid::new(2, 1, vec![1.0, -1.0]).unwrap();
        assert!(sample_poisson(&m, 1).is_err());
    }

    #[test]
    fn moments_at_lambda_50() {
        let m = ImageGrid::filled(64, 64, 50.0).unwrap();
        let c = sample_poisson(&m, 11).unwrap();
        let n = c.len() as f64;
        let mean = c.total() as f64 / n;
        let var = c
            .counts()
            .iter()
            .map(|&k| (k as f64 - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        assert!(
            (mean - 50.0).abs() <= 3.0 * (50.0f64 / 4096.0).sqrt(),
            "mean {mean}"
        );
        assert!((40.0..=60.0).contains(&var), "var {var}");
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let m = ImageGrid::filled(16, 16, 7.5).unwrap();
        assert_eq!(
            sample_poisson(&m, 42).unwrap(),
            sample_poisson(&m, 42).unwrap()
        );
        assert_ne!(
            sample_poisson(&m, 42).unwrap(),
            sample_poisson(&m, 43).unwrap()
        );
    }

    #[test]
    fn phantom_kinds() {
        let c = make_phantom(&"constant:size=8,scale=10".parse().unwrap()).unwrap();
        assert!(c.pixels().iter().all(|&v| v == 10.0));

        let spec: PhantomSpec = "point-sources:size=16,count=3,background=0.5"
            .parse()
            .unwrap();
        let p = make_phantom(&spec).unwrap();
        assert_eq!(p.pixels().iter().filter(|&&v| v > 0.5).count(), 3);

        let spec: PhantomSpec = "gaussian-blobs:size=32,count=4,scale=50".parse().unwrap();
        let g = make_phantom(&spec).unwrap();
        assert!((g.sum() - 200.0).abs() <= 0.01 * 200.0, "{}", g.sum());
        assert!(g.pixels().iter().all(|&v| v >= 0.0));

        assert!(make_phantom(&"constant:scale=0".parse().unwrap()).is_err());
        assert!("spiral".parse::<PhantomSpec>().is_err());
    }

    #[test]
    fn spec_display_round_trips() {
        let spec: PhantomSpec = "gaussian-blobs:width=16,height=8,count=2,seed=9"
            .parse()
            .unwrap();
        assert_eq!(spec.to_string().parse::<PhantomSpec>().unwrap(), spec);
    }
}
