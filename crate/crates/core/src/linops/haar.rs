use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use super::{Identity, LinearOperator, OperatorKind};
use crate::rng::SplitMix64;
use crate::vecops::{axpy, dot, norm};
use crate::{Error, Result};

/// Relative accuracy required of `ΦΦᵀ = cI`.
const FRAME_TOLERANCE: f64 = 1e-10;
const FRAME_PROBES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameKind {
    /// Pixel basis, `Φ = I`.
    Identity,
    /// Separable orthonormal Haar wavelet basis (`L = n`, `c = 1`).
    OrthonormalHaar,
    /// Single-level undecimated Haar frame with unit-norm atoms
    /// (`L = 4n`, `c = 4`).
    UndecimatedHaar,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TightFrameDescriptor {
    pub frame_constant: f64,
    pub kind: FrameKind,
}

/// Haar synthesis operator `Φ: ℝᴸ → ℝⁿ`; the adjoint is the analysis transform.
#[derive(Debug, Clone)]
pub struct HaarFrame {
    kind: FrameKind,
    width: usize,
    height: usize,
    levels: usize,
}

impl HaarFrame {
    /// Orthonormal Haar with `levels` decomposition steps (full depth when `None`).
    pub fn orthonormal(width: usize, height: usize, levels: Option<usize>) -> Result<Self> {
        check_dyadic(width, height)?;
        let max_levels = width.min(height).trailing_zeros() as usize;
        let levels = levels.unwrap_or(max_levels);
        if levels > max_levels {
            return Err(Error::InvalidArgument(format!(
                "{levels} Haar levels requested but {width}x{height} supports at most {max_levels}"
            )));
        }
        Ok(Self {
            kind: FrameKind::OrthonormalHaar,
            width,
            height,
            levels,
        })
    }

    pub fn undecimated(width: usize, height: usize) -> Result<Self> {
        check_dyadic(width, height)?;
        if width < 2 || height < 2 {
            return Err(Error::InvalidArgument(
                "undecimated Haar needs at least 2 pixels per axis".into(),
            ));
        }
        Ok(Self {
            kind: FrameKind::UndecimatedHaar,
            width,
            height,
            levels: 1,
        })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    fn pixels(&self) -> usize {
        self.width * self.height
    }

    fn orthonormal_analysis(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
        let w = self.width;
        let mut tmp = vec![0.0; w.max(self.height)];
        let (mut cw, mut ch) = (w, self.height);
        for _ in 0..self.levels {
            for r in 0..ch {
                haar_step(&mut out[r * w..r * w + cw], &mut tmp[..cw]);
            }
            let mut col = vec![0.0; ch];
            for c in 0..cw {
                for r in 0..ch {
                    col[r] = out[r * w + c];
                }
                haar_step(&mut col, &mut tmp[..ch]);
                for r in 0..ch {
                    out[r * w + c] = col[r];
                }
            }
            cw /= 2;
            ch /= 2;
        }
    }

    fn orthonormal_synthesis(&self, a: &[f64], out: &mut [f64]) {
        out.copy_from_slice(a);
        let w = self.width;
        let mut tmp = vec![0.0; w.max(self.height)];
        for level in (0..self.levels).rev() {
            let (cw, ch) = (w >> level, self.height >> level);
            let mut col = vec![0.0; ch];
            for c in 0..cw {
                for r in 0..ch {
                    col[r] = out[r * w + c];
                }
                haar_step_inverse(&mut col, &mut tmp[..ch]);
                for r in 0..ch {
                    out[r * w + c] = col[r];
                }
            }
            for r in 0..ch {
                haar_step_inverse(&mut out[r * w..r * w + cw], &mut tmp[..cw]);
            }
        }
    }

    /// Bands ordered `[LL, HL, LH, HH]`, each `n` long.
    fn undecimated_analysis(&self, x: &[f64], out: &mut [f64]) {
        let (w, h, n) = (self.width, self.height, self.pixels());
        for r in 0..h {
            let r1 = (r + 1) % h;
            for c in 0..w {
                let c1 = (c + 1) % w;
                let (p, q) = (x[r * w + c], x[r * w + c1]);
                let (s, t) = (x[r1 * w + c], x[r1 * w + c1]);
                let i = r * w + c;
                out[i] = 0.5 * (p + q + s + t);
                out[n + i] = 0.5 * (p - q + s - t);
                out[2 * n + i] = 0.5 * (p + q - s - t);
                out[3 * n + i] = 0.5 * (p - q - s + t);
            }
        }
    }

    fn undecimated_synthesis(&self, a: &[f64], out: &mut [f64]) {
        let (w, h, n) = (self.width, self.height, self.pixels());
        out.iter_mut().for_each(|o| *o = 0.0);
        for r in 0..h {
            let r1 = (r + 1) % h;
            for c in 0..w {
                let c1 = (c + 1) % w;
                let i = r * w + c;
                let (ll, hl, lh, hh) = (a[i], a[n + i], a[2 * n + i], a[3 * n + i]);
                out[r * w + c] += 0.5 * (ll + hl + lh + hh);
                out[r * w + c1] += 0.5 * (ll - hl + lh - hh);
                out[r1 * w + c] += 0.5 * (ll + hl - lh - hh);
                out[r1 * w + c1] += 0.5 * (ll - hl - lh + hh);
            }
        }
    }
}

fn check_dyadic(width: usize, height: usize) -> Result<()> {
    if width.is_power_of_two() && height.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "Haar dictionaries need power-of-two sides, got {width}x{height}"
        )))
    }
}

/// One orthonormal Haar analysis step: `[x] → [approx | detail]`.
fn haar_step(x: &mut [f64], tmp: &mut [f64]) {
    let half = x.len() / 2;
    for k in 0..half {
        tmp[k] = (x[2 * k] + x[2 * k + 1]) * FRAC_1_SQRT_2;
        tmp[half + k] = (x[2 * k] - x[2 * k + 1]) * FRAC_1_SQRT_2;
    }
    x.copy_from_slice(tmp);
}

fn haar_step_inverse(x: &mut [f64], tmp: &mut [f64]) {
    let half = x.len() / 2;
    for k in 0..half {
        tmp[2 * k] = (x[k] + x[half + k]) * FRAC_1_SQRT_2;
        tmp[2 * k + 1] = (x[k] - x[half + k]) * FRAC_1_SQRT_2;
    }
    x.copy_from_slice(tmp);
}

impl LinearOperator for HaarFrame {
    fn input_dim(&self) -> usize {
        match self.kind {
            FrameKind::UndecimatedHaar => 4 * self.pixels(),
            _ => self.pixels(),
        }
    }
    fn output_dim(&self) -> usize {
        self.pixels()
    }
    fn kind(&self) -> OperatorKind {
        OperatorKind::DictionarySynthesis
    }
    fn forward_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        match self.kind {
            FrameKind::UndecimatedHaar => self.undecimated_synthesis(v, out),
            _ => self.orthonormal_synthesis(v, out),
        }
        Ok(())
    }
    fn adjoint_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        match self.kind {
            FrameKind::UndecimatedHaar => self.undecimated_analysis(v, out),
            _ => self.orthonormal_analysis(v, out),
        }
        Ok(())
    }
}

/// A synthesis operator whose frame constant has been measured, `ΦΦᵀ = cI`.
pub struct TightFrame {
    op: Box<dyn LinearOperator>,
    descriptor: TightFrameDescriptor,
}

impl TightFrame {
    /// Measures `c` on random probes and rejects operators that are not tight.
    pub fn verify(op: Box<dyn LinearOperator>, kind: FrameKind) -> Result<Self> {
        let (frame_constant, relative_error) =
            measure_frame_constant(op.as_ref(), FRAME_PROBES, 0x7157)?;
        if !(frame_constant > 0.0) || relative_error > FRAME_TOLERANCE {
            return Err(Error::NotTightFrame { relative_error });
        }
        Ok(Self {
            op,
            descriptor: TightFrameDescriptor {
                frame_constant,
                kind,
            },
        })
    }

    /// `Φ = I` on `ℝⁿ`.
    pub fn identity(n: usize) -> Self {
        Self {
            op: Box::new(Identity::new(n)),
            descriptor: TightFrameDescriptor {
                frame_constant: 1.0,
                kind: FrameKind::Identity,
            },
        }
    }

    pub fn descriptor(&self) -> TightFrameDescriptor {
        self.descriptor
    }

    pub fn frame_constant(&self) -> f64 {
        self.descriptor.frame_constant
    }

    /// Number of atoms `L`.
    pub fn atoms(&self) -> usize {
        self.op.input_dim()
    }

    pub fn pixels(&self) -> usize {
        self.op.output_dim()
    }
}

/// Returns `(c, max relative error of ΦΦᵀv = cv)` over `probes` random vectors.
pub(crate) fn measure_frame_constant(
    op: &dyn LinearOperator,
    probes: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let n = op.output_dim();
    let mut rng = SplitMix64::new(seed);
    let mut pairs = Vec::with_capacity(probes);
    let (mut num, mut den) = (0.0, 0.0);
    let mut coeffs = vec![0.0; op.input_dim()];
    for _ in 0..probes {
        let mut v = vec![0.0; n];
        rng.fill_signed(&mut v);
        let mut gv = vec![0.0; n];
        op.adjoint_into(&v, &mut coeffs)?;
        op.forward_into(&coeffs, &mut gv)?;
        num += dot(&gv, &v);
        den += dot(&v, &v);
        pairs.push((v, gv));
    }
    let c = num / den;
    let mut worst = 0.0_f64;
    for (v, mut gv) in pairs {
        axpy(-c, &v, &mut gv);
        worst = worst.max(norm(&gv) / (c.abs() * norm(&v)));
    }
    Ok((c, worst))
}

impl LinearOperator for TightFrame {
    fn input_dim(&self) -> usize {
        self.op.input_dim()
    }
    fn output_dim(&self) -> usize {
        self.op.output_dim()
    }
    fn kind(&self) -> OperatorKind {
        self.op.kind()
    }
    fn forward_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        self.op.forward_into(v, out)
    }
    fn adjoint_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        self.op.adjoint_into(v, out)
    }
}

/// Builds and verifies the synthesis dictionary of the given kind.
pub fn make_dictionary(kind: FrameKind, width: usize, height: usize) -> Result<TightFrame> {
    let op: Box<dyn LinearOperator> = match kind {
        FrameKind::Identity => return Ok(TightFrame::identity(width * height)),
        FrameKind::OrthonormalHaar => Box::new(HaarFrame::orthonormal(width, height, None)?),
        FrameKind::UndecimatedHaar => Box::new(HaarFrame::undecimated(width, height)?),
    };
    TightFrame::verify(op, kind)
}
