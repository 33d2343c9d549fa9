use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{LinearOperator, OperatorKind};
use crate::fft::{Complex, Fft2d};
use crate::grid::ImageGrid;
use crate::{Error, Result};

/// Imaginary residue allowed when filtering a real signal.
const IMAGINARY_TOLERANCE: f64 = 1e-9;

/// A real operator diagonal in the 2-D DFT basis, stored as its spectrum.
#[derive(Debug, Clone)]
pub struct FourierDiagonal {
    fft: Fft2d,
    spectrum: Vec<Complex>,
}

impl FourierDiagonal {
    pub fn width(&self) -> usize {
        self.fft.width()
    }

    pub fn height(&self) -> usize {
        self.fft.height()
    }

    /// Transfer function `ĥ`, row-major over frequencies.
    pub fn spectrum(&self) -> &[Complex] {
        &self.spectrum
    }

    /// Largest `|ĥ|`, the exact spectral norm of the convolution.
    pub fn max_gain(&self) -> f64 {
        self.spectrum.iter().map(|h| h.abs()).fold(0.0, f64::max)
    }

    /// `out ← F⁻¹ diag(m(ĥ)) F v` for real `v`; `m` must preserve Hermitian
    /// symmetry so the result is real.
    pub fn filter_into(
        &self,
        v: &[f64],
        out: &mut [f64],
        multiplier: impl Fn(Complex) -> Complex,
    ) -> Result<()> {
        let mut buf: Vec<Complex> = v.iter().map(|&x| Complex::new(x, 0.0)).collect();
        self.fft.forward(&mut buf);
        for (b, &h) in buf.iter_mut().zip(&self.spectrum) {
            *b = *b * multiplier(h);
        }
        self.fft.inverse(&mut buf);
        let scale = v.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        let residue = buf.iter().fold(0.0_f64, |m, c| m.max(c.im.abs()));
        if residue > IMAGINARY_TOLERANCE * scale {
            return Err(Error::ImaginaryResidue(residue));
        }
        for (o, b) in out.iter_mut().zip(&buf) {
            *o = b.re;
        }
        Ok(())
    }
}

/// Periodic convolution `H` on a `width × height` grid.
#[derive(Debug, Clone)]
pub struct Convolution {
    diagonal: FourierDiagonal,
    kernel: ImageGrid,
}

impl Convolution {
    /// Unit-sum PSF the operator was built from.
    pub fn kernel(&self) -> &ImageGrid {
        &self.kernel
    }

    pub fn width(&self) -> usize {
        self.diagonal.width()
    }

    pub fn height(&self) -> usize {
        self.diagonal.height()
    }
}

/// Builds the circular convolution by `psf`, normalized to unit sum.
///
/// The PSF centre `(h/2, w/2)` is mapped to the origin, so odd-sized symmetric
/// kernels give a self-adjoint operator.
pub fn make_convolution(psf: &ImageGrid, width: usize, height: usize) -> Result<Convolution> {
    let (kw, kh) = psf.shape();
    if kw > width || kh > height {
        return Err(Error::InvalidArgument(format!(
            "PSF {kw}x{kh} is larger than the image {width}x{height}"
        )));
    }
    if let Some(i) = psf.pixels().iter().position(|&p| p < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "PSF entry {i} is negative ({})",
            psf.pixels()[i]
        )));
    }
    let total = psf.sum();
    if total <= 0.0 {
        return Err(Error::InvalidArgument("PSF is identically zero".into()));
    }
    let kernel = ImageGrid::new(kw, kh, psf.pixels().iter().map(|p| p / total).collect())?;

    let (cr, cc) = (kh / 2, kw / 2);
    let mut embedded = vec![Complex::ZERO; width * height];
    for r in 0..kh {
        for c in 0..kw {
            let rr = (r + height - cr) % height;
            let ccol = (c + width - cc) % width;
            embedded[rr * width + ccol] = Complex::new(kernel.get(r, c), 0.0);
        }
    }
    let fft = Fft2d::new(width, height);
    fft.forward(&mut embedded);
    Ok(Convolution {
        diagonal: FourierDiagonal {
            fft,
            spectrum: embedded,
        },
        kernel,
    })
}

impl LinearOperator for Convolution {
    fn input_dim(&self) -> usize {
        self.width() * self.height()
    }
    fn output_dim(&self) -> usize {
        self.input_dim()
    }
    fn kind(&self) -> OperatorKind {
        OperatorKind::Convolution
    }
    fn forward_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        self.diagonal.filter_into(v, out, |h| h)
    }
    fn adjoint_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        self.diagonal.filter_into(v, out, |h| h.conj())
    }
    fn fourier_diagonal(&self) -> Option<&FourierDiagonal> {
        Some(&self.diagonal)
    }
}
