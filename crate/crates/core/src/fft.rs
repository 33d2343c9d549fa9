//! Minimal complex FFT used to diagonalize periodic convolutions.
//!
//! Power-of-two lengths use an iterative radix-2 transform; other lengths fall
//! back to a direct DFT with precomputed twiddles, which is adequate for the
//! small PSF-sized grids this crate targets.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };

    pub const fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im)
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn abs(self) -> f64 {
        libm::hypot(self.re, self.im)
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.re * s, self.im * s)
    }

    /// `e^{iθ}`
    pub fn cis(theta: f64) -> Self {
        Self::new(libm::cos(theta), libm::sin(theta))
    }
}

impl Add for Complex {
    type Output = Complex;
    fn add(self, o: Complex) -> Complex {
        Complex::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Complex {
    type Output = Complex;
    fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Complex {
    type Output = Complex;
    fn mul(self, o: Complex) -> Complex {
        Complex::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

/// Precomputed plan for length-`n` transforms.
#[derive(Debug, Clone)]
pub struct Fft1d {
    n: usize,
    /// `e^{-2πik/n}` for `k < n`.
    twiddles: Vec<Complex>,
    bitrev: Option<Vec<usize>>,
}

impl Fft1d {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "FFT length must be positive");
        let twiddles = (0..n)
            .map(|k| Complex::cis(-2.0 * PI * k as f64 / n as f64))
            .collect();
        let bitrev = n.is_power_of_two().then(|| {
            let bits = n.trailing_zeros();
            (0..n)
                .map(|i| {
                    if bits == 0 {
                        0
                    } else {
                        i.reverse_bits() >> (usize::BITS - bits)
                    }
                })
                .collect()
        });
        Self {
            n,
            twiddles,
            bitrev,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unnormalized transform in place. `inverse` uses `e^{+2πik/n}`.
    pub fn process(&self, buf: &mut [Complex], scratch: &mut Vec<Complex>, inverse: bool) {
        debug_assert_eq!(buf.len(), self.n);
        match &self.bitrev {
            Some(rev) => self.radix2(buf, rev, inverse),
            None => self.direct(buf, scratch, inverse),
        }
    }

    fn twiddle(&self, k: usize, inverse: bool) -> Complex {
        let w = self.twiddles[k];
        if inverse {
            w.conj()
        } else {
            w
        }
    }

    fn radix2(&self, buf: &mut [Complex], rev: &[usize], inverse: bool) {
        let n = self.n;
        for (i, &j) in rev.iter().enumerate().take(n) {
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let w = self.twiddle(k * stride, inverse);
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }

    fn direct(&self, buf: &mut [Complex], scratch: &mut Vec<Complex>, inverse: bool) {
        let n = self.n;
        scratch.clear();
        scratch.extend_from_slice(buf);
        for (k, out) in buf.iter_mut().enumerate() {
            let mut acc = Complex::ZERO;
            for (j, &x) in scratch.iter().enumerate() {
                acc = acc + x * self.twiddle((j * k) % n, inverse);
            }
            *out = acc;
        }
    }
}

/// Separable 2-D transform over a row-major `width × height` grid.
#[derive(Debug, Clone)]
pub struct Fft2d {
    width: usize,
    height: usize,
    rows: Fft1d,
    cols: Fft1d,
}

impl Fft2d {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            rows: Fft1d::new(width),
            cols: Fft1d::new(height),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn forward(&self, data: &mut [Complex]) {
        self.transform(data, false);
    }

    /// Inverse transform including the `1/(width·height)` normalization.
    pub fn inverse(&self, data: &mut [Complex]) {
        self.transform(data, true);
        let s = 1.0 / (self.width * self.height) as f64;
        for v in data.iter_mut() {
            *v = v.scale(s);
        }
    }

    fn transform(&self, data: &mut [Complex], inverse: bool) {
        assert_eq!(data.len(), self.width * self.height);
        let mut scratch = Vec::new();
        for row in data.chunks_exact_mut(self.width) {
            self.rows.process(row, &mut scratch, inverse);
        }
        let mut column = vec![Complex::ZERO; self.height];
        for c in 0..self.width {
            for r in 0..self.height {
                column[r] = data[r * self.width + c];
            }
            self.cols.process(&mut column, &mut scratch, inverse);
            for r in 0..self.height {
                data[r * self.width + c] = column[r];
            }
        }
    }
}
