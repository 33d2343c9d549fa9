//! Proximity operators and projectors.
//!
//! `prox_F(x) = argmin_u F(u) + ‖u − x‖²/2`. Everything here is separable or
//! a closed-form linear projector, so each call is a single pass over its
//! input.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::linops::{check_len, LinearOperator, TightFrame};
use crate::vecops;
use crate::{Error, Result};

/// `prox_{β f₁}` for the Poisson anti log-likelihood of `counts`.
///
/// Componentwise the positive root of `t² − (x − β)t − βy = 0`, evaluated
/// without cancellation for `x − β < 0`.
pub fn prox_poisson(x: &[f64], beta: f64, counts: &[f64]) -> Result<Vec<f64>> {
    check_len("prox_poisson", counts.len(), x.len())?;
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "beta = {beta} must be positive"
        )));
    }
    if let Some(i) = counts.iter().position(|&y| !(y >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "count {} at pixel {i} is negative",
            counts[i]
        )));
    }
    let mut out = vec![0.0; x.len()];
    prox_poisson_into(x, beta, counts, &mut out);
    Ok(out)
}

pub(crate) fn prox_poisson_into(x: &[f64], beta: f64, counts: &[f64], out: &mut [f64]) {
    for ((o, &xi), &y) in out.iter_mut().zip(x).zip(counts) {
        *o = poisson_scalar(xi, beta, y);
    }
}

#[inline]
fn poisson_scalar(x: f64, beta: f64, y: f64) -> f64 {
    let d = x - beta;
    let disc = libm::sqrt(d * d + 4.0 * beta * y);
    if d >= 0.0 {
        0.5 * (d + disc)
    } else if y == 0.0 {
        0.0
    } else {
        2.0 * beta * y / (disc - d)
    }
}

/// `sign(b)·max(|b| − δ, 0)` componentwise.
pub fn soft_threshold(b: &[f64], delta: f64) -> Result<Vec<f64>> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "threshold {delta} must be non-negative"
        )));
    }
    let mut out = vec![0.0; b.len()];
    soft_threshold_into(b, delta, &mut out);
    Ok(out)
}

pub(crate) fn soft_threshold_into(b: &[f64], delta: f64, out: &mut [f64]) {
    for (o, &v) in out.iter_mut().zip(b) {
        *o = soft_scalar(v, delta);
    }
}

#[inline]
fn soft_scalar(v: f64, delta: f64) -> f64 {
    if v > delta {
        v - delta
    } else if v < -delta {
        v + delta
    } else {
        0.0
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// An admissible penalty `ψ`: convex, even, non-decreasing on `ℝ⁺`,
/// `ψ(0) = 0`, with positive right derivative at zero.
#[derive(Clone)]
pub struct ScalarPenalty {
    value: ScalarFn,
    derivative: ScalarFn,
    right_derivative_at_zero: f64,
}

impl fmt::Debug for ScalarPenalty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarPenalty")
            .field("right_derivative_at_zero", &self.right_derivative_at_zero)
            .finish_non_exhaustive()
    }
}

impl ScalarPenalty {
    /// Validates admissibility on sampled points. `derivative` is `ψ′` on
    /// `(0, ∞)`.
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
        right_derivative_at_zero: f64,
    ) -> Result<Self> {
        if !(right_derivative_at_zero > 0.0) || !right_derivative_at_zero.is_finite() {
            return Err(Error::InvalidPenalty(format!(
                "right derivative at zero must be positive, got {right_derivative_at_zero}"
            )));
        }
        let psi = |t: f64| value(t);
        if psi(0.0).abs() > 1e-12 {
            return Err(Error::InvalidPenalty(format!(
                "psi(0) = {} is not zero",
                psi(0.0)
            )));
        }
        let samples: Vec<f64> = (-30..=30)
            .map(|k| libm::pow(10.0, k as f64 / 10.0))
            .collect();
        let mut prev = 0.0;
        for &t in &samples {
            let (p, m) = (psi(t), psi(-t));
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidPenalty(format!(
                    "psi({t}) = {p} is not non-negative"
                )));
            }
            if (p - m).abs() > 1e-9 * p.abs().max(1.0) {
                return Err(Error::InvalidPenalty(format!("psi is not even at {t}")));
            }
            if p + 1e-12 < prev {
                return Err(Error::InvalidPenalty(format!("psi decreases before {t}")));
            }
            prev = p;
        }
        for w in samples.windows(2) {
            for (a, b) in [(w[0], w[1]), (-w[0], w[1]), (-w[1], w[0])] {
                let mid = psi(0.5 * (a + b));
                if mid > 0.5 * (psi(a) + psi(b)) + 1e-9 * psi(a).abs().max(psi(b).abs()).max(1.0) {
                    return Err(Error::InvalidPenalty(format!(
                        "psi fails midpoint convexity on [{a}, {b}]"
                    )));
                }
            }
        }
        let h = 1e-7;
        let slope = psi(h) / h;
        if (slope - right_derivative_at_zero).abs() > 1e-4 * right_derivative_at_zero.max(1.0) {
            return Err(Error::InvalidPenalty(format!(
                "psi(h)/h = {slope} near zero disagrees with the stated right derivative {right_derivative_at_zero}"
            )));
        }
        Ok(Self {
            value: Arc::new(value),
            derivative: Arc::new(derivative),
            right_derivative_at_zero,
        })
    }

    pub fn value(&self, t: f64) -> f64 {
        (self.value)(t)
    }

    pub fn right_derivative_at_zero(&self) -> f64 {
        self.right_derivative_at_zero
    }

    /// Solves `a + δψ′(a) = |b|` on `(0, |b|]`, returns `sign(b)·a`, or 0 in
    /// the dead zone `|b| ≤ δψ′₊(0)`.
    fn prox_scalar(&self, b: f64, delta: f64, coordinate: usize) -> Result<f64> {
        const TOL: f64 = 1e-10;
        const MAX_ITERS: usize = 200;
        let target = b.abs();
        if target <= delta * self.right_derivative_at_zero {
            return Ok(0.0);
        }
        let dpsi = &self.derivative;
        let g = |a: f64| a + delta * dpsi(a) - target;
        let (mut lo, mut hi) = (0.0, target);
        let g_hi = g(hi);
        if !g_hi.is_finite() || g_hi < 0.0 {
            return Err(Error::RootFinding {
                coordinate,
                reason: "derivative is negative or non-finite at |b|",
            });
        }
        if g_hi == 0.0 {
            return Ok(b.signum() * hi);
        }
        let mut a = 0.5 * (lo + hi);
        for _ in 0..MAX_ITERS {
            let ga = g(a);
            if !ga.is_finite() {
                return Err(Error::RootFinding {
                    coordinate,
                    reason: "non-finite derivative",
                });
            }
            if ga > 0.0 {
                hi = a;
            } else {
                lo = a;
            }
            if hi - lo <= TOL * target.max(1.0) || ga == 0.0 {
                return Ok(b.signum() * a);
            }
            // Newton step on a finite-difference slope of g; bisect when it
            // leaves the bracket.
            let step = 1e-7 * a.max(1e-12);
            let slope = (g(a + step) - g((a - step).max(0.0))) / (a + step - (a - step).max(0.0));
            let newton = if slope > 0.0 {
                a - ga / slope
            } else {
                f64::NAN
            };
            let next = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if slope < -1e-9 {
                return Err(Error::RootFinding {
                    coordinate,
                    reason: "penalty derivative is not monotone",
                });
            }
            a = next;
        }
        Err(Error::RootFinding {
            coordinate,
            reason: "no convergence within 200 iterations",
        })
    }
}

#[derive(Debug, Clone)]
pub enum PenaltySpec {
    L1,
    Generic(ScalarPenalty),
}

impl PenaltySpec {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            PenaltySpec::L1 => t.abs(),
            PenaltySpec::Generic(p) => p.value(t),
        }
    }
}

/// `prox_{δΨ}` for the separable penalty `Ψ(α) = Σ ψ(α[i])`.
pub fn prox_penalty(b: &[f64], delta: f64, spec: &PenaltySpec) -> Result<Vec<f64>> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "delta = {delta} must be positive"
        )));
    }
    let mut out = vec![0.0; b.len()];
    prox_penalty_into(b, delta, spec, &mut out)?;
    Ok(out)
}

pub(crate) fn prox_penalty_into(
    b: &[f64],
    delta: f64,
    spec: &PenaltySpec,
    out: &mut [f64],
) -> Result<()> {
    match spec {
        PenaltySpec::L1 => soft_threshold_into(b, delta, out),
        PenaltySpec::Generic(p) => {
            for (i, (o, &v)) in out.iter_mut().zip(b).enumerate() {
                *o = p.prox_scalar(v, delta, i)?;
            }
        }
    }
    Ok(())
}

/// Projection onto the non-negative orthant.
pub fn project_nonneg(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| x.max(0.0)).collect()
}

pub(crate) fn project_nonneg_into(v: &[f64], out: &mut [f64]) {
    for (o, &x) in out.iter_mut().zip(v) {
        *o = x.max(0.0);
    }
}

/// A point `(x₁, x₂, α)` of the product space `ℋ × 𝒦 × ℋ'`: image block,
/// blurred-image block, coefficient block.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductPoint {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl ProductPoint {
    pub fn zeros(pixels: usize, blurred: usize, atoms: usize) -> Self {
        Self {
            x1: vec![0.0; pixels],
            x2: vec![0.0; blurred],
            alpha: vec![0.0; atoms],
        }
    }

    fn blocks(&self) -> [&[f64]; 3] {
        [&self.x1, &self.x2, &self.alpha]
    }

    fn blocks_mut(&mut self) -> [&mut Vec<f64>; 3] {
        [&mut self.x1, &mut self.x2, &mut self.alpha]
    }

    pub fn dot(&self, other: &ProductPoint) -> f64 {
        self.blocks()
            .iter()
            .zip(other.blocks())
            .map(|(a, b)| vecops::dot(a, b))
            .sum()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    pub fn distance(&self, other: &ProductPoint) -> f64 {
        let s: f64 = self
            .blocks()
            .iter()
            .zip(other.blocks())
            .map(|(a, b)| {
                let d = vecops::distance(a, b);
                d * d
            })
            .sum();
        libm::sqrt(s)
    }

    /// `self ← self + s·other`
    pub fn axpy(&mut self, s: f64, other: &ProductPoint) {
        for (a, b) in self.blocks_mut().into_iter().zip(other.blocks()) {
            vecops::axpy(s, b, a);
        }
    }

    pub fn scale(&mut self, s: f64) {
        for a in self.blocks_mut() {
            vecops::scale(s, a);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.blocks().iter().all(|b| vecops::all_finite(b))
    }

    fn check_dims(&self, pixels: usize, blurred: usize, atoms: usize) -> Result<()> {
        check_len("ProductPoint.x1", pixels, self.x1.len())?;
        check_len("ProductPoint.x2", blurred, self.x2.len())?;
        check_len("ProductPoint.alpha", atoms, self.alpha.len())
    }
}

/// Projection onto `ker L₁`, `L₁ = [I 0 −Φ]`, i.e. onto `{x₁ = Φα}`.
///
/// For a tight frame `(L₁L₁*)⁻¹ = (I + ΦΦᵀ)⁻¹ = I/(1 + c)`.
pub fn project_ker_l1(p: &ProductPoint, dict: &TightFrame) -> Result<ProductPoint> {
    p.check_dims(dict.pixels(), p.x2.len(), dict.atoms())?;
    let mut out = p.clone();
    project_ker_l1_in_place(&mut out, dict)?;
    Ok(out)
}

pub(crate) fn project_ker_l1_in_place(p: &mut ProductPoint, dict: &TightFrame) -> Result<()> {
    let c = dict.frame_constant();
    let mut w = dict.apply(&p.alpha)?;
    for (wi, &x) in w.iter_mut().zip(&p.x1) {
        *wi = (x - *wi) / (1.0 + c);
    }
    let phit_w = dict.adjoint_apply(&w)?;
    vecops::axpy(-1.0, &w, &mut p.x1);
    vecops::axpy(1.0, &phit_w, &mut p.alpha);
    Ok(())
}

/// Projection onto `ker L₂`, `L₂ = [−H I 0]`, i.e. onto `{x₂ = Hx₁}`.
///
/// `(I + HH*)⁻¹` is applied as division by `1 + |ĥ|²` in the Fourier domain,
/// so `blur` must carry its transfer function.
pub fn project_ker_l2(p: &ProductPoint, blur: &dyn LinearOperator) -> Result<ProductPoint> {
    p.check_dims(blur.input_dim(), blur.output_dim(), p.alpha.len())?;
    let mut out = p.clone();
    project_ker_l2_in_place(&mut out, blur)?;
    Ok(out)
}

pub(crate) fn project_ker_l2_in_place(
    p: &mut ProductPoint,
    blur: &dyn LinearOperator,
) -> Result<()> {
    let diag = blur
        .fourier_diagonal()
        .ok_or(Error::MissingTransferFunction)?;
    let mut r = blur.apply(&p.x1)?;
    for (ri, &x2) in r.iter_mut().zip(&p.x2) {
        *ri = x2 - *ri;
    }
    let mut w = vec![0.0; r.len()];
    diag.filter_into(&r, &mut w, |h| {
        crate::fft::Complex::new(1.0 / (1.0 + h.norm_sqr()), 0.0)
    })?;
    let ht_w = blur.adjoint_apply(&w)?;
    vecops::axpy(1.0, &ht_w, &mut p.x1);
    vecops::axpy(-1.0, &w, &mut p.x2);
    Ok(())
}
