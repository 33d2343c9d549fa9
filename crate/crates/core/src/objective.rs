//! Poisson fidelity, sparsity penalty, the full objective `J` and the image
//! error metric.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{CountMap, ImageGrid};
use crate::linops::{check_len, estimate_spectral_norm, LinearOperator, TightFrame};
use crate::prox::PenaltySpec;
use crate::vecops;
use crate::{Error, Result};

/// Negative entries of `Φα` down to this value count as zero.
pub const POSITIVITY_SLOP: f64 = 1e-12;

/// Tolerance used for the power-method norm estimates of `H` and `Φ`.
pub const NORM_TOL: f64 = 1e-6;
const NORM_MAX_ITERS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Infeasibility {
    /// `Φα` has a negative pixel.
    NegativePixel,
    /// The fidelity argument is negative.
    NegativeIntensity,
    /// Zero intensity where a positive count was observed.
    ZeroIntensityWithPositiveCount,
    /// Read back from a serialized trace, where the reason is not stored.
    Unrecorded,
}

/// A value in `(−∞, +∞]`; infinite values carry the reason.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite(Infeasibility),
}

impl ExtendedReal {
    pub fn value(self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::Infinite(_) => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::Infinite(_) => None,
        }
    }

    fn add(self, other: f64) -> Self {
        match self {
            ExtendedReal::Finite(v) => ExtendedReal::Finite(v + other),
            inf => inf,
        }
    }
}

/// `f₁(η) = Σ f_poisson(η[i])` for the counts `y`.
pub fn eval_fidelity(eta: &[f64], y: &[f64]) -> Result<ExtendedReal> {
    check_len("eval_fidelity", y.len(), eta.len())?;
    let mut total = 0.0;
    for (&e, &c) in eta.iter().zip(y) {
        if c > 0.0 {
            if e > 0.0 {
                total += e - c * libm::log(e);
            } else if e == 0.0 {
                return Ok(ExtendedReal::Infinite(
                    Infeasibility::ZeroIntensityWithPositiveCount,
                ));
            } else {
                return Ok(ExtendedReal::Infinite(Infeasibility::NegativeIntensity));
            }
        } else if e >= 0.0 {
            total += e;
        } else {
            return Ok(ExtendedReal::Infinite(Infeasibility::NegativeIntensity));
        }
    }
    Ok(ExtendedReal::Finite(total))
}

/// `Ψ(α) = Σ ψ(α[i])`
pub fn eval_penalty(alpha: &[f64], spec: &PenaltySpec) -> f64 {
    match spec {
        PenaltySpec::L1 => alpha.iter().map(|a| a.abs()).sum(),
        other => alpha.iter().map(|&a| other.value(a)).sum(),
    }
}

/// Mean absolute pixel error.
pub fn mae(x_hat: &ImageGrid, x_true: &ImageGrid) -> Result<f64> {
    if x_hat.shape() != x_true.shape() {
        return Err(Error::InvalidArgument(format!(
            "MAE shapes differ: {:?} vs {:?}",
            x_hat.shape(),
            x_true.shape()
        )));
    }
    Ok(mae_slices(x_hat.pixels(), x_true.pixels()))
}

pub(crate) fn mae_slices(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).sum::<f64>() / a.len() as f64
}

/// Norm bounds entering the primal-dual step rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorNorms {
    /// `‖H‖`, inflated by `(1 + NORM_TOL)`.
    pub blur: f64,
    /// `‖Φ‖`, inflated by `(1 + NORM_TOL)`.
    pub dictionary: f64,
    /// `ζ = ‖Φ‖²(1 + ‖H‖²)`
    pub zeta: f64,
}

/// Objective terms at an iterate whose image `Φα` has been made feasible.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateReport {
    pub objective: ExtendedReal,
    pub fidelity: ExtendedReal,
    pub penalty: f64,
    /// `‖Φα − P_C(Φα)‖₂`
    pub positivity_violation: f64,
}

/// One instance of `min_α f₁(HΦα) + γΨ(α) + ι_C(Φα)`.
pub struct ProblemInstance {
    counts: CountMap,
    counts_f64: Vec<f64>,
    blur: Box<dyn LinearOperator>,
    dictionary: TightFrame,
    gamma: f64,
    penalty: PenaltySpec,
    norms: OperatorNorms,
}

impl ProblemInstance {
    /// Validates dimensions and `γ > 0`, estimates operator norms, and checks
    /// that `α = Φᵀ1` has a finite objective.
    pub fn new(
        counts: CountMap,
        blur: Box<dyn LinearOperator>,
        dictionary: TightFrame,
        gamma: f64,
        penalty: PenaltySpec,
    ) -> Result<Self> {
        let n = counts.len();
        check_len("ProblemInstance blur input", n, blur.input_dim())?;
        check_len("ProblemInstance blur output", n, blur.output_dim())?;
        check_len("ProblemInstance dictionary output", n, dictionary.pixels())?;
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "regularization parameter gamma = {gamma} must be positive"
            )));
        }
        let blur_norm = estimate_spectral_norm(blur.as_ref(), NORM_TOL, NORM_MAX_ITERS)?;
        let dict_norm = estimate_spectral_norm(&dictionary, NORM_TOL, NORM_MAX_ITERS)?;
        let (hn, pn) = (blur_norm.inflated(NORM_TOL), dict_norm.inflated(NORM_TOL));
        let norms = OperatorNorms {
            blur: hn,
            dictionary: pn,
            zeta: pn * pn * (1.0 + hn * hn),
        };
        let inst = Self {
            counts_f64: counts.to_f64(),
            counts,
            blur,
            dictionary,
            gamma,
            penalty,
            norms,
        };
        let witness = inst.dictionary.adjoint_apply(&vec![1.0; n])?;
        if !inst.eval_objective(&witness)?.is_finite() {
            return Err(Error::Infeasible(
                "H maps the positive constant image outside the fidelity domain".into(),
            ));
        }
        Ok(inst)
    }

    pub fn counts(&self) -> &CountMap {
        &self.counts
    }

    pub fn counts_f64(&self) -> &[f64] {
        &self.counts_f64
    }

    pub fn blur(&self) -> &dyn LinearOperator {
        self.blur.as_ref()
    }

    pub fn dictionary(&self) -> &TightFrame {
        &self.dictionary
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn penalty(&self) -> &PenaltySpec {
        &self.penalty
    }

    pub fn norms(&self) -> OperatorNorms {
        self.norms
    }

    pub fn pixels(&self) -> usize {
        self.counts.len()
    }

    pub fn atoms(&self) -> usize {
        self.dictionary.atoms()
    }

    pub fn image_shape(&self) -> (usize, usize) {
        self.counts.shape()
    }

    /// `J(α) = f₁(HΦα) + γΨ(α) + ι_C(Φα)`
    pub fn eval_objective(&self, alpha: &[f64]) -> Result<ExtendedReal> {
        check_len("eval_objective", self.atoms(), alpha.len())?;
        let mut x = self.dictionary.apply(alpha)?;
        if x.iter().any(|&v| v < -POSITIVITY_SLOP) {
            return Ok(ExtendedReal::Infinite(Infeasibility::NegativePixel));
        }
        x.iter_mut().for_each(|v| *v = v.max(0.0));
        let eta = self.blur.apply(&x)?;
        Ok(eval_fidelity(&eta, &self.counts_f64)?
            .add(self.gamma * eval_penalty(alpha, &self.penalty)))
    }

    /// Objective terms at `α + Φᵀ(P_C(Φα) − Φα)/c`, the tight-frame
    /// correction whose image is exactly `P_C(Φα)`.
    ///
    /// `eval_objective` of a raw solver iterate is `+∞` whenever any pixel of
    /// `Φα` is slightly negative, which is the norm before convergence; the
    /// correction keeps traces informative while `positivity_violation`
    /// records how far the raw iterate was from feasible.
    pub fn evaluate_iterate(&self, alpha: &[f64]) -> Result<IterateReport> {
        check_len("evaluate_iterate", self.atoms(), alpha.len())?;
        let x = self.dictionary.apply(alpha)?;
        let mut correction: Vec<f64> = x.iter().map(|&v| (-v).max(0.0)).collect();
        let positivity_violation = vecops::norm(&correction);
        let projected: Vec<f64> = x.iter().map(|&v| v.max(0.0)).collect();
        let penalty = if positivity_violation > 0.0 {
            vecops::scale(1.0 / self.dictionary.frame_constant(), &mut correction);
            let mut corrected = self.dictionary.adjoint_apply(&correction)?;
            vecops::axpy(1.0, alpha, &mut corrected);
            eval_penalty(&corrected, &self.penalty)
        } else {
            eval_penalty(alpha, &self.penalty)
        };
        let eta = self.blur.apply(&projected)?;
        let fidelity = eval_fidelity(&eta, &self.counts_f64)?;
        Ok(IterateReport {
            objective: fidelity.add(self.gamma * penalty),
            fidelity,
            penalty,
            positivity_violation,
        })
    }
}
