use alloc::format;
use alloc::vec;

use super::LinearOperator;
use crate::rng::SplitMix64;
use crate::vecops::{norm, scale};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl NormEstimate {
    /// The estimate inflated by `(1 + tol)`, safe for step-size bounds.
    pub fn inflated(&self, tol: f64) -> f64 {
        self.value * (1.0 + tol)
    }
}

/// Power iteration on `AᵀA`.
///
/// Stops once the relative change of the estimate falls below `tol / 10`,
/// which keeps the final error within `tol` for the spectral gaps seen in
/// blur and frame operators. The estimate approaches `‖A‖` from below.
pub fn estimate_spectral_norm(
    op: &dyn LinearOperator,
    tol: f64,
    max_iters: usize,
) -> Result<NormEstimate> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tol} must be positive"
        )));
    }
    let mut v = vec![0.0; op.input_dim()];
    SplitMix64::new(0x5eed).fill_signed(&mut v);
    let mut av = vec![0.0; op.output_dim()];
    let mut w = vec![0.0; op.input_dim()];
    let n0 = norm(&v);
    scale(1.0 / n0, &mut v);

    let mut estimate = 0.0;
    for it in 1..=max_iters.max(1) {
        op.forward_into(&v, &mut av)?;
        op.adjoint_into(&av, &mut w)?;
        // ‖Av‖ for unit v is a lower bound on ‖A‖.
        let next = norm(&av);
        let wn = norm(&w);
        if wn == 0.0 {
            return Ok(NormEstimate {
                value: 0.0,
                iterations: it,
                converged: true,
            });
        }
        core::mem::swap(&mut v, &mut w);
        scale(1.0 / wn, &mut v);
        let change = (next - estimate).abs() / next;
        estimate = next;
        if change < tol / 10.0 {
            return Ok(NormEstimate {
                value: estimate,
                iterations: it,
                converged: true,
            });
        }
    }
    Ok(NormEstimate {
        value: estimate,
        iterations: max_iters,
        converged: false,
    })
}
