//! Proximal splitting solvers for linear inverse problems under Poisson noise
//! with a sparsity prior in a tight frame.
//!
//! The problem solved is
//!
//! ```text
//! minimize_α  f₁(HΦα) + γ Ψ(α) + ι_C(Φα)
//! ```
//!
//! where `f₁` is the Poisson anti log-likelihood of the observed counts, `H` a
//! periodic convolution, `Φ` a tight-frame synthesis operator, `Ψ` a separable
//! sparsity penalty and `C` the non-negative orthant.
//!
//! Two solvers are provided:
//! - [`solvers::solve_primal`]: proximal averaging over three copies of the
//!   product point `(x₁, x₂, α)` with `x₁ = Φα` and `x₂ = Hx₁` enforced through
//!   kernel projectors.
//! - [`solvers::solve_primal_dual`]: a primal-dual scheme that only needs
//!   forward and adjoint applications of `H` and `Φ`.
//!
//! The crate is `no_std` and only needs `alloc`. Wall-clock timing is
//! injected through [`solvers::Clock`].

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod fft;
pub mod grid;
pub mod linops;
pub mod objective;
pub mod prox;
pub mod rng;
pub mod solvers;
pub mod vecops;

pub use error::{Error, Result};
pub use grid::{CoeffVector, CountMap, ImageGrid};
pub use linops::{
    estimate_spectral_norm, make_convolution, make_dictionary, Convolution, FrameKind,
    LinearOperator, NormEstimate, OperatorKind, TightFrame, TightFrameDescriptor,
};
pub use objective::{ExtendedReal, Infeasibility, ProblemInstance};
pub use prox::{PenaltySpec, ProductPoint, ScalarPenalty};
