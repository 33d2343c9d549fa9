//! Linear operators: periodic convolution `H`, tight-frame synthesis `Φ`,
//! and the generic compositions needed by the solvers.
//!
//! Every operator is immutable after construction. `forward_into` and
//! `adjoint_into` write into caller-provided buffers, so a single handle can be
//! shared between threads.

mod convolution;
mod haar;
mod norm;

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

pub use convolution::{make_convolution, Convolution, FourierDiagonal};
pub use haar::{make_dictionary, FrameKind, HaarFrame, TightFrame, TightFrameDescriptor};
pub use norm::{estimate_spectral_norm, NormEstimate};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Convolution,
    DictionarySynthesis,
    Composition,
    BlockStack,
    Identity,
}

pub trait LinearOperator: Send + Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn kind(&self) -> OperatorKind;

    /// `out ← A v`. Buffer lengths are the caller's responsibility.
    fn forward_into(&self, v: &[f64], out: &mut [f64]) -> Result<()>;

    /// `out ← Aᵀ v`.
    fn adjoint_into(&self, v: &[f64], out: &mut [f64]) -> Result<()>;

    /// Frequency-domain diagonalization, when the operator is a periodic
    /// convolution.
    fn fourier_diagonal(&self) -> Option<&FourierDiagonal> {
        None
    }

    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("apply", self.input_dim(), v.len())?;
        let mut out = vec![0.0; self.output_dim()];
        self.forward_into(v, &mut out)?;
        Ok(out)
    }

    fn adjoint_apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("adjoint_apply", self.output_dim(), v.len())?;
        let mut out = vec![0.0; self.input_dim()];
        self.adjoint_into(v, &mut out)?;
        Ok(out)
    }
}

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for Box<T> {
    fn input_dim(&self) -> usize {
        (**self).input_dim()
    }
    fn output_dim(&self) -> usize {
        (**self).output_dim()
    }
    fn kind(&self) -> OperatorKind {
        (**self).kind()
    }
    fn forward_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        (**self).forward_into(v, out)
    }
    fn adjoint_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        (**self).adjoint_into(v, out)
    }
    fn fourier_diagonal(&self) -> Option<&FourierDiagonal> {
        (**self).fourier_diagonal()
    }
}

/// `v ↦ s·v` on `ℝⁿ`; `s = 1` is the identity.
#[derive(Debug, Clone)]
pub struct Identity {
    dim: usize,
    scale: f64,
}

impl Identity {
    pub fn new(dim: usize) -> Self {
        Self { dim, scale: 1.0 }
    }

    pub fn scaled(dim: usize, scale: f64) -> Self {
        Self { dim, scale }
    }
}

impl LinearOperator for Identity {
    fn input_dim(&self) -> usize {
        self.dim
    }
    fn output_dim(&self) -> usize {
        self.dim
    }
    fn kind(&self) -> OperatorKind {
        OperatorKind::Identity
    }
    fn forward_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        for (o, x) in out.iter_mut().zip(v) {
            *o = self.scale * x;
        }
        Ok(())
    }
    fn adjoint_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        self.forward_into(v, out)
    }
}

/// `outer ∘ inner`
pub struct Composition<'a> {
    outer: &'a dyn LinearOperator,
    inner: &'a dyn LinearOperator,
}

impl<'a> Composition<'a> {
    pub fn new(outer: &'a dyn LinearOperator, inner: &'a dyn LinearOperator) -> Result<Self> {
        check_len("Composition::new", outer.input_dim(), inner.output_dim())?;
        Ok(Self { outer, inner })
    }
}

impl LinearOperator for Composition<'_> {
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }
    fn output_dim(&self) -> usize {
        self.outer.output_dim()
    }
    fn kind(&self) -> OperatorKind {
        OperatorKind::Composition
    }
    fn forward_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        let mut mid = vec![0.0; self.inner.output_dim()];
        self.inner.forward_into(v, &mut mid)?;
        self.outer.forward_into(&mid, out)
    }
    fn adjoint_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        let mut mid = vec![0.0; self.outer.input_dim()];
        self.outer.adjoint_into(v, &mut mid)?;
        self.inner.adjoint_into(&mid, out)
    }
}

/// Vertical stack `(A₁; A₂; …)` of operators sharing an input space.
pub struct BlockStack<'a> {
    blocks: Vec<&'a dyn LinearOperator>,
}

impl<'a> BlockStack<'a> {
    pub fn new(blocks: Vec<&'a dyn LinearOperator>) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty block stack".into()))?;
        for b in &blocks {
            check_len("BlockStack::new", first.input_dim(), b.input_dim())?;
        }
        Ok(Self { blocks })
    }
}

impl LinearOperator for BlockStack<'_> {
    fn input_dim(&self) -> usize {
        self.blocks[0].input_dim()
    }
    fn output_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.output_dim()).sum()
    }
    fn kind(&self) -> OperatorKind {
        OperatorKind::BlockStack
    }
    fn forward_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        let mut offset = 0;
        for b in &self.blocks {
            let m = b.output_dim();
            b.forward_into(v, &mut out[offset..offset + m])?;
            offset += m;
        }
        Ok(())
    }
    fn adjoint_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut part = vec![0.0; self.input_dim()];
        let mut offset = 0;
        for b in &self.blocks {
            let m = b.output_dim();
            b.adjoint_into(&v[offset..offset + m], &mut part)?;
            crate::vecops::axpy(1.0, &part, out);
            offset += m;
        }
        Ok(())
    }
}
