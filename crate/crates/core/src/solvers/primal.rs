//! Proximal averaging over three copies of the product point `(x₁, x₂, α)`.
//!
//! Copy 1 carries `G(x₁, x₂, α) = ι_C(x₁) + f₁(x₂) + γΨ(α)`, copy 2 the
//! constraint `x₁ = Φα` and copy 3 the constraint `x₂ = Hx₁`.

use alloc::format;
use alloc::vec::Vec;

use super::{run, Clock, Solution, SolverTrace};
use crate::grid::ImageGrid;
use crate::linops::LinearOperator;
use crate::objective::ProblemInstance;
use crate::prox::{
    project_ker_l1_in_place, project_ker_l2_in_place, project_nonneg_into, prox_penalty_into,
    prox_poisson_into, ProductPoint,
};
use crate::vecops;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Relaxation {
    Constant(f64),
    /// `θ_t` for `t = 0, 1, …`; the last entry repeats.
    Schedule(Vec<f64>),
}

impl Relaxation {
    pub fn at(&self, t: usize) -> f64 {
        match self {
            Relaxation::Constant(theta) => *theta,
            Relaxation::Schedule(s) => s[t.min(s.len() - 1)],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimalConfig {
    /// Proximal scale `μ`; copy 1 uses `prox_{μ·/3}`.
    pub mu: f64,
    pub relaxation: Relaxation,
    /// Every `θ_t` must lie in `[θ_min, 2 − θ_min]`, which keeps
    /// `Σ θ_t(2 − θ_t)` divergent.
    pub theta_min: f64,
    pub n_iter: usize,
    pub early_stop: bool,
}

impl Default for PrimalConfig {
    fn default() -> Self {
        Self {
            mu: 1.0,
            relaxation: Relaxation::Constant(1.8),
            theta_min: 1e-3,
            n_iter: 500,
            early_stop: false,
        }
    }
}

impl PrimalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "mu = {} must be positive",
                self.mu
            )));
        }
        if self.n_iter == 0 {
            return Err(Error::InvalidArgument("n_iter must be positive".into()));
        }
        if !(self.theta_min > 0.0 && self.theta_min <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "theta_min = {} must lie in ]0, 1]",
                self.theta_min
            )));
        }
        let check = |iteration: usize, theta: f64| {
            if theta >= self.theta_min && theta <= 2.0 - self.theta_min {
                Ok(())
            } else {
                Err(Error::InvalidRelaxation { iteration, theta })
            }
        };
        match &self.relaxation {
            Relaxation::Constant(theta) => check(0, *theta),
            Relaxation::Schedule(s) if s.is_empty() => {
                Err(Error::InvalidArgument("empty relaxation schedule".into()))
            }
            Relaxation::Schedule(s) => s.iter().enumerate().try_for_each(|(i, &t)| check(i, t)),
        }
    }
}

/// Stepwise state of the primal scheme.
pub struct PrimalSolver<'a> {
    inst: &'a ProblemInstance,
    cfg: PrimalConfig,
    counts: &'a [f64],
    copies: [ProductPoint; 3],
    proxes: [ProductPoint; 3],
    z: ProductPoint,
    t: usize,
}

impl<'a> PrimalSolver<'a> {
    /// Starts from all-zero copies and `z₀ = 0`.
    pub fn new(inst: &'a ProblemInstance, cfg: PrimalConfig) -> Result<Self> {
        cfg.validate()?;
        if inst.blur().fourier_diagonal().is_none() {
            return Err(Error::MissingTransferFunction);
        }
        let zero = ProductPoint::zeros(inst.pixels(), inst.pixels(), inst.atoms());
        Ok(Self {
            inst,
            cfg,
            counts: inst.counts_f64(),
            copies: [zero.clone(), zero.clone(), zero.clone()],
            proxes: [zero.clone(), zero.clone(), zero.clone()],
            z: zero,
            t: 0,
        })
    }

    pub fn iteration(&self) -> usize {
        self.t
    }

    /// Current estimate `z_t`.
    pub fn estimate(&self) -> &ProductPoint {
        &self.z
    }

    pub fn copies(&self) -> &[ProductPoint; 3] {
        &self.copies
    }

    /// `ξ_(t,i)` from the last step.
    pub fn prox_points(&self) -> &[ProductPoint; 3] {
        &self.proxes
    }

    /// `‖ξ₁ − ξ₂‖ + ‖ξ₂ − ξ₃‖` for the last step's proximal points.
    pub fn consensus_gap(&self) -> f64 {
        self.proxes[0].distance(&self.proxes[1]) + self.proxes[1].distance(&self.proxes[2])
    }

    /// `(‖x₁ − Φα‖, ‖x₂ − Hx₁‖)` at `z_t`.
    pub fn constraint_residuals(&self) -> Result<(f64, f64)> {
        let phi_a = self.inst.dictionary().apply(&self.z.alpha)?;
        let h_x1 = self.inst.blur().apply(&self.z.x1)?;
        Ok((
            vecops::distance(&self.z.x1, &phi_a),
            vecops::distance(&self.z.x2, &h_x1),
        ))
    }

    pub fn step(&mut self) -> Result<()> {
        let scale = self.cfg.mu / 3.0;
        let theta = self.cfg.relaxation.at(self.t);
        let [p1, p2, p3] = &self.copies;
        let [xi1, xi2, xi3] = &mut self.proxes;

        project_nonneg_into(&p1.x1, &mut xi1.x1);
        prox_poisson_into(&p1.x2, scale, self.counts, &mut xi1.x2);
        prox_penalty_into(
            &p1.alpha,
            scale * self.inst.gamma(),
            self.inst.penalty(),
            &mut xi1.alpha,
        )?;
        xi2.clone_from(p2);
        project_ker_l1_in_place(xi2, self.inst.dictionary())?;
        xi3.clone_from(p3);
        project_ker_l2_in_place(xi3, self.inst.blur())?;

        let mut mean = xi1.clone();
        mean.axpy(1.0, xi2);
        mean.axpy(1.0, xi3);
        mean.scale(1.0 / 3.0);

        // p_i ← p_i + θ(2ξ − z − ξ_i)
        let mut shift = mean.clone();
        shift.scale(2.0);
        shift.axpy(-1.0, &self.z);
        for (p, xi) in self.copies.iter_mut().zip(&self.proxes) {
            p.axpy(theta, &shift);
            p.axpy(-theta, xi);
        }
        // z ← z + θ(ξ − z)
        self.z.scale(1.0 - theta);
        self.z.axpy(theta, &mean);

        self.t += 1;
        if !self.z.is_finite() || !self.copies.iter().all(ProductPoint::is_finite) {
            return Err(Error::NonFinite { iteration: self.t });
        }
        Ok(())
    }
}

/// Runs the primal scheme for `cfg.n_iter` iterations.
///
/// The reconstruction is the `x₁` block of `z`, `α̂` its `α` block.
pub fn solve_primal(
    inst: &ProblemInstance,
    cfg: &PrimalConfig,
    x_true: Option<&ImageGrid>,
    clock: &dyn Clock,
) -> Result<(Solution, SolverTrace)> {
    let solver = core::cell::RefCell::new(PrimalSolver::new(inst, cfg.clone())?);
    run(
        inst,
        cfg.n_iter,
        cfg.early_stop,
        x_true,
        clock,
        || solver.borrow_mut().step(),
        || {
            let s = solver.borrow();
            Ok((s.z.alpha.clone(), s.z.x1.clone()))
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CountMap;
    use crate::linops::{make_convolution, Identity, TightFrame};
    use crate::prox::PenaltySpec;
    use crate::solvers::NoClock;
    use alloc::boxed::Box;
    use alloc::vec;

    fn decoupled(counts: Vec<u64>, gamma: f64) -> ProblemInstance {
        let n = counts.len();
        ProblemInstance::new(
            CountMap::new(n, 1, counts).unwrap(),
            Box::new(make_convolution(&ImageGrid::filled(1, 1, 1.0).unwrap(), n, 1).unwrap()),
            TightFrame::identity(n),
            gamma,
            PenaltySpec::L1,
        )
        .unwrap()
    }

    #[test]
    fn relaxation_outside_open_interval_rejected() {
        for theta in [0.0, 2.0, -0.5, 2.5] {
            let cfg = PrimalConfig {
                relaxation: Relaxation::Constant(theta),
                ..Default::default()
            };
            assert!(matches!(
                cfg.validate(),
                Err(Error::InvalidRelaxation { .. })
            ));
        }
        let cfg = PrimalConfig {
            relaxation: Relaxation::Schedule(vec![1.0, 1.5, 1.9999]),
            ..Default::default()
        };
        assert!(matches!(
            cfg.validate(),
            Err(Error::InvalidRelaxation { iteration: 2, .. })
        ));
        assert!(PrimalConfig::default().validate().is_ok());
    }

    #[test]
    fn zero_start_is_infinite_then_finite() {
        let inst = decoupled(vec![4, 0, 7, 2], 0.1);
        let cfg = PrimalConfig {
            n_iter: 20,
            ..Default::default()
        };
        let (sol, trace) = solve_primal(&inst, &cfg, None, &NoClock).unwrap();
        assert_eq!(trace.len(), 21);
        assert!(!trace.records[0].objective.is_finite());
        assert!(trace.records[1..].iter().any(|r| r.objective.is_finite()));
        assert!(sol.final_objective.is_finite());
    }

    #[test]
    fn requires_fourier_diagonal_blur() {
        let inst = ProblemInstance::new(
            CountMap::new(3, 1, vec![1, 2, 3]).unwrap(),
            Box::new(Identity::new(3)),
            TightFrame::identity(3),
            0.1,
            PenaltySpec::L1,
        )
        .unwrap();
        assert!(matches!(
            PrimalSolver::new(&inst, PrimalConfig::default()),
            Err(Error::MissingTransferFunction)
        ));
    }
}
