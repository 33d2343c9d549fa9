//! Primal-dual scheme for `min_α F(Kα) + γΨ(α)` with `K = (HΦ; Φ)` and
//! `F(u₁, u₂) = f₁(u₁) + ι_C(u₂)`.
//!
//! Dual steps use the Moreau identity
//! `prox_{σF*}(v) = v − σ·prox_{F/σ}(v/σ)` channelwise; the primal step is a
//! penalty prox followed by extrapolation `ᾱ = 2α_{t+1} − α_t`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{run, suggest_steps, Clock, Solution, SolverTrace};
use crate::grid::ImageGrid;
use crate::linops::{check_len, LinearOperator};
use crate::objective::ProblemInstance;
use crate::prox::{project_nonneg_into, prox_penalty_into, prox_poisson_into};
use crate::vecops;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDualConfig {
    pub sigma: f64,
    pub tau: f64,
    /// Bound on `‖K‖²`; the solver also checks against the instance's own
    /// estimate and uses the larger.
    pub zeta: f64,
    pub n_iter: usize,
    pub early_stop: bool,
}

impl PrimalDualConfig {
    /// Suggested steps for the instance's `ζ = ‖Φ‖²(1 + ‖H‖²)`.
    pub fn for_instance(inst: &ProblemInstance, n_iter: usize) -> Self {
        let zeta = inst.norms().zeta;
        let (sigma, tau) = suggest_steps(zeta);
        Self {
            sigma,
            tau,
            zeta,
            n_iter,
            early_stop: false,
        }
    }

    /// Rejects `σ·τ·ζ ≥ 1`, suggesting a feasible pair.
    pub fn validate(&self, inst: &ProblemInstance) -> Result<()> {
        if !(self.sigma > 0.0 && self.tau > 0.0) || !(self.sigma * self.tau).is_finite() {
            return Err(Error::InvalidArgument(format!(
                "sigma = {} and tau = {} must be positive",
                self.sigma, self.tau
            )));
        }
        if self.n_iter == 0 {
            return Err(Error::InvalidArgument("n_iter must be positive".into()));
        }
        let zeta = self.zeta.max(inst.norms().zeta);
        let product = self.sigma * self.tau * zeta;
        if !(product < 1.0) {
            let (suggested_sigma, suggested_tau) = suggest_steps(zeta);
            return Err(Error::InvalidStepSizes {
                product,
                suggested_sigma,
                suggested_tau,
            });
        }
        Ok(())
    }
}

/// Primal and dual iterates `(α, ᾱ, ξ, η)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDualState {
    pub alpha: Vec<f64>,
    pub alpha_bar: Vec<f64>,
    /// Dual variable of the fidelity channel `HΦα`.
    pub xi: Vec<f64>,
    /// Dual variable of the positivity channel `Φα`.
    pub eta: Vec<f64>,
}

impl PrimalDualState {
    pub fn zeros(pixels: usize, atoms: usize) -> Self {
        Self {
            alpha: vec![0.0; atoms],
            alpha_bar: vec![0.0; atoms],
            xi: vec![0.0; pixels],
            eta: vec![0.0; pixels],
        }
    }
}

pub struct PrimalDualSolver<'a> {
    inst: &'a ProblemInstance,
    cfg: PrimalDualConfig,
    state: PrimalDualState,
    /// `‖α_{t+1} − α_t‖` of the last step.
    last_move: f64,
    t: usize,
}

impl<'a> PrimalDualSolver<'a> {
    pub fn new(inst: &'a ProblemInstance, cfg: PrimalDualConfig) -> Result<Self> {
        let state = PrimalDualState::zeros(inst.pixels(), inst.atoms());
        Self::with_state(inst, cfg, state)
    }

    /// Warm start from a given state.
    pub fn with_state(
        inst: &'a ProblemInstance,
        cfg: PrimalDualConfig,
        state: PrimalDualState,
    ) -> Result<Self> {
        cfg.validate(inst)?;
        check_len("PrimalDualState.alpha", inst.atoms(), state.alpha.len())?;
        check_len(
            "PrimalDualState.alpha_bar",
            inst.atoms(),
            state.alpha_bar.len(),
        )?;
        check_len("PrimalDualState.xi", inst.pixels(), state.xi.len())?;
        check_len("PrimalDualState.eta", inst.pixels(), state.eta.len())?;
        Ok(Self {
            inst,
            cfg,
            state,
            last_move: 0.0,
            t: 0,
        })
    }

    pub fn state(&self) -> &PrimalDualState {
        &self.state
    }

    pub fn iteration(&self) -> usize {
        self.t
    }

    pub fn last_move(&self) -> f64 {
        self.last_move
    }

    /// `x̂ = Φα`
    pub fn image(&self) -> Result<Vec<f64>> {
        self.inst.dictionary().apply(&self.state.alpha)
    }

    pub fn step(&mut self) -> Result<()> {
        let (sigma, tau) = (self.cfg.sigma, self.cfg.tau);
        let phi = self.inst.dictionary();
        let blur = self.inst.blur();
        let n = self.inst.pixels();
        let s = &mut self.state;

        let mut u = vec![0.0; n];
        phi.forward_into(&s.alpha_bar, &mut u)?;
        let mut hu = vec![0.0; n];
        blur.forward_into(&u, &mut hu)?;

        // ξ ← v − σ·prox_{f₁/σ}(v/σ), v = ξ + σHΦᾱ
        let mut v: Vec<f64> =
            s.xi.iter()
                .zip(&hu)
                .map(|(x, h)| (x + sigma * h) / sigma)
                .collect();
        let mut p = vec![0.0; n];
        prox_poisson_into(&v, 1.0 / sigma, self.inst.counts_f64(), &mut p);
        for ((xi, vi), pi) in s.xi.iter_mut().zip(&v).zip(&p) {
            *xi = sigma * (vi - pi);
        }
        // η ← v − σ·P_C(v/σ), v = η + σΦᾱ
        for (vi, (e, ui)) in v.iter_mut().zip(s.eta.iter().zip(&u)) {
            *vi = (e + sigma * ui) / sigma;
        }
        project_nonneg_into(&v, &mut p);
        for ((e, vi), pi) in s.eta.iter_mut().zip(&v).zip(&p) {
            *e = sigma * (vi - pi);
        }

        // α ← prox_{τγΨ}(α − τΦᵀ(H*ξ + η))
        let mut dual_image = vec![0.0; n];
        blur.adjoint_into(&s.xi, &mut dual_image)?;
        vecops::axpy(1.0, &s.eta, &mut dual_image);
        let mut grad = vec![0.0; self.inst.atoms()];
        phi.adjoint_into(&dual_image, &mut grad)?;
        for (g, a) in grad.iter_mut().zip(&s.alpha) {
            *g = a - tau * *g;
        }
        let mut next = vec![0.0; grad.len()];
        prox_penalty_into(
            &grad,
            tau * self.inst.gamma(),
            self.inst.penalty(),
            &mut next,
        )?;

        for ((bar, a), n) in s.alpha_bar.iter_mut().zip(&s.alpha).zip(&next) {
            *bar = 2.0 * n - a;
        }
        self.last_move = vecops::distance(&next, &s.alpha);
        s.alpha = next;

        self.t += 1;
        if !vecops::all_finite(&s.alpha)
            || !vecops::all_finite(&s.xi)
            || !vecops::all_finite(&s.eta)
        {
            return Err(Error::NonFinite { iteration: self.t });
        }
        Ok(())
    }
}

/// Runs the primal-dual scheme from the zero state; `x̂ = Φα` at the end.
pub fn solve_primal_dual(
    inst: &ProblemInstance,
    cfg: &PrimalDualConfig,
    x_true: Option<&ImageGrid>,
    clock: &dyn Clock,
) -> Result<(Solution, SolverTrace)> {
    let solver = core::cell::RefCell::new(PrimalDualSolver::new(inst, cfg.clone())?);
    run(
        inst,
        cfg.n_iter,
        cfg.early_stop,
        x_true,
        clock,
        || solver.borrow_mut().step(),
        || {
            let s = solver.borrow();
            Ok((s.state.alpha.clone(), s.image()?))
        },
    )
}
