//! The two splitting schemes, their parameter rules, and iteration traces.

mod primal;
mod primal_dual;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

pub use primal::{solve_primal, PrimalConfig, PrimalSolver, Relaxation};
pub use primal_dual::{solve_primal_dual, PrimalDualConfig, PrimalDualSolver, PrimalDualState};

use crate::grid::{CoeffVector, ImageGrid};
use crate::objective::{mae_slices, ExtendedReal, ProblemInstance};
use crate::{Error, Result};

/// Early stop when the objective moved less than this, relatively, over
/// [`EARLY_STOP_WINDOW`] iterations.
pub const EARLY_STOP_RTOL: f64 = 1e-10;
pub const EARLY_STOP_WINDOW: usize = 50;

/// Source of elapsed seconds for traces.
pub trait Clock {
    fn elapsed_s(&self) -> f64;
}

/// Reports zero elapsed time; for `no_std` callers and deterministic tests.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed_s(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub objective: ExtendedReal,
    pub fidelity: ExtendedReal,
    pub penalty: f64,
    pub pos_violation: f64,
    pub mae: Option<f64>,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverTrace {
    pub records: Vec<TraceRecord>,
}

impl SolverTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn get(&self, iter: usize) -> Option<&TraceRecord> {
        self.records.iter().find(|r| r.iter == iter)
    }

    /// Smallest finite objective in the trace.
    pub fn best_objective(&self) -> Option<f64> {
        self.records
            .iter()
            .filter_map(|r| r.objective.finite())
            .reduce(f64::min)
    }

    /// First record whose objective is within `rel·|J_final|` of the final one.
    pub fn first_within(&self, rel: f64) -> Option<&TraceRecord> {
        let target = self.last()?.objective.finite()?;
        self.records.iter().find(|r| match r.objective.finite() {
            Some(j) => (j - target).abs() <= rel * target.abs(),
            None => false,
        })
    }

    fn push(&mut self, mut record: TraceRecord) {
        if let Some(prev) = self.records.last() {
            record.elapsed_s = record.elapsed_s.max(prev.elapsed_s);
        }
        self.records.push(record);
    }

    fn stalled(&self) -> bool {
        let n = self.records.len();
        if n <= EARLY_STOP_WINDOW {
            return false;
        }
        let (a, b) = (
            self.records[n - 1 - EARLY_STOP_WINDOW].objective,
            self.records[n - 1].objective,
        );
        match (a.finite(), b.finite()) {
            (Some(a), Some(b)) => (a - b).abs() <= EARLY_STOP_RTOL * b.abs(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub alpha_hat: CoeffVector,
    pub x_hat: ImageGrid,
    pub final_objective: ExtendedReal,
    pub iterations: usize,
    pub converged: bool,
    pub criterion: String,
}

/// `σ = τ = 0.95/√ζ`, so `στζ = 0.9025`.
pub fn suggest_steps(zeta: f64) -> (f64, f64) {
    let s = 0.95 / libm::sqrt(zeta);
    (s, s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GapRate {
    /// `(J(t_lo) − J_ref)/(J(t_hi) − J_ref)`; 1 when both gaps vanish.
    Ratio(f64),
    /// `J(t_hi)` already equals the best objective to float precision.
    ExactConvergence,
}

/// Objective-suboptimality ratio between two iterations, against the best
/// objective in the trace. `O(1/t)` decay gives roughly `t_hi / t_lo`.
pub fn objective_gap_rate(trace: &SolverTrace, t_lo: usize, t_hi: usize) -> Result<GapRate> {
    let last = trace.last().map(|r| r.iter).unwrap_or(0);
    if t_lo >= t_hi || t_hi > last {
        return Err(Error::InvalidArgument(format!(
            "need t_lo < t_hi <= {last}, got {t_lo}, {t_hi}"
        )));
    }
    let objective_at = |t: usize| {
        trace
            .get(t)
            .and_then(|r| r.objective.finite())
            .ok_or_else(|| {
                Error::InvalidArgument(format!("objective at iteration {t} is not finite"))
            })
    };
    let (j_lo, j_hi) = (objective_at(t_lo)?, objective_at(t_hi)?);
    let j_ref = trace.best_objective().unwrap_or(j_hi);
    let eps = 4.0 * f64::EPSILON * j_ref.abs().max(1.0);
    let (gap_lo, gap_hi) = (j_lo - j_ref, j_hi - j_ref);
    Ok(if gap_lo <= eps && gap_hi <= eps {
        GapRate::Ratio(1.0)
    } else if gap_hi <= eps {
        GapRate::ExactConvergence
    } else {
        GapRate::Ratio(gap_lo / gap_hi)
    })
}

pub(crate) fn record(
    inst: &ProblemInstance,
    iter: usize,
    alpha: &[f64],
    x_hat: &[f64],
    x_true: Option<&ImageGrid>,
    clock: &dyn Clock,
) -> Result<TraceRecord> {
    let report = inst.evaluate_iterate(alpha)?;
    Ok(TraceRecord {
        iter,
        objective: report.objective,
        fidelity: report.fidelity,
        penalty: report.penalty,
        pos_violation: report.positivity_violation,
        mae: x_true.map(|t| mae_slices(x_hat, t.pixels())),
        elapsed_s: clock.elapsed_s(),
    })
}

pub(crate) fn check_truth(inst: &ProblemInstance, x_true: Option<&ImageGrid>) -> Result<()> {
    if let Some(t) = x_true {
        if t.shape() != inst.image_shape() {
            return Err(Error::InvalidArgument(format!(
                "ground truth shape {:?} differs from observation shape {:?}",
                t.shape(),
                inst.image_shape()
            )));
        }
    }
    Ok(())
}

/// Shared driver: iterate, trace, stop early when asked, and package the result.
pub(crate) fn run(
    inst: &ProblemInstance,
    n_iter: usize,
    early_stop: bool,
    x_true: Option<&ImageGrid>,
    clock: &dyn Clock,
    mut step: impl FnMut() -> Result<()>,
    mut raw: impl FnMut() -> Result<(Vec<f64>, Vec<f64>)>,
) -> Result<(Solution, SolverTrace)> {
    check_truth(inst, x_true)?;
    // Iterates are feasible only in the limit; the reported image is
    // clipped to C, and the raw violation is kept in the trace.
    let mut current = || {
        raw().map(|(alpha, mut x)| {
            x.iter_mut().for_each(|v| *v = v.max(0.0));
            (alpha, x)
        })
    };
    let mut trace = SolverTrace::default();
    let (alpha, x) = current()?;
    trace.push(record(inst, 0, &alpha, &x, x_true, clock)?);
    let mut stopped_early = false;
    let mut done = 0;
    for t in 1..=n_iter {
        step()?;
        let (alpha, x) = current()?;
        trace.push(record(inst, t, &alpha, &x, x_true, clock)?);
        done = t;
        if early_stop && trace.stalled() {
            stopped_early = true;
            break;
        }
    }
    let (alpha, x) = current()?;
    let final_objective = trace
        .last()
        .map(|r| r.objective)
        .unwrap_or(ExtendedReal::Infinite(
            crate::objective::Infeasibility::Unrecorded,
        ));
    let all_infinite = trace.records.iter().all(|r| !r.objective.is_finite());
    let (converged, criterion) = if all_infinite {
        (
            false,
            String::from("objective infinite at every recorded iterate"),
        )
    } else if stopped_early || trace.stalled() {
        (
            true,
            format!(
                "relative objective change below {EARLY_STOP_RTOL:e} over {EARLY_STOP_WINDOW} iterations"
            ),
        )
    } else {
        (false, format!("iteration budget of {n_iter} exhausted"))
    };
    let (w, h) = inst.image_shape();
    Ok((
        Solution {
            alpha_hat: CoeffVector::new(alpha)?,
            x_hat: ImageGrid::new(w, h, x)?,
            final_objective,
            iterations: done,
            converged,
            criterion,
        },
        trace,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn trace_of(values: &[f64]) -> SolverTrace {
        SolverTrace {
            records: values
                .iter()
                .enumerate()
                .map(|(i, &v)| TraceRecord {
                    iter: i,
                    objective: if v.is_finite() {
                        ExtendedReal::Finite(v)
                    } else {
                        ExtendedReal::Infinite(
                            crate::objective::Infeasibility::ZeroIntensityWithPositiveCount,
                        )
                    },
                    fidelity: ExtendedReal::Finite(v),
                    penalty: 0.0,
                    pos_violation: 0.0,
                    mae: None,
                    elapsed_s: i as f64,
                })
                .collect(),
        }
    }

    #[test]
    fn suggested_steps() {
        assert_eq!(suggest_steps(1.0), (0.95, 0.95));
        assert_eq!(suggest_steps(4.0), (0.475, 0.475));
        let (s, t) = suggest_steps(2.0);
        assert!((s - 0.95 / libm::sqrt(2.0)).abs() < 1e-15);
        assert!(s * t * 2.0 < 1.0);
    }

    #[test]
    fn gap_rate_constant_trace_is_one() {
        let t = trace_of(&[3.0; 20]);
        assert_eq!(objective_gap_rate(&t, 2, 10).unwrap(), GapRate::Ratio(1.0));
    }

    #[test]
    fn gap_rate_of_one_over_t() {
        let c = 7.0;
        let mut values = vec![f64::INFINITY];
        values.extend((1..=1000).map(|t| 5.0 + c / t as f64));
        values.push(5.0);
        let t = trace_of(&values);
        match objective_gap_rate(&t, 100, 1000).unwrap() {
            GapRate::Ratio(r) => assert!((r - 10.0).abs() < 1e-9, "{r}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gap_rate_exact_convergence_and_errors() {
        let t = trace_of(&[f64::INFINITY, 9.0, 4.0, 4.0, 4.0]);
        assert_eq!(
            objective_gap_rate(&t, 1, 3).unwrap(),
            GapRate::ExactConvergence
        );
        assert!(objective_gap_rate(&t, 3, 1).is_err());
        assert!(objective_gap_rate(&t, 0, 2).is_err());
        assert!(objective_gap_rate(&t, 1, 9).is_err());
    }

    #[test]
    fn first_within_halves_for_halved_constant() {
        // J(t) = 1 + C/t with the limit 1 as the final record.
        let build = |c: f64| {
            let mut v: Vec<f64> = (1..=4000).map(|t| 1.0 + c / t as f64).collect();
            v.insert(0, f64::INFINITY);
            v.push(1.0);
            trace_of(&v)
        };
        // Dyadic constants keep the crossing exact in floating point.
        let rel = 1.0 / 64.0;
        let a = build(16.0).first_within(rel).unwrap().iter;
        let b = build(8.0).first_within(rel).unwrap().iter;
        assert_eq!(a, 1024);
        assert_eq!(b, 512);
    }
}
