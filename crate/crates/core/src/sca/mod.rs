//! Trajectory optimization under a fixed resource allocation by successive
//! convex approximation.

mod subproblem;
mod surrogate;

pub use subproblem::{solve_surrogate, StepOutcome, SurrogateStep};
pub use surrogate::{build_surrogate, surrogate_coeff_a, surrogate_coeff_b, SiteSurrogate, SurrogateSlot};

use crate::channel::uav_rate;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::ra::SlotAllocation;
use crate::scenario::Scenario;
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaConfig<F> {
    pub max_iters: usize,
    pub rel_tol: F,
    /// Optional per-iteration cap on waypoint motion, as a multiple of `v_max * dt`.
    pub trust_region: Option<F>,
}

impl<F: Real> Default for ScaConfig<F> {
    fn default() -> Self {
        Self {
            max_iters: 50,
            rel_tol: F::lit(1e-4),
            trust_region: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScaResult<F> {
    pub trajectory: Trajectory<F>,
    /// Achievable rate per slot at the final trajectory under the fixed allocation.
    pub rates: Vec<F>,
    pub objective: F,
    /// Objective before the first step, then after every step.
    pub inner_trace: Vec<F>,
    pub converged: bool,
    pub iterations: usize,
    pub stalls: usize,
}

/// Per-slot rate `max(0, min_{k in IC} R_k)` with powers and modes held fixed.
pub fn fixed_allocation_rates<F: Real>(traj: &Trajectory<F>, allocs: &[SlotAllocation<F>], s: &Scenario<F>) -> Vec<F> {
    let (ch, alt) = (s.channel(), s.uav().altitude);
    traj.waypoints()[1..]
        .iter()
        .zip(allocs)
        .map(|(&u, a)| {
            a.mode
                .ic_sites()
                .map(|k| uav_rate(a.p, u, a.q[k], s.site(k), ch, alt))
                .fold(F::infinity(), |m, v| m.min(v))
                .max(F::zero())
        })
        .collect()
}

pub(crate) fn mean<F: Real>(v: &[F]) -> F {
    if v.is_empty() {
        return F::zero();
    }
    v.iter().fold(F::zero(), |a, &b| a + b) / F::of_usize(v.len())
}

/// Relative change used by both the inner and the outer stopping rule.
pub(crate) fn rel_change<F: Real>(prev: F, next: F) -> F {
    (next - prev).abs() / prev.abs().max(F::min_positive_value())
}

pub fn optimize_trajectory<F: Real>(
    init: &Trajectory<F>,
    allocs: &[SlotAllocation<F>],
    s: &Scenario<F>,
    cfg: &ScaConfig<F>,
) -> Result<ScaResult<F>> {
    if init.len() != s.slots() + 1 || allocs.len() != s.slots() {
        return Err(Error::DimensionMismatch(format!(
            "{} waypoints and {} allocations for {} slots",
            init.len(),
            allocs.len(),
            s.slots()
        )));
    }
    let mut traj = init.clone();
    let mut rates = fixed_allocation_rates(&traj, allocs, s);
    let mut objective = mean(&rates);
    let mut inner_trace = vec![objective];
    let mut converged = false;
    let mut iterations = 0;
    let mut stalls = 0;

    while iterations < cfg.max_iters {
        iterations += 1;
        let surr = build_surrogate(&traj, allocs, s)?;
        let step = solve_surrogate(&surr, &traj, allocs, s, cfg.trust_region)?;
        if step.stalled() {
            stalls += 1;
        }
        let next_rates = fixed_allocation_rates(&step.trajectory, allocs, s);
        let next = mean(&next_rates);
        if next < objective - F::monotone_tol() {
            return Err(Error::Internal(format!(
                "trajectory step {iterations} lowered the objective from {} to {}",
                objective.as_f64(),
                next.as_f64()
            )));
        }
        let change = rel_change(objective, next);
        traj = step.trajectory;
        rates = next_rates;
        objective = next;
        inner_trace.push(objective);
        if change < cfg.rel_tol {
            converged = true;
            break;
        }
    }

    Ok(ScaResult {
        trajectory: traj,
        rates,
        objective,
        inner_trace,
        converged,
        iterations,
        stalls,
    })
}
