//! Alternating optimization: closed-form resource allocation at the current
//! trajectory, then SCA on the trajectory with that allocation held fixed.

use crate::benchmarks::Scheme;
use crate::channel::{gu_rate_ic, gu_rate_tin, uav_rate};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::ra::{average_rate, solve_resource_allocation, ModeConstraint, SlotAllocation};
use crate::sca::{optimize_trajectory, rel_change, ScaConfig};
use crate::scenario::{check_feasibility, Scenario};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerConfig<F> {
    pub outer_max_iters: usize,
    pub outer_rel_tol: F,
    pub sca: ScaConfig<F>,
    pub mode_constraint: ModeConstraint,
}

impl<F: Real> Default for PlannerConfig<F> {
    fn default() -> Self {
        Self {
            outer_max_iters: 30,
            outer_rel_tol: F::lit(1e-4),
            sca: ScaConfig::default(),
            mode_constraint: ModeConstraint::Any,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTrace<F> {
    /// Objective after each outer iteration; entry 0 is the straight-line start.
    pub outer: Vec<F>,
    /// Inner SCA trace that led to each outer entry (empty for the first).
    pub inner_per_outer: Vec<Vec<F>>,
    pub iterations: usize,
    pub converged: bool,
    pub stalls: usize,
}

/// Worst slack of each constraint family in one slot. Negative means violated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotResidual<F> {
    /// `min_{k in IC} R_k - r`, and `r >= 0`.
    pub rate: F,
    /// `v_max * dt - |u[n] - u[n-1]|` in meters.
    pub speed: F,
    /// Worst GU rate minus its requirement, in bps/Hz.
    pub gu_rate: F,
    /// Worst power-box slack (`0 <= p <= P`, `0 <= q_k <= Q_k`) in watts.
    pub power: F,
}

impl<F: Real> SlotResidual<F> {
    fn min(self, o: Self) -> Self {
        Self {
            rate: self.rate.min(o.rate),
            speed: self.speed.min(o.speed),
            gu_rate: self.gu_rate.min(o.gu_rate),
            power: self.power.min(o.power),
        }
    }

    pub fn worst(&self) -> F {
        self.rate.min(self.speed).min(self.gu_rate).min(self.power)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport<F> {
    pub per_slot: Vec<SlotResidual<F>>,
    pub worst: SlotResidual<F>,
    /// Largest endpoint offset in meters (0 when exact).
    pub endpoint_error: F,
    /// `(1/N) sum r[n]`, recomputed from the allocations.
    pub objective: F,
}

impl<F: Real> ResidualReport<F> {
    /// All slacks at least `-tol` and the endpoints pinned.
    pub fn is_feasible(&self, tol: F) -> bool {
        self.worst.worst() >= -tol && self.endpoint_error <= tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan<F> {
    pub scheme: Scheme,
    pub trajectory: Trajectory<F>,
    pub allocations: Vec<SlotAllocation<F>>,
    pub avg_throughput: F,
    pub residuals: ResidualReport<F>,
}

impl<F: Real> Plan<F> {
    pub fn new(scheme: Scheme, trajectory: Trajectory<F>, allocations: Vec<SlotAllocation<F>>, s: &Scenario<F>) -> Result<Self> {
        let residuals = residuals(&trajectory, &allocations, s)?;
        Ok(Self {
            scheme,
            avg_throughput: average_rate(&allocations),
            trajectory,
            allocations,
            residuals,
        })
    }
}

fn residuals<F: Real>(traj: &Trajectory<F>, allocs: &[SlotAllocation<F>], s: &Scenario<F>) -> Result<ResidualReport<F>> {
    let n = s.slots();
    let k = s.num_sites();
    if traj.len() != n + 1 || allocs.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "plan has {} waypoints and {} allocations, scenario needs {} and {}",
            traj.len(),
            allocs.len(),
            n + 1,
            n
        )));
    }
    if let Some((i, a)) = allocs.iter().enumerate().find(|(_, a)| a.q.len() != k || a.mode.num_sites() != k) {
        return Err(Error::DimensionMismatch(format!(
            "slot {}: allocation covers {} sites, scenario has {k}",
            i + 1,
            a.q.len()
        )));
    }

    let (ch, alt) = (s.channel(), s.uav().altitude);
    let uav = s.uav();
    let segs = traj.segment_lengths();
    let per_slot: Vec<SlotResidual<F>> = traj.waypoints()[1..]
        .iter()
        .zip(allocs)
        .zip(&segs)
        .map(|((&u, a), &seg)| {
            let mut rate = a.r;
            let mut gu = F::infinity();
            let mut power = a.p.min(uav.max_power - a.p);
            for (k, site) in s.sites().iter().enumerate() {
                let q = a.q[k];
                power = power.min(q).min(site.max_gu_power - q);
                let gu_rate = if a.mode.is_ic(k) {
                    rate = rate.min(uav_rate(a.p, u, q, site, ch, alt) - a.r);
                    gu_rate_ic(q, site)
                } else {
                    gu_rate_tin(a.p, u, q, site, ch, alt)
                };
                gu = gu.min(gu_rate - site.min_gu_rate);
            }
            if a.mode.ic_count() == 0 {
                rate = F::neg_infinity();
            }
            SlotResidual {
                rate,
                speed: uav.max_step() - seg,
                gu_rate: gu,
                power,
            }
        })
        .collect();
    let inf = F::infinity();
    let worst = per_slot.iter().fold(
        SlotResidual {
            rate: inf,
            speed: inf,
            gu_rate: inf,
            power: inf,
        },
        |acc, r| acc.min(*r),
    );
    Ok(ResidualReport {
        per_slot,
        worst,
        endpoint_error: traj.endpoint_error(s),
        objective: average_rate(allocs),
    })
}

/// Recomputes every constraint of the plan from scratch.
pub fn evaluate_plan<F: Real>(plan: &Plan<F>, s: &Scenario<F>) -> Result<ResidualReport<F>> {
    residuals(&plan.trajectory, &plan.allocations, s)
}

fn scheme_for(c: ModeConstraint) -> Scheme {
    match c {
        ModeConstraint::Any => Scheme::Proposed,
        ModeConstraint::Egoistic => Scheme::Egoistic,
        ModeConstraint::Altruistic => Scheme::Altruistic,
    }
}

pub fn solve<F: Real>(s: &Scenario<F>, cfg: &PlannerConfig<F>) -> Result<(Plan<F>, ConvergenceTrace<F>)> {
    let report = check_feasibility(s);
    if let Some(why) = report.describe_failure(s) {
        return Err(Error::InfeasibleScenario(why));
    }

    let mut traj = Trajectory::straight_for(s);
    let mut ra = solve_resource_allocation(&traj, s, cfg.mode_constraint)?;
    let mut trace = ConvergenceTrace {
        outer: vec![ra.throughput],
        inner_per_outer: vec![Vec::new()],
        iterations: 1,
        converged: false,
        stalls: 0,
    };

    // with the straight line already at top speed there is no room to move
    let budget = s.uav().v_max * s.uav().mission_t;
    let speed_tight = traj.length() >= budget * (F::one() - F::lit(1e-9));

    while trace.iterations < cfg.outer_max_iters {
        if speed_tight {
            trace.converged = true;
            break;
        }
        trace.iterations += 1;
        let prev = ra.throughput;
        let sca = optimize_trajectory(&traj, &ra.allocations, s, &cfg.sca)?;
        trace.stalls += sca.stalls;
        let next_ra = solve_resource_allocation(&sca.trajectory, s, cfg.mode_constraint)?;
        let next = next_ra.throughput;
        if next < prev - F::monotone_tol() {
            return Err(Error::Internal(format!(
                "outer iteration {} lowered the objective from {} to {}",
                trace.iterations,
                prev.as_f64(),
                next.as_f64()
            )));
        }
        traj = sca.trajectory;
        ra = next_ra;
        trace.outer.push(next);
        trace.inner_per_outer.push(sca.inner_trace);
        if rel_change(prev, next) < cfg.outer_rel_tol {
            trace.converged = true;
            break;
        }
    }

    let plan = Plan::new(scheme_for(cfg.mode_constraint), traj, ra.allocations, s)?;
    Ok((plan, trace))
}
