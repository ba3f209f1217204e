//! One surrogate step: a small second-order cone program over the interior
//! waypoints, followed by an exact feasibility check and backtracking toward
//! the local point.
//!
//! Decision vector (in scaled coordinates `(u - origin) / L`):
//! `[x_1, y_1, ..., x_{N-1}, y_{N-1}, r_1, ..., r_N]`.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use crate::channel::gu_rate_tin;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::point::Point2;
use crate::ra::SlotAllocation;
use crate::scenario::Scenario;
use crate::trajectory::Trajectory;

use super::mean;
use super::surrogate::SurrogateSlot;

const BACKTRACK_STEPS: u32 = 10;

/// How a surrogate step ended.
#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    /// Accepted after `backtracks` halvings toward the local point.
    Accepted { backtracks: u32 },
    /// No improving feasible point found; the local trajectory is returned.
    Stalled(String),
}

#[derive(Debug, Clone)]
pub struct SurrogateStep<F> {
    pub trajectory: Trajectory<F>,
    /// Per-slot surrogate bound `max(0, min_{k in IC} R^lb_k)`.
    pub rates: Vec<F>,
    pub objective: F,
    /// Surrogate objective at the local point (equals the true one by tightness).
    pub local_objective: F,
    pub outcome: StepOutcome,
}

impl<F> SurrogateStep<F> {
    pub fn stalled(&self) -> bool {
        matches!(self.outcome, StepOutcome::Stalled(_))
    }
}

/// Affine form `sum c_j x_j + d`.
struct Affine<F> {
    terms: Vec<(usize, F)>,
    constant: F,
}

impl<F: Real> Affine<F> {
    fn constant(d: F) -> Self {
        Self {
            terms: Vec::new(),
            constant: d,
        }
    }

    fn term(mut self, j: usize, c: F) -> Self {
        self.terms.push((j, c));
        self
    }

    fn add(mut self, d: F) -> Self {
        self.constant += d;
        self
    }
}

/// Rows of `A x + s = b`; each row is pushed as "`s_i` equals this affine form".
struct Rows<F> {
    entries: Vec<(usize, usize, F)>,
    b: Vec<F>,
}

impl<F: Real> Rows<F> {
    fn new() -> Self {
        Self {
            entries: Vec::new(),
            b: Vec::new(),
        }
    }

    fn push(&mut self, e: Affine<F>) {
        let row = self.b.len();
        for (j, c) in e.terms {
            if c != F::zero() {
                self.entries.push((row, j, -c));
            }
        }
        self.b.push(e.constant);
    }
}

/// Scaled coordinate of a waypoint component: a decision variable or a constant.
#[derive(Clone, Copy)]
enum Coord<F> {
    Var(usize),
    Fixed(F),
}

impl<F: Real> Coord<F> {
    /// `c * self + d`
    fn affine(self, c: F, d: F) -> Affine<F> {
        match self {
            Coord::Var(j) => Affine::constant(d).term(j, c),
            Coord::Fixed(v) => Affine::constant(c * v + d),
        }
    }

    /// `self - other`
    fn diff(self, other: Coord<F>) -> Affine<F> {
        let e = self.affine(F::one(), F::zero());
        match other {
            Coord::Var(j) => e.term(j, -F::one()),
            Coord::Fixed(v) => e.add(-v),
        }
    }
}

struct Layout<F> {
    slots: usize,
    origin: Point2<F>,
    scale: F,
    first: Point2<F>,
    last: Point2<F>,
}

impl<F: Real> Layout<F> {
    fn free(&self, n: usize) -> bool {
        n > 0 && n < self.slots
    }

    fn coords(&self, n: usize) -> (Coord<F>, Coord<F>) {
        if self.free(n) {
            let j = 2 * (n - 1);
            (Coord::Var(j), Coord::Var(j + 1))
        } else {
            let p = self.to_scaled(if n == 0 { self.first } else { self.last });
            (Coord::Fixed(p.x), Coord::Fixed(p.y))
        }
    }

    fn rate_var(&self, n: usize) -> usize {
        2 * (self.slots - 1) + (n - 1)
    }

    fn num_vars(&self) -> usize {
        2 * (self.slots - 1) + self.slots
    }

    fn to_scaled(&self, p: Point2<F>) -> Point2<F> {
        (p - self.origin) * (F::one() / self.scale)
    }

    fn from_scaled(&self, p: Point2<F>) -> Point2<F> {
        self.origin + p * self.scale
    }
}

/// Squared-distance band `[lo, hi]` on which a concave TIN bound stays above
/// `level`. `None` ends mean unbounded on that side.
fn level_band<F: Real>(phi: impl Fn(F) -> F, s0: F, level: F, scale_hint: F) -> (Option<F>, Option<F>) {
    let iters = 200;
    let lo = if phi(F::zero()) >= level {
        None
    } else {
        let (mut a, mut b) = (F::zero(), s0);
        for _ in 0..iters {
            let m = (a + b) / F::lit(2.0);
            if m <= a || m >= b {
                break;
            }
            if phi(m) >= level {
                b = m;
            } else {
                a = m;
            }
        }
        Some(b)
    };

    let mut inside = s0;
    let mut step = s0.max(scale_hint);
    let hi = loop {
        let probe = s0 + step;
        if !probe.is_finite() || probe > F::lit(1e30) {
            break None;
        }
        if phi(probe) < level {
            let (mut a, mut b) = (inside, probe);
            for _ in 0..iters {
                let m = (a + b) / F::lit(2.0);
                if m <= a || m >= b {
                    break;
                }
                if phi(m) >= level {
                    a = m;
                } else {
                    b = m;
                }
            }
            break Some(a);
        }
        inside = probe;
        step *= F::lit(2.0);
    };
    (lo, hi)
}

fn slot_rates<F: Real>(traj: &[Point2<F>], surr: &[SurrogateSlot<F>], allocs: &[SlotAllocation<F>], s: &Scenario<F>) -> Vec<F> {
    surr.iter()
        .zip(allocs)
        .zip(&traj[1..])
        .map(|((slot, a), &u)| {
            let lb = a
                .mode
                .ic_sites()
                .map(|k| slot.rate_lb(k, u, s.site(k)))
                .fold(F::infinity(), |m, v| m.min(v));
            lb.max(F::zero())
        })
        .collect()
}

/// TIN sites whose requirement actually couples to the trajectory.
fn coupled_tin<'a, F: Real>(a: &'a SlotAllocation<F>, s: &'a Scenario<F>) -> impl Iterator<Item = usize> + 'a {
    a.mode
        .tin_sites()
        .filter(move |&k| a.p > F::zero() && s.site(k).min_gu_rate > F::zero())
}

/// Exact check of the trajectory constraints that the surrogate is meant to
/// guarantee: speed, and both the true and surrogate TIN requirements.
fn verify<F: Real>(traj: &[Point2<F>], surr: &[SurrogateSlot<F>], allocs: &[SlotAllocation<F>], s: &Scenario<F>) -> bool {
    let step = s.uav().max_step();
    if traj.windows(2).any(|w| w[1].dist(w[0]) > step) {
        return false;
    }
    let (ch, alt) = (s.channel(), s.uav().altitude);
    surr.iter().zip(allocs).zip(&traj[1..]).all(|((slot, a), &u)| {
        coupled_tin(a, s).all(|k| {
            let site = s.site(k);
            let need = site.min_gu_rate - F::feas_tol();
            gu_rate_tin(a.p, u, a.q[k], site, ch, alt) >= need && slot.tin_lb(k, u, site, ch, alt) >= need
        })
    })
}

struct Conic<F> {
    lin: Rows<F>,
    soc: Rows<F>,
    soc_dims: Vec<usize>,
}

impl<F: Real> Conic<F> {
    fn nonneg(&mut self, e: Affine<F>) {
        self.lin.push(e);
    }

    fn cone(&mut self, rows: Vec<Affine<F>>) {
        self.soc_dims.push(rows.len());
        for r in rows {
            self.soc.push(r);
        }
    }
}

fn build_program<F: Real>(
    lay: &Layout<F>,
    local: &[Point2<F>],
    surr: &[SurrogateSlot<F>],
    allocs: &[SlotAllocation<F>],
    s: &Scenario<F>,
    trust_region: Option<F>,
) -> Result<Conic<F>> {
    let (ch, alt) = (s.channel(), s.uav().altitude);
    let two = F::lit(2.0);
    let l2 = lay.scale * lay.scale;
    let margin = F::solver_margin();
    let mut c = Conic {
        lin: Rows::new(),
        soc: Rows::new(),
        soc_dims: Vec::new(),
    };

    for n in 1..=lay.slots {
        let rv = lay.rate_var(n);
        let (x, y) = lay.coords(n);
        let slot = &surr[n - 1];
        let alloc = &allocs[n - 1];

        c.nonneg(Affine::constant(F::zero()).term(rv, F::one()));

        for k in alloc.mode.ic_sites() {
            let ss = &slot.sites[k];
            let nu = lay.to_scaled(s.site(k).pos);
            let a = ss.coeff_a * l2;
            if a == F::zero() || !lay.free(n) {
                // bound is constant in this slot
                let v = slot.rate_lb(k, local[n], s.site(k));
                c.nonneg(Affine::constant(v).term(rv, -F::one()));
                continue;
            }
            // r <= c0 - a |u - nu|^2 as a rotated cone: (t+1)^2 >= (t-1)^2 + 4a|u-nu|^2
            let c0 = ss.rate0 + ss.coeff_a * ss.s0;
            let w = two * a.sqrt();
            c.cone(vec![
                Affine::constant(c0 + F::one()).term(rv, -F::one()),
                Affine::constant(c0 - F::one()).term(rv, -F::one()),
                x.affine(w, -w * nu.x),
                y.affine(w, -w * nu.y),
            ]);
        }

        if lay.free(n) {
            for k in coupled_tin(alloc, s) {
                let site = s.site(k);
                let ss = &slot.sites[k];
                let phi = |sq: F| slot.tin_lb_sq(k, sq, site, ch, alt);
                let at_local = phi(ss.s0);
                if at_local < site.min_gu_rate - F::feas_tol() {
                    return Err(Error::Internal(format!(
                        "slot {n}: local point violates the TIN requirement at site {k} ({} < {})",
                        at_local.as_f64(),
                        site.min_gu_rate.as_f64()
                    )));
                }
                let level = site.min_gu_rate.min(at_local);
                let (lo, hi) = level_band(phi, ss.s0, level, alt * alt);
                let nu = lay.to_scaled(site.pos);
                if let Some(hi) = hi {
                    let radius = (hi / l2).sqrt() * (F::one() - margin);
                    c.cone(vec![Affine::constant(radius), x.affine(F::one(), -nu.x), y.affine(F::one(), -nu.y)]);
                }
                if let Some(lo) = lo {
                    // |u - nu|^2 >= lo is an exclusion; its tangent halfspace at
                    // the local point is an inner approximation
                    let ul = lay.to_scaled(local[n]);
                    let d = ul - nu;
                    let s0 = d.norm_sq();
                    let rhs = lo / l2 + margin * (F::one() + lo / l2);
                    c.nonneg(
                        x.affine(two * d.x, -two * d.x * ul.x)
                            .add(s0 - rhs)
                            .term_from(y.affine(two * d.y, -two * d.y * ul.y)),
                    );
                }
            }
        }
    }

    let dmax = s.uav().max_step() / lay.scale * (F::one() - margin);
    for n in 1..=lay.slots {
        if !lay.free(n) && !lay.free(n - 1) {
            continue;
        }
        let (x1, y1) = lay.coords(n);
        let (x0, y0) = lay.coords(n - 1);
        c.cone(vec![Affine::constant(dmax), x1.diff(x0), y1.diff(y0)]);
    }

    if let Some(rho) = trust_region {
        let cap = rho * s.uav().max_step() / lay.scale;
        for n in 1..lay.slots {
            let (x, y) = lay.coords(n);
            let ul = lay.to_scaled(local[n]);
            c.cone(vec![Affine::constant(cap), x.affine(F::one(), -ul.x), y.affine(F::one(), -ul.y)]);
        }
    }

    Ok(c)
}

impl<F: Real> Affine<F> {
    fn term_from(mut self, other: Affine<F>) -> Self {
        self.terms.extend(other.terms);
        self.constant += other.constant;
        self
    }
}

fn run_clarabel<F: Real>(lay: &Layout<F>, prog: Conic<F>) -> std::result::Result<Vec<F>, String> {
    let nv = lay.num_vars();
    let m_lin = prog.lin.b.len();
    let m = m_lin + prog.soc.b.len();

    let mut rows = Vec::new();
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    for &(i, j, v) in &prog.lin.entries {
        rows.push(i);
        cols.push(j);
        vals.push(v);
    }
    for &(i, j, v) in &prog.soc.entries {
        rows.push(m_lin + i);
        cols.push(j);
        vals.push(v);
    }
    let a = CscMatrix::new_from_triplets(m, nv, rows, cols, vals);
    let mut b = prog.lin.b;
    b.extend(prog.soc.b);

    let p = CscMatrix::zeros((nv, nv));
    let mut q = vec![F::zero(); nv];
    // maximize the mean rate; the 1/N factor only rescales the objective
    for n in 1..=lay.slots {
        q[lay.rate_var(n)] = -F::one();
    }

    let mut cones = Vec::with_capacity(prog.soc_dims.len() + 1);
    if m_lin > 0 {
        cones.push(SupportedConeT::NonnegativeConeT(m_lin));
    }
    cones.extend(prog.soc_dims.iter().map(|&d| SupportedConeT::SecondOrderConeT(d)));

    let tol = F::lit(1e-9).max(F::epsilon().sqrt());
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(200)
        .tol_gap_abs(tol)
        .tol_gap_rel(tol)
        .tol_feas(tol)
        .presolve_enable(false)
        .build()
        .map_err(|e| format!("solver settings: {e:?}"))?;

    let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings).map_err(|e| format!("solver setup: {e:?}"))?;
    solver.solve();
    match solver.solution.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => Ok(solver.solution.x.clone()),
        other => Err(format!("conic solver ended with {other:?}")),
    }
}

/// Improves `local` under the surrogate built around it.
///
/// The result always satisfies the speed and endpoint constraints and the TIN
/// requirements (checked exactly), and its surrogate objective is never below
/// the one at `local`. When no such improvement is found the local trajectory
/// is handed back with a `Stalled` outcome.
pub fn solve_surrogate<F: Real>(
    surr: &[SurrogateSlot<F>],
    local: &Trajectory<F>,
    allocs: &[SlotAllocation<F>],
    s: &Scenario<F>,
    trust_region: Option<F>,
) -> Result<SurrogateStep<F>> {
    let slots = s.slots();
    if local.len() != slots + 1 || surr.len() != slots || allocs.len() != slots {
        return Err(Error::DimensionMismatch(format!(
            "{} waypoints, {} surrogate slots, {} allocations for {} slots",
            local.len(),
            surr.len(),
            allocs.len(),
            slots
        )));
    }
    let pts = local.waypoints();
    let local_rates = slot_rates(pts, surr, allocs, s);
    let local_objective = mean(&local_rates);
    let stall = |why: String| SurrogateStep {
        trajectory: local.clone(),
        rates: local_rates.clone(),
        objective: local_objective,
        local_objective,
        outcome: StepOutcome::Stalled(why),
    };

    if slots < 2 {
        return Ok(stall("no interior waypoints".into()));
    }

    let mut anchors: Vec<Point2<F>> = s.sites().iter().map(|x| x.pos).collect();
    anchors.push(s.uav().u_init);
    anchors.push(s.uav().u_final);
    let inv = F::one() / F::of_usize(anchors.len());
    let origin = anchors.iter().fold(Point2::new(F::zero(), F::zero()), |a, &b| a + b * inv);
    let scale = anchors
        .iter()
        .chain(pts)
        .map(|p| p.dist(origin))
        .fold(F::one(), |a, b| a.max(b));
    let lay = Layout {
        slots,
        origin,
        scale,
        first: pts[0],
        last: pts[slots],
    };

    let prog = build_program(&lay, pts, surr, allocs, s, trust_region)?;
    let x = match run_clarabel(&lay, prog) {
        Ok(x) => x,
        Err(why) => return Ok(stall(why)),
    };

    let mut target = pts.to_vec();
    for n in 1..slots {
        let j = 2 * (n - 1);
        target[n] = lay.from_scaled(Point2::new(x[j], x[j + 1]));
    }

    let mut t = F::one();
    for backtracks in 0..=BACKTRACK_STEPS {
        let cand: Vec<Point2<F>> = if backtracks == 0 {
            target.clone()
        } else {
            pts.iter().zip(&target).map(|(&a, &b)| a.lerp(b, t)).collect()
        };
        if verify(&cand, surr, allocs, s) {
            let rates = slot_rates(&cand, surr, allocs, s);
            let objective = mean(&rates);
            if objective >= local_objective {
                return Ok(SurrogateStep {
                    trajectory: Trajectory::new(cand),
                    rates,
                    objective,
                    local_objective,
                    outcome: StepOutcome::Accepted { backtracks },
                });
            }
        }
        t /= F::lit(2.0);
    }
    Ok(stall("no verified improving step after backtracking".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::uav_rate;
    use crate::ra::{solve_resource_allocation, solve_slot, ModeConstraint};
    use crate::sca::surrogate::build_surrogate;
    use crate::scenario::{ChannelParams, GbsSite, GuLink, UavParams};

    #[test]
    fn level_band_brackets_concave_bump() {
        // phi(s) = 4 - (s - 10)^2 / 10, >= 2 on [10 - sqrt 20, 10 + sqrt 20]
        let phi = |s: f64| 4.0 - (s - 10.0) * (s - 10.0) / 10.0;
        let (lo, hi) = level_band(phi, 10.0, 2.0, 1.0);
        let r = 20f64.sqrt();
        assert!((lo.unwrap() - (10.0 - r)).abs() < 1e-9);
        assert!((hi.unwrap() - (10.0 + r)).abs() < 1e-9);
        let (lo, hi) = level_band(|s: f64| 3.0 - s, 0.5, 1.0, 1.0);
        assert!(lo.is_none());
        assert!((hi.unwrap() - 2.0).abs() < 1e-9);
        let (lo, hi) = level_band(|_s: f64| 3.0, 0.5, 1.0, 1.0);
        assert!(lo.is_none() && hi.is_none());
    }

    #[test]
    fn first_step_from_straight_line_improves() {
        let s = Scenario::<f64>::default_scenario();
        let local = Trajectory::straight_for(&s);
        let ra = solve_resource_allocation(&local, &s, ModeConstraint::Any).unwrap();
        let surr = build_surrogate(&local, &ra.allocations, &s).unwrap();
        let step = solve_surrogate(&surr, &local, &ra.allocations, &s, None).unwrap();
        assert!(!step.stalled(), "{:?}", step.outcome);
        assert!((step.local_objective - ra.throughput).abs() < 1e-9);
        assert!(step.objective > step.local_objective);
        assert!(step.trajectory.is_flyable(&s));
    }

    #[test]
    fn optimum_is_a_fixed_point() {
        let s = Scenario::<f64>::default_scenario();
        let mut local = Trajectory::straight_for(&s);
        let ra = solve_resource_allocation(&local, &s, ModeConstraint::Any).unwrap();
        let mut last = 0.0;
        for _ in 0..40 {
            let surr = build_surrogate(&local, &ra.allocations, &s).unwrap();
            let step = solve_surrogate(&surr, &local, &ra.allocations, &s, None).unwrap();
            assert!(step.objective >= step.local_objective);
            last = step.objective - step.local_objective;
            local = step.trajectory;
        }
        assert!(last < 1e-6, "still moving by {last}");
    }

    /// Two-slot hover: u_0 = u_2 fixed, only u_1 moves within one step.
    fn toy(center: Point2<f64>) -> Scenario<f64> {
        let ch = ChannelParams {
            beta0: 1e-3,
            alpha: 2.0,
            theta0: 1e-4,
            epsilon: 3.0,
        };
        let sites = vec![
            GbsSite::new(Point2::new(0.0, 0.0), GuLink::Gain(1e-7), 1e-8, 1.0, 2.0),
            GbsSite::new(Point2::new(60.0, 10.0), GuLink::Gain(1e-7), 1e-8, 1.0, 1.5),
        ];
        let uav = UavParams {
            altitude: 100.0,
            v_max: 20.0,
            max_power: 1.0,
            u_init: center,
            u_final: center,
            mission_t: 2.0,
            slots: 2,
            t_max: 1800.0,
        };
        Scenario::new(ch, sites, uav).unwrap()
    }

    #[test]
    fn single_waypoint_matches_grid_search() {
        let center = Point2::new(-25.0, 5.0);
        let s = toy(center);
        let local = Trajectory::straight_for(&s);
        let ra = solve_resource_allocation(&local, &s, ModeConstraint::Any).unwrap();
        let surr = build_surrogate(&local, &ra.allocations, &s).unwrap();
        let step = solve_surrogate(&surr, &local, &ra.allocations, &s, None).unwrap();

        // oracle: 1 m grid over the reachable disc of u_1, same surrogate
        let reach = s.uav().max_step();
        let mut best = f64::NEG_INFINITY;
        let r = reach as i64;
        for i in -r..=r {
            for j in -r..=r {
                let u = center + Point2::new(i as f64, j as f64);
                if u.dist(center) > reach {
                    continue;
                }
                let pts = vec![center, u, center];
                if !verify(&pts, &surr, &ra.allocations, &s) {
                    continue;
                }
                best = best.max(mean(&slot_rates(&pts, &surr, &ra.allocations, &s)));
            }
        }
        // grid resolution 1 m against a slope of at most |dR/du| ~ 2 A |u - nu|
        let slope = surr[0].sites[0].coeff_a * 2.0 * 60.0;
        assert!(step.objective >= best - 1e-9, "{} < {best}", step.objective);
        assert!(step.objective <= best + slope, "{} vs {best}", step.objective);
    }

    #[test]
    fn tin_requirement_survives_the_step() {
        let center = Point2::new(-25.0, 5.0);
        let s = toy(center);
        let local = Trajectory::straight_for(&s);
        let u = local.waypoints()[1];
        let alloc = solve_slot(u, &s, ModeConstraint::Egoistic).unwrap();
        let allocs = vec![alloc.clone(), alloc];
        let surr = build_surrogate(&local, &allocs, &s).unwrap();
        let step = solve_surrogate(&surr, &local, &allocs, &s, None).unwrap();
        let (ch, alt) = (s.channel(), s.uav().altitude);
        for (n, &w) in step.trajectory.waypoints()[1..].iter().enumerate() {
            let a = &allocs[n];
            for k in a.mode.tin_sites() {
                let site = s.site(k);
                assert!(gu_rate_tin(a.p, w, a.q[k], site, ch, alt) >= site.min_gu_rate - 1e-8);
            }
            for k in a.mode.ic_sites() {
                assert!(uav_rate(a.p, w, a.q[k], s.site(k), ch, alt) >= step.rates[n] - 1e-12);
            }
        }
    }
}
