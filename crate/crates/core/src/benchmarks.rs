//! Reference schemes the proposed design is compared against.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::num::Real;
use crate::planner::{self, ConvergenceTrace, Plan, PlannerConfig};
use crate::point::Point2;
use crate::ra::{solve_resource_allocation, solve_slot, ModeConstraint, SlotAllocation};
use crate::scenario::{check_feasibility, Scenario};
use crate::trajectory::Trajectory;

/// Exhaustive tour search refuses more sites than this.
pub const MAX_TOUR_SITES: usize = 8;
pub const DEFAULT_GRID_STEP_M: f64 = 5.0;
/// Margin added around the sites and endpoints for the hover search.
pub const GRID_MARGIN_M: f64 = 100.0;
const MAX_GRID_POINTS: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Proposed,
    StraightFly,
    SuccessiveHoverFly,
    Egoistic,
    Altruistic,
    UpperBound,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::Proposed,
        Scheme::StraightFly,
        Scheme::SuccessiveHoverFly,
        Scheme::Egoistic,
        Scheme::Altruistic,
        Scheme::UpperBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::StraightFly => "straight_fly",
            Scheme::SuccessiveHoverFly => "successive_hover_fly",
            Scheme::Egoistic => "egoistic",
            Scheme::Altruistic => "altruistic",
            Scheme::UpperBound => "upper_bound",
        }
    }

    /// Schemes driven by the alternating planner.
    pub fn mode_constraint(self) -> Option<ModeConstraint> {
        match self {
            Scheme::Proposed => Some(ModeConstraint::Any),
            Scheme::Egoistic => Some(ModeConstraint::Egoistic),
            Scheme::Altruistic => Some(ModeConstraint::Altruistic),
            _ => None,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| *c != '_' && *c != '-').collect::<String>().to_ascii_lowercase();
        Ok(match key.as_str() {
            "proposed" => Scheme::Proposed,
            "straightfly" | "straight" => Scheme::StraightFly,
            "successivehoverfly" | "hoverfly" | "shf" => Scheme::SuccessiveHoverFly,
            "egoistic" => Scheme::Egoistic,
            "altruistic" => Scheme::Altruistic,
            "upperbound" | "ub" => Scheme::UpperBound,
            _ => {
                return Err(Error::config(
                    "scheme",
                    format!(
                        "unknown scheme '{s}', expected one of {}",
                        Scheme::ALL.map(Scheme::name).join(", ")
                    ),
                ))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig<F> {
    pub scheme: Scheme,
    pub grid_step: F,
}

impl<F: Real> SchemeConfig<F> {
    pub fn new(scheme: Scheme) -> Self {
        Self {
            scheme,
            grid_step: F::lit(DEFAULT_GRID_STEP_M),
        }
    }
}

fn ensure_feasible<F: Real>(s: &Scenario<F>) -> Result<()> {
    match check_feasibility(s).describe_failure(s) {
        Some(why) => Err(Error::InfeasibleScenario(why)),
        None => Ok(()),
    }
}

/// Uniform-speed line from `u_I` to `u_F` with optimal allocation along it.
pub fn straight_fly<F: Real>(s: &Scenario<F>) -> Result<Plan<F>> {
    ensure_feasible(s)?;
    let traj = Trajectory::straight_for(s);
    let ra = solve_resource_allocation(&traj, s, ModeConstraint::Any)?;
    Plan::new(Scheme::StraightFly, traj, ra.allocations, s)
}

pub fn egoistic<F: Real>(s: &Scenario<F>, cfg: &PlannerConfig<F>) -> Result<(Plan<F>, ConvergenceTrace<F>)> {
    let cfg = PlannerConfig {
        mode_constraint: ModeConstraint::Egoistic,
        ..*cfg
    };
    planner::solve(s, &cfg)
}

pub fn altruistic<F: Real>(s: &Scenario<F>, cfg: &PlannerConfig<F>) -> Result<(Plan<F>, ConvergenceTrace<F>)> {
    let cfg = PlannerConfig {
        mode_constraint: ModeConstraint::Altruistic,
        ..*cfg
    };
    planner::solve(s, &cfg)
}

/// Shortest open path `u_I -> all sites -> u_F`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tour<F> {
    /// Site indices in visiting order.
    pub order: Vec<usize>,
    pub length: F,
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

pub fn shortest_tour<F: Real>(s: &Scenario<F>) -> Result<Tour<F>> {
    let k = s.num_sites();
    if k > MAX_TOUR_SITES {
        return Err(Error::TooManySites {
            count: k,
            limit: MAX_TOUR_SITES,
        });
    }
    let (start, end) = (s.uav().u_init, s.uav().u_final);
    let length = |order: &[usize]| {
        let mut at = start;
        let mut total = F::zero();
        for &i in order {
            let p = s.site(i).pos;
            total += at.dist(p);
            at = p;
        }
        total + at.dist(end)
    };
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = Tour {
        length: length(&perm),
        order: perm.clone(),
    };
    while next_permutation(&mut perm) {
        let l = length(&perm);
        if l < best.length {
            best = Tour {
                order: perm.clone(),
                length: l,
            };
        }
    }
    Ok(best)
}

/// Least mission time for the successive-hover-fly path.
pub fn min_hover_fly_time<F: Real>(s: &Scenario<F>) -> Result<F> {
    Ok(shortest_tour(s)?.length / s.uav().v_max)
}

/// `max sum t_m r_m` s.t. `sum t_m = budget`, `0 <= t_m <= cap_m`.
///
/// Filled greedily in decreasing rate order, which is exact for this LP; with
/// no caps all time lands on the best site (lowest index among ties).
pub fn hover_time_lp<F: Real>(rates: &[F], budget: F, caps: Option<&[F]>) -> Result<Vec<F>> {
    if let Some(c) = caps {
        if c.len() != rates.len() {
            return Err(Error::DimensionMismatch(format!("{} rates, {} caps", rates.len(), c.len())));
        }
    }
    let mut order: Vec<usize> = (0..rates.len()).collect();
    order.sort_by(|&a, &b| rates[b].partial_cmp(&rates[a]).unwrap_or(std::cmp::Ordering::Equal));
    let mut t = vec![F::zero(); rates.len()];
    let mut left = budget.max(F::zero());
    for m in order {
        if left <= F::zero() {
            break;
        }
        let take = caps.map_or(left, |c| c[m].min(left));
        t[m] = take;
        left -= take;
    }
    if left > F::zero() {
        return Err(Error::InsufficientDuration {
            required: budget.as_f64(),
            available: (budget - left).as_f64(),
        });
    }
    Ok(t)
}

/// Timed polyline: legs flown at `v_max`, with an optional pause at one vertex.
struct TimedPath<F> {
    /// `(arrival time, position)` for each vertex, with pauses as duplicates.
    knots: Vec<(F, Point2<F>)>,
}

impl<F: Real> TimedPath<F> {
    fn at(&self, t: F) -> Point2<F> {
        let first = self.knots[0];
        if t <= first.0 {
            return first.1;
        }
        for w in self.knots.windows(2) {
            let ((t0, p0), (t1, p1)) = (w[0], w[1]);
            if t <= t1 {
                if t1 <= t0 {
                    return p1;
                }
                return p0.lerp(p1, (t - t0) / (t1 - t0));
            }
        }
        self.knots[self.knots.len() - 1].1
    }
}

pub fn successive_hover_fly<F: Real>(s: &Scenario<F>) -> Result<Plan<F>> {
    ensure_feasible(s)?;
    let tour = shortest_tour(s)?;
    let uav = s.uav();
    let t_fly = tour.length / uav.v_max;
    if uav.mission_t < t_fly {
        return Err(Error::InsufficientDuration {
            required: t_fly.as_f64(),
            available: uav.mission_t.as_f64(),
        });
    }

    let rates = tour
        .order
        .iter()
        .map(|&k| solve_slot(s.site(k).pos, s, ModeConstraint::Any).map(|a| a.r))
        .collect::<Result<Vec<F>>>()?;
    let hover = hover_time_lp(&rates, uav.mission_t - t_fly, None)?;

    let mut knots = vec![(F::zero(), uav.u_init)];
    let mut now = F::zero();
    let mut at = uav.u_init;
    for (i, &k) in tour.order.iter().enumerate() {
        let p = s.site(k).pos;
        now += at.dist(p) / uav.v_max;
        knots.push((now, p));
        if hover[i] > F::zero() {
            now += hover[i];
            knots.push((now, p));
        }
        at = p;
    }
    now += at.dist(uav.u_final) / uav.v_max;
    knots.push((now, uav.u_final));
    let path = TimedPath { knots };

    let n = s.slots();
    let dt = uav.slot_len();
    let mut w: Vec<Point2<F>> = (0..=n).map(|i| path.at(F::of_usize(i) * dt)).collect();
    w[0] = uav.u_init;
    w[n] = uav.u_final;
    let traj = Trajectory::new(w);
    let ra = solve_resource_allocation(&traj, s, ModeConstraint::Any)?;
    Plan::new(Scheme::SuccessiveHoverFly, traj, ra.allocations, s)
}

/// Best single hovering position found by grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct HoverBound<F> {
    pub point: Point2<F>,
    pub throughput: F,
    pub allocation: SlotAllocation<F>,
    pub grid_step: F,
    pub grid_points: usize,
}

/// Search box: sites and endpoints, grown by the margin on every side.
pub fn search_box<F: Real>(s: &Scenario<F>) -> (Point2<F>, Point2<F>) {
    let pts = s
        .sites()
        .iter()
        .map(|x| x.pos)
        .chain([s.uav().u_init, s.uav().u_final]);
    let (mut lo, mut hi) = (Point2::new(F::infinity(), F::infinity()), Point2::new(F::neg_infinity(), F::neg_infinity()));
    for p in pts {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let m = F::lit(GRID_MARGIN_M);
    (Point2::new(lo.x - m, lo.y - m), Point2::new(hi.x + m, hi.y + m))
}

/// Throughput limit as the mission grows long: the best hover rate.
pub fn upper_bound<F: Real>(s: &Scenario<F>, grid_step: F) -> Result<HoverBound<F>> {
    if !(grid_step > F::zero()) || !grid_step.is_finite() {
        return Err(Error::config("grid_step", "must be a positive number of meters"));
    }
    let report = check_feasibility(s);
    if !report.failing_sites.is_empty() {
        return Err(Error::InfeasibleScenario(
            report.describe_failure(s).unwrap_or_else(|| "GU requirement unreachable".into()),
        ));
    }
    let (lo, hi) = search_box(s);
    let cells = |a: F, b: F| ((b - a) / grid_step).floor().to_usize().map(|c| c + 1);
    let (nx, ny) = match (cells(lo.x, hi.x), cells(lo.y, hi.y)) {
        (Some(nx), Some(ny)) if nx.checked_mul(ny).is_some_and(|t| t <= MAX_GRID_POINTS) => (nx, ny),
        _ => return Err(Error::config("grid_step", "grid too fine for the search area")),
    };

    let rates = (0..nx * ny)
        .into_par_iter()
        .with_min_len(256)
        .map(|i| {
            let p = Point2::new(lo.x + F::of_usize(i / ny) * grid_step, lo.y + F::of_usize(i % ny) * grid_step);
            solve_slot(p, s, ModeConstraint::Any).map(|a| a.r)
        })
        .collect::<Result<Vec<F>>>()?;

    let mut best = 0;
    for (i, &r) in rates.iter().enumerate() {
        if r > rates[best] {
            best = i;
        }
    }
    let point = Point2::new(lo.x + F::of_usize(best / ny) * grid_step, lo.y + F::of_usize(best % ny) * grid_step);
    let allocation = solve_slot(point, s, ModeConstraint::Any)?;
    Ok(HoverBound {
        point,
        throughput: allocation.r,
        allocation,
        grid_step,
        grid_points: nx * ny,
    })
}
