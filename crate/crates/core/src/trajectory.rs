use crate::num::Real;
use crate::point::Point2;
use crate::scenario::Scenario;

/// Horizontal waypoints `u[0..=N]` at the scenario's fixed altitude.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<F> {
    waypoints: Vec<Point2<F>>,
}

impl<F: Real> Trajectory<F> {
    pub fn new(waypoints: Vec<Point2<F>>) -> Self {
        Self { waypoints }
    }

    /// Uniform-speed line from `from` to `to` over `slots` slots.
    pub fn straight(from: Point2<F>, to: Point2<F>, slots: usize) -> Self {
        let n = F::of_usize(slots);
        let mut waypoints: Vec<_> = (0..=slots).map(|i| from.lerp(to, F::of_usize(i) / n)).collect();
        // pin the end exactly, lerp can be off by an ulp
        waypoints[slots] = to;
        Self { waypoints }
    }

    pub fn straight_for(s: &Scenario<F>) -> Self {
        Self::straight(s.uav().u_init, s.uav().u_final, s.slots())
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn waypoints(&self) -> &[Point2<F>] {
        &self.waypoints
    }

    pub fn into_waypoints(self) -> Vec<Point2<F>> {
        self.waypoints
    }

    /// Horizontal hop lengths `|u[n] - u[n-1]|`, n = 1..=N.
    pub fn segment_lengths(&self) -> Vec<F> {
        self.waypoints.windows(2).map(|w| w[1].dist(w[0])).collect()
    }

    pub fn length(&self) -> F {
        self.segment_lengths().into_iter().fold(F::zero(), |a, b| a + b)
    }

    /// Per-segment slack `v_max * dt - |u[n] - u[n-1]|`; negative means too fast.
    pub fn speed_slack(&self, s: &Scenario<F>) -> Vec<F> {
        let step = s.uav().max_step();
        self.segment_lengths().into_iter().map(|d| step - d).collect()
    }

    /// Worst violation of the endpoint constraints, in meters.
    pub fn endpoint_error(&self, s: &Scenario<F>) -> F {
        match (self.waypoints.first(), self.waypoints.last()) {
            (Some(&a), Some(&b)) => a.dist(s.uav().u_init).max(b.dist(s.uav().u_final)),
            _ => F::infinity(),
        }
    }

    /// Waypoint count and endpoints hold exactly; hops respect the speed limit
    /// up to rounding.
    pub fn is_flyable(&self, s: &Scenario<F>) -> bool {
        let tol = -F::feas_tol() * s.uav().max_step().max(F::one());
        self.len() == s.slots() + 1
            && self.endpoint_error(s) == F::zero()
            && self.speed_slack(s).iter().all(|&x| x >= tol)
    }
}
