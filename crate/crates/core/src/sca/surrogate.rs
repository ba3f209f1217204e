//! First-order lower bounds of the rate expressions in the squared horizontal
//! distance `s = |u - nu_k|^2`.
//!
//! Both `R_k` and `log2(sigma^2 + h_k p + g_k q_k)` are convex in `s`, so their
//! tangent at the local point under-estimates them everywhere while matching
//! them exactly at the expansion point.

use rayon::prelude::*;

use crate::channel::gain_at_sq_dist;
use crate::error::{Error, Result};
use crate::num::{log2_1p, Real};
use crate::point::Point2;
use crate::ra::SlotAllocation;
use crate::scenario::{ChannelParams, GbsSite, Scenario};
use crate::trajectory::Trajectory;

/// `-dR_k/ds` at the local point for the UAV rate.
pub fn surrogate_coeff_a<F: Real>(
    p: F,
    local_u: Point2<F>,
    q: F,
    site: &GbsSite<F>,
    ch: &ChannelParams<F>,
    altitude: F,
) -> F {
    coeff_a_at(p, local_u.dist_sq(site.pos), q, site, ch, altitude)
}

fn coeff_a_at<F: Real>(p: F, s: F, q: F, site: &GbsSite<F>, ch: &ChannelParams<F>, altitude: F) -> F {
    if p <= F::zero() {
        return F::zero();
    }
    let two = F::lit(2.0);
    let t = altitude * altitude + s;
    let interference = site.noise + site.gain * q;
    let bp = ch.beta0 * p;
    ch.alpha * bp / (two * F::LN_2() * t * (bp + interference * t.powf(ch.alpha / two)))
}

/// `-d/ds log2(sigma^2 + h_k p + g_k q)` at the local point.
pub fn surrogate_coeff_b<F: Real>(
    p: F,
    local_u: Point2<F>,
    q: F,
    site: &GbsSite<F>,
    ch: &ChannelParams<F>,
    altitude: F,
) -> F {
    coeff_b_at(p, local_u.dist_sq(site.pos), q, site, ch, altitude)
}

fn coeff_b_at<F: Real>(p: F, s: F, q: F, site: &GbsSite<F>, ch: &ChannelParams<F>, altitude: F) -> F {
    if p <= F::zero() {
        return F::zero();
    }
    let two = F::lit(2.0);
    let t = altitude * altitude + s;
    let m = ch.alpha / two;
    let bp = ch.beta0 * p;
    ch.alpha * bp / (two * F::LN_2() * t.powf(m + F::one()) * (site.noise + site.gain * q + bp * t.powf(-m)))
}

/// Linearization data for one site in one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteSurrogate<F> {
    /// Squared horizontal distance at the local point.
    pub s0: F,
    pub coeff_a: F,
    pub coeff_b: F,
    /// UAV rate at the local point (intercept of the rate bound).
    pub rate0: F,
    /// Received power plus noise, `sigma^2 + h p + g q`, at the local point.
    pub total_power0: F,
}

/// Surrogate for one slot, expanded around `local`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateSlot<F> {
    pub local: Point2<F>,
    pub p: F,
    pub q: Vec<F>,
    pub sites: Vec<SiteSurrogate<F>>,
}

impl<F: Real> SurrogateSlot<F> {
    pub fn new(local: Point2<F>, alloc: &SlotAllocation<F>, s: &Scenario<F>) -> Self {
        let ch = s.channel();
        let alt = s.uav().altitude;
        let p = alloc.p;
        let sites = s
            .sites()
            .iter()
            .zip(&alloc.q)
            .map(|(site, &q)| {
                let s0 = local.dist_sq(site.pos);
                let h0 = gain_at_sq_dist(s0, ch, alt);
                SiteSurrogate {
                    s0,
                    coeff_a: coeff_a_at(p, s0, q, site, ch, alt),
                    coeff_b: coeff_b_at(p, s0, q, site, ch, alt),
                    rate0: log2_1p(h0 * p / (site.noise + site.gain * q)),
                    total_power0: site.noise + h0 * p + site.gain * q,
                }
            })
            .collect();
        Self {
            local,
            p,
            q: alloc.q.clone(),
            sites,
        }
    }

    /// Lower bound on the UAV rate at site `k` as a function of squared distance.
    pub fn rate_lb_sq(&self, k: usize, s: F) -> F {
        let ss = &self.sites[k];
        ss.rate0 - ss.coeff_a * (s - ss.s0)
    }

    pub fn rate_lb(&self, k: usize, u: Point2<F>, site: &GbsSite<F>) -> F {
        self.rate_lb_sq(k, u.dist_sq(site.pos))
    }

    /// Lower bound on `log2(sigma^2 + h p + g q)` at squared distance `s`.
    pub fn total_log_lb_sq(&self, k: usize, s: F) -> F {
        let ss = &self.sites[k];
        ss.total_power0.log2() - ss.coeff_b * (s - ss.s0)
    }

    /// Surrogate GU rate under TIN (convexified lower bound) at squared distance `s`.
    pub fn tin_lb_sq(&self, k: usize, s: F, site: &GbsSite<F>, ch: &ChannelParams<F>, altitude: F) -> F {
        let ss = &self.sites[k];
        let interference = site.noise + gain_at_sq_dist(s, ch, altitude) * self.p;
        (ss.total_power0 / interference).log2() - ss.coeff_b * (s - ss.s0)
    }

    pub fn tin_lb(&self, k: usize, u: Point2<F>, site: &GbsSite<F>, ch: &ChannelParams<F>, altitude: F) -> F {
        self.tin_lb_sq(k, u.dist_sq(site.pos), site, ch, altitude)
    }
}

/// Builds the per-slot surrogates around `local` (waypoints `1..=N`).
pub fn build_surrogate<F: Real>(
    local: &Trajectory<F>,
    allocs: &[SlotAllocation<F>],
    s: &Scenario<F>,
) -> Result<Vec<SurrogateSlot<F>>> {
    if local.len() != allocs.len() + 1 || allocs.len() != s.slots() {
        return Err(Error::DimensionMismatch(format!(
            "{} waypoints, {} allocations, {} slots",
            local.len(),
            allocs.len(),
            s.slots()
        )));
    }
    Ok(local.waypoints()[1..]
        .par_iter()
        .with_min_len(16)
        .zip(allocs.par_iter())
        .map(|(&u, a)| SurrogateSlot::new(u, a, s))
        .collect())
}
