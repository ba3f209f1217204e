//! Line-of-sight A2G gains and the three achievable-rate expressions.

use crate::num::{log2_1p, Real};
use crate::point::Point2;
use crate::scenario::{ChannelParams, GbsSite};

/// UAV-to-GBS link at one position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkState<F> {
    pub uav_pos: Point2<F>,
    pub site: usize,
    /// 3D distance in meters, never below the altitude.
    pub distance: F,
    pub gain: F,
}

impl<F: Real> LinkState<F> {
    pub fn new(uav_pos: Point2<F>, site: usize, gbs: &GbsSite<F>, ch: &ChannelParams<F>, altitude: F) -> Self {
        let s = uav_pos.dist_sq(gbs.pos);
        Self {
            uav_pos,
            site,
            distance: (altitude * altitude + s).sqrt(),
            gain: gain_at_sq_dist(s, ch, altitude),
        }
    }
}

/// Gain as a function of the squared horizontal distance `s`.
#[inline]
pub fn gain_at_sq_dist<F: Real>(s: F, ch: &ChannelParams<F>, altitude: F) -> F {
    ch.beta0 * (altitude * altitude + s).powf(-ch.alpha / F::lit(2.0))
}

#[inline]
pub fn a2g_gain<F: Real>(u: Point2<F>, site: &GbsSite<F>, ch: &ChannelParams<F>, altitude: F) -> F {
    gain_at_sq_dist(u.dist_sq(site.pos), ch, altitude)
}

/// UAV rate decoded at `site` with the GU transmitting at `q`.
#[inline]
pub fn uav_rate<F: Real>(p: F, u: Point2<F>, q: F, site: &GbsSite<F>, ch: &ChannelParams<F>, altitude: F) -> F {
    uav_rate_with_gain(p, a2g_gain(u, site, ch, altitude), q, site)
}

#[inline]
pub fn uav_rate_with_gain<F: Real>(p: F, gain: F, q: F, site: &GbsSite<F>) -> F {
    log2_1p(gain * p / (site.noise + q * site.gain))
}

/// GU rate after the UAV's signal has been decoded and cancelled.
#[inline]
pub fn gu_rate_ic<F: Real>(q: F, site: &GbsSite<F>) -> F {
    log2_1p(site.gain * q / site.noise)
}

/// GU rate with the UAV's signal treated as noise.
#[inline]
pub fn gu_rate_tin<F: Real>(p: F, u: Point2<F>, q: F, site: &GbsSite<F>, ch: &ChannelParams<F>, altitude: F) -> F {
    gu_rate_tin_with_gain(p, a2g_gain(u, site, ch, altitude), q, site)
}

#[inline]
pub fn gu_rate_tin_with_gain<F: Real>(p: F, gain: F, q: F, site: &GbsSite<F>) -> F {
    log2_1p(site.gain * q / (site.noise + gain * p))
}
