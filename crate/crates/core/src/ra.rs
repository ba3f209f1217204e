//! Per-slot resource allocation for a fixed UAV position.
//!
//! For a given decoding mode the optimum is closed form: IC sites drop their
//! GU to the least power meeting the requirement, TIN sites transmit at full
//! power, and the UAV transmits at the largest power every TIN site tolerates.
//! The slot optimum is the best of the enumerated modes.

use rayon::prelude::*;

use crate::channel::{a2g_gain, gu_rate_ic, uav_rate};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::point::Point2;
use crate::scenario::{GbsSite, Scenario};
use crate::trajectory::Trajectory;

/// Largest site count the exhaustive mode search accepts.
pub const MAX_ENUM_SITES: usize = 16;

/// Which GBSs decode the UAV in a slot. Bit `k` set means site `k` runs IC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DecodingMode {
    bits: u32,
    sites: usize,
}

impl DecodingMode {
    pub fn new(bits: u32, sites: usize) -> Result<Self> {
        if sites == 0 || sites > MAX_ENUM_SITES {
            return Err(Error::TooManySites {
                count: sites,
                limit: MAX_ENUM_SITES,
            });
        }
        if bits == 0 || bits >> sites != 0 {
            return Err(Error::Internal(format!("invalid decoding mode {bits:#b} for {sites} sites")));
        }
        Ok(Self { bits, sites })
    }

    pub fn from_taus(taus: &[bool]) -> Result<Self> {
        let bits = taus.iter().enumerate().fold(0u32, |acc, (k, &t)| acc | ((t as u32) << k));
        Self::new(bits, taus.len())
    }

    pub fn all_ic(sites: usize) -> Self {
        Self {
            bits: (1u32 << sites) - 1,
            sites,
        }
    }

    pub fn single(site: usize, sites: usize) -> Self {
        Self { bits: 1 << site, sites }
    }

    pub fn bitmask(&self) -> u32 {
        self.bits
    }

    pub fn num_sites(&self) -> usize {
        self.sites
    }

    pub fn is_ic(&self, k: usize) -> bool {
        self.bits & (1 << k) != 0
    }

    pub fn ic_count(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn ic_sites(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.sites).filter(|&k| self.is_ic(k))
    }

    pub fn tin_sites(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.sites).filter(|&k| !self.is_ic(k))
    }

    pub fn taus(&self) -> Vec<bool> {
        (0..self.sites).map(|k| self.is_ic(k)).collect()
    }

    /// Orders modes like the tuple `(tau_1, ..., tau_K)` compared lexicographically.
    fn lex_key(&self) -> u32 {
        (0..self.sites).fold(0, |acc, k| (acc << 1) | self.is_ic(k) as u32)
    }
}

/// Restriction on the decoding modes the slot search may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModeConstraint {
    /// Any non-empty IC set.
    #[default]
    Any,
    /// Exactly one decoding GBS.
    Egoistic,
    /// Every GBS decodes.
    Altruistic,
}

impl ModeConstraint {
    pub fn modes(self, sites: usize) -> Result<Vec<DecodingMode>> {
        if sites == 0 || sites > MAX_ENUM_SITES {
            return Err(Error::TooManySites {
                count: sites,
                limit: MAX_ENUM_SITES,
            });
        }
        Ok(match self {
            ModeConstraint::Any => (1..(1u32 << sites)).map(|bits| DecodingMode { bits, sites }).collect(),
            ModeConstraint::Egoistic => (0..sites).map(|k| DecodingMode::single(k, sites)).collect(),
            ModeConstraint::Altruistic => vec![DecodingMode::all_ic(sites)],
        })
    }
}

/// Decision for one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotAllocation<F> {
    pub mode: DecodingMode,
    /// GU powers, one per site (W).
    pub q: Vec<F>,
    /// UAV power (W).
    pub p: F,
    /// UAV rate (bps/Hz).
    pub r: F,
}

/// `2^gamma - 1`, accurate for small requirements.
fn sinr_target<F: Real>(gamma: F) -> F {
    (gamma * F::LN_2()).exp_m1()
}

fn within_ic_capacity<F: Real>(site: &GbsSite<F>) -> bool {
    gu_rate_ic(site.max_gu_power, site) >= site.min_gu_rate - F::feas_tol()
}

/// Least GU power meeting the site's requirement once the UAV is cancelled.
pub fn gu_power_ic<F: Real>(k: usize, site: &GbsSite<F>) -> Result<F> {
    if site.min_gu_rate <= F::zero() {
        return Ok(F::zero());
    }
    let q = sinr_target(site.min_gu_rate) * site.noise / site.gain;
    if q <= site.max_gu_power {
        Ok(q)
    } else if within_ic_capacity(site) {
        // requirement sits on the capacity boundary up to rounding
        Ok(site.max_gu_power)
    } else {
        Err(Error::InfeasibleSite {
            site: k,
            required: q.as_f64(),
            max: site.max_gu_power.as_f64(),
        })
    }
}

/// Largest UAV power that keeps every TIN site's GU at its requirement with full GU power.
pub fn uav_power_cap<F: Real>(mode: DecodingMode, u: Point2<F>, s: &Scenario<F>) -> Result<F> {
    let mut cap = s.uav().max_power;
    for k in mode.tin_sites() {
        let site = s.site(k);
        if site.min_gu_rate <= F::zero() {
            continue;
        }
        let h = a2g_gain(u, site, s.channel(), s.uav().altitude);
        let headroom = site.gain * site.max_gu_power / sinr_target(site.min_gu_rate) - site.noise;
        let bound = if headroom < F::zero() {
            if within_ic_capacity(site) {
                F::zero()
            } else {
                return Err(Error::Internal(format!(
                    "site {}: GU cannot meet {} bps/Hz even without UAV interference",
                    k + 1,
                    site.min_gu_rate
                )));
            }
        } else if h > F::zero() {
            headroom / h
        } else {
            F::infinity()
        };
        cap = cap.min(bound);
    }
    Ok(cap)
}

/// Closed-form optimum for a fixed decoding mode.
pub fn solve_mode<F: Real>(mode: DecodingMode, u: Point2<F>, s: &Scenario<F>) -> Result<SlotAllocation<F>> {
    let mut q = Vec::with_capacity(s.num_sites());
    for (k, site) in s.sites().iter().enumerate() {
        q.push(if mode.is_ic(k) {
            gu_power_ic(k, site)?
        } else {
            site.max_gu_power
        });
    }
    let p = uav_power_cap(mode, u, s)?;
    let ch = s.channel();
    let alt = s.uav().altitude;
    let r = mode
        .ic_sites()
        .map(|k| uav_rate(p, u, q[k], s.site(k), ch, alt))
        .fold(F::infinity(), F::min)
        .max(F::zero());
    Ok(SlotAllocation { mode, q, p, r })
}

fn prefer<F: Real>(cand: &SlotAllocation<F>, best: &SlotAllocation<F>) -> bool {
    if cand.r > best.r + F::tie_tol() {
        return true;
    }
    if cand.r < best.r - F::tie_tol() {
        return false;
    }
    (cand.mode.ic_count(), cand.mode.lex_key()) < (best.mode.ic_count(), best.mode.lex_key())
}

/// Best allocation over every admissible decoding mode at position `u`.
pub fn solve_slot<F: Real>(u: Point2<F>, s: &Scenario<F>, constraint: ModeConstraint) -> Result<SlotAllocation<F>> {
    let mut best: Option<SlotAllocation<F>> = None;
    let mut first_err = None;
    for mode in constraint.modes(s.num_sites())? {
        match solve_mode(mode, u, s) {
            Ok(a) => {
                if best.as_ref().is_none_or(|b| prefer(&a, b)) {
                    best = Some(a);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or(match first_err {
        Some(e @ Error::InfeasibleSite { .. }) => e,
        _ => Error::InfeasibleSlot { slot: 0 },
    })
}

/// Allocation for every slot of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct RaSolution<F> {
    /// Slot `n` (1-based in the model) is stored at index `n - 1`.
    pub allocations: Vec<SlotAllocation<F>>,
    pub throughput: F,
}

pub fn average_rate<F: Real>(allocs: &[SlotAllocation<F>]) -> F {
    if allocs.is_empty() {
        return F::zero();
    }
    allocs.iter().fold(F::zero(), |acc, a| acc + a.r) / F::of_usize(allocs.len())
}

/// Globally optimal allocation along a trajectory; slots are independent.
pub fn solve_resource_allocation<F: Real>(
    traj: &Trajectory<F>,
    s: &Scenario<F>,
    constraint: ModeConstraint,
) -> Result<RaSolution<F>> {
    let n = s.slots();
    if traj.len() != n + 1 {
        return Err(Error::DimensionMismatch(format!(
            "trajectory has {} waypoints, scenario needs {}",
            traj.len(),
            n + 1
        )));
    }
    let allocations = traj.waypoints()[1..]
        .par_iter()
        .with_min_len(16)
        .enumerate()
        .map(|(i, &u)| {
            solve_slot(u, s, constraint).map_err(|e| match e {
                Error::InfeasibleSlot { .. } => Error::InfeasibleSlot { slot: i + 1 },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let throughput = average_rate(&allocations);
    Ok(RaSolution { allocations, throughput })
}
