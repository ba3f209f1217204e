//! Problem instances: parsing, validation and the global feasibility check.
//!
//! Everything inside a [`Scenario`] is linear (watts, dimensionless gains,
//! meters, seconds, bps/Hz). Decibel quantities only exist in the TOML
//! document handled here.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel;
use crate::error::{Error, Result};
use crate::num::{db_to_linear, dbm_to_watts, linear_to_db, watts_to_dbm, Real};
use crate::point::Point2;

/// Scenario shipped with the binary (`dump-default-scenario`).
pub const DEFAULT_SCENARIO_TOML: &str = include_str!("../scenarios/default.toml");

/// Mission battery limit assumed when a document omits `t_max_s`.
pub const DEFAULT_T_MAX_S: f64 = 1800.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams<F> {
    /// A2G gain at 1 m.
    pub beta0: F,
    /// A2G pathloss exponent.
    pub alpha: F,
    /// Ground gain at 1 m.
    pub theta0: F,
    /// Ground pathloss exponent.
    pub epsilon: F,
}

/// How the GBS-to-GU channel was specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GuLink<F> {
    /// Distance in meters; gain follows `theta0 * d^-epsilon`.
    Distance(F),
    /// Linear gain given directly.
    Gain(F),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbsSite<F> {
    pub pos: Point2<F>,
    pub link: GuLink<F>,
    /// Linear GU channel gain, filled in by validation.
    pub gain: F,
    pub noise: F,
    pub max_gu_power: F,
    pub min_gu_rate: F,
}

impl<F: Real> GbsSite<F> {
    pub fn new(pos: Point2<F>, link: GuLink<F>, noise: F, max_gu_power: F, min_gu_rate: F) -> Self {
        let gain = match link {
            GuLink::Gain(g) => g,
            GuLink::Distance(_) => F::nan(),
        };
        Self {
            pos,
            link,
            gain,
            noise,
            max_gu_power,
            min_gu_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UavParams<F> {
    pub altitude: F,
    pub v_max: F,
    pub max_power: F,
    pub u_init: Point2<F>,
    pub u_final: Point2<F>,
    pub mission_t: F,
    pub slots: usize,
    pub t_max: F,
}

impl<F: Real> UavParams<F> {
    pub fn slot_len(&self) -> F {
        self.mission_t / F::of_usize(self.slots)
    }

    /// Longest horizontal hop between consecutive waypoints.
    pub fn max_step(&self) -> F {
        self.v_max * self.slot_len()
    }

    /// Shortest mission duration that still lets the UAV fly straight from start to end.
    pub fn min_straight_time(&self) -> F {
        self.u_init.dist(self.u_final) / self.v_max
    }
}

/// Validated, immutable problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<F> {
    channel: ChannelParams<F>,
    sites: Vec<GbsSite<F>>,
    uav: UavParams<F>,
}

impl<F: Real> Scenario<F> {
    pub fn new(channel: ChannelParams<F>, sites: Vec<GbsSite<F>>, uav: UavParams<F>) -> Result<Self> {
        let mut s = Self { channel, sites, uav };
        s.validate()?;
        Ok(s)
    }

    pub fn channel(&self) -> &ChannelParams<F> {
        &self.channel
    }

    pub fn sites(&self) -> &[GbsSite<F>] {
        &self.sites
    }

    pub fn site(&self, k: usize) -> &GbsSite<F> {
        &self.sites[k]
    }

    pub fn uav(&self) -> &UavParams<F> {
        &self.uav
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn slots(&self) -> usize {
        self.uav.slots
    }

    pub fn with_mission_time(&self, t: F) -> Result<Self> {
        let mut uav = self.uav.clone();
        uav.mission_t = t;
        Self::new(self.channel, self.sites.clone(), uav)
    }

    pub fn with_gamma_all(&self, gamma: F) -> Result<Self> {
        let mut sites = self.sites.clone();
        for s in &mut sites {
            s.min_gu_rate = gamma;
        }
        Self::new(self.channel, sites, self.uav.clone())
    }

    pub fn with_slots(&self, n: usize) -> Result<Self> {
        let mut uav = self.uav.clone();
        uav.slots = n;
        Self::new(self.channel, self.sites.clone(), uav)
    }

    /// The embedded default instance.
    pub fn default_scenario() -> Self {
        parse_scenario(DEFAULT_SCENARIO_TOML).expect("embedded default scenario is valid")
    }

    fn validate(&mut self) -> Result<()> {
        let positive = |path: &str, v: F| -> Result<()> {
            if v.is_finite() && v > F::zero() {
                Ok(())
            } else {
                Err(Error::config(path, format!("must be positive and finite, got {v}")))
            }
        };
        let finite = |path: &str, v: F| -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(path, "must be finite"))
            }
        };

        let ch = &self.channel;
        positive("channel.beta0_db", ch.beta0)?;
        positive("channel.theta0_db", ch.theta0)?;
        positive("channel.epsilon", ch.epsilon)?;
        finite("channel.alpha", ch.alpha)?;
        if ch.alpha < F::lit(2.0) {
            return Err(Error::config("channel.alpha", format!("pathloss exponent must be >= 2, got {}", ch.alpha)));
        }

        let u = &self.uav;
        positive("uav.altitude_m", u.altitude)?;
        positive("uav.v_max_mps", u.v_max)?;
        positive("uav.p_max_dbm", u.max_power)?;
        positive("uav.T_s", u.mission_t)?;
        positive("uav.t_max_s", u.t_max)?;
        for (path, p) in [("uav.u_init", u.u_init), ("uav.u_final", u.u_final)] {
            finite(path, p.x)?;
            finite(path, p.y)?;
        }
        if u.slots < 1 {
            return Err(Error::config("uav.N", "need at least one slot"));
        }
        if u.mission_t > u.t_max {
            return Err(Error::config(
                "uav.T_s",
                format!("mission duration {} exceeds battery lifetime t_max_s = {}", u.mission_t, u.t_max),
            ));
        }

        if self.sites.is_empty() {
            return Err(Error::config("sites", "need at least one site"));
        }
        let (theta0, eps) = (ch.theta0, ch.epsilon);
        for (k, s) in self.sites.iter_mut().enumerate() {
            let at = |field: &str| format!("sites[{k}].{field}");
            finite(&at("pos"), s.pos.x)?;
            finite(&at("pos"), s.pos.y)?;
            positive(&at("sigma2_dbm"), s.noise)?;
            positive(&at("q_max_dbm"), s.max_gu_power)?;
            finite(&at("gamma_bpshz"), s.min_gu_rate)?;
            if s.min_gu_rate < F::zero() {
                return Err(Error::config(at("gamma_bpshz"), "rate requirement must be >= 0"));
            }
            s.gain = match s.link {
                GuLink::Distance(d) => {
                    positive(&at("theta_m"), d)?;
                    theta0 * d.powf(-eps)
                }
                GuLink::Gain(g) => {
                    positive(&at("g_linear"), g)?;
                    g
                }
            };
        }
        Ok(())
    }
}

/// Outcome of the sufficient feasibility test for the full planning problem.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport<F> {
    pub feasible: bool,
    /// Straight-line distance from start to end fits in `v_max * T`.
    pub reach_ok: bool,
    /// GU rate under IC at full GU power, per site.
    pub ic_rate_at_max: Vec<F>,
    /// Minimum of `ic_rate_at_max` over sites.
    pub gamma_max: F,
    /// Sites whose requirement exceeds their IC rate at full power.
    pub failing_sites: Vec<usize>,
}

impl<F: Real> FeasibilityReport<F> {
    pub fn describe_failure(&self, s: &Scenario<F>) -> Option<String> {
        if self.feasible {
            return None;
        }
        let mut parts = Vec::new();
        if !self.reach_ok {
            let u = s.uav();
            parts.push(format!(
                "endpoints are {:.3} m apart but v_max*T = {:.3} m",
                u.u_init.dist(u.u_final),
                u.v_max * u.mission_t
            ));
        }
        for &k in &self.failing_sites {
            parts.push(format!(
                "site {}: IC rate at Q_k is {:.6} bps/Hz < Gamma_k = {}",
                k + 1,
                self.ic_rate_at_max[k],
                s.site(k).min_gu_rate
            ));
        }
        Some(parts.join("; "))
    }
}

/// Checks the reachability and GU-rate conditions that together guarantee a solution.
///
/// The test is sufficient only; no claim is made that failing it rules out
/// every solution.
pub fn check_feasibility<F: Real>(s: &Scenario<F>) -> FeasibilityReport<F> {
    let u = s.uav();
    let reach_ok = u.u_init.dist(u.u_final) <= u.v_max * u.mission_t;
    let ic_rate_at_max: Vec<F> = s
        .sites()
        .iter()
        .map(|site| channel::gu_rate_ic(site.max_gu_power, site))
        .collect();
    let gamma_max = ic_rate_at_max.iter().copied().fold(F::infinity(), F::min);
    let failing_sites: Vec<usize> = s
        .sites()
        .iter()
        .zip(&ic_rate_at_max)
        .enumerate()
        .filter(|(_, (site, &rate))| rate < site.min_gu_rate - F::feas_tol())
        .map(|(k, _)| k)
        .collect();
    FeasibilityReport {
        feasible: reach_ok && failing_sites.is_empty(),
        reach_ok,
        ic_rate_at_max,
        gamma_max,
        failing_sites,
    }
}

/// Draws `count` positions uniformly in the axis-aligned box `[lo, hi]`.
pub fn uniform_site_positions<F: Real, R: Rng + ?Sized>(
    rng: &mut R,
    count: usize,
    lo: Point2<F>,
    hi: Point2<F>,
) -> Vec<Point2<F>> {
    (0..count)
        .map(|_| {
            let tx = F::lit(rng.gen::<f64>());
            let ty = F::lit(rng.gen::<f64>());
            Point2::new(lo.x + (hi.x - lo.x) * tx, lo.y + (hi.y - lo.y) * ty)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// TOML document

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    channel: ChannelDoc,
    uav: UavDoc,
    sites: Vec<SiteDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelDoc {
    beta0_db: f64,
    alpha: f64,
    theta0_db: f64,
    epsilon: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UavDoc {
    altitude_m: f64,
    v_max_mps: f64,
    p_max_dbm: f64,
    u_init: [f64; 2],
    u_final: [f64; 2],
    #[serde(rename = "T_s")]
    mission_t_s: f64,
    #[serde(rename = "N")]
    slots: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t_max_s: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SiteDoc {
    pos: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g_linear: Option<f64>,
    sigma2_dbm: f64,
    q_max_dbm: f64,
    gamma_bpshz: f64,
}

fn pt<F: Real>(p: [f64; 2]) -> Point2<F> {
    Point2::new(F::lit(p[0]), F::lit(p[1]))
}

fn arr<F: Real>(p: Point2<F>) -> [f64; 2] {
    [p.x.as_f64(), p.y.as_f64()]
}

/// Parses and validates a TOML scenario document.
pub fn parse_scenario<F: Real>(text: &str) -> Result<Scenario<F>> {
    let doc: ScenarioDoc = toml::from_str(text).map_err(|e| Error::config("<document>", e.message().to_string()))?;

    let ch = ChannelParams {
        beta0: F::lit(db_to_linear(doc.channel.beta0_db)),
        alpha: F::lit(doc.channel.alpha),
        theta0: F::lit(db_to_linear(doc.channel.theta0_db)),
        epsilon: F::lit(doc.channel.epsilon),
    };

    if doc.uav.slots < 1 {
        return Err(Error::config("uav.N", format!("need at least one slot, got {}", doc.uav.slots)));
    }
    let uav = UavParams {
        altitude: F::lit(doc.uav.altitude_m),
        v_max: F::lit(doc.uav.v_max_mps),
        max_power: F::lit(dbm_to_watts(doc.uav.p_max_dbm)),
        u_init: pt(doc.uav.u_init),
        u_final: pt(doc.uav.u_final),
        mission_t: F::lit(doc.uav.mission_t_s),
        slots: doc.uav.slots as usize,
        t_max: F::lit(doc.uav.t_max_s.unwrap_or(DEFAULT_T_MAX_S)),
    };

    let mut sites = Vec::with_capacity(doc.sites.len());
    for (k, sd) in doc.sites.iter().enumerate() {
        let link = match (sd.theta_m, sd.g_linear) {
            (Some(d), None) => GuLink::Distance(F::lit(d)),
            (None, Some(g)) => GuLink::Gain(F::lit(g)),
            (Some(_), Some(_)) => {
                return Err(Error::config(format!("sites[{k}]"), "give either theta_m or g_linear, not both"))
            }
            (None, None) => return Err(Error::config(format!("sites[{k}]"), "missing theta_m or g_linear")),
        };
        sites.push(GbsSite::new(
            pt(sd.pos),
            link,
            F::lit(dbm_to_watts(sd.sigma2_dbm)),
            F::lit(dbm_to_watts(sd.q_max_dbm)),
            F::lit(sd.gamma_bpshz),
        ));
    }
    Scenario::new(ch, sites, uav)
}

/// Serializes back to the TOML schema accepted by [`parse_scenario`].
pub fn scenario_to_toml<F: Real>(s: &Scenario<F>) -> String {
    let ch = s.channel();
    let u = s.uav();
    let doc = ScenarioDoc {
        channel: ChannelDoc {
            beta0_db: linear_to_db(ch.beta0.as_f64()),
            alpha: ch.alpha.as_f64(),
            theta0_db: linear_to_db(ch.theta0.as_f64()),
            epsilon: ch.epsilon.as_f64(),
        },
        uav: UavDoc {
            altitude_m: u.altitude.as_f64(),
            v_max_mps: u.v_max.as_f64(),
            p_max_dbm: watts_to_dbm(u.max_power.as_f64()),
            u_init: arr(u.u_init),
            u_final: arr(u.u_final),
            mission_t_s: u.mission_t.as_f64(),
            slots: u.slots as i64,
            t_max_s: Some(u.t_max.as_f64()),
        },
        sites: s
            .sites()
            .iter()
            .map(|site| {
                let (theta_m, g_linear) = match site.link {
                    GuLink::Distance(d) => (Some(d.as_f64()), None),
                    GuLink::Gain(g) => (None, Some(g.as_f64())),
                };
                SiteDoc {
                    pos: arr(site.pos),
                    theta_m,
                    g_linear,
                    sigma2_dbm: watts_to_dbm(site.noise.as_f64()),
                    q_max_dbm: watts_to_dbm(site.max_gu_power.as_f64()),
                    gamma_bpshz: site.min_gu_rate.as_f64(),
                }
            })
            .collect(),
    };
    toml::to_string(&doc).expect("scenario document serializes")
}
