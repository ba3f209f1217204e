//! Offline planner for a cellular-connected UAV that shares uplink spectrum
//! with ground users.
//!
//! Each slot the UAV picks which base stations decode it (and cancel it before
//! decoding their own user) versus which treat it as noise, together with its
//! transmit power, the users' powers and its rate. The trajectory is shaped by
//! successive convex approximation, alternating with the closed-form
//! per-slot allocation until the mission-average throughput stops improving.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the precision for the common case.

pub mod benchmarks;
pub mod channel;
pub mod error;
pub mod harness;
pub mod num;
pub mod planner;
pub mod point;
pub mod ra;
pub mod sca;
pub mod scenario;
pub mod trajectory;

pub use benchmarks::{HoverBound, Scheme, SchemeConfig};
pub use error::{Error, Result};
pub use num::Real;
pub use planner::{evaluate_plan, solve, ConvergenceTrace, Plan, PlannerConfig, ResidualReport};
pub use point::Point2;
pub use ra::{DecodingMode, ModeConstraint, SlotAllocation};
pub use sca::{ScaConfig, ScaResult};
pub use scenario::{check_feasibility, parse_scenario, FeasibilityReport, Scenario};
pub use trajectory::Trajectory;

pub type Scenario64 = Scenario<f64>;
pub type Scenario32 = Scenario<f32>;
pub type Trajectory64 = Trajectory<f64>;
pub type Trajectory32 = Trajectory<f32>;
pub type Plan64 = Plan<f64>;
pub type Plan32 = Plan<f32>;
pub type SlotAllocation64 = SlotAllocation<f64>;
pub type SlotAllocation32 = SlotAllocation<f32>;
pub type PlannerConfig64 = PlannerConfig<f64>;
pub type PlannerConfig32 = PlannerConfig<f32>;
pub type Point64 = Point2<f64>;
pub type Point32 = Point2<f32>;
