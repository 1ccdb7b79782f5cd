//! Two-phase bandit simulator for Bernoulli bandits whose success
//! probabilities are a logistic function of a linear quality `uᵀz*`.
//!
//! The crate has five layers:
//!
//! - [`link`]: the logistic link, its inverse and derivative, and the
//!   iterated logarithm.
//! - [`schedule`]: exploitation-length schedules `g(l)` and their extended
//!   inverse `g⁻¹(t)`.
//! - [`instance`] / [`env`]: problem instances (finite arm sets and the unit
//!   sphere), a seedable Bernoulli reward stream, and regret traces.
//! - [`policy`]: the two-phase explore/exploit policy plus UCB1 and uniform
//!   baselines.
//! - [`theory`]: every constant appearing in the regret analysis (δ, γ, k₁,
//!   L′, k₂, k₃), closed-form regret bounds, and exact enumeration oracles
//!   used to verify them.
//!
//! [`harness`] wires these together behind a config-file driven experiment
//! runner with CSV emission; the `tpb` binary is a thin shell over it.

pub mod env;
pub mod error;
pub mod harness;
pub mod instance;
pub mod linalg;
pub mod link;
pub mod policy;
pub mod schedule;
pub mod theory;

pub use env::{Phase, RegretTrace, RewardStream, TraceDetail};
pub use error::Error;
pub use instance::{BanditInstance, SphereInstance};
pub use policy::ProbeSet;
pub use schedule::{Schedule, ScheduleKind};
pub use theory::TheoryConstants;
