//! Energy-sharing market equilibria with a socially acceptable price cap.
//!
//! A population of price-taking agents with linear-quadratic utilities
//! `f_i(x) = -q_i x^2 / 2 - (c0_i + u_i) x` shares renewable generation `a_i`.
//! The crate computes
//!
//! - the competitive equilibrium (CE), where every agent is at its best
//!   response and supply matches demand,
//! - the optimal socially acceptable equilibrium (SCE), the CE reached with the
//!   smallest utility adjustment `u` that keeps the price at or below a cap,
//! - the decentralized primal-dual market dynamics and the dynamic feedback
//!   controller that steers them to the SCE, with a fixed-step projected
//!   integrator and Lyapunov-based diagnostics.
//!
//! Modules map onto the workflow: [`market`] holds validated data and the
//! scalar building blocks, [`equilibrium`] the closed-form solvers and their
//! independent checks, [`dynamics`] the continuous-time models, and
//! [`scenario`] configuration, reports and the CLI workflows.

pub mod dynamics;
pub mod equilibrium;
pub mod market;
pub mod scenario;

pub use equilibrium::{CeSolution, KktResidualReport, ModifiedPrimalSolution, SceSolution};
pub use market::{AgentParams, MarketError, MarketInstance, SocialPriceCap};
