//! Continuous-time market dynamics, the price-capping controller and the
//! tools to simulate and certify them.

mod fixed_point;
mod integrate;
mod lyapunov;
mod rhs;
mod state;

use thiserror::Error;

pub use fixed_point::{assemble_equilibrium, open_loop_equilibrium, reduced_equilibrium};
pub use integrate::{integrate, IntegrationSettings, Method, Trajectory, DIVERGENCE_BOUND};
pub use lyapunov::{
    closed_loop_matrix, convergence_report, dissipation_factor, lyapunov_value, max_real_eigenvalue, open_loop_matrix,
    spectral_abscissa, stability_certificate, ConvergenceReport, StabilityCertificate, EIGENVALUE_TOL,
    FACTORIZATION_TOL,
};
pub use rhs::{
    rhs_closed_loop, rhs_controlled, rhs_controller, rhs_open_loop, rhs_reduced, ClosedLoopSystem, ControllerRates,
    Dynamics, OpenLoopSystem, ReducedSystem,
};
pub use state::{ClosedLoopState, Layout};

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("controller state mu must be nonnegative, got {0}")]
    NegativeMu(f64),
    #[error("invalid integration settings: {0}")]
    InvalidSettings(String),
    #[error("state diverged at t = {time}")]
    NonfiniteState { time: f64, partial: Box<Trajectory> },
}
