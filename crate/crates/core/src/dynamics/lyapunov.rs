//! Lyapunov function, the stability certificate of the closed loop and
//! convergence diagnostics for simulated trajectories.
//!
//! Along closed-loop solutions `V = ½‖s - s̄‖²` satisfies
//! `V̇ <= s̃ᵀ X s̃ = s̃ᵀ X_sym s̃` where `X` is the Jacobian of the loop with the
//! projection inactive, and `X_sym = -BᵀB` for
//! `B = [Q^½, 0, 0, 0, Q^-½, 0, 0, 0]`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::market::MarketInstance;

use super::integrate::{sup_distance, Trajectory};
use super::state::Layout;
use super::DynamicsError;

/// Largest admissible eigenvalue of `X_sym`.
pub const EIGENVALUE_TOL: f64 = 1e-10;
/// Largest admissible entry of `X_sym + BᵀB`.
pub const FACTORIZATION_TOL: f64 = 1e-12;

/// `V = ½‖state - reference‖²`.
pub fn lyapunov_value(state: &[f64], reference: &[f64]) -> Result<f64, DynamicsError> {
    if state.len() != reference.len() {
        return Err(DynamicsError::DimensionMismatch {
            expected: reference.len(),
            got: state.len(),
        });
    }
    Ok(0.5 * state.iter().zip(reference).map(|(s, r)| (s - r) * (s - r)).sum::<f64>())
}

/// Linear part `X` of the closed loop, with `μ̇ = -ν` (projection inactive).
pub fn closed_loop_matrix(market: &MarketInstance) -> DMatrix<f64> {
    let n = market.len();
    let l = Layout::new(n);
    let mut x = DMatrix::zeros(l.dim(), l.dim());
    for (i, agent) in market.agents().iter().enumerate() {
        let (xi, ri, ei) = (l.x().start + i, l.rho().start + i, l.eps().start + i);
        let (ui, pi) = (l.u().start + i, l.pi().start + i);
        x[(xi, xi)] = -agent.q;
        x[(xi, ri)] = -1.0;
        x[(xi, ui)] = -1.0;
        x[(ri, xi)] = 1.0;
        x[(ri, ei)] = -1.0;
        x[(ei, ri)] = 1.0;
        x[(ei, l.lambda())] = -1.0;
        x[(l.lambda(), ei)] = 1.0;
        x[(ui, xi)] = -1.0;
        x[(ui, ui)] = -1.0 / agent.q;
        x[(ui, pi)] = -agent.q;
        x[(pi, ui)] = agent.q;
        x[(pi, l.nu())] = -1.0;
        x[(l.nu(), pi)] = 1.0;
    }
    x[(l.nu(), l.mu())] = 1.0;
    x[(l.mu(), l.nu())] = -1.0;
    x
}

/// Jacobian of the open-loop market dynamics on `(x, ρ, ε, λ)`.
pub fn open_loop_matrix(market: &MarketInstance) -> DMatrix<f64> {
    let n = market.len();
    let l = Layout::new(n);
    let full = closed_loop_matrix(market);
    full.view((0, 0), (l.market_dim(), l.market_dim())).into_owned()
}

/// Largest real part among the nonzero eigenvalues of `matrix`.
pub fn max_real_eigenvalue(matrix: &DMatrix<f64>) -> f64 {
    matrix
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.norm() > 1e-9)
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `B = [Q^½, 0, 0, 0, Q^-½, 0, 0, 0]`, an `N × (5N+3)` matrix.
pub fn dissipation_factor(market: &MarketInstance) -> DMatrix<f64> {
    let n = market.len();
    let l = Layout::new(n);
    let mut b = DMatrix::zeros(n, l.dim());
    for (i, agent) in market.agents().iter().enumerate() {
        let root = agent.q.sqrt();
        b[(i, l.x().start + i)] = root;
        b[(i, l.u().start + i)] = 1.0 / root;
    }
    b
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityCertificate {
    pub max_eigenvalue_x_sym: f64,
    /// `‖X_sym + BᵀB‖∞` (largest absolute entry).
    pub factorization_residual: f64,
    /// `V̇ <= s̃ᵀ X_sym s̃ <= 0` holds, i.e. the largest eigenvalue is within tolerance.
    pub lyapunov_monotone: bool,
    /// Worst growth rate of `V` per unit `‖s̃‖²`, `max(0, λ_max(X_sym))`.
    pub worst_increase: f64,
}

impl StabilityCertificate {
    pub fn holds(&self) -> bool {
        self.lyapunov_monotone && self.factorization_residual <= FACTORIZATION_TOL
    }
}

pub fn stability_certificate(market: &MarketInstance) -> StabilityCertificate {
    let x = closed_loop_matrix(market);
    let x_sym = (&x + x.transpose()) * 0.5;
    let b = dissipation_factor(market);
    let residual = (&x_sym + b.transpose() * &b).amax();
    let eig = SymmetricEigen::new(x_sym);
    let max_eig = eig.eigenvalues.max();
    StabilityCertificate {
        max_eigenvalue_x_sym: max_eig,
        factorization_residual: residual,
        lyapunov_monotone: max_eig <= EIGENVALUE_TOL,
        worst_increase: max_eig.max(0.0),
    }
}

/// Largest real part among the eigenvalues of the closed-loop linearization,
/// with the projection either inactive (`μ > 0`) or frozen at the boundary.
///
/// Gives the asymptotic decay rate of the loop near its equilibrium and hence
/// the horizon a simulation needs.
pub fn spectral_abscissa(market: &MarketInstance, projection_active: bool) -> f64 {
    let mut x = closed_loop_matrix(market);
    if !projection_active {
        let l = Layout::new(market.len());
        x[(l.mu(), l.nu())] = 0.0;
    }
    max_real_eigenvalue(&x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub converged: bool,
    /// First recorded time with sup-norm error within tolerance.
    pub first_converged_time: Option<f64>,
    pub final_error: f64,
    pub tolerance: f64,
    pub initial_lyapunov: f64,
    pub final_lyapunov: f64,
    pub worst_lyapunov_increase: f64,
    /// `max(0, -min μ(t))` over the recorded samples.
    pub mu_violation: f64,
}

pub fn convergence_report(trajectory: &Trajectory, reference: &[f64], tolerance: f64) -> ConvergenceReport {
    assert!(!trajectory.is_empty(), "convergence report needs a nonempty trajectory");
    let errors: Vec<f64> = trajectory.states.iter().map(|s| sup_distance(s, reference)).collect();
    let values: Vec<f64> = trajectory
        .states
        .iter()
        .map(|s| lyapunov_value(s, reference).unwrap_or(f64::INFINITY))
        .collect();
    let first_converged_time = errors.iter().position(|e| *e <= tolerance).map(|i| trajectory.times[i]);
    let final_error = *errors.last().unwrap();
    let recorded_increase = values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let worst_lyapunov_increase = recorded_increase.max(trajectory.max_step_lyapunov_increase).max(0.0);
    let mu_violation = trajectory.nonnegative_index.map_or(0.0, |i| {
        trajectory
            .states
            .iter()
            .filter(|s| s[i] < 0.0)
            .fold(0.0_f64, |m, s| m.max(-s[i]))
    });
    ConvergenceReport {
        converged: final_error <= tolerance,
        first_converged_time,
        final_error,
        tolerance,
        initial_lyapunov: values[0],
        final_lyapunov: *values.last().unwrap(),
        worst_lyapunov_increase,
        mu_violation,
    }
}
