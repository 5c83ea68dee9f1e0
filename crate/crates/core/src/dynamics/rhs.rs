//! Right-hand sides of the market and controller dynamics.
//!
//! Market (agents run `x`, `ρ`; the operator runs `ε`, `λ`):
//!
//! ```text
//! ẋ = -Qx - c0 - ρ - u      ρ̇ = x - a - ε      ε̇ = ρ - 1λ      λ̇ = 1ᵀε
//! ```
//!
//! Controller (agents run `u`, `π`; the operator runs `ν`, `μ`):
//!
//! ```text
//! u̇ = -Q⁻¹u - Qπ - x - Q⁻¹(c0 + λ_max 1)     π̇ = Qu - 1ν
//! ν̇ = 1ᵀπ + μ                                 μ̇ = [-ν]⁺_μ
//! ```

use crate::market::{conditional_projection, MarketInstance, SocialPriceCap};

use super::state::{ClosedLoopState, Layout};
use super::DynamicsError;

/// A continuous-time system the fixed-step integrator can march.
pub trait Dynamics {
    fn dim(&self) -> usize;

    /// Writes `f(state)` into `out`. Both slices have length [`Dynamics::dim`].
    fn rhs(&self, state: &[f64], out: &mut [f64]);

    /// Index of a component constrained to `[0, ∞)`, clamped after every step.
    fn nonnegative_index(&self) -> Option<usize> {
        None
    }
}

fn check_len(expected: usize, got: usize) -> Result<(), DynamicsError> {
    if expected == got {
        Ok(())
    } else {
        Err(DynamicsError::DimensionMismatch { expected, got })
    }
}

/// Market block `(x, ρ, ε, λ)` with an external adjustment `u`.
fn market_kernel(market: &MarketInstance, state: &[f64], u: Option<&[f64]>, out: &mut [f64]) {
    let n = market.len();
    let l = Layout::new(n);
    let lambda = state[l.lambda()];
    let mut eps_sum = 0.0;
    for (i, agent) in market.agents().iter().enumerate() {
        let x = state[i];
        let rho = state[n + i];
        let eps = state[2 * n + i];
        let ui = u.map_or(0.0, |u| u[i]);
        out[i] = -agent.q * x - agent.c0 - rho - ui;
        out[n + i] = x - agent.a - eps;
        out[2 * n + i] = rho - lambda;
        eps_sum += eps;
    }
    out[l.lambda()] = eps_sum;
}

/// Controller block `(u, π, ν, μ)` written into `out[3N+1..]` of a full state.
fn controller_kernel(market: &MarketInstance, cap: SocialPriceCap, state: &[f64], out: &mut [f64]) {
    let n = market.len();
    let l = Layout::new(n);
    let nu = state[l.nu()];
    let mu = state[l.mu()];
    let lambda_max = cap.value();
    let mut pi_sum = 0.0;
    for (i, agent) in market.agents().iter().enumerate() {
        let x = state[i];
        let u = state[l.u().start + i];
        let pi = state[l.pi().start + i];
        out[l.u().start + i] = -u / agent.q - agent.q * pi - x - (agent.c0 + lambda_max) / agent.q;
        out[l.pi().start + i] = agent.q * u - nu;
        pi_sum += pi;
    }
    out[l.nu()] = pi_sum + mu;
    out[l.mu()] = conditional_projection(-nu, mu);
}

/// Open-loop primal-dual dynamics on `(x, ρ, ε, λ)`, flat length `3N + 1`.
pub fn rhs_open_loop(market: &MarketInstance, state: &[f64]) -> Result<Vec<f64>, DynamicsError> {
    let l = Layout::new(market.len());
    check_len(l.market_dim(), state.len())?;
    let mut out = vec![0.0; l.market_dim()];
    market_kernel(market, state, None, &mut out);
    Ok(out)
}

/// Market dynamics driven by a utility adjustment `u_input`.
pub fn rhs_controlled(market: &MarketInstance, state: &[f64], u_input: &[f64]) -> Result<Vec<f64>, DynamicsError> {
    let l = Layout::new(market.len());
    check_len(l.market_dim(), state.len())?;
    check_len(market.len(), u_input.len())?;
    let mut out = vec![0.0; l.market_dim()];
    market_kernel(market, state, Some(u_input), &mut out);
    Ok(out)
}

/// Rates of the controller states.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerRates {
    pub u: Vec<f64>,
    pub pi: Vec<f64>,
    pub nu: f64,
    pub mu: f64,
}

pub fn rhs_controller(
    market: &MarketInstance,
    state: &ClosedLoopState,
    cap: SocialPriceCap,
) -> Result<ControllerRates, DynamicsError> {
    let n = market.len();
    state.check_dims(n)?;
    if state.mu < 0.0 {
        return Err(DynamicsError::NegativeMu(state.mu));
    }
    let l = Layout::new(n);
    let flat = state.to_vec();
    let mut out = vec![0.0; l.dim()];
    controller_kernel(market, cap, &flat, &mut out);
    Ok(ControllerRates {
        u: out[l.u()].to_vec(),
        pi: out[l.pi()].to_vec(),
        nu: out[l.nu()],
        mu: out[l.mu()],
    })
}

/// Full closed loop: controlled market with `u_input = state.u` plus controller.
pub fn rhs_closed_loop(
    market: &MarketInstance,
    state: &ClosedLoopState,
    cap: SocialPriceCap,
) -> Result<ClosedLoopState, DynamicsError> {
    let n = market.len();
    state.check_dims(n)?;
    if state.mu < 0.0 {
        return Err(DynamicsError::NegativeMu(state.mu));
    }
    let flat = state.to_vec();
    let mut out = vec![0.0; flat.len()];
    ClosedLoopSystem::new(market, cap).rhs(&flat, &mut out);
    ClosedLoopState::from_slice(n, &out)
}

/// Reduced dynamics for an operator that knows `a`: `ẋ = -Qx - c0 - 1λ`,
/// `λ̇ = 1ᵀx - 1ᵀa`, flat length `N + 1`.
pub fn rhs_reduced(market: &MarketInstance, state: &[f64]) -> Result<Vec<f64>, DynamicsError> {
    let n = market.len();
    check_len(n + 1, state.len())?;
    let mut out = vec![0.0; n + 1];
    ReducedSystem::new(market).rhs(state, &mut out);
    Ok(out)
}

pub struct OpenLoopSystem<'a> {
    market: &'a MarketInstance,
}

impl<'a> OpenLoopSystem<'a> {
    pub fn new(market: &'a MarketInstance) -> Self {
        Self { market }
    }
}

impl Dynamics for OpenLoopSystem<'_> {
    fn dim(&self) -> usize {
        Layout::new(self.market.len()).market_dim()
    }

    fn rhs(&self, state: &[f64], out: &mut [f64]) {
        market_kernel(self.market, state, None, out);
    }
}

pub struct ReducedSystem<'a> {
    market: &'a MarketInstance,
}

impl<'a> ReducedSystem<'a> {
    pub fn new(market: &'a MarketInstance) -> Self {
        Self { market }
    }
}

impl Dynamics for ReducedSystem<'_> {
    fn dim(&self) -> usize {
        self.market.len() + 1
    }

    fn rhs(&self, state: &[f64], out: &mut [f64]) {
        let n = self.market.len();
        let lambda = state[n];
        let mut total = 0.0;
        for (i, agent) in self.market.agents().iter().enumerate() {
            out[i] = -agent.q * state[i] - agent.c0 - lambda;
            total += state[i];
        }
        out[n] = total - self.market.sum_a();
    }
}

pub struct ClosedLoopSystem<'a> {
    market: &'a MarketInstance,
    cap: SocialPriceCap,
}

impl<'a> ClosedLoopSystem<'a> {
    pub fn new(market: &'a MarketInstance, cap: SocialPriceCap) -> Self {
        Self { market, cap }
    }
}

impl Dynamics for ClosedLoopSystem<'_> {
    fn dim(&self) -> usize {
        Layout::new(self.market.len()).dim()
    }

    /// Stage values with `μ < 0` (possible inside a multi-stage step) are
    /// treated as lying on the boundary by the projection.
    fn rhs(&self, state: &[f64], out: &mut [f64]) {
        let l = Layout::new(self.market.len());
        market_kernel(self.market, state, Some(&state[l.u()]), out);
        controller_kernel(self.market, self.cap, state, out);
    }

    fn nonnegative_index(&self) -> Option<usize> {
        Some(Layout::new(self.market.len()).mu())
    }
}
