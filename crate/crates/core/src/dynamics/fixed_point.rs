//! Equilibria of the dynamics, assembled from the closed-form solutions.

use crate::equilibrium::{solve_ce, solve_sce};
use crate::market::{MarketInstance, SocialPriceCap};

use super::state::ClosedLoopState;

/// The unique closed-loop equilibrium: `x̄ = x*`, `λ̄ = λ*`, `ū = u*`,
/// `ρ̄ = 1λ*`, `ε̄ = x* - a`, `π̄ = Q⁻²1(λ* - λ_max)`, `ν̄ = ν*`,
/// `μ̄ = (1ᵀQ⁻²1)(λ_max - λ*)`.
pub fn assemble_equilibrium(market: &MarketInstance, cap: SocialPriceCap) -> ClosedLoopState {
    let sce = solve_sce(market, cap);
    let n = market.len();
    let gap = sce.lambda_star - cap.value();
    ClosedLoopState {
        rho: vec![sce.lambda_star; n],
        eps: sce.x_star.iter().zip(market.agents()).map(|(x, r)| x - r.a).collect(),
        lambda: sce.lambda_star,
        pi: market.agents().iter().map(|r| gap / (r.q * r.q)).collect(),
        nu: sce.nu_star,
        mu: -market.s2() * gap,
        x: sce.x_star,
        u: sce.u_star,
    }
}

/// Equilibrium `(x̄, 1λ̄, x̄ - a, λ̄)` of the open-loop market dynamics.
pub fn open_loop_equilibrium(market: &MarketInstance) -> Vec<f64> {
    let ce = solve_ce(market);
    let mut out = Vec::with_capacity(3 * market.len() + 1);
    out.extend_from_slice(&ce.x_bar);
    out.extend(std::iter::repeat_n(ce.lambda_bar, market.len()));
    out.extend(ce.x_bar.iter().zip(market.agents()).map(|(x, r)| x - r.a));
    out.push(ce.lambda_bar);
    out
}

/// Equilibrium `(x̄, λ̄)` of the reduced dynamics.
pub fn reduced_equilibrium(market: &MarketInstance) -> Vec<f64> {
    let ce = solve_ce(market);
    let mut out = ce.x_bar;
    out.push(ce.lambda_bar);
    out
}
