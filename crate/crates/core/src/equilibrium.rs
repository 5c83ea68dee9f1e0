//! Closed-form competitive and socially acceptable equilibria.
//!
//! Everything here reduces to the scalar complementarity relation
//!
//! ```text
//! 0 <= 1ᵀ(φ(λ) - a)  ⊥  λ_max - λ >= 0
//! ```
//!
//! whose left factor is affine and strictly decreasing in `λ`, so the unique
//! solution is `λ* = min(λ_CE, λ_max)`. The remaining primal and dual variables
//! follow from explicit formulas. [`lcp_oracle`] solves the same relation by
//! bisection and branch enumeration and serves as the independent check.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::{phi, MarketInstance, SocialPriceCap};

/// Tolerance on the equality residual of the social-welfare primal before a
/// supplied dual price is rejected.
pub const DUAL_CONSISTENCY_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquilibriumError {
    #[error("dimension mismatch: expected {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("price {lambda} is not the dual optimum: supply-demand residual {residual}")]
    InconsistentDual { lambda: f64, residual: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CeSolution {
    pub x_bar: Vec<f64>,
    pub lambda_bar: f64,
}

/// Primal-dual optimizer of the minimum-adjustment problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceSolution {
    pub x_star: Vec<f64>,
    pub lambda_star: f64,
    pub u_star: Vec<f64>,
    /// Dual of the supply-demand constraint, `>= 0`.
    pub nu_star: f64,
    /// Dual of the price cap.
    pub pi1_star: f64,
    /// Dual of the stationarity constraint `Qx + c0 + u + 1λ = 0`.
    pub pi2_star: Vec<f64>,
}

/// Optimizer of the slack-augmented primal `min ½yᵀQy + c0ᵀy + λ_max s`,
/// `1ᵀy - s = 1ᵀa`, `s >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModifiedPrimalSolution {
    pub y_bar: Vec<f64>,
    pub s_bar: f64,
    pub lambda_bar: f64,
    pub mu_s_bar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktResidualReport {
    pub stationarity_norm: f64,
    pub supply_demand_gap: f64,
    pub cap_violation: f64,
    pub complementarity_gap: f64,
}

impl KktResidualReport {
    pub fn max_field(&self) -> f64 {
        self.stationarity_norm
            .max(self.supply_demand_gap)
            .max(self.cap_violation)
            .max(self.complementarity_gap)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max_field() <= tol
    }
}

fn ce_price(market: &MarketInstance) -> f64 {
    -(market.s_qc() + market.sum_a()) / market.s1()
}

/// `1ᵀ(φ(λ) - a) = -s1·λ - Σc0/q - 1ᵀa`.
pub fn aggregate_slack(market: &MarketInstance, lambda: f64) -> f64 {
    -market.s1() * lambda - market.s_qc() - market.sum_a()
}

pub fn solve_ce(market: &MarketInstance) -> CeSolution {
    let lambda_bar = ce_price(market);
    CeSolution {
        x_bar: phi(market, lambda_bar),
        lambda_bar,
    }
}

/// Unique solution of the scalar complementarity relation.
pub fn solve_scalar_lcp(market: &MarketInstance, cap: SocialPriceCap) -> f64 {
    ce_price(market).min(cap.value())
}

pub fn solve_sce(market: &MarketInstance, cap: SocialPriceCap) -> SceSolution {
    let lambda_star = solve_scalar_lcp(market, cap);
    // Inactive cap: the CE itself is socially acceptable and needs no adjustment.
    let nu_star = if lambda_star < cap.value() {
        0.0
    } else {
        (aggregate_slack(market, lambda_star) / market.s2()).max(0.0)
    };
    let demand = phi(market, lambda_star);
    let mut x_star = Vec::with_capacity(market.len());
    let mut u_star = Vec::with_capacity(market.len());
    for (agent, d) in market.agents().iter().zip(demand) {
        x_star.push(d - nu_star / (agent.q * agent.q));
        u_star.push(nu_star / agent.q);
    }
    let pi2_star = u_star.iter().map(|u| -u).collect();
    SceSolution {
        x_star,
        lambda_star,
        u_star,
        nu_star,
        pi1_star: market.s1() * nu_star,
        pi2_star,
    }
}

/// Minimizer of the unconstrained dual `½ s1 λ² + (Σc0/q + 1ᵀa) λ`.
pub fn solve_sw_dual(market: &MarketInstance) -> f64 {
    let linear = market.s_qc() + market.sum_a();
    -linear / market.s1()
}

/// Recovers the primal allocation from a dual price, rejecting prices that do
/// not clear the market.
pub fn dual_to_primal_sw(market: &MarketInstance, lambda_bar: f64) -> Result<Vec<f64>, EquilibriumError> {
    let y_bar = phi(market, lambda_bar);
    let residual = (y_bar.iter().sum::<f64>() - market.sum_a()).abs();
    if residual > DUAL_CONSISTENCY_TOL * market.residual_scale() {
        return Err(EquilibriumError::InconsistentDual {
            lambda: lambda_bar,
            residual,
        });
    }
    Ok(y_bar)
}

pub fn solve_modified_primal(market: &MarketInstance, cap: SocialPriceCap) -> ModifiedPrimalSolution {
    let lambda_bar = solve_scalar_lcp(market, cap);
    let s_bar = aggregate_slack(market, lambda_bar);
    ModifiedPrimalSolution {
        y_bar: phi(market, lambda_bar),
        // the slack is exactly zero on the inactive branch
        s_bar: if lambda_bar < cap.value() { 0.0 } else { s_bar },
        lambda_bar,
        mu_s_bar: cap.value() - lambda_bar,
    }
}

/// Change of variables `[y; s] = M [x; ν]` with
/// `M = [[I, Q⁻²1], [0ᵀ, 1ᵀQ⁻²1]]`.
pub fn change_of_variables_matrix(market: &MarketInstance) -> DMatrix<f64> {
    let n = market.len();
    let mut m = DMatrix::<f64>::identity(n + 1, n + 1);
    for (i, agent) in market.agents().iter().enumerate() {
        m[(i, n)] = 1.0 / (agent.q * agent.q);
    }
    m[(n, n)] = market.s2();
    m
}

pub fn map_sce_to_modified_primal(
    market: &MarketInstance,
    sce: &SceSolution,
) -> Result<(Vec<f64>, f64), EquilibriumError> {
    let n = market.len();
    if sce.x_star.len() != n {
        return Err(EquilibriumError::DimensionMismatch {
            expected: n,
            got: sce.x_star.len(),
        });
    }
    let stacked = DVector::from_iterator(n + 1, sce.x_star.iter().copied().chain([sce.nu_star]));
    let image = change_of_variables_matrix(market) * stacked;
    Ok((image.rows(0, n).iter().copied().collect(), image[n]))
}

/// Residuals of the SCE optimality system for an arbitrary candidate.
pub fn kkt_residual_sce(
    market: &MarketInstance,
    cap: SocialPriceCap,
    candidate: &SceSolution,
) -> Result<KktResidualReport, EquilibriumError> {
    let n = market.len();
    for got in [candidate.x_star.len(), candidate.u_star.len()] {
        if got != n {
            return Err(EquilibriumError::DimensionMismatch { expected: n, got });
        }
    }
    let lambda = candidate.lambda_star;
    let stationarity_norm = market
        .agents()
        .iter()
        .zip(candidate.x_star.iter().zip(&candidate.u_star))
        .map(|(r, (x, u))| (r.q * x + r.c0 + u + lambda).abs())
        .fold(0.0, f64::max);
    let supply_demand_gap = (candidate.x_star.iter().sum::<f64>() - market.sum_a()).abs();
    let cap_violation = (lambda - cap.value()).max(0.0);
    let nu = candidate.nu_star;
    let complementarity_gap = (nu * (cap.value() - lambda)).abs() + (-nu).max(0.0);
    Ok(KktResidualReport {
        stationarity_norm,
        supply_demand_gap,
        cap_violation,
        complementarity_gap,
    })
}

/// Independent solution of the scalar complementarity relation.
///
/// Evaluates the aggregate slack directly from the agents, brackets its root by
/// doubling, bisects it, and then checks both complementarity branches
/// (`slack = 0, λ <= λ_max` and `λ = λ_max, slack >= 0`), returning the
/// candidate with the smallest complementarity residual.
pub fn lcp_oracle(market: &MarketInstance, cap: SocialPriceCap, tolerance: f64) -> f64 {
    assert!(tolerance > 0.0, "oracle tolerance must be positive");
    let lambda_max = cap.value();
    let slack = |lambda: f64| -> f64 { market.agents().iter().map(|r| -(lambda + r.c0) / r.q - r.a).sum() };

    // Walk down from the cap until the slack is nonnegative.
    let mut step = 1.0;
    let mut lambda_lo = lambda_max - step;
    while slack(lambda_lo) < 0.0 {
        step *= 2.0;
        lambda_lo = lambda_max - step;
    }
    let lower = lambda_lo.min(lambda_max);

    let mut candidates = Vec::with_capacity(2);
    // Branch: cap binds.
    if slack(lambda_max) >= 0.0 {
        candidates.push(lambda_max);
    }
    // Branch: market clears below the cap.
    if slack(lambda_max) <= 0.0 {
        let (mut lo, mut hi) = (lower, lambda_max);
        for _ in 0..400 {
            if hi - lo <= 0.25 * tolerance {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if slack(mid) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        candidates.push(0.5 * (lo + hi));
    }

    let residual = |lambda: f64| {
        let s = slack(lambda);
        let z = lambda_max - lambda;
        (s.min(0.0)).abs() + (z.min(0.0)).abs() + (s * z).abs()
    };
    candidates
        .into_iter()
        .min_by(|a, b| residual(*a).total_cmp(&residual(*b)))
        .expect("at least one complementarity branch is feasible")
}
