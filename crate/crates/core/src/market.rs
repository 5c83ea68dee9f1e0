//! Validated market data and the scalar building blocks shared by the solvers
//! and the dynamics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarketError {
    #[error("market must contain at least one agent")]
    EmptyMarket,
    #[error("agent {index}: curvature q must be strictly positive, got {q}")]
    NonpositiveCurvature { index: usize, q: f64 },
    #[error("agent {index}: generation a must be nonnegative, got {a}")]
    NegativeGeneration { index: usize, a: f64 },
    #[error("agent {index}: field `{field}` is not finite")]
    NonfiniteInput { index: usize, field: &'static str },
    #[error("price cap must be finite, got {0}")]
    NonfiniteCap(f64),
}

/// One agent's utility curvature `q`, nominal linear coefficient `c0` and
/// renewable generation `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentParams {
    pub q: f64,
    pub c0: f64,
    pub a: f64,
}

impl AgentParams {
    pub fn new(q: f64, c0: f64, a: f64) -> Self {
        Self { q, c0, a }
    }
}

/// A validated, immutable collection of agents with cached aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketInstance {
    agents: Vec<AgentParams>,
    sum_a: f64,
    s1: f64,
    s2: f64,
    s_qc: f64,
    warnings: Vec<String>,
}

/// Validates raw agent records and computes the derived aggregates.
///
/// A positive `c0` only produces a warning: the formulas hold for any real
/// linear coefficient.
pub fn validate_market(records: &[AgentParams]) -> Result<MarketInstance, MarketError> {
    if records.is_empty() {
        return Err(MarketError::EmptyMarket);
    }
    let mut warnings = Vec::new();
    for (index, agent) in records.iter().enumerate() {
        for (field, value) in [("q", agent.q), ("c0", agent.c0), ("a", agent.a)] {
            if !value.is_finite() {
                return Err(MarketError::NonfiniteInput { index, field });
            }
        }
        if agent.q <= 0.0 {
            return Err(MarketError::NonpositiveCurvature { index, q: agent.q });
        }
        if agent.a < 0.0 {
            return Err(MarketError::NegativeGeneration { index, a: agent.a });
        }
        if agent.c0 > 0.0 {
            warnings.push(format!(
                "agent {index}: c0 = {} is positive (nominal utilities usually have c0 <= 0)",
                agent.c0
            ));
        }
    }
    let sum_a = records.iter().map(|r| r.a).sum();
    let s1 = records.iter().map(|r| 1.0 / r.q).sum();
    let s2 = records.iter().map(|r| 1.0 / (r.q * r.q)).sum();
    let s_qc = records.iter().map(|r| r.c0 / r.q).sum();
    Ok(MarketInstance {
        agents: records.to_vec(),
        sum_a,
        s1,
        s2,
        s_qc,
        warnings,
    })
}

impl MarketInstance {
    pub fn agents(&self) -> &[AgentParams] {
        &self.agents
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    /// Always false for a validated market; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    /// Total generation `1ᵀa`.
    pub fn sum_a(&self) -> f64 {
        self.sum_a
    }

    /// `Σ 1/q_i`.
    pub fn s1(&self) -> f64 {
        self.s1
    }

    /// `Σ 1/q_i²`.
    pub fn s2(&self) -> f64 {
        self.s2
    }

    /// `Σ c0_i/q_i`.
    pub fn s_qc(&self) -> f64 {
        self.s_qc
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn q(&self) -> Vec<f64> {
        self.agents.iter().map(|r| r.q).collect()
    }

    pub fn c0(&self) -> Vec<f64> {
        self.agents.iter().map(|r| r.c0).collect()
    }

    pub fn a(&self) -> Vec<f64> {
        self.agents.iter().map(|r| r.a).collect()
    }

    /// Scale used to turn absolute residual tolerances into ones that track
    /// the size of the data: `max(1, ‖c0‖∞, ‖a‖∞)`.
    pub fn residual_scale(&self) -> f64 {
        self.agents
            .iter()
            .fold(1.0_f64, |m, r| m.max(r.c0.abs()).max(r.a.abs()))
    }
}

/// The socially acceptable price threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SocialPriceCap {
    pub lambda_max: f64,
}

impl SocialPriceCap {
    pub fn new(lambda_max: f64) -> Result<Self, MarketError> {
        if !lambda_max.is_finite() {
            return Err(MarketError::NonfiniteCap(lambda_max));
        }
        Ok(Self { lambda_max })
    }

    pub fn value(self) -> f64 {
        self.lambda_max
    }
}

/// `[x]⁺_y`: `x` when `y > 0`, otherwise `max(0, x)`.
///
/// Only ever applied with `y = μ ≥ 0`; a negative `y` is treated like the
/// boundary.
pub fn conditional_projection(x: f64, y: f64) -> f64 {
    if y > 0.0 {
        x
    } else {
        x.max(0.0)
    }
}

/// Controllable utility `-q x²/2 - (c0 + u) x`.
pub fn utility(agent: &AgentParams, x: f64, u: f64) -> f64 {
    -0.5 * agent.q * x * x - (agent.c0 + u) * x
}

/// Best-response demand at a uniform price: `φ_i(λ) = -(λ + c0_i)/q_i`.
pub fn phi(market: &MarketInstance, lambda: f64) -> Vec<f64> {
    market.agents().iter().map(|r| -(lambda + r.c0) / r.q).collect()
}
