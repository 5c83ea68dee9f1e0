use serde::{Deserialize, Serialize};

use super::DynamicsError;

/// Stacked closed-loop state `(x, ρ, ε, λ, u, π, ν, μ)` of dimension `5N + 3`.
///
/// The same shape is used for derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedLoopState {
    pub x: Vec<f64>,
    pub rho: Vec<f64>,
    pub eps: Vec<f64>,
    pub lambda: f64,
    pub u: Vec<f64>,
    pub pi: Vec<f64>,
    pub nu: f64,
    pub mu: f64,
}

/// Flat index layout of a closed-loop state for `n` agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub n: usize,
}

impl Layout {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn dim(self) -> usize {
        5 * self.n + 3
    }

    /// Dimension of the open-loop block `(x, ρ, ε, λ)`.
    pub fn market_dim(self) -> usize {
        3 * self.n + 1
    }

    pub fn x(self) -> std::ops::Range<usize> {
        0..self.n
    }

    pub fn rho(self) -> std::ops::Range<usize> {
        self.n..2 * self.n
    }

    pub fn eps(self) -> std::ops::Range<usize> {
        2 * self.n..3 * self.n
    }

    pub fn lambda(self) -> usize {
        3 * self.n
    }

    pub fn u(self) -> std::ops::Range<usize> {
        3 * self.n + 1..4 * self.n + 1
    }

    pub fn pi(self) -> std::ops::Range<usize> {
        4 * self.n + 1..5 * self.n + 1
    }

    pub fn nu(self) -> usize {
        5 * self.n + 1
    }

    pub fn mu(self) -> usize {
        5 * self.n + 2
    }
}

impl ClosedLoopState {
    pub fn zeros(n: usize) -> Self {
        Self {
            x: vec![0.0; n],
            rho: vec![0.0; n],
            eps: vec![0.0; n],
            lambda: 0.0,
            u: vec![0.0; n],
            pi: vec![0.0; n],
            nu: 0.0,
            mu: 0.0,
        }
    }

    pub fn num_agents(&self) -> usize {
        self.x.len()
    }

    pub fn check_dims(&self, n: usize) -> Result<(), DynamicsError> {
        for len in [
            self.x.len(),
            self.rho.len(),
            self.eps.len(),
            self.u.len(),
            self.pi.len(),
        ] {
            if len != n {
                return Err(DynamicsError::DimensionMismatch { expected: n, got: len });
            }
        }
        Ok(())
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(5 * self.x.len() + 3);
        out.extend_from_slice(&self.x);
        out.extend_from_slice(&self.rho);
        out.extend_from_slice(&self.eps);
        out.push(self.lambda);
        out.extend_from_slice(&self.u);
        out.extend_from_slice(&self.pi);
        out.push(self.nu);
        out.push(self.mu);
        out
    }

    pub fn from_slice(n: usize, flat: &[f64]) -> Result<Self, DynamicsError> {
        let l = Layout::new(n);
        if flat.len() != l.dim() {
            return Err(DynamicsError::DimensionMismatch {
                expected: l.dim(),
                got: flat.len(),
            });
        }
        Ok(Self {
            x: flat[l.x()].to_vec(),
            rho: flat[l.rho()].to_vec(),
            eps: flat[l.eps()].to_vec(),
            lambda: flat[l.lambda()],
            u: flat[l.u()].to_vec(),
            pi: flat[l.pi()].to_vec(),
            nu: flat[l.nu()],
            mu: flat[l.mu()],
        })
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.to_vec().iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
