//! Fixed-step projected integration.

use serde::{Deserialize, Serialize};

use super::lyapunov::lyapunov_value;
use super::rhs::Dynamics;
use super::DynamicsError;

/// States whose sup-norm exceeds this are treated as divergent.
pub const DIVERGENCE_BOUND: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Euler,
    Rk4,
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euler" => Ok(Method::Euler),
            "rk4" => Ok(Method::Rk4),
            other => Err(format!("unknown method `{other}` (expected euler or rk4)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSettings {
    pub h: f64,
    pub t_end: f64,
    pub method: Method,
    /// Record every `record_stride`-th step (the final step is always kept).
    pub record_stride: usize,
}

impl IntegrationSettings {
    pub fn new(h: f64, t_end: f64, method: Method, record_stride: usize) -> Self {
        Self {
            h,
            t_end,
            method,
            record_stride,
        }
    }

    pub fn num_steps(&self) -> usize {
        ((self.t_end / self.h).round() as usize).max(1)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(DynamicsError::InvalidSettings(format!(
                "step h must be positive, got {}",
                self.h
            )));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.h) {
            return Err(DynamicsError::InvalidSettings(format!(
                "horizon must satisfy T >= h, got T = {} and h = {}",
                self.t_end, self.h
            )));
        }
        if self.record_stride == 0 {
            return Err(DynamicsError::InvalidSettings(
                "record stride must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Recorded samples of a simulation together with the Lyapunov function and
/// the sup-norm distance to a fixed reference equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub lyapunov: Vec<f64>,
    pub equilibrium_residuals: Vec<f64>,
    /// Largest `V(t_{k+1}) - V(t_k)` over every integration step, recorded or not.
    pub max_step_lyapunov_increase: f64,
    /// Component constrained to be nonnegative, if any.
    pub nonnegative_index: Option<usize>,
}

impl Trajectory {
    pub fn empty(nonnegative_index: Option<usize>) -> Self {
        Self {
            times: Vec::new(),
            states: Vec::new(),
            lyapunov: Vec::new(),
            equilibrium_residuals: Vec::new(),
            max_step_lyapunov_increase: f64::NEG_INFINITY,
            nonnegative_index,
        }
    }

    /// Appends a sample, computing `V` and the residual against `reference`.
    pub fn push(&mut self, t: f64, state: Vec<f64>, reference: &[f64]) {
        let v = lyapunov_value(&state, reference).unwrap_or(f64::NAN);
        self.lyapunov.push(v);
        self.equilibrium_residuals.push(sup_distance(&state, reference));
        self.times.push(t);
        self.states.push(state);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> Option<&[f64]> {
        self.states.last().map(Vec::as_slice)
    }
}

pub(crate) fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn clamp(system: &impl Dynamics, state: &mut [f64]) {
    if let Some(i) = system.nonnegative_index() {
        state[i] = state[i].max(0.0);
    }
}

struct Workspace {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    stage: Vec<f64>,
}

fn step(system: &impl Dynamics, method: Method, h: f64, state: &mut [f64], ws: &mut Workspace) {
    match method {
        Method::Euler => {
            system.rhs(state, &mut ws.k1);
            for (s, k) in state.iter_mut().zip(&ws.k1) {
                *s += h * k;
            }
        }
        Method::Rk4 => {
            // The projection sees each stage's own (ν, μ); only the combined step is clamped.
            system.rhs(state, &mut ws.k1);
            for ((st, s), k) in ws.stage.iter_mut().zip(state.iter()).zip(&ws.k1) {
                *st = s + 0.5 * h * k;
            }
            system.rhs(&ws.stage, &mut ws.k2);
            for ((st, s), k) in ws.stage.iter_mut().zip(state.iter()).zip(&ws.k2) {
                *st = s + 0.5 * h * k;
            }
            system.rhs(&ws.stage, &mut ws.k3);
            for ((st, s), k) in ws.stage.iter_mut().zip(state.iter()).zip(&ws.k3) {
                *st = s + h * k;
            }
            system.rhs(&ws.stage, &mut ws.k4);
            for (i, s) in state.iter_mut().enumerate() {
                *s += h / 6.0 * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
            }
        }
    }
    clamp(system, state);
}

/// Marches `system` from `initial` with a fixed step, clamping the
/// nonnegative component after every step.
///
/// On divergence (a non-finite component or sup-norm above
/// [`DIVERGENCE_BOUND`]) the samples recorded so far are returned inside
/// [`DynamicsError::NonfiniteState`].
pub fn integrate(
    system: &impl Dynamics,
    initial: &[f64],
    reference: &[f64],
    settings: &IntegrationSettings,
) -> Result<Trajectory, DynamicsError> {
    settings.validate()?;
    let dim = system.dim();
    for got in [initial.len(), reference.len()] {
        if got != dim {
            return Err(DynamicsError::DimensionMismatch { expected: dim, got });
        }
    }
    if let Some(i) = system.nonnegative_index() {
        if initial[i] < 0.0 {
            return Err(DynamicsError::NegativeMu(initial[i]));
        }
    }

    let mut trajectory = Trajectory::empty(system.nonnegative_index());
    let mut state = initial.to_vec();
    trajectory.push(0.0, state.clone(), reference);
    let mut v_prev = trajectory.lyapunov[0];
    let mut ws = Workspace {
        k1: vec![0.0; dim],
        k2: vec![0.0; dim],
        k3: vec![0.0; dim],
        k4: vec![0.0; dim],
        stage: vec![0.0; dim],
    };

    let steps = settings.num_steps();
    for k in 1..=steps {
        step(system, settings.method, settings.h, &mut state, &mut ws);
        let t = k as f64 * settings.h;
        let diverged = state.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_BOUND);
        if diverged {
            log::warn!("integration diverged at t = {t}");
            return Err(DynamicsError::NonfiniteState {
                time: t,
                partial: Box::new(trajectory),
            });
        }
        let v = 0.5 * state.iter().zip(reference).map(|(s, r)| (s - r) * (s - r)).sum::<f64>();
        trajectory.max_step_lyapunov_increase = trajectory.max_step_lyapunov_increase.max(v - v_prev);
        v_prev = v;
        if k % settings.record_stride == 0 || k == steps {
            trajectory.push(t, state.clone(), reference);
        }
    }
    Ok(trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ẏ = -y on one component, clamped at zero.
    struct Decay;

    impl Dynamics for Decay {
        fn dim(&self) -> usize {
            1
        }

        fn rhs(&self, state: &[f64], out: &mut [f64]) {
            out[0] = -state[0];
        }
    }

    /// ẏ = -1, constrained to y >= 0.
    struct Drain;

    impl Dynamics for Drain {
        fn dim(&self) -> usize {
            1
        }

        fn rhs(&self, _state: &[f64], out: &mut [f64]) {
            out[0] = -1.0;
        }

        fn nonnegative_index(&self) -> Option<usize> {
            Some(0)
        }
    }

    /// ẏ = y, blows up.
    struct Growth;

    impl Dynamics for Growth {
        fn dim(&self) -> usize {
            1
        }

        fn rhs(&self, state: &[f64], out: &mut [f64]) {
            out[0] = 10.0 * state[0];
        }
    }

    #[test]
    fn euler_and_rk4_orders() {
        let exact = (-1.0f64).exp();
        let run = |method, h| {
            let s = IntegrationSettings::new(h, 1.0, method, 1);
            integrate(&Decay, &[1.0], &[0.0], &s).unwrap().final_state().unwrap()[0]
        };
        let e1 = (run(Method::Euler, 0.01) - exact).abs();
        let e2 = (run(Method::Euler, 0.005) - exact).abs();
        assert!((e1 / e2 - 2.0).abs() < 0.1, "euler ratio {}", e1 / e2);
        let r1 = (run(Method::Rk4, 0.1) - exact).abs();
        let r2 = (run(Method::Rk4, 0.05) - exact).abs();
        assert!((r1 / r2 - 16.0).abs() < 1.5, "rk4 ratio {}", r1 / r2);
    }

    #[test]
    fn recording_stride() {
        let s = IntegrationSettings::new(0.1, 1.0, Method::Euler, 3);
        let tr = integrate(&Decay, &[1.0], &[0.0], &s).unwrap();
        // steps 0, 3, 6, 9 and the final step 10
        assert_eq!(tr.len(), 5);
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(tr.lyapunov.len(), tr.len());
        assert_eq!(tr.equilibrium_residuals.len(), tr.len());

        let s = IntegrationSettings::new(0.1, 0.1, Method::Euler, 1);
        assert_eq!(integrate(&Decay, &[1.0], &[0.0], &s).unwrap().len(), 2);
    }

    #[test]
    fn clamps_nonnegative_component() {
        for method in [Method::Euler, Method::Rk4] {
            let s = IntegrationSettings::new(0.3, 3.0, method, 1);
            let tr = integrate(&Drain, &[1.0], &[0.0], &s).unwrap();
            assert!(tr.states.iter().all(|st| st[0] >= 0.0));
            assert_eq!(tr.final_state().unwrap()[0], 0.0);
        }
        let s = IntegrationSettings::new(0.3, 3.0, Method::Euler, 1);
        assert!(matches!(
            integrate(&Drain, &[-1.0], &[0.0], &s),
            Err(DynamicsError::NegativeMu(_))
        ));
    }

    #[test]
    fn divergence_keeps_partial_trajectory() {
        let s = IntegrationSettings::new(0.5, 100.0, Method::Euler, 1);
        match integrate(&Growth, &[1.0], &[0.0], &s) {
            Err(DynamicsError::NonfiniteState { time, partial }) => {
                assert!(time < 100.0);
                assert!(!partial.is_empty());
                assert!(partial.states.iter().all(|st| st[0].abs() <= DIVERGENCE_BOUND));
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_settings() {
        for s in [
            IntegrationSettings::new(0.0, 1.0, Method::Euler, 1),
            IntegrationSettings::new(0.1, 0.05, Method::Euler, 1),
            IntegrationSettings::new(0.1, 1.0, Method::Euler, 0),
        ] {
            assert!(matches!(
                integrate(&Decay, &[1.0], &[0.0], &s),
                Err(DynamicsError::InvalidSettings(_))
            ));
        }
        let s = IntegrationSettings::new(0.1, 1.0, Method::Euler, 1);
        assert!(integrate(&Decay, &[1.0, 2.0], &[0.0], &s).is_err());
    }
}
