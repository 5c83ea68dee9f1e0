use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{assemble_equilibrium, ClosedLoopState, IntegrationSettings, Layout, Method};
use crate::market::{validate_market, AgentParams, MarketInstance, SocialPriceCap};

use super::ScenarioError;

pub const DEFAULT_H: f64 = 1e-2;
pub const DEFAULT_T_END: f64 = 1500.0;
pub const DEFAULT_RECORD_STRIDE: usize = 10;
pub const DEFAULT_SEED: u64 = 0;

/// A full scenario: market data, price cap, simulation settings and the seed
/// used for randomized verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub agents: Vec<AgentParams>,
    pub lambda_max: f64,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    #[serde(default)]
    pub init: InitialCondition,
}

fn default_h() -> f64 {
    DEFAULT_H
}

fn default_t_end() -> f64 {
    DEFAULT_T_END
}

fn default_stride() -> usize {
    DEFAULT_RECORD_STRIDE
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            h: DEFAULT_H,
            t_end: DEFAULT_T_END,
            method: Method::Rk4,
            record_stride: DEFAULT_RECORD_STRIDE,
            init: InitialCondition::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    #[default]
    Zero,
    Equilibrium,
}

/// Initial condition: `"zero"`, `"equilibrium"` or `{"state": [5N+3 numbers]}`
/// in the order `(x, ρ, ε, λ, u, π, ν, μ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialCondition {
    Named(InitKind),
    Explicit(ExplicitInit),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitInit {
    pub state: Vec<f64>,
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition::Named(InitKind::Zero)
    }
}

impl ScenarioConfig {
    pub fn market(&self) -> Result<MarketInstance, ScenarioError> {
        Ok(validate_market(&self.agents)?)
    }

    pub fn cap(&self) -> Result<SocialPriceCap, ScenarioError> {
        Ok(SocialPriceCap::new(self.lambda_max)?)
    }

    pub fn settings(&self) -> IntegrationSettings {
        IntegrationSettings::new(self.sim.h, self.sim.t_end, self.sim.method, self.sim.record_stride)
    }

    pub fn initial_state(
        &self,
        market: &MarketInstance,
        cap: SocialPriceCap,
    ) -> Result<ClosedLoopState, ScenarioError> {
        let n = market.len();
        match &self.sim.init {
            InitialCondition::Named(InitKind::Zero) => Ok(ClosedLoopState::zeros(n)),
            InitialCondition::Named(InitKind::Equilibrium) => Ok(assemble_equilibrium(market, cap)),
            InitialCondition::Explicit(ExplicitInit { state }) => Ok(ClosedLoopState::from_slice(n, state)?),
        }
    }

    /// Checks everything that deserialization alone cannot.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let market = self.market()?;
        let cap = self.cap()?;
        self.settings()
            .validate()
            .map_err(|e| ScenarioError::Validation(e.to_string()))?;
        if let InitialCondition::Explicit(ExplicitInit { state }) = &self.sim.init {
            let dim = Layout::new(market.len()).dim();
            if state.len() != dim {
                return Err(ScenarioError::Validation(format!(
                    "explicit initial state needs {dim} entries, got {}",
                    state.len()
                )));
            }
            if state.iter().any(|v| !v.is_finite()) {
                return Err(ScenarioError::Validation("explicit initial state is not finite".into()));
            }
            let mu = self.initial_state(&market, cap)?.mu;
            if mu < 0.0 {
                return Err(ScenarioError::Validation(format!(
                    "initial mu must be nonnegative, got {mu}"
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        super::to_sorted_json(self)
    }
}

/// Parses and validates a JSON scenario.
pub fn load_config(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let config: ScenarioConfig = serde_json::from_str(text).map_err(ScenarioError::from_json)?;
    config.validate()?;
    Ok(config)
}

pub fn load_config_file(path: impl AsRef<Path>) -> Result<ScenarioConfig, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE1: &str = include_str!("../../fixtures/table1.json");

    #[test]
    fn fixture_loads() {
        let c = load_config(TABLE1).unwrap();
        assert_eq!(c.agents.len(), 4);
        assert_eq!(c.lambda_max, 4.0);
        assert_eq!(c.agents[1], AgentParams::new(1.5, -60.0, 30.0));
        assert_eq!(c.market().unwrap().sum_a(), 80.0);
    }

    #[test]
    fn defaults_apply() {
        let c = load_config(r#"{"agents": [{"q": 1, "c0": -10, "a": 3}], "lambda_max": 5}"#).unwrap();
        assert_eq!(c.sim, SimConfig::default());
        assert_eq!(c.seed, DEFAULT_SEED);
        let c =
            load_config(r#"{"agents": [{"q": 1, "c0": -10, "a": 3}], "lambda_max": 5, "sim": {"h": 0.5}}"#).unwrap();
        assert_eq!(c.sim.h, 0.5);
        assert_eq!(c.sim.t_end, DEFAULT_T_END);
    }

    #[test]
    fn init_variants() {
        let base = r#"{"agents": [{"q": 1, "c0": -10, "a": 3}], "lambda_max": 5, "sim": {"init": INIT}}"#;
        let c = load_config(&base.replace("INIT", r#""equilibrium""#)).unwrap();
        assert_eq!(c.sim.init, InitialCondition::Named(InitKind::Equilibrium));
        let c = load_config(&base.replace("INIT", r#"{"state": [1,2,3,4,5,6,7,8]}"#)).unwrap();
        let m = c.market().unwrap();
        assert_eq!(c.initial_state(&m, c.cap().unwrap()).unwrap().mu, 8.0);
        assert!(matches!(
            load_config(&base.replace("INIT", r#"{"state": [1,2,3]}"#)),
            Err(ScenarioError::Validation(_))
        ));
        assert!(matches!(
            load_config(&base.replace("INIT", r#"{"state": [0,0,0,0,0,0,0,-1]}"#)),
            Err(ScenarioError::Validation(_))
        ));
        assert!(load_config(&base.replace("INIT", r#""warm""#)).is_err());
    }

    #[test]
    fn rejects_invalid_market() {
        let err = load_config(r#"{"agents": [{"q": 0, "c0": -1, "a": 1}], "lambda_max": 4}"#).unwrap_err();
        assert!(matches!(err, ScenarioError::Market(_)), "{err:?}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn rejects_unknown_key() {
        let err = load_config(r#"{"agents": [{"qq": 1, "c0": -1, "a": 1}], "lambda_max": 4}"#).unwrap_err();
        match err {
            ScenarioError::Parse { message, line, .. } => {
                assert!(message.contains("qq"), "{message}");
                assert_eq!(line, 1);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn reports_missing_fields_and_syntax() {
        let err = load_config(r#"{"agents": [{"q": 1, "a": 1}], "lambda_max": 4}"#).unwrap_err();
        assert!(
            matches!(err, ScenarioError::MissingField(ref m) if m.contains("c0")),
            "{err:?}"
        );
        let err = load_config("{\"agents\": [\n  {\"q\": 1,, }]}").unwrap_err();
        assert!(matches!(err, ScenarioError::Parse { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn rejects_bad_sim() {
        let err =
            load_config(r#"{"agents": [{"q": 1, "c0": -1, "a": 1}], "lambda_max": 4, "sim": {"h": 1, "t_end": 0.5}}"#)
                .unwrap_err();
        assert!(matches!(err, ScenarioError::Validation(_)));
    }

    #[test]
    fn serialization_round_trips() {
        let c = load_config(TABLE1).unwrap();
        assert_eq!(load_config(&c.to_json()).unwrap(), c);
        let mut c2 = c.clone();
        c2.sim.init = InitialCondition::Explicit(ExplicitInit {
            state: (0..23).map(|i| i as f64 * 0.1).collect(),
        });
        assert_eq!(load_config(&c2.to_json()).unwrap(), c2);
    }
}
