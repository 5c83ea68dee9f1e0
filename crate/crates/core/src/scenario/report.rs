use serde::{Deserialize, Serialize};

use crate::equilibrium::{kkt_residual_sce, solve_ce, solve_sce, CeSolution, KktResidualReport, SceSolution};

use super::{ScenarioConfig, ScenarioError};

/// Absolute KKT tolerance, scaled by `max(1, ‖c0‖∞, ‖a‖∞)`.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub ce: CeSolution,
    pub sce: SceSolution,
    pub residuals: KktResidualReport,
    /// The cap binds: `ν* > 0`, equivalently the CE price exceeds `λ_max`.
    pub cap_active: bool,
    pub lambda_max: f64,
    pub warnings: Vec<String>,
}

impl EquilibriumReport {
    pub fn to_json(&self) -> String {
        super::to_sorted_json(self)
    }
}

pub fn run_solve(config: &ScenarioConfig) -> Result<EquilibriumReport, ScenarioError> {
    let market = config.market()?;
    let cap = config.cap()?;
    let ce = solve_ce(&market);
    let sce = solve_sce(&market, cap);
    let residuals = kkt_residual_sce(&market, cap, &sce).map_err(|e| ScenarioError::Validation(e.to_string()))?;
    if !residuals.within(RESIDUAL_TOL * market.residual_scale()) {
        log::warn!("SCE residuals above tolerance: {residuals:?}");
    }
    Ok(EquilibriumReport {
        cap_active: sce.nu_star > 0.0,
        ce,
        sce,
        residuals,
        lambda_max: cap.value(),
        warnings: market.warnings().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::load_config;
    use approx::assert_abs_diff_eq;

    const TABLE1: &str = include_str!("../../fixtures/table1.json");

    #[test]
    fn table1_report() {
        let report = run_solve(&load_config(TABLE1).unwrap()).unwrap();
        assert_abs_diff_eq!(report.ce.lambda_bar, 8.26, epsilon = 0.01);
        assert_eq!(report.sce.lambda_star, 4.0);
        for (u, want) in report.sce.u_star.iter().zip([5.31, 3.54, 0.53, 0.26]) {
            assert_abs_diff_eq!(*u, want, epsilon = 0.01);
        }
        assert!(report.cap_active);
    }

    #[test]
    fn inactive_cap_report() {
        let mut c = load_config(TABLE1).unwrap();
        c.lambda_max = 10.0;
        let report = run_solve(&c).unwrap();
        assert!(!report.cap_active);
        assert!(report.sce.u_star.iter().all(|u| *u == 0.0));
    }

    #[test]
    fn single_agent_report() {
        let c = load_config(r#"{"agents": [{"q": 1, "c0": -10, "a": 3}], "lambda_max": 5}"#).unwrap();
        let report = run_solve(&c).unwrap();
        assert_abs_diff_eq!(report.ce.lambda_bar, 7.0, epsilon = 1e-12);
        assert_eq!(report.sce.lambda_star, 5.0);
        assert_abs_diff_eq!(report.sce.nu_star, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.sce.x_star[0], 3.0, epsilon = 1e-12);
        assert!(report.cap_active);
    }

    #[test]
    fn json_keys_are_sorted_and_stable() {
        let c = load_config(TABLE1).unwrap();
        let a = run_solve(&c).unwrap().to_json();
        let b = run_solve(&c).unwrap().to_json();
        assert_eq!(a, b);
        let top: Vec<&str> = a
            .lines()
            .filter(|l| l.starts_with("  \""))
            .map(|l| l.trim().split('"').nth(1).unwrap())
            .collect();
        let mut sorted = top.clone();
        sorted.sort();
        assert_eq!(top, sorted);
    }
}
