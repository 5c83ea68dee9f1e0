use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::equilibrium::{solve_ce, solve_sce};
use crate::market::{utility, MarketInstance, SocialPriceCap};

use super::{ScenarioConfig, ScenarioError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda_max: f64,
    pub lambda_star: f64,
    pub nu_star: f64,
    pub u_norm: f64,
    /// Total nominal utility (`u = 0`) at the CE minus at the SCE allocation.
    pub welfare_loss: f64,
}

fn nominal_welfare(market: &MarketInstance, x: &[f64]) -> f64 {
    market.agents().iter().zip(x).map(|(r, x)| utility(r, *x, 0.0)).sum()
}

/// One row per cap, in input order.
pub fn run_sweep(config: &ScenarioConfig, caps: &[f64]) -> Result<Vec<SweepRow>, ScenarioError> {
    if caps.is_empty() {
        return Err(ScenarioError::Validation("sweep needs at least one cap value".into()));
    }
    let market = config.market()?;
    let ce = solve_ce(&market);
    let ce_welfare = nominal_welfare(&market, &ce.x_bar);
    caps.iter()
        .map(|&c| {
            let cap = SocialPriceCap::new(c)?;
            let sce = solve_sce(&market, cap);
            Ok(SweepRow {
                lambda_max: c,
                lambda_star: sce.lambda_star,
                nu_star: sce.nu_star,
                u_norm: sce.u_star.iter().map(|u| u * u).sum::<f64>().sqrt(),
                welfare_loss: ce_welfare - nominal_welfare(&market, &sce.x_star),
            })
        })
        .collect()
}

/// CSV with a leading `#` line documenting the welfare-loss convention.
pub fn write_sweep_csv<W: Write>(mut writer: W, rows: &[SweepRow]) -> Result<(), ScenarioError> {
    writeln!(
        writer,
        "# welfare_loss = sum of nominal utilities (u = 0) at the CE allocation minus at the SCE allocation"
    )?;
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    out.write_record(["lambda_max", "lambda_star", "nu_star", "u_norm", "welfare_loss"])?;
    for r in rows {
        out.write_record(
            [r.lambda_max, r.lambda_star, r.nu_star, r.u_norm, r.welfare_loss].map(|v| format!("{v:.16e}")),
        )?;
    }
    out.flush()?;
    Ok(())
}
