use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    assemble_equilibrium, convergence_report, integrate, ClosedLoopSystem, ConvergenceReport, DynamicsError, Layout,
    Method, Trajectory,
};

use super::{ScenarioConfig, ScenarioError};

/// Sup-norm distance to the closed-form equilibrium that counts as converged.
pub const CONVERGENCE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    #[serde(flatten)]
    pub convergence: ConvergenceReport,
    pub method: Method,
    pub h: f64,
    pub t_end: f64,
    pub rows: usize,
    pub lambda_max: f64,
    pub final_x: Vec<f64>,
    pub final_lambda: f64,
    pub final_u: Vec<f64>,
    pub equilibrium_x: Vec<f64>,
    pub equilibrium_lambda: f64,
    pub equilibrium_u: Vec<f64>,
}

impl SimulationSummary {
    pub fn to_json(&self) -> String {
        super::to_sorted_json(self)
    }
}

/// Header `t, x_1..x_N, rho_1..rho_N, eps_1..eps_N, lambda, u_1..u_N,
/// pi_1..pi_N, nu, mu, V, eq_residual`.
pub fn csv_header(n: usize) -> Vec<String> {
    let block = |name: &'static str| (1..=n).map(move |i| format!("{name}_{i}"));
    std::iter::once("t".to_string())
        .chain(block("x"))
        .chain(block("rho"))
        .chain(block("eps"))
        .chain(["lambda".to_string()])
        .chain(block("u"))
        .chain(block("pi"))
        .chain(["nu", "mu", "V", "eq_residual"].map(String::from))
        .collect()
}

fn fmt(v: f64) -> String {
    // 17 significant digits round-trip every f64
    format!("{v:.16e}")
}

/// Writes a closed-loop trajectory as LF-terminated CSV.
pub fn write_trajectory_csv<W: Write>(writer: W, n: usize, trajectory: &Trajectory) -> Result<(), ScenarioError> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    out.write_record(csv_header(n))?;
    for k in 0..trajectory.len() {
        let row = std::iter::once(trajectory.times[k])
            .chain(trajectory.states[k].iter().copied())
            .chain([trajectory.lyapunov[k], trajectory.equilibrium_residuals[k]])
            .map(fmt);
        out.write_record(row)?;
    }
    out.flush()?;
    Ok(())
}

/// Simulates the closed loop described by `config`, streaming the trajectory
/// to `csv_out`.
///
/// On divergence the partial trajectory is still written before the error is
/// returned.
pub fn run_simulate<W: Write>(config: &ScenarioConfig, csv_out: W) -> Result<SimulationSummary, ScenarioError> {
    let market = config.market()?;
    let cap = config.cap()?;
    let n = market.len();
    let settings = config.settings();
    let initial = config.initial_state(&market, cap)?.to_vec();
    let reference = assemble_equilibrium(&market, cap);
    let reference_flat = reference.to_vec();
    let system = ClosedLoopSystem::new(&market, cap);

    let trajectory = match integrate(&system, &initial, &reference_flat, &settings) {
        Ok(t) => t,
        Err(DynamicsError::NonfiniteState { time, partial }) => {
            write_trajectory_csv(csv_out, n, &partial)?;
            return Err(DynamicsError::NonfiniteState { time, partial }.into());
        }
        Err(e) => return Err(e.into()),
    };
    write_trajectory_csv(csv_out, n, &trajectory)?;

    let convergence = convergence_report(&trajectory, &reference_flat, CONVERGENCE_TOL);
    let l = Layout::new(n);
    let last = trajectory.final_state().expect("trajectory has the initial sample");
    Ok(SimulationSummary {
        convergence,
        method: settings.method,
        h: settings.h,
        t_end: settings.t_end,
        rows: trajectory.len(),
        lambda_max: cap.value(),
        final_x: last[l.x()].to_vec(),
        final_lambda: last[l.lambda()],
        final_u: last[l.u()].to_vec(),
        equilibrium_x: reference.x,
        equilibrium_lambda: reference.lambda,
        equilibrium_u: reference.u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{load_config, InitKind, InitialCondition};

    const TABLE1: &str = include_str!("../../fixtures/table1.json");

    fn rows(csv: &[u8]) -> Vec<Vec<f64>> {
        let text = std::str::from_utf8(csv).unwrap();
        text.lines()
            .skip(1)
            .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
            .collect()
    }

    #[test]
    fn header_layout() {
        let h = csv_header(2);
        assert_eq!(
            h.join(","),
            "t,x_1,x_2,rho_1,rho_2,eps_1,eps_2,lambda,u_1,u_2,pi_1,pi_2,nu,mu,V,eq_residual"
        );
        assert_eq!(csv_header(4).len(), 5 * 4 + 6);
    }

    #[test]
    fn single_step_has_two_rows() {
        let mut c = load_config(TABLE1).unwrap();
        c.sim.t_end = c.sim.h;
        c.sim.record_stride = 1;
        let mut buf = Vec::new();
        let s = run_simulate(&c, &mut buf).unwrap();
        assert_eq!(s.rows, 2);
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(!text.contains('\r'));
        assert!(text.lines().all(|l| !l.ends_with(',')));
        assert_eq!(rows(&buf).len(), 2);
    }

    #[test]
    fn equilibrium_start_stays_put() {
        let mut c = load_config(TABLE1).unwrap();
        c.sim.init = InitialCondition::Named(InitKind::Equilibrium);
        c.sim.t_end = 5.0;
        c.sim.record_stride = 50;
        let mut buf = Vec::new();
        let s = run_simulate(&c, &mut buf).unwrap();
        assert!(s.convergence.converged);
        let data = rows(&buf);
        for row in &data[1..] {
            for (a, b) in row[1..].iter().zip(&data[0][1..]) {
                assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn divergence_flushes_partial_csv() {
        let mut c = load_config(TABLE1).unwrap();
        c.sim.method = Method::Euler;
        c.sim.h = 0.5;
        c.sim.record_stride = 1;
        let mut buf = Vec::new();
        let err = run_simulate(&c, &mut buf).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(rows(&buf).len() >= 2);
    }
}
