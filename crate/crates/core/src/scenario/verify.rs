//! Randomized self-check of every module's invariants.
//!
//! Each check draws from a seeded generator, so a given `(seed, instances)`
//! pair always exercises the same markets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    assemble_equilibrium, convergence_report, integrate, max_real_eigenvalue, open_loop_equilibrium, open_loop_matrix,
    reduced_equilibrium, rhs_closed_loop, spectral_abscissa, stability_certificate, ClosedLoopSystem,
    IntegrationSettings, Layout, Method, OpenLoopSystem, ReducedSystem, Trajectory,
};
use crate::equilibrium::{
    aggregate_slack, change_of_variables_matrix, kkt_residual_sce, lcp_oracle, map_sce_to_modified_primal, solve_ce,
    solve_modified_primal, solve_scalar_lcp, solve_sce, solve_sw_dual,
};
use crate::market::{
    conditional_projection, phi, utility, validate_market, AgentParams, MarketInstance, SocialPriceCap,
};

use super::{
    csv_header, load_config, run_simulate, run_solve, run_sweep, ScenarioConfig, CONVERGENCE_TOL, RESIDUAL_TOL,
};

/// Scalar complementarity solver under test.
pub type LcpSolver = fn(&MarketInstance, SocialPriceCap) -> f64;

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub instances: usize,
    pub seed: u64,
    pub lcp_solver: LcpSolver,
    /// Random instances simulated in addition to the configured market.
    pub simulated_instances: usize,
    /// Longest simulated horizon; instances whose linearized decay is too
    /// slow for it are reported as excluded.
    pub horizon_budget: f64,
}

impl VerifyOptions {
    pub fn new(instances: usize, seed: u64) -> Self {
        Self {
            instances,
            seed,
            lcp_solver: solve_scalar_lcp,
            simulated_instances: 3,
            horizon_budget: 4000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub instances: usize,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        super::to_sorted_json(self)
    }
}

/// A random market with `N ∈ 1..=8`, `q ∈ [0.1, 20]`, `c0 ∈ [-100, 0]`,
/// `a ∈ [0, 50]` and a cap in `[-10, 30]`.
pub fn random_instance(rng: &mut impl Rng) -> (MarketInstance, SocialPriceCap) {
    let n = rng.gen_range(1..=8);
    let agents: Vec<_> = (0..n)
        .map(|_| {
            AgentParams::new(
                rng.gen_range(0.1..=20.0),
                rng.gen_range(-100.0..=0.0),
                rng.gen_range(0.0..=50.0),
            )
        })
        .collect();
    let market = validate_market(&agents).expect("sampled ranges are valid");
    let cap = SocialPriceCap::new(rng.gen_range(-10.0..=30.0)).expect("finite");
    (market, cap)
}

struct Checker {
    results: Vec<CheckResult>,
}

impl Checker {
    fn record(&mut self, name: &str, passed: bool, detail: String) {
        if passed {
            log::info!("PASS {name}: {detail}");
        } else {
            log::warn!("FAIL {name}: {detail}");
        }
        self.results.push(CheckResult {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    /// Records a check whose metric must stay at or below `tol`.
    fn bound(&mut self, name: &str, worst: f64, tol: f64) {
        self.record(name, worst <= tol, format!("worst {worst:.3e} (tolerance {tol:.1e})"));
    }
}

fn inf_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn run_verify(config: &ScenarioConfig, options: &VerifyOptions) -> Result<VerifyReport, super::ScenarioError> {
    let base_market = config.market()?;
    let base_cap = config.cap()?;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let cases: Vec<_> = (0..options.instances.max(1))
        .map(|_| random_instance(&mut rng))
        .collect();
    let mut c = Checker { results: Vec::new() };

    market_checks(&mut c, &cases, &mut rng);
    equilibrium_checks(&mut c, &cases, &mut rng, options);
    dynamics_checks(&mut c, &base_market, base_cap, &cases, options);
    scenario_checks(&mut c, config)?;

    Ok(VerifyReport {
        seed: options.seed,
        instances: cases.len(),
        checks: c.results,
    })
}

fn market_checks(c: &mut Checker, cases: &[(MarketInstance, SocialPriceCap)], rng: &mut ChaCha8Rng) {
    let mut ok = true;
    for _ in 0..1000 {
        let x = rng.gen_range(-100.0..100.0);
        let y = rng.gen_range(1e-9..100.0);
        ok &= conditional_projection(x, y) == x && conditional_projection(x, 0.0) >= 0.0;
    }
    c.record("market.conditional_projection", ok, "1000 sampled (x, y) pairs".into());

    let mut decreasing = true;
    let mut worst_slope = 0.0_f64;
    for (m, _) in cases {
        let l1 = rng.gen_range(-50.0..50.0);
        let l2 = l1 + rng.gen_range(0.01..10.0);
        decreasing &= phi(m, l1).iter().zip(phi(m, l2)).all(|(a, b)| *a > b);
        let direct = |l: f64| phi(m, l).iter().sum::<f64>() - m.sum_a();
        let slope = (direct(l2) - direct(l1)) / (l2 - l1);
        worst_slope = worst_slope.max((slope + m.s1()).abs() / m.s1());
        worst_slope = worst_slope.max((aggregate_slack(m, l1) - direct(l1)).abs() / m.residual_scale());
    }
    c.record(
        "market.phi_decreasing",
        decreasing,
        format!("{} instances", cases.len()),
    );
    c.bound("market.slack_affine", worst_slope, 1e-9);

    let mut concave = true;
    for (m, _) in cases {
        for agent in m.agents() {
            let (x1, x2): (f64, f64) = (rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
            if (x1 - x2).abs() < 1e-3 {
                continue;
            }
            let u = rng.gen_range(-10.0..10.0);
            let theta = rng.gen_range(0.05..0.95);
            let mid = utility(agent, theta * x1 + (1.0 - theta) * x2, u);
            concave &= mid > theta * utility(agent, x1, u) + (1.0 - theta) * utility(agent, x2, u);
        }
    }
    c.record("market.utility_concave", concave, "sampled chords".into());
}

fn equilibrium_checks(
    c: &mut Checker,
    cases: &[(MarketInstance, SocialPriceCap)],
    rng: &mut ChaCha8Rng,
    options: &VerifyOptions,
) {
    let mut ce_worst = 0.0_f64;
    let mut dual_worst = 0.0_f64;
    let mut kkt_worst = 0.0_f64;
    let mut structure = true;
    let mut inactive_worst = 0.0_f64;
    let mut monotone_worst = 0.0_f64;
    let mut cov_worst = 0.0_f64;
    let mut det_worst = 0.0_f64;
    let mut norm_violation = 0.0_f64;
    let mut oracle_worst = 0.0_f64;

    for (m, cap) in cases {
        let scale = m.residual_scale();
        let ce = solve_ce(m);
        let gap = (ce.x_bar.iter().sum::<f64>() - m.sum_a()).abs();
        let stat = m
            .agents()
            .iter()
            .zip(&ce.x_bar)
            .fold(0.0_f64, |w, (r, x)| w.max((r.q * x + r.c0 + ce.lambda_bar).abs()));
        ce_worst = ce_worst.max(gap.max(stat) / scale);
        dual_worst = dual_worst.max((solve_sw_dual(m) - ce.lambda_bar).abs() / ce.lambda_bar.abs().max(1.0));

        let sce = solve_sce(m, *cap);
        let r = kkt_residual_sce(m, *cap, &sce).expect("solver output has matching dimensions");
        kkt_worst = kkt_worst.max(r.max_field() / scale);
        structure &= sce.nu_star == 0.0 || sce.lambda_star == cap.value();

        let loose = SocialPriceCap::new(ce.lambda_bar + rng.gen_range(0.0..20.0)).unwrap();
        let relaxed = solve_sce(m, loose);
        let mut dev = relaxed.u_star.iter().fold(0.0_f64, |w, u| w.max(u.abs()));
        dev = dev.max(inf_norm_diff(&relaxed.x_star, &ce.x_bar));
        inactive_worst = inactive_worst.max(dev / scale);

        let hi = cap.value().min(ce.lambda_bar);
        let d = rng.gen_range(0.01..5.0);
        let nu_hi = solve_sce(m, SocialPriceCap::new(hi).unwrap()).nu_star;
        let nu_lo = solve_sce(m, SocialPriceCap::new(hi - d).unwrap()).nu_star;
        let want = d * m.s1() / m.s2();
        monotone_worst = monotone_worst.max(((nu_lo - nu_hi) - want).abs() / (1.0 + want));
        if nu_lo <= nu_hi {
            monotone_worst = f64::INFINITY;
        }

        let mp = solve_modified_primal(m, *cap);
        let (y, s) = map_sce_to_modified_primal(m, &sce).expect("dimensions match");
        let mut cov = inf_norm_diff(&y, &mp.y_bar).max((s - mp.s_bar).abs());
        cov = cov
            .max((mp.mu_s_bar * mp.s_bar).abs())
            .max((-mp.mu_s_bar).max(0.0))
            .max((-mp.s_bar).max(0.0));
        cov_worst = cov_worst.max(cov / scale);
        det_worst = det_worst.max((change_of_variables_matrix(m).determinant() - m.s2()).abs() / m.s2());

        // Sampled feasible competitors: λ' <= λ_max and Σ u'_i / q_i = slack(λ').
        let best = sce.u_star.iter().map(|u| u * u).sum::<f64>().sqrt();
        for _ in 0..5 {
            let lam = cap.value() - rng.gen_range(0.0..10.0);
            let target = aggregate_slack(m, lam);
            let w: Vec<f64> = m.q().iter().map(|q| 1.0 / q).collect();
            let raw: Vec<f64> = (0..m.len()).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let shift =
                (raw.iter().zip(&w).map(|(r, w)| r * w).sum::<f64>() - target) / w.iter().map(|w| w * w).sum::<f64>();
            let competitor = raw.iter().zip(&w).map(|(r, w)| r - shift * w);
            let norm = competitor.map(|u| u * u).sum::<f64>().sqrt();
            norm_violation = norm_violation.max((best - norm) / (1.0 + best));
        }

        let exact = (options.lcp_solver)(m, *cap);
        oracle_worst = oracle_worst.max((exact - lcp_oracle(m, *cap, 1e-10)).abs());
    }

    c.bound("equilibrium.ce_kkt", ce_worst, RESIDUAL_TOL);
    c.bound("equilibrium.sw_dual_round_trip", dual_worst, 1e-12);
    c.bound("equilibrium.sce_kkt", kkt_worst, RESIDUAL_TOL);
    c.record(
        "equilibrium.complementarity_structure",
        structure,
        "nu* = 0 or lambda* = lambda_max on every instance".into(),
    );
    c.bound("equilibrium.inactive_cap", inactive_worst, RESIDUAL_TOL);
    c.bound("equilibrium.nu_monotone", monotone_worst, 1e-9);
    c.bound("equilibrium.change_of_variables", cov_worst, RESIDUAL_TOL);
    c.bound("equilibrium.det_m", det_worst, 1e-12);
    c.bound("equilibrium.minimum_norm", norm_violation, 1e-9);
    c.bound("equilibrium.lcp_oracle", oracle_worst, 1e-8);
}

/// Simulates `system` until the linearized decay rate says the error should be
/// well below tolerance, or reports why that horizon is out of reach.
fn horizon_for(alpha: f64, initial_error: f64, budget: f64) -> Result<f64, String> {
    if alpha > -1e-6 {
        return Err(format!("undamped linearized mode (abscissa {alpha:.2e})"));
    }
    let needed = ((initial_error.max(1.0) / CONVERGENCE_TOL) * 100.0).ln() / -alpha;
    if needed > budget {
        return Err(format!(
            "decay rate {alpha:.2e} needs horizon {needed:.0} > budget {budget:.0}"
        ));
    }
    Ok(needed.max(10.0))
}

fn rk4_step(market: &MarketInstance) -> f64 {
    let stiff = market.agents().iter().fold(0.0_f64, |m, r| m.max(r.q + 1.0 / r.q));
    (1.0 / (stiff + 2.0)).min(0.02)
}

struct LoopRun {
    error: f64,
    trajectory: Trajectory,
    reference: Vec<f64>,
}

fn simulate_closed_loop(market: &MarketInstance, cap: SocialPriceCap, horizon: f64) -> Result<LoopRun, String> {
    let reference = assemble_equilibrium(market, cap);
    let reference_flat = reference.to_vec();
    let n = market.len();
    let settings = IntegrationSettings::new(rk4_step(market), horizon, Method::Rk4, 100);
    let init = vec![0.0; Layout::new(n).dim()];
    let trajectory =
        integrate(&ClosedLoopSystem::new(market, cap), &init, &reference_flat, &settings).map_err(|e| e.to_string())?;
    let last = trajectory.final_state().unwrap();
    let l = Layout::new(n);
    let error = inf_norm_diff(&last[l.x()], &reference.x)
        .max((last[l.lambda()] - reference.lambda).abs())
        .max(inf_norm_diff(&last[l.u()], &reference.u));
    Ok(LoopRun {
        error,
        trajectory,
        reference: reference_flat,
    })
}

fn dynamics_checks(
    c: &mut Checker,
    base: &MarketInstance,
    base_cap: SocialPriceCap,
    cases: &[(MarketInstance, SocialPriceCap)],
    options: &VerifyOptions,
) {
    let mut fixed_worst = 0.0_f64;
    for (m, cap) in cases {
        let eq = assemble_equilibrium(m, *cap);
        let d = rhs_closed_loop(m, &eq, *cap).expect("assembled state is consistent");
        fixed_worst = fixed_worst.max(d.max_abs() / m.residual_scale());
        if eq.mu < 0.0 || eq.nu < 0.0 || eq.mu * eq.nu != 0.0 {
            fixed_worst = f64::INFINITY;
        }
    }
    c.bound("dynamics.fixed_point", fixed_worst, 1e-9);

    let mut cert_worst_eig = f64::NEG_INFINITY;
    let mut cert_worst_fact = 0.0_f64;
    for (m, _) in std::iter::once(&(base.clone(), base_cap)).chain(cases.iter().take(10)) {
        let cert = stability_certificate(m);
        cert_worst_eig = cert_worst_eig.max(cert.max_eigenvalue_x_sym);
        cert_worst_fact = cert_worst_fact.max(cert.factorization_residual);
    }
    c.record(
        "dynamics.stability_certificate",
        cert_worst_eig <= 1e-10 && cert_worst_fact <= 1e-12,
        format!("max eigenvalue {cert_worst_eig:.2e}, factorization residual {cert_worst_fact:.2e}"),
    );

    // Closed loop: the configured market plus a few random ones.
    let mut sims = vec![(base.clone(), base_cap)];
    sims.extend(cases.iter().take(options.simulated_instances).cloned());
    let mut limit_ok = true;
    let mut notes = Vec::new();
    let mut lyap_ok = true;
    let mut lyap_note = String::new();
    let mut mu_ok = true;
    let mut simulated = 0;
    for (k, (m, cap)) in sims.iter().enumerate() {
        let alpha = spectral_abscissa(m, true).max(spectral_abscissa(m, false));
        let e0 = assemble_equilibrium(m, *cap).max_abs();
        match horizon_for(alpha, e0, options.horizon_budget) {
            Err(why) => notes.push(format!("#{k} excluded: {why}")),
            Ok(horizon) => match simulate_closed_loop(m, *cap, horizon) {
                Err(e) => {
                    limit_ok = false;
                    notes.push(format!("#{k} failed: {e}"));
                }
                Ok(run) => {
                    simulated += 1;
                    limit_ok &= run.error <= CONVERGENCE_TOL;
                    notes.push(format!("#{k} error {:.2e} at T = {horizon:.0}", run.error));
                    let rep = convergence_report(&run.trajectory, &run.reference, CONVERGENCE_TOL);
                    mu_ok &= rep.mu_violation == 0.0;
                    if k == 0 {
                        let slack = 1e-8 * rep.initial_lyapunov.max(1.0);
                        lyap_ok = rep.worst_lyapunov_increase <= slack;
                        lyap_note = format!(
                            "worst per-step increase {:.3e} vs slack {slack:.3e} (rk4, h = {})",
                            rep.worst_lyapunov_increase,
                            rk4_step(m)
                        );
                    }
                }
            },
        }
    }
    c.record(
        "dynamics.closed_loop_limit",
        limit_ok && simulated > 0,
        notes.join("; "),
    );
    c.record("dynamics.lyapunov_decrease", lyap_ok, lyap_note);
    c.record("dynamics.mu_nonnegative", mu_ok, format!("{simulated} simulations"));

    // Open loop and reduced dynamics on the configured market.
    let alpha = max_real_eigenvalue(&open_loop_matrix(base));
    let ce = solve_ce(base);
    let e0 = ce.x_bar.iter().fold(ce.lambda_bar.abs(), |m, x| m.max(x.abs()));
    match horizon_for(alpha, e0, options.horizon_budget) {
        Err(why) => c.record("dynamics.open_loop_limit", false, why),
        Ok(horizon) => {
            let n = base.len();
            let settings = IntegrationSettings::new(rk4_step(base), horizon, Method::Rk4, 1000);
            let open_ref = open_loop_equilibrium(base);
            let reduced_ref = reduced_equilibrium(base);
            let open = integrate(
                &OpenLoopSystem::new(base),
                &vec![0.0; open_ref.len()],
                &open_ref,
                &settings,
            );
            let reduced = integrate(&ReducedSystem::new(base), &vec![0.0; n + 1], &reduced_ref, &settings);
            match (open, reduced) {
                (Ok(open), Ok(reduced)) => {
                    let o = open.final_state().unwrap();
                    let r = reduced.final_state().unwrap();
                    let mut open_xl = o[..n].to_vec();
                    open_xl.push(o[3 * n]);
                    let err = inf_norm_diff(&open_xl, &reduced_ref);
                    let agree = inf_norm_diff(&open_xl, r);
                    c.bound("dynamics.open_loop_limit", err, CONVERGENCE_TOL);
                    c.bound("dynamics.reduced_agreement", agree, CONVERGENCE_TOL);
                }
                (a, b) => c.record(
                    "dynamics.open_loop_limit",
                    false,
                    format!("integration failed: {:?} / {:?}", a.err(), b.err()),
                ),
            }
        }
    }

    // Step refinement on a smooth stretch (projection inactive near an interior μ̄).
    let loose = SocialPriceCap::new(solve_ce(base).lambda_bar + 5.0).unwrap();
    let eq = assemble_equilibrium(base, loose).to_vec();
    let init: Vec<f64> = eq.iter().map(|v| v + 0.01).collect();
    let system = ClosedLoopSystem::new(base, loose);
    let final_at = |method, h| -> Vec<f64> {
        let s = IntegrationSettings::new(h, 2.0, method, 1_000_000);
        integrate(&system, &init, &eq, &s)
            .map(|t| t.final_state().unwrap().to_vec())
            .unwrap_or_else(|_| vec![f64::NAN; eq.len()])
    };
    let ratio = |method, h: f64| {
        let (a, b, c) = (
            final_at(method, h),
            final_at(method, h / 2.0),
            final_at(method, h / 4.0),
        );
        inf_norm_diff(&a, &b) / inf_norm_diff(&b, &c)
    };
    let euler = ratio(Method::Euler, 2e-3);
    let rk4 = ratio(Method::Rk4, 4e-2);
    c.record(
        "dynamics.step_refinement",
        euler > 1.5 && rk4 > 8.0,
        format!("successive-difference ratios: euler {euler:.2} (order 1 -> 2), rk4 {rk4:.2} (order 4 -> 16)"),
    );
}

fn scenario_checks(c: &mut Checker, config: &ScenarioConfig) -> Result<(), super::ScenarioError> {
    let round_trip = load_config(&config.to_json())
        .map(|back| back == *config)
        .unwrap_or(false);
    c.record("scenario.config_round_trip", round_trip, "serialize then reload".into());

    let n = config.agents.len();
    let mut short = config.clone();
    short.sim.t_end = 20.0 * short.sim.h;
    short.sim.record_stride = 1;
    let mut buf = Vec::new();
    let csv_ok = match run_simulate(&short, &mut buf) {
        Ok(_) => {
            let text = String::from_utf8_lossy(&buf);
            let mut lines = text.lines();
            let header_ok = lines.next() == Some(csv_header(n).join(",").as_str());
            let rows_ok = lines.all(|l| {
                let cells: Vec<_> = l.split(',').collect();
                cells.len() == 5 * n + 6 && cells.iter().all(|v| v.parse::<f64>().is_ok_and(f64::is_finite))
            });
            header_ok && rows_ok
        }
        Err(_) => false,
    };
    c.record("scenario.csv_schema", csv_ok, format!("{} columns per row", 5 * n + 6));

    let outputs: Vec<String> = (0..3)
        .map(|_| run_solve(config).map(|r| r.to_json()))
        .collect::<Result<_, _>>()?;
    c.record(
        "scenario.solve_determinism",
        outputs.windows(2).all(|w| w[0] == w[1]),
        "3 runs byte-compared".into(),
    );

    let lambda_ce = solve_ce(&config.market()?).lambda_bar;
    let caps: Vec<f64> = (0..=40).map(|i| lambda_ce - 10.0 + 0.5 * i as f64).collect();
    let rows = run_sweep(config, &caps)?;
    let monotone = rows
        .windows(2)
        .all(|w| w[1].nu_star <= w[0].nu_star && w[1].lambda_star >= w[0].lambda_star)
        && rows.iter().all(|r| r.lambda_star <= lambda_ce);
    c.record("scenario.sweep_monotone", monotone, format!("{} caps", caps.len()));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_is_deterministic() {
        let mut a = ChaCha8Rng::seed_from_u64(5);
        let mut b = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let (ma, ca) = random_instance(&mut a);
            let (mb, cb) = random_instance(&mut b);
            assert_eq!(ma, mb);
            assert_eq!(ca, cb);
            assert!((1..=8).contains(&ma.len()));
        }
    }

    fn table1() -> ScenarioConfig {
        load_config(include_str!("../../fixtures/table1.json")).unwrap()
    }

    #[test]
    fn default_checks_pass() {
        let report = run_verify(&table1(), &VerifyOptions::new(40, 7)).unwrap();
        for c in &report.checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
        assert!(report.check("equilibrium.lcp_oracle").is_some());
    }

    fn wrong_branch(market: &MarketInstance, cap: SocialPriceCap) -> f64 {
        solve_ce(market).lambda_bar.max(cap.value())
    }

    #[test]
    fn oracle_catches_wrong_branch() {
        let mut options = VerifyOptions::new(40, 7);
        options.lcp_solver = wrong_branch;
        options.simulated_instances = 0;
        let report = run_verify(&table1(), &options).unwrap();
        assert!(!report.passed());
        assert!(!report.check("equilibrium.lcp_oracle").unwrap().passed);
    }

    #[test]
    fn fixed_seed_reproduces_report() {
        let mut options = VerifyOptions::new(15, 3);
        options.simulated_instances = 0;
        let a = run_verify(&table1(), &options).unwrap();
        let b = run_verify(&table1(), &options).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn horizon_rules() {
        assert!(horizon_for(0.0, 1.0, 100.0).is_err());
        assert!(horizon_for(-1e-5, 1.0, 100.0).is_err());
        let h = horizon_for(-1.0, 1.0, 100.0).unwrap();
        assert!((h - (1e5f64).ln()).abs() < 1e-9);
    }
}
