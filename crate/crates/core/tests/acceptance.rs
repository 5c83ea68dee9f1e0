//! Acceptance criteria, one test each. Every test prints a single
//! `criterion N: PASS|FAIL` line before asserting.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sce_market::dynamics::{
    assemble_equilibrium, convergence_report, integrate, open_loop_equilibrium, reduced_equilibrium,
    stability_certificate, ClosedLoopState, ClosedLoopSystem, IntegrationSettings, Method, OpenLoopSystem,
    ReducedSystem,
};
use sce_market::equilibrium::{
    change_of_variables_matrix, kkt_residual_sce, lcp_oracle, map_sce_to_modified_primal, solve_ce,
    solve_modified_primal, solve_scalar_lcp, solve_sce, solve_sw_dual,
};
use sce_market::market::{validate_market, AgentParams, MarketInstance, SocialPriceCap};
use sce_market::scenario::{csv_header, load_config, random_instance, run_simulate, run_solve};

const TABLE1_JSON: &str = include_str!("../fixtures/table1.json");
const SEED: u64 = 2024;

fn table1() -> MarketInstance {
    validate_market(&[
        AgentParams::new(1.0, -50.0, 48.0),
        AgentParams::new(1.5, -60.0, 30.0),
        AgentParams::new(10.0, -40.0, 1.5),
        AgentParams::new(20.0, -20.0, 0.5),
    ])
    .unwrap()
}

fn cap(v: f64) -> SocialPriceCap {
    SocialPriceCap::new(v).unwrap()
}

fn random_cases(count: usize) -> Vec<(MarketInstance, SocialPriceCap)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    (0..count).map(|_| random_instance(&mut rng)).collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn verdict(criterion: u32, passed: bool, detail: String) {
    println!(
        "criterion {criterion}: {} ({detail})",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "criterion {criterion}: {detail}");
}

#[test]
fn criterion_1_ce_reproduction() {
    let m = table1();
    let start = Instant::now();
    let ce = solve_ce(&m);
    let elapsed = start.elapsed();
    let err = max_diff(&ce.x_bar, &[41.74, 34.5, 3.17, 0.59]).max((ce.lambda_bar - 8.26).abs());
    verdict(
        1,
        err <= 0.01 && elapsed < Duration::from_millis(1),
        format!("max deviation {err:.4}, runtime {elapsed:?}"),
    );
}

#[test]
fn criterion_2_sce_reproduction() {
    let m = table1();
    let start = Instant::now();
    let sce = solve_sce(&m, cap(4.0));
    let elapsed = start.elapsed();
    let err = max_diff(&sce.x_star, &[40.69, 34.98, 3.55, 0.79]).max(max_diff(&sce.u_star, &[5.31, 3.54, 0.53, 0.26]));
    verdict(
        2,
        sce.lambda_star == 4.0 && err <= 0.01 && elapsed < Duration::from_millis(1),
        format!(
            "lambda* = {}, max deviation {err:.4}, runtime {elapsed:?}",
            sce.lambda_star
        ),
    );
}

#[test]
fn criterion_3_closed_loop_convergence() {
    let m = table1();
    let reference = assemble_equilibrium(&m, cap(4.0)).to_vec();
    let settings = IntegrationSettings::new(1e-3, 100.0, Method::Euler, 100);
    let start = Instant::now();
    let result = integrate(
        &ClosedLoopSystem::new(&m, cap(4.0)),
        &ClosedLoopState::zeros(4).to_vec(),
        &reference,
        &settings,
    );
    let elapsed = start.elapsed();
    match result {
        Ok(traj) => {
            let r = convergence_report(&traj, &reference, 1e-3);
            let slack = 1e-8 * r.initial_lyapunov.max(1.0);
            verdict(
                3,
                r.converged && r.mu_violation == 0.0 && r.worst_lyapunov_increase <= slack && elapsed.as_secs_f64() < 5.0,
                format!(
                    "final error {:.3e}, mu violation {:.1e}, worst V increase {:.3e} (slack {slack:.1e}), runtime {elapsed:?}",
                    r.final_error, r.mu_violation, r.worst_lyapunov_increase
                ),
            );
        }
        Err(e) => verdict(3, false, format!("{e}, runtime {elapsed:?}")),
    }
}

#[test]
fn criterion_4_open_loop_convergence() {
    let m = table1();
    let ce = solve_ce(&m);
    let open_ref = open_loop_equilibrium(&m);
    let reduced_ref = reduced_equilibrium(&m);
    let settings = IntegrationSettings::new(1e-2, 1200.0, Method::Rk4, 1000);
    let start = Instant::now();
    let open = integrate(
        &OpenLoopSystem::new(&m),
        &vec![0.0; open_ref.len()],
        &open_ref,
        &settings,
    )
    .unwrap();
    let reduced = integrate(&ReducedSystem::new(&m), &[0.0; 5], &reduced_ref, &settings).unwrap();
    let elapsed = start.elapsed();

    let o = open.final_state().unwrap();
    let r = reduced.final_state().unwrap();
    let open_xl = [o[0], o[1], o[2], o[3], o[12]];
    let mut ce_xl = ce.x_bar.clone();
    ce_xl.push(ce.lambda_bar);
    let to_ce = max_diff(&open_xl, &ce_xl);
    let agreement = max_diff(&open_xl, r);
    verdict(
        4,
        to_ce <= 1e-3 && agreement <= 1e-3 && elapsed.as_secs_f64() < 5.0,
        format!("rk4 h = 0.01, T = 1200: error to CE {to_ce:.3e}, reduced gap {agreement:.3e}, runtime {elapsed:?}"),
    );
}

#[test]
fn criterion_5_oracle_equivalence() {
    let cases = random_cases(200);
    let start = Instant::now();
    let mut oracle_gap = 0.0_f64;
    let mut kkt = 0.0_f64;
    for (m, c) in &cases {
        oracle_gap = oracle_gap.max((solve_scalar_lcp(m, *c) - lcp_oracle(m, *c, 1e-10)).abs());
        let sce = solve_sce(m, *c);
        kkt = kkt.max(kkt_residual_sce(m, *c, &sce).unwrap().max_field());
    }
    let elapsed = start.elapsed();
    verdict(
        5,
        oracle_gap <= 1e-8 && kkt <= 1e-9 && elapsed.as_secs_f64() < 5.0,
        format!(
            "{} instances: oracle gap {oracle_gap:.2e}, worst KKT field {kkt:.2e}, runtime {elapsed:?}",
            cases.len()
        ),
    );
}

#[test]
fn criterion_6_duality_chain() {
    let mut dual = 0.0_f64;
    let mut comp = 0.0_f64;
    let mut mapping = 0.0_f64;
    let mut det = 0.0_f64;
    for (m, c) in &random_cases(200) {
        dual = dual.max((solve_sw_dual(m) - solve_ce(m).lambda_bar).abs());
        let mp = solve_modified_primal(m, *c);
        comp = comp
            .max((mp.mu_s_bar * mp.s_bar).abs())
            .max((-mp.mu_s_bar).max(0.0))
            .max((-mp.s_bar).max(0.0));
        let (y, s) = map_sce_to_modified_primal(m, &solve_sce(m, *c)).unwrap();
        mapping = mapping.max(max_diff(&y, &mp.y_bar)).max((s - mp.s_bar).abs());
        det = det.max((change_of_variables_matrix(m).determinant() - m.s2()).abs() / m.s2());
    }
    verdict(
        6,
        dual <= 1e-12 && comp <= 1e-9 && mapping <= 1e-9 && det <= 1e-12,
        format!("dual {dual:.2e}, complementarity {comp:.2e}, mapping {mapping:.2e}, det relative {det:.2e}"),
    );
}

#[test]
fn criterion_7_stability_certificate() {
    let start = Instant::now();
    let mut markets = vec![table1()];
    markets.extend(random_cases(10).into_iter().map(|(m, _)| m));
    let (mut eig, mut fact) = (f64::NEG_INFINITY, 0.0_f64);
    for m in &markets {
        let cert = stability_certificate(m);
        eig = eig.max(cert.max_eigenvalue_x_sym);
        fact = fact.max(cert.factorization_residual);
    }
    let elapsed = start.elapsed();
    verdict(
        7,
        fact <= 1e-12 && eig <= 1e-10 && elapsed.as_secs_f64() < 1.0,
        format!(
            "{} markets: factorization residual {fact:.2e}, max eigenvalue {eig:.2e}, runtime {elapsed:?}",
            markets.len()
        ),
    );
}

#[test]
fn criterion_8_inactive_cap() {
    let m = table1();
    let ce = solve_ce(&m);
    let loose = solve_sce(&m, cap(10.0));
    let u_norm = loose.u_star.iter().fold(0.0_f64, |a, u| a.max(u.abs()));
    let gap = max_diff(&loose.x_star, &ce.x_bar).max((loose.lambda_star - ce.lambda_bar).abs());
    let at_ce = solve_sce(&m, cap(ce.lambda_bar));
    let comp = kkt_residual_sce(&m, cap(ce.lambda_bar), &at_ce)
        .unwrap()
        .complementarity_gap;
    verdict(
        8,
        u_norm <= 1e-9 && gap <= 1e-9 && at_ce.nu_star == 0.0 && comp == 0.0,
        format!(
            "|u*| {u_norm:.1e}, SCE-CE gap {gap:.1e}, nu* at cap = CE price {}, gap {comp}",
            at_ce.nu_star
        ),
    );
}

#[test]
fn criterion_9_io_determinism() {
    let config = load_config(TABLE1_JSON).unwrap();
    let runs: Vec<String> = (0..3).map(|_| run_solve(&config).unwrap().to_json()).collect();
    let identical = runs.windows(2).all(|w| w[0].as_bytes() == w[1].as_bytes());

    let mut short = config.clone();
    short.sim.t_end = 1.0;
    short.sim.record_stride = 10;
    let mut buf = Vec::new();
    run_simulate(&short, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let n = config.agents.len();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    // time column plus 5N + 5 value columns
    let header_ok = header == csv_header(n) && header[0] == "t" && header.len() - 1 == 5 * n + 5;
    let rows_ok = lines.all(|l| {
        let cells: Vec<&str> = l.split(',').collect();
        cells.len() == header.len() && cells.iter().all(|c| c.parse::<f64>().is_ok_and(f64::is_finite))
    });
    verdict(
        9,
        identical && header_ok && rows_ok && !text.contains('\r'),
        format!("solve byte-identical: {identical}, header: {header_ok}, rows finite: {rows_ok}"),
    );
}
