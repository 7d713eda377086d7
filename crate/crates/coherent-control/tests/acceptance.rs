//! Acceptance suite: one pass/fail line per criterion.
//!
//! The criteria run sequentially inside a single test so that reported
//! runtimes are honest on a shared machine and every line prints even when a
//! later criterion fails. Run with
//! `cargo test --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use coherent_control::campaign::{
    run_galmarino_campaign, run_lattice_bellman_campaign, run_mutation_campaign,
    run_snell_campaign, GalmarinoConfig, LatticeBellmanConfig, MutationConfig, SnellConfig,
};
use coherent_control::control::{bellman_value, solve, validate, verify_bellman};
use coherent_control::mc::analytic::case_b_value;
use coherent_control::mc::poisson::{simulate_poisson_drift, PoissonDriftConfig};
use coherent_control::mc::switching::{
    simulate_switching, value_convergence_study, CostModel, EpsilonThreshold, NeverSwitch,
    SwitchingConfig,
};
use coherent_control::mc::verifylemma::{check_verification_conditions, VerificationInput};
use coherent_control::models::build_box_picking;
use coherent_control::rational::rat;

struct Gate {
    failures: Vec<String>,
}

impl Gate {
    fn new() -> Self {
        Self { failures: Vec::new() }
    }

    fn report(
        &mut self,
        number: u32,
        name: &str,
        started: Instant,
        budget: Duration,
        passed: bool,
        detail: String,
    ) {
        let elapsed = started.elapsed();
        let in_time = elapsed <= budget;
        let verdict = passed && in_time;
        println!(
            "criterion {number:>2} ({name}): {} [{elapsed:.2?} ≤ {budget:.0?}] {detail}",
            if verdict { "PASS" } else { "FAIL" }
        );
        if !verdict {
            self.failures.push(format!(
                "criterion {number} ({name}): passed={passed} in_time={in_time} {detail}"
            ));
        }
    }
}

fn criterion_1_box_exact(gate: &mut Gate) {
    let started = Instant::now();
    let bp = build_box_picking();

    let (v, optimal) = solve(&bp.consistent).expect("solvable");
    let value_ok = v == Some(rat(7, 6)) && optimal == vec![bp.optimal_id.clone()];

    let consistent = verify_bellman(&bp.consistent).expect("verifiable");
    let b1_all = consistent.b1.iter().all(|c| c.passed);
    let b3_opt = consistent
        .b3
        .iter()
        .any(|c| c.name == format!("B3[{}]", bp.optimal_id) && c.passed);

    let classical = verify_bellman(&bp.classical).expect("verifiable");
    let c = bp.classical.control_index(&bp.optimal_id).expect("optimizer");
    let t1 = bp.classical.time_index("t1").expect("t1");
    let t0 = bp.classical.time_index("t0").expect("t0");
    let mu = &bp.classical.controls[c].measure;
    let w1 = mu
        .expectation(&bellman_value(&bp.classical, c, t1).expect("value"))
        .expect("finite");
    let w0 = mu
        .expectation(&bellman_value(&bp.classical, c, t0).expect("value"))
        .expect("finite");
    let witness_ok = w1 == rat(4, 3) && w0 == rat(7, 6) && w1 > w0;
    let classical_b1_fails = classical
        .b1
        .iter()
        .any(|r| r.name == format!("B1[{}]", bp.optimal_id) && !r.passed);

    let passed = value_ok && b1_all && b3_opt && witness_ok && classical_b1_fails;
    gate.report(
        1,
        "box picking exact",
        started,
        Duration::from_secs(1),
        passed,
        format!(
            "v = 7/6 unique: {value_ok}, B1 all {} controls: {b1_all}, B3[c*]: {b3_opt}, \
             classical E W*_1 = 4/3 > 7/6 with B1 witness: {}",
            bp.consistent.controls.len(),
            witness_ok && classical_b1_fails
        ),
    );
}

fn criterion_2_galmarino(gate: &mut Gate) {
    let started = Instant::now();
    let cfg = GalmarinoConfig {
        instances: 1000,
        max_outcomes: 8,
        max_horizon: 5,
        seed: 7,
        allow_nonstopping: false,
    };
    let report = run_galmarino_campaign(&cfg).expect("campaign runs");
    gate.report(
        2,
        "galmarino campaign",
        started,
        Duration::from_secs(30),
        report.passed(),
        format!(
            "{} instances, {} checks, {} violations",
            report.instances,
            report.checks_run,
            report.violations.len()
        ),
    );
}

fn criterion_3_lattice_bellman_and_mutations(gate: &mut Gate) {
    let started = Instant::now();
    let clean = run_lattice_bellman_campaign(&LatticeBellmanConfig {
        systems: 200,
        max_outcomes: 6,
        max_horizon: 3,
        subfields_per_system: 3,
        seed: 11,
    })
    .expect("campaign runs");
    let mutations =
        run_mutation_campaign(&MutationConfig { count: 50, max_outcomes: 6, max_horizon: 3, seed: 31 })
            .expect("mutations run");
    let passed = clean.lattice_failures.is_empty()
        && clean.chain_violations.is_empty()
        && clean.b1_failures.is_empty()
        && mutations.outcomes.len() == 50
        && mutations.all_caught();
    gate.report(
        3,
        "lattice/Bellman linkage",
        started,
        Duration::from_secs(60),
        passed,
        format!(
            "200 systems: lattice fails {}, chain breaks {}, B1 fails {}; mutations caught {}/50",
            clean.lattice_failures.len(),
            clean.chain_violations.len(),
            clean.b1_failures.len(),
            mutations.outcomes.iter().filter(|o| o.caught_by.is_some()).count()
        ),
    );

    // Criterion 4 quantifies over every system generated above, so it reads
    // off the same campaign; only the reporting is separate.
    let started4 = Instant::now();
    let exchange_ok = clean.exchange_failures.is_empty() && clean.exchange_checks >= 600;
    gate.report(
        4,
        "essential-supremum exchange",
        started4,
        Duration::from_secs(60),
        exchange_ok,
        format!(
            "{} conditional-exchange checks over random sub-σ-fields, {} failures",
            clean.exchange_checks,
            clean.exchange_failures.len()
        ),
    );
}

fn criterion_5_snell(gate: &mut Gate) {
    let started = Instant::now();
    let report = run_snell_campaign(&SnellConfig {
        instances: 100,
        max_outcomes: 5,
        max_horizon: 4,
        seed: 23,
    })
    .expect("campaign runs");
    gate.report(
        5,
        "snell bridge",
        started,
        Duration::from_secs(60),
        report.passed(),
        format!("{} stopping systems, {} mismatches", report.instances, report.failures.len()),
    );
}

fn criterion_6_switching_case_a(gate: &mut Gate) {
    let started = Instant::now();
    let mut all_ok = true;
    let mut details = Vec::new();
    for x in [0.0, 1.0] {
        let mut cfg = SwitchingConfig::new(1.0, x, 0.2);
        cfg.dt = 0.01;
        cfg.t_max = 20.0;
        cfg.n_paths = 100_000;
        cfg.seed = 1;
        cfg.cost = CostModel::ExactlyCompensated;
        cfg.target_tolerance = Some(0.02);
        let target = x / 1.0;

        let never = simulate_switching(&cfg, &NeverSwitch).expect("simulation runs");
        let thresh = simulate_switching(
            &cfg,
            &EpsilonThreshold { epsilon: 0.2, boundary: 0.0 },
        )
        .expect("simulation runs");
        for (label, out) in [("never", &never), ("threshold", &thresh)] {
            let ok = out.estimate.within(target, 0.02);
            all_ok &= ok;
            details.push(format!(
                "x={x} {label}: {:+.4}±{:.4} vs {target} {}",
                out.estimate.mean,
                out.estimate.std_error,
                if ok { "ok" } else { "OFF" }
            ));
        }
    }
    gate.report(
        6,
        "switching exactly-compensated",
        started,
        Duration::from_secs(120),
        all_ok,
        details.join("; "),
    );
}

fn criterion_7_switching_case_b(gate: &mut Gate) {
    let started = Instant::now();
    let mut base = SwitchingConfig::new(0.5, 0.0, 0.4);
    base.cost = CostModel::FairSwitch;
    base.t_max = 20.0;
    base.n_paths = 100_000;
    base.seed = 1;
    let target = case_b_value(0.5, 0.0); // 2.0 exactly
    let study = value_convergence_study(&base, 0.0, &[0.4, 0.2, 0.1, 0.05], 0.05)
        .expect("study runs");

    // Hard side: admissible strategies cannot beat the value.
    let bound_ok = study
        .rows
        .iter()
        .all(|r| r.estimate.mean <= target + r.estimate.three_se());
    // Trend side: nondecreasing within noise and the finest ε close to V.
    let last = study.rows.last().expect("grid nonempty");
    let allowance = last.estimate.three_se().max(0.05) + 0.1 * last.epsilon.sqrt();
    let close_ok = (last.estimate.mean - target).abs() <= allowance;
    let passed = bound_ok && study.trend_nondecreasing && close_ok;

    let rows: Vec<String> = study
        .rows
        .iter()
        .map(|r| format!("ε={}: {:.4}±{:.4}", r.epsilon, r.estimate.mean, r.estimate.std_error))
        .collect();
    gate.report(
        7,
        "switching fair-switch convergence",
        started,
        Duration::from_secs(300),
        passed,
        format!(
            "{}; bound ≤ 2+3SE: {bound_ok}, trend: {}, |{:.4} - 2| ≤ {:.4}: {close_ok}",
            rows.join(", "),
            study.trend_nondecreasing,
            last.estimate.mean,
            allowance
        ),
    );
}

fn criterion_8_verification_lemma(gate: &mut Gate) {
    let started = Instant::now();
    let a = check_verification_conditions(&VerificationInput::case_a(1.0)).expect("checker runs");
    let a_ok = a.passed(1e-10)
        && a.conditions.iter().all(|c| c.max_equality_residual <= 1e-10);

    let b = check_verification_conditions(&VerificationInput::case_b(0.5)).expect("checker runs");
    let w3 = b.condition("W(iii)").expect("reported");
    let w4 = b.condition("W(iv)").expect("reported");
    let w1 = b.condition("W(i)").expect("reported");
    let w2 = b.condition("W(ii)").expect("reported");
    let b_ok = w3.max_equality_residual <= 1e-10
        && w4.max_equality_residual <= 1e-10
        && w1.violations.is_empty()
        && w2.violations.is_empty()
        && w1.strict_region_ok;

    gate.report(
        8,
        "verification-lemma checker",
        started,
        Duration::from_secs(10),
        a_ok && b_ok,
        format!(
            "case a worst residual {:.1e}; case b W(iii) {:.1e}, W(iv) {:.1e}, strict sign ok {}",
            a.conditions
                .iter()
                .map(|c| c.max_equality_residual)
                .fold(0.0, f64::max),
            w3.max_equality_residual,
            w4.max_equality_residual,
            w1.strict_region_ok
        ),
    );
}

fn criterion_9_poisson(gate: &mut Gate) {
    let started = Instant::now();
    let mut cfg = PoissonDriftConfig::new(1.0, std::f64::consts::LN_2);
    cfg.n_paths = 200_000;
    cfg.seed = 1;
    let rep = simulate_poisson_drift(&cfg).expect("simulation runs");
    let tracker_ok = rep.tracker.within(1.0 / 3.0, 0.005);
    let gap_ok = rep.gap.within(-1.0 / 12.0, 0.005);
    gate.report(
        9,
        "poisson drift counterexample",
        started,
        Duration::from_secs(120),
        tracker_ok && gap_ok,
        format!(
            "E J(X̂) = {:.5}±{:.5} vs 1/3; gap = {:+.5}±{:.5} vs -1/12",
            rep.tracker.mean, rep.tracker.std_error, rep.gap.mean, rep.gap.std_error
        ),
    );
}

fn criterion_10_reproducibility(gate: &mut Gate) {
    let started = Instant::now();
    // Rerun criterion-6 and criterion-9 configurations under different
    // worker caps; estimates must agree bit for bit.
    let mut cfg = SwitchingConfig::new(1.0, 1.0, 0.2);
    cfg.dt = 0.01;
    cfg.t_max = 20.0;
    cfg.n_paths = 100_000;
    cfg.seed = 1;
    let rule = EpsilonThreshold { epsilon: 0.2, boundary: 0.0 };
    cfg.threads = Some(1);
    let one = simulate_switching(&cfg, &rule).expect("runs");
    cfg.threads = Some(3);
    let three = simulate_switching(&cfg, &rule).expect("runs");
    let sw_ok = one.estimate.mean.to_bits() == three.estimate.mean.to_bits()
        && one.estimate.std_error.to_bits() == three.estimate.std_error.to_bits();

    let mut pcfg = PoissonDriftConfig::new(1.0, std::f64::consts::LN_2);
    pcfg.n_paths = 200_000;
    pcfg.seed = 1;
    pcfg.threads = Some(1);
    let p_one = simulate_poisson_drift(&pcfg).expect("runs");
    pcfg.threads = Some(3);
    let p_three = simulate_poisson_drift(&pcfg).expect("runs");
    let po_ok = p_one.tracker.mean.to_bits() == p_three.tracker.mean.to_bits()
        && p_one.gap.mean.to_bits() == p_three.gap.mean.to_bits()
        && p_one.value_bound.mean.to_bits() == p_three.value_bound.mean.to_bits();

    gate.report(
        10,
        "thread-count reproducibility",
        started,
        Duration::from_secs(240),
        sw_ok && po_ok,
        format!("switching bit-identical: {sw_ok}; poisson bit-identical: {po_ok}"),
    );
}

#[test]
fn acceptance_suite() {
    let mut gate = Gate::new();
    // Sanity that the canonical fixture systems still validate before the
    // heavy criteria run.
    let bp = build_box_picking();
    assert!(validate(&bp.consistent).passed());
    assert!(validate(&bp.classical).passed());

    criterion_1_box_exact(&mut gate);
    criterion_2_galmarino(&mut gate);
    criterion_3_lattice_bellman_and_mutations(&mut gate);
    criterion_5_snell(&mut gate);
    criterion_6_switching_case_a(&mut gate);
    criterion_7_switching_case_b(&mut gate);
    criterion_8_verification_lemma(&mut gate);
    criterion_9_poisson(&mut gate);
    criterion_10_reproducibility(&mut gate);

    assert!(
        gate.failures.is_empty(),
        "acceptance failures:\n{}",
        gate.failures.join("\n")
    );
}
