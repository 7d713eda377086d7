//! Optimal stopping as a control system: the Bellman value along the
//! never-yet-stopped control *is* the Snell envelope.
//!
//! Run with `cargo run --example snell_envelope`.

use coherent_control::campaign::{run_snell_campaign, SnellConfig};
use coherent_control::control::{bellman_value, solve};
use coherent_control::finite::ProbMeasure;
use coherent_control::models::{build_optimal_stopping, snell_envelope};
use coherent_control::process::DiscreteProcess;
use coherent_control::rational::{format_fraction, rat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // A certain 2/5 now against a fair coin paying {0, 1} at time 1.
    let x = DiscreteProcess::new(vec![
        vec![rat(2, 5), rat(0, 1)],
        vec![rat(2, 5), rat(1, 1)],
    ])?;
    let p = ProbMeasure::uniform(2);

    let oss = build_optimal_stopping(&x, &p)?;
    println!(
        "controls = all {} stopping times of the coin process; J(τ) = X_τ",
        oss.system.controls.len()
    );
    let (v, optimal) = solve(&oss.system)?;
    println!(
        "value {} — wait for the coin; optimizers: {}",
        format_fraction(&v.expect("nonempty")),
        optimal.join(", ")
    );

    let env = snell_envelope(&x, &p)?;
    println!("\nbackward-induction envelope vs Bellman value along τ ≡ horizon:");
    for (t, envelope) in env.iter().enumerate() {
        let ti = oss.system.time_index(&format!("t{t}")).expect("time");
        let bell = bellman_value(&oss.system, oss.never_stop, ti)?;
        let e: Vec<String> = envelope.values().iter().map(format_fraction).collect();
        let b: Vec<String> = bell.values().iter().map(format_fraction).collect();
        println!("  t = {t}: envelope ({})  bellman ({})", e.join(", "), b.join(", "));
        assert_eq!(*envelope, bell, "the two routes must agree exactly");
    }

    // And at random: two independent routes to the same object.
    let report = run_snell_campaign(&SnellConfig { instances: 50, ..Default::default() })?;
    println!(
        "\nrandom campaign: {} stopping systems, {} mismatches",
        report.instances,
        report.failures.len()
    );
    Ok(())
}
