//! Information generated by a stopped process: a worked instance and a
//! randomized hunt for counterexamples that must not exist.
//!
//! Run with `cargo run --example galmarino_campaign`.

use coherent_control::campaign::{run_galmarino_campaign, GalmarinoConfig};
use coherent_control::process::{
    first_entrance_time, galmarino_check, natural_filtration, sigma_at, DiscreteProcess,
};
use coherent_control::rational::int;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Worked instance: a three-outcome process watched until it first hits 2.
    let x = DiscreteProcess::from_ints(&[&[0, 1, 2, 2], &[0, 1, 0, 2], &[0, 0, 0, 0]]);
    let s = first_entrance_time(&x, |v| *v == int(2));
    let f = natural_filtration(&x);
    println!(
        "first entrance into {{2}}: times {:?}",
        s.values().iter().map(|v| v.to_string()).collect::<Vec<_>>()
    );
    println!("stage-3 atoms of F^X: {:?}", f.stage(3).atoms());
    println!("atoms of F^X_S:       {:?}", sigma_at(&f, &s)?.atoms());
    let report = galmarino_check(&x, &s)?;
    println!("atoms of σ(X^S):      {:?}", report.sigma_of_stopped.atoms());
    println!("σ(X^S) = F^X_S: {}\n", report.fields_equal);

    // The theorems say this never fails in discrete time; go looking anyway.
    let cfg = GalmarinoConfig {
        instances: 300,
        allow_nonstopping: true,
        ..Default::default()
    };
    let campaign = run_galmarino_campaign(&cfg)?;
    println!(
        "campaign: {} instances, {} checks, {} violations (must be 0)",
        campaign.instances, campaign.checks_run, campaign.violations.len()
    );
    println!(
        "dropped the stopping hypothesis: {} probes where σ(X^S) = F^X_S breaks,",
        campaign.hypothesis_needed.len()
    );
    println!("confirming the hypothesis is doing real work. One of them:");
    if let Some(v) = campaign.hypothesis_needed.first() {
        println!("  {}", v.detail);
    }
    assert!(campaign.passed());
    Ok(())
}
