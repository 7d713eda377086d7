//! Checking candidate value functions of the switching game against the
//! variational conditions W(i)–W(iv).
//!
//! Run with `cargo run --example verification_lemma`.

use coherent_control::mc::verifylemma::{
    check_verification_conditions, ValueCandidate, VerificationInput,
};

fn print_report(label: &str, report: &coherent_control::mc::verifylemma::VerificationReport) {
    println!("{label}:");
    for c in &report.conditions {
        println!(
            "  {:<7} points {:<5} max equality residual {:>9.2e}  violations {}  strict sign ok {}",
            c.name,
            c.points_checked,
            c.max_equality_residual,
            c.violations.len(),
            c.strict_region_ok
        );
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // h(z) = z/α against K = −2z/α: all four conditions with equality.
    let a = check_verification_conditions(&VerificationInput::case_a(1.0))?;
    print_report("exactly-compensated candidate (α = 1)", &a);
    assert!(a.passed(1e-10));

    // h(z) = ψ(|z|) against the fair-switch kernel: equality on each side of
    // the boundary l = 0, strict generator inequality below it.
    let b = check_verification_conditions(&VerificationInput::case_b(0.5))?;
    print_report("\nfair-switch candidate (α = 1/2, boundary 0)", &b);
    assert!(b.passed(1e-10));

    // A distorted candidate must be rejected, with locations.
    let mut bad = VerificationInput::case_b(0.5);
    bad.h = ValueCandidate::PerturbedB { coeff: 0.01 };
    let r = check_verification_conditions(&bad)?;
    print_report("\nsame kernel, candidate distorted by 0.01·z²", &r);
    let w1 = r.condition("W(i)").expect("reported");
    println!(
        "  rejected: {} generator violations, worst at z = {:.3}",
        w1.violations.len(),
        w1.violations
            .iter()
            .max_by(|x, y| x.2.total_cmp(&y.2))
            .map(|v| v.0)
            .unwrap_or(f64::NAN)
    );
    assert!(!r.passed(1e-10));
    Ok(())
}
