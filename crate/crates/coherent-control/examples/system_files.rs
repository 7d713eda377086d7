//! The declarative system-file format: emit, reload, verify.
//!
//! Run with `cargo run --example system_files`.

use coherent_control::control::verify_bellman;
use coherent_control::fileio::{emit_json, parse_system, report_document, system_to_doc};
use coherent_control::models::build_box_picking;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bp = build_box_picking();
    let doc = system_to_doc(&bp.consistent, None);
    let text = emit_json(&doc);
    println!("system file ({} bytes), first lines:", text.len());
    for line in text.lines().take(12) {
        println!("  {line}");
    }
    println!("  ...");

    let dir = std::env::temp_dir().join("coherent-control-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("box_picking.sys");
    std::fs::write(&path, &text)?;

    let (reloaded, _) = parse_system(&std::fs::read_to_string(&path)?)?;
    assert_eq!(reloaded, bp.consistent, "round trip is structurally exact");
    println!("\nreloaded from {} — structurally identical", path.display());

    let report = verify_bellman(&reloaded)?;
    println!(
        "verified: axioms {}, B1 {}, value {}",
        report.validation.passed(),
        report.b1.iter().all(|c| c.passed),
        report.value
    );

    let rendered = emit_json(&report_document(text.as_bytes(), None, &report));
    let rendered_again = emit_json(&report_document(text.as_bytes(), None, &report));
    assert_eq!(rendered, rendered_again, "reports are byte-deterministic");
    println!("report document: {} bytes, digest pinned to the input file", rendered.len());
    Ok(())
}
