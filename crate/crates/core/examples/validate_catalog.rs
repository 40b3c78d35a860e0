//! Parse and validate a catalog, then break it on purpose.
//!
//! ```text
//! cargo run --example validate_catalog [path/to/catalog.json]
//! ```

use fria::catalog::{canonical_serialize, parse_catalog, validate_catalog};
use fria::fixture;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bytes = match std::env::args().nth(1) {
        Some(path) => std::fs::read(path)?,
        None => fixture::TRIAGE_CATALOG.as_bytes().to_vec(),
    };
    let catalog = parse_catalog(&bytes)?;
    let report = validate_catalog(&catalog);
    println!(
        "{} domains, {} criteria, {} questions, {} scenario templates: {} findings",
        catalog.domains.len(),
        catalog.criteria.len(),
        catalog.questions.len(),
        catalog.scenario_templates.len(),
        report.findings.len()
    );

    // A criterion without scenario templates can never be analysed in Phase 2.
    let mut broken = catalog.clone();
    broken.scenario_templates.retain(|t| t.criterion_id != "fairness");
    for f in &validate_catalog(&broken).findings {
        println!("  {}\t{}\t{}", f.path, f.rule, f.message);
    }

    // Unknown fields are schema errors with a path.
    let typo = String::from_utf8(canonical_serialize(&catalog))?.replacen("\"name\"", "\"nmae\"", 1);
    if let Err(e) = parse_catalog(typo.as_bytes()) {
        println!("  parse error: {e}");
    }
    Ok(())
}
