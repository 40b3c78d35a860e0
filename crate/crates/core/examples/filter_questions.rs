//! Phase 0 drivers select the checklist questions that apply.
//!
//! ```text
//! cargo run --example filter_questions
//! ```

use fria::catalog::parse_catalog;
use fria::filtering::applicable_questions;
use fria::fixture;
use fria::profile::{DriverSet, LifecycleStage};

fn show(label: &str, catalog: &fria::Catalog, drivers: &DriverSet) {
    let ids: Vec<&str> = applicable_questions(catalog, drivers)
        .iter()
        .map(|q| q.id.as_str())
        .collect();
    println!("{label:<28} {:>2} questions: {}", ids.len(), ids.join(" "));
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let catalog = parse_catalog(fixture::TRIAGE_CATALOG.as_bytes())?;
    let triage = DriverSet {
        lifecycle_stage: LifecycleStage::Implementation,
        domain_flags: ["health", "critical_decision"].map(String::from).into(),
        system_types: ["chatbot".to_string()].into(),
    };
    show("triage service", &catalog, &triage);

    // Going live brings in the use-phase monitoring question.
    let deployed = DriverSet {
        lifecycle_stage: LifecycleStage::Deployment,
        ..triage.clone()
    };
    show("after deployment", &catalog, &deployed);

    // Generative features bring in the synthetic content question.
    let mut generative = triage.clone();
    generative.domain_flags.insert("generative_ai".into());
    show("with generative features", &catalog, &generative);

    let bare = DriverSet {
        lifecycle_stage: LifecycleStage::Design,
        domain_flags: Default::default(),
        system_types: Default::default(),
    };
    show("no flags, design stage", &catalog, &bare);
    Ok(())
}
