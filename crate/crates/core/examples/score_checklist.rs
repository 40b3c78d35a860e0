//! Phase 1: answers become per-criterion relevance, and the gate decides
//! which criteria advance to scenario analysis.
//!
//! ```text
//! cargo run --example score_checklist
//! ```

use fria::catalog::parse_catalog;
use fria::checklist::{phase1_complete, score_criteria};
use fria::fixture;
use fria::profile::complete_phase0;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let catalog = parse_catalog(fixture::TRIAGE_CATALOG.as_bytes())?;
    let profile = fria::profile::create_profile(fixture::triage_profile_delta());
    let drivers = complete_phase0(&profile)?;
    let answers = fixture::triage_answers(&catalog, &drivers);

    println!("{:<18} {:>5}  {:<8}  contributing", "criterion", "score", "band");
    for s in score_criteria(&answers, &catalog, &drivers) {
        println!(
            "{:<18} {:>5}  {:<8}  {}",
            s.criterion_id,
            s.score,
            s.band.to_string(),
            s.contributing_question_ids.join(" ")
        );
    }

    let gate = phase1_complete(&answers, &catalog, &drivers)?;
    println!("advancing: {:?}", gate.advancing);
    for x in &gate.excluded {
        println!("excluded:  {} ({})", x.criterion_id, x.reason);
    }
    Ok(())
}
