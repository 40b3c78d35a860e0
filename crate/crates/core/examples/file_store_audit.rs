//! Persist an assessment on disk, inspect its audit trail, and watch an
//! out-of-date write get rejected. A profile change that touches the drivers
//! sends the assessment back to Phase 1.
//!
//! ```text
//! cargo run --example file_store_audit [store-dir]
//! ```

use chrono::{TimeZone, Utc};

use fria::catalog::parse_catalog;
use fria::fixture;
use fria::profile::ProfileDelta;
use fria::session::{parse_script, run_script};
use fria::store::{AssessmentStore, FsStore};
use fria::{Command, Workflow};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let temp;
    let root = match std::env::args().nth(1) {
        Some(dir) => std::path::PathBuf::from(dir),
        None => {
            temp = std::env::temp_dir().join(format!("fria-example-{}", std::process::id()));
            temp
        }
    };
    let catalog = parse_catalog(fixture::TRIAGE_CATALOG.as_bytes())?;
    let mut wf = Workflow::new(catalog, FsStore::open(&root)?);
    let outcome = run_script(&mut wf, &parse_script(fixture::TRIAGE_SCRIPT)?)?;
    let id = outcome.assessment_id.as_str();

    println!("store at {}", root.display());
    for e in wf.store().audit(id)? {
        println!(
            "{:>3} {} {:<22} {:<28} {}",
            e.seq,
            e.at.format("%F"),
            e.actor.name,
            format!("{:?}", e.kind),
            e.subject
        );
    }

    let at = Utc.with_ymd_and_hms(2025, 4, 14, 9, 0, 0).unwrap();
    let coordinator = fixture::coordinator();
    let stale = wf.execute(id, 3, Command::CompletePhase2, &coordinator, at);
    println!("write against revision 3: {}", stale.unwrap_err());

    let change = ProfileDelta {
        domain_flags: Some(
            ["health", "critical_decision", "generative_ai"]
                .map(String::from)
                .into(),
        ),
        ..ProfileDelta::default()
    };
    let c = wf.execute(id, outcome.revision, Command::UpdateProfile(change), &coordinator, at)?;
    let record = wf.load(id, None)?;
    println!(
        "after adding generative_ai: revision {}, phase {}, stale {:?}",
        c.revision, record.phase, record.staleness
    );
    let new_questions: Vec<String> = wf
        .applicable_questions(id)?
        .into_iter()
        .filter(|q| record.answers.get(&q.id).is_none())
        .map(|q| q.id)
        .collect();
    println!("questions still to answer: {new_questions:?}");
    Ok(())
}
