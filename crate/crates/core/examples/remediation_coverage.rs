//! Output partition and remediation coverage: required actions decide
//! whether the report can be final.
//!
//! ```text
//! cargo run --example remediation_coverage
//! ```

use chrono::{TimeZone, Utc};

use fria::catalog::parse_catalog;
use fria::fixture;
use fria::remediation::{ActionStatus, ActionType, RemediationAction};
use fria::scenarios::{ControlAssessment, ControlEffectiveness, DimensionScores};
use fria::session::{parse_script, run_script};
use fria::store::MemoryStore;
use fria::workflow::EvaluationInput;
use fria::{Command, Workflow};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let catalog = parse_catalog(fixture::TRIAGE_CATALOG.as_bytes())?;
    // The fixture without its remediation actions.
    let script: String = fixture::TRIAGE_SCRIPT
        .lines()
        .filter(|l| !l.starts_with("action|"))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut wf = Workflow::new(catalog, MemoryStore::new());
    let outcome = run_script(&mut wf, &parse_script(&script)?)?;
    let id = outcome.assessment_id.as_str();
    let at = Utc.with_ymd_and_hms(2025, 4, 1, 9, 0, 0).unwrap();
    let lead = fixture::clinical_lead();

    let report = wf.report(id)?;
    let section = &report.remediation_section;
    println!("required:    {:?}", section.required);
    println!("recommended: {:?}", section.recommended);
    println!("uncovered:   {:?} -> {:?}", section.uncovered_required, report.status);

    // Actions are only accepted for scenarios that need remediation.
    let mut action = RemediationAction {
        id: "act-1".into(),
        scenario_id: fixture::FAIRNESS_SCENARIO.into(),
        action_type: ActionType::Monitoring,
        description: "Conduct periodic bias assessments.".into(),
        owner: fixture::coordinator(),
        status: ActionStatus::Proposed,
        due: None,
    };
    wf.execute_at_head(id, Command::AddAction(action.clone()), &lead, at)?;
    let report = wf.report(id)?;
    println!(
        "after act-1: uncovered {:?} -> {:?}",
        report.remediation_section.uncovered_required, report.status
    );

    action.id = "act-2".into();
    action.scenario_id = "data_governance.none".into();
    if let Err(e) = wf.execute_at_head(id, Command::AddAction(action), &lead, at) {
        println!("rejected:    {e}");
    }

    // Completing an action on a Relevant scenario suggests evaluating it again;
    // a new evaluation reopens Phase 2 until the gate is completed again.
    wf.execute_at_head(
        id,
        Command::SetActionStatus {
            action_id: "act-1".into(),
            status: ActionStatus::Done,
        },
        &lead,
        at,
    )?;
    println!(
        "re-evaluate: {:?}",
        wf.report(id)?.remediation_section.reevaluation_suggested
    );
    wf.execute_at_head(
        id,
        Command::EvaluateScenario(EvaluationInput {
            scenario_id: fixture::FAIRNESS_SCENARIO.into(),
            dimensions: DimensionScores::new(2, 2, 2, 3),
            control: ControlAssessment {
                effectiveness: ControlEffectiveness::Effective,
                evidence_refs: vec!["bias-assessment-2025".into()],
                control_owner: fixture::coordinator(),
            },
            rationale: "Bias assessment completed and training data rebalanced.".into(),
            override_: None,
        }),
        &lead,
        at,
    )?;
    wf.execute_at_head(id, Command::CompletePhase2, &lead, at)?;
    let report = wf.report(id)?;
    let row = report
        .phase2_table
        .iter()
        .find(|r| r.scenario_id == fixture::FAIRNESS_SCENARIO)
        .unwrap();
    println!(
        "fa.s1 now:   {:?} after {} evaluations",
        row.classification, row.evaluation_count
    );
    Ok(())
}
