//! The gate-based assessment state machine.
//!
//! [`apply`] is the single entry point for every mutation: it takes the
//! current [`AssessmentRecord`] and a [`Command`] and returns the next record
//! together with exactly one audit event. [`Workflow`] pairs it with a store
//! and an optimistic revision check.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::catalog::{Catalog, ChecklistQuestion};
use crate::checklist::{phase1_complete, Answer, AnswerSet, AnswerValue, GateDecision};
use crate::error::{Error, Result};
use crate::filtering::{applicable_questions, output_scenarios, OutputPartition};
use crate::profile::{
    complete_phase0, create_profile, update_profile, DriverSet, ProfileDelta, StakeholderRef, SystemProfile,
};
use crate::remediation::{required_remediations, ActionStatus, RemediationAction, RemediationLedger, RemediationNeeds};
use crate::report::{build_report, AssessmentReport};
use crate::scenarios::{
    evaluate_scenario, finalize_criterion, instantiate_scenarios, ControlAssessment, CriterionFinalClassification,
    DimensionScores, OverrideInput, ScenarioEvaluation, ScenarioInstance,
};
use crate::store::{AssessmentStore, AuditKind, Committed, PendingEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Phase {
    Phase0,
    Phase1,
    Phase2,
    Output,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Phase0 => "Phase0",
            Phase::Phase1 => "Phase1",
            Phase::Phase2 => "Phase2",
            Phase::Output => "Output",
        })
    }
}

/// Downstream results computed against drivers that have since changed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Staleness {
    pub phase1: bool,
    pub phase2: bool,
}

/// One revision of an assessment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssessmentRecord {
    pub id: String,
    pub revision: u64,
    pub phase: Phase,
    pub profile: SystemProfile,
    /// Driver projection, present once Phase 0 has completed.
    pub drivers: Option<DriverSet>,
    pub answers: AnswerSet,
    pub gate: Option<GateDecision>,
    pub scenarios: Vec<ScenarioInstance>,
    /// Evaluation history per scenario; the last entry is current.
    pub evaluations: BTreeMap<String, Vec<ScenarioEvaluation>>,
    pub final_classifications: Vec<CriterionFinalClassification>,
    pub ledger: RemediationLedger,
    pub staleness: Staleness,
    pub updated_at: DateTime<Utc>,
}

impl AssessmentRecord {
    /// Current evaluation of every instantiated scenario that has one.
    pub fn current_evaluations(&self) -> BTreeMap<String, ScenarioEvaluation> {
        self.scenarios
            .iter()
            .filter_map(|s| {
                self.evaluations
                    .get(&s.id)
                    .and_then(|h| h.last())
                    .map(|e| (s.id.clone(), e.clone()))
            })
            .collect()
    }

    pub fn partition(&self) -> OutputPartition {
        output_scenarios(self.current_evaluations().values())
    }

    pub fn remediation_needs(&self) -> RemediationNeeds {
        required_remediations(&self.partition())
    }

    pub fn scenario(&self, id: &str) -> Option<&ScenarioInstance> {
        self.scenarios.iter().find(|s| s.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerInput {
    pub question_id: String,
    pub value: AnswerValue,
    #[serde(default)]
    pub note: String,
    #[serde(default)]
    pub evidence_refs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationInput {
    pub scenario_id: String,
    pub dimensions: DimensionScores,
    pub control: ControlAssessment,
    pub rationale: String,
    #[serde(rename = "override", default, skip_serializing_if = "Option::is_none")]
    pub override_: Option<OverrideInput>,
}

/// Every state-changing operation on an assessment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "command", content = "payload", rename_all = "snake_case")]
pub enum Command {
    UpdateProfile(ProfileDelta),
    CompletePhase0,
    RecordAnswer(AnswerInput),
    CompletePhase1,
    EvaluateScenario(EvaluationInput),
    AddAction(RemediationAction),
    SetActionStatus { action_id: String, status: ActionStatus },
    CompletePhase2,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::UpdateProfile(_) => "update_profile",
            Command::CompletePhase0 => "complete_phase0",
            Command::RecordAnswer(_) => "record_answer",
            Command::CompletePhase1 => "complete_phase1",
            Command::EvaluateScenario(_) => "evaluate_scenario",
            Command::AddAction(_) => "add_action",
            Command::SetActionStatus { .. } => "set_action_status",
            Command::CompletePhase2 => "complete_phase2",
        }
    }
}

/// A fresh Phase 0 record and its creation event.
pub fn new_assessment(
    id: &str,
    initial: ProfileDelta,
    actor: &StakeholderRef,
    at: DateTime<Utc>,
) -> (AssessmentRecord, PendingEvent) {
    let record = AssessmentRecord {
        id: id.to_string(),
        revision: 0,
        phase: Phase::Phase0,
        profile: create_profile(initial),
        drivers: None,
        answers: AnswerSet::new(),
        gate: None,
        scenarios: Vec::new(),
        evaluations: BTreeMap::new(),
        final_classifications: Vec::new(),
        ledger: RemediationLedger::default(),
        staleness: Staleness::default(),
        updated_at: at,
    };
    let event = PendingEvent {
        at,
        actor: actor.clone(),
        kind: AuditKind::AssessmentCreated,
        subject: "profile".into(),
        before_digest: canonical::digest(&serde_json::Value::Null),
        after_digest: canonical::digest(&record.profile),
    };
    (record, event)
}

/// Applies `cmd` to `record`. Pure: the caller persists the result.
pub fn apply(
    catalog: &Catalog,
    record: &AssessmentRecord,
    cmd: Command,
    actor: &StakeholderRef,
    at: DateTime<Utc>,
) -> Result<(AssessmentRecord, PendingEvent)> {
    let mut next = record.clone();
    next.updated_at = at;
    let require = |allowed: &[Phase]| -> Result<()> {
        if allowed.contains(&record.phase) {
            Ok(())
        } else {
            Err(Error::InvalidTransition {
                phase: record.phase,
                command: cmd.name(),
            })
        }
    };
    let event = |kind, subject: String, before: String, after: String| PendingEvent {
        at,
        actor: actor.clone(),
        kind,
        subject,
        before_digest: before,
        after_digest: after,
    };

    let ev = match &cmd {
        Command::UpdateProfile(delta) => {
            let update = update_profile(&record.profile, delta.clone(), actor)?;
            next.profile = update.profile;
            if record.phase > Phase::Phase0 {
                next.drivers = next.profile.drivers();
                if update.drivers_changed {
                    next.staleness.phase1 = true;
                    if record.phase > Phase::Phase1 {
                        next.staleness.phase2 = true;
                        next.phase = Phase::Phase1;
                    }
                }
            }
            event(
                AuditKind::ProfileUpdated,
                "profile".into(),
                update.before_digest,
                update.after_digest,
            )
        }
        Command::CompletePhase0 => {
            require(&[Phase::Phase0])?;
            next.drivers = Some(complete_phase0(&record.profile)?);
            next.phase = Phase::Phase1;
            phase_event(record, &next, AuditKind::Phase0Completed, actor, at)
        }
        Command::RecordAnswer(input) => {
            require(&[Phase::Phase1])?;
            let drivers = record.drivers.as_ref().expect("drivers are set once Phase 0 completes");
            let applicable = applicable_questions(catalog, drivers);
            let answer = Answer {
                question_id: input.question_id.clone(),
                value: input.value,
                note: input.note.clone(),
                evidence_refs: input.evidence_refs.clone(),
                respondent: actor.clone(),
                answered_at: at,
            };
            let prior = next.answers.record(answer.clone(), &applicable)?;
            event(
                AuditKind::AnswerRecorded,
                format!("answers/{}", input.question_id),
                canonical::digest(&prior),
                canonical::digest(&Some(answer)),
            )
        }
        Command::CompletePhase1 => {
            require(&[Phase::Phase1])?;
            let drivers = record.drivers.as_ref().expect("drivers are set once Phase 0 completes");
            let gate = phase1_complete(&record.answers, catalog, drivers)?;
            next.scenarios = instantiate_scenarios(&gate.advancing, catalog, drivers, &record.profile.stakeholders)?;
            next.gate = Some(gate);
            next.final_classifications.clear();
            next.staleness.phase1 = false;
            next.phase = Phase::Phase2;
            phase_event(record, &next, AuditKind::Phase1Completed, actor, at)
        }
        Command::EvaluateScenario(input) => {
            require(&[Phase::Phase2, Phase::Output])?;
            let instance = record
                .scenario(&input.scenario_id)
                .ok_or_else(|| Error::UnknownScenario(input.scenario_id.clone()))?;
            let evaluation = evaluate_scenario(
                instance,
                input.dimensions,
                input.control.clone(),
                &input.rationale,
                actor,
                at,
                &catalog.thresholds,
                input.override_.clone(),
            )?;
            let prior = record.evaluations.get(&input.scenario_id).and_then(|h| h.last());
            let before = canonical::digest(&prior);
            let after = canonical::digest(&Some(&evaluation));
            next.evaluations
                .entry(input.scenario_id.clone())
                .or_default()
                .push(evaluation);
            if record.phase == Phase::Output {
                next.phase = Phase::Phase2;
                next.final_classifications.clear();
            }
            event(
                AuditKind::ScenarioEvaluated,
                format!("evaluations/{}", input.scenario_id),
                before,
                after,
            )
        }
        Command::AddAction(action) => {
            require(&[Phase::Phase2, Phase::Output])?;
            next.ledger.add(action.clone(), &record.remediation_needs())?;
            event(
                AuditKind::ActionAdded,
                format!("ledger/{}", action.id),
                canonical::digest(&serde_json::Value::Null),
                canonical::digest(action),
            )
        }
        Command::SetActionStatus { action_id, status } => {
            require(&[Phase::Phase2, Phase::Output])?;
            let before = canonical::digest(&record.ledger.action(action_id));
            next.ledger.set_status(action_id, *status)?;
            let after = canonical::digest(&next.ledger.action(action_id));
            event(
                AuditKind::ActionStatusChanged,
                format!("ledger/{action_id}"),
                before,
                after,
            )
        }
        Command::CompletePhase2 => {
            require(&[Phase::Phase2])?;
            let gate = record.gate.as_ref().expect("gate is set once Phase 1 completes");
            let evals = record.current_evaluations();
            let mut finals = Vec::new();
            let mut missing = Vec::new();
            for criterion in catalog.criteria.iter().filter(|c| gate.advancing.contains(&c.id)) {
                match finalize_criterion(&criterion.id, &record.scenarios, &evals) {
                    Ok(f) => finals.push(f),
                    Err(Error::IncompletePhase { missing: m, .. }) => missing.extend(m),
                    Err(e) => return Err(e),
                }
            }
            if !missing.is_empty() {
                return Err(Error::IncompletePhase {
                    stage: Phase::Phase2,
                    missing,
                });
            }
            next.final_classifications = finals;
            next.staleness.phase2 = false;
            next.phase = Phase::Output;
            phase_event(record, &next, AuditKind::Phase2Completed, actor, at)
        }
    };
    Ok((next, ev))
}

fn phase_event(
    before: &AssessmentRecord,
    after: &AssessmentRecord,
    kind: AuditKind,
    actor: &StakeholderRef,
    at: DateTime<Utc>,
) -> PendingEvent {
    PendingEvent {
        at,
        actor: actor.clone(),
        kind,
        subject: "phase".into(),
        before_digest: canonical::digest(&(before.phase, &before.gate, &before.final_classifications)),
        after_digest: canonical::digest(&(after.phase, &after.gate, &after.final_classifications)),
    }
}

/// A catalog bound to a store: load, apply, save with revision check.
pub struct Workflow<S> {
    catalog: Arc<Catalog>,
    store: S,
}

impl<S: AssessmentStore> Workflow<S> {
    pub fn new(catalog: impl Into<Arc<Catalog>>, store: S) -> Self {
        Self {
            catalog: catalog.into(),
            store,
        }
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn store(&self) -> &S {
        &self.store
    }

    pub fn create(
        &self,
        id: &str,
        initial: ProfileDelta,
        actor: &StakeholderRef,
        at: DateTime<Utc>,
    ) -> Result<Committed> {
        let (record, event) = new_assessment(id, initial, actor, at);
        self.store.save(&record, 0, event)
    }

    /// Applies `cmd` if the stored head is still `expected_revision`.
    pub fn execute(
        &self,
        id: &str,
        expected_revision: u64,
        cmd: Command,
        actor: &StakeholderRef,
        at: DateTime<Utc>,
    ) -> Result<Committed> {
        let head = self.store.load(id, None)?;
        if head.revision != expected_revision {
            return Err(Error::RevisionConflict {
                expected: expected_revision,
                actual: head.revision,
            });
        }
        let (next, event) = apply(&self.catalog, &head, cmd, actor, at)?;
        self.store.save(&next, expected_revision, event)
    }

    /// Applies `cmd` against whatever the head currently is.
    pub fn execute_at_head(
        &self,
        id: &str,
        cmd: Command,
        actor: &StakeholderRef,
        at: DateTime<Utc>,
    ) -> Result<Committed> {
        let head = self.store.load(id, None)?;
        self.execute(id, head.revision, cmd, actor, at)
    }

    pub fn load(&self, id: &str, revision: Option<u64>) -> Result<AssessmentRecord> {
        self.store.load(id, revision)
    }

    /// Checklist questions for the assessment's current drivers.
    pub fn applicable_questions(&self, id: &str) -> Result<Vec<ChecklistQuestion>> {
        let record = self.store.load(id, None)?;
        let drivers = record.drivers.ok_or(Error::PhaseIncomplete(Phase::Phase0))?;
        Ok(applicable_questions(&self.catalog, &drivers)
            .into_iter()
            .cloned()
            .collect())
    }

    pub fn report(&self, id: &str) -> Result<AssessmentReport> {
        build_report(&self.store.load(id, None)?, &self.catalog)
    }
}
