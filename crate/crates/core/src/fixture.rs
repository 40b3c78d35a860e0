//! The automated triage service case study, shipped as a catalog and a
//! session script. Used by examples, tests and the acceptance suite.

use chrono::{TimeZone, Utc};

use crate::catalog::Catalog;
use crate::checklist::{Answer, AnswerSet, AnswerValue};
use crate::filtering::applicable_questions;
use crate::profile::{DriverSet, LifecycleStage, ProfileDelta, StakeholderRef, Stewardship};

pub const TRIAGE_CATALOG: &str = include_str!("../fixtures/triage/catalog.json");
pub const TRIAGE_SCRIPT: &str = include_str!("../fixtures/triage/session.txt");
pub const TRIAGE_ASSESSMENT_ID: &str = "triage-2025";

/// Applies only to systems with generative features.
pub const GENERATIVE_AI_QUESTION: &str = "fa.q3";
/// Applies only to systems trained or grounded on copyrighted data.
pub const COPYRIGHT_QUESTION: &str = "dg.q4";
/// Applies only once the system is deployed.
pub const USE_PHASE_MONITORING_QUESTION: &str = "ho.q2";
/// Human review and override of recommendations.
pub const OVERSIGHT_REVIEW_QUESTION: &str = "ho.q1";
/// Automation bias.
pub const OVERSIGHT_SCENARIO: &str = "ho.s1";
/// Demographic underrepresentation.
pub const FAIRNESS_SCENARIO: &str = "fa.s1";

/// Checklist answers as given in the session script.
pub const TRIAGE_ANSWERS: [(&str, AnswerValue, &str); 7] = [
    (
        "dg.q1",
        AnswerValue::Adequate,
        "Established policies minimize personal data processing.",
    ),
    (
        "dg.q2",
        AnswerValue::Adequate,
        "Recommendations are logged with their inputs and sources.",
    ),
    (
        "dg.q3",
        AnswerValue::Adequate,
        "Verification mechanisms for external data sources are in place.",
    ),
    (
        "ho.q1",
        AnswerValue::Inadequate,
        "Absence of formalized human review and override mechanisms for AI-generated recommendations.",
    ),
    (
        "ho.q3",
        AnswerValue::Partial,
        "Staff briefing exists but covers automation bias only informally.",
    ),
    (
        "fa.q1",
        AnswerValue::Adequate,
        "The system relies on static decision rules rather than adaptive learning.",
    ),
    (
        "fa.q2",
        AnswerValue::Inadequate,
        "Limited accessibility features risk excluding certain user demographics.",
    ),
];

pub fn coordinator() -> StakeholderRef {
    StakeholderRef::new("Giulia Rossi", "fria_coordinator", "g.rossi@example.org")
}

pub fn clinical_lead() -> StakeholderRef {
    StakeholderRef::new("Dr. Marco Bianchi", "clinical_lead", "m.bianchi@example.org")
}

pub fn data_protection_officer() -> StakeholderRef {
    StakeholderRef::new("Elena Conti", "data_protection_officer", "dpo@example.org")
}

/// The complete Phase 0 profile from the session script.
pub fn triage_profile_delta() -> ProfileDelta {
    ProfileDelta {
        system_name: Some("Automated Triage Service".into()),
        purpose: Some(
            "Chatbot that collects preliminary patient information, processes medical visit requests and produces \
             structured reports that support triage decisions by medical staff."
                .into(),
        ),
        operational_context: Some(
            "Hospital emergency and outpatient intake; outputs are read by nurses and physicians before a triage decision."
                .into(),
        ),
        stakeholders: Some(vec![coordinator(), clinical_lead(), data_protection_officer()]),
        lifecycle_stage: Some(LifecycleStage::Implementation),
        domain_flags: Some(["health", "critical_decision"].map(String::from).into()),
        system_types: Some(["chatbot".to_string()].into()),
        stewardship: Some(Stewardship {
            owner: coordinator(),
            review_interval_days: 180,
            last_reviewed: Utc.with_ymd_and_hms(2025, 3, 1, 0, 0, 0).unwrap(),
        }),
    }
}

/// [`TRIAGE_ANSWERS`] recorded against the applicable questions for `d`.
pub fn triage_answers(c: &Catalog, d: &DriverSet) -> AnswerSet {
    let applicable = applicable_questions(c, d);
    let mut set = AnswerSet::new();
    for (qid, value, note) in TRIAGE_ANSWERS {
        let respondent = c
            .question(qid)
            .map(|q| StakeholderRef::role_only(q.stakeholder_role.clone()))
            .unwrap_or_else(coordinator);
        set.record(
            Answer {
                question_id: qid.into(),
                value,
                note: note.into(),
                evidence_refs: Vec::new(),
                respondent,
                answered_at: Utc.with_ymd_and_hms(2025, 3, 10, 9, 0, 0).unwrap(),
            },
            &applicable,
        )
        .expect("fixture answers are applicable to the triage drivers");
    }
    set
}
