//! Phase 1: stakeholder answers to the filtered checklist and per-criterion
//! relevance.
//!
//! A criterion's score is the maximum weight over its answered, applicable,
//! non-`NotApplicable` questions, so a single severe gap cannot be diluted by
//! adequate answers elsewhere.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, ChecklistQuestion};
use crate::error::{Error, Result};
use crate::filtering::{advancing_criteria, applicable_questions, evaluate_predicate};
use crate::profile::{DriverSet, StakeholderRef};
use crate::workflow::Phase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AnswerValue {
    Adequate,
    Partial,
    Inadequate,
    NotApplicable,
}

impl AnswerValue {
    pub const ALL: [AnswerValue; 4] = [
        AnswerValue::Adequate,
        AnswerValue::Partial,
        AnswerValue::Inadequate,
        AnswerValue::NotApplicable,
    ];

    /// Values that carry a weight.
    pub const SCORED: [AnswerValue; 3] = [AnswerValue::Adequate, AnswerValue::Partial, AnswerValue::Inadequate];

    pub fn as_str(self) -> &'static str {
        match self {
            AnswerValue::Adequate => "Adequate",
            AnswerValue::Partial => "Partial",
            AnswerValue::Inadequate => "Inadequate",
            AnswerValue::NotApplicable => "NotApplicable",
        }
    }
}

impl fmt::Display for AnswerValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for AnswerValue {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown answer value {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Answer {
    pub question_id: String,
    pub value: AnswerValue,
    #[serde(default)]
    pub note: String,
    #[serde(default)]
    pub evidence_refs: Vec<String>,
    pub respondent: StakeholderRef,
    pub answered_at: DateTime<Utc>,
}

/// Current answer per question id. Re-answering replaces the prior answer;
/// history lives in the store's revisions and audit trail.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnswerSet(BTreeMap<String, Answer>);

impl AnswerSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, question_id: &str) -> Option<&Answer> {
        self.0.get(question_id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Answer> {
        self.0.values()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Stores `answer` if its question is in `applicable`. Returns the answer
    /// it replaced, if any.
    pub fn record(&mut self, answer: Answer, applicable: &[&ChecklistQuestion]) -> Result<Option<Answer>> {
        if !applicable.iter().any(|q| q.id == answer.question_id) {
            return Err(Error::QuestionNotApplicable(answer.question_id));
        }
        if answer.value == AnswerValue::NotApplicable && answer.note.trim().is_empty() {
            return Err(Error::MissingJustification(answer.question_id));
        }
        Ok(self.0.insert(answer.question_id.clone(), answer))
    }
}

/// Functional form of [`AnswerSet::record`].
pub fn record_answer(answers: &AnswerSet, answer: Answer, applicable: &[&ChecklistQuestion]) -> Result<AnswerSet> {
    let mut next = answers.clone();
    next.record(answer, applicable)?;
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelevanceBand {
    None,
    Moderate,
    High,
}

impl RelevanceBand {
    pub fn from_score(score: u8) -> Self {
        match score {
            0 => RelevanceBand::None,
            1 => RelevanceBand::Moderate,
            _ => RelevanceBand::High,
        }
    }
}

impl fmt::Display for RelevanceBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelevanceBand::None => "None",
            RelevanceBand::Moderate => "Moderate",
            RelevanceBand::High => "High",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionRelevance {
    pub criterion_id: String,
    pub score: u8,
    pub band: RelevanceBand,
    pub contributing_question_ids: Vec<String>,
    /// No applicable question carries a scored answer.
    pub unassessed: bool,
}

/// One entry per criterion with at least one applicable question, in catalog
/// order. Unanswered questions are ignored here; completeness is enforced by
/// [`phase1_complete`].
pub fn score_criteria(answers: &AnswerSet, c: &Catalog, d: &DriverSet) -> Vec<CriterionRelevance> {
    let mut out = Vec::new();
    for criterion in &c.criteria {
        let applicable: Vec<&ChecklistQuestion> = c
            .questions_for(&criterion.id)
            .filter(|q| evaluate_predicate(&q.applicability, d))
            .collect();
        if applicable.is_empty() {
            continue;
        }
        let mut score = 0u8;
        let mut contributing = Vec::new();
        for q in applicable {
            let Some(answer) = answers.get(&q.id) else { continue };
            let Some(weight) = q.weight(answer.value) else { continue };
            score = score.max(weight);
            contributing.push(q.id.clone());
        }
        out.push(CriterionRelevance {
            criterion_id: criterion.id.clone(),
            score,
            band: RelevanceBand::from_score(score),
            unassessed: contributing.is_empty(),
            contributing_question_ids: contributing,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateExclusion {
    pub criterion_id: String,
    pub reason: String,
}

/// Outcome of the Phase 1 → Phase 2 gate.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateDecision {
    pub advancing: BTreeSet<String>,
    pub excluded: Vec<GateExclusion>,
}

pub const REASON_BELOW_THRESHOLD: &str = "score below threshold";
pub const REASON_NO_APPLICABLE_QUESTIONS: &str = "unassessed: no applicable questions";
pub const REASON_ALL_NOT_APPLICABLE: &str = "unassessed: every applicable question answered NotApplicable";

/// Closes Phase 1. Every applicable question must be answered.
pub fn phase1_complete(answers: &AnswerSet, c: &Catalog, d: &DriverSet) -> Result<GateDecision> {
    let missing: Vec<String> = applicable_questions(c, d)
        .into_iter()
        .filter(|q| answers.get(&q.id).is_none())
        .map(|q| q.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::IncompletePhase {
            stage: Phase::Phase1,
            missing,
        });
    }

    let scores = score_criteria(answers, c, d);
    let advancing = advancing_criteria(&scores, &c.thresholds);
    let mut excluded = Vec::new();
    for criterion in &c.criteria {
        if advancing.contains(&criterion.id) {
            continue;
        }
        let reason = match scores.iter().find(|s| s.criterion_id == criterion.id) {
            None => REASON_NO_APPLICABLE_QUESTIONS,
            Some(s) if s.unassessed => REASON_ALL_NOT_APPLICABLE,
            Some(_) => REASON_BELOW_THRESHOLD,
        };
        excluded.push(GateExclusion {
            criterion_id: criterion.id.clone(),
            reason: reason.to_string(),
        });
    }
    Ok(GateDecision { advancing, excluded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::parse_catalog;
    use crate::fixture;
    use crate::profile::LifecycleStage;
    use chrono::TimeZone;

    fn catalog() -> Catalog {
        parse_catalog(fixture::TRIAGE_CATALOG.as_bytes()).unwrap()
    }

    fn drivers() -> DriverSet {
        DriverSet {
            lifecycle_stage: LifecycleStage::Implementation,
            domain_flags: ["health", "critical_decision"].map(String::from).into(),
            system_types: ["chatbot".to_string()].into(),
        }
    }

    fn answer(qid: &str, value: AnswerValue, note: &str) -> Answer {
        Answer {
            question_id: qid.into(),
            value,
            note: note.into(),
            evidence_refs: vec![],
            respondent: StakeholderRef::role_only("clinical_lead"),
            answered_at: Utc.with_ymd_and_hms(2025, 3, 4, 10, 0, 0).unwrap(),
        }
    }

    fn all_adequate(c: &Catalog, d: &DriverSet) -> AnswerSet {
        let applicable = applicable_questions(c, d);
        let mut set = AnswerSet::new();
        for q in &applicable {
            set.record(answer(&q.id, AnswerValue::Adequate, ""), &applicable)
                .unwrap();
        }
        set
    }

    fn score_of(scores: &[CriterionRelevance], id: &str) -> u8 {
        scores.iter().find(|s| s.criterion_id == id).unwrap().score
    }

    #[test]
    fn inadequate_oversight_answer_scores_two() {
        let c = catalog();
        let d = drivers();
        let applicable = applicable_questions(&c, &d);
        let mut set = all_adequate(&c, &d);
        set.record(
            answer(
                fixture::OVERSIGHT_REVIEW_QUESTION,
                AnswerValue::Inadequate,
                "absence of formalized human review and override mechanisms",
            ),
            &applicable,
        )
        .unwrap();
        assert_eq!(score_of(&score_criteria(&set, &c, &d), "human_oversight"), 2);
    }

    #[test]
    fn generative_question_is_not_applicable_under_triage_drivers() {
        let c = catalog();
        let d = drivers();
        let applicable = applicable_questions(&c, &d);
        let err = AnswerSet::new()
            .record(
                answer(fixture::GENERATIVE_AI_QUESTION, AnswerValue::Partial, ""),
                &applicable,
            )
            .unwrap_err();
        assert!(matches!(err, Error::QuestionNotApplicable(q) if q == fixture::GENERATIVE_AI_QUESTION));
    }

    #[test]
    fn not_applicable_needs_a_note_and_never_scores() {
        let c = catalog();
        let d = drivers();
        let applicable = applicable_questions(&c, &d);
        let mut set = all_adequate(&c, &d);
        let before = score_criteria(&set, &c, &d);
        let qid = fixture::OVERSIGHT_REVIEW_QUESTION;
        assert!(matches!(
            set.record(answer(qid, AnswerValue::NotApplicable, "  "), &applicable),
            Err(Error::MissingJustification(_))
        ));
        set.record(
            answer(qid, AnswerValue::NotApplicable, "covered by hospital SOP"),
            &applicable,
        )
        .unwrap();
        let after = score_criteria(&set, &c, &d);
        assert_eq!(
            score_of(&before, "human_oversight"),
            score_of(&after, "human_oversight")
        );
    }

    #[test]
    fn triage_answers_score_zero_two_two() {
        let c = catalog();
        let d = drivers();
        let set = fixture::triage_answers(&c, &d);
        let scores = score_criteria(&set, &c, &d);
        assert_eq!(score_of(&scores, "data_governance"), 0);
        assert_eq!(score_of(&scores, "human_oversight"), 2);
        assert_eq!(score_of(&scores, "fairness"), 2);
        assert!(scores.iter().all(|s| !s.unassessed));
    }

    #[test]
    fn all_adequate_scores_zero() {
        let c = catalog();
        let d = drivers();
        let scores = score_criteria(&all_adequate(&c, &d), &c, &d);
        assert_eq!(scores.len(), 3);
        assert!(scores.iter().all(|s| s.score == 0 && s.band == RelevanceBand::None));
    }

    #[test]
    fn triage_gate_excludes_data_governance() {
        let c = catalog();
        let d = drivers();
        let gate = phase1_complete(&fixture::triage_answers(&c, &d), &c, &d).unwrap();
        assert_eq!(gate.advancing, ["fairness", "human_oversight"].map(String::from).into());
        assert_eq!(
            gate.excluded,
            vec![GateExclusion {
                criterion_id: "data_governance".into(),
                reason: REASON_BELOW_THRESHOLD.into()
            }]
        );
    }

    #[test]
    fn unanswered_question_blocks_the_gate() {
        let c = catalog();
        let d = drivers();
        let full = fixture::triage_answers(&c, &d);
        let mut partial = AnswerSet::new();
        let applicable = applicable_questions(&c, &d);
        for a in full
            .iter()
            .filter(|a| a.question_id != fixture::OVERSIGHT_REVIEW_QUESTION)
        {
            partial.record(a.clone(), &applicable).unwrap();
        }
        let err = phase1_complete(&partial, &c, &d).unwrap_err();
        assert!(matches!(
            err,
            Error::IncompletePhase { stage: Phase::Phase1, ref missing }
                if missing == &[fixture::OVERSIGHT_REVIEW_QUESTION.to_string()]
        ));
    }

    #[test]
    fn threshold_three_is_a_catalog_finding() {
        let mut c = catalog();
        c.thresholds.phase1_advance_min = 3;
        let report = crate::catalog::validate_catalog(&c);
        assert_eq!(report.count("threshold-range"), 1);
    }

    #[test]
    fn band_follows_score() {
        assert_eq!(RelevanceBand::from_score(0), RelevanceBand::None);
        assert_eq!(RelevanceBand::from_score(1), RelevanceBand::Moderate);
        assert_eq!(RelevanceBand::from_score(2), RelevanceBand::High);
    }
}
