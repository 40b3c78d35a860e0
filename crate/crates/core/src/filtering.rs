//! Gate logic shared by all phases.
//!
//! * Phase 0 → 1: drivers select applicable checklist questions.
//! * Phase 1 → 2: criterion relevance selects advancing criteria.
//! * Phase 2 → Output: classification and significance partition scenarios.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::catalog::{ApplicabilityPredicate, Catalog, ChecklistQuestion, Thresholds};
use crate::checklist::CriterionRelevance;
use crate::profile::DriverSet;
use crate::scenarios::{Classification, ScenarioEvaluation};

pub fn evaluate_predicate(pred: &ApplicabilityPredicate, d: &DriverSet) -> bool {
    (pred.lifecycle_any_of.is_empty() || pred.lifecycle_any_of.contains(&d.lifecycle_stage))
        && (pred.domain_flags_any_of.is_empty() || !pred.domain_flags_any_of.is_disjoint(&d.domain_flags))
        && pred.domain_flags_forbidden.is_disjoint(&d.domain_flags)
        && (pred.system_types_any_of.is_empty() || !pred.system_types_any_of.is_disjoint(&d.system_types))
}

/// Questions whose predicate holds for `d`, in catalog order.
pub fn applicable_questions<'c>(c: &'c Catalog, d: &DriverSet) -> Vec<&'c ChecklistQuestion> {
    c.questions
        .iter()
        .filter(|q| evaluate_predicate(&q.applicability, d))
        .collect()
}

/// Criteria whose relevance score reaches `t.phase1_advance_min`. Unassessed
/// criteria never advance.
pub fn advancing_criteria(scores: &[CriterionRelevance], t: &Thresholds) -> BTreeSet<String> {
    scores
        .iter()
        .filter(|s| !s.unassessed && s.score >= t.phase1_advance_min)
        .map(|s| s.criterion_id.clone())
        .collect()
}

/// Phase 2 → Output split of evaluated scenarios.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputPartition {
    /// Relevant and significant: remediation required.
    pub requires_action: BTreeSet<String>,
    /// Relevant but not significant.
    pub no_action: BTreeSet<String>,
    /// Partially relevant: remediation proposed, not required.
    pub recommended: BTreeSet<String>,
    /// Irrelevant: dropped from the output.
    pub excluded: BTreeSet<String>,
}

impl OutputPartition {
    pub fn len(&self) -> usize {
        self.requires_action.len() + self.no_action.len() + self.recommended.len() + self.excluded.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn output_scenarios<'a>(evals: impl IntoIterator<Item = &'a ScenarioEvaluation>) -> OutputPartition {
    let mut partition = OutputPartition::default();
    for e in evals {
        let id = e.scenario_id.clone();
        match (e.classification, e.significant) {
            (Classification::Relevant, true) => partition.requires_action.insert(id),
            (Classification::Relevant, false) => partition.no_action.insert(id),
            (Classification::PartiallyRelevant, _) => partition.recommended.insert(id),
            (Classification::Irrelevant, _) => partition.excluded.insert(id),
        };
    }
    partition
}
