//! Final output: Phase 1 and Phase 2 tables, chart data, the remediation
//! section and the exclusions trail.
//!
//! Every item that entered a gate is accounted for: it either appears in a
//! table or in [`AssessmentReport::exclusions`] with the stage that dropped
//! it.

mod export;

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, Thresholds};
use crate::checklist::{score_criteria, AnswerValue, RelevanceBand};
use crate::error::{Error, Result};
use crate::filtering::{evaluate_predicate, OutputPartition};
use crate::remediation::{coverage_check, ActionStatus, ActionType};
use crate::scenarios::{Classification, ControlEffectiveness, CriterionFinalClassification};
use crate::workflow::{AssessmentRecord, Phase};

pub use export::{export, parse_report, ExportFile, ExportFormat};

/// Stated in every report so reviewers can audit the scoring convention.
pub const BAND_CONVENTION: &str =
    "criterion score = max answer weight; 0 = None, 1 = Moderate, 2 = High; criteria advance at phase1_advance_min";

pub const REASON_DRIVER_FILTER: &str = "driver filter";
pub const REASON_ANSWERED_NOT_APPLICABLE: &str = "answered NotApplicable";
pub const REASON_CLASSIFIED_IRRELEVANT: &str = "classified Irrelevant";
pub const REASON_ACTION_ON_IRRELEVANT: &str = "scenario re-evaluated as Irrelevant";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReportStatus {
    Draft,
    Final,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportMetadata {
    pub system_name: String,
    pub assessment_id: String,
    pub revision: u64,
    /// Time of the last mutation, so rebuilding a report is deterministic.
    pub issued_at: DateTime<Utc>,
    pub schema_version: String,
    pub thresholds: Thresholds,
    pub band_convention: String,
    pub overview_review_overdue: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phase1Row {
    pub criterion_id: String,
    pub criterion: String,
    pub domain: String,
    pub score: u8,
    pub band: RelevanceBand,
    pub advancing: bool,
    pub unassessed: bool,
    pub contributing_question_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phase2Row {
    pub scenario_id: String,
    pub criterion_id: String,
    pub domain: String,
    pub narrative: String,
    pub individuals: u8,
    pub society: u8,
    pub mitigation_effort: u8,
    pub duration: u8,
    pub control_effectiveness: ControlEffectiveness,
    pub classification: Classification,
    pub significant: bool,
    pub overridden: bool,
    /// Number of evaluations recorded; above 1 means re-evaluated.
    pub evaluation_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainCounts {
    pub domain: String,
    pub counts: BTreeMap<Classification, usize>,
}

/// Aggregates for the graphical overview. Pure function of the tables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartData {
    pub scenarios_by_domain: Vec<DomainCounts>,
    pub criteria_by_band: BTreeMap<RelevanceBand, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionRow {
    pub action_id: String,
    pub scenario_id: String,
    pub criterion_id: String,
    pub action_type: ActionType,
    pub description: String,
    pub owner: String,
    pub owner_role: String,
    pub status: ActionStatus,
    pub due: Option<NaiveDate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemediationSection {
    pub actions: Vec<ActionRow>,
    pub required: Vec<String>,
    pub recommended: Vec<String>,
    pub uncovered_required: Vec<String>,
    /// Relevant scenarios with a completed action: worth evaluating again.
    pub reevaluation_suggested: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExcludedKind {
    Question,
    Criterion,
    ScenarioTemplate,
    Scenario,
    Action,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exclusion {
    pub item: String,
    pub kind: ExcludedKind,
    /// Phase whose gate dropped the item.
    pub stage: Phase,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssessmentReport {
    pub metadata: ReportMetadata,
    pub status: ReportStatus,
    pub phase1_table: Vec<Phase1Row>,
    pub phase2_table: Vec<Phase2Row>,
    pub criterion_classifications: Vec<CriterionFinalClassification>,
    pub chart_data: ChartData,
    pub remediation_section: RemediationSection,
    pub exclusions: Vec<Exclusion>,
}

/// Builds the report from a finalized assessment.
pub fn build_report(record: &AssessmentRecord, catalog: &Catalog) -> Result<AssessmentReport> {
    if record.phase != Phase::Output || record.staleness.phase1 || record.staleness.phase2 {
        return Err(Error::PhaseIncomplete(record.phase));
    }
    let drivers = record.drivers.as_ref().ok_or(Error::PhaseIncomplete(Phase::Phase0))?;
    let gate = record.gate.as_ref().ok_or(Error::PhaseIncomplete(Phase::Phase1))?;
    let domain_name = |criterion_id: &str| -> String {
        catalog
            .criterion(criterion_id)
            .and_then(|c| catalog.domain(&c.domain_id))
            .map(|d| d.name.clone())
            .unwrap_or_default()
    };
    let mut exclusions = Vec::new();

    for q in catalog
        .questions
        .iter()
        .filter(|q| !evaluate_predicate(&q.applicability, drivers))
    {
        exclusions.push(Exclusion {
            item: q.id.clone(),
            kind: ExcludedKind::Question,
            stage: Phase::Phase0,
            reason: REASON_DRIVER_FILTER.into(),
        });
    }
    for a in record.answers.iter().filter(|a| a.value == AnswerValue::NotApplicable) {
        exclusions.push(Exclusion {
            item: a.question_id.clone(),
            kind: ExcludedKind::Question,
            stage: Phase::Phase1,
            reason: format!("{REASON_ANSWERED_NOT_APPLICABLE}: {}", a.note.trim()),
        });
    }

    let phase1_table: Vec<Phase1Row> = score_criteria(&record.answers, catalog, drivers)
        .into_iter()
        .map(|s| Phase1Row {
            criterion: catalog
                .criterion(&s.criterion_id)
                .map(|c| c.name.clone())
                .unwrap_or_default(),
            domain: domain_name(&s.criterion_id),
            advancing: gate.advancing.contains(&s.criterion_id),
            criterion_id: s.criterion_id,
            score: s.score,
            band: s.band,
            unassessed: s.unassessed,
            contributing_question_ids: s.contributing_question_ids,
        })
        .collect();
    for g in &gate.excluded {
        exclusions.push(Exclusion {
            item: g.criterion_id.clone(),
            kind: ExcludedKind::Criterion,
            stage: Phase::Phase1,
            reason: g.reason.clone(),
        });
    }
    for t in catalog
        .scenario_templates
        .iter()
        .filter(|t| gate.advancing.contains(&t.criterion_id) && !evaluate_predicate(&t.applicability, drivers))
    {
        exclusions.push(Exclusion {
            item: t.id.clone(),
            kind: ExcludedKind::ScenarioTemplate,
            stage: Phase::Phase1,
            reason: REASON_DRIVER_FILTER.into(),
        });
    }

    let evals = record.current_evaluations();
    let mut phase2_table = Vec::new();
    for s in &record.scenarios {
        let Some(e) = evals.get(&s.id) else { continue };
        phase2_table.push(Phase2Row {
            scenario_id: s.id.clone(),
            criterion_id: s.criterion_id.clone(),
            domain: domain_name(&s.criterion_id),
            narrative: s.narrative.clone(),
            individuals: e.dimensions.individuals,
            society: e.dimensions.society,
            mitigation_effort: e.dimensions.mitigation_effort,
            duration: e.dimensions.duration,
            control_effectiveness: e.control.effectiveness,
            classification: e.classification,
            significant: e.significant,
            overridden: e.override_.is_some(),
            evaluation_count: record.evaluations.get(&s.id).map_or(0, Vec::len),
        });
        if e.classification == Classification::Irrelevant {
            exclusions.push(Exclusion {
                item: s.id.clone(),
                kind: ExcludedKind::Scenario,
                stage: Phase::Phase2,
                reason: REASON_CLASSIFIED_IRRELEVANT.into(),
            });
        }
    }

    let partition = record.partition();
    let remediation_section = remediation_section(record, &partition, &mut exclusions);
    let status = if remediation_section.uncovered_required.is_empty() {
        ReportStatus::Final
    } else {
        ReportStatus::Draft
    };

    let mut report = AssessmentReport {
        metadata: ReportMetadata {
            system_name: record.profile.system_name.clone(),
            assessment_id: record.id.clone(),
            revision: record.revision,
            issued_at: record.updated_at,
            schema_version: catalog.schema_version.clone(),
            thresholds: catalog.thresholds.clone(),
            band_convention: BAND_CONVENTION.into(),
            overview_review_overdue: record.profile.review_overdue(record.updated_at),
        },
        status,
        phase1_table,
        phase2_table,
        criterion_classifications: record.final_classifications.clone(),
        chart_data: ChartData {
            scenarios_by_domain: Vec::new(),
            criteria_by_band: BTreeMap::new(),
        },
        remediation_section,
        exclusions,
    };
    report.chart_data = chart_counts(&report);
    Ok(report)
}

fn remediation_section(
    record: &AssessmentRecord,
    partition: &OutputPartition,
    exclusions: &mut Vec<Exclusion>,
) -> RemediationSection {
    let evals = record.current_evaluations();
    let mut actions = Vec::new();
    let mut reevaluate = BTreeSet::new();
    for a in &record.ledger.actions {
        let Some(e) = evals.get(&a.scenario_id) else { continue };
        if e.classification == Classification::Irrelevant {
            exclusions.push(Exclusion {
                item: a.id.clone(),
                kind: ExcludedKind::Action,
                stage: Phase::Output,
                reason: REASON_ACTION_ON_IRRELEVANT.into(),
            });
            continue;
        }
        if e.classification == Classification::Relevant && a.status == ActionStatus::Done {
            reevaluate.insert(a.scenario_id.clone());
        }
        actions.push(ActionRow {
            action_id: a.id.clone(),
            scenario_id: a.scenario_id.clone(),
            criterion_id: record
                .scenario(&a.scenario_id)
                .map(|s| s.criterion_id.clone())
                .unwrap_or_default(),
            action_type: a.action_type,
            description: a.description.clone(),
            owner: a.owner.name.clone(),
            owner_role: a.owner.role.clone(),
            status: a.status,
            due: a.due,
        });
    }
    RemediationSection {
        actions,
        required: partition.requires_action.iter().cloned().collect(),
        recommended: partition.recommended.iter().cloned().collect(),
        uncovered_required: coverage_check(&record.ledger, partition).uncovered_required,
        reevaluation_suggested: reevaluate.into_iter().collect(),
    }
}

/// Chart data recomputed from the report's own tables: classification counts
/// per domain (every domain in the Phase 1 table, zeros included) and
/// criterion counts per relevance band.
pub fn chart_counts(report: &AssessmentReport) -> ChartData {
    let zero = || Classification::ALL.iter().map(|c| (*c, 0)).collect::<BTreeMap<_, _>>();
    let mut scenarios_by_domain: Vec<DomainCounts> = Vec::new();
    let ensure = |domain: &str, list: &mut Vec<DomainCounts>| -> usize {
        match list.iter().position(|d| d.domain == domain) {
            Some(i) => i,
            None => {
                list.push(DomainCounts {
                    domain: domain.to_string(),
                    counts: zero(),
                });
                list.len() - 1
            }
        }
    };
    for row in &report.phase1_table {
        ensure(&row.domain, &mut scenarios_by_domain);
    }
    for row in &report.phase2_table {
        let i = ensure(&row.domain, &mut scenarios_by_domain);
        *scenarios_by_domain[i].counts.entry(row.classification).or_default() += 1;
    }
    let mut criteria_by_band: BTreeMap<RelevanceBand, usize> =
        [RelevanceBand::None, RelevanceBand::Moderate, RelevanceBand::High]
            .into_iter()
            .map(|b| (b, 0))
            .collect();
    for row in &report.phase1_table {
        *criteria_by_band.entry(row.band).or_default() += 1;
    }
    ChartData {
        scenarios_by_domain,
        criteria_by_band,
    }
}

#[cfg(test)]
mod tests;
