//! Phase 2: impact scenarios for advancing criteria, their four-dimension
//! self-evaluation, and the three-level classification.
//!
//! Classification rule:
//!
//! * base severity is the highest of the four dimension scores (0 to 3);
//! * controls earn a mitigation credit of 2 (effective), 1 (partially
//!   effective) or 0;
//! * residual = base − credit, floored at 0;
//! * residual ≥ 2 is Relevant, 1 is Partially Relevant, 0 is Irrelevant.
//!
//! Significance is independent of controls: a scenario is significant when
//! any dimension listed in the catalog thresholds reaches the threshold.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, Thresholds};
use crate::error::{Error, Result};
use crate::filtering::evaluate_predicate;
use crate::profile::{DriverSet, StakeholderRef};
use crate::workflow::Phase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImpactDimension {
    Individuals,
    Society,
}

/// Self-evaluation scale, ordered `Irrelevant < PartiallyRelevant < Relevant`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Classification {
    Irrelevant,
    PartiallyRelevant,
    Relevant,
}

impl Classification {
    pub const ALL: [Classification; 3] = [
        Classification::Irrelevant,
        Classification::PartiallyRelevant,
        Classification::Relevant,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Irrelevant => "Irrelevant",
            Classification::PartiallyRelevant => "PartiallyRelevant",
            Classification::Relevant => "Relevant",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Classification {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown classification {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ControlEffectiveness {
    Effective,
    PartiallyEffective,
    Ineffective,
    Absent,
}

impl ControlEffectiveness {
    pub const ALL: [ControlEffectiveness; 4] = [
        ControlEffectiveness::Effective,
        ControlEffectiveness::PartiallyEffective,
        ControlEffectiveness::Ineffective,
        ControlEffectiveness::Absent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ControlEffectiveness::Effective => "Effective",
            ControlEffectiveness::PartiallyEffective => "PartiallyEffective",
            ControlEffectiveness::Ineffective => "Ineffective",
            ControlEffectiveness::Absent => "Absent",
        }
    }

    pub fn mitigation_credit(self) -> u8 {
        match self {
            ControlEffectiveness::Effective => 2,
            ControlEffectiveness::PartiallyEffective => 1,
            ControlEffectiveness::Ineffective | ControlEffectiveness::Absent => 0,
        }
    }

    pub fn claims_effectiveness(self) -> bool {
        self.mitigation_credit() > 0
    }
}

impl fmt::Display for ControlEffectiveness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ControlEffectiveness {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown control effectiveness {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioInstance {
    pub id: String,
    pub template_id: String,
    pub criterion_id: String,
    pub narrative: String,
    pub assigned_to: StakeholderRef,
}

/// Scores 0 (none) to 3 (severe or irreversible).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionScores {
    pub individuals: u8,
    pub society: u8,
    pub mitigation_effort: u8,
    pub duration: u8,
}

impl DimensionScores {
    pub const MAX: u8 = 3;

    pub fn new(individuals: u8, society: u8, mitigation_effort: u8, duration: u8) -> Self {
        Self {
            individuals,
            society,
            mitigation_effort,
            duration,
        }
    }

    pub fn as_array(&self) -> [u8; 4] {
        [self.individuals, self.society, self.mitigation_effort, self.duration]
    }

    pub fn in_range(&self) -> bool {
        self.as_array().iter().all(|&v| v <= Self::MAX)
    }

    pub fn get(&self, dim: ImpactDimension) -> u8 {
        match dim {
            ImpactDimension::Individuals => self.individuals,
            ImpactDimension::Society => self.society,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlAssessment {
    pub effectiveness: ControlEffectiveness,
    #[serde(default)]
    pub evidence_refs: Vec<String>,
    pub control_owner: StakeholderRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationOutcome {
    pub classification: Classification,
    pub significant: bool,
}

/// Manual correction of the computed outcome. Dimension scores are untouched.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Override {
    pub classification: Classification,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub significant: Option<bool>,
    pub rationale: String,
    pub actor: StakeholderRef,
}

/// Override request before an actor is attached.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverrideInput {
    pub classification: Classification,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub significant: Option<bool>,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioEvaluation {
    pub scenario_id: String,
    pub dimensions: DimensionScores,
    pub control: ControlAssessment,
    /// Effective classification: computed, or the override when present.
    pub classification: Classification,
    pub significant: bool,
    #[serde(rename = "override", default, skip_serializing_if = "Option::is_none")]
    pub override_: Option<Override>,
    pub rationale: String,
    pub evaluated_by: StakeholderRef,
    pub evaluated_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionFinalClassification {
    pub criterion_id: String,
    pub classification: Classification,
    pub scenario_ids: Vec<String>,
}

/// One instance per passing template of each advancing criterion. Instance
/// ids equal template ids. Assignment goes to the first stakeholder holding
/// the criterion's role, or a role-only placeholder.
pub fn instantiate_scenarios(
    advancing: &BTreeSet<String>,
    c: &Catalog,
    d: &DriverSet,
    stakeholders: &[StakeholderRef],
) -> Result<Vec<ScenarioInstance>> {
    let mut out = Vec::new();
    for criterion in c.criteria.iter().filter(|x| advancing.contains(&x.id)) {
        let assigned_to = stakeholders
            .iter()
            .find(|s| s.role == criterion.stakeholder_role)
            .cloned()
            .unwrap_or_else(|| StakeholderRef::role_only(&criterion.stakeholder_role));
        let before = out.len();
        for template in c
            .templates_for(&criterion.id)
            .filter(|t| evaluate_predicate(&t.applicability, d))
        {
            out.push(ScenarioInstance {
                id: template.id.clone(),
                template_id: template.id.clone(),
                criterion_id: criterion.id.clone(),
                narrative: template.narrative.clone(),
                assigned_to: assigned_to.clone(),
            });
        }
        if out.len() == before {
            return Err(Error::NoScenarioApplicable(criterion.id.clone()));
        }
    }
    if let Some(unknown) = advancing.iter().find(|id| c.criterion(id).is_none()) {
        return Err(Error::NotFound(format!("criterion {unknown}")));
    }
    Ok(out)
}

pub fn classify(dim: &DimensionScores, ctrl: &ControlAssessment, t: &Thresholds) -> ClassificationOutcome {
    let base = dim.as_array().into_iter().max().unwrap_or(0);
    let residual = base.saturating_sub(ctrl.effectiveness.mitigation_credit());
    let classification = match residual {
        0 => Classification::Irrelevant,
        1 => Classification::PartiallyRelevant,
        _ => Classification::Relevant,
    };
    let significant = t
        .significance_dimensions
        .iter()
        .any(|&d| dim.get(d) >= t.significance_dimension_min);
    ClassificationOutcome {
        classification,
        significant,
    }
}

#[allow(clippy::too_many_arguments)]
pub fn evaluate_scenario(
    instance: &ScenarioInstance,
    dimensions: DimensionScores,
    control: ControlAssessment,
    rationale: &str,
    actor: &StakeholderRef,
    at: DateTime<Utc>,
    thresholds: &Thresholds,
    override_input: Option<OverrideInput>,
) -> Result<ScenarioEvaluation> {
    let invalid = |reason: &str| Error::InvalidEvaluation {
        scenario_id: instance.id.clone(),
        reason: reason.to_string(),
    };
    if !dimensions.in_range() {
        return Err(invalid("dimension scores must be within 0..=3"));
    }
    if rationale.trim().is_empty() {
        return Err(invalid("rationale is required"));
    }
    if control.effectiveness.claims_effectiveness() && control.evidence_refs.iter().all(|r| r.trim().is_empty()) {
        return Err(Error::EvidenceRequired(instance.id.clone()));
    }

    let computed = classify(&dimensions, &control, thresholds);
    let (classification, significant, override_) = match override_input {
        None => (computed.classification, computed.significant, None),
        Some(o) => {
            if o.rationale.trim().is_empty() {
                return Err(invalid("override requires a rationale"));
            }
            let significant = o.significant.unwrap_or(computed.significant);
            (
                o.classification,
                significant,
                Some(Override {
                    classification: o.classification,
                    significant: o.significant,
                    rationale: o.rationale,
                    actor: actor.clone(),
                }),
            )
        }
    };

    Ok(ScenarioEvaluation {
        scenario_id: instance.id.clone(),
        dimensions,
        control,
        classification,
        significant,
        override_,
        rationale: rationale.to_string(),
        evaluated_by: actor.clone(),
        evaluated_at: at,
    })
}

/// Maximum classification over the criterion's scenarios.
pub fn finalize_criterion(
    criterion_id: &str,
    instances: &[ScenarioInstance],
    evals: &BTreeMap<String, ScenarioEvaluation>,
) -> Result<CriterionFinalClassification> {
    let mine: Vec<&ScenarioInstance> = instances.iter().filter(|i| i.criterion_id == criterion_id).collect();
    let missing: Vec<String> = mine
        .iter()
        .filter(|i| !evals.contains_key(&i.id))
        .map(|i| i.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::IncompletePhase {
            stage: Phase::Phase2,
            missing,
        });
    }
    let classification = mine
        .iter()
        .map(|i| evals[&i.id].classification)
        .max()
        .unwrap_or(Classification::Irrelevant);
    Ok(CriterionFinalClassification {
        criterion_id: criterion_id.to_string(),
        classification,
        scenario_ids: mine.iter().map(|i| i.id.clone()).collect(),
    })
}
