//! Remedial actions for scenarios that require or are recommended for
//! intervention, with explicit ownership and coverage checking.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtering::OutputPartition;
use crate::profile::StakeholderRef;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ActionType {
    PolicyRevision,
    ControlImplementation,
    Training,
    Documentation,
    Monitoring,
    DesignChange,
}

impl ActionType {
    pub const ALL: [ActionType; 6] = [
        ActionType::PolicyRevision,
        ActionType::ControlImplementation,
        ActionType::Training,
        ActionType::Documentation,
        ActionType::Monitoring,
        ActionType::DesignChange,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ActionType::PolicyRevision => "PolicyRevision",
            ActionType::ControlImplementation => "ControlImplementation",
            ActionType::Training => "Training",
            ActionType::Documentation => "Documentation",
            ActionType::Monitoring => "Monitoring",
            ActionType::DesignChange => "DesignChange",
        }
    }
}

impl fmt::Display for ActionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ActionType {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown action type {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ActionStatus {
    Proposed,
    InProgress,
    Done,
}

impl ActionStatus {
    pub const ALL: [ActionStatus; 3] = [ActionStatus::Proposed, ActionStatus::InProgress, ActionStatus::Done];

    pub fn as_str(self) -> &'static str {
        match self {
            ActionStatus::Proposed => "Proposed",
            ActionStatus::InProgress => "InProgress",
            ActionStatus::Done => "Done",
        }
    }
}

impl fmt::Display for ActionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ActionStatus {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown action status {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemediationAction {
    pub id: String,
    pub scenario_id: String,
    pub action_type: ActionType,
    pub description: String,
    pub owner: StakeholderRef,
    pub status: ActionStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub due: Option<NaiveDate>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemediationLedger {
    pub actions: Vec<RemediationAction>,
    /// Scenario id → ids of the actions attached to it.
    pub coverage: BTreeMap<String, Vec<String>>,
}

/// Scenario ids needing remediation, split by obligation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemediationNeeds {
    pub required: BTreeSet<String>,
    pub recommended: BTreeSet<String>,
}

impl RemediationNeeds {
    pub fn is_eligible(&self, scenario_id: &str) -> bool {
        self.required.contains(scenario_id) || self.recommended.contains(scenario_id)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub uncovered_required: Vec<String>,
}

impl CoverageReport {
    pub fn is_complete(&self) -> bool {
        self.uncovered_required.is_empty()
    }
}

pub fn required_remediations(partition: &OutputPartition) -> RemediationNeeds {
    RemediationNeeds {
        required: partition.requires_action.clone(),
        recommended: partition.recommended.clone(),
    }
}

impl RemediationLedger {
    pub fn action(&self, id: &str) -> Option<&RemediationAction> {
        self.actions.iter().find(|a| a.id == id)
    }

    pub fn actions_for<'a>(&'a self, scenario_id: &'a str) -> impl Iterator<Item = &'a RemediationAction> {
        self.actions.iter().filter(move |a| a.scenario_id == scenario_id)
    }

    /// Appends `action` if its scenario is eligible under `needs`.
    pub fn add(&mut self, action: RemediationAction, needs: &RemediationNeeds) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidAction {
            action_id: action.id.clone(),
            reason: reason.to_string(),
        };
        if action.id.trim().is_empty() {
            return Err(invalid("id is empty"));
        }
        if action.description.trim().is_empty() {
            return Err(invalid("description is empty"));
        }
        if action.owner.role.trim().is_empty() {
            return Err(invalid("owner role is empty"));
        }
        if self.action(&action.id).is_some() {
            return Err(invalid("duplicate action id"));
        }
        if !needs.is_eligible(&action.scenario_id) {
            return Err(Error::ScenarioNotEligible(action.scenario_id));
        }
        self.coverage
            .entry(action.scenario_id.clone())
            .or_default()
            .push(action.id.clone());
        self.actions.push(action);
        Ok(())
    }

    /// Updates an action's status, returning the previous one.
    pub fn set_status(&mut self, action_id: &str, status: ActionStatus) -> Result<ActionStatus> {
        let action = self
            .actions
            .iter_mut()
            .find(|a| a.id == action_id)
            .ok_or_else(|| Error::NotFound(format!("action {action_id}")))?;
        Ok(std::mem::replace(&mut action.status, status))
    }
}

/// Functional form of [`RemediationLedger::add`].
pub fn add_action(
    action: RemediationAction,
    ledger: &RemediationLedger,
    needs: &RemediationNeeds,
) -> Result<RemediationLedger> {
    let mut next = ledger.clone();
    next.add(action, needs)?;
    Ok(next)
}

/// Required scenarios with no attached action. Empty means the report may be
/// finalized; recommended scenarios never block.
pub fn coverage_check(ledger: &RemediationLedger, partition: &OutputPartition) -> CoverageReport {
    CoverageReport {
        uncovered_required: partition
            .requires_action
            .iter()
            .filter(|id| ledger.coverage.get(*id).map_or(true, |a| a.is_empty()))
            .cloned()
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;
    use proptest::prelude::*;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn triage_partition() -> OutputPartition {
        OutputPartition {
            requires_action: set(&[fixture::OVERSIGHT_SCENARIO, fixture::FAIRNESS_SCENARIO]),
            ..Default::default()
        }
    }

    fn action(id: &str, scenario: &str, kind: ActionType, description: &str) -> RemediationAction {
        RemediationAction {
            id: id.into(),
            scenario_id: scenario.into(),
            action_type: kind,
            description: description.into(),
            owner: StakeholderRef::new("Dr. Marco Bianchi", "clinical_lead", ""),
            status: ActionStatus::Proposed,
            due: None,
        }
    }

    #[test]
    fn triage_requires_both_scenarios() {
        let needs = required_remediations(&triage_partition());
        assert_eq!(
            needs.required,
            set(&[fixture::OVERSIGHT_SCENARIO, fixture::FAIRNESS_SCENARIO])
        );
        assert!(needs.recommended.is_empty());
    }

    #[test]
    fn empty_partition_needs_nothing() {
        let needs = required_remediations(&OutputPartition::default());
        assert!(needs.required.is_empty() && needs.recommended.is_empty());
    }

    #[test]
    fn triage_actions_cover_both_findings() {
        let partition = triage_partition();
        let needs = required_remediations(&partition);
        let mut ledger = RemediationLedger::default();
        ledger
            .add(
                action(
                    "act-1",
                    fixture::OVERSIGHT_SCENARIO,
                    ActionType::ControlImplementation,
                    "human-in-the-loop mechanisms requiring medical staff approval",
                ),
                &needs,
            )
            .unwrap();
        assert_eq!(
            coverage_check(&ledger, &partition).uncovered_required,
            [fixture::FAIRNESS_SCENARIO]
        );
        ledger
            .add(
                action(
                    "act-2",
                    fixture::FAIRNESS_SCENARIO,
                    ActionType::Monitoring,
                    "periodic bias assessments",
                ),
                &needs,
            )
            .unwrap();
        assert_eq!(ledger.coverage[fixture::FAIRNESS_SCENARIO].len(), 1);
        assert!(coverage_check(&ledger, &partition).is_complete());
    }

    #[test]
    fn irrelevant_scenario_is_not_eligible() {
        let partition = OutputPartition {
            excluded: set(&["irrelevant"]),
            ..Default::default()
        };
        let needs = required_remediations(&partition);
        let err = RemediationLedger::default()
            .add(action("a", "irrelevant", ActionType::Training, "d"), &needs)
            .unwrap_err();
        assert!(matches!(err, Error::ScenarioNotEligible(s) if s == "irrelevant"));
    }

    #[test]
    fn empty_description_and_duplicate_ids_are_invalid() {
        let needs = required_remediations(&triage_partition());
        let mut ledger = RemediationLedger::default();
        assert!(matches!(
            ledger.add(
                action("a", fixture::FAIRNESS_SCENARIO, ActionType::Training, " "),
                &needs
            ),
            Err(Error::InvalidAction { .. })
        ));
        ledger
            .add(
                action("a", fixture::FAIRNESS_SCENARIO, ActionType::Training, "d"),
                &needs,
            )
            .unwrap();
        assert!(matches!(
            ledger.add(
                action("a", fixture::FAIRNESS_SCENARIO, ActionType::Training, "d"),
                &needs
            ),
            Err(Error::InvalidAction { .. })
        ));
    }

    #[test]
    fn status_updates_return_the_previous_status() {
        let needs = required_remediations(&triage_partition());
        let mut ledger = RemediationLedger::default();
        ledger
            .add(
                action("a", fixture::FAIRNESS_SCENARIO, ActionType::Training, "d"),
                &needs,
            )
            .unwrap();
        assert_eq!(
            ledger.set_status("a", ActionStatus::Done).unwrap(),
            ActionStatus::Proposed
        );
        assert!(matches!(
            ledger.set_status("zz", ActionStatus::Done),
            Err(Error::NotFound(_))
        ));
    }

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("s{i}")).collect()
    }

    proptest! {
        #[test]
        fn coverage_equals_set_difference(
            buckets in proptest::collection::vec(0..4u8, 0..12),
            attach in proptest::collection::vec(any::<bool>(), 12),
        ) {
            let scenario_ids = ids(buckets.len());
            let mut partition = OutputPartition::default();
            for (id, b) in scenario_ids.iter().zip(&buckets) {
                match b {
                    0 => partition.requires_action.insert(id.clone()),
                    1 => partition.no_action.insert(id.clone()),
                    2 => partition.recommended.insert(id.clone()),
                    _ => partition.excluded.insert(id.clone()),
                };
            }
            let needs = required_remediations(&partition);
            prop_assert_eq!(&needs.required, &partition.requires_action);
            prop_assert_eq!(&needs.recommended, &partition.recommended);

            let mut ledger = RemediationLedger::default();
            let mut covered = BTreeSet::new();
            let mut previous_uncovered = coverage_check(&ledger, &partition).uncovered_required.len();
            for (i, id) in scenario_ids.iter().enumerate() {
                if !attach[i] {
                    continue;
                }
                let result = ledger.add(action(&format!("a{i}"), id, ActionType::Training, "d"), &needs);
                prop_assert_eq!(result.is_ok(), needs.is_eligible(id));
                if result.is_ok() {
                    covered.insert(id.clone());
                }
                let now = coverage_check(&ledger, &partition).uncovered_required.len();
                prop_assert!(now <= previous_uncovered);
                previous_uncovered = now;
            }
            let oracle: Vec<String> = partition.requires_action.difference(&covered).cloned().collect();
            prop_assert_eq!(coverage_check(&ledger, &partition).uncovered_required, oracle);
        }
    }
}
