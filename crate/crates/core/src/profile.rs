//! Phase 0: the AI system overview and the drivers it yields.

use std::collections::BTreeSet;
use std::fmt;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::error::{Error, Result};

/// Lifecycle stage of the assessed system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LifecycleStage {
    Design,
    Implementation,
    Deployment,
    PostDeployment,
}

impl LifecycleStage {
    pub const ALL: [LifecycleStage; 4] = [
        LifecycleStage::Design,
        LifecycleStage::Implementation,
        LifecycleStage::Deployment,
        LifecycleStage::PostDeployment,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LifecycleStage::Design => "Design",
            LifecycleStage::Implementation => "Implementation",
            LifecycleStage::Deployment => "Deployment",
            LifecycleStage::PostDeployment => "PostDeployment",
        }
    }
}

impl fmt::Display for LifecycleStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for LifecycleStage {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|stage| stage.as_str() == s)
            .ok_or_else(|| format!("unknown lifecycle stage {s:?}"))
    }
}

/// An internal stakeholder. Identity is an opaque label; no authentication.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StakeholderRef {
    pub name: String,
    pub role: String,
    #[serde(default)]
    pub contact: String,
}

impl StakeholderRef {
    pub fn new(name: impl Into<String>, role: impl Into<String>, contact: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            role: role.into(),
            contact: contact.into(),
        }
    }

    /// Placeholder for a role nobody has been named for yet.
    pub fn role_only(role: impl Into<String>) -> Self {
        let role = role.into();
        Self {
            name: role.clone(),
            role,
            contact: String::new(),
        }
    }
}

/// Who keeps the system overview current, and how often it is reviewed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stewardship {
    pub owner: StakeholderRef,
    pub review_interval_days: u32,
    pub last_reviewed: DateTime<Utc>,
}

impl Stewardship {
    pub fn review_due(&self) -> DateTime<Utc> {
        self.last_reviewed + Duration::days(i64::from(self.review_interval_days))
    }
}

/// Mandatory profile fields that may be reported missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileField {
    SystemName,
    Purpose,
    LifecycleStage,
    Stewardship,
}

impl fmt::Display for ProfileField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProfileField::SystemName => "system_name",
            ProfileField::Purpose => "purpose",
            ProfileField::LifecycleStage => "lifecycle_stage",
            ProfileField::Stewardship => "stewardship",
        })
    }
}

/// The AI system overview. Optional fields stay `None` until provided; the
/// profile is incomplete while any mandatory field is missing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemProfile {
    pub system_name: String,
    pub purpose: String,
    pub operational_context: String,
    pub stakeholders: Vec<StakeholderRef>,
    pub lifecycle_stage: Option<LifecycleStage>,
    pub domain_flags: BTreeSet<String>,
    pub system_types: BTreeSet<String>,
    pub stewardship: Option<Stewardship>,
}

/// Partial profile content. Every `Some` field replaces the current value.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileDelta {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system_name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub purpose: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operational_context: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stakeholders: Option<Vec<StakeholderRef>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lifecycle_stage: Option<LifecycleStage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain_flags: Option<BTreeSet<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system_types: Option<BTreeSet<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stewardship: Option<Stewardship>,
}

/// The facts that parameterize every gate: a pure projection of the profile.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriverSet {
    pub lifecycle_stage: LifecycleStage,
    pub domain_flags: BTreeSet<String>,
    pub system_types: BTreeSet<String>,
}

/// Outcome of applying a [`ProfileDelta`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileUpdate {
    pub profile: SystemProfile,
    pub drivers_changed: bool,
    pub before_digest: String,
    pub after_digest: String,
}

/// Creates a profile from partial content. Missing mandatory fields are
/// reported by [`SystemProfile::missing_fields`], not rejected.
pub fn create_profile(initial: ProfileDelta) -> SystemProfile {
    let mut profile = SystemProfile::default();
    profile.apply(initial);
    profile
}

/// Closes Phase 0, returning the driver projection.
pub fn complete_phase0(profile: &SystemProfile) -> Result<DriverSet> {
    let missing = profile.missing_fields();
    if !missing.is_empty() {
        return Err(Error::IncompleteProfile(missing));
    }
    profile.validate()?;
    Ok(profile.drivers().expect("lifecycle stage checked above"))
}

/// Applies `change` on behalf of `actor`. Staleness of downstream phases is
/// decided by the workflow from `drivers_changed`.
pub fn update_profile(profile: &SystemProfile, change: ProfileDelta, actor: &StakeholderRef) -> Result<ProfileUpdate> {
    if actor.role.trim().is_empty() {
        return Err(Error::InvalidProfile("actor role is empty".into()));
    }
    let mut next = profile.clone();
    next.apply(change);
    next.validate()?;
    Ok(ProfileUpdate {
        drivers_changed: profile.drivers() != next.drivers(),
        before_digest: canonical::digest(profile),
        after_digest: canonical::digest(&next),
        profile: next,
    })
}

impl SystemProfile {
    pub fn missing_fields(&self) -> Vec<ProfileField> {
        let mut missing = Vec::new();
        if self.system_name.trim().is_empty() {
            missing.push(ProfileField::SystemName);
        }
        if self.purpose.trim().is_empty() {
            missing.push(ProfileField::Purpose);
        }
        if self.lifecycle_stage.is_none() {
            missing.push(ProfileField::LifecycleStage);
        }
        if self.stewardship.is_none() {
            missing.push(ProfileField::Stewardship);
        }
        missing
    }

    pub fn is_complete(&self) -> bool {
        self.missing_fields().is_empty()
    }

    /// `None` until a lifecycle stage is known.
    pub fn drivers(&self) -> Option<DriverSet> {
        Some(DriverSet {
            lifecycle_stage: self.lifecycle_stage?,
            domain_flags: self.domain_flags.clone(),
            system_types: self.system_types.clone(),
        })
    }

    /// First stakeholder holding `role`, or a role-only placeholder.
    pub fn stakeholder_for_role(&self, role: &str) -> StakeholderRef {
        self.stakeholders
            .iter()
            .find(|s| s.role == role)
            .cloned()
            .unwrap_or_else(|| StakeholderRef::role_only(role))
    }

    /// True when the stewardship review interval has elapsed at `now`.
    pub fn review_overdue(&self, now: DateTime<Utc>) -> bool {
        self.stewardship.as_ref().is_some_and(|s| now > s.review_due())
    }

    fn apply(&mut self, change: ProfileDelta) {
        let ProfileDelta {
            system_name,
            purpose,
            operational_context,
            stakeholders,
            lifecycle_stage,
            domain_flags,
            system_types,
            stewardship,
        } = change;
        if let Some(v) = system_name {
            self.system_name = v;
        }
        if let Some(v) = purpose {
            self.purpose = v;
        }
        if let Some(v) = operational_context {
            self.operational_context = v;
        }
        if let Some(v) = stakeholders {
            self.stakeholders = v;
        }
        if let Some(v) = lifecycle_stage {
            self.lifecycle_stage = Some(v);
        }
        if let Some(v) = domain_flags {
            self.domain_flags = v;
        }
        if let Some(v) = system_types {
            self.system_types = v;
        }
        if let Some(v) = stewardship {
            self.stewardship = Some(v);
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some(s) = self.stakeholders.iter().find(|s| s.role.trim().is_empty()) {
            return Err(Error::InvalidProfile(format!(
                "stakeholder {:?} has an empty role",
                s.name
            )));
        }
        if let Some(stewardship) = &self.stewardship {
            if stewardship.review_interval_days == 0 {
                return Err(Error::InvalidProfile(
                    "stewardship review_interval_days must be at least 1".into(),
                ));
            }
            if stewardship.owner.role.trim().is_empty() {
                return Err(Error::InvalidProfile("stewardship owner has an empty role".into()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn steward() -> Stewardship {
        Stewardship {
            owner: StakeholderRef::new("Ada", "compliance_officer", "ada@example.org"),
            review_interval_days: 90,
            last_reviewed: Utc.with_ymd_and_hms(2025, 1, 1, 0, 0, 0).unwrap(),
        }
    }

    fn triage_delta() -> ProfileDelta {
        ProfileDelta {
            system_name: Some("Automated Triage Service".into()),
            purpose: Some("Collect patient information to support triage".into()),
            lifecycle_stage: Some(LifecycleStage::Implementation),
            domain_flags: Some(["health", "critical_decision"].map(String::from).into()),
            system_types: Some(["chatbot".to_string()].into()),
            stewardship: Some(steward()),
            ..Default::default()
        }
    }

    #[test]
    fn name_and_purpose_only_is_incomplete() {
        let p = create_profile(ProfileDelta {
            system_name: Some("Automated Triage Service".into()),
            purpose: Some("triage".into()),
            ..Default::default()
        });
        assert_eq!(
            p.missing_fields(),
            vec![ProfileField::LifecycleStage, ProfileField::Stewardship]
        );
    }

    #[test]
    fn empty_input_flags_every_mandatory_field() {
        let p = create_profile(ProfileDelta::default());
        assert_eq!(
            p.missing_fields(),
            vec![
                ProfileField::SystemName,
                ProfileField::Purpose,
                ProfileField::LifecycleStage,
                ProfileField::Stewardship
            ]
        );
    }

    #[test]
    fn duplicate_stakeholder_names_with_distinct_roles_are_kept() {
        let p = create_profile(ProfileDelta {
            stakeholders: Some(vec![
                StakeholderRef::new("Sam", "clinical_lead", ""),
                StakeholderRef::new("Sam", "data_protection_officer", ""),
            ]),
            ..Default::default()
        });
        let roles: Vec<_> = p.stakeholders.iter().map(|s| s.role.as_str()).collect();
        assert_eq!(roles, ["clinical_lead", "data_protection_officer"]);
    }

    #[test]
    fn triage_profile_projects_to_its_drivers() {
        let p = create_profile(triage_delta());
        let d = complete_phase0(&p).unwrap();
        assert_eq!(d.lifecycle_stage, LifecycleStage::Implementation);
        assert_eq!(d.domain_flags, ["critical_decision", "health"].map(String::from).into());
        assert!(!d.domain_flags.contains("generative_ai"));
        assert!(!d.domain_flags.contains("copyrighted_data"));
    }

    #[test]
    fn missing_lifecycle_blocks_phase0() {
        let mut delta = triage_delta();
        delta.lifecycle_stage = None;
        let err = complete_phase0(&create_profile(delta)).unwrap_err();
        assert!(matches!(err, Error::IncompleteProfile(ref f) if f == &[ProfileField::LifecycleStage]));
    }

    #[test]
    fn empty_flags_still_yield_drivers() {
        let mut delta = triage_delta();
        delta.domain_flags = Some(BTreeSet::new());
        let d = complete_phase0(&create_profile(delta)).unwrap();
        assert!(d.domain_flags.is_empty());
    }

    #[test]
    fn zero_review_interval_is_rejected() {
        let mut delta = triage_delta();
        delta.stewardship.as_mut().unwrap().review_interval_days = 0;
        assert!(matches!(
            complete_phase0(&create_profile(delta)),
            Err(Error::InvalidProfile(_))
        ));
    }

    #[test]
    fn stewardship_owner_change_leaves_drivers_alone() {
        let p = create_profile(triage_delta());
        let actor = StakeholderRef::new("Ada", "compliance_officer", "");
        let mut s = steward();
        s.owner = StakeholderRef::new("Bo", "compliance_officer", "");
        let update = update_profile(
            &p,
            ProfileDelta {
                stewardship: Some(s),
                ..Default::default()
            },
            &actor,
        )
        .unwrap();
        assert!(!update.drivers_changed);
        assert_ne!(update.before_digest, update.after_digest);
    }

    #[test]
    fn adding_a_flag_changes_drivers() {
        let p = create_profile(triage_delta());
        let actor = StakeholderRef::new("Ada", "compliance_officer", "");
        let update = update_profile(
            &p,
            ProfileDelta {
                domain_flags: Some(
                    ["health", "critical_decision", "generative_ai"]
                        .map(String::from)
                        .into(),
                ),
                ..Default::default()
            },
            &actor,
        )
        .unwrap();
        assert!(update.drivers_changed);
    }

    #[test]
    fn noop_delta_keeps_digest() {
        let p = create_profile(triage_delta());
        let actor = StakeholderRef::new("Ada", "compliance_officer", "");
        let update = update_profile(&p, ProfileDelta::default(), &actor).unwrap();
        assert_eq!(update.profile, p);
        assert_eq!(update.before_digest, update.after_digest);
    }

    #[test]
    fn review_overdue_after_interval() {
        let p = create_profile(triage_delta());
        let due = p.stewardship.as_ref().unwrap().review_due();
        assert!(!p.review_overdue(due));
        assert!(p.review_overdue(due + Duration::seconds(1)));
    }
}
