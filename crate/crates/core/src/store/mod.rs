//! Revisioned assessment persistence with an append-only audit trail.
//!
//! A save names the revision it expects to replace; the write fails with
//! [`Error::RevisionConflict`] when the head has moved on. Each successful
//! save appends exactly one [`AuditEvent`].

mod fs;
mod memory;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::StakeholderRef;
use crate::workflow::{AssessmentRecord, Phase};

pub use fs::FsStore;
pub use memory::MemoryStore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditKind {
    AssessmentCreated,
    ProfileUpdated,
    Phase0Completed,
    AnswerRecorded,
    Phase1Completed,
    ScenarioEvaluated,
    ActionAdded,
    ActionStatusChanged,
    Phase2Completed,
}

/// An audit event before the log assigns its sequence number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingEvent {
    pub at: DateTime<Utc>,
    pub actor: StakeholderRef,
    pub kind: AuditKind,
    /// What changed, e.g. `profile`, `answers/<question>`, `ledger/<action>`.
    pub subject: String,
    pub before_digest: String,
    pub after_digest: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditEvent {
    pub seq: u64,
    pub at: DateTime<Utc>,
    pub actor: StakeholderRef,
    pub kind: AuditKind,
    pub subject: String,
    pub before_digest: String,
    pub after_digest: String,
}

/// Append-only, gapless event sequence starting at 1.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuditLog {
    events: Vec<AuditEvent>,
}

impl AuditLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_events(events: Vec<AuditEvent>) -> Result<Self> {
        for (i, e) in events.iter().enumerate() {
            if e.seq != i as u64 + 1 {
                return Err(Error::CorruptAudit(format!("gap before seq {}", e.seq)));
            }
        }
        Ok(Self { events })
    }

    pub fn append(&mut self, event: PendingEvent) -> u64 {
        let seq = self.events.len() as u64 + 1;
        self.events.push(AuditEvent {
            seq,
            at: event.at,
            actor: event.actor,
            kind: event.kind,
            subject: event.subject,
            before_digest: event.before_digest,
            after_digest: event.after_digest,
        });
        seq
    }

    pub fn events(&self) -> &[AuditEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn last(&self) -> Option<&AuditEvent> {
        self.events.last()
    }
}

/// Result of a successful save.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Committed {
    pub id: String,
    pub revision: u64,
    pub seq: u64,
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssessmentSummary {
    pub id: String,
    pub revision: u64,
    pub phase: Phase,
    pub system_name: String,
    pub updated_at: DateTime<Utc>,
}

impl AssessmentSummary {
    pub fn of(record: &AssessmentRecord) -> Self {
        Self {
            id: record.id.clone(),
            revision: record.revision,
            phase: record.phase,
            system_name: record.profile.system_name.clone(),
            updated_at: record.updated_at,
        }
    }
}

/// Storage boundary. Implementations must make the revision check and the
/// audit append atomic with the write.
pub trait AssessmentStore: Send + Sync {
    /// Stores `record` as revision `expected_revision + 1`. `expected_revision`
    /// 0 creates a new assessment.
    fn save(&self, record: &AssessmentRecord, expected_revision: u64, event: PendingEvent) -> Result<Committed>;

    /// Latest revision, or exactly `revision` when given.
    fn load(&self, id: &str, revision: Option<u64>) -> Result<AssessmentRecord>;

    fn list(&self) -> Result<Vec<AssessmentSummary>>;

    fn audit(&self, id: &str) -> Result<Vec<AuditEvent>>;
}

impl<S: AssessmentStore + ?Sized> AssessmentStore for std::sync::Arc<S> {
    fn save(&self, record: &AssessmentRecord, expected_revision: u64, event: PendingEvent) -> Result<Committed> {
        (**self).save(record, expected_revision, event)
    }

    fn load(&self, id: &str, revision: Option<u64>) -> Result<AssessmentRecord> {
        (**self).load(id, revision)
    }

    fn list(&self) -> Result<Vec<AssessmentSummary>> {
        (**self).list()
    }

    fn audit(&self, id: &str) -> Result<Vec<AuditEvent>> {
        (**self).audit(id)
    }
}

/// Assessment ids double as directory names.
pub fn validate_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && id.len() <= 128
        && !id.starts_with('.')
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidId(id.to_string()))
    }
}
