use std::collections::BTreeMap;
use std::sync::Mutex;

use super::{validate_id, AssessmentStore, AssessmentSummary, AuditEvent, AuditLog, Committed, PendingEvent};
use crate::error::{Error, Result};
use crate::workflow::AssessmentRecord;

#[derive(Debug, Default)]
struct Entry {
    revisions: Vec<AssessmentRecord>,
    log: AuditLog,
}

/// Process-local store, used for batch runs and tests.
#[derive(Debug, Default)]
pub struct MemoryStore {
    entries: Mutex<BTreeMap<String, Entry>>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }
}

impl AssessmentStore for MemoryStore {
    fn save(&self, record: &AssessmentRecord, expected_revision: u64, event: PendingEvent) -> Result<Committed> {
        validate_id(&record.id)?;
        let mut entries = self.entries.lock().unwrap_or_else(|p| p.into_inner());
        if expected_revision == 0 && entries.contains_key(&record.id) {
            return Err(Error::AlreadyExists(record.id.clone()));
        }
        let entry = if expected_revision == 0 {
            entries.entry(record.id.clone()).or_default()
        } else {
            entries
                .get_mut(&record.id)
                .ok_or_else(|| Error::NotFound(format!("assessment {}", record.id)))?
        };
        let head = entry.revisions.len() as u64;
        if head != expected_revision {
            return Err(Error::RevisionConflict {
                expected: expected_revision,
                actual: head,
            });
        }
        let mut stored = record.clone();
        stored.revision = head + 1;
        let committed = Committed {
            id: stored.id.clone(),
            revision: stored.revision,
            seq: entry.log.append(event),
            phase: stored.phase,
        };
        entry.revisions.push(stored);
        Ok(committed)
    }

    fn load(&self, id: &str, revision: Option<u64>) -> Result<AssessmentRecord> {
        let entries = self.entries.lock().unwrap_or_else(|p| p.into_inner());
        let entry = entries
            .get(id)
            .ok_or_else(|| Error::NotFound(format!("assessment {id}")))?;
        let found = match revision {
            None => entry.revisions.last(),
            Some(r) => r.checked_sub(1).and_then(|i| entry.revisions.get(i as usize)),
        };
        found
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("assessment {id} revision {}", revision.unwrap_or(0))))
    }

    fn list(&self) -> Result<Vec<AssessmentSummary>> {
        let entries = self.entries.lock().unwrap_or_else(|p| p.into_inner());
        Ok(entries
            .values()
            .filter_map(|e| e.revisions.last())
            .map(AssessmentSummary::of)
            .collect())
    }

    fn audit(&self, id: &str) -> Result<Vec<AuditEvent>> {
        let entries = self.entries.lock().unwrap_or_else(|p| p.into_inner());
        entries
            .get(id)
            .map(|e| e.log.events().to_vec())
            .ok_or_else(|| Error::NotFound(format!("assessment {id}")))
    }
}
