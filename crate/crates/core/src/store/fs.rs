use std::fs::{self, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use super::{validate_id, AssessmentStore, AssessmentSummary, AuditEvent, AuditLog, Committed, PendingEvent};
use crate::canonical;
use crate::error::{Error, Result};
use crate::workflow::AssessmentRecord;

const AUDIT_FILE: &str = "audit.log";

/// Directory-of-files store:
///
/// ```text
/// <root>/<assessment-id>/rev-<n>.json   canonical record, one per revision
/// <root>/<assessment-id>/audit.log      one canonical event per line
/// ```
///
/// Revision files are published with a hard link from a temporary file, so a
/// revision either appears complete or not at all, and two writers racing for
/// the same revision cannot both succeed.
#[derive(Debug)]
pub struct FsStore {
    root: PathBuf,
    write_lock: Mutex<()>,
}

impl FsStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Self {
            root,
            write_lock: Mutex::new(()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dir(&self, id: &str) -> Result<PathBuf> {
        validate_id(id)?;
        Ok(self.root.join(id))
    }

    fn head(dir: &Path) -> Result<u64> {
        let mut head = 0;
        for entry in fs::read_dir(dir)? {
            let name = entry?.file_name();
            if let Some(n) = name
                .to_str()
                .and_then(|n| n.strip_prefix("rev-"))
                .and_then(|n| n.strip_suffix(".json"))
                .and_then(|n| n.parse::<u64>().ok())
            {
                head = head.max(n);
            }
        }
        Ok(head)
    }

    fn read_record(path: &Path) -> Result<AssessmentRecord> {
        let bytes = fs::read(path)?;
        serde_json::from_slice(&bytes).map_err(|source| Error::Corrupt {
            path: path.display().to_string(),
            source,
        })
    }

    fn read_audit(dir: &Path) -> Result<AuditLog> {
        let path = dir.join(AUDIT_FILE);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == ErrorKind::NotFound => String::new(),
            Err(e) => return Err(e.into()),
        };
        let events = text
            .lines()
            .filter(|l| !l.is_empty())
            .map(|l| {
                serde_json::from_str::<AuditEvent>(l).map_err(|source| Error::Corrupt {
                    path: path.display().to_string(),
                    source,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        AuditLog::from_events(events)
    }
}

impl AssessmentStore for FsStore {
    fn save(&self, record: &AssessmentRecord, expected_revision: u64, event: PendingEvent) -> Result<Committed> {
        let dir = self.dir(&record.id)?;
        let _guard = self.write_lock.lock().unwrap_or_else(|p| p.into_inner());

        if expected_revision == 0 {
            if dir.exists() && Self::head(&dir)? > 0 {
                return Err(Error::AlreadyExists(record.id.clone()));
            }
            fs::create_dir_all(&dir)?;
        } else if !dir.is_dir() {
            return Err(Error::NotFound(format!("assessment {}", record.id)));
        }

        let head = Self::head(&dir)?;
        if head != expected_revision {
            return Err(Error::RevisionConflict {
                expected: expected_revision,
                actual: head,
            });
        }

        let revision = expected_revision + 1;
        let mut stored = record.clone();
        stored.revision = revision;
        let target = dir.join(format!("rev-{revision}.json"));
        let staging = dir.join(format!(".rev-{revision}.json.{}.tmp", std::process::id()));
        fs::write(&staging, canonical::to_bytes(&stored))?;
        let published = fs::hard_link(&staging, &target);
        let _ = fs::remove_file(&staging);
        match published {
            Ok(()) => {}
            Err(e) if e.kind() == ErrorKind::AlreadyExists => {
                return Err(Error::RevisionConflict {
                    expected: expected_revision,
                    actual: Self::head(&dir)?,
                })
            }
            Err(e) => return Err(e.into()),
        }

        let mut log = Self::read_audit(&dir)?;
        let seq = log.append(event);
        let line = canonical::to_line(log.last().expect("just appended"));
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(dir.join(AUDIT_FILE))?;
        file.write_all(format!("{line}\n").as_bytes())?;
        file.sync_data()?;

        Ok(Committed {
            id: stored.id,
            revision,
            seq,
            phase: stored.phase,
        })
    }

    fn load(&self, id: &str, revision: Option<u64>) -> Result<AssessmentRecord> {
        let dir = self.dir(id)?;
        if !dir.is_dir() {
            return Err(Error::NotFound(format!("assessment {id}")));
        }
        let revision = match revision {
            Some(r) => r,
            None => Self::head(&dir)?,
        };
        let path = dir.join(format!("rev-{revision}.json"));
        if !path.is_file() {
            return Err(Error::NotFound(format!("assessment {id} revision {revision}")));
        }
        Self::read_record(&path)
    }

    fn list(&self) -> Result<Vec<AssessmentSummary>> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.root)? {
            let entry = entry?;
            let Some(id) = entry.file_name().to_str().map(str::to_string) else {
                continue;
            };
            if validate_id(&id).is_err() || !entry.path().is_dir() || Self::head(&entry.path())? == 0 {
                continue;
            }
            out.push(AssessmentSummary::of(&self.load(&id, None)?));
        }
        out.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(out)
    }

    fn audit(&self, id: &str) -> Result<Vec<AuditEvent>> {
        let dir = self.dir(id)?;
        if !dir.is_dir() {
            return Err(Error::NotFound(format!("assessment {id}")));
        }
        Ok(Self::read_audit(&dir)?.events().to_vec())
    }
}
