use thiserror::Error;

use crate::catalog::CatalogError;
use crate::profile::ProfileField;
use crate::workflow::Phase;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by workflow operations, stores and exports.
#[derive(Debug, Error)]
pub enum Error {
    #[error("incomplete profile: missing {}", join_fields(.0))]
    IncompleteProfile(Vec<ProfileField>),

    #[error("question {0} is not applicable to this system")]
    QuestionNotApplicable(String),

    #[error("answer to {0} is NotApplicable but carries no justification note")]
    MissingJustification(String),

    #[error("{stage} is incomplete: pending {}", .missing.join(", "))]
    IncompletePhase { stage: Phase, missing: Vec<String> },

    #[error("no scenario template applies to advancing criterion {0}")]
    NoScenarioApplicable(String),

    #[error("control for scenario {0} claims effectiveness without evidence")]
    EvidenceRequired(String),

    #[error("invalid evaluation for scenario {scenario_id}: {reason}")]
    InvalidEvaluation { scenario_id: String, reason: String },

    #[error("unknown scenario {0}")]
    UnknownScenario(String),

    #[error("scenario {0} is not eligible for remediation")]
    ScenarioNotEligible(String),

    #[error("invalid remediation action {action_id}: {reason}")]
    InvalidAction { action_id: String, reason: String },

    #[error("invalid profile change: {0}")]
    InvalidProfile(String),

    #[error("report cannot be built: {0} is not finalized")]
    PhaseIncomplete(Phase),

    #[error("{command} is not allowed during {phase}")]
    InvalidTransition { phase: Phase, command: &'static str },

    #[error("revision conflict: expected {expected}, head is {actual}")]
    RevisionConflict { expected: u64, actual: u64 },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("assessment {0} already exists")]
    AlreadyExists(String),

    #[error("invalid assessment id {0:?}")]
    InvalidId(String),

    #[error("session script line {line}: {message}")]
    Script { line: u64, message: String },

    #[error(transparent)]
    Catalog(#[from] CatalogError),

    #[error("malformed stored document {path}: {source}")]
    Corrupt {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("corrupt audit log: {0}")]
    CorruptAudit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable identifier, used by the HTTP API and CLI output.
    pub fn rule_id(&self) -> &'static str {
        match self {
            Error::IncompleteProfile(_) => "incomplete-profile",
            Error::QuestionNotApplicable(_) => "question-not-applicable",
            Error::MissingJustification(_) => "missing-justification",
            Error::IncompletePhase { .. } => "incomplete-phase",
            Error::NoScenarioApplicable(_) => "no-scenario-applicable",
            Error::EvidenceRequired(_) => "evidence-required",
            Error::InvalidEvaluation { .. } => "invalid-evaluation",
            Error::UnknownScenario(_) => "unknown-scenario",
            Error::ScenarioNotEligible(_) => "scenario-not-eligible",
            Error::InvalidAction { .. } => "invalid-action",
            Error::InvalidProfile(_) => "invalid-profile",
            Error::PhaseIncomplete(_) => "phase-incomplete",
            Error::InvalidTransition { .. } => "invalid-transition",
            Error::RevisionConflict { .. } => "revision-conflict",
            Error::NotFound(_) => "not-found",
            Error::AlreadyExists(_) => "already-exists",
            Error::InvalidId(_) => "invalid-id",
            Error::Script { .. } => "script-syntax",
            Error::Catalog(_) => "catalog",
            Error::Corrupt { .. } | Error::CorruptAudit(_) => "corrupt-store",
            Error::Io(_) => "io",
        }
    }

    /// Items blocking a gate, if this is a gate error.
    pub fn missing_items(&self) -> Vec<String> {
        match self {
            Error::IncompleteProfile(fields) => fields.iter().map(|f| f.to_string()).collect(),
            Error::IncompletePhase { missing, .. } => missing.clone(),
            Error::NoScenarioApplicable(id) => vec![id.clone()],
            _ => Vec::new(),
        }
    }
}

fn join_fields(fields: &[ProfileField]) -> String {
    fields.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(", ")
}
