//! Gate-based fundamental rights impact assessment (FRIA) engine.
//!
//! An assessment moves an AI system through three gated phases and a
//! concluding output stage:
//!
//! | Phase | Module | Gate |
//! |-------|--------|------|
//! | 0: system overview | [`profile`] | drivers select applicable checklist questions |
//! | 1: rights checklist | [`checklist`] | per-criterion relevance selects criteria for scenario analysis |
//! | 2: impact scenarios | [`scenarios`], [`remediation`] | classification and significance select required actions |
//! | Output | [`report`] | coverage of required actions decides Draft vs Final |
//!
//! The assessment content (domains, criteria, questions, scenario templates,
//! thresholds) lives in a declarative [`catalog`]. Gate logic is in
//! [`filtering`]. Every mutation goes through [`workflow::apply`], which
//! yields exactly one audit event, and is persisted by a [`store`].
//! [`service`] exposes the workflow over HTTP and [`session`] replays
//! line-oriented session scripts for batch runs.

pub mod canonical;
pub mod catalog;
pub mod checklist;
pub mod cli;
pub mod error;
pub mod filtering;
pub mod fixture;
pub mod profile;
pub mod remediation;
pub mod report;
pub mod scenarios;
pub mod service;
pub mod session;
pub mod store;
pub mod workflow;

pub use catalog::{parse_catalog, validate_catalog, Catalog};
pub use error::{Error, Result};
pub use report::AssessmentReport;
pub use workflow::{Command, Phase, Workflow};
