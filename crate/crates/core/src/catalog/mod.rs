//! The declarative assessment catalog: impact domains, guiding criteria,
//! checklist questions, scenario templates and gate thresholds.
//!
//! Catalogs are UTF-8 JSON documents. Parsing normalizes every top-level
//! array into id order, so "catalog order" and canonical order coincide and
//! `parse_catalog(canonical_serialize(c)) == c` for every parsed catalog.

mod validate;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checklist::AnswerValue;
use crate::profile::LifecycleStage;
use crate::scenarios::ImpactDimension;

pub use validate::{validate_catalog, Finding, ValidationReport};

/// The only catalog format revision this engine understands.
pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("unsupported schema_version {0:?}")]
    UnsupportedVersion(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Catalog {
    pub schema_version: String,
    pub domains: Vec<ImpactDomain>,
    pub criteria: Vec<GuidingCriterion>,
    pub questions: Vec<ChecklistQuestion>,
    pub scenario_templates: Vec<ScenarioTemplate>,
    #[serde(default)]
    pub thresholds: Thresholds,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpactDomain {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
}

/// An assessable sub-dimension of a domain, mapped to fundamental rights.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuidingCriterion {
    pub id: String,
    pub domain_id: String,
    pub name: String,
    pub rights_refs: Vec<String>,
    pub stakeholder_role: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecklistQuestion {
    pub id: String,
    pub criterion_id: String,
    pub text: String,
    #[serde(default)]
    pub applicability: ApplicabilityPredicate,
    pub stakeholder_role: String,
    /// Relevance points per answer value, each 0 to 2. `NotApplicable` never scores.
    pub weights: BTreeMap<AnswerValue, u8>,
}

impl ChecklistQuestion {
    pub fn weight(&self, value: AnswerValue) -> Option<u8> {
        match value {
            AnswerValue::NotApplicable => None,
            v => self.weights.get(&v).copied(),
        }
    }
}

/// Driver conditions under which an item applies. Empty `*_any_of` sets match
/// everything.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApplicabilityPredicate {
    pub lifecycle_any_of: BTreeSet<LifecycleStage>,
    pub domain_flags_any_of: BTreeSet<String>,
    pub domain_flags_forbidden: BTreeSet<String>,
    pub system_types_any_of: BTreeSet<String>,
}

impl ApplicabilityPredicate {
    pub fn is_vacuous(&self) -> bool {
        self.lifecycle_any_of.is_empty()
            && self.domain_flags_any_of.is_empty()
            && self.domain_flags_forbidden.is_empty()
            && self.system_types_any_of.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioTemplate {
    pub id: String,
    pub criterion_id: String,
    pub narrative: String,
    #[serde(default)]
    pub applicability: ApplicabilityPredicate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Minimum Phase 1 criterion score (0 to 2) that advances to Phase 2.
    pub phase1_advance_min: u8,
    /// Minimum dimension score (1 to 3) that makes a scenario significant.
    pub significance_dimension_min: u8,
    pub significance_dimensions: BTreeSet<ImpactDimension>,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            phase1_advance_min: 2,
            significance_dimension_min: 2,
            significance_dimensions: [ImpactDimension::Individuals, ImpactDimension::Society].into(),
        }
    }
}

impl Catalog {
    pub fn domain(&self, id: &str) -> Option<&ImpactDomain> {
        self.domains.iter().find(|d| d.id == id)
    }

    pub fn criterion(&self, id: &str) -> Option<&GuidingCriterion> {
        self.criteria.iter().find(|c| c.id == id)
    }

    pub fn question(&self, id: &str) -> Option<&ChecklistQuestion> {
        self.questions.iter().find(|q| q.id == id)
    }

    pub fn template(&self, id: &str) -> Option<&ScenarioTemplate> {
        self.scenario_templates.iter().find(|t| t.id == id)
    }

    pub fn questions_for<'a>(&'a self, criterion_id: &'a str) -> impl Iterator<Item = &'a ChecklistQuestion> {
        self.questions.iter().filter(move |q| q.criterion_id == criterion_id)
    }

    pub fn templates_for<'a>(&'a self, criterion_id: &'a str) -> impl Iterator<Item = &'a ScenarioTemplate> {
        self.scenario_templates
            .iter()
            .filter(move |t| t.criterion_id == criterion_id)
    }

    /// Sorts every top-level array by id. Stable, so duplicates keep their
    /// relative order.
    pub fn normalize(&mut self) {
        self.domains.sort_by(|a, b| a.id.cmp(&b.id));
        self.criteria.sort_by(|a, b| a.id.cmp(&b.id));
        self.questions.sort_by(|a, b| a.id.cmp(&b.id));
        self.scenario_templates.sort_by(|a, b| a.id.cmp(&b.id));
    }
}

/// Parses a catalog document.
///
/// Rejects malformed JSON with [`CatalogError::Syntax`], unknown versions with
/// [`CatalogError::UnsupportedVersion`], and missing, mistyped or unknown
/// fields as well as dangling cross-references with [`CatalogError::Schema`].
/// Other invariant violations (duplicates, empty lists) are left for
/// [`validate_catalog`].
pub fn parse_catalog(document: &[u8]) -> Result<Catalog, CatalogError> {
    let text = std::str::from_utf8(document).map_err(|e| CatalogError::Syntax {
        offset: e.valid_up_to(),
        message: "document is not valid UTF-8".into(),
    })?;
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CatalogError::Syntax {
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    })?;

    let Some(object) = value.as_object() else {
        return Err(CatalogError::Schema {
            path: ".".into(),
            message: "catalog must be a JSON object".into(),
        });
    };
    match object.get("schema_version") {
        None => {
            return Err(CatalogError::Schema {
                path: "schema_version".into(),
                message: "missing field".into(),
            })
        }
        Some(serde_json::Value::String(v)) if v == SCHEMA_VERSION => {}
        Some(serde_json::Value::String(v)) => return Err(CatalogError::UnsupportedVersion(v.clone())),
        Some(_) => {
            return Err(CatalogError::Schema {
                path: "schema_version".into(),
                message: "expected a string".into(),
            })
        }
    }

    let mut catalog: Catalog = serde_path_to_error::deserialize(value).map_err(|e| CatalogError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    check_references(&catalog)?;
    catalog.normalize();
    Ok(catalog)
}

/// Canonical bytes: sorted keys, arrays in id order, 2-space indent, LF.
pub fn canonical_serialize(catalog: &Catalog) -> Vec<u8> {
    let mut sorted = catalog.clone();
    sorted.normalize();
    crate::canonical::to_bytes(&sorted)
}

fn check_references(c: &Catalog) -> Result<(), CatalogError> {
    let domains: BTreeSet<&str> = c.domains.iter().map(|d| d.id.as_str()).collect();
    let criteria: BTreeSet<&str> = c.criteria.iter().map(|x| x.id.as_str()).collect();
    let dangling = |path: String, target: &str| CatalogError::Schema {
        path,
        message: format!("unknown reference {target:?}"),
    };
    for (i, criterion) in c.criteria.iter().enumerate() {
        if !domains.contains(criterion.domain_id.as_str()) {
            return Err(dangling(format!("criteria[{i}].domain_id"), &criterion.domain_id));
        }
    }
    for (i, question) in c.questions.iter().enumerate() {
        if !criteria.contains(question.criterion_id.as_str()) {
            return Err(dangling(format!("questions[{i}].criterion_id"), &question.criterion_id));
        }
    }
    for (i, template) in c.scenario_templates.iter().enumerate() {
        if !criteria.contains(template.criterion_id.as_str()) {
            return Err(dangling(
                format!("scenario_templates[{i}].criterion_id"),
                &template.criterion_id,
            ));
        }
    }
    Ok(())
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}
