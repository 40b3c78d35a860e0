use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{ApplicabilityPredicate, Catalog};
use crate::checklist::AnswerValue;

/// One broken catalog invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub path: String,
    pub rule: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn count(&self, rule: &str) -> usize {
        self.findings.iter().filter(|f| f.rule == rule).count()
    }

    fn push(&mut self, path: String, rule: &str, message: String) {
        self.findings.push(Finding {
            path,
            rule: rule.to_string(),
            message,
        });
    }
}

/// Checks every catalog invariant. Findings are data: an invalid catalog is
/// reported, never rejected.
pub fn validate_catalog(c: &Catalog) -> ValidationReport {
    let mut report = ValidationReport::default();

    if c.schema_version != super::SCHEMA_VERSION {
        report.push(
            "schema_version".into(),
            "schema-version",
            format!("unsupported schema_version {:?}", c.schema_version),
        );
    }

    duplicates(&mut report, "domains", c.domains.iter().map(|d| d.id.as_str()));
    duplicates(&mut report, "criteria", c.criteria.iter().map(|x| x.id.as_str()));
    duplicates(&mut report, "questions", c.questions.iter().map(|q| q.id.as_str()));
    duplicates(
        &mut report,
        "scenario_templates",
        c.scenario_templates.iter().map(|t| t.id.as_str()),
    );

    let domain_ids: BTreeSet<&str> = c.domains.iter().map(|d| d.id.as_str()).collect();
    let criterion_ids: BTreeSet<&str> = c.criteria.iter().map(|x| x.id.as_str()).collect();

    for (i, d) in c.domains.iter().enumerate() {
        nonempty(&mut report, &d.id, format!("domains[{i}].id"), "id-nonempty");
        nonempty(&mut report, &d.name, format!("domains[{i}].name"), "name-nonempty");
    }

    let mut question_count: BTreeMap<&str, usize> = BTreeMap::new();
    let mut template_count: BTreeMap<&str, usize> = BTreeMap::new();
    for q in &c.questions {
        *question_count.entry(q.criterion_id.as_str()).or_default() += 1;
    }
    for t in &c.scenario_templates {
        *template_count.entry(t.criterion_id.as_str()).or_default() += 1;
    }

    for (i, x) in c.criteria.iter().enumerate() {
        let path = format!("criteria[{i}]");
        nonempty(&mut report, &x.id, format!("{path}.id"), "id-nonempty");
        nonempty(&mut report, &x.name, format!("{path}.name"), "name-nonempty");
        nonempty(
            &mut report,
            &x.stakeholder_role,
            format!("{path}.stakeholder_role"),
            "role-nonempty",
        );
        if !domain_ids.contains(x.domain_id.as_str()) {
            report.push(
                format!("{path}.domain_id"),
                "dangling-reference",
                format!("unknown domain {:?}", x.domain_id),
            );
        }
        if x.rights_refs.iter().all(|r| r.trim().is_empty()) {
            report.push(
                format!("{path}.rights_refs"),
                "criterion-needs-rights",
                format!("criterion {:?} is not mapped to any fundamental right", x.id),
            );
        }
        if !question_count.contains_key(x.id.as_str()) {
            report.push(
                path.clone(),
                "criterion-needs-question",
                format!("criterion {:?} has no checklist question", x.id),
            );
        }
        if !template_count.contains_key(x.id.as_str()) {
            report.push(
                path,
                "criterion-needs-scenario",
                format!("criterion {:?} has no scenario template", x.id),
            );
        }
    }

    for (i, q) in c.questions.iter().enumerate() {
        let path = format!("questions[{i}]");
        nonempty(&mut report, &q.id, format!("{path}.id"), "id-nonempty");
        nonempty(&mut report, &q.text, format!("{path}.text"), "text-nonempty");
        nonempty(
            &mut report,
            &q.stakeholder_role,
            format!("{path}.stakeholder_role"),
            "role-nonempty",
        );
        if !criterion_ids.contains(q.criterion_id.as_str()) {
            report.push(
                format!("{path}.criterion_id"),
                "dangling-reference",
                format!("unknown criterion {:?}", q.criterion_id),
            );
        }
        for value in AnswerValue::SCORED {
            match q.weights.get(&value) {
                None => report.push(
                    format!("{path}.weights"),
                    "weights-complete",
                    format!("no weight for {value}"),
                ),
                Some(&w) if w > 2 => report.push(
                    format!("{path}.weights.{value}"),
                    "weight-range",
                    format!("weight {w} outside 0..=2"),
                ),
                Some(_) => {}
            }
        }
        if q.weights.contains_key(&AnswerValue::NotApplicable) {
            report.push(
                format!("{path}.weights.NotApplicable"),
                "not-applicable-weight",
                "NotApplicable answers never score and take no weight".into(),
            );
        }
        predicate(&mut report, &q.applicability, format!("{path}.applicability"));
    }

    for (i, t) in c.scenario_templates.iter().enumerate() {
        let path = format!("scenario_templates[{i}]");
        nonempty(&mut report, &t.id, format!("{path}.id"), "id-nonempty");
        nonempty(
            &mut report,
            &t.narrative,
            format!("{path}.narrative"),
            "narrative-nonempty",
        );
        if !criterion_ids.contains(t.criterion_id.as_str()) {
            report.push(
                format!("{path}.criterion_id"),
                "dangling-reference",
                format!("unknown criterion {:?}", t.criterion_id),
            );
        }
        predicate(&mut report, &t.applicability, format!("{path}.applicability"));
    }

    let t = &c.thresholds;
    if t.phase1_advance_min > 2 {
        report.push(
            "thresholds.phase1_advance_min".into(),
            "threshold-range",
            format!("{} outside 0..=2", t.phase1_advance_min),
        );
    }
    if !(1..=3).contains(&t.significance_dimension_min) {
        report.push(
            "thresholds.significance_dimension_min".into(),
            "threshold-range",
            format!("{} outside 1..=3", t.significance_dimension_min),
        );
    }

    report
}

// One finding per item whose id repeats an earlier one.
fn duplicates<'a>(report: &mut ValidationReport, kind: &str, ids: impl Iterator<Item = &'a str>) {
    let mut seen = BTreeSet::new();
    for (i, id) in ids.enumerate() {
        if !seen.insert(id) {
            report.push(
                format!("{kind}[{i}].id"),
                "duplicate-id",
                format!("duplicate id {id:?}"),
            );
        }
    }
}

fn nonempty(report: &mut ValidationReport, value: &str, path: String, rule: &str) {
    if value.trim().is_empty() {
        report.push(path, rule, "must not be empty".into());
    }
}

fn predicate(report: &mut ValidationReport, p: &ApplicabilityPredicate, path: String) {
    for flag in p.domain_flags_any_of.intersection(&p.domain_flags_forbidden) {
        report.push(
            path.clone(),
            "predicate-disjoint",
            format!("flag {flag:?} is both required and forbidden"),
        );
    }
}
