use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::AssessmentReport;
use crate::canonical;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExportFormat {
    /// Canonical JSON, `report.json`.
    Canonical,
    /// `phase1.csv`, `phase2.csv`, `remediation.csv`, `exclusions.csv`.
    CsvBundle,
    /// Fixed-width tables, `summary.txt`.
    TextSummary,
}

impl ExportFormat {
    pub const ALL: [ExportFormat; 3] = [
        ExportFormat::Canonical,
        ExportFormat::CsvBundle,
        ExportFormat::TextSummary,
    ];
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "canonical" | "json" => Ok(ExportFormat::Canonical),
            "csv" | "csv-bundle" => Ok(ExportFormat::CsvBundle),
            "text" | "text-summary" => Ok(ExportFormat::TextSummary),
            other => Err(format!(
                "unknown report format {other:?} (expected canonical, csv or text)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportFile {
    pub name: &'static str,
    pub bytes: Vec<u8>,
}

/// Deterministic rendering of `report` in `format`.
pub fn export(report: &AssessmentReport, format: ExportFormat) -> Vec<ExportFile> {
    match format {
        ExportFormat::Canonical => vec![ExportFile {
            name: "report.json",
            bytes: canonical::to_bytes(report),
        }],
        ExportFormat::CsvBundle => csv_bundle(report),
        ExportFormat::TextSummary => vec![ExportFile {
            name: "summary.txt",
            bytes: text_summary(report).into_bytes(),
        }],
    }
}

/// Reads a canonical report back.
pub fn parse_report(bytes: &[u8]) -> Result<AssessmentReport> {
    serde_json::from_slice(bytes).map_err(|source| Error::Corrupt {
        path: "report.json".into(),
        source,
    })
}

fn join(items: &[String]) -> String {
    items.join(";")
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn csv_file(name: &'static str, header: &[&str], rows: Vec<Vec<String>>) -> ExportFile {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    ExportFile {
        name,
        bytes: w.into_inner().expect("writing to memory"),
    }
}

fn csv_bundle(r: &AssessmentReport) -> Vec<ExportFile> {
    vec![
        csv_file(
            "phase1.csv",
            &[
                "criterion_id",
                "criterion",
                "domain",
                "score",
                "band",
                "advancing",
                "unassessed",
                "contributing_questions",
            ],
            r.phase1_table
                .iter()
                .map(|p| {
                    vec![
                        p.criterion_id.clone(),
                        p.criterion.clone(),
                        p.domain.clone(),
                        p.score.to_string(),
                        p.band.to_string(),
                        yes_no(p.advancing).into(),
                        yes_no(p.unassessed).into(),
                        join(&p.contributing_question_ids),
                    ]
                })
                .collect(),
        ),
        csv_file(
            "phase2.csv",
            &[
                "scenario_id",
                "criterion_id",
                "domain",
                "individuals",
                "society",
                "mitigation_effort",
                "duration",
                "control_effectiveness",
                "classification",
                "significant",
                "overridden",
                "evaluation_count",
            ],
            r.phase2_table
                .iter()
                .map(|p| {
                    vec![
                        p.scenario_id.clone(),
                        p.criterion_id.clone(),
                        p.domain.clone(),
                        p.individuals.to_string(),
                        p.society.to_string(),
                        p.mitigation_effort.to_string(),
                        p.duration.to_string(),
                        p.control_effectiveness.to_string(),
                        p.classification.to_string(),
                        yes_no(p.significant).into(),
                        yes_no(p.overridden).into(),
                        p.evaluation_count.to_string(),
                    ]
                })
                .collect(),
        ),
        csv_file(
            "remediation.csv",
            &[
                "action_id",
                "scenario_id",
                "criterion",
                "action_type",
                "description",
                "owner",
                "status",
                "due",
            ],
            r.remediation_section
                .actions
                .iter()
                .map(|a| {
                    vec![
                        a.action_id.clone(),
                        a.scenario_id.clone(),
                        a.criterion_id.clone(),
                        a.action_type.to_string(),
                        a.description.clone(),
                        owner_label(&a.owner, &a.owner_role),
                        a.status.to_string(),
                        a.due.map(|d| d.to_string()).unwrap_or_default(),
                    ]
                })
                .collect(),
        ),
        csv_file(
            "exclusions.csv",
            &["item", "kind", "stage", "reason"],
            r.exclusions
                .iter()
                .map(|e| {
                    vec![
                        e.item.clone(),
                        kind_label(e.kind).into(),
                        e.stage.to_string(),
                        e.reason.clone(),
                    ]
                })
                .collect(),
        ),
    ]
}

fn owner_label(name: &str, role: &str) -> String {
    if name.is_empty() || name == role {
        role.to_string()
    } else {
        format!("{name} ({role})")
    }
}

fn kind_label(kind: super::ExcludedKind) -> &'static str {
    use super::ExcludedKind::*;
    match kind {
        Question => "question",
        Criterion => "criterion",
        ScenarioTemplate => "scenario_template",
        Scenario => "scenario",
        Action => "action",
    }
}

/// Renders one fixed-width table. Columns are as wide as their widest cell.
fn table(out: &mut String, title: &str, header: &[&str], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = &str>| -> String {
        let padded: Vec<String> = cells.zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_string()
    };
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "{}", "=".repeat(title.chars().count()));
    let _ = writeln!(out, "{}", line(&mut header.iter().copied()));
    let _ = writeln!(
        out,
        "{}",
        line(
            &mut widths
                .iter()
                .map(|w| "-".repeat(*w))
                .collect::<Vec<_>>()
                .iter()
                .map(String::as_str)
        )
    );
    if rows.is_empty() {
        let _ = writeln!(out, "(none)");
    }
    for row in rows {
        let _ = writeln!(out, "{}", line(&mut row.iter().map(String::as_str)));
    }
    out.push('\n');
}

fn text_summary(r: &AssessmentReport) -> String {
    let m = &r.metadata;
    let mut out = String::new();
    let status = match r.status {
        super::ReportStatus::Draft => "Draft",
        super::ReportStatus::Final => "Final",
    };
    table(
        &mut out,
        "Assessment",
        &["field", "value"],
        &[
            vec!["system".into(), m.system_name.clone()],
            vec!["assessment".into(), m.assessment_id.clone()],
            vec!["revision".into(), m.revision.to_string()],
            vec!["issued_at".into(), m.issued_at.to_rfc3339()],
            vec!["status".into(), status.into()],
            vec!["schema_version".into(), m.schema_version.clone()],
            vec!["phase1_advance_min".into(), m.thresholds.phase1_advance_min.to_string()],
            vec![
                "significance".into(),
                format!(
                    "{} >= {}",
                    m.thresholds
                        .significance_dimensions
                        .iter()
                        .map(|d| serde_json::to_value(d)
                            .ok()
                            .and_then(|v| v.as_str().map(String::from))
                            .unwrap_or_default())
                        .collect::<Vec<_>>()
                        .join(" or "),
                    m.thresholds.significance_dimension_min
                ),
            ],
            vec![
                "overview_review_overdue".into(),
                yes_no(m.overview_review_overdue).into(),
            ],
        ],
    );
    table(
        &mut out,
        "Phase 1: criterion relevance",
        &["criterion", "domain", "score", "band", "advancing", "contributing"],
        &r.phase1_table
            .iter()
            .map(|p| {
                vec![
                    p.criterion_id.clone(),
                    p.domain.clone(),
                    p.score.to_string(),
                    p.band.to_string(),
                    yes_no(p.advancing).into(),
                    join(&p.contributing_question_ids),
                ]
            })
            .collect::<Vec<_>>(),
    );
    table(
        &mut out,
        "Phase 2: impact scenarios",
        &[
            "scenario",
            "criterion",
            "ind",
            "soc",
            "eff",
            "dur",
            "control",
            "classification",
            "significant",
            "override",
        ],
        &r.phase2_table
            .iter()
            .map(|p| {
                vec![
                    p.scenario_id.clone(),
                    p.criterion_id.clone(),
                    p.individuals.to_string(),
                    p.society.to_string(),
                    p.mitigation_effort.to_string(),
                    p.duration.to_string(),
                    p.control_effectiveness.to_string(),
                    p.classification.to_string(),
                    yes_no(p.significant).into(),
                    yes_no(p.overridden).into(),
                ]
            })
            .collect::<Vec<_>>(),
    );
    table(
        &mut out,
        "Criterion classifications",
        &["criterion", "classification", "scenarios"],
        &r.criterion_classifications
            .iter()
            .map(|c| {
                vec![
                    c.criterion_id.clone(),
                    c.classification.to_string(),
                    join(&c.scenario_ids),
                ]
            })
            .collect::<Vec<_>>(),
    );
    table(
        &mut out,
        "Chart: scenarios by domain",
        &["domain", "Relevant", "PartiallyRelevant", "Irrelevant"],
        &r.chart_data
            .scenarios_by_domain
            .iter()
            .map(|d| {
                let n = |c| d.counts.get(&c).copied().unwrap_or(0).to_string();
                vec![
                    d.domain.clone(),
                    n(crate::scenarios::Classification::Relevant),
                    n(crate::scenarios::Classification::PartiallyRelevant),
                    n(crate::scenarios::Classification::Irrelevant),
                ]
            })
            .collect::<Vec<_>>(),
    );
    table(
        &mut out,
        "Chart: criteria by band",
        &["band", "criteria"],
        &r.chart_data
            .criteria_by_band
            .iter()
            .map(|(b, n)| vec![b.to_string(), n.to_string()])
            .collect::<Vec<_>>(),
    );
    let rem = &r.remediation_section;
    table(
        &mut out,
        "Remediation actions",
        &["action", "scenario", "type", "owner", "status", "due", "description"],
        &rem.actions
            .iter()
            .map(|a| {
                vec![
                    a.action_id.clone(),
                    a.scenario_id.clone(),
                    a.action_type.to_string(),
                    owner_label(&a.owner, &a.owner_role),
                    a.status.to_string(),
                    a.due.map(|d| d.to_string()).unwrap_or_else(|| "-".into()),
                    a.description.clone(),
                ]
            })
            .collect::<Vec<_>>(),
    );
    table(
        &mut out,
        "Remediation coverage",
        &["list", "scenarios"],
        &[
            vec!["required".into(), join(&rem.required)],
            vec!["recommended".into(), join(&rem.recommended)],
            vec!["uncovered_required".into(), join(&rem.uncovered_required)],
            vec!["reevaluation_suggested".into(), join(&rem.reevaluation_suggested)],
        ],
    );
    table(
        &mut out,
        "Exclusions",
        &["item", "kind", "stage", "reason"],
        &r.exclusions
            .iter()
            .map(|e| {
                vec![
                    e.item.clone(),
                    kind_label(e.kind).into(),
                    e.stage.to_string(),
                    e.reason.clone(),
                ]
            })
            .collect::<Vec<_>>(),
    );
    // One trailing newline, not two.
    out.pop();
    out
}
