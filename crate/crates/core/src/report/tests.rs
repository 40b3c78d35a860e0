use proptest::prelude::*;

use super::*;
use crate::catalog::parse_catalog;
use crate::fixture;
use crate::session::run_session;

fn catalog() -> Catalog {
    parse_catalog(fixture::TRIAGE_CATALOG.as_bytes()).unwrap()
}

fn fixture_report() -> AssessmentReport {
    run_session(&catalog(), fixture::TRIAGE_SCRIPT).unwrap().report
}

fn script_without(prefixes: &[&str]) -> String {
    fixture::TRIAGE_SCRIPT
        .lines()
        .filter(|l| !prefixes.iter().any(|p| l.starts_with(p)))
        .map(|l| format!("{l}\n"))
        .collect()
}

fn has_exclusion(r: &AssessmentReport, item: &str, stage: Phase, reason: &str) -> bool {
    r.exclusions
        .iter()
        .any(|e| e.item == item && e.stage == stage && e.reason.starts_with(reason))
}

#[test]
fn fixture_report_shape() {
    let r = fixture_report();
    assert_eq!(r.status, ReportStatus::Final);
    assert_eq!(r.phase1_table.len(), 3);
    assert_eq!(r.phase2_table.len(), 2);
    assert_eq!(r.remediation_section.actions.len(), 2);
    assert_eq!(r.remediation_section.required, [fixture::FAIRNESS_SCENARIO]);
    assert_eq!(r.remediation_section.recommended, [fixture::OVERSIGHT_SCENARIO]);
    assert!(r.remediation_section.uncovered_required.is_empty());
    assert_eq!(r.metadata.revision, 16);
    assert!(!r.metadata.overview_review_overdue);
}

#[test]
fn exclusions_record_each_gate() {
    let r = fixture_report();
    assert!(has_exclusion(
        &r,
        "data_governance",
        Phase::Phase1,
        "score below threshold"
    ));
    assert!(has_exclusion(
        &r,
        fixture::GENERATIVE_AI_QUESTION,
        Phase::Phase0,
        REASON_DRIVER_FILTER
    ));
    assert!(has_exclusion(
        &r,
        fixture::COPYRIGHT_QUESTION,
        Phase::Phase0,
        REASON_DRIVER_FILTER
    ));
    assert!(has_exclusion(&r, "ho.s2", Phase::Phase1, REASON_DRIVER_FILTER));
    // Excluded criteria still appear in the Phase 1 table, not advancing.
    let dg = r
        .phase1_table
        .iter()
        .find(|p| p.criterion_id == "data_governance")
        .unwrap();
    assert!(!dg.advancing);
    assert_eq!(dg.band, RelevanceBand::None);
}

#[test]
fn missing_required_action_gives_draft() {
    let r = run_session(&catalog(), &script_without(&["action|act-2|"]))
        .unwrap()
        .report;
    assert_eq!(r.status, ReportStatus::Draft);
    assert_eq!(r.remediation_section.uncovered_required, [fixture::FAIRNESS_SCENARIO]);
}

#[test]
fn nothing_advancing_gives_final_with_empty_tables() {
    let script = script_without(&["evaluate|", "action|"])
        .replace("|Inadequate|", "|Adequate|")
        .replace("|Partial|", "|Adequate|");
    let r = run_session(&catalog(), &script).unwrap().report;
    assert_eq!(r.status, ReportStatus::Final);
    assert!(r.phase2_table.is_empty());
    assert!(r.remediation_section.actions.is_empty());
    assert!(r.phase1_table.iter().all(|p| !p.advancing));
    assert_eq!(r.criterion_classifications, []);
}

#[test]
fn action_on_scenario_turned_irrelevant_moves_to_exclusions() {
    let script = format!(
        "{}at|2025-04-07T09:00:00Z\nevaluate|fa.s1|1|1|1|1|Effective|bias-audit-2025|fairness_officer|Bias audit closed the gap.\n",
        fixture::TRIAGE_SCRIPT
    );
    let r = run_session(&catalog(), &script).unwrap().report;
    assert!(has_exclusion(
        &r,
        fixture::FAIRNESS_SCENARIO,
        Phase::Phase2,
        REASON_CLASSIFIED_IRRELEVANT
    ));
    assert!(has_exclusion(&r, "act-2", Phase::Output, REASON_ACTION_ON_IRRELEVANT));
    assert!(r.remediation_section.actions.iter().all(|a| a.action_id != "act-2"));
    assert!(r.remediation_section.required.is_empty());
    assert_eq!(r.status, ReportStatus::Final);
}

#[test]
fn report_before_output_is_rejected() {
    use chrono::{TimeZone, Utc};
    let wf = crate::workflow::Workflow::new(catalog(), crate::store::MemoryStore::new());
    let at = Utc.with_ymd_and_hms(2025, 3, 3, 9, 0, 0).unwrap();
    wf.create("early", fixture::triage_profile_delta(), &fixture::coordinator(), at)
        .unwrap();
    let err = wf.report("early").unwrap_err();
    assert!(matches!(err, Error::PhaseIncomplete(Phase::Phase0)), "{err}");
}

#[test]
fn exports_are_deterministic_and_parse_back() {
    let r = fixture_report();
    for format in ExportFormat::ALL {
        assert_eq!(export(&r, format), export(&fixture_report(), format));
    }
    let json = &export(&r, ExportFormat::Canonical)[0];
    assert_eq!(json.name, "report.json");
    assert_eq!(parse_report(&json.bytes).unwrap(), r);
    let csv = export(&r, ExportFormat::CsvBundle);
    let phase2 = csv.iter().find(|f| f.name == "phase2.csv").unwrap();
    assert_eq!(phase2.bytes.iter().filter(|b| **b == b'\n').count(), 3);
}

#[test]
fn parse_report_rejects_unknown_fields() {
    let mut v = serde_json::to_value(fixture_report()).unwrap();
    v["extra"] = serde_json::json!(1);
    assert!(parse_report(&serde_json::to_vec(&v).unwrap()).is_err());
}

fn domain_names() -> Vec<String> {
    fixture_report().phase1_table.iter().map(|p| p.domain.clone()).collect()
}

proptest! {
    #[test]
    fn chart_counts_tally_the_tables(
        rows in prop::collection::vec((0usize..3, 0usize..3), 0..20),
        bands in prop::collection::vec(0u8..3, 3),
    ) {
        let names = domain_names();
        let mut r = fixture_report();
        for (p, b) in r.phase1_table.iter_mut().zip(&bands) {
            p.band = RelevanceBand::from_score(*b);
        }
        let template = r.phase2_table[0].clone();
        r.phase2_table = rows
            .iter()
            .map(|(d, c)| Phase2Row {
                domain: names[*d].clone(),
                classification: Classification::ALL[*c],
                ..template.clone()
            })
            .collect();
        let chart = chart_counts(&r);

        let total: usize = chart.scenarios_by_domain.iter().flat_map(|d| d.counts.values()).sum();
        prop_assert_eq!(total, rows.len());
        for (i, name) in names.iter().enumerate() {
            let entry = chart.scenarios_by_domain.iter().find(|d| &d.domain == name).unwrap();
            for (ci, class) in Classification::ALL.iter().enumerate() {
                let expected = rows.iter().filter(|(d, c)| *d == i && *c == ci).count();
                prop_assert_eq!(entry.counts[class], expected);
            }
        }
        prop_assert_eq!(chart.criteria_by_band.values().sum::<usize>(), 3);
        for b in 0..3u8 {
            let expected = bands.iter().filter(|x| **x == b).count();
            prop_assert_eq!(chart.criteria_by_band[&RelevanceBand::from_score(b)], expected);
        }
    }
}
