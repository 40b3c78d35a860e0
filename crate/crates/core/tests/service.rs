//! HTTP API status codes and bodies.

mod common;

use axum::http::{header, Method, StatusCode};
use chrono::{TimeZone, Utc};
use serde_json::json;

use common::{triage_catalog, Api};
use fria::fixture;
use fria::session::{parse_script, run_script};

fn actor() -> serde_json::Value {
    serde_json::to_value(fixture::coordinator()).unwrap()
}

fn at() -> String {
    Utc.with_ymd_and_hms(2025, 3, 3, 9, 0, 0).unwrap().to_rfc3339()
}

/// A created assessment with a complete profile, at revision 1.
fn created(api: &Api, id: &str) {
    let body = json!({"actor": actor(), "at": at(), "id": id, "profile": fixture::triage_profile_delta()});
    let reply = api.write(Method::POST, "/assessments", None, &body);
    assert_eq!(
        reply.status,
        StatusCode::CREATED,
        "{}",
        String::from_utf8_lossy(&reply.body)
    );
    assert_eq!(reply.headers[header::ETAG], "\"1\"");
}

fn empty_write() -> serde_json::Value {
    json!({"actor": actor(), "at": at()})
}

fn fixture_run(api: &mut Api) {
    run_script(api, &parse_script(fixture::TRIAGE_SCRIPT).unwrap()).unwrap();
}

#[test]
fn stale_revision_is_a_conflict() {
    let api = Api::new(triage_catalog());
    created(&api, "a1");
    let change = json!({"actor": actor(), "at": at(), "change": {"purpose": "Updated purpose."}});
    let ok = api.write(Method::PATCH, "/assessments/a1/profile", Some(1), &change);
    assert_eq!(ok.status, StatusCode::OK);
    assert_eq!(ok.json()["revision"], 2);

    let stale = api.write(Method::PATCH, "/assessments/a1/profile", Some(1), &change);
    assert_eq!(stale.status, StatusCode::CONFLICT);
    let body = stale.json();
    assert_eq!(body["error"], "revision-conflict");
    assert_eq!(body["expected_revision"], 1);
    assert_eq!(body["actual_revision"], 2);
    assert_eq!(
        api.get("/assessments/a1/profile").json()["profile"]["purpose"],
        "Updated purpose."
    );
}

#[test]
fn if_match_is_required_and_must_be_numeric() {
    let api = Api::new(triage_catalog());
    created(&api, "a1");
    let reply = api.write(Method::POST, "/assessments/a1/phase0/complete", None, &empty_write());
    assert_eq!(reply.status, StatusCode::PRECONDITION_REQUIRED);
    assert_eq!(reply.json()["error"], "revision-required");
}

#[test]
fn questions_exclude_driver_filtered_items() {
    let api = Api::new(triage_catalog());
    created(&api, "a1");
    let reply = api.write(Method::POST, "/assessments/a1/phase0/complete", Some(1), &empty_write());
    assert_eq!(reply.status, StatusCode::OK);
    let ids: Vec<String> = api
        .get("/assessments/a1/questions")
        .json()
        .as_array()
        .unwrap()
        .iter()
        .map(|q| q["id"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(ids.len(), 7);
    for filtered in [
        fixture::GENERATIVE_AI_QUESTION,
        fixture::COPYRIGHT_QUESTION,
        fixture::USE_PHASE_MONITORING_QUESTION,
    ] {
        assert!(!ids.iter().any(|id| id == filtered), "{filtered} listed");
    }

    let answer = json!({"actor": actor(), "at": at(), "value": "Adequate"});
    let uri = format!("/assessments/a1/answers/{}", fixture::GENERATIVE_AI_QUESTION);
    let reply = api.write(Method::PUT, &uri, Some(2), &answer);
    assert_eq!(reply.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(reply.json()["error"], "question-not-applicable");
}

#[test]
fn validation_failures_are_unprocessable_with_rule_ids() {
    let api = Api::new(triage_catalog());
    created(&api, "a1");
    api.write(Method::POST, "/assessments/a1/phase0/complete", Some(1), &empty_write());

    let na = json!({"actor": actor(), "at": at(), "value": "NotApplicable", "note": " "});
    let reply = api.write(Method::PUT, "/assessments/a1/answers/dg.q1", Some(2), &na);
    assert_eq!(reply.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(reply.json()["error"], "missing-justification");

    let unknown = json!({"actor": actor(), "at": at(), "value": "Adequate", "colour": "red"});
    let reply = api.write(Method::PUT, "/assessments/a1/answers/dg.q1", Some(2), &unknown);
    assert_eq!(reply.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(reply.json()["error"], "invalid-body");

    let reply = api.write(
        Method::POST,
        "/assessments",
        None,
        &json!({"actor": actor(), "id": "Bad Id!"}),
    );
    assert_eq!(reply.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(reply.json()["error"], "invalid-id");
}

#[test]
fn gates_report_missing_items() {
    let api = Api::new(triage_catalog());
    let body = json!({"actor": actor(), "at": at(), "id": "partial", "profile": {"system_name": "X"}});
    assert_eq!(
        api.write(Method::POST, "/assessments", None, &body).status,
        StatusCode::CREATED
    );
    let reply = api.write(
        Method::POST,
        "/assessments/partial/phase0/complete",
        Some(1),
        &empty_write(),
    );
    assert_eq!(reply.status, StatusCode::CONFLICT);
    let body = reply.json();
    assert_eq!(body["error"], "incomplete-profile");
    assert_eq!(body["missing"], json!(["purpose", "lifecycle_stage", "stewardship"]));

    created(&api, "a1");
    api.write(Method::POST, "/assessments/a1/phase0/complete", Some(1), &empty_write());
    let reply = api.write(Method::POST, "/assessments/a1/phase1/complete", Some(2), &empty_write());
    assert_eq!(reply.status, StatusCode::CONFLICT);
    assert_eq!(reply.json()["missing"].as_array().unwrap().len(), 7);

    let reply = api.get("/assessments/a1/report");
    assert_eq!(reply.status, StatusCode::CONFLICT);
    assert_eq!(reply.json()["error"], "phase-incomplete");
}

#[test]
fn unknown_things_are_not_found() {
    let api = Api::new(triage_catalog());
    assert_eq!(api.get("/assessments/nope/profile").status, StatusCode::NOT_FOUND);
    let reply = api.get("/no/such/route");
    assert_eq!(reply.status, StatusCode::NOT_FOUND);
    assert_eq!(reply.json()["error"], "not-found");
    let reply = api.write(
        Method::POST,
        "/assessments/nope/phase0/complete",
        Some(1),
        &empty_write(),
    );
    assert_eq!(reply.status, StatusCode::NOT_FOUND);
}

#[test]
fn fixture_over_http_exposes_every_view() {
    let mut api = Api::new(triage_catalog());
    fixture_run(&mut api);
    let id = fixture::TRIAGE_ASSESSMENT_ID;

    let audit = api.get(&format!("/assessments/{id}/audit")).json();
    assert_eq!(audit.as_array().unwrap().len(), 16);

    let scenarios = api.get(&format!("/assessments/{id}/scenarios")).json();
    let oversight = scenarios
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["id"] == fixture::OVERSIGHT_SCENARIO)
        .unwrap();
    assert_eq!(oversight["history_len"], 2);
    assert_eq!(oversight["evaluation"]["classification"], "PartiallyRelevant");

    let csv = api.get(&format!("/assessments/{id}/report?format=csv")).json();
    assert_eq!(csv.as_object().unwrap().len(), 4);
    assert!(csv["remediation.csv"].as_str().unwrap().contains("human-in-the-loop"));

    let text = api.get(&format!("/assessments/{id}/report?format=text"));
    assert!(text.headers[header::CONTENT_TYPE]
        .to_str()
        .unwrap()
        .starts_with("text/plain"));
    assert_eq!(
        text.body,
        std::fs::read(common::golden_dir().join("summary.txt")).unwrap()
    );

    let bad = api.get(&format!("/assessments/{id}/report?format=pdf"));
    assert_eq!(bad.status, StatusCode::UNPROCESSABLE_ENTITY);

    let list = api.get("/assessments").json();
    assert_eq!(list[0]["id"], id);
    assert_eq!(list[0]["revision"], 16);
}

#[test]
fn late_evaluation_reopens_phase2() {
    let mut api = Api::new(triage_catalog());
    fixture_run(&mut api);
    let id = fixture::TRIAGE_ASSESSMENT_ID;
    let eval = json!({
        "actor": actor(),
        "at": at(),
        "dimensions": {"individuals": 1, "society": 1, "mitigation_effort": 1, "duration": 1},
        "control": {"effectiveness": "Absent", "control_owner": actor()},
        "rationale": "Reassessed after the bias audit.",
    });
    let uri = format!("/assessments/{id}/evaluations/{}", fixture::FAIRNESS_SCENARIO);
    let reply = api.write(Method::PUT, &uri, Some(16), &eval);
    assert_eq!(reply.status, StatusCode::OK, "{}", String::from_utf8_lossy(&reply.body));
    assert_eq!(reply.json()["phase"], "Phase2");
    assert_eq!(
        api.get(&format!("/assessments/{id}/report")).status,
        StatusCode::CONFLICT
    );
}
