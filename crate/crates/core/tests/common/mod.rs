//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use chrono::{DateTime, Utc};
use http_body_util::BodyExt;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use tower::ServiceExt;

use fria::catalog::{
    ApplicabilityPredicate, ChecklistQuestion, GuidingCriterion, ImpactDomain, ScenarioTemplate, Thresholds,
};
use fria::checklist::AnswerValue;
use fria::fixture;
use fria::profile::{DriverSet, LifecycleStage, ProfileDelta, StakeholderRef};
use fria::service::{
    self, ActionBody, ActionStatusBody, AnswerBody, CreateBody, Empty, Envelope, EvaluationBody, ProfileChangeBody,
};
use fria::session::Executor;
use fria::store::{AssessmentStore, Committed, MemoryStore};
use fria::{parse_catalog, Catalog, Command, Error};

pub fn triage_catalog() -> Catalog {
    parse_catalog(fixture::TRIAGE_CATALOG.as_bytes()).unwrap()
}

pub fn golden_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/triage/golden")
}

/// Raw HTTP response.
pub struct Reply {
    pub status: StatusCode,
    pub headers: axum::http::HeaderMap,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.body).unwrap_or(serde_json::Value::Null)
    }
}

/// Drives the API router in-process, one request at a time.
pub struct Api {
    pub runtime: tokio::runtime::Runtime,
    pub router: Router,
}

impl Api {
    pub fn new(catalog: Catalog) -> Self {
        let store: Arc<dyn AssessmentStore> = Arc::new(MemoryStore::new());
        Self::with_store(catalog, store)
    }

    pub fn with_store(catalog: Catalog, store: Arc<dyn AssessmentStore>) -> Self {
        Self {
            runtime: tokio::runtime::Builder::new_current_thread()
                .enable_all()
                .build()
                .unwrap(),
            router: service::router(catalog, store),
        }
    }

    pub fn send(&self, method: Method, uri: &str, if_match: Option<u64>, body: Option<Vec<u8>>) -> Reply {
        let mut req = Request::builder().method(method).uri(uri);
        if let Some(rev) = if_match {
            req = req.header(header::IF_MATCH, format!("\"{rev}\""));
        }
        if body.is_some() {
            req = req.header(header::CONTENT_TYPE, "application/json");
        }
        let req = req.body(body.map(Body::from).unwrap_or_else(Body::empty)).unwrap();
        self.runtime.block_on(async {
            let res = self.router.clone().oneshot(req).await.unwrap();
            let status = res.status();
            let headers = res.headers().clone();
            let body = res.into_body().collect().await.unwrap().to_bytes().to_vec();
            Reply { status, headers, body }
        })
    }

    pub fn get(&self, uri: &str) -> Reply {
        self.send(Method::GET, uri, None, None)
    }

    pub fn write<T: Serialize>(&self, method: Method, uri: &str, if_match: Option<u64>, body: &T) -> Reply {
        self.send(method, uri, if_match, Some(serde_json::to_vec(body).unwrap()))
    }
}

fn envelope<T>(actor: &StakeholderRef, at: DateTime<Utc>, body: T) -> Envelope<T> {
    Envelope {
        actor: actor.clone(),
        at: Some(at),
        body,
    }
}

fn committed(reply: Reply) -> fria::Result<Committed> {
    if reply.status.is_success() {
        return Ok(serde_json::from_slice(&reply.body).expect("committed body"));
    }
    Err(Error::Io(std::io::Error::other(format!(
        "HTTP {}: {}",
        reply.status,
        String::from_utf8_lossy(&reply.body)
    ))))
}

/// Session executor that goes through the HTTP endpoints.
impl Executor for Api {
    fn create(
        &mut self,
        id: &str,
        initial: ProfileDelta,
        actor: &StakeholderRef,
        at: DateTime<Utc>,
    ) -> fria::Result<Committed> {
        let body = envelope(
            actor,
            at,
            CreateBody {
                id: id.into(),
                profile: initial,
            },
        );
        committed(self.write(Method::POST, "/assessments", None, &body))
    }

    fn execute(
        &mut self,
        id: &str,
        expected_revision: u64,
        cmd: Command,
        actor: &StakeholderRef,
        at: DateTime<Utc>,
    ) -> fria::Result<Committed> {
        let rev = Some(expected_revision);
        let base = format!("/assessments/{id}");
        let reply = match cmd {
            Command::UpdateProfile(change) => self.write(
                Method::PATCH,
                &format!("{base}/profile"),
                rev,
                &envelope(actor, at, ProfileChangeBody { change }),
            ),
            Command::CompletePhase0 => self.write(
                Method::POST,
                &format!("{base}/phase0/complete"),
                rev,
                &envelope(actor, at, Empty {}),
            ),
            Command::RecordAnswer(a) => self.write(
                Method::PUT,
                &format!("{base}/answers/{}", a.question_id),
                rev,
                &envelope(
                    actor,
                    at,
                    AnswerBody {
                        value: a.value,
                        note: a.note,
                        evidence_refs: a.evidence_refs,
                    },
                ),
            ),
            Command::CompletePhase1 => self.write(
                Method::POST,
                &format!("{base}/phase1/complete"),
                rev,
                &envelope(actor, at, Empty {}),
            ),
            Command::EvaluateScenario(e) => self.write(
                Method::PUT,
                &format!("{base}/evaluations/{}", e.scenario_id),
                rev,
                &envelope(
                    actor,
                    at,
                    EvaluationBody {
                        dimensions: e.dimensions,
                        control: e.control,
                        rationale: e.rationale,
                        override_: e.override_,
                    },
                ),
            ),
            Command::AddAction(action) => self.write(
                Method::POST,
                &format!("{base}/actions"),
                rev,
                &envelope(actor, at, ActionBody { action }),
            ),
            Command::SetActionStatus { action_id, status } => self.write(
                Method::PATCH,
                &format!("{base}/actions/{action_id}"),
                rev,
                &envelope(actor, at, ActionStatusBody { status }),
            ),
            Command::CompletePhase2 => self.write(
                Method::POST,
                &format!("{base}/phase2/complete"),
                rev,
                &envelope(actor, at, Empty {}),
            ),
        };
        committed(reply)
    }
}

/// Driver universe for randomized catalogs.
pub const FLAGS: [&str; 4] = ["biometric", "critical_decision", "health", "minors"];
pub const STAGES: [LifecycleStage; 3] = [
    LifecycleStage::Design,
    LifecycleStage::Implementation,
    LifecycleStage::Deployment,
];
pub const TYPES: [&str; 2] = ["chatbot", "decision_support"];

pub struct CatalogShape {
    pub criteria: usize,
    pub questions: usize,
    pub forbidden: bool,
}

fn subset<T: Clone + Ord>(rng: &mut StdRng, items: &[T], p: f64) -> BTreeSet<T> {
    items.iter().filter(|_| rng.gen_bool(p)).cloned().collect()
}

pub fn random_predicate(rng: &mut StdRng, forbidden: bool) -> ApplicabilityPredicate {
    let flags: Vec<String> = FLAGS.iter().map(|s| s.to_string()).collect();
    let types: Vec<String> = TYPES.iter().map(|s| s.to_string()).collect();
    let mut p = ApplicabilityPredicate::default();
    if rng.gen_bool(0.4) {
        p.lifecycle_any_of = subset(rng, &STAGES, 0.5);
    }
    if rng.gen_bool(0.5) {
        p.domain_flags_any_of = subset(rng, &flags, 0.4);
    }
    if forbidden && rng.gen_bool(0.3) {
        p.domain_flags_forbidden = subset(rng, &flags, 0.3)
            .difference(&p.domain_flags_any_of)
            .cloned()
            .collect();
    }
    if rng.gen_bool(0.4) {
        p.system_types_any_of = subset(rng, &types, 0.5);
    }
    p
}

/// A valid catalog over [`FLAGS`], [`STAGES`] and [`TYPES`]. Every criterion
/// has at least one question and a scenario template with no conditions.
pub fn random_catalog(rng: &mut StdRng, shape: &CatalogShape) -> Catalog {
    let domains: Vec<ImpactDomain> = (0..rng.gen_range(1..=3))
        .map(|i| ImpactDomain {
            id: format!("d{i}"),
            name: format!("Domain {i}"),
            description: if rng.gen_bool(0.5) {
                format!("About domain {i}.")
            } else {
                String::new()
            },
        })
        .collect();
    let criteria: Vec<GuidingCriterion> = (0..shape.criteria)
        .map(|i| GuidingCriterion {
            id: format!("c{i:02}"),
            domain_id: domains.choose(rng).unwrap().id.clone(),
            name: format!("Criterion {i}"),
            rights_refs: vec![format!("Art. {}", rng.gen_range(1..=54))],
            stakeholder_role: ["owner", "dpo", "lead"].choose(rng).unwrap().to_string(),
        })
        .collect();
    let questions = (0..shape.questions.max(shape.criteria))
        .map(|i| {
            // The first pass gives every criterion one question.
            let criterion = if i < shape.criteria {
                i
            } else {
                rng.gen_range(0..shape.criteria)
            };
            let weights: BTreeMap<AnswerValue, u8> =
                AnswerValue::SCORED.iter().map(|v| (*v, rng.gen_range(0..=2))).collect();
            ChecklistQuestion {
                id: format!("q{i:03}"),
                criterion_id: criteria[criterion].id.clone(),
                text: format!("Question {i}?"),
                applicability: random_predicate(rng, shape.forbidden),
                stakeholder_role: criteria[criterion].stakeholder_role.clone(),
                weights,
            }
        })
        .collect();
    let mut scenario_templates = Vec::new();
    for c in &criteria {
        for k in 0..rng.gen_range(1..=2) {
            scenario_templates.push(ScenarioTemplate {
                id: format!("{}.s{k}", c.id),
                criterion_id: c.id.clone(),
                narrative: format!("Scenario {k} for {}.", c.name),
                applicability: if k == 0 {
                    ApplicabilityPredicate::default()
                } else {
                    random_predicate(rng, shape.forbidden)
                },
            });
        }
    }
    let mut catalog = Catalog {
        schema_version: fria::catalog::SCHEMA_VERSION.into(),
        domains,
        criteria,
        questions,
        scenario_templates,
        thresholds: Thresholds {
            phase1_advance_min: rng.gen_range(1..=2),
            ..Thresholds::default()
        },
    };
    catalog.normalize();
    catalog
}

pub fn random_drivers(rng: &mut StdRng) -> DriverSet {
    DriverSet {
        lifecycle_stage: *STAGES.choose(rng).unwrap(),
        domain_flags: subset(rng, &FLAGS.map(String::from), 0.5),
        system_types: subset(rng, &TYPES.map(String::from), 0.5),
    }
}
