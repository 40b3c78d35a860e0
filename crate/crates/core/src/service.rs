//! HTTP API over the workflow.
//!
//! Bodies are plain JSON mirroring the record formats. Writes carry the
//! revision they expect to replace in an `If-Match` header and an `actor` in
//! the body; the response is the new [`Committed`] revision with an `ETag`.
//!
//! | Outcome | Status |
//! |---------|--------|
//! | stale revision, incomplete gate, wrong phase, duplicate id | 409 with `missing` items where relevant |
//! | validation failure | 422 with the rule id |
//! | unknown assessment, revision or route | 404 |
//! | `If-Match` absent | 428 |

use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post, put};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::checklist::AnswerValue;
use crate::error::Error;
use crate::profile::{ProfileDelta, StakeholderRef};
use crate::remediation::{ActionStatus, RemediationAction};
use crate::report::{export, ExportFormat};
use crate::scenarios::{ControlAssessment, DimensionScores, OverrideInput, ScenarioEvaluation, ScenarioInstance};
use crate::store::{AssessmentStore, Committed};
use crate::workflow::{AnswerInput, Command, EvaluationInput, Workflow};

pub type SharedWorkflow = Arc<Workflow<Arc<dyn AssessmentStore>>>;

/// Builds the API router for `catalog` over `store`.
pub fn router(catalog: Catalog, store: Arc<dyn AssessmentStore>) -> Router {
    let workflow: SharedWorkflow = Arc::new(Workflow::new(catalog, store));
    Router::new()
        .route("/assessments", post(create).get(list))
        .route("/assessments/{id}/profile", get(get_profile).patch(patch_profile))
        .route("/assessments/{id}/phase0/complete", post(complete_phase0))
        .route("/assessments/{id}/questions", get(questions))
        .route("/assessments/{id}/answers/{question_id}", put(put_answer))
        .route("/assessments/{id}/phase1/complete", post(complete_phase1))
        .route("/assessments/{id}/scenarios", get(scenarios))
        .route("/assessments/{id}/evaluations/{scenario_id}", put(put_evaluation))
        .route("/assessments/{id}/actions", post(post_action))
        .route("/assessments/{id}/actions/{action_id}", patch(patch_action))
        .route("/assessments/{id}/phase2/complete", post(complete_phase2))
        .route("/assessments/{id}/report", get(report))
        .route("/assessments/{id}/audit", get(audit))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not-found", "no such route") })
        .with_state(workflow)
}

/// Serves `router` until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, router: Router) -> std::io::Result<()> {
    axum::serve(listener, router).await
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: &'static str,
    message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    missing: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected_revision: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    actual_revision: Option<u64>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, rule: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                error: rule,
                message: message.into(),
                missing: Vec::new(),
                expected_revision: None,
                actual_revision: None,
            },
        }
    }
}

/// HTTP status for an engine error.
pub fn status_for(err: &Error) -> StatusCode {
    match err {
        Error::RevisionConflict { .. }
        | Error::IncompleteProfile(_)
        | Error::IncompletePhase { .. }
        | Error::NoScenarioApplicable(_)
        | Error::PhaseIncomplete(_)
        | Error::InvalidTransition { .. }
        | Error::AlreadyExists(_) => StatusCode::CONFLICT,
        Error::NotFound(_) => StatusCode::NOT_FOUND,
        Error::QuestionNotApplicable(_)
        | Error::MissingJustification(_)
        | Error::EvidenceRequired(_)
        | Error::InvalidEvaluation { .. }
        | Error::UnknownScenario(_)
        | Error::ScenarioNotEligible(_)
        | Error::InvalidAction { .. }
        | Error::InvalidProfile(_)
        | Error::InvalidId(_)
        | Error::Script { .. } => StatusCode::UNPROCESSABLE_ENTITY,
        Error::Catalog(_) | Error::Corrupt { .. } | Error::CorruptAudit(_) | Error::Io(_) => {
            StatusCode::INTERNAL_SERVER_ERROR
        }
    }
}

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        let (expected_revision, actual_revision) = match err {
            Error::RevisionConflict { expected, actual } => (Some(expected), Some(actual)),
            _ => (None, None),
        };
        Self {
            status: status_for(&err),
            body: ErrorBody {
                error: err.rule_id(),
                message: err.to_string(),
                missing: err.missing_items(),
                expected_revision,
                actual_revision,
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Runs store-touching work off the async executor.
async fn blocking<T, F>(wf: &SharedWorkflow, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&Workflow<Arc<dyn AssessmentStore>>) -> crate::Result<T> + Send + 'static,
{
    let wf = Arc::clone(wf);
    tokio::task::spawn_blocking(move || f(&wf))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
        .map_err(ApiError::from)
}

fn body<T: DeserializeOwned>(value: serde_json::Value) -> ApiResult<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "invalid-body",
            format!("{path}: {}", e.inner()),
        )
    })
}

/// Splits `actor` and `at` off a write body and parses the rest strictly.
/// `#[serde(flatten)]` cannot be combined with `deny_unknown_fields`, hence
/// the two steps.
fn envelope<T: DeserializeOwned>(bytes: &Bytes) -> ApiResult<Envelope<T>> {
    let invalid = |m: String| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid-body", m);
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| invalid(e.to_string()))?;
    let serde_json::Value::Object(mut map) = value else {
        return Err(invalid("body must be a JSON object".into()));
    };
    let actor = map
        .remove("actor")
        .ok_or_else(|| invalid("actor: missing field".into()))?;
    let at = map.remove("at").unwrap_or(serde_json::Value::Null);
    Ok(Envelope {
        actor: body(actor).map_err(|e| invalid(format!("actor.{}", e.body.message)))?,
        at: body(at).map_err(|e| invalid(format!("at: {}", e.body.message)))?,
        body: body(serde_json::Value::Object(map))?,
    })
}

fn expected_revision(headers: &HeaderMap) -> ApiResult<u64> {
    let raw = headers.get(header::IF_MATCH).ok_or_else(|| {
        ApiError::new(
            StatusCode::PRECONDITION_REQUIRED,
            "revision-required",
            "If-Match header with the expected revision is required",
        )
    })?;
    raw.to_str()
        .ok()
        .map(|s| s.trim().trim_start_matches("W/").trim_matches('"'))
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| {
            ApiError::new(
                StatusCode::BAD_REQUEST,
                "invalid-revision",
                "If-Match must be a revision number",
            )
        })
}

fn committed(status: StatusCode, c: Committed) -> Response {
    let mut res = (status, Json(&c)).into_response();
    if let Ok(v) = HeaderValue::from_str(&format!("\"{}\"", c.revision)) {
        res.headers_mut().insert(header::ETAG, v);
    }
    res
}

/// Fields every write body carries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub actor: StakeholderRef,
    /// Defaults to the server clock.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at: Option<DateTime<Utc>>,
    #[serde(flatten)]
    pub body: T,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Empty {}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateBody {
    pub id: String,
    #[serde(default)]
    pub profile: ProfileDelta,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileChangeBody {
    pub change: ProfileDelta,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerBody {
    pub value: AnswerValue,
    #[serde(default)]
    pub note: String,
    #[serde(default)]
    pub evidence_refs: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationBody {
    pub dimensions: DimensionScores,
    pub control: ControlAssessment,
    pub rationale: String,
    #[serde(rename = "override", default, skip_serializing_if = "Option::is_none")]
    pub override_: Option<OverrideInput>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionBody {
    pub action: RemediationAction,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionStatusBody {
    pub status: ActionStatus,
}

async fn create(State(wf): State<SharedWorkflow>, bytes: Bytes) -> ApiResult<Response> {
    let req: Envelope<CreateBody> = envelope(&bytes)?;
    let at = req.at.unwrap_or_else(Utc::now);
    let c = blocking(&wf, move |wf| wf.create(&req.body.id, req.body.profile, &req.actor, at)).await?;
    Ok(committed(StatusCode::CREATED, c))
}

async fn list(State(wf): State<SharedWorkflow>) -> ApiResult<Response> {
    let items = blocking(&wf, |wf| wf.store().list()).await?;
    Ok(Json(items).into_response())
}

/// Applies one command with the `If-Match` revision.
async fn command<T, F>(
    wf: SharedWorkflow,
    id: String,
    headers: HeaderMap,
    bytes: Bytes,
    to_cmd: F,
) -> ApiResult<Response>
where
    T: DeserializeOwned + Send + 'static,
    F: FnOnce(T) -> Command + Send + 'static,
{
    let expected = expected_revision(&headers)?;
    let req: Envelope<T> = envelope(&bytes)?;
    let at = req.at.unwrap_or_else(Utc::now);
    let c = blocking(&wf, move |wf| {
        wf.execute(&id, expected, to_cmd(req.body), &req.actor, at)
    })
    .await?;
    Ok(committed(StatusCode::OK, c))
}

#[derive(Serialize)]
struct ProfileView {
    id: String,
    revision: u64,
    phase: crate::workflow::Phase,
    profile: crate::profile::SystemProfile,
    drivers: Option<crate::profile::DriverSet>,
    staleness: crate::workflow::Staleness,
    overview_review_overdue: bool,
}

async fn get_profile(State(wf): State<SharedWorkflow>, Path(id): Path<String>) -> ApiResult<Response> {
    let r = blocking(&wf, move |wf| wf.load(&id, None)).await?;
    Ok(Json(ProfileView {
        overview_review_overdue: r.profile.review_overdue(Utc::now()),
        id: r.id,
        revision: r.revision,
        phase: r.phase,
        profile: r.profile,
        drivers: r.drivers,
        staleness: r.staleness,
    })
    .into_response())
}

async fn patch_profile(
    State(wf): State<SharedWorkflow>,
    Path(id): Path<String>,
    headers: HeaderMap,
    bytes: Bytes,
) -> ApiResult<Response> {
    command(wf, id, headers, bytes, |b: ProfileChangeBody| {
        Command::UpdateProfile(b.change)
    })
    .await
}

async fn complete_phase0(
    State(wf): State<SharedWorkflow>,
    Path(id): Path<String>,
    headers: HeaderMap,
    bytes: Bytes,
) -> ApiResult<Response> {
    command(wf, id, headers, bytes, |_: Empty| Command::CompletePhase0).await
}

async fn complete_phase1(
    State(wf): State<SharedWorkflow>,
    Path(id): Path<String>,
    headers: HeaderMap,
    bytes: Bytes,
) -> ApiResult<Response> {
    command(wf, id, headers, bytes, |_: Empty| Command::CompletePhase1).await
}

async fn complete_phase2(
    State(wf): State<SharedWorkflow>,
    Path(id): Path<String>,
    headers: HeaderMap,
    bytes: Bytes,
) -> ApiResult<Response> {
    command(wf, id, headers, bytes, |_: Empty| Command::CompletePhase2).await
}

async fn questions(State(wf): State<SharedWorkflow>, Path(id): Path<String>) -> ApiResult<Response> {
    let qs = blocking(&wf, move |wf| wf.applicable_questions(&id)).await?;
    Ok(Json(qs).into_response())
}

async fn put_answer(
    State(wf): State<SharedWorkflow>,
    Path((id, question_id)): Path<(String, String)>,
    headers: HeaderMap,
    bytes: Bytes,
) -> ApiResult<Response> {
    command(wf, id, headers, bytes, move |b: AnswerBody| {
        Command::RecordAnswer(AnswerInput {
            question_id,
            value: b.value,
            note: b.note,
            evidence_refs: b.evidence_refs,
        })
    })
    .await
}

#[derive(Serialize)]
struct ScenarioView {
    #[serde(flatten)]
    instance: ScenarioInstance,
    evaluation: Option<ScenarioEvaluation>,
    history_len: usize,
}

async fn scenarios(State(wf): State<SharedWorkflow>, Path(id): Path<String>) -> ApiResult<Response> {
    let r = blocking(&wf, move |wf| wf.load(&id, None)).await?;
    let views: Vec<ScenarioView> = r
        .scenarios
        .iter()
        .map(|s| {
            let history = r.evaluations.get(&s.id);
            ScenarioView {
                instance: s.clone(),
                evaluation: history.and_then(|h| h.last().cloned()),
                history_len: history.map_or(0, Vec::len),
            }
        })
        .collect();
    Ok(Json(views).into_response())
}

async fn put_evaluation(
    State(wf): State<SharedWorkflow>,
    Path((id, scenario_id)): Path<(String, String)>,
    headers: HeaderMap,
    bytes: Bytes,
) -> ApiResult<Response> {
    command(wf, id, headers, bytes, move |b: EvaluationBody| {
        Command::EvaluateScenario(EvaluationInput {
            scenario_id,
            dimensions: b.dimensions,
            control: b.control,
            rationale: b.rationale,
            override_: b.override_,
        })
    })
    .await
}

async fn post_action(
    State(wf): State<SharedWorkflow>,
    Path(id): Path<String>,
    headers: HeaderMap,
    bytes: Bytes,
) -> ApiResult<Response> {
    command(wf, id, headers, bytes, |b: ActionBody| Command::AddAction(b.action)).await
}

async fn patch_action(
    State(wf): State<SharedWorkflow>,
    Path((id, action_id)): Path<(String, String)>,
    headers: HeaderMap,
    bytes: Bytes,
) -> ApiResult<Response> {
    command(wf, id, headers, bytes, move |b: ActionStatusBody| {
        Command::SetActionStatus {
            action_id,
            status: b.status,
        }
    })
    .await
}

#[derive(Debug, Deserialize)]
struct ReportQuery {
    format: Option<String>,
}

async fn report(
    State(wf): State<SharedWorkflow>,
    Path(id): Path<String>,
    Query(q): Query<ReportQuery>,
) -> ApiResult<Response> {
    let format: ExportFormat = q
        .format
        .as_deref()
        .unwrap_or("canonical")
        .parse()
        .map_err(|e: String| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid-format", e))?;
    let report = blocking(&wf, move |wf| wf.report(&id)).await?;
    let files = export(&report, format);
    let response = match format {
        ExportFormat::Canonical => Response::builder()
            .header(header::CONTENT_TYPE, "application/json")
            .body(Body::from(files[0].bytes.clone())),
        ExportFormat::TextSummary => Response::builder()
            .header(header::CONTENT_TYPE, "text/plain; charset=utf-8")
            .body(Body::from(files[0].bytes.clone())),
        ExportFormat::CsvBundle => {
            let bundle: std::collections::BTreeMap<&str, String> = files
                .iter()
                .map(|f| (f.name, String::from_utf8_lossy(&f.bytes).into_owned()))
                .collect();
            return Ok(Json(bundle).into_response());
        }
    };
    response.map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))
}

async fn audit(State(wf): State<SharedWorkflow>, Path(id): Path<String>) -> ApiResult<Response> {
    let events = blocking(&wf, move |wf| wf.store().audit(&id)).await?;
    Ok(Json(events).into_response())
}
