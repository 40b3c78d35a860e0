//! Line-oriented session scripts: a whole assessment as a replayable file.
//!
//! One directive per line, fields separated by `|`, lists inside a field
//! separated by `;`, `#` starts a comment line:
//!
//! ```text
//! assessment|<id>
//! at|<rfc3339 timestamp>                    applies to the following lines
//! actor|<name>|<role>|<contact>             applies to the following lines
//! system_name|<text>      purpose|<text>      operational_context|<text>
//! stakeholder|<name>|<role>|<contact>
//! lifecycle_stage|<Design|Implementation|Deployment|PostDeployment>
//! domain_flags|<flag;flag>                  system_types|<type;type>
//! stewardship|<owner name>|<owner role>|<review interval days>|<last reviewed>
//! answer|<question>|<value>|<note>|<respondent role>|<evidence;...>
//! evaluate|<scenario>|<ind>|<soc>|<effort>|<duration>|<control>|<evidence;...>|<control owner role>|<rationale>[|<override class>|<override significant yes/no/->|<override rationale>]
//! action|<id>|<scenario>|<type>|<description>|<owner role>|<status>|<due date or empty>
//! status|<action id>|<status>
//! complete|<phase0|phase1|phase2>
//! ```
//!
//! Profile lines are collected and applied as one change when the next
//! non-profile line arrives. Gates are completed implicitly when the script
//! moves on to a later phase, and any remaining gates are completed at the
//! end. Roles resolve to the script's stakeholders, or to a role-only
//! placeholder.

use chrono::{DateTime, NaiveDate, Utc};

use crate::canonical;
use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::profile::{ProfileDelta, StakeholderRef, Stewardship};
use crate::remediation::{ActionStatus, RemediationAction};
use crate::report::{export, AssessmentReport, ExportFile, ExportFormat};
use crate::scenarios::{ControlAssessment, DimensionScores, OverrideInput};
use crate::store::{AssessmentStore, Committed, MemoryStore};
use crate::workflow::{AnswerInput, Command, EvaluationInput, Phase, Workflow};

pub const DEFAULT_ASSESSMENT_ID: &str = "assessment";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Directive {
    Assessment(String),
    At(DateTime<Utc>),
    Actor(StakeholderRef),
    Stakeholder(StakeholderRef),
    Profile(ProfileDelta),
    Answer {
        input: AnswerInput,
        respondent_role: String,
    },
    Evaluate {
        input: EvaluationInput,
        control_owner_role: String,
    },
    Action {
        action: RemediationAction,
        owner_role: String,
    },
    Status {
        action_id: String,
        status: ActionStatus,
    },
    Complete(Phase),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line {
    pub number: u64,
    pub directive: Directive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Script {
    pub lines: Vec<Line>,
}

struct Fields<'a> {
    line: u64,
    record: Vec<&'a str>,
}

impl Fields<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Script {
            line: self.line,
            message: message.into(),
        }
    }

    fn get(&self, i: usize) -> &str {
        self.record.get(i).copied().unwrap_or("")
    }

    fn required(&self, i: usize, what: &str) -> Result<String> {
        match self.get(i) {
            "" => Err(self.err(format!("missing {what}"))),
            v => Ok(v.to_string()),
        }
    }

    fn parse<T: std::str::FromStr>(&self, i: usize, what: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.get(i)
            .parse()
            .map_err(|e| self.err(format!("invalid {what} {:?}: {e}", self.get(i))))
    }

    fn list(&self, i: usize) -> Vec<String> {
        self.get(i)
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect()
    }

    fn stakeholder(&self) -> Result<StakeholderRef> {
        Ok(StakeholderRef::new(self.get(1), self.required(2, "role")?, self.get(3)))
    }
}

/// Parses a session script. Syntax errors carry the line number.
pub fn parse_script(text: &str) -> Result<Script> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let number = i as u64 + 1;
        let f = Fields {
            line: number,
            record: trimmed.split('|').map(str::trim).collect(),
        };
        lines.push(Line {
            number,
            directive: directive(&f)?,
        });
    }
    Ok(Script { lines })
}

fn directive(f: &Fields<'_>) -> Result<Directive> {
    let profile = |delta: ProfileDelta| Ok(Directive::Profile(delta));
    match f.get(0) {
        "assessment" => Ok(Directive::Assessment(f.required(1, "assessment id")?)),
        "at" => Ok(Directive::At(f.parse(1, "timestamp")?)),
        "actor" => Ok(Directive::Actor(f.stakeholder()?)),
        "stakeholder" => Ok(Directive::Stakeholder(f.stakeholder()?)),
        "system_name" => profile(ProfileDelta {
            system_name: Some(f.get(1).into()),
            ..Default::default()
        }),
        "purpose" => profile(ProfileDelta {
            purpose: Some(f.get(1).into()),
            ..Default::default()
        }),
        "operational_context" => profile(ProfileDelta {
            operational_context: Some(f.get(1).into()),
            ..Default::default()
        }),
        "lifecycle_stage" => profile(ProfileDelta {
            lifecycle_stage: Some(f.parse(1, "lifecycle stage")?),
            ..Default::default()
        }),
        "domain_flags" => profile(ProfileDelta {
            domain_flags: Some(f.list(1).into_iter().collect()),
            ..Default::default()
        }),
        "system_types" => profile(ProfileDelta {
            system_types: Some(f.list(1).into_iter().collect()),
            ..Default::default()
        }),
        "stewardship" => profile(ProfileDelta {
            stewardship: Some(Stewardship {
                owner: f.stakeholder()?,
                review_interval_days: f.parse(3, "review interval")?,
                last_reviewed: f.parse(4, "last reviewed timestamp")?,
            }),
            ..Default::default()
        }),
        "answer" => Ok(Directive::Answer {
            input: AnswerInput {
                question_id: f.required(1, "question id")?,
                value: f.parse(2, "answer value")?,
                note: f.get(3).into(),
                evidence_refs: f.list(5),
            },
            respondent_role: f.get(4).into(),
        }),
        "evaluate" => {
            let override_ = match f.get(10) {
                "" => None,
                _ => Some(OverrideInput {
                    classification: f.parse(10, "override classification")?,
                    significant: match f.get(11) {
                        "" | "-" => None,
                        "yes" => Some(true),
                        "no" => Some(false),
                        other => return Err(f.err(format!("invalid override significance {other:?}"))),
                    },
                    rationale: f.get(12).into(),
                }),
            };
            Ok(Directive::Evaluate {
                input: EvaluationInput {
                    scenario_id: f.required(1, "scenario id")?,
                    dimensions: DimensionScores::new(
                        f.parse(2, "individuals score")?,
                        f.parse(3, "society score")?,
                        f.parse(4, "mitigation effort score")?,
                        f.parse(5, "duration score")?,
                    ),
                    control: ControlAssessment {
                        effectiveness: f.parse(6, "control effectiveness")?,
                        evidence_refs: f.list(7),
                        control_owner: StakeholderRef::role_only(f.get(8)),
                    },
                    rationale: f.get(9).into(),
                    override_,
                },
                control_owner_role: f.get(8).into(),
            })
        }
        "action" => Ok(Directive::Action {
            action: RemediationAction {
                id: f.required(1, "action id")?,
                scenario_id: f.required(2, "scenario id")?,
                action_type: f.parse(3, "action type")?,
                description: f.get(4).into(),
                owner: StakeholderRef::role_only(f.get(5)),
                status: match f.get(6) {
                    "" => ActionStatus::Proposed,
                    _ => f.parse(6, "action status")?,
                },
                due: match f.get(7) {
                    "" => None,
                    _ => Some(f.parse::<NaiveDate>(7, "due date")?),
                },
            },
            owner_role: f.get(5).into(),
        }),
        "status" => Ok(Directive::Status {
            action_id: f.required(1, "action id")?,
            status: f.parse(2, "action status")?,
        }),
        "complete" => Ok(Directive::Complete(match f.get(1) {
            "phase0" => Phase::Phase0,
            "phase1" => Phase::Phase1,
            "phase2" => Phase::Phase2,
            other => return Err(f.err(format!("unknown phase {other:?}"))),
        })),
        other => Err(f.err(format!("unknown directive {other:?}"))),
    }
}

/// Where a session's operations go: in-process or over the API.
pub trait Executor {
    fn create(
        &mut self,
        id: &str,
        initial: ProfileDelta,
        actor: &StakeholderRef,
        at: DateTime<Utc>,
    ) -> Result<Committed>;

    fn execute(
        &mut self,
        id: &str,
        expected_revision: u64,
        cmd: Command,
        actor: &StakeholderRef,
        at: DateTime<Utc>,
    ) -> Result<Committed>;
}

impl<S: AssessmentStore> Executor for Workflow<S> {
    fn create(
        &mut self,
        id: &str,
        initial: ProfileDelta,
        actor: &StakeholderRef,
        at: DateTime<Utc>,
    ) -> Result<Committed> {
        Workflow::create(self, id, initial, actor, at)
    }

    fn execute(
        &mut self,
        id: &str,
        expected_revision: u64,
        cmd: Command,
        actor: &StakeholderRef,
        at: DateTime<Utc>,
    ) -> Result<Committed> {
        Workflow::execute(self, id, expected_revision, cmd, actor, at)
    }
}

/// Summary of a replayed script.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub assessment_id: String,
    pub revision: u64,
    pub phase: Phase,
    /// Successful mutations, creation included. Equals the audit length.
    pub mutations: usize,
}

struct Runner<'e, E> {
    exec: &'e mut E,
    id: String,
    created: bool,
    revision: u64,
    phase: Phase,
    at: DateTime<Utc>,
    actor: StakeholderRef,
    stakeholders: Vec<StakeholderRef>,
    pending: Option<ProfileDelta>,
    /// Actor and time in effect when the pending profile lines started.
    pending_from: Option<(StakeholderRef, DateTime<Utc>)>,
    mutations: usize,
}

impl<E: Executor> Runner<'_, E> {
    fn resolve(&self, role: &str) -> StakeholderRef {
        if role.is_empty() {
            return self.actor.clone();
        }
        self.stakeholders
            .iter()
            .find(|s| s.role == role)
            .cloned()
            .unwrap_or_else(|| StakeholderRef::role_only(role))
    }

    fn committed(&mut self, c: Committed) {
        self.revision = c.revision;
        self.phase = c.phase;
        self.mutations += 1;
    }

    /// Profile lines accumulate until the next non-profile directive.
    fn pending_delta(&mut self) -> &mut ProfileDelta {
        if self.pending.is_none() {
            self.pending_from = Some((self.actor.clone(), self.at));
        }
        self.pending.get_or_insert_with(Default::default)
    }

    fn flush(&mut self) -> Result<()> {
        let (actor, at) = self
            .pending_from
            .take()
            .unwrap_or_else(|| (self.actor.clone(), self.at));
        if !self.created {
            let initial = self.pending.take().unwrap_or_default();
            let c = self.exec.create(&self.id, initial, &actor, at)?;
            self.created = true;
            self.committed(c);
        } else if let Some(delta) = self.pending.take() {
            let c = self
                .exec
                .execute(&self.id, self.revision, Command::UpdateProfile(delta), &actor, at)?;
            self.committed(c);
        }
        Ok(())
    }

    fn command(&mut self, cmd: Command, actor: Option<StakeholderRef>) -> Result<()> {
        let actor = actor.unwrap_or_else(|| self.actor.clone());
        let c = self.exec.execute(&self.id, self.revision, cmd, &actor, self.at)?;
        self.committed(c);
        Ok(())
    }

    fn complete(&mut self, phase: Phase) -> Result<()> {
        let cmd = match phase {
            Phase::Phase0 => Command::CompletePhase0,
            Phase::Phase1 => Command::CompletePhase1,
            Phase::Phase2 => Command::CompletePhase2,
            Phase::Output => return Ok(()),
        };
        self.command(cmd, None)
    }

    /// Completes gates until the assessment is at least in `target`.
    fn advance_to(&mut self, target: Phase) -> Result<()> {
        self.flush()?;
        while self.phase < target {
            self.complete(self.phase)?;
        }
        Ok(())
    }

    fn step(&mut self, line: u64, directive: Directive) -> Result<()> {
        match directive {
            Directive::Assessment(id) => {
                if self.created {
                    return Err(Error::Script {
                        line,
                        message: "assessment id must come before any change".into(),
                    });
                }
                self.id = id;
            }
            Directive::At(at) => self.at = at,
            Directive::Actor(a) => self.actor = a,
            Directive::Stakeholder(s) => {
                self.stakeholders.push(s);
                let list = self.stakeholders.clone();
                self.pending_delta().stakeholders = Some(list);
            }
            Directive::Profile(delta) => {
                merge(self.pending_delta(), delta);
            }
            Directive::Answer { input, respondent_role } => {
                self.advance_to(Phase::Phase1)?;
                let respondent = self.resolve(&respondent_role);
                self.command(Command::RecordAnswer(input), Some(respondent))?;
            }
            Directive::Evaluate {
                mut input,
                control_owner_role,
            } => {
                self.advance_to(Phase::Phase2)?;
                input.control.control_owner = self.resolve(&control_owner_role);
                self.command(Command::EvaluateScenario(input), None)?;
            }
            Directive::Action { mut action, owner_role } => {
                self.advance_to(Phase::Phase2)?;
                action.owner = self.resolve(&owner_role);
                self.command(Command::AddAction(action), None)?;
            }
            Directive::Status { action_id, status } => {
                self.advance_to(Phase::Phase2)?;
                self.command(Command::SetActionStatus { action_id, status }, None)?;
            }
            Directive::Complete(phase) => {
                self.advance_to(phase)?;
                if self.phase == phase {
                    self.complete(phase)?;
                }
            }
        }
        Ok(())
    }
}

fn merge(into: &mut ProfileDelta, delta: ProfileDelta) {
    macro_rules! take {
        ($($f:ident),*) => { $( if delta.$f.is_some() { into.$f = delta.$f; } )* };
    }
    take!(
        system_name,
        purpose,
        operational_context,
        stakeholders,
        lifecycle_stage,
        domain_flags,
        system_types,
        stewardship
    );
}

/// Replays `script` through `exec` and completes any remaining gates.
///
/// Scripts without an `at` line use the Unix epoch, so runs stay
/// reproducible.
pub fn run_script<E: Executor>(exec: &mut E, script: &Script) -> Result<RunOutcome> {
    let mut runner = Runner {
        exec,
        id: DEFAULT_ASSESSMENT_ID.into(),
        created: false,
        revision: 0,
        phase: Phase::Phase0,
        at: DateTime::UNIX_EPOCH,
        actor: StakeholderRef::role_only("session"),
        stakeholders: Vec::new(),
        pending: None,
        pending_from: None,
        mutations: 0,
    };
    for line in &script.lines {
        runner.step(line.number, line.directive.clone())?;
    }
    runner.advance_to(Phase::Output)?;
    Ok(RunOutcome {
        assessment_id: runner.id,
        revision: runner.revision,
        phase: runner.phase,
        mutations: runner.mutations,
    })
}

/// Everything a batch run produces.
#[derive(Debug, Clone)]
pub struct SessionOutput {
    pub outcome: RunOutcome,
    pub report: AssessmentReport,
    /// Canonical report, CSV bundle and text summary, in that order.
    pub files: Vec<ExportFile>,
}

/// All export formats of `report`.
pub fn export_all(report: &AssessmentReport) -> Vec<ExportFile> {
    ExportFormat::ALL.into_iter().flat_map(|f| export(report, f)).collect()
}

/// Runs `script` against `workflow` and builds the report.
pub fn run_with<S: AssessmentStore>(workflow: &mut Workflow<S>, script: &Script) -> Result<SessionOutput> {
    let outcome = run_script(workflow, script)?;
    let report = workflow.report(&outcome.assessment_id)?;
    Ok(SessionOutput {
        files: export_all(&report),
        outcome,
        report,
    })
}

/// Parses and runs a script in memory.
pub fn run_session(catalog: &Catalog, script_text: &str) -> Result<SessionOutput> {
    let script = parse_script(script_text)?;
    let mut workflow = Workflow::new(catalog.clone(), MemoryStore::new());
    run_with(&mut workflow, &script)
}

/// Digest of the canonical report, handy for quick equality checks.
pub fn report_digest(report: &AssessmentReport) -> String {
    canonical::digest(report)
}
