//! The per-concept state machine: pre-test, learning, post-test.
//!
//! ```text
//! Created -> PreTest -> Learning -> PostTest -> Completed
//!               |          ^           |
//!               v          +-- repeat -+-> Deferred
//!            Skipped
//! ```
//!
//! A [`Session`] and its learner's [`LearnerModel`] are mutated together.
//! [`LearnerState`] bundles the two, applies each operation atomically and
//! hands back the events to persist. Replaying those events through
//! [`LearnerState::replay`] rebuilds the same state.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assessment::{grade, plan_with_band, AssessmentOutcome, Phase, PlanError, TestPlan};
use crate::config::TutorConfig;
use crate::event::EventBody;
use crate::ids::{ConceptId, LearnerId, QuestionId, SessionId};
use crate::kb::{CourseGraph, Method, VariantRef};
use crate::learner::{
    derive_learner_level, profile_styles, ConceptStatus, KnowledgeLevel, LearnerModel,
    ProfileError, ProfilerAnswer, Questionnaire, StyleProfile,
};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SessionState {
    Created,
    PreTest,
    Learning,
    PostTest,
    Completed,
    Skipped,
    Deferred,
}

impl SessionState {
    pub fn is_terminal(self) -> bool {
        matches!(self, Self::Completed | Self::Skipped | Self::Deferred)
    }

    /// The legal transition relation.
    pub fn can_transition(self, to: SessionState) -> bool {
        use SessionState::*;
        matches!(
            (self, to),
            (Created, PreTest)
                | (PreTest, Learning)
                | (PreTest, Skipped)
                | (Learning, PostTest)
                | (PostTest, Completed)
                | (PostTest, Learning)
                | (PostTest, Deferred)
        )
    }
}

impl fmt::Display for SessionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FinalStatus {
    Completed,
    Skipped,
    Deferred,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CloseReason {
    /// Pre-test showed the concept is already mastered.
    Mastered,
    Passed,
    RepeatsExhausted,
    /// No fresh post-test could be planned for another attempt.
    BankExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PageContent {
    Text(String),
    Media(String),
}

/// What the learner sees next.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Prompt {
    Question {
        question_id: QuestionId,
        prompt: String,
        choices: Vec<String>,
    },
    ContentPage {
        content: PageContent,
        page: usize,
        total: usize,
    },
    PhaseResult {
        phase: Phase,
        score: u8,
        level: KnowledgeLevel,
    },
    SessionResult {
        status: FinalStatus,
        level: KnowledgeLevel,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Input {
    Answer(usize),
    Next,
}

impl fmt::Display for Input {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Answer(i) => write!(f, "answer {i}"),
            Self::Next => f.write_str("next"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PretestDecision {
    Skip,
    Proceed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosttestDecision {
    Complete,
    Repeat(Method),
    Defer,
}

pub fn decide_after_pretest(outcome: &AssessmentOutcome, skip_level: KnowledgeLevel) -> PretestDecision {
    if outcome.level >= skip_level {
        PretestDecision::Skip
    } else {
        PretestDecision::Proceed
    }
}

/// Inputs to the post-test rule beyond the outcome itself.
#[derive(Debug, Clone)]
pub struct RepeatContext<'a> {
    pub attempt: u32,
    pub max_repeats: u32,
    pub pass_level: KnowledgeLevel,
    pub available: &'a BTreeSet<Method>,
    pub used: &'a BTreeSet<Method>,
    /// Method ranking for the learner's dominant style, best first.
    pub preference: &'a [Method; 4],
}

pub fn decide_after_posttest(outcome: &AssessmentOutcome, ctx: &RepeatContext<'_>) -> PosttestDecision {
    if outcome.level >= ctx.pass_level {
        return PosttestDecision::Complete;
    }
    if ctx.attempt > ctx.max_repeats {
        return PosttestDecision::Defer;
    }
    let fresh = ctx
        .preference
        .iter()
        .find(|m| ctx.available.contains(m) && !ctx.used.contains(m));
    let reuse = ctx.preference.iter().find(|m| ctx.available.contains(m));
    match fresh.or(reuse) {
        Some(&m) => PosttestDecision::Repeat(m),
        None => PosttestDecision::Defer,
    }
}

/// Seed of the post-test plan for a given attempt.
pub fn posttest_seed(session_seed: u64, attempt: u32) -> u64 {
    seed::derive(session_seed, 100 + u64::from(attempt))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("unknown concept {0}")]
    UnknownConcept(ConceptId),
    #[error("concept {0} is not eligible yet")]
    ConceptNotEligible(ConceptId),
    #[error("learner already has an active session on concept {0}")]
    ActiveSessionExists(ConceptId),
    #[error("no active session")]
    NoActiveSession,
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("session is already {0}")]
    SessionTerminal(SessionState),
    #[error("{input} is not accepted during {state}")]
    WrongInputKind { state: SessionState, input: Input },
    #[error("choice {chosen} out of range, question has {choices} choices")]
    ChoiceOutOfRange { chosen: usize, choices: usize },
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

impl SessionError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::UnknownConcept(_) => "UnknownConcept",
            Self::ConceptNotEligible(_) => "ConceptNotEligible",
            Self::ActiveSessionExists(_) => "ActiveSessionExists",
            Self::NoActiveSession => "NoActiveSession",
            Self::Plan(PlanError::InsufficientQuestions { .. }) => "InsufficientQuestions",
            Self::Plan(PlanError::CountTooSmall { .. }) => "CountTooSmall",
            Self::SessionTerminal(_) => "SessionTerminal",
            Self::WrongInputKind { .. } => "WrongInputKind",
            Self::ChoiceOutOfRange { .. } => "ChoiceOutOfRange",
            Self::Internal(_) => "Internal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: SessionId,
    pub learner_id: LearnerId,
    pub concept_id: ConceptId,
    pub seed: u64,
    pub state: SessionState,
    pub attempt: u32,
    pub current_plan: Option<TestPlan>,
    pub plan_cursor: usize,
    /// Choices given so far in the current test.
    pub answers: Vec<usize>,
    /// Post-test planned for the learning round in progress.
    pub pending_plan: Option<TestPlan>,
    pub current_variant: Option<VariantRef>,
    pub content_cursor: usize,
    pub used_methods: BTreeSet<Method>,
    /// Methods in delivery order, one per learning round.
    pub methods_delivered: Vec<Method>,
    pub outcomes: Vec<AssessmentOutcome>,
    pub close_reason: Option<CloseReason>,
    pub transcript: Vec<EventBody>,
}

impl Session {
    pub fn is_active(&self) -> bool {
        !self.state.is_terminal()
    }

    pub fn final_status(&self) -> Option<FinalStatus> {
        match self.state {
            SessionState::Completed => Some(FinalStatus::Completed),
            SessionState::Skipped => Some(FinalStatus::Skipped),
            SessionState::Deferred => Some(FinalStatus::Deferred),
            _ => None,
        }
    }

    pub fn last_level(&self) -> Option<KnowledgeLevel> {
        self.outcomes.last().map(|o| o.level)
    }

    fn transition(&mut self, to: SessionState) -> Result<(), SessionError> {
        if !self.state.can_transition(to) {
            return Err(SessionError::Internal(format!(
                "illegal transition {} -> {to}",
                self.state
            )));
        }
        self.state = to;
        Ok(())
    }
}

/// Course plus tunables; shared read-only by every session.
#[derive(Debug, Clone)]
pub struct Tutor {
    course: Arc<CourseGraph>,
    config: TutorConfig,
}

impl Tutor {
    pub fn new(course: Arc<CourseGraph>, config: TutorConfig) -> Self {
        Self { course, config }
    }

    pub fn course(&self) -> &CourseGraph {
        &self.course
    }

    pub fn course_arc(&self) -> &Arc<CourseGraph> {
        &self.course
    }

    pub fn config(&self) -> &TutorConfig {
        &self.config
    }

    /// Concepts `m` may start now, in order.
    pub fn eligible(&self, m: &LearnerModel) -> Vec<ConceptId> {
        self.course
            .next_concepts(&m.finished_concepts(), &m.deferred_concepts())
    }

    pub fn start_session(
        &self,
        m: &mut LearnerModel,
        concept_id: &ConceptId,
        seed: u64,
    ) -> Result<(Session, Prompt), SessionError> {
        let concept = self
            .course
            .concept(concept_id)
            .ok_or_else(|| SessionError::UnknownConcept(concept_id.clone()))?;
        if let Some(active) = m.active_concept() {
            return Err(SessionError::ActiveSessionExists(active.clone()));
        }
        if !self.eligible(m).contains(concept_id) {
            return Err(SessionError::ConceptNotEligible(concept_id.clone()));
        }
        let k = concept.sections.len();
        let bands = &self.config.difficulty_bands;
        let pretest = plan_with_band(
            self.course.questions(),
            concept,
            &m.asked_questions,
            bands.band(m.learner_level),
            Phase::PreTest,
            self.config.pretest_count(k),
            seed,
        )?;

        // Every post-test the pre-test could lead to must be plannable, so
        // the PreTest -> Learning step never fails for lack of questions.
        let mut asked = m.asked_questions.clone();
        asked.extend(pretest.items.iter().cloned());
        let mut checked = BTreeSet::new();
        for k_level in KnowledgeLevel::ALL {
            if k_level >= self.config.skip_level {
                continue;
            }
            let level = derive_learner_level(k_level, m.learner_level);
            if !checked.insert(level) {
                continue;
            }
            plan_with_band(
                self.course.questions(),
                concept,
                &asked,
                bands.band(Some(level)),
                Phase::PostTest,
                self.config.posttest_count(k),
                posttest_seed(seed, 1),
            )?;
        }

        m.sessions_started += 1;
        let session_id = SessionId::for_learner(&m.learner_id, m.sessions_started);
        let rec = m.record_mut(concept_id);
        rec.status = ConceptStatus::InProgress;
        rec.attempts = 1;
        m.begin_phase();

        let mut s = Session {
            session_id: session_id.clone(),
            learner_id: m.learner_id.clone(),
            concept_id: concept_id.clone(),
            seed,
            state: SessionState::Created,
            attempt: 1,
            current_plan: Some(pretest),
            plan_cursor: 0,
            answers: Vec::new(),
            pending_plan: None,
            current_variant: None,
            content_cursor: 0,
            used_methods: BTreeSet::new(),
            methods_delivered: Vec::new(),
            outcomes: Vec::new(),
            close_reason: None,
            transcript: vec![EventBody::SessionStarted {
                session_id,
                concept_id: concept_id.clone(),
                seed,
            }],
        };
        s.transition(SessionState::PreTest)?;
        let prompt = self.current_prompt(&s)?;
        Ok((s, prompt))
    }

    /// The prompt the learner is currently looking at.
    pub fn current_prompt(&self, s: &Session) -> Result<Prompt, SessionError> {
        match s.state {
            SessionState::PreTest | SessionState::PostTest => {
                let plan = s
                    .current_plan
                    .as_ref()
                    .ok_or_else(|| SessionError::Internal("test without a plan".into()))?;
                let id = plan
                    .items
                    .get(s.plan_cursor)
                    .ok_or_else(|| SessionError::Internal("plan cursor past end".into()))?;
                let q = self.question(id)?;
                Ok(Prompt::Question {
                    question_id: q.id.clone(),
                    prompt: q.prompt.clone(),
                    choices: q.choices.clone(),
                })
            }
            SessionState::Learning => {
                let v = s
                    .current_variant
                    .and_then(|r| self.course.variant(r))
                    .ok_or_else(|| SessionError::Internal("learning without a variant".into()))?;
                let page = v
                    .body
                    .get(s.content_cursor)
                    .ok_or_else(|| SessionError::Internal("content cursor past end".into()))?;
                let content = match v.method {
                    Method::Text => PageContent::Text(page.clone()),
                    _ => PageContent::Media(page.clone()),
                };
                Ok(Prompt::ContentPage {
                    content,
                    page: s.content_cursor + 1,
                    total: v.body.len(),
                })
            }
            SessionState::Completed | SessionState::Skipped | SessionState::Deferred => {
                Ok(Prompt::SessionResult {
                    status: s.final_status().expect("terminal"),
                    level: s.last_level().unwrap_or(KnowledgeLevel::Weak),
                })
            }
            SessionState::Created => Err(SessionError::Internal("session not started".into())),
        }
    }

    fn question(&self, id: &QuestionId) -> Result<&crate::assessment::Question, SessionError> {
        self.course
            .questions()
            .get(id)
            .ok_or_else(|| SessionError::Internal(format!("question {id} missing from bank")))
    }

    /// Applies one learner input. Invalid input is rejected before anything
    /// is mutated.
    pub fn submit(
        &self,
        s: &mut Session,
        m: &mut LearnerModel,
        input: Input,
    ) -> Result<Vec<Prompt>, SessionError> {
        if s.state.is_terminal() {
            return Err(SessionError::SessionTerminal(s.state));
        }
        match (s.state, input) {
            (SessionState::PreTest | SessionState::PostTest, Input::Answer(choice)) => {
                self.answer(s, m, choice)
            }
            (SessionState::Learning, Input::Next) => self.advance(s, m),
            (state, input) => Err(SessionError::WrongInputKind { state, input }),
        }
    }

    fn answer(&self, s: &mut Session, m: &mut LearnerModel, choice: usize) -> Result<Vec<Prompt>, SessionError> {
        let plan = s
            .current_plan
            .as_ref()
            .ok_or_else(|| SessionError::Internal("test without a plan".into()))?;
        let qid = plan
            .items
            .get(s.plan_cursor)
            .ok_or_else(|| SessionError::Internal("plan cursor past end".into()))?
            .clone();
        let q = self.question(&qid)?;
        if choice >= q.choices.len() {
            return Err(SessionError::ChoiceOutOfRange {
                chosen: choice,
                choices: q.choices.len(),
            });
        }
        let correct = choice == q.correct;
        m.update_on_answer(q, correct)
            .map_err(|e| SessionError::Internal(e.to_string()))?;
        s.answers.push(choice);
        s.plan_cursor += 1;
        s.transcript.push(EventBody::AnswerSubmitted {
            session_id: s.session_id.clone(),
            question_id: qid,
            choice,
            correct,
        });
        if s.plan_cursor < plan.items.len() {
            return Ok(vec![self.current_prompt(s)?]);
        }
        self.finish_test(s, m)
    }

    fn finish_test(&self, s: &mut Session, m: &mut LearnerModel) -> Result<Vec<Prompt>, SessionError> {
        let plan = s
            .current_plan
            .take()
            .ok_or_else(|| SessionError::Internal("test without a plan".into()))?;
        let tally = m
            .finalize_phase(&s.concept_id)
            .map_err(|e| SessionError::Internal(e.to_string()))?;
        let outcome = grade(&plan, self.course.questions(), &s.answers)
            .map_err(|e| SessionError::Internal(e.to_string()))?;
        if (tally.score, tally.level) != (outcome.score, outcome.level) {
            return Err(SessionError::Internal(format!(
                "running tally scored {} but grading scored {}",
                tally.score, outcome.score
            )));
        }
        s.answers.clear();
        s.plan_cursor = 0;
        s.transcript.push(EventBody::PhaseFinalized {
            session_id: s.session_id.clone(),
            phase: outcome.phase,
            score: outcome.score,
            level: outcome.level,
            conceptual_level: outcome.conceptual_level,
            objective_level: outcome.objective_level,
        });
        let mut prompts = vec![Prompt::PhaseResult {
            phase: outcome.phase,
            score: outcome.score,
            level: outcome.level,
        }];
        let phase = outcome.phase;
        s.outcomes.push(outcome);
        let outcome = s.outcomes.last().expect("just pushed");

        match phase {
            Phase::PreTest => {
                m.learner_level = Some(derive_learner_level(outcome.level, m.learner_level));
                match decide_after_pretest(outcome, self.config.skip_level) {
                    PretestDecision::Skip => {
                        self.close(s, m, SessionState::Skipped, CloseReason::Mastered, &mut prompts)?;
                    }
                    PretestDecision::Proceed => {
                        let variant = self
                            .course
                            .select_variant(
                                &s.concept_id,
                                m,
                                &BTreeSet::new(),
                                &self.config.method_matrix,
                            )
                            .ok_or_else(|| SessionError::Internal("concept has no variants".into()))?;
                        let next = self.plan_posttest(s, m)?;
                        self.begin_learning(s, variant, next)?;
                        prompts.push(self.current_prompt(s)?);
                    }
                }
            }
            Phase::PostTest => {
                let available = self.course.available_methods(&s.concept_id);
                let ctx = RepeatContext {
                    attempt: s.attempt,
                    max_repeats: self.config.max_repeats,
                    pass_level: self.config.pass_level,
                    available: &available,
                    used: &s.used_methods,
                    preference: self
                        .config
                        .method_matrix
                        .preference(m.style_profile.dominant),
                };
                match decide_after_posttest(outcome, &ctx) {
                    PosttestDecision::Complete => {
                        self.close(s, m, SessionState::Completed, CloseReason::Passed, &mut prompts)?;
                    }
                    PosttestDecision::Defer => {
                        self.close(s, m, SessionState::Deferred, CloseReason::RepeatsExhausted, &mut prompts)?;
                    }
                    PosttestDecision::Repeat(method) => {
                        s.attempt += 1;
                        match self.plan_posttest(s, m) {
                            Ok(next) => {
                                let variant = self
                                    .course
                                    .variant_with_method(&s.concept_id, m, method)
                                    .ok_or_else(|| SessionError::Internal(format!("no {method} variant")))?;
                                m.record_mut(&s.concept_id).attempts = s.attempt;
                                self.begin_learning(s, variant, next)?;
                                prompts.push(self.current_prompt(s)?);
                            }
                            Err(SessionError::Plan(PlanError::InsufficientQuestions { .. })) => {
                                s.attempt -= 1;
                                self.close(s, m, SessionState::Deferred, CloseReason::BankExhausted, &mut prompts)?;
                            }
                            Err(e) => return Err(e),
                        }
                    }
                }
            }
        }
        Ok(prompts)
    }

    fn plan_posttest(&self, s: &Session, m: &LearnerModel) -> Result<TestPlan, SessionError> {
        let concept = self
            .course
            .concept(&s.concept_id)
            .ok_or_else(|| SessionError::UnknownConcept(s.concept_id.clone()))?;
        Ok(plan_with_band(
            self.course.questions(),
            concept,
            &m.asked_questions,
            self.config.difficulty_bands.band(m.learner_level),
            Phase::PostTest,
            self.config.posttest_count(concept.sections.len()),
            posttest_seed(s.seed, s.attempt),
        )?)
    }

    fn begin_learning(&self, s: &mut Session, variant: VariantRef, next: TestPlan) -> Result<(), SessionError> {
        let method = self
            .course
            .variant(variant)
            .ok_or_else(|| SessionError::Internal("dangling variant".into()))?
            .method;
        s.transition(SessionState::Learning)?;
        s.current_variant = Some(variant);
        s.content_cursor = 0;
        s.used_methods.insert(method);
        s.methods_delivered.push(method);
        s.pending_plan = Some(next);
        Ok(())
    }

    fn advance(&self, s: &mut Session, m: &mut LearnerModel) -> Result<Vec<Prompt>, SessionError> {
        let pages = s
            .current_variant
            .and_then(|r| self.course.variant(r))
            .map(|v| v.body.len())
            .ok_or_else(|| SessionError::Internal("learning without a variant".into()))?;
        s.content_cursor += 1;
        s.transcript.push(EventBody::PageAdvanced {
            session_id: s.session_id.clone(),
            page: s.content_cursor,
        });
        if s.content_cursor < pages {
            return Ok(vec![self.current_prompt(s)?]);
        }
        let plan = s
            .pending_plan
            .take()
            .ok_or_else(|| SessionError::Internal("no post-test planned".into()))?;
        s.transition(SessionState::PostTest)?;
        s.current_variant = None;
        s.content_cursor = 0;
        s.current_plan = Some(plan);
        s.plan_cursor = 0;
        s.answers.clear();
        m.begin_phase();
        Ok(vec![self.current_prompt(s)?])
    }

    fn close(
        &self,
        s: &mut Session,
        m: &mut LearnerModel,
        to: SessionState,
        reason: CloseReason,
        prompts: &mut Vec<Prompt>,
    ) -> Result<(), SessionError> {
        s.transition(to)?;
        s.current_plan = None;
        s.pending_plan = None;
        s.current_variant = None;
        s.close_reason = Some(reason);
        let status = s.final_status().expect("terminal");
        let rec = m.record_mut(&s.concept_id);
        rec.status = match status {
            FinalStatus::Completed => ConceptStatus::Completed,
            FinalStatus::Skipped => ConceptStatus::Skipped,
            FinalStatus::Deferred => ConceptStatus::Deferred,
        };
        rec.attempts = s.attempt;
        let level = s.last_level().unwrap_or(KnowledgeLevel::Weak);
        s.transcript.push(EventBody::SessionClosed {
            session_id: s.session_id.clone(),
            status,
            level,
            reason,
        });
        prompts.push(Prompt::SessionResult { status, level });
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReplayError {
    #[error("event {index} ({kind}) does not match the replayed state")]
    Mismatch { index: usize, kind: &'static str },
    #[error("event {index} was rejected on replay: {source}")]
    Rejected {
        index: usize,
        #[source]
        source: SessionError,
    },
    #[error("log ends before the derived events of event {index}")]
    Incomplete { index: usize },
}

/// A learner's model together with their latest session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerState {
    pub model: LearnerModel,
    pub session: Option<Session>,
}

impl LearnerState {
    pub fn new(learner_id: LearnerId) -> Self {
        Self {
            model: LearnerModel::new(learner_id),
            session: None,
        }
    }

    pub fn active_session(&self) -> Option<&Session> {
        self.session.as_ref().filter(|s| s.is_active())
    }

    pub fn register(&mut self, name: &str) -> Vec<EventBody> {
        self.model.name = Some(name.to_owned());
        vec![EventBody::LearnerCreated { name: name.to_owned() }]
    }

    pub fn submit_profile(
        &mut self,
        answers: &[ProfilerAnswer],
        questionnaire: &Questionnaire,
    ) -> Result<(StyleProfile, Vec<EventBody>), ProfileError> {
        let profile = profile_styles(answers, questionnaire)?;
        self.model.style_profile = profile.clone();
        let ev = EventBody::ProfileSubmitted {
            answers: answers.to_vec(),
            profile: profile.clone(),
        };
        Ok((profile, vec![ev]))
    }

    pub fn start(
        &mut self,
        tutor: &Tutor,
        concept: &ConceptId,
        seed: u64,
    ) -> Result<(Vec<EventBody>, Prompt), SessionError> {
        let mut model = self.model.clone();
        let (session, prompt) = tutor.start_session(&mut model, concept, seed)?;
        let events = session.transcript.clone();
        self.model = model;
        self.session = Some(session);
        Ok((events, prompt))
    }

    pub fn submit(&mut self, tutor: &Tutor, input: Input) -> Result<(Vec<EventBody>, Vec<Prompt>), SessionError> {
        let Some(current) = self.session.as_ref() else {
            return Err(SessionError::NoActiveSession);
        };
        let mut session = current.clone();
        let mut model = self.model.clone();
        let mark = session.transcript.len();
        let prompts = tutor.submit(&mut session, &mut model, input)?;
        let events = session.transcript[mark..].to_vec();
        self.model = model;
        self.session = Some(session);
        Ok((events, prompts))
    }

    /// Rebuilds state by re-running every input event and checking that the
    /// derived events in the log match what the engine produces.
    pub fn replay<'a>(
        mut self,
        tutor: &Tutor,
        events: impl IntoIterator<Item = &'a EventBody>,
    ) -> Result<Self, ReplayError> {
        let mut expected: VecDeque<EventBody> = VecDeque::new();
        let mut last_input = 0;
        for (index, ev) in events.into_iter().enumerate() {
            if let Some(want) = expected.pop_front() {
                if &want != ev {
                    return Err(ReplayError::Mismatch { index, kind: ev.kind() });
                }
                continue;
            }
            let rejected = |source| ReplayError::Rejected { index, source };
            let produced = match ev {
                EventBody::LearnerCreated { name } => self.register(name),
                EventBody::ProfileSubmitted { profile, .. } => {
                    self.model.style_profile = profile.clone();
                    vec![ev.clone()]
                }
                EventBody::SessionStarted { concept_id, seed, .. } => {
                    self.start(tutor, concept_id, *seed).map_err(rejected)?.0
                }
                EventBody::AnswerSubmitted { choice, question_id, .. } => {
                    let current = self
                        .active_session()
                        .and_then(|s| s.current_plan.as_ref().map(|p| p.items.get(s.plan_cursor)));
                    if current != Some(Some(question_id)) {
                        return Err(ReplayError::Mismatch { index, kind: ev.kind() });
                    }
                    self.submit(tutor, Input::Answer(*choice)).map_err(rejected)?.0
                }
                EventBody::PageAdvanced { .. } => self.submit(tutor, Input::Next).map_err(rejected)?.0,
                EventBody::PhaseFinalized { .. } | EventBody::SessionClosed { .. } => {
                    return Err(ReplayError::Mismatch { index, kind: ev.kind() });
                }
            };
            let mut produced = produced.into_iter();
            if produced.next().as_ref() != Some(ev) {
                return Err(ReplayError::Mismatch { index, kind: ev.kind() });
            }
            expected.extend(produced);
            last_input = index;
        }
        if !expected.is_empty() {
            return Err(ReplayError::Incomplete { index: last_input });
        }
        Ok(self)
    }
}
