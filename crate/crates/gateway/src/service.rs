//! The gateway proper: learner registry, session driving and the SMS
//! conversation loop, over an event store. Mutations for one learner run one
//! at a time; later callers queue on the learner's lock.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use serde::Serialize;
use tutor_core::channel::{self, parse_command, Command, HELP_TEXT};
use tutor_core::learner::{ConceptRecord, ProfilerAnswer, Questionnaire};
use tutor_core::seed;
use tutor_core::session::{Input, LearnerState, Prompt, SessionError, SessionState, Tutor};
use tutor_core::store::{EventRecord, EventStore, StoreError};
use tutor_core::{ConceptId, EventBody, LearnerId, LearnerLevel, SessionId, StyleProfile};

use crate::config::GatewayConfig;
use crate::error::GatewayError;

type Slot = Arc<Mutex<Option<LearnerState>>>;

pub struct Gateway {
    tutor: Tutor,
    profiler: Questionnaire,
    store: EventStore,
    seed: u64,
    slots: Mutex<HashMap<LearnerId, Slot>>,
    next_id: AtomicU64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Progress {
    pub learner_id: LearnerId,
    pub name: Option<String>,
    pub learner_level: Option<LearnerLevel>,
    pub style_profile: StyleProfile,
    pub concept_records: BTreeMap<ConceptId, ConceptRecord>,
    pub eligible: Vec<ConceptId>,
    pub active_session: Option<SessionId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Step {
    /// Everything produced by the input, in order.
    pub prompts: Vec<Prompt>,
    pub state: SessionState,
}

impl Gateway {
    pub fn new(tutor: Tutor, profiler: Questionnaire, store: EventStore, seed: u64) -> Result<Self, GatewayError> {
        let next = store
            .list_learners()?
            .iter()
            .filter_map(|l| l.as_str().strip_prefix('L')?.parse::<u64>().ok())
            .max()
            .unwrap_or(0)
            + 1;
        Ok(Self {
            tutor,
            profiler,
            store,
            seed,
            slots: Mutex::new(HashMap::new()),
            next_id: AtomicU64::new(next),
        })
    }

    pub fn from_config(cfg: &GatewayConfig) -> Result<Self, GatewayError> {
        cfg.tutor.validate().map_err(GatewayError::Config)?;
        let course = cfg.load_course()?;
        let profiler = cfg.load_profiler()?;
        let store = EventStore::open(&cfg.data_dir)?.with_fsync(cfg.fsync);
        Self::new(Tutor::new(Arc::new(course), cfg.tutor.clone()), profiler, store, cfg.seed)
    }

    pub fn tutor(&self) -> &Tutor {
        &self.tutor
    }

    pub fn profiler(&self) -> &Questionnaire {
        &self.profiler
    }

    pub fn store(&self) -> &EventStore {
        &self.store
    }

    /// Seed handed to the session with this id.
    pub fn session_seed(&self, session: &SessionId) -> u64 {
        seed::derive_str(self.seed, session.as_str())
    }

    fn slot(&self, lid: &LearnerId) -> Slot {
        let mut slots = self.slots.lock().expect("slot map poisoned");
        slots.entry(lid.clone()).or_default().clone()
    }

    fn load(&self, lid: &LearnerId) -> Result<LearnerState, GatewayError> {
        if !lid.is_valid() {
            return Err(GatewayError::UnknownLearner(lid.clone()));
        }
        Ok(self.store.load_learner(&self.tutor, lid)?)
    }

    /// Runs `f` on a copy of the learner's state and commits the copy only
    /// once its events are durably appended.
    fn mutate<T>(
        &self,
        lid: &LearnerId,
        f: impl FnOnce(&mut LearnerState) -> Result<(T, Vec<EventBody>), GatewayError>,
    ) -> Result<T, GatewayError> {
        let slot = self.slot(lid);
        let mut guard = slot.lock().expect("learner lock poisoned");
        let current = match guard.take() {
            Some(s) => s,
            None => self.load(lid)?,
        };
        let mut next = current.clone();
        let result = f(&mut next).and_then(|(out, events)| {
            if !events.is_empty() {
                self.store.append_batch(lid, None, &events)?;
            }
            Ok(out)
        });
        *guard = Some(if result.is_ok() { next } else { current });
        result
    }

    fn read<T>(&self, lid: &LearnerId, f: impl FnOnce(&LearnerState) -> T) -> Result<T, GatewayError> {
        let slot = self.slot(lid);
        let mut guard = slot.lock().expect("learner lock poisoned");
        if guard.is_none() {
            *guard = Some(self.load(lid)?);
        }
        Ok(f(guard.as_ref().expect("just loaded")))
    }

    pub fn create_learner(&self, name: &str) -> Result<LearnerId, GatewayError> {
        loop {
            let n = self.next_id.fetch_add(1, Ordering::SeqCst);
            let lid = LearnerId::new(format!("L{n:06}"));
            match self.register(&lid, name) {
                Err(GatewayError::Store(StoreError::LearnerExists(_))) => continue,
                other => return other.map(|()| lid),
            }
        }
    }

    /// Creates a learner under a caller-chosen id.
    pub fn register(&self, lid: &LearnerId, name: &str) -> Result<(), GatewayError> {
        if !lid.is_valid() {
            return Err(GatewayError::bad_request("InvalidLearnerId", format!("invalid learner id {lid:?}")));
        }
        let slot = self.slot(lid);
        let mut guard = slot.lock().expect("learner lock poisoned");
        self.store.create(lid)?;
        let mut state = LearnerState::new(lid.clone());
        let events = state.register(name);
        self.store.append_batch(lid, Some(1), &events)?;
        *guard = Some(state);
        Ok(())
    }

    pub fn submit_profile(&self, lid: &LearnerId, answers: &[ProfilerAnswer]) -> Result<StyleProfile, GatewayError> {
        self.mutate(lid, |st| Ok(st.submit_profile(answers, &self.profiler)?))
    }

    pub fn progress(&self, lid: &LearnerId) -> Result<Progress, GatewayError> {
        self.read(lid, |st| Progress {
            learner_id: lid.clone(),
            name: st.model.name.clone(),
            learner_level: st.model.learner_level,
            style_profile: st.model.style_profile.clone(),
            concept_records: st.model.concept_records.clone(),
            eligible: self.tutor.eligible(&st.model),
            active_session: st.active_session().map(|s| s.session_id.clone()),
        })
    }

    pub fn state(&self, lid: &LearnerId) -> Result<LearnerState, GatewayError> {
        self.read(lid, Clone::clone)
    }

    /// Starts a session on `concept`, or on the first eligible concept.
    pub fn start_session(
        &self,
        lid: &LearnerId,
        concept: Option<&ConceptId>,
    ) -> Result<(SessionId, Prompt), GatewayError> {
        self.mutate(lid, |st| {
            let concept = match concept {
                Some(c) => c.clone(),
                None => self
                    .tutor
                    .eligible(&st.model)
                    .into_iter()
                    .next()
                    .ok_or_else(|| GatewayError::bad_request("ConceptNotEligible", "no concept left to study"))?,
            };
            let sid = SessionId::for_learner(lid, st.model.sessions_started + 1);
            let (events, prompt) = st.start(&self.tutor, &concept, self.session_seed(&sid))?;
            Ok(((sid, prompt), events))
        })
    }

    pub fn submit(&self, sid: &SessionId, input: Input) -> Result<Step, GatewayError> {
        let lid = sid
            .learner()
            .filter(|l| self.store.exists(l))
            .ok_or_else(|| GatewayError::UnknownSession(sid.clone()))?;
        self.mutate(&lid, |st| {
            let current = st.session.as_ref().map(|s| &s.session_id);
            if current != Some(sid) {
                return Err(GatewayError::UnknownSession(sid.clone()));
            }
            let (events, prompts) = st.submit(&self.tutor, input)?;
            let state = st.session.as_ref().expect("session present").state;
            Ok((Step { prompts, state }, events))
        })
    }

    /// The current prompt of a session.
    pub fn session_prompt(&self, sid: &SessionId) -> Result<(Prompt, SessionState), GatewayError> {
        let lid = sid
            .learner()
            .filter(|l| self.store.exists(l))
            .ok_or_else(|| GatewayError::UnknownSession(sid.clone()))?;
        self.read(&lid, |st| match &st.session {
            Some(s) if &s.session_id == sid => Ok((self.tutor.current_prompt(s)?, s.state)),
            _ => Err(GatewayError::UnknownSession(sid.clone())),
        })?
    }

    /// Full event history, verified by a replay from the first event.
    pub fn history(&self, lid: &LearnerId) -> Result<Vec<EventRecord>, GatewayError> {
        if !self.store.exists(lid) {
            return Err(GatewayError::UnknownLearner(lid.clone()));
        }
        self.store.load_from_genesis(&self.tutor, lid)?;
        Ok(self.store.read_log(lid)?)
    }

    /// Learner id of an SMS sender: `sms-` followed by the digits of the
    /// sender's number.
    pub fn sms_learner(from: &str) -> Result<LearnerId, GatewayError> {
        let digits: String = from.chars().filter(char::is_ascii_digit).collect();
        if digits.is_empty() || digits.len() > 32 {
            return Err(GatewayError::bad_request("InvalidSender", format!("sender {from:?} has no usable number")));
        }
        Ok(LearnerId::new(format!("sms-{digits}")))
    }

    /// One inbound SMS. Returns the outbound segment payloads in order.
    pub fn sms_inbound(&self, from: &str, text: &str) -> Result<Vec<String>, GatewayError> {
        let lid = Self::sms_learner(from)?;
        if !self.store.exists(&lid) {
            match self.register(&lid, from.trim()) {
                Ok(()) | Err(GatewayError::Store(StoreError::LearnerExists(_))) => {}
                Err(e) => return Err(e),
            }
        }
        let replies = self.sms_replies(&lid, parse_command(text))?;
        let mut out = Vec::new();
        for r in replies {
            let text = match r {
                Reply::Prompt(p) => channel::render_prompt(&p),
                Reply::Text(t) => t,
            };
            out.extend(channel::text_outbound(&text)?);
        }
        Ok(out)
    }

    fn sms_replies(&self, lid: &LearnerId, cmd: Command) -> Result<Vec<Reply>, GatewayError> {
        let active = self.read(lid, |st| st.active_session().map(|s| s.session_id.clone()))?;
        match cmd {
            Command::Help => Ok(vec![Reply::Text(HELP_TEXT.into())]),
            Command::Unknown(_) => Ok(vec![Reply::Text("Unknown command. Reply HELP for the list.".into())]),
            Command::Status => Ok(vec![Reply::Text(self.status_text(lid)?)]),
            Command::Start(reference) => {
                if let Some(sid) = active {
                    let (p, _) = self.session_prompt(&sid)?;
                    return Ok(vec![Reply::Text("A concept is already in progress.".into()), Reply::Prompt(p)]);
                }
                let concept = match reference {
                    None => None,
                    Some(r) => match self.resolve_concept(&r) {
                        Some(c) => Some(c),
                        None => return Ok(vec![Reply::Text(format!("Unknown concept {r}."))]),
                    },
                };
                match self.start_session(lid, concept.as_ref()) {
                    Ok((_, p)) => Ok(vec![Reply::Prompt(p)]),
                    Err(e) => sms_error(e),
                }
            }
            cmd @ (Command::Answer(_) | Command::Next) => {
                let Some(sid) = active else {
                    return Ok(vec![Reply::Text("No concept in progress. Reply START to begin.".into())]);
                };
                let input = match cmd.choice_index() {
                    Some(i) => Input::Answer(i),
                    None => Input::Next,
                };
                match self.submit(&sid, input) {
                    Ok(step) => Ok(step.prompts.into_iter().map(Reply::Prompt).collect()),
                    Err(e) => sms_error(e),
                }
            }
        }
    }

    /// Concept id, case-insensitive, or 1-based position in the course.
    fn resolve_concept(&self, reference: &str) -> Option<ConceptId> {
        let concepts = self.tutor.course().concepts();
        if let Some(c) = concepts.iter().find(|c| c.id.as_str().eq_ignore_ascii_case(reference)) {
            return Some(c.id.clone());
        }
        let n: usize = reference.parse().ok()?;
        concepts.get(n.checked_sub(1)?).map(|c| c.id.clone())
    }

    fn status_text(&self, lid: &LearnerId) -> Result<String, GatewayError> {
        let p = self.progress(lid)?;
        let total = self.tutor.course().concepts().len();
        let done = self
            .tutor
            .course()
            .concepts()
            .iter()
            .filter(|c| {
                p.concept_records
                    .get(&c.id)
                    .is_some_and(|r| matches!(r.status, tutor_core::learner::ConceptStatus::Completed | tutor_core::learner::ConceptStatus::Skipped))
            })
            .count();
        let level = p.learner_level.map_or("not assessed".to_string(), |l| l.to_string());
        let next = match (&p.active_session, p.eligible.first()) {
            (Some(_), _) => "a concept is in progress".to_string(),
            (None, Some(c)) => format!("next is {c}"),
            (None, None) => "nothing left".to_string(),
        };
        Ok(format!("Level: {level}. Done {done}/{total} concepts, {next}."))
    }
}

enum Reply {
    Prompt(Prompt),
    Text(String),
}

/// Session errors become conversational replies; anything else fails the
/// request.
fn sms_error(e: GatewayError) -> Result<Vec<Reply>, GatewayError> {
    let text = match &e {
        GatewayError::Session(s) => match s {
            SessionError::ConceptNotEligible(c) => format!("Concept {c} is not available yet."),
            SessionError::WrongInputKind { state: SessionState::Learning, .. } => "Reply NEXT to continue.".into(),
            SessionError::WrongInputKind { .. } => "Reply with a letter to answer.".into(),
            SessionError::ChoiceOutOfRange { choices, .. } => {
                format!("Choose a letter from A to {}.", (b'A' + *choices as u8 - 1) as char)
            }
            SessionError::Plan(_) => "Not enough questions for this concept right now.".into(),
            _ => return Err(e),
        },
        GatewayError::BadRequest { code: "ConceptNotEligible", .. } => "All concepts are finished.".into(),
        _ => return Err(e),
    };
    Ok(vec![Reply::Text(text)])
}
