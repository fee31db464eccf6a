//! Event payloads. The store wraps each one in a sequenced, checksummed
//! record; replaying them in order rebuilds a learner.

use serde::{Deserialize, Serialize};

use crate::assessment::Phase;
use crate::ids::{ConceptId, QuestionId, SessionId};
use crate::learner::{KnowledgeLevel, ProfilerAnswer, StyleProfile};
use crate::session::{CloseReason, FinalStatus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload")]
pub enum EventBody {
    LearnerCreated {
        name: String,
    },
    ProfileSubmitted {
        answers: Vec<ProfilerAnswer>,
        profile: StyleProfile,
    },
    SessionStarted {
        session_id: SessionId,
        concept_id: ConceptId,
        seed: u64,
    },
    AnswerSubmitted {
        session_id: SessionId,
        question_id: QuestionId,
        choice: usize,
        correct: bool,
    },
    PageAdvanced {
        session_id: SessionId,
        page: usize,
    },
    PhaseFinalized {
        session_id: SessionId,
        phase: Phase,
        score: u8,
        level: KnowledgeLevel,
        conceptual_level: KnowledgeLevel,
        objective_level: KnowledgeLevel,
    },
    SessionClosed {
        session_id: SessionId,
        status: FinalStatus,
        level: KnowledgeLevel,
        reason: CloseReason,
    },
}

impl EventBody {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::LearnerCreated { .. } => "LearnerCreated",
            Self::ProfileSubmitted { .. } => "ProfileSubmitted",
            Self::SessionStarted { .. } => "SessionStarted",
            Self::AnswerSubmitted { .. } => "AnswerSubmitted",
            Self::PageAdvanced { .. } => "PageAdvanced",
            Self::PhaseFinalized { .. } => "PhaseFinalized",
            Self::SessionClosed { .. } => "SessionClosed",
        }
    }

    /// Events that carry learner input, as opposed to ones derived from it.
    pub fn is_input(&self) -> bool {
        !matches!(self, Self::PhaseFinalized { .. } | Self::SessionClosed { .. })
    }
}
