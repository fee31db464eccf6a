//! One error type for every gateway entry point, with the stable code and
//! HTTP status each variant maps to.

use thiserror::Error;
use tutor_core::channel::ChannelError;
use tutor_core::learner::ProfileError;
use tutor_core::session::SessionError;
use tutor_core::store::StoreError;
use tutor_core::{CourseError, LearnerId, SessionId};

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("unknown learner {0}")]
    UnknownLearner(LearnerId),
    #[error("unknown session {0}")]
    UnknownSession(SessionId),
    #[error("{message}")]
    BadRequest { code: &'static str, message: String },
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Store(StoreError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Course(#[from] CourseError),
    #[error("configuration: {0}")]
    Config(String),
}

impl From<StoreError> for GatewayError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::UnknownLearner(id) => Self::UnknownLearner(id),
            e => Self::Store(e),
        }
    }
}

/// Every code an API error body can carry.
pub const ERROR_CODES: &[&str] = &[
    "UnknownLearner",
    "UnknownSession",
    "UnknownConcept",
    "ConceptNotEligible",
    "ActiveSessionExists",
    "NoActiveSession",
    "InsufficientQuestions",
    "CountTooSmall",
    "SessionTerminal",
    "WrongInputKind",
    "ChoiceOutOfRange",
    "UnknownItem",
    "UnknownOption",
    "DuplicateAnswer",
    "MalformedQuestionnaire",
    "InvalidLearnerId",
    "InvalidSender",
    "MalformedInput",
    "SequenceConflict",
    "CorruptLog",
    "CorruptSnapshot",
    "ReplayMismatch",
    "LearnerExists",
    "EmptyPayload",
    "NonPrintable",
    "TooLong",
    "CourseInvalid",
    "ConfigInvalid",
    "IoFailure",
    "Internal",
];

impl GatewayError {
    pub fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self::BadRequest {
            code,
            message: message.into(),
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Self::UnknownLearner(_) => "UnknownLearner",
            Self::UnknownSession(_) => "UnknownSession",
            Self::BadRequest { code, .. } => code,
            Self::Session(e) => e.code(),
            Self::Profile(e) => e.code(),
            Self::Store(e) => e.code(),
            Self::Channel(e) => match e {
                ChannelError::EmptyPayload => "EmptyPayload",
                ChannelError::NonPrintable { .. } => "NonPrintable",
                ChannelError::TooLong => "TooLong",
                _ => "Internal",
            },
            Self::Course(_) => "CourseInvalid",
            Self::Config(_) => "ConfigInvalid",
        }
    }

    pub fn status(&self) -> u16 {
        match self.code() {
            "UnknownLearner" | "UnknownSession" | "UnknownConcept" => 404,
            "ActiveSessionExists" | "SequenceConflict" | "LearnerExists" => 409,
            "CorruptLog" | "CorruptSnapshot" | "ReplayMismatch" | "IoFailure" | "Internal"
            | "CourseInvalid" | "ConfigInvalid" => 500,
            _ => 400,
        }
    }
}
