//! Adaptive tutoring engine: course knowledge base, learner modelling,
//! test planning, the per-concept session state machine, an event-sourced
//! store and a plain-text channel for SMS delivery.

pub mod assessment;
pub mod channel;
pub mod config;
pub mod event;
pub mod ids;
pub mod kb;
pub mod learner;
pub mod seed;
pub mod session;
pub mod store;

pub use assessment::{Phase, Question, QuestionBank, Scope, TestPlan};
pub use config::TutorConfig;
pub use event::EventBody;
pub use ids::{ConceptId, LearnerId, QuestionId, SectionId, SessionId};
pub use kb::{load_course, CourseError, CourseGraph, Method, MethodMatrix};
pub use learner::{KnowledgeLevel, LearnerLevel, LearnerModel, LearningStyle, StyleProfile};
pub use session::{Input, LearnerState, Prompt, Session, SessionError, SessionState, Tutor};
pub use store::{EventStore, StoreError};
