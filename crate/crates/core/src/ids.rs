//! String identifiers used across the course, learner and session layers.

use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                Self(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }

        impl std::borrow::Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

string_id!(
    /// Identifies a concept within a course.
    ConceptId
);
string_id!(
    /// Identifies a section. Unique only within its concept.
    SectionId
);
string_id!(QuestionId);
string_id!(LearnerId);
string_id!(SessionId);

impl LearnerId {
    /// Learner ids double as log file names, so they are restricted to
    /// `[A-Za-z0-9_-]`, at most 64 characters.
    pub fn is_valid(&self) -> bool {
        !self.0.is_empty()
            && self.0.len() <= 64
            && self
                .0
                .bytes()
                .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
    }
}

impl SessionId {
    /// Session ids have the form `<learner>-s<n>`.
    pub fn for_learner(learner: &LearnerId, n: u32) -> Self {
        Self(format!("{learner}-s{n}"))
    }

    pub fn learner(&self) -> Option<LearnerId> {
        let (lid, n) = self.0.rsplit_once("-s")?;
        if n.is_empty() || !n.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        Some(LearnerId::new(lid))
    }
}
