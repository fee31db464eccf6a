//! Plain-text delivery over an SMS-like channel: 160-character segments
//! with `i/n ` headers, a single-word command grammar and fixed-layout
//! prompt rendering.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::session::{PageContent, Prompt};

pub const SEGMENT_LIMIT: usize = 160;
pub const MAX_SEGMENTS: usize = 99;

/// Printable 7-bit ASCII plus line feed.
pub fn is_printable(c: char) -> bool {
    matches!(c, ' '..='~' | '\n')
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub index: usize,
    pub total: usize,
    /// Wire text, header included when `total > 1`.
    pub payload: String,
}

impl Segment {
    fn header(index: usize, total: usize) -> String {
        format!("{index}/{total} ")
    }

    /// Payload without its header.
    pub fn body(&self) -> &str {
        if self.total > 1 {
            let h = Self::header(self.index, self.total);
            self.payload.strip_prefix(h.as_str()).unwrap_or(&self.payload)
        } else {
            &self.payload
        }
    }

    /// Reads a wire payload. Text without an `i/n ` header is a single,
    /// complete message.
    pub fn from_wire(payload: &str) -> Self {
        let parsed = payload.split_once(' ').and_then(|(head, _)| {
            let (i, n) = head.split_once('/')?;
            let digits = |s: &str| !s.is_empty() && s.len() <= 2 && s.bytes().all(|b| b.is_ascii_digit());
            if !digits(i) || !digits(n) {
                return None;
            }
            let (i, n) = (i.parse().ok()?, n.parse().ok()?);
            (n > 1 && (1..=n).contains(&i)).then_some((i, n))
        });
        let (index, total) = parsed.unwrap_or((1, 1));
        Self {
            index,
            total,
            payload: payload.to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChannelError {
    #[error("message text is empty")]
    EmptyPayload,
    #[error("non-printable character at position {position}")]
    NonPrintable { position: usize },
    #[error("message needs more than {MAX_SEGMENTS} segments")]
    TooLong,
    #[error("segment limit {0} is too small to carry a header")]
    LimitTooSmall(usize),
    #[error("segment {index} is missing")]
    MissingSegment { index: usize },
    #[error("segment {index} appears twice")]
    DuplicateSegment { index: usize },
    #[error("segments disagree on the total count")]
    InconsistentTotal,
}

/// Splits `text` into segments of at most `limit` characters, headers
/// included. Text that fits is sent verbatim with no header.
pub fn segment_text(text: &str, limit: usize) -> Result<Vec<Segment>, ChannelError> {
    if text.is_empty() {
        return Err(ChannelError::EmptyPayload);
    }
    if let Some(position) = text.chars().position(|c| !is_printable(c)) {
        return Err(ChannelError::NonPrintable { position });
    }
    // ASCII from here on, so byte offsets are character offsets.
    let len = text.len();
    if len <= limit {
        return Ok(vec![Segment {
            index: 1,
            total: 1,
            payload: text.to_owned(),
        }]);
    }
    let widest = Segment::header(MAX_SEGMENTS, MAX_SEGMENTS).len();
    if limit <= widest {
        return Err(ChannelError::LimitTooSmall(limit));
    }
    let capacity = |i: usize, n: usize| limit - Segment::header(i, n).len();
    let total = (2..=MAX_SEGMENTS)
        .find(|&n| (1..=n).map(|i| capacity(i, n)).sum::<usize>() >= len)
        .ok_or(ChannelError::TooLong)?;
    let mut segments = Vec::with_capacity(total);
    let mut rest = text;
    for index in 1..=total {
        let take = capacity(index, total).min(rest.len());
        let (chunk, tail) = rest.split_at(take);
        segments.push(Segment {
            index,
            total,
            payload: format!("{}{chunk}", Segment::header(index, total)),
        });
        rest = tail;
    }
    debug_assert!(rest.is_empty());
    Ok(segments)
}

/// Inverse of [`segment_text`]; accepts segments in any order.
pub fn reassemble(segments: &[Segment]) -> Result<String, ChannelError> {
    let Some(first) = segments.first() else {
        return Err(ChannelError::MissingSegment { index: 1 });
    };
    let total = first.total;
    let mut by_index = BTreeMap::new();
    for s in segments {
        if s.total != total {
            return Err(ChannelError::InconsistentTotal);
        }
        if by_index.insert(s.index, s).is_some() {
            return Err(ChannelError::DuplicateSegment { index: s.index });
        }
    }
    let mut out = String::new();
    for index in 1..=total {
        let s = by_index
            .get(&index)
            .ok_or(ChannelError::MissingSegment { index })?;
        out.push_str(s.body());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Command {
    /// Answer letter, `'A'..='D'`.
    Answer(char),
    Next,
    Status,
    Help,
    /// `START` optionally followed by a concept reference (id or 1-based
    /// position in the course).
    Start(Option<String>),
    Unknown(String),
}

impl Command {
    /// 0-based choice index of an answer letter.
    pub fn choice_index(&self) -> Option<usize> {
        match self {
            Self::Answer(c) => Some((*c as u8 - b'A') as usize),
            _ => None,
        }
    }
}

/// Parses a learner's reply. Case-insensitive, surrounding whitespace
/// ignored, never fails.
pub fn parse_command(text: &str) -> Command {
    let norm = text.trim().to_ascii_uppercase();
    match norm.as_str() {
        "A" | "B" | "C" | "D" => Command::Answer(norm.chars().next().unwrap()),
        "NEXT" => Command::Next,
        "STATUS" => Command::Status,
        "HELP" => Command::Help,
        "START" => Command::Start(None),
        _ => match norm.split_once(char::is_whitespace) {
            Some(("START", r)) => Command::Start(Some(r.trim().to_owned())),
            _ => Command::Unknown(norm),
        },
    }
}

pub const HELP_TEXT: &str =
    "Reply A-D to answer, NEXT for the next page, STATUS for progress, START to begin the next concept or START <concept> for a given one.";

pub fn render_prompt(p: &Prompt) -> String {
    match p {
        Prompt::Question {
            prompt, choices, ..
        } => {
            let mut out = prompt.clone();
            for (i, c) in choices.iter().enumerate() {
                out.push('\n');
                out.push((b'A' + i as u8) as char);
                out.push_str(") ");
                out.push_str(c);
            }
            out.push_str("\nReply A-D");
            out
        }
        Prompt::ContentPage {
            content,
            page,
            total,
        } => {
            let body = match content {
                PageContent::Text(t) => t.clone(),
                PageContent::Media(r) => format!("[media: {r}]"),
            };
            format!("{body}\n(p {page}/{total}) Reply NEXT")
        }
        Prompt::PhaseResult {
            phase,
            score,
            level,
        } => format!("{}: {score}/100 ({})", phase.label(), level.label()),
        Prompt::SessionResult { status, level } => {
            use crate::session::FinalStatus::*;
            let what = match status {
                Completed => "concept completed",
                Skipped => "concept skipped, already mastered",
                Deferred => "concept deferred for later review",
            };
            format!("Result: {what} ({})", level.label())
        }
    }
}

/// Renders and segments a prompt into wire payloads.
pub fn outbound(p: &Prompt) -> Result<Vec<String>, ChannelError> {
    text_outbound(&render_prompt(p))
}

pub fn text_outbound(text: &str) -> Result<Vec<String>, ChannelError> {
    Ok(segment_text(text, SEGMENT_LIMIT)?
        .into_iter()
        .map(|s| s.payload)
        .collect())
}
