use thiserror::Error;

use crate::lang::Span;
use crate::specifier::SpecifierError;

/// A mistake in the scenario program itself; sampling stops immediately.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message}")]
pub struct ProgramError {
    pub message: String,
    pub span: Option<Span>,
}

impl ProgramError {
    pub fn new(message: impl Into<String>, span: Span) -> ProgramError {
        ProgramError {
            message: message.into(),
            span: Some(span),
        }
    }

    pub fn unanchored(message: impl Into<String>) -> ProgramError {
        ProgramError {
            message: message.into(),
            span: None,
        }
    }

    pub fn from_specifier(e: SpecifierError, fallback: Span) -> ProgramError {
        ProgramError {
            span: Some(e.span().unwrap_or(fallback)),
            message: e.to_string(),
        }
    }
}

/// Why one candidate scene was discarded.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Error)]
pub enum RejectCause {
    #[error("collision between {0} and {1}")]
    Collision(String, String),
    #[error("requirement on line {line} failed: {text}")]
    Requirement { line: usize, text: String },
    #[error("{0} is not visible from {1}")]
    NotVisible(String, String),
    #[error("{0} lies outside the workspace")]
    Workspace(String),
    #[error("{0}")]
    Geometry(String),
    #[error("temporal requirement violated: {0}")]
    Temporal(String),
}

impl RejectCause {
    pub fn category(&self) -> &'static str {
        match self {
            RejectCause::Collision(..) => "collision",
            RejectCause::Requirement { .. } | RejectCause::NotVisible(..) => "requirement",
            RejectCause::Workspace(_) => "workspace",
            RejectCause::Geometry(_) => "geometry",
            RejectCause::Temporal(_) => "temporal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Fault {
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error(transparent)]
    Reject(#[from] RejectCause),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error("gave up after {rejections} rejections; most frequent cause ({count}x): {cause}")]
    MaxRejectionsExceeded {
        rejections: usize,
        cause: RejectCause,
        count: usize,
    },
}
