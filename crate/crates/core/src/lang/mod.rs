//! Scenario language front end: tokenizer, parser, pretty-printer and
//! caret diagnostics.

pub mod ast;
mod lexer;
mod parser;
mod pretty;

use thiserror::Error;

pub use lexer::{tokenize, Token, TokenKind, KEYWORDS};
pub use parser::parse;
pub use pretty::{pretty_expr, pretty_print, pretty_specifier, sexpr, sexpr_expr, sexpr_specifier};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Span {
    pub start: Pos,
    pub end: Pos,
}

impl Span {
    pub fn new(start: Pos, end: Pos) -> Span {
        Span { start, end }
    }

    pub fn to(self, other: Span) -> Span {
        Span {
            start: self.start,
            end: other.end,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LangError {
    #[error("{message}")]
    Lex { line: usize, column: usize, message: String },
    #[error("expected {expected}, found {found}")]
    Parse {
        line: usize,
        column: usize,
        expected: String,
        found: String,
    },
}

impl LangError {
    pub fn line(&self) -> usize {
        match self {
            LangError::Lex { line, .. } | LangError::Parse { line, .. } => *line,
        }
    }

    pub fn column(&self) -> usize {
        match self {
            LangError::Lex { column, .. } | LangError::Parse { column, .. } => *column,
        }
    }
}

/// Renders `line:col: error: message`, the offending source line and a caret.
pub fn format_diagnostic(error: &LangError, source: &str) -> String {
    render(None, error, source)
}

/// Same as [`format_diagnostic`] with a `file:` prefix.
pub fn format_diagnostic_in(file: &str, error: &LangError, source: &str) -> String {
    render(Some(file), error, source)
}

fn render(file: Option<&str>, error: &LangError, source: &str) -> String {
    format_at(file, error.line(), error.column(), &error.to_string(), source)
}

/// Caret diagnostic for any message anchored at a source position.
pub fn format_at(file: Option<&str>, line: usize, column: usize, message: &str, source: &str) -> String {
    let text = source.lines().nth(line.saturating_sub(1)).unwrap_or("");
    // Keep tabs in the caret prefix so it lines up however the terminal renders them.
    let pad: String = text
        .chars()
        .take(column.saturating_sub(1))
        .map(|c| if c == '\t' { '\t' } else { ' ' })
        .collect();
    let missing = column.saturating_sub(1).saturating_sub(text.chars().count());
    let prefix = match file {
        Some(f) => format!("{f}:"),
        None => String::new(),
    };
    format!(
        "{prefix}{line}:{column}: error: {message}\n{text}\n{pad}{}^\n",
        " ".repeat(missing)
    )
}
