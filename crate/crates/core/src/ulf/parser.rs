use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::grammar::Grammar;
use super::normalize::{render_tokens, NormalizeError};
use super::{split_typed, Ulf};

/// Why a question could not be parsed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "word", rename_all = "snake_case")]
pub enum ParseErrorKind {
    Empty,
    Unparseable,
    UnsupportedPreposition(String),
    Passive,
    Indexical,
}

impl ParseErrorKind {
    pub fn code(&self) -> &'static str {
        match self {
            ParseErrorKind::Empty => "EMPTY_INPUT",
            ParseErrorKind::Unparseable => "UNPARSEABLE",
            ParseErrorKind::UnsupportedPreposition(_) => "UNSUPPORTED_PREPOSITION",
            ParseErrorKind::Passive => "UNSUPPORTED_PASSIVE",
            ParseErrorKind::Indexical => "UNSUPPORTED_INDEXICAL",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Longest input prefix any grammar pattern accounted for.
    pub longest_prefix: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Empty => write!(f, "empty question"),
            ParseErrorKind::Unparseable => write!(f, "unparseable question (understood up to {:?})", self.longest_prefix),
            ParseErrorKind::UnsupportedPreposition(p) => write!(f, "unsupported preposition {p:?}"),
            ParseErrorKind::Passive => write!(f, "passive constructions are not supported"),
            ParseErrorKind::Indexical => write!(f, "indexical questions are not supported"),
        }
    }
}

impl From<NormalizeError> for ParseError {
    fn from(_: NormalizeError) -> Self {
        ParseError { kind: ParseErrorKind::Empty, longest_prefix: String::new() }
    }
}

impl Grammar {
    /// Parses normalized tokens into a question ULF. A missing final `?`
    /// is supplied.
    pub fn parse_question(&self, tokens: &[String], extra_labels: &[&str]) -> Result<Ulf, ParseError> {
        if tokens.is_empty() {
            return Err(ParseError { kind: ParseErrorKind::Empty, longest_prefix: String::new() });
        }
        let owned: Vec<String>;
        let mut tokens = tokens;
        if tokens.last().map(String::as_str) != Some("?") {
            owned = tokens.iter().cloned().chain(std::iter::once("?".to_string())).collect();
            tokens = &owned;
        }
        let failure = match self.transduce("QUESTION", tokens, extra_labels) {
            Ok(out) => {
                let mut ulf = out.ulf();
                capitalize_initial(&mut ulf, &tokens[0]);
                match ulf.check_question() {
                    Ok(()) => return Ok(ulf),
                    Err(_) => tokens.len(),
                }
            }
            Err(no_match) => no_match.deepest,
        };
        let longest_prefix = render_tokens(&tokens[..failure.min(tokens.len())]);
        let kind = match self.transduce("UNSUPPORTED", tokens, extra_labels) {
            Ok(out) => {
                let words = out.text();
                let mut it = words.split_whitespace();
                match (it.next(), it.next()) {
                    (Some("passive"), _) => ParseErrorKind::Passive,
                    (Some("indexical"), _) => ParseErrorKind::Indexical,
                    (Some("preposition"), Some(p)) => ParseErrorKind::UnsupportedPreposition(p.to_string()),
                    _ => ParseErrorKind::Unparseable,
                }
            }
            Err(_) => ParseErrorKind::Unparseable,
        };
        Err(ParseError { kind, longest_prefix })
    }

    /// Normalizes and parses raw text.
    pub fn parse_text(&self, text: &str, extra_labels: &[&str]) -> Result<Ulf, ParseError> {
        let tokens = self.normalize(text, extra_labels)?;
        self.parse_question(&tokens, extra_labels)
    }
}

/// Parses with the bundled grammar.
pub fn parse_question(tokens: &[String]) -> Result<Ulf, ParseError> {
    Grammar::bundled().parse_question(tokens, &[])
}

// The sentence-initial word keeps its capital in the logical form.
fn capitalize_initial(ulf: &mut Ulf, first_token: &str) {
    fn first_atom(u: &mut Ulf) -> Option<&mut String> {
        match u {
            Ulf::Atom(a) if split_typed(a).is_some() => Some(a),
            Ulf::Atom(_) => None,
            Ulf::List(items) => items.iter_mut().find_map(first_atom),
        }
    }
    if let Some(atom) = first_atom(ulf) {
        let matches = split_typed(atom).is_some_and(|(stem, _)| stem.eq_ignore_ascii_case(first_token));
        if matches {
            let mut chars = atom.chars();
            if let Some(c) = chars.next() {
                *atom = c.to_uppercase().chain(chars).collect();
            }
        }
    }
}
