//! Utterance normalization: tokenizing, lowercasing, fixing known
//! transcription errors and fusing block labels and multi-word prepositions
//! into single tokens.

use std::collections::HashMap;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormalizeError {
    #[error("empty utterance")]
    Empty,
}

/// Word-sequence rewrite table applied by greedy longest match.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct Rewrites {
    // keyed by first word; each entry sorted longest first
    entries: HashMap<String, Vec<(Vec<String>, String)>>,
}

impl Rewrites {
    pub(crate) fn insert(&mut self, from: &str, to: &str) {
        let words: Vec<String> = from.split_whitespace().map(str::to_lowercase).collect();
        let Some(first) = words.first().cloned() else { return };
        let list = self.entries.entry(first).or_default();
        list.retain(|(w, _)| *w != words);
        list.push((words, to.to_string()));
        list.sort_by(|a, b| b.0.len().cmp(&a.0.len()));
    }

    fn longest_at(&self, tokens: &[String], i: usize) -> Option<(usize, &str)> {
        let list = self.entries.get(&tokens[i])?;
        list.iter()
            .find(|(w, _)| tokens.len() - i >= w.len() && tokens[i..i + w.len()] == w[..])
            .map(|(w, to)| (w.len(), to.as_str()))
    }

    fn apply(&self, tokens: Vec<String>, mut keep: impl FnMut(&str) -> String) -> Vec<String> {
        let mut out = Vec::with_capacity(tokens.len());
        let mut i = 0;
        while i < tokens.len() {
            match self.longest_at(&tokens, i) {
                Some((n, to)) => {
                    out.push(keep(to));
                    i += n;
                }
                None => {
                    out.push(tokens[i].clone());
                    i += 1;
                }
            }
        }
        out
    }
}

fn is_dropped_punctuation(c: char) -> bool {
    matches!(c, '.' | ',' | '!' | ';' | ':' | '"' | '(' | ')')
}

/// Splits raw text into lowercase word tokens; `?` is kept as a token and
/// other punctuation removed.
pub(crate) fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if c.is_whitespace() || is_dropped_punctuation(c) || c == '?' {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur).to_lowercase());
            }
            if c == '?' {
                out.push("?".into());
            }
        } else {
            cur.push(c);
        }
    }
    if !cur.is_empty() {
        out.push(cur.to_lowercase());
    }
    // a trailing apostrophe or quote left by the split carries no meaning
    out.iter_mut().for_each(|t| *t = t.trim_matches('\'').to_string());
    out.retain(|t| !t.is_empty());
    out
}

/// The rewrite tables of a grammar.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct Normalizer {
    pub corrections: Rewrites,
    pub labels: Rewrites,
    pub phrases: Rewrites,
}

impl Normalizer {
    /// Tokenizes and rewrites `text`. `extra_labels` are scene labels not
    /// known to the grammar.
    pub(crate) fn normalize(&self, text: &str, extra_labels: &[&str]) -> Result<Vec<String>, NormalizeError> {
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return Err(NormalizeError::Empty);
        }
        let mut labels = self.labels.clone();
        for l in extra_labels {
            if labels.longest_at(&l.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>(), 0).is_none() {
                labels.insert(l, l);
            }
        }
        // labels first so that corrections never rewrite part of a name
        let tokens = labels.apply(tokens, |l| format!("\u{0}{l}"));
        let tokens = self
            .corrections
            .apply(tokens, |to| format!("\u{1}{to}"))
            .into_iter()
            .flat_map(|t| match t.strip_prefix('\u{1}') {
                Some(c) => c.split_whitespace().map(str::to_string).collect(),
                None => vec![t],
            })
            .collect::<Vec<_>>();
        // corrections may have produced words that complete a label
        let tokens = labels.apply(tokens, |l| format!("\u{0}{l}"));
        let tokens = self.phrases.apply(tokens, str::to_string);
        Ok(tokens.into_iter().map(|t| t.trim_start_matches('\u{0}').to_string()).collect())
    }
}

/// Joins tokens back into text, expanding fused phrases.
pub fn render_tokens(tokens: &[String]) -> String {
    tokens.iter().map(|t| if t.contains(' ') { t.clone() } else { t.replace('_', " ") }).collect::<Vec<_>>().join(" ")
}
