//! Batch evaluation over an annotated question corpus.
//!
//! Corpus lines are `question<TAB>expected[<TAB>answer]`, where `expected` is
//! a question category or `error:CODE` for questions that must be rejected.
//! Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::dialogue::Session;
use crate::query::QuestionCategory;
use crate::scene::Scene;
use crate::spatial::Constants;
use crate::ulf::Grammar;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Category(QuestionCategory),
    Error(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusItem {
    pub line: usize,
    pub question: String,
    pub expected: Expectation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub answer: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

/// Splits a corpus into items and per-line errors.
pub fn parse_corpus(text: &str) -> (Vec<CorpusItem>, Vec<LineError>) {
    let mut items = Vec::new();
    let mut errors = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() < 2 || cols.len() > 3 || cols[0].trim().is_empty() {
            errors.push(LineError { line, message: format!("expected 2 or 3 tab-separated columns, got {}", cols.len()) });
            continue;
        }
        let tag = cols[1].trim();
        let expected = if let Some(code) = tag.strip_prefix("error:") {
            Expectation::Error(code.to_string())
        } else if let Some(c) = QuestionCategory::parse(tag) {
            Expectation::Category(c)
        } else {
            errors.push(LineError { line, message: format!("unknown annotation {tag:?}") });
            continue;
        };
        let answer = cols.get(2).map(|a| a.trim().to_string()).filter(|a| !a.is_empty());
        items.push(CorpusItem { line, question: cols[0].trim().to_string(), expected, answer });
    }
    (items, errors)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Correct,
    Partial,
    Incorrect,
    /// No reference answer in the corpus.
    Unscored,
    /// The question was not parsed.
    Unanswered,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItemResult {
    pub item: CorpusItem,
    pub parsed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub category: Option<QuestionCategory>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ulf: Option<String>,
    pub response: String,
    /// Category or error code as annotated.
    pub interpretation_ok: bool,
    pub outcome: Outcome,
}

fn comparable(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .collect::<String>()
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

// Partial credit: a different answer that still agrees on the leading word
// or names some of the same blocks.
fn score(expected: &str, got: &str, labels: &[&str]) -> Outcome {
    let (e, g) = (comparable(expected), comparable(got));
    if e == g {
        return Outcome::Correct;
    }
    let named = |s: &str| -> Vec<String> {
        labels.iter().map(|l| l.to_lowercase()).filter(|l| s.contains(l.as_str())).collect()
    };
    let (ne, ng) = (named(&e), named(&g));
    let shared_label = ne.iter().any(|l| ng.contains(l));
    let first = |s: &str| s.split_whitespace().next().map(str::to_string);
    let same_verdict = matches!(first(&e).as_deref(), Some("yes" | "no" | "possibly")) && first(&e) == first(&g);
    if shared_label || same_verdict {
        Outcome::Partial
    } else {
        Outcome::Incorrect
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CategoryCounts {
    pub total: usize,
    pub parsed: usize,
    pub correct: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EvalReport {
    pub items: Vec<ItemResult>,
    pub line_errors: Vec<LineError>,
    pub total: usize,
    /// Items annotated with a category.
    pub spatial: usize,
    pub parsed: usize,
    pub category_matches: usize,
    pub unsupported: usize,
    pub unsupported_rejected: usize,
    pub scored: usize,
    pub correct: usize,
    pub partial: usize,
    pub incorrect: usize,
    pub per_category: BTreeMap<String, CategoryCounts>,
}

fn pct(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        100.0 * n as f64 / d as f64
    }
}

impl EvalReport {
    /// Fraction of category-annotated questions that reached a frame.
    pub fn parse_rate(&self) -> f64 {
        pct(self.parsed, self.spatial) / 100.0
    }

    /// Plain-text tables.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let row = |s: &mut String, k: &str, v: String| {
            let _ = writeln!(s, "  {k:<52} {v}");
        };
        s.push_str("Evaluation data\n");
        row(&mut s, "Total number of questions", self.total.to_string());
        row(&mut s, "Correct answers", self.correct.to_string());
        row(&mut s, "Partially correct answers", self.partial.to_string());
        row(&mut s, "Incorrect answers", self.incorrect.to_string());
        row(&mut s, "Questions without a reference answer", (self.parsed - self.scored.min(self.parsed)).to_string());
        s.push_str("\nAccuracy for the parsed questions\n");
        for (k, n) in [("Correct answers", self.correct), ("Partially correct answers", self.partial), ("Incorrect answers", self.incorrect)] {
            row(&mut s, k, format!("{n} out of {} ({:.1}%)", self.scored, pct(n, self.scored)));
        }
        s.push_str("\nEvaluation data on ULF parsing\n");
        row(&mut s, "Total number of spatial questions", self.spatial.to_string());
        row(&mut s, "Parsed to well-formed frames", self.parsed.to_string());
        row(&mut s, "Parsed with the annotated category", self.category_matches.to_string());
        row(&mut s, "Parse rate", format!("{:.2}%", pct(self.parsed, self.spatial)));
        row(&mut s, "Interpretation accuracy", format!("{:.2}%", pct(self.category_matches, self.spatial)));
        row(
            &mut s,
            "Unsupported constructions rejected as annotated",
            format!("{} out of {}", self.unsupported_rejected, self.unsupported),
        );
        s.push_str("\nPer category\n");
        let _ = writeln!(s, "  {:<20} {:>6} {:>7} {:>8}", "category", "total", "parsed", "correct");
        for (name, c) in &self.per_category {
            let _ = writeln!(s, "  {name:<20} {:>6} {:>7} {:>8}", c.total, c.parsed, c.correct);
        }
        if !self.line_errors.is_empty() {
            s.push_str("\nCorpus errors\n");
            for e in &self.line_errors {
                let _ = writeln!(s, "  line {}: {}", e.line, e.message);
            }
        }
        s
    }
}

/// Asks every corpus question in a fresh session over `scene`.
pub fn run_batch_eval(corpus: &str, scene: &Scene, grammar: Arc<Grammar>, constants: Arc<Constants>) -> EvalReport {
    let (items, line_errors) = parse_corpus(corpus);
    let labels: Vec<&str> = scene.labels().collect();
    let mut report = EvalReport { line_errors, ..EvalReport::default() };
    for item in items {
        let mut session = Session::new(grammar.clone(), constants.clone(), scene.clone());
        session.step("");
        let turn = session.step(&item.question);
        let parsed = turn.category.is_some();
        let interpretation_ok = match &item.expected {
            Expectation::Category(c) => turn.category == Some(*c),
            Expectation::Error(code) => turn.error.as_deref() == Some(code.as_str()),
        };
        let response = turn.text();
        let outcome = match (&item.answer, parsed) {
            (_, false) => Outcome::Unanswered,
            (None, true) => Outcome::Unscored,
            (Some(a), true) => score(a, &response, &labels),
        };

        report.total += 1;
        match &item.expected {
            Expectation::Category(c) => {
                report.spatial += 1;
                report.parsed += parsed as usize;
                report.category_matches += interpretation_ok as usize;
                let counts = report.per_category.entry(c.name().to_string()).or_default();
                counts.total += 1;
                counts.parsed += parsed as usize;
                counts.correct += (outcome == Outcome::Correct) as usize;
            }
            Expectation::Error(_) => {
                report.unsupported += 1;
                report.unsupported_rejected += interpretation_ok as usize;
            }
        }
        match outcome {
            Outcome::Correct => report.correct += 1,
            Outcome::Partial => report.partial += 1,
            Outcome::Incorrect => report.incorrect += 1,
            Outcome::Unscored | Outcome::Unanswered => {}
        }
        if matches!(outcome, Outcome::Correct | Outcome::Partial | Outcome::Incorrect) {
            report.scored += 1;
        }
        report.items.push(ItemResult {
            item,
            parsed,
            category: turn.category,
            error: turn.error.clone(),
            ulf: turn.ulf.clone(),
            response,
            interpretation_ok,
            outcome,
        });
    }
    report
}
