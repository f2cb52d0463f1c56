//! English answers from answer sets.

use serde::{Deserialize, Serialize};

use crate::query::{FrameError, PredicateContent, QuestionCategory, SentenceFrame};
use crate::scene::EntityId;
use crate::solver::{AnswerSet, ScoredEntity, SolveError, Verdict};
use crate::spatial::{RelationId, SpatialError};
use crate::ulf::ParseErrorKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub text: String,
    pub answered: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub debug: Option<AnswerSet>,
}

/// Why a question went unanswered.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Parse(ParseErrorKind),
    Frame(FrameError),
    Solve(SolveError),
    UnresolvedPronoun,
}

const NUMBER_WORDS: [&str; 11] = ["zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"];

/// Spelled-out count up to ten, digits above.
pub fn number_word(n: usize) -> String {
    NUMBER_WORDS.get(n).map_or_else(|| n.to_string(), |w| w.to_string())
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn entity_phrase(e: &EntityId) -> String {
    match e {
        EntityId::Table => "the table".into(),
        EntityId::Block(label) => format!("the {label} block"),
    }
}

/// "a and b", "a, b, and c".
pub fn join_list(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [a] => a.clone(),
        [a, b] => format!("{a} and {b}"),
        [rest @ .., last] => format!("{}, and {last}", rest.join(", ")),
    }
}

/// Collective form when every entity is a block ("the A and B blocks").
fn enumerate(entities: &[&EntityId]) -> String {
    if entities.len() > 1 && entities.iter().all(|e| !e.is_table()) {
        let labels: Vec<String> = entities.iter().map(|e| e.name().to_string()).collect();
        format!("the {} blocks", join_list(&labels))
    } else {
        join_list(&entities.iter().map(|e| entity_phrase(e)).collect::<Vec<_>>())
    }
}

fn ids(items: &[ScoredEntity]) -> Vec<&EntityId> {
    items.iter().map(|s| &s.entity).collect()
}

pub fn relation_phrase(r: RelationId) -> &'static str {
    match r {
        RelationId::Touching => "touching",
        RelationId::On => "on",
        RelationId::Above => "above",
        RelationId::Below => "below",
        RelationId::Near => "near",
        RelationId::LeftOf => "to the left of",
        RelationId::RightOf => "to the right of",
        RelationId::InFrontOf => "in front of",
        RelationId::Behind => "behind",
        RelationId::Between => "between",
        RelationId::Clear => "clear",
    }
}

fn verdict_text(a: &AnswerSet, f: &SentenceFrame) -> String {
    let verdict = a.verdict.unwrap_or(Verdict::No);
    if verdict == Verdict::Possibly {
        return "Possibly.".into();
    }
    let yes = verdict == Verdict::Yes;
    let (subject, verb) = if f.category == QuestionCategory::Existential {
        ("there", if f.content.arg0.is_plural() { "are" } else { "is" })
    } else if f.content.content == PredicateContent::Relation(RelationId::Touching) {
        return if yes { "Yes.".into() } else { "No.".into() };
    } else if f.content.arg0.is_plural() || f.content.arg0.is_universal() {
        ("they", "are")
    } else {
        ("it", "is")
    };
    if yes {
        format!("Yes, {subject} {verb}.")
    } else {
        format!("No, {subject} {verb} not.")
    }
}

fn identification_text(a: &AnswerSet) -> String {
    let confident = ids(&a.confident);
    let uncertain = ids(&a.uncertain);
    let head = match confident.len() {
        0 if uncertain.is_empty() => return if a.presupposed_plural { "No blocks.".into() } else { "No block.".into() },
        0 => return format!("Possibly {}.", enumerate(&uncertain)),
        1 if a.presupposed_plural => format!("Only {}", entity_phrase(confident[0])),
        _ => capitalize(&enumerate(&confident)),
    };
    if uncertain.is_empty() {
        format!("{head}.")
    } else {
        format!("{head}; and possibly {}.", enumerate(&uncertain))
    }
}

fn counting_text(a: &AnswerSet) -> String {
    let n = a.confident.len();
    if n == 0 && a.uncertain.is_empty() {
        return "No blocks.".into();
    }
    if n == 0 {
        return format!("None for certain; possibly {}.", enumerate(&ids(&a.uncertain)));
    }
    let noun = if n == 1 { "block" } else { "blocks" };
    let items: Vec<String> = a.confident.iter().map(|s| entity_phrase(&s.entity)).collect();
    let mut text = format!("{} {noun}: {}", capitalize(&number_word(n)), join_list(&items));
    if !a.uncertain.is_empty() {
        text.push_str(&format!("; and possibly {}", enumerate(&ids(&a.uncertain))));
    }
    text.push('.');
    text
}

fn attribute_text(a: &AnswerSet) -> String {
    if a.colors.is_empty() {
        return "I could not find that block.".into();
    }
    let parts: Vec<String> =
        a.colors.iter().map(|(e, c)| format!("{} is {}", entity_phrase(e), c.as_str())).collect();
    format!("{}.", capitalize(&join_list(&parts)))
}

fn where_text(a: &AnswerSet) -> String {
    match (a.confident.first(), &a.location) {
        (Some(s), Some(loc)) => format!(
            "{} is {} {}.",
            capitalize(&entity_phrase(&s.entity)),
            relation_phrase(loc.relation),
            entity_phrase(&loc.referent)
        ),
        _ => "I could not find that block.".into(),
    }
}

/// Answer text for a solved question.
pub fn generate(a: &AnswerSet, f: &SentenceFrame) -> Response {
    let text = match a.category {
        QuestionCategory::Confirmation | QuestionCategory::Existential => verdict_text(a, f),
        QuestionCategory::Identification | QuestionCategory::Descriptive => identification_text(a),
        QuestionCategory::Counting => counting_text(a),
        QuestionCategory::AttributeInquiry => attribute_text(a),
        QuestionCategory::WhereIs => where_text(a),
    };
    Response { text, answered: true, debug: Some(a.clone()) }
}

/// Apology naming what went wrong.
pub fn failure_text(f: &Failure) -> String {
    match f {
        Failure::Parse(kind) => match kind {
            ParseErrorKind::Empty => "I didn't catch a question. Could you say it again?".into(),
            ParseErrorKind::Unparseable => "Sorry, I couldn't understand that question.".into(),
            ParseErrorKind::UnsupportedPreposition(p) => {
                format!("Sorry, I don't know how to answer questions with \"{p}\" yet.")
            }
            ParseErrorKind::Passive => "Sorry, I can't answer passive questions yet.".into(),
            ParseErrorKind::Indexical => {
                "Sorry, I can't answer questions about what happened earlier or about what I can see yet.".into()
            }
        },
        Failure::Frame(_) => "Sorry, I couldn't work out what that question is asking.".into(),
        Failure::Solve(e) => match e {
            SolveError::EmptyScene => "Sorry, there are no blocks on the table.".into(),
            SolveError::UnknownLabel(label) => format!("Sorry, I don't see a {label} block."),
            SolveError::Spatial(SpatialError::NotABlock(_)) => "Sorry, that only makes sense for a block.".into(),
            SolveError::Spatial(SpatialError::UnsupportedPair { relation, .. }) => {
                format!("Sorry, I can't tell what is {} the table.", relation_phrase(*relation))
            }
            SolveError::Spatial(_) => "Sorry, I couldn't evaluate that relation.".into(),
        },
        Failure::UnresolvedPronoun => "Sorry, I'm not sure which block you mean.".into(),
    }
}

pub fn failure(f: &Failure) -> Response {
    Response { text: failure_text(f), answered: false, debug: None }
}
