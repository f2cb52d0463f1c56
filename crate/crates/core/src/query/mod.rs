//! Query frames: a canonical, recursive Sentence/Predicate/Argument view of
//! a question ULF, plus question classification.

mod render;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::Color;
use crate::spatial::RelationId;
use crate::ulf::{name_of, split_typed, Ulf};

pub use render::render_frame;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectType {
    Block,
    Table,
    /// A wh-pronoun argument ("what is on ..."): any block or the table.
    Entity,
}

impl ObjectType {
    pub fn name(self) -> &'static str {
        match self {
            ObjectType::Block => "block",
            ObjectType::Table => "table",
            ObjectType::Entity => "entity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Superlative {
    Highest,
    Lowest,
    Leftmost,
    Rightmost,
}

impl Superlative {
    pub fn parse(word: &str) -> Option<Superlative> {
        match word.to_ascii_lowercase().as_str() {
            "highest" | "topmost" => Some(Superlative::Highest),
            "lowest" => Some(Superlative::Lowest),
            "leftmost" => Some(Superlative::Leftmost),
            "rightmost" => Some(Superlative::Rightmost),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Superlative::Highest => "highest",
            Superlative::Lowest => "lowest",
            Superlative::Leftmost => "leftmost",
            Superlative::Rightmost => "rightmost",
        }
    }
}

/// Relation modifiers, stored innermost first; they apply in list order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredModifier {
    Not,
    Directly,
    Fully,
    Slightly,
}

impl PredModifier {
    pub fn parse(word: &str) -> Option<PredModifier> {
        match word.to_ascii_lowercase().as_str() {
            "not" => Some(PredModifier::Not),
            "directly" => Some(PredModifier::Directly),
            "fully" | "completely" => Some(PredModifier::Fully),
            "slightly" => Some(PredModifier::Slightly),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PredModifier::Not => "not",
            PredModifier::Directly => "directly",
            PredModifier::Fully => "fully",
            PredModifier::Slightly => "slightly",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArgModifier {
    Plural,
    Number { word: String, value: u32 },
    Color(Color),
    Superlative(Superlative),
    Other,
    Predicate(Box<Restriction>),
}

/// A nested predicate restricting an argument ("block on the table").
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Restriction {
    pub content: PredicateContent,
    pub arg1: Option<Referent>,
    pub pred_modifiers: Vec<PredModifier>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgumentFrame {
    pub object_type: ObjectType,
    pub object_id: Option<String>,
    pub determiner: Option<String>,
    pub modifiers: Vec<ArgModifier>,
}

impl ArgumentFrame {
    pub fn new(object_type: ObjectType) -> Self {
        Self { object_type, object_id: None, determiner: None, modifiers: Vec::new() }
    }

    pub fn is_plural(&self) -> bool {
        self.modifiers.contains(&ArgModifier::Plural)
    }

    /// Numeral cardinality, if any.
    pub fn number(&self) -> Option<u32> {
        self.modifiers.iter().find_map(|m| match m {
            ArgModifier::Number { value, .. } => Some(*value),
            _ => None,
        })
    }

    pub fn is_universal(&self) -> bool {
        matches!(self.determiner.as_deref(), Some("every" | "each"))
    }

    pub fn is_wh(&self) -> bool {
        matches!(self.determiner.as_deref(), Some("which" | "what" | "how_many"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Referent {
    Single(ArgumentFrame),
    /// Conjoined referents ("between the X block and the Y block").
    Pair(ArgumentFrame, ArgumentFrame),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredicateContent {
    Relation(RelationId),
    Color(Color),
    /// The copula between two noun phrases, or "what is NP".
    Identity,
    Exist,
    Where,
    /// "what color is ..."
    AttributeColor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredicateFrame {
    pub content: PredicateContent,
    pub arg0: ArgumentFrame,
    pub arg1: Option<Referent>,
    pub pred_modifiers: Vec<PredModifier>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuestionCategory {
    Identification,
    Confirmation,
    Existential,
    Counting,
    Descriptive,
    AttributeInquiry,
    WhereIs,
}

impl QuestionCategory {
    pub const ALL: [QuestionCategory; 7] = [
        QuestionCategory::Identification,
        QuestionCategory::Confirmation,
        QuestionCategory::Existential,
        QuestionCategory::Counting,
        QuestionCategory::Descriptive,
        QuestionCategory::AttributeInquiry,
        QuestionCategory::WhereIs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QuestionCategory::Identification => "identification",
            QuestionCategory::Confirmation => "confirmation",
            QuestionCategory::Existential => "existential",
            QuestionCategory::Counting => "counting",
            QuestionCategory::Descriptive => "descriptive",
            QuestionCategory::AttributeInquiry => "attribute-inquiry",
            QuestionCategory::WhereIs => "where-is",
        }
    }

    pub fn parse(name: &str) -> Option<QuestionCategory> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceFrame {
    pub content: PredicateFrame,
    pub category: QuestionCategory,
    /// Set when no category template matched and confirmation was assumed.
    pub low_confidence: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameError {
    #[error("unsupported logical form shape: {0}")]
    Unsupported(String),
    #[error("unknown preposition {0:?}")]
    UnknownPreposition(String),
    #[error("relation {0} needs a pair of referents")]
    NeedsPair(RelationId),
    #[error("unknown modifier {0:?}")]
    UnknownModifier(String),
}

fn unsupported(u: &Ulf) -> FrameError {
    FrameError::Unsupported(u.to_string())
}

/// Maps a preposition word to its relation; synonymous phrasings share one.
pub fn canonical_relation(word: &str) -> Option<RelationId> {
    let r = match word.to_ascii_lowercase().as_str() {
        "on" | "on_top_of" => RelationId::On,
        "above" | "over" => RelationId::Above,
        "below" | "under" | "beneath" | "underneath" => RelationId::Below,
        "near" | "next_to" | "close_to" | "adjacent_to" | "beside" => RelationId::Near,
        "touching" | "touch" | "touches" => RelationId::Touching,
        "to_the_left_of" | "left_of" => RelationId::LeftOf,
        "to_the_right_of" | "right_of" => RelationId::RightOf,
        "in_front_of" => RelationId::InFrontOf,
        "behind" => RelationId::Behind,
        "between" => RelationId::Between,
        "clear" => RelationId::Clear,
        _ => return None,
    };
    Some(r)
}

/// Canonical word for a preposition ("on_top_of" -> "on").
pub fn canonical_word(word: &str) -> Option<&'static str> {
    canonical_relation(word).map(RelationId::name)
}

pub fn number_value(word: &str) -> Option<u32> {
    let v = match word.to_ascii_lowercase().as_str() {
        "one" => 1,
        "two" => 2,
        "three" => 3,
        "four" => 4,
        "five" => 5,
        "six" => 6,
        "seven" => 7,
        "eight" => 8,
        "nine" => 9,
        "ten" => 10,
        _ => return None,
    };
    Some(v)
}

fn typed<'a>(u: &'a Ulf, suffix: &str) -> Option<&'a str> {
    u.as_atom().and_then(split_typed).filter(|(_, s)| *s == suffix).map(|(stem, _)| stem)
}

fn is_op(u: &Ulf, op: &str) -> bool {
    u.as_atom() == Some(op)
}

/// What a predicate phrase contributes before it is attached to arg0.
struct PredPart {
    content: PredicateContent,
    arg1: Option<Referent>,
    mods: Vec<PredModifier>,
}

/// Builds the query frame for a question ULF.
pub fn ulf_to_frame(u: &Ulf) -> Result<SentenceFrame, FrameError> {
    let items = u.as_list().ok_or_else(|| unsupported(u))?;
    let [clause, q] = items else { return Err(unsupported(u)) };
    if !is_op(q, "?") {
        return Err(unsupported(u));
    }
    let parts = clause.as_list().ok_or_else(|| unsupported(clause))?;
    let [subject, vp] = parts else { return Err(unsupported(clause)) };
    let vp_items = vp.as_list().ok_or_else(|| unsupported(vp))?;
    let [verb, complement] = vp_items else { return Err(unsupported(vp)) };
    let verb_word = match verb.as_list() {
        Some([tense, v]) if is_op(tense, "pres") => typed(v, "v").ok_or_else(|| unsupported(verb))?,
        _ => return Err(unsupported(verb)),
    };

    let content = match verb_word {
        "touch" => {
            let arg0 = subject_frame(subject)?;
            let arg1 = np_frame(complement)?;
            PredicateFrame {
                content: PredicateContent::Relation(RelationId::Touching),
                arg0,
                arg1: Some(Referent::Single(arg1)),
                pred_modifiers: vec![],
            }
        }
        "be" => be_clause(subject, complement)?,
        _ => return Err(unsupported(verb)),
    };
    let mut frame = SentenceFrame { content, category: QuestionCategory::Confirmation, low_confidence: false };
    let (category, low) = classify_with_confidence(&frame);
    frame.category = category;
    frame.low_confidence = low;
    Ok(frame)
}

fn be_clause(subject: &Ulf, complement: &Ulf) -> Result<PredicateFrame, FrameError> {
    // "what color is NP"
    if let Some([d, n]) = subject.as_list() {
        if typed(d, "d").is_some_and(|w| w.eq_ignore_ascii_case("what")) && typed(n, "n") == Some("color") {
            return Ok(PredicateFrame {
                content: PredicateContent::AttributeColor,
                arg0: np_frame(complement)?,
                arg1: None,
                pred_modifiers: vec![],
            });
        }
    }
    if typed(subject, "pro").is_some_and(|w| w.eq_ignore_ascii_case("there")) {
        return Ok(PredicateFrame {
            content: PredicateContent::Exist,
            arg0: np_frame(complement)?,
            arg1: None,
            pred_modifiers: vec![],
        });
    }
    let pronoun = typed(subject, "pro").map(str::to_ascii_lowercase);
    if let Some(p) = &pronoun {
        // "what is the color of NP"
        if let Some(np) = color_of(complement) {
            return Ok(PredicateFrame {
                content: PredicateContent::AttributeColor,
                arg0: np_frame(np)?,
                arg1: None,
                pred_modifiers: vec![],
            });
        }
        let part = pred_part(complement)?;
        if part.content == PredicateContent::Identity && part.mods.is_empty() {
            // "what is the highest block": the noun phrase is the question
            if let Some(Referent::Single(np)) = part.arg1 {
                return Ok(PredicateFrame { content: PredicateContent::Identity, arg0: np, arg1: None, pred_modifiers: vec![] });
            }
        }
        let mut arg0 = ArgumentFrame::new(ObjectType::Entity);
        arg0.determiner = Some(p.clone());
        return Ok(PredicateFrame { content: part.content, arg0, arg1: part.arg1, pred_modifiers: part.mods });
    }
    let arg0 = subject_frame(subject)?;
    let part = pred_part(complement)?;
    Ok(PredicateFrame { content: part.content, arg0, arg1: part.arg1, pred_modifiers: part.mods })
}

fn color_of(u: &Ulf) -> Option<&Ulf> {
    let [d, rest] = u.as_list()? else { return None };
    typed(d, "d").filter(|w| *w == "the")?;
    let [n, pp] = rest.as_list()? else { return None };
    typed(n, "n").filter(|w| *w == "color")?;
    let [p, np] = pp.as_list()? else { return None };
    typed(p, "p").filter(|w| *w == "of")?;
    Some(np)
}

fn subject_frame(u: &Ulf) -> Result<ArgumentFrame, FrameError> {
    // "what touches NP"
    if let Some(p) = typed(u, "pro").filter(|p| matches!(p.to_ascii_lowercase().as_str(), "what" | "which")) {
        let mut arg = ArgumentFrame::new(ObjectType::Entity);
        arg.determiner = Some(p.to_ascii_lowercase());
        return Ok(arg);
    }
    // (nquan (How.mod-a many.a)) NOM
    if let Some([q, nom]) = u.as_list() {
        if let Some([op, _]) = q.as_list() {
            if is_op(op, "nquan") {
                let mut arg = ArgumentFrame::new(ObjectType::Block);
                nom_into(nom, &mut arg)?;
                arg.determiner = Some("how_many".into());
                return Ok(arg);
            }
        }
    }
    np_frame(u)
}

fn np_frame(u: &Ulf) -> Result<ArgumentFrame, FrameError> {
    if let Some(name) = u.as_atom().and_then(name_of) {
        let mut arg = ArgumentFrame::new(ObjectType::Block);
        arg.object_id = Some(name.to_string());
        return Ok(arg);
    }
    let Some([det, nom]) = u.as_list() else { return Err(unsupported(u)) };
    let mut arg = ArgumentFrame::new(ObjectType::Block);
    nom_into(nom, &mut arg)?;
    let det_word = if is_op(det, "k") {
        None
    } else {
        Some(typed(det, "d").ok_or_else(|| unsupported(det))?.to_ascii_lowercase())
    };
    match det_word {
        Some(w) => match number_value(&w) {
            Some(value) => {
                arg.modifiers.push(ArgModifier::Number { word: w, value });
                arg.determiner = None;
            }
            None => arg.determiner = Some(w),
        },
        None => arg.determiner = None,
    }
    if arg.determiner.is_none() {
        if let Some(i) = arg.modifiers.iter().position(|m| *m == ArgModifier::Other) {
            arg.modifiers.remove(i);
            arg.determiner = Some("other".into());
        }
    }
    Ok(arg)
}

fn nom_into(u: &Ulf, arg: &mut ArgumentFrame) -> Result<(), FrameError> {
    match u {
        Ulf::Atom(_) => match typed(u, "n") {
            Some("block") => arg.object_type = ObjectType::Block,
            Some("table") => arg.object_type = ObjectType::Table,
            _ => return Err(unsupported(u)),
        },
        Ulf::List(items) => match items.as_slice() {
            [op, n] if is_op(op, "plur") => {
                nom_into(n, arg)?;
                arg.modifiers.push(ArgModifier::Plural);
            }
            [name, n] if name.as_atom().and_then(name_of).is_some() => {
                nom_into(n, arg)?;
                arg.object_id = name.as_atom().and_then(name_of).map(str::to_string);
            }
            [adj, n] if typed(adj, "a").is_some() => {
                nom_into(n, arg)?;
                let word = typed(adj, "a").expect("checked").to_ascii_lowercase();
                let m = if word == "other" {
                    ArgModifier::Other
                } else if let Some(c) = Color::parse(&word) {
                    ArgModifier::Color(c)
                } else if let Some(s) = Superlative::parse(&word) {
                    ArgModifier::Superlative(s)
                } else {
                    return Err(FrameError::UnknownModifier(word));
                };
                arg.modifiers.push(m);
            }
            [op, n, pred] if is_op(op, "n+preds") => {
                nom_into(n, arg)?;
                let part = pred_part(pred)?;
                arg.modifiers.push(ArgModifier::Predicate(Box::new(Restriction {
                    content: part.content,
                    arg1: part.arg1,
                    pred_modifiers: part.mods,
                })));
            }
            _ => return Err(unsupported(u)),
        },
    }
    Ok(())
}

fn pred_part(u: &Ulf) -> Result<PredPart, FrameError> {
    if let Some(word) = typed(u, "a") {
        let w = word.to_ascii_lowercase();
        if w == "clear" {
            return Ok(PredPart { content: PredicateContent::Relation(RelationId::Clear), arg1: None, mods: vec![] });
        }
        if let Some(c) = Color::parse(&w) {
            return Ok(PredPart { content: PredicateContent::Color(c), arg1: None, mods: vec![] });
        }
        if let Some(s) = Superlative::parse(&w) {
            let mut np = ArgumentFrame::new(ObjectType::Block);
            np.determiner = Some("the".into());
            np.modifiers.push(ArgModifier::Superlative(s));
            return Ok(PredPart { content: PredicateContent::Identity, arg1: Some(Referent::Single(np)), mods: vec![] });
        }
        return Err(FrameError::UnknownModifier(w));
    }
    if typed(u, "pq").is_some_and(|w| w.eq_ignore_ascii_case("where")) {
        return Ok(PredPart { content: PredicateContent::Where, arg1: None, mods: vec![] });
    }
    if typed(u, "pro").is_some_and(|w| w.eq_ignore_ascii_case("there")) {
        return Ok(PredPart { content: PredicateContent::Exist, arg1: None, mods: vec![] });
    }
    let items = u.as_list().ok_or_else(|| unsupported(u))?;
    match items {
        [op, inner] if is_op(op, "not") => {
            let mut part = pred_part(inner)?;
            part.mods.push(PredModifier::Not);
            Ok(part)
        }
        [adv, inner] if typed(adv, "adv-a").is_some() => {
            let word = typed(adv, "adv-a").expect("checked");
            let m = PredModifier::parse(word).ok_or_else(|| FrameError::UnknownModifier(word.to_string()))?;
            let mut part = pred_part(inner)?;
            part.mods.push(m);
            Ok(part)
        }
        [p, np] if typed(p, "p").is_some() => {
            let word = typed(p, "p").expect("checked");
            let relation = canonical_relation(word)
                .filter(|r| r.arity() >= 2)
                .ok_or_else(|| FrameError::UnknownPreposition(word.to_string()))?;
            let referent = match np.as_list() {
                Some([a, and, b]) if typed(and, "cc") == Some("and") => Referent::Pair(np_frame(a)?, np_frame(b)?),
                _ => Referent::Single(np_frame(np)?),
            };
            if relation == RelationId::Between && matches!(referent, Referent::Single(_)) {
                return Err(FrameError::NeedsPair(relation));
            }
            Ok(PredPart { content: PredicateContent::Relation(relation), arg1: Some(referent), mods: vec![] })
        }
        _ => {
            let np = np_frame(u)?;
            Ok(PredPart { content: PredicateContent::Identity, arg1: Some(Referent::Single(np)), mods: vec![] })
        }
    }
}

/// Question category of a frame.
pub fn classify(frame: &SentenceFrame) -> QuestionCategory {
    classify_with_confidence(frame).0
}

/// Category plus whether it was a fallback guess.
pub fn classify_with_confidence(frame: &SentenceFrame) -> (QuestionCategory, bool) {
    let p = &frame.content;
    let det = p.arg0.determiner.as_deref();
    let category = if det == Some("how_many") {
        QuestionCategory::Counting
    } else {
        match p.content {
            PredicateContent::Where => QuestionCategory::WhereIs,
            PredicateContent::AttributeColor => QuestionCategory::AttributeInquiry,
            PredicateContent::Exist => QuestionCategory::Existential,
            PredicateContent::Identity if p.arg1.is_none() => QuestionCategory::Identification,
            _ if p.arg0.object_type == ObjectType::Entity => QuestionCategory::Descriptive,
            _ if p.arg0.is_wh() => QuestionCategory::Identification,
            _ => return (QuestionCategory::Confirmation, !is_yes_no_shape(p)),
        }
    };
    (category, false)
}

// A yes/no question names its subject with a definite description, a label
// or a quantified noun phrase.
fn is_yes_no_shape(p: &PredicateFrame) -> bool {
    p.arg0.object_id.is_some() || p.arg0.determiner.is_some() || p.arg0.object_type == ObjectType::Table
}
