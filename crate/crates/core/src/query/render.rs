//! Indented text layout of query frames, stable for golden tests.

use std::fmt::Write;

use super::{ArgModifier, ArgumentFrame, PredModifier, PredicateContent, Referent, Restriction, SentenceFrame};

const PRED_INDENT: usize = 12;

fn content_text(c: &PredicateContent) -> String {
    match c {
        PredicateContent::Relation(r) => format!("TPrep {{{}}}", r.name()),
        PredicateContent::Color(c) => format!("TColor {{{}}}", c.as_str()),
        PredicateContent::Identity => "TCopula {be}".into(),
        PredicateContent::Exist => "TExist {there}".into(),
        PredicateContent::Where => "TWhere {where}".into(),
        PredicateContent::AttributeColor => "TAttribute {color}".into(),
    }
}

fn mods_text(mods: &[PredModifier]) -> String {
    format!("[{}]", mods.iter().map(|m| m.name()).collect::<Vec<_>>().join(", "))
}

fn modifier_text(m: &ArgModifier) -> String {
    match m {
        ArgModifier::Plural => "plur".into(),
        ArgModifier::Number { word, .. } => format!("TNumber {{{word}}}"),
        ArgModifier::Color(c) => format!("TColor {{{}}}", c.as_str()),
        ArgModifier::Superlative(s) => format!("TSuperlative {{{}}}", s.name()),
        ArgModifier::Other => "other".into(),
        ArgModifier::Predicate(r) => restriction_inline(r),
    }
}

fn argument_inline(a: &ArgumentFrame) -> String {
    format!(
        "Argument {{ObjectType = {}, ObjectId = {}, Determiner = {}, Modifiers = [{}]}}",
        a.object_type.name(),
        a.object_id.as_deref().unwrap_or("NULL"),
        a.determiner.as_deref().unwrap_or("NULL"),
        a.modifiers.iter().map(modifier_text).collect::<Vec<_>>().join(", ")
    )
}

fn referent_inline(r: &Referent) -> String {
    match r {
        Referent::Single(a) => argument_inline(a),
        Referent::Pair(a, b) => format!("Pair {{{}, {}}}", argument_inline(a), argument_inline(b)),
    }
}

fn restriction_inline(r: &Restriction) -> String {
    let mut s = format!("Predicate {{Content = {}", content_text(&r.content));
    if let Some(arg1) = &r.arg1 {
        let _ = write!(s, ", ARG1 = {}", referent_inline(arg1));
    }
    let _ = write!(s, ", PredModifiers = {}}}", mods_text(&r.pred_modifiers));
    s
}

fn argument_block(out: &mut String, a: &ArgumentFrame, indent: usize) {
    let pad = " ".repeat(indent + 3);
    out.push_str("Argument {\n");
    let _ = writeln!(out, "{pad}ObjectType = {},", a.object_type.name());
    let _ = writeln!(out, "{pad}ObjectId = {},", a.object_id.as_deref().unwrap_or("NULL"));
    let _ = writeln!(out, "{pad}Determiner = {},", a.determiner.as_deref().unwrap_or("NULL"));
    let mods = a.modifiers.iter().map(modifier_text).collect::<Vec<_>>().join(", ");
    let _ = write!(out, "{pad}Modifiers = [{mods}] }}");
}

/// Renders a frame in the indented `Sentence { Content = Predicate { ... }}`
/// layout.
pub fn render_frame(f: &SentenceFrame) -> String {
    let p = &f.content;
    let pad = " ".repeat(PRED_INDENT);
    let mut out = String::from("Sentence {\n   Content = Predicate {\n");
    let _ = writeln!(out, "{pad}Content = {}", content_text(&p.content));
    let _ = write!(out, "{pad}ARG0 = ");
    argument_block(&mut out, &p.arg0, PRED_INDENT);
    out.push('\n');
    match &p.arg1 {
        None => {}
        Some(Referent::Single(a)) => {
            let _ = write!(out, "{pad}ARG1 = ");
            argument_block(&mut out, a, PRED_INDENT);
            out.push('\n');
        }
        Some(Referent::Pair(a, b)) => {
            let _ = write!(out, "{pad}ARG1 = Pair {{\n{pad}   ");
            argument_block(&mut out, a, PRED_INDENT + 3);
            let _ = write!(out, ",\n{pad}   ");
            argument_block(&mut out, b, PRED_INDENT + 3);
            out.push_str(" }\n");
        }
    }
    let _ = write!(out, "{pad}PredModifiers = {} }}}}", mods_text(&p.pred_modifiers));
    out
}
