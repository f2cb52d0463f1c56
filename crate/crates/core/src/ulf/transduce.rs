//! Hierarchical pattern transduction.
//!
//! A transduction tree is a forest of nodes. Branch nodes carry a pattern
//! that must match the whole input; leaves carry a template that is filled
//! from the captures of the closest matching branch above them, plus a
//! directive saying what to do with the result.
//!
//! Search is depth first and left to right: when a branch's pattern fails,
//! its next sibling is tried, and once all siblings fail the search resumes
//! at the siblings of the parent. The first leaf whose template can be
//! filled wins.
//!
//! Pattern syntax, space separated:
//!
//! | element   | matches                                   |
//! |-----------|-------------------------------------------|
//! | `word`    | that word, case-insensitively             |
//! | `<class>` | one word from the named word class        |
//! | `_`       | exactly one word                          |
//! | `+`       | one or more words                         |
//! | `*`       | zero or more words                        |
//!
//! Every element is a capture, numbered from 1. Templates are s-expressions
//! whose atoms may contain `{k}` (capture k, words joined by `_`); a bare
//! `{k}` splices the captured words as separate atoms; `[TREE k ...]`
//! transduces the concatenation of the listed captures with tree `TREE` and
//! inserts the result.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::ops::Range;

use thiserror::Error;

use super::Ulf;

/// Maximum nesting of sub-transductions and continue directives.
pub const MAX_DEPTH: usize = 48;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternElement {
    Word(String),
    Class(String),
    One,
    OneOrMore,
    Any,
}

impl PatternElement {
    fn is_anchor(&self) -> bool {
        matches!(self, PatternElement::Word(_) | PatternElement::Class(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub elements: Vec<PatternElement>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransductionSyntaxError {
    #[error("empty pattern")]
    EmptyPattern,
    #[error("bad word class in {0:?}")]
    BadClass(String),
    #[error("template {template:?}: {reason}")]
    Template { template: String, reason: String },
}

impl Pattern {
    pub fn parse(text: &str) -> Result<Pattern, TransductionSyntaxError> {
        let elements = text
            .split_whitespace()
            .map(|w| match w {
                "_" => Ok(PatternElement::One),
                "+" => Ok(PatternElement::OneOrMore),
                "*" => Ok(PatternElement::Any),
                _ if w.starts_with('<') => w
                    .strip_prefix('<')
                    .and_then(|s| s.strip_suffix('>'))
                    .filter(|s| !s.is_empty())
                    .map(|s| PatternElement::Class(s.to_string()))
                    .ok_or_else(|| TransductionSyntaxError::BadClass(w.to_string())),
                _ => Ok(PatternElement::Word(w.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if elements.is_empty() {
            return Err(TransductionSyntaxError::EmptyPattern);
        }
        Ok(Pattern { elements })
    }

    pub fn classes(&self) -> impl Iterator<Item = &str> {
        self.elements.iter().filter_map(|e| match e {
            PatternElement::Class(c) => Some(c.as_str()),
            _ => None,
        })
    }

    /// Matches the whole token sequence. On failure returns the number of
    /// leading tokens consumed by the deepest run of matched anchors.
    pub fn match_tokens(&self, tokens: &[String], classes: &dyn WordClasses) -> Result<Captures, usize> {
        let mut spans = Vec::with_capacity(self.elements.len());
        let mut progress = 0;
        if self.step(0, 0, tokens, classes, &mut spans, &mut progress) {
            Ok(Captures { spans })
        } else {
            Err(progress)
        }
    }

    fn step(
        &self,
        ei: usize,
        ti: usize,
        tokens: &[String],
        classes: &dyn WordClasses,
        spans: &mut Vec<Range<usize>>,
        progress: &mut usize,
    ) -> bool {
        let Some(el) = self.elements.get(ei) else {
            return ti == tokens.len();
        };
        let remaining_min: usize = self.elements[ei + 1..]
            .iter()
            .map(|e| usize::from(!matches!(e, PatternElement::Any)))
            .sum();
        let (min, max) = match el {
            PatternElement::Word(_) | PatternElement::Class(_) | PatternElement::One => (1, 1),
            PatternElement::OneOrMore => (1, usize::MAX),
            PatternElement::Any => (0, usize::MAX),
        };
        let available = tokens.len().saturating_sub(ti);
        if available < remaining_min {
            return false;
        }
        let upper = max.min(available - remaining_min);
        for len in min..=upper {
            let ok = match el {
                PatternElement::Word(w) => tokens[ti].eq_ignore_ascii_case(w),
                PatternElement::Class(c) => classes.contains(c, &tokens[ti]),
                _ => true,
            };
            if !ok {
                return false;
            }
            if el.is_anchor() {
                *progress = (*progress).max(ti + len);
            }
            spans.push(ti..ti + len);
            if self.step(ei + 1, ti + len, tokens, classes, spans, progress) {
                return true;
            }
            spans.pop();
        }
        false
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .elements
            .iter()
            .map(|e| match e {
                PatternElement::Word(w) => w.clone(),
                PatternElement::Class(c) => format!("<{c}>"),
                PatternElement::One => "_".into(),
                PatternElement::OneOrMore => "+".into(),
                PatternElement::Any => "*".into(),
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// Token spans bound to each pattern element.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Captures {
    pub spans: Vec<Range<usize>>,
}

/// Membership test for `<class>` pattern elements.
pub trait WordClasses {
    fn contains(&self, class: &str, word: &str) -> bool;
    fn has_class(&self, class: &str) -> bool;
}

/// Word lists keyed by class name, compared case-insensitively.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    classes: HashMap<String, HashSet<String>>,
}

impl Lexicon {
    pub fn new(classes: &BTreeMap<String, Vec<String>>) -> Self {
        let classes = classes
            .iter()
            .map(|(k, words)| (k.clone(), words.iter().map(|w| w.to_lowercase()).collect()))
            .collect();
        Self { classes }
    }

    pub fn insert(&mut self, class: &str, word: &str) {
        self.classes.entry(class.to_string()).or_default().insert(word.to_lowercase());
    }
}

impl WordClasses for Lexicon {
    fn contains(&self, class: &str, word: &str) -> bool {
        self.classes.get(class).is_some_and(|set| set.contains(&word.to_lowercase()))
    }

    fn has_class(&self, class: &str) -> bool {
        self.classes.contains_key(class)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum AtomPart {
    Text(String),
    Capture(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum TemplateNode {
    Atom(Vec<AtomPart>),
    Splice(usize),
    Sub { tree: String, captures: Vec<usize> },
    List(Vec<TemplateNode>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    source: String,
    nodes: Vec<TemplateNode>,
}

impl Template {
    pub fn parse(text: &str) -> Result<Template, TransductionSyntaxError> {
        let err = |reason: &str| TransductionSyntaxError::Template { template: text.to_string(), reason: reason.into() };
        let tokens = template_tokens(text);
        let mut pos = 0;
        let mut nodes = Vec::new();
        while pos < tokens.len() {
            nodes.push(parse_template_node(&tokens, &mut pos).map_err(|r| err(&r))?);
        }
        Ok(Template { source: text.to_string(), nodes })
    }

    /// Highest capture index referenced.
    pub fn max_capture(&self) -> usize {
        fn walk(n: &TemplateNode) -> usize {
            match n {
                TemplateNode::Atom(parts) => parts
                    .iter()
                    .map(|p| if let AtomPart::Capture(k) = p { *k } else { 0 })
                    .max()
                    .unwrap_or(0),
                TemplateNode::Splice(k) => *k,
                TemplateNode::Sub { captures, .. } => captures.iter().copied().max().unwrap_or(0),
                TemplateNode::List(items) => items.iter().map(walk).max().unwrap_or(0),
            }
        }
        self.nodes.iter().map(walk).max().unwrap_or(0)
    }

    pub fn subtree_refs(&self) -> Vec<&str> {
        fn walk<'a>(n: &'a TemplateNode, out: &mut Vec<&'a str>) {
            match n {
                TemplateNode::Sub { tree, .. } => out.push(tree),
                TemplateNode::List(items) => items.iter().for_each(|i| walk(i, out)),
                _ => {}
            }
        }
        let mut out = Vec::new();
        self.nodes.iter().for_each(|n| walk(n, &mut out));
        out
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

fn template_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut in_name = false;
    for c in text.chars() {
        if c == '|' {
            in_name = !in_name;
            cur.push(c);
            continue;
        }
        if in_name {
            cur.push(c);
            continue;
        }
        match c {
            '(' | ')' | '[' | ']' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(c.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn parse_capture_ref(tok: &str) -> Option<usize> {
    tok.strip_prefix('{')?.strip_suffix('}')?.parse().ok().filter(|&k| k > 0)
}

fn parse_template_node(tokens: &[String], pos: &mut usize) -> Result<TemplateNode, String> {
    let tok = tokens.get(*pos).ok_or("unexpected end")?;
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos).map(String::as_str) {
                    None => return Err("unbalanced (".into()),
                    Some(")") => {
                        *pos += 1;
                        return Ok(TemplateNode::List(items));
                    }
                    Some(_) => items.push(parse_template_node(tokens, pos)?),
                }
            }
        }
        "[" => {
            let tree = tokens.get(*pos).ok_or("missing tree name after [")?.clone();
            *pos += 1;
            let mut captures = Vec::new();
            loop {
                match tokens.get(*pos).map(String::as_str) {
                    None => return Err("unbalanced [".into()),
                    Some("]") => {
                        *pos += 1;
                        break;
                    }
                    Some(t) => {
                        let k = parse_capture_ref(t)
                            .or_else(|| t.parse().ok().filter(|&k: &usize| k > 0))
                            .ok_or_else(|| format!("bad capture {t:?} in sub-transduction"))?;
                        captures.push(k);
                        *pos += 1;
                    }
                }
            }
            if captures.is_empty() {
                return Err(format!("sub-transduction [{tree}] needs a capture"));
            }
            Ok(TemplateNode::Sub { tree, captures })
        }
        ")" | "]" => Err(format!("unexpected {tok}")),
        t => {
            if let Some(k) = parse_capture_ref(t) {
                return Ok(TemplateNode::Splice(k));
            }
            Ok(TemplateNode::Atom(parse_atom_parts(t)?))
        }
    }
}

fn parse_atom_parts(t: &str) -> Result<Vec<AtomPart>, String> {
    let mut parts = Vec::new();
    let mut rest = t;
    while let Some(open) = rest.find('{') {
        if open > 0 {
            parts.push(AtomPart::Text(rest[..open].to_string()));
        }
        let close = rest[open..].find('}').ok_or_else(|| format!("unclosed {{ in {t:?}"))? + open;
        let k: usize = rest[open + 1..close].parse().map_err(|_| format!("bad capture in {t:?}"))?;
        if k == 0 {
            return Err("captures are numbered from 1".into());
        }
        parts.push(AtomPart::Capture(k));
        rest = &rest[close + 1..];
    }
    if !rest.is_empty() {
        parts.push(AtomPart::Text(rest.to_string()));
    }
    Ok(parts)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Directive {
    /// Return the filled template.
    Output,
    /// Feed the filled template's words to another tree.
    Continue(String),
    /// Hand the filled template to a dialogue subschema.
    Subschema(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Branch { pattern: Pattern, children: Vec<Node> },
    Leaf { template: Template, directive: Directive },
}

impl Node {
    pub fn branch(pattern: &str, children: Vec<Node>) -> Node {
        Node::Branch { pattern: Pattern::parse(pattern).expect("valid pattern"), children }
    }

    pub fn leaf(template: &str) -> Node {
        Node::Leaf { template: Template::parse(template).expect("valid template"), directive: Directive::Output }
    }

    pub fn leaf_with(template: &str, directive: Directive) -> Node {
        Node::Leaf { template: Template::parse(template).expect("valid template"), directive }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TransductionTree {
    pub roots: Vec<Node>,
}

/// Successful transduction.
#[derive(Debug, Clone, PartialEq)]
pub enum Transduced {
    Output(Vec<Ulf>),
    Subschema { name: String, output: Vec<Ulf> },
}

impl Transduced {
    pub fn output(&self) -> &[Ulf] {
        match self {
            Transduced::Output(o) => o,
            Transduced::Subschema { output, .. } => output,
        }
    }

    /// The output as one tree (a list when the template had several nodes).
    pub fn ulf(&self) -> Ulf {
        single(self.output().to_vec())
    }

    /// The output's atoms joined by spaces.
    pub fn text(&self) -> String {
        words(self.output()).join(" ")
    }
}

fn single(mut nodes: Vec<Ulf>) -> Ulf {
    if nodes.len() == 1 {
        nodes.pop().expect("one node")
    } else {
        Ulf::List(nodes)
    }
}

/// Flattens a node sequence into its atoms.
pub fn words(nodes: &[Ulf]) -> Vec<String> {
    nodes.iter().flat_map(|n| n.atoms().into_iter().map(str::to_string)).collect()
}

/// Failed transduction: no leaf could be reached and filled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoMatch {
    /// Furthest input position reached by any partial match, counting
    /// through nested sub-transductions.
    pub deepest: usize,
}

/// A set of named trees that can reference each other.
pub trait TreeSet {
    fn tree(&self, name: &str) -> Option<&TransductionTree>;
}

impl TreeSet for BTreeMap<String, TransductionTree> {
    fn tree(&self, name: &str) -> Option<&TransductionTree> {
        self.get(name)
    }
}

/// Runs transductions over a tree set with a given lexicon.
pub struct Transducer<'a> {
    pub trees: &'a dyn TreeSet,
    pub classes: &'a dyn WordClasses,
}

struct Search {
    deepest: usize,
}

impl<'a> Transducer<'a> {
    pub fn new(trees: &'a dyn TreeSet, classes: &'a dyn WordClasses) -> Self {
        Self { trees, classes }
    }

    pub fn transduce(&self, tree: &str, tokens: &[String]) -> Result<Transduced, NoMatch> {
        let mut search = Search { deepest: 0 };
        self.run(tree, tokens, 0, 0, &mut search).ok_or(NoMatch { deepest: search.deepest })
    }

    /// Transduces with a tree that need not belong to the tree set.
    pub fn transduce_tree(&self, tree: &TransductionTree, tokens: &[String]) -> Result<Transduced, NoMatch> {
        let mut search = Search { deepest: 0 };
        self.search_nodes(&tree.roots, tokens, None, 0, 0, &mut search)
            .ok_or(NoMatch { deepest: search.deepest })
    }

    fn run(&self, tree: &str, tokens: &[String], offset: usize, depth: usize, search: &mut Search) -> Option<Transduced> {
        if depth > MAX_DEPTH {
            return None;
        }
        let t = self.trees.tree(tree)?;
        self.search_nodes(&t.roots, tokens, None, offset, depth, search)
    }

    fn search_nodes(
        &self,
        nodes: &[Node],
        tokens: &[String],
        captures: Option<&Captures>,
        offset: usize,
        depth: usize,
        search: &mut Search,
    ) -> Option<Transduced> {
        for node in nodes {
            match node {
                Node::Branch { pattern, children } => match pattern.match_tokens(tokens, self.classes) {
                    Ok(caps) => {
                        if let Some(done) = self.search_nodes(children, tokens, Some(&caps), offset, depth, search) {
                            return Some(done);
                        }
                    }
                    Err(progress) => search.deepest = search.deepest.max(offset + progress),
                },
                Node::Leaf { template, directive } => {
                    let empty = Captures::default();
                    let caps = captures.unwrap_or(&empty);
                    let Some(filled) = self.fill(template, tokens, caps, offset, depth, search) else {
                        continue;
                    };
                    match directive {
                        Directive::Output => return Some(Transduced::Output(filled)),
                        Directive::Subschema(name) => {
                            return Some(Transduced::Subschema { name: name.clone(), output: filled })
                        }
                        Directive::Continue(next) => {
                            let next_tokens = words(&filled);
                            if let Some(done) = self.run(next, &next_tokens, offset, depth + 1, search) {
                                return Some(done);
                            }
                        }
                    }
                }
            }
        }
        None
    }

    fn fill(
        &self,
        template: &Template,
        tokens: &[String],
        caps: &Captures,
        offset: usize,
        depth: usize,
        search: &mut Search,
    ) -> Option<Vec<Ulf>> {
        let mut out = Vec::new();
        for n in &template.nodes {
            self.fill_node(n, tokens, caps, offset, depth, search, &mut out)?;
        }
        Some(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn fill_node(
        &self,
        node: &TemplateNode,
        tokens: &[String],
        caps: &Captures,
        offset: usize,
        depth: usize,
        search: &mut Search,
        out: &mut Vec<Ulf>,
    ) -> Option<()> {
        let span = |k: usize| caps.spans.get(k - 1).cloned();
        match node {
            TemplateNode::Atom(parts) => {
                let mut s = String::new();
                for p in parts {
                    match p {
                        AtomPart::Text(t) => s.push_str(t),
                        AtomPart::Capture(k) => {
                            let r = span(*k)?;
                            if r.is_empty() {
                                return None;
                            }
                            s.push_str(&tokens[r].join("_"));
                        }
                    }
                }
                out.push(Ulf::Atom(s));
            }
            TemplateNode::Splice(k) => {
                let r = span(*k)?;
                out.extend(tokens[r].iter().map(|t| Ulf::Atom(t.clone())));
            }
            TemplateNode::Sub { tree, captures } => {
                let mut sub = Vec::new();
                let mut start = None;
                for &k in captures {
                    let r = span(k)?;
                    start.get_or_insert(r.start);
                    sub.extend_from_slice(&tokens[r]);
                }
                if sub.is_empty() {
                    return None;
                }
                let sub_offset = offset + start.unwrap_or(0);
                let result = self.run(tree, &sub, sub_offset, depth + 1, search)?;
                out.push(single(result.output().to_vec()));
            }
            TemplateNode::List(items) => {
                let mut inner = Vec::new();
                for i in items {
                    self.fill_node(i, tokens, caps, offset, depth, search, &mut inner)?;
                }
                out.push(Ulf::List(inner));
            }
        }
        Some(())
    }
}
