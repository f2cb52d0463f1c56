//! Grammar documents: word classes, block labels, rewrite tables, the
//! transduction trees and the dialogue schemas, loaded from JSON.
//!
//! Trees are nested arrays: a branch is `["pattern", child, ...]` and a leaf
//! is an object `{"template": "...", "continue": "TREE"}` where `continue`
//! (or `subschema`) is optional and absent means plain output.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::normalize::{NormalizeError, Normalizer};
use super::transduce::{
    Directive, Lexicon, NoMatch, Node, Pattern, Template, Transduced, Transducer, TransductionSyntaxError,
    TransductionTree, WordClasses,
};

/// Word class holding block labels.
pub const LABEL_CLASS: &str = "label";
/// Trees every grammar must define.
pub const REQUIRED_TREES: [&str; 4] = ["QUESTION", "UNSUPPORTED", "GIST", "KIND"];

static BUNDLED: OnceLock<Grammar> = OnceLock::new();
const BUNDLED_SOURCE: &str = include_str!("../../data/grammar.json");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrammarError {
    #[error("invalid grammar document: {0}")]
    Parse(String),
    #[error("tree {tree}: {source}")]
    Syntax { tree: String, source: TransductionSyntaxError },
    #[error("tree {tree}: malformed node {node}")]
    BadNode { tree: String, node: String },
    #[error("tree {tree}: unknown word class <{class}>")]
    UnknownClass { tree: String, class: String },
    #[error("tree {from}: reference to undefined tree {tree}")]
    UnknownTree { from: String, tree: String },
    #[error("{from}: reference to undefined schema {schema}")]
    UnknownSchema { from: String, schema: String },
    #[error("tree {tree}: template {template:?} uses capture {capture} but only {available} exist")]
    BadCapture { tree: String, template: String, capture: usize, available: usize },
    #[error("missing required tree {0}")]
    MissingTree(String),
    #[error("schema {schema}: {reason}")]
    Schema { schema: String, reason: String },
}

/// One action of a dialogue schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SchemaStep {
    /// System utterance.
    Say(String),
    /// Wait for the user's next input.
    Expect,
    /// Run the user's gist through a reaction tree; the tree's subschema
    /// directive picks what happens next.
    React(String),
    /// Run another schema's steps.
    Subschema(String),
    /// Answer the pending spatial question.
    Answer,
    /// Close the session.
    End,
}

/// A plan of dialogue actions: `steps` run once, then `repeat` loops.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DialogueSchema {
    #[serde(default)]
    pub steps: Vec<SchemaStep>,
    #[serde(default, rename = "loop")]
    pub repeat: Vec<SchemaStep>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct GrammarDoc {
    word_classes: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    labels: Vec<String>,
    #[serde(default)]
    aliases: BTreeMap<String, String>,
    #[serde(default)]
    corrections: BTreeMap<String, String>,
    #[serde(default)]
    phrases: BTreeMap<String, String>,
    trees: BTreeMap<String, Vec<Value>>,
    #[serde(default)]
    schemas: BTreeMap<String, DialogueSchema>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grammar {
    lexicon: Lexicon,
    labels: Vec<String>,
    normalizer: Normalizer,
    trees: BTreeMap<String, TransductionTree>,
    schemas: BTreeMap<String, DialogueSchema>,
}

/// Grammar word classes extended with scene labels.
pub struct SceneClasses<'a> {
    lexicon: &'a Lexicon,
    extra_labels: &'a [&'a str],
}

impl WordClasses for SceneClasses<'_> {
    fn contains(&self, class: &str, word: &str) -> bool {
        self.lexicon.contains(class, word)
            || (class == LABEL_CLASS && self.extra_labels.iter().any(|l| l.eq_ignore_ascii_case(word)))
    }

    fn has_class(&self, class: &str) -> bool {
        self.lexicon.has_class(class) || class == LABEL_CLASS
    }
}

impl Grammar {
    /// The grammar shipped with the crate.
    pub fn bundled() -> &'static Grammar {
        BUNDLED.get_or_init(|| Grammar::from_json(BUNDLED_SOURCE).expect("bundled grammar is valid"))
    }

    pub fn bundled_source() -> &'static str {
        BUNDLED_SOURCE
    }

    pub fn from_json(text: &str) -> Result<Grammar, GrammarError> {
        let doc: GrammarDoc = serde_json::from_str(text).map_err(|e| GrammarError::Parse(e.to_string()))?;

        let mut lexicon = Lexicon::new(&doc.word_classes);
        let mut normalizer = Normalizer::default();
        for l in &doc.labels {
            lexicon.insert(LABEL_CLASS, l);
            normalizer.labels.insert(l, l);
        }
        for (alias, label) in &doc.aliases {
            if !doc.labels.contains(label) {
                return Err(GrammarError::Parse(format!("alias {alias:?} names unknown label {label:?}")));
            }
            normalizer.labels.insert(alias, label);
        }
        for (from, to) in &doc.corrections {
            normalizer.corrections.insert(from, to);
        }
        for (from, to) in &doc.phrases {
            normalizer.phrases.insert(from, to);
        }

        let mut trees = BTreeMap::new();
        for (name, nodes) in &doc.trees {
            let roots = nodes.iter().map(|v| node_from_json(name, v)).collect::<Result<Vec<_>, _>>()?;
            trees.insert(name.clone(), TransductionTree { roots });
        }

        let g = Grammar { lexicon, labels: doc.labels, normalizer, trees, schemas: doc.schemas };
        g.check()?;
        Ok(g)
    }

    fn check(&self) -> Result<(), GrammarError> {
        for name in REQUIRED_TREES {
            if !self.trees.contains_key(name) {
                return Err(GrammarError::MissingTree(name.into()));
            }
        }
        for (name, tree) in &self.trees {
            for node in &tree.roots {
                self.check_node(name, node, 0)?;
            }
        }
        let main = self.schemas.get("main").ok_or_else(|| GrammarError::Schema {
            schema: "main".into(),
            reason: "a main schema is required".into(),
        })?;
        if !main.repeat.contains(&SchemaStep::Expect) {
            return Err(GrammarError::Schema {
                schema: "main".into(),
                reason: "the loop must expect user input".into(),
            });
        }
        for (name, schema) in &self.schemas {
            for step in schema.steps.iter().chain(&schema.repeat) {
                match step {
                    SchemaStep::React(tree) if !self.trees.contains_key(tree) => {
                        return Err(GrammarError::UnknownTree { from: format!("schema {name}"), tree: tree.clone() })
                    }
                    SchemaStep::Subschema(s) if name != "main" => {
                        return Err(GrammarError::Schema {
                            schema: name.clone(),
                            reason: format!("subschema {s} nested below main"),
                        })
                    }
                    SchemaStep::Subschema(s) if !self.schemas.contains_key(s) => {
                        return Err(GrammarError::UnknownSchema { from: format!("schema {name}"), schema: s.clone() })
                    }
                    _ => {}
                }
            }
            if name != "main" && !schema.repeat.is_empty() {
                return Err(GrammarError::Schema { schema: name.clone(), reason: "only main may loop".into() });
            }
        }
        Ok(())
    }

    fn check_node(&self, tree: &str, node: &Node, available: usize) -> Result<(), GrammarError> {
        match node {
            Node::Branch { pattern, children } => {
                for class in pattern.classes() {
                    if !self.lexicon.has_class(class) && class != LABEL_CLASS {
                        return Err(GrammarError::UnknownClass { tree: tree.into(), class: class.into() });
                    }
                }
                children.iter().try_for_each(|c| self.check_node(tree, c, pattern.elements.len()))
            }
            Node::Leaf { template, directive } => {
                let capture = template.max_capture();
                if capture > available {
                    return Err(GrammarError::BadCapture {
                        tree: tree.into(),
                        template: template.to_string(),
                        capture,
                        available,
                    });
                }
                for sub in template.subtree_refs() {
                    if !self.trees.contains_key(sub) {
                        return Err(GrammarError::UnknownTree { from: tree.into(), tree: sub.into() });
                    }
                }
                match directive {
                    Directive::Continue(t) if !self.trees.contains_key(t) => {
                        Err(GrammarError::UnknownTree { from: tree.into(), tree: t.clone() })
                    }
                    Directive::Subschema(s) if !self.schemas.contains_key(s) => {
                        Err(GrammarError::UnknownSchema { from: format!("tree {tree}"), schema: s.clone() })
                    }
                    _ => Ok(()),
                }
            }
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn tree(&self, name: &str) -> Option<&TransductionTree> {
        self.trees.get(name)
    }

    pub fn tree_names(&self) -> impl Iterator<Item = &str> {
        self.trees.keys().map(String::as_str)
    }

    pub fn schema(&self, name: &str) -> Option<&DialogueSchema> {
        self.schemas.get(name)
    }

    pub fn in_class(&self, class: &str, word: &str) -> bool {
        self.lexicon.contains(class, word)
    }

    /// Tokenizes and canonicalizes an utterance.
    pub fn normalize(&self, text: &str, extra_labels: &[&str]) -> Result<Vec<String>, NormalizeError> {
        self.normalizer.normalize(text, extra_labels)
    }

    pub fn classes<'a>(&'a self, extra_labels: &'a [&'a str]) -> SceneClasses<'a> {
        SceneClasses { lexicon: &self.lexicon, extra_labels }
    }

    /// Runs the named tree over `tokens`.
    pub fn transduce(&self, tree: &str, tokens: &[String], extra_labels: &[&str]) -> Result<Transduced, NoMatch> {
        let classes = self.classes(extra_labels);
        Transducer::new(&self.trees, &classes).transduce(tree, tokens)
    }
}

fn node_from_json(tree: &str, v: &Value) -> Result<Node, GrammarError> {
    let bad = || GrammarError::BadNode { tree: tree.into(), node: v.to_string() };
    let syntax = |source| GrammarError::Syntax { tree: tree.into(), source };
    match v {
        Value::Array(items) => {
            let (head, rest) = items.split_first().ok_or_else(bad)?;
            let pattern = Pattern::parse(head.as_str().ok_or_else(bad)?).map_err(syntax)?;
            let children = rest.iter().map(|c| node_from_json(tree, c)).collect::<Result<Vec<_>, _>>()?;
            if children.is_empty() {
                return Err(bad());
            }
            Ok(Node::Branch { pattern, children })
        }
        Value::Object(map) => {
            let template = map.get("template").and_then(Value::as_str).ok_or_else(bad)?;
            let template = Template::parse(template).map_err(syntax)?;
            let text = |k: &str| map.get(k).map(|x| x.as_str().map(str::to_string).ok_or_else(bad)).transpose();
            let directive = match (text("continue")?, text("subschema")?) {
                (None, None) => Directive::Output,
                (Some(t), None) => Directive::Continue(t),
                (None, Some(s)) => Directive::Subschema(s),
                (Some(_), Some(_)) => return Err(bad()),
            };
            if map.keys().any(|k| !matches!(k.as_str(), "template" | "continue" | "subschema")) {
                return Err(bad());
            }
            Ok(Node::Leaf { template, directive })
        }
        _ => Err(bad()),
    }
}
