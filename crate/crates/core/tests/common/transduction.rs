//! A fixture tree with dead ends at several depths, and an oracle that
//! enumerates its leaves in order and takes the first reachable one.

use std::collections::BTreeMap;

use bwqa::ulf::transduce::{Directive, Lexicon, Node, Transducer, TransductionTree};
use rand::Rng;

pub const VOCAB: [&str; 7] = ["a", "b", "c", "d", "red", "blue", "x"];

/// (pattern, children) or a leaf that either yields its name or always fails.
#[derive(Debug, Clone)]
pub enum Spec {
    Branch(&'static str, Vec<Spec>),
    Leaf(&'static str),
    Dead,
}

use Spec::{Branch, Dead, Leaf};

pub fn fixture() -> Vec<Spec> {
    vec![
        Branch(
            "a *",
            vec![
                Branch("a b *", vec![Branch("a b c", vec![Dead]), Branch("a b <color> *", vec![Leaf("ab-color")]), Dead]),
                Branch("* d", vec![Dead, Leaf("a-d")]),
                Branch("a _ _", vec![Branch("a c _", vec![Dead]), Leaf("a-three")]),
                Dead,
            ],
        ),
        Branch("* <color> _", vec![Dead]),
        Branch("+ c +", vec![Branch("b c *", vec![Dead]), Leaf("c-mid")]),
        Branch("_", vec![Branch("<color>", vec![Leaf("one-color")]), Leaf("one")]),
        Branch("* x", vec![Branch("x x", vec![Leaf("xx")]), Branch("+ d x", vec![Dead])]),
        Branch("b +", vec![Leaf("b-rest")]),
    ]
}

fn build(spec: &Spec) -> Node {
    match spec {
        Branch(p, children) => Node::branch(p, children.iter().map(build).collect()),
        Leaf(name) => Node::leaf(name),
        // continues into a tree that does not exist
        Dead => Node::leaf_with("dead", Directive::Continue("missing".into())),
    }
}

fn lexicon() -> Lexicon {
    let mut m = BTreeMap::new();
    m.insert("color".to_string(), vec!["red".to_string(), "blue".to_string()]);
    Lexicon::new(&m)
}

/// The engine's answer: the leaf name, or None.
pub fn engine(tokens: &[String]) -> Option<String> {
    let mut trees = BTreeMap::new();
    trees.insert("t".to_string(), TransductionTree { roots: fixture().iter().map(build).collect() });
    let lx = lexicon();
    Transducer::new(&trees, &lx).transduce("t", tokens).ok().map(|t| t.text())
}

/// Whole-input match by exhaustive search over split points.
fn matches(pattern: &[&str], tokens: &[String]) -> bool {
    let Some((head, rest)) = pattern.split_first() else {
        return tokens.is_empty();
    };
    match *head {
        "*" => (0..=tokens.len()).any(|i| matches(rest, &tokens[i..])),
        "+" => (1..=tokens.len()).any(|i| matches(rest, &tokens[i..])),
        "_" => !tokens.is_empty() && matches(rest, &tokens[1..]),
        "<color>" => tokens.first().is_some_and(|t| t == "red" || t == "blue") && matches(rest, &tokens[1..]),
        w => tokens.first().is_some_and(|t| t.eq_ignore_ascii_case(w)) && matches(rest, &tokens[1..]),
    }
}

/// Every leaf in document order, each with the patterns above it.
fn leaves<'s>(specs: &'s [Spec], path: &mut Vec<&'s str>, out: &mut Vec<(Vec<&'s str>, Option<&'s str>)>) {
    for s in specs {
        match s {
            Branch(p, children) => {
                path.push(p);
                leaves(children, path, out);
                path.pop();
            }
            Leaf(name) => out.push((path.clone(), Some(name))),
            Dead => out.push((path.clone(), None)),
        }
    }
}

pub fn oracle(tokens: &[String]) -> Option<String> {
    let specs = fixture();
    let mut all = Vec::new();
    leaves(&specs, &mut Vec::new(), &mut all);
    all.into_iter()
        .find(|(path, leaf)| {
            leaf.is_some() && path.iter().all(|p| matches(&p.split_whitespace().collect::<Vec<_>>(), tokens))
        })
        .and_then(|(_, leaf)| leaf.map(str::to_string))
}

pub fn random_input(rng: &mut impl Rng) -> Vec<String> {
    let n = rng.random_range(1..=5);
    let mut out: Vec<String> = (0..n).map(|_| VOCAB[rng.random_range(0..VOCAB.len())].to_string()).collect();
    if rng.random_bool(0.4) {
        out[0] = "a".into();
    }
    out
}
