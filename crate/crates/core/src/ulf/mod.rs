//! Unscoped logical forms and the pattern-transduction parser that produces
//! them from normalized English questions.
//!
//! A ULF keeps the surface shape of the sentence: words carry a semantic type
//! suffix (`block.n`, `on.p`, `the.d`), block names are written `|Texaco|`,
//! and bare operators mark tense, plurality and the question (`pres`, `plur`,
//! `?`).

pub mod grammar;
mod normalize;
mod parser;
pub mod transduce;

use std::fmt;

use thiserror::Error;

pub use grammar::{DialogueSchema, Grammar, GrammarError, SchemaStep};
pub use normalize::{render_tokens, NormalizeError};
pub use parser::{parse_question, ParseError, ParseErrorKind};

/// Type suffixes an atom may carry.
pub const TYPE_SUFFIXES: [&str; 10] = ["d", "n", "v", "p", "a", "adv-a", "mod-a", "pro", "pq", "cc"];
/// Bare operators.
pub const OPERATORS: [&str; 9] = ["?", "plur", "pres", "past", "prog", "not", "k", "n+preds", "nquan"];

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ulf {
    Atom(String),
    List(Vec<Ulf>),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UlfError {
    #[error("unbalanced parentheses at byte {0}")]
    Unbalanced(usize),
    #[error("unterminated |name| starting at byte {0}")]
    UnterminatedName(usize),
    #[error("empty input")]
    Empty,
    #[error("trailing input after the expression at byte {0}")]
    Trailing(usize),
    #[error("atom {0:?} has no valid type suffix")]
    BadAtom(String),
    #[error("empty list")]
    EmptyList,
    #[error("question must end with the ? operator")]
    NotAQuestion,
}

impl Ulf {
    pub fn atom(s: impl Into<String>) -> Ulf {
        Ulf::Atom(s.into())
    }

    pub fn list(items: impl IntoIterator<Item = Ulf>) -> Ulf {
        Ulf::List(items.into_iter().collect())
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Ulf::Atom(a) => Some(a),
            Ulf::List(_) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Ulf]> {
        match self {
            Ulf::List(items) => Some(items),
            Ulf::Atom(_) => None,
        }
    }

    /// Reads the canonical parenthesized text form.
    pub fn read(text: &str) -> Result<Ulf, UlfError> {
        let mut reader = Reader { src: text.as_bytes(), pos: 0 };
        reader.skip_ws();
        if reader.pos >= reader.src.len() {
            return Err(UlfError::Empty);
        }
        let u = reader.expr()?;
        reader.skip_ws();
        if reader.pos < reader.src.len() {
            return Err(UlfError::Trailing(reader.pos));
        }
        Ok(u)
    }

    /// Checks atom typing recursively.
    pub fn check_well_formed(&self) -> Result<(), UlfError> {
        match self {
            Ulf::Atom(a) => {
                if is_well_typed_atom(a) {
                    Ok(())
                } else {
                    Err(UlfError::BadAtom(a.clone()))
                }
            }
            Ulf::List(items) if items.is_empty() => Err(UlfError::EmptyList),
            Ulf::List(items) => items.iter().try_for_each(Ulf::check_well_formed),
        }
    }

    /// A well-formed question: typed atoms and a top-level `?` terminator.
    pub fn check_question(&self) -> Result<(), UlfError> {
        self.check_well_formed()?;
        match self {
            Ulf::List(items) if items.len() >= 2 && items.last() == Some(&Ulf::atom("?")) => Ok(()),
            _ => Err(UlfError::NotAQuestion),
        }
    }

    /// All atoms in left-to-right order.
    pub fn atoms(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Ulf::Atom(a) => out.push(a),
            Ulf::List(items) => items.iter().for_each(|i| i.collect_atoms(out)),
        }
    }
}

/// Splits `word.suffix` into its parts when the suffix is a known type.
pub fn split_typed(atom: &str) -> Option<(&str, &str)> {
    TYPE_SUFFIXES.iter().find_map(|suffix| {
        let stem = atom.strip_suffix(suffix)?.strip_suffix('.')?;
        (!stem.is_empty() && !stem.contains('.')).then_some((stem, *suffix))
    })
}

/// `|Name|` atoms carry a block label.
pub fn name_of(atom: &str) -> Option<&str> {
    atom.strip_prefix('|')?.strip_suffix('|').filter(|s| !s.is_empty() && !s.contains('|'))
}

fn is_well_typed_atom(a: &str) -> bool {
    OPERATORS.contains(&a) || name_of(a).is_some() || split_typed(a).is_some()
}

/// Normalizes raw text with the bundled grammar.
pub fn normalize(text: &str) -> Result<Vec<String>, NormalizeError> {
    Grammar::bundled().normalize(text, &[])
}

/// Prints the canonical text form: single spaces, no trailing whitespace.
pub fn print_ulf(u: &Ulf) -> String {
    u.to_string()
}

impl fmt::Display for Ulf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ulf::Atom(a) => f.write_str(a),
            Ulf::List(items) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

struct Reader<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expr(&mut self) -> Result<Ulf, UlfError> {
        self.skip_ws();
        match self.src.get(self.pos) {
            None => Err(UlfError::Unbalanced(self.pos)),
            Some(b'(') => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.src.get(self.pos) {
                        None => return Err(UlfError::Unbalanced(self.pos)),
                        Some(b')') => {
                            self.pos += 1;
                            return Ok(Ulf::List(items));
                        }
                        Some(_) => items.push(self.expr()?),
                    }
                }
            }
            Some(b')') => Err(UlfError::Unbalanced(self.pos)),
            Some(_) => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Ulf, UlfError> {
        let start = self.pos;
        while let Some(&c) = self.src.get(self.pos) {
            match c {
                b'|' => {
                    let open = self.pos;
                    self.pos += 1;
                    while self.src.get(self.pos).is_some_and(|&c| c != b'|') {
                        self.pos += 1;
                    }
                    if self.pos >= self.src.len() {
                        return Err(UlfError::UnterminatedName(open));
                    }
                    self.pos += 1;
                }
                b'(' | b')' => break,
                c if c.is_ascii_whitespace() => break,
                _ => self.pos += 1,
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("split on ASCII boundaries");
        Ok(Ulf::Atom(text.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: &str = "(((Which.d (plur block.n)) ((pres be.v) (on.p (two.d (other.a (plur block.n)))))) ?)";

    #[test]
    fn atom_prints_bare() {
        assert_eq!(print_ulf(&Ulf::atom("block.n")), "block.n");
    }

    #[test]
    fn read_print_identity_on_reference_form() {
        let u = Ulf::read(GOLDEN).unwrap();
        assert_eq!(print_ulf(&u), GOLDEN);
        u.check_question().unwrap();
    }

    #[test]
    fn names_with_spaces() {
        let u = Ulf::read("(the.d (|Burger King| block.n))").unwrap();
        assert_eq!(u.atoms(), vec!["the.d", "|Burger King|", "block.n"]);
        u.check_well_formed().unwrap();
    }

    #[test]
    fn reader_errors() {
        assert_eq!(Ulf::read("(a.d"), Err(UlfError::Unbalanced(4)));
        assert_eq!(Ulf::read(")"), Err(UlfError::Unbalanced(0)));
        assert_eq!(Ulf::read("  "), Err(UlfError::Empty));
        assert!(matches!(Ulf::read("(|Tex block.n)"), Err(UlfError::UnterminatedName(_))));
        assert!(matches!(Ulf::read("a.d b.n"), Err(UlfError::Trailing(_))));
    }

    #[test]
    fn typing() {
        assert!(Ulf::read("(block the)").unwrap().check_well_formed().is_err());
        assert!(Ulf::read("(x.y.n)").unwrap().check_well_formed().is_err());
        assert_eq!(split_typed("to_the_left_of.p"), Some(("to_the_left_of", "p")));
        assert_eq!(split_typed("How.mod-a"), Some(("How", "mod-a")));
        assert_eq!(split_typed("block"), None);
        assert_eq!(Ulf::read("((the.d block.n) red.a)").unwrap().check_question(), Err(UlfError::NotAQuestion));
    }
}
