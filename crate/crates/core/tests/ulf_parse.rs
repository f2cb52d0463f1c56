use bwqa::ulf::{normalize, parse_question, ParseErrorKind};

fn parse(text: &str) -> Result<String, ParseErrorKind> {
    let toks = normalize(text).unwrap();
    parse_question(&toks).map(|u| u.to_string()).map_err(|e| e.kind)
}

#[test]
fn reference_question() {
    assert_eq!(
        parse("which blocks are on two other blocks ?").unwrap(),
        "(((Which.d (plur block.n)) ((pres be.v) (on.p (two.d (other.a (plur block.n)))))) ?)"
    );
}

#[test]
fn yes_no_relation() {
    assert_eq!(
        parse("is the Texaco block to the right of the McDonalds block ?").unwrap(),
        "(((the.d (|Texaco| block.n)) ((pres be.v) (to_the_right_of.p (the.d (|McDonalds| block.n))))) ?)"
    );
}

#[test]
fn composed_questions() {
    let cases = [
        ("What blocks are above the Mercedes block?", "(((What.d (plur block.n)) ((pres be.v) (above.p (the.d (|Mercedes| block.n))))) ?)"),
        ("What is the highest block?", "((What.pro ((pres be.v) (the.d (highest.a block.n)))) ?)"),
        (
            "How many blocks are between a red block and a blue block?",
            "((((nquan (How.mod-a many.a)) (plur block.n)) ((pres be.v) (between.p ((a.d (red.a block.n)) and.cc (a.d (blue.a block.n)))))) ?)",
        ),
        ("where is the Toyota block", "(((the.d (|Toyota| block.n)) ((pres be.v) where.pq)) ?)"),
        ("what color is the Burger King block?", "(((What.d color.n) ((pres be.v) (the.d (|Burger King| block.n)))) ?)"),
        (
            "is there a block on the Texaco block?",
            "((there.pro ((pres be.v) (a.d (n+preds block.n (on.p (the.d (|Texaco| block.n))))))) ?)",
        ),
        (
            "which blocks are not near the Toyota block?",
            "(((Which.d (plur block.n)) ((pres be.v) (not (near.p (the.d (|Toyota| block.n)))))) ?)",
        ),
        (
            "is the Target block directly on the Mercedes block?",
            "(((the.d (|Target| block.n)) ((pres be.v) (directly.adv-a (on.p (the.d (|Mercedes| block.n)))))) ?)",
        ),
        ("does the Toyota block touch the table?", "(((the.d (|Toyota| block.n)) ((pres touch.v) (the.d table.n))) ?)"),
        ("which block is the highest?", "(((Which.d block.n) ((pres be.v) (the.d (highest.a block.n)))) ?)"),
        ("how many red blocks are there?", "((((nquan (How.mod-a many.a)) (red.a (plur block.n))) ((pres be.v) there.pro)) ?)"),
        ("is the block on the table red?", "(((the.d (n+preds block.n (on.p (the.d table.n)))) ((pres be.v) red.a)) ?)"),
        (
            "which red blocks are near a blue block that is on the table?",
            "(((Which.d (red.a (plur block.n))) ((pres be.v) (near.p (a.d (n+preds (blue.a block.n) (on.p (the.d table.n))))))) ?)",
        ),
        ("is the Starbucks bloke clear?", "(((the.d (|Starbucks| block.n)) ((pres be.v) clear.a)) ?)"),
    ];
    for (q, want) in cases {
        assert_eq!(parse(q).as_deref(), Ok(want), "{q}");
    }
}

#[test]
fn rejected_constructions() {
    assert_eq!(parse("which blocks are by the NVidia block?"), Err(ParseErrorKind::UnsupportedPreposition("by".into())));
    assert_eq!(parse("how many blocks are touched by the Toyota block?"), Err(ParseErrorKind::Passive));
    assert_eq!(parse("what block did I just move?"), Err(ParseErrorKind::Indexical));
    assert_eq!(parse("what blocks can you see?"), Err(ParseErrorKind::Indexical));
    assert_eq!(parse("blocks blocks blocks"), Err(ParseErrorKind::Unparseable));
}

#[test]
fn failure_reports_longest_prefix() {
    let toks = normalize("is the Toyota block by the table").unwrap();
    let err = parse_question(&toks).unwrap_err();
    assert!(err.longest_prefix.starts_with("is the Toyota block"), "{}", err.longest_prefix);
}
