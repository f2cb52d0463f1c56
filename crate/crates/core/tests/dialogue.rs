mod common;

use bwqa::dialogue::{Phase, Session};
use bwqa::query::QuestionCategory;
use common::{bundled_scene, normalized, DIALOGUE};

#[test]
fn example_exchange_replays() {
    let mut s = Session::with_bundled(bundled_scene());
    for (input, want) in DIALOGUE {
        let turn = s.step(input);
        assert_eq!(normalized(&turn.text()), normalized(want), "{input:?}");
    }
    assert_eq!(s.phase(), Phase::Loop);
}

#[test]
fn exact_strings() {
    let mut s = Session::with_bundled(bundled_scene());
    let texts: Vec<String> = DIALOGUE.iter().map(|(q, _)| s.step(q).text()).collect();
    assert_eq!(texts[2], "Only the Target block.");
    assert_eq!(texts[4], "Two blocks: the McDonalds block and the Burger King block.");
}

#[test]
fn pronoun_follows_last_mention() {
    let mut s = Session::with_bundled(bundled_scene());
    s.step("");
    s.step("Where is the Toyota block?");
    let turn = s.step("What color is it?");
    assert_eq!(turn.question.as_deref().map(normalized), Some(normalized("what color is the Toyota block ?")));
    assert_eq!(turn.text(), "The Toyota block is green.");
    let turn = s.step("Is it on the Heineken block?");
    assert_eq!(turn.category, Some(QuestionCategory::Confirmation));
    assert_eq!(turn.text(), "Yes, it is.");
}

#[test]
fn failures_are_turns_not_panics() {
    let mut s = Session::with_bundled(bundled_scene());
    s.step("");
    for q in ["Which block did I move?", "Is the Texaco block by the SRI block?", "Is the Gucci block red?", "", "???"] {
        let turn = s.step(q);
        assert!(!turn.text().is_empty(), "{q:?}");
        assert!(turn.answer.is_none(), "{q:?}");
    }
    let turn = s.step("Which block did I move?");
    assert_eq!(turn.error.as_deref(), Some("UNSUPPORTED_INDEXICAL"));
    let turn = s.step("Is the Texaco block by the SRI block?");
    assert_eq!(turn.error.as_deref(), Some("UNSUPPORTED_PREPOSITION"));
}

#[test]
fn session_ends_on_goodbye() {
    let mut s = Session::with_bundled(bundled_scene());
    s.step("");
    let turn = s.step("goodbye");
    assert!(turn.ended);
    assert_eq!(s.phase(), Phase::Ended);
    assert_eq!(s.step("Where is the Toyota block?").text(), "This session has ended.");
}
