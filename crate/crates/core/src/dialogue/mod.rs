//! Schema-driven sessions: gist extraction, pronoun resolution and the
//! question/answer loop.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::query::{render_frame, ulf_to_frame, QuestionCategory};
use crate::respond::{self, Failure, Response};
use crate::scene::{EntityId, Scene};
use crate::solver::{AnswerSet, Solver};
use crate::spatial::Constants;
use crate::ulf::transduce::{words, Transduced};
use crate::ulf::{print_ulf, render_tokens, Grammar, ParseErrorKind, SchemaStep};

const MAIN_SCHEMA: &str = "main";

/// A discourse entity mention.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mention {
    pub label: String,
    /// Index of the utterance the mention came from, increasing over the session.
    pub utterance: u32,
    /// Position within the utterance; 0 is the subject.
    pub rank: u32,
}

/// Entities mentioned so far, most recent last.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiscourseContext {
    pub mentions: Vec<Mention>,
    next_utterance: u32,
}

impl DiscourseContext {
    /// Records the labels of one utterance in order of appearance.
    pub fn add_utterance<'a>(&mut self, labels: impl IntoIterator<Item = &'a str>) {
        let utterance = self.next_utterance;
        let mut rank = 0;
        for label in labels {
            if self.mentions.iter().any(|m| m.utterance == utterance && m.label == label) {
                continue;
            }
            self.mentions.push(Mention { label: label.to_string(), utterance, rank });
            rank += 1;
        }
        if rank > 0 {
            self.next_utterance += 1;
        }
    }

    /// Most salient antecedent still present in `scene`: latest utterance
    /// first, subject before object within it.
    pub fn antecedent(&self, scene: &Scene) -> Option<&str> {
        self.mentions
            .iter()
            .filter(|m| scene.block(&m.label).is_some())
            .max_by(|a, b| a.utterance.cmp(&b.utterance).then(b.rank.cmp(&a.rank)))
            .map(|m| m.label.as_str())
    }
}

/// Labels of `scene` appearing in normalized tokens, in order.
pub fn labels_in<'a>(tokens: &'a [String], scene: &Scene) -> Vec<&'a str> {
    tokens.iter().filter(|t| scene.block(t).is_some()).map(String::as_str).collect()
}

/// Replaces "it", "that block", "this block", "that one" and "this one" with
/// a definite description of the antecedent. Returns `None` when a pronoun
/// is present but nothing resolves.
pub fn resolve_pronouns(tokens: &[String], ctx: &DiscourseContext, scene: &Scene) -> Option<Vec<String>> {
    let mut out = Vec::with_capacity(tokens.len() + 2);
    let mut i = 0;
    while i < tokens.len() {
        let t = tokens[i].as_str();
        let next = tokens.get(i + 1).map(String::as_str);
        let span = match (t, next) {
            ("it", _) => 1,
            ("that" | "this", Some("block" | "one")) => 2,
            _ => 0,
        };
        if span == 0 {
            out.push(tokens[i].clone());
            i += 1;
            continue;
        }
        let label = ctx.antecedent(scene)?;
        out.extend(["the".to_string(), label.to_string(), "block".to_string()]);
        i += span;
    }
    Some(out)
}

/// Everything a turn produced, for display and the transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Turn {
    pub input: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gist: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    /// The question after pronoun resolution.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub question: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ulf: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub category: Option<QuestionCategory>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub answer: Option<AnswerSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub utterances: Vec<String>,
    pub ended: bool,
    pub scene_revision: u64,
}

impl Turn {
    pub fn text(&self) -> String {
        self.utterances.join(" ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Start,
    Loop,
    Ended,
}

/// One user's conversation over a scene.
#[derive(Debug, Clone)]
pub struct Session {
    grammar: Arc<Grammar>,
    constants: Arc<Constants>,
    scene: Scene,
    context: DiscourseContext,
    phase: Phase,
}

/// Tokens handed from one schema step to the next.
struct Pending {
    tokens: Vec<String>,
}

impl Session {
    pub fn new(grammar: Arc<Grammar>, constants: Arc<Constants>, scene: Scene) -> Self {
        Self { grammar, constants, scene, context: DiscourseContext::default(), phase: Phase::Start }
    }

    pub fn with_bundled(scene: Scene) -> Self {
        Self::new(Arc::new(Grammar::bundled().clone()), Arc::new(Constants::default()), scene)
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn set_scene(&mut self, scene: Scene) {
        self.scene = scene;
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn context(&self) -> &DiscourseContext {
        &self.context
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn constants(&self) -> &Constants {
        &self.constants
    }

    fn scene_labels(&self) -> Vec<String> {
        self.scene.labels().map(str::to_string).collect()
    }

    /// Advances the schema with one user input. A fresh session greets
    /// first; a non-empty input on the same call is then handled as well.
    pub fn step(&mut self, input: &str) -> Turn {
        let mut turn = Turn { input: input.to_string(), scene_revision: self.scene.revision(), ..Turn::default() };
        let main = self.grammar.schema(MAIN_SCHEMA).cloned().unwrap_or_default();
        match self.phase {
            Phase::Ended => {
                turn.utterances.push("This session has ended.".into());
                turn.ended = true;
                return turn;
            }
            Phase::Start => {
                for step in &main.steps {
                    self.run_step(step, None, &mut turn);
                }
                self.phase = Phase::Loop;
                if input.trim().is_empty() {
                    return turn;
                }
            }
            Phase::Loop => {}
        }

        // The loop body from one Expect to the next.
        let mut consumed = false;
        let mut pending = None;
        for step in &main.repeat {
            match step {
                SchemaStep::Expect if consumed => break,
                SchemaStep::Expect => {
                    consumed = true;
                    pending = Some(self.understand(input, &mut turn));
                }
                SchemaStep::React(tree) => {
                    let Some((name, reaction)) = self.react(tree, pending.as_ref()) else { continue };
                    let sub = self.grammar.schema(&name).cloned().unwrap_or_default();
                    for s in sub.steps.iter().chain(&sub.repeat) {
                        self.run_step(s, Some(&reaction), &mut turn);
                    }
                }
                other => self.run_step(other, pending.as_ref(), &mut turn),
            }
            if self.phase == Phase::Ended {
                break;
            }
        }
        if turn.utterances.is_empty() {
            turn.utterances.push(respond::failure_text(&Failure::Parse(ParseErrorKind::Unparseable)));
        }
        turn.ended = self.phase == Phase::Ended;
        turn
    }

    // Gist and kind of the raw input.
    fn understand(&self, input: &str, turn: &mut Turn) -> Pending {
        let labels = self.scene_labels();
        let extra: Vec<&str> = labels.iter().map(String::as_str).collect();
        let tokens = match self.grammar.normalize(input, &extra) {
            Ok(t) => t,
            Err(_) => {
                turn.kind = Some("unknown".into());
                return Pending { tokens: vec!["unknown".into()] };
            }
        };
        let gist = match self.grammar.transduce("GIST", &tokens, &extra) {
            Ok(out) => words(out.output()),
            Err(_) => tokens,
        };
        let kind = match self.grammar.transduce("KIND", &gist, &extra) {
            Ok(out) => out.text(),
            Err(_) => "unknown".into(),
        };
        let mut gist = gist;
        if kind == "spatial-question" && gist.last().map(String::as_str) != Some("?") {
            gist.push("?".into());
        }
        if kind == "indexical" {
            turn.error = Some(ParseErrorKind::Indexical.code().into());
        }
        turn.gist = Some(render_tokens(&gist));
        turn.kind = Some(kind.clone());
        Pending { tokens: std::iter::once(kind).chain(gist).collect() }
    }

    // Subschema chosen by the reaction tree, with its output.
    fn react(&self, tree: &str, pending: Option<&Pending>) -> Option<(String, Pending)> {
        let pending = pending?;
        let labels = self.scene_labels();
        let extra: Vec<&str> = labels.iter().map(String::as_str).collect();
        match self.grammar.transduce(tree, &pending.tokens, &extra) {
            Ok(Transduced::Subschema { name, output }) => Some((name, Pending { tokens: words(&output) })),
            _ => Some(("clarify".into(), Pending { tokens: vec![] })),
        }
    }

    fn run_step(&mut self, step: &SchemaStep, pending: Option<&Pending>, turn: &mut Turn) {
        match step {
            SchemaStep::Say(text) => turn.utterances.push(text.clone()),
            SchemaStep::Answer => {
                let tokens = pending.map(|p| p.tokens.clone()).unwrap_or_default();
                let response = self.answer(&tokens, turn);
                turn.utterances.push(response.text);
            }
            SchemaStep::End => self.phase = Phase::Ended,
            SchemaStep::Subschema(name) => {
                let sub = self.grammar.schema(name).cloned().unwrap_or_default();
                for s in sub.steps.iter().chain(&sub.repeat) {
                    self.run_step(s, pending, turn);
                }
            }
            SchemaStep::Expect | SchemaStep::React(_) => {}
        }
    }

    /// Resolves, parses, solves and phrases a spatial question.
    fn answer(&mut self, tokens: &[String], turn: &mut Turn) -> Response {
        let Some(tokens) = resolve_pronouns(tokens, &self.context, &self.scene) else {
            turn.error = Some("UNRESOLVED_PRONOUN".into());
            return respond::failure(&Failure::UnresolvedPronoun);
        };
        turn.question = Some(render_tokens(&tokens));
        let mentioned: Vec<String> = labels_in(&tokens, &self.scene).into_iter().map(str::to_string).collect();
        self.context.add_utterance(mentioned.iter().map(String::as_str));

        let labels = self.scene_labels();
        let extra: Vec<&str> = labels.iter().map(String::as_str).collect();
        let ulf = match self.grammar.parse_question(&tokens, &extra) {
            Ok(u) => u,
            Err(e) => {
                turn.error = Some(e.kind.code().into());
                return respond::failure(&Failure::Parse(e.kind));
            }
        };
        turn.ulf = Some(print_ulf(&ulf));
        let frame = match ulf_to_frame(&ulf) {
            Ok(f) => f,
            Err(e) => {
                turn.error = Some("UNSUPPORTED_FRAME".into());
                return respond::failure(&Failure::Frame(e));
            }
        };
        turn.category = Some(frame.category);
        turn.frame = Some(render_frame(&frame));
        let answer = match Solver::new(&self.scene, &self.constants).answer(&frame) {
            Ok(a) => a,
            Err(e) => {
                turn.error = Some(e.code().into());
                return respond::failure(&Failure::Solve(e));
            }
        };
        let response = respond::generate(&answer, &frame);
        let mut named: Vec<&EntityId> = answer.confident.iter().chain(&answer.uncertain).map(|s| &s.entity).collect();
        if let Some(loc) = &answer.location {
            named.push(&loc.referent);
        }
        self.context.add_utterance(named.into_iter().filter(|e| !e.is_table()).map(|e| e.name()));
        turn.answer = Some(answer);
        response
    }
}
