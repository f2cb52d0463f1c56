//! Constraint solver: resolves argument frames to weighted candidate sets,
//! applies the predicate to every argument combination and turns the
//! resulting certainty tuples into a categorized answer set.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::query::{
    ArgModifier, ArgumentFrame, ObjectType, PredModifier, PredicateContent, PredicateFrame, QuestionCategory, Referent,
    Restriction, SentenceFrame, Superlative,
};
use crate::scene::{Color, Entity, EntityId, Scene};
use crate::spatial::{Certainty, Constants, Location, RelationId, SpatialError, SpatialModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("the scene has no blocks")]
    EmptyScene,
    #[error("there is no block labeled {0:?}")]
    UnknownLabel(String),
    #[error(transparent)]
    Spatial(#[from] SpatialError),
}

impl SolveError {
    pub fn code(&self) -> &'static str {
        match self {
            SolveError::EmptyScene => "EMPTY_SCENE",
            SolveError::UnknownLabel(_) => "UNKNOWN_LABEL",
            SolveError::Spatial(_) => "UNSUPPORTED_PAIR",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub entity: EntityId,
    pub certainty: Certainty,
}

/// Weighted candidates for one argument, entities distinct.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CandidateSet {
    pub items: Vec<Candidate>,
}

impl CandidateSet {
    pub fn entities(&self) -> impl Iterator<Item = &EntityId> {
        self.items.iter().map(|c| &c.entity)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Arg1Binding {
    Single(EntityId),
    Pair(EntityId, EntityId),
}

/// `((arg0, arg1), certainty)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertaintyTuple {
    pub arg0: EntityId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arg1: Option<Arg1Binding>,
    pub certainty: Certainty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    Possibly,
    No,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredEntity {
    pub entity: EntityId,
    pub certainty: Certainty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerSet {
    pub category: QuestionCategory,
    /// All tuples, certainty descending.
    pub tuples: Vec<CertaintyTuple>,
    /// Per located entity, certainty at or above `theta_yes`.
    pub confident: Vec<ScoredEntity>,
    /// Per located entity, certainty in `[theta_maybe, theta_yes)`.
    pub uncertain: Vec<ScoredEntity>,
    pub presupposed_plural: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub colors: Vec<(EntityId, Color)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<Location>,
}

impl AnswerSet {
    fn empty(category: QuestionCategory) -> Self {
        Self {
            category,
            tuples: vec![],
            confident: vec![],
            uncertain: vec![],
            presupposed_plural: false,
            verdict: None,
            count: None,
            colors: vec![],
            location: None,
        }
    }
}

/// Sharpening used by "directly" and "fully".
pub fn sharpen(c: f64) -> f64 {
    ((c - 0.5) * 2.0).clamp(0.0, 1.0)
}

/// Band-pass used by "slightly": 1 at 0.5, 0 at both ends.
pub fn band_pass(c: f64) -> f64 {
    (1.0 - (2.0 * c - 1.0).abs()).clamp(0.0, 1.0)
}

pub fn apply_modifier(c: f64, m: PredModifier) -> f64 {
    match m {
        PredModifier::Not => 1.0 - c,
        PredModifier::Directly | PredModifier::Fully => sharpen(c),
        PredModifier::Slightly => band_pass(c),
    }
}

/// Applies relation modifiers in list order to every tuple.
pub fn apply_modifiers(tuples: &mut [CertaintyTuple], mods: &[PredModifier]) {
    for t in tuples.iter_mut() {
        let c = mods.iter().fold(t.certainty.value(), |c, m| apply_modifier(c, *m));
        t.certainty = Certainty::new(c);
    }
}

fn by_certainty_then_name(a: &ScoredEntity, b: &ScoredEntity) -> Ordering {
    b.certainty.value().partial_cmp(&a.certainty.value()).unwrap_or(Ordering::Equal).then_with(|| a.entity.cmp(&b.entity))
}

fn tuple_order(a: &CertaintyTuple, b: &CertaintyTuple) -> Ordering {
    b.certainty
        .value()
        .partial_cmp(&a.certainty.value())
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.arg0.cmp(&b.arg0))
        .then_with(|| format!("{:?}", a.arg1).cmp(&format!("{:?}", b.arg1)))
}

/// Solver bound to a scene snapshot.
pub struct Solver<'a> {
    pub model: SpatialModel<'a>,
}

enum Eval {
    Value(f64),
    /// The relation is not defined for this combination.
    Unsupported(SpatialError),
}

impl<'a> Solver<'a> {
    pub fn new(scene: &'a Scene, constants: &'a Constants) -> Self {
        Self { model: SpatialModel::new(scene, constants) }
    }

    fn scene(&self) -> &'a Scene {
        self.model.scene
    }

    fn theta_yes(&self) -> f64 {
        self.model.constants.theta_yes
    }

    fn theta_maybe(&self) -> f64 {
        self.model.constants.theta_maybe
    }

    fn entity(&self, id: &EntityId) -> Entity<'a> {
        self.scene().entity(id).expect("candidates come from the scene")
    }

    fn relation(&self, relation: RelationId, args: &[&EntityId]) -> Eval {
        let ents: Vec<Entity<'a>> = args.iter().map(|id| self.entity(id)).collect();
        match self.model.evaluate(relation, &ents) {
            Ok(c) => Eval::Value(c.value()),
            Err(e) => Eval::Unsupported(e),
        }
    }

    /// Candidate entities for an argument frame, filtered in the order type,
    /// id, color, "other", nested predicates, superlative.
    pub fn resolve_argument(&self, a: &ArgumentFrame, exclusions: &[EntityId]) -> Result<CandidateSet, SolveError> {
        let scene = self.scene();
        let mut items: Vec<Candidate> = scene
            .entities()
            .filter(|e| match a.object_type {
                ObjectType::Block => !e.is_table(),
                ObjectType::Table => e.is_table(),
                ObjectType::Entity => true,
            })
            .map(|e| Candidate { entity: e.id(), certainty: Certainty::ONE })
            .collect();

        if let Some(label) = &a.object_id {
            let block = scene.find_block(label).ok_or_else(|| SolveError::UnknownLabel(label.clone()))?;
            items.retain(|c| c.entity.name() == block.label);
        }
        for m in &a.modifiers {
            if let ArgModifier::Color(color) = m {
                items.retain(|c| scene.block(c.entity.name()).is_some_and(|b| b.color == *color) && !c.entity.is_table());
            }
        }
        if a.modifiers.contains(&ArgModifier::Other) || a.determiner.as_deref() == Some("other") {
            items.retain(|c| !exclusions.contains(&c.entity));
        }
        for m in &a.modifiers {
            if let ArgModifier::Predicate(r) = m {
                let mut kept = Vec::with_capacity(items.len());
                for c in items {
                    let v = self.restriction_value(&c.entity, r)?;
                    let certainty = c.certainty.value() * v;
                    if certainty >= self.theta_maybe() {
                        kept.push(Candidate { entity: c.entity, certainty: Certainty::new(certainty) });
                    }
                }
                items = kept;
            }
        }
        for m in &a.modifiers {
            if let ArgModifier::Superlative(s) = m {
                items = self.superlative(items, *s);
            }
        }
        Ok(CandidateSet { items })
    }

    fn superlative_key(&self, id: &EntityId, s: Superlative) -> f64 {
        let e = self.entity(id);
        match s {
            Superlative::Highest => e.prism().top,
            Superlative::Lowest => -e.prism().bottom,
            Superlative::Leftmost => -e.centroid().dot(self.scene().observer.lateral_axis()),
            Superlative::Rightmost => e.centroid().dot(self.scene().observer.lateral_axis()),
        }
    }

    fn superlative(&self, items: Vec<Candidate>, s: Superlative) -> Vec<Candidate> {
        let best = items.into_iter().filter(|c| !c.entity.is_table()).max_by(|a, b| {
            self.superlative_key(&a.entity, s)
                .partial_cmp(&self.superlative_key(&b.entity, s))
                .unwrap_or(Ordering::Equal)
                .then_with(|| b.entity.cmp(&a.entity))
        });
        best.into_iter().collect()
    }

    /// Certainty that `x` satisfies a nested predicate.
    fn restriction_value(&self, x: &EntityId, r: &Restriction) -> Result<f64, SolveError> {
        let frame = PredicateFrame {
            content: r.content,
            arg0: ArgumentFrame::new(ObjectType::Entity),
            arg1: r.arg1.clone(),
            pred_modifiers: r.pred_modifiers.clone(),
        };
        let arg0 = CandidateSet { items: vec![Candidate { entity: x.clone(), certainty: Certainty::ONE }] };
        let tuples = self.tuples_for(&frame, &arg0)?;
        Ok(tuples.iter().map(|t| t.certainty.value()).fold(0.0, f64::max))
    }

    fn resolve_referent(&self, r: &Referent, exclusions: &[EntityId]) -> Result<(CandidateSet, Option<CandidateSet>), SolveError> {
        match r {
            Referent::Single(a) => Ok((self.resolve_argument(a, exclusions)?, None)),
            Referent::Pair(a, b) => Ok((self.resolve_argument(a, exclusions)?, Some(self.resolve_argument(b, exclusions)?))),
        }
    }

    /// Resolves arg1 and evaluates the predicate for each arg0 candidate,
    /// modifiers included.
    fn tuples_for(&self, p: &PredicateFrame, arg0: &CandidateSet) -> Result<Vec<CertaintyTuple>, SolveError> {
        let exclusions: Vec<EntityId> = if arg0.len() == 1 { arg0.entities().cloned().collect() } else { vec![] };
        let arg1 = match &p.arg1 {
            Some(r) => Some(self.resolve_referent(r, &exclusions)?),
            None => None,
        };
        let mut tuples = self.apply_predicate(p, arg0, arg1.as_ref())?;
        apply_modifiers(&mut tuples, &p.pred_modifiers);
        Ok(tuples)
    }

    /// Evaluates the predicate over every argument combination. Tuples with
    /// arg0 = arg1 are skipped; a located entity that is itself a member of
    /// a referent pair gets certainty 0.
    pub fn apply_predicate(
        &self,
        p: &PredicateFrame,
        arg0: &CandidateSet,
        arg1: Option<&(CandidateSet, Option<CandidateSet>)>,
    ) -> Result<Vec<CertaintyTuple>, SolveError> {
        let scene = self.scene();
        let mut tuples = Vec::new();
        let mut unsupported: Option<SpatialError> = None;
        let push = |tuples: &mut Vec<CertaintyTuple>, arg0: &EntityId, arg1: Option<Arg1Binding>, c: f64| {
            tuples.push(CertaintyTuple { arg0: arg0.clone(), arg1, certainty: Certainty::new(c) });
        };
        for x in &arg0.items {
            let cx = x.certainty.value();
            match (p.content, arg1) {
                (PredicateContent::Relation(RelationId::Clear), _) => match self.relation(RelationId::Clear, &[&x.entity]) {
                    Eval::Value(v) => push(&mut tuples, &x.entity, None, v * cx),
                    Eval::Unsupported(e) => unsupported = Some(e),
                },
                (PredicateContent::Color(color), _) => {
                    let v = scene.block(x.entity.name()).filter(|_| !x.entity.is_table()).map_or(0.0, |b| {
                        if b.color == color {
                            1.0
                        } else {
                            0.0
                        }
                    });
                    push(&mut tuples, &x.entity, None, v * cx);
                }
                (PredicateContent::Identity, Some((ys, None))) => {
                    for y in &ys.items {
                        let v = if y.entity == x.entity { 1.0 } else { 0.0 };
                        push(&mut tuples, &x.entity, Some(Arg1Binding::Single(y.entity.clone())), v * cx * y.certainty.value());
                    }
                }
                (PredicateContent::Relation(relation), Some((ys, None))) => {
                    for y in &ys.items {
                        if y.entity == x.entity {
                            continue;
                        }
                        match self.relation(relation, &[&x.entity, &y.entity]) {
                            Eval::Value(v) => push(
                                &mut tuples,
                                &x.entity,
                                Some(Arg1Binding::Single(y.entity.clone())),
                                v * cx * y.certainty.value(),
                            ),
                            Eval::Unsupported(e) => unsupported = Some(e),
                        }
                    }
                }
                (PredicateContent::Relation(relation), Some((bs, Some(cs)))) => {
                    for b in &bs.items {
                        for c in &cs.items {
                            if b.entity == c.entity {
                                continue;
                            }
                            let binding = Some(Arg1Binding::Pair(b.entity.clone(), c.entity.clone()));
                            let weight = cx * b.certainty.value() * c.certainty.value();
                            if x.entity == b.entity || x.entity == c.entity {
                                push(&mut tuples, &x.entity, binding, 0.0);
                                continue;
                            }
                            let v = if relation == RelationId::Between {
                                self.relation(relation, &[&x.entity, &b.entity, &c.entity])
                            } else {
                                match (
                                    self.relation(relation, &[&x.entity, &b.entity]),
                                    self.relation(relation, &[&x.entity, &c.entity]),
                                ) {
                                    (Eval::Value(v1), Eval::Value(v2)) => Eval::Value(v1.min(v2)),
                                    (Eval::Unsupported(e), _) | (_, Eval::Unsupported(e)) => Eval::Unsupported(e),
                                }
                            };
                            match v {
                                Eval::Value(v) => push(&mut tuples, &x.entity, binding, v * weight),
                                Eval::Unsupported(e) => unsupported = Some(e),
                            }
                        }
                    }
                }
                (PredicateContent::Identity | PredicateContent::Exist, None) => push(&mut tuples, &x.entity, None, cx),
                _ => push(&mut tuples, &x.entity, None, cx),
            }
        }
        if tuples.is_empty() {
            if let Some(e) = unsupported {
                return Err(e.into());
            }
        }
        Ok(tuples)
    }

    /// Per-arg0 certainty: the k-th best tuple, where k is the numeral on
    /// arg1 (at-least reading) or 1; the worst tuple under a universal arg1.
    fn aggregate(&self, p: &PredicateFrame, arg0: &CandidateSet, tuples: &[CertaintyTuple]) -> Vec<ScoredEntity> {
        let arg1_frame = match &p.arg1 {
            Some(Referent::Single(a)) => Some(a),
            _ => None,
        };
        let k = arg1_frame.and_then(ArgumentFrame::number).unwrap_or(1).max(1) as usize;
        let universal = arg1_frame.is_some_and(ArgumentFrame::is_universal);
        let mut out: Vec<ScoredEntity> = arg0
            .items
            .iter()
            .map(|x| {
                let mut values: Vec<f64> = tuples.iter().filter(|t| t.arg0 == x.entity).map(|t| t.certainty.value()).collect();
                values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
                let v = if universal {
                    values.last().copied().unwrap_or(0.0)
                } else {
                    values.get(k - 1).copied().unwrap_or(0.0)
                };
                ScoredEntity { entity: x.entity.clone(), certainty: Certainty::new(v) }
            })
            .collect();
        out.sort_by(by_certainty_then_name);
        out
    }

    fn verdict(&self, c: f64) -> Verdict {
        if c >= self.theta_yes() {
            Verdict::Yes
        } else if c >= self.theta_maybe() {
            Verdict::Possibly
        } else {
            Verdict::No
        }
    }

    /// Answers a question frame.
    pub fn answer(&self, f: &SentenceFrame) -> Result<AnswerSet, SolveError> {
        if self.scene().blocks().is_empty() {
            return Err(SolveError::EmptyScene);
        }
        let p = &f.content;
        let mut out = AnswerSet::empty(f.category);
        out.presupposed_plural = p.arg0.is_plural();
        let mut arg0 = self.resolve_argument(&p.arg0, &[])?;
        // A wh-pronoun ranges over the table only where that reads naturally.
        if p.arg0.object_type == ObjectType::Entity && p.content != PredicateContent::Relation(RelationId::Touching) {
            arg0.items.retain(|c| !c.entity.is_table());
        }

        match f.category {
            QuestionCategory::WhereIs => {
                if let Some(top) = arg0.items.iter().find(|c| !c.entity.is_table()) {
                    let loc = self.model.where_is(self.entity(&top.entity))?;
                    out.confident.push(ScoredEntity { entity: top.entity.clone(), certainty: top.certainty });
                    out.location = Some(loc);
                }
                return Ok(out);
            }
            QuestionCategory::AttributeInquiry => {
                for c in &arg0.items {
                    if let Some(b) = self.scene().block(c.entity.name()).filter(|_| !c.entity.is_table()) {
                        out.colors.push((c.entity.clone(), b.color));
                    }
                }
                return Ok(out);
            }
            _ => {}
        }

        let mut tuples = self.tuples_for(p, &arg0)?;
        tuples.sort_by(tuple_order);
        let scores = self.aggregate(p, &arg0, &tuples);
        out.confident = scores.iter().filter(|s| s.certainty.value() >= self.theta_yes()).cloned().collect();
        out.uncertain = scores
            .iter()
            .filter(|s| (self.theta_maybe()..self.theta_yes()).contains(&s.certainty.value()))
            .cloned()
            .collect();
        out.tuples = tuples;

        match f.category {
            QuestionCategory::Counting => out.count = Some(out.confident.len()),
            QuestionCategory::Confirmation | QuestionCategory::Existential => {
                let c = if p.arg0.is_universal() {
                    if scores.is_empty() {
                        0.0
                    } else {
                        scores.iter().map(|s| s.certainty.value()).fold(1.0, f64::min)
                    }
                } else {
                    let k = p.arg0.number().unwrap_or(1).max(1) as usize;
                    scores.get(k - 1).map_or(0.0, |s| s.certainty.value())
                };
                out.verdict = Some(self.verdict(c));
            }
            _ => {}
        }
        Ok(out)
    }
}

/// Answers `frame` against `scene`.
pub fn answer(frame: &SentenceFrame, scene: &Scene, constants: &Constants) -> Result<AnswerSet, SolveError> {
    Solver::new(scene, constants).answer(frame)
}
