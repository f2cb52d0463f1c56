//! Brute-force answers for a battery of question templates, computed straight
//! from the relation functions and thresholds.

use std::collections::BTreeSet;

use bwqa::query::ulf_to_frame;
use bwqa::scene::{Color, EntityId, Scene};
use bwqa::solver::{answer, AnswerSet, Verdict};
use bwqa::spatial::{Constants, RelationId, SpatialModel};
use bwqa::ulf::Grammar;
use rand::seq::IndexedRandom;
use rand::Rng;

pub const RELATIONS: [(&str, RelationId); 9] = [
    ("on", RelationId::On),
    ("above", RelationId::Above),
    ("below", RelationId::Below),
    ("near", RelationId::Near),
    ("to the left of", RelationId::LeftOf),
    ("to the right of", RelationId::RightOf),
    ("in front of", RelationId::InFrontOf),
    ("behind", RelationId::Behind),
    ("touching", RelationId::Touching),
];

pub const TEMPLATES: usize = 21;

#[derive(Debug, Clone, PartialEq)]
pub enum Expected {
    Confident(BTreeSet<String>),
    Count(usize, BTreeSet<String>),
    Is(Verdict),
    Colored(Color),
    At(RelationId, String),
}

#[derive(Debug, Clone)]
pub struct Case {
    pub template: usize,
    pub question: String,
    pub expected: Expected,
}

/// Full pipeline: text, logical form, frame, answer set.
pub fn ask(scene: &Scene, grammar: &Grammar, k: &Constants, text: &str) -> Result<AnswerSet, String> {
    let labels: Vec<&str> = scene.labels().collect();
    let ulf = grammar.parse_text(text, &labels).map_err(|e| format!("parse: {e}"))?;
    let frame = ulf_to_frame(&ulf).map_err(|e| format!("frame: {e}"))?;
    answer(&frame, scene, k).map_err(|e| format!("solve: {e}"))
}

/// What the answer set says, in the shape of `expected`.
pub fn observed(a: &AnswerSet, expected: &Expected) -> Expected {
    let confident = || a.confident.iter().map(|s| s.entity.name().to_string()).collect::<BTreeSet<_>>();
    match expected {
        Expected::Confident(_) => Expected::Confident(confident()),
        Expected::Count(..) => Expected::Count(a.count.unwrap_or(usize::MAX), confident()),
        Expected::Is(_) => Expected::Is(a.verdict.unwrap_or(Verdict::No)),
        Expected::Colored(_) => match a.colors.as_slice() {
            [(_, c)] => Expected::Colored(*c),
            _ => Expected::Confident(BTreeSet::new()),
        },
        Expected::At(..) => match &a.location {
            Some(l) => Expected::At(l.relation, l.referent.name().to_string()),
            None => Expected::Confident(BTreeSet::new()),
        },
    }
}

struct Oracle<'a> {
    scene: &'a Scene,
    m: SpatialModel<'a>,
    labels: Vec<String>,
}

impl<'a> Oracle<'a> {
    fn rel(&self, r: RelationId, x: &str, y: &str) -> f64 {
        let e = |l: &str| self.scene.entity(&EntityId::block(l)).unwrap();
        self.m.evaluate(r, &[e(x), e(y)]).unwrap().value()
    }

    fn on_table(&self, x: &str) -> f64 {
        let e = self.scene.entity(&EntityId::block(x)).unwrap();
        self.m.on(e, self.scene.table_entity()).unwrap().value()
    }

    fn yes(&self, c: f64) -> bool {
        c >= self.m.constants.theta_yes
    }

    fn verdict(&self, c: f64) -> Verdict {
        if c >= self.m.constants.theta_yes {
            Verdict::Yes
        } else if c >= self.m.constants.theta_maybe {
            Verdict::Possibly
        } else {
            Verdict::No
        }
    }

    fn color(&self, x: &str) -> Color {
        self.scene.block(x).unwrap().color
    }

    fn blocks_where(&self, f: impl Fn(&str) -> bool) -> BTreeSet<String> {
        self.labels.iter().filter(|x| f(x)).cloned().collect()
    }

    fn others(&self, x: &str) -> impl Iterator<Item = &String> {
        let x = x.to_string();
        self.labels.iter().filter(move |y| **y != x)
    }

    fn location(&self, x: &str) -> (RelationId, String) {
        let a = self.scene.entity(&EntityId::block(x)).unwrap();
        let mut all = Vec::new();
        for referent in self.scene.entities().filter(|e| e.name() != x || e.is_table()) {
            for (rank, r) in RelationId::WHERE_IS_ORDER.into_iter().enumerate() {
                if referent.is_table() && !matches!(r, RelationId::On | RelationId::Near | RelationId::Touching) {
                    continue;
                }
                let v = self.m.evaluate(r, &[a, referent]).unwrap().value();
                all.push((v, rank, referent.name().to_string(), r));
            }
        }
        let top = all.iter().map(|t| t.0).fold(f64::MIN, f64::max);
        let best = all
            .into_iter()
            .filter(|t| t.0 >= top - 1e-9)
            .min_by(|p, q| p.1.cmp(&q.1).then_with(|| p.2.cmp(&q.2)))
            .unwrap();
        (best.3, best.2)
    }
}

fn sharpen(c: f64) -> f64 {
    ((c - 0.5) * 2.0).clamp(0.0, 1.0)
}

fn extreme(o: &Oracle<'_>, key: impl Fn(&str) -> f64) -> BTreeSet<String> {
    let mut best: Option<(&str, f64)> = None;
    for x in &o.labels {
        let v = key(x);
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((x, v));
        }
    }
    best.map(|(x, _)| x.to_string()).into_iter().collect()
}

/// One question from template `t` with its brute-force answer.
pub fn case(rng: &mut impl Rng, scene: &Scene, k: &Constants, t: usize) -> Case {
    let mut labels: Vec<String> = scene.labels().map(str::to_string).collect();
    labels.sort();
    let o = Oracle { scene, m: SpatialModel::new(scene, k), labels };
    let pick = |rng: &mut dyn rand::RngCore| -> (String, String) {
        let two: Vec<&String> = o.labels.choose_multiple(rng, 2).collect();
        (two[0].clone(), two[1].clone())
    };
    let (a, b) = pick(rng);
    let (phrase, r) = *RELATIONS.choose(rng).unwrap();
    let color = *Color::ALL.choose(rng).unwrap();
    let cn = color.as_str();
    use Expected::{At, Colored, Confident, Count, Is};
    let (question, expected) = match t {
        0 => (
            format!("which blocks are {phrase} the {a} block?"),
            Confident(o.blocks_where(|x| x != a && o.yes(o.rel(r, x, &a)))),
        ),
        1 => (format!("is the {a} block {phrase} the {b} block?"), Is(o.verdict(o.rel(r, &a, &b)))),
        2 => {
            let set = o.blocks_where(|x| x != a && o.yes(o.rel(r, x, &a)));
            (format!("how many blocks are {phrase} the {a} block?"), Count(set.len(), set))
        }
        3 => (
            format!("which blocks are not {phrase} the {a} block?"),
            Confident(o.blocks_where(|x| x != a && o.yes(1.0 - o.rel(r, x, &a)))),
        ),
        4 => (
            format!("which blocks are directly {phrase} the {a} block?"),
            Confident(o.blocks_where(|x| x != a && o.yes(sharpen(o.rel(r, x, &a))))),
        ),
        5 => (
            format!("which {cn} blocks are {phrase} the {a} block?"),
            Confident(o.blocks_where(|x| x != a && o.color(x) == color && o.yes(o.rel(r, x, &a)))),
        ),
        6 => {
            let best = o.others(&a).map(|x| o.rel(r, x, &a)).fold(0.0, f64::max);
            (format!("is there a block {phrase} the {a} block?"), Is(o.verdict(best)))
        }
        7 => (
            format!("which blocks are between the {a} block and the {b} block?"),
            Confident(o.blocks_where(|x| {
                if x == a || x == b {
                    return false;
                }
                let e = |l: &str| scene.entity(&EntityId::block(l)).unwrap();
                o.yes(o.m.between(e(x), e(&a), e(&b)).unwrap().value())
            })),
        ),
        8 => {
            let c = o.m.clear(scene.entity(&EntityId::block(&a)).unwrap()).unwrap().value();
            (format!("is the {a} block clear?"), Is(o.verdict(c)))
        }
        9 => ("which blocks are on the table?".to_string(), Confident(o.blocks_where(|x| o.yes(o.on_table(x))))),
        10 => (
            "which block is the highest?".to_string(),
            Confident(extreme(&o, |x| scene.block(x).unwrap().top())),
        ),
        11 => (format!("what color is the {a} block?"), Colored(o.color(&a))),
        12 => {
            let (rel, referent) = o.location(&a);
            (format!("where is the {a} block?"), At(rel, referent))
        }
        13 => (
            "which blocks are on two other blocks?".to_string(),
            Confident(o.blocks_where(|x| o.others(x).filter(|y| o.yes(o.rel(RelationId::On, x, y))).count() >= 2)),
        ),
        14 => (
            format!("which blocks are near every {cn} block?"),
            Confident(o.blocks_where(|x| {
                let ys: Vec<&String> = o.others(x).filter(|y| o.color(y) == color).collect();
                !ys.is_empty() && ys.iter().all(|y| o.yes(o.rel(RelationId::Near, x, y)))
            })),
        ),
        15 => {
            let set = o.blocks_where(|x| o.color(x) == color);
            (format!("how many {cn} blocks are there?"), Count(set.len(), set))
        }
        16 => (
            format!("does the {a} block touch the {b} block?"),
            Is(o.verdict(o.rel(RelationId::Touching, &a, &b))),
        ),
        17 => {
            let best = o.others(&a).filter(|y| o.color(y) == color).map(|y| o.rel(r, &a, y)).fold(0.0, f64::max);
            (format!("is the {a} block {phrase} a {cn} block?"), Is(o.verdict(best)))
        }
        18 => {
            let (phrase, r) = RELATIONS[rng.random_range(0..RELATIONS.len() - 1)];
            (
                format!("what is {phrase} the {a} block?"),
                Confident(o.blocks_where(|x| x != a && o.yes(o.rel(r, x, &a)))),
            )
        }
        19 => {
            let lateral = |x: &str| scene.block(x).unwrap().centroid.x;
            if rng.random_bool(0.5) {
                ("which block is the leftmost?".to_string(), Confident(extreme(&o, |x| -lateral(x))))
            } else {
                ("which block is the rightmost?".to_string(), Confident(extreme(&o, lateral)))
            }
        }
        20 => {
            let xs: Vec<&String> = o.labels.iter().filter(|x| o.color(x) == color).collect();
            let worst = if xs.is_empty() {
                0.0
            } else {
                xs.iter().map(|x| if **x == a { 0.0 } else { o.rel(r, x, &a) }).fold(1.0, f64::min)
            };
            (format!("is every {cn} block {phrase} the {a} block?"), Is(o.verdict(worst)))
        }
        _ => unreachable!("template {t}"),
    };
    Case { template: t, question, expected }
}

/// `n` cases cycling through every template.
pub fn battery(rng: &mut impl Rng, scene: &Scene, k: &Constants, n: usize) -> Vec<Case> {
    (0..n).map(|i| case(rng, scene, k, i % TEMPLATES)).collect()
}
