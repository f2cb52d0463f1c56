//! Soft spatial relations.
//!
//! Every relation maps its arguments to a [`Certainty`] in [0, 1], built from
//! geometric metrics that are either linearly combined or maxed. Converse
//! relations (`below`, `right_of`, `behind`) are defined by swapping the
//! arguments of their base relation, so converse identities hold exactly.

mod constants;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::geometry::convex_intersection_area;
use crate::scene::{
    box_gap, project_to_view_plane, scaled_centroid_distance, Entity, EntityId, Scene, Vec2,
};

pub use constants::{Constants, ConstantsError};

/// Degree to which a relation holds, always within [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Certainty(f64);

impl Certainty {
    pub const ZERO: Certainty = Certainty(0.0);
    pub const ONE: Certainty = Certainty(1.0);

    /// Clamps into [0, 1]; NaN maps to zero.
    pub fn new(v: f64) -> Self {
        if v.is_nan() {
            Certainty(0.0)
        } else {
            Certainty(v.clamp(0.0, 1.0))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Certainty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}", self.0)
    }
}

fn clamp01(v: f64) -> f64 {
    Certainty::new(v).value()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationId {
    Touching,
    On,
    Above,
    Below,
    Near,
    LeftOf,
    RightOf,
    InFrontOf,
    Behind,
    Between,
    Clear,
}

impl RelationId {
    pub const ALL: [RelationId; 11] = [
        RelationId::Touching,
        RelationId::On,
        RelationId::Above,
        RelationId::Below,
        RelationId::Near,
        RelationId::LeftOf,
        RelationId::RightOf,
        RelationId::InFrontOf,
        RelationId::Behind,
        RelationId::Between,
        RelationId::Clear,
    ];

    /// Binary relations in decreasing specificity; `where_is` breaks
    /// certainty ties in this order.
    pub const WHERE_IS_ORDER: [RelationId; 9] = [
        RelationId::On,
        RelationId::Above,
        RelationId::Below,
        RelationId::InFrontOf,
        RelationId::Behind,
        RelationId::LeftOf,
        RelationId::RightOf,
        RelationId::Touching,
        RelationId::Near,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RelationId::Touching => "touching",
            RelationId::On => "on",
            RelationId::Above => "above",
            RelationId::Below => "below",
            RelationId::Near => "near",
            RelationId::LeftOf => "left_of",
            RelationId::RightOf => "right_of",
            RelationId::InFrontOf => "in_front_of",
            RelationId::Behind => "behind",
            RelationId::Between => "between",
            RelationId::Clear => "clear",
        }
    }

    pub fn from_name(name: &str) -> Option<RelationId> {
        RelationId::ALL.into_iter().find(|r| r.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            RelationId::Clear => 1,
            RelationId::Between => 3,
            _ => 2,
        }
    }

    /// Whether the table may appear as the reference object.
    pub fn accepts_table_referent(self) -> bool {
        matches!(self, RelationId::On | RelationId::Near | RelationId::Touching)
    }
}

impl fmt::Display for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpatialError {
    #[error("relation {0} needs distinct arguments")]
    IdenticalArguments(RelationId),
    #[error("relation {relation} is not defined with {entity:?} in that position")]
    UnsupportedPair { relation: RelationId, entity: String },
    #[error("{0:?} is not a block")]
    NotABlock(String),
    #[error("unknown entity {0:?}")]
    UnknownEntity(String),
    #[error("relation {relation} takes {expected} arguments, got {got}")]
    Arity { relation: RelationId, expected: usize, got: usize },
}

/// Result of a "where is" query: the best relation and referent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub relation: RelationId,
    pub referent: EntityId,
    pub certainty: Certainty,
}

/// Relation evaluator bound to a scene snapshot and a constants table.
#[derive(Debug, Clone, Copy)]
pub struct SpatialModel<'a> {
    pub scene: &'a Scene,
    pub constants: &'a Constants,
}

type Rel = Result<Certainty, SpatialError>;

/// Certainties closer than this count as equal in `where_is`.
const WHERE_IS_TIE: f64 = 1e-9;

impl<'a> SpatialModel<'a> {
    pub fn new(scene: &'a Scene, constants: &'a Constants) -> Self {
        Self { scene, constants }
    }

    pub fn entity(&self, id: &EntityId) -> Result<Entity<'a>, SpatialError> {
        self.scene.entity(id).ok_or_else(|| SpatialError::UnknownEntity(id.name().to_string()))
    }

    fn distinct(relation: RelationId, a: Entity<'_>, b: Entity<'_>) -> Result<(), SpatialError> {
        if a.same_as(&b) {
            Err(SpatialError::IdenticalArguments(relation))
        } else {
            Ok(())
        }
    }

    fn no_table(relation: RelationId, e: Entity<'_>) -> Result<(), SpatialError> {
        if e.is_table() {
            Err(SpatialError::UnsupportedPair { relation, entity: e.name().to_string() })
        } else {
            Ok(())
        }
    }

    /// Evaluates `relation` over `args` (located object first).
    pub fn evaluate(&self, relation: RelationId, args: &[Entity<'a>]) -> Rel {
        if args.len() != relation.arity() {
            return Err(SpatialError::Arity { relation, expected: relation.arity(), got: args.len() });
        }
        match relation {
            RelationId::Touching => self.touching(args[0], args[1]),
            RelationId::On => self.on(args[0], args[1]),
            RelationId::Above => self.above(args[0], args[1]),
            RelationId::Below => self.below(args[0], args[1]),
            RelationId::Near => self.near(args[0], args[1]),
            RelationId::LeftOf => self.left_of(args[0], args[1]),
            RelationId::RightOf => self.right_of(args[0], args[1]),
            RelationId::InFrontOf => self.in_front_of(args[0], args[1]),
            RelationId::Behind => self.behind(args[0], args[1]),
            RelationId::Between => self.between(args[0], args[1], args[2]),
            RelationId::Clear => self.clear(args[0]),
        }
    }

    pub fn touching(&self, a: Entity<'_>, b: Entity<'_>) -> Rel {
        Self::distinct(RelationId::Touching, a, b)?;
        let gap = box_gap(a, b);
        Ok(Certainty::new(1.0 - gap / self.constants.touch_tolerance))
    }

    /// Fraction of `a`'s footprint lying over `b`'s top face.
    fn footprint_overlap(a: Entity<'_>, b: Entity<'_>) -> f64 {
        let (pa, pb) = (a.prism(), b.prism());
        let area = pa.footprint_area();
        if area <= 0.0 {
            return 0.0;
        }
        clamp01(convex_intersection_area(&pa.footprint, &pb.footprint) / area)
    }

    /// Vertical offset of `a`'s bottom over `b`'s top.
    fn vertical_offset(a: Entity<'_>, b: Entity<'_>) -> f64 {
        a.prism().bottom - b.prism().top
    }

    pub fn on(&self, a: Entity<'_>, b: Entity<'_>) -> Rel {
        Self::distinct(RelationId::On, a, b)?;
        Self::no_table(RelationId::On, a)?;
        let k = self.constants;
        let g = Self::vertical_offset(a, b);
        let frac = Self::footprint_overlap(a, b);
        let contact = if frac > 0.0 { clamp01(1.0 - g.abs() / k.touch_tolerance) } else { 0.0 };
        let overlap = if g > -k.touch_tolerance { frac } else { 0.0 };
        Ok(Certainty::new(k.on_contact_weight * contact + k.on_overlap_weight * overlap))
    }

    pub fn above(&self, a: Entity<'_>, b: Entity<'_>) -> Rel {
        Self::distinct(RelationId::Above, a, b)?;
        Self::no_table(RelationId::Above, a)?;
        Self::no_table(RelationId::Above, b)?;
        let k = self.constants;
        let g = Self::vertical_offset(a, b);
        let gate = clamp01((g + k.touch_tolerance) / k.touch_tolerance);
        if gate == 0.0 {
            return Ok(Certainty::ZERO);
        }
        let frac = Self::footprint_overlap(a, b);
        let offset = (a.centroid().xy() - b.centroid().xy()).norm();
        let size = (a.char_size() + b.char_size()) / 2.0;
        let align = clamp01(1.0 - offset / (k.above_alignment_range * size));
        Ok(Certainty::new(gate * (k.above_overlap_weight * frac + k.above_alignment_weight * align)))
    }

    pub fn below(&self, a: Entity<'_>, b: Entity<'_>) -> Rel {
        self.above(b, a).map_err(|e| relabel(e, RelationId::Below))
    }

    /// Context-free nearness from the scaled centroid distance. Pairs
    /// involving the table use the box gap instead, since the table's
    /// centroid says little about proximity to a flat surface.
    pub fn near_raw(&self, a: Entity<'_>, b: Entity<'_>) -> Rel {
        Self::distinct(RelationId::Near, a, b)?;
        let scaled = self.near_distance(a, b);
        let far = self.constants.near_far_distance;
        Ok(Certainty::new(1.0 - (scaled - 1.0) / (far - 1.0)))
    }

    fn near_distance(&self, a: Entity<'_>, b: Entity<'_>) -> f64 {
        if a.is_table() || b.is_table() {
            1.0 + box_gap(a, b) / crate::scene::TABLE_REFERENCE_SIZE
        } else {
            scaled_centroid_distance(a, b)
        }
    }

    /// `near_raw` boosted when `b` is the block closest to `a`, in proportion
    /// to its margin over the runner-up.
    pub fn near(&self, a: Entity<'_>, b: Entity<'_>) -> Rel {
        let raw = self.near_raw(a, b)?.value();
        if raw <= 0.0 || a.is_table() || b.is_table() {
            return Ok(Certainty::new(raw));
        }
        let d_b = self.near_distance(a, b);
        let mut runner_up = f64::INFINITY;
        for c in self.scene.block_entities() {
            if c.same_as(&a) || c.same_as(&b) {
                continue;
            }
            let d = self.near_distance(a, c);
            if d <= d_b {
                return Ok(Certainty::new(raw));
            }
            runner_up = runner_up.min(d);
        }
        let k = self.constants;
        let margin = if runner_up.is_infinite() || d_b <= 0.0 {
            1.0
        } else {
            clamp01((runner_up - d_b) / d_b)
        };
        let boosted = (raw + k.near_boost * margin).min(k.near_boost_cap);
        Ok(Certainty::new(raw.max(boosted)))
    }

    fn lateral(&self, a: Entity<'_>, b: Entity<'_>, relation: RelationId) -> Rel {
        Self::distinct(relation, a, b)?;
        Self::no_table(relation, a)?;
        Self::no_table(relation, b)?;
        let d = a.centroid() - b.centroid();
        let dist = d.norm();
        if dist <= 1e-12 {
            return Ok(Certainty::ZERO);
        }
        let leftward = -d.dot(self.scene.observer.lateral_axis());
        Ok(Certainty::new(leftward / dist))
    }

    /// Observer-relative: the cosine between the a-from-b displacement and
    /// the observer's left axis.
    pub fn left_of(&self, a: Entity<'_>, b: Entity<'_>) -> Rel {
        self.lateral(a, b, RelationId::LeftOf)
    }

    pub fn right_of(&self, a: Entity<'_>, b: Entity<'_>) -> Rel {
        self.lateral(b, a, RelationId::RightOf)
    }

    /// Viewer-based reading: `a` is nearer the observer and its image
    /// overlaps or nearly overlaps that of `b`.
    pub fn in_front_deictic(&self, a: Entity<'_>, b: Entity<'_>) -> f64 {
        let obs = &self.scene.observer;
        let (Ok(ra), Ok(rb)) = (project_to_view_plane(a, obs), project_to_view_plane(b, obs)) else {
            return 0.0;
        };
        let size = (a.char_size() + b.char_size()) / 2.0;
        let da = a.centroid().distance(obs.position);
        let db = b.centroid().distance(obs.position);
        let depth = clamp01((db - da) / (self.constants.deictic_depth_scale * size));
        if depth == 0.0 {
            return 0.0;
        }
        let image = |r: &crate::scene::ViewRegion| {
            let e = r.extent();
            e.x.max(e.y)
        };
        let s = (image(&ra) + image(&rb)) / 2.0;
        let cd = (ra.center - rb.center).norm();
        let overlap = clamp01(1.0 - (cd - s / 2.0) / s);
        depth * overlap
    }

    /// Table-based reading: `a` lies in a cone opening from `b` toward the
    /// front edge of the table.
    pub fn in_front_extrinsic(&self, a: Entity<'_>, b: Entity<'_>) -> f64 {
        let d = a.centroid().xy() - b.centroid().xy();
        let len = d.norm();
        if len <= 1e-12 {
            return 0.0;
        }
        let toward_front = Vec2::new(0.0, -1.0);
        let cos = (d.dot(toward_front) / len).clamp(-1.0, 1.0);
        if cos <= 0.0 {
            return 0.0;
        }
        let angle = cos.acos().to_degrees();
        clamp01(1.0 - angle / self.constants.cone_half_angle_deg)
    }

    pub fn in_front_of(&self, a: Entity<'_>, b: Entity<'_>) -> Rel {
        Self::distinct(RelationId::InFrontOf, a, b)?;
        Self::no_table(RelationId::InFrontOf, a)?;
        Self::no_table(RelationId::InFrontOf, b)?;
        Ok(Certainty::new(self.in_front_deictic(a, b).max(self.in_front_extrinsic(a, b))))
    }

    pub fn behind(&self, a: Entity<'_>, b: Entity<'_>) -> Rel {
        self.in_front_of(b, a).map_err(|e| relabel(e, RelationId::Behind))
    }

    /// `a` between `b` and `c`: its centroid projects inside the b-c segment
    /// (at least half its size from either end for full credit) and lies
    /// close to the segment. Both conditions are required.
    pub fn between(&self, a: Entity<'_>, b: Entity<'_>, c: Entity<'_>) -> Rel {
        let r = RelationId::Between;
        Self::distinct(r, a, b)?;
        Self::distinct(r, a, c)?;
        Self::distinct(r, b, c)?;
        for e in [a, b, c] {
            Self::no_table(r, e)?;
        }
        let (pa, pb, pc) = (a.centroid(), b.centroid(), c.centroid());
        let seg = pc - pb;
        let len2 = seg.dot(seg);
        if len2 <= 1e-24 {
            return Ok(Certainty::ZERO);
        }
        let t = (pa - pb).dot(seg) / len2;
        if t <= 0.0 || t >= 1.0 {
            return Ok(Certainty::ZERO);
        }
        let size = a.char_size();
        let along = clamp01(t.min(1.0 - t) * len2.sqrt() / (0.5 * size));
        let perp = (pa - (pb + seg * t)).norm();
        let close = clamp01(1.0 - perp / size);
        if along <= 0.0 || close <= 0.0 {
            return Ok(Certainty::ZERO);
        }
        let k = self.constants;
        Ok(Certainty::new(k.between_along_weight * along + k.between_perpendicular_weight * close))
    }

    /// One minus the strongest `on` of any other block resting on `a`.
    pub fn clear(&self, a: Entity<'_>) -> Rel {
        if a.is_table() {
            return Err(SpatialError::NotABlock(a.name().to_string()));
        }
        let mut covered: f64 = 0.0;
        for x in self.scene.block_entities() {
            if x.same_as(&a) {
                continue;
            }
            covered = covered.max(self.on(x, a)?.value());
        }
        Ok(Certainty::new(1.0 - covered))
    }

    /// Relation and referent with the highest certainty for `a`. Ties (within
    /// rounding noise) go to the more specific relation, then to the
    /// lexicographically smaller referent name.
    pub fn where_is(&self, a: Entity<'_>) -> Result<Location, SpatialError> {
        if a.is_table() {
            return Err(SpatialError::NotABlock(a.name().to_string()));
        }
        let mut best: Option<(f64, usize, &str, RelationId, Entity<'_>)> = None;
        for referent in self.scene.entities() {
            if referent.same_as(&a) {
                continue;
            }
            for (rank, relation) in RelationId::WHERE_IS_ORDER.into_iter().enumerate() {
                if referent.is_table() && !relation.accepts_table_referent() {
                    continue;
                }
                let v = self.evaluate(relation, &[a, referent])?.value();
                let better = match &best {
                    None => true,
                    Some((bv, br, bn, _, _)) => {
                        let tie = (v - *bv).abs() <= WHERE_IS_TIE;
                        (!tie && v > *bv) || (tie && (rank < *br || (rank == *br && referent.name() < *bn)))
                    }
                };
                if better {
                    best = Some((v, rank, referent.name(), relation, referent));
                }
            }
        }
        let (v, _, _, relation, referent) = best.ok_or_else(|| SpatialError::UnknownEntity(a.name().into()))?;
        Ok(Location { relation, referent: referent.id(), certainty: Certainty::new(v) })
    }
}

fn relabel(e: SpatialError, relation: RelationId) -> SpatialError {
    match e {
        SpatialError::IdenticalArguments(_) => SpatialError::IdenticalArguments(relation),
        SpatialError::UnsupportedPair { entity, .. } => SpatialError::UnsupportedPair { relation, entity },
        other => other,
    }
}
