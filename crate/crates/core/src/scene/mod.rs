//! The table-top world: a table, labeled colored cubes and an observer.
//!
//! A [`Scene`] is an immutable value. Mutations such as [`Scene::move_block`]
//! return a new scene with the revision bumped, so snapshots can be handed to
//! other threads freely.

pub mod geometry;
mod io;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use geometry::{BoundingBox, Prism, Vec2, Vec3};
pub use io::{load_scene, BlockDoc, ObserverDoc, SceneDoc, TableDoc};

/// Default cube side in meters.
pub const BLOCK_SIDE: f64 = 0.15;
pub const TABLE_SIZE: f64 = 1.5;
/// Nominal slab thickness used for the table's box.
pub const TABLE_THICKNESS: f64 = 0.05;
/// Interpenetration tolerance.
pub const PENETRATION_TOLERANCE: f64 = 0.005;
/// Support gap tolerance.
pub const SUPPORT_TOLERANCE: f64 = 0.005;
/// Characteristic size used for the table where a size ratio is unavoidable.
pub const TABLE_REFERENCE_SIZE: f64 = BLOCK_SIDE;
pub const DEFAULT_OBSERVER_POSITION: Vec3 = Vec3::new(0.0, -1.2, 0.6);

pub const TABLE_NAME: &str = "table";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SceneError {
    #[error("malformed scene document: {0}")]
    Malformed(String),
    #[error("duplicate block label {0:?}")]
    DuplicateLabel(String),
    #[error("invalid block label {0:?}")]
    InvalidLabel(String),
    #[error("invalid geometry for {label:?}: {reason}")]
    InvalidGeometry { label: String, reason: String },
    #[error("block {label:?} is not supported (gap {gap:.4} m to the nearest surface below)")]
    Unsupported { label: String, gap: f64 },
    #[error("blocks {a:?} and {b:?} interpenetrate by {depth:.4} m")]
    Interpenetrating { a: String, b: String, depth: f64 },
    #[error("unknown block {0:?}")]
    UnknownLabel(String),
    #[error("position ({x:.3}, {y:.3}) of {label:?} is outside the table")]
    OutOfBounds { label: String, x: f64, y: f64 },
}

impl SceneError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            SceneError::Malformed(_) => "MALFORMED_SCENE",
            SceneError::DuplicateLabel(_) => "DUPLICATE_LABEL",
            SceneError::InvalidLabel(_) => "INVALID_LABEL",
            SceneError::InvalidGeometry { .. } => "INVALID_GEOMETRY",
            SceneError::Unsupported { .. } => "UNSUPPORTED_BLOCK",
            SceneError::Interpenetrating { .. } => "INTERPENETRATION",
            SceneError::UnknownLabel(_) => "UNKNOWN_LABEL",
            SceneError::OutOfBounds { .. } => "OUT_OF_BOUNDS",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Green,
    Blue,
}

impl Color {
    pub const ALL: [Color; 3] = [Color::Red, Color::Green, Color::Blue];

    pub fn as_str(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Green => "green",
            Color::Blue => "blue",
        }
    }

    pub fn parse(word: &str) -> Option<Color> {
        match word.to_ascii_lowercase().as_str() {
            "red" => Some(Color::Red),
            "green" => Some(Color::Green),
            "blue" => Some(Color::Blue),
            _ => None,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub label: String,
    pub color: Color,
    pub centroid: Vec3,
    pub side: f64,
    /// Rotation about the vertical axis, radians.
    pub yaw: f64,
}

impl Block {
    pub fn new(label: impl Into<String>, color: Color, centroid: Vec3) -> Self {
        Self { label: label.into(), color, centroid, side: BLOCK_SIDE, yaw: 0.0 }
    }

    pub fn bottom(&self) -> f64 {
        self.centroid.z - self.side / 2.0
    }

    pub fn top(&self) -> f64 {
        self.centroid.z + self.side / 2.0
    }

    pub fn prism(&self) -> Prism {
        self.prism_at(self.centroid)
    }

    fn prism_at(&self, c: Vec3) -> Prism {
        let h = self.side / 2.0;
        Prism::new(c.xy(), h, h, self.yaw, c.z - h, c.z + h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table {
    pub width: f64,
    pub depth: f64,
}

impl Default for Table {
    fn default() -> Self {
        Self { width: TABLE_SIZE, depth: TABLE_SIZE }
    }
}

impl Table {
    pub fn prism(&self) -> Prism {
        Prism::new(Vec2::ZERO, self.width / 2.0, self.depth / 2.0, 0.0, -TABLE_THICKNESS, 0.0)
    }

    pub fn centroid(&self) -> Vec3 {
        Vec3::new(0.0, 0.0, -TABLE_THICKNESS / 2.0)
    }

    pub fn contains_xy(&self, x: f64, y: f64) -> bool {
        x.abs() <= self.width / 2.0 + 1e-12 && y.abs() <= self.depth / 2.0 + 1e-12
    }
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2::new(0.0, 0.0);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observer {
    pub position: Vec3,
    /// Unit view direction.
    pub view: Vec3,
}

impl Observer {
    /// An observer at `position` looking at the table center.
    pub fn looking_at_table(position: Vec3) -> Option<Self> {
        let view = (Vec3::ZERO - position).normalized()?;
        Some(Self { position, view })
    }

    /// Right and up axes of the view plane.
    pub fn basis(&self) -> (Vec3, Vec3) {
        let right = self
            .view
            .cross(Vec3::UP)
            .normalized()
            .unwrap_or(Vec3::new(1.0, 0.0, 0.0));
        let up = right.cross(self.view);
        (right, up)
    }

    /// Horizontal unit vector pointing to the observer's right.
    pub fn lateral_axis(&self) -> Vec3 {
        let (right, _) = self.basis();
        Vec3::new(right.x, right.y, 0.0).normalized().unwrap_or(Vec3::new(1.0, 0.0, 0.0))
    }
}

impl Default for Observer {
    fn default() -> Self {
        Self::looking_at_table(DEFAULT_OBSERVER_POSITION).expect("default observer is off-center")
    }
}

/// Identifier of a scene entity, stable across revisions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityId {
    Table,
    Block(String),
}

impl EntityId {
    pub fn block(label: impl Into<String>) -> Self {
        EntityId::Block(label.into())
    }

    pub fn name(&self) -> &str {
        match self {
            EntityId::Table => TABLE_NAME,
            EntityId::Block(l) => l,
        }
    }

    pub fn is_table(&self) -> bool {
        matches!(self, EntityId::Table)
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for EntityId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for EntityId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(if s == TABLE_NAME { EntityId::Table } else { EntityId::Block(s) })
    }
}

/// Borrowed view of a block or the table.
#[derive(Debug, Clone, Copy)]
pub enum Entity<'s> {
    Table(&'s Table),
    Block(&'s Block),
}

impl<'s> Entity<'s> {
    pub fn id(&self) -> EntityId {
        match self {
            Entity::Table(_) => EntityId::Table,
            Entity::Block(b) => EntityId::Block(b.label.clone()),
        }
    }

    pub fn name(&self) -> &'s str {
        match self {
            Entity::Table(_) => TABLE_NAME,
            Entity::Block(b) => &b.label,
        }
    }

    pub fn is_table(&self) -> bool {
        matches!(self, Entity::Table(_))
    }

    pub fn as_block(&self) -> Option<&'s Block> {
        match self {
            Entity::Block(b) => Some(b),
            Entity::Table(_) => None,
        }
    }

    pub fn prism(&self) -> Prism {
        match self {
            Entity::Table(t) => t.prism(),
            Entity::Block(b) => b.prism(),
        }
    }

    pub fn centroid(&self) -> Vec3 {
        match self {
            Entity::Table(t) => t.centroid(),
            Entity::Block(b) => b.centroid,
        }
    }

    /// Characteristic size: cube side, or the block-scale reference for the table.
    pub fn char_size(&self) -> f64 {
        match self {
            Entity::Table(_) => TABLE_REFERENCE_SIZE,
            Entity::Block(b) => b.side,
        }
    }

    pub fn same_as(&self, other: &Entity<'_>) -> bool {
        self.name() == other.name() && self.is_table() == other.is_table()
    }
}

/// Minimum distance between the two (yaw-rotated) boxes; zero on contact.
pub fn box_gap(a: Entity<'_>, b: Entity<'_>) -> f64 {
    geometry::prism_distance(&a.prism(), &b.prism())
}

/// Centroid distance divided by the mean characteristic size. Equal cubes in
/// face contact give exactly 1.
pub fn scaled_centroid_distance(a: Entity<'_>, b: Entity<'_>) -> f64 {
    let d = a.centroid().distance(b.centroid());
    d / ((a.char_size() + b.char_size()) / 2.0)
}

/// Perspective projection of an entity's box onto the view plane at unit
/// distance from the observer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewRegion {
    /// Projection of the centroid.
    pub center: Vec2,
    pub min: Vec2,
    pub max: Vec2,
    /// Distance of the centroid along the view direction.
    pub depth: f64,
}

impl ViewRegion {
    pub fn extent(&self) -> Vec2 {
        self.max - self.min
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{0:?} is not in front of the observer")]
pub struct BehindObserver(pub String);

pub fn project_to_view_plane(e: Entity<'_>, obs: &Observer) -> Result<ViewRegion, BehindObserver> {
    let (right, up) = obs.basis();
    let project = |p: Vec3| -> Option<(Vec2, f64)> {
        let d = p - obs.position;
        let depth = d.dot(obs.view);
        (depth > 1e-9).then(|| (Vec2::new(d.dot(right) / depth, d.dot(up) / depth), depth))
    };
    let behind = || BehindObserver(e.name().to_string());
    let (center, depth) = project(e.centroid()).ok_or_else(behind)?;
    let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in e.prism().corners() {
        let (p, _) = project(c).ok_or_else(behind)?;
        min = Vec2::new(min.x.min(p.x), min.y.min(p.y));
        max = Vec2::new(max.x.max(p.x), max.y.max(p.y));
    }
    Ok(ViewRegion { center, min, max, depth })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub table: Table,
    pub observer: Observer,
    blocks: Vec<Block>,
    revision: u64,
}

impl Default for Scene {
    fn default() -> Self {
        Self::new(Table::default(), Observer::default())
    }
}

impl Scene {
    pub fn new(table: Table, observer: Observer) -> Self {
        Self { table, observer, blocks: Vec::new(), revision: 0 }
    }

    /// Builds a scene from explicitly positioned blocks and checks every invariant.
    pub fn from_blocks(table: Table, observer: Observer, blocks: Vec<Block>) -> Result<Self, SceneError> {
        let scene = Self { table, observer, blocks, revision: 0 };
        scene.validate()?;
        Ok(scene)
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn block(&self, label: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.label == label)
    }

    /// Case-insensitive label lookup returning the canonical block.
    pub fn find_block(&self, label: &str) -> Option<&Block> {
        self.block(label)
            .or_else(|| self.blocks.iter().find(|b| b.label.eq_ignore_ascii_case(label)))
    }

    pub fn entity(&self, id: &EntityId) -> Option<Entity<'_>> {
        match id {
            EntityId::Table => Some(Entity::Table(&self.table)),
            EntityId::Block(l) => self.block(l).map(Entity::Block),
        }
    }

    pub fn table_entity(&self) -> Entity<'_> {
        Entity::Table(&self.table)
    }

    /// Blocks in scene order followed by the table.
    pub fn entities(&self) -> impl Iterator<Item = Entity<'_>> {
        self.blocks.iter().map(Entity::Block).chain(std::iter::once(Entity::Table(&self.table)))
    }

    pub fn block_entities(&self) -> impl Iterator<Item = Entity<'_>> {
        self.blocks.iter().map(Entity::Block)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.blocks.iter().map(|b| b.label.as_str())
    }

    /// Checks labels, geometry, bounds, non-penetration and support.
    pub fn validate(&self) -> Result<(), SceneError> {
        for (i, b) in self.blocks.iter().enumerate() {
            validate_block_shape(b)?;
            if self.blocks[..i].iter().any(|o| o.label == b.label) {
                return Err(SceneError::DuplicateLabel(b.label.clone()));
            }
            if !self.table.contains_xy(b.centroid.x, b.centroid.y) {
                return Err(SceneError::OutOfBounds {
                    label: b.label.clone(),
                    x: b.centroid.x,
                    y: b.centroid.y,
                });
            }
        }
        for (i, a) in self.blocks.iter().enumerate() {
            for b in &self.blocks[i + 1..] {
                let depth = geometry::prism_penetration(&a.prism(), &b.prism());
                if depth > PENETRATION_TOLERANCE {
                    return Err(SceneError::Interpenetrating {
                        a: a.label.clone(),
                        b: b.label.clone(),
                        depth,
                    });
                }
            }
        }
        for b in &self.blocks {
            let gap = self.support_gap(b);
            if gap > SUPPORT_TOLERANCE {
                return Err(SceneError::Unsupported { label: b.label.clone(), gap });
            }
        }
        Ok(())
    }

    /// Vertical gap from the block's bottom to the nearest supporting surface
    /// below it (table top or a block top under its footprint). Negative
    /// values mean the block sinks into that surface.
    fn support_gap(&self, b: &Block) -> f64 {
        let bottom = b.bottom();
        let fp = b.prism().footprint;
        let mut best = bottom;
        for o in &self.blocks {
            if o.label == b.label {
                continue;
            }
            let ofp = o.prism().footprint;
            if geometry::sat_penetration(&fp, &ofp) <= 0.0 {
                continue;
            }
            let gap = bottom - o.top();
            if gap >= -SUPPORT_TOLERANCE && gap.abs() < best.abs() {
                best = gap;
            }
        }
        best.abs()
    }

    /// Height at which a block with footprint `prism` dropped from
    /// `from_bottom` comes to rest.
    fn settle_bottom(&self, label: &str, prism: &Prism, from_bottom: f64) -> f64 {
        self.blocks
            .iter()
            .filter(|o| o.label != label)
            .filter(|o| geometry::sat_penetration(&prism.footprint, &o.prism().footprint) > PENETRATION_TOLERANCE)
            .map(Block::top)
            .filter(|&top| top <= from_bottom + PENETRATION_TOLERANCE)
            .fold(0.0, f64::max)
    }

    /// Moves a block to `target`, letting it fall onto the table or the
    /// highest block beneath it.
    pub fn move_block(&self, label: &str, target: Vec3) -> Result<Scene, SceneError> {
        let idx = self
            .blocks
            .iter()
            .position(|b| b.label == label)
            .ok_or_else(|| SceneError::UnknownLabel(label.to_string()))?;
        if !target.x.is_finite() || !target.y.is_finite() || target.z.is_nan() {
            return Err(SceneError::InvalidGeometry {
                label: label.to_string(),
                reason: "non-finite target".into(),
            });
        }
        if !self.table.contains_xy(target.x, target.y) {
            return Err(SceneError::OutOfBounds { label: label.to_string(), x: target.x, y: target.y });
        }
        let moving = &self.blocks[idx];
        let half = moving.side / 2.0;
        let probe = moving.prism_at(Vec3::new(target.x, target.y, 0.0));
        let bottom = self.settle_bottom(label, &probe, target.z - half);
        let settled = Vec3::new(target.x, target.y, bottom + half);
        let placed = moving.prism_at(settled);
        for (j, o) in self.blocks.iter().enumerate() {
            if j == idx {
                continue;
            }
            let depth = geometry::prism_penetration(&placed, &o.prism());
            if depth > PENETRATION_TOLERANCE {
                return Err(SceneError::Interpenetrating {
                    a: label.to_string(),
                    b: o.label.clone(),
                    depth,
                });
            }
        }
        let mut next = self.clone();
        next.blocks[idx].centroid = settled;
        // Blocks that rested on the moved one would now float.
        next.validate()?;
        next.revision = self.revision + 1;
        Ok(next)
    }

    /// Drops a block at (x, y) onto whatever is highest beneath it.
    pub fn drop_block(&self, label: &str, x: f64, y: f64) -> Result<Scene, SceneError> {
        self.move_block(label, Vec3::new(x, y, f64::INFINITY))
    }

    /// A copy of this scene with every block and the observer translated by
    /// `offset`. The result is not re-validated against table bounds.
    pub fn translated(&self, offset: Vec3) -> Scene {
        let mut s = self.clone();
        for b in &mut s.blocks {
            b.centroid = b.centroid + offset;
        }
        s.observer.position = s.observer.position + offset;
        s
    }

    /// Same scene with a block removed.
    pub fn without_block(&self, label: &str) -> Result<Scene, SceneError> {
        let mut s = self.clone();
        let before = s.blocks.len();
        s.blocks.retain(|b| b.label != label);
        if s.blocks.len() == before {
            return Err(SceneError::UnknownLabel(label.to_string()));
        }
        s.revision += 1;
        Ok(s)
    }

    pub(crate) fn with_revision(mut self, revision: u64) -> Scene {
        self.revision = revision;
        self
    }

    pub(crate) fn push_unchecked(&mut self, block: Block) {
        self.blocks.push(block);
    }
}

fn validate_block_shape(b: &Block) -> Result<(), SceneError> {
    let bad = |reason: &str| SceneError::InvalidGeometry { label: b.label.clone(), reason: reason.into() };
    if b.label.trim().is_empty() || b.label.eq_ignore_ascii_case(TABLE_NAME) {
        return Err(SceneError::InvalidLabel(b.label.clone()));
    }
    if !b.centroid.is_finite() || !b.yaw.is_finite() {
        return Err(bad("non-finite coordinates"));
    }
    if !(b.side > 0.0) || !b.side.is_finite() {
        return Err(bad("side must be positive"));
    }
    if b.bottom() < -SUPPORT_TOLERANCE {
        return Err(bad("block extends below the table top"));
    }
    Ok(())
}
