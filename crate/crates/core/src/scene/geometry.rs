//! Coordinate geometry shared by the scene model and the spatial relations.
//!
//! Table frame: x is lateral (positive to the observer's right), y is depth
//! (positive away from the observer), z is up with the table top at z = 0.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const UP: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    /// Unit vector in the same direction, or `None` for a (near) zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > 1e-12).then(|| self * (1.0 / n))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn xy(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(v: [f64; 3]) -> Self {
        Vec3::new(v[0], v[1], v[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: Vec3,
    pub max: Vec3,
}

impl BoundingBox {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        debug_assert!(min.x <= max.x && min.y <= max.y && min.z <= max.z);
        Self { min, max }
    }

    pub fn from_points(points: impl IntoIterator<Item = Vec3>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let (mut min, mut max) = (first, first);
        for p in it {
            min = Vec3::new(min.x.min(p.x), min.y.min(p.y), min.z.min(p.z));
            max = Vec3::new(max.x.max(p.x), max.y.max(p.y), max.z.max(p.z));
        }
        Some(Self { min, max })
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let (a, b) = (self.min, self.max);
        [
            Vec3::new(a.x, a.y, a.z),
            Vec3::new(b.x, a.y, a.z),
            Vec3::new(a.x, b.y, a.z),
            Vec3::new(b.x, b.y, a.z),
            Vec3::new(a.x, a.y, b.z),
            Vec3::new(b.x, a.y, b.z),
            Vec3::new(a.x, b.y, b.z),
            Vec3::new(b.x, b.y, b.z),
        ]
    }
}

/// A box that may be rotated about the vertical axis: a convex horizontal
/// footprint extruded over a vertical interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prism {
    /// Footprint corners in counter-clockwise order.
    pub footprint: [Vec2; 4],
    pub bottom: f64,
    pub top: f64,
}

impl Prism {
    pub fn new(center: Vec2, half_x: f64, half_y: f64, yaw: f64, bottom: f64, top: f64) -> Self {
        let (s, c) = yaw.sin_cos();
        let ax = Vec2::new(c, s) * half_x;
        let ay = Vec2::new(-s, c) * half_y;
        let footprint = [
            center - ax - ay,
            center + ax - ay,
            center + ax + ay,
            center - ax + ay,
        ];
        Self { footprint, bottom, top }
    }

    pub fn aabb(&self) -> BoundingBox {
        let pts = self.footprint.iter().flat_map(|p| {
            [Vec3::new(p.x, p.y, self.bottom), Vec3::new(p.x, p.y, self.top)]
        });
        BoundingBox::from_points(pts).expect("prism has corners")
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let f = &self.footprint;
        let mut out = [Vec3::ZERO; 8];
        for (i, p) in f.iter().enumerate() {
            out[i] = Vec3::new(p.x, p.y, self.bottom);
            out[i + 4] = Vec3::new(p.x, p.y, self.top);
        }
        out
    }

    pub fn footprint_area(&self) -> f64 {
        polygon_area(&self.footprint)
    }
}

/// Gap between two closed intervals, zero when they overlap.
pub fn interval_gap(a: (f64, f64), b: (f64, f64)) -> f64 {
    (b.0 - a.1).max(a.0 - b.1).max(0.0)
}

/// Length of the overlap of two closed intervals, zero when disjoint.
pub fn interval_overlap(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.1.min(b.1) - a.0.max(b.0)).max(0.0)
}

/// Minimum Euclidean distance between two prisms.
///
/// The vertical and horizontal parts separate: the squared distance between
/// two products of convex sets is the sum of the squared component distances.
pub fn prism_distance(a: &Prism, b: &Prism) -> f64 {
    let dz = interval_gap((a.bottom, a.top), (b.bottom, b.top));
    let dxy = convex_polygon_distance(&a.footprint, &b.footprint);
    (dz * dz + dxy * dxy).sqrt()
}

/// Penetration depth between two prisms: the smaller of the vertical overlap
/// and the minimum separating-axis overlap of the footprints.
pub fn prism_penetration(a: &Prism, b: &Prism) -> f64 {
    let dz = interval_overlap((a.bottom, a.top), (b.bottom, b.top));
    let dxy = sat_penetration(&a.footprint, &b.footprint);
    dz.min(dxy)
}

fn project(poly: &[Vec2], axis: Vec2) -> (f64, f64) {
    poly.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let d = p.dot(axis);
        (lo.min(d), hi.max(d))
    })
}

fn edge_axes(poly: &[Vec2]) -> impl Iterator<Item = Vec2> + '_ {
    (0..poly.len()).filter_map(move |i| {
        let e = poly[(i + 1) % poly.len()] - poly[i];
        let n = e.norm();
        (n > 1e-15).then(|| e.perp() * (1.0 / n))
    })
}

/// Minimum overlap over all separating axes; zero when the polygons are
/// disjoint or merely touch.
pub fn sat_penetration(a: &[Vec2], b: &[Vec2]) -> f64 {
    let mut best = f64::INFINITY;
    for axis in edge_axes(a).chain(edge_axes(b)) {
        let pa = project(a, axis);
        let pb = project(b, axis);
        let ov = interval_overlap(pa, pb);
        if ov <= 0.0 {
            return 0.0;
        }
        best = best.min(ov);
    }
    if best.is_finite() {
        best
    } else {
        0.0
    }
}

fn polygons_intersect(a: &[Vec2], b: &[Vec2]) -> bool {
    edge_axes(a).chain(edge_axes(b)).all(|axis| {
        let (pa, pb) = (project(a, axis), project(b, axis));
        pa.1 >= pb.0 && pb.1 >= pa.0
    })
}

fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    let t = if len2 > 0.0 { ((p - a).dot(ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + ab * t)).norm()
}

/// Distance between two convex polygons; zero when they intersect.
pub fn convex_polygon_distance(a: &[Vec2], b: &[Vec2]) -> f64 {
    if polygons_intersect(a, b) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for (poly, other) in [(a, b), (b, a)] {
        for &p in poly {
            for i in 0..other.len() {
                let d = point_segment_distance(p, other[i], other[(i + 1) % other.len()]);
                best = best.min(d);
            }
        }
    }
    best
}

pub fn polygon_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    let twice: f64 = (0..n).map(|i| poly[i].cross(poly[(i + 1) % n])).sum();
    twice.abs() * 0.5
}

/// Area of the intersection of two convex polygons (Sutherland-Hodgman clip).
/// Both inputs must be counter-clockwise.
pub fn convex_intersection_area(subject: &[Vec2], clip: &[Vec2]) -> f64 {
    let mut output: Vec<Vec2> = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if output.is_empty() {
            break;
        }
        let (c0, c1) = (clip[i], clip[(i + 1) % n]);
        let edge = c1 - c0;
        let inside = |p: Vec2| edge.cross(p - c0) >= -1e-15;
        let input = std::mem::take(&mut output);
        for j in 0..input.len() {
            let cur = input[j];
            let prev = input[(j + input.len() - 1) % input.len()];
            let (cin, pin) = (inside(cur), inside(prev));
            if cin != pin {
                let d = cur - prev;
                let denom = edge.cross(d);
                if denom.abs() > 1e-18 {
                    let t = edge.cross(c0 - prev) / denom;
                    output.push(prev + d * t);
                }
            }
            if cin {
                output.push(cur);
            }
        }
    }
    if output.len() < 3 {
        0.0
    } else {
        polygon_area(&output)
    }
}
