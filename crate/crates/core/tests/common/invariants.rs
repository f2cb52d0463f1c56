//! Randomized spatial invariant checks. Each check builds its own scene from
//! the rng and returns a description of the first violation.

use bwqa::scene::{scaled_centroid_distance, Block, Color, Entity, Observer, Scene, Table, Vec3, BLOCK_SIDE};
use bwqa::spatial::{Constants, RelationId, SpatialModel};
use rand::Rng;

use super::random_scene;

pub type Check = fn(&mut dyn rand::RngCore, &Constants) -> Result<(), String>;

pub const ALL: [(&str, Check); 6] = [
    ("certainty bounds", certainty_bounds),
    ("converse identities", converses),
    ("touching symmetry", touching_symmetry),
    ("translation invariance", translation_invariance),
    ("near ranking under boost", near_ranking),
    ("face-contact scaled distance", face_contact_distance),
];

fn scene(rng: &mut dyn rand::RngCore) -> Scene {
    let n = rng.random_range(3..=6);
    random_scene(rng, n)
}

fn pair<'s>(rng: &mut dyn rand::RngCore, s: &'s Scene) -> (Entity<'s>, Entity<'s>) {
    let blocks: Vec<Entity<'s>> = s.block_entities().collect();
    let i = rng.random_range(0..blocks.len());
    let mut j = rng.random_range(0..blocks.len() - 1);
    if j >= i {
        j += 1;
    }
    (blocks[i], blocks[j])
}

pub fn certainty_bounds(rng: &mut dyn rand::RngCore, k: &Constants) -> Result<(), String> {
    let s = scene(rng);
    let m = SpatialModel::new(&s, k);
    let ents: Vec<Entity<'_>> = s.entities().collect();
    for r in RelationId::ALL {
        let n = r.arity();
        for _ in 0..4 {
            let args: Vec<Entity<'_>> = (0..n).map(|_| ents[rng.random_range(0..ents.len())]).collect();
            if let Ok(c) = m.evaluate(r, &args) {
                let v = c.value();
                if !(0.0..=1.0).contains(&v) {
                    return Err(format!("{r}{:?} = {v}", args.iter().map(|e| e.name()).collect::<Vec<_>>()));
                }
            }
        }
    }
    Ok(())
}

pub fn converses(rng: &mut dyn rand::RngCore, k: &Constants) -> Result<(), String> {
    let s = scene(rng);
    let m = SpatialModel::new(&s, k);
    let (a, b) = pair(rng, &s);
    let pairs = [
        (m.left_of(a, b), m.right_of(b, a), "left/right"),
        (m.in_front_of(a, b), m.behind(b, a), "front/behind"),
        (m.above(a, b), m.below(b, a), "above/below"),
    ];
    for (x, y, name) in pairs {
        let (x, y) = (x.map_err(|e| e.to_string())?.value(), y.map_err(|e| e.to_string())?.value());
        if (x - y).abs() > 1e-12 {
            return Err(format!("{name} for {} and {}: {x} vs {y}", a.name(), b.name()));
        }
    }
    Ok(())
}

pub fn touching_symmetry(rng: &mut dyn rand::RngCore, k: &Constants) -> Result<(), String> {
    let s = scene(rng);
    let m = SpatialModel::new(&s, k);
    let (a, b) = if rng.random_bool(0.25) {
        let blocks: Vec<Entity<'_>> = s.block_entities().collect();
        (blocks[rng.random_range(0..blocks.len())], s.table_entity())
    } else {
        pair(rng, &s)
    };
    let ab = m.touching(a, b).map_err(|e| e.to_string())?.value();
    let ba = m.touching(b, a).map_err(|e| e.to_string())?.value();
    if ab != ba {
        return Err(format!("touching({}, {}) = {ab}, reversed {ba}", a.name(), b.name()));
    }
    Ok(())
}

/// Block-to-block relations only: the table stays put.
pub fn translation_invariance(rng: &mut dyn rand::RngCore, k: &Constants) -> Result<(), String> {
    let s = scene(rng);
    let offset = Vec3::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3), rng.random_range(-0.1..0.1));
    let t = s.translated(offset);
    let (m, mt) = (SpatialModel::new(&s, k), SpatialModel::new(&t, k));
    let labels: Vec<String> = s.labels().map(str::to_string).collect();
    fn ent<'s>(sc: &'s Scene, l: &str) -> Entity<'s> {
        sc.entity(&bwqa::scene::EntityId::block(l)).unwrap()
    }
    for r in RelationId::ALL {
        let n = r.arity();
        if n > labels.len() {
            continue;
        }
        let args: Vec<&str> = (0..n).map(|_| labels[rng.random_range(0..labels.len())].as_str()).collect();
        let here: Vec<Entity<'_>> = args.iter().map(|l| ent(&s, l)).collect();
        let there: Vec<Entity<'_>> = args.iter().map(|l| ent(&t, l)).collect();
        match (m.evaluate(r, &here), mt.evaluate(r, &there)) {
            (Ok(x), Ok(y)) => {
                if (x.value() - y.value()).abs() > 1e-9 {
                    return Err(format!("{r}{args:?}: {} vs {} after {offset:?}", x.value(), y.value()));
                }
            }
            (Err(_), Err(_)) => {}
            (x, y) => return Err(format!("{r}{args:?}: {x:?} vs {y:?}")),
        }
    }
    Ok(())
}

/// The boost for the nearest referent never reorders referents.
pub fn near_ranking(rng: &mut dyn rand::RngCore, k: &Constants) -> Result<(), String> {
    let s = scene(rng);
    let m = SpatialModel::new(&s, k);
    let blocks: Vec<Entity<'_>> = s.block_entities().collect();
    let a = blocks[rng.random_range(0..blocks.len())];
    let scores: Vec<(f64, f64, &str)> = blocks
        .iter()
        .filter(|b| !b.same_as(&a))
        .map(|b| (m.near_raw(a, *b).unwrap().value(), m.near(a, *b).unwrap().value(), b.name()))
        .collect();
    for x in &scores {
        if x.1 < x.0 {
            return Err(format!("near({}, {}) = {} below raw {}", a.name(), x.2, x.1, x.0));
        }
        for y in &scores {
            if x.0 > y.0 && x.1 < y.1 {
                return Err(format!("referents {} and {} of {} swap order", x.2, y.2, a.name()));
            }
        }
    }
    Ok(())
}

pub fn face_contact_distance(rng: &mut dyn rand::RngCore, _k: &Constants) -> Result<(), String> {
    let yaw = rng.random_range(0.0..std::f64::consts::TAU);
    let h = BLOCK_SIDE / 2.0;
    let p = Vec3::new(rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4), h);
    let face = rng.random_range(0..5);
    let offset = if face == 4 {
        Vec3::new(0.0, 0.0, BLOCK_SIDE)
    } else {
        let ang = yaw + face as f64 * std::f64::consts::FRAC_PI_2;
        Vec3::new(ang.cos() * BLOCK_SIDE, ang.sin() * BLOCK_SIDE, 0.0)
    };
    let mut a = Block::new("A", Color::Red, p);
    let mut b = Block::new("B", Color::Blue, p + offset);
    a.yaw = yaw;
    b.yaw = yaw;
    let s = Scene::from_blocks(Table::default(), Observer::default(), vec![a, b]).map_err(|e| e.to_string())?;
    let (ea, eb) = (s.block_entities().next().unwrap(), s.block_entities().nth(1).unwrap());
    let d = scaled_centroid_distance(ea, eb);
    if (d - 1.0).abs() > 1e-9 {
        return Err(format!("face {face}, yaw {yaw}: scaled distance {d}"));
    }
    Ok(())
}
