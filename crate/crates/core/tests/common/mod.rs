#![allow(dead_code)]

use bwqa::scene::{Block, Color, Observer, Scene, Table, Vec3, BLOCK_SIDE};
use rand::seq::SliceRandom;
use rand::Rng;

pub mod invariants;
pub mod oracle;
pub mod transduction;

pub const LABELS: [&str; 14] = [
    "Adidas",
    "Burger King",
    "Heineken",
    "McDonalds",
    "Mercedes",
    "NVidia",
    "SRI",
    "Starbucks",
    "Target",
    "Texaco",
    "Toyota",
    "Twitter",
    "Shell",
    "Pepsi",
];

pub fn bundled_scene() -> Scene {
    bwqa::service::bundled_scene()
}

/// A valid scene of `n` blocks: scattered, side by side, stacked or bridging
/// two others, a few rotated.
pub fn random_scene<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Scene {
    let mut labels = LABELS.to_vec();
    labels.shuffle(rng);
    let mut scene = Scene::new(Table::default(), Observer::default());
    let mut placed: Vec<Block> = Vec::new();
    for label in labels.into_iter().take(n) {
        let color = Color::ALL[rng.random_range(0..3)];
        loop {
            let mode = if placed.is_empty() { 0 } else { rng.random_range(0..4) };
            let stack = mode >= 2;
            let (x, y) = match mode {
                // beside another block, nearly touching
                1 => {
                    let next_to = &placed[rng.random_range(0..placed.len())];
                    let d = BLOCK_SIDE + rng.random_range(0.0..0.01);
                    let (dx, dy) = [(d, 0.0), (-d, 0.0), (0.0, d), (0.0, -d)][rng.random_range(0..4)];
                    (next_to.centroid.x + dx, next_to.centroid.y + dy)
                }
                2 => {
                    let under = &placed[rng.random_range(0..placed.len())];
                    let jitter = BLOCK_SIDE * 0.4;
                    (under.centroid.x + rng.random_range(-jitter..jitter), under.centroid.y + rng.random_range(-jitter..jitter))
                }
                // bridging two blocks
                3 => {
                    let p = &placed[rng.random_range(0..placed.len())];
                    let q = &placed[rng.random_range(0..placed.len())];
                    ((p.centroid.x + q.centroid.x) / 2.0, (p.centroid.y + q.centroid.y) / 2.0)
                }
                _ => (rng.random_range(-0.45..0.45), rng.random_range(-0.45..0.45)),
            };
            let mut b = Block::new(label, color, Vec3::new(x, y, BLOCK_SIDE / 2.0));
            if rng.random_bool(0.2) {
                b.yaw = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
            }
            let next = if stack {
                // park it in a free corner, then drop it onto the stack
                let mut parked = b.clone();
                parked.centroid = Vec3::new(0.65, 0.65, BLOCK_SIDE / 2.0);
                let mut blocks = placed.clone();
                blocks.push(parked);
                Scene::from_blocks(Table::default(), Observer::default(), blocks).and_then(|s| s.drop_block(label, x, y))
            } else {
                let mut blocks = placed.clone();
                blocks.push(b);
                Scene::from_blocks(Table::default(), Observer::default(), blocks)
            };
            if let Ok(next) = next {
                placed = next.blocks().to_vec();
                scene = next;
                break;
            }
        }
    }
    scene
}

/// The example exchange: user input and the expected reply. The first
/// entry is the opening turn with no input.
pub const DIALOGUE: [(&str, &str); 6] = [
    ("", "Would you like to ask me a spatial question?"),
    ("OK. Is the Texaco block to the right of the McDonalds block?", "Yes, it is."),
    ("What blocks are above the Mercedes block?", "Only the Target block."),
    ("What is the highest block?", "The Toyota block."),
    ("How many blocks are between a red block and a blue block?", "Two blocks: The McDonalds block and the Burger King block."),
    ("What blocks are near the Starbucks block?", "The Texaco, Mercedes, Target, and SRI blocks."),
];

/// Lowercase, punctuation dropped, whitespace collapsed.
pub fn normalized(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .collect::<String>()
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}
