//! JSON scene documents.
//!
//! ```json
//! {"table": {"width": 1.5, "depth": 1.5},
//!  "observer": {"position": [0, -1.2, 0.6]},
//!  "blocks": [{"label": "Toyota", "color": "red", "position": [0, 0, 0.075], "yaw": 0}]}
//! ```
//!
//! A block position with only x and y is settled onto whatever lies beneath it.

use serde::{Deserialize, Serialize};

use super::{Block, Color, Observer, Scene, SceneError, Table, Vec3, BLOCK_SIDE, TABLE_SIZE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableDoc {
    #[serde(default = "default_table_size")]
    pub width: f64,
    #[serde(default = "default_table_size")]
    pub depth: f64,
}

fn default_table_size() -> f64 {
    TABLE_SIZE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverDoc {
    pub position: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub view: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockDoc {
    pub label: String,
    pub color: Color,
    pub position: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub yaw: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<TableDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observer: Option<ObserverDoc>,
    #[serde(default)]
    pub blocks: Vec<BlockDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revision: Option<u64>,
}

/// Parses a scene document and checks every scene invariant.
pub fn load_scene(document: &str) -> Result<Scene, SceneError> {
    let doc: SceneDoc = serde_json::from_str(document).map_err(|e| SceneError::Malformed(e.to_string()))?;
    Scene::from_doc(&doc)
}

// Vectors already of unit length are kept bit-for-bit so documents round-trip.
fn unit_view(v: Vec3) -> Option<Vec3> {
    if v.is_finite() && (v.norm() - 1.0).abs() < 1e-12 {
        Some(v)
    } else {
        v.normalized()
    }
}

impl Scene {
    pub fn from_doc(doc: &SceneDoc) -> Result<Scene, SceneError> {
        let table = match &doc.table {
            Some(t) if t.width > 0.0 && t.depth > 0.0 && t.width.is_finite() && t.depth.is_finite() => {
                Table { width: t.width, depth: t.depth }
            }
            Some(_) => return Err(SceneError::Malformed("table width and depth must be positive".into())),
            None => Table::default(),
        };
        let observer = match &doc.observer {
            None => Observer::default(),
            Some(o) => {
                let position = Vec3::from(o.position);
                if !position.is_finite() {
                    return Err(SceneError::Malformed("observer position must be finite".into()));
                }
                match o.view {
                    Some(v) => Observer {
                        position,
                        view: unit_view(Vec3::from(v))
                            .ok_or_else(|| SceneError::Malformed("observer view must be non-zero".into()))?,
                    },
                    None => Observer::looking_at_table(position)
                        .ok_or_else(|| SceneError::Malformed("observer sits at the table center".into()))?,
                }
            }
        };

        let mut scene = Scene::new(table, observer);
        let mut pending = Vec::new();
        for b in &doc.blocks {
            let side = b.side.unwrap_or(BLOCK_SIDE);
            let color = b.color;
            let yaw = b.yaw.unwrap_or(0.0);
            match b.position.as_slice() {
                &[x, y, z] => scene.push_unchecked(Block {
                    label: b.label.clone(),
                    color,
                    centroid: Vec3::new(x, y, z),
                    side,
                    yaw,
                }),
                &[x, y] => pending.push(Block {
                    label: b.label.clone(),
                    color,
                    centroid: Vec3::new(x, y, side / 2.0),
                    side,
                    yaw,
                }),
                other => {
                    return Err(SceneError::Malformed(format!(
                        "block {:?}: position needs 2 or 3 coordinates, got {}",
                        b.label,
                        other.len()
                    )))
                }
            }
        }
        // Settle the x/y-only blocks in document order on top of what is there.
        for mut b in pending {
            if scene.block(&b.label).is_some() {
                return Err(SceneError::DuplicateLabel(b.label));
            }
            if !b.centroid.is_finite() {
                return Err(SceneError::InvalidGeometry { label: b.label, reason: "non-finite coordinates".into() });
            }
            let probe = b.prism();
            let bottom = scene.settle_bottom(&b.label, &probe, f64::INFINITY);
            b.centroid.z = bottom + b.side / 2.0;
            scene.push_unchecked(b);
        }
        scene.validate()?;
        Ok(scene.with_revision(doc.revision.unwrap_or(0)))
    }

    pub fn to_doc(&self) -> SceneDoc {
        SceneDoc {
            table: Some(TableDoc { width: self.table.width, depth: self.table.depth }),
            observer: Some(ObserverDoc {
                position: self.observer.position.into(),
                view: Some(self.observer.view.into()),
            }),
            blocks: self
                .blocks()
                .iter()
                .map(|b| BlockDoc {
                    label: b.label.clone(),
                    color: b.color,
                    position: vec![b.centroid.x, b.centroid.y, b.centroid.z],
                    yaw: Some(b.yaw),
                    side: Some(b.side),
                })
                .collect(),
            revision: Some(self.revision()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("scene documents always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scene() {
        let s = load_scene(r#"{"blocks":[{"label":"Toyota","color":"red","position":[0,0,0.075]}]}"#).unwrap();
        assert_eq!(s.blocks().len(), 1);
        assert_eq!(s.revision(), 0);
        assert_eq!(s.table, Table::default());
        assert_eq!(s.observer, Observer::default());
    }

    #[test]
    fn duplicate_label() {
        let err = load_scene(
            r#"{"blocks":[{"label":"Toyota","color":"red","position":[0,0,0.075]},
                          {"label":"Toyota","color":"blue","position":[0.5,0.5,0.075]}]}"#,
        )
        .unwrap_err();
        assert_eq!(err, SceneError::DuplicateLabel("Toyota".into()));
    }

    #[test]
    fn floating_block_rejected_with_label() {
        let err = load_scene(r#"{"blocks":[{"label":"Toyota","color":"red","position":[0,0,0.3]}]}"#).unwrap_err();
        match err {
            SceneError::Unsupported { label, gap } => {
                assert_eq!(label, "Toyota");
                // oracle: bottom (0.3 - 0.075) minus table top
                assert!((gap - 0.225).abs() < 1e-12);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn interpenetration_reports_both_labels() {
        let err = load_scene(
            r#"{"blocks":[{"label":"A","color":"red","position":[0,0,0.075]},
                          {"label":"B","color":"red","position":[0.1,0,0.075]}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, SceneError::Interpenetrating { ref a, ref b, .. } if a == "A" && b == "B"));
    }

    #[test]
    fn xy_positions_settle_in_order() {
        let s = load_scene(
            r#"{"blocks":[{"label":"A","color":"red","position":[0.2,0.2]},
                          {"label":"B","color":"green","position":[0.2,0.2]},
                          {"label":"C","color":"blue","position":[0.21,0.2]}]}"#,
        )
        .unwrap();
        assert!((s.block("A").unwrap().centroid.z - 0.075).abs() < 1e-12);
        assert!((s.block("B").unwrap().centroid.z - 0.225).abs() < 1e-12);
        assert!((s.block("C").unwrap().centroid.z - 0.375).abs() < 1e-12);
    }

    #[test]
    fn malformed_documents() {
        assert!(matches!(load_scene("{"), Err(SceneError::Malformed(_))));
        assert!(matches!(load_scene(r#"{"blocks":[],"extra":1}"#), Err(SceneError::Malformed(_))));
        assert!(matches!(
            load_scene(r#"{"blocks":[{"label":"A","color":"purple","position":[0,0]}]}"#),
            Err(SceneError::Malformed(_))
        ));
        assert!(matches!(
            load_scene(r#"{"blocks":[{"label":"A","color":"red","position":[0]}]}"#),
            Err(SceneError::Malformed(_))
        ));
    }

    #[test]
    fn document_round_trip() {
        let s = load_scene(
            r#"{"table":{"width":1.2,"depth":1.0},"observer":{"position":[0,-1,0.5]},
                "blocks":[{"label":"A","color":"red","position":[0.2,0.2],"yaw":0.3}]}"#,
        )
        .unwrap();
        let back = load_scene(&s.to_json()).unwrap();
        assert_eq!(s, back);
    }
}
