//! Session store, transcripts and the operations behind the HTTP API.

mod eval;

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dialogue::{Session, Turn};
use crate::scene::{load_scene, Scene, SceneDoc, SceneError, Vec3};
use crate::solver::AnswerSet;
use crate::spatial::Constants;
use crate::ulf::Grammar;

pub use eval::{parse_corpus, run_batch_eval, CorpusItem, EvalReport, Expectation, ItemResult, LineError, Outcome};

/// Environment variable naming the transcript directory.
pub const DATA_DIR_ENV: &str = "BWQA_DATA_DIR";
/// Longest accepted question, in characters.
pub const MAX_INPUT_CHARS: usize = 500;

/// Scene the example dialogue was written against.
pub const BUNDLED_SCENE: &str = include_str!("../../data/scene.json");
/// Annotated question corpus for the bundled scene.
pub const BUNDLED_CORPUS: &str = include_str!("../../data/corpus.tsv");

pub fn bundled_scene() -> Scene {
    load_scene(BUNDLED_SCENE).expect("bundled scene is valid")
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error("empty input")]
    EmptyInput,
    #[error("input is {len} characters, the limit is {max}")]
    InputTooLong { len: usize, max: usize },
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("transcript line {line}: {reason}")]
    Transcript { line: usize, reason: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownSession(_) => "UNKNOWN_SESSION",
            ServiceError::EmptyInput => "EMPTY_INPUT",
            ServiceError::InputTooLong { .. } => "INPUT_TOO_LONG",
            ServiceError::Scene(e) => e.code(),
            ServiceError::Transcript { .. } => "BAD_TRANSCRIPT",
            ServiceError::Io(_) => "IO_ERROR",
        }
    }
}

/// One transcript line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    Header { session: String, created: u64, scene: SceneDoc },
    Turn { index: usize, turn: Turn },
    Move { label: String, x: f64, y: f64, revision: u64 },
}

impl Event {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("events always serialize")
    }
}

/// Renders events as newline-delimited JSON.
pub fn transcript_text(events: &[Event]) -> String {
    events.iter().map(|e| e.to_line() + "\n").collect()
}

/// Everything `ask` reports back.
#[derive(Debug, Clone, Serialize)]
pub struct AskResult {
    pub response: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ulf: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub answer: Option<AnswerSet>,
    pub turn: Turn,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MoveResult {
    pub label: String,
    pub position: [f64; 3],
    pub revision: u64,
    pub scene: SceneDoc,
}

/// A live session plus its transcript.
#[derive(Debug)]
pub struct SessionRecord {
    pub id: String,
    pub created: u64,
    pub session: Session,
    pub events: Vec<Event>,
    path: Option<PathBuf>,
}

impl SessionRecord {
    fn push(&mut self, event: Event) -> Result<(), ServiceError> {
        if let Some(path) = &self.path {
            let mut f = OpenOptions::new().create(true).append(true).open(path)?;
            f.write_all((event.to_line() + "\n").as_bytes())?;
        }
        self.events.push(event);
        Ok(())
    }

    fn turns(&self) -> usize {
        self.events.iter().filter(|e| matches!(e, Event::Turn { .. })).count()
    }

    pub fn transcript(&self) -> String {
        transcript_text(&self.events)
    }

    /// Runs one user input through the dialogue and records it.
    pub fn ask(&mut self, text: &str) -> Result<AskResult, ServiceError> {
        if text.trim().is_empty() {
            return Err(ServiceError::EmptyInput);
        }
        let len = text.chars().count();
        if len > MAX_INPUT_CHARS {
            return Err(ServiceError::InputTooLong { len, max: MAX_INPUT_CHARS });
        }
        let started = Instant::now();
        let turn = self.session.step(text);
        let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
        self.push(Event::Turn { index: self.turns(), turn: turn.clone() })?;
        Ok(AskResult {
            response: turn.text(),
            ulf: turn.ulf.clone(),
            frame: turn.frame.clone(),
            answer: turn.answer.clone(),
            turn,
            elapsed_ms,
        })
    }

    /// Drops a block at (x, y); it settles onto whatever lies beneath.
    pub fn move_block(&mut self, label: &str, x: f64, y: f64) -> Result<MoveResult, ServiceError> {
        let scene = self.session.scene();
        let label = scene
            .find_block(label)
            .map(|b| b.label.clone())
            .ok_or_else(|| SceneError::UnknownLabel(label.to_string()))?;
        let next = scene.drop_block(&label, x, y)?;
        let revision = next.revision();
        let c: Vec3 = next.block(&label).expect("moved block exists").centroid;
        let doc = next.to_doc();
        self.session.set_scene(next);
        self.push(Event::Move { label: label.clone(), x, y, revision })?;
        Ok(MoveResult { label, position: [c.x, c.y, c.z], revision, scene: doc })
    }

    /// The greeting a fresh session opens with.
    fn open(&mut self) -> Result<Turn, ServiceError> {
        let turn = self.session.step("");
        self.push(Event::Turn { index: self.turns(), turn: turn.clone() })?;
        Ok(turn)
    }
}

fn now_millis() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

/// Re-runs a transcript's user turns and moves against its recorded initial
/// scene and returns the regenerated transcript.
pub fn replay(transcript: &str, grammar: Arc<Grammar>, constants: Arc<Constants>) -> Result<String, ServiceError> {
    let record = replay_record(transcript, grammar, constants, None)?;
    Ok(record.transcript())
}

fn parse_events(transcript: &str) -> Result<Vec<Event>, ServiceError> {
    transcript
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| ServiceError::Transcript { line: i + 1, reason: e.to_string() })
        })
        .collect()
}

fn replay_record(
    transcript: &str,
    grammar: Arc<Grammar>,
    constants: Arc<Constants>,
    path: Option<PathBuf>,
) -> Result<SessionRecord, ServiceError> {
    let events = parse_events(transcript)?;
    let Some(Event::Header { session, created, scene }) = events.first() else {
        return Err(ServiceError::Transcript { line: 1, reason: "missing header".into() });
    };
    let scene = Scene::from_doc(scene)?;
    let mut record = SessionRecord {
        id: session.clone(),
        created: *created,
        session: Session::new(grammar, constants, scene),
        events: vec![events[0].clone()],
        path: None,
    };
    for (i, e) in events.iter().enumerate().skip(1) {
        match e {
            Event::Turn { turn, .. } if turn.input.is_empty() => {
                record.open()?;
            }
            Event::Turn { turn, .. } => {
                record.ask(&turn.input)?;
            }
            Event::Move { label, x, y, .. } => {
                record.move_block(label, *x, *y)?;
            }
            Event::Header { .. } => {
                return Err(ServiceError::Transcript { line: i + 1, reason: "second header".into() })
            }
        }
    }
    record.path = path;
    Ok(record)
}

/// All sessions of one service instance.
pub struct SessionStore {
    grammar: Arc<Grammar>,
    constants: Arc<Constants>,
    default_scene: Scene,
    data_dir: Option<PathBuf>,
    sessions: RwLock<BTreeMap<String, Arc<Mutex<SessionRecord>>>>,
    counter: AtomicU64,
}

impl SessionStore {
    pub fn new(grammar: Arc<Grammar>, constants: Arc<Constants>, default_scene: Scene, data_dir: Option<PathBuf>) -> Self {
        Self { grammar, constants, default_scene, data_dir, sessions: RwLock::new(BTreeMap::new()), counter: AtomicU64::new(0) }
    }

    pub fn grammar(&self) -> &Arc<Grammar> {
        &self.grammar
    }

    pub fn constants(&self) -> &Arc<Constants> {
        &self.constants
    }

    pub fn data_dir(&self) -> Option<&Path> {
        self.data_dir.as_deref()
    }

    /// Opens a session on `scene_doc` (or the default scene) and records
    /// the greeting.
    pub fn create(&self, scene_doc: Option<&str>) -> Result<(String, Turn), ServiceError> {
        let scene = match scene_doc {
            Some(text) if !text.trim().is_empty() => load_scene(text)?,
            _ => self.default_scene.clone(),
        };
        let created = now_millis();
        let id = format!("s{created:x}{:04x}", self.counter.fetch_add(1, Ordering::Relaxed));
        let path = match &self.data_dir {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                Some(dir.join(format!("{id}.ndjson")))
            }
            None => None,
        };
        let mut record = SessionRecord {
            id: id.clone(),
            created,
            session: Session::new(self.grammar.clone(), self.constants.clone(), scene.clone()),
            events: vec![],
            path,
        };
        record.push(Event::Header { session: id.clone(), created, scene: scene.to_doc() })?;
        let greeting = record.open()?;
        self.sessions.write().expect("session map lock").insert(id.clone(), Arc::new(Mutex::new(record)));
        Ok((id, greeting))
    }

    pub fn get(&self, id: &str) -> Result<Arc<Mutex<SessionRecord>>, ServiceError> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    pub fn remove(&self, id: &str) -> bool {
        self.sessions.write().expect("session map lock").remove(id).is_some()
    }

    pub fn ids(&self) -> Vec<String> {
        self.sessions.read().expect("session map lock").keys().cloned().collect()
    }

    fn with<T>(&self, id: &str, f: impl FnOnce(&mut SessionRecord) -> Result<T, ServiceError>) -> Result<T, ServiceError> {
        let rec = self.get(id)?;
        let mut guard = rec.lock().expect("session lock");
        f(&mut guard)
    }

    pub fn handle_ask(&self, id: &str, text: &str) -> Result<AskResult, ServiceError> {
        self.with(id, |r| r.ask(text))
    }

    pub fn handle_move(&self, id: &str, label: &str, x: f64, y: f64) -> Result<MoveResult, ServiceError> {
        self.with(id, |r| r.move_block(label, x, y))
    }

    pub fn scene(&self, id: &str) -> Result<SceneDoc, ServiceError> {
        self.with(id, |r| Ok(r.session.scene().to_doc()))
    }

    pub fn transcript(&self, id: &str) -> Result<String, ServiceError> {
        self.with(id, |r| Ok(r.transcript()))
    }

    /// Restores every transcript in the data directory by replaying it.
    /// Returns the number of sessions loaded.
    pub fn load_persisted(&self) -> Result<usize, ServiceError> {
        let Some(dir) = &self.data_dir else { return Ok(0) };
        if !dir.exists() {
            return Ok(0);
        }
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "ndjson"))
            .collect();
        paths.sort();
        let mut n = 0;
        for path in paths {
            let text = fs::read_to_string(&path)?;
            let record = replay_record(&text, self.grammar.clone(), self.constants.clone(), Some(path))?;
            self.sessions.write().expect("session map lock").insert(record.id.clone(), Arc::new(Mutex::new(record)));
            n += 1;
        }
        Ok(n)
    }
}
