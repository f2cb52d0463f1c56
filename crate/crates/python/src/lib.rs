//! Python module `bwqa_py`. Structured results come back as plain dicts and
//! lists; failures raise `BwqaError(code, message)`.

use std::sync::Arc;

use bwqa::scene::load_scene;
use bwqa::service::{self, run_batch_eval, ServiceError, SessionStore, BUNDLED_CORPUS};
use bwqa::spatial::Constants;
use bwqa::ulf::Grammar;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(bwqa_py, BwqaError, PyValueError);

fn error(code: &str, message: impl ToString) -> PyErr {
    BwqaError::new_err((code.to_string(), message.to_string()))
}

fn service_error(e: ServiceError) -> PyErr {
    error(e.code(), &e)
}

// via the json module so nested values become ordinary Python objects
fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| error("INTERNAL", e))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn grammar() -> Arc<Grammar> {
    Arc::new(Grammar::bundled().clone())
}

fn scene_or_bundled(doc: Option<&str>) -> PyResult<bwqa::scene::Scene> {
    match doc {
        Some(d) => load_scene(d).map_err(|e| error(e.code(), &e)),
        None => Ok(service::bundled_scene()),
    }
}

/// Dialogue session over its own scene. `scene` is a scene JSON document.
#[pyclass]
struct Session {
    store: SessionStore,
    id: String,
    greeting: String,
}

#[pymethods]
impl Session {
    #[new]
    #[pyo3(signature = (scene=None))]
    fn new(scene: Option<&str>) -> PyResult<Self> {
        let store = SessionStore::new(grammar(), Arc::new(Constants::default()), service::bundled_scene(), None);
        let (id, greeting) = store.create(scene).map_err(service_error)?;
        Ok(Self { store, id, greeting: greeting.text() })
    }

    #[getter]
    fn greeting(&self) -> &str {
        &self.greeting
    }

    fn ask<'py>(&self, py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
        let r = py.detach(|| self.store.handle_ask(&self.id, text)).map_err(service_error)?;
        to_py(py, &r)
    }

    /// Drop block `label` at table position (x, y).
    #[pyo3(name = "move")]
    fn move_block<'py>(&self, py: Python<'py>, label: &str, x: f64, y: f64) -> PyResult<Bound<'py, PyAny>> {
        let r = self.store.handle_move(&self.id, label, x, y).map_err(service_error)?;
        to_py(py, &r)
    }

    fn scene<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.store.scene(&self.id).map_err(service_error)?)
    }

    /// JSON lines, one event each.
    fn transcript(&self) -> PyResult<String> {
        self.store.transcript(&self.id).map_err(service_error)
    }
}

/// Logical form of a question, as text. Block names are those of the
/// bundled scene.
#[pyfunction]
fn parse(text: &str) -> PyResult<String> {
    let scene = service::bundled_scene();
    let labels: Vec<&str> = scene.labels().collect();
    Grammar::bundled().parse_text(text, &labels).map(|u| u.to_string()).map_err(|e| error(e.kind.code(), &e))
}

/// Re-run a transcript and return the one it produces.
#[pyfunction]
fn replay(transcript: &str) -> PyResult<String> {
    service::replay(transcript, grammar(), Arc::new(Constants::default())).map_err(service_error)
}

/// Batch evaluation; both arguments default to the bundled data.
#[pyfunction]
#[pyo3(signature = (corpus=None, scene=None))]
fn evaluate<'py>(py: Python<'py>, corpus: Option<&str>, scene: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let scene = scene_or_bundled(scene)?;
    let corpus = corpus.unwrap_or(BUNDLED_CORPUS);
    let report = py.detach(|| run_batch_eval(corpus, &scene, grammar(), Arc::new(Constants::default())));
    to_py(py, &report)
}

#[pyfunction]
fn bundled_scene() -> &'static str {
    service::BUNDLED_SCENE
}

/// Adds the module contents to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("BwqaError", m.py().get_type::<BwqaError>())?;
    m.add_class::<Session>()?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(replay, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(bundled_scene, m)?)?;
    Ok(())
}

#[pymodule]
fn bwqa_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}
