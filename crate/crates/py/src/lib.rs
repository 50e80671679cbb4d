//! Python module `remind`. Structured results cross the boundary as plain
//! dicts and lists built from the same JSON the service speaks.

use std::path::PathBuf;

use chrono::{NaiveDate, NaiveDateTime};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use remind_core::authoring::{self, handle_user_message, FallbackBackend, Stage};
use remind_core::dsl;
use remind_core::feasibility::check_feasibility;
use remind_core::home::{load_home_config, HomeConfig};
use remind_core::intent::{normalize_intent, parse_time_expression, AuthoringContext, RawSlots, Slot};
use remind_core::simulator::{self, brute_force_oracle, incremental_fire_offsets, Trace};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(v).map_err(value_error)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn parse_now(now: Option<&str>) -> PyResult<NaiveDateTime> {
    match now {
        Some(s) => s.parse().map_err(|e| value_error(format!("{s:?}: {e}"))),
        None => Ok(chrono::Local::now().naive_local()),
    }
}

/// A home layout: sensors, activities, time mappings and event phrases.
#[pyclass(name = "Home", module = "remind", from_py_object)]
#[derive(Clone)]
pub struct PyHome {
    pub inner: HomeConfig,
}

#[pymethods]
impl PyHome {
    #[staticmethod]
    fn sample() -> Self {
        PyHome { inner: HomeConfig::sample_home() }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        load_home_config(text).map(|inner| PyHome { inner }).map_err(value_error)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn sensors(&self) -> Vec<String> {
        self.inner.sensors.iter().map(|s| s.id.clone()).collect()
    }

    fn activities(&self) -> Vec<String> {
        self.inner.activities.iter().map(|a| a.label.clone()).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Home({} sensors, {} activities)",
            self.inner.sensors.len(),
            self.inner.activities.len()
        )
    }
}

fn home_or_sample(home: Option<PyRef<'_, PyHome>>) -> HomeConfig {
    home.map_or_else(HomeConfig::sample_home, |h| h.inner.clone())
}

fn validated(src: &str, home: &HomeConfig) -> PyResult<dsl::ValidatedProgram> {
    let program = dsl::parse(src).map_err(value_error)?;
    dsl::typecheck(&program, home).map_err(|errs| {
        value_error(errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))
    })
}

/// Parses a trigger program and returns its canonical text.
#[pyfunction]
pub fn format_dsl(src: &str) -> PyResult<String> {
    dsl::parse(src).map(|p| dsl::format(&p)).map_err(value_error)
}

/// Type errors as `{code, path, message}` dicts; empty when the program is valid.
#[pyfunction]
#[pyo3(signature = (src, home=None))]
pub fn typecheck<'py>(py: Python<'py>, src: &str, home: Option<PyRef<'_, PyHome>>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let home = home_or_sample(home);
    let program = dsl::parse(src).map_err(value_error)?;
    let errs = match dsl::typecheck(&program, &home) {
        Ok(_) => return Ok(Vec::new()),
        Err(errs) => errs,
    };
    errs.iter()
        .map(|e| {
            let d = PyDict::new(py);
            d.set_item("code", e.code())?;
            d.set_item("path", e.path())?;
            d.set_item("message", e.to_string())?;
            Ok(d)
        })
        .collect()
}

/// One of time_based, activity_based, sensor_based, state_machine.
#[pyfunction]
#[pyo3(signature = (src, home=None))]
pub fn classify(src: &str, home: Option<PyRef<'_, PyHome>>) -> PyResult<&'static str> {
    Ok(dsl::classify(&validated(src, &home_or_sample(home))?).as_str())
}

/// Normalizes raw slot values (keys WHAT, WHEN, DATE, RECURRENCE, PRIORITY).
#[pyfunction]
#[pyo3(signature = (slots, now=None, home=None))]
pub fn normalize(
    py: Python<'_>,
    slots: std::collections::BTreeMap<String, String>,
    now: Option<&str>,
    home: Option<PyRef<'_, PyHome>>,
) -> PyResult<Py<PyAny>> {
    let mut raw = RawSlots::new();
    for (k, v) in slots {
        let slot = Slot::parse(&k).ok_or_else(|| value_error(format!("unknown slot {k}")))?;
        raw.insert(slot, v);
    }
    let ctx = AuthoringContext::new(parse_now(now)?);
    let intent = normalize_intent(&raw, &home_or_sample(home), &ctx).map_err(value_error)?;
    to_py(py, &intent)
}

/// Feasibility verdict for a WHEN phrase (or `dsl:` program).
#[pyfunction]
#[pyo3(signature = (when, now=None, home=None))]
pub fn feasibility(py: Python<'_>, when: &str, now: Option<&str>, home: Option<PyRef<'_, PyHome>>) -> PyResult<Py<PyAny>> {
    let home = home_or_sample(home);
    let ctx = AuthoringContext::new(parse_now(now)?);
    let spec = parse_time_expression(when, &home, &ctx).map_err(value_error)?;
    to_py(py, &check_feasibility(&spec, &home))
}

/// Tick offsets at which the program fires over a JSONL trace.
#[pyfunction]
#[pyo3(signature = (src, trace, interval=1, home=None))]
pub fn fire_offsets(src: &str, trace: &str, interval: u64, home: Option<PyRef<'_, PyHome>>) -> PyResult<Vec<i64>> {
    let program = validated(src, &home_or_sample(home))?;
    let trace = Trace::from_jsonl(trace).map_err(value_error)?;
    Ok(incremental_fire_offsets(&program.root, &trace, interval.max(1)))
}

/// Same as `fire_offsets`, from the whole-trace reference evaluator.
#[pyfunction]
#[pyo3(signature = (src, trace, interval=1, home=None))]
pub fn oracle_offsets(src: &str, trace: &str, interval: u64, home: Option<PyRef<'_, PyHome>>) -> PyResult<Vec<i64>> {
    let program = validated(src, &home_or_sample(home))?;
    let trace = Trace::from_jsonl(trace).map_err(value_error)?;
    Ok(brute_force_oracle(&program.root, &trace, interval.max(1)))
}

/// Runs the scripted corpus in `corpus_dir`; sessions happen at 09:00 on `date`.
#[pyfunction]
#[pyo3(signature = (corpus_dir, date, interval=1, tolerance=1, home=None))]
pub fn evaluate_corpus(
    py: Python<'_>,
    corpus_dir: PathBuf,
    date: &str,
    interval: u64,
    tolerance: u64,
    home: Option<PyRef<'_, PyHome>>,
) -> PyResult<Py<PyAny>> {
    let date: NaiveDate = date.parse().map_err(value_error)?;
    let corpus = simulator::load_corpus_dir(&corpus_dir).map_err(value_error)?;
    let ctx = AuthoringContext::new(date.and_hms_opt(9, 0, 0).expect("valid time"));
    let report = simulator::evaluate_corpus(&corpus, &home_or_sample(home), &ctx, interval, tolerance);
    to_py(py, &report)
}

/// An authoring conversation with the rule-based assistant.
#[pyclass(name = "Session", module = "remind")]
pub struct PySession {
    session: authoring::Session,
    home: HomeConfig,
    backend: FallbackBackend,
}

#[pymethods]
impl PySession {
    #[new]
    #[pyo3(signature = (home=None))]
    fn new(home: Option<PyRef<'_, PyHome>>) -> Self {
        let home = home_or_sample(home);
        PySession {
            session: authoring::Session::new("python"),
            backend: FallbackBackend::new(home.clone()),
            home,
        }
    }

    /// Sends one user message and returns the assistant's reply.
    #[pyo3(signature = (text, now=None))]
    fn send(&mut self, text: &str, now: Option<&str>) -> PyResult<String> {
        let ctx = AuthoringContext::new(parse_now(now)?);
        handle_user_message(&mut self.session, text, &self.home, &ctx, &mut self.backend).map_err(value_error)
    }

    #[getter]
    fn stage(&self) -> &'static str {
        self.session.stage.as_str()
    }

    #[getter]
    fn done(&self) -> bool {
        self.session.stage == Stage::Done
    }

    fn slots(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.session.slots)
    }

    fn transcript(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.session.transcript)
    }

    /// `{intent, dsl, kind}` once the session is done, else None.
    fn reminder(&self, py: Python<'_>) -> PyResult<Option<Py<PyAny>>> {
        let Some(c) = &self.session.emitted else { return Ok(None) };
        let v = serde_json::json!({"intent": c.intent, "dsl": c.dsl(), "kind": c.kind.as_str()});
        to_py(py, &v).map(Some)
    }
}

#[pymodule]
pub fn remind(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHome>()?;
    m.add_class::<PySession>()?;
    m.add_function(wrap_pyfunction!(format_dsl, m)?)?;
    m.add_function(wrap_pyfunction!(typecheck, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    m.add_function(wrap_pyfunction!(feasibility, m)?)?;
    m.add_function(wrap_pyfunction!(fire_offsets, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_offsets, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_corpus, m)?)?;
    Ok(())
}
