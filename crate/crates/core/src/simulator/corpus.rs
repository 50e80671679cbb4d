//! Batch evaluation: author each scenario by script, replay its trace and
//! score the firings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::{run_simulation, score_run, ScoreLabel, Trace};
use crate::authoring::{load_script, run_scripted_session};
use crate::dsl::TriggerKind;
use crate::home::HomeConfig;
use crate::intent::AuthoringContext;
use crate::runtime::RuntimeReminder;

/// Raw fixture texts of one scenario; parsing happens during evaluation so
/// that a broken file only fails its own row.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusFixture {
    pub name: String,
    pub session: String,
    pub trace: String,
    pub expected: String,
}

/// Reads `<dir>/<scenario>/{session.jsonl, trace.jsonl, expected.json}`.
/// Missing files become empty texts and fail at evaluation.
pub fn load_corpus_dir(dir: &Path) -> std::io::Result<Vec<CorpusFixture>> {
    let mut names: Vec<String> = std::fs::read_dir(dir)?
        .filter_map(Result::ok)
        .filter(|e| e.path().is_dir())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    Ok(names
        .into_iter()
        .map(|name| {
            let read = |f: &str| std::fs::read_to_string(dir.join(&name).join(f)).unwrap_or_default();
            CorpusFixture {
                session: read("session.jsonl"),
                trace: read("trace.jsonl"),
                expected: read("expected.json"),
                name,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioRow {
    pub scenario: String,
    pub label: ScoreLabel,
    pub kind: Option<TriggerKind>,
    pub dsl: Option<String>,
    pub turns: Option<usize>,
    pub expected: Vec<i64>,
    pub actual: Vec<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusReport {
    pub rows: Vec<ScenarioRow>,
    pub per_kind: BTreeMap<TriggerKind, usize>,
    pub label_counts: BTreeMap<ScoreLabel, usize>,
    pub label_proportions: BTreeMap<ScoreLabel, f64>,
    /// turns -> number of sessions
    pub turn_distribution: BTreeMap<usize, usize>,
    pub mean_turns: Option<f64>,
}

struct Scored {
    kind: TriggerKind,
    dsl: String,
    turns: usize,
    expected: Vec<i64>,
    actual: Vec<i64>,
}

fn evaluate_one(
    f: &CorpusFixture,
    home: &HomeConfig,
    ctx: &AuthoringContext,
    interval: u64,
) -> Result<Scored, (String, Option<usize>)> {
    let fail = |e: String| (e, None);
    let script = load_script(&f.session).map_err(|e| fail(e.to_string()))?;
    let out = run_scripted_session(&script, home, ctx).map_err(|e| fail(e.to_string()))?;
    let turns = out.turn_count;
    let compiled = out
        .reminder
        .ok_or_else(|| (format!("session ended in stage {}", out.session.stage.as_str()), Some(turns)))?;
    let trace = Trace::from_jsonl(&f.trace)
        .map_err(|e| (e.to_string(), Some(turns)))?
        .rebased(ctx.current_date());
    let expected: Vec<i64> = serde_json::from_str(&f.expected)
        .map_err(|e| (format!("expected.json: {e}"), Some(turns)))?;
    let kind = compiled.kind;
    let dsl = compiled.dsl();
    let reminder = RuntimeReminder::new(f.name.clone(), compiled.intent, compiled.program);
    let fired = run_simulation(home, vec![reminder], &trace, interval)
        .map_err(|e| (e.to_string(), Some(turns)))?;
    let actual = fired
        .iter()
        .map(|n| (n.fired_at - trace.start).num_seconds())
        .collect();
    Ok(Scored {
        kind,
        dsl,
        turns,
        expected,
        actual,
    })
}

pub fn evaluate_corpus(
    corpus: &[CorpusFixture],
    home: &HomeConfig,
    ctx: &AuthoringContext,
    interval: u64,
    tolerance: u64,
) -> CorpusReport {
    let rows: Vec<ScenarioRow> = corpus
        .iter()
        .map(|f| match evaluate_one(f, home, ctx, interval) {
            Ok(s) => ScenarioRow {
                scenario: f.name.clone(),
                label: score_run(&s.expected, &s.actual, tolerance),
                kind: Some(s.kind),
                dsl: Some(s.dsl),
                turns: Some(s.turns),
                expected: s.expected,
                actual: s.actual,
                error: None,
            },
            Err((e, turns)) => ScenarioRow {
                scenario: f.name.clone(),
                label: ScoreLabel::Incorrect,
                kind: None,
                dsl: None,
                turns,
                expected: Vec::new(),
                actual: Vec::new(),
                error: Some(e),
            },
        })
        .collect();

    let mut per_kind = BTreeMap::new();
    let mut label_counts: BTreeMap<ScoreLabel, usize> = [
        ScoreLabel::Correct,
        ScoreLabel::PartiallyCorrect,
        ScoreLabel::Incorrect,
    ]
    .into_iter()
    .map(|l| (l, 0))
    .collect();
    let mut turn_distribution = BTreeMap::new();
    for r in &rows {
        if let Some(k) = r.kind {
            *per_kind.entry(k).or_insert(0) += 1;
        }
        *label_counts.entry(r.label).or_insert(0) += 1;
        if let Some(t) = r.turns {
            *turn_distribution.entry(t).or_insert(0) += 1;
        }
    }
    let n = rows.len();
    let label_proportions = label_counts
        .iter()
        .map(|(l, c)| (*l, if n == 0 { 0.0 } else { *c as f64 / n as f64 }))
        .collect();
    let sessions: usize = turn_distribution.values().sum();
    let mean_turns = (sessions > 0).then(|| {
        turn_distribution.iter().map(|(t, c)| t * c).sum::<usize>() as f64 / sessions as f64
    });
    CorpusReport {
        rows,
        per_kind,
        label_counts,
        label_proportions,
        turn_distribution,
        mean_turns,
    }
}

/// Plain-text table of a report.
pub fn render_report(report: &CorpusReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10} {:<18} {:<15} {:>5}  detail",
        "scenario", "label", "kind", "turns"
    );
    for r in &report.rows {
        let detail = match &r.error {
            Some(e) => e.clone(),
            None => format!("expected {:?} actual {:?}", r.expected, r.actual),
        };
        let _ = writeln!(
            out,
            "{:<10} {:<18} {:<15} {:>5}  {}",
            r.scenario,
            r.label.as_str(),
            r.kind.map_or("-", TriggerKind::as_str),
            r.turns.map_or("-".to_string(), |t| t.to_string()),
            detail
        );
    }
    let _ = writeln!(out);
    for (l, c) in &report.label_counts {
        let _ = writeln!(
            out,
            "{:<18} {:>3}  ({:.1}%)",
            l.as_str(),
            c,
            100.0 * report.label_proportions[l]
        );
    }
    if let Some(m) = report.mean_turns {
        let _ = writeln!(out, "mean turns         {m:.2}");
    }
    out
}
