use std::ffi::CString;

use pyo3::prelude::*;
use pyo3::types::PyDict;

/// Runs `code` with the module importable as `remind`.
fn run(code: &str) {
    Python::attach(|py| {
        let m = pyo3::wrap_pymodule!(remind::remind)(py);
        py.import("sys").unwrap().getattr("modules").unwrap().set_item("remind", m).unwrap();
        let globals = PyDict::new(py);
        globals
            .set_item("CORPUS", concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus"))
            .unwrap();
        let code = CString::new(code).unwrap();
        if let Err(e) = py.run(&code, Some(&globals), None) {
            e.print(py);
            panic!("python raised {e}");
        }
    });
}

#[test]
fn dsl_functions() {
    run(r#"
import remind
assert remind.format_dsl("rising( sensor(contact_front_door) )") == "rising(sensor(contact_front_door))"
assert remind.classify("at(7:05)") == "time_based"
assert remind.classify("ended(eating)") == "activity_based"
errs = remind.typecheck("rising(sensor(plug_unicorn))")
assert [(e["code"], e["path"]) for e in errs] == [("unknown_sensor", "0.1")], errs
assert remind.typecheck("at(07:00)") == []
try:
    remind.format_dsl("rising(")
    raise AssertionError("no error")
except ValueError:
    pass
"#);
}

#[test]
fn homes() {
    run(r#"
import remind
h = remind.Home.sample()
assert "contact_front_door" in h.sensors()
assert "sleeping" in h.activities()
again = remind.Home.from_json(h.to_json())
assert again.sensors() == h.sensors()
small = remind.Home.from_json('{"sensors": [{"id": "contact_a", "kind": "contact", "location": "hall"}]}')
assert remind.typecheck("rising(sensor(contact_front_door))", small)[0]["code"] == "unknown_sensor"
assert repr(small) == "Home(1 sensors, 0 activities)"
"#);
}

#[test]
fn intents_and_feasibility() {
    run(r#"
import remind
i = remind.normalize({"WHAT": "call mom", "WHEN": "7pm"}, now="2026-10-15T09:00:00")
assert i["what"] == "call mom" and i["recurrence"] == "once", i
v = remind.feasibility("before I leave the house", now="2026-10-15T09:00:00")
assert not v["feasible"] and v["code"] == "before_activity"
assert "when the front door opens" in [s["phrase"] for s in v["suggestions"]]
"#);
}

#[test]
fn sessions_and_simulation() {
    run(r#"
import remind
s = remind.Session()
now = "2026-10-15T09:00:00"
assert "?" in s.send("Remind me to take medication at 6 PM every night.", now)
assert s.stage == "confirm"
s.send("yes", now)
assert s.done and s.reminder()["dsl"] == "at(18:00)"
assert len(s.transcript()) == 4

trace = "\n".join([
    '{"home_ref":"sample_home","start":"2026-10-15T12:00:00","duration":600}',
    '{"t":10,"kind":"sensor","target":"plug_microwave","value":8.0}',
    '{"t":30,"kind":"sensor","target":"plug_microwave","value":0.0}',
])
src = "seq(rising(sensor(plug_microwave) > 1.0), falling(sensor(plug_microwave) > 1.0), hold(not sensor(contact_microwave_door), 180s))"
assert remind.fire_offsets(src, trace) == remind.oracle_offsets(src, trace) == [210]

report = remind.evaluate_corpus(CORPUS, "2027-03-02")
assert [r["label"] for r in report["rows"]] == ["correct"] * 6, report
"#);
}
