use std::fmt;

use chrono::NaiveTime;

use crate::clock::Seconds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Gt,
    Ge,
    Lt,
    Le,
}

impl CmpOp {
    pub fn as_str(self) -> &'static str {
        match self {
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
        }
    }

    pub fn apply(self, value: f64, threshold: f64) -> bool {
        match self {
            CmpOp::Gt => value > threshold,
            CmpOp::Ge => value >= threshold,
            CmpOp::Lt => value < threshold,
            CmpOp::Le => value <= threshold,
        }
    }
}

/// A boolean condition sampled on every tick.
#[derive(Debug, Clone, PartialEq)]
pub enum Level {
    Sensor(String),
    Compare {
        sensor: String,
        op: CmpOp,
        threshold: f64,
    },
    Active(String),
    /// Half-open `[from, to)`; wraps midnight when `from > to`, empty when equal.
    Between(NaiveTime, NaiveTime),
    Not(Box<Level>),
    And(Box<Level>, Box<Level>),
    Or(Box<Level>, Box<Level>),
}

/// Something that happens on a single tick. Only events fire reminders.
#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    At(NaiveTime),
    Rising(Level),
    Falling(Level),
    Started(String),
    Ended(String),
    Held(Level, Seconds),
    After {
        event: Box<Event>,
        delay: Seconds,
        cancel: Option<Level>,
    },
    Seq {
        steps: Vec<Step>,
        within: Option<Seconds>,
    },
    When(Box<Event>, Level),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Event(Event),
    Hold(Level, Seconds),
}

/// Any node of a program, as seen by [`Event::walk`].
#[derive(Debug, Clone, Copy)]
pub enum NodeRef<'a> {
    Event(&'a Event),
    Level(&'a Level),
    Hold(&'a Level, Seconds),
}

pub fn child_path(parent: &str, index: usize) -> String {
    format!("{parent}.{index}")
}

impl Level {
    pub fn and(a: Level, b: Level) -> Level {
        Level::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Level, b: Level) -> Level {
        Level::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Level) -> Level {
        Level::Not(Box::new(a))
    }

    pub fn walk<'a>(&'a self, path: &str, f: &mut dyn FnMut(&str, NodeRef<'a>)) {
        f(path, NodeRef::Level(self));
        match self {
            Level::Not(a) => a.walk(&child_path(path, 1), f),
            Level::And(a, b) | Level::Or(a, b) => {
                a.walk(&child_path(path, 1), f);
                b.walk(&child_path(path, 2), f);
            }
            Level::Sensor(_) | Level::Compare { .. } | Level::Active(_) | Level::Between(..) => {}
        }
    }

    pub(crate) fn precedence(&self) -> u8 {
        match self {
            Level::Or(..) => 1,
            Level::And(..) => 2,
            Level::Not(_) => 3,
            _ => 4,
        }
    }
}

impl Event {
    /// Visits every node depth-first with its stable path (`0`, `0.1`, ...).
    pub fn walk<'a>(&'a self, path: &str, f: &mut dyn FnMut(&str, NodeRef<'a>)) {
        f(path, NodeRef::Event(self));
        match self {
            Event::At(_) | Event::Started(_) | Event::Ended(_) => {}
            Event::Rising(l) | Event::Falling(l) | Event::Held(l, _) => {
                l.walk(&child_path(path, 1), f)
            }
            Event::After { event, cancel, .. } => {
                event.walk(&child_path(path, 1), f);
                if let Some(c) = cancel {
                    c.walk(&child_path(path, 2), f);
                }
            }
            Event::Seq { steps, .. } => {
                for (i, step) in steps.iter().enumerate() {
                    let p = child_path(path, i + 1);
                    match step {
                        Step::Event(e) => e.walk(&p, f),
                        Step::Hold(l, d) => {
                            f(&p, NodeRef::Hold(l, *d));
                            l.walk(&child_path(&p, 1), f);
                        }
                    }
                }
            }
            Event::When(e, g) => {
                e.walk(&child_path(path, 1), f);
                g.walk(&child_path(path, 2), f);
            }
        }
    }

    /// All node paths in walk order.
    pub fn paths(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk("0", &mut |p, _| out.push(p.to_string()));
        out
    }

    /// Sensor ids referenced anywhere in the expression.
    pub fn sensor_ids(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk("0", &mut |_, node| {
            if let NodeRef::Level(Level::Sensor(id) | Level::Compare { sensor: id, .. }) = node {
                out.push(id.as_str());
            }
        });
        out
    }

    /// Activity labels referenced anywhere in the expression.
    pub fn activity_labels(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk("0", &mut |_, node| match node {
            NodeRef::Event(Event::Started(a) | Event::Ended(a)) | NodeRef::Level(Level::Active(a)) => {
                out.push(a.as_str())
            }
            _ => {}
        });
        out
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        super::format::write_level(f, self)
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        super::format::write_event(f, self)
    }
}
