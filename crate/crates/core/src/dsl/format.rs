//! Canonical rendering: lowercase keywords, single spaces, durations in
//! seconds, parentheses only where precedence needs them.

use std::fmt::{self, Write};

use super::ast::{Event, Level, Step};
use crate::clock::format_hhmm;

pub(crate) fn format_number(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{x:.1}")
    } else {
        format!("{x}")
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, child: &Level, min_prec: u8) -> fmt::Result {
    if child.precedence() < min_prec {
        f.write_char('(')?;
        write_level(f, child)?;
        f.write_char(')')
    } else {
        write_level(f, child)
    }
}

pub(crate) fn write_level(f: &mut fmt::Formatter<'_>, level: &Level) -> fmt::Result {
    match level {
        Level::Sensor(id) => write!(f, "sensor({id})"),
        Level::Compare {
            sensor,
            op,
            threshold,
        } => write!(
            f,
            "sensor({sensor}) {} {}",
            op.as_str(),
            format_number(*threshold)
        ),
        Level::Active(a) => write!(f, "active({a})"),
        Level::Between(from, to) => {
            write!(f, "between({}, {})", format_hhmm(*from), format_hhmm(*to))
        }
        Level::Not(a) => {
            f.write_str("not ")?;
            write_operand(f, a, 3)
        }
        // left-associative: the right operand needs parens at equal precedence
        Level::And(a, b) => {
            write_operand(f, a, 2)?;
            f.write_str(" and ")?;
            write_operand(f, b, 3)
        }
        Level::Or(a, b) => {
            write_operand(f, a, 1)?;
            f.write_str(" or ")?;
            write_operand(f, b, 2)
        }
    }
}

pub(crate) fn write_event(f: &mut fmt::Formatter<'_>, event: &Event) -> fmt::Result {
    match event {
        Event::At(t) => write!(f, "at({})", format_hhmm(*t)),
        Event::Rising(l) => write!(f, "rising({l})"),
        Event::Falling(l) => write!(f, "falling({l})"),
        Event::Started(a) => write!(f, "started({a})"),
        Event::Ended(a) => write!(f, "ended({a})"),
        Event::Held(l, d) => write!(f, "held({l}, {d})"),
        Event::After {
            event,
            delay,
            cancel,
        } => {
            write!(f, "after({event}, {delay}")?;
            if let Some(c) = cancel {
                write!(f, ", cancel: {c}")?;
            }
            f.write_char(')')
        }
        Event::Seq { steps, within } => {
            f.write_str("seq(")?;
            for (i, step) in steps.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                match step {
                    Step::Event(e) => write!(f, "{e}")?,
                    Step::Hold(l, d) => write!(f, "hold({l}, {d})")?,
                }
            }
            if let Some(w) = within {
                write!(f, ", within: {w}")?;
            }
            f.write_char(')')
        }
        Event::When(e, g) => write!(f, "{e} when {g}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::Seconds;
    use chrono::NaiveTime;

    #[test]
    fn at_renders_padded() {
        let e = Event::At(NaiveTime::from_hms_opt(7, 5, 0).unwrap());
        assert_eq!(e.to_string(), "at(07:05)");
    }

    #[test]
    fn or_under_and_gets_parentheses() {
        let l = Level::and(
            Level::Sensor("a".into()),
            Level::or(Level::Sensor("b".into()), Level::Sensor("c".into())),
        );
        assert_eq!(l.to_string(), "sensor(a) and (sensor(b) or sensor(c))");
        let l = Level::or(
            Level::and(Level::Sensor("a".into()), Level::Sensor("b".into())),
            Level::Sensor("c".into()),
        );
        assert_eq!(l.to_string(), "sensor(a) and sensor(b) or sensor(c)");
        let l = Level::not(Level::and(
            Level::Sensor("a".into()),
            Level::Sensor("b".into()),
        ));
        assert_eq!(l.to_string(), "not (sensor(a) and sensor(b))");
    }

    #[test]
    fn durations_render_in_seconds() {
        let e = Event::Held(Level::Sensor("x".into()), Seconds::parse("3m").unwrap());
        assert_eq!(e.to_string(), "held(sensor(x), 180s)");
    }

    #[test]
    fn numbers() {
        assert_eq!(format_number(1.0), "1.0");
        assert_eq!(format_number(0.5), "0.5");
        assert_eq!(format_number(12.25), "12.25");
    }
}
