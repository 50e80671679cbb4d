//! Recursive-descent parser for trigger expressions.
//!
//! Lexing is context-sensitive in one place: words that start with a digit
//! are kept whole (`19:00`, `180s`, `0.5`) and interpreted by whichever rule
//! asked for them.

use std::fmt;

use chrono::NaiveTime;
use thiserror::Error;

use super::ast::{CmpOp, Event, Level, Step};
use crate::clock::{parse_hhmm, Seconds};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: expected {}, found {}",
            self.line,
            self.column,
            self.expected.join(" or "),
            self.found
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Comma,
    Colon,
    Cmp(CmpOp),
    Word(String),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Cmp(op) => format!("`{}`", op.as_str()),
            Tok::Word(w) => format!("`{w}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let mut push = |tok: Tok| {
            out.push(Token {
                tok,
                line: start_line,
                column: start_col,
            })
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            _ => None,
        };
        if let Some(tok) = single {
            push(tok);
            i += 1;
            col += 1;
            continue;
        }
        if c == '>' || c == '<' {
            let eq = chars.get(i + 1) == Some(&'=');
            let op = match (c, eq) {
                ('>', false) => CmpOp::Gt,
                ('>', true) => CmpOp::Ge,
                ('<', false) => CmpOp::Lt,
                _ => CmpOp::Le,
            };
            push(Tok::Cmp(op));
            let n = if eq { 2 } else { 1 };
            i += n;
            col += n;
            continue;
        }
        let numeric = c.is_ascii_digit()
            || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()));
        if numeric || c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            i += 1;
            while i < chars.len() {
                let d = chars[i];
                let ok = d.is_ascii_alphanumeric()
                    || d == '_'
                    || (numeric && (d == ':' || d == '.'));
                if !ok {
                    break;
                }
                i += 1;
            }
            col += i - start;
            push(Tok::Word(chars[start..i].iter().collect()));
            continue;
        }
        return Err(ParseError {
            line,
            column: col,
            expected: vec!["a token".into()],
            found: format!("`{c}`"),
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

const EVENT_KEYWORDS: [&str; 8] = [
    "at", "rising", "falling", "started", "ended", "held", "after", "seq",
];

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, token: &Token, expected: &[&str]) -> ParseError {
        ParseError {
            line: token.line,
            column: token.column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: token.tok.describe(),
        }
    }

    fn fail<T>(&self, expected: &[&str]) -> PResult<T> {
        Err(self.error_at(self.peek(), expected))
    }

    fn expect(&mut self, tok: Tok, name: &str) -> PResult<()> {
        if self.peek().tok == tok {
            self.bump();
            Ok(())
        } else {
            self.fail(&[name])
        }
    }

    fn at_word(&self, word: &str) -> bool {
        matches!(&self.peek().tok, Tok::Word(w) if w == word)
    }

    fn ident(&mut self) -> PResult<String> {
        match &self.peek().tok {
            Tok::Word(w) if crate::home::is_identifier(w) => {
                let w = w.clone();
                self.bump();
                Ok(w)
            }
            _ => self.fail(&["identifier"]),
        }
    }

    fn time(&mut self) -> PResult<NaiveTime> {
        if let Tok::Word(w) = &self.peek().tok {
            if let Some(t) = parse_hhmm(w) {
                self.bump();
                return Ok(t);
            }
        }
        self.fail(&["time (HH:MM)"])
    }

    fn duration(&mut self) -> PResult<Seconds> {
        if let Tok::Word(w) = &self.peek().tok {
            if let Some(d) = Seconds::parse(w) {
                self.bump();
                return Ok(d);
            }
        }
        self.fail(&["duration (e.g. 30s, 5m, 1h)"])
    }

    fn number(&mut self) -> PResult<f64> {
        if let Tok::Word(w) = &self.peek().tok {
            let looks_numeric = w
                .bytes()
                .all(|b| b.is_ascii_digit() || b == b'.' || b == b'-' || b == b'e');
            if looks_numeric {
                if let Ok(x) = w.parse::<f64>() {
                    if x.is_finite() {
                        self.bump();
                        return Ok(x);
                    }
                }
            }
        }
        self.fail(&["number"])
    }

    fn event(&mut self) -> PResult<Event> {
        let mut e = self.event_primary()?;
        while self.at_word("when") {
            self.bump();
            let gate = self.level()?;
            e = Event::When(Box::new(e), gate);
        }
        Ok(e)
    }

    fn event_primary(&mut self) -> PResult<Event> {
        if self.peek().tok == Tok::LParen {
            self.bump();
            let e = self.event()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(e);
        }
        let kw = match &self.peek().tok {
            Tok::Word(w) if EVENT_KEYWORDS.contains(&w.as_str()) => w.clone(),
            _ => {
                let mut expected = vec!["`(`"];
                expected.extend(EVENT_KEYWORDS.iter().copied());
                return self.fail(&expected);
            }
        };
        self.bump();
        self.expect(Tok::LParen, "`(`")?;
        let e = match kw.as_str() {
            "at" => Event::At(self.time()?),
            "rising" => Event::Rising(self.level()?),
            "falling" => Event::Falling(self.level()?),
            "started" => Event::Started(self.ident()?),
            "ended" => Event::Ended(self.ident()?),
            "held" => {
                let l = self.level()?;
                self.expect(Tok::Comma, "`,`")?;
                Event::Held(l, self.duration()?)
            }
            "after" => {
                let event = self.event()?;
                self.expect(Tok::Comma, "`,`")?;
                let delay = self.duration()?;
                let mut cancel = None;
                if self.peek().tok == Tok::Comma {
                    self.bump();
                    if !self.at_word("cancel") {
                        return self.fail(&["`cancel`"]);
                    }
                    self.bump();
                    self.expect(Tok::Colon, "`:`")?;
                    cancel = Some(self.level()?);
                }
                Event::After {
                    event: Box::new(event),
                    delay,
                    cancel,
                }
            }
            "seq" => self.seq_body()?,
            _ => unreachable!("keyword list and match arms agree"),
        };
        self.expect(Tok::RParen, "`)`")?;
        Ok(e)
    }

    fn seq_body(&mut self) -> PResult<Event> {
        let mut steps = vec![self.step()?];
        let mut within = None;
        while self.peek().tok == Tok::Comma {
            self.bump();
            if self.at_word("within") {
                self.bump();
                self.expect(Tok::Colon, "`:`")?;
                within = Some(self.duration()?);
                break;
            }
            steps.push(self.step()?);
        }
        if steps.len() < 2 {
            return self.fail(&["`,` and a second seq step"]);
        }
        Ok(Event::Seq { steps, within })
    }

    fn step(&mut self) -> PResult<Step> {
        if self.at_word("hold") {
            self.bump();
            self.expect(Tok::LParen, "`(`")?;
            let l = self.level()?;
            self.expect(Tok::Comma, "`,`")?;
            let d = self.duration()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Step::Hold(l, d));
        }
        Ok(Step::Event(self.event()?))
    }

    fn level(&mut self) -> PResult<Level> {
        let mut l = self.level_and()?;
        while self.at_word("or") {
            self.bump();
            l = Level::or(l, self.level_and()?);
        }
        Ok(l)
    }

    fn level_and(&mut self) -> PResult<Level> {
        let mut l = self.level_not()?;
        while self.at_word("and") {
            self.bump();
            l = Level::and(l, self.level_not()?);
        }
        Ok(l)
    }

    fn level_not(&mut self) -> PResult<Level> {
        if self.at_word("not") {
            self.bump();
            return Ok(Level::not(self.level_not()?));
        }
        self.level_atom()
    }

    fn level_atom(&mut self) -> PResult<Level> {
        if self.peek().tok == Tok::LParen {
            self.bump();
            let l = self.level()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(l);
        }
        let kw = match &self.peek().tok {
            Tok::Word(w) if matches!(w.as_str(), "sensor" | "active" | "between") => w.clone(),
            _ => return self.fail(&["`(`", "sensor", "active", "between", "not"]),
        };
        self.bump();
        self.expect(Tok::LParen, "`(`")?;
        match kw.as_str() {
            "sensor" => {
                let id = self.ident()?;
                self.expect(Tok::RParen, "`)`")?;
                if let Tok::Cmp(op) = self.peek().tok {
                    self.bump();
                    let threshold = self.number()?;
                    return Ok(Level::Compare {
                        sensor: id,
                        op,
                        threshold,
                    });
                }
                Ok(Level::Sensor(id))
            }
            "active" => {
                let a = self.ident()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Level::Active(a))
            }
            _ => {
                let from = self.time()?;
                self.expect(Tok::Comma, "`,`")?;
                let to = self.time()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Level::Between(from, to))
            }
        }
    }
}

/// Parses a complete event expression.
pub fn parse_event(src: &str) -> Result<Event, ParseError> {
    let mut p = Parser {
        tokens: lex(src)?,
        pos: 0,
    };
    let e = p.event()?;
    if p.peek().tok != Tok::Eof {
        return p.fail(&["`when`", "end of input"]);
    }
    Ok(e)
}
