//! Deterministic phrase recognizers over word tokens.
//!
//! Every recognizer reports spans in token indices so the same machinery
//! serves two callers: `parse_time_expression` (a candidate must cover the
//! whole text) and slot extraction (leftmost-longest over an utterance).

use chrono::{Datelike, NaiveDate, NaiveTime, Weekday};

use super::{ActivityPhase, AuthoringContext, Recurrence, WhenSpec};
use crate::clock::Seconds;
use crate::home::HomeConfig;

#[derive(Debug, Clone)]
pub struct Token {
    /// Lowercased, punctuation-stripped, pronouns folded to first person.
    pub norm: String,
    /// Byte range of the alphanumeric core in the source text.
    pub start: usize,
    pub end: usize,
    /// End including trailing punctuation.
    pub raw_end: usize,
}

fn fold_pronoun(word: &str) -> &str {
    match word {
        "you" => "i",
        "your" => "my",
        "yourself" => "myself",
        "youre" => "im",
        other => other,
    }
}

fn normalize_word(raw: &str) -> String {
    let trimmed = raw.trim_matches(|c: char| !c.is_alphanumeric());
    let lower = trimmed.to_lowercase();
    let has_letters = lower.chars().any(|c| c.is_alphabetic());
    let has_digits = lower.chars().any(|c| c.is_ascii_digit());
    let kept: String = lower
        .chars()
        .filter(|&c| {
            c.is_alphanumeric()
                || (has_digits && matches!(c, ':' | '-' | '/'))
                || (has_digits && !has_letters && c == '.')
        })
        .collect();
    fold_pronoun(&kept).to_string()
}

pub fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                push_token(&mut out, text, s, i);
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        push_token(&mut out, text, s, text.len());
    }
    out
}

fn push_token(out: &mut Vec<Token>, text: &str, start: usize, end: usize) {
    let raw = &text[start..end];
    let norm = normalize_word(raw);
    if norm.is_empty() {
        return;
    }
    // keep byte offsets of the alphanumeric core so slices drop punctuation
    let lead = raw.len() - raw.trim_start_matches(|c: char| !c.is_alphanumeric()).len();
    let trail = raw.len() - raw.trim_end_matches(|c: char| !c.is_alphanumeric()).len();
    out.push(Token {
        norm,
        start: start + lead,
        end: end - trail,
        raw_end: end,
    });
}

pub fn normalize_phrase(text: &str) -> String {
    tokenize(text)
        .into_iter()
        .map(|t| t.norm)
        .collect::<Vec<_>>()
        .join(" ")
}

pub(crate) fn words(phrase: &str) -> Vec<String> {
    tokenize(phrase).into_iter().map(|t| t.norm).collect()
}

fn matches_at(toks: &[String], at: usize, pattern: &[String]) -> bool {
    !pattern.is_empty()
        && at + pattern.len() <= toks.len()
        && toks[at..at + pattern.len()] == *pattern
}

/// Recognizer priority; lower wins when two candidates share a span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Rank {
    Clock = 0,
    Relative = 1,
    AfterActivity = 2,
    BeforeActivity = 3,
    EventPhrase = 4,
    Vague = 5,
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub start: usize,
    pub end: usize,
    /// First token of the slot value; tokens before it are connectors ("at").
    pub value_start: usize,
    pub rank: Rank,
    pub spec: WhenSpec,
}

impl Candidate {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn overlaps(&self, start: usize, end: usize) -> bool {
        self.start < end && start < self.end
    }
}

const CLOCK_CONNECTORS: [&str; 5] = ["at", "around", "by", "about", "for"];

/// Parses one clock expression starting at `at`; returns (time, tokens used).
fn clock_at(toks: &[String], at: usize) -> Option<(NaiveTime, usize)> {
    let tok = toks.get(at)?;
    match tok.as_str() {
        "noon" | "midday" => return Some((NaiveTime::from_hms_opt(12, 0, 0)?, 1)),
        "midnight" => return Some((NaiveTime::from_hms_opt(0, 0, 0)?, 1)),
        _ => {}
    }
    let digits_end = tok
        .find(|c: char| !(c.is_ascii_digit() || c == ':'))
        .unwrap_or(tok.len());
    let (num, suffix) = tok.split_at(digits_end);
    if num.is_empty() || !num.starts_with(|c: char| c.is_ascii_digit()) {
        return None;
    }
    let (hour, minute, has_colon) = match num.split_once(':') {
        Some((h, m)) => {
            if h.is_empty() || h.len() > 2 || m.len() != 2 {
                return None;
            }
            (h.parse::<u32>().ok()?, m.parse::<u32>().ok()?, true)
        }
        None => {
            if num.len() > 2 {
                return None;
            }
            (num.parse::<u32>().ok()?, 0, false)
        }
    };
    let (meridiem, used) = match suffix {
        "am" | "pm" => (Some(suffix), 1),
        "" => match toks.get(at + 1).map(String::as_str) {
            Some(m @ ("am" | "pm")) => (Some(m), 2),
            _ => (None, 1),
        },
        _ => return None,
    };
    let hour24 = match meridiem {
        Some(m) => {
            if !(1..=12).contains(&hour) {
                return None;
            }
            match (m, hour) {
                ("am", 12) => 0,
                ("am", h) => h,
                ("pm", 12) => 12,
                (_, h) => h + 12,
            }
        }
        None if has_colon => hour,
        None => return None,
    };
    Some((NaiveTime::from_hms_opt(hour24, minute, 0)?, used))
}

fn number_word(w: &str) -> Option<u64> {
    if let Ok(n) = w.parse::<u64>() {
        return Some(n);
    }
    let n = match w {
        "a" | "an" | "one" => 1,
        "two" => 2,
        "three" => 3,
        "four" => 4,
        "five" => 5,
        "six" => 6,
        "seven" => 7,
        "eight" => 8,
        "nine" => 9,
        "ten" => 10,
        "eleven" => 11,
        "twelve" => 12,
        "fifteen" => 15,
        "twenty" => 20,
        "thirty" => 30,
        "forty" => 40,
        "fortyfive" => 45,
        "sixty" => 60,
        "ninety" => 90,
        _ => return None,
    };
    Some(n)
}

fn unit_seconds(w: &str) -> Option<u64> {
    match w {
        "second" | "seconds" | "sec" | "secs" => Some(1),
        "minute" | "minutes" | "min" | "mins" => Some(60),
        "hour" | "hours" | "hr" | "hrs" => Some(3600),
        _ => None,
    }
}

/// `<number> <unit>` at `at`.
fn amount_at(toks: &[String], at: usize) -> Option<Seconds> {
    let n = number_word(toks.get(at)?)?;
    let unit = unit_seconds(toks.get(at + 1)?)?;
    Seconds::new(n.checked_mul(unit)?)
}

/// Phrase tables derived from a home config, pre-tokenized.
pub struct Lexicon {
    /// (body tokens without the leading lead-in word, snippet)
    events: Vec<(Vec<String>, String)>,
    /// (alias tokens, activity label)
    aliases: Vec<(Vec<String>, String)>,
    /// (phrase tokens, mapping key)
    vague: Vec<(Vec<String>, String)>,
}

const EVENT_LEADS: [&[&str]; 6] = [
    &["when"],
    &["whenever"],
    &["every", "time"],
    &["each", "time"],
    &["if"],
    &["as", "soon", "as"],
];

fn lead_len(toks: &[String], at: usize) -> Option<usize> {
    EVENT_LEADS.iter().find_map(|lead| {
        let ok = lead.len() + at <= toks.len()
            && lead.iter().zip(&toks[at..]).all(|(a, b)| *a == b.as_str());
        ok.then_some(lead.len())
    })
}

const START_WORDS: [&str; 3] = ["starts", "begins", "start"];
const END_WORDS: [&str; 6] = ["ends", "finishes", "stops", "is_over", "end", "is_done"];

impl Lexicon {
    pub fn new(home: &HomeConfig) -> Self {
        let mut events = Vec::new();
        for (phrase, snippet) in &home.event_phrases {
            let w = words(phrase);
            let body = match lead_len(&w, 0) {
                Some(n) => w[n..].to_vec(),
                None => w,
            };
            if !body.is_empty() {
                events.push((body, snippet.clone()));
            }
        }
        let mut aliases = Vec::new();
        for a in &home.activities {
            aliases.push((words(&a.label.replace('_', " ")), a.label.clone()));
            for alias in &a.aliases {
                aliases.push((words(alias), a.label.clone()));
            }
        }
        let vague = home
            .time_mappings
            .keys()
            .map(|k| (words(k), k.clone()))
            .collect();
        Lexicon {
            events,
            aliases,
            vague,
        }
    }

    fn longest<'a, T>(table: &'a [(Vec<String>, T)], toks: &[String], at: usize) -> Option<(usize, &'a T)> {
        table
            .iter()
            .filter(|(pat, _)| matches_at(toks, at, pat))
            .max_by_key(|(pat, _)| pat.len())
            .map(|(pat, v)| (pat.len(), v))
    }

    fn event_body(&self, toks: &[String], at: usize) -> Option<(usize, WhenSpec)> {
        let (n, snippet) = Self::longest(&self.events, toks, at)?;
        let event = crate::dsl::parse(snippet).ok()?.root;
        Some((n, super::spec_from_event(&event)))
    }

    pub(crate) fn alias(&self, toks: &[String], at: usize) -> Option<(usize, &str)> {
        Self::longest(&self.aliases, toks, at).map(|(n, l)| (n, l.as_str()))
    }

    fn vague_key(&self, toks: &[String], at: usize) -> Option<(usize, &str)> {
        Self::longest(&self.vague, toks, at).map(|(n, k)| (n, k.as_str()))
    }

    /// Base of a relative offset: an event phrase body, an activity (its
    /// end), or an explicit clock time.
    fn delay_base(&self, toks: &[String], at: usize) -> Option<(usize, WhenSpec)> {
        let skip = lead_len(toks, at).unwrap_or(0);
        let from = at + skip;
        let mut best: Option<(usize, WhenSpec)> = None;
        if let Some((n, spec)) = self.event_body(toks, from) {
            best = Some((n, spec));
        }
        if let Some((n, label)) = self.alias(toks, from) {
            let phase_extra = toks
                .get(from + n)
                .filter(|w| START_WORDS.contains(&w.as_str()) || END_WORDS.contains(&w.as_str()));
            let (n, phase) = match phase_extra {
                Some(w) if START_WORDS.contains(&w.as_str()) => (n + 1, ActivityPhase::Start),
                Some(_) => (n + 1, ActivityPhase::End),
                None => (n, ActivityPhase::End),
            };
            if best.as_ref().is_none_or(|(m, _)| n > *m) {
                best = Some((
                    n,
                    WhenSpec::ActivityEvent {
                        label: label.to_string(),
                        phase,
                    },
                ));
            }
        }
        if best.is_none() {
            if let Some((t, n)) = clock_at(toks, from) {
                best = Some((n, WhenSpec::ClockTime { time: t }));
            }
        }
        best.map(|(n, s)| (n + skip, s))
    }

    /// All WHEN candidates in the token sequence.
    pub fn candidates(
        &self,
        home: &HomeConfig,
        toks: &[String],
        ctx: &AuthoringContext,
    ) -> Vec<Candidate> {
        let mut out = Vec::new();
        for i in 0..toks.len() {
            self.clock_candidates(toks, i, &mut out);
            self.relative_candidates(toks, i, ctx, &mut out);
            self.after_candidates(home, toks, i, &mut out);
            self.before_candidates(toks, i, &mut out);
            self.event_candidates(toks, i, &mut out);
            self.vague_candidates(home, toks, i, &mut out);
        }
        out
    }

    fn clock_candidates(&self, toks: &[String], i: usize, out: &mut Vec<Candidate>) {
        let Some((t, used)) = clock_at(toks, i) else {
            return;
        };
        let connector = i > 0 && CLOCK_CONNECTORS.contains(&toks[i - 1].as_str());
        out.push(Candidate {
            start: if connector { i - 1 } else { i },
            end: i + used,
            value_start: i,
            rank: Rank::Clock,
            spec: WhenSpec::ClockTime { time: t },
        });
    }

    fn relative_candidates(
        &self,
        toks: &[String],
        i: usize,
        ctx: &AuthoringContext,
        out: &mut Vec<Candidate>,
    ) {
        let now = || WhenSpec::ClockTime { time: crate::intent::truncate_to_minute(ctx.now.time()) };
        // "in 5 minutes"
        if toks[i] == "in" {
            if let Some(d) = amount_at(toks, i + 1) {
                out.push(Candidate {
                    start: i,
                    end: i + 3,
                    value_start: i,
                    rank: Rank::Relative,
                    spec: WhenSpec::Delay {
                        base: Box::new(now()),
                        delay: d,
                    },
                });
            }
            return;
        }
        let Some(d) = amount_at(toks, i) else {
            return;
        };
        match toks.get(i + 2).map(String::as_str) {
            Some("later") => {
                out.push(Candidate {
                    start: i,
                    end: i + 3,
                    value_start: i,
                    rank: Rank::Relative,
                    spec: WhenSpec::Delay {
                        base: Box::new(now()),
                        delay: d,
                    },
                });
            }
            Some("after") => {
                if let Some((n, base)) = self.delay_base(toks, i + 3) {
                    out.push(Candidate {
                        start: i,
                        end: i + 3 + n,
                        value_start: i,
                        rank: Rank::Relative,
                        spec: WhenSpec::Delay {
                            base: Box::new(base),
                            delay: d,
                        },
                    });
                }
            }
            _ => {}
        }
    }

    fn after_candidates(
        &self,
        home: &HomeConfig,
        toks: &[String],
        i: usize,
        out: &mut Vec<Candidate>,
    ) {
        if toks[i] != "after" {
            return;
        }
        let mut push = |n: usize, spec: WhenSpec| {
            out.push(Candidate {
                start: i,
                end: i + 1 + n,
                value_start: i,
                rank: Rank::AfterActivity,
                spec,
            })
        };
        if let Some((n, label)) = self.alias(toks, i + 1) {
            push(
                n,
                WhenSpec::ActivityEvent {
                    label: label.to_string(),
                    phase: ActivityPhase::End,
                },
            );
        } else if let Some((n, key)) = self.vague_key(toks, i + 1) {
            let window = home.time_mappings[key];
            let phrase = toks[i..i + 1 + n].join(" ");
            push(n, WhenSpec::InferredTime { phrase, window });
        } else if let Some((n, spec)) = self.event_body(toks, i + 1) {
            push(n, spec);
        }
    }

    fn before_candidates(&self, toks: &[String], i: usize, out: &mut Vec<Candidate>) {
        if toks[i] != "before" {
            return;
        }
        if let Some((n, label)) = self.alias(toks, i + 1) {
            out.push(Candidate {
                start: i,
                end: i + 1 + n,
                value_start: i,
                rank: Rank::BeforeActivity,
                spec: WhenSpec::BeforeActivity {
                    label: label.to_string(),
                },
            });
        }
    }

    fn event_candidates(&self, toks: &[String], i: usize, out: &mut Vec<Candidate>) {
        let Some(lead) = lead_len(toks, i) else {
            return;
        };
        let body = i + lead;
        let mut push = |n: usize, spec: WhenSpec| {
            out.push(Candidate {
                start: i,
                end: body + n,
                value_start: i,
                rank: Rank::EventPhrase,
                spec,
            })
        };
        if let Some((n, spec)) = self.event_body(toks, body) {
            push(n, spec);
        }
        // "when <activity> starts|ends", including activities the home lacks
        let phase_of = |w: &str| {
            if START_WORDS.contains(&w) {
                Some(ActivityPhase::Start)
            } else if END_WORDS.contains(&w) {
                Some(ActivityPhase::End)
            } else {
                None
            }
        };
        if let Some((n, label)) = self.alias(toks, body) {
            if let Some(phase) = toks.get(body + n).and_then(|w| phase_of(w)) {
                push(
                    n + 1,
                    WhenSpec::ActivityEvent {
                        label: label.to_string(),
                        phase,
                    },
                );
                return;
            }
        }
        for n in 1..=2 {
            let Some(phase) = toks.get(body + n).and_then(|w| phase_of(w)) else {
                continue;
            };
            let name = &toks[body..body + n];
            let plausible = name.iter().all(|w| {
                w.chars().all(|c| c.is_ascii_lowercase())
                    && !matches!(w.as_str(), "i" | "the" | "it" | "my" | "a" | "this" | "that")
            });
            if plausible {
                push(
                    n + 1,
                    WhenSpec::ActivityEvent {
                        label: name.join("_"),
                        phase,
                    },
                );
            }
            break;
        }
    }

    fn vague_candidates(
        &self,
        home: &HomeConfig,
        toks: &[String],
        i: usize,
        out: &mut Vec<Candidate>,
    ) {
        const LEADS: [&[&str]; 7] = [
            &["in", "the"],
            &["this"],
            &["at"],
            &["around"],
            &["later", "this"],
            &["at", "around"],
            &[],
        ];
        for lead in LEADS {
            let lead_ok = i + lead.len() <= toks.len()
                && lead.iter().zip(&toks[i..]).all(|(a, b)| *a == b.as_str());
            if !lead_ok {
                continue;
            }
            if let Some((n, key)) = self.vague_key(toks, i + lead.len()) {
                let end = i + lead.len() + n;
                out.push(Candidate {
                    start: i,
                    end,
                    value_start: i,
                    rank: Rank::Vague,
                    spec: WhenSpec::InferredTime {
                        phrase: toks[i..end].join(" "),
                        window: home.time_mappings[key],
                    },
                });
            }
        }
    }
}

/// A recognized span with a parsed value, for DATE and RECURRENCE.
#[derive(Debug, Clone)]
pub struct Span<T> {
    pub start: usize,
    pub end: usize,
    pub value: T,
}

pub fn weekday_from_word(w: &str) -> Option<Weekday> {
    let w = w.strip_suffix('s').filter(|s| s.ends_with("day")).unwrap_or(w);
    match w {
        "monday" | "mon" => Some(Weekday::Mon),
        "tuesday" | "tue" | "tues" => Some(Weekday::Tue),
        "wednesday" | "wed" => Some(Weekday::Wed),
        "thursday" | "thu" | "thurs" => Some(Weekday::Thu),
        "friday" | "fri" => Some(Weekday::Fri),
        "saturday" | "sat" => Some(Weekday::Sat),
        "sunday" | "sun" => Some(Weekday::Sun),
        _ => None,
    }
}

pub fn find_recurrence(toks: &[String]) -> Option<Span<Recurrence>> {
    const DAILY: [&[&str]; 11] = [
        &["every", "day"],
        &["everyday"],
        &["daily"],
        &["each", "day"],
        &["every", "night"],
        &["each", "night"],
        &["nightly"],
        &["every", "evening"],
        &["every", "morning"],
        &["every", "afternoon"],
        &["each", "evening"],
    ];
    const ONCE: [&[&str]; 5] = [
        &["just", "this", "once"],
        &["just", "once"],
        &["only", "once"],
        &["one", "time", "only"],
        &["once"],
    ];
    for i in 0..toks.len() {
        let at = |pat: &[&str]| {
            i + pat.len() <= toks.len() && pat.iter().zip(&toks[i..]).all(|(a, b)| *a == b.as_str())
        };
        if let Some(p) = DAILY.iter().find(|p| at(p)) {
            return Some(Span {
                start: i,
                end: i + p.len(),
                value: Recurrence::Daily,
            });
        }
        if matches!(toks[i].as_str(), "every" | "each" | "weekly") {
            let mut j = i + 1;
            if toks.get(j).map(String::as_str) == Some("on") {
                j += 1;
            }
            if let Some(day) = toks.get(j).and_then(|w| weekday_from_word(w)) {
                return Some(Span {
                    start: i,
                    end: j + 1,
                    value: Recurrence::Weekly(day),
                });
            }
        }
        if toks[i] == "on" && toks.get(i + 1).is_some_and(|w| w.ends_with("days")) {
            if let Some(day) = weekday_from_word(&toks[i + 1]) {
                return Some(Span {
                    start: i,
                    end: i + 2,
                    value: Recurrence::Weekly(day),
                });
            }
        }
        if let Some(p) = ONCE.iter().find(|p| at(p)) {
            return Some(Span {
                start: i,
                end: i + p.len(),
                value: Recurrence::Once,
            });
        }
    }
    None
}

fn month_from_word(w: &str) -> Option<u32> {
    const MONTHS: [&str; 12] = [
        "january",
        "february",
        "march",
        "april",
        "may",
        "june",
        "july",
        "august",
        "september",
        "october",
        "november",
        "december",
    ];
    MONTHS
        .iter()
        .position(|m| *m == w || (w.len() >= 3 && m.starts_with(w) && w != "may" && w.len() <= 4))
        .map(|p| p as u32 + 1)
}

fn day_number(w: &str) -> Option<u32> {
    let digits = w.trim_end_matches(|c: char| c.is_ascii_alphabetic());
    let suffix = &w[digits.len()..];
    if !matches!(suffix, "" | "st" | "nd" | "rd" | "th") {
        return None;
    }
    let d: u32 = digits.parse().ok()?;
    (1..=31).contains(&d).then_some(d)
}

/// Raw date vocabulary: today, tomorrow, ISO dates, "october 20".
pub fn find_date(toks: &[String], today: NaiveDate) -> Option<Span<super::DateSpec>> {
    use super::DateSpec;
    for i in 0..toks.len() {
        let on = i > 0 && toks[i - 1] == "on";
        let start = if on { i - 1 } else { i };
        match toks[i].as_str() {
            "today" | "tonight" => {
                return Some(Span {
                    start: i,
                    end: i + 1,
                    value: DateSpec::Today,
                })
            }
            "tomorrow" => {
                return Some(Span {
                    start: i,
                    end: i + 1,
                    value: DateSpec::Tomorrow,
                })
            }
            w => {
                if let Ok(d) = NaiveDate::parse_from_str(w, "%Y-%m-%d") {
                    return Some(Span {
                        start,
                        end: i + 1,
                        value: DateSpec::Specific(d),
                    });
                }
                if let (Some(m), Some(day)) = (
                    month_from_word(w),
                    toks.get(i + 1).and_then(|d| day_number(d)),
                ) {
                    let mut end = i + 2;
                    let year = match toks.get(i + 2).and_then(|y| y.parse::<i32>().ok()) {
                        Some(y) if (1970..=9999).contains(&y) => {
                            end += 1;
                            Some(y)
                        }
                        _ => None,
                    };
                    let date = match year {
                        Some(y) => NaiveDate::from_ymd_opt(y, m, day),
                        None => NaiveDate::from_ymd_opt(today.year(), m, day)
                            .filter(|d| *d >= today)
                            .or_else(|| NaiveDate::from_ymd_opt(today.year() + 1, m, day)),
                    };
                    if let Some(d) = date {
                        return Some(Span {
                            start,
                            end,
                            value: DateSpec::Specific(d),
                        });
                    }
                }
            }
        }
    }
    None
}
