//! Rule-based slot extraction from one user utterance.

use super::phrases::{self, Candidate, Lexicon, Rank, Token};
use super::{AuthoringContext, RawSlots, Slot, WhenSpec};
use crate::home::HomeConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub slots: RawSlots,
    /// The parsed form of the WHEN slot, when one was found.
    pub when_spec: Option<WhenSpec>,
    /// Other time expressions noticed in the utterance but not used.
    pub alternates: Vec<String>,
    /// What is left after removing every recognized span and any "remind
    /// me to" lead-in. Equals WHAT when the utterance had a lead-in.
    pub remainder: Option<String>,
}

const LEAD_OBJECTS: [&str; 6] = ["me", "us", "him", "her", "them", "myself"];
const LEAD_LINKS: [&str; 5] = ["to", "about", "that", "of", "for"];
const TRAILING_FILLERS: [&str; 8] = ["please", "and", "then", "to", "at", "on", "in", "also"];

fn slice(text: &str, toks: &[Token], start: usize, end: usize) -> String {
    text[toks[start].start..toks[end - 1].end].to_string()
}

/// Start of the task description after "remind me to" and similar.
fn what_start(toks: &[Token]) -> Option<usize> {
    let r = toks
        .iter()
        .position(|t| t.norm == "remind" || t.norm == "reminder")?;
    let mut i = r + 1;
    if toks.get(i).is_some_and(|t| LEAD_OBJECTS.contains(&t.norm.as_str())) {
        i += 1;
    } else if toks.get(i).is_some_and(|t| t.norm == "my") && toks.get(i + 1).is_some() {
        // "remind my husband to ..."
        i += 2;
    }
    if toks.get(i).is_some_and(|t| LEAD_LINKS.contains(&t.norm.as_str())) {
        i += 1;
    }
    Some(i)
}

pub fn extract_slots(utterance: &str, home: &HomeConfig, ctx: &AuthoringContext) -> Extraction {
    let toks = phrases::tokenize(utterance);
    let norms: Vec<String> = toks.iter().map(|t| t.norm.clone()).collect();
    let mut slots = RawSlots::new();
    let mut removed = vec![false; toks.len()];

    let recurrence = phrases::find_recurrence(&norms);
    if let Some(span) = &recurrence {
        slots.insert(Slot::Recurrence, span.value.to_string());
        removed[span.start..span.end].fill(true);
    }
    let date = phrases::find_date(&norms, ctx.current_date());
    if let Some(span) = &date {
        slots.insert(Slot::Date, span.value.to_string());
        removed[span.start..span.end].fill(true);
    }

    let lex = Lexicon::new(home);
    let mut cands: Vec<Candidate> = lex
        .candidates(home, &norms, ctx)
        .into_iter()
        .filter(|c| !removed[c.start..c.end].iter().any(|r| *r))
        .collect();
    // an explicit clock time beats a vague mention of a meal or time of day
    if cands.iter().any(|c| c.rank == Rank::Clock) {
        cands.retain(|c| c.rank != Rank::Vague);
    }
    cands.sort_by_key(|c| (c.start, std::cmp::Reverse(c.len()), c.rank));

    let mut chosen: Vec<Candidate> = Vec::new();
    for c in cands {
        if chosen.iter().all(|k| !k.overlaps(c.start, c.end)) {
            chosen.push(c);
        }
    }
    let mut when_spec = None;
    let mut alternates = Vec::new();
    for (i, c) in chosen.iter().enumerate() {
        removed[c.start..c.end].fill(true);
        let text = slice(utterance, &toks, c.value_start, c.end);
        if i == 0 {
            slots.insert(Slot::When, text);
            when_spec = Some(c.spec.clone());
        } else {
            alternates.push(text);
        }
    }

    let lead = what_start(&toks);
    let mut remainder = None;
    {
        let start = lead.unwrap_or(0);
        let mut kept: Vec<usize> = (start..toks.len()).filter(|&i| !removed[i]).collect();
        while kept
            .last()
            .is_some_and(|&i| TRAILING_FILLERS.contains(&norms[i].as_str()))
        {
            kept.pop();
        }
        while kept.first().is_some_and(|&i| norms[i] == "to") {
            kept.remove(0);
        }
        if !kept.is_empty() {
            let mut what = String::new();
            for (n, &i) in kept.iter().enumerate() {
                let contiguous = kept.get(n + 1).is_some_and(|&j| j == i + 1);
                let end = if contiguous { toks[i].raw_end } else { toks[i].end };
                if !what.is_empty() {
                    what.push(' ');
                }
                what.push_str(&utterance[toks[i].start..end]);
            }
            if lead.is_some() {
                slots.insert(Slot::What, what.clone());
            }
            remainder = Some(what);
        }
    }

    Extraction {
        slots,
        when_spec,
        alternates,
        remainder,
    }
}
