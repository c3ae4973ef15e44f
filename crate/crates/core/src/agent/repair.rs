//! Repair: one targeted edit per call, keyed on the error's code and its
//! structured expectation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::ast::{format_number, BlockKind};
use crate::dsl::intent::{make_feasible, set_number};
use crate::dsl::schema::{self, edit_distance};
use crate::dsl::{format, parse, Expected, ParseError};
use crate::geom::{CompileError, GeomError};

/// Largest edit distance at which a misspelling is corrected.
pub const MAX_EDIT_DISTANCE: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum Failure {
    Parse(ParseError),
    Compile(CompileError),
}

impl Failure {
    pub fn code(&self) -> &'static str {
        match self {
            Failure::Parse(e) => e.error_code.name(),
            Failure::Compile(e) => e.code(),
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Parse(e) => write!(f, "{e}"),
            Failure::Compile(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("no repair rule applies to {0}")]
pub struct NoRuleApplies(pub String);

fn splice(text: &str, start: usize, end: usize, with: &str) -> String {
    let start = start.min(text.len());
    let end = end.clamp(start, text.len());
    format!("{}{}{}", &text[..start], with, &text[end..])
}

/// Closest word within [`MAX_EDIT_DISTANCE`]; earlier entries win ties.
pub fn nearest<'a>(word: &str, options: impl IntoIterator<Item = &'a str>) -> Option<&'a str> {
    let mut best: Option<(usize, &str)> = None;
    for o in options {
        let d = edit_distance(word, o);
        if d <= MAX_EDIT_DISTANCE && best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, o));
        }
    }
    best.map(|(_, o)| o)
}

fn line_start(text: &str, offset: usize) -> usize {
    text[..offset].rfind('\n').map_or(0, |i| i + 1)
}

fn line_end(text: &str, offset: usize) -> usize {
    text[offset..].find('\n').map_or(text.len(), |i| offset + i)
}

fn repair_parse(text: &str, e: &ParseError) -> Result<String, NoRuleApplies> {
    let (off, end) = (e.offset.min(text.len()), (e.offset + e.len).min(text.len()));
    let span = &text[off..end];
    let insert = |s: &str| Ok(splice(text, off, off, s));
    match &e.expected {
        Expected::Nothing if e.len == 0 => Err(NoRuleApplies(e.to_string())),
        Expected::Nothing => Ok(splice(text, off, end, "")),
        Expected::Keyword { candidates } => {
            if let Some(k) = nearest(span, candidates.iter().map(String::as_str)) {
                return Ok(splice(text, off, end, k));
            }
            // Drop the unknown statement with its value when the line holds
            // nothing else structural.
            let eol = line_end(text, off);
            if text[off..eol].contains(['{', '}']) {
                Ok(splice(text, off, end, ""))
            } else {
                Ok(splice(text, off, eol, ""))
            }
        }
        Expected::Value { default, .. } => insert(&format!(" {default}")),
        Expected::Range {
            min,
            max,
            min_exclusive,
            integer,
            default,
        } => {
            let v = match span.parse::<f64>() {
                Ok(v) if v.is_finite() => {
                    let mut c = v.clamp(*min, *max);
                    if *integer {
                        c = c.round().clamp(min.ceil(), max.floor());
                    }
                    if *min_exclusive && c <= *min {
                        *default
                    } else {
                        c
                    }
                }
                _ => *default,
            };
            let s = if *integer { format!("{}", v as i64) } else { format_number(v) };
            Ok(splice(text, off, end, &s))
        }
        Expected::Word { options, default } => {
            let w = nearest(span, options.iter().map(String::as_str)).unwrap_or(default);
            Ok(splice(text, off, end, w))
        }
        Expected::Name => insert(" unnamed"),
        Expected::Open => insert(" {"),
        Expected::Close => {
            let ls = line_start(text, off);
            if off == text.len() {
                let sep = if text.ends_with('\n') { "" } else { "\n" };
                Ok(format!("{text}{sep}}}\n"))
            } else if text[ls..off].trim().is_empty() {
                let indent = &text[ls..off];
                insert(&format!("}}\n{indent}"))
            } else {
                insert("\n}")
            }
        }
        Expected::Header { open: true } => insert("design unnamed {\n"),
        Expected::Header { open: false } => insert("design unnamed "),
        Expected::Block => insert("primitive {\n  }\n"),
        Expected::Kind { kind } => insert(&format!("{} {{\n", kind.keyword())),
    }
}

fn repair_compile(text: &str, e: &CompileError) -> Result<String, NoRuleApplies> {
    let fail = || NoRuleApplies(e.to_string());
    let mut program = parse(text).map_err(|_| fail())?;
    let block = program.blocks.get_mut(e.block).ok_or_else(fail)?;
    let before = block.clone();
    match &e.error {
        GeomError::TubuleOverlap { required, .. } if required * 1.1 <= 100.0 => {
            set_number(block, "spacing", required * 1.1)
        }
        GeomError::ElementOverlap { required, .. } => set_number(block, "spacing", required * 1.05),
        _ => make_feasible(block),
    }
    if *block == before {
        if let GeomError::ValueOutOfRange { param, .. } = &e.error {
            let key = schema::lookup(block.kind, param).map_or(param.as_str(), |s| s.key);
            if block.params.remove(key).is_none() {
                block.modifiers.retain(|m| m.keyword() != param);
            }
        } else if block.kind == BlockKind::Cellular && matches!(e.error, GeomError::DuplicateSeeds(..)) {
            let r = schema::number(block, "randomness");
            set_number(block, "randomness", if r > 0.0 { r * 0.5 } else { 0.5 });
        }
    }
    if *block == before {
        return Err(fail());
    }
    Ok(format(&program))
}

/// One edit toward a program that parses and compiles.
pub fn repair(text: &str, failure: &Failure) -> Result<String, NoRuleApplies> {
    let out = match failure {
        Failure::Parse(e) => repair_parse(text, e)?,
        Failure::Compile(e) => repair_compile(text, e)?,
    };
    if out == text {
        return Err(NoRuleApplies(failure.to_string()));
    }
    Ok(out)
}
