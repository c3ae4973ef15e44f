//! Geometric critic: scores a design state from its validation report and
//! from how well the scene's construction measurements match the intent.

use serde::{Deserialize, Serialize};

use super::retrieval::{retrieve, RetrievalStore};
use super::DesignState;
use crate::dsl::ast::{Block, BlockKind, DesignProgram, Modifier, Value};
use crate::dsl::intent::{words, Flag, IntentSpec};
use crate::dsl::schema::{self, modifier_range, modifiers_for, ParamType};
use crate::geom::Scene;

pub const VALIDITY_WEIGHT: f64 = 0.4;
pub const INTENT_WEIGHT: f64 = 0.6;
/// Relative error above which a numeric parameter counts as mismatched.
pub const PARAM_TOLERANCE: f64 = 1e-3;
/// Largest relative change a single suggestion asks for.
pub const MAX_STEP: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "code", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Issue {
    ExecFail { message: String },
    NotWatertight { meshes: Vec<usize> },
    Floating { components: Vec<usize> },
    SelfIntersect { pairs: u64 },
    /// Block `block` should be of kind `want`. `got` is `None` when the
    /// block is missing, `want` is `None` when it should not exist.
    ClassMismatch {
        block: usize,
        want: Option<BlockKind>,
        got: Option<BlockKind>,
    },
    ParamMismatch {
        block: usize,
        name: String,
        want: Value,
        got: Value,
    },
    Underspecified,
}

impl Issue {
    pub fn code(&self) -> &'static str {
        match self {
            Issue::ExecFail { .. } => "EXEC_FAIL",
            Issue::NotWatertight { .. } => "NOT_WATERTIGHT",
            Issue::Floating { .. } => "FLOATING",
            Issue::SelfIntersect { .. } => "SELF_INTERSECT",
            Issue::ClassMismatch { .. } => "CLASS_MISMATCH",
            Issue::ParamMismatch { .. } => "PARAM_MISMATCH",
            Issue::Underspecified => "UNDERSPECIFIED",
        }
    }
}

/// Multiply parameter (or modifier value) `param` of block `block` by `factor`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub block: usize,
    pub param: String,
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CritiqueReport {
    pub score: f64,
    pub validity: f64,
    pub intent_match: f64,
    pub issues: Vec<Issue>,
    pub suggestions: Vec<Suggestion>,
    pub critic: String,
}

impl CritiqueReport {
    pub fn exec_fail(message: impl Into<String>) -> CritiqueReport {
        CritiqueReport {
            score: 0.0,
            validity: 0.0,
            intent_match: 0.0,
            issues: vec![Issue::ExecFail {
                message: message.into(),
            }],
            suggestions: Vec::new(),
            critic: "geometric".into(),
        }
    }

    pub fn has(&self, code: &str) -> bool {
        self.issues.iter().any(|i| i.code() == code)
    }
}

/// Size words that bound a thickness-like parameter.
struct Qualifier {
    nouns: &'static [&'static str],
    kind: BlockKind,
    key: &'static str,
    thin: f64,
    thick: f64,
}

const QUALIFIERS: &[Qualifier] = &[
    Qualifier {
        nouns: &["shell", "shells", "skin", "skins", "face", "sheet", "sheets"],
        kind: BlockKind::Cellular,
        key: "sandwich",
        thin: 0.1,
        thick: 1.5,
    },
    Qualifier {
        nouns: &["ply", "plies", "layer", "layers", "lamellae"],
        kind: BlockKind::Helical,
        key: "ply_thickness",
        thin: 0.25,
        thick: 1.0,
    },
    Qualifier {
        nouns: &["cortex", "cortical", "wall", "walls"],
        kind: BlockKind::Tubular,
        key: "cortical_thickness",
        thin: 0.3,
        thick: 1.5,
    },
    Qualifier {
        nouns: &["slab", "plate", "panel", "board"],
        kind: BlockKind::Slab,
        key: "height",
        thin: 0.5,
        thick: 3.0,
    },
];

const THIN: &[&str] = &["thin", "thinner", "slim", "slender"];
const THICK: &[&str] = &["thick", "thicker", "heavy", "bulky"];
const QUALIFIER_WINDOW: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Bound {
    AtMost(f64),
    AtLeast(f64),
}

/// `(kind, key, bound)` for every size qualifier in the prompt.
fn qualifiers(prompt: &str) -> Vec<(BlockKind, &'static str, Bound)> {
    let toks = words(prompt);
    let mut out = Vec::new();
    for (i, t) in toks.iter().enumerate() {
        let thin = THIN.contains(&t.as_str());
        if !thin && !THICK.contains(&t.as_str()) {
            continue;
        }
        for q in QUALIFIERS {
            let hit = toks
                .iter()
                .skip(i + 1)
                .take(QUALIFIER_WINDOW)
                .any(|w| q.nouns.contains(&w.as_str()));
            if hit && !out.iter().any(|(k, key, _)| *k == q.kind && *key == q.key) {
                let b = if thin { Bound::AtMost(q.thin) } else { Bound::AtLeast(q.thick) };
                out.push((q.kind, q.key, b));
            }
        }
    }
    out
}

/// Key under which a block's generator records the value of `key`.
fn measured_key(kind: BlockKind, key: &str) -> Option<&'static str> {
    Some(match (kind, key) {
        (BlockKind::Helical, "noise") => "noise_deg",
        (BlockKind::Cellular, "sandwich") => "sandwich_thickness",
        (BlockKind::Cellular, "region_count") => "seed_count",
        (_, "smooth") => "smooth_levels",
        (BlockKind::Tubular, "gradient") => "gradient_factor",
        (BlockKind::Tubular, "tubule_radius") => return None,
        _ => return schema::lookup(kind, key).map(|s| s.key),
    })
}

fn is_modifier(key: &str) -> bool {
    schema::MODIFIERS.contains(&key)
}

fn applies(kind: BlockKind, key: &str) -> bool {
    if is_modifier(key) {
        modifiers_for(kind).contains(&key)
    } else {
        schema::lookup(kind, key).is_some_and(|s| !matches!(s.ty, ParamType::Word(_)))
    }
}

/// Value of a modifier as a number; absent modifiers read as zero, except
/// a cellular block's implicit smoothing level.
pub fn modifier_value(block: &Block, key: &str) -> f64 {
    match block.modifier(key) {
        Some(Modifier::Gradient { factor, .. }) => *factor,
        Some(Modifier::Sandwich { thickness }) => *thickness,
        Some(Modifier::Smooth { levels }) => f64::from(*levels),
        Some(Modifier::Noise { degrees }) => *degrees,
        None if key == "smooth" && block.kind == BlockKind::Cellular => f64::from(schema::DEFAULT_CELLULAR_SMOOTH),
        None => 0.0,
    }
}

/// Measured value of `key` for block `i`, falling back to the program.
fn got(scene: &Scene, program: &DesignProgram, i: usize, key: &str) -> f64 {
    let info = &scene.blocks[i];
    if let Some(v) = measured_key(info.kind, key).and_then(|m| info.measured.get(m)) {
        return *v;
    }
    let block = &program.blocks[i];
    if is_modifier(key) {
        modifier_value(block, key)
    } else {
        schema::number(block, key)
    }
}

/// The value a request can actually take: schema-clamped.
fn admissible(kind: BlockKind, key: &str, want: f64) -> f64 {
    if is_modifier(key) {
        let (lo, hi, _) = modifier_range(key);
        let v = want.clamp(lo, hi);
        if key == "smooth" {
            v.round()
        } else {
            v
        }
    } else {
        schema::lookup(kind, key).map_or(want, |s| s.clamp(want))
    }
}

fn relative_error(want: f64, got: f64) -> f64 {
    ((got - want).abs() / want.abs().max(1e-9)).min(1.0)
}

/// Presence requirement implied by a motif flag: `(key, wanted value)`.
fn flag_requirement(flag: Flag, kind: BlockKind) -> Option<(&'static str, f64)> {
    match (flag, kind) {
        (Flag::Gradient, BlockKind::Tubular) => Some(("gradient", 1.5)),
        (Flag::Sandwich | Flag::Layered, BlockKind::Cellular) => Some(("sandwich", 0.5)),
        (Flag::Smoothed, BlockKind::Cellular | BlockKind::Slab | BlockKind::Primitive) => Some(("smooth", 1.0)),
        (Flag::Random, BlockKind::Helical) => Some(("noise", 5.0)),
        (Flag::Random, BlockKind::Cellular) => Some(("randomness", 0.9)),
        _ => None,
    }
}

fn flag_satisfied(key: &str, v: f64) -> bool {
    match key {
        "gradient" => v > 0.0 && (v - 1.0).abs() > 1e-9,
        _ => v > 0.0,
    }
}

struct IntentCheck {
    score: f64,
    issues: Vec<Issue>,
    suggestions: Vec<Suggestion>,
}

fn check_intent(
    intent: &IntentSpec,
    prompt: &str,
    scene: &Scene,
    program: &DesignProgram,
    reference: Option<&[BlockKind]>,
) -> IntentCheck {
    let mut issues = Vec::new();
    let mut suggestions = Vec::new();
    if intent.is_underspecified() {
        issues.push(Issue::Underspecified);
    }

    let want_kinds: Option<&[BlockKind]> = if intent.kinds.is_empty() {
        reference
    } else {
        Some(&intent.kinds)
    };
    let got_kinds: Vec<BlockKind> = scene.blocks.iter().map(|b| b.kind).collect();
    let mut class_error = 0.0;
    if let Some(want) = want_kinds {
        let n = want.len().max(got_kinds.len());
        let mut wrong = 0;
        for i in 0..n {
            let (w, g) = (want.get(i).copied(), got_kinds.get(i).copied());
            if w != g {
                wrong += 1;
                issues.push(Issue::ClassMismatch { block: i, want: w, got: g });
            }
        }
        class_error = wrong as f64 / n.max(1) as f64;
    }

    let quals = qualifiers(prompt);
    let mut errors: Vec<f64> = Vec::new();
    for (i, info) in scene.blocks.iter().enumerate() {
        let kind = info.kind;
        let block = &program.blocks[i];
        let mut seen: Vec<String> = Vec::new();
        for (key, &raw) in &intent.numeric_params {
            if !applies(kind, key) {
                continue;
            }
            let want = admissible(kind, key, raw);
            let g = got(scene, program, i, key);
            let mut error = relative_error(want, g);
            if error > PARAM_TOLERANCE {
                issues.push(Issue::ParamMismatch {
                    block: i,
                    name: key.clone(),
                    want: Value::Float(want),
                    got: Value::Float(g),
                });
            } else {
                error = 0.0;
            }
            errors.push(error);
            seen.push(key.clone());
        }
        for (key, word) in &intent.word_params {
            let Some(spec) = schema::lookup(kind, key) else { continue };
            let ParamType::Word(options) = spec.ty else { continue };
            if !options.contains(&word.as_str()) {
                continue;
            }
            let g = schema::word(block, key);
            let error = if g == *word { 0.0 } else { 1.0 };
            if error > 0.0 {
                issues.push(Issue::ParamMismatch {
                    block: i,
                    name: spec.key.to_string(),
                    want: Value::Word(word.clone()),
                    got: Value::Word(g),
                });
            }
            errors.push(error);
            seen.push(spec.key.to_string());
        }
        for &(qkind, key, bound) in &quals {
            if qkind != kind || seen.iter().any(|s| s == key) {
                continue;
            }
            let g = got(scene, program, i, key);
            let (error, factor, want) = match bound {
                Bound::AtMost(b) => {
                    let e = ((g - b).max(0.0) / b).min(1.0);
                    (e, (0.95 * b / g).max(1.0 - MAX_STEP), 0.8 * b)
                }
                Bound::AtLeast(b) => {
                    let e = ((b - g).max(0.0) / b).min(1.0);
                    (e, (1.05 * b / g.max(1e-12)).min(1.0 / (1.0 - MAX_STEP)), 1.2 * b)
                }
            };
            if g <= 0.0 {
                // Nothing to scale; ask for the feature outright.
                issues.push(Issue::ParamMismatch {
                    block: i,
                    name: key.to_string(),
                    want: Value::Float(want),
                    got: Value::Float(g),
                });
                errors.push(1.0);
            } else {
                if error > 0.0 {
                    suggestions.push(Suggestion {
                        block: i,
                        param: key.to_string(),
                        factor,
                    });
                }
                errors.push(error);
            }
            seen.push(key.to_string());
        }
        for &flag in &intent.motif_flags {
            let Some((key, want)) = flag_requirement(flag, kind) else { continue };
            if seen.iter().any(|s| s == key) {
                continue;
            }
            let g = got(scene, program, i, key);
            let ok = flag_satisfied(key, g);
            if !ok {
                issues.push(Issue::ParamMismatch {
                    block: i,
                    name: key.to_string(),
                    want: Value::Float(want),
                    got: Value::Float(g),
                });
            }
            errors.push(if ok { 0.0 } else { 1.0 });
            seen.push(key.to_string());
        }
    }
    let param_error = if errors.is_empty() {
        0.0
    } else {
        errors.iter().sum::<f64>() / errors.len() as f64
    };
    IntentCheck {
        score: (1.0 - class_error) * (1.0 - param_error),
        issues,
        suggestions,
    }
}

/// Parameter nudges that usually clear a physical defect in a block.
fn physical_suggestions(b: &Block, block: usize) -> Vec<Suggestion> {
    let s = |param: &str, factor: f64| Suggestion {
        block,
        param: param.into(),
        factor,
    };
    match b.kind {
        BlockKind::Cellular => vec![s("wall_gap", 1.5)],
        BlockKind::Helical if schema::word(b, "fiber_profile") == "rectangle" => vec![s("fiber_width", 0.8)],
        BlockKind::Helical => vec![s("fiber_radius", 0.8)],
        BlockKind::Tubular => vec![s("spacing", 1.2)],
        BlockKind::Primitive => vec![s("spacing", 1.2)],
        BlockKind::Slab => vec![],
    }
}

/// Scores a state: `0.4 * validity + 0.6 * intent_match`, zero when the
/// program failed to execute.
pub fn evaluate(state: &DesignState, store: &RetrievalStore) -> CritiqueReport {
    let (Some(report), Some(scene), Some(program)) = (&state.report, &state.scene, &state.program) else {
        let msg = state
            .report
            .as_ref()
            .and_then(|r| r.warnings.first().cloned())
            .unwrap_or_else(|| "program did not execute".into());
        return CritiqueReport::exec_fail(msg);
    };
    if !report.executed {
        return CritiqueReport::exec_fail(
            report.warnings.first().cloned().unwrap_or_else(|| "no mesh produced".into()),
        );
    }

    let mut issues = Vec::new();
    let mut suggestions = Vec::new();
    let leaky: Vec<usize> = report
        .watertight_per_mesh
        .iter()
        .enumerate()
        .filter(|(_, w)| !**w)
        .map(|(i, _)| i)
        .collect();
    if !leaky.is_empty() {
        issues.push(Issue::NotWatertight { meshes: leaky });
    }
    if !report.floating_components.is_empty() {
        issues.push(Issue::Floating {
            components: report.floating_components.clone(),
        });
    }
    if report.self_intersection_pairs > 0 {
        issues.push(Issue::SelfIntersect {
            pairs: report.self_intersection_pairs,
        });
        for (i, b) in program.blocks.iter().enumerate() {
            suggestions.extend(physical_suggestions(b, i));
        }
    }

    let reference = if state.intent.kinds.is_empty() {
        retrieve(store, &state.prompt, 1)
            .hits
            .first()
            .filter(|h| h.score > 0.0)
            .map(|h| store.entries[h.index].descriptor.kinds.clone())
    } else {
        None
    };
    let check = check_intent(&state.intent, &state.prompt, scene, program, reference.as_deref());
    issues.extend(check.issues);
    suggestions.extend(check.suggestions);

    let validity = report.validity();
    let score = (VALIDITY_WEIGHT * validity + INTENT_WEIGHT * check.score).clamp(0.0, 1.0);
    CritiqueReport {
        score,
        validity,
        intent_match: check.score,
        issues,
        suggestions,
        critic: "geometric".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qualifier_detection() {
        let q = qualifiers("a cellular sandwich structure with thin shell layers");
        assert!(q.contains(&(BlockKind::Cellular, "sandwich", Bound::AtMost(0.1))));
        assert!(qualifiers("thin and then much later a shell").is_empty());
        let q = qualifiers("thick plate");
        assert_eq!(q, vec![(BlockKind::Slab, "height", Bound::AtLeast(3.0))]);
    }

    #[test]
    fn error_is_relative_and_capped() {
        assert_eq!(relative_error(10.0, 10.0), 0.0);
        assert!((relative_error(10.0, 12.0) - 0.2).abs() < 1e-12);
        assert_eq!(relative_error(1.0, 100.0), 1.0);
    }
}
