//! Instruction sampling: a template from the word banks filled with a
//! motif phrase of the target class and, optionally, explicit numeric
//! clauses that the intent parser reads back.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dsl::ast::{format_number, Block, BlockKind, DesignClass, DesignProgram};
use crate::dsl::banks::{fill_template, WordBanks};
use crate::dsl::intent::words;
use crate::dsl::schema;
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instruction {
    pub text: String,
    pub class: DesignClass,
    pub motif: String,
    /// Parameter values stated in the text.
    pub params: BTreeMap<String, f64>,
}

/// A quantity an instruction can state: `<value> <noun>`.
struct Clause {
    key: &'static str,
    noun: &'static str,
    lo: f64,
    hi: f64,
    integer: bool,
}

const fn c(key: &'static str, noun: &'static str, lo: f64, hi: f64, integer: bool) -> Clause {
    Clause {
        key,
        noun,
        lo,
        hi,
        integer,
    }
}

const HELICAL: &[Clause] = &[
    c("plies", "plies", 2.0, 32.0, true),
    c("rotation_deg", "degrees of rotation", 5.0, 45.0, true),
    c("fibers_per_ply", "fibers per ply", 4.0, 24.0, true),
    c("ply_thickness", "ply thickness", 0.2, 1.5, false),
];
const CELLULAR: &[Clause] = &[
    c("region_count", "cells", 4.0, 60.0, true),
    c("wall_gap", "wall gap", 0.05, 0.5, false),
    c("randomness", "randomness", 0.1, 1.0, false),
];
const TUBULAR: &[Clause] = &[
    c("tubule_count", "tubules", 4.0, 64.0, true),
    c("tubule_radius", "tubule radius", 0.2, 1.5, false),
    c("spacing", "spacing", 1.5, 4.0, false),
    c("cortical_thickness", "cortical thickness", 0.2, 1.5, false),
];
const PRIMITIVE: &[Clause] = &[
    c("columns", "columns", 1.0, 6.0, true),
    c("rows", "rows", 1.0, 6.0, true),
    c("spacing", "spacing", 2.0, 6.0, false),
];
const SLAB: &[Clause] = &[
    c("width", "wide", 4.0, 30.0, false),
    c("depth", "deep", 4.0, 30.0, false),
    c("height", "tall", 0.5, 4.0, false),
];

fn clauses(kind: BlockKind) -> &'static [Clause] {
    match kind {
        BlockKind::Helical => HELICAL,
        BlockKind::Cellular => CELLULAR,
        BlockKind::Tubular => TUBULAR,
        BlockKind::Primitive => PRIMITIVE,
        BlockKind::Slab => SLAB,
    }
}

const SLAB_WORDS: &[&str] = &["slab", "plate", "panel", "sheet", "board"];

/// Block kind a motif phrase asks for.
fn phrase_kind(class: DesignClass, phrase: &str) -> BlockKind {
    if class == DesignClass::General && words(phrase).iter().any(|w| SLAB_WORDS.contains(&w.as_str())) {
        BlockKind::Slab
    } else {
        class.default_kind()
    }
}

/// Rounds to two decimals so the printed value reads back exactly.
pub fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

fn clause_text(stated: &[(&Clause, f64)]) -> String {
    let parts: Vec<String> = stated
        .iter()
        .map(|(c, v)| format!("{} {}", format_number(*v), c.noun))
        .collect();
    match parts.as_slice() {
        [] => String::new(),
        [one] => format!(" with {one}"),
        [init @ .., last] => format!(" with {} and {last}", init.join(", ")),
    }
}

fn fill(banks: &WordBanks, rng: &mut Rng, shape: &str) -> String {
    let template = rng.pick(&banks.templates).clone();
    let p = &banks.primitive_bank;
    let verb = rng.pick(&p.verbs).clone();
    let medium = rng.pick(&p.mediums).clone();
    let tense = rng.pick(&p.tenses).clone();
    fill_template(&template, |slot| match slot {
        "verb" => verb.clone(),
        "medium" => medium.clone(),
        "tense" => tense.clone(),
        _ => shape.to_string(),
    })
}

fn pick_clauses<'a>(pool: &'a [Clause], rng: &mut Rng, max: usize) -> Vec<&'a Clause> {
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    rng.shuffle(&mut idx);
    let n = 1 + rng.below(max.min(pool.len()) as u64) as usize;
    let mut chosen: Vec<usize> = idx[..n].to_vec();
    chosen.sort_unstable();
    chosen.into_iter().map(|i| &pool[i]).collect()
}

/// Samples an instruction for `class`. Half of the samples state one to
/// three parameter values drawn from typical ranges.
pub fn generate_instruction(class: DesignClass, banks: &WordBanks, rng: &mut Rng) -> Instruction {
    let motif = rng.pick(banks.phrases(class)).clone();
    let mut stated = Vec::new();
    if rng.chance(0.5) {
        for c in pick_clauses(clauses(phrase_kind(class, &motif)), rng, 3) {
            let v = rng.uniform(c.lo, c.hi);
            stated.push((c, if c.integer { v.round() } else { round2(v) }));
        }
    }
    let shape = format!("{motif}{}", clause_text(&stated));
    Instruction {
        text: fill(banks, rng, &shape),
        class,
        motif,
        params: stated.iter().map(|(c, v)| (c.key.to_string(), *v)).collect(),
    }
}

fn readable(block: &Block, c: &Clause) -> Option<f64> {
    let v = schema::number(block, c.key);
    let exact = if c.integer { v.fract() == 0.0 } else { round2(v) == v };
    (exact && v > 0.0).then_some(v)
}

/// Instruction describing `program`: a motif phrase matching its first
/// block and, with probability `clause_prob`, some of its actual values.
pub fn instruction_for(
    program: &DesignProgram,
    class: DesignClass,
    banks: &WordBanks,
    rng: &mut Rng,
    clause_prob: f64,
) -> Instruction {
    let kind = program.blocks[0].kind;
    let phrases: Vec<&String> = banks
        .phrases(class)
        .iter()
        .filter(|p| class != DesignClass::General || phrase_kind(class, p) == kind)
        .collect();
    let motif = if phrases.is_empty() {
        rng.pick(banks.phrases(class)).clone()
    } else {
        (*rng.pick(&phrases)).clone()
    };
    let mut stated = Vec::new();
    if program.blocks.len() == 1 && rng.chance(clause_prob) {
        for c in pick_clauses(clauses(kind), rng, 2) {
            if let Some(v) = readable(&program.blocks[0], c) {
                stated.push((c, v));
            }
        }
    }
    let shape = format!("{motif}{}", clause_text(&stated));
    Instruction {
        text: fill(banks, rng, &shape),
        class,
        motif,
        params: stated.iter().map(|(c, v)| (c.key.to_string(), *v)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_intent;

    #[test]
    fn deterministic_and_filled() {
        let b = WordBanks::builtin();
        let a = generate_instruction(DesignClass::Helical, &b, &mut Rng::new(5));
        let c = generate_instruction(DesignClass::Helical, &b, &mut Rng::new(5));
        assert_eq!(a, c);
        assert!(!a.text.contains('{'));
        let n = b
            .phrases(DesignClass::Helical)
            .iter()
            .filter(|p| a.text.to_lowercase().contains(p.as_str()))
            .count();
        assert!(n >= 1);
    }

    #[test]
    fn stated_values_read_back() {
        let b = WordBanks::builtin();
        let mut rng = Rng::new(1);
        for class in DesignClass::ALL {
            for _ in 0..200 {
                let i = generate_instruction(class, &b, &mut rng);
                let intent = parse_intent(&i.text, &b);
                assert_eq!(intent.target_class.class(), Some(class), "{}", i.text);
                for (k, v) in &i.params {
                    assert_eq!(intent.numeric_params.get(k), Some(v), "{}", i.text);
                }
            }
        }
    }
}
