//! Benchmark prompt suites and the generator behind the shipped one.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::instruction::round2;
use crate::dataset::library::{base_library, general_library};
use crate::dsl::ast::DesignClass;
use crate::dsl::WordBanks;
use crate::rng::Rng;

const SHIPPED: &str = include_str!("../../data/bench_suite.json");

pub const PROMPT_PREFIX: &str = "Write a BGS script to make a";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];

    pub fn name(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchPrompt {
    pub id: String,
    pub text: String,
    pub difficulty: Difficulty,
    /// Class names the prompt is about; empty for open-vocabulary prompts.
    pub classes: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub expected_params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSuite {
    pub name: String,
    pub prompts: Vec<BenchPrompt>,
}

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("invalid suite JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("suite has no prompts")]
    Empty,
    #[error("duplicate prompt id {0}")]
    DuplicateId(String),
    #[error("prompt {0} has empty text")]
    EmptyText(String),
}

impl BenchmarkSuite {
    pub fn from_json(text: &str) -> Result<BenchmarkSuite, SuiteError> {
        let suite: BenchmarkSuite = serde_json::from_str(text)?;
        suite.validate()?;
        Ok(suite)
    }

    pub fn load(path: &Path) -> Result<BenchmarkSuite, SuiteError> {
        BenchmarkSuite::from_json(&std::fs::read_to_string(path)?)
    }

    /// The 320-prompt suite shipped with the crate.
    pub fn shipped() -> BenchmarkSuite {
        BenchmarkSuite::from_json(SHIPPED).expect("shipped suite is valid")
    }

    pub fn validate(&self) -> Result<(), SuiteError> {
        if self.prompts.is_empty() {
            return Err(SuiteError::Empty);
        }
        let mut ids = BTreeSet::new();
        for p in &self.prompts {
            if !ids.insert(p.id.as_str()) {
                return Err(SuiteError::DuplicateId(p.id.clone()));
            }
            if p.text.trim().is_empty() {
                return Err(SuiteError::EmptyText(p.id.clone()));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("suite serializes") + "\n"
    }

    pub fn count(&self, d: Difficulty) -> usize {
        self.prompts.iter().filter(|p| p.difficulty == d).count()
    }

    /// The prompts of one difficulty, as a suite of their own.
    pub fn subset(&self, d: Difficulty) -> BenchmarkSuite {
        BenchmarkSuite {
            name: format!("{}_{}", self.name, d.name()),
            prompts: self.prompts.iter().filter(|p| p.difficulty == d).cloned().collect(),
        }
    }
}

/// A numeric constraint a prompt can state.
struct Quantity {
    key: &'static str,
    noun: &'static str,
    lo: f64,
    hi: f64,
    integer: bool,
}

const fn q(key: &'static str, noun: &'static str, lo: f64, hi: f64, integer: bool) -> Quantity {
    Quantity {
        key,
        noun,
        lo,
        hi,
        integer,
    }
}

const HELICAL_QUANTITIES: &[Quantity] = &[
            q("plies", "plies", 4.0, 24.0, true),
            q("rotation_deg", "degrees of rotation", 10.0, 40.0, true),
            q("fibers_per_ply", "fibers per ply", 6.0, 16.0, true),
            q("ply_thickness", "ply thickness", 0.3, 1.0, false),
        ];

const CELLULAR_QUANTITIES: &[Quantity] = &[
            q("region_count", "cells", 6.0, 40.0, true),
            q("wall_gap", "wall gap", 0.1, 0.3, false),
            q("randomness", "randomness", 0.2, 0.9, false),
        ];

const TUBULAR_QUANTITIES: &[Quantity] = &[
            q("tubule_count", "tubules", 4.0, 25.0, true),
            q("tubule_radius", "tubule radius", 0.3, 0.8, false),
            q("cortical_thickness", "cortical thickness", 0.3, 1.0, false),
        ];

const GENERAL_QUANTITIES: &[Quantity] = &[
            q("columns", "columns", 2.0, 5.0, true),
            q("rows", "rows", 2.0, 4.0, true),
            q("spacing", "spacing", 3.0, 6.0, false),
        ];

fn quantities(class: DesignClass) -> &'static [Quantity] {
    match class {
        DesignClass::Helical => HELICAL_QUANTITIES,
        DesignClass::Cellular => CELLULAR_QUANTITIES,
        DesignClass::Tubular => TUBULAR_QUANTITIES,
        DesignClass::General => GENERAL_QUANTITIES,
    }
}

/// Out-of-range requests for the extrapolation prompts.
const EXTREMES: &[(DesignClass, &str, &str, f64)] = &[
    (DesignClass::Helical, "plies", "plies", 90.0),
    (DesignClass::Helical, "rotation_deg", "degrees of rotation", 240.0),
    (DesignClass::Cellular, "region_count", "cells", 400.0),
    (DesignClass::Tubular, "tubule_count", "tubules", 600.0),
    (DesignClass::Tubular, "tubule_radius", "tubule radius", 4.0),
    (DesignClass::General, "columns", "columns", 30.0),
];

const FLAGGED: &[(DesignClass, &str)] = &[
    (DesignClass::Helical, "with random rotation noise"),
    (DesignClass::Helical, "with noisy ply angles"),
    (DesignClass::Cellular, "with thin shell layers"),
    (DesignClass::Cellular, "with thick face sheets"),
    (DesignClass::Cellular, "that is smoothed"),
    (DesignClass::Cellular, "in a sandwich layout"),
    (DesignClass::Tubular, "with gradient porosity"),
    (DesignClass::Tubular, "that is functionally graded"),
    (DesignClass::Tubular, "with a thin cortical wall"),
    (DesignClass::Helical, "with thin plies"),
];

const OPEN_VOCABULARY: &[(&str, &[&str])] = &[
    ("bookshelf with a smoothed cellular motif", &["general", "cellular"]),
    ("chair with tubular legs", &["tubular"]),
    ("lamp shade made of a voronoi foam", &["cellular"]),
    ("helmet shell with a bouligand layup", &["helical"]),
    ("table top with hoof wall inspired tubules", &["tubular"]),
    ("sandal sole with a cellular sandwich core", &["cellular"]),
    ("flower pot", &[]),
    ("dining table", &[]),
    ("coffee mug", &[]),
    ("bridge deck on a row of cylinders", &["general"]),
    ("protective case inspired by the dactyl club", &["helical"]),
    ("bone implant with porous tubules", &["tubular"]),
];

fn value(rng: &mut Rng, q: &Quantity) -> f64 {
    let v = rng.uniform(q.lo, q.hi);
    if q.integer {
        v.round()
    } else {
        round2(v)
    }
}

fn stated(rng: &mut Rng, class: DesignClass, max: usize) -> (String, BTreeMap<String, f64>) {
    let pool = quantities(class);
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    rng.shuffle(&mut idx);
    let n = 1 + rng.below(max.min(pool.len()) as u64) as usize;
    let mut chosen = idx[..n].to_vec();
    chosen.sort_unstable();
    let mut parts = Vec::new();
    let mut params = BTreeMap::new();
    for i in chosen {
        let v = value(rng, &pool[i]);
        parts.push(format!("{} {}", crate::dsl::ast::format_number(v), pool[i].noun));
        params.insert(pool[i].key.to_string(), v);
    }
    let clause = match parts.as_slice() {
        [one] => format!("with {one}"),
        [init @ .., last] => format!("with {} and {last}", init.join(", ")),
        [] => String::new(),
    };
    (clause, params)
}

fn general_phrases(banks: &WordBanks, slab: bool) -> Vec<String> {
    let slabby = |p: &str| ["slab", "plate", "panel"].iter().any(|w| p.contains(w));
    banks
        .phrases(DesignClass::General)
        .iter()
        .filter(|p| slabby(p) == slab)
        .cloned()
        .collect()
}

/// The shipped suite's generator: 56 easy, 88 medium and 176 hard prompts.
pub fn generate_suite(seed: u64) -> BenchmarkSuite {
    let banks = WordBanks::builtin();
    let mut rng = Rng::new(seed);
    let mut prompts = Vec::new();
    let mut push = |difficulty: Difficulty, shape: String, classes: Vec<String>, expected: BTreeMap<String, f64>| {
        let n = prompts.len();
        prompts.push(BenchPrompt {
            id: format!("{}_{:03}", difficulty.name(), n),
            text: format!("{PROMPT_PREFIX} {shape}"),
            difficulty,
            classes,
            expected_params: expected,
        });
    };

    // Easy: every motif phrase plus the library captions, 14 per class.
    for class in DesignClass::ALL {
        let mut shapes: Vec<String> = banks.phrases(class).to_vec();
        let captions: Vec<String> = if class == DesignClass::General {
            general_library().into_iter().map(|g| g.caption).collect()
        } else {
            base_library().into_iter().filter(|b| b.class == class).map(|b| b.caption).collect()
        };
        shapes.extend(captions.into_iter().take(14 - shapes.len().min(14)));
        shapes.truncate(14);
        for s in shapes {
            push(Difficulty::Easy, s, vec![class.name().into()], BTreeMap::new());
        }
    }

    // Medium: one motif with one or two explicit values, 22 per class.
    for class in DesignClass::ALL {
        let phrases: Vec<String> = if class == DesignClass::General {
            general_phrases(&banks, false)
        } else {
            banks.phrases(class).to_vec()
        };
        for _ in 0..22 {
            let motif = rng.pick(&phrases).clone();
            let (clause, params) = stated(&mut rng, class, 2);
            push(Difficulty::Medium, format!("{motif} {clause}"), vec![class.name().into()], params);
        }
    }

    // Hard: motif combinations, flags and qualifiers, extrapolations and
    // open-vocabulary objects, in rotation.
    let slabs = general_phrases(&banks, true);
    for i in 0..176 {
        match i % 4 {
            0 => {
                let a = *rng.pick(&DesignClass::BIO);
                let motif = rng.pick(banks.phrases(a)).clone();
                if rng.chance(0.5) {
                    let slab = rng.pick(&slabs).clone();
                    push(
                        Difficulty::Hard,
                        format!("{motif} resting on a {slab}"),
                        vec![a.name().into(), "general".into()],
                        BTreeMap::new(),
                    );
                } else {
                    let others: Vec<DesignClass> = DesignClass::BIO.into_iter().filter(|c| *c != a).collect();
                    let b = *rng.pick(&others);
                    let second = rng.pick(banks.phrases(b)).clone();
                    push(
                        Difficulty::Hard,
                        format!("{motif} combined with {second}"),
                        vec![a.name().into(), b.name().into()],
                        BTreeMap::new(),
                    );
                }
            }
            1 => {
                let (class, flag) = *rng.pick(FLAGGED);
                let motif = rng.pick(banks.phrases(class)).clone();
                let (clause, params) = if rng.chance(0.5) {
                    stated(&mut rng, class, 1)
                } else {
                    (String::new(), BTreeMap::new())
                };
                let joined = if flag.starts_with("with") {
                    clause.replacen("with", "and", 1)
                } else {
                    clause
                };
                let shape = [motif.as_str(), flag, joined.as_str()]
                    .iter()
                    .filter(|s| !s.is_empty())
                    .cloned()
                    .collect::<Vec<_>>()
                    .join(" ");
                push(Difficulty::Hard, shape, vec![class.name().into()], params);
            }
            2 => {
                let (class, key, noun, v) = *rng.pick(EXTREMES);
                let phrases: Vec<String> = if class == DesignClass::General {
                    general_phrases(&banks, false)
                } else {
                    banks.phrases(class).to_vec()
                };
                let motif = rng.pick(&phrases).clone();
                let v = (v * rng.uniform(0.8, 1.2)).round();
                push(
                    Difficulty::Hard,
                    format!("{motif} with {v} {noun}"),
                    vec![class.name().into()],
                    BTreeMap::from([(key.to_string(), v)]),
                );
            }
            _ => {
                let (shape, classes) = *rng.pick(OPEN_VOCABULARY);
                let size = if rng.chance(0.5) {
                    format!(" about {} mm across", 10 * (1 + rng.below(9)))
                } else {
                    String::new()
                };
                push(
                    Difficulty::Hard,
                    format!("{shape}{size}"),
                    classes.iter().map(|c| c.to_string()).collect(),
                    BTreeMap::new(),
                );
            }
        }
    }
    BenchmarkSuite {
        name: "bgs320".into(),
        prompts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_suite_shape() {
        let s = generate_suite(2024);
        assert_eq!(s.prompts.len(), 320);
        assert_eq!(s.count(Difficulty::Easy), 56);
        assert_eq!(s.count(Difficulty::Medium), 88);
        assert_eq!(s.count(Difficulty::Hard), 176);
        s.validate().unwrap();
        assert!(s.prompts.iter().all(|p| p.text.starts_with(PROMPT_PREFIX)));
    }

    #[test]
    fn shipped_suite_matches_the_generator() {
        assert_eq!(BenchmarkSuite::shipped(), generate_suite(2024));
    }
}
