//! Diversification: jittered, restructured variants of a design that keep
//! its class and block structure.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::instruction::round2;
use crate::dsl::ast::{BlockKind, DesignProgram, Modifier, Value};
use crate::dsl::format;
use crate::dsl::format::format_name;
use crate::dsl::intent::{clamp_modifier, make_feasible};
use crate::dsl::schema::{self, ParamType};
use crate::geom::compile_program;
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JitterConfig {
    /// Relative half-width of the jitter for keys not listed in `relative`.
    pub default_relative: f64,
    /// Per-key relative half-widths; 0 freezes a key. Modifier values use
    /// the modifier name as key.
    pub relative: BTreeMap<String, f64>,
    /// Draws per variant before giving up on it.
    pub max_redraws: usize,
}

impl Default for JitterConfig {
    fn default() -> Self {
        let frozen = ["segments", "columns", "rows", "smooth"];
        Self {
            default_relative: 0.15,
            relative: frozen.iter().map(|k| (k.to_string(), 0.0)).collect(),
            max_redraws: 8,
        }
    }
}

impl JitterConfig {
    fn range(&self, key: &str) -> f64 {
        self.relative.get(key).copied().unwrap_or(self.default_relative)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub program: DesignProgram,
    /// Restructured source text; parses to `program`.
    pub text: String,
}

fn scale(v: f64, r: f64, rng: &mut Rng) -> f64 {
    v * (1.0 + rng.uniform(-r, r))
}

/// One jittered copy of `base` with a fresh seed.
fn jitter(base: &DesignProgram, cfg: &JitterConfig, rng: &mut Rng) -> DesignProgram {
    let mut p = base.clone();
    p.seed = rng.below(1 << 20);
    for block in &mut p.blocks {
        for (key, value) in block.params.iter_mut() {
            let Some(spec) = schema::lookup(block.kind, key) else { continue };
            let r = cfg.range(key);
            let Some(v) = value.as_f64() else { continue };
            if r == 0.0 || matches!(spec.ty, ParamType::Word(_)) {
                continue;
            }
            let j = scale(v, r, rng);
            *value = match spec.ty {
                ParamType::Int => Value::Int(spec.clamp(j.round()) as i64),
                _ => Value::Float(spec.clamp(round2(j))),
            };
        }
        for m in block.modifiers.iter_mut() {
            let r = cfg.range(m.keyword());
            if r == 0.0 {
                continue;
            }
            *m = match *m {
                Modifier::Gradient { axis, factor } => Modifier::Gradient {
                    axis,
                    factor: clamp_modifier("gradient", round2(scale(factor, r, rng)), factor),
                },
                Modifier::Sandwich { thickness } => Modifier::Sandwich {
                    thickness: clamp_modifier("sandwich", round2(scale(thickness, r, rng)), thickness),
                },
                Modifier::Noise { degrees } => Modifier::Noise {
                    degrees: clamp_modifier("noise", round2(scale(degrees, r, rng)), degrees),
                },
                Modifier::Smooth { levels } => Modifier::Smooth { levels },
            };
        }
    }
    p
}

const TOP_COMMENTS: &[&str] = &["# variant design", "# diversified from a base design", "# bgs program"];

fn block_comment(kind: BlockKind) -> &'static [&'static str] {
    match kind {
        BlockKind::Helical => &["# ply stack", "# fiber layup"],
        BlockKind::Cellular => &["# voronoi cells", "# cellular core"],
        BlockKind::Tubular => &["# tubule layout", "# porous matrix"],
        BlockKind::Slab => &["# base plate", "# slab"],
        BlockKind::Primitive => &["# primitive grid", "# parts"],
    }
}

/// Source text for `program` with shuffled statements, alternative key
/// spellings, random indentation and comments.
pub fn restructure(program: &DesignProgram, rng: &mut Rng) -> String {
    let ind = if rng.chance(0.5) { "  " } else { "    " };
    let mut out = String::new();
    if rng.chance(0.3) {
        out.push_str(rng.pick(TOP_COMMENTS));
        out.push('\n');
    }
    out.push_str(&format!("design {} {{\n{ind}seed {}\n", format_name(&program.name), program.seed));
    for block in &program.blocks {
        if rng.chance(0.3) {
            out.push_str(&format!("{ind}{}\n", rng.pick(block_comment(block.kind))));
        }
        out.push_str(&format!("{ind}{} {{\n", block.kind.keyword()));
        let mut stmts: Vec<String> = block
            .params
            .iter()
            .map(|(k, v)| {
                let spelling = match schema::lookup(block.kind, k) {
                    Some(spec) if !spec.aliases.is_empty() && rng.chance(0.4) => *rng.pick(spec.aliases),
                    _ => k.as_str(),
                };
                format!("{spelling} {v}")
            })
            .chain(block.modifiers.iter().map(|m| m.to_string()))
            .collect();
        rng.shuffle(&mut stmts);
        if !stmts.is_empty() && rng.chance(0.3) {
            let i = rng.below(stmts.len() as u64) as usize;
            stmts[i].push_str("  # tuned");
        }
        for s in stmts {
            out.push_str(&format!("{ind}{ind}{s}\n"));
        }
        out.push_str(&format!("{ind}}}\n"));
    }
    out.push_str("}\n");
    out
}

/// `n` compilable variants of `base` whose canonical texts differ from each
/// other and from the base. Fewer are returned only if redraws run out.
pub fn diversify_with(base: &DesignProgram, n: usize, rng: &mut Rng, cfg: &JitterConfig) -> Vec<Variant> {
    let mut seen: BTreeSet<String> = BTreeSet::from([format(base)]);
    let mut out = Vec::new();
    for _ in 0..n {
        for attempt in 0..cfg.max_redraws.max(1) {
            let mut p = jitter(base, cfg, rng);
            if attempt + 1 == cfg.max_redraws.max(1) {
                p.blocks.iter_mut().for_each(make_feasible);
            }
            let canon = format(&p);
            if seen.contains(&canon) || compile_program(&p).is_err() {
                continue;
            }
            seen.insert(canon);
            let text = restructure(&p, rng);
            out.push(Variant { program: p, text });
            break;
        }
    }
    out
}

pub fn diversify(base: &DesignProgram, n: usize, rng: &mut Rng) -> Vec<Variant> {
    diversify_with(base, n, rng, &JitterConfig::default())
}
