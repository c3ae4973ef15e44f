//! Parameter schemas: keys, aliases, types, hard ranges and defaults for
//! every block kind.

use super::ast::{Block, BlockKind, Value};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamType {
    Int,
    Float,
    Word(&'static [&'static str]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Default {
    Int(i64),
    Float(f64),
    Word(&'static str),
}

impl Default {
    pub fn value(self) -> Value {
        match self {
            Default::Int(i) => Value::Int(i),
            Default::Float(f) => Value::Float(f),
            Default::Word(w) => Value::Word(w.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub key: &'static str,
    pub aliases: &'static [&'static str],
    pub ty: ParamType,
    pub min: f64,
    pub max: f64,
    /// Lower bound excluded (`(min, max]`).
    pub min_exclusive: bool,
    pub default: Default,
}

impl ParamSpec {
    pub fn check(&self, v: f64) -> bool {
        let lower = if self.min_exclusive {
            v > self.min
        } else {
            v >= self.min
        };
        lower && v <= self.max && v.is_finite()
    }

    /// Nearest admissible value; an excluded bound snaps to the default.
    pub fn clamp(&self, v: f64) -> f64 {
        if !v.is_finite() {
            return self.default.value().as_f64().unwrap_or(self.min);
        }
        let mut c = v.clamp(self.min, self.max);
        if self.min_exclusive && c <= self.min {
            c = self.default.value().as_f64().unwrap_or(self.max);
        }
        if self.ty == ParamType::Int {
            c = c.round().clamp(self.min.ceil(), self.max.floor());
        }
        c
    }

    pub fn range_text(&self) -> String {
        let open = if self.min_exclusive { '(' } else { '[' };
        format!("{open}{}, {}]", self.min, self.max)
    }

    /// Builds a value of this parameter's type from a number, clamped.
    pub fn value_from(&self, v: f64) -> Value {
        let c = self.clamp(v);
        match self.ty {
            ParamType::Int => Value::Int(c as i64),
            _ => Value::Float(c),
        }
    }
}

const fn int(key: &'static str, aliases: &'static [&'static str], min: f64, max: f64, d: i64) -> ParamSpec {
    ParamSpec {
        key,
        aliases,
        ty: ParamType::Int,
        min,
        max,
        min_exclusive: false,
        default: Default::Int(d),
    }
}

const fn float(
    key: &'static str,
    aliases: &'static [&'static str],
    min: f64,
    max: f64,
    min_exclusive: bool,
    d: f64,
) -> ParamSpec {
    ParamSpec {
        key,
        aliases,
        ty: ParamType::Float,
        min,
        max,
        min_exclusive,
        default: Default::Float(d),
    }
}

pub const FIBER_PROFILES: &[&str] = &["cylinder", "rectangle"];
pub const PRIMITIVE_SHAPES: &[&str] = &["cube", "cylinder", "sphere"];

pub const HELICAL: &[ParamSpec] = &[
    int("plies", &["layers"], 1.0, 64.0, 8),
    float("ply_thickness", &["thickness"], 0.0, 10.0, true, 0.5),
    float("rotation_deg", &["rotation", "angle"], -180.0, 180.0, false, 16.0),
    int("fibers_per_ply", &["fibers"], 1.0, 64.0, 12),
    ParamSpec {
        key: "fiber_profile",
        aliases: &["profile"],
        ty: ParamType::Word(FIBER_PROFILES),
        min: 0.0,
        max: 0.0,
        min_exclusive: false,
        default: Default::Word("cylinder"),
    },
    float("fiber_radius", &["radius"], 0.0, 5.0, true, 0.25),
    float("fiber_width", &[], 0.0, 10.0, true, 0.6),
    float("footprint", &["diameter"], 0.0, 1000.0, true, 10.0),
];

pub const CELLULAR: &[ParamSpec] = &[
    int("region_count", &["regions", "cells"], 1.0, 200.0, 24),
    float("randomness", &["jitter"], 0.0, 1.0, false, 0.5),
    float("wall_gap", &["gap"], 0.0, 5.0, false, 0.15),
    float("width", &[], 0.0, 1000.0, true, 10.0),
    float("depth", &[], 0.0, 1000.0, true, 10.0),
    float("height", &[], 0.0, 1000.0, true, 10.0),
];

pub const TUBULAR: &[ParamSpec] = &[
    int("tubule_count", &["tubules"], 0.0, 400.0, 16),
    float("tubule_radius", &["radius"], 0.0, 50.0, true, 0.6),
    float("ellipticity", &["aspect"], 1.0, 10.0, false, 1.0),
    float("spacing", &["pitch"], 0.0, 100.0, true, 1.8),
    float("cortical_thickness", &["cortex"], 0.0, 50.0, false, 0.8),
    float("width", &[], 0.0, 1000.0, true, 10.0),
    float("depth", &[], 0.0, 1000.0, true, 10.0),
    float("height", &[], 0.0, 1000.0, true, 4.0),
    int("segments", &[], 8.0, 256.0, 64),
];

pub const SLAB: &[ParamSpec] = &[
    float("width", &[], 0.0, 1000.0, true, 10.0),
    float("depth", &[], 0.0, 1000.0, true, 10.0),
    float("height", &["thickness"], 0.0, 1000.0, true, 1.0),
];

pub const PRIMITIVE: &[ParamSpec] = &[
    ParamSpec {
        key: "shape",
        aliases: &[],
        ty: ParamType::Word(PRIMITIVE_SHAPES),
        min: 0.0,
        max: 0.0,
        min_exclusive: false,
        default: Default::Word("cube"),
    },
    float("size", &[], 0.0, 100.0, true, 2.0),
    int("columns", &["cols"], 1.0, 20.0, 1),
    int("rows", &[], 1.0, 20.0, 1),
    float("spacing", &["pitch"], 0.0, 200.0, true, 3.0),
    float("rotation_deg", &["rotation", "angle"], -180.0, 180.0, false, 0.0),
];

pub fn params_for(kind: BlockKind) -> &'static [ParamSpec] {
    match kind {
        BlockKind::Helical => HELICAL,
        BlockKind::Cellular => CELLULAR,
        BlockKind::Tubular => TUBULAR,
        BlockKind::Slab => SLAB,
        BlockKind::Primitive => PRIMITIVE,
    }
}

/// Looks up a key or alias within a kind's schema.
pub fn lookup(kind: BlockKind, name: &str) -> Option<&'static ParamSpec> {
    params_for(kind)
        .iter()
        .find(|p| p.key == name || p.aliases.contains(&name))
}

pub const MODIFIERS: &[&str] = &["gradient", "sandwich", "smooth", "noise"];

pub fn modifiers_for(kind: BlockKind) -> &'static [&'static str] {
    match kind {
        BlockKind::Helical => &["noise"],
        BlockKind::Cellular => &["sandwich", "smooth"],
        BlockKind::Tubular => &["gradient"],
        BlockKind::Slab | BlockKind::Primitive => &["smooth"],
    }
}

/// Modifier argument ranges: (min, max, min_exclusive).
pub fn modifier_range(name: &str) -> (f64, f64, bool) {
    match name {
        "gradient" => (0.0, 10.0, true),
        "sandwich" => (0.0, 100.0, false),
        "smooth" => (0.0, 3.0, false),
        "noise" => (0.0, 90.0, false),
        _ => (f64::NEG_INFINITY, f64::INFINITY, false),
    }
}

/// Cellular blocks smooth once unless told otherwise.
pub const DEFAULT_CELLULAR_SMOOTH: u32 = 1;

/// Every keyword accepted somewhere in a block of `kind`.
pub fn block_keywords(kind: BlockKind) -> Vec<&'static str> {
    let mut v: Vec<&'static str> = Vec::new();
    for p in params_for(kind) {
        v.push(p.key);
        v.extend_from_slice(p.aliases);
    }
    v.extend_from_slice(modifiers_for(kind));
    v
}

/// Effective numeric parameter of a block: explicit value or default.
pub fn number(block: &Block, key: &str) -> f64 {
    if let Some(v) = block.params.get(key).and_then(Value::as_f64) {
        return v;
    }
    lookup(block.kind, key)
        .and_then(|p| p.default.value().as_f64())
        .unwrap_or(0.0)
}

pub fn word(block: &Block, key: &str) -> String {
    if let Some(w) = block.params.get(key).and_then(|v| v.as_word()) {
        return w.to_string();
    }
    match lookup(block.kind, key).map(|p| p.default) {
        Some(Default::Word(w)) => w.to_string(),
        _ => String::new(),
    }
}

/// Levenshtein distance over characters.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut cur = vec![i + 1; b.len() + 1];
        for j in 0..b.len() {
            let sub = prev[j] + usize::from(ca != b[j]);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_keywords_are_not_one_substitution_apart() {
        // A single typo must never turn one valid key into another.
        for kind in BlockKind::ALL {
            let kws = block_keywords(kind);
            for (i, a) in kws.iter().enumerate() {
                for b in &kws[i + 1..] {
                    assert!(edit_distance(a, b) >= 2, "{kind}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn defaults_satisfy_ranges() {
        for kind in BlockKind::ALL {
            for p in params_for(kind) {
                match (p.ty, p.default) {
                    (ParamType::Word(opts), Default::Word(w)) => assert!(opts.contains(&w)),
                    (_, d) => assert!(p.check(d.value().as_f64().unwrap()), "{}", p.key),
                }
            }
        }
    }

    #[test]
    fn clamp_respects_exclusive_bound() {
        let t = lookup(BlockKind::Helical, "thickness").unwrap();
        assert_eq!(t.clamp(0.0), 0.5);
        assert_eq!(t.clamp(20.0), 10.0);
        let plies = lookup(BlockKind::Helical, "plies").unwrap();
        assert_eq!(plies.clamp(99.0), 64.0);
        assert_eq!(plies.clamp(3.6), 4.0);
    }
}
