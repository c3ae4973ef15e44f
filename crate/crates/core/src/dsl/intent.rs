//! Prompt-to-intent extraction and the deterministic intent-to-program
//! generator.
//!
//! Prompts are lowercased and split into word tokens. Motif phrases from
//! the word banks are matched longest first; numerals bind to the nearest
//! parameter noun at most three tokens away.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::ast::{Axis, Block, BlockKind, DesignClass, DesignProgram, Modifier, Value};
use super::banks::WordBanks;
use super::schema::{self, modifier_range, ParamType};
use crate::geom::compile::{primitive_params, tubular_params};
use crate::geom::general::min_spacing;
use crate::geom::tubular::check_layout;
use crate::geom::GeomError;

/// How far (in tokens) a numeral may sit from the noun it quantifies.
pub const BIND_WINDOW: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetClass {
    Helical,
    Cellular,
    Tubular,
    General,
    Composite,
}

impl TargetClass {
    pub fn from_class(c: DesignClass) -> TargetClass {
        match c {
            DesignClass::Helical => TargetClass::Helical,
            DesignClass::Cellular => TargetClass::Cellular,
            DesignClass::Tubular => TargetClass::Tubular,
            DesignClass::General => TargetClass::General,
        }
    }

    pub fn class(self) -> Option<DesignClass> {
        match self {
            TargetClass::Helical => Some(DesignClass::Helical),
            TargetClass::Cellular => Some(DesignClass::Cellular),
            TargetClass::Tubular => Some(DesignClass::Tubular),
            TargetClass::General => Some(DesignClass::General),
            TargetClass::Composite => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self.class() {
            Some(c) => c.name(),
            None => "composite",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flag {
    Fibrous,
    Layered,
    Gradient,
    Smoothed,
    Sandwich,
    Random,
}

impl Flag {
    pub const ALL: [Flag; 6] = [
        Flag::Fibrous,
        Flag::Layered,
        Flag::Gradient,
        Flag::Smoothed,
        Flag::Sandwich,
        Flag::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Flag::Fibrous => "fibrous",
            Flag::Layered => "layered",
            Flag::Gradient => "gradient",
            Flag::Smoothed => "smoothed",
            Flag::Sandwich => "sandwich",
            Flag::Random => "random",
        }
    }

    pub fn from_name(s: &str) -> Option<Flag> {
        Flag::ALL.into_iter().find(|f| f.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentSpec {
    pub target_class: TargetClass,
    /// Block kinds in order of first mention.
    pub kinds: Vec<BlockKind>,
    /// Parameter keys (schema keys, or modifier names) to values.
    pub numeric_params: BTreeMap<String, f64>,
    pub word_params: BTreeMap<String, String>,
    pub motif_flags: BTreeSet<Flag>,
    pub free_terms: Vec<String>,
}

impl IntentSpec {
    pub fn for_class(class: DesignClass) -> IntentSpec {
        IntentSpec {
            target_class: TargetClass::from_class(class),
            kinds: vec![class.default_kind()],
            numeric_params: BTreeMap::new(),
            word_params: BTreeMap::new(),
            motif_flags: BTreeSet::new(),
            free_terms: Vec::new(),
        }
    }

    pub fn classes(&self) -> Vec<DesignClass> {
        let mut out: Vec<DesignClass> = Vec::new();
        for k in &self.kinds {
            if !out.contains(&k.class()) {
                out.push(k.class());
            }
        }
        out
    }

    /// No class, parameter or flag was recognized.
    pub fn is_underspecified(&self) -> bool {
        self.kinds.is_empty() && self.numeric_params.is_empty() && self.motif_flags.is_empty()
    }
}

/// Lowercase word tokens. A dot is kept only between two digits.
pub fn words(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut cur = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let decimal_point = c == '.'
            && i > 0
            && chars[i - 1].is_ascii_digit()
            && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit());
        if c.is_alphanumeric() || decimal_point {
            cur.extend(c.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn numeral(tok: &str) -> Option<f64> {
    if tok.starts_with(|c: char| c.is_ascii_digit()) && tok.chars().all(|c| c.is_ascii_digit() || c == '.') {
        tok.parse().ok()
    } else {
        None
    }
}

/// `NxM` grid tokens such as `3x4`.
fn grid(tok: &str) -> Option<(f64, f64)> {
    let (a, b) = tok.split_once('x')?;
    Some((numeral(a)?, numeral(b)?))
}

/// Longest-first phrase lookup keyed by first token.
struct Matcher<T> {
    by_first: HashMap<String, Vec<(Vec<String>, T)>>,
}

impl<T: Copy> Matcher<T> {
    fn new(entries: impl IntoIterator<Item = (String, T)>) -> Self {
        let mut by_first: HashMap<String, Vec<(Vec<String>, T)>> = HashMap::new();
        for (phrase, payload) in entries {
            let toks = words(&phrase);
            if let Some(first) = toks.first() {
                by_first.entry(first.clone()).or_default().push((toks, payload));
            }
        }
        for list in by_first.values_mut() {
            list.sort_by_key(|e| std::cmp::Reverse(e.0.len()));
        }
        Matcher { by_first }
    }

    fn at(&self, toks: &[String], i: usize) -> Option<(usize, T)> {
        let list = self.by_first.get(&toks[i])?;
        list.iter()
            .find(|(p, _)| toks[i..].starts_with(p))
            .map(|(p, t)| (p.len(), *t))
    }

    /// Non-overlapping matches scanning left to right: (start, len, payload).
    fn scan(&self, toks: &[String]) -> Vec<(usize, usize, T)> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < toks.len() {
            match self.at(toks, i) {
                Some((len, t)) => {
                    out.push((i, len, t));
                    i += len;
                }
                None => i += 1,
            }
        }
        out
    }
}

const STOPWORDS: &[&str] = &[
    "a", "an", "the", "with", "and", "of", "that", "to", "it", "in", "on", "for", "by", "is", "which", "me",
    "i", "my", "you", "can", "need", "please", "using", "mm", "each", "per", "about", "some", "its", "be",
    "into", "from", "as", "at", "like", "want", "goal", "this", "script", "blender", "python", "code", "bpy",
];

const GENERAL_SLAB_WORDS: &[&str] = &["slab", "plate", "panel", "sheet", "shelf", "shelves", "bookshelf", "board"];

const WORD_PARAMS: &[(&str, &str, &str)] = &[
    ("rectangular fibers", "fiber_profile", "rectangle"),
    ("rectangular fibres", "fiber_profile", "rectangle"),
    ("ribbon fibers", "fiber_profile", "rectangle"),
    ("cylindrical fibers", "fiber_profile", "cylinder"),
    ("round fibers", "fiber_profile", "cylinder"),
    ("spheres", "shape", "sphere"),
    ("sphere", "shape", "sphere"),
    ("balls", "shape", "sphere"),
    ("cylinders", "shape", "cylinder"),
    ("cylinder", "shape", "cylinder"),
    ("rods", "shape", "cylinder"),
    ("cubes", "shape", "cube"),
    ("cube", "shape", "cube"),
    ("boxes", "shape", "cube"),
];

fn kind_for_phrase(class: DesignClass, phrase: &str) -> BlockKind {
    if class == DesignClass::General && words(phrase).iter().any(|w| GENERAL_SLAB_WORDS.contains(&w.as_str())) {
        BlockKind::Slab
    } else {
        class.default_kind()
    }
}

pub fn parse_intent(prompt: &str, banks: &WordBanks) -> IntentSpec {
    let toks = words(prompt);
    let mut used = vec![false; toks.len()];
    let mark = |used: &mut Vec<bool>, start: usize, len: usize| {
        for u in &mut used[start..start + len] {
            *u = true;
        }
    };

    let mut motif = Vec::new();
    for class in DesignClass::ALL {
        for phrase in banks.phrases(class).iter().chain(banks.class_words(class)) {
            motif.push((phrase.clone(), kind_for_phrase(class, phrase)));
        }
    }
    let mut kinds: Vec<BlockKind> = Vec::new();
    for (start, len, kind) in Matcher::new(motif).scan(&toks) {
        mark(&mut used, start, len);
        if !kinds.contains(&kind) {
            kinds.push(kind);
        }
    }

    let flag_entries = banks
        .flags
        .iter()
        .filter_map(|(name, list)| Flag::from_name(name).map(|f| (f, list)))
        .flat_map(|(f, list)| list.iter().map(move |p| (p.clone(), f)));
    let mut motif_flags = BTreeSet::new();
    for (start, len, flag) in Matcher::new(flag_entries).scan(&toks) {
        mark(&mut used, start, len);
        motif_flags.insert(flag);
    }

    let keys: Vec<&String> = banks.param_nouns.keys().collect();
    let noun_entries = banks
        .param_nouns
        .iter()
        .enumerate()
        .flat_map(|(i, (_, list))| list.iter().map(move |p| (p.clone(), i)));
    let nouns = Matcher::new(noun_entries).scan(&toks);
    for &(start, len, _) in &nouns {
        mark(&mut used, start, len);
    }

    let mut numeric_params = BTreeMap::new();
    for (i, tok) in toks.iter().enumerate() {
        if let Some((c, r)) = grid(tok) {
            numeric_params.entry("columns".to_string()).or_insert(c);
            numeric_params.entry("rows".to_string()).or_insert(r);
            used[i] = true;
            continue;
        }
        let Some(v) = numeral(tok) else { continue };
        used[i] = true;
        // Nearest noun; at equal distance the following noun wins.
        let best = nouns
            .iter()
            .filter_map(|&(start, len, key)| {
                let d = if start > i {
                    start - i
                } else if start + len <= i {
                    i - (start + len - 1)
                } else {
                    return None;
                };
                (d <= BIND_WINDOW).then_some((d, start < i, key))
            })
            .min();
        if let Some((_, _, key)) = best {
            numeric_params.entry(keys[key].clone()).or_insert(v.abs());
        }
    }

    let mut word_params = BTreeMap::new();
    let word_matcher = Matcher::new(WORD_PARAMS.iter().enumerate().map(|(i, (p, _, _))| (p.to_string(), i)));
    for (start, len, idx) in word_matcher.scan(&toks) {
        let (_, key, value) = WORD_PARAMS[idx];
        word_params.entry(key.to_string()).or_insert(value.to_string());
        let _ = (start, len);
    }

    let primitive: HashSet<String> = {
        let p = &banks.primitive_bank;
        p.verbs
            .iter()
            .chain(&p.mediums)
            .chain(&p.tenses)
            .flat_map(|s| words(s))
            .collect()
    };
    let free_terms = toks
        .iter()
        .zip(&used)
        .filter(|(t, u)| !**u && !STOPWORDS.contains(&t.as_str()) && !primitive.contains(*t))
        .map(|(t, _)| t.clone())
        .collect();

    let mut classes: Vec<DesignClass> = Vec::new();
    for k in &kinds {
        if !classes.contains(&k.class()) {
            classes.push(k.class());
        }
    }
    let target_class = match classes.as_slice() {
        [one] => TargetClass::from_class(*one),
        _ => TargetClass::Composite,
    };
    IntentSpec {
        target_class,
        kinds,
        numeric_params,
        word_params,
        motif_flags,
        free_terms,
    }
}

pub fn clamp_modifier(name: &str, v: f64, default: f64) -> f64 {
    let (lo, hi, exclusive) = modifier_range(name);
    if !v.is_finite() || (exclusive && v <= lo) {
        return default;
    }
    v.clamp(lo, hi)
}

pub fn set_modifier(block: &mut Block, m: Modifier) {
    if !schema::modifiers_for(block.kind).contains(&m.keyword()) {
        return;
    }
    block.modifiers.retain(|x| x.keyword() != m.keyword());
    block.modifiers.push(m);
}

/// Block of `kind` for an intent. Starts from `base` when given, so its
/// parameters fill whatever the intent leaves unspecified.
fn block_for(kind: BlockKind, intent: &IntentSpec, base: Option<&Block>) -> Block {
    let mut block = match base {
        Some(b) if b.kind == kind => b.clone(),
        _ => Block::new(kind),
    };
    for (key, &v) in &intent.numeric_params {
        match key.as_str() {
            "sandwich" => set_modifier(
                &mut block,
                Modifier::Sandwich {
                    thickness: clamp_modifier("sandwich", v, 0.5),
                },
            ),
            "smooth" => set_modifier(
                &mut block,
                Modifier::Smooth {
                    levels: clamp_modifier("smooth", v.round(), 1.0) as u32,
                },
            ),
            "noise" => set_modifier(
                &mut block,
                Modifier::Noise {
                    degrees: clamp_modifier("noise", v, 5.0),
                },
            ),
            "gradient" => set_modifier(
                &mut block,
                Modifier::Gradient {
                    axis: Axis::Z,
                    factor: clamp_modifier("gradient", v, 1.5),
                },
            ),
            _ => {
                if let Some(spec) = schema::lookup(kind, key) {
                    if !matches!(spec.ty, ParamType::Word(_)) {
                        block.params.insert(spec.key.to_string(), spec.value_from(v));
                    }
                }
            }
        }
    }
    for (key, word) in &intent.word_params {
        if let Some(spec) = schema::lookup(kind, key) {
            if let ParamType::Word(options) = spec.ty {
                if options.contains(&word.as_str()) {
                    block.params.insert(spec.key.to_string(), Value::Word(word.clone()));
                }
            }
        }
    }
    let has = |b: &Block, m: &str| b.modifier(m).is_some();
    for flag in &intent.motif_flags {
        match (flag, kind) {
            (Flag::Gradient, BlockKind::Tubular) if !has(&block, "gradient") => set_modifier(
                &mut block,
                Modifier::Gradient {
                    axis: Axis::Z,
                    factor: 1.5,
                },
            ),
            (Flag::Smoothed, BlockKind::Cellular) if !has(&block, "smooth") => {
                set_modifier(&mut block, Modifier::Smooth { levels: 2 })
            }
            (Flag::Smoothed, BlockKind::Slab | BlockKind::Primitive) if !has(&block, "smooth") => {
                set_modifier(&mut block, Modifier::Smooth { levels: 1 })
            }
            (Flag::Sandwich | Flag::Layered, BlockKind::Cellular) if !has(&block, "sandwich") => {
                set_modifier(&mut block, Modifier::Sandwich { thickness: 0.5 })
            }
            (Flag::Random, BlockKind::Helical) if !has(&block, "noise") => {
                set_modifier(&mut block, Modifier::Noise { degrees: 5.0 })
            }
            (Flag::Random, BlockKind::Cellular) if !block.params.contains_key("randomness") => {
                block.params.insert("randomness".into(), Value::Float(0.9));
            }
            _ => {}
        }
    }
    make_feasible(&mut block);
    block
}

pub fn set_number(block: &mut Block, key: &str, v: f64) {
    if let Some(spec) = schema::lookup(block.kind, key) {
        block.params.insert(spec.key.to_string(), spec.value_from(v));
    }
}

/// Adjusts a block until its generator accepts the layout: widens tubule
/// spacing or the slab, trims tubule counts, spreads primitive grids and
/// caps cellular wall gaps.
pub fn make_feasible(block: &mut Block) {
    match block.kind {
        BlockKind::Tubular => {
            for _ in 0..64 {
                let p = tubular_params(block);
                let fmax = p.gradient.map_or(1.0, |(_, f)| f.max(1.0 / f));
                match check_layout(&p) {
                    Ok(()) => return,
                    Err(GeomError::TubuleOverlap { required, .. }) => {
                        let want = required * 1.1;
                        if want <= 100.0 {
                            set_number(block, "spacing", want);
                        } else {
                            set_number(block, "spacing", 100.0);
                            set_number(block, "tubule_radius", 100.0 / (2.2 * p.ellipticity * fmax));
                        }
                    }
                    Err(GeomError::TubuleOutsideCortex { .. }) => {
                        if p.size_x < 1000.0 || p.size_y < 1000.0 {
                            set_number(block, "width", (p.size_x * 1.25).min(1000.0));
                            set_number(block, "depth", (p.size_y * 1.25).min(1000.0));
                        } else {
                            let fewer = (f64::from(p.tubule_count) * 0.8).floor();
                            set_number(block, "tubule_count", fewer);
                        }
                    }
                    Err(GeomError::ValueOutOfRange { param, .. }) if param == "cortical_thickness" => {
                        set_number(block, "cortical_thickness", 0.2 * p.size_x.min(p.size_y));
                    }
                    Err(_) => return,
                }
            }
        }
        BlockKind::Primitive => {
            let p = primitive_params(block);
            let need = min_spacing(p.shape, p.size, p.rotation_deg);
            if p.columns * p.rows > 1 && p.spacing < need {
                set_number(block, "spacing", need * 1.05);
            }
        }
        BlockKind::Cellular => {
            let w = schema::number(block, "width");
            let d = schema::number(block, "depth");
            let h = schema::number(block, "height");
            let n = schema::number(block, "region_count").max(1.0);
            let cell = w.min(d).min(h) / n.cbrt();
            if schema::number(block, "wall_gap") > 0.3 * cell {
                set_number(block, "wall_gap", 0.3 * cell);
            }
        }
        BlockKind::Helical | BlockKind::Slab => {}
    }
}

/// Builds a program from an intent: schema defaults everywhere except
/// explicit numbers, words and flag-driven modifiers. A composite intent
/// yields one block per detected kind; an intent with no kind yields a
/// single primitive block.
pub fn program_from_intent(intent: &IntentSpec, seed: u64) -> DesignProgram {
    program_from_intent_with(intent, seed, &[])
}

/// Like [`program_from_intent`], but each block starts from the first
/// program in `bases` that has a block of the same kind.
pub fn program_from_intent_with(intent: &IntentSpec, seed: u64, bases: &[&DesignProgram]) -> DesignProgram {
    let mut kinds = intent.kinds.clone();
    if kinds.is_empty() {
        kinds.push(intent.target_class.class().map_or(BlockKind::Primitive, |c| c.default_kind()));
    }
    let blocks: Vec<Block> = kinds
        .iter()
        .map(|&k| {
            let base = bases.iter().find_map(|p| p.blocks.iter().find(|b| b.kind == k));
            block_for(k, intent, base)
        })
        .collect();
    let stem: Vec<&str> = kinds.iter().map(|k| k.keyword()).collect();
    DesignProgram::new(format!("{}_design", stem.join("_")), seed, blocks)
}
