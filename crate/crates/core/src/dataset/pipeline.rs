//! The dataset build: plan record slots to hit the composition targets,
//! diversify each source design, annotate, validate and render every
//! record, and emit JSONL plus statistics.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::diversify::{diversify_with, JitterConfig};
use super::instruction::instruction_for;
use super::library::{general_library, BaseDesign};
use super::reasoning::{embed_reasoning, strip_reasoning};
use crate::dsl::ast::DesignClass;
use crate::dsl::{parse, WordBanks};
use crate::geom::compile_program_with;
use crate::par::{self, Execution};
use crate::rng::{hash_str, Rng};
use crate::validate::{render::render_scene_with, validate_scene_with, Camera, View};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Bio,
    BioReasoning,
    General,
    GeneralReasoning,
}

impl RecordKind {
    pub const ALL: [RecordKind; 4] = [
        RecordKind::Bio,
        RecordKind::BioReasoning,
        RecordKind::General,
        RecordKind::GeneralReasoning,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RecordKind::Bio => "bio",
            RecordKind::BioReasoning => "bio_reasoning",
            RecordKind::General => "general",
            RecordKind::GeneralReasoning => "general_reasoning",
        }
    }

    pub fn is_reasoning(self) -> bool {
        matches!(self, RecordKind::BioReasoning | RecordKind::GeneralReasoning)
    }

    pub fn is_bio(self) -> bool {
        matches!(self, RecordKind::Bio | RecordKind::BioReasoning)
    }
}

/// Target fraction per record kind. `general_reasoning` defaults to the
/// remainder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Composition {
    pub bio: f64,
    pub bio_reasoning: f64,
    pub general: f64,
    pub general_reasoning: Option<f64>,
}

impl Default for Composition {
    fn default() -> Self {
        Self {
            bio: 0.18,
            bio_reasoning: 0.20,
            general: 0.16,
            general_reasoning: None,
        }
    }
}

impl Composition {
    pub fn fractions(&self) -> [f64; 4] {
        let rest = 1.0 - self.bio - self.bio_reasoning - self.general;
        [self.bio, self.bio_reasoning, self.general, self.general_reasoning.unwrap_or(rest)]
    }

    pub fn target(&self, kind: RecordKind) -> f64 {
        self.fractions()[kind as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub variants_per_query: usize,
    pub queries_per_base: usize,
    pub composition: Composition,
    pub jitter: JitterConfig,
    /// Chance that an instruction states some of the record's values.
    pub clause_prob: f64,
    /// Write every record's iso render under `<out>/renders/`.
    pub save_renders: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            variants_per_query: 5,
            queries_per_base: 2,
            composition: Composition::default(),
            jitter: JitterConfig::default(),
            clause_prob: 0.5,
            save_renders: false,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error("variants_per_query must be at least 1")]
    NoVariants,
    #[error("queries_per_base must be at least 1")]
    NoQueries,
    #[error("composition fractions must lie in [0, 1] and sum to 1, got {0:?}")]
    BadComposition([f64; 4]),
    #[error("the base library must have at least one design")]
    EmptyLibrary,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.variants_per_query == 0 {
            return Err(PipelineError::NoVariants);
        }
        if self.queries_per_base == 0 {
            return Err(PipelineError::NoQueries);
        }
        let f = self.composition.fractions();
        let in_range = f.iter().all(|x| (0.0..=1.0).contains(x));
        if !in_range || (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(PipelineError::BadComposition(f));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub instruction: String,
    pub response: String,
    pub class: DesignClass,
    pub kind: RecordKind,
    pub base_id: String,
    pub seed: u64,
    pub validated: bool,
    pub render_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthStats {
    pub mean: f64,
    pub p50: usize,
    pub p90: usize,
    pub max: usize,
}

impl LengthStats {
    fn of(mut v: Vec<usize>) -> LengthStats {
        if v.is_empty() {
            return LengthStats {
                mean: 0.0,
                p50: 0,
                p90: 0,
                max: 0,
            };
        }
        v.sort_unstable();
        // Nearest-rank percentiles.
        let rank = |p: f64| v[((p * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1];
        LengthStats {
            mean: v.iter().sum::<usize>() as f64 / v.len() as f64,
            p50: rank(0.5),
            p90: rank(0.9),
            max: *v.last().expect("nonempty"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindStats {
    pub count: usize,
    pub fraction: f64,
    pub target: f64,
    pub response_tokens: LengthStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub planned: usize,
    pub emitted: usize,
    /// Dropped slots by reason.
    pub failures: BTreeMap<String, usize>,
    pub per_kind: BTreeMap<RecordKind, KindStats>,
    pub per_class: BTreeMap<DesignClass, usize>,
    /// Whitespace-token lengths.
    pub instruction_tokens: LengthStats,
    pub response_tokens: LengthStats,
}

impl DatasetStats {
    pub fn failure_count(&self) -> usize {
        self.failures.values().sum()
    }

    pub fn to_table(&self) -> String {
        let mut t = String::new();
        let _ = writeln!(t, "{:<18} {:>6} {:>9} {:>7} {:>10} {:>6} {:>6}", "kind", "count", "fraction", "target", "mean tok", "p50", "p90");
        for (k, s) in &self.per_kind {
            let _ = writeln!(
                t,
                "{:<18} {:>6} {:>9.3} {:>7.3} {:>10.1} {:>6} {:>6}",
                k.name(),
                s.count,
                s.fraction,
                s.target,
                s.response_tokens.mean,
                s.response_tokens.p50,
                s.response_tokens.p90
            );
        }
        let _ = writeln!(
            t,
            "{:<18} {:>6} {:>9.3} {:>7} {:>10.1} {:>6} {:>6}",
            "total",
            self.emitted,
            1.0,
            "",
            self.response_tokens.mean,
            self.response_tokens.p50,
            self.response_tokens.p90
        );
        let _ = writeln!(t, "planned {}, dropped {}", self.planned, self.failure_count());
        for (reason, n) in &self.failures {
            let _ = writeln!(t, "  {reason}: {n}");
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<DatasetRecord>,
    pub stats: DatasetStats,
}

impl Dataset {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    /// Writes `dataset.jsonl`, `stats.json` and `stats.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("dataset.jsonl"), self.to_jsonl())?;
        std::fs::write(
            dir.join("stats.json"),
            serde_json::to_string_pretty(&self.stats).expect("stats serialize"),
        )?;
        std::fs::write(dir.join("stats.txt"), self.stats.to_table())
    }
}

/// Largest-remainder split of `n` by `fractions`; ties go to the lower index.
pub fn apportion(n: usize, fractions: &[f64]) -> Vec<usize> {
    let exact: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..fractions.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let mut left = n.saturating_sub(counts.iter().sum());
    for i in order.into_iter().cycle().take(fractions.len() * 2) {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}

/// Spreads `a` items of one kind among `a + b` positions as evenly as
/// possible; true marks the first kind.
fn interleave(a: usize, b: usize) -> Vec<bool> {
    let n = a + b;
    (0..n).map(|i| (i + 1) * a / n.max(1) > i * a / n.max(1)).collect()
}

#[derive(Debug, Clone)]
struct Slot {
    index: usize,
    kind: RecordKind,
    variant: usize,
}

#[derive(Debug, Clone)]
struct Group {
    source: usize,
    bio: bool,
    query: usize,
    slots: Vec<Slot>,
}

/// Assigns every slot a kind, a source design and a (query, variant) pair.
fn plan(cfg: &PipelineConfig, bases: usize, generals: usize) -> (usize, Vec<Group>) {
    let total = bases * cfg.queries_per_base * cfg.variants_per_query;
    let counts = apportion(total, &cfg.composition.fractions());
    let mut groups: Vec<Group> = Vec::new();
    let mut index = 0;
    for (bio, plain, reasoning, sources) in [
        (true, counts[0], counts[1], bases),
        (false, counts[2], counts[3], generals),
    ] {
        if sources == 0 {
            continue;
        }
        let mut per_source: Vec<Vec<RecordKind>> = vec![Vec::new(); sources];
        let kinds = interleave(plain, reasoning);
        for (j, is_plain) in kinds.into_iter().enumerate() {
            let kind = match (bio, is_plain) {
                (true, true) => RecordKind::Bio,
                (true, false) => RecordKind::BioReasoning,
                (false, true) => RecordKind::General,
                (false, false) => RecordKind::GeneralReasoning,
            };
            per_source[j % sources].push(kind);
        }
        for (source, kinds) in per_source.into_iter().enumerate() {
            for (query, chunk) in kinds.chunks(cfg.variants_per_query).enumerate() {
                let slots = chunk
                    .iter()
                    .enumerate()
                    .map(|(variant, &kind)| {
                        index += 1;
                        Slot {
                            index: index - 1,
                            kind,
                            variant,
                        }
                    })
                    .collect();
                groups.push(Group {
                    source,
                    bio,
                    query,
                    slots,
                });
            }
        }
    }
    (total, groups)
}

fn whitespace_tokens(s: &str) -> usize {
    s.split_whitespace().count()
}

type SlotResult = (usize, Result<DatasetRecord, String>);

fn build_group(
    cfg: &PipelineConfig,
    group: &Group,
    design: &BaseDesign,
    banks: &WordBanks,
    render_dir: Option<&Path>,
) -> Vec<SlotResult> {
    let stream = cfg.seed ^ hash_str(&design.id);
    let mut rng = Rng::derive(stream, group.query as u64);
    let variants = diversify_with(&design.program, group.slots.len(), &mut rng, &cfg.jitter);
    let mut out = Vec::new();
    for (i, slot) in group.slots.iter().enumerate() {
        let Some(v) = variants.get(i) else {
            out.push((slot.index, Err("diversify_exhausted".into())));
            continue;
        };
        let result = (|| {
            let scene = compile_program_with(&v.program, Execution::Serial).map_err(|_| "compile".to_string())?;
            let report = validate_scene_with(&scene, Execution::Serial);
            if report.validity() < 1.0 {
                return Err("validate".to_string());
            }
            let img = render_scene_with(&scene, &Camera::new(View::Iso), Execution::Serial).map_err(|_| "render".to_string())?;
            if img.covered() == 0 {
                return Err("render".to_string());
            }
            let stem = format!("{}_q{}_v{}", design.id, group.query, slot.variant);
            let render_path = match render_dir {
                Some(dir) => {
                    let path = dir.join(format!("{stem}.ppm"));
                    img.write_ppm(&path).map_err(|_| "render_write".to_string())?;
                    Some(format!("renders/{stem}.ppm"))
                }
                None => None,
            };
            let response = if slot.kind.is_reasoning() {
                embed_reasoning(&v.program)
            } else {
                v.text.clone()
            };
            let recovered = if slot.kind.is_reasoning() {
                strip_reasoning(&response)
            } else {
                response.clone()
            };
            if parse(&recovered).ok().as_ref() != Some(&v.program) {
                return Err("response_mismatch".to_string());
            }
            let mut irng = Rng::derive(stream, (1u64 << 32) | (group.query * 1000 + slot.variant) as u64);
            let instruction = instruction_for(&v.program, design.class, banks, &mut irng, cfg.clause_prob);
            Ok(DatasetRecord {
                instruction: instruction.text,
                response,
                class: design.class,
                kind: slot.kind,
                base_id: design.id.clone(),
                seed: v.program.seed,
                validated: true,
                render_path,
            })
        })();
        out.push((slot.index, result));
    }
    out
}

/// Builds the dataset over the given bases and general programs. Renders
/// are written under `out_dir/renders` when `cfg.save_renders` is set and
/// an output directory is given.
pub fn build_dataset_with(
    cfg: &PipelineConfig,
    bases: &[BaseDesign],
    general: &[BaseDesign],
    exec: Execution,
    out_dir: Option<&Path>,
) -> Result<Dataset, PipelineError> {
    cfg.validate()?;
    if bases.is_empty() {
        return Err(PipelineError::EmptyLibrary);
    }
    let render_dir: Option<PathBuf> = match (cfg.save_renders, out_dir) {
        (true, Some(d)) => {
            let dir = d.join("renders");
            std::fs::create_dir_all(&dir).ok();
            Some(dir)
        }
        _ => None,
    };
    let banks = WordBanks::builtin();
    let (planned, groups) = plan(cfg, bases.len(), general.len());
    let mut results: Vec<SlotResult> = par::map(exec, &groups, |g| {
        let design = if g.bio { &bases[g.source] } else { &general[g.source] };
        build_group(cfg, g, design, &banks, render_dir.as_deref())
    })
    .into_iter()
    .flatten()
    .collect();
    results.sort_by_key(|(i, _)| *i);

    let mut records = Vec::new();
    let mut failures: BTreeMap<String, usize> = BTreeMap::new();
    let unplanned = planned - results.len();
    if unplanned > 0 {
        failures.insert("no_source".into(), unplanned);
    }
    for (_, r) in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(reason) => *failures.entry(reason).or_insert(0) += 1,
        }
    }
    let emitted = records.len();
    let per_kind = RecordKind::ALL
        .iter()
        .map(|&k| {
            let lens: Vec<usize> = records
                .iter()
                .filter(|r| r.kind == k)
                .map(|r| whitespace_tokens(&r.response))
                .collect();
            let count = lens.len();
            (
                k,
                KindStats {
                    count,
                    fraction: if emitted == 0 { 0.0 } else { count as f64 / emitted as f64 },
                    target: cfg.composition.target(k),
                    response_tokens: LengthStats::of(lens),
                },
            )
        })
        .collect();
    let mut per_class = BTreeMap::new();
    for r in &records {
        *per_class.entry(r.class).or_insert(0) += 1;
    }
    let stats = DatasetStats {
        planned,
        emitted,
        failures,
        per_kind,
        per_class,
        instruction_tokens: LengthStats::of(records.iter().map(|r| whitespace_tokens(&r.instruction)).collect()),
        response_tokens: LengthStats::of(records.iter().map(|r| whitespace_tokens(&r.response)).collect()),
    };
    Ok(Dataset { records, stats })
}

/// Builds the dataset from `library` and the shipped general programs.
pub fn build_dataset(cfg: &PipelineConfig, library: &[BaseDesign]) -> Result<Dataset, PipelineError> {
    build_dataset_with(cfg, library, &general_library(), Execution::default(), None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apportion_sums_and_rounds() {
        assert_eq!(apportion(120, &[0.18, 0.20, 0.16, 0.46]), vec![22, 24, 19, 55]);
        assert_eq!(apportion(7, &[0.5, 0.5]), vec![4, 3]);
        assert_eq!(apportion(0, &[1.0]), vec![0]);
    }

    #[test]
    fn interleave_counts() {
        let v = interleave(3, 7);
        assert_eq!(v.len(), 10);
        assert_eq!(v.iter().filter(|x| **x).count(), 3);
    }

    #[test]
    fn config_checks() {
        let mut c = PipelineConfig::default();
        assert_eq!(c.validate(), Ok(()));
        assert!((c.composition.fractions()[3] - 0.46).abs() < 1e-12);
        c.composition.general_reasoning = Some(0.5);
        assert!(matches!(c.validate(), Err(PipelineError::BadComposition(_))));
        c = PipelineConfig {
            variants_per_query: 0,
            ..PipelineConfig::default()
        };
        assert_eq!(c.validate(), Err(PipelineError::NoVariants));
    }

    #[test]
    fn plan_covers_every_slot_once() {
        let cfg = PipelineConfig::default();
        let (total, groups) = plan(&cfg, 12, 8);
        let mut idx: Vec<usize> = groups.iter().flat_map(|g| g.slots.iter().map(|s| s.index)).collect();
        idx.sort_unstable();
        assert_eq!(idx, (0..total).collect::<Vec<_>>());
        assert!(groups.iter().all(|g| g.slots.len() <= cfg.variants_per_query));
    }
}
