//! Caption retrieval over the base designs: lowercase token-frequency
//! vectors compared by cosine similarity.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::library::{base_library, BaseDesign};
use crate::dsl::ast::{BlockKind, DesignClass};
use crate::dsl::intent::words;
use crate::dsl::parse;
use crate::geom::{compile_program, metrics::signed_volume, Scene};

/// Mesh-level summary stored with each entry in place of a reference render.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Descriptor {
    pub class: Option<DesignClass>,
    pub kinds: Vec<BlockKind>,
    pub triangle_count: usize,
    pub mesh_count: usize,
    pub volume: f64,
    pub extent: [f64; 3],
    /// Construction measurements of every block, prefixed by block index
    /// when the scene has more than one block.
    pub measured: BTreeMap<String, f64>,
}

impl Descriptor {
    pub fn of(scene: &Scene) -> Descriptor {
        let kinds: Vec<BlockKind> = scene.blocks.iter().map(|b| b.kind).collect();
        let class = kinds.first().map(|k| k.class()).filter(|c| kinds.iter().all(|k| k.class() == *c));
        let mut measured = BTreeMap::new();
        for (i, b) in scene.blocks.iter().enumerate() {
            for (k, v) in &b.measured {
                let key = if scene.blocks.len() > 1 { format!("{i}.{k}") } else { k.clone() };
                measured.insert(key, *v);
            }
        }
        Descriptor {
            class,
            kinds,
            triangle_count: scene.triangle_count(),
            mesh_count: scene.meshes.len(),
            volume: scene.meshes.iter().map(signed_volume).sum(),
            extent: scene.bbox().extent().to_array(),
            measured,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalEntry {
    pub caption: String,
    /// Program source text.
    pub program: String,
    pub descriptor: Descriptor,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("retrieval store has no entries")]
    Empty,
    #[error("entry {0}: {1}")]
    BadProgram(usize, String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("invalid store JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalStore {
    pub entries: Vec<RetrievalEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub index: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Retrieved {
    pub hits: Vec<Hit>,
    pub warning: Option<String>,
}

pub type TermVector = BTreeMap<String, f64>;

pub fn term_vector(text: &str) -> TermVector {
    let mut v = TermVector::new();
    for w in words(text) {
        *v.entry(w).or_insert(0.0) += 1.0;
    }
    v
}

pub fn cosine(a: &TermVector, b: &TermVector) -> f64 {
    let dot: f64 = a.iter().filter_map(|(k, x)| b.get(k).map(|y| x * y)).sum();
    let na = a.values().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.values().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

impl RetrievalStore {
    pub fn from_designs(designs: &[BaseDesign]) -> RetrievalStore {
        let entries = designs
            .iter()
            .map(|d| {
                let scene = compile_program(&d.program)
                    .unwrap_or_else(|e| panic!("library design {} does not compile: {e}", d.id));
                RetrievalEntry {
                    caption: d.caption.clone(),
                    program: d.text.clone(),
                    descriptor: Descriptor::of(&scene),
                }
            })
            .collect();
        RetrievalStore { entries }
    }

    /// The default store: the twelve base designs.
    pub fn base() -> RetrievalStore {
        RetrievalStore::from_designs(&base_library())
    }

    pub fn from_json(text: &str) -> Result<RetrievalStore, StoreError> {
        let store: RetrievalStore = serde_json::from_str(text)?;
        if store.entries.is_empty() {
            return Err(StoreError::Empty);
        }
        for (i, e) in store.entries.iter().enumerate() {
            parse(&e.program).map_err(|err| StoreError::BadProgram(i, err.to_string()))?;
        }
        Ok(store)
    }

    pub fn load(path: &Path) -> Result<RetrievalStore, StoreError> {
        RetrievalStore::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("store serializes")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Top `k` entries by caption similarity, ties broken by entry index.
/// A `k` larger than the store is clamped and reported in `warning`.
pub fn retrieve(store: &RetrievalStore, query: &str, k: usize) -> Retrieved {
    let mut warning = None;
    let mut k = k;
    if k > store.len() {
        let msg = format!("k={k} exceeds the store size {}; using {}", store.len(), store.len());
        log::warn!("{msg}");
        warning = Some(msg);
        k = store.len();
    }
    let q = term_vector(query);
    let mut hits: Vec<Hit> = store
        .entries
        .iter()
        .enumerate()
        .map(|(index, e)| Hit {
            index,
            score: cosine(&q, &term_vector(&e.caption)),
        })
        .collect();
    hits.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.index.cmp(&b.index)));
    hits.truncate(k);
    Retrieved { hits, warning }
}
