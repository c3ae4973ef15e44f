//! Scene validation, deterministic rendering and STL serialization.

pub mod intersect;
pub mod render;
pub mod stl;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::metrics::UnionFind;
use crate::geom::{Aabb, Mesh, Scene, Vec3};
use crate::par::Execution;

pub use render::{render_scene, Camera, RenderImage, View};
pub use stl::{export_stl, import_stl, parse_stl, stl_bytes, StlTriangle};

/// Inflation applied to component boxes before the floating test.
pub const FLOAT_TOLERANCE: f64 = 0.05;

#[derive(Debug, Error)]
pub enum ValidateError {
    #[error("scene has no geometry to render")]
    EmptyScene,
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("malformed STL: {0}")]
    BadStl(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub executed: bool,
    pub mesh_count: usize,
    pub watertight_per_mesh: Vec<bool>,
    pub component_count: usize,
    /// Indices into the component list of [`connected_components`].
    pub floating_components: Vec<usize>,
    pub self_intersection_pairs: u64,
    pub bbox: Aabb,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    /// Report for a program that failed to compile.
    pub fn failed(message: impl Into<String>) -> ValidationReport {
        ValidationReport {
            executed: false,
            mesh_count: 0,
            watertight_per_mesh: Vec::new(),
            component_count: 0,
            floating_components: Vec::new(),
            self_intersection_pairs: 0,
            bbox: Aabb::new(Vec3::ZERO, Vec3::ZERO),
            warnings: vec![message.into()],
        }
    }

    pub fn all_watertight(&self) -> bool {
        self.watertight_per_mesh.iter().all(|&w| w)
    }

    /// Fraction of the three checks passed: watertight, no floating parts,
    /// no self-intersection. Zero when the program did not execute.
    pub fn validity(&self) -> f64 {
        if !self.executed {
            return 0.0;
        }
        let passed = [
            self.all_watertight(),
            self.floating_components.is_empty(),
            self.self_intersection_pairs == 0,
        ];
        passed.iter().filter(|&&p| p).count() as f64 / 3.0
    }
}

/// Every undirected edge is used by exactly two faces, once in each direction.
pub fn is_watertight(mesh: &Mesh) -> bool {
    if mesh.faces.is_empty() {
        return false;
    }
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for f in &mesh.faces {
        for k in 0..f.len() {
            *directed.entry((f[k], f[(k + 1) % f.len()])).or_insert(0) += 1;
        }
    }
    directed
        .iter()
        .all(|(&(a, b), &n)| n == 1 && directed.get(&(b, a)) == Some(&1))
}

/// First scene-wide vertex index of each mesh.
fn offsets(scene: &Scene) -> Vec<usize> {
    let mut out = Vec::with_capacity(scene.meshes.len());
    let mut n = 0;
    for m in &scene.meshes {
        out.push(n);
        n += m.vertices.len();
    }
    out
}

/// Vertex sets of the face-connected pieces of the merged scene, each
/// sorted, ordered by lowest vertex index. Vertices used by no face are
/// left out.
pub fn connected_components(scene: &Scene) -> Vec<Vec<usize>> {
    let offs = offsets(scene);
    let total: usize = scene.meshes.iter().map(|m| m.vertices.len()).sum();
    let mut uf = UnionFind::new(total);
    let mut used = vec![false; total];
    for (m, &base) in scene.meshes.iter().zip(&offs) {
        for f in &m.faces {
            for w in f.windows(2) {
                uf.union(base + w[0], base + w[1]);
            }
            for &i in f {
                used[base + i] = true;
            }
        }
    }
    let mut slot: HashMap<usize, usize> = HashMap::new();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for v in (0..total).filter(|&v| used[v]) {
        let root = uf.find(v);
        let k = *slot.entry(root).or_insert_with(|| {
            out.push(Vec::new());
            out.len() - 1
        });
        out[k].push(v);
    }
    out
}

fn vertex_owner(offs: &[usize], v: usize) -> usize {
    offs.partition_point(|&o| o <= v) - 1
}

fn vertex_at(scene: &Scene, offs: &[usize], v: usize) -> Vec3 {
    let m = vertex_owner(offs, v);
    scene.meshes[m].vertices[v - offs[m]]
}

/// Components whose inflated box touches no other component's box.
/// Parts of assembly blocks are never reported.
pub fn floating_components(scene: &Scene, components: &[Vec<usize>]) -> Vec<usize> {
    if components.len() < 2 {
        return Vec::new();
    }
    let offs = offsets(scene);
    let boxes: Vec<Aabb> = components
        .iter()
        .map(|c| {
            c.iter()
                .fold(Aabb::EMPTY, |b, &v| b.including(vertex_at(scene, &offs, v)))
                .inflate(FLOAT_TOLERANCE)
        })
        .collect();
    (0..components.len())
        .filter(|&i| !scene.is_assembly_mesh(vertex_owner(&offs, components[i][0])))
        .filter(|&i| (0..boxes.len()).all(|j| j == i || !boxes[i].intersects(&boxes[j])))
        .collect()
}

/// Crossing triangle pairs across the scene. Pairs sharing a vertex and
/// pairs of meshes declared as nested are skipped.
pub fn self_intersections(scene: &Scene, exec: Execution) -> u64 {
    let offs = offsets(scene);
    let mut tris = Vec::with_capacity(scene.triangle_count());
    for (mi, m) in scene.meshes.iter().enumerate() {
        for t in m.triangles() {
            tris.push(intersect::Tri {
                pos: m.triangle_positions(t),
                verts: t.map(|v| v + offs[mi]),
                mesh: mi,
            });
        }
    }
    let ext = scene.bbox().extent();
    let eps = 1e-9 * ext.length().max(1.0);
    let nested: BTreeSet<(usize, usize)> = scene
        .nested
        .iter()
        .map(|&(a, b)| (a.min(b), a.max(b)))
        .collect();
    intersect::count_crossings(exec, &tris, eps, |a, b| nested.contains(&(a.min(b), a.max(b))))
}

pub fn validate_scene(scene: &Scene) -> ValidationReport {
    validate_scene_with(scene, Execution::default())
}

pub fn validate_scene_with(scene: &Scene, exec: Execution) -> ValidationReport {
    let components = connected_components(scene);
    let mut warnings = scene.warnings();
    let executed = scene.meshes.iter().any(|m| !m.is_empty());
    if !executed {
        warnings.push("scene produced no mesh".into());
    }
    let bbox = if executed {
        scene.bbox()
    } else {
        Aabb::new(Vec3::ZERO, Vec3::ZERO)
    };
    ValidationReport {
        executed,
        mesh_count: scene.meshes.len(),
        watertight_per_mesh: scene.meshes.iter().map(is_watertight).collect(),
        component_count: components.len(),
        floating_components: floating_components(scene, &components),
        self_intersection_pairs: self_intersections(scene, exec),
        bbox,
        warnings,
    }
}
