use serde::{Deserialize, Serialize};

use super::mesh::Mesh;
use super::vec3::{Aabb, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshMetrics {
    /// Signed enclosed volume; negative when the winding is inverted.
    pub volume: f64,
    pub bbox: Aabb,
    pub porosity_vs_bbox: f64,
    /// Number of vertex-connected pieces in the mesh.
    pub component_hint: usize,
    pub negative_volume: bool,
}

/// Divergence-theorem volume over the fan triangulation.
pub fn signed_volume(mesh: &Mesh) -> f64 {
    // Sum relative to the bbox center to keep the terms small.
    let o = mesh.bbox().center();
    mesh.triangles()
        .map(|t| {
            let [a, b, c] = mesh.triangle_positions(t);
            (a - o).dot((b - o).cross(c - o))
        })
        .sum::<f64>()
        / 6.0
}

pub fn surface_area(mesh: &Mesh) -> f64 {
    mesh.triangles()
        .map(|t| {
            let [a, b, c] = mesh.triangle_positions(t);
            0.5 * (b - a).cross(c - a).length()
        })
        .sum()
}

/// Volume-weighted centroid of a closed mesh.
pub fn centroid(mesh: &Mesh) -> Vec3 {
    let o = mesh.bbox().center();
    let mut acc = Vec3::ZERO;
    let mut vol = 0.0;
    for t in mesh.triangles() {
        let [a, b, c] = mesh.triangle_positions(t);
        let v = (a - o).dot((b - o).cross(c - o)) / 6.0;
        acc += (a + b + c - o * 3.0) * (v / 4.0);
        vol += v;
    }
    if vol.abs() > 0.0 {
        o + acc / vol
    } else {
        o
    }
}

pub fn component_count(mesh: &Mesh) -> usize {
    let mut uf = UnionFind::new(mesh.vertices.len());
    let mut used = vec![false; mesh.vertices.len()];
    for f in &mesh.faces {
        for w in f.windows(2) {
            uf.union(w[0], w[1]);
        }
        for &i in f {
            used[i] = true;
        }
    }
    (0..mesh.vertices.len())
        .filter(|&i| used[i] && uf.find(i) == i)
        .count()
}

pub fn mesh_metrics(mesh: &Mesh) -> MeshMetrics {
    let volume = signed_volume(mesh);
    let bbox = mesh.bbox();
    let bv = bbox.volume();
    MeshMetrics {
        volume,
        bbox,
        porosity_vs_bbox: if bv > 0.0 { 1.0 - volume / bv } else { 0.0 },
        component_hint: component_count(mesh),
        negative_volume: volume < 0.0,
    }
}

/// Path-compressing union-find over `0..n`.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Joins the sets; the smaller root index becomes the representative.
    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}
