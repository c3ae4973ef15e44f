use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::vec3::{Aabb, Vec3};

/// Indexed polygon mesh. Faces list vertex indices counter-clockwise when
/// seen from outside.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl Mesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<Vec<usize>>) -> Self {
        Self {
            vertices,
            faces,
            label: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Axis-aligned box with outward-facing quads.
    pub fn cuboid(min: Vec3, max: Vec3) -> Mesh {
        let vertices = Aabb::new(min, max).corners().to_vec();
        let faces = vec![
            vec![0, 2, 3, 1], // -z
            vec![4, 5, 7, 6], // +z
            vec![0, 1, 5, 4], // -y
            vec![2, 6, 7, 3], // +y
            vec![0, 4, 6, 2], // -x
            vec![1, 3, 7, 5], // +x
        ];
        Mesh::new(vertices, faces)
    }

    pub fn unit_cube() -> Mesh {
        Mesh::cuboid(Vec3::ZERO, Vec3::splat(1.0))
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn bbox(&self) -> Aabb {
        Aabb::from_points(&self.vertices)
    }

    /// Fan triangulation of every face, in face order.
    pub fn triangles(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        self.faces
            .iter()
            .flat_map(|f| (1..f.len().saturating_sub(1)).map(move |i| [f[0], f[i], f[i + 1]]))
    }

    pub fn triangle_count(&self) -> usize {
        self.faces.iter().map(|f| f.len().saturating_sub(2)).sum()
    }

    pub fn triangle_positions(&self, t: [usize; 3]) -> [Vec3; 3] {
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    /// Appends `other`, offsetting its indices. Returns the first new vertex index.
    pub fn append(&mut self, other: &Mesh) -> usize {
        let base = self.vertices.len();
        self.vertices.extend_from_slice(&other.vertices);
        self.faces
            .extend(other.faces.iter().map(|f| f.iter().map(|i| i + base).collect()));
        base
    }

    pub fn translate(&mut self, by: Vec3) {
        for v in &mut self.vertices {
            *v += by;
        }
    }

    pub fn translated(mut self, by: Vec3) -> Mesh {
        self.translate(by);
        self
    }

    /// Reverses every face's winding.
    pub fn flip(&mut self) {
        for f in &mut self.faces {
            f.reverse();
        }
    }

    /// Area-weighted normal (Newell's method); its length is twice the area.
    pub fn face_normal(&self, face: usize) -> Vec3 {
        newell_normal(self.faces[face].iter().map(|&i| self.vertices[i]))
    }

    pub fn face_centroid(&self, face: usize) -> Vec3 {
        let f = &self.faces[face];
        f.iter().fold(Vec3::ZERO, |a, &i| a + self.vertices[i]) / f.len() as f64
    }

    /// Multiplicity of every undirected edge, keyed by `(min, max)`.
    pub fn edge_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut counts = HashMap::new();
        for f in &self.faces {
            for k in 0..f.len() {
                let (a, b) = (f[k], f[(k + 1) % f.len()]);
                *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Structural checks: indices in range, each face has at least three
    /// distinct vertices and nonzero area.
    pub fn check(&self) -> Result<(), MeshDefect> {
        for (fi, f) in self.faces.iter().enumerate() {
            if f.len() < 3 {
                return Err(MeshDefect::ShortFace(fi));
            }
            if let Some(&i) = f.iter().find(|&&i| i >= self.vertices.len()) {
                return Err(MeshDefect::IndexOutOfRange(fi, i));
            }
            for a in 0..f.len() {
                for b in a + 1..f.len() {
                    if f[a] == f[b] {
                        return Err(MeshDefect::RepeatedVertex(fi));
                    }
                }
            }
            let scale = f
                .iter()
                .map(|&i| self.vertices[i].length())
                .fold(1.0f64, f64::max);
            if self.face_normal(fi).length() <= 1e-14 * scale * scale {
                return Err(MeshDefect::ZeroArea(fi));
            }
        }
        if let Some(v) = self.vertices.iter().find(|v| !v.is_finite()) {
            return Err(MeshDefect::NonFinite(*v));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshDefect {
    #[error("face {0} has fewer than three vertices")]
    ShortFace(usize),
    #[error("face {0} references vertex {1}, which does not exist")]
    IndexOutOfRange(usize, usize),
    #[error("face {0} repeats a vertex")]
    RepeatedVertex(usize),
    #[error("face {0} has zero area")]
    ZeroArea(usize),
    #[error("non-finite vertex {0:?}")]
    NonFinite(Vec3),
}

pub fn newell_normal(points: impl Iterator<Item = Vec3> + Clone) -> Vec3 {
    let first = points.clone().next();
    let mut n = Vec3::ZERO;
    let mut it = points.peekable();
    while let Some(cur) = it.next() {
        let next = match it.peek() {
            Some(p) => *p,
            None => match first {
                Some(f) => f,
                None => break,
            },
        };
        n.x += (cur.y - next.y) * (cur.z + next.z);
        n.y += (cur.z - next.z) * (cur.x + next.x);
        n.z += (cur.x - next.x) * (cur.y + next.y);
    }
    n
}
