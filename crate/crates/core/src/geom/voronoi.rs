//! Voronoi cells as convex polyhedra.
//!
//! Cell `i` starts as the domain box and is clipped by the bisector
//! half-space of every other seed that can still reach it. Intersection
//! points are computed from the edge endpoints in a canonical order, so two
//! faces sharing an edge produce bitwise-identical points and the welded
//! result is a closed manifold.

use std::collections::HashMap;

use super::mesh::Mesh;
use super::vec3::{Aabb, Vec3};
use super::GeomError;
use crate::par::{self, Execution};

/// Half-space `normal · x <= offset`.
#[derive(Debug, Clone, Copy)]
pub struct HalfSpace {
    pub normal: Vec3,
    pub offset: f64,
}

impl HalfSpace {
    pub fn signed_distance(&self, p: Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }

    /// Points closer to `own` than to `other`; the normal is unit length.
    pub fn bisector(own: Vec3, other: Vec3) -> HalfSpace {
        let normal = (other - own).normalized();
        HalfSpace {
            normal,
            offset: normal.dot((own + other) * 0.5),
        }
    }
}

/// Convex polyhedron stored as outward-wound face polygons.
#[derive(Debug, Clone)]
pub struct ConvexPolyhedron {
    pub faces: Vec<Vec<Vec3>>,
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Inside,
    On,
    Outside,
}

impl ConvexPolyhedron {
    pub fn from_box(b: &Aabb) -> Self {
        let m = Mesh::cuboid(b.min, b.max);
        Self {
            faces: m
                .faces
                .iter()
                .map(|f| f.iter().map(|&i| m.vertices[i]).collect())
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn max_distance_from(&self, p: Vec3) -> f64 {
        self.faces
            .iter()
            .flatten()
            .map(|v| v.distance(p))
            .fold(0.0, f64::max)
    }

    /// Keeps the part inside `h`. `eps` is the on-plane tolerance.
    pub fn clip(&self, h: &HalfSpace, eps: f64) -> ConvexPolyhedron {
        let side = |p: Vec3| {
            let s = h.signed_distance(p);
            if s < -eps {
                Side::Inside
            } else if s > eps {
                Side::Outside
            } else {
                Side::On
            }
        };

        let all = self.faces.iter().flatten();
        if all.clone().all(|&p| side(p) != Side::Outside) {
            return self.clone();
        }
        if all.clone().all(|&p| side(p) != Side::Inside) {
            return ConvexPolyhedron { faces: Vec::new() };
        }

        let mut faces = Vec::with_capacity(self.faces.len() + 1);
        let mut cap: Vec<Vec3> = Vec::new();
        let push_cap = |p: Vec3, cap: &mut Vec<Vec3>| {
            if !cap.iter().any(|q| same_point(*q, p)) {
                cap.push(p);
            }
        };

        for face in &self.faces {
            let mut out: Vec<Vec3> = Vec::with_capacity(face.len() + 2);
            for k in 0..face.len() {
                let cur = face[k];
                let next = face[(k + 1) % face.len()];
                let (sc, sn) = (side(cur), side(next));
                if sc != Side::Outside {
                    out.push(cur);
                    if sc == Side::On {
                        push_cap(cur, &mut cap);
                    }
                }
                if (sc == Side::Inside && sn == Side::Outside)
                    || (sc == Side::Outside && sn == Side::Inside)
                {
                    let x = edge_plane_point(cur, next, h);
                    out.push(x);
                    push_cap(x, &mut cap);
                }
            }
            out.dedup_by(|a, b| same_point(*a, *b));
            while out.len() > 1 && same_point(out[0], *out.last().unwrap()) {
                out.pop();
            }
            // A face lying on the plane would coincide with the cap.
            if out.len() >= 3 && !out.iter().all(|&p| side(p) == Side::On) {
                faces.push(out);
            }
        }

        if cap.len() >= 3 {
            faces.push(order_cap(cap, h.normal));
        }
        ConvexPolyhedron { faces }
    }

    /// Welds identical points and returns an indexed mesh.
    pub fn to_mesh(&self) -> Mesh {
        let mut index: HashMap<[u64; 3], usize> = HashMap::new();
        let mut vertices = Vec::new();
        let mut faces = Vec::with_capacity(self.faces.len());
        for f in &self.faces {
            let mut idx: Vec<usize> = f
                .iter()
                .map(|p| {
                    *index.entry(point_key(*p)).or_insert_with(|| {
                        vertices.push(*p);
                        vertices.len() - 1
                    })
                })
                .collect();
            idx.dedup();
            while idx.len() > 1 && idx[0] == *idx.last().unwrap() {
                idx.pop();
            }
            if idx.len() >= 3 {
                faces.push(idx);
            }
        }
        Mesh::new(vertices, faces)
    }
}

fn point_key(p: Vec3) -> [u64; 3] {
    // +0.0 and -0.0 must weld together.
    let norm = |x: f64| if x == 0.0 { 0u64 } else { x.to_bits() };
    [norm(p.x), norm(p.y), norm(p.z)]
}

fn same_point(a: Vec3, b: Vec3) -> bool {
    point_key(a) == point_key(b)
}

/// Edge/plane intersection computed from a canonically ordered endpoint pair.
fn edge_plane_point(a: Vec3, b: Vec3, h: &HalfSpace) -> Vec3 {
    let (p, q) = if (a.x, a.y, a.z) <= (b.x, b.y, b.z) {
        (a, b)
    } else {
        (b, a)
    };
    let dp = h.signed_distance(p);
    let dq = h.signed_distance(q);
    let t = dp / (dp - dq);
    p + (q - p) * t
}

/// Orders coplanar points counter-clockwise around `normal`.
fn order_cap(mut pts: Vec<Vec3>, normal: Vec3) -> Vec<Vec3> {
    let c = pts.iter().fold(Vec3::ZERO, |s, p| s + *p) / pts.len() as f64;
    let helper = if normal.x.abs() < 0.9 { Vec3::X } else { Vec3::Y };
    let u = normal.cross(helper).normalized();
    let v = normal.cross(u);
    let angle = |p: &Vec3| {
        let d = *p - c;
        d.dot(v).atan2(d.dot(u))
    };
    pts.sort_by(|a, b| angle(a).total_cmp(&angle(b)));
    pts
}

/// Relative tolerance for on-plane classification, scaled by the domain.
fn plane_eps(domain: &Aabb) -> f64 {
    1e-12 * domain.extent().length().max(1.0)
}

/// Voronoi cell of `seeds[index]` within `domain`.
pub fn voronoi_cell(seeds: &[Vec3], index: usize, domain: &Aabb) -> ConvexPolyhedron {
    let eps = plane_eps(domain);
    let own = seeds[index];
    let mut order: Vec<(f64, usize)> = seeds
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != index)
        .map(|(j, s)| (s.distance(own), j))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut cell = ConvexPolyhedron::from_box(domain);
    let mut reach = cell.max_distance_from(own);
    for (dist, j) in order {
        // A bisector farther than the farthest cell vertex cannot cut the cell.
        if dist * 0.5 > reach + eps {
            break;
        }
        cell = cell.clip(&HalfSpace::bisector(own, seeds[j]), eps);
        if cell.is_empty() {
            break;
        }
        reach = cell.max_distance_from(own);
    }
    cell
}

/// Partitions `domain` into the Voronoi cells of `seeds`, one closed convex
/// mesh per seed, in seed order.
pub fn voronoi_partition(seeds: &[Vec3], domain: &Aabb) -> Result<Vec<Mesh>, GeomError> {
    voronoi_partition_with(seeds, domain, Execution::default())
}

pub fn voronoi_partition_with(
    seeds: &[Vec3],
    domain: &Aabb,
    exec: Execution,
) -> Result<Vec<Mesh>, GeomError> {
    if seeds.is_empty() {
        return Err(GeomError::ValueOutOfRange {
            param: "seeds".into(),
            detail: "at least one seed is required".into(),
        });
    }
    if let Some(s) = seeds.iter().find(|s| !domain.contains(**s)) {
        return Err(GeomError::SeedOutsideDomain(*s));
    }
    let tol = plane_eps(domain) * 1e3;
    for i in 0..seeds.len() {
        for j in i + 1..seeds.len() {
            if seeds[i].distance(seeds[j]) <= tol {
                return Err(GeomError::DuplicateSeeds(i, j));
            }
        }
    }
    Ok(par::map_range(exec, seeds.len(), |i| {
        voronoi_cell(seeds, i, domain).to_mesh()
    }))
}
