//! Triangle-pair intersection search over a bounding volume hierarchy.

use crate::geom::{Aabb, Vec3};
use crate::par::{self, Execution};

const LEAF: usize = 4;

#[derive(Debug, Clone)]
enum Node {
    Leaf { bbox: Aabb, start: usize, end: usize },
    Inner { bbox: Aabb, left: usize, right: usize },
}

impl Node {
    fn bbox(&self) -> &Aabb {
        match self {
            Node::Leaf { bbox, .. } | Node::Inner { bbox, .. } => bbox,
        }
    }
}

/// Median-split BVH over a set of boxes. Leaves hold indices into the
/// original box list.
#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<usize>,
}

impl Bvh {
    pub fn build(boxes: &[Aabb]) -> Bvh {
        let mut bvh = Bvh {
            nodes: Vec::new(),
            order: (0..boxes.len()).collect(),
        };
        if !boxes.is_empty() {
            bvh.split(boxes, 0, boxes.len());
        }
        bvh
    }

    fn split(&mut self, boxes: &[Aabb], start: usize, end: usize) -> usize {
        let bbox = self.order[start..end]
            .iter()
            .fold(Aabb::EMPTY, |b, &i| b.union(boxes[i]));
        let id = self.nodes.len();
        if end - start <= LEAF {
            self.nodes.push(Node::Leaf { bbox, start, end });
            return id;
        }
        self.nodes.push(Node::Leaf { bbox, start, end });
        let e = bbox.extent();
        let axis = if e.x >= e.y && e.x >= e.z {
            0
        } else if e.y >= e.z {
            1
        } else {
            2
        };
        let mid = (start + end) / 2;
        let key = |i: &usize| boxes[*i].center().axis(axis);
        self.order[start..end]
            .select_nth_unstable_by(mid - start, |a, b| key(a).total_cmp(&key(b)).then(a.cmp(b)));
        let left = self.split(boxes, start, mid);
        let right = self.split(boxes, mid, end);
        self.nodes[id] = Node::Inner { bbox, left, right };
        id
    }

    /// Calls `f` for every stored index whose box intersects `query`.
    pub fn visit(&self, boxes: &[Aabb], query: &Aabb, mut f: impl FnMut(usize)) {
        if self.nodes.is_empty() {
            return;
        }
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if !node.bbox().intersects(query) {
                continue;
            }
            match *node {
                Node::Leaf { start, end, .. } => {
                    for &i in &self.order[start..end] {
                        if boxes[i].intersects(query) {
                            f(i);
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
    }
}

fn signs(d: [f64; 3], eps: f64) -> (bool, bool) {
    (d.iter().any(|&x| x > eps), d.iter().any(|&x| x < -eps))
}

/// Parameter interval where triangle `t` (with signed plane distances `d`)
/// meets the line `origin + s * dir`.
fn interval(t: &[Vec3; 3], d: [f64; 3], origin: Vec3, dir: Vec3, eps: f64) -> Option<(f64, f64)> {
    let mut pts = Vec::with_capacity(3);
    for k in 0..3 {
        let (a, b) = (k, (k + 1) % 3);
        let (da, db) = (d[a], d[b]);
        if da.abs() <= eps {
            pts.push(t[a]);
        }
        if (da > eps && db < -eps) || (da < -eps && db > eps) {
            let s = da / (da - db);
            pts.push(t[a] + (t[b] - t[a]) * s);
        }
    }
    if pts.is_empty() {
        return None;
    }
    let proj: Vec<f64> = pts.iter().map(|p| (*p - origin).dot(dir)).collect();
    let lo = proj.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = proj.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Some((lo, hi))
}

/// Whether two triangles cross properly: each straddles the other's plane
/// and their cuts along the common line overlap by more than `eps`.
/// Coplanar contact, shared edges and touching at a point do not count.
pub fn triangles_cross(t1: &[Vec3; 3], t2: &[Vec3; 3], eps: f64) -> bool {
    let n1 = (t1[1] - t1[0]).cross(t1[2] - t1[0]);
    let n2 = (t2[1] - t2[0]).cross(t2[2] - t2[0]);
    let (l1, l2) = (n1.length(), n2.length());
    if l1 <= eps * eps || l2 <= eps * eps {
        return false;
    }
    let (n1, n2) = (n1 / l1, n2 / l2);
    let d2 = [0, 1, 2].map(|k| (t2[k] - t1[0]).dot(n1));
    let d1 = [0, 1, 2].map(|k| (t1[k] - t2[0]).dot(n2));
    let (p2, m2) = signs(d2, eps);
    let (p1, m1) = signs(d1, eps);
    if !(p1 && m1 && p2 && m2) {
        return false;
    }
    let dir = n1.cross(n2);
    if dir.length() <= eps {
        return false;
    }
    let dir = dir.normalized();
    let origin = t1[0];
    let (Some(a), Some(b)) = (interval(t1, d1, origin, dir, eps), interval(t2, d2, origin, dir, eps)) else {
        return false;
    };
    a.0.max(b.0) + eps < a.1.min(b.1)
}

/// One triangle in the merged scene.
#[derive(Debug, Clone, Copy)]
pub struct Tri {
    pub pos: [Vec3; 3],
    /// Scene-wide vertex indices, for adjacency.
    pub verts: [usize; 3],
    pub mesh: usize,
}

/// Counts unordered crossing pairs. `skip(a, b)` excludes pairs of meshes.
pub fn count_crossings(
    exec: Execution,
    tris: &[Tri],
    eps: f64,
    skip: impl Fn(usize, usize) -> bool + Sync + Send,
) -> u64 {
    let boxes: Vec<Aabb> = tris
        .iter()
        .map(|t| Aabb::from_points(&t.pos).inflate(eps))
        .collect();
    let bvh = Bvh::build(&boxes);
    par::sum_range(exec, tris.len(), |i| {
        let a = &tris[i];
        let mut n = 0;
        bvh.visit(&boxes, &boxes[i], |j| {
            if j <= i {
                return;
            }
            let b = &tris[j];
            if a.verts.iter().any(|v| b.verts.contains(v)) || skip(a.mesh, b.mesh) {
                return;
            }
            if triangles_cross(&a.pos, &b.pos, eps) {
                n += 1;
            }
        });
        n
    })
}
