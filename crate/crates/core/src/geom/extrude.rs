use super::mesh::Mesh;
use super::triangulate::{
    is_self_intersecting, point_in_polygon, segments_intersect, signed_area, triangulate,
};
use super::vec3::{Vec2, Vec3};
use super::GeomError;

/// A planar region: an outer ring minus zero or more holes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Profile {
    pub outer: Vec<Vec2>,
    pub holes: Vec<Vec<Vec2>>,
}

impl Profile {
    pub fn new(outer: Vec<Vec2>, holes: Vec<Vec<Vec2>>) -> Self {
        Self { outer, holes }
    }

    pub fn rectangle(min: Vec2, max: Vec2) -> Vec<Vec2> {
        vec![
            Vec2::new(min.x, min.y),
            Vec2::new(max.x, min.y),
            Vec2::new(max.x, max.y),
            Vec2::new(min.x, max.y),
        ]
    }

    /// Net area (outer minus holes).
    pub fn area(&self) -> f64 {
        signed_area(&self.outer).abs() - self.holes.iter().map(|h| signed_area(h).abs()).sum::<f64>()
    }

    fn ring_count(&self) -> usize {
        self.outer.len() + self.holes.iter().map(Vec::len).sum::<usize>()
    }

    /// Checks the preconditions of extrusion: simple rings, holes strictly
    /// inside the outer ring and pairwise disjoint.
    pub fn validate(&self) -> Result<(), GeomError> {
        if self.outer.len() < 3 || is_self_intersecting(&self.outer) {
            return Err(GeomError::SelfIntersectingProfile("outer ring".into()));
        }
        for (i, h) in self.holes.iter().enumerate() {
            if h.len() < 3 || is_self_intersecting(h) {
                return Err(GeomError::SelfIntersectingProfile(format!("hole {i}")));
            }
        }
        let boxes: Vec<(Vec2, Vec2)> = self.holes.iter().map(|h| bounds(h)).collect();
        for (i, h) in self.holes.iter().enumerate() {
            if !h.iter().all(|&p| point_in_polygon(p, &self.outer))
                || rings_touch(h, &self.outer)
            {
                return Err(GeomError::HoleOutsideOuter(i));
            }
            for j in i + 1..self.holes.len() {
                let (a, b) = (boxes[i], boxes[j]);
                let disjoint_boxes =
                    a.1.x < b.0.x || b.1.x < a.0.x || a.1.y < b.0.y || b.1.y < a.0.y;
                if disjoint_boxes {
                    continue;
                }
                let g = &self.holes[j];
                if rings_touch(h, g)
                    || point_in_polygon(g[0], h)
                    || point_in_polygon(h[0], g)
                {
                    return Err(GeomError::HoleOverlap(i, j));
                }
            }
        }
        Ok(())
    }
}

fn bounds(r: &[Vec2]) -> (Vec2, Vec2) {
    r.iter().fold(
        (
            Vec2::new(f64::INFINITY, f64::INFINITY),
            Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        ),
        |(lo, hi), p| {
            (
                Vec2::new(lo.x.min(p.x), lo.y.min(p.y)),
                Vec2::new(hi.x.max(p.x), hi.y.max(p.y)),
            )
        },
    )
}

fn rings_touch(a: &[Vec2], b: &[Vec2]) -> bool {
    let (na, nb) = (a.len(), b.len());
    (0..na).any(|i| {
        (0..nb).any(|j| segments_intersect(a[i], a[(i + 1) % na], b[j], b[(j + 1) % nb]))
    })
}

/// Prism of height `h` over `profile`: caps by ear clipping, quads on the
/// side walls. The result is closed with outward winding.
pub fn extrude_profile(profile: &Profile, h: f64) -> Result<Mesh, GeomError> {
    loft_profile(profile, profile, h)
}

/// Like [`extrude_profile`], but the top cap uses `top`, which must have the
/// same ring structure as `bottom` (vertex `k` of each ring is joined to
/// vertex `k` of the matching ring).
pub fn loft_profile(bottom: &Profile, top: &Profile, h: f64) -> Result<Mesh, GeomError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(GeomError::ValueOutOfRange {
            param: "height".into(),
            detail: format!("extrusion height {h} must be positive"),
        });
    }
    let same_shape = bottom.outer.len() == top.outer.len()
        && bottom.holes.len() == top.holes.len()
        && bottom
            .holes
            .iter()
            .zip(&top.holes)
            .all(|(a, b)| a.len() == b.len());
    if !same_shape {
        return Err(GeomError::SelfIntersectingProfile(
            "loft profiles differ in ring structure".into(),
        ));
    }
    bottom.validate()?;
    if top != bottom {
        top.validate()?;
    }

    let n = bottom.ring_count();
    let flat = |p: &Profile| -> Vec<Vec2> {
        let mut v = p.outer.clone();
        for h in &p.holes {
            v.extend_from_slice(h);
        }
        v
    };
    let (b2, t2) = (flat(bottom), flat(top));
    let mut vertices: Vec<Vec3> = Vec::with_capacity(2 * n);
    vertices.extend(b2.iter().map(|p| Vec3::new(p.x, p.y, 0.0)));
    vertices.extend(t2.iter().map(|p| Vec3::new(p.x, p.y, h)));

    let mut faces: Vec<Vec<usize>> = Vec::new();
    for t in triangulate(&bottom.outer, &bottom.holes) {
        faces.push(vec![t[0], t[2], t[1]]);
    }
    for t in triangulate(&top.outer, &top.holes) {
        faces.push(vec![t[0] + n, t[1] + n, t[2] + n]);
    }

    // Side walls: outer ring counter-clockwise, holes clockwise.
    let mut start = 0;
    let mut rings: Vec<(usize, usize, bool)> = vec![(0, bottom.outer.len(), true)];
    start += bottom.outer.len();
    for h in &bottom.holes {
        rings.push((start, h.len(), false));
        start += h.len();
    }
    for (base, len, is_outer) in rings {
        let ring = &b2[base..base + len];
        let ccw = signed_area(ring) > 0.0;
        let forward = ccw == is_outer;
        for k in 0..len {
            let (mut a, mut b) = (base + k, base + (k + 1) % len);
            if !forward {
                std::mem::swap(&mut a, &mut b);
            }
            faces.push(vec![a, b, b + n, a + n]);
        }
    }

    Ok(Mesh::new(vertices, faces))
}

/// Regular polygon approximating an ellipse with semi-axes `a` (x) and
/// `b` (y), counter-clockwise, first vertex on the +x axis.
pub fn ellipse(center: Vec2, a: f64, b: f64, segments: usize) -> Vec<Vec2> {
    (0..segments)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / segments as f64;
            Vec2::new(center.x + a * t.cos(), center.y + b * t.sin())
        })
        .collect()
}

/// Area of the inscribed regular `segments`-gon of an ellipse.
pub fn ellipse_polygon_area(a: f64, b: f64, segments: usize) -> f64 {
    0.5 * segments as f64 * a * b * (std::f64::consts::TAU / segments as f64).sin()
}
