//! General geometric tasks: plain slabs and grids of primitives.

use super::extrude::{ellipse, extrude_profile, Profile};
use super::mesh::Mesh;
use super::subdiv::catmull_clark;
use super::vec3::{Vec2, Vec3};
use super::{out_of_range, rotate_z, BlockGeometry, GeomError};

#[derive(Debug, Clone, PartialEq)]
pub struct SlabParams {
    pub size_x: f64,
    pub size_y: f64,
    pub height: f64,
    pub smooth_levels: u32,
}

impl Default for SlabParams {
    fn default() -> Self {
        Self {
            size_x: 10.0,
            size_y: 10.0,
            height: 1.0,
            smooth_levels: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Cube,
    Cylinder,
    Sphere,
}

impl Shape {
    pub fn from_word(w: &str) -> Option<Shape> {
        match w {
            "cube" => Some(Shape::Cube),
            "cylinder" => Some(Shape::Cylinder),
            "sphere" => Some(Shape::Sphere),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveParams {
    pub shape: Shape,
    pub size: f64,
    pub columns: u32,
    pub rows: u32,
    pub spacing: f64,
    pub rotation_deg: f64,
    pub smooth_levels: u32,
}

impl Default for PrimitiveParams {
    fn default() -> Self {
        Self {
            shape: Shape::Cube,
            size: 2.0,
            columns: 1,
            rows: 1,
            spacing: 3.0,
            rotation_deg: 0.0,
            smooth_levels: 0,
        }
    }
}

pub const CYLINDER_SEGMENTS: usize = 24;
pub const SPHERE_SEGMENTS: usize = 16;
pub const SPHERE_RINGS: usize = 8;

pub fn build_slab(p: &SlabParams) -> Result<BlockGeometry, GeomError> {
    for (name, v) in [("width", p.size_x), ("depth", p.size_y), ("height", p.height)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(out_of_range(name, format!("{v} must be positive")));
        }
    }
    let (hx, hy) = (0.5 * p.size_x, 0.5 * p.size_y);
    let cube = Mesh::cuboid(Vec3::new(-hx, -hy, 0.0), Vec3::new(hx, hy, p.height));
    let mesh = catmull_clark(&cube, p.smooth_levels)?;
    let mut out = BlockGeometry::default();
    out.meshes.push(mesh.with_label("slab"));
    out.measure("width", p.size_x);
    out.measure("depth", p.size_y);
    out.measure("height", p.height);
    out.measure("smooth_levels", f64::from(p.smooth_levels));
    Ok(out)
}

/// UV sphere of radius `r` centered at the origin.
fn sphere(r: f64) -> Mesh {
    let (n, m) = (SPHERE_SEGMENTS, SPHERE_RINGS);
    let mut vertices = vec![Vec3::new(0.0, 0.0, -r)];
    for ring in 1..m {
        let phi = std::f64::consts::PI * ring as f64 / m as f64;
        let (s, c) = phi.sin_cos();
        for k in 0..n {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            vertices.push(Vec3::new(r * s * t.cos(), r * s * t.sin(), -r * c));
        }
    }
    vertices.push(Vec3::new(0.0, 0.0, r));
    let top = vertices.len() - 1;
    let at = |ring: usize, k: usize| 1 + (ring - 1) * n + k % n;
    let mut faces = Vec::new();
    for k in 0..n {
        faces.push(vec![0, at(1, k + 1), at(1, k)]);
    }
    for ring in 1..m - 1 {
        for k in 0..n {
            faces.push(vec![at(ring, k), at(ring, k + 1), at(ring + 1, k + 1), at(ring + 1, k)]);
        }
    }
    for k in 0..n {
        faces.push(vec![at(m - 1, k), at(m - 1, k + 1), top]);
    }
    Mesh::new(vertices, faces)
}

/// One element centered on the z axis with its base at z = 0.
fn element(shape: Shape, size: f64) -> Result<Mesh, GeomError> {
    let h = 0.5 * size;
    Ok(match shape {
        Shape::Cube => Mesh::cuboid(Vec3::new(-h, -h, 0.0), Vec3::new(h, h, size)),
        Shape::Cylinder => extrude_profile(
            &Profile::new(ellipse(Vec2::new(0.0, 0.0), h, h, CYLINDER_SEGMENTS), vec![]),
            size,
        )?,
        Shape::Sphere => sphere(h).translated(Vec3::new(0.0, 0.0, h)),
    })
}

/// Smallest center distance at which neighbouring elements do not overlap.
pub fn min_spacing(shape: Shape, size: f64, rotation_deg: f64) -> f64 {
    match shape {
        Shape::Cube if rotation_deg.rem_euclid(90.0) != 0.0 => size * 2f64.sqrt(),
        _ => size,
    }
}

pub fn build_primitive(p: &PrimitiveParams) -> Result<BlockGeometry, GeomError> {
    if !(p.size > 0.0 && p.size.is_finite()) {
        return Err(out_of_range("size", format!("{} must be positive", p.size)));
    }
    if p.columns == 0 || p.rows == 0 {
        return Err(out_of_range("columns", "grid needs at least one element"));
    }
    let count = p.columns * p.rows;
    let required = min_spacing(p.shape, p.size, p.rotation_deg);
    if count > 1 && p.spacing < required {
        return Err(GeomError::ElementOverlap {
            spacing: p.spacing,
            required,
        });
    }

    let base = catmull_clark(&element(p.shape, p.size)?, p.smooth_levels)?;
    let mut out = BlockGeometry {
        assembly: count > 1,
        ..Default::default()
    };
    let ox = 0.5 * f64::from(p.columns - 1) * p.spacing;
    let oy = 0.5 * f64::from(p.rows - 1) * p.spacing;
    let mut angles = Vec::with_capacity(count as usize);
    for r in 0..p.rows {
        for c in 0..p.columns {
            let k = r * p.columns + c;
            let angle = f64::from(k) * p.rotation_deg;
            let offset = Vec3::new(f64::from(c) * p.spacing - ox, f64::from(r) * p.spacing - oy, 0.0);
            let mut m = base.clone();
            for v in &mut m.vertices {
                *v = rotate_z(*v, angle) + offset;
            }
            angles.push(angle);
            out.meshes.push(m.with_label(format!("primitive/{k}")));
        }
    }
    out.measure("columns", f64::from(p.columns));
    out.measure("rows", f64::from(p.rows));
    out.measure("count", f64::from(count));
    out.measure("size", p.size);
    out.measure("spacing", p.spacing);
    out.measure("rotation_deg", p.rotation_deg);
    out.measure("smooth_levels", f64::from(p.smooth_levels));
    out.series.insert("rotation_deg".into(), angles);
    Ok(out)
}
