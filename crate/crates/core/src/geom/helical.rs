//! Twisted-ply (Bouligand) stacks.
//!
//! Ply `i` fills `z ∈ [i·t, (i+1)·t]` with parallel fibers whose direction
//! is rotated by `θᵢ = i·rotation + εᵢ` about the stacking axis. Fibers are
//! chords of a disk of diameter `footprint`; each spans the full ply height
//! so adjacent plies touch without interpenetrating.

use super::mesh::Mesh;
use super::vec3::Vec3;
use super::{out_of_range, rotate_z, BlockGeometry, GeomError};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiberProfile {
    Cylinder,
    Rectangle,
}

impl FiberProfile {
    pub fn from_word(w: &str) -> Option<Self> {
        match w {
            "cylinder" => Some(FiberProfile::Cylinder),
            "rectangle" => Some(FiberProfile::Rectangle),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HelicalParams {
    pub plies: u32,
    pub ply_thickness: f64,
    pub rotation_deg: f64,
    pub noise_deg: f64,
    pub fibers_per_ply: u32,
    pub fiber_profile: FiberProfile,
    pub fiber_radius: f64,
    pub fiber_width: f64,
    pub footprint: f64,
}

impl Default for HelicalParams {
    fn default() -> Self {
        Self {
            plies: 8,
            ply_thickness: 0.5,
            rotation_deg: 16.0,
            noise_deg: 0.0,
            fibers_per_ply: 12,
            fiber_profile: FiberProfile::Cylinder,
            fiber_radius: 0.25,
            fiber_width: 0.6,
            footprint: 10.0,
        }
    }
}

/// Sides of the cylindrical fiber cross-section.
pub const FIBER_SEGMENTS: usize = 16;

/// Fiber direction of every ply in degrees. Draws one uniform per ply when
/// noise is positive and none otherwise.
pub fn ply_angles(p: &HelicalParams, rng: &mut Rng) -> Vec<f64> {
    (0..p.plies)
        .map(|i| {
            let base = f64::from(i) * p.rotation_deg;
            if p.noise_deg > 0.0 {
                base + rng.uniform(-p.noise_deg, p.noise_deg)
            } else {
                base
            }
        })
        .collect()
}

fn check(p: &HelicalParams) -> Result<(), GeomError> {
    if !(1..=64).contains(&p.plies) {
        return Err(out_of_range("plies", format!("{} not in [1, 64]", p.plies)));
    }
    if !(p.ply_thickness > 0.0 && p.ply_thickness <= 10.0) {
        return Err(out_of_range("ply_thickness", format!("{} not in (0, 10]", p.ply_thickness)));
    }
    if p.fibers_per_ply == 0 {
        return Err(out_of_range("fibers_per_ply", "must be at least 1"));
    }
    if p.noise_deg.is_nan() || p.noise_deg < 0.0 {
        return Err(out_of_range("noise", format!("{} must be >= 0", p.noise_deg)));
    }
    for (name, v) in [
        ("fiber_radius", p.fiber_radius),
        ("fiber_width", p.fiber_width),
        ("footprint", p.footprint),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(out_of_range(name, format!("{v} must be positive")));
        }
    }
    Ok(())
}

/// Cross-section ring in the (y, z) plane, counter-clockwise seen from +x.
/// The top and bottom edges sit exactly on `z_lo` and `z_hi`.
fn section(profile: FiberProfile, half_w: f64, z_lo: f64, z_hi: f64) -> Vec<(f64, f64)> {
    let zc = 0.5 * (z_lo + z_hi);
    let hz = 0.5 * (z_hi - z_lo);
    match profile {
        FiberProfile::Rectangle => vec![(-half_w, z_lo), (half_w, z_lo), (half_w, z_hi), (-half_w, z_hi)],
        FiberProfile::Cylinder => {
            // Circumscribed polygon with flat edges facing ±y and ±z.
            let n = FIBER_SEGMENTS;
            let scale = 1.0 / (std::f64::consts::PI / n as f64).cos();
            (0..n)
                .map(|k| {
                    let phi = (k as f64 + 0.5) * std::f64::consts::TAU / n as f64;
                    let mut y = half_w * scale * phi.cos();
                    let mut z = zc + hz * scale * phi.sin();
                    let q = n / 4;
                    if k == q - 1 || k == q {
                        z = z_hi;
                    } else if k == 3 * q - 1 || k == 3 * q {
                        z = z_lo;
                    }
                    if k == n - 1 || k == 0 {
                        y = half_w;
                    } else if k == 2 * q - 1 || k == 2 * q {
                        y = -half_w;
                    }
                    (y, z)
                })
                .collect()
        }
    }
}

/// Prism along x over `ring`, from `x0` to `x1`, offset by `y` across.
fn fiber(ring: &[(f64, f64)], x0: f64, x1: f64, y: f64) -> Mesh {
    let n = ring.len();
    let mut vertices = Vec::with_capacity(2 * n);
    vertices.extend(ring.iter().map(|&(ry, z)| Vec3::new(x0, y + ry, z)));
    vertices.extend(ring.iter().map(|&(ry, z)| Vec3::new(x1, y + ry, z)));
    let mut faces = Vec::with_capacity(n + 2);
    faces.push((0..n).rev().collect());
    faces.push((n..2 * n).collect());
    for k in 0..n {
        let k1 = (k + 1) % n;
        faces.push(vec![k, k1, k1 + n, k + n]);
    }
    Mesh::new(vertices, faces)
}

pub fn build_helical(p: &HelicalParams, rng: &mut Rng) -> Result<BlockGeometry, GeomError> {
    check(p)?;
    let angles = ply_angles(p, rng);
    let mut out = BlockGeometry {
        assembly: true,
        ..Default::default()
    };

    let n = p.fibers_per_ply as usize;
    let radius = 0.5 * p.footprint;
    let pitch = p.footprint / n as f64;
    let wanted = match p.fiber_profile {
        FiberProfile::Cylinder => p.fiber_radius,
        FiberProfile::Rectangle => 0.5 * p.fiber_width,
    };
    let half_w = wanted.min(0.45 * pitch);
    if half_w < wanted {
        out.warnings.push(format!(
            "fiber half-width {wanted} reduced to {half_w} to fit {n} fibers per ply"
        ));
    }

    for (i, &theta) in angles.iter().enumerate() {
        let z_lo = i as f64 * p.ply_thickness;
        let z_hi = (i + 1) as f64 * p.ply_thickness;
        let ring = section(p.fiber_profile, half_w, z_lo, z_hi);
        let mut ply = Mesh::default();
        for k in 0..n {
            let y = (k as f64 + 0.5) * pitch - radius;
            // Chord length at the fiber's outer edge keeps corners inside the disk.
            let reach = y.abs() + half_w;
            let half_len = (radius * radius - reach * reach).max(0.0).sqrt().max(half_w);
            let mut f = fiber(&ring, -half_len, half_len, y);
            for v in &mut f.vertices {
                *v = rotate_z(*v, theta);
            }
            ply.append(&f);
        }
        out.meshes.push(ply.with_label(format!("helical/ply_{i}")));
    }

    let count = angles.len();
    out.measure("plies", count as f64);
    out.measure("ply_thickness", p.ply_thickness);
    out.measure("fibers_per_ply", n as f64);
    out.measure("stack_height", count as f64 * p.ply_thickness);
    let rotation = if count > 1 {
        (angles[count - 1] - angles[0]) / (count - 1) as f64
    } else {
        p.rotation_deg
    };
    out.measure("rotation_deg", rotation);
    out.measure("noise_deg", p.noise_deg);
    out.series.insert("ply_angles_deg".into(), angles);
    Ok(out)
}
