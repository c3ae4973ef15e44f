//! Aligned tubules carved from a slab matrix, with an optional cortical
//! shell. Holes are cut in 2D and the profile is extruded, so the carving
//! is exact up to the polygonal discretization of each ellipse.

use super::extrude::{ellipse, extrude_profile, loft_profile, Profile};
use super::vec3::Vec2;
use super::{out_of_range, BlockGeometry, GeomError};
use crate::dsl::ast::Axis;

#[derive(Debug, Clone, PartialEq)]
pub struct TubularParams {
    pub tubule_count: u32,
    pub tubule_radius: f64,
    pub ellipticity: f64,
    pub spacing: f64,
    pub cortical_thickness: f64,
    pub size_x: f64,
    pub size_y: f64,
    pub height: f64,
    pub segments: usize,
    pub gradient: Option<(Axis, f64)>,
}

impl Default for TubularParams {
    fn default() -> Self {
        Self {
            tubule_count: 16,
            tubule_radius: 0.6,
            ellipticity: 1.0,
            spacing: 1.8,
            cortical_thickness: 0.8,
            size_x: 10.0,
            size_y: 10.0,
            height: 4.0,
            segments: 64,
            gradient: None,
        }
    }
}

/// Hex-packed centers, centered on the origin: rows `spacing·√3/2` apart,
/// odd rows shifted by half a spacing. Rows are filled as close to square
/// as the count allows.
pub fn hex_centers(count: u32, spacing: f64) -> Vec<Vec2> {
    if count == 0 {
        return Vec::new();
    }
    let n = count as usize;
    let mut cols = 1usize;
    while cols * cols < n {
        cols += 1;
    }
    let rows = n.div_ceil(cols);
    let dy = spacing * 3f64.sqrt() / 2.0;
    let mut pts = Vec::with_capacity(n);
    for r in 0..rows {
        let in_row = (n - r * cols).min(cols);
        let shift = if r % 2 == 1 { 0.5 * spacing } else { 0.0 };
        for c in 0..in_row {
            pts.push(Vec2::new(c as f64 * spacing + shift, r as f64 * dy));
        }
    }
    let (mut lo, mut hi) = (pts[0], pts[0]);
    for p in &pts {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let mid = Vec2::new(0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y));
    pts.into_iter().map(|p| p - mid).collect()
}

/// Linear gradient law: scale runs from `1/f` at `u = 0` to `f` at `u = 1`.
pub fn gradient_scale(factor: f64, u: f64) -> f64 {
    let lo = 1.0 / factor;
    lo + (factor - lo) * u
}

fn check(p: &TubularParams) -> Result<(), GeomError> {
    if p.tubule_count > 400 {
        return Err(out_of_range("tubule_count", format!("{} not in [0, 400]", p.tubule_count)));
    }
    for (name, v) in [
        ("tubule_radius", p.tubule_radius),
        ("spacing", p.spacing),
        ("size_x", p.size_x),
        ("size_y", p.size_y),
        ("height", p.height),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(out_of_range(name, format!("{v} must be positive")));
        }
    }
    if !(p.ellipticity >= 1.0 && p.ellipticity.is_finite()) {
        return Err(out_of_range("ellipticity", format!("{} must be >= 1", p.ellipticity)));
    }
    if p.cortical_thickness.is_nan() || p.cortical_thickness < 0.0 {
        return Err(out_of_range("cortical_thickness", "must be >= 0"));
    }
    if 2.0 * p.cortical_thickness >= p.size_x.min(p.size_y) {
        return Err(out_of_range(
            "cortical_thickness",
            format!("{} leaves no room for the matrix", p.cortical_thickness),
        ));
    }
    if p.segments < 8 {
        return Err(out_of_range("segments", "at least 8 required"));
    }
    if let Some((_, f)) = p.gradient {
        if !(f > 0.0 && f.is_finite()) {
            return Err(out_of_range("gradient", format!("factor {f} must be positive")));
        }
    }
    Ok(())
}

struct Plan {
    half: Vec2,
    inner_lo: Vec2,
    inner_hi: Vec2,
    centers: Vec<Vec2>,
    /// Radius scale of each tubule at the bottom and top faces.
    lo_f: Vec<f64>,
    hi_f: Vec<f64>,
}

fn plan(p: &TubularParams) -> Result<Plan, GeomError> {
    check(p)?;
    let c = p.cortical_thickness;
    let half = Vec2::new(0.5 * p.size_x, 0.5 * p.size_y);
    let inner_lo = Vec2::new(-half.x + c, -half.y + c);
    let inner_hi = Vec2::new(half.x - c, half.y - c);
    let centers = hex_centers(p.tubule_count, p.spacing);

    let (lo_f, hi_f) = match p.gradient {
        Some((Axis::Z, f)) => (vec![1.0 / f; centers.len()], vec![f; centers.len()]),
        Some((axis, f)) => {
            let (a, b) = match axis {
                Axis::X => (inner_lo.x, inner_hi.x),
                _ => (inner_lo.y, inner_hi.y),
            };
            let s: Vec<f64> = centers
                .iter()
                .map(|q| {
                    let x = if axis == Axis::X { q.x } else { q.y };
                    gradient_scale(f, ((x - a) / (b - a)).clamp(0.0, 1.0))
                })
                .collect();
            (s.clone(), s)
        }
        None => (vec![1.0; centers.len()], vec![1.0; centers.len()]),
    };

    let major = |scale: f64| p.tubule_radius * p.ellipticity * scale;
    let minor = |scale: f64| p.tubule_radius * scale;
    let largest = lo_f.iter().chain(&hi_f).fold(0.0f64, |m, &s| m.max(s));
    if centers.len() > 1 {
        let required = 2.0 * major(largest);
        // Relative slack so tangent rings rounded apart still count as touching.
        if p.spacing <= required * (1.0 + 1e-9) {
            return Err(GeomError::TubuleOverlap {
                spacing: p.spacing,
                required,
            });
        }
    }
    for (i, q) in centers.iter().enumerate() {
        let s = lo_f[i].max(hi_f[i]);
        let (a, b) = (major(s), minor(s));
        let inside = q.x - a > inner_lo.x
            && q.x + a < inner_hi.x
            && q.y - b > inner_lo.y
            && q.y + b < inner_hi.y;
        if !inside {
            return Err(GeomError::TubuleOutsideCortex { index: i });
        }
    }

    Ok(Plan {
        half,
        inner_lo,
        inner_hi,
        centers,
        lo_f,
        hi_f,
    })
}

/// Runs every feasibility check of [`build_tubular`] without meshing.
pub fn check_layout(p: &TubularParams) -> Result<(), GeomError> {
    plan(p).map(|_| ())
}

pub fn build_tubular(p: &TubularParams) -> Result<BlockGeometry, GeomError> {
    let Plan {
        half,
        inner_lo,
        inner_hi,
        centers,
        lo_f,
        hi_f,
    } = plan(p)?;
    let c = p.cortical_thickness;
    let major = |scale: f64| p.tubule_radius * p.ellipticity * scale;
    let minor = |scale: f64| p.tubule_radius * scale;
    let outer = Profile::rectangle(inner_lo, inner_hi);
    let holes_at = |f: &[f64]| -> Vec<Vec<Vec2>> {
        centers
            .iter()
            .zip(f)
            .map(|(q, &s)| ellipse(*q, major(s), minor(s), p.segments))
            .collect()
    };
    let bottom = Profile::new(outer.clone(), holes_at(&lo_f));
    let matrix = if lo_f == hi_f {
        extrude_profile(&bottom, p.height)?
    } else {
        loft_profile(&bottom, &Profile::new(outer, holes_at(&hi_f)), p.height)?
    };

    let mut out = BlockGeometry::default();
    let hole_area_bottom: f64 = bottom.holes.iter().map(|h| super::triangulate::signed_area(h).abs()).sum();
    let cross_section = p.size_x * p.size_y;
    out.meshes.push(matrix.with_label("tubular/matrix"));
    if c > 0.0 {
        let shell = Profile::new(
            Profile::rectangle(Vec2::new(-half.x, -half.y), half),
            vec![Profile::rectangle(inner_lo, inner_hi)],
        );
        out.meshes.push(extrude_profile(&shell, p.height)?.with_label("tubular/cortex"));
        // The shell wraps the matrix; their shared walls touch on purpose.
        out.nested.push((0, 1));
    }

    let radii_bottom: Vec<f64> = lo_f.iter().map(|&s| minor(s)).collect();
    let radii_top: Vec<f64> = hi_f.iter().map(|&s| minor(s)).collect();
    let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
    out.measure("tubule_count", centers.len() as f64);
    out.measure("tubule_radius", 0.5 * (mean(&radii_bottom) + mean(&radii_top)));
    out.measure("ellipticity", p.ellipticity);
    out.measure("spacing", p.spacing);
    out.measure("cortical_thickness", c);
    out.measure("porosity", hole_area_bottom / cross_section);
    if let Some((axis, f)) = p.gradient {
        out.measure("gradient_factor", f);
        out.measure("gradient_axis", axis.index() as f64);
    }
    out.series.insert("tubule_radius_bottom".into(), radii_bottom);
    out.series.insert("tubule_radius_top".into(), radii_top);
    Ok(out)
}
