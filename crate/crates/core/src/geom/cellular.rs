//! Voronoi-fractured cellular solids with open walls, optional smoothing
//! and sandwich face sheets.

use super::mesh::Mesh;
use super::metrics::{centroid, signed_volume};
use super::subdiv::catmull_clark;
use super::vec3::{Aabb, Vec3};
use super::voronoi::voronoi_partition_with;
use super::{out_of_range, BlockGeometry, GeomError};
use crate::par::{self, Execution};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct CellularParams {
    pub region_count: u32,
    pub randomness: f64,
    pub wall_gap: f64,
    pub smooth_levels: u32,
    pub domain: Vec3,
    pub sandwich_thickness: f64,
}

impl Default for CellularParams {
    fn default() -> Self {
        Self {
            region_count: 24,
            randomness: 0.5,
            wall_gap: 0.15,
            smooth_levels: 1,
            domain: Vec3::splat(10.0),
            sandwich_thickness: 0.0,
        }
    }
}

/// Shrink factors below this leave a sliver; such cells are dropped.
pub const MIN_SHRINK: f64 = 0.05;

/// Smallest lattice with at least `n` points: start from a cube of side
/// `ceil(cbrt n)` and drop layers while enough points remain.
pub fn lattice_dims(n: u32) -> [u32; 3] {
    let n = n.max(1);
    let mut k = 1u32;
    while k * k * k < n {
        k += 1;
    }
    let mut dims = [k, k, k];
    loop {
        let mut changed = false;
        for a in 0..3 {
            if dims[a] > 1 {
                let mut d = dims;
                d[a] -= 1;
                if d[0] * d[1] * d[2] >= n {
                    dims = d;
                    changed = true;
                }
            }
        }
        if !changed {
            return dims;
        }
    }
}

/// Jittered lattice seeds inside `[0, domain]`. Surplus lattice points are
/// discarded at random; each seed moves by at most `randomness·0.45` of a
/// lattice cell per axis, so seeds stay distinct and inside their cell.
pub fn cellular_seeds(p: &CellularParams, rng: &mut Rng) -> Vec<Vec3> {
    let dims = lattice_dims(p.region_count);
    let total = (dims[0] * dims[1] * dims[2]) as usize;
    let n = p.region_count as usize;
    let mut keep: Vec<usize> = (0..total).collect();
    if total > n {
        rng.shuffle(&mut keep);
        keep.truncate(n);
        keep.sort_unstable();
    }
    let cell = Vec3::new(
        p.domain.x / f64::from(dims[0]),
        p.domain.y / f64::from(dims[1]),
        p.domain.z / f64::from(dims[2]),
    );
    let amp = p.randomness * 0.45;
    keep.into_iter()
        .map(|idx| {
            let i = idx as u32 % dims[0];
            let j = idx as u32 / dims[0] % dims[1];
            let k = idx as u32 / (dims[0] * dims[1]);
            let mut jitter = [0.0; 3];
            if amp > 0.0 {
                for v in &mut jitter {
                    *v = rng.uniform(-amp, amp);
                }
            }
            Vec3::new(
                (f64::from(i) + 0.5 + jitter[0]) * cell.x,
                (f64::from(j) + 0.5 + jitter[1]) * cell.y,
                (f64::from(k) + 0.5 + jitter[2]) * cell.z,
            )
        })
        .collect()
}

fn check(p: &CellularParams) -> Result<(), GeomError> {
    if !(1..=200).contains(&p.region_count) {
        return Err(out_of_range("region_count", format!("{} not in [1, 200]", p.region_count)));
    }
    if !(0.0..=1.0).contains(&p.randomness) {
        return Err(out_of_range("randomness", format!("{} not in [0, 1]", p.randomness)));
    }
    if !(p.wall_gap >= 0.0 && p.wall_gap.is_finite()) {
        return Err(out_of_range("wall_gap", format!("{} must be >= 0", p.wall_gap)));
    }
    if p.smooth_levels > 3 {
        return Err(out_of_range("smooth", format!("{} not in [0, 3]", p.smooth_levels)));
    }
    if !(p.sandwich_thickness >= 0.0 && p.sandwich_thickness.is_finite()) {
        return Err(out_of_range("sandwich", format!("{} must be >= 0", p.sandwich_thickness)));
    }
    let d = p.domain;
    if !(d.x > 0.0 && d.y > 0.0 && d.z > 0.0 && d.is_finite()) {
        return Err(out_of_range("domain", "extents must be positive"));
    }
    Ok(())
}

/// Distance from `c` to the nearest face plane of a convex mesh.
fn inradius_from(mesh: &Mesh, c: Vec3) -> f64 {
    (0..mesh.faces.len())
        .map(|f| {
            let n = mesh.face_normal(f).normalized();
            (mesh.face_centroid(f) - c).dot(n)
        })
        .fold(f64::INFINITY, f64::min)
}

enum CellOutcome {
    Kept(Mesh, f64),
    Dropped(usize),
    Failed(GeomError),
}

pub fn build_cellular(p: &CellularParams, rng: &mut Rng) -> Result<BlockGeometry, GeomError> {
    build_cellular_with(p, rng, Execution::default())
}

pub fn build_cellular_with(
    p: &CellularParams,
    rng: &mut Rng,
    exec: Execution,
) -> Result<BlockGeometry, GeomError> {
    check(p)?;
    let domain = Aabb::new(Vec3::ZERO, p.domain);
    let seeds = cellular_seeds(p, rng);
    let cells = voronoi_partition_with(&seeds, &domain, exec)?;

    let half_gap = 0.5 * p.wall_gap;
    let outcomes = par::map_range(exec, cells.len(), |idx| {
        let mut m = cells[idx].clone();
        if half_gap > 0.0 {
            let c = centroid(&m);
            let r = inradius_from(&m, c);
            let s = 1.0 - half_gap / r;
            if s.is_nan() || s < MIN_SHRINK {
                return CellOutcome::Dropped(idx);
            }
            for v in &mut m.vertices {
                *v = c + (*v - c) * s;
            }
        }
        match catmull_clark(&m, p.smooth_levels) {
            Ok(smooth) => {
                let vol = signed_volume(&smooth);
                CellOutcome::Kept(smooth, vol)
            }
            Err(e) => CellOutcome::Failed(e),
        }
    });

    let mut out = BlockGeometry {
        assembly: true,
        ..Default::default()
    };
    let mut solid = 0.0;
    for o in outcomes {
        match o {
            CellOutcome::Kept(m, v) => {
                let i = out.meshes.len();
                out.meshes.push(m.with_label(format!("cellular/cell_{i}")));
                solid += v;
            }
            CellOutcome::Dropped(i) => out
                .warnings
                .push(format!("DegenerateCell: cell {i} vanished under wall_gap {}", p.wall_gap)),
            CellOutcome::Failed(e) => return Err(e),
        }
    }
    let cells_kept = out.meshes.len();
    let center = Vec3::new(-0.5 * p.domain.x, -0.5 * p.domain.y, 0.0);

    if p.sandwich_thickness > 0.0 {
        let t = p.sandwich_thickness;
        let d = p.domain;
        out.meshes.push(
            Mesh::cuboid(Vec3::new(0.0, 0.0, -t), Vec3::new(d.x, d.y, 0.0))
                .with_label("cellular/face_bottom"),
        );
        out.meshes.push(
            Mesh::cuboid(Vec3::new(0.0, 0.0, d.z), Vec3::new(d.x, d.y, d.z + t))
                .with_label("cellular/face_top"),
        );
    }

    for m in &mut out.meshes {
        m.translate(center);
    }

    out.measure("region_count", cells_kept as f64);
    out.measure("seed_count", seeds.len() as f64);
    out.measure("randomness", p.randomness);
    out.measure("wall_gap", p.wall_gap);
    out.measure("smooth_levels", f64::from(p.smooth_levels));
    out.measure("sandwich_thickness", p.sandwich_thickness);
    out.measure("cell_volume", solid);
    out.measure("porosity", 1.0 - solid / domain.volume());
    Ok(out)
}
