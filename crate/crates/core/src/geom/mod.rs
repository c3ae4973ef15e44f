//! Procedural geometry kernel: meshes, generators for the three structural
//! classes plus general primitives, and program compilation.

pub mod cellular;
pub mod compile;
pub mod extrude;
pub mod general;
pub mod helical;
pub mod mesh;
pub mod metrics;
pub mod subdiv;
pub mod triangulate;
pub mod tubular;
pub mod vec3;
pub mod voronoi;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use compile::{compile_program, compile_program_with, BlockInfo, CompileError, Scene};
pub use mesh::Mesh;
pub use metrics::{mesh_metrics, MeshMetrics};
pub use vec3::{Aabb, Vec2, Vec3};

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
pub enum GeomError {
    #[error("value out of range for {param}: {detail}")]
    ValueOutOfRange { param: String, detail: String },
    #[error("mesh is not a closed manifold: edge {edge:?} is used by {faces} face(s)")]
    NotManifold { edge: (usize, usize), faces: usize },
    #[error("seeds {0} and {1} coincide")]
    DuplicateSeeds(usize, usize),
    #[error("seed {0:?} lies outside the domain")]
    SeedOutsideDomain(Vec3),
    #[error("self-intersecting profile: {0}")]
    SelfIntersectingProfile(String),
    #[error("hole {0} is not strictly inside the outer ring")]
    HoleOutsideOuter(usize),
    #[error("holes {0} and {1} overlap")]
    HoleOverlap(usize, usize),
    #[error("tubules overlap: spacing {spacing} must exceed {required}")]
    TubuleOverlap { spacing: f64, required: f64 },
    #[error("tubule {index} does not fit inside the cortical margin")]
    TubuleOutsideCortex { index: usize },
    #[error("grid elements overlap: spacing {spacing} is below {required}")]
    ElementOverlap { spacing: f64, required: f64 },
}

impl GeomError {
    /// Stable identifier used in critiques and repair dispatch.
    pub fn code(&self) -> &'static str {
        match self {
            GeomError::ValueOutOfRange { .. } => "ValueOutOfRange",
            GeomError::NotManifold { .. } => "NotManifold",
            GeomError::DuplicateSeeds(..) => "DuplicateSeeds",
            GeomError::SeedOutsideDomain(_) => "SeedOutsideDomain",
            GeomError::SelfIntersectingProfile(_) => "SelfIntersectingProfile",
            GeomError::HoleOutsideOuter(_) => "HoleOutsideOuter",
            GeomError::HoleOverlap(..) => "HoleOverlap",
            GeomError::TubuleOverlap { .. } => "TubuleOverlap",
            GeomError::TubuleOutsideCortex { .. } => "TubuleOutsideCortex",
            GeomError::ElementOverlap { .. } => "ElementOverlap",
        }
    }
}

pub(crate) fn out_of_range(param: &str, detail: impl Into<String>) -> GeomError {
    GeomError::ValueOutOfRange {
        param: param.to_string(),
        detail: detail.into(),
    }
}

/// Output of one generator run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BlockGeometry {
    pub meshes: Vec<Mesh>,
    /// Several disjoint parts by construction (plies, cells, grids).
    pub assembly: bool,
    /// Scalar descriptors measured during construction.
    pub measured: BTreeMap<String, f64>,
    /// Per-item series such as ply angles or tubule radii.
    pub series: BTreeMap<String, Vec<f64>>,
    pub warnings: Vec<String>,
    /// Mesh index pairs that intersect on purpose.
    pub nested: Vec<(usize, usize)>,
}

impl BlockGeometry {
    pub(crate) fn measure(&mut self, key: &str, v: f64) {
        self.measured.insert(key.to_string(), v);
    }
}

/// Rotates `p` about the z axis by `deg` degrees.
pub fn rotate_z(p: Vec3, deg: f64) -> Vec3 {
    let (s, c) = deg.to_radians().sin_cos();
    Vec3::new(p.x * c - p.y * s, p.x * s + p.y * c, p.z)
}
