//! Program compilation: one generator call per block, then blocks are
//! stacked along z in declared order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::cellular::{build_cellular_with, CellularParams};
use super::general::{build_primitive, build_slab, PrimitiveParams, Shape, SlabParams};
use super::helical::{build_helical, FiberProfile, HelicalParams};
use super::mesh::Mesh;
use super::tubular::{build_tubular, TubularParams};
use super::vec3::{Aabb, Vec3};
use super::{out_of_range, BlockGeometry, GeomError};
use crate::dsl::ast::{Block, BlockKind, DesignProgram, Modifier};
use crate::dsl::schema::{self, DEFAULT_CELLULAR_SMOOTH};
use crate::par::{self, Execution};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
#[error("block {block} ({kind}): {error}")]
pub struct CompileError {
    pub block: usize,
    pub kind: BlockKind,
    pub error: GeomError,
}

impl CompileError {
    pub fn code(&self) -> &'static str {
        self.error.code()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub name: String,
    pub seed: u64,
}

/// Construction metadata for one block of a scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockInfo {
    pub kind: BlockKind,
    /// Indices into `Scene::meshes`.
    pub first_mesh: usize,
    pub mesh_count: usize,
    pub assembly: bool,
    pub measured: BTreeMap<String, f64>,
    pub series: BTreeMap<String, Vec<f64>>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub meshes: Vec<Mesh>,
    pub provenance: Provenance,
    pub blocks: Vec<BlockInfo>,
    /// Mesh index pairs whose contact or overlap is intended.
    pub nested: Vec<(usize, usize)>,
}

impl Scene {
    pub fn new(meshes: Vec<Mesh>) -> Self {
        Self {
            meshes,
            provenance: Provenance {
                name: String::new(),
                seed: 0,
            },
            blocks: Vec::new(),
            nested: Vec::new(),
        }
    }

    pub fn bbox(&self) -> Aabb {
        self.meshes.iter().fold(Aabb::EMPTY, |b, m| b.union(m.bbox()))
    }

    pub fn triangle_count(&self) -> usize {
        self.meshes.iter().map(Mesh::triangle_count).sum()
    }

    /// Whether mesh `i` belongs to an intentionally multi-part block.
    pub fn is_assembly_mesh(&self, i: usize) -> bool {
        self.blocks
            .iter()
            .any(|b| b.assembly && (b.first_mesh..b.first_mesh + b.mesh_count).contains(&i))
    }

    pub fn warnings(&self) -> Vec<String> {
        self.blocks.iter().flat_map(|b| b.warnings.iter().cloned()).collect()
    }
}

fn smooth_levels(block: &Block, default: u32) -> u32 {
    match block.modifier("smooth") {
        Some(Modifier::Smooth { levels }) => *levels,
        _ => default,
    }
}

fn int(block: &Block, key: &str) -> u32 {
    schema::number(block, key).max(0.0) as u32
}

pub fn helical_params(block: &Block) -> HelicalParams {
    let noise = block
        .modifiers
        .iter()
        .filter_map(|m| match m {
            Modifier::Noise { degrees } => Some(*degrees),
            _ => None,
        })
        .next_back()
        .unwrap_or(0.0);
    HelicalParams {
        plies: int(block, "plies"),
        ply_thickness: schema::number(block, "ply_thickness"),
        rotation_deg: schema::number(block, "rotation_deg"),
        noise_deg: noise,
        fibers_per_ply: int(block, "fibers_per_ply"),
        fiber_profile: FiberProfile::from_word(&schema::word(block, "fiber_profile"))
            .unwrap_or(FiberProfile::Cylinder),
        fiber_radius: schema::number(block, "fiber_radius"),
        fiber_width: schema::number(block, "fiber_width"),
        footprint: schema::number(block, "footprint"),
    }
}

pub fn cellular_params(block: &Block) -> CellularParams {
    let sandwich = match block.modifier("sandwich") {
        Some(Modifier::Sandwich { thickness }) => *thickness,
        _ => 0.0,
    };
    CellularParams {
        region_count: int(block, "region_count"),
        randomness: schema::number(block, "randomness"),
        wall_gap: schema::number(block, "wall_gap"),
        smooth_levels: smooth_levels(block, DEFAULT_CELLULAR_SMOOTH),
        domain: Vec3::new(
            schema::number(block, "width"),
            schema::number(block, "depth"),
            schema::number(block, "height"),
        ),
        sandwich_thickness: sandwich,
    }
}

pub fn tubular_params(block: &Block) -> TubularParams {
    let gradient = match block.modifier("gradient") {
        Some(Modifier::Gradient { axis, factor }) => Some((*axis, *factor)),
        _ => None,
    };
    TubularParams {
        tubule_count: int(block, "tubule_count"),
        tubule_radius: schema::number(block, "tubule_radius"),
        ellipticity: schema::number(block, "ellipticity"),
        spacing: schema::number(block, "spacing"),
        cortical_thickness: schema::number(block, "cortical_thickness"),
        size_x: schema::number(block, "width"),
        size_y: schema::number(block, "depth"),
        height: schema::number(block, "height"),
        segments: int(block, "segments") as usize,
        gradient,
    }
}

pub fn slab_params(block: &Block) -> SlabParams {
    SlabParams {
        size_x: schema::number(block, "width"),
        size_y: schema::number(block, "depth"),
        height: schema::number(block, "height"),
        smooth_levels: smooth_levels(block, 0),
    }
}

pub fn primitive_params(block: &Block) -> PrimitiveParams {
    PrimitiveParams {
        shape: Shape::from_word(&schema::word(block, "shape")).unwrap_or(Shape::Cube),
        size: schema::number(block, "size"),
        columns: int(block, "columns"),
        rows: int(block, "rows"),
        spacing: schema::number(block, "spacing"),
        rotation_deg: schema::number(block, "rotation_deg"),
        smooth_levels: smooth_levels(block, 0),
    }
}

/// Runs the generator for one block with its own random stream.
pub fn compile_block(block: &Block, rng: &mut Rng, exec: Execution) -> Result<BlockGeometry, GeomError> {
    let g = match block.kind {
        BlockKind::Helical => build_helical(&helical_params(block), rng)?,
        BlockKind::Cellular => build_cellular_with(&cellular_params(block), rng, exec)?,
        BlockKind::Tubular => build_tubular(&tubular_params(block))?,
        BlockKind::Slab => build_slab(&slab_params(block))?,
        BlockKind::Primitive => build_primitive(&primitive_params(block))?,
    };
    if g.meshes.is_empty() {
        return Err(out_of_range("wall_gap", "every cell vanished; nothing left to build"));
    }
    Ok(g)
}

pub fn compile_program(program: &DesignProgram) -> Result<Scene, CompileError> {
    compile_program_with(program, Execution::default())
}

/// Compiles every block (in parallel when `exec` allows), then stacks the
/// blocks: the first keeps its placement, each later block is centered in
/// x/y and placed on top of the previous one.
pub fn compile_program_with(program: &DesignProgram, exec: Execution) -> Result<Scene, CompileError> {
    if program.blocks.is_empty() {
        return Err(CompileError {
            block: 0,
            kind: BlockKind::Primitive,
            error: out_of_range("blocks", "program has no blocks"),
        });
    }
    let built = par::map_range(exec, program.blocks.len(), |index| {
        let mut rng = Rng::derive(program.seed, index as u64);
        compile_block(&program.blocks[index], &mut rng, exec)
    });

    let mut scene = Scene::new(Vec::new());
    scene.provenance = Provenance {
        name: program.name.clone(),
        seed: program.seed,
    };
    let mut top = f64::NEG_INFINITY;
    for (index, result) in built.into_iter().enumerate() {
        let kind = program.blocks[index].kind;
        let mut g = result.map_err(|error| CompileError { block: index, kind, error })?;
        let bb = g.meshes.iter().fold(Aabb::EMPTY, |b, m| b.union(m.bbox()));
        if index > 0 {
            let c = bb.center();
            let shift = Vec3::new(-c.x, -c.y, top - bb.min.z);
            for m in &mut g.meshes {
                m.translate(shift);
            }
            top += bb.max.z - bb.min.z;
        } else {
            top = bb.max.z;
        }
        let first = scene.meshes.len();
        scene
            .nested
            .extend(g.nested.iter().map(|&(a, b)| (a + first, b + first)));
        scene.blocks.push(BlockInfo {
            kind,
            first_mesh: first,
            mesh_count: g.meshes.len(),
            assembly: g.assembly,
            measured: g.measured,
            series: g.series,
            warnings: g.warnings,
        });
        scene.meshes.extend(g.meshes);
    }
    Ok(scene)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::ast::Value;

    fn program(blocks: Vec<Block>) -> DesignProgram {
        DesignProgram::new("t", 7, blocks)
    }

    #[test]
    fn helical_block_gives_one_mesh_per_ply() {
        let p = program(vec![Block::new(BlockKind::Helical).with("plies", Value::Int(8))]);
        let s = compile_program(&p).unwrap();
        assert_eq!(s.meshes.len(), 8);
        assert!(s.meshes[0].label.as_deref().unwrap().starts_with("helical"));
    }

    #[test]
    fn compile_is_deterministic_and_exec_independent() {
        let p = program(vec![
            Block::new(BlockKind::Cellular).with("region_count", Value::Int(10)),
            Block::new(BlockKind::Helical).with_modifier(Modifier::Noise { degrees: 4.0 }),
        ]);
        let a = compile_program_with(&p, Execution::Serial).unwrap();
        let b = compile_program_with(&p, Execution::Parallel).unwrap();
        let c = compile_program(&p).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn blocks_stack_along_z() {
        let p = program(vec![
            Block::new(BlockKind::Slab),
            Block::new(BlockKind::Slab).with("height", Value::Float(2.0)),
        ]);
        let s = compile_program(&p).unwrap();
        assert_eq!(s.meshes[1].bbox().min.z, 1.0);
        assert_eq!(s.meshes[1].bbox().max.z, 3.0);
    }

    #[test]
    fn tubule_overlap_is_reported_with_block() {
        let p = program(vec![
            Block::new(BlockKind::Slab),
            Block::new(BlockKind::Tubular)
                .with("tubule_radius", Value::Float(1.0))
                .with("spacing", Value::Float(1.5)),
        ]);
        let e = compile_program(&p).unwrap_err();
        assert_eq!(e.block, 1);
        assert_eq!(e.code(), "TubuleOverlap");
    }
}
