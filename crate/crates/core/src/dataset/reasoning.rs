//! Step-by-step annotations: one prose step per block and modifier, each
//! followed by the matching script fragment, then the complete program in
//! a fenced block.

use std::fmt::Write;

use crate::adapter::extract_script;
use crate::dsl::ast::{format_number, Block, BlockKind, DesignProgram, Modifier};
use crate::dsl::format;
use crate::dsl::format::format_name;
use crate::dsl::schema::{number, word};

fn n(block: &Block, key: &str) -> String {
    format_number(number(block, key))
}

fn block_step(block: &Block) -> String {
    match block.kind {
        BlockKind::Helical => format!(
            "Stack {} plies, each {} thick and holding {} {} fibers across a {} wide footprint, and rotate every ply by {} degrees about the stacking axis.",
            n(block, "plies"),
            n(block, "ply_thickness"),
            n(block, "fibers_per_ply"),
            word(block, "fiber_profile"),
            n(block, "footprint"),
            n(block, "rotation_deg"),
        ),
        BlockKind::Cellular => format!(
            "Fill a {} by {} by {} box with {} Voronoi cells, seed randomness {}, and shrink each cell to leave a wall gap of {}.",
            n(block, "width"),
            n(block, "depth"),
            n(block, "height"),
            n(block, "region_count"),
            n(block, "randomness"),
            n(block, "wall_gap"),
        ),
        BlockKind::Tubular => format!(
            "Cut {} tubules of radius {} and ellipticity {} on a {} pitch through a {} by {} by {} matrix, keeping a cortical layer of {}.",
            n(block, "tubule_count"),
            n(block, "tubule_radius"),
            n(block, "ellipticity"),
            n(block, "spacing"),
            n(block, "width"),
            n(block, "depth"),
            n(block, "height"),
            n(block, "cortical_thickness"),
        ),
        BlockKind::Slab => format!(
            "Lay down a slab {} wide, {} deep and {} tall.",
            n(block, "width"),
            n(block, "depth"),
            n(block, "height"),
        ),
        BlockKind::Primitive => format!(
            "Place a {} by {} grid of {} primitives of size {}, {} apart and turned {} degrees.",
            n(block, "columns"),
            n(block, "rows"),
            word(block, "shape"),
            n(block, "size"),
            n(block, "spacing"),
            n(block, "rotation_deg"),
        ),
    }
}

fn modifier_step(m: &Modifier) -> String {
    match m {
        Modifier::Gradient { axis, factor } => format!(
            "Grade the tubule size along {} so the far end is {} times the near end.",
            axis.keyword(),
            format_number(*factor)
        ),
        Modifier::Sandwich { thickness } => format!(
            "Enclose the porous core between dense face sheets {} thick.",
            format_number(*thickness)
        ),
        Modifier::Smooth { levels } => format!("Round the geometry with {levels} level(s) of subdivision."),
        Modifier::Noise { degrees } => format!(
            "Perturb each ply rotation by up to {} degrees of random noise.",
            format_number(*degrees)
        ),
    }
}

fn fragment(out: &mut String, lines: &[String]) {
    for l in lines {
        let _ = writeln!(out, "    {l}");
    }
    out.push('\n');
}

/// Annotated program text. The complete program comes last, fenced.
pub fn embed_reasoning(program: &DesignProgram) -> String {
    let mut out = String::new();
    let mut step = 1;
    let _ = writeln!(
        out,
        "Step {step}. Open a design named {} and fix the seed to {} so every random choice repeats.\n",
        program.name, program.seed
    );
    fragment(
        &mut out,
        &[format!("design {} {{", format_name(&program.name)), format!("  seed {}", program.seed)],
    );
    for block in &program.blocks {
        step += 1;
        let _ = writeln!(out, "Step {step}. {}\n", block_step(block));
        let mut lines = vec![format!("  {} {{", block.kind.keyword())];
        lines.extend(block.params.iter().map(|(k, v)| format!("    {k} {v}")));
        fragment(&mut out, &lines);
        for m in &block.modifiers {
            step += 1;
            let _ = writeln!(out, "Step {step}. {}\n", modifier_step(m));
            fragment(&mut out, &[format!("    {m}")]);
        }
        fragment(&mut out, &["  }".to_string()]);
    }
    let _ = writeln!(out, "Step {}. Close the design. The complete program:\n", step + 1);
    out.push_str("```bgs\n");
    out.push_str(&format(program));
    out.push_str("```\n");
    out
}

/// Recovers the program text from an annotated response.
pub fn strip_reasoning(annotated: &str) -> String {
    extract_script(annotated)
}
