//! The twelve hand-written base designs (four per bioinspired class) and
//! the general-task programs used for the general dataset entries.

use serde::{Deserialize, Serialize};

use crate::dsl::ast::{DesignClass, DesignProgram};
use crate::dsl::parse;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseDesign {
    pub id: String,
    pub caption: String,
    pub class: DesignClass,
    pub program: DesignProgram,
    /// Source text as written.
    pub text: String,
}

macro_rules! base {
    ($id:literal, $caption:literal) => {
        ($id, $caption, include_str!(concat!("../../data/bases/", $id, ".bgs")))
    };
}

const BASES: [(&str, &str, &str); 12] = [
    base!("helical_bouligand", "helical twisted ply structure with cylindrical fibers rotated between plies"),
    base!("helical_rectangular", "helicoidal structure built from rectangular fibers"),
    base!("helical_noisy", "bouligand structure with random rotation noise between plies"),
    base!("helical_dense", "dactyl club inspired laminate with many plies and small fiber rotations"),
    base!("cellular_foam", "voronoi foam cellular structure with irregular open cells"),
    base!("cellular_sandwich", "cellular sandwich structure with dense face sheets"),
    base!("cellular_smooth", "smoothed bone inspired cellular lattice"),
    base!("cellular_regular", "regular cellular solid with eight equal cells"),
    base!("tubular_hoof", "hoof wall inspired tubules with elliptical tubules and a cortical layer"),
    base!("tubular_gradient", "tubular porous material with gradient porosity"),
    base!("tubular_dentin", "dentin inspired tubules densely packed in a matrix"),
    base!("tubular_slab", "tubular slab with four round tubules"),
];

const GENERAL: [(&str, &str, &str); 8] = [
    (
        "general_cube_grid",
        "3x3 grid of cubes",
        "design cube_grid {\n  seed 41\n  primitive {\n    shape cube\n    size 2\n    columns 3\n    rows 3\n    spacing 3\n  }\n}\n",
    ),
    (
        "general_cylinder_row",
        "row of cylinders",
        "design cylinder_row {\n  seed 42\n  primitive {\n    shape cylinder\n    size 1.5\n    columns 5\n    rows 1\n    spacing 2.5\n  }\n}\n",
    ),
    (
        "general_sphere",
        "plain sphere",
        "design sphere {\n  seed 43\n  primitive {\n    shape sphere\n    size 4\n  }\n}\n",
    ),
    (
        "general_slab",
        "flat slab",
        "design flat_slab {\n  seed 44\n  slab {\n    width 20\n    depth 10\n    height 1\n  }\n}\n",
    ),
    (
        "general_rotated_grid",
        "grid of cubes each rotated 15 degrees",
        "design rotated_grid {\n  seed 45\n  primitive {\n    shape cube\n    size 1\n    columns 4\n    rows 2\n    spacing 2\n    rotation_deg 15\n  }\n}\n",
    ),
    (
        "general_rounded_panel",
        "smoothed thin panel",
        "design rounded_panel {\n  seed 46\n  slab {\n    width 12\n    depth 8\n    height 0.8\n    smooth 1\n  }\n}\n",
    ),
    (
        "general_stack",
        "stack of blocks",
        "design block_stack {\n  seed 47\n  slab {\n    width 6\n    depth 6\n    height 2\n  }\n  slab {\n    width 4\n    depth 4\n    height 2\n  }\n}\n",
    ),
    (
        "general_shelf",
        "shelf board on a row of cylinders",
        "design shelf {\n  seed 48\n  primitive {\n    shape cylinder\n    size 1\n    columns 3\n    rows 1\n    spacing 4\n  }\n  slab {\n    width 12\n    depth 3\n    height 0.5\n  }\n}\n",
    ),
];

fn load(entries: &[(&str, &str, &str)], class: Option<DesignClass>) -> Vec<BaseDesign> {
    entries
        .iter()
        .map(|(id, caption, text)| {
            let program = parse(text).unwrap_or_else(|e| panic!("library design {id}: {e}"));
            BaseDesign {
                id: id.to_string(),
                caption: caption.to_string(),
                class: class
                    .or_else(|| program.class())
                    .unwrap_or(DesignClass::General),
                program,
                text: text.to_string(),
            }
        })
        .collect()
}

/// The base library: exactly twelve designs, four per bioinspired class.
pub fn base_library() -> Vec<BaseDesign> {
    load(&BASES, None)
}

/// Programs behind the general (non-bioinspired) dataset entries.
pub fn general_library() -> Vec<BaseDesign> {
    load(&GENERAL, Some(DesignClass::General))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_per_class() {
        let lib = base_library();
        assert_eq!(lib.len(), 12);
        for c in DesignClass::BIO {
            assert_eq!(lib.iter().filter(|b| b.class == c).count(), 4, "{c:?}");
        }
    }

    #[test]
    fn general_programs_are_general() {
        for g in general_library() {
            assert_eq!(g.program.class(), Some(DesignClass::General), "{}", g.id);
        }
    }
}
