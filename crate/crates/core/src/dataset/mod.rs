//! Dataset factory: diversified variants of the base designs, reasoning
//! annotations and template instructions, gated by validation.

pub mod diversify;
pub mod instruction;
pub mod library;
pub mod pipeline;
pub mod reasoning;

pub use diversify::{diversify, JitterConfig, Variant};
pub use instruction::{generate_instruction, instruction_for, Instruction};
pub use library::{base_library, general_library, BaseDesign};
pub use pipeline::{build_dataset, build_dataset_with, Composition, Dataset, DatasetRecord, DatasetStats, PipelineConfig, RecordKind};
pub use reasoning::{embed_reasoning, strip_reasoning};
