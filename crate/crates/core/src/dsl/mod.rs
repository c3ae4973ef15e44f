//! The BGS design language: AST, schemas, lexer, parser, canonical
//! printer and the prompt-to-intent front end.
pub mod ast;
pub mod banks;
pub mod format;
pub mod intent;
pub mod lexer;
pub mod parser;
pub mod schema;

pub use format::format;
pub use parser::{parse, ErrorCode, Expected, ParseError};
pub use ast::{Block, BlockKind, DesignClass, DesignProgram, Modifier, Value};
pub use banks::WordBanks;
pub use intent::{parse_intent, program_from_intent, program_from_intent_with, IntentSpec, TargetClass};
