//! Canonical printer. Two-space indentation, one statement per line,
//! parameters in key order, modifiers in declared order.

use std::fmt::Write;

use super::ast::DesignProgram;
use super::parser::is_reserved;

fn is_plain_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// The design name as it must appear in source.
pub fn format_name(name: &str) -> String {
    if is_plain_ident(name) && !is_reserved(name) {
        name.to_string()
    } else {
        format!("\"{name}\"")
    }
}

pub fn format(program: &DesignProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "design {} {{", format_name(&program.name));
    let _ = writeln!(out, "  seed {}", program.seed);
    for block in &program.blocks {
        let _ = writeln!(out, "  {} {{", block.kind.keyword());
        for (key, value) in &block.params {
            let _ = writeln!(out, "    {key} {value}");
        }
        for m in &block.modifiers {
            let _ = writeln!(out, "    {m}");
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}
