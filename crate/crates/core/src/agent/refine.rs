//! Refinement: applies a critique to a compilable program.

use super::critique::{modifier_value, CritiqueReport, Issue};
use crate::dsl::ast::{Axis, Block, DesignProgram, Modifier, Value};
use crate::dsl::intent::{clamp_modifier, make_feasible, set_modifier, set_number};
use crate::dsl::schema::{self, ParamType};

/// Sets a numeric parameter or modifier, clamped to its range.
fn set_value(block: &mut Block, key: &str, v: f64) {
    match key {
        "sandwich" => set_modifier(
            block,
            Modifier::Sandwich {
                thickness: clamp_modifier(key, v, 0.5),
            },
        ),
        "smooth" => set_modifier(
            block,
            Modifier::Smooth {
                levels: clamp_modifier(key, v.round(), 1.0) as u32,
            },
        ),
        "noise" => set_modifier(
            block,
            Modifier::Noise {
                degrees: clamp_modifier(key, v, 5.0),
            },
        ),
        "gradient" => {
            let axis = match block.modifier("gradient") {
                Some(Modifier::Gradient { axis, .. }) => *axis,
                _ => Axis::Z,
            };
            set_modifier(
                block,
                Modifier::Gradient {
                    axis,
                    factor: clamp_modifier(key, v, 1.5),
                },
            )
        }
        _ => set_number(block, key, v),
    }
}

fn current(block: &Block, key: &str) -> f64 {
    if schema::MODIFIERS.contains(&key) {
        modifier_value(block, key)
    } else {
        schema::number(block, key)
    }
}

/// Applies issues and suggestions in critique order. Parameter mismatches
/// set the wanted value, class mismatches swap in a default block of the
/// wanted kind, suggestions scale the current value. Blocks that should
/// not exist are dropped last.
pub fn refine(program: &DesignProgram, critique: &CritiqueReport) -> DesignProgram {
    let mut out = program.clone();
    let mut touched = vec![false; out.blocks.len()];
    let mut drop: Vec<usize> = Vec::new();
    for issue in &critique.issues {
        match issue {
            Issue::ParamMismatch { block, name, want, .. } => {
                let Some(b) = out.blocks.get_mut(*block) else { continue };
                match want {
                    Value::Word(w) => {
                        if let Some(spec) = schema::lookup(b.kind, name) {
                            if matches!(spec.ty, ParamType::Word(opts) if opts.contains(&w.as_str())) {
                                b.params.insert(spec.key.to_string(), want.clone());
                            }
                        }
                    }
                    v => {
                        if let Some(x) = v.as_f64() {
                            set_value(b, name, x);
                        }
                    }
                }
                touched[*block] = true;
            }
            Issue::ClassMismatch { block, want, got } => match (want, got) {
                (Some(k), Some(_)) if *block < out.blocks.len() => {
                    out.blocks[*block] = Block::new(*k);
                    touched[*block] = true;
                }
                (Some(k), None) => {
                    out.blocks.push(Block::new(*k));
                    touched.push(true);
                }
                (None, Some(_)) => drop.push(*block),
                _ => {}
            },
            _ => {}
        }
    }
    for s in &critique.suggestions {
        let Some(b) = out.blocks.get_mut(s.block) else { continue };
        if !schema::modifiers_for(b.kind).contains(&s.param.as_str()) && schema::lookup(b.kind, &s.param).is_none() {
            continue;
        }
        let v = current(b, &s.param) * s.factor;
        set_value(b, &s.param, v);
        touched[s.block] = true;
    }
    for (b, t) in out.blocks.iter_mut().zip(&touched) {
        if *t {
            make_feasible(b);
        }
    }
    drop.sort_unstable();
    drop.dedup();
    for i in drop.into_iter().rev() {
        if i < out.blocks.len() && out.blocks.len() > 1 {
            out.blocks.remove(i);
        }
    }
    out
}
