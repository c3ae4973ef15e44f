//! Program generation: the builtin intent-driven generator and the remote
//! path through the wire adapter.

use super::retrieval::{Hit, RetrievalStore};
use super::GeneratorKind;
use crate::adapter::{call_remote_generator, extract_script, AdapterConfig};
use crate::dsl::intent::IntentSpec;
use crate::dsl::{format, parse, program_from_intent_with, DesignProgram};
use crate::rng::hash_str;

/// Seeds are kept to 16 bits so generated programs stay readable.
pub fn prompt_seed(prompt: &str) -> u64 {
    hash_str(prompt) & 0xffff
}

/// Builtin generator: unspecified parameters come from the retrieved bases
/// (in rank order), everything else from the intent.
pub fn generate_builtin(seed: u64, intent: &IntentSpec, context: &[Hit], store: &RetrievalStore) -> String {
    let bases: Vec<DesignProgram> = context
        .iter()
        .filter(|h| h.score > 0.0)
        .filter_map(|h| parse(&store.entries[h.index].program).ok())
        .collect();
    let refs: Vec<&DesignProgram> = bases.iter().collect();
    format(&program_from_intent_with(intent, seed, &refs))
}

/// Generated program text plus any warning raised on the way.
pub struct Generated {
    pub text: String,
    pub warning: Option<String>,
}

pub fn generate(
    prompt: &str,
    seed: u64,
    intent: &IntentSpec,
    context: &[Hit],
    store: &RetrievalStore,
    kind: GeneratorKind,
    adapter: &AdapterConfig,
) -> Generated {
    if kind == GeneratorKind::Remote {
        let ctx: Vec<String> = context
            .iter()
            .map(|h| {
                let e = &store.entries[h.index];
                format!("{}\n{}", e.caption, e.program)
            })
            .collect();
        match call_remote_generator(prompt, &ctx, adapter) {
            Ok(raw) => {
                return Generated {
                    text: extract_script(&raw),
                    warning: None,
                }
            }
            Err(e) => {
                let msg = format!("remote generator failed, using builtin: {e}");
                log::warn!("{msg}");
                return Generated {
                    text: generate_builtin(seed, intent, context, store),
                    warning: Some(msg),
                };
            }
        }
    }
    Generated {
        text: generate_builtin(seed, intent, context, store),
        warning: None,
    }
}
