//! Word banks for instruction generation and intent extraction.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::DesignClass;

const BUILTIN: &str = include_str!("../../data/banks.json");

/// Placeholders a template may use, in any of three casings: `{shape}`,
/// `{Shape}` (first letter capitalized) or `{SHAPE}` (upper case).
pub const SLOTS: [&str; 4] = ["verb", "medium", "tense", "shape"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveBank {
    pub verbs: Vec<String>,
    pub mediums: Vec<String>,
    /// Action words across tenses ("builds", "will build", ...).
    pub tenses: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordBanks {
    /// Class name to synonym phrases.
    pub motif_bank: BTreeMap<String, Vec<String>>,
    pub primitive_bank: PrimitiveBank,
    pub templates: Vec<String>,
    /// Motif flag name to trigger phrases.
    #[serde(default)]
    pub flags: BTreeMap<String, Vec<String>>,
    /// Parameter key to the nouns that name it in prose.
    #[serde(default)]
    pub param_nouns: BTreeMap<String, Vec<String>>,
    /// Single words that name a class on their own. Recognized in prompts
    /// but never sampled into instructions.
    #[serde(default)]
    pub class_words: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Error, PartialEq)]
pub enum BankError {
    #[error("invalid word bank JSON: {0}")]
    Json(String),
    #[error("class {0} has {1} phrases, at least 3 required")]
    TooFewPhrases(String, usize),
    #[error("unknown class {0} in motif bank")]
    UnknownClass(String),
    #[error("template {0:?} uses unknown placeholder {1:?}")]
    BadPlaceholder(String, String),
    #[error("template {0:?} has no shape placeholder")]
    NoShape(String),
    #[error("primitive bank list {0} is empty")]
    EmptyList(&'static str),
}

/// Placeholder names in a template, as written.
pub fn placeholders(template: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(i) = rest.find('{') {
        let Some(j) = rest[i..].find('}') else { break };
        out.push(&rest[i + 1..i + j]);
        rest = &rest[i + j + 1..];
    }
    out
}

fn slot_of(name: &str) -> Option<&'static str> {
    SLOTS.into_iter().find(|s| {
        let mut cap = s.to_string();
        cap[..1].make_ascii_uppercase();
        name == *s || name == cap || name == s.to_ascii_uppercase()
    })
}

/// Applies the casing implied by a placeholder spelling.
pub fn apply_case(name: &str, text: &str) -> String {
    if name.len() > 1 && name.chars().all(|c| c.is_ascii_uppercase()) {
        text.to_uppercase()
    } else if name.starts_with(|c: char| c.is_ascii_uppercase()) {
        let mut chars = text.chars();
        match chars.next() {
            Some(c) => c.to_uppercase().chain(chars).collect(),
            None => String::new(),
        }
    } else {
        text.to_string()
    }
}

/// Fills a template. `fill` receives the lowercase slot name.
pub fn fill_template(template: &str, mut fill: impl FnMut(&str) -> String) -> String {
    let mut out = String::new();
    let mut rest = template;
    while let Some(i) = rest.find('{') {
        let Some(j) = rest[i..].find('}') else { break };
        out.push_str(&rest[..i]);
        let name = &rest[i + 1..i + j];
        let slot = slot_of(name).unwrap_or("shape");
        out.push_str(&apply_case(name, &fill(slot)));
        rest = &rest[i + j + 1..];
    }
    out.push_str(rest);
    out
}

impl WordBanks {
    pub fn builtin() -> WordBanks {
        WordBanks::from_json(BUILTIN).expect("shipped word banks are valid")
    }

    pub fn from_json(text: &str) -> Result<WordBanks, BankError> {
        let banks: WordBanks = serde_json::from_str(text).map_err(|e| BankError::Json(e.to_string()))?;
        banks.validate()?;
        Ok(banks)
    }

    pub fn validate(&self) -> Result<(), BankError> {
        for (name, phrases) in &self.motif_bank {
            if DesignClass::from_name(name).is_none() {
                return Err(BankError::UnknownClass(name.clone()));
            }
            if phrases.len() < 3 {
                return Err(BankError::TooFewPhrases(name.clone(), phrases.len()));
            }
        }
        if let Some(name) = self.class_words.keys().find(|n| DesignClass::from_name(n).is_none()) {
            return Err(BankError::UnknownClass(name.clone()));
        }
        for class in DesignClass::ALL {
            if !self.motif_bank.contains_key(class.name()) {
                return Err(BankError::TooFewPhrases(class.name().into(), 0));
            }
        }
        let p = &self.primitive_bank;
        for (name, list) in [("verbs", &p.verbs), ("mediums", &p.mediums), ("tenses", &p.tenses)] {
            if list.is_empty() {
                return Err(BankError::EmptyList(name));
            }
        }
        for t in &self.templates {
            let names = placeholders(t);
            for n in &names {
                if slot_of(n).is_none() {
                    return Err(BankError::BadPlaceholder(t.clone(), n.to_string()));
                }
            }
            if !names.iter().any(|n| slot_of(n) == Some("shape")) {
                return Err(BankError::NoShape(t.clone()));
            }
        }
        Ok(())
    }

    pub fn phrases(&self, class: DesignClass) -> &[String] {
        self.motif_bank.get(class.name()).map_or(&[], Vec::as_slice)
    }

    pub fn class_words(&self, class: DesignClass) -> &[String] {
        self.class_words.get(class.name()).map_or(&[], Vec::as_slice)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_banks_validate() {
        let b = WordBanks::builtin();
        for c in DesignClass::ALL {
            assert!(b.phrases(c).len() >= 3);
        }
    }

    #[test]
    fn casing() {
        let t = "{Verb} {medium}: {SHAPE}";
        let s = fill_template(t, |slot| match slot {
            "verb" => "write".into(),
            "medium" => "a script".into(),
            _ => "cell foam".into(),
        });
        assert_eq!(s, "Write a script: CELL FOAM");
    }

    #[test]
    fn rejects_bad_templates() {
        let mut b = WordBanks::builtin();
        b.templates.push("{verb} a {thing}".into());
        assert!(matches!(b.validate(), Err(BankError::BadPlaceholder(..))));
        let mut b = WordBanks::builtin();
        b.templates.push("{verb} it".into());
        assert!(matches!(b.validate(), Err(BankError::NoShape(_))));
        let mut b = WordBanks::builtin();
        b.motif_bank.insert("helical".into(), vec!["a".into()]);
        assert!(matches!(b.validate(), Err(BankError::TooFewPhrases(..))));
    }
}
