use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Block kinds of the design language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    Helical,
    Cellular,
    Tubular,
    Slab,
    Primitive,
}

impl BlockKind {
    pub const ALL: [BlockKind; 5] = [
        BlockKind::Helical,
        BlockKind::Cellular,
        BlockKind::Tubular,
        BlockKind::Slab,
        BlockKind::Primitive,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            BlockKind::Helical => "helical",
            BlockKind::Cellular => "cellular",
            BlockKind::Tubular => "tubular",
            BlockKind::Slab => "slab",
            BlockKind::Primitive => "primitive",
        }
    }

    pub fn from_keyword(s: &str) -> Option<BlockKind> {
        BlockKind::ALL.into_iter().find(|k| k.keyword() == s)
    }

    pub fn class(self) -> DesignClass {
        match self {
            BlockKind::Helical => DesignClass::Helical,
            BlockKind::Cellular => DesignClass::Cellular,
            BlockKind::Tubular => DesignClass::Tubular,
            BlockKind::Slab | BlockKind::Primitive => DesignClass::General,
        }
    }
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Structural class of a design: the three bioinspired families plus
/// general geometric tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignClass {
    Helical,
    Cellular,
    Tubular,
    General,
}

impl DesignClass {
    pub const ALL: [DesignClass; 4] = [
        DesignClass::Helical,
        DesignClass::Cellular,
        DesignClass::Tubular,
        DesignClass::General,
    ];
    pub const BIO: [DesignClass; 3] = [
        DesignClass::Helical,
        DesignClass::Cellular,
        DesignClass::Tubular,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DesignClass::Helical => "helical",
            DesignClass::Cellular => "cellular",
            DesignClass::Tubular => "tubular",
            DesignClass::General => "general",
        }
    }

    pub fn from_name(s: &str) -> Option<DesignClass> {
        DesignClass::ALL.into_iter().find(|c| c.name() == s)
    }

    /// Block kind emitted when a program is built for this class.
    pub fn default_kind(self) -> BlockKind {
        match self {
            DesignClass::Helical => BlockKind::Helical,
            DesignClass::Cellular => BlockKind::Cellular,
            DesignClass::Tubular => BlockKind::Tubular,
            DesignClass::General => BlockKind::Primitive,
        }
    }
}

impl fmt::Display for DesignClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn keyword(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Axis> {
        match s {
            "x" => Some(Axis::X),
            "y" => Some(Axis::Y),
            "z" => Some(Axis::Z),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// A parameter value. Integer-typed parameters always hold `Int`, float
/// parameters `Float`, enumerated parameters `Word`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Float(f64),
    Word(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Float(f) => Some(*f),
            Value::Word(_) => None,
        }
    }

    pub fn as_word(&self) -> Option<&str> {
        match self {
            Value::Word(w) => Some(w),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{}", format_number(*x)),
            Value::Word(w) => f.write_str(w),
        }
    }
}

/// Shortest text that parses back to exactly `x`.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        // Normalize -0.
        return "0".into();
    }
    format!("{x}")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Modifier {
    Gradient { axis: Axis, factor: f64 },
    Sandwich { thickness: f64 },
    Smooth { levels: u32 },
    Noise { degrees: f64 },
}

impl Modifier {
    pub fn keyword(&self) -> &'static str {
        match self {
            Modifier::Gradient { .. } => "gradient",
            Modifier::Sandwich { .. } => "sandwich",
            Modifier::Smooth { .. } => "smooth",
            Modifier::Noise { .. } => "noise",
        }
    }
}

impl fmt::Display for Modifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modifier::Gradient { axis, factor } => {
                write!(f, "gradient {} {}", axis.keyword(), format_number(*factor))
            }
            Modifier::Sandwich { thickness } => write!(f, "sandwich {}", format_number(*thickness)),
            Modifier::Smooth { levels } => write!(f, "smooth {levels}"),
            Modifier::Noise { degrees } => write!(f, "noise {}", format_number(*degrees)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub kind: BlockKind,
    pub params: BTreeMap<String, Value>,
    pub modifiers: Vec<Modifier>,
}

impl Block {
    pub fn new(kind: BlockKind) -> Self {
        Self {
            kind,
            params: BTreeMap::new(),
            modifiers: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: Value) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_modifier(mut self, m: Modifier) -> Self {
        self.modifiers.push(m);
        self
    }

    /// Last modifier of the same kind as `probe`, if any.
    pub fn modifier(&self, keyword: &str) -> Option<&Modifier> {
        self.modifiers.iter().rev().find(|m| m.keyword() == keyword)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignProgram {
    pub name: String,
    pub seed: u64,
    pub blocks: Vec<Block>,
}

impl DesignProgram {
    pub fn new(name: impl Into<String>, seed: u64, blocks: Vec<Block>) -> Self {
        Self {
            name: name.into(),
            seed,
            blocks,
        }
    }

    /// Class of the program: the single class of its blocks, or `None`
    /// when the blocks span several classes.
    pub fn class(&self) -> Option<DesignClass> {
        let first = self.blocks.first()?.kind.class();
        self.blocks
            .iter()
            .all(|b| b.kind.class() == first)
            .then_some(first)
    }
}
