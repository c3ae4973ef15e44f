//! Recursive-descent parser for BGS.
//!
//! Errors carry a stable code, a 1-based position and a structured
//! [`Expected`] hint with the byte span to edit, which is what the repair
//! agent keys on. When something is missing (a value, a brace, a block
//! header) the position names the statement that lost it rather than the
//! token that happened to follow.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::{Axis, Block, BlockKind, DesignProgram, Modifier, Value};
use super::lexer::{position, tokenize, Token, TokenKind};
use super::schema::{self, modifier_range, ParamSpec, ParamType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorCode {
    UnknownKeyword,
    UnexpectedToken,
    UnbalancedBrace,
    ValueOutOfRange,
    Empty,
}

impl ErrorCode {
    pub fn name(self) -> &'static str {
        match self {
            ErrorCode::UnknownKeyword => "UnknownKeyword",
            ErrorCode::UnexpectedToken => "UnexpectedToken",
            ErrorCode::UnbalancedBrace => "UnbalancedBrace",
            ErrorCode::ValueOutOfRange => "ValueOutOfRange",
            ErrorCode::Empty => "Empty",
        }
    }
}

/// What would have made the source valid at the error site. Insertions
/// happen at `ParseError::offset`; replacements and deletions act on
/// `offset..offset + len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "expect", rename_all = "snake_case")]
pub enum Expected {
    /// The span should not be there.
    Nothing,
    /// One of these keywords in place of the span.
    Keyword { candidates: Vec<String> },
    /// A value for `key`; `default` is a valid choice.
    Value { key: String, default: String },
    /// A number in range in place of the span.
    Range {
        min: f64,
        max: f64,
        min_exclusive: bool,
        integer: bool,
        default: f64,
    },
    /// One of these words in place of the span.
    Word { options: Vec<String>, default: String },
    Name,
    Open,
    Close,
    /// The `design <name>` header, followed by `{` when `open` is set.
    Header { open: bool },
    /// At least one block.
    Block,
    /// A block header of this kind.
    Kind { kind: BlockKind },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseError {
    pub message: String,
    pub line: usize,
    pub column: usize,
    pub error_code: ErrorCode,
    pub offset: usize,
    pub len: usize,
    pub expected: Expected,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {}",
            self.line,
            self.column,
            self.error_code.name(),
            self.message
        )
    }
}

impl std::error::Error for ParseError {}

/// Words that cannot be used as a bare design name.
pub fn is_reserved(word: &str) -> bool {
    word == "design" || word == "seed" || BlockKind::from_keyword(word).is_some()
}

pub fn parse(source: &str) -> Result<DesignProgram, ParseError> {
    let tokens = match tokenize(source) {
        Ok(t) => t,
        Err(e) => {
            return Err(ParseError {
                message: e.message,
                line: e.line,
                column: e.column,
                error_code: ErrorCode::UnexpectedToken,
                offset: e.offset,
                len: e.len,
                expected: Expected::Nothing,
            })
        }
    };
    if tokens.is_empty() {
        return Err(ParseError {
            message: "empty program".into(),
            line: 1,
            column: 1,
            error_code: ErrorCode::Empty,
            offset: 0,
            len: 0,
            expected: Expected::Header { open: true },
        });
    }
    Parser {
        src: source,
        tokens,
        pos: 0,
        closes: Vec::new(),
    }
    .program()
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    /// Closing braces seen so far with the column and line of their opener.
    closes: Vec<(Token, usize, usize)>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn error(
        &self,
        at: (usize, usize),
        code: ErrorCode,
        message: impl Into<String>,
        span: (usize, usize),
        expected: Expected,
    ) -> ParseError {
        ParseError {
            message: message.into(),
            line: at.0,
            column: at.1,
            error_code: code,
            offset: span.0,
            len: span.1,
            expected,
        }
    }

    fn at(t: &Token) -> (usize, usize) {
        (t.line, t.column)
    }

    fn line_is_blank(&self, line: usize) -> bool {
        match self.src.split('\n').nth(line - 1) {
            Some(text) => {
                let t = text.trim_start();
                t.is_empty() || t.starts_with('#')
            }
            None => false,
        }
    }

    /// Blank, comment-only, or ending in a comment that swallowed a brace.
    fn line_may_hide_brace(&self, line: usize) -> bool {
        if self.line_is_blank(line) {
            return true;
        }
        let text = self.src.split('\n').nth(line - 1).unwrap_or("");
        let mut in_str = false;
        for (i, c) in text.char_indices() {
            match c {
                '"' => in_str = !in_str,
                '#' if !in_str => return text[i..].contains(['{', '}']),
                _ => {}
            }
        }
        false
    }

    /// Position to blame for something missing just before `t`: the
    /// preceding line when it may have hidden the missing brace.
    fn blame_before(&self, t: &Token, floor: usize) -> (usize, usize) {
        if t.line > floor + 1 && self.line_may_hide_brace(t.line - 1) {
            (t.line - 1, 1)
        } else {
            Self::at(t)
        }
    }

    fn eof_position(&self) -> (usize, usize) {
        let last = self.src.char_indices().last().map_or(0, |(i, _)| i);
        position(self.src, last)
    }

    /// Unclosed scope at end of input. A closing brace indented unlike its
    /// opener most likely closed the wrong scope; the missing brace belongs
    /// right before it.
    /// First closing brace on a later line than its opener but indented
    /// differently from it.
    fn misaligned_close(&self) -> Option<&(Token, usize, usize)> {
        self.closes
            .iter()
            .find(|(t, col, line)| t.line > *line && t.column != *col)
    }

    fn unclosed(&self, what: &str) -> ParseError {
        match self.misaligned_close() {
            Some((t, _, line)) => self.error(
                self.blame_before(t, *line),
                ErrorCode::UnbalancedBrace,
                format!("unclosed {what}: a '}}' appears to be missing"),
                (t.offset, 0),
                Expected::Close,
            ),
            None => self.error(
                self.eof_position(),
                ErrorCode::UnbalancedBrace,
                format!("unclosed {what} at end of input"),
                (self.src.len(), 0),
                Expected::Close,
            ),
        }
    }

    fn stray(&self, t: &Token, code: ErrorCode, message: String) -> ParseError {
        self.error(Self::at(t), code, message, (t.offset, t.len), Expected::Nothing)
    }

    fn program(mut self) -> PResult<DesignProgram> {
        let head = self.bump().expect("nonempty");
        match &head.kind {
            TokenKind::Ident(s) if s == "design" => {}
            TokenKind::Ident(s) if schema::edit_distance(s, "design") > 2 => {
                return Err(self.error(
                    self.blame_before(&head, 0),
                    ErrorCode::UnexpectedToken,
                    format!("expected 'design <name> {{' before '{s}'"),
                    (head.offset, 0),
                    Expected::Header { open: true },
                ))
            }
            TokenKind::Ident(s) => {
                return Err(self.error(
                    Self::at(&head),
                    ErrorCode::UnknownKeyword,
                    format!("unknown keyword '{s}', expected 'design'"),
                    (head.offset, head.len),
                    Expected::Keyword {
                        candidates: vec!["design".into()],
                    },
                ))
            }
            TokenKind::LBrace => {
                return Err(self.error(
                    Self::at(&head),
                    ErrorCode::UnexpectedToken,
                    "expected 'design <name>' before '{'",
                    (head.offset, 0),
                    Expected::Header { open: false },
                ))
            }
            _ => {
                return Err(self.stray(&head, ErrorCode::UnexpectedToken, format!("unexpected '{}'", head.text())))
            }
        }

        let name = match self.peek().map(|t| &t.kind) {
            Some(TokenKind::Ident(s)) if !is_reserved(s) => s.clone(),
            Some(TokenKind::Str(s)) => s.clone(),
            _ => {
                return Err(self.error(
                    Self::at(&head),
                    ErrorCode::UnexpectedToken,
                    "expected a design name after 'design'",
                    (head.end(), 0),
                    Expected::Name,
                ))
            }
        };
        let name_tok = self.bump().expect("peeked");

        match self.peek().map(|t| &t.kind) {
            Some(TokenKind::LBrace) => {
                self.bump();
            }
            _ => {
                return Err(self.error(
                    Self::at(&name_tok),
                    ErrorCode::UnbalancedBrace,
                    "expected '{' after the design name",
                    (name_tok.end(), 0),
                    Expected::Open,
                ))
            }
        }

        let mut seed = 0u64;
        if matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Ident(s)) if s == "seed") {
            let key = self.bump().expect("peeked");
            seed = self.seed_value(&key)?;
        }

        let mut blocks = Vec::new();
        loop {
            let Some(t) = self.peek().cloned() else {
                return Err(self.unclosed("design"));
            };
            match &t.kind {
                TokenKind::RBrace => {
                    if blocks.is_empty() {
                        return Err(self.error(
                            self.blame_before(&t, head.line),
                            ErrorCode::UnexpectedToken,
                            "a design needs at least one block",
                            (t.offset, 0),
                            Expected::Block,
                        ));
                    }
                    self.bump();
                    self.closes.push((t, head.column, head.line));
                    break;
                }
                TokenKind::Ident(s) => {
                    if let Some(kind) = BlockKind::from_keyword(s) {
                        self.bump();
                        blocks.push(self.block(kind, &t)?);
                    } else if s == "seed" {
                        let end = self.statement_end(&t);
                        return Err(self.error(
                            Self::at(&t),
                            ErrorCode::UnexpectedToken,
                            "'seed' must come before the first block",
                            (t.offset, end - t.offset),
                            Expected::Nothing,
                        ));
                    } else if let Some(kind) = owning_kind(s) {
                        let blank_before = t.line > head.line + 1 && self.line_may_hide_brace(t.line - 1);
                        if let (false, Some((close, _, _))) = (blank_before, self.closes.last()) {
                            // Most likely the previous block was closed too early.
                            return Err(self.error(
                                Self::at(close),
                                ErrorCode::UnbalancedBrace,
                                format!("'{s}' follows a closed block; this '}}' closes too early"),
                                (close.offset, close.len),
                                Expected::Nothing,
                            ));
                        }
                        return Err(self.error(
                            self.blame_before(&t, head.line),
                            ErrorCode::UnexpectedToken,
                            format!("'{s}' must appear inside a block"),
                            (t.offset, 0),
                            Expected::Kind { kind },
                        ));
                    } else {
                        let mut candidates: Vec<String> =
                            BlockKind::ALL.iter().map(|k| k.keyword().to_string()).collect();
                        if blocks.is_empty() {
                            candidates.push("seed".into());
                        }
                        return Err(self.error(
                            Self::at(&t),
                            ErrorCode::UnknownKeyword,
                            format!("unknown keyword '{s}'"),
                            (t.offset, t.len),
                            Expected::Keyword { candidates },
                        ));
                    }
                }
                _ => {
                    return Err(self.stray(&t, ErrorCode::UnexpectedToken, format!("unexpected '{}'", t.text())))
                }
            }
        }

        if let Some(t) = self.peek().cloned() {
            if let Some((close, _, line)) = self.misaligned_close() {
                return Err(self.error(
                    self.blame_before(close, *line),
                    ErrorCode::UnbalancedBrace,
                    "input continues after the design; this '}' looks misplaced",
                    (close.offset, close.len),
                    Expected::Nothing,
                ));
            }
            let code = if t.kind == TokenKind::RBrace {
                ErrorCode::UnbalancedBrace
            } else {
                ErrorCode::UnexpectedToken
            };
            return Err(self.stray(&t, code, format!("unexpected '{}' after the design", t.text())));
        }
        Ok(DesignProgram { name, seed, blocks })
    }

    /// End offset of a keyword statement: the keyword plus a following
    /// value on the same line.
    fn statement_end(&self, key: &Token) -> usize {
        let mut end = key.end();
        let mut i = self.pos + 1;
        while let Some(t) = self.tokens.get(i) {
            if t.line != key.line || matches!(t.kind, TokenKind::LBrace | TokenKind::RBrace) {
                break;
            }
            if matches!(t.kind, TokenKind::Ident(ref s) if is_keyword_anywhere(s)) {
                break;
            }
            end = t.end();
            i += 1;
        }
        end
    }

    fn missing_value(&self, key: &Token, name: &str, default: String) -> ParseError {
        self.error(
            Self::at(key),
            ErrorCode::UnexpectedToken,
            format!("expected a value after '{name}'"),
            (key.end(), 0),
            Expected::Value {
                key: name.to_string(),
                default,
            },
        )
    }

    /// The next token if it sits on `key`'s line or is a number.
    fn value_token(&self, key: &Token) -> Option<Token> {
        let t = self.peek()?;
        match t.kind {
            TokenKind::Number(_) => Some(t.clone()),
            TokenKind::Ident(_) if t.line == key.line => Some(t.clone()),
            _ => None,
        }
    }

    fn seed_value(&mut self, key: &Token) -> PResult<u64> {
        let Some(t) = self.peek().cloned() else {
            return Err(self.missing_value(key, "seed", "0".into()));
        };
        let TokenKind::Number(text) = &t.kind else {
            return Err(self.missing_value(key, "seed", "0".into()));
        };
        self.bump();
        text.parse::<u64>().map_err(|_| {
            self.error(
                Self::at(&t),
                ErrorCode::ValueOutOfRange,
                format!("seed must be an unsigned integer, got {text}"),
                (t.offset, t.len),
                Expected::Range {
                    min: 0.0,
                    max: u64::MAX as f64,
                    min_exclusive: false,
                    integer: true,
                    default: 0.0,
                },
            )
        })
    }

    fn block(&mut self, kind: BlockKind, head: &Token) -> PResult<Block> {
        match self.peek().map(|t| &t.kind) {
            Some(TokenKind::LBrace) => {
                self.bump();
            }
            _ => {
                return Err(self.error(
                    Self::at(head),
                    ErrorCode::UnbalancedBrace,
                    format!("expected '{{' after '{kind}'"),
                    (head.end(), 0),
                    Expected::Open,
                ))
            }
        }
        let mut block = Block::new(kind);
        loop {
            let Some(t) = self.peek().cloned() else {
                return Err(self.unclosed(kind.keyword()));
            };
            match &t.kind {
                TokenKind::RBrace => {
                    self.bump();
                    self.closes.push((t, head.column, head.line));
                    return Ok(block);
                }
                TokenKind::Ident(s) => {
                    if schema::modifiers_for(kind).contains(&s.as_str()) {
                        self.bump();
                        let m = self.modifier(&t)?;
                        if block.modifiers.iter().any(|x| x.keyword() == m.keyword()) {
                            return Err(self.duplicate(&t, s));
                        }
                        block.modifiers.push(m);
                    } else if let Some(spec) = schema::lookup(kind, s) {
                        if block.params.contains_key(spec.key) {
                            return Err(self.duplicate(&t, spec.key));
                        }
                        self.bump();
                        let v = self.param_value(&t, spec)?;
                        block.params.insert(spec.key.to_string(), v);
                    } else if BlockKind::from_keyword(s).is_some() {
                        return Err(self.error(
                            self.blame_before(&t, head.line),
                            ErrorCode::UnbalancedBrace,
                            format!("'{s}' block starts before '{kind}' is closed"),
                            (t.offset, 0),
                            Expected::Close,
                        ));
                    } else {
                        return Err(self.error(
                            Self::at(&t),
                            ErrorCode::UnknownKeyword,
                            format!("unknown keyword '{s}' in {kind} block"),
                            (t.offset, t.len),
                            Expected::Keyword {
                                candidates: schema::block_keywords(kind)
                                    .into_iter()
                                    .map(String::from)
                                    .collect(),
                            },
                        ));
                    }
                }
                _ => {
                    return Err(self.stray(
                        &t,
                        ErrorCode::UnexpectedToken,
                        format!("unexpected '{}' in {kind} block", t.text()),
                    ))
                }
            }
        }
    }

    fn duplicate(&self, t: &Token, name: &str) -> ParseError {
        let end = self.statement_end(t);
        self.error(
            Self::at(t),
            ErrorCode::UnexpectedToken,
            format!("duplicate '{name}'"),
            (t.offset, end - t.offset),
            Expected::Nothing,
        )
    }

    fn out_of_range(&self, t: &Token, name: &str, text: &str, spec: RangeSpec) -> ParseError {
        let open = if spec.min_exclusive { '(' } else { '[' };
        let kind = if spec.integer { "an integer" } else { "a number" };
        self.error(
            Self::at(t),
            ErrorCode::ValueOutOfRange,
            format!("{name} must be {kind} in {open}{}, {}], got {text}", spec.min, spec.max),
            (t.offset, t.len),
            Expected::Range {
                min: spec.min,
                max: spec.max,
                min_exclusive: spec.min_exclusive,
                integer: spec.integer,
                default: spec.default,
            },
        )
    }

    /// Parses a numeric token against a range.
    fn number(&mut self, key: &Token, name: &str, spec: RangeSpec) -> PResult<f64> {
        let t = match self.value_token(key) {
            Some(t) if matches!(t.kind, TokenKind::Number(_)) => t,
            _ => return Err(self.missing_value(key, name, format_default(spec))),
        };
        self.bump();
        let TokenKind::Number(text) = &t.kind else {
            unreachable!()
        };
        let v: f64 = text.parse().unwrap_or(f64::NAN);
        let integral = !text.contains('.');
        let in_range = v.is_finite()
            && (if spec.min_exclusive { v > spec.min } else { v >= spec.min })
            && v <= spec.max;
        if !in_range || (spec.integer && !integral) {
            return Err(self.out_of_range(&t, name, text, spec));
        }
        Ok(v)
    }

    fn param_value(&mut self, key: &Token, spec: &ParamSpec) -> PResult<Value> {
        match spec.ty {
            ParamType::Word(options) => {
                let default = spec.default.value().to_string();
                match self.value_token(key) {
                    Some(Token {
                        kind: TokenKind::Ident(w),
                        ..
                    }) if options.contains(&w.as_str()) => {
                        self.bump();
                        Ok(Value::Word(w))
                    }
                    Some(t @ Token {
                        kind: TokenKind::Ident(_),
                        ..
                    }) if !is_keyword_anywhere(&t.text()) => Err(self.error(
                        Self::at(&t),
                        ErrorCode::ValueOutOfRange,
                        format!("{} must be one of {}, got {}", spec.key, options.join("|"), t.text()),
                        (t.offset, t.len),
                        Expected::Word {
                            options: options.iter().map(|s| s.to_string()).collect(),
                            default,
                        },
                    )),
                    _ => Err(self.missing_value(key, spec.key, default)),
                }
            }
            ParamType::Int | ParamType::Float => {
                let integer = spec.ty == ParamType::Int;
                let range = RangeSpec {
                    min: spec.min,
                    max: spec.max,
                    min_exclusive: spec.min_exclusive,
                    integer,
                    default: spec.default.value().as_f64().unwrap_or(0.0),
                };
                let v = self.number(key, spec.key, range)?;
                Ok(if integer {
                    Value::Int(v as i64)
                } else {
                    Value::Float(v)
                })
            }
        }
    }

    fn modifier(&mut self, key: &Token) -> PResult<Modifier> {
        let TokenKind::Ident(name) = &key.kind else {
            unreachable!()
        };
        let (min, max, min_exclusive) = modifier_range(name);
        let range = |integer: bool, default: f64| RangeSpec {
            min,
            max,
            min_exclusive,
            integer,
            default,
        };
        Ok(match name.as_str() {
            "gradient" => {
                let axis = match self.value_token(key) {
                    Some(Token {
                        kind: TokenKind::Ident(a),
                        ..
                    }) if Axis::from_keyword(&a).is_some() => {
                        self.bump();
                        Axis::from_keyword(&a).expect("checked")
                    }
                    Some(t @ Token {
                        kind: TokenKind::Ident(_),
                        ..
                    }) if !is_keyword_anywhere(&t.text()) => {
                        return Err(self.error(
                            Self::at(&t),
                            ErrorCode::ValueOutOfRange,
                            format!("gradient axis must be x, y or z, got {}", t.text()),
                            (t.offset, t.len),
                            Expected::Word {
                                options: vec!["x".into(), "y".into(), "z".into()],
                                default: "x".into(),
                            },
                        ))
                    }
                    _ => return Err(self.missing_value(key, "gradient", "x 1.5".into())),
                };
                let factor = self.number(key, "gradient", range(false, 1.5))?;
                Modifier::Gradient { axis, factor }
            }
            "sandwich" => Modifier::Sandwich {
                thickness: self.number(key, "sandwich", range(false, 0.5))?,
            },
            "smooth" => Modifier::Smooth {
                levels: self.number(key, "smooth", range(true, 1.0))? as u32,
            },
            "noise" => Modifier::Noise {
                degrees: self.number(key, "noise", range(false, 0.0))?,
            },
            _ => unreachable!("modifier list and parser disagree"),
        })
    }
}

#[derive(Clone, Copy)]
struct RangeSpec {
    min: f64,
    max: f64,
    min_exclusive: bool,
    integer: bool,
    default: f64,
}

fn format_default(spec: RangeSpec) -> String {
    super::ast::format_number(spec.default)
}

/// First block kind whose schema knows `word` as a parameter or modifier.
pub fn owning_kind(word: &str) -> Option<BlockKind> {
    BlockKind::ALL
        .into_iter()
        .find(|&k| schema::block_keywords(k).contains(&word))
}

/// Any word with a meaning somewhere in the grammar.
pub fn is_keyword_anywhere(word: &str) -> bool {
    is_reserved(word) || owning_kind(word).is_some()
}
