//! Tokenizer. Whitespace separates tokens, `#` starts a line comment.

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    /// Raw numeric text: `-?digits(.digits)?`.
    Number(String),
    Str(String),
    LBrace,
    RBrace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// Byte offset and length in the source.
    pub offset: usize,
    pub len: usize,
    pub line: usize,
    pub column: usize,
}

impl Token {
    pub fn end(&self) -> usize {
        self.offset + self.len
    }

    pub fn text(&self) -> String {
        match &self.kind {
            TokenKind::Ident(s) | TokenKind::Number(s) => s.clone(),
            TokenKind::Str(s) => format!("\"{s}\""),
            TokenKind::LBrace => "{".into(),
            TokenKind::RBrace => "}".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexError {
    pub message: String,
    pub offset: usize,
    pub len: usize,
    pub line: usize,
    pub column: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Line and column (1-based, columns in characters) of a byte offset.
pub fn position(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    (line, col)
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let byte_at = |i: usize| chars.get(i).map_or(src.len(), |c| c.0);
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let (off, c) = chars[i];
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i].1 != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let kind = if c == '{' {
            i += 1;
            TokenKind::LBrace
        } else if c == '}' {
            i += 1;
            TokenKind::RBrace
        } else if c == '"' {
            i += 1;
            while i < chars.len() && chars[i].1 != '"' && chars[i].1 != '\n' {
                i += 1;
            }
            if i >= chars.len() || chars[i].1 != '"' {
                return Err(LexError {
                    message: "unterminated string".into(),
                    offset: off,
                    len: 1,
                    line,
                    column: col,
                });
            }
            i += 1;
            TokenKind::Str(src[byte_at(start + 1)..byte_at(i - 1)].to_string())
        } else if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.1.is_ascii_digit())) {
            i += 1;
            while i < chars.len() && chars[i].1.is_ascii_digit() {
                i += 1;
            }
            if i + 1 < chars.len() && chars[i].1 == '.' && chars[i + 1].1.is_ascii_digit() {
                i += 1;
                while i < chars.len() && chars[i].1.is_ascii_digit() {
                    i += 1;
                }
            }
            TokenKind::Number(src[off..byte_at(i)].to_string())
        } else if is_ident_start(c) {
            while i < chars.len() && is_ident_char(chars[i].1) {
                i += 1;
            }
            TokenKind::Ident(src[off..byte_at(i)].to_string())
        } else {
            return Err(LexError {
                message: format!("unexpected character {c:?}"),
                offset: off,
                len: c.len_utf8(),
                line,
                column: col,
            });
        };
        let end = byte_at(i);
        out.push(Token {
            kind,
            offset: off,
            len: end - off,
            line,
            column: col,
        });
        col += i - start;
    }
    Ok(out)
}
