//! Maximal-munch tokenizer for the branch expression language.

use crate::error::LexError;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Num(f64),
    /// Variable `x<index>`, e.g. `x0`, `x12`.
    Var(usize),
    /// Function name such as `min` or `sin`.
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// Byte offset of the token start, kept for diagnostics.
    pub offset: usize,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
            }
            b'+' => {
                tokens.push(Token { kind: TokenKind::Plus, offset: start });
                i += 1;
            }
            b'-' => {
                tokens.push(Token { kind: TokenKind::Minus, offset: start });
                i += 1;
            }
            b'*' => {
                tokens.push(Token { kind: TokenKind::Star, offset: start });
                i += 1;
            }
            b'/' => {
                tokens.push(Token { kind: TokenKind::Slash, offset: start });
                i += 1;
            }
            b'(' => {
                tokens.push(Token { kind: TokenKind::LParen, offset: start });
                i += 1;
            }
            b')' => {
                tokens.push(Token { kind: TokenKind::RParen, offset: start });
                i += 1;
            }
            b',' => {
                tokens.push(Token { kind: TokenKind::Comma, offset: start });
                i += 1;
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    if i >= bytes.len() || !bytes[i].is_ascii_digit() {
                        return Err(LexError {
                            offset: i,
                            message: "expected digit after decimal point".into(),
                        });
                    }
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &source[start..i];
                let value: f64 = text.parse().map_err(|_| LexError {
                    offset: start,
                    message: format!("invalid number literal `{text}`"),
                })?;
                if !value.is_finite() {
                    return Err(LexError {
                        offset: start,
                        message: format!("number literal `{text}` overflows f64"),
                    });
                }
                tokens.push(Token { kind: TokenKind::Num(value), offset: start });
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &source[start..i];
                let kind = classify_word(word).ok_or_else(|| LexError {
                    offset: start,
                    message: format!("variable index in `{word}` overflows usize"),
                })?;
                tokens.push(Token { kind, offset: start });
            }
            _ => {
                return Err(LexError {
                    offset: start,
                    message: format!(
                        "unrecognized character `{}`",
                        source[start..].chars().next().unwrap()
                    ),
                });
            }
        }
    }
    Ok(tokens)
}

/// `x` followed only by digits is a variable; everything else is an
/// identifier resolved at parse time.
fn classify_word(word: &str) -> Option<TokenKind> {
    if let Some(rest) = word.strip_prefix('x') {
        if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
            // Overflowing indices are a lex error, not an identifier.
            return rest.parse::<usize>().ok().map(TokenKind::Var);
        }
    }
    Some(TokenKind::Ident(word.to_string()))
}

impl Token {
    pub fn describe(&self) -> String {
        match &self.kind {
            TokenKind::Num(v) => format!("number {v}"),
            TokenKind::Var(i) => format!("variable x{i}"),
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Plus => "`+`".into(),
            TokenKind::Minus => "`-`".into(),
            TokenKind::Star => "`*`".into(),
            TokenKind::Slash => "`/`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::Comma => "`,`".into(),
        }
    }
}
