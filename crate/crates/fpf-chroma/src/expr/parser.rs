//! Recursive-descent parser with the usual precedence ladder.
//!
//! Grammar (see docs/grammar.md):
//!
//! ```text
//! expr   := term  (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | atom
//! atom   := number | variable | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Unary minus binds tighter than `*` and `/`, so `-x0*x0` parses as
//! `(-x0) * x0`.

use crate::error::ParseError;
use crate::expr::token::{Token, TokenKind};
use crate::expr::{BinaryOp, Expr, UnaryOp};

pub fn parse_tokens(tokens: &[Token], source_len: usize) -> Result<Expr, ParseError> {
    let mut p = Parser { tokens, pos: 0, source_len };
    let e = p.expr()?;
    if p.pos < p.tokens.len() {
        let t = &p.tokens[p.pos];
        return Err(ParseError {
            offset: t.offset,
            message: format!("unexpected {} after expression", t.describe()),
        });
    }
    Ok(e)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    source_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn end_offset(&self) -> usize {
        self.source_len
    }

    fn err_here(&self, message: impl Into<String>) -> ParseError {
        let offset = self
            .peek()
            .map(|t| t.offset)
            .unwrap_or_else(|| self.end_offset());
        ParseError { offset, message: message.into() }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(Token { kind: TokenKind::RParen, .. }) => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(ParseError {
                offset: t.offset,
                message: format!("expected `)`, found {}", t.describe()),
            }),
            None => Err(ParseError {
                offset: self.end_offset(),
                message: "expected `)`, found end of input".into(),
            }),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().map(|t| &t.kind) {
                Some(TokenKind::Plus) => BinaryOp::Add,
                Some(TokenKind::Minus) => BinaryOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek().map(|t| &t.kind) {
                Some(TokenKind::Star) => BinaryOp::Mul,
                Some(TokenKind::Slash) => BinaryOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Minus)) {
            self.pos += 1;
            let inner = self.factor()?;
            return Ok(Expr::unary(UnaryOp::Neg, inner));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let t = match self.bump() {
            Some(t) => t.clone(),
            None => {
                return Err(ParseError {
                    offset: self.end_offset(),
                    message: "expected expression, found end of input".into(),
                })
            }
        };
        match t.kind {
            TokenKind::Num(v) => Ok(Expr::Num(v)),
            TokenKind::Var(i) => Ok(Expr::Var(i)),
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            TokenKind::Ident(name) => self.call(&name, t.offset),
            other => Err(ParseError {
                offset: t.offset,
                message: format!(
                    "expected expression, found {}",
                    Token { kind: other, offset: t.offset }.describe()
                ),
            }),
        }
    }

    fn call(&mut self, name: &str, offset: usize) -> Result<Expr, ParseError> {
        let unary = match name {
            "sin" => Some(UnaryOp::Sin),
            "cos" => Some(UnaryOp::Cos),
            "exp" => Some(UnaryOp::Exp),
            "abs" => Some(UnaryOp::Abs),
            "sqrt" => Some(UnaryOp::Sqrt),
            _ => None,
        };
        let binary = match name {
            "min" => Some(BinaryOp::Min),
            "max" => Some(BinaryOp::Max),
            _ => None,
        };
        if unary.is_none() && binary.is_none() {
            return Err(ParseError {
                offset,
                message: format!("unknown function `{name}`"),
            });
        }
        match self.peek() {
            Some(Token { kind: TokenKind::LParen, .. }) => {
                self.pos += 1;
            }
            _ => return Err(self.err_here(format!("expected `(` after `{name}`"))),
        }
        let first = self.expr()?;
        if let Some(op) = unary {
            self.expect_rparen()?;
            return Ok(Expr::unary(op, first));
        }
        let op = binary.unwrap();
        match self.peek() {
            Some(Token { kind: TokenKind::Comma, .. }) => {
                self.pos += 1;
            }
            _ => return Err(self.err_here(format!("expected `,` in `{name}(..)`"))),
        }
        let second = self.expr()?;
        self.expect_rparen()?;
        Ok(Expr::binary(op, first, second))
    }
}
