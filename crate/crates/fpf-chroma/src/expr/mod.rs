//! Branch expression language: parsing and dual (point / interval)
//! evaluation.
//!
//! Expressions are immutable ASTs over real literals, variables `x0..`,
//! unary `-`, `sin`, `cos`, `exp`, `abs`, `sqrt`, and binary `+ - * /`,
//! `min`, `max`. Point evaluation is plain f64 recursion; interval
//! evaluation is inclusion-sound with outward rounding (see
//! [`crate::interval`]).

mod affine;
mod parser;
pub mod token;

use std::fmt;

use crate::error::{EvalError, LexError, ParseError};
use crate::interval::Interval;

pub use affine::AffineForm;
pub use token::{tokenize, Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Abs,
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Min,
    Max,
}

/// Immutable expression AST.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum ExprError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Parse an expression from source text.
pub fn parse(source: &str) -> Result<Expr, ExprError> {
    let tokens = tokenize(source)?;
    Ok(parser::parse_tokens(&tokens, source.len())?)
}

impl Expr {
    pub fn unary(op: UnaryOp, e: Expr) -> Expr {
        Expr::Unary(op, Box::new(e))
    }

    pub fn binary(op: BinaryOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Unary(_, e) => e.max_var(),
            Expr::Binary(_, l, r) => match (l.max_var(), r.max_var()) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            },
        }
    }

    /// Check every variable index against the domain dimension.
    pub fn check_dimension(&self, dim: usize) -> Result<(), usize> {
        match self.max_var() {
            Some(i) if i >= dim => Err(i),
            _ => Ok(()),
        }
    }

    /// Exact recursive evaluation at a point.
    pub fn eval_point(&self, p: &[f64]) -> Result<f64, EvalError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var(i) => p.get(*i).copied().ok_or(EvalError::UnboundVariable(*i)),
            Expr::Unary(op, e) => {
                let v = e.eval_point(p)?;
                Ok(match op {
                    UnaryOp::Neg => -v,
                    UnaryOp::Sin => v.sin(),
                    UnaryOp::Cos => v.cos(),
                    UnaryOp::Exp => v.exp(),
                    UnaryOp::Abs => v.abs(),
                    UnaryOp::Sqrt => {
                        if v < 0.0 {
                            return Err(EvalError::SqrtOfNegative);
                        }
                        v.sqrt()
                    }
                })
            }
            Expr::Binary(op, l, r) => {
                let a = l.eval_point(p)?;
                let b = r.eval_point(p)?;
                Ok(match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        a / b
                    }
                    BinaryOp::Min => a.min(b),
                    BinaryOp::Max => a.max(b),
                })
            }
        }
    }

    /// Inclusion-sound interval evaluation over a box.
    ///
    /// Structurally identical factors of a product are routed through the
    /// square rule, which keeps `x0*x0` over `[-1, 2]` at `[0, 4]` instead
    /// of the naive `[-2, 4]`.
    pub fn eval_interval(&self, b: &[Interval]) -> Result<Interval, EvalError> {
        match self {
            Expr::Num(v) => Ok(Interval::point(*v)),
            Expr::Var(i) => b.get(*i).copied().ok_or(EvalError::UnboundVariable(*i)),
            Expr::Unary(op, e) => {
                let v = e.eval_interval(b)?;
                Ok(match op {
                    UnaryOp::Neg => v.neg(),
                    UnaryOp::Sin => v.sin(),
                    UnaryOp::Cos => v.cos(),
                    UnaryOp::Exp => v.exp(),
                    UnaryOp::Abs => v.abs(),
                    UnaryOp::Sqrt => v.sqrt()?,
                })
            }
            Expr::Binary(op, l, r) => {
                if *op == BinaryOp::Mul && l == r {
                    return Ok(l.eval_interval(b)?.square());
                }
                let a = l.eval_interval(b)?;
                let c = r.eval_interval(b)?;
                Ok(match op {
                    BinaryOp::Add => a.add(&c),
                    BinaryOp::Sub => a.sub(&c),
                    BinaryOp::Mul => a.mul(&c),
                    BinaryOp::Div => a.div(&c)?,
                    BinaryOp::Min => a.min_with(&c),
                    BinaryOp::Max => a.max_with(&c),
                })
            }
        }
    }

    /// Affine-arithmetic evaluation over a box; exact on affine expressions.
    pub fn eval_affine(&self, b: &[Interval]) -> Result<AffineForm, EvalError> {
        affine::eval(self, b)
    }

    /// Enclosure of `self(x) - x[axis]` over the box.
    ///
    /// Affine arithmetic keeps the correlation between the expression and
    /// the subtracted variable, so translations like `x0+1` get the exact
    /// displacement `[1, 1]` instead of an interval fattened by the cell
    /// width.
    pub fn displacement(&self, axis: usize, b: &[Interval]) -> Result<Interval, EvalError> {
        let form = self.eval_affine(b)?;
        let var = AffineForm::variable(axis, b);
        Ok(form.sub(&var).range())
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinaryOp::Add | BinaryOp::Sub, _, _) => 1,
            Expr::Binary(BinaryOp::Mul | BinaryOp::Div, _, _) => 2,
            Expr::Unary(UnaryOp::Neg, _) => 3,
            _ => 4,
        }
    }
}

impl fmt::Display for Expr {
    /// Prints with minimal parentheses; `parse(print(e))` is structurally
    /// equal to `e`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
            if e.precedence() < min_prec {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Num(v) => {
                if *v == v.trunc() && v.abs() < 1e15 {
                    write!(f, "{v:.1}")
                } else {
                    write!(f, "{v}")
                }
            }
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Unary(UnaryOp::Neg, e) => {
                write!(f, "-")?;
                wrap(f, e, 3)
            }
            Expr::Unary(op, e) => {
                let name = match op {
                    UnaryOp::Sin => "sin",
                    UnaryOp::Cos => "cos",
                    UnaryOp::Exp => "exp",
                    UnaryOp::Abs => "abs",
                    UnaryOp::Sqrt => "sqrt",
                    UnaryOp::Neg => unreachable!(),
                };
                write!(f, "{name}({e})")
            }
            Expr::Binary(BinaryOp::Min, l, r) => write!(f, "min({l}, {r})"),
            Expr::Binary(BinaryOp::Max, l, r) => write!(f, "max({l}, {r})"),
            Expr::Binary(op, l, r) => {
                let (sym, prec) = match op {
                    BinaryOp::Add => ("+", 1),
                    BinaryOp::Sub => ("-", 1),
                    BinaryOp::Mul => ("*", 2),
                    BinaryOp::Div => ("/", 2),
                    _ => unreachable!(),
                };
                wrap(f, l, prec)?;
                write!(f, " {sym} ")?;
                // Parsing is left-associative, so a right child at equal
                // precedence must keep its parentheses.
                wrap(f, r, prec + 1)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_simple() {
        let t = tokenize("x0 + 1").unwrap();
        let kinds: Vec<_> = t.iter().map(|t| t.kind.clone()).collect();
        assert_eq!(
            kinds,
            vec![TokenKind::Var(0), TokenKind::Plus, TokenKind::Num(1.0)]
        );
    }

    #[test]
    fn tokenize_call() {
        let t = tokenize("min(x0, 2*x1)").unwrap();
        let kinds: Vec<_> = t.iter().map(|t| t.kind.clone()).collect();
        assert_eq!(
            kinds,
            vec![
                TokenKind::Ident("min".into()),
                TokenKind::LParen,
                TokenKind::Var(0),
                TokenKind::Comma,
                TokenKind::Num(2.0),
                TokenKind::Star,
                TokenKind::Var(1),
                TokenKind::RParen,
            ]
        );
    }

    #[test]
    fn tokenize_bad_char() {
        let err = tokenize("x0 @ 1").unwrap_err();
        assert_eq!(err.offset, 3);
    }

    #[test]
    fn parse_precedence() {
        let e = parse("1 + 2*x0").unwrap();
        assert_eq!(
            e,
            Expr::binary(
                BinaryOp::Add,
                Expr::Num(1.0),
                Expr::binary(BinaryOp::Mul, Expr::Num(2.0), Expr::Var(0)),
            )
        );
    }

    #[test]
    fn unary_minus_binds_tighter_than_mul() {
        let e = parse("-x0*x0").unwrap();
        assert_eq!(
            e,
            Expr::binary(
                BinaryOp::Mul,
                Expr::unary(UnaryOp::Neg, Expr::Var(0)),
                Expr::Var(0),
            )
        );
    }

    #[test]
    fn parse_truncated_call() {
        let err = parse("min(1,").unwrap_err();
        match err {
            ExprError::Parse(p) => assert!(p.message.contains("expected expression")),
            other => panic!("wrong error: {other:?}"),
        }
    }

    #[test]
    fn eval_point_examples() {
        assert_eq!(parse("x0+1").unwrap().eval_point(&[0.0]).unwrap(), 1.0);
        assert_eq!(
            parse("min(x0, 2)").unwrap().eval_point(&[5.0]).unwrap(),
            2.0
        );
        assert_eq!(
            parse("sqrt(x0)").unwrap().eval_point(&[-1.0]),
            Err(EvalError::SqrtOfNegative)
        );
    }

    #[test]
    fn eval_interval_affine() {
        let e = parse("x0+1").unwrap();
        let r = e.eval_interval(&[Interval::new(0.0, 1.0)]).unwrap();
        assert!(r.lo <= 1.0 && r.hi >= 2.0 && r.width() < 1.0 + 1e-12);
    }

    #[test]
    fn eval_interval_square_rule() {
        let e = parse("x0*x0").unwrap();
        let r = e.eval_interval(&[Interval::new(-1.0, 2.0)]).unwrap();
        assert_eq!(r.lo, 0.0);
        assert!(r.hi >= 4.0 && r.hi < 4.0 + 1e-12);
    }

    #[test]
    fn eval_interval_sin_critical_point() {
        let e = parse("sin(x0)").unwrap();
        let r = e.eval_interval(&[Interval::new(0.0, 3.2)]).unwrap();
        assert_eq!(r.hi, 1.0);
        assert!(r.contains_interval(&Interval::new(0.0, 1.0)));
    }

    #[test]
    fn display_round_trip_spot_checks() {
        for src in [
            "-x0*x0",
            "1.0 - (2.0 - x0)",
            "min(x0, max(x1, 3.5))",
            "sqrt(abs(x0))/(x1*x1 + 1.0)",
            "2.0*-x0 - -1.0",
        ] {
            let e = parse(src).unwrap();
            let printed = e.to_string();
            let reparsed = parse(&printed).unwrap();
            assert_eq!(e, reparsed, "round trip failed: {src} -> {printed}");
        }
    }

    #[test]
    fn displacement_of_translation_is_exact() {
        let e = parse("x0+1").unwrap();
        let d = e.displacement(0, &[Interval::new(3.0, 5.0)]).unwrap();
        assert!((d.lo - 1.0).abs() < 1e-12);
        assert!((d.hi - 1.0).abs() < 1e-12);
    }
}
