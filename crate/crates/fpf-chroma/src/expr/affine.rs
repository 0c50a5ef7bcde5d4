//! Affine arithmetic over the box variables.
//!
//! A form represents `base + sum_j coeffs[j] * eps_j + [-err, err]`, where
//! `base` is an outward-rounded interval, each noise symbol `eps_j` ranges
//! over [-1, 1] and is tied to domain variable `x_j`, and `err` bounds the
//! rounding of coefficient arithmetic plus nonlinear remainders. Linear
//! operations keep the correlation between subexpressions, which is what
//! makes displacement enclosures like `(x0+1) - x0` collapse to `[1, 1]`
//! instead of an interval two cell widths wide. Nonlinear operations fall
//! back to the interval range (kept exact in `base`, so chains like
//! `sqrt(abs(x))` stay inside their true domains).
//!
//! `REL_SLACK` is ~9x the worst-case relative error of one correctly
//! rounded f64 operation; it also covers the rounding of the slack
//! accumulation itself.

use crate::error::EvalError;
use crate::expr::{BinaryOp, Expr, UnaryOp};
use crate::interval::Interval;

const REL_SLACK: f64 = 1e-15;

#[derive(Debug, Clone)]
pub struct AffineForm {
    base: Interval,
    coeffs: Vec<f64>,
    err: f64,
}

fn slop(x: f64) -> f64 {
    x.abs() * REL_SLACK
}

/// Accumulate an error bound with upward rounding, exact on zero addends.
fn acc(e: f64, d: f64) -> f64 {
    if d > 0.0 {
        (e + d).next_up()
    } else {
        e
    }
}

impl AffineForm {
    pub fn constant(v: f64, dim: usize) -> Self {
        AffineForm { base: Interval::point(v), coeffs: vec![0.0; dim], err: 0.0 }
    }

    /// Form of domain variable `x_i` over the box.
    pub fn variable(i: usize, b: &[Interval]) -> Self {
        let iv = b[i];
        let mid = iv.midpoint();
        let rad = iv.radius();
        let mut coeffs = vec![0.0; b.len()];
        coeffs[i] = rad;
        AffineForm { base: Interval::point(mid), coeffs, err: 0.0 }
    }

    fn from_interval(iv: Interval, dim: usize) -> Self {
        AffineForm { base: iv, coeffs: vec![0.0; dim], err: 0.0 }
    }

    fn is_scalar(&self) -> bool {
        self.err == 0.0 && self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Conservative interval range of the form.
    pub fn range(&self) -> Interval {
        let mut rad = self.err;
        for &c in &self.coeffs {
            rad = acc(rad, c.abs());
        }
        if rad == 0.0 {
            return self.base;
        }
        Interval::new(
            (self.base.lo - rad).next_down(),
            (self.base.hi + rad).next_up(),
        )
    }

    pub fn neg(&self) -> Self {
        AffineForm {
            base: self.base.neg(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            err: self.err,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.coeffs.len(), other.coeffs.len());
        let base = self.base.add(&other.base);
        let mut err = self.err + other.err;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| {
                let c = a + b;
                err = acc(err, slop(c));
                c
            })
            .collect();
        AffineForm { base, coeffs, err }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Multiply by the exact interval `s` (a scalar form's base).
    fn scale(&self, s: Interval) -> Self {
        let base = self.base.mul(&s);
        let mid = s.midpoint();
        let rad = s.radius();
        let mut err = self.err * mid.abs();
        let coeffs: Vec<f64> = self
            .coeffs
            .iter()
            .map(|&a| {
                let v = a * mid;
                err = acc(err, slop(v));
                v
            })
            .collect();
        if rad > 0.0 {
            // The halo of s multiplies the non-base part of self.
            let spread: f64 = self.coeffs.iter().map(|c| c.abs()).sum::<f64>() + self.err;
            err = acc(err, rad * spread);
        }
        AffineForm { base, coeffs, err }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if other.is_scalar() {
            return self.scale(other.base);
        }
        if self.is_scalar() {
            return other.scale(self.base);
        }
        // General product: drop correlations, keep the interval range.
        let dim = self.coeffs.len();
        Self::from_interval(self.range().mul(&other.range()), dim)
    }
}

pub fn eval(e: &Expr, b: &[Interval]) -> Result<AffineForm, EvalError> {
    let dim = b.len();
    match e {
        Expr::Num(v) => Ok(AffineForm::constant(*v, dim)),
        Expr::Var(i) => {
            if *i >= dim {
                return Err(EvalError::UnboundVariable(*i));
            }
            Ok(AffineForm::variable(*i, b))
        }
        Expr::Unary(op, inner) => {
            let f = eval(inner, b)?;
            Ok(match op {
                UnaryOp::Neg => f.neg(),
                UnaryOp::Sin => AffineForm::from_interval(f.range().sin(), dim),
                UnaryOp::Cos => AffineForm::from_interval(f.range().cos(), dim),
                UnaryOp::Exp => AffineForm::from_interval(f.range().exp(), dim),
                UnaryOp::Abs => AffineForm::from_interval(f.range().abs(), dim),
                UnaryOp::Sqrt => AffineForm::from_interval(f.range().sqrt()?, dim),
            })
        }
        Expr::Binary(op, l, r) => {
            if *op == BinaryOp::Mul && l == r {
                let f = eval(l, b)?;
                return Ok(AffineForm::from_interval(f.range().square(), dim));
            }
            let fl = eval(l, b)?;
            let fr = eval(r, b)?;
            Ok(match op {
                BinaryOp::Add => fl.add(&fr),
                BinaryOp::Sub => fl.sub(&fr),
                BinaryOp::Mul => fl.mul(&fr),
                BinaryOp::Div => {
                    AffineForm::from_interval(fl.range().div(&fr.range())?, dim)
                }
                // When the comparison is decided over the whole box the
                // winning operand's form passes through exactly, keeping
                // correlations across piecewise-defined branches.
                BinaryOp::Min => {
                    let (rl, rr) = (fl.range(), fr.range());
                    if rl.hi < rr.lo {
                        fl
                    } else if rr.hi < rl.lo {
                        fr
                    } else {
                        AffineForm::from_interval(rl.min_with(&rr), dim)
                    }
                }
                BinaryOp::Max => {
                    let (rl, rr) = (fl.range(), fr.range());
                    if rl.lo > rr.hi {
                        fl
                    } else if rr.lo > rl.hi {
                        fr
                    } else {
                        AffineForm::from_interval(rl.max_with(&rr), dim)
                    }
                }
            })
        }
    }
}
