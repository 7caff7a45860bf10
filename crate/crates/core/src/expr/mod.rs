//! Expression trees for evolved formulas.
//!
//! Phenotypes and printed formulas are parsed into [`ExprNode`] trees and
//! evaluated in double precision. The protected operators are total:
//!
//! | op       | definition                                  |
//! |----------|---------------------------------------------|
//! | `pdiv`   | `a / b` if `|b| > 1e-9`, else `1.0`         |
//! | `psqrt`  | `sqrt(|a|)`                                 |
//! | `plog`   | `ln(|a|)` if `|a| > 1e-9`, else `0.0`       |
//!
//! `ln`, `sqrt` and `/` are the plain functions and may produce NaN or
//! infinities, as may `exp` on overflow. Non-finite values are returned as is.

mod parser;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};

pub use parser::{parse_formula, ExprError};

/// Guard used by the protected operators.
pub const PROTECTION_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Sin,
    Tanh,
    Exp,
    Sqrt,
    Ln,
    PSqrt,
    PLog,
    Neg,
}

impl UnaryOp {
    pub fn apply(self, a: f64) -> f64 {
        match self {
            UnaryOp::Sin => libm::sin(a),
            UnaryOp::Tanh => libm::tanh(a),
            UnaryOp::Exp => libm::exp(a),
            UnaryOp::Sqrt => libm::sqrt(a),
            UnaryOp::Ln => libm::log(a),
            UnaryOp::PSqrt => libm::sqrt(a.abs()),
            UnaryOp::PLog => {
                if a.abs() > PROTECTION_EPSILON {
                    libm::log(a.abs())
                } else {
                    0.0
                }
            }
            UnaryOp::Neg => -a,
        }
    }

    /// Canonical function name; `None` for negation.
    pub fn name(self) -> Option<&'static str> {
        Some(match self {
            UnaryOp::Sin => "sin",
            UnaryOp::Tanh => "tanh",
            UnaryOp::Exp => "exp",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Ln => "ln",
            UnaryOp::PSqrt => "psqrt",
            UnaryOp::PLog => "plog",
            UnaryOp::Neg => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    PDiv,
    Div,
}

impl BinaryOp {
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => a / b,
            BinaryOp::PDiv => {
                if b.abs() > PROTECTION_EPSILON {
                    a / b
                } else {
                    1.0
                }
            }
        }
    }

    // pdiv prints as a call, so it never needs parentheses.
    fn precedence(self) -> u8 {
        match self {
            BinaryOp::Add | BinaryOp::Sub => 1,
            BinaryOp::Mul | BinaryOp::Div => 2,
            BinaryOp::PDiv => ATOM,
        }
    }

    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::PDiv => ',',
        }
    }
}

const NEG: u8 = 3;
const ATOM: u8 = 4;

/// A single-variable arithmetic expression.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprNode {
    Const(f64),
    Var,
    Unary(UnaryOp, Box<ExprNode>),
    Binary(BinaryOp, Box<ExprNode>, Box<ExprNode>),
}

impl ExprNode {
    pub fn unary(op: UnaryOp, child: ExprNode) -> Self {
        ExprNode::Unary(op, Box::new(child))
    }

    pub fn binary(op: BinaryOp, left: ExprNode, right: ExprNode) -> Self {
        ExprNode::Binary(op, Box::new(left), Box::new(right))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ExprNode::Const(c) => *c,
            ExprNode::Var => x,
            ExprNode::Unary(op, a) => op.apply(a.eval(x)),
            ExprNode::Binary(op, a, b) => op.apply(a.eval(x), b.eval(x)),
        }
    }

    /// True if any node satisfies `pred`.
    pub fn any(&self, pred: &impl Fn(&ExprNode) -> bool) -> bool {
        pred(self)
            || match self {
                ExprNode::Const(_) | ExprNode::Var => false,
                ExprNode::Unary(_, a) => a.any(pred),
                ExprNode::Binary(_, a, b) => a.any(pred) || b.any(pred),
            }
    }

    pub fn node_count(&self) -> usize {
        match self {
            ExprNode::Const(_) | ExprNode::Var => 1,
            ExprNode::Unary(_, a) => 1 + a.node_count(),
            ExprNode::Binary(_, a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            ExprNode::Const(c) if c.is_sign_negative() => NEG,
            ExprNode::Const(_) | ExprNode::Var => ATOM,
            ExprNode::Unary(UnaryOp::Neg, _) => NEG,
            ExprNode::Unary(..) => ATOM,
            ExprNode::Binary(op, ..) => op.precedence(),
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            f.write_char('(')?;
            fmt::Display::fmt(self, f)?;
            f.write_char(')')
        } else {
            fmt::Display::fmt(self, f)
        }
    }
}

/// Canonical text: explicit `*`, canonical function names and only the
/// parentheses needed to rebuild the same tree.
impl fmt::Display for ExprNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // f64 Display is the shortest round-tripping decimal, never
            // exponent notation.
            ExprNode::Const(c) if c.is_sign_negative() => write!(f, "-{}", -c),
            ExprNode::Const(c) => write!(f, "{c}"),
            ExprNode::Var => f.write_char('x'),
            ExprNode::Unary(UnaryOp::Neg, a) => {
                f.write_char('-')?;
                a.write_child(f, NEG)
            }
            ExprNode::Unary(op, a) => {
                // name() is Some for every op except Neg, handled above
                write!(f, "{}(", op.name().unwrap_or_default())?;
                fmt::Display::fmt(a.as_ref(), f)?;
                f.write_char(')')
            }
            ExprNode::Binary(BinaryOp::PDiv, a, b) => write!(f, "pdiv({a},{b})"),
            ExprNode::Binary(op, a, b) => {
                let p = op.precedence();
                a.write_child(f, p)?;
                f.write_char(op.symbol())?;
                // Same-precedence right operands keep their parentheses so the
                // reparsed tree has the original association.
                b.write_child(f, p + 1)
            }
        }
    }
}

pub fn evaluate(expr: &ExprNode, x: f64) -> f64 {
    expr.eval(x)
}

pub fn evaluate_batch(expr: &ExprNode, xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| expr.eval(x)).collect()
}

pub fn format_expr(expr: &ExprNode) -> String {
    let mut s = String::new();
    let _ = write!(s, "{expr}");
    s
}
