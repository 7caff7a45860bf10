//! Recursive-descent parser for formula text.
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary | primary)*     juxtaposition multiplies
//! unary   := ('-' | '+') unary | primary
//! primary := number | x | func '(' sum ')' | 'pdiv' '(' sum ',' sum ')' | '(' sum ')'
//! ```
//!
//! Positions in errors are 0-based character offsets.

use alloc::borrow::ToOwned;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use super::{BinaryOp, ExprNode, UnaryOp};

const MAX_NESTING: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown token `{token}` at position {position}")]
    UnknownToken { position: usize, token: String },
}

impl ExprError {
    pub fn position(&self) -> usize {
        match self {
            ExprError::Syntax { position, .. } | ExprError::UnknownToken { position, .. } => {
                *position
            }
        }
    }

    fn syntax(position: usize, message: &str) -> Self {
        ExprError::Syntax {
            position,
            message: message.to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Var,
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
}

fn describe(tok: Option<&Tok>) -> &'static str {
    match tok {
        None => "unexpected end of input",
        Some(Tok::RParen) => "unexpected `)`",
        Some(Tok::Comma) => "unexpected `,`",
        Some(Tok::Plus | Tok::Minus | Tok::Star | Tok::Slash) => "unexpected operator",
        Some(_) => "unexpected token",
    }
}

fn lex(text: &str) -> Result<(Vec<(Tok, usize)>, usize), ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let skip_ws = |mut j: usize| {
        while j < chars.len() && chars[j].is_whitespace() {
            j += 1;
        }
        j
    };
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(t) = single {
            toks.push((t, start));
            i += 1;
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                if i >= chars.len() || !chars[i].is_ascii_digit() {
                    return Err(ExprError::syntax(i, "expected digit after `.`"));
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let literal: String = chars[start..i].iter().collect();
            let value: f64 = literal
                .parse()
                .map_err(|_| ExprError::syntax(start, "malformed number"))?;
            if !value.is_finite() {
                return Err(ExprError::syntax(start, "number out of range"));
            }
            toks.push((Tok::Num(value), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || matches!(chars[i], '_' | '.'))
            {
                i += 1;
            }
            let ident: String = chars[start..i].iter().collect();
            if ident == "x" {
                // `x[:, 0]` column selector, whitespace tolerated
                let j = skip_ws(i);
                if j < chars.len() && chars[j] == '[' {
                    let mut k = j + 1;
                    for expected in [':', ',', '0', ']'] {
                        k = skip_ws(k);
                        if k >= chars.len() || chars[k] != expected {
                            return Err(ExprError::syntax(k, "expected `x[:, 0]`"));
                        }
                        k += 1;
                    }
                    i = k;
                }
                toks.push((Tok::Var, start));
            } else {
                toks.push((Tok::Ident(ident), start));
            }
        } else {
            return Err(ExprError::UnknownToken {
                position: start,
                token: c.into(),
            });
        }
    }
    Ok((toks, chars.len()))
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    nesting: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn position(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |&(_, p)| p)
    }

    fn error_here(&self) -> ExprError {
        ExprError::syntax(self.position(), describe(self.peek()))
    }

    fn expect(&mut self, tok: Tok, message: &str) -> Result<(), ExprError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(ExprError::syntax(self.position(), message))
        }
    }

    fn enter(&mut self) -> Result<(), ExprError> {
        self.nesting += 1;
        if self.nesting > MAX_NESTING {
            return Err(ExprError::syntax(self.position(), "formula nested too deeply"));
        }
        Ok(())
    }

    fn sum(&mut self) -> Result<ExprNode, ExprError> {
        let mut left = self.product()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinaryOp::Add,
                Some(Tok::Minus) => BinaryOp::Sub,
                _ => return Ok(left),
            };
            self.pos += 1;
            let right = self.product()?;
            left = ExprNode::binary(op, left, right);
        }
    }

    fn product(&mut self) -> Result<ExprNode, ExprError> {
        let mut left = self.unary()?;
        loop {
            let right = match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    left = ExprNode::binary(BinaryOp::Mul, left, self.unary()?);
                    continue;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    left = ExprNode::binary(BinaryOp::Div, left, self.unary()?);
                    continue;
                }
                Some(Tok::Num(_) | Tok::Var | Tok::Ident(_) | Tok::LParen) => self.primary()?,
                _ => return Ok(left),
            };
            left = ExprNode::binary(BinaryOp::Mul, left, right);
        }
    }

    fn unary(&mut self) -> Result<ExprNode, ExprError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                self.enter()?;
                let inner = self.unary()?;
                self.nesting -= 1;
                Ok(ExprNode::unary(UnaryOp::Neg, inner))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.enter()?;
                let inner = self.unary();
                self.nesting -= 1;
                inner
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<ExprNode, ExprError> {
        let start = self.position();
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error_here());
        };
        match tok {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(ExprNode::Const(v))
            }
            Tok::Var => {
                self.pos += 1;
                Ok(ExprNode::Var)
            }
            Tok::LParen => {
                self.pos += 1;
                self.enter()?;
                let inner = self.sum()?;
                self.expect(Tok::RParen, "expected `)`")?;
                self.nesting -= 1;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let func = function(&name).ok_or_else(|| ExprError::UnknownToken {
                    position: start,
                    token: name.clone(),
                })?;
                self.pos += 1;
                self.expect(Tok::LParen, "expected `(` after function name")?;
                self.enter()?;
                let node = match func {
                    Func::Unary(op) => ExprNode::unary(op, self.sum()?),
                    Func::PDiv => {
                        let a = self.sum()?;
                        self.expect(Tok::Comma, "expected `,` in pdiv")?;
                        let b = self.sum()?;
                        ExprNode::binary(BinaryOp::PDiv, a, b)
                    }
                };
                self.expect(Tok::RParen, "expected `)`")?;
                self.nesting -= 1;
                Ok(node)
            }
            _ => Err(self.error_here()),
        }
    }
}

enum Func {
    Unary(UnaryOp),
    PDiv,
}

fn function(name: &str) -> Option<Func> {
    Some(Func::Unary(match name {
        "sin" | "np.sin" => UnaryOp::Sin,
        "tanh" | "np.tanh" => UnaryOp::Tanh,
        "exp" | "np.exp" => UnaryOp::Exp,
        "ln" | "log" => UnaryOp::Ln,
        "sqrt" => UnaryOp::Sqrt,
        "psqrt" => UnaryOp::PSqrt,
        "plog" => UnaryOp::PLog,
        "pdiv" => return Some(Func::PDiv),
        _ => return None,
    }))
}

/// Parses formula text. Accepts canonical function names, the `np.` aliases
/// and `x[:, 0]` for the variable; juxtaposed factors multiply.
pub fn parse_formula(text: &str) -> Result<ExprNode, ExprError> {
    let (toks, end) = lex(text)?;
    if toks.is_empty() {
        return Err(ExprError::syntax(0, "empty formula"));
    }
    let mut p = Parser {
        toks,
        pos: 0,
        end,
        nesting: 0,
    };
    let expr = p.sum()?;
    if p.pos != p.toks.len() {
        return Err(p.error_here());
    }
    Ok(expr)
}
