//! Recursive-descent parser for polynomial expressions in `k` and `m`.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr     := term (('+'|'-') term)*
//! term     := factor ('*' factor)*
//! factor   := atom ('^' uint)?
//! atom     := 'k' | 'm' | rational | '(' expr ')' | '-' atom
//! rational := uint ('/' uint)?
//! ```
//!
//! Literals are rationals only, so lowering to an exact polynomial is
//! lossless.

use rectify_core::poly::{rational, BivarPoly};
use std::fmt;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    K,
    M,
}

/// Syntax tree of a parsed expression.
#[derive(Clone, Debug, PartialEq)]
pub enum PolyExpr {
    Var(Var),
    Rational { num: i64, den: i64 },
    Neg(Box<PolyExpr>),
    Add(Box<PolyExpr>, Box<PolyExpr>),
    Sub(Box<PolyExpr>, Box<PolyExpr>),
    Mul(Box<PolyExpr>, Box<PolyExpr>),
    Pow(Box<PolyExpr>, u32),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {}", expected.join(" or "))]
    Syntax { offset: usize, expected: Vec<&'static str> },
    #[error("zero denominator at byte {offset}")]
    ZeroDenominator { offset: usize },
    #[error("number at byte {offset} is too large")]
    NumberTooLarge { offset: usize },
}

impl PolyExpr {
    /// Exact lowering to polynomial form.
    pub fn lower(&self) -> BivarPoly {
        match self {
            PolyExpr::Var(Var::K) => BivarPoly::var_k(),
            PolyExpr::Var(Var::M) => BivarPoly::var_m(),
            PolyExpr::Rational { num, den } => BivarPoly::constant(rational(*num, *den)),
            PolyExpr::Neg(e) => -&e.lower(),
            PolyExpr::Add(a, b) => &a.lower() + &b.lower(),
            PolyExpr::Sub(a, b) => &a.lower() - &b.lower(),
            PolyExpr::Mul(a, b) => &a.lower() * &b.lower(),
            PolyExpr::Pow(base, e) => base.lower().pow(*e),
        }
    }
}

impl fmt::Display for PolyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolyExpr::Var(Var::K) => write!(f, "k"),
            PolyExpr::Var(Var::M) => write!(f, "m"),
            PolyExpr::Rational { num, den } if *den == 1 => write!(f, "{num}"),
            PolyExpr::Rational { num, den } => write!(f, "{num}/{den}"),
            PolyExpr::Neg(e) => write!(f, "-({e})"),
            PolyExpr::Add(a, b) => write!(f, "({a} + {b})"),
            PolyExpr::Sub(a, b) => write!(f, "({a} - {b})"),
            PolyExpr::Mul(a, b) => write!(f, "({a}*{b})"),
            PolyExpr::Pow(b, e) => write!(f, "({b})^{e}"),
        }
    }
}

pub fn parse_poly_expr(src: &str) -> Result<PolyExpr, ParseError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0 };
    let expr = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(ParseError::Syntax {
            offset: p.pos,
            expected: vec!["'+'", "'-'", "'*'", "'^'", "end of input"],
        });
    }
    Ok(expr)
}

/// Parses and lowers in one step.
pub fn parse_polynomial(src: &str) -> Result<BivarPoly, ParseError> {
    parse_poly_expr(src).map(|e| e.lower())
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, byte: u8) -> bool {
        if self.peek() == Some(byte) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<PolyExpr, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = PolyExpr::Add(Box::new(acc), Box::new(self.term()?));
            } else if self.eat(b'-') {
                acc = PolyExpr::Sub(Box::new(acc), Box::new(self.term()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<PolyExpr, ParseError> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            acc = PolyExpr::Mul(Box::new(acc), Box::new(self.factor()?));
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<PolyExpr, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let (value, offset) = self.uint()?;
            let exp = u32::try_from(value).map_err(|_| ParseError::NumberTooLarge { offset })?;
            return Ok(PolyExpr::Pow(Box::new(base), exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<PolyExpr, ParseError> {
        match self.peek() {
            Some(b'k') => {
                self.pos += 1;
                Ok(PolyExpr::Var(Var::K))
            }
            Some(b'm') => {
                self.pos += 1;
                Ok(PolyExpr::Var(Var::M))
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(PolyExpr::Neg(Box::new(self.atom()?)))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(ParseError::Syntax { offset: self.pos, expected: vec!["')'"] });
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => self.rational(),
            _ => Err(ParseError::Syntax {
                offset: self.pos,
                expected: vec!["'k'", "'m'", "number", "'('", "'-'"],
            }),
        }
    }

    fn rational(&mut self) -> Result<PolyExpr, ParseError> {
        let (num_u, num_off) = self.uint()?;
        let num = i64::try_from(num_u).map_err(|_| ParseError::NumberTooLarge { offset: num_off })?;
        if self.eat(b'/') {
            let (den_u, den_off) = self.uint()?;
            if den_u == 0 {
                return Err(ParseError::ZeroDenominator { offset: den_off });
            }
            let den =
                i64::try_from(den_u).map_err(|_| ParseError::NumberTooLarge { offset: den_off })?;
            return Ok(PolyExpr::Rational { num, den });
        }
        Ok(PolyExpr::Rational { num, den: 1 })
    }

    fn uint(&mut self) -> Result<(u64, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let mut value: u64 = 0;
        let mut any = false;
        while let Some(&c) = self.src.get(self.pos) {
            if !c.is_ascii_digit() {
                break;
            }
            any = true;
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add((c - b'0') as u64))
                .ok_or(ParseError::NumberTooLarge { offset: start })?;
            self.pos += 1;
        }
        if !any {
            return Err(ParseError::Syntax { offset: start, expected: vec!["digit"] });
        }
        Ok((value, start))
    }
}
