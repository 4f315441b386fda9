//! The scalar expression language for metric entries, span components and
//! coefficient recipes.
//!
//! Grammar (authoritative):
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := ("-")? power
//! power  := atom ("^" number)*        // left-associative, literal exponent
//! atom   := number | ident | ident "(" expr ")" | "(" expr ")"
//! ident  := letter (letter|digit|_)*  // x1..x9 are chart coordinates
//! ```

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::jets::Jet3;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Literal(f64),
    /// Chart coordinate: 0-based index, original token ("x1".."x9").
    Coordinate(usize),
    Parameter(String),
    Neg(Box<Expression>),
    Binary(BinOp, Box<Expression>, Box<Expression>),
    /// Power with a literal constant exponent.
    Pow(Box<Expression>, f64),
    Call(Func, Box<Expression>),
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Literal(v) => write!(f, "{v}"),
            Expression::Coordinate(i) => write!(f, "x{}", i + 1),
            Expression::Parameter(n) => write!(f, "{n}"),
            Expression::Neg(e) => write!(f, "(-{e})"),
            Expression::Binary(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                };
                write!(f, "({a} {s} {b})")
            }
            Expression::Pow(a, c) => write!(f, "({a}^{c})"),
            Expression::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

impl Expression {
    /// Largest coordinate index mentioned, if any.
    pub fn max_coordinate(&self) -> Option<usize> {
        match self {
            Expression::Literal(_) | Expression::Parameter(_) => None,
            Expression::Coordinate(i) => Some(*i),
            Expression::Neg(e) => e.max_coordinate(),
            Expression::Binary(_, a, b) => a.max_coordinate().max(b.max_coordinate()),
            Expression::Pow(a, _) => a.max_coordinate(),
            Expression::Call(_, e) => e.max_coordinate(),
        }
    }

    pub fn parameters(&self) -> BTreeSet<String> {
        let mut set = BTreeSet::new();
        self.collect_params(&mut set);
        set
    }

    fn collect_params(&self, set: &mut BTreeSet<String>) {
        match self {
            Expression::Parameter(n) => {
                set.insert(n.clone());
            }
            Expression::Neg(e) | Expression::Pow(e, _) | Expression::Call(_, e) => {
                e.collect_params(set)
            }
            Expression::Binary(_, a, b) => {
                a.collect_params(set);
                b.collect_params(set);
            }
            _ => {}
        }
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn next(&mut self) -> Result<(Tok, usize)> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((Tok::Eof, start));
        }
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'0'..=b'9' | b'.' => {
                let mut end = self.pos;
                while end < self.src.len() && (self.src[end].is_ascii_digit() || self.src[end] == b'.')
                {
                    end += 1;
                }
                if end < self.src.len() && (self.src[end] == b'e' || self.src[end] == b'E') {
                    let mut k = end + 1;
                    if k < self.src.len() && (self.src[k] == b'+' || self.src[k] == b'-') {
                        k += 1;
                    }
                    if k < self.src.len() && self.src[k].is_ascii_digit() {
                        while k < self.src.len() && self.src[k].is_ascii_digit() {
                            k += 1;
                        }
                        end = k;
                    }
                }
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                let v: f64 = text.parse().map_err(|_| Error::Parse {
                    offset: start,
                    message: format!("malformed number literal `{text}`"),
                })?;
                self.pos = end;
                Tok::Num(v)
            }
            b'a'..=b'z' | b'A'..=b'Z' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                {
                    end += 1;
                }
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap().to_string();
                self.pos = end;
                Tok::Ident(text)
            }
            other => {
                return Err(Error::Parse {
                    offset: start,
                    message: format!("unknown character `{}`", other as char),
                })
            }
        };
        Ok((tok, start))
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: Option<(Tok, usize)>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            lexer: Lexer::new(src),
            peeked: None,
        }
    }

    fn peek(&mut self) -> Result<&(Tok, usize)> {
        if self.peeked.is_none() {
            self.peeked = Some(self.lexer.next()?);
        }
        Ok(self.peeked.as_ref().unwrap())
    }

    fn advance(&mut self) -> Result<(Tok, usize)> {
        match self.peeked.take() {
            Some(t) => Ok(t),
            None => self.lexer.next(),
        }
    }

    fn expr(&mut self) -> Result<Expression> {
        let mut lhs = self.term()?;
        loop {
            match self.peek()?.0 {
                Tok::Plus => {
                    self.advance()?;
                    let rhs = self.term()?;
                    lhs = Expression::Binary(BinOp::Add, Box::new(lhs), Box::new(rhs));
                }
                Tok::Minus => {
                    self.advance()?;
                    let rhs = self.term()?;
                    lhs = Expression::Binary(BinOp::Sub, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expression> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek()?.0 {
                Tok::Star => {
                    self.advance()?;
                    let rhs = self.factor()?;
                    lhs = Expression::Binary(BinOp::Mul, Box::new(lhs), Box::new(rhs));
                }
                Tok::Slash => {
                    self.advance()?;
                    let rhs = self.factor()?;
                    lhs = Expression::Binary(BinOp::Div, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expression> {
        if matches!(self.peek()?.0, Tok::Minus) {
            self.advance()?;
            let p = self.power()?;
            return Ok(Expression::Neg(Box::new(p)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expression> {
        let mut base = self.atom()?;
        while matches!(self.peek()?.0, Tok::Caret) {
            self.advance()?;
            let (tok, off) = self.advance()?;
            match tok {
                Tok::Num(c) => {
                    base = Expression::Pow(Box::new(base), c);
                }
                _ => {
                    return Err(Error::Parse {
                        offset: off,
                        message: "exponent must be a literal number".into(),
                    })
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expression> {
        let (tok, off) = self.advance()?;
        match tok {
            Tok::Num(v) => Ok(Expression::Literal(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                let (close, coff) = self.advance()?;
                if close != Tok::RParen {
                    return Err(Error::Parse {
                        offset: coff,
                        message: "expected `)`".into(),
                    });
                }
                Ok(inner)
            }
            Tok::Ident(name) => {
                if matches!(self.peek()?.0, Tok::LParen) {
                    let func = match name.as_str() {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        "exp" => Func::Exp,
                        "log" => Func::Log,
                        "sqrt" => Func::Sqrt,
                        _ => {
                            return Err(Error::Parse {
                                offset: off,
                                message: format!("unknown function `{name}`"),
                            })
                        }
                    };
                    self.advance()?; // (
                    let arg = self.expr()?;
                    let (close, coff) = self.advance()?;
                    if close != Tok::RParen {
                        return Err(Error::Parse {
                            offset: coff,
                            message: "expected `)`".into(),
                        });
                    }
                    Ok(Expression::Call(func, Box::new(arg)))
                } else if let Some(idx) = coordinate_index(&name) {
                    Ok(Expression::Coordinate(idx))
                } else {
                    Ok(Expression::Parameter(name))
                }
            }
            Tok::Eof => Err(Error::Parse {
                offset: off,
                message: "unexpected end of input".into(),
            }),
            other => Err(Error::Parse {
                offset: off,
                message: format!("unexpected token {other:?}"),
            }),
        }
    }
}

fn coordinate_index(name: &str) -> Option<usize> {
    let b = name.as_bytes();
    if b.len() == 2 && b[0] == b'x' && (b'1'..=b'9').contains(&b[1]) {
        Some((b[1] - b'1') as usize)
    } else {
        None
    }
}

/// Parse `text` into an expression tree.
pub fn parse(text: &str) -> Result<Expression> {
    if text.trim().is_empty() {
        return Err(Error::Parse {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let mut p = Parser::new(text);
    let e = p.expr()?;
    let (tok, off) = p.advance()?;
    if tok != Tok::Eof {
        return Err(Error::Parse {
            offset: off,
            message: format!("trailing input: unexpected {tok:?}"),
        });
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Supplies coordinate/parameter bindings and constants for one evaluation.
pub trait EvalContext<T: Scalar> {
    fn coordinate(&self, index: usize) -> Result<T>;
    fn parameter(&self, name: &str) -> Result<T>;
    fn constant(&self, v: f64) -> T;
}

pub fn eval_with<T: Scalar>(e: &Expression, ctx: &dyn EvalContext<T>) -> Result<T> {
    match e {
        Expression::Literal(v) => Ok(ctx.constant(*v)),
        Expression::Coordinate(i) => ctx.coordinate(*i),
        Expression::Parameter(n) => ctx.parameter(n),
        Expression::Neg(a) => Ok(eval_with(a, ctx)?.neg()),
        Expression::Binary(op, a, b) => {
            let x = eval_with(a, ctx)?;
            let y = eval_with(b, ctx)?;
            match op {
                BinOp::Add => Ok(x.add(&y)),
                BinOp::Sub => Ok(x.sub(&y)),
                BinOp::Mul => Ok(x.mul(&y)),
                BinOp::Div => x.div(&y),
            }
        }
        Expression::Pow(a, c) => eval_with(a, ctx)?.powc(*c),
        Expression::Call(func, a) => {
            let x = eval_with(a, ctx)?;
            match func {
                Func::Sin => Ok(x.sin()),
                Func::Cos => Ok(x.cos()),
                Func::Exp => Ok(x.exp()),
                Func::Log => x.ln(),
                Func::Sqrt => x.sqrt(),
            }
        }
    }
}

/// Name→value table for late-bound parameters.
pub type ParamTable = std::collections::BTreeMap<String, f64>;

struct RealContext<'a> {
    point: &'a [f64],
    params: &'a ParamTable,
}

impl<'a> EvalContext<f64> for RealContext<'a> {
    fn coordinate(&self, index: usize) -> Result<f64> {
        self.point.get(index).copied().ok_or_else(|| {
            Error::input(format!(
                "coordinate x{} out of range for chart dimension {}",
                index + 1,
                self.point.len()
            ))
        })
    }
    fn parameter(&self, name: &str) -> Result<f64> {
        self.params
            .get(name)
            .copied()
            .ok_or_else(|| Error::Eval(format!("unbound parameter `{name}`")))
    }
    fn constant(&self, v: f64) -> f64 {
        v
    }
}

struct JetContext<'a> {
    point: &'a [f64],
    params: &'a ParamTable,
}

impl<'a> EvalContext<Jet3> for JetContext<'a> {
    fn coordinate(&self, index: usize) -> Result<Jet3> {
        Jet3::seed_variable(index, self.point)
    }
    fn parameter(&self, name: &str) -> Result<Jet3> {
        let v = self
            .params
            .get(name)
            .copied()
            .ok_or_else(|| Error::Eval(format!("unbound parameter `{name}`")))?;
        Ok(Jet3::constant(self.point.len(), v))
    }
    fn constant(&self, v: f64) -> Jet3 {
        Jet3::constant(self.point.len(), v)
    }
}

/// Plain real evaluation at `point` with the given parameter table.
pub fn evaluate(e: &Expression, point: &[f64], params: &ParamTable) -> Result<f64> {
    eval_with(e, &RealContext { point, params })
}

/// Jet evaluation; the value component equals [`evaluate`].
pub fn evaluate_jet(e: &Expression, point: &[f64], params: &ParamTable) -> Result<Jet3> {
    eval_with(e, &JetContext { point, params })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(pairs: &[(&str, f64)]) -> ParamTable {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn structure_of_simple_expression() {
        let e = parse("1 + eps*cos(x1)").unwrap();
        match &e {
            Expression::Binary(BinOp::Add, a, b) => {
                assert_eq!(**a, Expression::Literal(1.0));
                match &**b {
                    Expression::Binary(BinOp::Mul, p, c) => {
                        assert_eq!(**p, Expression::Parameter("eps".into()));
                        assert_eq!(
                            **c,
                            Expression::Call(Func::Cos, Box::new(Expression::Coordinate(0)))
                        );
                    }
                    other => panic!("unexpected rhs {other:?}"),
                }
            }
            other => panic!("unexpected tree {other:?}"),
        }
    }

    #[test]
    fn unbalanced_paren_offset() {
        let err = parse("sin(x1").unwrap_err();
        match err {
            Error::Parse { offset, .. } => assert_eq!(offset, 6),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn caret_left_associative() {
        let e = parse("2^3^2").unwrap();
        let v = evaluate(&e, &[0.0], &ParamTable::new()).unwrap();
        assert_eq!(v, 64.0);
    }

    #[test]
    fn evaluate_examples() {
        let t = ParamTable::new();
        assert_eq!(evaluate(&parse("exp(0*x1)").unwrap(), &[2.2], &t).unwrap(), 1.0);
        let v = evaluate(
            &parse("1 + eps*cos(x1)").unwrap(),
            &[0.0],
            &params(&[("eps", 0.3)]),
        )
        .unwrap();
        assert!((v - 1.3).abs() < 1e-15);
        assert!(evaluate(&parse("log(x1)").unwrap(), &[0.0], &t).is_err());
        assert!(evaluate(&parse("1 + q").unwrap(), &[0.0], &t).is_err());
    }

    #[test]
    fn jet_value_matches_evaluate_and_product_rule() {
        let t = ParamTable::new();
        let e = parse("x1*x2").unwrap();
        let j = evaluate_jet(&e, &[2.0, 3.0], &t).unwrap();
        assert_eq!(j.v, 6.0);
        assert_eq!(j.grad(0), 3.0);
        assert_eq!(j.grad(1), 2.0);
        assert_eq!(j.hess(0, 1), 1.0);
        let c = evaluate_jet(&parse("cos(x1)").unwrap(), &[0.0], &t).unwrap();
        assert_eq!(c.grad(0), 0.0);
        assert_eq!(c.hess(0, 0), -1.0);
    }

    #[test]
    fn x10_is_a_parameter_not_a_coordinate() {
        let e = parse("x10").unwrap();
        assert_eq!(e, Expression::Parameter("x10".into()));
    }

    #[test]
    fn pretty_print_round_trip_is_fixed_point() {
        for src in [
            "1 + eps*cos(x1)",
            "-x1^2 + 3*(x2 - 4/x1)",
            "sqrt(2 + sin(x1)*sin(x1))",
            "x1^2^3",
            "1/(2+cos(x2))",
        ] {
            let e1 = parse(src).unwrap();
            let printed = e1.to_string();
            let e2 = parse(&printed).unwrap();
            assert_eq!(e1, e2, "round trip failed for {src}");
            assert_eq!(printed, e2.to_string());
        }
    }

    #[test]
    fn jet_gradient_matches_finite_differences() {
        let t = params(&[("a", 0.7)]);
        let e = parse("exp(sin(x1*x2) + a*x2) / (2 + cos(x1))").unwrap();
        let p = [0.4, -1.1];
        let j = evaluate_jet(&e, &p, &t).unwrap();
        let h = 1e-4;
        for i in 0..2 {
            let mut pp = p;
            let mut pm = p;
            pp[i] += h;
            pm[i] -= h;
            let fd = (evaluate(&e, &pp, &t).unwrap() - evaluate(&e, &pm, &t).unwrap()) / (2.0 * h);
            let rel = (j.grad(i) - fd).abs() / fd.abs().max(1e-12);
            assert!(rel < 1e-6, "axis {i}: jet {} fd {}", j.grad(i), fd);
        }
    }
}
