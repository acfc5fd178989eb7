//! A small expression language for defining scalar fields from the command
//! line: variables `x1..xn`, real literals, `+ - * / ^` with unary minus,
//! and the functions `exp`, `log`, `sqrt`, `abs`, `min`, `max`.
//!
//! Precedence, tightest first: `^` (right-associative), unary `-`, `* /`,
//! `+ -`. Evaluation is IEEE double with a fixed left-to-right operand
//! order, so results are reproducible.

use std::fmt;

use thiserror::Error;

use crate::field::ScalarField;

#[derive(Debug, Error, PartialEq)]
#[error("parse error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("overflow: intermediate value is not finite")]
    Overflow,
    #[error("expression uses x{needed} but the point has dimension {got}")]
    Dimension { needed: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Abs,
    Min,
    Max,
}

impl Func {
    fn name(&self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn arity(&self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }
}

/// Abstract syntax tree. Variables are stored 0-based (`x1` is `Var(0)`).
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    /// Smallest dimension a point must have for evaluation (one past the
    /// largest variable index), 0 for constant expressions.
    pub fn min_dim(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(e) => e.min_dim(),
            Expr::Bin(_, a, b) => a.min_dim().max(b.min_dim()),
            Expr::Call(_, args) => args.iter().map(|a| a.min_dim()).max().unwrap_or(0),
        }
    }
}

// ---------------------------------------------------------------- lexing

#[derive(Clone, Debug, PartialEq)]
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
    Comma,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((Tok::Plus, i));
                i += 1;
            }
            '-' => {
                out.push((Tok::Minus, i));
                i += 1;
            }
            '*' => {
                out.push((Tok::Star, i));
                i += 1;
            }
            '/' => {
                out.push((Tok::Slash, i));
                i += 1;
            }
            '^' => {
                out.push((Tok::Caret, i));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, i));
                i += 1;
            }
            ',' => {
                out.push((Tok::Comma, i));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
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
                let text = &src[start..i];
                let value = text.parse::<f64>().map_err(|_| ParseError {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                out.push((Tok::Num(value), start));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
            }
            _ => {
                return Err(ParseError {
                    offset: i,
                    message: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    Ok(out)
}

// --------------------------------------------------------------- parsing

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|&(_, o)| o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(ParseError { offset: self.offset(), message: format!("expected {what}") })
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    // unary minus sits between `* /` and `^`, so `-x^2` is `-(x^2)` while
    // the exponent itself may carry a sign: `2^-3`
    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            let inner = self.factor()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let exponent = self.factor()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Num(v)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                if self.peek() == Some(&Tok::LParen) {
                    let func = Func::from_name(&name).ok_or_else(|| ParseError {
                        offset,
                        message: format!("unknown function `{name}`"),
                    })?;
                    self.pos += 1;
                    let mut args = vec![self.expr()?];
                    while self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    if args.len() != func.arity() {
                        return Err(ParseError {
                            offset,
                            message: format!(
                                "`{}` takes {} argument(s), got {}",
                                func.name(),
                                func.arity(),
                                args.len()
                            ),
                        });
                    }
                    Ok(Expr::Call(func, args))
                } else {
                    parse_var(&name).ok_or_else(|| ParseError {
                        offset,
                        message: format!("unknown identifier `{name}` (variables are x1, x2, ...)"),
                    })
                }
            }
            Some(_) => Err(ParseError { offset, message: "expected an expression".into() }),
            None => Err(ParseError { offset, message: "unexpected end of input".into() }),
        }
    }
}

fn parse_var(name: &str) -> Option<Expr> {
    let rest = name.strip_prefix('x')?;
    let idx: usize = rest.parse().ok()?;
    if idx >= 1 && rest.chars().all(|c| c.is_ascii_digit()) {
        Some(Expr::Var(idx - 1))
    } else {
        None
    }
}

/// Parse an expression; errors carry the byte offset of the offending token.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks: &toks, pos: 0, end: src.len() };
    let e = p.expr()?;
    if p.pos != toks.len() {
        return Err(ParseError { offset: p.offset(), message: "trailing input".into() });
    }
    Ok(e)
}

// ------------------------------------------------------------ evaluation

fn check_finite(v: f64, what: &str) -> Result<f64, EvalError> {
    if v.is_nan() {
        Err(EvalError::DomainError(format!("{what} produced NaN")))
    } else if v.is_infinite() {
        Err(EvalError::Overflow)
    } else {
        Ok(v)
    }
}

/// Evaluate at a point, left-to-right operand order.
pub fn eval(e: &Expr, x: &[f64]) -> Result<f64, EvalError> {
    match e {
        Expr::Num(v) => Ok(*v),
        Expr::Var(i) => {
            if *i < x.len() {
                Ok(x[*i])
            } else {
                Err(EvalError::Dimension { needed: i + 1, got: x.len() })
            }
        }
        Expr::Neg(inner) => Ok(-eval(inner, x)?),
        Expr::Bin(op, a, b) => {
            let lhs = eval(a, x)?;
            let rhs = eval(b, x)?;
            let v = match op {
                BinOp::Add => lhs + rhs,
                BinOp::Sub => lhs - rhs,
                BinOp::Mul => lhs * rhs,
                BinOp::Div => lhs / rhs,
                BinOp::Pow => lhs.powf(rhs),
            };
            check_finite(v, op_name(*op))
        }
        Expr::Call(func, args) => {
            let a = eval(&args[0], x)?;
            match func {
                Func::Exp => check_finite(a.exp(), "exp"),
                Func::Log => {
                    if a <= 0.0 {
                        Err(EvalError::DomainError(format!("log of non-positive value {a}")))
                    } else {
                        check_finite(a.ln(), "log")
                    }
                }
                Func::Sqrt => {
                    if a < 0.0 {
                        Err(EvalError::DomainError(format!("sqrt of negative value {a}")))
                    } else {
                        Ok(a.sqrt())
                    }
                }
                Func::Abs => Ok(a.abs()),
                Func::Min | Func::Max => {
                    let b = eval(&args[1], x)?;
                    Ok(if matches!(func, Func::Min) { a.min(b) } else { a.max(b) })
                }
            }
        }
    }
}

fn op_name(op: BinOp) -> &'static str {
    match op {
        BinOp::Add => "+",
        BinOp::Sub => "-",
        BinOp::Mul => "*",
        BinOp::Div => "/",
        BinOp::Pow => "^",
    }
}

// -------------------------------------------------------------- printing

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Bin(BinOp::Pow, ..) => 4,
        _ => 5,
    }
}

struct Printed<'a>(&'a Expr);

impl fmt::Display for Printed<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, need: bool) -> fmt::Result {
            if need {
                write!(f, "(")?;
                write!(f, "{}", Printed(e))?;
                write!(f, ")")
            } else {
                write!(f, "{}", Printed(e))
            }
        }
        match self.0 {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(inner) => {
                write!(f, "-")?;
                wrap(f, inner, prec(inner) < 3)
            }
            Expr::Bin(op, a, b) => {
                let p = prec(self.0);
                match op {
                    BinOp::Pow => {
                        // right-associative: parenthesize the base at equal
                        // precedence, let the exponent nest freely
                        wrap(f, a, prec(a) <= p)?;
                        write!(f, " ^ ")?;
                        wrap(f, b, prec(b) < p)
                    }
                    _ => {
                        wrap(f, a, prec(a) < p)?;
                        write!(f, " {} ", op_name(*op))?;
                        // `-` and `/` do not associate on the right
                        let rhs_needs = match op {
                            BinOp::Add | BinOp::Mul => prec(b) < p,
                            _ => prec(b) <= p,
                        };
                        wrap(f, b, rhs_needs)
                    }
                }
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", Printed(a))?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Render with minimal parentheses; reparsing yields the same tree as long
/// as no literal is negative (unary minus prints as `Neg`).
pub fn to_text(e: &Expr) -> String {
    Printed(e).to_string()
}

/// Wrap a parsed expression as a scalar field of the given dimension.
/// Evaluation errors surface as NaN; the CLI pre-checks evaluability on the
/// sample lattice before running a mode.
pub fn field_from_expr(e: Expr, dim: usize) -> ScalarField<f64> {
    assert!(e.min_dim() <= dim, "expression refers past the declared dimension");
    ScalarField::new(dim, move |x: &[f64]| eval(&e, x).unwrap_or(f64::NAN))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, x: &[f64]) -> f64 {
        eval(&parse(src).unwrap(), x).unwrap()
    }

    #[test]
    fn evaluates_the_worked_polynomials() {
        assert_eq!(ev("x1^3*x2 + x1*x2^3", &[1.0, 1.0]), 2.0);
        assert_eq!(ev("x1^4", &[-1.0, 7.0]), 1.0);
        assert_eq!(ev("exp(0)", &[]), 1.0);
        let v = ev("x2/(1 - x1*x2)", &[0.5, 0.5]);
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn reports_the_offset_of_a_malformed_token() {
        let err = parse("x1 + * x2").unwrap_err();
        assert_eq!(err.offset, 5);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("-2^2", &[]), -4.0);
        assert_eq!(ev("2^-2", &[]), 0.25);
        assert_eq!(ev("2^3^2", &[]), 512.0);
        assert_eq!(ev("1 - 2 - 3", &[]), -4.0);
        assert_eq!(ev("12/3/2", &[]), 2.0);
        assert_eq!(ev("1 + 2*3", &[]), 7.0);
        assert_eq!(ev("min(1, 2) + max(3, 4)", &[]), 5.0);
    }

    #[test]
    fn domain_errors_and_overflow() {
        let log_neg = eval(&parse("log(x1)").unwrap(), &[-1.0]);
        assert!(matches!(log_neg, Err(EvalError::DomainError(_))));
        let sqrt_neg = eval(&parse("sqrt(0 - 2)").unwrap(), &[]);
        assert!(matches!(sqrt_neg, Err(EvalError::DomainError(_))));
        let overflow = eval(&parse("exp(1000)").unwrap(), &[]);
        assert_eq!(overflow, Err(EvalError::Overflow));
        let div = eval(&parse("1/0").unwrap(), &[]);
        assert_eq!(div, Err(EvalError::Overflow));
        let frac_pow = eval(&parse("(0-8)^0.5").unwrap(), &[]);
        assert!(matches!(frac_pow, Err(EvalError::DomainError(_))));
    }

    #[test]
    fn dimension_is_checked_at_evaluation() {
        let e = parse("x3 + 1").unwrap();
        assert_eq!(e.min_dim(), 3);
        assert_eq!(eval(&e, &[1.0, 2.0]), Err(EvalError::Dimension { needed: 3, got: 2 }));
    }

    #[test]
    fn parse_failures_carry_messages() {
        assert!(parse("").is_err());
        assert!(parse("x1 +").is_err());
        assert!(parse("(x1").is_err());
        assert!(parse("foo(1)").is_err());
        assert!(parse("min(1)").is_err());
        assert!(parse("x0").is_err());
        assert!(parse("x1 x2").is_err());
        assert!(parse("1..2").is_err());
    }

    #[test]
    fn printing_reparses_to_the_same_tree() {
        for src in [
            "x1^3*x2 + x1*x2^3",
            "-x1^2 - x2^2",
            "min(x1, max(x2, 0.5))",
            "2^-2 + (1 - x1)/(1 + x2)",
            "sqrt(abs(x1))^0.3",
            "1 - 2 - 3",
            "(2^3)^2",
        ] {
            let tree = parse(src).unwrap();
            let printed = to_text(&tree);
            let reparsed = parse(&printed).unwrap_or_else(|e| {
                panic!("printed form `{printed}` failed to parse: {e}")
            });
            assert_eq!(reparsed, tree, "printed `{printed}`");
        }
    }
}
