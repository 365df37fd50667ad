//! Expression language for generators, elements and generalized
//! polynomials.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor ("*" factor)*
//! factor := "-" factor | atom ("^" nat)?
//! atom   := rational | "sqrt(" nat ")" | "theta" | ident
//!         | "floor(" expr ")" | "frac(" expr ")" | "(" expr ")"
//! ```
//!
//! There is no division. A rational literal `p/q` may only open a term,
//! as in `1/36*(t^2-25)`; decimals such as `0.30103` are exact rationals.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::field::{FieldElem, NumberField, PrecisionCtx};
use crate::poly::IntPoly;
use crate::puiseux::PuiseuxPoly;
use crate::scalar::{Domain, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Num(BigRational),
    Theta,
    Sqrt(u64),
    Ident(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
    Floor(Box<Expr>),
    Frac(Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    // the flag records a `p/q` spelling
    Num(BigRational, bool),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    Slash,
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

fn syntax(pos: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { pos, msg: msg.into() }
}

impl Lexer {
    fn new(src: &str) -> Result<Self> {
        let chars: Vec<char> = src.chars().collect();
        let mut toks = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let pos = i + 1;
            match c {
                ' ' | '\t' | '\r' | '\n' => {
                    i += 1;
                    continue;
                }
                '+' => toks.push((Tok::Plus, pos)),
                '-' => toks.push((Tok::Minus, pos)),
                '*' => toks.push((Tok::Star, pos)),
                '^' => toks.push((Tok::Caret, pos)),
                '(' => toks.push((Tok::LParen, pos)),
                ')' => toks.push((Tok::RParen, pos)),
                '/' => toks.push((Tok::Slash, pos)),
                d if d.is_ascii_digit() || d == '.' => {
                    let start = i;
                    while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                        i += 1;
                    }
                    let text: String = chars[start..i].iter().collect();
                    toks.push((Tok::Num(parse_decimal(&text, pos)?, false), pos));
                    continue;
                }
                a if a.is_ascii_alphabetic() || a == '_' => {
                    let start = i;
                    while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                        i += 1;
                    }
                    toks.push((Tok::Ident(chars[start..i].iter().collect()), pos));
                    continue;
                }
                other => return Err(syntax(pos, format!("unexpected character `{other}`"))),
            }
            i += 1;
        }
        toks.push((Tok::End, chars.len() + 1));
        // fold `int / int` into one rational literal
        let mut folded: Vec<(Tok, usize)> = Vec::new();
        let mut it = toks.into_iter().peekable();
        while let Some((t, pos)) = it.next() {
            if let Tok::Slash = t {
                let num = match folded.pop() {
                    Some((Tok::Num(q, false), p)) if q.is_integer() => (q, p),
                    _ => return Err(syntax(pos, "division is not supported; write a rational literal p/q")),
                };
                match it.next() {
                    Some((Tok::Num(d, false), dpos)) if d.is_integer() => {
                        if d.is_zero() {
                            return Err(syntax(dpos, "zero denominator"));
                        }
                        folded.push((Tok::Num(num.0 / d, true), num.1));
                    }
                    Some((_, p)) => return Err(syntax(p, "expected an integer denominator")),
                    None => return Err(syntax(pos, "expected an integer denominator")),
                }
                continue;
            }
            folded.push((t, pos));
        }
        Ok(Lexer { toks: folded })
    }
}

fn parse_decimal(text: &str, pos: usize) -> Result<BigRational> {
    let (int, frac) = match text.split_once('.') {
        Some((a, b)) => (a, b),
        None => (text, ""),
    };
    if frac.contains('.') || (int.is_empty() && frac.is_empty()) {
        return Err(syntax(pos, format!("malformed number `{text}`")));
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = digits.parse().map_err(|_| syntax(pos, format!("malformed number `{text}`")))?;
    let d = num_traits::pow(BigInt::from(10), frac.len());
    Ok(BigRational::new(n, d))
}

/// Parses the same decimal / `p/q` forms the expression lexer accepts.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let text = text.trim();
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest.trim()),
        None => (false, text),
    };
    let q = match body.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().map_err(|_| syntax(1, format!("malformed rational `{text}`")))?;
            let b: BigInt = b.trim().parse().map_err(|_| syntax(1, format!("malformed rational `{text}`")))?;
            if b.is_zero() {
                return Err(syntax(1, "zero denominator"));
            }
            BigRational::new(a, b)
        }
        None => parse_decimal(body, 1)?,
    };
    Ok(if neg { -q } else { q })
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.pos(), format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor(true)?;
        while *self.peek() == Tok::Star {
            self.bump();
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor(false)?));
        }
        Ok(lhs)
    }

    fn factor(&mut self, lead: bool) -> Result<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor(lead)?)));
        }
        let base = self.atom(lead)?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let e = self.nat("exponent")?;
            let e = e.to_u32().ok_or_else(|| syntax(self.pos(), "exponent too large"))?;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn nat(&mut self, what: &str) -> Result<BigInt> {
        let pos = self.pos();
        match self.bump() {
            (Tok::Num(q, false), _) if q.is_integer() => Ok(q.to_integer()),
            _ => Err(syntax(pos, format!("expected a natural number as {what}"))),
        }
    }

    fn call(&mut self) -> Result<Expr> {
        self.expect(Tok::LParen, "`(`")?;
        let inner = self.expr()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(inner)
    }

    fn atom(&mut self, lead: bool) -> Result<Expr> {
        let pos = self.pos();
        match self.bump() {
            (Tok::Num(q, slash), _) => {
                if slash && !lead {
                    return Err(syntax(
                        pos,
                        "a rational literal p/q must open its term (write 1/36*(...), not (...)*1/36)",
                    ));
                }
                Ok(Expr::Num(q))
            }
            (Tok::LParen, _) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            (Tok::Ident(name), _) => match name.as_str() {
                "theta" => Ok(Expr::Theta),
                "sqrt" => {
                    self.expect(Tok::LParen, "`(`")?;
                    let npos = self.pos();
                    let n = self.nat("square-root argument")?;
                    self.expect(Tok::RParen, "`)`")?;
                    match n.to_u64() {
                        Some(n) if n > 0 => Ok(Expr::Sqrt(n)),
                        _ => Err(syntax(npos, "sqrt takes a positive integer literal")),
                    }
                }
                "floor" => Ok(Expr::Floor(Box::new(self.call()?))),
                "frac" => Ok(Expr::Frac(Box::new(self.call()?))),
                _ => Ok(Expr::Ident(name)),
            },
            (Tok::End, _) => Err(syntax(pos, "unexpected end of input")),
            (t, _) => Err(syntax(pos, format!("unexpected {}", tok_name(&t)))),
        }
    }
}

fn tok_name(t: &Tok) -> &'static str {
    match t {
        Tok::Num(..) => "number",
        Tok::Ident(_) => "identifier",
        Tok::Plus => "`+`",
        Tok::Minus => "`-`",
        Tok::Star => "`*`",
        Tok::Caret => "`^`",
        Tok::LParen => "`(`",
        Tok::RParen => "`)`",
        Tok::Slash => "`/`",
        Tok::End => "end of input",
    }
}

/// Parses a whole expression; positions in errors are 1-based columns.
pub fn parse_expr(text: &str) -> Result<Expr> {
    let lx = Lexer::new(text)?;
    let mut p = Parser { toks: lx.toks, at: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(syntax(p.pos(), format!("unexpected {}", tok_name(p.peek()))));
    }
    Ok(e)
}

impl Expr {
    /// Number of leaves.
    pub fn leaves(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Theta | Expr::Sqrt(_) | Expr::Ident(_) => 1,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.leaves() + b.leaves(),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Floor(a) | Expr::Frac(a) => a.leaves(),
        }
    }

    /// Identifiers in first-occurrence order.
    pub fn idents(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Ident(s) => {
                    if !out.contains(s) {
                        out.push(s.clone());
                    }
                }
                Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Expr::Neg(a) | Expr::Pow(a, _) | Expr::Floor(a) | Expr::Frac(a) => walk(a, out),
                _ => {}
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    /// Text that parses back to an equal tree.
    pub fn render(&self) -> String {
        let mut s = String::new();
        self.write(&mut s, true);
        s
    }

    fn write(&self, out: &mut String, lead: bool) {
        let paren = |e: &Expr, out: &mut String, wrap: bool, lead: bool| {
            if wrap {
                out.push('(');
                e.write(out, true);
                out.push(')');
            } else {
                e.write(out, lead);
            }
        };
        match self {
            Expr::Num(q) => {
                if q.is_integer() && !q.numer().is_negative_int() {
                    out.push_str(&q.numer().to_string());
                } else if lead && !q.numer().is_negative_int() {
                    out.push_str(&format!("{}/{}", q.numer(), q.denom()));
                } else {
                    out.push_str(&format!("({}/{})", q.numer(), q.denom()));
                }
            }
            Expr::Theta => out.push_str("theta"),
            Expr::Sqrt(n) => out.push_str(&format!("sqrt({n})")),
            Expr::Ident(s) => out.push_str(s),
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                a.write(out, true);
                out.push(if matches!(self, Expr::Add(..)) { '+' } else { '-' });
                paren(b, out, matches!(**b, Expr::Add(..) | Expr::Sub(..)), true);
            }
            Expr::Mul(a, b) => {
                paren(a, out, matches!(**a, Expr::Add(..) | Expr::Sub(..)), lead);
                out.push('*');
                paren(b, out, matches!(**b, Expr::Add(..) | Expr::Sub(..) | Expr::Mul(..)), false);
            }
            Expr::Neg(a) => {
                out.push('-');
                paren(a, out, matches!(**a, Expr::Add(..) | Expr::Sub(..) | Expr::Mul(..)), lead);
            }
            Expr::Pow(a, e) => {
                let atomic = matches!(&**a, Expr::Num(q) if q.is_integer())
                    || matches!(**a, Expr::Theta | Expr::Sqrt(_) | Expr::Ident(_) | Expr::Floor(_) | Expr::Frac(_));
                paren(a, out, !atomic, lead);
                out.push_str(&format!("^{e}"));
            }
            Expr::Floor(a) => {
                out.push_str("floor(");
                a.write(out, true);
                out.push(')');
            }
            Expr::Frac(a) => {
                out.push_str("frac(");
                a.write(out, true);
                out.push(')');
            }
        }
    }
}

trait NegInt {
    fn is_negative_int(&self) -> bool;
}

impl NegInt for BigInt {
    fn is_negative_int(&self) -> bool {
        self.sign() == num_bigint::Sign::Minus
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Resolves `sqrt(n)` in the ambient field.
pub fn sqrt_in(field: &NumberField, n: u64) -> Result<FieldElem> {
    field
        .sqrt_of(&BigInt::from(n))
        .ok_or_else(|| Error::Invalid(format!("sqrt({n}) does not lie in the coefficient field")))
}

/// Builds a Puiseux polynomial; `lookup` resolves identifiers (t, symbols,
/// generator names). floor/frac use the Puiseux integer part.
pub fn to_puiseux(
    e: &Expr,
    dom: &std::sync::Arc<Domain>,
    lookup: &dyn Fn(&str) -> Option<PuiseuxPoly>,
    ctx: &PrecisionCtx,
) -> Result<PuiseuxPoly> {
    let rec = |x: &Expr| to_puiseux(x, dom, lookup, ctx);
    Ok(match e {
        Expr::Num(q) => PuiseuxPoly::constant(Scalar::from_rational(dom, q.clone())),
        Expr::Theta => PuiseuxPoly::constant(Scalar::theta(dom)),
        Expr::Sqrt(n) => PuiseuxPoly::constant(Scalar::from_field(dom, sqrt_in(&dom.field, *n)?)),
        Expr::Ident(s) => lookup(s).ok_or_else(|| Error::UnknownIdent(s.clone()))?,
        Expr::Add(a, b) => rec(a)?.try_add(&rec(b)?)?,
        Expr::Sub(a, b) => rec(a)?.try_sub(&rec(b)?)?,
        Expr::Mul(a, b) => rec(a)?.try_mul(&rec(b)?)?,
        Expr::Neg(a) => -rec(a)?,
        Expr::Pow(a, k) => rec(a)?.pow(*k),
        Expr::Floor(a) => rec(a)?.integer_part(ctx)?,
        Expr::Frac(a) => {
            let v = rec(a)?;
            let ip = v.integer_part(ctx)?;
            v.try_sub(&ip)?
        }
    })
}

/// Evaluates to an element of Q(theta); `lookup` gives identifier values.
pub fn to_field(
    e: &Expr,
    field: &NumberField,
    lookup: &dyn Fn(&str) -> Option<FieldElem>,
    ctx: &PrecisionCtx,
) -> Result<FieldElem> {
    let rec = |x: &Expr| to_field(x, field, lookup, ctx);
    Ok(match e {
        Expr::Num(q) => FieldElem::from_rational(q.clone()),
        Expr::Theta => field.theta(),
        Expr::Sqrt(n) => sqrt_in(field, *n)?,
        Expr::Ident(s) => lookup(s).ok_or_else(|| Error::UnknownIdent(s.clone()))?,
        Expr::Add(a, b) => rec(a)?.add(&rec(b)?),
        Expr::Sub(a, b) => rec(a)?.sub(&rec(b)?),
        Expr::Mul(a, b) => field.mul(&rec(a)?, &rec(b)?),
        Expr::Neg(a) => rec(a)?.neg(),
        Expr::Pow(a, k) => field.pow(&rec(a)?, *k),
        Expr::Floor(a) => FieldElem::from_int(field.floor(&rec(a)?, ctx)?),
        Expr::Frac(a) => field.frac(&rec(a)?, ctx)?.0,
    })
}

/// Reads an expression as an integer polynomial in `nvars` variables.
/// Only integer literals, variables, +, -, * and ^ are allowed; anything
/// else means the value is not visibly in the ring.
pub fn to_int_poly(e: &Expr, nvars: usize, var: &dyn Fn(&str) -> Option<usize>) -> Result<IntPoly> {
    let rec = |x: &Expr| to_int_poly(x, nvars, var);
    let one = IntPoly::int_constant(nvars, 1);
    Ok(match e {
        Expr::Num(q) if q.is_integer() => IntPoly::constant(nvars, q.to_integer()),
        Expr::Ident(s) => match var(s) {
            Some(i) => IntPoly::int_var(nvars, i),
            None => return Err(Error::UnknownIdent(s.clone())),
        },
        Expr::Add(a, b) => rec(a)?.add(&rec(b)?),
        Expr::Sub(a, b) => rec(a)?.sub(&rec(b)?),
        Expr::Mul(a, b) => IntPoly::mul(&rec(a)?, &rec(b)?),
        Expr::Neg(a) => rec(a)?.neg(),
        Expr::Pow(a, k) => rec(a)?.pow(*k, &one),
        other => {
            return Err(Error::NotInRing(format!(
                "`{}` is not an integer polynomial in the generators",
                other.render()
            )))
        }
    })
}
