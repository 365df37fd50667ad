//! Workspace files: a line-oriented, sectioned text format.
//!
//! ```text
//! # the ring Z[t, sqrt(2)*t - r1, 2*sqrt(2)*r1*t - r2]
//! [field]
//! minpoly = 1, 0, -2      # descending coefficients
//! bracket = 1, 2          # isolating interval for theta
//!
//! [symbols]
//! r1 = 0.30103            # shadow value; add `real` to lift the [0,1) rule
//! r2 = 1/3
//!
//! [generators]            # or [sequence] for a special sequence
//! g0 = t
//! g1 = sqrt(2)*t - r1
//! g2 = 2*sqrt(2)*r1*t - r2
//!
//! [padic]
//! primes = 2, 3
//! precision = 10
//! precision @ 3 = 12
//! g1 @ 3 = 7              # explicit image; others default to h_p seeds
//! ```
//!
//! `[field]` may instead say `sqrt = 2`. Without a `[field]` section the
//! coefficient field is Q.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::field::{NumberField, PrecisionCtx};
use crate::genpoly::SpecialSequence;
use crate::padic::{seed_image, PadicAssignment};
use crate::poly::IntPoly;
use crate::puiseux::PuiseuxPoly;
use crate::ringlab::RingPresentation;
use crate::scalar::{Domain, Scalar, SymbolTable};
use crate::syntax::{self, Expr};

const DEFAULT_PRECISION: u32 = 10;
const RESERVED: [&str; 5] = ["t", "theta", "sqrt", "floor", "frac"];

/// Which block the generators came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    Generators,
    Sequence,
}

#[derive(Clone, Debug)]
pub struct WorkspaceSpec {
    dom: Arc<Domain>,
    kind: GenKind,
    names: Vec<String>,
    exprs: Vec<Expr>,
    gens: Vec<PuiseuxPoly>,
    padic: Option<PadicAssignment>,
}

fn err(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Spec { line, col, msg: msg.into() }
}

// One `key = value` entry with source coordinates.
struct Entry {
    line: usize,
    key: String,
    key_col: usize,
    value: String,
    value_col: usize,
}

#[derive(Default)]
struct Sections {
    field: Vec<Entry>,
    symbols: Vec<Entry>,
    gens: Option<(GenKind, usize, Vec<Entry>)>,
    padic: Option<Vec<Entry>>,
}

fn split_sections(text: &str) -> Result<Sections> {
    let mut out = Sections::default();
    let mut current: Option<String> = None;
    let mut seen: Vec<String> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lead = body.len() - body.trim_start().len() + 1;
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(line, lead, "section header must end with `]`"))?
                .trim()
                .to_string();
            if seen.contains(&name) {
                return Err(err(line, lead, format!("section [{name}] appears twice")));
            }
            match name.as_str() {
                "field" | "symbols" => {}
                "generators" | "sequence" => {
                    if out.gens.is_some() {
                        return Err(err(line, lead, "only one of [generators] and [sequence] may appear"));
                    }
                    let kind = if name == "generators" { GenKind::Generators } else { GenKind::Sequence };
                    out.gens = Some((kind, line, Vec::new()));
                }
                "padic" => out.padic = Some(Vec::new()),
                _ => return Err(err(line, lead, format!("unknown section [{name}]"))),
            }
            seen.push(name.clone());
            current = Some(name);
            continue;
        }
        let Some(eq) = body.find('=') else {
            return Err(err(line, lead, "expected `key = value`"));
        };
        let key = body[..eq].trim().to_string();
        if key.is_empty() {
            return Err(err(line, lead, "missing key before `=`"));
        }
        let after = &body[eq + 1..];
        let value = after.trim().to_string();
        let value_col = eq + 2 + (after.len() - after.trim_start().len());
        if value.is_empty() {
            return Err(err(line, eq + 2, format!("missing value for `{key}`")));
        }
        let entry = Entry { line, key, key_col: lead, value, value_col };
        let slot = match current.as_deref() {
            None => return Err(err(line, lead, "entry outside of any section")),
            Some("field") => &mut out.field,
            Some("symbols") => &mut out.symbols,
            Some("generators") | Some("sequence") => &mut out.gens.as_mut().expect("opened").2,
            Some("padic") => out.padic.as_mut().expect("opened"),
            Some(_) => unreachable!("unknown sections are rejected"),
        };
        if slot.iter().any(|e| e.key == entry.key) {
            return Err(err(line, lead, format!("duplicate key `{}`", entry.key)));
        }
        slot.push(entry);
    }
    Ok(out)
}

fn list<'a>(e: &'a Entry) -> impl Iterator<Item = (usize, &'a str)> + 'a {
    let mut offset = 0;
    e.value.split(',').map(move |part| {
        let col = e.value_col + offset + (part.len() - part.trim_start().len());
        offset += part.len() + 1;
        (col, part.trim())
    })
}

fn int_at<T: std::str::FromStr>(line: usize, col: usize, s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| err(line, col, format!("expected {what}, found `{s}`")))
}

fn rational_at(line: usize, col: usize, s: &str) -> Result<BigRational> {
    syntax::parse_rational(s).map_err(|_| err(line, col, format!("expected a rational number, found `{s}`")))
}

fn lift(line: usize, col: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Syntax { pos, msg } => err(line, col + pos - 1, msg),
        Error::Spec { .. } => e,
        other => err(line, col, other.to_string()),
    }
}

fn check_ident(e: &Entry) -> Result<()> {
    let ok = e.key.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && e.key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !ok {
        return Err(err(e.line, e.key_col, format!("`{}` is not an identifier", e.key)));
    }
    if RESERVED.contains(&e.key.as_str()) {
        return Err(err(e.line, e.key_col, format!("`{}` is reserved", e.key)));
    }
    Ok(())
}

fn parse_field(entries: &[Entry]) -> Result<NumberField> {
    let get = |k: &str| entries.iter().find(|e| e.key == k);
    for e in entries {
        if !["minpoly", "bracket", "sqrt"].contains(&e.key.as_str()) {
            return Err(err(e.line, e.key_col, format!("unknown field key `{}`", e.key)));
        }
    }
    if let Some(e) = get("sqrt") {
        if let Some(o) = get("minpoly").or(get("bracket")) {
            return Err(err(o.line, o.key_col, "`sqrt` excludes `minpoly` and `bracket`"));
        }
        let n: u64 = int_at(e.line, e.value_col, &e.value, "a positive integer")?;
        return NumberField::sqrt(n).map_err(|x| err(e.line, e.value_col, x.to_string()));
    }
    match (get("minpoly"), get("bracket")) {
        (None, None) => Ok(NumberField::rationals()),
        (Some(m), Some(b)) => {
            let mut coeffs = list(m)
                .map(|(col, s)| int_at::<BigInt>(m.line, col, s, "an integer coefficient"))
                .collect::<Result<Vec<_>>>()?;
            coeffs.reverse();
            let ends = list(b).map(|(col, s)| rational_at(b.line, col, s)).collect::<Result<Vec<_>>>()?;
            if ends.len() != 2 {
                return Err(err(b.line, b.value_col, "bracket needs exactly two endpoints"));
            }
            NumberField::new(coeffs, ends[0].clone(), ends[1].clone())
                .map_err(|x| err(m.line, m.value_col, x.to_string()))
        }
        (Some(e), None) => Err(err(e.line, e.key_col, "`minpoly` needs a `bracket`")),
        (None, Some(e)) => Err(err(e.line, e.key_col, "`bracket` needs a `minpoly`")),
    }
}

fn parse_symbols(entries: &[Entry]) -> Result<SymbolTable> {
    let mut table = SymbolTable::new();
    for e in entries {
        check_ident(e)?;
        let mut words = e.value.split_whitespace().collect::<Vec<_>>();
        let unit = match words.last() {
            Some(&"real") => {
                words.pop();
                false
            }
            Some(&"unit") => {
                words.pop();
                true
            }
            _ => true,
        };
        let shadow = rational_at(e.line, e.value_col, &words.join(""))?;
        table.push(&e.key, shadow, unit).map_err(|x| err(e.line, e.value_col, x.to_string()))?;
    }
    Ok(table)
}

impl WorkspaceSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let secs = split_sections(text)?;
        let field = parse_field(&secs.field)?;
        let symbols = parse_symbols(&secs.symbols)?;
        let dom = Domain::new(field, symbols);
        let Some((kind, header, entries)) = secs.gens else {
            return Err(err(1, 1, "missing [generators] or [sequence] section"));
        };
        if entries.is_empty() {
            return Err(err(header, 1, "no generators given"));
        }
        let ctx = PrecisionCtx::default();
        let mut names: Vec<String> = Vec::new();
        let mut exprs = Vec::new();
        let mut gens: Vec<PuiseuxPoly> = Vec::new();
        for e in &entries {
            check_ident(e)?;
            if dom.symbols.index_of(&e.key).is_some() {
                return Err(err(e.line, e.key_col, format!("`{}` is already a symbol", e.key)));
            }
            let ast = syntax::parse_expr(&e.value).map_err(lift(e.line, e.value_col))?;
            let lookup = |s: &str| resolve(&dom, &names, &gens, s);
            let value = syntax::to_puiseux(&ast, &dom, &lookup, &ctx).map_err(lift(e.line, e.value_col))?;
            names.push(e.key.clone());
            exprs.push(ast);
            gens.push(value);
        }
        let ring = RingPresentation::new(&dom, names.clone(), gens.clone()).map_err(lift(header, 1))?;
        if kind == GenKind::Sequence {
            SpecialSequence::new(&dom, names.clone(), gens.clone()).map_err(lift(header, 1))?;
        }
        let padic = match &secs.padic {
            None => None,
            Some(entries) => Some(parse_padic(entries, &ring)?),
        };
        Ok(WorkspaceSpec { dom, kind, names, exprs, gens, padic })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.dom
    }

    pub fn kind(&self) -> GenKind {
        self.kind
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn exprs(&self) -> &[Expr] {
        &self.exprs
    }

    pub fn gens(&self) -> &[PuiseuxPoly] {
        &self.gens
    }

    pub fn padic(&self) -> Option<&PadicAssignment> {
        self.padic.as_ref()
    }

    /// The presented ring, with its p-adic block when one was given.
    pub fn ring(&self) -> Result<RingPresentation> {
        let ring = RingPresentation::new(&self.dom, self.names.clone(), self.gens.clone())?;
        match &self.padic {
            Some(p) => ring.with_padic(p.clone()),
            None => Ok(ring),
        }
    }

    pub fn sequence(&self) -> Result<SpecialSequence> {
        SpecialSequence::new(&self.dom, self.names.clone(), self.gens.clone())
    }

    /// Resolves an element written over t, the symbols and the generator
    /// names.
    pub fn element(&self, text: &str) -> Result<PuiseuxPoly> {
        let ast = syntax::parse_expr(text)?;
        let lookup = |s: &str| resolve(&self.dom, &self.names, &self.gens, s);
        syntax::to_puiseux(&ast, &self.dom, &lookup, &PrecisionCtx::default())
    }

    /// Reads an element as an integer polynomial in the generators; `t`
    /// stands for the generator equal to t.
    pub fn element_poly(&self, text: &str) -> Result<IntPoly> {
        let ast = syntax::parse_expr(text)?;
        let t_index = self.gens.iter().position(|g| *g == PuiseuxPoly::t(&self.dom));
        let var = |s: &str| match self.names.iter().position(|n| n == s) {
            Some(i) => Some(i),
            None if s == "t" => t_index,
            None => None,
        };
        syntax::to_int_poly(&ast, self.names.len(), &var)
    }
}

fn resolve(dom: &Arc<Domain>, names: &[String], gens: &[PuiseuxPoly], s: &str) -> Option<PuiseuxPoly> {
    if s == "t" {
        return Some(PuiseuxPoly::t(dom));
    }
    if let Some(i) = dom.symbols.index_of(s) {
        return Some(PuiseuxPoly::constant(Scalar::symbol(dom, i)));
    }
    names.iter().position(|n| n == s).map(|i| gens[i].clone())
}

fn parse_padic(entries: &[Entry], ring: &RingPresentation) -> Result<PadicAssignment> {
    let mut primes: Vec<u64> = Vec::new();
    let mut default_k = DEFAULT_PRECISION;
    let mut ks: BTreeMap<u64, u32> = BTreeMap::new();
    let mut images: BTreeMap<(u64, usize), BigInt> = BTreeMap::new();
    let mut primes_line = None;
    for e in entries {
        let (name, at) = match e.key.split_once('@') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None => (e.key.as_str(), None),
        };
        match (name, at) {
            ("primes", None) => {
                primes_line = Some(e.line);
                for (col, s) in list(e) {
                    let p: u64 = int_at(e.line, col, s, "a prime")?;
                    if !crate::padic::is_prime(p) {
                        return Err(err(e.line, col, format!("{p} is not prime")));
                    }
                    if primes.contains(&p) {
                        return Err(err(e.line, col, format!("prime {p} listed twice")));
                    }
                    primes.push(p);
                }
            }
            ("precision", None) => default_k = positive(e)?,
            ("precision", Some(p)) => {
                let p: u64 = int_at(e.line, e.key_col, p, "a prime after `@`")?;
                ks.insert(p, positive(e)?);
            }
            (gen, Some(p)) => {
                let p: u64 = int_at(e.line, e.key_col, p, "a prime after `@`")?;
                let i =
                    ring.index_of(gen).ok_or_else(|| err(e.line, e.key_col, format!("unknown generator `{gen}`")))?;
                let v: BigInt = int_at(e.line, e.value_col, &e.value, "an integer image")?;
                images.insert((p, i), v);
            }
            _ => return Err(err(e.line, e.key_col, format!("unknown padic key `{}`", e.key))),
        }
    }
    let Some(primes_line) = primes_line else {
        let line = entries.first().map(|e| e.line).unwrap_or(1);
        return Err(err(line, 1, "[padic] needs a `primes` list"));
    };
    for e in entries {
        if let Some((_, p)) = e.key.split_once('@') {
            let p: u64 = p.trim().parse().unwrap_or(0);
            if !primes.contains(&p) {
                return Err(err(e.line, e.key_col, format!("prime {p} is not in the primes list")));
            }
        }
    }
    let mut pad = PadicAssignment::new();
    for &p in &primes {
        let k = ks.get(&p).copied().unwrap_or(default_k);
        let mut row = Vec::with_capacity(ring.len());
        for (i, g) in ring.gens().iter().enumerate() {
            let v = match images.get(&(p, i)) {
                Some(v) => v.clone(),
                None => seed_image(g, p, k).ok_or_else(|| {
                    err(primes_line, 1, format!("generator {} needs an explicit image at p = {p}", ring.name(i)))
                })?,
            };
            row.push(v);
        }
        pad.insert(p, k, row).map_err(lift(primes_line, 1))?;
    }
    ring.clone().with_padic(pad.clone()).map_err(lift(primes_line, 1))?;
    Ok(pad)
}

fn positive(e: &Entry) -> Result<u32> {
    let k: u32 = int_at(e.line, e.value_col, &e.value, "a positive precision")?;
    if k == 0 {
        return Err(err(e.line, e.value_col, "precision must be positive"));
    }
    Ok(k)
}
