//! Coefficients: polynomials in formal transcendental symbols r₁…r_l with
//! coefficients in a number field ℚ(θ).
//!
//! Symbols carry exact rational shadows. Zero testing is purely symbolic;
//! shadows are consulted only for sign and floor decisions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::field::{push_signed_term, FieldElem, NumberField, PrecisionCtx};
use crate::poly::{render_monomial, Coeff};

/// Named transcendental symbols with their rational shadows.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SymbolTable {
    names: Vec<String>,
    shadows: Vec<BigRational>,
    unit_interval: Vec<bool>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a symbol; `unit_interval` symbols must have a shadow in (0, 1).
    pub fn push(&mut self, name: &str, shadow: BigRational, unit_interval: bool) -> Result<usize> {
        if self.names.iter().any(|n| n == name) {
            return Err(Error::Invalid(format!("duplicate symbol `{name}`")));
        }
        if unit_interval && !(shadow.is_positive() && shadow < BigRational::one()) {
            return Err(Error::Invalid(format!("shadow of `{name}` must lie in (0, 1)")));
        }
        self.names.push(name.to_string());
        self.shadows.push(shadow);
        self.unit_interval.push(unit_interval);
        Ok(self.names.len() - 1)
    }

    pub fn with(mut self, name: &str, shadow: BigRational) -> Result<Self> {
        self.push(name, shadow, true)?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn shadow(&self, i: usize) -> &BigRational {
        &self.shadows[i]
    }

    pub fn is_unit_interval(&self, i: usize) -> bool {
        self.unit_interval[i]
    }
}

/// The shared context of every coefficient: ℚ(θ) and the symbol table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domain {
    pub field: NumberField,
    pub symbols: SymbolTable,
}

impl Domain {
    pub fn new(field: NumberField, symbols: SymbolTable) -> Arc<Self> {
        Arc::new(Domain { field, symbols })
    }

    pub fn nsyms(&self) -> usize {
        self.symbols.len()
    }
}

fn same_domain(a: &Arc<Domain>, b: &Arc<Domain>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Polynomial in the symbols with ℚ(θ) coefficients, in normalized form.
#[derive(Clone)]
pub struct Scalar {
    dom: Arc<Domain>,
    terms: BTreeMap<Vec<u32>, FieldElem>,
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        same_domain(&self.dom, &other.dom) && self.terms == other.terms
    }
}

impl Eq for Scalar {}

impl Scalar {
    pub fn zero(dom: &Arc<Domain>) -> Self {
        Scalar { dom: dom.clone(), terms: BTreeMap::new() }
    }

    pub fn from_field(dom: &Arc<Domain>, a: FieldElem) -> Self {
        let mut s = Self::zero(dom);
        if !a.is_zero() {
            s.terms.insert(vec![0; dom.nsyms()], a);
        }
        s
    }

    pub fn from_rational(dom: &Arc<Domain>, q: BigRational) -> Self {
        Self::from_field(dom, FieldElem::from_rational(q))
    }

    pub fn from_int(dom: &Arc<Domain>, n: impl Into<BigInt>) -> Self {
        Self::from_field(dom, FieldElem::from_int(n))
    }

    pub fn one(dom: &Arc<Domain>) -> Self {
        Self::from_int(dom, 1)
    }

    pub fn theta(dom: &Arc<Domain>) -> Self {
        Self::from_field(dom, dom.field.theta())
    }

    pub fn symbol(dom: &Arc<Domain>, idx: usize) -> Self {
        let mut m = vec![0; dom.nsyms()];
        m[idx] = 1;
        Self::from_terms(dom, [(m, FieldElem::one())])
    }

    pub fn from_terms(dom: &Arc<Domain>, terms: impl IntoIterator<Item = (Vec<u32>, FieldElem)>) -> Self {
        let mut s = Self::zero(dom);
        for (m, c) in terms {
            s.add_term(m, c);
        }
        s
    }

    fn add_term(&mut self, m: Vec<u32>, c: FieldElem) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.get(&m) {
            Some(prev) => prev.add(&c),
            None => c,
        };
        if sum.is_zero() {
            self.terms.remove(&m);
        } else {
            self.terms.insert(m, sum);
        }
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.dom
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &FieldElem)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when no symbol occurs, i.e. the value lies in ℚ(θ).
    pub fn is_symbol_free(&self) -> bool {
        self.terms.keys().all(|m| m.iter().all(|&e| e == 0))
    }

    pub fn as_field_elem(&self) -> Option<FieldElem> {
        if !self.is_symbol_free() {
            return None;
        }
        Some(self.terms.values().next().cloned().unwrap_or_default())
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        self.as_field_elem()?.as_rational()
    }

    /// True for symbol-free rational integers.
    pub fn is_integer(&self) -> bool {
        self.as_field_elem().map(|a| a.is_integer()).unwrap_or(false)
    }

    /// Indices of symbols that occur with positive exponent.
    pub fn symbols_used(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for m in self.terms.keys() {
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    out.insert(i);
                }
            }
        }
        out
    }

    fn check(&self, other: &Scalar) -> Result<()> {
        if same_domain(&self.dom, &other.dom) {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn try_add(&self, other: &Scalar) -> Result<Scalar> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Scalar) -> Result<Scalar> {
        self.check(other)?;
        self.try_add(&other.neg_ref())
    }

    pub fn try_mul(&self, other: &Scalar) -> Result<Scalar> {
        self.check(other)?;
        let field = &self.dom.field;
        let mut out = Scalar::zero(&self.dom);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m: Vec<u32> = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
                out.add_term(m, field.mul(ca, cb));
            }
        }
        Ok(out)
    }

    fn neg_ref(&self) -> Scalar {
        Scalar { dom: self.dom.clone(), terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect() }
    }

    pub fn scale(&self, q: &BigRational) -> Scalar {
        Scalar::from_terms(&self.dom, self.terms.iter().map(|(m, c)| (m.clone(), c.scale(q))))
    }

    pub fn pow(&self, e: u32) -> Scalar {
        let mut acc = Scalar::one(&self.dom);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Value with every symbol replaced by its shadow.
    pub fn shadow_value(&self) -> FieldElem {
        let syms = &self.dom.symbols;
        let mut acc = FieldElem::zero();
        for (m, c) in &self.terms {
            let mut w = BigRational::one();
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    w *= num_traits::pow(syms.shadow(i).clone(), e as usize);
                }
            }
            acc = acc.add(&c.scale(&w));
        }
        acc
    }

    /// Sign under shadow evaluation; 0 only for the symbolic zero.
    pub fn sign(&self, ctx: &PrecisionCtx) -> Result<i8> {
        if self.is_zero() {
            return Ok(0);
        }
        let v = self.shadow_value();
        if v.is_zero() {
            return Err(Error::ShadowDegeneracy);
        }
        match self.dom.field.sign(&v, ctx) {
            Ok(0) => Err(Error::ShadowDegeneracy),
            Ok(s) => Ok(s),
            Err(Error::PrecisionExhausted { .. }) => Err(Error::ShadowDegeneracy),
            Err(e) => Err(e),
        }
    }

    /// ⌊value⌋ under shadow evaluation; exact for rational or quadratic values.
    pub fn floor(&self, ctx: &PrecisionCtx) -> Result<BigInt> {
        if let Some(q) = self.as_rational() {
            return Ok(q.floor().to_integer());
        }
        self.dom.field.floor(&self.shadow_value(), ctx)
    }

    /// Canonical rendering: terms ordered by θ-power, then by symbol
    /// exponent vector (lexicographic, ascending).
    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut flat: Vec<(usize, &Vec<u32>, &BigRational)> = Vec::new();
        for (m, c) in &self.terms {
            for (j, q) in c.coords().iter().enumerate() {
                if !q.is_zero() {
                    flat.push((j, m, q));
                }
            }
        }
        flat.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(b.1)));
        let syms = &self.dom.symbols;
        let mut out = String::new();
        for (j, m, q) in flat {
            let mut atoms = Vec::new();
            match j {
                0 => {}
                1 => atoms.push("theta".to_string()),
                _ => atoms.push(format!("theta^{j}")),
            }
            let sym = render_monomial(m, &|i| syms.name(i).to_string());
            if !sym.is_empty() {
                atoms.push(sym);
            }
            push_signed_term(&mut out, q, &atoms.join("*"));
        }
        out
    }

    /// Number of rendered summands (θ-power × symbol monomial pairs).
    pub(crate) fn summands(&self) -> usize {
        self.terms.values().map(|c| c.coords().iter().filter(|q| !q.is_zero()).count()).sum()
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({})", self.render())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Coeff for Scalar {
    fn is_nil(&self) -> bool {
        self.terms.is_empty()
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        self.neg_ref()
    }
}

// Operator forms panic on a domain mismatch; the `try_*` methods report it.
impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &'a Scalar) -> Scalar {
        self.try_add(rhs).expect("scalar domain mismatch")
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &'a Scalar) -> Scalar {
        self.try_sub(rhs).expect("scalar domain mismatch")
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &'a Scalar) -> Scalar {
        self.try_mul(rhs).expect("scalar domain mismatch")
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.neg_ref()
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        &self + &rhs
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        &self - &rhs
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        &self * &rhs
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.neg_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn sqrt2_dom() -> Arc<Domain> {
        let syms = SymbolTable::new().with("r1", q(30103, 100000)).unwrap().with("r2", q(1, 2)).unwrap();
        Domain::new(NumberField::sqrt(2).unwrap(), syms)
    }

    #[test]
    fn arithmetic_examples() {
        let d = sqrt2_dom();
        let th = Scalar::theta(&d);
        assert!((&th + &(-&th)).is_zero());
        assert_eq!(&th * &th, Scalar::from_int(&d, 2));
        let r1 = Scalar::symbol(&d, 0);
        let sq = &r1 * &r1;
        assert_eq!(sq.render(), "r1^2");
    }

    #[test]
    fn sign_examples() {
        let d = sqrt2_dom();
        let ctx = PrecisionCtx::default();
        assert_eq!(Scalar::zero(&d).sign(&ctx).unwrap(), 0);
        let a = &Scalar::theta(&d) - &Scalar::from_rational(&d, q(3, 2));
        assert_eq!(a.sign(&ctx).unwrap(), -1);
        let b = &Scalar::symbol(&d, 0) - &Scalar::one(&d);
        assert_eq!(b.sign(&ctx).unwrap(), -1);
    }

    #[test]
    fn floor_examples() {
        let d = sqrt2_dom();
        let ctx = PrecisionCtx::default();
        assert_eq!(Scalar::from_rational(&d, q(7, 2)).floor(&ctx).unwrap(), BigInt::from(3));
        let a = Scalar::theta(&d).scale(&q(99, 1));
        assert_eq!(a.floor(&ctx).unwrap(), BigInt::from(140));
        assert_eq!(Scalar::symbol(&d, 0).floor(&ctx).unwrap(), BigInt::from(0));
    }

    #[test]
    fn shadow_degeneracy_is_reported() {
        // r2 has shadow 1/2, so 2*r2 - 1 is symbolically nonzero but vanishes
        let d = sqrt2_dom();
        let ctx = PrecisionCtx::default();
        let a = &Scalar::symbol(&d, 1).scale(&q(2, 1)) - &Scalar::one(&d);
        assert_eq!(a.sign(&ctx).unwrap_err(), Error::ShadowDegeneracy);
    }

    #[test]
    fn field_mismatch() {
        let a = Scalar::one(&sqrt2_dom());
        let other = Domain::new(NumberField::sqrt(3).unwrap(), SymbolTable::new());
        let b = Scalar::one(&other);
        assert_eq!(a.try_add(&b).unwrap_err(), Error::FieldMismatch);
        assert_eq!(a.try_mul(&b).unwrap_err(), Error::FieldMismatch);
    }

    #[test]
    fn render_order() {
        let d = sqrt2_dom();
        let k = &Scalar::symbol(&d, 1) - &(&Scalar::symbol(&d, 0) * &Scalar::symbol(&d, 0));
        assert_eq!(k.render(), "r2-r1^2");
        let g = &(&Scalar::theta(&d).scale(&q(2, 1)) * &Scalar::symbol(&d, 0)) - &Scalar::symbol(&d, 1);
        assert_eq!(g.render(), "-r2+2*theta*r1");
        assert!(SymbolTable::new().with("r", q(3, 2)).is_err());
    }
}
