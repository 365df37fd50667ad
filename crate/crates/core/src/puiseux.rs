//! Puiseux polynomials: finite sums of Scalar·t^(k/D), ordered by the sign
//! of the leading coefficient (t is positive and infinite).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::field::{render_rational, PrecisionCtx};
use crate::poly::IntPoly;
use crate::scalar::{Domain, Scalar};

#[derive(Clone)]
pub struct PuiseuxPoly {
    dom: Arc<Domain>,
    denom: u32,
    // exponent numerator k (meaning t^(k/denom)) -> nonzero coefficient
    terms: BTreeMap<i64, Scalar>,
}

impl PartialEq for PuiseuxPoly {
    fn eq(&self, other: &Self) -> bool {
        self.denom == other.denom && self.terms == other.terms
    }
}

impl Eq for PuiseuxPoly {}

impl PuiseuxPoly {
    pub fn zero(dom: &Arc<Domain>) -> Self {
        PuiseuxPoly { dom: dom.clone(), denom: 1, terms: BTreeMap::new() }
    }

    pub fn constant(c: Scalar) -> Self {
        Self::monomial(c, 0, 1)
    }

    pub fn from_int(dom: &Arc<Domain>, n: i64) -> Self {
        Self::constant(Scalar::from_int(dom, n))
    }

    /// The distinguished generator t.
    pub fn t(dom: &Arc<Domain>) -> Self {
        Self::monomial(Scalar::one(dom), 1, 1)
    }

    /// c·t^(k/d).
    pub fn monomial(c: Scalar, k: i64, d: u32) -> Self {
        assert!(d > 0, "exponent denominator must be positive");
        let dom = c.domain().clone();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(k, c);
        }
        let mut p = PuiseuxPoly { dom, denom: d, terms };
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        if self.terms.is_empty() {
            self.denom = 1;
            return;
        }
        let g = self.terms.keys().fold(self.denom as i64, |g, &k| g.gcd(&k));
        if g > 1 {
            self.terms = std::mem::take(&mut self.terms).into_iter().map(|(k, c)| (k / g, c)).collect();
            self.denom /= g as u32;
        }
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.dom
    }

    pub fn denom(&self) -> u32 {
        self.denom
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms as (exponent, coefficient) in descending exponent order.
    pub fn terms_desc(&self) -> impl Iterator<Item = (BigRational, &Scalar)> {
        let d = self.denom;
        self.terms.iter().rev().map(move |(&k, c)| (BigRational::new(BigInt::from(k), BigInt::from(d)), c))
    }

    /// Raw (numerator, coefficient) pairs in descending order; exponent is
    /// numerator / [`denom`](Self::denom).
    pub fn raw_terms_desc(&self) -> impl Iterator<Item = (i64, &Scalar)> {
        self.terms.iter().rev().map(|(&k, c)| (k, c))
    }

    pub fn degree(&self) -> Option<BigRational> {
        self.terms_desc().next().map(|(e, _)| e)
    }

    pub fn leading_coeff(&self) -> Option<&Scalar> {
        self.terms.values().next_back()
    }

    pub fn constant_term(&self) -> Scalar {
        self.terms.get(&0).cloned().unwrap_or_else(|| Scalar::zero(&self.dom))
    }

    /// True when only the exponent-0 term is present.
    pub fn is_t_free(&self) -> bool {
        self.terms.keys().all(|&k| k == 0)
    }

    pub fn has_negative_exponents(&self) -> bool {
        self.terms.keys().next().map(|&k| k < 0).unwrap_or(false)
    }

    /// Exponents are integers (the element is an ordinary polynomial in t,
    /// possibly Laurent).
    pub fn has_integer_exponents(&self) -> bool {
        self.denom == 1
    }

    fn check(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.dom, &other.dom) || *self.dom == *other.dom {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    fn rescaled(&self, denom: u32) -> BTreeMap<i64, Scalar> {
        let f = (denom / self.denom) as i64;
        self.terms.iter().map(|(&k, c)| (k * f, c.clone())).collect()
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let l = self.denom.lcm(&other.denom);
        let mut terms = self.rescaled(l);
        for (k, c) in other.rescaled(l) {
            let sum = match terms.remove(&k) {
                Some(prev) => prev.try_add(&c)?,
                None => c,
            };
            if !sum.is_zero() {
                terms.insert(k, sum);
            }
        }
        let mut p = PuiseuxPoly { dom: self.dom.clone(), denom: l, terms };
        p.normalize();
        Ok(p)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.neg_ref())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let l = self.denom.lcm(&other.denom);
        let a = self.rescaled(l);
        let b = other.rescaled(l);
        let mut terms: BTreeMap<i64, Scalar> = BTreeMap::new();
        for (ka, ca) in &a {
            for (kb, cb) in &b {
                let prod = ca.try_mul(cb)?;
                let k = ka + kb;
                let sum = match terms.remove(&k) {
                    Some(prev) => prev.try_add(&prod)?,
                    None => prod,
                };
                if !sum.is_zero() {
                    terms.insert(k, sum);
                }
            }
        }
        let mut p = PuiseuxPoly { dom: self.dom.clone(), denom: l, terms };
        p.normalize();
        Ok(p)
    }

    fn neg_ref(&self) -> Self {
        PuiseuxPoly {
            dom: self.dom.clone(),
            denom: self.denom,
            terms: self.terms.iter().map(|(&k, c)| (k, -c)).collect(),
        }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        self.scale_by(&Scalar::from_rational(&self.dom, q.clone()))
    }

    pub fn scale_by(&self, c: &Scalar) -> Self {
        let mut p = PuiseuxPoly {
            dom: self.dom.clone(),
            denom: self.denom,
            terms: self.terms.iter().map(|(&k, x)| (k, x * c)).filter(|(_, x)| !x.is_zero()).collect(),
        };
        p.normalize();
        p
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = PuiseuxPoly::from_int(&self.dom, 1);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Sign of the leading coefficient; 0 for the zero polynomial.
    pub fn sign(&self, ctx: &PrecisionCtx) -> Result<i8> {
        match self.leading_coeff() {
            None => Ok(0),
            Some(c) => c.sign(ctx),
        }
    }

    /// Order comparison: the sign of the leading coefficient of a − b.
    pub fn compare(&self, other: &Self, ctx: &PrecisionCtx) -> Result<Ordering> {
        let diff = self.try_sub(other)?;
        Ok(diff.sign(ctx)?.cmp(&0))
    }

    /// Integer part: positive-exponent terms kept verbatim, constant term
    /// floored.
    pub fn integer_part(&self, ctx: &PrecisionCtx) -> Result<Self> {
        if self.has_negative_exponents() {
            return Err(Error::NegativeExponent);
        }
        let floor = self.constant_term().floor(ctx)?;
        let mut terms: BTreeMap<i64, Scalar> =
            self.terms.iter().filter(|(&k, _)| k > 0).map(|(&k, c)| (k, c.clone())).collect();
        if !floor.is_zero() {
            terms.insert(0, Scalar::from_int(&self.dom, floor));
        }
        let mut p = PuiseuxPoly { dom: self.dom.clone(), denom: self.denom, terms };
        p.normalize();
        Ok(p)
    }

    /// Rational content of all coefficient coordinates (positive), used to
    /// render `1/36*(t^2-25)`.
    fn rational_content(&self) -> BigRational {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for c in self.terms.values() {
            for (_, f) in c.terms() {
                for q in f.coords() {
                    if q.is_zero() {
                        continue;
                    }
                    num = num.gcd(q.numer());
                    den = den.lcm(q.denom());
                }
            }
        }
        if num.is_zero() {
            return BigRational::one();
        }
        BigRational::new(num, den)
    }

    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let content = self.rational_content();
        let summands: usize = self.terms.values().map(|c| c.summands()).sum();
        if !content.is_integer() && summands > 1 {
            let inner = self.scale(&content.recip());
            return format!("{}*({})", render_rational(&content), inner.render_plain());
        }
        self.render_plain()
    }

    fn render_plain(&self) -> String {
        let mut out = String::new();
        for (k, c) in self.raw_terms_desc() {
            let atom = t_power(k, self.denom);
            let piece = if atom.is_empty() {
                c.render()
            } else if c.summands() > 1 {
                format!("({})*{}", c.render(), atom)
            } else {
                match c.render().as_str() {
                    "1" => atom,
                    "-1" => format!("-{atom}"),
                    s => format!("{s}*{atom}"),
                }
            };
            if !out.is_empty() && !piece.starts_with('-') {
                out.push('+');
            }
            out.push_str(&piece);
        }
        out
    }

    /// Evaluates an integer polynomial at Puiseux polynomial arguments.
    pub fn substitute(h: &IntPoly, gens: &[PuiseuxPoly]) -> Result<PuiseuxPoly> {
        if h.nvars() != gens.len() {
            return Err(Error::ArityMismatch { expected: h.nvars(), got: gens.len() });
        }
        let dom = match gens.first() {
            Some(g) => g.dom.clone(),
            None => {
                return Err(Error::Invalid("substitution needs at least one generator".into()));
            }
        };
        for g in gens {
            gens[0].check(g)?;
        }
        let zero = PuiseuxPoly::zero(&dom);
        let one = PuiseuxPoly::from_int(&dom, 1);
        Ok(h.substitute(gens, &zero, &one, |c| PuiseuxPoly::constant(Scalar::from_int(&dom, c.clone()))))
    }
}

fn t_power(k: i64, d: u32) -> String {
    if k == 0 {
        return String::new();
    }
    if d == 1 {
        if k == 1 {
            "t".into()
        } else if k < 0 {
            format!("t^({k})")
        } else {
            format!("t^{k}")
        }
    } else {
        format!("t^({k}/{d})")
    }
}

impl fmt::Debug for PuiseuxPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PuiseuxPoly({})", self.render())
    }
}

impl fmt::Display for PuiseuxPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl<'a> Add<&'a PuiseuxPoly> for &'a PuiseuxPoly {
    type Output = PuiseuxPoly;
    fn add(self, rhs: &'a PuiseuxPoly) -> PuiseuxPoly {
        self.try_add(rhs).expect("puiseux domain mismatch")
    }
}

impl<'a> Sub<&'a PuiseuxPoly> for &'a PuiseuxPoly {
    type Output = PuiseuxPoly;
    fn sub(self, rhs: &'a PuiseuxPoly) -> PuiseuxPoly {
        self.try_sub(rhs).expect("puiseux domain mismatch")
    }
}

impl<'a> Mul<&'a PuiseuxPoly> for &'a PuiseuxPoly {
    type Output = PuiseuxPoly;
    fn mul(self, rhs: &'a PuiseuxPoly) -> PuiseuxPoly {
        self.try_mul(rhs).expect("puiseux domain mismatch")
    }
}

impl Neg for &PuiseuxPoly {
    type Output = PuiseuxPoly;
    fn neg(self) -> PuiseuxPoly {
        self.neg_ref()
    }
}

impl Add for PuiseuxPoly {
    type Output = PuiseuxPoly;
    fn add(self, rhs: PuiseuxPoly) -> PuiseuxPoly {
        &self + &rhs
    }
}

impl Sub for PuiseuxPoly {
    type Output = PuiseuxPoly;
    fn sub(self, rhs: PuiseuxPoly) -> PuiseuxPoly {
        &self - &rhs
    }
}

impl Mul for PuiseuxPoly {
    type Output = PuiseuxPoly;
    fn mul(self, rhs: PuiseuxPoly) -> PuiseuxPoly {
        &self * &rhs
    }
}

impl Neg for PuiseuxPoly {
    type Output = PuiseuxPoly;
    fn neg(self) -> PuiseuxPoly {
        self.neg_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::NumberField;
    use crate::scalar::SymbolTable;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn dom() -> Arc<Domain> {
        let syms = SymbolTable::new().with("r1", q(30103, 100000)).unwrap().with("r2", q(1, 3)).unwrap();
        Domain::new(NumberField::sqrt(2).unwrap(), syms)
    }

    #[test]
    fn arithmetic_examples() {
        let d = dom();
        let t = PuiseuxPoly::t(&d);
        assert!((&t - &t).is_zero());
        let half = PuiseuxPoly::monomial(Scalar::one(&d), 1, 2);
        assert_eq!(&half * &half, t);
        assert_eq!(half.render(), "t^(1/2)");
        let st = t.scale_by(&Scalar::theta(&d));
        let one = PuiseuxPoly::from_int(&d, 1);
        let prod = &(&st - &one) * &(&st + &one);
        let expect = &t.pow(2).scale(&q(2, 1)) - &one;
        assert_eq!(prod, expect);
    }

    #[test]
    fn exponents_renormalize() {
        let d = dom();
        let a = PuiseuxPoly::monomial(Scalar::one(&d), 2, 4);
        assert_eq!(a.denom(), 2);
        let b = PuiseuxPoly::monomial(Scalar::one(&d), 4, 4);
        assert_eq!(b, PuiseuxPoly::t(&d));
    }

    #[test]
    fn compare_examples() {
        let d = dom();
        let ctx = PrecisionCtx::default();
        let t = PuiseuxPoly::t(&d);
        assert_eq!(t.compare(&PuiseuxPoly::from_int(&d, 1_000_000), &ctx).unwrap(), Ordering::Greater);
        let st = t.scale_by(&Scalar::theta(&d));
        let rhs = &t.scale(&q(2, 1)) - &PuiseuxPoly::from_int(&d, 100);
        assert_eq!(st.compare(&rhs, &ctx).unwrap(), Ordering::Less);
        let s = t.pow(2).scale(&q(1, 36));
        assert_eq!(s.compare(&s.clone(), &ctx).unwrap(), Ordering::Equal);
    }

    #[test]
    fn integer_part_examples() {
        let d = dom();
        let ctx = PrecisionCtx::default();
        let t = PuiseuxPoly::t(&d);
        let st = t.scale_by(&Scalar::theta(&d));
        let a = &st + &PuiseuxPoly::constant(Scalar::from_rational(&d, q(37, 10)));
        let expect = &st + &PuiseuxPoly::from_int(&d, 3);
        assert_eq!(a.integer_part(&ctx).unwrap(), expect);
        let s = t.pow(2).scale(&q(1, 36));
        assert_eq!(s.integer_part(&ctx).unwrap(), s);
        let five = PuiseuxPoly::from_int(&d, 5);
        assert_eq!(five.integer_part(&ctx).unwrap(), five);
        let neg = PuiseuxPoly::monomial(Scalar::one(&d), -1, 1);
        assert_eq!(neg.integer_part(&ctx).unwrap_err(), Error::NegativeExponent);
    }

    #[test]
    fn substitute_examples() {
        let d = dom();
        let t = PuiseuxPoly::t(&d);
        let r1 = PuiseuxPoly::constant(Scalar::symbol(&d, 0));
        let r2 = PuiseuxPoly::constant(Scalar::symbol(&d, 1));
        let th = Scalar::theta(&d);
        let g1 = &t.scale_by(&th) - &r1;
        let g2 = &(&t.scale_by(&th) * &r1).scale(&q(2, 1)) - &r2;
        let h = IntPoly::from_terms(
            3,
            [(vec![2, 0, 0], 2.into()), (vec![0, 2, 0], (-1).into()), (vec![0, 0, 1], (-1).into())],
        );
        let v = PuiseuxPoly::substitute(&h, &[t.clone(), g1, g2]).unwrap();
        assert_eq!(v, &r2 - &(&r1 * &r1));
        assert_eq!(v.render(), "r2-r1^2");

        let y = &t.pow(2).scale(&q(1, 3)) + &PuiseuxPoly::constant(Scalar::from_rational(&d, q(1, 3)));
        let h2 = IntPoly::from_terms(2, [(vec![0, 1], 3.into()), (vec![2, 0], (-1).into())]);
        assert_eq!(PuiseuxPoly::substitute(&h2, &[t.clone(), y]).unwrap(), PuiseuxPoly::from_int(&d, 1));

        let id = IntPoly::int_var(1, 0);
        assert_eq!(PuiseuxPoly::substitute(&id, std::slice::from_ref(&t)).unwrap(), t);
        assert!(matches!(
            PuiseuxPoly::substitute(&id, &[t.clone(), t]),
            Err(Error::ArityMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn rendering() {
        let d = dom();
        let t = PuiseuxPoly::t(&d);
        let g = &t.pow(2) - &PuiseuxPoly::from_int(&d, 25);
        assert_eq!(g.scale(&q(1, 36)).render(), "1/36*(t^2-25)");
        let th = Scalar::theta(&d);
        let g1 = &t.scale_by(&th) - &PuiseuxPoly::constant(Scalar::symbol(&d, 0));
        assert_eq!(g1.render(), "theta*t-r1");
        let g2 = &t.scale_by(&(&th + &Scalar::one(&d))) - &PuiseuxPoly::from_int(&d, 1);
        assert_eq!(g2.render(), "(1+theta)*t-1");
        assert_eq!((-&t).render(), "-t");
    }
}
