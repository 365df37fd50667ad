//! Sparse multivariate polynomials over a generic coefficient ring, plus a
//! few helpers for dense univariate integer polynomials.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Minimal ring interface needed by [`MPoly`].
pub trait Coeff: Clone + PartialEq + fmt::Debug {
    fn is_nil(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn negated(&self) -> Self;
}

impl Coeff for BigInt {
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        -self
    }
}

impl Coeff for BigRational {
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        -self
    }
}

/// Exponent vector, one entry per variable.
pub type Monomial = Vec<u32>;

/// Graded order: total degree first, then lexicographic on the exponent
/// vector (earlier variables weigh more).
pub fn graded_cmp(a: &[u32], b: &[u32]) -> Ordering {
    let da: u64 = a.iter().map(|&e| e as u64).sum();
    let db: u64 = b.iter().map(|&e| e as u64).sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

/// All exponent vectors in `nvars` variables with total degree at most
/// `degree`, in ascending graded order.
pub fn monomials_up_to(nvars: usize, degree: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for d in 0..=degree {
        let mut current = vec![0u32; nvars];
        fill_degree(nvars, 0, d, &mut current, &mut out);
    }
    // fill_degree emits each degree block in descending lex order
    out.sort_by(|a, b| graded_cmp(a, b));
    out
}

fn fill_degree(nvars: usize, idx: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
    if nvars == 0 {
        if left == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if idx == nvars - 1 {
        cur[idx] = left;
        out.push(cur.clone());
        cur[idx] = 0;
        return;
    }
    for e in (0..=left).rev() {
        cur[idx] = e;
        fill_degree(nvars, idx + 1, left - e, cur, out);
    }
    cur[idx] = 0;
}

/// Binomial coefficient C(n, k), saturating at `usize::MAX`.
pub fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// Sparse polynomial in `nvars` variables.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct MPoly<C> {
    nvars: usize,
    terms: BTreeMap<Monomial, C>,
}

/// Polynomial with integer coefficients.
pub type IntPoly = MPoly<BigInt>;

impl<C: Coeff> MPoly<C> {
    pub fn zero(nvars: usize) -> Self {
        MPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        Self::from_terms(nvars, [(vec![0; nvars], c)])
    }

    pub fn var(nvars: usize, idx: usize, one: C) -> Self {
        let mut m = vec![0; nvars];
        m[idx] = 1;
        Self::from_terms(nvars, [(m, one)])
    }

    /// Builds a polynomial, merging repeated monomials and dropping zeros.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut out = Self::zero(nvars);
        for (m, c) in terms {
            assert_eq!(m.len(), nvars, "monomial arity");
            out.add_term(m, c);
        }
        out
    }

    fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_nil() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let s = existing.plus(&c);
                if s.is_nil() {
                    self.terms.remove(&m);
                } else {
                    *existing = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &[u32]) -> Option<&C> {
        self.terms.get(m)
    }

    /// Terms in descending graded order (the canonical display order).
    pub fn terms_desc(&self) -> Vec<(&Monomial, &C)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| graded_cmp(b.0, a.0));
        v
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.iter().sum::<u32>()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        MPoly { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (m.clone(), c.negated())).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut out = Self::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m: Monomial = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
                out.add_term(m, ca.times(cb));
            }
        }
        out
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::from_terms(self.nvars, self.terms.iter().map(|(m, x)| (m.clone(), x.times(c))))
    }

    pub fn pow(&self, e: u32, one: &Self) -> Self {
        let mut acc = one.clone();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = Self::mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = Self::mul(&base, &base);
            }
        }
        acc
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> MPoly<D> {
        MPoly::from_terms(self.nvars, self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    /// Evaluates the polynomial at `args`, lifting coefficients with `lift`.
    /// Powers of each argument are cached.
    pub fn substitute<T>(&self, args: &[T], zero: &T, one: &T, lift: impl Fn(&C) -> T) -> T
    where
        T: Clone + Add<Output = T> + Mul<Output = T>,
    {
        assert_eq!(args.len(), self.nvars, "arity");
        let mut powers: Vec<Vec<T>> = args.iter().map(|a| vec![one.clone(), a.clone()]).collect();
        let mut acc: Option<T> = None;
        for (m, c) in &self.terms {
            let mut term = lift(c);
            for (i, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let cache = &mut powers[i];
                while cache.len() <= e as usize {
                    let next = cache[cache.len() - 1].clone() * cache[1].clone();
                    cache.push(next);
                }
                term = term * cache[e as usize].clone();
            }
            acc = Some(match acc {
                Some(a) => a + term,
                None => term,
            });
        }
        acc.unwrap_or_else(|| zero.clone())
    }
}

impl<C: Coeff> Add for MPoly<C> {
    type Output = MPoly<C>;
    fn add(self, rhs: MPoly<C>) -> MPoly<C> {
        MPoly::add(&self, &rhs)
    }
}

impl<C: Coeff> Mul for MPoly<C> {
    type Output = MPoly<C>;
    fn mul(self, rhs: MPoly<C>) -> MPoly<C> {
        MPoly::mul(&self, &rhs)
    }
}

impl IntPoly {
    pub fn int_constant(nvars: usize, c: i64) -> Self {
        Self::constant(nvars, BigInt::from(c))
    }

    pub fn int_var(nvars: usize, idx: usize) -> Self {
        Self::var(nvars, idx, BigInt::one())
    }

    /// Divides out the content and makes the leading coefficient (in
    /// descending graded order) positive.
    pub fn primitive(&self) -> Self {
        let g = self.terms.values().fold(BigInt::zero(), |g, c| num_integer::Integer::gcd(&g, c));
        if g.is_zero() {
            return self.clone();
        }
        let lead_neg = self.terms_desc().first().map(|(_, c)| c.is_negative()).unwrap_or(false);
        let g = if lead_neg { -g } else { g };
        MPoly { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (m.clone(), c / &g)).collect() }
    }

    /// Renders with variable names from `name`, e.g. `2*g0^2-g1^2-g2`.
    pub fn render_with(&self, name: impl Fn(usize) -> String) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms_desc().into_iter().enumerate() {
            let mono = render_monomial(m, &name);
            let neg = c.is_negative();
            let abs = c.abs();
            if neg {
                out.push('-');
            } else if i > 0 {
                out.push('+');
            }
            match (mono.is_empty(), abs.is_one()) {
                (true, _) => out.push_str(&abs.to_string()),
                (false, true) => out.push_str(&mono),
                (false, false) => {
                    out.push_str(&abs.to_string());
                    out.push('*');
                    out.push_str(&mono);
                }
            }
        }
        out
    }
}

pub(crate) fn render_monomial(m: &[u32], name: &impl Fn(usize) -> String) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(name(i)),
            _ => parts.push(format!("{}^{}", name(i), e)),
        }
    }
    parts.join("*")
}

/// Dense univariate integer polynomial helpers; coefficients are stored in
/// ascending degree order.
pub mod uni {
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::Zero;

    pub fn trim(mut p: Vec<BigInt>) -> Vec<BigInt> {
        while p.last().map(|c| c.is_zero()).unwrap_or(false) {
            p.pop();
        }
        p
    }

    pub fn degree(p: &[BigInt]) -> Option<usize> {
        p.iter().rposition(|c| !c.is_zero())
    }

    pub fn eval(p: &[BigInt], x: &BigInt) -> BigInt {
        p.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_rat(p: &[BigInt], x: &BigRational) -> BigRational {
        p.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + BigRational::from_integer(c.clone()))
    }

    pub fn derivative(p: &[BigInt]) -> Vec<BigInt> {
        p.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect()
    }

    /// Parses `1,0,-17` (highest degree first) into ascending order.
    pub fn from_descending(coeffs: &[BigInt]) -> Vec<BigInt> {
        trim(coeffs.iter().rev().cloned().collect())
    }

    pub fn mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        trim(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ip(terms: &[(&[u32], i64)], n: usize) -> IntPoly {
        IntPoly::from_terms(n, terms.iter().map(|(m, c)| (m.to_vec(), BigInt::from(*c))))
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials_up_to(1, 2).len(), 3);
        assert_eq!(monomials_up_to(2, 2).len(), 6);
        assert_eq!(monomials_up_to(3, 2).len(), 10);
        assert_eq!(monomials_up_to(3, 4).len(), binomial(7, 4));
        assert_eq!(monomials_up_to(2, 0), vec![vec![0, 0]]);
        let m = monomials_up_to(2, 2);
        assert_eq!(m[0], vec![0, 0]);
        assert_eq!(m.last().unwrap(), &vec![2, 0]);
    }

    #[test]
    fn render_witness_shape() {
        let h = ip(&[(&[2, 0, 0], 2), (&[0, 2, 0], -1), (&[0, 0, 1], -1)], 3);
        assert_eq!(h.render_with(|i| format!("g{i}")), "2*g0^2-g1^2-g2");
        assert_eq!(h.neg().primitive(), h);
    }

    #[test]
    fn substitute_integers() {
        // 3y - x^2 at (2, 5/3 * 3 = 5) => 15 - 4
        let h = ip(&[(&[0, 1], 3), (&[2, 0], -1)], 2);
        let v = h.substitute(&[BigInt::from(2), BigInt::from(5)], &BigInt::zero(), &BigInt::one(), |c| c.clone());
        assert_eq!(v, BigInt::from(11));
    }

    #[test]
    fn pow_matches_repeated_mul() {
        let x = ip(&[(&[1, 0], 1), (&[0, 1], -2), (&[0, 0], 3)], 2);
        let one = IntPoly::int_constant(2, 1);
        assert_eq!(x.pow(3, &one), MPoly::mul(&MPoly::mul(&x, &x), &x));
        assert!(x.sub(&x).is_zero());
    }
}
