//! Truncated p-adic integers, the h_p seed homomorphisms, Hensel lifting,
//! the Chinese remainder theorem and Wilkie's integer-part extension step.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::poly::{uni, IntPoly};
use crate::puiseux::PuiseuxPoly;
use crate::ringlab::RingPresentation;

/// Trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Prime factorization by trial division, ascending primes.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        let mut e = 0;
        while n.is_multiple_of(d) {
            n /= d;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// p^k as a big integer.
pub fn prime_power(p: u64, k: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), k as usize)
}

/// p-adic valuation of a nonzero integer; `None` for zero.
pub fn valuation(x: &BigInt, p: u64) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut x = x.clone();
    let mut v = 0;
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        x = q;
        v += 1;
    }
}

/// Inverse of `a` modulo `m` when gcd(a, m) = 1.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// A p-adic integer known modulo p^k.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PadicTrunc {
    p: u64,
    k: u32,
    residue: BigInt,
}

impl PadicTrunc {
    pub fn new(p: u64, k: u32, residue: impl Into<BigInt>) -> Result<Self> {
        check_prime(p)?;
        if k == 0 {
            return Err(Error::Invalid("p-adic precision must be positive".into()));
        }
        Ok(Self::raw(p, k, residue.into()))
    }

    fn raw(p: u64, k: u32, residue: BigInt) -> Self {
        let residue = residue.mod_floor(&prime_power(p, k));
        PadicTrunc { p, k, residue }
    }

    /// h_p(t) = 1 + p + ... + p^(k-1), the image of t under t -> 1/(1-p).
    pub fn seed(p: u64, k: u32) -> Result<Self> {
        let mut acc = BigInt::zero();
        let mut pw = BigInt::one();
        for _ in 0..k {
            acc += &pw;
            pw *= p;
        }
        PadicTrunc::new(p, k, acc)
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.k
    }

    pub fn residue(&self) -> &BigInt {
        &self.residue
    }

    pub fn modulus(&self) -> BigInt {
        prime_power(self.p, self.k)
    }

    fn same(&self, o: &Self) -> Result<()> {
        if self.p == o.p && self.k == o.k {
            Ok(())
        } else {
            Err(Error::MixedModuli)
        }
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same(o)?;
        Ok(Self::raw(self.p, self.k, &self.residue + &o.residue))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.same(o)?;
        Ok(Self::raw(self.p, self.k, &self.residue - &o.residue))
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.same(o)?;
        Ok(Self::raw(self.p, self.k, &self.residue * &o.residue))
    }

    /// Drops to a lower precision.
    pub fn truncate(&self, k: u32) -> Self {
        Self::raw(self.p, k.min(self.k).max(1), self.residue.clone())
    }
}

impl fmt::Debug for PadicTrunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}^{}", self.residue, self.p, self.k)
    }
}

impl fmt::Display for PadicTrunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {}^{})", self.residue, self.p, self.k)
    }
}

/// Evaluates an integer polynomial at truncated p-adic arguments.
pub fn padic_eval(h: &IntPoly, args: &[PadicTrunc]) -> Result<PadicTrunc> {
    if h.nvars() != args.len() {
        return Err(Error::ArityMismatch { expected: h.nvars(), got: args.len() });
    }
    let first = args.first().ok_or_else(|| Error::Invalid("p-adic evaluation needs at least one argument".into()))?;
    for a in args {
        first.same(a)?;
    }
    let m = first.modulus();
    let vals: Vec<BigInt> = args.iter().map(|a| a.residue.clone()).collect();
    let v = h.substitute(&vals, &BigInt::zero(), &BigInt::one(), |c| c.clone());
    Ok(PadicTrunc::raw(first.p, first.k, v.mod_floor(&m)))
}

/// All residues x mod p^k with g(x) = 0 mod p^k, ascending (brute force).
pub fn brute_roots(g: &[BigInt], p: u64, k: u32) -> Vec<BigInt> {
    let m = prime_power(p, k);
    let mut out = Vec::new();
    let mut x = BigInt::zero();
    while x < m {
        if uni::eval(g, &x).mod_floor(&m).is_zero() {
            out.push(x.clone());
        }
        x += 1;
    }
    out
}

// Largest start value scanned when no simple root mod p exists.
const START_SCAN_LIMIT: u64 = 1 << 16;

/// A root of `g` (ascending integer coefficients) modulo p^k that is the
/// truncation of a genuine p-adic zero.
///
/// The start value is the smallest simple root mod p if one exists.
/// Otherwise it is the smallest integer a satisfying the generalized Hensel
/// condition v(g(a)) > 2·v(g'(a)) (this covers p = 2 roots that are only
/// simple modulo 8). Newton iteration from the start converges p-adically;
/// its residue mod p^k is returned.
pub fn hensel_root(g: &[BigInt], p: u64, k: u32) -> Result<PadicTrunc> {
    check_prime(p)?;
    if k == 0 {
        return Err(Error::Invalid("p-adic precision must be positive".into()));
    }
    let g = uni::trim(g.to_vec());
    if uni::degree(&g).unwrap_or(0) == 0 {
        return Err(Error::NoSimpleRoot(p));
    }
    let dg = uni::derivative(&g);
    let pb = BigInt::from(p);
    let start = (0..p)
        .map(BigInt::from)
        .find(|a| uni::eval(&g, a).mod_floor(&pb).is_zero() && !uni::eval(&dg, a).mod_floor(&pb).is_zero())
        .or_else(|| {
            let limit = prime_power(p, k).min(BigInt::from(START_SCAN_LIMIT)).to_u64().unwrap_or(0);
            (0..limit).map(BigInt::from).find(|a| liftable(&g, &dg, a, p))
        })
        .ok_or(Error::NoSimpleRoot(p))?;
    let root = newton_lift(&g, &dg, start, p, k)?;
    Ok(PadicTrunc::raw(p, k, root))
}

fn liftable(g: &[BigInt], dg: &[BigInt], a: &BigInt, p: u64) -> bool {
    match valuation(&uni::eval(g, a), p) {
        None => true,
        Some(vg) => match valuation(&uni::eval(dg, a), p) {
            None => false,
            Some(vd) => vg > 2 * vd,
        },
    }
}

fn newton_lift(g: &[BigInt], dg: &[BigInt], start: BigInt, p: u64, k: u32) -> Result<BigInt> {
    let mut a = start;
    let gv = uni::eval(g, &a);
    if gv.is_zero() {
        return Ok(a);
    }
    let e = valuation(&uni::eval(dg, &a), p).ok_or(Error::NoSimpleRoot(p))?;
    // the limit root alpha satisfies v(alpha - a) = v(g(a)) - e, so once
    // v(g(a)) >= k + e the residue of a mod p^k is final.
    let work = prime_power(p, k + e + 1);
    let pe = prime_power(p, e);
    loop {
        let ga = uni::eval(g, &a);
        let vg = match valuation(&ga, p) {
            None => return Ok(a),
            Some(v) => v,
        };
        if vg >= k + e {
            return Ok(a);
        }
        let da = uni::eval(dg, &a);
        if valuation(&da, p) != Some(e) {
            return Err(Error::Internal("Newton iteration left the convergence region".into()));
        }
        let unit = da / &pe;
        let inv =
            mod_inverse(&unit, &work).ok_or_else(|| Error::Internal("derivative unit is not invertible".into()))?;
        let step = (ga / &pe) * inv;
        a = (a - step).mod_floor(&work);
    }
}

/// Least non-negative m with m = m_i mod M_i for all i.
pub fn crt(congruences: &[(BigInt, BigInt)]) -> Result<BigInt> {
    for (_, m) in congruences {
        if !m.is_positive() {
            return Err(Error::Invalid(format!("modulus {m} must be positive")));
        }
    }
    for (i, (_, a)) in congruences.iter().enumerate() {
        for (_, b) in &congruences[i + 1..] {
            if !a.gcd(b).is_one() {
                return Err(Error::NotCoprime(a.to_string(), b.to_string()));
            }
        }
    }
    let mut x = BigInt::zero();
    let mut m = BigInt::one();
    for (r, mi) in congruences {
        // x + m*s = r (mod mi)
        let inv = mod_inverse(&m, mi).expect("coprime moduli");
        let s = ((r - &x) * inv).mod_floor(mi);
        x += &m * s;
        m *= mi;
        x = x.mod_floor(&m);
    }
    Ok(x)
}

/// Images of the ring generators modulo p^k at one prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeImages {
    pub k: u32,
    pub images: Vec<BigInt>,
}

/// Per-prime generator images at a common precision per prime.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PadicAssignment {
    primes: BTreeMap<u64, PrimeImages>,
}

impl PadicAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records (or replaces) the images at `p`, reduced mod p^k.
    pub fn insert(&mut self, p: u64, k: u32, images: Vec<BigInt>) -> Result<()> {
        check_prime(p)?;
        if k == 0 {
            return Err(Error::Invalid("p-adic precision must be positive".into()));
        }
        if let Some(other) = self.primes.values().next() {
            if other.images.len() != images.len() {
                return Err(Error::ArityMismatch { expected: other.images.len(), got: images.len() });
            }
        }
        let m = prime_power(p, k);
        let images = images.into_iter().map(|x| x.mod_floor(&m)).collect();
        self.primes.insert(p, PrimeImages { k, images });
        Ok(())
    }

    /// Default seeds: generators equal to t get h_p(t); generators that are
    /// polynomials in t with p-integral rational coefficients get their value
    /// at h_p(t); anything else must be supplied explicitly.
    pub fn seeded(ring: &RingPresentation, primes: &[u64], k: u32) -> Result<Self> {
        let mut pad = PadicAssignment::new();
        for &p in primes {
            let images = ring
                .gens()
                .iter()
                .enumerate()
                .map(|(i, g)| {
                    seed_image(g, p, k).ok_or_else(|| {
                        Error::Invalid(format!("no p-adic image for generator {} at p = {p}", ring.name(i)))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            pad.insert(p, k, images)?;
        }
        Ok(pad)
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.primes.keys().copied()
    }

    pub fn get(&self, p: u64) -> Option<&PrimeImages> {
        self.primes.get(&p)
    }

    pub fn precision(&self, p: u64) -> Option<u32> {
        self.primes.get(&p).map(|x| x.k)
    }

    pub fn ngens(&self) -> Option<usize> {
        self.primes.values().next().map(|x| x.images.len())
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Generator images at `p` as truncated p-adic integers.
    pub fn truncs(&self, p: u64) -> Option<Vec<PadicTrunc>> {
        let pi = self.primes.get(&p)?;
        Some(pi.images.iter().map(|x| PadicTrunc::raw(p, pi.k, x.clone())).collect())
    }

    /// Checks H(images) = c mod p^k for every relation H(gens) = c with a
    /// rational constant c. A denominator divisible by p is itself a
    /// violation (no homomorphism into Z_p can exist).
    pub fn check_relations(&self, relations: &[(IntPoly, BigRational)]) -> Result<()> {
        for (&p, pi) in &self.primes {
            let args = self.truncs(p).expect("prime present");
            let m = prime_power(p, pi.k);
            for (h, c) in relations {
                let rel = || format!("{} = {}", h.render_with(|i| format!("x{i}")), crate::field::render_rational(c));
                if c.denom().mod_floor(&BigInt::from(p)).is_zero() {
                    return Err(Error::RelationViolated { prime: p, relation: rel() });
                }
                let inv = mod_inverse(c.denom(), &m).expect("unit denominator");
                let want = (c.numer() * inv).mod_floor(&m);
                let got = padic_eval(h, &args)?;
                if got.residue != want {
                    return Err(Error::RelationViolated { prime: p, relation: rel() });
                }
            }
        }
        Ok(())
    }
}

/// Image at p of a generator lying in Z_(p)[t], evaluated at h_p(t).
pub fn seed_image(g: &PuiseuxPoly, p: u64, k: u32) -> Option<BigInt> {
    if !g.has_integer_exponents() || g.has_negative_exponents() {
        return None;
    }
    let m = prime_power(p, k);
    let t = PadicTrunc::seed(p, k).ok()?.residue;
    let mut acc = BigInt::zero();
    for (e, c) in g.raw_terms_desc() {
        let q = c.as_rational()?;
        let inv = mod_inverse(q.denom(), &m)?;
        let term = q.numer() * inv * t.modpow(&BigInt::from(e), &m);
        acc = (acc + term).mod_floor(&m);
    }
    Some(acc)
}

/// Outcome of one Wilkie extension step.
#[derive(Clone, Debug)]
pub struct ExtensionResult {
    /// CRT solution: m = h_p(ns) mod p^(e_p) for every p | n.
    pub m: BigInt,
    /// The adjoined element (ns - m)/n.
    pub generator: PuiseuxPoly,
    /// Presentation with the new generator appended.
    pub ring: RingPresentation,
    /// h_p(ns) per covered prime at its original precision.
    pub hp_ns: BTreeMap<u64, PadicTrunc>,
    /// Images of the new generator per prime, after precision bookkeeping.
    pub new_images: BTreeMap<u64, PadicTrunc>,
}

/// Wilkie's Case (2): adjoins (ns - m)/n for the caller's element
/// `s_num` = ns, given as the integer polynomial `expr` in the generators.
pub fn wilkie_extend(
    ring: &RingPresentation,
    s_num: &PuiseuxPoly,
    expr: &IntPoly,
    n: u64,
    pad: &PadicAssignment,
    new_name: &str,
) -> Result<ExtensionResult> {
    if n == 0 {
        return Err(Error::Invalid("denominator must be positive".into()));
    }
    let value = PuiseuxPoly::substitute(expr, ring.gens())?;
    if value != *s_num {
        return Err(Error::NotInRing(format!(
            "expression evaluates to {} instead of {}",
            value.render(),
            s_num.render()
        )));
    }
    if pad.ngens().is_some_and(|g| g != ring.len()) {
        return Err(Error::ArityMismatch { expected: ring.len(), got: pad.ngens().unwrap_or(0) });
    }
    let factors = factorize(n);
    let mut congruences = Vec::new();
    for &(p, e) in &factors {
        let k = pad.precision(p).ok_or(Error::PrimeNotCovered(p))?;
        if k < e + 1 {
            return Err(Error::PrecisionTooLow { prime: p, have: k, need: e + 1 });
        }
    }
    let mut hp_ns = BTreeMap::new();
    for p in pad.primes() {
        let v = padic_eval(expr, &pad.truncs(p).expect("prime present"))?;
        hp_ns.insert(p, v);
    }
    for &(p, e) in &factors {
        congruences.push((hp_ns[&p].residue.clone(), prime_power(p, e)));
    }
    let m = crt(&congruences)?;

    let dom = ring.domain().clone();
    let mb = BigRational::from_integer(m.clone());
    let generator = s_num
        .try_sub(&PuiseuxPoly::constant(crate::scalar::Scalar::from_rational(&dom, mb)))?
        .scale(&BigRational::new(BigInt::one(), BigInt::from(n)));

    let nb = BigInt::from(n);
    let mut new_pad = PadicAssignment::new();
    let mut new_images = BTreeMap::new();
    for p in pad.primes() {
        let pi = pad.get(p).expect("prime present");
        let e = valuation(&nb, p).unwrap_or(0);
        let k_new = pi.k - e;
        let m_new = prime_power(p, k_new);
        let diff = &hp_ns[&p].residue - &m;
        let pe = prime_power(p, e);
        if !diff.mod_floor(&pe).is_zero() {
            return Err(Error::Internal(format!("h_{p}(ns) - m is not divisible by {p}^{e}")));
        }
        let unit = &nb / &pe;
        let inv = mod_inverse(&unit, &m_new).expect("cofactor is a p-adic unit");
        let r = ((diff / &pe) * inv).mod_floor(&m_new);
        let mut images: Vec<BigInt> = pi.images.iter().map(|x| x.mod_floor(&m_new)).collect();
        images.push(r.clone());
        new_pad.insert(p, k_new, images)?;
        new_images.insert(p, PadicTrunc::raw(p, k_new, r));
    }
    let ring = ring.extended(new_name, generator.clone(), Some(new_pad))?;
    Ok(ExtensionResult { m, generator, ring, hp_ns, new_images })
}

/// Wilkie's Case (1): adjoins `g` with arbitrarily chosen p-adic images.
///
/// Only symbol freshness is checked: the constant term of `g` must involve
/// a symbol that no existing generator uses. Primes of the ring's
/// assignment without a chosen image get 0.
pub fn wilkie_adjoin_free(
    ring: &RingPresentation,
    g: &PuiseuxPoly,
    new_name: &str,
    choices: &BTreeMap<u64, BigInt>,
) -> Result<RingPresentation> {
    let used = ring.symbols_used();
    let fresh: Vec<usize> = g.constant_term().symbols_used().into_iter().filter(|s| !used.contains(s)).collect();
    if fresh.is_empty() {
        return Err(Error::NotFree(format!(
            "the constant term of {} involves no symbol absent from the ring",
            g.render()
        )));
    }
    let pad = match ring.padic() {
        None => None,
        Some(pad) => {
            let mut out = PadicAssignment::new();
            for p in pad.primes() {
                let pi = pad.get(p).expect("prime present");
                let mut images = pi.images.clone();
                images.push(choices.get(&p).cloned().unwrap_or_default());
                out.insert(p, pi.k, images)?;
            }
            for &p in choices.keys() {
                if out.get(p).is_none() {
                    return Err(Error::Invalid(format!("prime {p} is not in the ring's p-adic assignment")));
                }
            }
            Some(out)
        }
    };
    ring.extended(new_name, g.clone(), pad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::MPoly;

    fn bi(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn primes_and_factors() {
        assert!(is_prime(2) && is_prime(13) && !is_prime(1) && !is_prime(91));
        assert_eq!(factorize(36), vec![(2, 2), (3, 2)]);
        assert_eq!(factorize(1), vec![]);
        assert_eq!(factorize(97), vec![(97, 1)]);
    }

    #[test]
    fn eval_examples() {
        let t = PadicTrunc::seed(2, 4).unwrap();
        assert_eq!(t.residue(), &BigInt::from(15));
        let x = IntPoly::int_var(1, 0);
        assert_eq!(padic_eval(&x, &[t]).unwrap().residue(), &BigInt::from(15));
        let t2 = PadicTrunc::seed(2, 2).unwrap();
        assert_eq!(padic_eval(&MPoly::mul(&x, &x), std::slice::from_ref(&t2)).unwrap().residue(), &BigInt::from(1));
        assert!(padic_eval(&IntPoly::zero(1), std::slice::from_ref(&t2)).unwrap().residue().is_zero());
        let x2 = IntPoly::int_var(2, 0);
        let other = PadicTrunc::seed(3, 2).unwrap();
        assert_eq!(padic_eval(&x2, &[t2, other]).unwrap_err(), Error::MixedModuli);
    }

    #[test]
    fn hensel_examples() {
        // x^2 - 17 at 2^5: 7 is a root mod 32 but not the truncation of a
        // 2-adic square root of 17; the lift from 1 lands on 9.
        let r = hensel_root(&bi(&[-17, 0, 1]), 2, 5).unwrap();
        assert_eq!(r.residue(), &BigInt::from(9));
        assert!(brute_roots(&bi(&[-17, 0, 1]), 2, 5).contains(&BigInt::from(7)));
        assert!(brute_roots(&bi(&[-17, 0, 1]), 2, 6).iter().any(|x| x.mod_floor(&32.into()) == 9.into()));

        let r = hensel_root(&bi(&[-13, 0, 1]), 3, 4).unwrap();
        assert_eq!(r.residue(), &BigInt::from(16));
        assert_eq!(brute_roots(&bi(&[-13, 0, 1]), 3, 4)[0], BigInt::from(16));

        assert_eq!(hensel_root(&bi(&[-2, 0, 1]), 5, 1).unwrap_err(), Error::NoSimpleRoot(5));
        assert_eq!(hensel_root(&bi(&[-2, 0, 1]), 6, 1).unwrap_err(), Error::NotPrime(6));
    }

    #[test]
    fn crt_examples() {
        let c = |v: &[(i64, i64)]| crt(&v.iter().map(|&(a, m)| (a.into(), m.into())).collect::<Vec<_>>());
        assert_eq!(c(&[(1, 4), (7, 9)]).unwrap(), BigInt::from(25));
        assert_eq!(c(&[(0, 1)]).unwrap(), BigInt::zero());
        assert_eq!(c(&[(3, 5), (4, 7)]).unwrap(), BigInt::from(18));
        assert!(matches!(c(&[(1, 4), (1, 6)]), Err(Error::NotCoprime(_, _))));
    }
}
