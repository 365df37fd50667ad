//! Real number fields ℚ(θ) given by a monic integer minimal polynomial and an
//! isolating interval for the chosen real root.
//!
//! Elements are vectors of rationals in the power basis 1, θ, …, θ^(d-1).
//! Sign and floor decisions are exact for rational and quadratic fields
//! (integer square roots) and go through nested interval refinement of θ
//! otherwise.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::poly::uni;

/// Working-precision schedule for interval refinement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionCtx {
    pub start_bits: u32,
    pub max_bits: u32,
}

impl Default for PrecisionCtx {
    fn default() -> Self {
        PrecisionCtx { start_bits: 64, max_bits: 4096 }
    }
}

impl PrecisionCtx {
    pub fn new(start_bits: u32, max_bits: u32) -> Result<Self> {
        if start_bits == 0 || start_bits > max_bits {
            return Err(Error::Invalid(format!("precision schedule {start_bits}..{max_bits} is empty")));
        }
        Ok(PrecisionCtx { start_bits, max_bits })
    }

    /// Bit budgets visited: start, 2·start, … capped at max.
    pub fn schedule(&self) -> impl Iterator<Item = u32> {
        let max = self.max_bits;
        let mut next = Some(self.start_bits);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur >= max { None } else { Some(cur.saturating_mul(2).min(max)) };
            Some(cur)
        })
    }
}

/// Element of ℚ(θ) in power-basis coordinates; trailing zeros are trimmed so
/// the zero element is the empty vector.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct FieldElem(Vec<BigRational>);

impl FieldElem {
    pub fn zero() -> Self {
        FieldElem(Vec::new())
    }

    pub fn one() -> Self {
        Self::from_rational(BigRational::one())
    }

    pub fn from_coords(mut coords: Vec<BigRational>) -> Self {
        while coords.last().map(|c| c.is_zero()).unwrap_or(false) {
            coords.pop();
        }
        FieldElem(coords)
    }

    pub fn from_rational(q: BigRational) -> Self {
        Self::from_coords(vec![q])
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        Self::from_rational(BigRational::from_integer(n.into()))
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.0
    }

    /// Coordinate of θ^j (zero beyond the stored length).
    pub fn coord(&self, j: usize) -> BigRational {
        self.0.get(j).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_rational(&self) -> bool {
        self.0.len() <= 1
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        match self.0.len() {
            0 => Some(BigRational::zero()),
            1 => Some(self.0[0].clone()),
            _ => None,
        }
    }

    pub fn is_integer(&self) -> bool {
        self.as_rational().map(|q| q.is_integer()).unwrap_or(false)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        Self::from_coords((0..n).map(|j| self.coord(j) + other.coord(j)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        Self::from_coords((0..n).map(|j| self.coord(j) - other.coord(j)).collect())
    }

    pub fn neg(&self) -> Self {
        FieldElem(self.0.iter().map(|c| -c).collect())
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        FieldElem(self.0.iter().map(|c| c * q).collect())
    }

    /// Renders as a sum over θ-powers, e.g. `3-2*theta`.
    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (j, c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let atom = match j {
                0 => String::new(),
                1 => "theta".to_string(),
                _ => format!("theta^{j}"),
            };
            push_signed_term(&mut out, c, &atom);
        }
        out
    }
}

/// Appends `±|c|*atom` to `out`, omitting a unit coefficient and a leading `+`.
pub(crate) fn push_signed_term(out: &mut String, c: &BigRational, atom: &str) {
    if c.is_negative() {
        out.push('-');
    } else if !out.is_empty() {
        out.push('+');
    }
    let a = c.abs();
    if atom.is_empty() {
        out.push_str(&render_rational(&a));
    } else if a.is_one() {
        out.push_str(atom);
    } else {
        out.push_str(&render_rational(&a));
        out.push('*');
        out.push_str(atom);
    }
}

pub fn render_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldElem({})", self.render())
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// θ = (−b + s·√Δ)/2 for a monic quadratic x² + b·x + c.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Quadratic {
    b: BigInt,
    disc: BigInt,
    root_sign: i8,
}

/// A real number field ℚ(θ).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumberField {
    minpoly: Vec<BigInt>,
    lo: BigRational,
    hi: BigRational,
    quad: Option<Quadratic>,
    theta_cache: ThetaCache,
}

// Bisection brackets for theta by bit budget, shared between clones. It
// never takes part in equality.
#[derive(Clone, Default)]
struct ThetaCache(Arc<RwLock<BTreeMap<u32, Interval>>>);

impl PartialEq for ThetaCache {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for ThetaCache {}

impl fmt::Debug for ThetaCache {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ThetaCache")
    }
}

impl NumberField {
    /// Builds ℚ(θ) from a monic minimal polynomial (ascending coefficients)
    /// and a bracket containing exactly one real root.
    pub fn new(minpoly: Vec<BigInt>, lo: BigRational, hi: BigRational) -> Result<Self> {
        let minpoly = uni::trim(minpoly);
        let deg = match uni::degree(&minpoly) {
            Some(d) if d >= 1 => d,
            _ => return Err(Error::NonMonic),
        };
        if !minpoly[deg].is_one() {
            return Err(Error::NonMonic);
        }
        if lo >= hi {
            return Err(Error::Invalid("isolating interval needs lo < hi".into()));
        }
        let roots = if deg == 1 {
            let root = BigRational::from_integer(-minpoly[0].clone());
            usize::from(root >= lo && root <= hi)
        } else {
            let plo = uni::eval_rat(&minpoly, &lo);
            let phi = uni::eval_rat(&minpoly, &hi);
            if plo.is_zero() || phi.is_zero() {
                return Err(Error::Invalid(
                    "bracket endpoint is a rational root, so the polynomial is reducible".into(),
                ));
            }
            let count = sturm_count(&minpoly, &lo, &hi);
            if count == 1 && plo.signum() == phi.signum() {
                // a double root would show up here; reject as non-isolating
                return Err(Error::MultipleRoots(2));
            }
            count
        };
        match roots {
            0 => return Err(Error::ZeroRoots),
            1 => {}
            n => return Err(Error::MultipleRoots(n)),
        }
        let quad = if deg == 2 {
            let b = minpoly[1].clone();
            let c = minpoly[0].clone();
            let disc = &b * &b - BigInt::from(4) * c;
            if is_square(&disc) {
                return Err(Error::Invalid("quadratic minimal polynomial is reducible".into()));
            }
            // compare the larger root (−b + √Δ)/2 against lo
            let u = BigRational::from_integer(-b.clone()) - &lo * BigRational::from_integer(2.into());
            let above_lo = sign_quadratic(&u, &BigRational::one(), &disc) >= 0;
            let u_hi = BigRational::from_integer(-b.clone()) - &hi * BigRational::from_integer(2.into());
            let below_hi = sign_quadratic(&u_hi, &BigRational::one(), &disc) <= 0;
            let root_sign = if above_lo && below_hi { 1 } else { -1 };
            Some(Quadratic { b, disc, root_sign })
        } else {
            None
        };
        Ok(NumberField { minpoly, lo, hi, quad, theta_cache: ThetaCache::default() })
    }

    /// The field ℚ itself (θ = 0).
    pub fn rationals() -> Self {
        NumberField::new(
            vec![BigInt::zero(), BigInt::one()],
            BigRational::from_integer((-1).into()),
            BigRational::from_integer(1.into()),
        )
        .expect("x is a valid minimal polynomial")
    }

    /// ℚ(√n) for a positive non-square integer n.
    pub fn sqrt(n: u64) -> Result<Self> {
        let n_big = BigInt::from(n);
        let lo = BigRational::from_integer(n_big.sqrt());
        let hi = &lo + BigRational::one();
        NumberField::new(vec![-n_big, BigInt::zero(), BigInt::one()], lo, hi)
    }

    pub fn degree(&self) -> usize {
        self.minpoly.len() - 1
    }

    pub fn minpoly(&self) -> &[BigInt] {
        &self.minpoly
    }

    pub fn bracket(&self) -> (&BigRational, &BigRational) {
        (&self.lo, &self.hi)
    }

    /// For a quadratic field, the discriminant Δ with θ = (−b ± √Δ)/2.
    pub fn discriminant(&self) -> Option<&BigInt> {
        self.quad.as_ref().map(|q| &q.disc)
    }

    pub fn theta(&self) -> FieldElem {
        if self.degree() == 1 {
            FieldElem::from_int(-self.minpoly[0].clone())
        } else {
            FieldElem::from_coords(vec![BigRational::zero(), BigRational::one()])
        }
    }

    /// √n as an element of this field, when it lies in it.
    pub fn sqrt_of(&self, n: &BigInt) -> Option<FieldElem> {
        if n.is_negative() {
            return None;
        }
        let (c, s) = square_split(n);
        if s.is_one() || n.is_zero() {
            return Some(FieldElem::from_int(c));
        }
        let q = self.quad.as_ref()?;
        let (e, s_disc) = square_split(&q.disc);
        if s != s_disc {
            return None;
        }
        // θ = (−b + σ√Δ)/2, so √Δ = σ(2θ + b) and √n = (c/e)·√Δ
        let k = BigRational::new(c, e) * BigRational::from_integer(q.root_sign.into());
        let two_theta_b =
            FieldElem::from_coords(vec![BigRational::from_integer(q.b.clone()), BigRational::from_integer(2.into())]);
        Some(two_theta_b.scale(&k))
    }

    pub fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        if a.is_zero() || b.is_zero() {
            return FieldElem::zero();
        }
        let mut prod = vec![BigRational::zero(); a.0.len() + b.0.len() - 1];
        for (i, x) in a.0.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.0.iter().enumerate() {
                prod[i + j] += x * y;
            }
        }
        self.reduce(prod)
    }

    pub fn pow(&self, a: &FieldElem, e: u32) -> FieldElem {
        let mut acc = FieldElem::one();
        let mut base = a.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// Reduces a coefficient vector modulo the (monic) minimal polynomial.
    pub fn reduce(&self, mut coeffs: Vec<BigRational>) -> FieldElem {
        let d = self.degree();
        while coeffs.len() > d {
            let top = coeffs.pop().expect("nonempty");
            if top.is_zero() {
                continue;
            }
            let shift = coeffs.len() - d;
            for (j, m) in self.minpoly[..d].iter().enumerate() {
                if !m.is_zero() {
                    coeffs[shift + j] -= &top * BigRational::from_integer(m.clone());
                }
            }
        }
        FieldElem::from_coords(coeffs)
    }

    /// `a` written as u + v·√Δ for quadratic fields.
    fn quadratic_parts(&self, a: &FieldElem) -> Option<(BigRational, BigRational, &BigInt)> {
        let q = self.quad.as_ref()?;
        let q0 = a.coord(0);
        let q1 = a.coord(1);
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let u = q0 - &q1 * BigRational::from_integer(q.b.clone()) * &half;
        let v = q1 * half * BigRational::from_integer(BigInt::from(q.root_sign));
        Some((u, v, &q.disc))
    }

    /// Exact sign; interval refinement is only used for degree ≥ 3.
    pub fn sign(&self, a: &FieldElem, ctx: &PrecisionCtx) -> Result<i8> {
        if let Some(q) = a.as_rational() {
            return Ok(signum_rat(&q));
        }
        if let Some((u, v, disc)) = self.quadratic_parts(a) {
            return Ok(sign_quadratic(&u, &v, disc));
        }
        self.sign_by_intervals(a, ctx)
    }

    pub fn cmp(&self, a: &FieldElem, b: &FieldElem, ctx: &PrecisionCtx) -> Result<Ordering> {
        Ok(self.sign(&a.sub(b), ctx)?.cmp(&0))
    }

    /// Exact ⌊a⌋.
    pub fn floor(&self, a: &FieldElem, ctx: &PrecisionCtx) -> Result<BigInt> {
        if let Some(q) = a.as_rational() {
            return Ok(q.floor().to_integer());
        }
        if let Some((u, v, disc)) = self.quadratic_parts(a) {
            return Ok(floor_quadratic(&u, &v, disc));
        }
        self.floor_by_intervals(a, ctx)
    }

    /// Fractional part a − ⌊a⌋ together with the floor.
    pub fn frac(&self, a: &FieldElem, ctx: &PrecisionCtx) -> Result<(FieldElem, BigInt)> {
        let z = self.floor(a, ctx)?;
        Ok((a.sub(&FieldElem::from_int(z.clone())), z))
    }

    /// Nested bisection bracket for θ of width at most 2^-bits.
    pub fn theta_interval(&self, bits: u32) -> Interval {
        if let Some(iv) = self.theta_cache.0.read().ok().and_then(|m| m.get(&bits).cloned()) {
            return iv;
        }
        let iv = self.bisect_theta(bits);
        if let Ok(mut m) = self.theta_cache.0.write() {
            m.insert(bits, iv.clone());
        }
        iv
    }

    fn bisect_theta(&self, bits: u32) -> Interval {
        if self.degree() == 1 {
            let r = BigRational::from_integer(-self.minpoly[0].clone());
            return Interval::point(r);
        }
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        let s_lo = uni::eval_rat(&self.minpoly, &lo).signum();
        let target = BigRational::new(BigInt::one(), BigInt::one() << bits as usize);
        let two = BigRational::from_integer(2.into());
        while &hi - &lo > target {
            let mid = (&lo + &hi) / &two;
            let s = uni::eval_rat(&self.minpoly, &mid).signum();
            if s.is_zero() {
                return Interval::point(mid);
            }
            if s == s_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Interval { lo, hi }
    }

    /// Interval enclosure of `a` at the given bit budget.
    pub fn enclose(&self, a: &FieldElem, bits: u32) -> Interval {
        let theta = self.theta_interval(bits);
        let frac_bits = bits + 32;
        let mut acc = Interval::point(BigRational::zero());
        for c in a.0.iter().rev() {
            acc = acc.mul(&theta).add_scalar(c).round_out(frac_bits);
        }
        acc
    }

    /// Sign decided purely by interval refinement.
    pub fn sign_by_intervals(&self, a: &FieldElem, ctx: &PrecisionCtx) -> Result<i8> {
        if a.is_zero() {
            return Ok(0);
        }
        let mut last = ctx.start_bits;
        for bits in ctx.schedule() {
            last = bits;
            let iv = self.enclose(a, bits);
            if iv.lo.is_positive() {
                return Ok(1);
            }
            if iv.hi.is_negative() {
                return Ok(-1);
            }
            if iv.lo.is_zero() && iv.hi.is_zero() {
                return Ok(0);
            }
        }
        Err(Error::PrecisionExhausted { bits: last })
    }

    /// Floor decided purely by interval refinement.
    pub fn floor_by_intervals(&self, a: &FieldElem, ctx: &PrecisionCtx) -> Result<BigInt> {
        if let Some(q) = a.as_rational() {
            return Ok(q.floor().to_integer());
        }
        let mut last = ctx.start_bits;
        for bits in ctx.schedule() {
            last = bits;
            let iv = self.enclose(a, bits);
            let fl = iv.lo.floor();
            if fl == iv.hi.floor() && iv.hi < &fl + BigRational::one() {
                return Ok(fl.to_integer());
            }
        }
        Err(Error::PrecisionExhausted { bits: last })
    }

    /// Double-precision approximation, for display and plotting only.
    pub fn approx(&self, a: &FieldElem) -> f64 {
        if let Some(q) = a.as_rational() {
            return q.to_f64().unwrap_or(f64::NAN);
        }
        if let Some((u, v, disc)) = self.quadratic_parts(a) {
            return approx_quadratic(&u, &v, disc);
        }
        let iv = self.enclose(a, 64);
        let mid = (iv.lo + iv.hi) / BigRational::from_integer(2.into());
        mid.to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal rendering with `digits` significant digits, truncated toward
    /// zero. Every emitted digit is exact.
    pub fn to_decimal(&self, a: &FieldElem, digits: usize, ctx: &PrecisionCtx) -> Result<String> {
        let digits = digits.max(1);
        let s = self.sign(a, ctx)?;
        if s == 0 {
            return Ok("0".into());
        }
        let abs = if s < 0 { a.neg() } else { a.clone() };
        let int_part = self.floor(&abs, ctx)?;
        // exponent e with 10^e <= |a| < 10^(e+1)
        let e: i64 = if int_part.is_positive() {
            int_part.to_string().len() as i64 - 1
        } else {
            let mut k = 1i64;
            loop {
                let scaled = abs.scale(&BigRational::from_integer(BigInt::from(10).pow(k as u32)));
                if self.floor(&scaled, ctx)?.is_positive() {
                    break -k;
                }
                k += 1;
            }
        };
        let shift = digits as i64 - 1 - e;
        let scaled = if shift >= 0 {
            abs.scale(&BigRational::from_integer(BigInt::from(10).pow(shift as u32)))
        } else {
            abs.scale(&BigRational::new(BigInt::one(), BigInt::from(10).pow((-shift) as u32)))
        };
        let mantissa = self.floor(&scaled, ctx)?.to_string();
        let mut out = String::new();
        if s < 0 {
            out.push('-');
        }
        if e >= 0 {
            let int_len = (e + 1) as usize;
            if int_len >= mantissa.len() {
                out.push_str(&mantissa);
                out.push_str(&"0".repeat(int_len - mantissa.len()));
            } else {
                out.push_str(&mantissa[..int_len]);
                out.push('.');
                out.push_str(&mantissa[int_len..]);
            }
        } else {
            out.push_str("0.");
            out.push_str(&"0".repeat((-e - 1) as usize));
            out.push_str(&mantissa);
        }
        Ok(out)
    }
}

/// Closed interval with rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Interval {
    pub fn point(x: BigRational) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    pub fn add_scalar(&self, c: &BigRational) -> Interval {
        Interval { lo: &self.lo + c, hi: &self.hi + c }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let cands = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = cands.iter().min().expect("four products").clone();
        let hi = cands.iter().max().expect("four products").clone();
        Interval { lo, hi }
    }

    /// Rounds endpoints outward to multiples of 2^-frac_bits.
    pub fn round_out(&self, frac_bits: u32) -> Interval {
        let scale = BigRational::from_integer(BigInt::one() << frac_bits as usize);
        let lo = (&self.lo * &scale).floor() / &scale;
        let hi = (&self.hi * &scale).ceil() / &scale;
        Interval { lo, hi }
    }
}

/// Number of distinct real roots of a square-free `p` in (lo, hi), by Sturm's
/// theorem. Neither endpoint may be a root.
pub fn sturm_count(p: &[BigInt], lo: &BigRational, hi: &BigRational) -> usize {
    let to_rat = |v: &[BigInt]| v.iter().map(|c| BigRational::from_integer(c.clone())).collect::<Vec<_>>();
    let mut seq = vec![to_rat(p), to_rat(&uni::derivative(p))];
    loop {
        let n = seq.len();
        let r = rat_rem(&seq[n - 2], &seq[n - 1]);
        if r.is_empty() {
            break;
        }
        seq.push(r.into_iter().map(|c| -c).collect());
    }
    let changes = |x: &BigRational| {
        let signs: Vec<i8> = seq.iter().map(|q| signum_rat(&eval_rat_poly(q, x))).filter(|&s| s != 0).collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    };
    changes(lo).saturating_sub(changes(hi))
}

fn eval_rat_poly(p: &[BigRational], x: &BigRational) -> BigRational {
    p.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

fn rat_rem(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut r: Vec<BigRational> = a.to_vec();
    let db = b.len() - 1;
    let lead = b[db].clone();
    while r.len() > db {
        let top = r.pop().expect("nonempty");
        if top.is_zero() {
            continue;
        }
        let f = top / &lead;
        let shift = r.len() - db;
        for (j, c) in b[..db].iter().enumerate() {
            r[shift + j] -= &f * c;
        }
    }
    while r.last().map(|c| c.is_zero()).unwrap_or(false) {
        r.pop();
    }
    r
}

fn signum_rat(q: &BigRational) -> i8 {
    match q.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

fn is_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &r * &r == *n
}

/// Exact sign of u + v·√Δ for a positive non-square Δ.
pub fn sign_quadratic(u: &BigRational, v: &BigRational, disc: &BigInt) -> i8 {
    let su = signum_rat(u);
    let sv = signum_rat(v);
    if sv == 0 {
        return su;
    }
    if su == 0 || su == sv {
        return sv;
    }
    // opposite signs: compare u² with v²·Δ
    let lhs = u * u;
    let rhs = v * v * BigRational::from_integer(disc.clone());
    match lhs.cmp(&rhs) {
        Ordering::Greater => su,
        Ordering::Less => sv,
        Ordering::Equal => 0,
    }
}

/// Exact ⌊u + v·√Δ⌋ via an integer square root.
// (a + b√Δ)/c to within 2^-64/c, from one integer square root.
fn approx_quadratic(u: &BigRational, v: &BigRational, disc: &BigInt) -> f64 {
    let c = u.denom().lcm(v.denom());
    let a = (u * BigRational::from_integer(c.clone())).to_integer();
    let b = (v * BigRational::from_integer(c.clone())).to_integer();
    let shift = 64usize;
    let r = ((&b * &b * disc) << (2 * shift)).sqrt();
    let r = if b.is_negative() { -r } else { r };
    let num = (a << shift) + r;
    BigRational::new(num, c << shift).to_f64().unwrap_or(f64::NAN)
}

pub fn floor_quadratic(u: &BigRational, v: &BigRational, disc: &BigInt) -> BigInt {
    let c = u.denom().lcm(v.denom());
    let a = (u * BigRational::from_integer(c.clone())).to_integer();
    let b = (v * BigRational::from_integer(c.clone())).to_integer();
    // f = ⌊b·√Δ⌋; b·√Δ is irrational unless b = 0
    let r = (&b * &b * disc).sqrt();
    let f = if b.is_negative() {
        if &r * &r == &b * &b * disc {
            -r
        } else {
            -r - 1
        }
    } else {
        r
    };
    // ⌊(a + b√Δ)/c⌋ = ⌊(a + f)/c⌋ since a + f and a + f + 1 bracket it
    (a + f).div_floor(&c)
}

/// Splits n ≥ 1 as c²·s with s squarefree; returns (c, s).
fn square_split(n: &BigInt) -> (BigInt, BigInt) {
    let mut c = BigInt::one();
    let mut s = BigInt::one();
    let mut m = n.abs();
    let mut d = BigInt::from(2);
    while &d * &d <= m {
        let mut e = 0u32;
        while (&m % &d).is_zero() {
            m /= &d;
            e += 1;
        }
        c *= num_traits::pow(d.clone(), (e / 2) as usize);
        if e % 2 == 1 {
            s *= &d;
        }
        d += 1;
    }
    s *= m;
    (c, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn sqrt2_bracket() {
        let f = NumberField::new(ints(&[-2, 0, 1]), q(1, 1), q(2, 1)).unwrap();
        assert_eq!(f.degree(), 2);
        let t = f.theta();
        assert_eq!(f.mul(&t, &t), FieldElem::from_int(2));
    }

    #[test]
    fn rational_field_from_linear() {
        let f = NumberField::new(ints(&[-1, 1]), q(0, 1), q(2, 1)).unwrap();
        assert_eq!(f.degree(), 1);
        assert_eq!(f.theta(), FieldElem::from_int(1));
    }

    #[test]
    fn bracket_errors() {
        assert_eq!(NumberField::new(ints(&[-2, 0, 1]), q(-2, 1), q(2, 1)).unwrap_err(), Error::MultipleRoots(2));
        assert_eq!(NumberField::new(ints(&[-2, 0, 1]), q(2, 1), q(3, 1)).unwrap_err(), Error::ZeroRoots);
        assert_eq!(NumberField::new(ints(&[-2, 0, 2]), q(1, 1), q(2, 1)).unwrap_err(), Error::NonMonic);
    }

    #[test]
    fn negative_root_orientation() {
        let f = NumberField::new(ints(&[-2, 0, 1]), q(-2, 1), q(-1, 1)).unwrap();
        let ctx = PrecisionCtx::default();
        assert_eq!(f.sign(&f.theta(), &ctx).unwrap(), -1);
        assert_eq!(f.floor(&f.theta(), &ctx).unwrap(), BigInt::from(-2));
    }

    #[test]
    fn sign_and_floor_examples() {
        let f = NumberField::sqrt(2).unwrap();
        let ctx = PrecisionCtx::default();
        let a = f.theta().sub(&FieldElem::from_rational(q(3, 2)));
        assert_eq!(f.sign(&a, &ctx).unwrap(), -1);
        assert_eq!(f.sign_by_intervals(&a, &ctx).unwrap(), -1);
        let b = f.theta().scale(&q(99, 1));
        assert_eq!(f.floor(&b, &ctx).unwrap(), BigInt::from(140));
        assert_eq!(f.floor_by_intervals(&b, &ctx).unwrap(), BigInt::from(140));
        assert_eq!(f.floor(&FieldElem::from_rational(q(7, 2)), &ctx).unwrap(), BigInt::from(3));
    }

    #[test]
    fn cubic_field_uses_intervals() {
        // θ = 2^(1/3)
        let f = NumberField::new(ints(&[-2, 0, 0, 1]), q(1, 1), q(2, 1)).unwrap();
        let ctx = PrecisionCtx::default();
        let t = f.theta();
        assert_eq!(f.mul(&f.mul(&t, &t), &t), FieldElem::from_int(2));
        // 100·2^(1/3) = 125.99...
        assert_eq!(f.floor(&t.scale(&q(100, 1)), &ctx).unwrap(), BigInt::from(125));
        let d = f.to_decimal(&t, 12, &ctx).unwrap();
        assert_eq!(d, "1.25992104989");
    }

    #[test]
    fn decimal_rendering() {
        let f = NumberField::sqrt(2).unwrap();
        let ctx = PrecisionCtx::default();
        let t = f.theta();
        assert_eq!(f.to_decimal(&t, 10, &ctx).unwrap(), "1.414213562");
        let small = t.sub(&FieldElem::from_int(1)).scale(&q(1, 1000));
        assert_eq!(f.to_decimal(&small, 5, &ctx).unwrap(), "0.00041421");
        assert_eq!(f.to_decimal(&t.scale(&q(-1000, 1)), 6, &ctx).unwrap(), "-1414.21");
        assert_eq!(f.to_decimal(&FieldElem::from_int(120), 2, &ctx).unwrap(), "120");
    }

    #[test]
    fn render_elements() {
        let f = NumberField::sqrt(2).unwrap();
        let g = FieldElem::from_int(3).sub(&f.theta().scale(&q(2, 1)));
        assert_eq!(g.render(), "3-2*theta");
        assert_eq!(f.theta().sub(&FieldElem::from_int(1)).render(), "-1+theta");
    }

    #[test]
    fn square_roots_in_field() {
        let f = NumberField::sqrt(2).unwrap();
        assert_eq!(f.sqrt_of(&8.into()).unwrap().render(), "2*theta");
        assert_eq!(f.sqrt_of(&9.into()).unwrap(), FieldElem::from_int(3));
        assert!(f.sqrt_of(&3.into()).is_none());
        let phi = NumberField::new(vec![(-1).into(), (-1).into(), 1.into()], q(1, 1), q(2, 1)).unwrap();
        assert_eq!(phi.sqrt_of(&5.into()).unwrap().render(), "-1+2*theta");
        let other = NumberField::new(vec![(-1).into(), (-1).into(), 1.into()], q(-1, 1), q(0, 1)).unwrap();
        assert_eq!(other.sqrt_of(&5.into()).unwrap().render(), "1-2*theta");
    }

    #[test]
    fn precision_schedule() {
        let ctx = PrecisionCtx::default();
        let s: Vec<u32> = ctx.schedule().collect();
        assert_eq!(s, vec![64, 128, 256, 512, 1024, 2048, 4096]);
        assert!(PrecisionCtx::new(128, 64).is_err());
    }
}
