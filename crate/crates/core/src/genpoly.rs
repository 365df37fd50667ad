//! Special sequences t, f1 - r1, ..., fn - rn, their compiled sigma
//! polynomials, exact evaluation of the bounded generalized polynomials
//! gamma_i, and detection of polynomial identities among the gamma_i.
//!
//! Clauses checked by [`special_validate`]:
//!
//! 1. the first generator is exactly `t`;
//! 2. f1 + r1 has algebraic (symbol-free) coefficients;
//! 3. fi + ri involves only the symbols r1..r(i-1);
//! 4. every t-exponent is a natural number;
//! 5. every ri has a unit-interval shadow in (0, 1);
//! 6. each fi is non-constant in t;
//! 7. there is exactly one symbol per generator after `t`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{FieldElem, NumberField, PrecisionCtx};
use crate::lattice;
use crate::poly::{monomials_up_to, render_monomial, IntPoly, MPoly, Monomial};
use crate::puiseux::PuiseuxPoly;
use crate::ringlab::RingPresentation;
use crate::scalar::{Domain, Scalar};

/// One violated clause of the special-sequence definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub clause: u8,
    pub index: usize,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "clause {} (generator {}): {}", self.clause, self.index, self.message)
    }
}

/// Polynomial in y0..y(n-1) with symbol-free Scalar coefficients.
pub type AlgPoly = MPoly<Scalar>;

#[derive(Clone, Debug)]
pub struct SpecialSequence {
    dom: Arc<Domain>,
    names: Vec<String>,
    gens: Vec<PuiseuxPoly>,
    // g[i-1] = fi + ri as a polynomial in (t, x1..x(n-1)) -> (y0..y(n-1))
    g: Vec<AlgPoly>,
}

/// Checks every clause; returns the sequence or all violations found.
pub fn special_validate(
    dom: &Arc<Domain>,
    names: Vec<String>,
    gens: Vec<PuiseuxPoly>,
) -> std::result::Result<SpecialSequence, Vec<Violation>> {
    let mut bad = Vec::new();
    let mut v = |clause: u8, index: usize, message: String| bad.push(Violation { clause, index, message });
    let n = gens.len().saturating_sub(1);
    if gens.first() != Some(&PuiseuxPoly::t(dom)) {
        v(1, 0, "the first generator must be t".into());
    }
    if dom.nsyms() != n {
        v(7, 0, format!("{} generators after t need {} symbols, found {}", n, n, dom.nsyms()));
    }
    for s in 0..dom.nsyms() {
        let sh = dom.symbols.shadow(s);
        let ok = dom.symbols.is_unit_interval(s) && sh > &BigRational::zero() && sh < &BigRational::one();
        if !ok {
            v(5, s + 1, format!("symbol {} needs a unit-interval shadow in (0,1)", dom.symbols.name(s)));
        }
    }
    let mut g = Vec::new();
    for (i, f) in gens.iter().enumerate().skip(1) {
        if !f.has_integer_exponents() || f.has_negative_exponents() {
            v(4, i, format!("{} is not a polynomial in t", f.render()));
        }
        if f.is_t_free() {
            v(6, i, format!("{} is constant in t", f.render()));
        }
        if i > dom.nsyms() {
            continue;
        }
        let gi = f.try_add(&PuiseuxPoly::constant(Scalar::symbol(dom, i - 1)));
        let Ok(gi) = gi else {
            v(3, i, "generator lives over a different domain".into());
            continue;
        };
        let foreign: Vec<usize> =
            gi.raw_terms_desc().flat_map(|(_, c)| c.symbols_used()).filter(|&s| s + 1 >= i).collect();
        if !foreign.is_empty() {
            let names: Vec<&str> = {
                let mut s = foreign.clone();
                s.sort();
                s.dedup();
                s.into_iter().map(|s| dom.symbols.name(s)).collect()
            };
            let (clause, allowed) = if i == 1 {
                (2, "algebraic coefficients only".to_string())
            } else {
                let prev: Vec<&str> = (0..i - 1).map(|s| dom.symbols.name(s)).collect();
                (3, format!("a polynomial in t and {}", prev.join(", ")))
            };
            v(
                clause,
                i,
                format!(
                    "{} + {} must be {allowed}, but it involves {}",
                    f.render(),
                    dom.symbols.name(i - 1),
                    names.join(", ")
                ),
            );
            continue;
        }
        if f.has_integer_exponents() && !f.has_negative_exponents() {
            g.push(to_alg_poly(&gi, n));
        }
    }
    if bad.is_empty() {
        Ok(SpecialSequence { dom: dom.clone(), names, gens, g })
    } else {
        Err(bad)
    }
}

// Reads c * t^k * r^alpha as c * y0^k * y^alpha (symbol s -> y(s+1)).
fn to_alg_poly(p: &PuiseuxPoly, n: usize) -> AlgPoly {
    let dom = p.domain();
    let mut terms = Vec::new();
    for (k, c) in p.raw_terms_desc() {
        for (sym, f) in c.terms() {
            let mut m = vec![0u32; n.max(1)];
            m[0] = k as u32;
            for (s, &e) in sym.iter().enumerate() {
                if e > 0 {
                    m[s + 1] = e;
                }
            }
            terms.push((m, Scalar::from_field(dom, f.clone())));
        }
    }
    MPoly::from_terms(n.max(1), terms)
}

impl SpecialSequence {
    pub fn new(dom: &Arc<Domain>, names: Vec<String>, gens: Vec<PuiseuxPoly>) -> Result<Self> {
        special_validate(dom, names, gens).map_err(Error::NotSpecial)
    }

    /// Number n of generators after t.
    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.dom
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn gens(&self) -> &[PuiseuxPoly] {
        &self.gens
    }

    /// fi + ri as a polynomial in y0..y(n-1).
    pub fn g(&self, i: usize) -> &AlgPoly {
        &self.g[i - 1]
    }

    pub fn ring(&self) -> Result<RingPresentation> {
        RingPresentation::new(&self.dom, self.names.clone(), self.gens.clone())
    }
}

/// sigma polynomials plus a flattened form for fast evaluation at integer
/// arguments.
#[derive(Clone, Debug)]
pub struct CompiledSystem {
    seq: SpecialSequence,
    sigma: Vec<AlgPoly>,
    flat: Vec<Vec<(Monomial, FieldElem)>>,
}

/// sigma1 = g1 and sigmai = gi(y0, sigma1 - y1, ..., sigma(i-1) - y(i-1)).
pub fn compile_sigma(seq: &SpecialSequence) -> CompiledSystem {
    let n = seq.len().max(1);
    let dom = &seq.dom;
    let zero = AlgPoly::zero(n);
    let one = AlgPoly::constant(n, Scalar::one(dom));
    let var = |j: usize| AlgPoly::var(n, j, Scalar::one(dom));
    let mut sigma: Vec<AlgPoly> = Vec::new();
    for i in 1..=seq.len() {
        let mut args = vec![var(0)];
        for j in 1..n {
            args.push(if j < i { sigma[j - 1].sub(&var(j)) } else { var(j) });
        }
        let s = seq.g(i).substitute(&args, &zero, &one, |c| AlgPoly::constant(n, c.clone()));
        sigma.push(s);
    }
    let flat = sigma
        .iter()
        .map(|s| s.terms().map(|(m, c)| (m.clone(), c.as_field_elem().expect("symbol-free coefficient"))).collect())
        .collect();
    CompiledSystem { seq: seq.clone(), sigma, flat }
}

/// Exact gamma values and integer chain at one y0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaPoint {
    pub y0: BigInt,
    pub gamma: Vec<FieldElem>,
    pub ychain: Vec<BigInt>,
}

impl CompiledSystem {
    pub fn sequence(&self) -> &SpecialSequence {
        &self.seq
    }

    pub fn field(&self) -> &NumberField {
        &self.seq.dom.field
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn sigma(&self, i: usize) -> &AlgPoly {
        &self.sigma[i - 1]
    }

    /// sigma_i at integer arguments ys = (y0, ..., y(i-1)).
    pub fn sigma_value(&self, i: usize, ys: &[BigInt]) -> FieldElem {
        let mut acc = FieldElem::zero();
        for (m, c) in &self.flat[i - 1] {
            let mut w = BigInt::one();
            for (j, &e) in m.iter().enumerate() {
                if e > 0 {
                    w *= num_traits::pow(ys[j].clone(), e as usize);
                }
            }
            if !w.is_zero() {
                acc = acc.add(&c.scale(&BigRational::from_integer(w)));
            }
        }
        acc
    }

    /// Computes gamma_1.. in order, stopping early when `keep_going`
    /// returns false; the returned point holds the values computed so far.
    pub fn gamma_prefix(
        &self,
        y0: &BigInt,
        ctx: &PrecisionCtx,
        mut keep_going: impl FnMut(usize, &FieldElem) -> Result<bool>,
    ) -> Result<GammaPoint> {
        let field = self.field();
        let mut ys = vec![y0.clone()];
        ys.resize(self.len().max(1), BigInt::zero());
        let mut gamma = Vec::with_capacity(self.len());
        let mut ychain = Vec::with_capacity(self.len());
        for i in 1..=self.len() {
            let s = self.sigma_value(i, &ys);
            let yi = field.floor(&s, ctx)?;
            let g = s.sub(&FieldElem::from_int(yi.clone()));
            if i < ys.len() {
                ys[i] = yi.clone();
            }
            ychain.push(yi);
            let cont = keep_going(i, &g)?;
            gamma.push(g);
            if !cont {
                break;
            }
        }
        Ok(GammaPoint { y0: y0.clone(), gamma, ychain })
    }

    /// All gamma values and the chain yi = floor(sigma_i).
    pub fn gamma_eval(&self, y0: &BigInt, ctx: &PrecisionCtx) -> Result<GammaPoint> {
        self.gamma_prefix(y0, ctx, |_, _| Ok(true))
    }

    /// Canonical text form, one sigma per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.sigma.iter().enumerate() {
            let args: Vec<String> = (0..=i).map(|j| format!("y{j}")).collect();
            out.push_str(&format!("sigma{}({}) = {}\n", i + 1, args.join(","), render_alg(s, "y", 0)));
        }
        out
    }
}

/// Renders an algebraic-coefficient polynomial with variables
/// `{prefix}{offset}`, `{prefix}{offset+1}`, ...
pub fn render_alg(p: &AlgPoly, prefix: &str, offset: usize) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let name = |i: usize| format!("{prefix}{}", i + offset);
    let mut out = String::new();
    for (m, c) in p.terms_desc() {
        let mono = render_monomial(m, &name);
        let coeff = c.render();
        let piece = if mono.is_empty() {
            coeff
        } else if c.summands() > 1 {
            format!("({coeff})*{mono}")
        } else {
            match coeff.as_str() {
                "1" => mono,
                "-1" => format!("-{mono}"),
                _ => format!("{coeff}*{mono}"),
            }
        };
        if !out.is_empty() && !piece.starts_with('-') {
            out.push('+');
        }
        out.push_str(&piece);
    }
    out
}

/// Renders an identity polynomial in u1..un.
pub fn render_identity(h: &IntPoly) -> String {
    h.render_with(|i| format!("u{}", i + 1))
}

/// Evaluates each of `monos` at the gamma vector.
fn monomial_values(field: &NumberField, monos: &[Monomial], gamma: &[FieldElem]) -> Vec<FieldElem> {
    let maxdeg = monos.iter().flat_map(|m| m.iter().copied()).max().unwrap_or(0) as usize;
    let powers: Vec<Vec<FieldElem>> = gamma
        .iter()
        .map(|g| {
            let mut v = vec![FieldElem::one()];
            for e in 1..=maxdeg {
                let next = field.mul(&v[e - 1], g);
                v.push(next);
            }
            v
        })
        .collect();
    monos
        .iter()
        .map(|m| {
            m.iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .fold(FieldElem::one(), |acc, (j, &e)| field.mul(&acc, &powers[j][e as usize]))
        })
        .collect()
}

/// Searches for integer polynomials h of degree at most `degree` with
/// h(gamma(y0)) = 0 at y0 = 1..=samples, keeping only those that also vanish
/// on the holdout points samples+1..=samples+holdout. Results are primitive
/// with positive leading coefficient, in Hermite-basis order.
pub fn identity_scan(
    sys: &CompiledSystem,
    degree: u32,
    samples: usize,
    holdout: usize,
    cap: usize,
    ctx: &PrecisionCtx,
) -> Result<Vec<IntPoly>> {
    let n = sys.len();
    let monos = monomials_up_to(n, degree);
    if monos.len() > cap {
        return Err(Error::CapExceeded { estimate: monos.len(), cap });
    }
    let need = 2 * monos.len();
    if samples < need {
        return Err(Error::InsufficientSamples { need, got: samples });
    }
    if holdout < 1 {
        return Err(Error::InsufficientSamples { need: 1, got: 0 });
    }
    let field = sys.field();
    let deg = field.degree();
    let points: Vec<Vec<FieldElem>> = (1..=(samples + holdout) as u64)
        .into_par_iter()
        .map(|y| sys.gamma_eval(&BigInt::from(y), ctx).map(|p| monomial_values(field, &monos, &p.gamma)))
        .collect::<Result<_>>()?;
    let (train, hold) = points.split_at(samples);
    let rows: Vec<Vec<BigRational>> = (0..monos.len())
        .map(|r| train.iter().flat_map(|vals| (0..deg).map(move |j| vals[r].coord(j))).collect())
        .collect();
    let basis = lattice::left_kernel(&lattice::integer_columns(&rows));
    let mut out = Vec::new();
    for v in basis {
        let passes = hold.iter().all(|vals| {
            let mut acc = FieldElem::zero();
            for (c, x) in v.iter().zip(vals) {
                if !c.is_zero() {
                    acc = acc.add(&x.scale(&BigRational::from_integer(c.clone())));
                }
            }
            acc.is_zero()
        });
        if passes {
            let h = IntPoly::from_terms(n, monos.iter().cloned().zip(v).filter(|(_, c)| !c.is_zero()));
            out.push(h.primitive());
        }
    }
    Ok(out)
}

/// Exact check of h(gamma(y0)) = 0.
pub fn identity_holds(sys: &CompiledSystem, h: &IntPoly, y0: &BigInt, ctx: &PrecisionCtx) -> Result<bool> {
    let p = sys.gamma_eval(y0, ctx)?;
    let field = sys.field();
    let terms: Vec<(Monomial, BigInt)> = h.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
    let monos: Vec<Monomial> = terms.iter().map(|(m, _)| m.clone()).collect();
    let vals = monomial_values(field, &monos, &p.gamma);
    let mut acc = FieldElem::zero();
    for ((_, c), x) in terms.iter().zip(vals) {
        acc = acc.add(&x.scale(&BigRational::from_integer(c.clone())));
    }
    Ok(acc.is_zero())
}

/// Checks h(gamma(y0)) = 0 for every y0 in 1..=y_max; returns the smallest
/// failing y0, if any.
pub fn identity_verify(sys: &CompiledSystem, h: &IntPoly, y_max: u64, ctx: &PrecisionCtx) -> Result<Option<u64>> {
    let bad = (1..=y_max)
        .into_par_iter()
        .map(|y| identity_holds(sys, h, &BigInt::from(y), ctx).map(|ok| (!ok).then_some(y)))
        .collect::<Result<Vec<_>>>()?;
    Ok(bad.into_iter().flatten().min())
}

/// The ring obstruction behind a gamma identity.
#[derive(Clone, Debug)]
pub struct Bridge {
    pub ring: RingPresentation,
    /// H = h(rho_1..rho_n) with rho_i = sigma_i(x0..x(i-1)) - x_i, so that
    /// H(t, f1, ..., fn) = h(r1, ..., rn).
    pub algebraic_witness: AlgPoly,
    /// H scaled to a primitive integer polynomial when its coefficients are
    /// rational.
    pub witness: Option<IntPoly>,
    /// Value of the integer witness on the generators (h(r) up to the
    /// scaling applied to reach `witness`).
    pub constant: Scalar,
    /// Degree to hand to the discreteness scan.
    pub suggested_degree: u32,
}

/// Turns a verified identity h(gamma) = 0 into the ring Z[t, f1, ..., fn]
/// and the witness polynomial H, ready for the discreteness scan.
pub fn identity_to_ring(h: &IntPoly, seq: &SpecialSequence) -> Result<Bridge> {
    let n = seq.len();
    if h.nvars() != n {
        return Err(Error::ArityMismatch { expected: n, got: h.nvars() });
    }
    if h.is_zero() {
        return Err(Error::ZeroIdentity);
    }
    let dom = &seq.dom;
    let sys = compile_sigma(seq);
    let nx = n + 1;
    let one = Scalar::one(dom);
    let xvar = |j: usize| AlgPoly::var(nx, j, one.clone());
    let widen = |p: &AlgPoly| {
        AlgPoly::from_terms(
            nx,
            p.terms().map(|(m, c)| {
                let mut w = m.clone();
                w.resize(nx, 0);
                (w, c.clone())
            }),
        )
    };
    let rho: Vec<AlgPoly> = (1..=n).map(|i| widen(sys.sigma(i)).sub(&xvar(i))).collect();
    let big = h.substitute(&rho, &AlgPoly::zero(nx), &AlgPoly::constant(nx, one.clone()), |c| {
        AlgPoly::constant(nx, Scalar::from_int(dom, c.clone()))
    });
    let syms: Vec<Scalar> = (0..n).map(|s| Scalar::symbol(dom, s)).collect();
    let k = h.substitute(&syms, &Scalar::zero(dom), &one, |c| Scalar::from_int(dom, c.clone()));
    let ring = seq.ring()?;

    let rational: Option<Vec<(Monomial, BigRational)>> =
        big.terms().map(|(m, c)| c.as_rational().map(|q| (m.clone(), q))).collect();
    let (witness, constant) = match rational {
        Some(terms) if !terms.is_empty() => {
            let lcm = terms.iter().fold(BigInt::one(), |l, (_, q)| num_integer::Integer::lcm(&l, q.denom()));
            let ints = IntPoly::from_terms(
                nx,
                terms.iter().map(|(m, q)| (m.clone(), (q * BigRational::from_integer(lcm.clone())).to_integer())),
            );
            let prim = ints.primitive();
            // prim = ints * (1/g) with g = content, sign included
            let (lm, lc) = ints.terms_desc()[0];
            let factor = BigRational::new(prim.coeff(lm).expect("same support").clone(), lc.clone())
                * BigRational::from_integer(lcm);
            let constant = k.scale(&factor);
            let check = PuiseuxPoly::substitute(&prim, ring.gens())?;
            if check != PuiseuxPoly::constant(constant.clone()) {
                return Err(Error::Internal("bridge witness does not reproduce its constant".into()));
            }
            (Some(prim), constant)
        }
        _ => (None, k),
    };
    Ok(Bridge { ring, suggested_degree: big.total_degree(), algebraic_witness: big, witness, constant })
}
