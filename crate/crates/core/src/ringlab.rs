//! Finitely generated subrings Z[f1..fn] of Puiseux polynomials and the
//! bounded-degree discreteness scanner.
//!
//! A violation is an integer polynomial H with H(f) t-free and equal to a
//! constant K that is not an integer. K is classified symbolically: a
//! constant involving any symbol is non-integer because the symbols stand
//! for algebraically independent reals; a symbol-free K is an element of
//! Q(theta) and is tested exactly.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice;
use crate::padic::PadicAssignment;
use crate::poly::{binomial, monomials_up_to, IntPoly, Monomial};
use crate::puiseux::PuiseuxPoly;
use crate::scalar::{Domain, Scalar};

pub const DEFAULT_DEGREE: u32 = 4;
pub const DEFAULT_CAP: usize = 5000;

// Degree used for the relation check when p-adic images are attached.
const RELATION_CHECK_DEGREE: u32 = 2;

#[derive(Clone, Debug)]
pub struct RingPresentation {
    dom: Arc<Domain>,
    names: Vec<String>,
    gens: Vec<PuiseuxPoly>,
    padic: Option<PadicAssignment>,
}

impl RingPresentation {
    /// Generators must be non-constant in t and share one domain.
    pub fn new(dom: &Arc<Domain>, names: Vec<String>, gens: Vec<PuiseuxPoly>) -> Result<Self> {
        if names.len() != gens.len() {
            return Err(Error::ArityMismatch { expected: names.len(), got: gens.len() });
        }
        if gens.is_empty() {
            return Err(Error::Invalid("a ring presentation needs at least one generator".into()));
        }
        let mut seen = BTreeSet::new();
        for (name, g) in names.iter().zip(&gens) {
            if !seen.insert(name.as_str()) {
                return Err(Error::Invalid(format!("duplicate generator name `{name}`")));
            }
            if !Arc::ptr_eq(g.domain(), dom) && **g.domain() != **dom {
                return Err(Error::FieldMismatch);
            }
            if g.is_t_free() {
                return Err(Error::Invalid(format!("generator {name} = {} is constant in t", g.render())));
            }
        }
        Ok(RingPresentation { dom: dom.clone(), names, gens, padic: None })
    }

    /// Attaches p-adic images after checking them against the integral
    /// relations found at low degree.
    pub fn with_padic(mut self, pad: PadicAssignment) -> Result<Self> {
        if let Some(n) = pad.ngens() {
            if n != self.gens.len() {
                return Err(Error::ArityMismatch { expected: self.gens.len(), got: n });
            }
        }
        let rels: Vec<(IntPoly, BigRational)> = finite_kernel(&self, RELATION_CHECK_DEGREE, DEFAULT_CAP)?
            .into_iter()
            .filter_map(|r| r.constant.as_rational().map(|c| (r.poly, c)))
            .collect();
        pad.check_relations(&rels)?;
        self.padic = Some(pad);
        Ok(self)
    }

    /// Presentation with one more generator.
    pub fn extended(&self, name: &str, g: PuiseuxPoly, pad: Option<PadicAssignment>) -> Result<Self> {
        let mut names = self.names.clone();
        names.push(name.to_string());
        let mut gens = self.gens.clone();
        gens.push(g);
        let ring = RingPresentation::new(&self.dom, names, gens)?;
        match pad {
            Some(p) => ring.with_padic(p),
            None => Ok(ring),
        }
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.dom
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn gens(&self) -> &[PuiseuxPoly] {
        &self.gens
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Index of a generator that is exactly t.
    pub fn t_index(&self) -> Option<usize> {
        let t = PuiseuxPoly::t(&self.dom);
        self.gens.iter().position(|g| *g == t)
    }

    pub fn padic(&self) -> Option<&PadicAssignment> {
        self.padic.as_ref()
    }

    /// Symbols occurring in any generator coefficient.
    pub fn symbols_used(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for g in &self.gens {
            for (_, c) in g.raw_terms_desc() {
                out.extend(c.symbols_used());
            }
        }
        out
    }

    /// Renders an integer polynomial in the generator names.
    pub fn render_poly(&self, h: &IntPoly) -> String {
        h.render_with(|i| self.names[i].clone())
    }
}

/// Coordinate of a PuiseuxPoly expansion: t-exponent, theta power and
/// symbol monomial.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ColumnKey {
    pub exponent: BigRational,
    pub theta_power: usize,
    pub symbols: Vec<u32>,
}

/// Monomials in the generators with their expansions as rational rows.
#[derive(Clone, Debug)]
pub struct ExpansionTable {
    pub monomials: Vec<Monomial>,
    pub expansions: Vec<PuiseuxPoly>,
    pub columns: Vec<ColumnKey>,
    pub rows: Vec<Vec<BigRational>>,
}

fn check_cap(ngens: usize, degree: u32, cap: usize) -> Result<usize> {
    let estimate = binomial(ngens + degree as usize, degree as usize);
    if estimate > cap {
        return Err(Error::CapExceeded { estimate, cap });
    }
    Ok(estimate)
}

/// Expands every generator monomial of total degree at most `degree`.
pub fn monomial_expand(ring: &RingPresentation, degree: u32, cap: usize) -> Result<ExpansionTable> {
    check_cap(ring.len(), degree, cap)?;
    let monomials = monomials_up_to(ring.len(), degree);
    let one = PuiseuxPoly::from_int(&ring.dom, 1);
    let powers: Vec<Vec<PuiseuxPoly>> = ring
        .gens
        .iter()
        .map(|g| {
            let mut v = vec![one.clone()];
            for e in 1..=degree as usize {
                let next = &v[e - 1] * g;
                v.push(next);
            }
            v
        })
        .collect();
    let expansions: Vec<PuiseuxPoly> = monomials
        .par_iter()
        .map(|m| {
            m.iter().enumerate().filter(|(_, &e)| e > 0).fold(one.clone(), |acc, (i, &e)| &acc * &powers[i][e as usize])
        })
        .collect();

    let mut keys = BTreeSet::new();
    for p in &expansions {
        for (e, c) in p.terms_desc() {
            for (sym, f) in c.terms() {
                for (j, q) in f.coords().iter().enumerate() {
                    if !q.is_zero() {
                        keys.insert(ColumnKey { exponent: e.clone(), theta_power: j, symbols: sym.clone() });
                    }
                }
            }
        }
    }
    let mut columns: Vec<ColumnKey> = keys.into_iter().collect();
    // highest t-exponent first
    columns.sort_by(|a, b| b.exponent.cmp(&a.exponent).then_with(|| a.cmp(b)));
    let index: std::collections::BTreeMap<&ColumnKey, usize> =
        columns.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let rows = expansions
        .iter()
        .map(|p| {
            let mut row = vec![BigRational::zero(); columns.len()];
            for (e, c) in p.terms_desc() {
                for (sym, f) in c.terms() {
                    for (j, q) in f.coords().iter().enumerate() {
                        if !q.is_zero() {
                            let key = ColumnKey { exponent: e.clone(), theta_power: j, symbols: sym.clone() };
                            row[index[&key]] = q.clone();
                        }
                    }
                }
            }
            row
        })
        .collect();
    Ok(ExpansionTable { monomials, expansions, columns, rows })
}

/// A t-free integer combination of generator monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelRelation {
    /// Coefficients over the table's monomials (ascending graded order).
    pub vector: Vec<BigInt>,
    /// The same combination as a primitive polynomial (leading coefficient
    /// positive); `constant` carries the matching sign.
    pub poly: IntPoly,
    /// H(f) as a t-free constant.
    pub constant: Scalar,
    /// Whether the constant is a rational integer.
    pub integer: bool,
}

/// Basis of the integer vectors whose combination of generator monomials
/// has no term with a nonzero t-exponent. The basis is in Hermite normal
/// form with respect to descending graded order, listed by ascending
/// leading monomial.
pub fn finite_kernel(ring: &RingPresentation, degree: u32, cap: usize) -> Result<Vec<KernelRelation>> {
    let table = monomial_expand(ring, degree, cap)?;
    let keep: Vec<usize> =
        table.columns.iter().enumerate().filter(|(_, k)| !k.exponent.is_zero()).map(|(i, _)| i).collect();
    // rows from the largest monomial down, so every echelon row has its own
    // leading monomial and low-degree relations appear as basis elements
    let sub: Vec<Vec<BigRational>> =
        table.rows.iter().rev().map(|r| keep.iter().map(|&j| r[j].clone()).collect()).collect();
    let basis: Vec<Vec<BigInt>> = lattice::left_kernel(&lattice::integer_columns(&sub))
        .into_iter()
        .rev()
        .map(|mut v| {
            v.reverse();
            v
        })
        .collect();
    let n = ring.len();
    let zero = Scalar::zero(&ring.dom);
    Ok(basis
        .into_iter()
        .map(|v| {
            let raw = IntPoly::from_terms(
                n,
                table.monomials.iter().cloned().zip(v.iter().cloned()).filter(|(_, c)| !c.is_zero()),
            );
            let poly = raw.primitive();
            let flipped = poly != raw;
            let mut constant = zero.clone();
            for (c, p) in v.iter().zip(&table.expansions) {
                if !c.is_zero() {
                    constant = &constant + &p.constant_term().scale(&BigRational::from_integer(c.clone()));
                }
            }
            if flipped {
                constant = -constant;
            }
            let integer = constant.is_integer();
            KernelRelation { vector: v, poly, constant, integer }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerdictKind {
    Violation,
    NoViolationUpTo,
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub witness: Option<IntPoly>,
    pub constant: Option<Scalar>,
    pub degree_bound: u32,
    /// The full kernel basis the verdict was read from.
    pub relations: Vec<KernelRelation>,
}

impl Verdict {
    pub fn is_violation(&self) -> bool {
        self.kind == VerdictKind::Violation
    }
}

/// Semi-decision for non-discreteness up to total degree `degree`.
///
/// The kernel basis spans every t-free integer combination at this degree,
/// so all of them have integer constants iff every basis element does.
pub fn discreteness_scan(ring: &RingPresentation, degree: u32, cap: usize) -> Result<Verdict> {
    let relations = finite_kernel(ring, degree, cap)?;
    let bad = relations.iter().find(|r| !r.integer).cloned();
    let Some(bad) = bad else {
        return Ok(Verdict {
            kind: VerdictKind::NoViolationUpTo,
            witness: None,
            constant: None,
            degree_bound: degree,
            relations,
        });
    };
    let check = PuiseuxPoly::substitute(&bad.poly, ring.gens())?;
    if check != PuiseuxPoly::constant(bad.constant.clone()) {
        return Err(Error::Internal(format!(
            "witness {} does not reproduce its constant",
            ring.render_poly(&bad.poly)
        )));
    }
    Ok(Verdict {
        kind: VerdictKind::Violation,
        witness: Some(bad.poly),
        constant: Some(bad.constant),
        degree_bound: degree,
        relations,
    })
}

/// Number of generator monomials up to `degree` (the expansion row count).
pub fn table_size(ngens: usize, degree: u32) -> usize {
    binomial(ngens + degree as usize, degree as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::NumberField;
    use crate::scalar::SymbolTable;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    pub(crate) fn sqrt2_ring() -> RingPresentation {
        let syms = SymbolTable::new().with("r1", q(30103, 100000)).unwrap().with("r2", q(1, 3)).unwrap();
        let d = Domain::new(NumberField::sqrt(2).unwrap(), syms);
        let t = PuiseuxPoly::t(&d);
        let th = Scalar::theta(&d);
        let r1 = PuiseuxPoly::constant(Scalar::symbol(&d, 0));
        let r2 = PuiseuxPoly::constant(Scalar::symbol(&d, 1));
        let g1 = &t.scale_by(&th) - &r1;
        let g2 = &(&t.scale_by(&th) * &r1).scale(&q(2, 1)) - &r2;
        RingPresentation::new(&d, vec!["g0".into(), "g1".into(), "g2".into()], vec![t, g1, g2]).unwrap()
    }

    fn third_ring() -> RingPresentation {
        let d = Domain::new(NumberField::rationals(), SymbolTable::new());
        let t = PuiseuxPoly::t(&d);
        let y = (&t.pow(2) + &PuiseuxPoly::from_int(&d, 1)).scale(&q(1, 3));
        RingPresentation::new(&d, vec!["x0".into(), "x1".into()], vec![t, y]).unwrap()
    }

    #[test]
    fn expansion_sizes() {
        let r = third_ring();
        assert_eq!(monomial_expand(&r, 2, DEFAULT_CAP).unwrap().monomials.len(), 6);
        assert_eq!(monomial_expand(&sqrt2_ring(), 2, DEFAULT_CAP).unwrap().monomials.len(), 10);
        assert!(matches!(monomial_expand(&r, 200, 100), Err(Error::CapExceeded { estimate: 20301, cap: 100 })));
    }

    #[test]
    fn sqrt2_violation() {
        let r = sqrt2_ring();
        let v = discreteness_scan(&r, 2, DEFAULT_CAP).unwrap();
        assert!(v.is_violation());
        assert_eq!(r.render_poly(v.witness.as_ref().unwrap()), "2*g0^2-g1^2-g2");
        assert_eq!(v.constant.unwrap().render(), "r2-r1^2");
    }

    #[test]
    fn third_ring_is_clean() {
        let r = third_ring();
        let v = discreteness_scan(&r, 4, DEFAULT_CAP).unwrap();
        assert_eq!(v.kind, VerdictKind::NoViolationUpTo);
        let k = finite_kernel(&r, 4, DEFAULT_CAP).unwrap();
        assert!(k.iter().any(|rel| r.render_poly(&rel.poly) == "x0^2-3*x1" && rel.constant.render() == "-1"));
    }

    #[test]
    fn powers_of_t_have_trivial_kernel() {
        let d = Domain::new(NumberField::rationals(), SymbolTable::new());
        let r = RingPresentation::new(&d, vec!["t".into()], vec![PuiseuxPoly::t(&d)]).unwrap();
        let k = finite_kernel(&r, 3, DEFAULT_CAP).unwrap();
        assert_eq!(k.len(), 1);
        assert_eq!(k[0].vector, vec![BigInt::from(1), 0.into(), 0.into(), 0.into()]);
    }

    #[test]
    fn constant_generator_rejected() {
        let d = Domain::new(NumberField::rationals(), SymbolTable::new());
        let e = RingPresentation::new(&d, vec!["c".into()], vec![PuiseuxPoly::from_int(&d, 3)]);
        assert!(matches!(e, Err(Error::Invalid(_))));
    }
}
