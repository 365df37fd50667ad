//! Empirical diophantine-correctness experiments on a compiled special
//! sequence: exact epsilon-search over y0, gap statistics, star
//! discrepancy of one gamma component, and value-cloud export.

use std::cmp::Ordering;
use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FieldElem, PrecisionCtx};
use crate::genpoly::{CompiledSystem, GammaPoint};

// Points handed to one parallel task.
const CHUNK: u64 = 512;

#[derive(Clone, Debug)]
pub struct SearchSpec<'a> {
    pub system: &'a CompiledSystem,
    pub targets: Vec<BigRational>,
    pub epsilon: BigRational,
    /// Scan y0 over 1..=y_max.
    pub y_max: u64,
}

impl<'a> SearchSpec<'a> {
    /// Targets default to the symbol shadows.
    pub fn new(system: &'a CompiledSystem, epsilon: BigRational, y_max: u64) -> Self {
        let syms = &system.sequence().domain().symbols;
        let targets = (0..system.len()).map(|i| syms.shadow(i).clone()).collect();
        SearchSpec { system, targets, epsilon, y_max }
    }

    /// Checks targets and epsilon; returns whether epsilon exceeds the
    /// "sufficiently small" guard min(r, 1 - r)/2 (a warning, not an error).
    pub fn validate(&self) -> Result<bool> {
        if self.targets.len() != self.system.len() {
            return Err(Error::ArityMismatch { expected: self.system.len(), got: self.targets.len() });
        }
        if !self.epsilon.is_positive() {
            return Err(Error::Invalid("epsilon must be positive".into()));
        }
        let one = BigRational::one();
        let mut guard: Option<BigRational> = None;
        for r in &self.targets {
            if !r.is_positive() || r >= &one {
                return Err(Error::Invalid(format!("target {r} is not in (0,1)")));
            }
            let g = std::cmp::min(r.clone(), &one - r) / BigRational::from_integer(2.into());
            guard = Some(match guard {
                Some(x) => x.min(g),
                None => g,
            });
        }
        Ok(guard.is_some_and(|g| self.epsilon > g))
    }
}

/// One y0 meeting every inequality |gamma_i - r_i| < epsilon.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub point: GammaPoint,
    /// gamma_i - r_i, exact.
    pub residuals: Vec<FieldElem>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchReport {
    pub solutions: Vec<Solution>,
    /// Points where a floor or sign could not be certified.
    pub undecided: Vec<(u64, String)>,
    pub y_max: u64,
    pub epsilon: BigRational,
    pub epsilon_warning: bool,
}

impl SearchReport {
    pub fn y0s(&self) -> Vec<u64> {
        self.solutions.iter().map(|s| s.point.y0.to_u64().expect("y0 fits u64")).collect()
    }
}

enum Outcome {
    Hit(Solution),
    Miss,
    Undecided(String),
}

fn within(field: &crate::field::NumberField, d: &FieldElem, eps: &BigRational, ctx: &PrecisionCtx) -> Result<bool> {
    let e = FieldElem::from_rational(eps.clone());
    Ok(field.sign(&d.sub(&e), ctx)? < 0 && field.sign(&d.add(&e), ctx)? > 0)
}

fn test_point(spec: &SearchSpec, y0: u64, ctx: &PrecisionCtx) -> Outcome {
    let field = spec.system.field();
    let mut residuals = Vec::new();
    let mut hit = true;
    let run = spec.system.gamma_prefix(&BigInt::from(y0), ctx, |i, g| {
        let d = g.sub(&FieldElem::from_rational(spec.targets[i - 1].clone()));
        let ok = within(field, &d, &spec.epsilon, ctx)?;
        residuals.push(d);
        hit &= ok;
        Ok(ok)
    });
    match run {
        Err(e) => Outcome::Undecided(e.to_string()),
        Ok(point) if hit && point.gamma.len() == spec.system.len() => Outcome::Hit(Solution { point, residuals }),
        Ok(_) => Outcome::Miss,
    }
}

fn scan(spec: &SearchSpec, lo: u64, hi: u64, ctx: &PrecisionCtx) -> (Vec<Solution>, Vec<(u64, String)>) {
    let mut sols = Vec::new();
    let mut und = Vec::new();
    for y in lo..=hi {
        match test_point(spec, y, ctx) {
            Outcome::Hit(s) => sols.push(s),
            Outcome::Miss => {}
            Outcome::Undecided(msg) => und.push((y, msg)),
        }
    }
    (sols, und)
}

/// Exhaustive exact search over 1..=y_max, partitioned across the current
/// rayon pool and merged in ascending order.
pub fn dio_search(spec: &SearchSpec, ctx: &PrecisionCtx) -> Result<SearchReport> {
    let epsilon_warning = spec.validate()?;
    let chunks: Vec<(u64, u64)> =
        (0..spec.y_max.div_ceil(CHUNK)).map(|c| (c * CHUNK + 1, ((c + 1) * CHUNK).min(spec.y_max))).collect();
    let parts: Vec<_> = chunks.par_iter().map(|&(lo, hi)| scan(spec, lo, hi, ctx)).collect();
    Ok(merge(spec, parts, epsilon_warning))
}

/// Single-threaded reference for the same search.
pub fn dio_search_serial(spec: &SearchSpec, ctx: &PrecisionCtx) -> Result<SearchReport> {
    let epsilon_warning = spec.validate()?;
    let part = if spec.y_max == 0 { (Vec::new(), Vec::new()) } else { scan(spec, 1, spec.y_max, ctx) };
    Ok(merge(spec, vec![part], epsilon_warning))
}

type Part = (Vec<Solution>, Vec<(u64, String)>);

fn merge(spec: &SearchSpec, parts: Vec<Part>, epsilon_warning: bool) -> SearchReport {
    let mut solutions = Vec::new();
    let mut undecided = Vec::new();
    for (s, u) in parts {
        solutions.extend(s);
        undecided.extend(u);
    }
    SearchReport { solutions, undecided, y_max: spec.y_max, epsilon: spec.epsilon.clone(), epsilon_warning }
}

/// Re-checks every reported solution with fresh exact sign decisions.
pub fn verify_report(spec: &SearchSpec, report: &SearchReport, ctx: &PrecisionCtx) -> Result<bool> {
    let field = spec.system.field();
    for s in &report.solutions {
        let p = spec.system.gamma_eval(&s.point.y0, ctx)?;
        for (g, r) in p.gamma.iter().zip(&spec.targets) {
            let d = g.sub(&FieldElem::from_rational(r.clone()));
            if !within(field, &d, &spec.epsilon, ctx)? {
                return Ok(false);
            }
        }
    }
    Ok(report.solutions.windows(2).all(|w| w[0].point.y0 < w[1].point.y0))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapSummary {
    pub max_gap: u64,
    /// Exact mean of consecutive differences.
    pub mean_gap: BigRational,
    /// Distinct gap lengths, ascending.
    pub distinct: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapStats {
    pub count: usize,
    /// count / Y, natural density over the scanned window.
    pub density: BigRational,
    gaps: Option<GapSummary>,
}

impl GapStats {
    /// Gap fields need at least two solutions.
    pub fn gaps(&self) -> Result<&GapSummary> {
        self.gaps.as_ref().ok_or(Error::EmptyReport)
    }
}

/// Gap statistics for ascending solutions within 1..=y_max.
pub fn gap_stats_of(y0s: &[u64], y_max: u64) -> GapStats {
    let count = y0s.len();
    let density =
        if y_max == 0 { BigRational::zero() } else { BigRational::new(BigInt::from(count), BigInt::from(y_max)) };
    let diffs: Vec<u64> = y0s.windows(2).map(|w| w[1] - w[0]).collect();
    let gaps = if diffs.is_empty() {
        None
    } else {
        let total: u64 = diffs.iter().sum();
        let mut distinct = diffs.clone();
        distinct.sort_unstable();
        distinct.dedup();
        Some(GapSummary {
            max_gap: *distinct.last().expect("nonempty"),
            mean_gap: BigRational::new(BigInt::from(total), BigInt::from(diffs.len())),
            distinct,
        })
    };
    GapStats { count, density, gaps }
}

pub fn gap_stats(report: &SearchReport) -> GapStats {
    gap_stats_of(&report.y0s(), report.y_max)
}

/// Star discrepancy, exact, with the sorted sample it came from.
#[derive(Clone, Debug)]
pub struct Discrepancy {
    pub value: FieldElem,
    pub approx: f64,
    pub samples: usize,
}

/// D*_N of {gamma_component(y0) : 1 <= y0 <= y_max} against the uniform law
/// on [0,1): max over i of max(i/N - u_(i), u_(i) - (i-1)/N).
///
/// Values are sorted by a double approximation and then fixed up exactly
/// wherever neighbours are too close to trust; the maximum is selected
/// exactly among the candidates near the approximate maximum.
pub fn discrepancy(sys: &CompiledSystem, component: usize, y_max: u64, ctx: &PrecisionCtx) -> Result<Discrepancy> {
    if component == 0 || component > sys.len() {
        return Err(Error::Invalid(format!("component must be in 1..={}", sys.len())));
    }
    if y_max == 0 {
        return Err(Error::Invalid("range must be at least 1".into()));
    }
    let field = sys.field();
    let mut vals: Vec<(f64, FieldElem)> = (1..=y_max)
        .into_par_iter()
        .map(|y| {
            let p = sys.gamma_prefix(&BigInt::from(y), ctx, |i, _| Ok(i < component))?;
            let g = p.gamma[component - 1].clone();
            Ok((approx(field, &g), g))
        })
        .collect::<Result<_>>()?;
    vals.par_sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    // exact insertion fix-up inside runs of nearly equal approximations
    const CLOSE: f64 = 1e-9;
    for i in 1..vals.len() {
        let mut j = i;
        while j > 0 && vals[j].0 - vals[j - 1].0 < CLOSE {
            if field.cmp(&vals[j - 1].1, &vals[j].1, ctx)? == Ordering::Greater {
                vals.swap(j - 1, j);
                j -= 1;
            } else {
                break;
            }
        }
    }
    let n = vals.len() as f64;
    let terms: Vec<(f64, usize, bool)> = vals
        .iter()
        .enumerate()
        .flat_map(|(i, (u, _))| {
            let k = (i + 1) as f64;
            [(k / n - u, i, true), (u - (k - 1.0) / n, i, false)]
        })
        .collect();
    let top = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    let nb = BigInt::from(vals.len());
    let mut best: Option<FieldElem> = None;
    for &(a, i, upper) in &terms {
        if a < top - CLOSE {
            continue;
        }
        let u = &vals[i].1;
        let exact = if upper {
            FieldElem::from_rational(BigRational::new(BigInt::from(i + 1), nb.clone())).sub(u)
        } else {
            u.sub(&FieldElem::from_rational(BigRational::new(BigInt::from(i), nb.clone())))
        };
        best = Some(match best {
            None => exact,
            Some(b) => {
                if field.cmp(&exact, &b, ctx)? == Ordering::Greater {
                    exact
                } else {
                    b
                }
            }
        });
    }
    let value = best.expect("at least one sample");
    Ok(Discrepancy { approx: field.approx(&value), value, samples: vals.len() })
}

fn approx(field: &crate::field::NumberField, a: &FieldElem) -> f64 {
    if let Some(q) = a.as_rational() {
        return q.to_f64().unwrap_or(f64::NAN);
    }
    field.approx(a)
}

/// One exported sample of the value cloud.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct CloudRecord {
    pub y0: String,
    pub gamma_dec: Vec<String>,
    pub gamma_exact: Vec<String>,
    pub ychain: Vec<String>,
}

impl CloudRecord {
    pub fn from_point(sys: &CompiledSystem, p: &GammaPoint, digits: usize, ctx: &PrecisionCtx) -> Result<Self> {
        let field = sys.field();
        Ok(CloudRecord {
            y0: p.y0.to_string(),
            gamma_dec: p.gamma.iter().map(|g| field.to_decimal(g, digits, ctx)).collect::<Result<_>>()?,
            gamma_exact: p.gamma.iter().map(|g| g.render()).collect(),
            ychain: p.ychain.iter().map(|y| y.to_string()).collect(),
        })
    }

    /// Flat JSON object on one line.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("plain strings serialize")
    }
}

/// Writes one JSON line per sampled y0 in lo, lo+stride, ..., <= hi.
pub fn cloud_export(
    sys: &CompiledSystem,
    lo: u64,
    hi: u64,
    stride: u64,
    digits: usize,
    sink: &mut dyn Write,
    ctx: &PrecisionCtx,
) -> Result<usize> {
    if stride == 0 {
        return Err(Error::Invalid("stride must be at least 1".into()));
    }
    if lo > hi {
        return Ok(0);
    }
    let ys: Vec<u64> = (lo..=hi).step_by(stride as usize).collect();
    let records: Vec<CloudRecord> = ys
        .par_iter()
        .map(|&y| {
            let p = sys.gamma_eval(&BigInt::from(y), ctx)?;
            CloudRecord::from_point(sys, &p, digits, ctx)
        })
        .collect::<Result<_>>()?;
    for r in &records {
        writeln!(sink, "{}", r.to_line()).map_err(|e| Error::SinkFailure(e.to_string()))?;
    }
    sink.flush().map_err(|e| Error::SinkFailure(e.to_string()))?;
    Ok(records.len())
}
