//! Integer kernels of rational matrices.
//!
//! The left kernel {v in Z^m : v·A = 0} is computed by unimodular row
//! reduction of [A | I], which yields a basis of the full kernel lattice
//! (not just of its rational span). The basis is then brought to Hermite
//! normal form so that it is canonical.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Clears denominators column by column; the kernel is unchanged.
pub fn integer_columns(rows: &[Vec<BigRational>]) -> Vec<Vec<BigInt>> {
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut scale = vec![BigInt::one(); ncols];
    for r in rows {
        for (j, q) in r.iter().enumerate() {
            scale[j] = scale[j].lcm(q.denom());
        }
    }
    rows.iter()
        .map(|r| r.iter().zip(&scale).map(|(q, s)| (q * BigRational::from_integer(s.clone())).to_integer()).collect())
        .collect()
}

/// HNF basis of the integer left kernel of `a` (m rows of equal length).
pub fn left_kernel(a: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let m = a.len();
    let ncols = a.first().map(|r| r.len()).unwrap_or(0);
    let mut rows: Vec<(Vec<BigInt>, Vec<BigInt>)> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut u = vec![BigInt::zero(); m];
            u[i] = BigInt::one();
            (r.clone(), u)
        })
        .collect();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == m {
            break;
        }
        if eliminate(
            &mut rows[rank..],
            col,
            |r| &r.0,
            |r, q, s| {
                axpy(&mut r.0, q, &s.0);
                axpy(&mut r.1, q, &s.1);
            },
        ) {
            rank += 1;
        }
    }
    let kernel: Vec<Vec<BigInt>> = rows.into_iter().skip(rank).map(|(_, u)| u).collect();
    hnf(kernel)
}

/// Gcd-reduces column `col` of `rows` so that only `rows[0]` may be
/// nonzero there. Returns whether a pivot was found.
fn eliminate<R>(rows: &mut [R], col: usize, key: impl Fn(&R) -> &Vec<BigInt>, sub: impl Fn(&mut R, &BigInt, &R)) -> bool
where
    R: Clone,
{
    loop {
        let piv = rows
            .iter()
            .enumerate()
            .filter(|(_, r)| !key(r)[col].is_zero())
            .min_by(|(_, x), (_, y)| key(x)[col].abs().cmp(&key(y)[col].abs()))
            .map(|(i, _)| i);
        let Some(piv) = piv else { return false };
        rows.swap(0, piv);
        let pivot_row = rows[0].clone();
        let p = key(&pivot_row)[col].clone();
        let mut done = true;
        for r in rows.iter_mut().skip(1) {
            let e = key(r)[col].clone();
            if e.is_zero() {
                continue;
            }
            let q = e.div_floor(&p);
            sub(r, &q, &pivot_row);
            if !key(r)[col].is_zero() {
                done = false;
            }
        }
        if done {
            return true;
        }
    }
}

// r -= q * s
fn axpy(r: &mut [BigInt], q: &BigInt, s: &[BigInt]) {
    if q.is_zero() {
        return;
    }
    for (x, y) in r.iter_mut().zip(s) {
        if !y.is_zero() {
            *x -= q * y;
        }
    }
}

/// Row-style Hermite normal form of the lattice spanned by `vs`; zero rows
/// are dropped. Pivots are positive and entries above each pivot lie in
/// [0, pivot).
pub fn hnf(mut vs: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    let ncols = vs.first().map(|r| r.len()).unwrap_or(0);
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == vs.len() {
            break;
        }
        if eliminate(&mut vs[rank..], col, |r| r, |r, q, s| axpy(r, q, s)) {
            if vs[rank][col].is_negative() {
                for x in vs[rank].iter_mut() {
                    *x = -&*x;
                }
            }
            pivots.push(col);
            rank += 1;
        }
    }
    vs.truncate(rank);
    for (i, &col) in pivots.iter().enumerate() {
        let (above, rest) = vs.split_at_mut(i);
        let row = &rest[0];
        for r in above.iter_mut() {
            let q = r[col].div_floor(&row[col]);
            axpy(r, &q, row);
        }
    }
    vs
}

/// Rank over Q.
pub fn rank(a: &[Vec<BigInt>]) -> usize {
    a.len() - left_kernel(a).len()
}

/// Whether `v` lies in the Q-span of the rows of `basis`.
pub fn in_rational_span(basis: &[Vec<BigInt>], v: &[BigInt]) -> bool {
    let mut with = basis.to_vec();
    with.push(v.to_vec());
    rank(&with) == rank(basis)
}

/// Exact product v·A.
pub fn vec_mat(v: &[BigInt], a: &[Vec<BigInt>]) -> Vec<BigInt> {
    let ncols = a.first().map(|r| r.len()).unwrap_or(0);
    let mut out = vec![BigInt::zero(); ncols];
    for (c, row) in v.iter().zip(a) {
        if c.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(row) {
            *o += c * x;
        }
    }
    out
}
