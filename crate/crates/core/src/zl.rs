//! Linear algebra over the local ring `Z_(ell)` on exact rationals.
//!
//! The main entry point is [`row_hnf`], a canonical row-style Hermite form
//! for full-rank `Z_(ell)`-modules spanned by rational row vectors.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::exactnum::Rational;

/// `ell`-adic valuation of a nonzero integer.
pub fn val_big(x: &BigInt, ell: u64) -> i64 {
    debug_assert!(!x.is_zero());
    let l = BigInt::from(ell);
    let mut v = 0;
    let mut y = x.clone();
    loop {
        let (q, r) = y.div_rem(&l);
        if !r.is_zero() {
            return v;
        }
        y = q;
        v += 1;
    }
}

/// `ell`-adic valuation of a rational; `None` for zero.
pub fn val_rat(x: &Rational, ell: u64) -> Option<i64> {
    if x.is_zero() {
        None
    } else {
        Some(val_big(x.numer(), ell) - val_big(x.denom(), ell))
    }
}

/// `ell^e` as a rational, for any integer `e`.
pub fn ell_pow(ell: u64, e: i64) -> Rational {
    let p = BigInt::from(ell).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

/// Inverse of `a` modulo `m` when coprime.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// Canonical representative of `x` modulo `ell^e Z_(ell)`.
///
/// The result has an `ell`-power denominator and lies in `[0, ell^e)`.
pub fn canonical_residue(x: &Rational, e: i64, ell: u64) -> Rational {
    let Some(v) = val_rat(x, ell) else {
        return Rational::zero();
    };
    let t = (-v).max(0);
    if v >= e || e + t <= 0 {
        return Rational::zero();
    }
    let y = x * ell_pow(ell, t);
    let m = BigInt::from(ell).pow((e + t) as u32);
    let inv = mod_inverse(y.denom(), &m).expect("denominator is an ell-unit");
    let r = (y.numer() * inv).mod_floor(&m);
    Rational::new(r, BigInt::from(ell).pow(t as u32))
}

/// Canonical row Hermite form over `Z_(ell)` of the span of `rows`.
///
/// Returns an upper-triangular `ncols x ncols` basis with diagonal entries
/// `ell^{e_i}` and entry `(i, j)` reduced modulo `ell^{e_j}`; `None` when the
/// rows do not have full rank.
pub fn row_hnf(rows: &[Vec<Rational>], ncols: usize, ell: u64) -> Option<Vec<Vec<Rational>>> {
    let mut rest: Vec<Vec<Rational>> = rows.iter().filter(|r| r.iter().any(|x| !x.is_zero())).cloned().collect();
    let mut piv: Vec<Vec<Rational>> = Vec::with_capacity(ncols);
    let mut exps = Vec::with_capacity(ncols);
    for col in 0..ncols {
        let best = rest
            .iter()
            .enumerate()
            .filter_map(|(i, r)| val_rat(&r[col], ell).map(|v| (v, i)))
            .min()?;
        let (v, i) = best;
        let mut p = rest.swap_remove(i);
        let f = ell_pow(ell, v) / &p[col];
        for x in p.iter_mut() {
            *x = &*x * &f;
        }
        let lv = ell_pow(ell, v);
        for r in rest.iter_mut() {
            if r[col].is_zero() {
                continue;
            }
            let g = &r[col] / &lv;
            for (x, y) in r.iter_mut().zip(p.iter()) {
                *x = &*x - &g * y;
            }
        }
        rest.retain(|r| r.iter().any(|x| !x.is_zero()));
        piv.push(p);
        exps.push(v);
    }
    for i in 0..ncols {
        for j in i + 1..ncols {
            let x = piv[i][j].clone();
            let rep = canonical_residue(&x, exps[j], ell);
            if rep != x {
                let g = (&x - &rep) / ell_pow(ell, exps[j]);
                let (top, bottom) = piv.split_at_mut(j);
                for (a, b) in top[i].iter_mut().zip(bottom[0].iter()) {
                    *a = &*a - &g * b;
                }
                top[i][j] = rep;
            }
        }
    }
    Some(piv)
}

/// Integer matrix helpers for `ell`-adic valuations of small matrices.
pub fn val_i128(x: i128, ell: i128) -> u32 {
    debug_assert!(x != 0);
    let mut v = 0;
    let mut y = x;
    while y % ell == 0 {
        y /= ell;
        v += 1;
    }
    v
}

fn inv_mod_i128(a: i128, m: i128) -> i128 {
    let (mut r0, mut r1) = (a.rem_euclid(m), m);
    let (mut s0, mut s1) = (1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    debug_assert_eq!(r0, 1);
    s0.rem_euclid(m)
}

/// Elementary-divisor exponents of a nonsingular integer matrix whose
/// determinant has valuation `det_val`, sorted in decreasing order.
pub fn smith_valuations(mat: &[Vec<i64>], ell: u64, det_val: u32) -> Vec<u32> {
    let n = mat.len();
    let l = ell as i128;
    let m = l.pow(det_val + 1);
    let mut a: Vec<Vec<i128>> = mat.iter().map(|r| r.iter().map(|&x| (x as i128).rem_euclid(m)).collect()).collect();
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, &x) in row.iter().enumerate().skip(t) {
                if x != 0 {
                    let v = val_i128(x, l);
                    if best.is_none_or(|b| v < b.0) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let Some((w, i, j)) = best else {
            out.extend(std::iter::repeat_n(det_val + 1, n - t));
            break;
        };
        a.swap(t, i);
        for row in a.iter_mut() {
            row.swap(t, j);
        }
        let lw = l.pow(w);
        let u = inv_mod_i128(a[t][t] / lw, m);
        for x in a[t].iter_mut() {
            *x = (*x * u).rem_euclid(m);
        }
        for r in t + 1..n {
            let f = a[r][t] / lw;
            if f != 0 {
                for c in t..n {
                    a[r][c] = (a[r][c] - f * a[t][c]).rem_euclid(m);
                }
            }
        }
        for c in t + 1..n {
            let f = a[t][c] / lw;
            if f != 0 {
                for row in a.iter_mut().skip(t) {
                    row[c] = (row[c] - f * row[t]).rem_euclid(m);
                }
            }
        }
        out.push(w);
    }
    out.sort_unstable_by(|x, y| y.cmp(x));
    out
}

/// Whether a rational has an `ell`-unit denominator.
pub fn is_ell_integral(x: &Rational, ell: u64) -> bool {
    val_rat(x, ell).is_none_or(|v| v >= 0)
}
