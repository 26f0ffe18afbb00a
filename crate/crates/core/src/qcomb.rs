//! Gaussian combinatorics at a concrete prime `ell`.
//!
//! Rank counts `c_{r,m}`, chain counts `D_{j,m}`, the coefficients
//! `lambda_m`, `b_r`, `b'_r`, and the divisibility and congruence checks
//! attached to them. Divisibility claims are evaluated, never assumed.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::cert::{int_json, ints_json, rats_json};
use crate::error::{Result, TrcError};
use crate::exactnum::Rational;

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// The pair `(n, ell)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QCombContext {
    pub n: usize,
    pub ell: u64,
}

impl QCombContext {
    pub fn new(n: usize, ell: u64) -> Result<Self> {
        if n == 0 {
            return Err(TrcError::InvalidSignature("n must be at least 1".into()));
        }
        if !is_prime(ell) {
            return Err(TrcError::InvalidSignature(format!("ell = {ell} is not prime")));
        }
        Ok(QCombContext { n, ell })
    }
}

fn big(x: u64) -> BigInt {
    BigInt::from(x)
}

fn pow(q: u64, e: usize) -> BigInt {
    big(q).pow(e as u32)
}

/// Gaussian binomial `[a b]_q`.
pub fn q_binomial(a: usize, b: usize, q: u64) -> Result<BigInt> {
    if b > a || q < 2 {
        return Err(TrcError::InvalidSignature(format!("q_binomial({a}, {b}, {q})")));
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..b {
        num *= pow(q, a - i) - 1;
        den *= pow(q, i + 1) - 1;
    }
    Ok(num / den)
}

fn qbin(a: usize, b: usize, q: u64) -> BigInt {
    q_binomial(a, b, q).expect("in range")
}

/// `c_{r,m}`: rank-`r` matrices in `M_{m x n}(F_ell)`.
pub fn rank_count(r: usize, m: usize, ctx: &QCombContext) -> BigInt {
    let l = ctx.ell;
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for j in 0..r {
        num *= (pow(l, m) - pow(l, j)) * (pow(l, ctx.n) - pow(l, j));
        den *= pow(l, r) - pow(l, j);
    }
    let (q, rem) = num.div_rem(&den);
    debug_assert!(rem.is_zero());
    q
}

/// `D_{j,m}`: chains `0 < V_1 < ... < V_j < F_ell^m` of strict inclusions.
pub fn chain_count(j: usize, m: usize, ctx: &QCombContext) -> BigInt {
    fn rec(prev: usize, left: usize, m: usize, q: u64) -> BigInt {
        // Chains from dimension `prev` with `left` further steps strictly below m.
        if left == 0 {
            return qbin(m, prev, q);
        }
        let mut total = BigInt::zero();
        for d in prev + 1..m {
            total += qbin(d, prev, q) * rec(d, left - 1, m, q);
        }
        total
    }
    if j >= m.max(1) {
        return BigInt::zero();
    }
    rec(0, j, m, ctx.ell)
}

/// `lambda_1 .. lambda_n`.
pub fn lambda_coefficients(ctx: &QCombContext) -> Vec<BigInt> {
    (1..=ctx.n)
        .map(|m| {
            let alt: BigInt = (0..m)
                .map(|j| {
                    let d = chain_count(j, m, ctx);
                    if j % 2 == 0 {
                        d
                    } else {
                        -d
                    }
                })
                .sum();
            qbin(ctx.n, m, ctx.ell) * alt
        })
        .collect()
}

/// One row of the `(ell - 1) c_{r,n} | b'_r` evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisibilityRow {
    pub r: usize,
    pub b_prime: BigInt,
    pub divisor: BigInt,
    pub divides: bool,
}

/// `b_0..b_n`, `b'_1..b'_n`, and their certificates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BCoefficients {
    pub b: Vec<Rational>,
    pub b_prime: Vec<BigInt>,
    /// `(ell - 1) | ell^{n^2} - sum lambda_m ell^{n(n-m)}`.
    pub b0_integral: bool,
    /// `(ell - 1) | b'_r` for each `r = 1..n`.
    pub b_prime_divisible: Vec<bool>,
    /// The stronger per-`r` claim `(ell - 1) c_{r,n} | b'_r`.
    pub strong_divisibility: Vec<DivisibilityRow>,
}

impl BCoefficients {
    pub fn all_integral(&self) -> bool {
        self.b.iter().all(|x| x.is_integer())
    }
}

pub fn b_prime(r: usize, lambda: &[BigInt], ctx: &QCombContext) -> BigInt {
    let n = ctx.n;
    (r.max(1)..=n).map(|m| pow(ctx.ell, n * (n - m)) * &lambda[m - 1] * rank_count(r, m, ctx)).sum()
}

pub fn b_coefficients(ctx: &QCombContext) -> BCoefficients {
    b_coefficients_from(ctx, &lambda_coefficients(ctx))
}

pub fn b_coefficients_from(ctx: &QCombContext, lambda: &[BigInt]) -> BCoefficients {
    let n = ctx.n;
    let lm1 = big(ctx.ell - 1);
    let top: BigInt = pow(ctx.ell, n * n)
        - (1..=n).map(|m| &lambda[m - 1] * pow(ctx.ell, n * (n - m))).sum::<BigInt>();
    let mut b = vec![Rational::new(top.clone(), lm1.clone())];
    let mut bp = Vec::new();
    let mut div = Vec::new();
    let mut strong = Vec::new();
    for r in 1..=n {
        let x = b_prime(r, lambda, ctx);
        b.push(Rational::new(-x.clone(), lm1.clone()));
        div.push(x.is_multiple_of(&lm1));
        let d = &lm1 * rank_count(r, n, ctx);
        strong.push(DivisibilityRow { r, b_prime: x.clone(), divides: x.is_multiple_of(&d), divisor: d });
        bp.push(x);
    }
    BCoefficients {
        b,
        b_prime: bp,
        b0_integral: top.is_multiple_of(&lm1),
        b_prime_divisible: div,
        strong_divisibility: strong,
    }
}

fn binom(n: usize, k: usize) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// Congruences of `lambda_m` modulo `ell - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CongruenceReport {
    pub modulus: BigInt,
    /// `(m, lambda_m mod, expected mod, ok)`.
    pub rows: Vec<(usize, BigInt, BigInt, bool)>,
    pub sum_residue: BigInt,
    pub sum_ok: bool,
}

impl CongruenceReport {
    pub fn pass(&self) -> bool {
        self.sum_ok && self.rows.iter().all(|r| r.3)
    }
}

pub fn congruence_certificates(ctx: &QCombContext) -> CongruenceReport {
    let lambda = lambda_coefficients(ctx);
    let md = big(ctx.ell - 1);
    let red = |x: &BigInt| x.mod_floor(&md);
    let rows = (1..=ctx.n)
        .map(|m| {
            let sign = if (m + 1) % 2 == 0 { BigInt::one() } else { -BigInt::one() };
            let expect = red(&(binom(ctx.n, m) * sign));
            let got = red(&lambda[m - 1]);
            let ok = got == expect;
            (m, got, expect, ok)
        })
        .collect();
    let sum: BigInt = lambda.iter().sum();
    let sum_residue = red(&sum);
    CongruenceReport { sum_ok: sum_residue == red(&BigInt::one()), modulus: md, rows, sum_residue }
}

/// Everything `coeffs` reports for one `(n, ell)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientTable {
    pub n: usize,
    pub ell: u64,
    pub lambda: Vec<BigInt>,
    /// `c[r][m]` for `0 <= r, m <= n` (zero when `r > m`).
    pub c: Vec<Vec<BigInt>>,
    /// `d[j][m]` for `0 <= j < n`, `0 <= m <= n` (zero when `j >= m`).
    pub d: Vec<Vec<BigInt>>,
    pub bcoef: BCoefficients,
    pub congruences: CongruenceReport,
}

impl CoefficientTable {
    pub fn compute(ctx: &QCombContext) -> Self {
        let n = ctx.n;
        let c = (0..=n).map(|r| (0..=n).map(|m| if r <= m { rank_count(r, m, ctx) } else { BigInt::zero() }).collect()).collect();
        let d = (0..n).map(|j| (0..=n).map(|m| chain_count(j, m, ctx)).collect()).collect();
        CoefficientTable {
            n,
            ell: ctx.ell,
            lambda: lambda_coefficients(ctx),
            c,
            d,
            bcoef: b_coefficients(ctx),
            congruences: congruence_certificates(ctx),
        }
    }

    pub fn certificates_json(&self) -> Value {
        let bc = &self.bcoef;
        json!({
            "b0_integral": bc.b0_integral,
            "b_prime_divisible_by_ell_minus_1": bc.b_prime_divisible,
            "ell_minus_1_times_c_rn_divides_b_prime": bc.strong_divisibility.iter().map(|row| json!({
                "r": row.r,
                "b_prime": int_json(&row.b_prime),
                "divisor": int_json(&row.divisor),
                "divides": row.divides,
            })).collect::<Vec<_>>(),
            "congruences_mod_ell_minus_1": {
                "pass": self.congruences.pass(),
                "rows": self.congruences.rows.iter().map(|(m, got, exp, ok)| json!({
                    "m": m, "lambda_mod": int_json(got), "expected_mod": int_json(exp), "ok": ok,
                })).collect::<Vec<_>>(),
                "sum_residue": int_json(&self.congruences.sum_residue),
                "sum_ok": self.congruences.sum_ok,
            },
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "ell": self.ell,
            "lambda": ints_json(&self.lambda),
            "c": self.c.iter().map(|row| ints_json(row)).collect::<Vec<_>>(),
            "d": self.d.iter().map(|row| ints_json(row)).collect::<Vec<_>>(),
            "b": rats_json(&self.bcoef.b),
            "b_prime": ints_json(&self.bcoef.b_prime),
            "certificates": self.certificates_json(),
        })
    }
}

/// Closed-form `lambda_m = [n m] (-1)^{m+1} ell^{m(m-1)/2}`, used as a cross-check.
pub fn lambda_closed_form(ctx: &QCombContext) -> Vec<BigInt> {
    (1..=ctx.n)
        .map(|m| {
            let v = qbin(ctx.n, m, ctx.ell) * pow(ctx.ell, m * (m - 1) / 2);
            if m % 2 == 1 {
                v
            } else {
                -v
            }
        })
        .collect()
}

/// `[n m] c_{r,m} / c_{r,n} = [n-r  n-m]`, checked exactly.
pub fn grassmann_ratio_identity(r: usize, m: usize, ctx: &QCombContext) -> bool {
    let n = ctx.n;
    let lhs = qbin(n, m, ctx.ell) * rank_count(r, m, ctx);
    let rhs = qbin(n - r, n - m, ctx.ell) * rank_count(r, n, ctx);
    lhs == rhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn ctx(n: usize, ell: u64) -> QCombContext {
        QCombContext::new(n, ell).unwrap()
    }

    // Vectors of F_q^a packed as base-q integers.
    fn add(u: usize, v: usize, q: usize, a: usize) -> usize {
        let (mut x, mut y, mut out, mut p) = (u, v, 0, 1);
        for _ in 0..a {
            out += ((x % q + y % q) % q) * p;
            x /= q;
            y /= q;
            p *= q;
        }
        out
    }

    fn scale(u: usize, c: usize, q: usize, a: usize) -> usize {
        let (mut x, mut out, mut p) = (u, 0, 1);
        for _ in 0..a {
            out += ((x % q) * c % q) * p;
            x /= q;
            p *= q;
        }
        out
    }

    fn span_with(sub: &BTreeSet<usize>, v: usize, q: usize, a: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for &w in sub {
            for c in 0..q {
                out.insert(add(w, scale(v, c, q, a), q, a));
            }
        }
        out
    }

    /// All subspaces of F_q^a by growing spans one vector at a time.
    fn all_subspaces(a: usize, q: usize) -> Vec<BTreeSet<usize>> {
        let total = q.pow(a as u32);
        let mut seen: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        let mut frontier = vec![BTreeSet::from([0usize])];
        seen.insert(frontier[0].clone());
        while let Some(s) = frontier.pop() {
            for v in 0..total {
                if !s.contains(&v) {
                    let t = span_with(&s, v, q, a);
                    if seen.insert(t.clone()) {
                        frontier.push(t);
                    }
                }
            }
        }
        seen.into_iter().collect()
    }

    fn dim(s: &BTreeSet<usize>, q: usize) -> usize {
        let mut d = 0;
        while q.pow(d as u32) < s.len() {
            d += 1;
        }
        d
    }

    #[test]
    fn q_binomial_matches_subspace_count() {
        for q in [2usize, 3] {
            for a in 0..=4 {
                let subs = all_subspaces(a, q);
                for b in 0..=a {
                    let brute = subs.iter().filter(|s| dim(s, q) == b).count();
                    assert_eq!(q_binomial(a, b, q as u64).unwrap(), BigInt::from(brute), "a={a} b={b} q={q}");
                }
            }
        }
        assert_eq!(q_binomial(4, 2, 3).unwrap(), BigInt::from(130));
        assert!(q_binomial(2, 3, 2).is_err());
    }

    fn rank_mod(rows: &mut [Vec<usize>], q: usize) -> usize {
        let (nr, nc) = (rows.len(), rows.first().map_or(0, Vec::len));
        let inv = |x: usize| (1..q).find(|y| x * y % q == 1).unwrap();
        let mut rank = 0;
        for col in 0..nc {
            if let Some(p) = (rank..nr).find(|&r| rows[r][col] % q != 0) {
                rows.swap(rank, p);
                let iv = inv(rows[rank][col]);
                for x in rows[rank].iter_mut() {
                    *x = *x * iv % q;
                }
                for r in 0..nr {
                    if r != rank && rows[r][col] != 0 {
                        let f = rows[r][col];
                        for cc in 0..nc {
                            rows[r][cc] = (rows[r][cc] + q * q - f * rows[rank][cc]) % q;
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    #[test]
    fn rank_count_matches_enumeration() {
        for q in [2usize, 3] {
            for n in 1..=3 {
                for m in 1..=3 {
                    let cells = m * n;
                    let mut counts = vec![0u64; m.min(n) + 1];
                    for code in 0..q.pow(cells as u32) {
                        let mut x = code;
                        let mut rows = vec![vec![0; n]; m];
                        for i in 0..m {
                            for j in 0..n {
                                rows[i][j] = x % q;
                                x /= q;
                            }
                        }
                        counts[rank_mod(&mut rows, q)] += 1;
                    }
                    let c = ctx(n, q as u64);
                    for (r, &cnt) in counts.iter().enumerate() {
                        assert_eq!(rank_count(r, m, &c), BigInt::from(cnt), "r={r} m={m} n={n} q={q}");
                    }
                }
            }
        }
        assert_eq!(rank_count(1, 2, &ctx(2, 2)), BigInt::from(9));
        assert_eq!(rank_count(1, 1, &ctx(1, 3)), BigInt::from(2));
        assert_eq!(rank_count(0, 3, &ctx(3, 5)), BigInt::one());
    }

    #[test]
    fn chain_count_matches_enumeration() {
        for q in [2usize, 3] {
            for m in 1..=3 {
                let proper: Vec<_> = all_subspaces(m, q).into_iter().filter(|s| dim(s, q) > 0 && dim(s, q) < m).collect();
                // chains[j] = number of strictly increasing j-tuples of proper nonzero subspaces
                let mut by_len = vec![0u64; m];
                by_len[0] = 1;
                let mut layer: Vec<usize> = (0..proper.len()).collect();
                let mut len = 1;
                while !layer.is_empty() && len < m {
                    by_len[len] = layer.len() as u64;
                    let mut next = Vec::new();
                    // Track only the last element: extend chains ending at i by any strict superspace.
                    for &i in &layer {
                        for (k, t) in proper.iter().enumerate() {
                            if t.len() > proper[i].len() && proper[i].is_subset(t) {
                                next.push(k);
                            }
                        }
                    }
                    layer = next;
                    len += 1;
                }
                let c = ctx(3, q as u64);
                for (j, &want) in by_len.iter().enumerate() {
                    assert_eq!(chain_count(j, m, &c), BigInt::from(want), "j={j} m={m} q={q}");
                }
            }
        }
        assert_eq!(chain_count(1, 2, &ctx(2, 3)), BigInt::from(4));
        assert_eq!(chain_count(1, 3, &ctx(3, 2)), BigInt::from(14));
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_coefficients(&ctx(1, 5)), vec![BigInt::one()]);
        for l in [2u64, 3, 5, 7] {
            let lam = lambda_coefficients(&ctx(2, l));
            assert_eq!(lam, vec![BigInt::from(l + 1), -BigInt::from(l)]);
        }
        for n in 1..=5 {
            for l in [2u64, 3, 5, 7] {
                let c = ctx(n, l);
                assert_eq!(lambda_coefficients(&c), lambda_closed_form(&c));
            }
        }
    }

    #[test]
    fn b_examples() {
        let b = b_coefficients(&ctx(1, 7));
        assert_eq!(b.b, vec![Rational::from_integer(1.into()), Rational::from_integer((-1).into())]);
        let b = b_coefficients(&ctx(2, 2));
        let want: Vec<Rational> = [6, -18, 12].iter().map(|&v| Rational::from_integer(v.into())).collect();
        assert_eq!(b.b, want);
        let b = b_coefficients(&ctx(1, 3));
        let row = &b.strong_divisibility[0];
        assert_eq!((row.b_prime.clone(), row.divisor.clone(), row.divides), (BigInt::from(2), BigInt::from(4), false));
    }

    #[test]
    fn integrality_and_congruences() {
        for n in 1..=5 {
            for l in [2u64, 3, 5, 7] {
                let c = ctx(n, l);
                let b = b_coefficients(&c);
                assert!(b.b0_integral && b.all_integral(), "n={n} l={l}");
                assert!(b.b_prime_divisible.iter().all(|&x| x));
                // The strong claim holds below the top rank.
                assert!(b.strong_divisibility.iter().filter(|r| r.r < n).all(|r| r.divides), "n={n} l={l}");
                assert!(congruence_certificates(&c).pass(), "n={n} l={l}");
            }
        }
        let r = congruence_certificates(&ctx(2, 3));
        assert_eq!(r.rows[0].1, BigInt::zero());
        assert_eq!(r.rows[1].1, BigInt::one());
    }

    #[test]
    fn grassmann_ratio() {
        for n in 1..=5 {
            for l in [2u64, 3, 5, 7] {
                let c = ctx(n, l);
                for m in 0..=n {
                    for r in 0..=m {
                        assert!(grassmann_ratio_identity(r, m, &c));
                    }
                }
            }
        }
    }
}
