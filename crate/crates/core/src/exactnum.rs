//! Exact arithmetic in `Q[s, z] / (s^2 - ell, Phi_k(z))`.
//!
//! `s` stands for a square root of the prime `ell` and `z` for a primitive
//! `k`-th root of unity. Elements carry `(ell, k)` as a type tag; operations
//! between different cyclotomic orders lift both operands to the lcm order.
//!
//! The ring is not always a field (for example `ell = 5, k = 5`, where
//! `sqrt(5)` already lies in `Q(zeta_5)`), so inversion is a linear solve and
//! fails exactly on zero divisors.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Result, TrcError};

/// Exact rational number, always in lowest terms with positive denominator.
pub type Rational = BigRational;

/// Builds a rational `p / q`.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Formats a rational as `p` or `p/q`.
pub fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p` or `p/q`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || TrcError::Parse(format!("bad rational {t:?}"));
    match t.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(t.parse().map_err(|_| bad())?)),
    }
}

/// Coefficients of the cyclotomic polynomial `Phi_k`, lowest degree first.
pub fn cyclotomic(k: u32) -> Arc<Vec<i64>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Vec<i64>>>>> = OnceLock::new();
    assert!(k >= 1, "cyclotomic order must be positive");
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&k) {
        return p.clone();
    }
    // z^k - 1 divided by Phi_d for every proper divisor d of k.
    let mut num = vec![0i64; k as usize + 1];
    num[0] = -1;
    num[k as usize] = 1;
    for d in 1..k {
        if k % d == 0 {
            num = poly_div_exact(&num, &cyclotomic(d));
        }
    }
    let p = Arc::new(num);
    cache.lock().unwrap().insert(k, p.clone());
    p
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let nd = rem.len() - 1;
    let mut q = vec![0i64; nd - dd + 1];
    for i in (0..=nd - dd).rev() {
        let c = rem[i + dd];
        q[i] = c;
        for (j, &d) in den.iter().enumerate() {
            rem[i + j] -= c * d;
        }
    }
    debug_assert!(rem.iter().all(|&x| x == 0));
    q
}

/// Euler totient, used for the degree of `Phi_k`.
pub fn totient(k: u32) -> usize {
    cyclotomic(k).len() - 1
}

fn lcm_u32(a: u32, b: u32) -> u32 {
    a / a.gcd(&b) * b
}

/// An element of `Q(sqrt(ell), zeta_k)` stored over a common denominator.
///
/// `num[2 * j + e]` is the numerator of the coefficient of `s^e z^j`.
#[derive(Clone, Debug)]
pub struct ExactScalar {
    ell: u64,
    k: u32,
    num: Vec<BigInt>,
    den: BigInt,
}

impl ExactScalar {
    pub fn zero(ell: u64, k: u32) -> Self {
        ExactScalar { ell, k, num: vec![BigInt::zero(); 2 * totient(k)], den: BigInt::one() }
    }

    /// Zero in the same field as `self`.
    pub fn zero_like(&self) -> Self {
        Self::zero(self.ell, self.k)
    }

    pub fn one(ell: u64, k: u32) -> Self {
        Self::from_rational(ell, k, &Rational::one())
    }

    pub fn from_int(ell: u64, k: u32, v: i64) -> Self {
        Self::from_rational(ell, k, &Rational::from_integer(BigInt::from(v)))
    }

    pub fn from_rational(ell: u64, k: u32, r: &Rational) -> Self {
        let mut x = Self::zero(ell, k);
        x.num[0] = r.numer().clone();
        x.den = r.denom().clone();
        x
    }

    /// Builds an element from rational coefficients `coeffs[2 * j + e]` of `s^e z^j`.
    pub fn from_coeffs(ell: u64, k: u32, coeffs: &[Rational]) -> Self {
        let mut den = BigInt::one();
        for c in coeffs {
            den = den.lcm(c.denom());
        }
        let mut raw: Vec<BigInt> = coeffs.iter().map(|c| c.numer() * (&den / c.denom())).collect();
        let len = raw.len().div_ceil(2).max(totient(k));
        raw.resize(2 * len, BigInt::zero());
        Self::from_raw(ell, k, raw, den)
    }

    /// The square root `s` of `ell`.
    pub fn s(ell: u64, k: u32) -> Self {
        let mut x = Self::zero(ell, k);
        x.num[1] = BigInt::one();
        x
    }

    /// The generator `z`.
    pub fn z(ell: u64, k: u32) -> Self {
        Self::zeta_pow(ell, k, 1)
    }

    /// `z^j` for any integer `j`.
    pub fn zeta_pow(ell: u64, k: u32, j: i64) -> Self {
        let e = j.rem_euclid(k as i64) as usize;
        let mut raw = vec![BigInt::zero(); 2 * (e + 1).max(totient(k))];
        raw[2 * e] = BigInt::one();
        Self::from_raw(ell, k, raw, BigInt::one())
    }

    /// `ell^(e/2)`, i.e. `s^e` for any integer `e`.
    pub fn s_pow(ell: u64, k: u32, e: i64) -> Self {
        let half = e.div_euclid(2);
        let odd = e.rem_euclid(2) == 1;
        let p = BigInt::from(ell).pow(half.unsigned_abs() as u32);
        let r = if half >= 0 { Rational::from_integer(p) } else { Rational::new(BigInt::one(), p) };
        let x = Self::from_rational(ell, k, &r);
        if odd {
            x.mul_s()
        } else {
            x
        }
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn order(&self) -> u32 {
        self.k
    }

    /// Coefficient of `s^e z^j`.
    pub fn coeff(&self, j: usize, e: usize) -> Rational {
        Rational::new(self.num[2 * j + e].clone(), self.den.clone())
    }

    /// All coefficients, `2 * j + e` indexed.
    pub fn coeffs(&self) -> Vec<Rational> {
        self.num.iter().map(|c| Rational::new(c.clone(), self.den.clone())).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num[0].is_one() && self.num[1..].iter().all(Zero::is_zero)
    }

    /// The rational value, if the element lies in `Q`.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.num[1..].iter().all(Zero::is_zero) {
            Some(self.coeff(0, 0))
        } else {
            None
        }
    }

    fn from_raw(ell: u64, k: u32, mut raw: Vec<BigInt>, den: BigInt) -> Self {
        let phi = totient(k);
        let cyc = cyclotomic(k);
        let top = raw.len() / 2;
        for i in (phi..top).rev() {
            for e in 0..2 {
                let t = std::mem::take(&mut raw[2 * i + e]);
                if t.is_zero() {
                    continue;
                }
                for (m, &c) in cyc.iter().enumerate().take(phi) {
                    if c != 0 {
                        raw[2 * (i - phi + m) + e] -= &t * c;
                    }
                }
            }
        }
        raw.truncate(2 * phi);
        raw.resize(2 * phi, BigInt::zero());
        let mut x = ExactScalar { ell, k, num: raw, den };
        x.normalize();
        x
    }

    fn normalize(&mut self) {
        if self.is_zero() {
            self.den = BigInt::one();
            return;
        }
        let mut g = self.den.clone();
        for c in &self.num {
            if !c.is_zero() {
                g = g.gcd(c);
                if g.is_one() {
                    break;
                }
            }
        }
        if self.den.is_negative() {
            g = -g;
        }
        if !g.is_one() {
            for c in self.num.iter_mut() {
                *c = &*c / &g;
            }
            self.den = &self.den / &g;
        }
    }

    /// Re-expresses the element inside the order-`target` ring.
    pub fn lift(&self, target: u32) -> Self {
        if target == self.k {
            return self.clone();
        }
        assert!(target % self.k == 0, "lift target {target} not a multiple of {}", self.k);
        let step = (target / self.k) as usize;
        let phi = totient(self.k);
        let mut raw = vec![BigInt::zero(); 2 * ((phi.max(1) - 1) * step + 1).max(totient(target))];
        for j in 0..phi {
            for e in 0..2 {
                raw[2 * j * step + e] = self.num[2 * j + e].clone();
            }
        }
        Self::from_raw(self.ell, target, raw, self.den.clone())
    }

    fn align(a: &Self, b: &Self) -> (Self, Self) {
        assert_eq!(a.ell, b.ell, "mixed base primes {} and {}", a.ell, b.ell);
        if a.k == b.k {
            return (a.clone(), b.clone());
        }
        let l = lcm_u32(a.k, b.k);
        (a.lift(l), b.lift(l))
    }

    fn add_impl(&self, other: &Self, sign: i32) -> Self {
        if self.k != other.k {
            let (a, b) = Self::align(self, other);
            return a.add_impl(&b, sign);
        }
        assert_eq!(self.ell, other.ell, "mixed base primes");
        let num = self
            .num
            .iter()
            .zip(&other.num)
            .map(|(x, y)| {
                let l = x * &other.den;
                let r = y * &self.den;
                if sign > 0 {
                    l + r
                } else {
                    l - r
                }
            })
            .collect();
        let mut x = ExactScalar { ell: self.ell, k: self.k, num, den: &self.den * &other.den };
        x.normalize();
        x
    }

    fn mul_impl(&self, other: &Self) -> Self {
        if self.k != other.k {
            let (a, b) = Self::align(self, other);
            return a.mul_impl(&b);
        }
        assert_eq!(self.ell, other.ell, "mixed base primes");
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.ell, self.k);
        }
        let phi = totient(self.k);
        let ell = BigInt::from(self.ell);
        let mut raw = vec![BigInt::zero(); 2 * (2 * phi - 1)];
        for i in 0..phi {
            let (x1, y1) = (&self.num[2 * i], &self.num[2 * i + 1]);
            if x1.is_zero() && y1.is_zero() {
                continue;
            }
            for j in 0..phi {
                let (x2, y2) = (&other.num[2 * j], &other.num[2 * j + 1]);
                if x2.is_zero() && y2.is_zero() {
                    continue;
                }
                raw[2 * (i + j)] += x1 * x2 + &ell * (y1 * y2);
                raw[2 * (i + j) + 1] += x1 * y2 + y1 * x2;
            }
        }
        Self::from_raw(self.ell, self.k, raw, &self.den * &other.den)
    }

    /// Multiplies by a rational constant.
    pub fn scale(&self, r: &Rational) -> Self {
        let mut x = ExactScalar {
            ell: self.ell,
            k: self.k,
            num: self.num.iter().map(|c| c * r.numer()).collect(),
            den: &self.den * r.denom(),
        };
        x.normalize();
        x
    }

    /// Multiplies by `s`.
    pub fn mul_s(&self) -> Self {
        let ell = BigInt::from(self.ell);
        let mut num = self.num.clone();
        for j in 0..num.len() / 2 {
            let x = num[2 * j].clone();
            num[2 * j] = &num[2 * j + 1] * &ell;
            num[2 * j + 1] = x;
        }
        let mut x = ExactScalar { ell: self.ell, k: self.k, num, den: self.den.clone() };
        x.normalize();
        x
    }

    /// The multiplicative inverse; fails exactly on non-units.
    pub fn inverse(&self) -> Result<Self> {
        let dim = self.num.len();
        // Column c of the multiplication matrix is self * basis_c.
        let mut m: Vec<Vec<Rational>> = vec![vec![Rational::zero(); dim + 1]; dim];
        for c in 0..dim {
            let mut b = vec![Rational::zero(); dim];
            b[c] = Rational::one();
            let prod = self.mul_impl(&Self::from_coeffs(self.ell, self.k, &b));
            for (r, v) in prod.coeffs().into_iter().enumerate() {
                m[r][c] = v;
            }
        }
        m[0][dim] = Rational::one();
        let sol = solve_square(m).ok_or_else(|| TrcError::NotInvertible(self.to_string()))?;
        Ok(Self::from_coeffs(self.ell, self.k, &sol))
    }

    /// Integer power; negative exponents require a unit.
    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut acc = Self::one(self.ell, self.k);
        let mut b = base;
        let mut n = e.unsigned_abs();
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &b;
            }
            b = &b * &b;
            n >>= 1;
        }
        Ok(acc)
    }

    /// The automorphism `z -> z^-1` fixing `s`.
    pub fn conj_cyclo(&self) -> Self {
        let phi = totient(self.k);
        let k = self.k as usize;
        let mut raw = vec![BigInt::zero(); 2 * k.max(phi)];
        for j in 0..phi {
            let t = (k - j) % k;
            for e in 0..2 {
                raw[2 * t + e] += &self.num[2 * j + e];
            }
        }
        Self::from_raw(self.ell, self.k, raw, self.den.clone())
    }

    /// Parses the canonical text form, e.g. `6/5 - 2/5*s + (1 + s)*z^2`.
    pub fn parse(ell: u64, k: u32, text: &str) -> Result<Self> {
        let mut p = Parser { src: text.as_bytes(), pos: 0, ell, k };
        let v = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(TrcError::Parse(format!("trailing input at {} in {text:?}", p.pos)));
        }
        Ok(v)
    }
}

fn solve_square(mut m: Vec<Vec<Rational>>) -> Option<Vec<Rational>> {
    let n = m.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        let inv = m[col][col].recip();
        for v in m[col].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let pivot_row = m[col].clone();
                for (x, p) in m[r].iter_mut().zip(pivot_row.iter()) {
                    *x = &*x - &f * p;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

impl PartialEq for ExactScalar {
    fn eq(&self, other: &Self) -> bool {
        if self.ell != other.ell {
            return false;
        }
        if self.k == other.k {
            return self.den == other.den && self.num == other.num;
        }
        let (a, b) = Self::align(self, other);
        a == b
    }
}

impl Eq for ExactScalar {}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&ExactScalar> for &ExactScalar {
            type Output = ExactScalar;
            fn $m(self, rhs: &ExactScalar) -> ExactScalar {
                let f: fn(&ExactScalar, &ExactScalar) -> ExactScalar = $body;
                f(self, rhs)
            }
        }
        impl $tr<ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $m(self, rhs: ExactScalar) -> ExactScalar {
                (&self).$m(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| a.add_impl(b, 1));
forward_binop!(Sub, sub, |a, b| a.add_impl(b, -1));
forward_binop!(Mul, mul, |a, b| a.mul_impl(b));

impl Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar { ell: self.ell, k: self.k, num: self.num.iter().map(|c| -c).collect(), den: self.den.clone() }
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        -&self
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<(bool, String)> = Vec::new();
        for j in 0..self.num.len() / 2 {
            let x = self.coeff(j, 0);
            let y = self.coeff(j, 1);
            let zp = match j {
                0 => String::new(),
                1 => "z".to_string(),
                _ => format!("z^{j}"),
            };
            if j > 0 && !x.is_zero() && !y.is_zero() {
                let inner = if y.is_negative() {
                    format!("{} - {}*s", fmt_rational(&x), fmt_rational(&-y))
                } else {
                    format!("{} + {}*s", fmt_rational(&x), fmt_rational(&y))
                };
                parts.push((false, format!("({inner})*{zp}")));
                continue;
            }
            if !x.is_zero() {
                let body = fmt_rational(&x.abs());
                parts.push((x.is_negative(), if j == 0 { body } else { format!("{body}*{zp}") }));
            }
            if !y.is_zero() {
                let body = format!("{}*s", fmt_rational(&y.abs()));
                parts.push((y.is_negative(), if j == 0 { body } else { format!("{body}*{zp}") }));
            }
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        for (i, (neg, body)) in parts.iter().enumerate() {
            match (i, neg) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => write!(f, "{body}")?,
                (_, true) => write!(f, " - {body}")?,
                (_, false) => write!(f, " + {body}")?,
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    ell: u64,
    k: u32,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err(&self, what: &str) -> TrcError {
        TrcError::Parse(format!("{what} at byte {}", self.pos))
    }

    fn expr(&mut self) -> Result<ExactScalar> {
        let mut acc = ExactScalar::zero(self.ell, self.k);
        let mut sign = 1;
        if self.peek() == Some(b'-') {
            self.pos += 1;
            sign = -1;
        }
        loop {
            let t = self.term()?;
            acc = if sign > 0 { &acc + &t } else { &acc - &t };
            match self.peek() {
                Some(b'+') => sign = 1,
                Some(b'-') => sign = -1,
                _ => return Ok(acc),
            }
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<ExactScalar> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let f = self.factor()?;
            acc = &acc * &f;
        }
        Ok(acc)
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected digits"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        s.parse().map_err(|_| self.err("bad integer"))
    }

    fn factor(&mut self) -> Result<ExactScalar> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(b's') => {
                self.pos += 1;
                Ok(ExactScalar::s(self.ell, self.k))
            }
            Some(b'z') => {
                self.pos += 1;
                let mut e = BigInt::one();
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    e = self.integer()?;
                }
                let e = e.to_i64().ok_or_else(|| self.err("exponent too large"))?;
                Ok(ExactScalar::zeta_pow(self.ell, self.k, e))
            }
            Some(c) if c.is_ascii_digit() => {
                let p = self.integer()?;
                let mut q = BigInt::one();
                if self.peek() == Some(b'/') {
                    self.pos += 1;
                    q = self.integer()?;
                    if q.is_zero() {
                        return Err(self.err("zero denominator"));
                    }
                }
                Ok(ExactScalar::from_rational(self.ell, self.k, &Rational::new(p, q)))
            }
            _ => Err(self.err("unexpected token")),
        }
    }
}

/// A univariate polynomial over [`ExactScalar`], lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<ExactScalar>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<ExactScalar>) -> Self {
        while coeffs.last().is_some_and(ExactScalar::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[ExactScalar] {
        &self.coeffs
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn constant_term(&self, ell: u64, k: u32) -> ExactScalar {
        self.coeffs.first().cloned().unwrap_or_else(|| ExactScalar::zero(ell, k))
    }

    /// Product of two polynomials.
    pub fn mul(&self, other: &Poly) -> Poly {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Poly::new(Vec::new());
        }
        let z = self.coeffs[0].zero_like();
        let mut out = vec![z; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Poly::new(out)
    }

    /// The polynomial `X -> P(c X)`.
    pub fn rescale(&self, c: &ExactScalar) -> Poly {
        let mut p = ExactScalar::one(c.ell(), c.order());
        let mut out = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            out.push(a * &p);
            p = &p * c;
        }
        Poly::new(out)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &ExactScalar) -> ExactScalar {
        let mut acc = ExactScalar::zero(x.ell(), x.order());
        for a in self.coeffs.iter().rev() {
            acc = &(&acc * x) + a;
        }
        acc
    }
}

/// Evaluates `P` at `x`.
pub fn poly_eval(p: &Poly, x: &ExactScalar) -> ExactScalar {
    p.eval(x)
}
