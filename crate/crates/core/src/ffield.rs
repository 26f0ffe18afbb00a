//! Small dense matrices over `Z/q` for modest `q`, stored row-major.

use num_bigint::BigInt;
use num_traits::One;

/// Square or rectangular matrix with entries in `0..q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModMat {
    pub rows: usize,
    pub cols: usize,
    pub q: i64,
    pub data: Vec<i64>,
}

impl ModMat {
    pub fn zero(rows: usize, cols: usize, q: i64) -> Self {
        ModMat { rows, cols, q, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize, q: i64) -> Self {
        let mut m = Self::zero(n, n, q);
        for i in 0..n {
            m.data[i * n + i] = 1 % q;
        }
        m
    }

    pub fn from_rows(q: i64, rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let data = rows.iter().flat_map(|row| row.iter().map(|x| x.rem_euclid(q))).collect();
        ModMat { rows: r, cols: c, q, data }
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] = v.rem_euclid(self.q);
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        self.data.chunks(self.cols.max(1)).map(<[i64]>::to_vec).collect()
    }

    pub fn mul(&self, o: &ModMat) -> ModMat {
        debug_assert_eq!(self.cols, o.rows);
        let mut out = ModMat::zero(self.rows, o.cols, self.q);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..o.cols {
                    let idx = i * o.cols + j;
                    out.data[idx] = (out.data[idx] + a * o.get(k, j)) % self.q;
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> ModMat {
        let mut out = ModMat::zero(self.cols, self.rows, self.q);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j);
            }
        }
        out
    }

    /// Determinant for prime `q`.
    pub fn det(&self) -> i64 {
        let n = self.rows;
        let p = self.q;
        let mut a = self.clone();
        let mut det = 1i64;
        for c in 0..n {
            let Some(piv) = (c..n).find(|&r| a.get(r, c) != 0) else {
                return 0;
            };
            if piv != c {
                for j in 0..n {
                    a.data.swap(piv * n + j, c * n + j);
                }
                det = (p - det) % p;
            }
            let d = a.get(c, c);
            det = det * d % p;
            let inv = inv_mod(d, p);
            for r in c + 1..n {
                let f = a.get(r, c) * inv % p;
                if f != 0 {
                    for j in c..n {
                        let v = a.get(r, j) - f * a.get(c, j);
                        a.set(r, j, v);
                    }
                }
            }
        }
        det
    }

    /// Rank for prime `q`.
    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Reduced row echelon form and pivot columns, for prime `q`.
    pub fn rref(&self) -> (ModMat, Vec<usize>) {
        let p = self.q;
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for c in 0..a.cols {
            if row == a.rows {
                break;
            }
            let Some(piv) = (row..a.rows).find(|&r| a.get(r, c) != 0) else {
                continue;
            };
            for j in 0..a.cols {
                a.data.swap(piv * a.cols + j, row * a.cols + j);
            }
            let inv = inv_mod(a.get(row, c), p);
            for j in 0..a.cols {
                let v = a.get(row, j) * inv;
                a.set(row, j, v);
            }
            for r in 0..a.rows {
                if r != row {
                    let f = a.get(r, c);
                    if f != 0 {
                        for j in 0..a.cols {
                            let v = a.get(r, j) - f * a.get(row, j);
                            a.set(r, j, v);
                        }
                    }
                }
            }
            pivots.push(c);
            row += 1;
        }
        (a, pivots)
    }

    /// Inverse for prime `q`, if it exists.
    pub fn inverse(&self) -> Option<ModMat> {
        let n = self.rows;
        let mut aug = ModMat::zero(n, 2 * n, self.q);
        for i in 0..n {
            for j in 0..n {
                aug.data[i * 2 * n + j] = self.get(i, j);
            }
            aug.data[i * 2 * n + n + i] = 1;
        }
        let (r, piv) = aug.rref();
        if piv.len() < n || piv[n - 1] != n - 1 {
            return None;
        }
        let mut out = ModMat::zero(n, n, self.q);
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] = r.get(i, n + j);
            }
        }
        Some(out)
    }

    /// Base-`q` code of the entries, for hashing small matrices.
    pub fn code(&self) -> u64 {
        self.data.iter().rev().fold(0u64, |acc, &x| acc * self.q as u64 + x as u64)
    }

    pub fn from_code(rows: usize, cols: usize, q: i64, mut code: u64) -> Self {
        let mut m = Self::zero(rows, cols, q);
        for x in m.data.iter_mut() {
            *x = (code % q as u64) as i64;
            code /= q as u64;
        }
        m
    }
}

/// Inverse of `a` modulo `m`; panics unless coprime.
pub fn inv_mod(a: i64, m: i64) -> i64 {
    let (mut r0, mut r1) = (a.rem_euclid(m), m);
    let (mut s0, mut s1) = (1i64, 0i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    assert_eq!(r0, 1, "{a} is not invertible mod {m}");
    s0.rem_euclid(m)
}

/// Smallest primitive root modulo a prime.
pub fn primitive_root(p: i64) -> i64 {
    if p == 2 {
        return 1;
    }
    let phi = p - 1;
    let mut factors = Vec::new();
    let mut x = phi;
    let mut d = 2;
    while d * d <= x {
        if x % d == 0 {
            factors.push(d);
            while x % d == 0 {
                x /= d;
            }
        }
        d += 1;
    }
    if x > 1 {
        factors.push(x);
    }
    (2..p).find(|&g| factors.iter().all(|&f| pow_mod(g, phi / f, p) != 1)).expect("prime modulus")
}

pub fn pow_mod(mut b: i64, mut e: i64, m: i64) -> i64 {
    let mut r = 1 % m;
    b = b.rem_euclid(m);
    while e > 0 {
        if e & 1 == 1 {
            r = (r as i128 * b as i128 % m as i128) as i64;
        }
        b = (b as i128 * b as i128 % m as i128) as i64;
        e >>= 1;
    }
    r
}

/// Generators of `GL_n(F_p)`: elementary transvections and one diagonal unit.
pub fn gl_generators(n: usize, p: i64) -> Vec<ModMat> {
    let mut gens = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let mut m = ModMat::identity(n, p);
                m.set(i, j, 1);
                gens.push(m);
            }
        }
    }
    if p > 2 {
        let mut m = ModMat::identity(n, p);
        m.set(0, 0, primitive_root(p));
        gens.push(m);
    }
    gens
}

/// `|GL_n(F_q)|`.
pub fn gl_order(n: usize, q: u64) -> BigInt {
    let qn = BigInt::from(q).pow(n as u32);
    (0..n).fold(BigInt::one(), |acc, i| acc * (&qn - BigInt::from(q).pow(i as u32)))
}

/// All elements of `GL_n(F_p)` by exhaustive scan; only for tiny cases.
pub fn gl_elements(n: usize, p: i64) -> Vec<ModMat> {
    let total = (p as u64).pow((n * n) as u32);
    (0..total).map(|c| ModMat::from_code(n, n, p, c)).filter(|m| m.det() != 0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_sizes_and_generation() {
        for (n, p) in [(1usize, 3i64), (2, 2), (2, 3), (3, 2)] {
            let all = gl_elements(n, p);
            assert_eq!(BigInt::from(all.len()), gl_order(n, p as u64));
            let mut seen = std::collections::HashSet::new();
            let mut stack = vec![ModMat::identity(n, p)];
            seen.insert(stack[0].clone());
            let gens = gl_generators(n, p);
            while let Some(x) = stack.pop() {
                for g in &gens {
                    let y = g.mul(&x);
                    if seen.insert(y.clone()) {
                        stack.push(y);
                    }
                }
            }
            assert_eq!(seen.len(), all.len());
        }
    }

    #[test]
    fn inverse_and_rank() {
        let m = ModMat::from_rows(5, &[vec![1, 2], vec![3, 4]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), ModMat::identity(2, 5));
        assert_eq!(ModMat::from_rows(3, &[vec![1, 2], vec![2, 1]]).rank(), 1);
        assert!(ModMat::from_rows(3, &[vec![1, 2], vec![2, 1]]).inverse().is_none());
        assert_eq!(primitive_root(7), 3);
    }
}
