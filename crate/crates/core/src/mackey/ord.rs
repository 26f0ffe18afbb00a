//! The ordinary projector `e = lim A^{k!}` on `(Z/p^N)^d`.

use rand::Rng;
use serde_json::json;

use crate::cert::{Certificate, Check, Status};
use crate::error::{Result, TrcError};
use crate::ffield::{inv_mod, ModMat};
use crate::qcomb::is_prime;

pub const MAX_DIM: usize = 8;
/// Moduli stay below `2^31` so that row sums of products fit in `i64`.
pub const MAX_MODULUS: u64 = 1 << 31;

/// `d x d` matrix over `Z/p^N`, row-major with entries in `0..p^N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PadicEndo {
    pub p: u64,
    pub precision: u32,
    pub d: usize,
    pub entries: Vec<i64>,
}

impl PadicEndo {
    pub fn new(p: u64, precision: u32, rows: &[Vec<i64>]) -> Result<Self> {
        let d = rows.len();
        if !is_prime(p) {
            return Err(TrcError::InvalidSignature(format!("{p} is not prime")));
        }
        if d == 0 || d > MAX_DIM || rows.iter().any(|r| r.len() != d) {
            return Err(TrcError::InvalidSignature(format!("need a square matrix of size 1..={MAX_DIM}")));
        }
        let modulus = p.checked_pow(precision).filter(|&m| m < MAX_MODULUS && precision >= 1);
        let Some(m) = modulus else {
            return Err(TrcError::BoundExceeded(format!("p^N must be below {MAX_MODULUS}")));
        };
        let entries = rows.iter().flatten().map(|x| x.rem_euclid(m as i64)).collect();
        Ok(PadicEndo { p, precision, d, entries })
    }

    pub fn modulus(&self) -> i64 {
        self.p.pow(self.precision) as i64
    }

    fn with_entries(&self, entries: Vec<i64>) -> Self {
        PadicEndo { entries, ..self.clone() }
    }

    pub fn identity(&self) -> Self {
        let d = self.d;
        self.with_entries((0..d * d).map(|i| i64::from(i / d == i % d)).collect())
    }

    pub fn zero(&self) -> Self {
        self.with_entries(vec![0; self.d * self.d])
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.d + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.d).map(<[i64]>::to_vec).collect()
    }

    pub fn mul(&self, o: &Self) -> Self {
        let (d, m) = (self.d, self.modulus());
        let mut out = vec![0i64; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a != 0 {
                    for j in 0..d {
                        out[i * d + j] = (out[i * d + j] + a * o.get(k, j)) % m;
                    }
                }
            }
        }
        self.with_entries(out)
    }

    pub fn sub(&self, o: &Self) -> Self {
        let m = self.modulus();
        self.with_entries(self.entries.iter().zip(&o.entries).map(|(a, b)| (a - b).rem_euclid(m)).collect())
    }

    pub fn pow(&self, mut e: u128) -> Self {
        let mut r = self.identity();
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&b);
            }
            b = b.mul(&b);
            e >>= 1;
        }
        r
    }

    pub fn is_zero_mod_p(&self) -> bool {
        self.entries.iter().all(|&x| x % self.p as i64 == 0)
    }

    /// Rank of the reduction mod `p`.
    pub fn rank_mod_p(&self) -> usize {
        let p = self.p as i64;
        let rows: Vec<Vec<i64>> = self.rows().into_iter().map(|r| r.into_iter().map(|x| x % p).collect()).collect();
        ModMat::from_rows(p, &rows).rank()
    }

    /// Inverse over `Z/p^N`, when the reduction mod `p` is invertible.
    pub fn inverse(&self) -> Option<Self> {
        let (d, m, p) = (self.d, self.modulus(), self.p as i64);
        let mut a = self.rows();
        let mut inv = self.identity().rows();
        for c in 0..d {
            let piv = (c..d).find(|&r| a[r][c] % p != 0)?;
            a.swap(c, piv);
            inv.swap(c, piv);
            let u = inv_mod(a[c][c], m);
            for j in 0..d {
                a[c][j] = a[c][j] * u % m;
                inv[c][j] = inv[c][j] * u % m;
            }
            for r in 0..d {
                if r != c && a[r][c] != 0 {
                    let f = a[r][c];
                    for j in 0..d {
                        a[r][j] = (a[r][j] - f * a[c][j]).rem_euclid(m);
                        inv[r][j] = (inv[r][j] - f * inv[c][j]).rem_euclid(m);
                    }
                }
            }
        }
        Some(self.with_entries(inv.concat()))
    }

    pub fn random(rng: &mut impl Rng, p: u64, precision: u32, d: usize) -> Result<Self> {
        let m = p.pow(precision) as i64;
        let rows: Vec<Vec<i64>> = (0..d).map(|_| (0..d).map(|_| rng.gen_range(0..m)).collect()).collect();
        Self::new(p, precision, &rows)
    }

    pub fn random_invertible(rng: &mut impl Rng, p: u64, precision: u32, d: usize) -> Result<Self> {
        loop {
            let c = Self::random(rng, p, precision, d)?;
            if c.rank_mod_p() == d {
                return Ok(c);
            }
        }
    }
}

/// Cap on the factorial iteration: past it every unit part has exponent dividing `k!`
/// and the non-unit part has vanished mod `p^N`.
pub fn iteration_bound(p: u64, precision: u32, d: usize) -> u64 {
    let pd = p.saturating_pow(d as u32);
    pd.max(p * (u64::from(precision) + d as u64)).max(d as u64 * u64::from(precision)) + 1
}

/// Exponent `m = lcm(p^i - 1 : i <= d) · p^{c + N - 1}` with `p^c >= d`, so that `A^m = e`.
pub fn closed_form_exponent(p: u64, precision: u32, d: usize) -> Option<u128> {
    let p = u128::from(p);
    let mut l: u128 = 1;
    for i in 1..=d as u32 {
        let x = p.checked_pow(i)? - 1;
        l = (l / num_integer::gcd(l, x)).checked_mul(x)?;
    }
    let mut c = 0u32;
    while p.pow(c) < d as u128 {
        c += 1;
    }
    l.checked_mul(p.checked_pow(c + precision - 1)?)
}

/// Result of the factorial-power iteration.
#[derive(Clone, Debug)]
pub struct OrdProjector {
    pub e: PadicEndo,
    /// Smallest `k` with `A^{k!}` idempotent.
    pub steps: u64,
    pub certificate: Certificate,
}

/// `e = lim A^{k!}`: iterates `B_k = B_{k-1}^k` until `B_k` is idempotent, then certifies it.
pub fn ordinary_projector(a: &PadicEndo) -> Result<OrdProjector> {
    let bound = iteration_bound(a.p, a.precision, a.d);
    let mut b = a.clone();
    let mut k = 1u64;
    while b.mul(&b) != b {
        k += 1;
        if k > bound {
            return Err(TrcError::BoundExceeded(format!("A^(k!) did not stabilize for k <= {bound}")));
        }
        b = b.pow(u128::from(k));
    }
    let e = b;
    let mut cert = Certificate::new(
        "ordinary-projector",
        json!({ "p": a.p, "N": a.precision, "d": a.d, "A": a.rows() }),
        None,
    );
    cert.push(Check::from_bool("idempotent", e.mul(&e) == e, json!({ "k": k })));
    cert.push(Check::from_bool("commutes", e.mul(a) == a.mul(&e), serde_json::Value::Null));
    let rank_e = e.rank_mod_p();
    let rank_ae = a.mul(&e).rank_mod_p();
    cert.push(Check::from_bool(
        "invertible-on-image",
        rank_e == rank_ae,
        json!({ "rank_e": rank_e, "rank_Ae": rank_ae }),
    ));
    let comp = a.identity().sub(&e);
    let mut power = a.mul(&comp);
    let mut nil_k = None;
    for j in 1..=a.d {
        if power.is_zero_mod_p() {
            nil_k = Some(j);
            break;
        }
        power = power.mul(a);
    }
    cert.push(Check::from_bool(
        "nilpotent-on-kernel",
        nil_k.is_some() || rank_e == a.d,
        json!({ "k": nil_k }),
    ));
    cert.push(match closed_form_exponent(a.p, a.precision, a.d) {
        Some(m) => Check::from_bool("closed-form-limit", a.pow(m) == e, json!({ "exponent": m.to_string() })),
        None => Check::new("closed-form-limit", Status::Unchecked, json!("exponent exceeds u128")),
    });
    cert.data = json!({ "e": e.rows(), "rank": rank_e });
    Ok(OrdProjector { e, steps: k, certificate: cert })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_cases() {
        let a = PadicEndo::new(3, 4, &[vec![4, 0], vec![0, 3]]).unwrap();
        let e = ordinary_projector(&a).unwrap();
        assert_eq!(e.e.rows(), vec![vec![1, 0], vec![0, 0]]);
        assert!(e.certificate.pass);
        let a = PadicEndo::new(5, 3, &[vec![5, 0], vec![0, 5]]).unwrap();
        let e = ordinary_projector(&a).unwrap();
        assert_eq!(e.e, a.zero());
        assert!(e.certificate.pass);
    }

    #[test]
    fn conjugation_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let (p, n) = (3u64, 5u32);
            let c = PadicEndo::random_invertible(&mut rng, p, n, 2).unwrap();
            let ci = c.inverse().unwrap();
            assert_eq!(c.mul(&ci), c.identity());
            let u = rng.gen_range(1..p as i64) + p as i64 * rng.gen_range(0..9);
            let diag = PadicEndo::new(p, n, &[vec![u, 0], vec![0, p as i64 * 2]]).unwrap();
            let a = c.mul(&diag).mul(&ci);
            let e = ordinary_projector(&a).unwrap();
            let expect = c.mul(&PadicEndo::new(p, n, &[vec![1, 0], vec![0, 0]]).unwrap()).mul(&ci);
            assert_eq!(e.e, expect);
            assert!(e.certificate.pass);
        }
    }

    #[test]
    fn nonconsecutive_stop_rule() {
        // order 4 unit: A^(2!) = A^(3!) but is not idempotent
        let a = PadicEndo::new(5, 1, &[vec![2]]).unwrap();
        assert_eq!(a.pow(2), a.pow(6));
        assert_ne!(a.pow(2).mul(&a.pow(2)), a.pow(2));
        let e = ordinary_projector(&a).unwrap();
        assert_eq!(e.e.rows(), vec![vec![1]]);
    }
}
