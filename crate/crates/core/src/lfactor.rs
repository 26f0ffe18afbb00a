//! Local L-factors, Frobenius polynomials, and the group-algebra form of the
//! tame norm relation, all over `Q(sqrt(ell), zeta_k)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use serde_json::{json, Value};

use crate::cert::{Certificate, Check, Status};
use crate::error::{Result, TrcError};
use crate::exactnum::{ExactScalar, Poly, Rational};
use crate::qcomb::is_prime;

/// Unitary Satake parameters `alpha_1, ..., alpha_2n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SatakeParams {
    pub n: usize,
    pub ell: u64,
    pub alpha: Vec<ExactScalar>,
}

impl SatakeParams {
    pub fn new(n: usize, ell: u64, alpha: Vec<ExactScalar>) -> Result<Self> {
        if n == 0 || alpha.len() != 2 * n {
            return Err(TrcError::InvalidSignature(format!("expected {} Satake parameters, got {}", 2 * n, alpha.len())));
        }
        if !is_prime(ell) {
            return Err(TrcError::InvalidSignature(format!("ell = {ell} is not prime")));
        }
        for a in &alpha {
            if a.ell() != ell {
                return Err(TrcError::Incompatible(format!("parameter over ell = {} used with ell = {ell}", a.ell())));
            }
            if !(a * &a.conj_cyclo()).is_one() {
                return Err(TrcError::InvalidSignature(format!("alpha = {a} is not unitary")));
            }
        }
        Ok(SatakeParams { n, ell, alpha })
    }

    /// Parameters `zeta_k^{j_i}` given as `(j_i, k_i)` pairs.
    pub fn from_roots(n: usize, ell: u64, roots: &[(i64, u32)]) -> Result<Self> {
        Self::new(n, ell, roots.iter().map(|&(j, k)| ExactScalar::zeta_pow(ell, k, j)).collect())
    }
}

/// `P_lambda(X)` and its twist `P(X) = P_lambda(ell^{-n} X)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrobPoly {
    pub p_lambda: Poly,
    pub p: Poly,
}

/// The value `chi(ell)` of an unramified character of order `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacterValue {
    pub chi_ell: ExactScalar,
    pub order: u32,
}

impl CharacterValue {
    /// `chi(ell) = zeta_k^j`.
    pub fn new(ell: u64, k: u32, j: i64) -> Result<Self> {
        if k == 0 {
            return Err(TrcError::InvalidSignature("character order must be positive".into()));
        }
        let v = ExactScalar::zeta_pow(ell, k, j);
        Ok(CharacterValue { chi_ell: v, order: k })
    }

    pub fn trivial(ell: u64) -> Self {
        CharacterValue { chi_ell: ExactScalar::one(ell, 1), order: 1 }
    }

    pub fn is_valid(&self) -> bool {
        self.chi_ell.pow(i64::from(self.order)).is_ok_and(|x| x.is_one())
    }
}

fn linear(c: &ExactScalar) -> Poly {
    Poly::new(vec![ExactScalar::one(c.ell(), c.order()), -c])
}

/// `P_lambda(X) = prod (1 - alpha_i s^{2n-1} X)`.
pub fn frob_poly_from_satake(sp: &SatakeParams) -> FrobPoly {
    let w = ExactScalar::s_pow(sp.ell, 1, 2 * sp.n as i64 - 1);
    let mut p_lambda = Poly::new(vec![ExactScalar::one(sp.ell, 1)]);
    for a in &sp.alpha {
        p_lambda = p_lambda.mul(&linear(&(a * &w)));
    }
    let twist = ExactScalar::s_pow(sp.ell, 1, -2 * sp.n as i64);
    let p = p_lambda.rescale(&twist);
    FrobPoly { p_lambda, p }
}

/// `L(sigma x chi, 1/2)^{-1} = prod (1 - alpha_i chi(ell) s^{-1})`, computed directly.
pub fn l_inverse(sp: &SatakeParams, chi: &ExactScalar) -> ExactScalar {
    let si = ExactScalar::s_pow(sp.ell, 1, -1);
    let one = ExactScalar::one(sp.ell, 1);
    sp.alpha.iter().fold(one.clone(), |acc, a| &acc * &(&one - &(&(a * chi) * &si)))
}

/// Compares `P(chi(ell))` with `L(sigma x chi, 1/2)^{-1}`.
pub fn check_central_value(sp: &SatakeParams, chi: &CharacterValue) -> Certificate {
    let fp = frob_poly_from_satake(sp);
    central_value_certificate(sp, &fp, chi)
}

pub fn central_value_certificate(sp: &SatakeParams, fp: &FrobPoly, chi: &CharacterValue) -> Certificate {
    let mut cert = Certificate::new(
        "central-value",
        json!({
            "n": sp.n,
            "ell": sp.ell,
            "alpha": sp.alpha.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
            "chi_ell": chi.chi_ell.to_string(),
            "chi_order": chi.order,
        }),
        None,
    );
    cert.push(Check::from_bool("chi-order", chi.is_valid(), Value::Null));
    let shape = fp.p.degree() == Some(2 * sp.n) && fp.p.constant_term(sp.ell, 1).is_one();
    cert.push(Check::from_bool("poly-shape", shape, json!({"degree": fp.p.degree()})));
    let lhs = fp.p.eval(&chi.chi_ell);
    let rhs = l_inverse(sp, &chi.chi_ell);
    cert.push(Check::from_bool("P(chi)=L^-1", lhs == rhs, json!({"lhs": lhs.to_string(), "rhs": rhs.to_string()})));
    cert
}

/// Fast boolean form used by sweeps.
pub fn central_value_holds(sp: &SatakeParams, fp: &FrobPoly, chi: &ExactScalar) -> bool {
    fp.p.eval(chi) == l_inverse(sp, chi)
}

/// Writes `beta = c zeta^j s^e` with `c` rational, if possible.
fn weil_shape(beta: &ExactScalar) -> Option<(Rational, i64, i64)> {
    let (ell, k) = (beta.ell(), beta.order());
    for e in 0..2i64 {
        for j in 0..i64::from(k) {
            let gamma = &(beta * &ExactScalar::zeta_pow(ell, k, -j)) * &ExactScalar::s_pow(ell, 1, -e);
            if let Some(c) = gamma.as_rational() {
                return Some((c, j, e));
            }
        }
    }
    None
}

/// Checks `beta conj(beta) = ell^{2n-1}` on the root-of-unity times `s`-power shape.
pub fn weil_weight_check(beta: &[ExactScalar], n: usize) -> Certificate {
    let mut cert = Certificate::new(
        "weil-weight",
        json!({"n": n, "beta": beta.iter().map(|b| b.to_string()).collect::<Vec<_>>()}),
        None,
    );
    for (i, b) in beta.iter().enumerate() {
        let name = format!("beta[{i}]");
        let ell = b.ell();
        if b.is_zero() {
            cert.push(Check::from_bool(name, false, json!("zero is not a Weil number")));
            continue;
        }
        let Some((c, j, e)) = weil_shape(b) else {
            cert.push(Check::new(name, Status::Unchecked, json!({"reason": "unsupported shape", "beta": b.to_string()})));
            continue;
        };
        // Every embedding sends c zeta^j s^e to c^2 ell^e in absolute value squared.
        let norm = b * &b.conj_cyclo();
        let target = ExactScalar::s_pow(ell, 1, 2 * n as i64 - 1);
        let weight_ok = c.clone() * c.clone() * Rational::from_integer(BigInt::from(ell).pow(e as u32))
            == Rational::from_integer(BigInt::from(ell).pow(2 * n as u32 - 1))
            && norm == &target * &target.clone();
        // The eigenvalue ell^{n-1} beta^{-1} must differ from ell^{-1}.
        let eig = b.inverse().map(|inv| &ExactScalar::s_pow(ell, 1, 2 * (n as i64 - 1)) * &inv);
        let not_inverse_ell = eig.as_ref().is_ok_and(|x| *x != ExactScalar::s_pow(ell, 1, -2));
        cert.push(Check::from_bool(
            name,
            weight_ok,
            json!({
                "shape": {"c": crate::exactnum::fmt_rational(&c), "zeta_power": j, "s_power": e},
                "beta_conj_beta": norm.to_string(),
                "eigenvalue_not_ell_inverse": weight_ok && not_inverse_ell,
            }),
        ));
    }
    cert
}

/// `ell^{n^2} / (ell - 1) * L(sigma x chi, 1/2)^{-1}`.
pub fn tame_factor(sp: &SatakeParams, chi: &CharacterValue) -> ExactScalar {
    let c = Rational::new(BigInt::from(sp.ell).pow((sp.n * sp.n) as u32), BigInt::from(sp.ell - 1));
    l_inverse(sp, &chi.chi_ell).scale(&c)
}

/// A finite abelian group by its multiplication table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianGroup {
    pub table: Vec<Vec<usize>>,
    pub identity: usize,
}

/// A character `g -> zeta_e^{values[g]}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Character {
    pub exponent: u32,
    pub values: Vec<u32>,
}

impl AbelianGroup {
    pub fn new(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 || table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(TrcError::InvalidSignature("malformed multiplication table".into()));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e][g] == g))
            .ok_or_else(|| TrcError::InvalidSignature("no identity element".into()))?;
        let g = AbelianGroup { table, identity };
        for a in 0..n {
            for b in 0..n {
                if g.table[a][b] != g.table[b][a] {
                    return Err(TrcError::InvalidSignature("table is not commutative".into()));
                }
            }
        }
        Ok(g)
    }

    /// `Z/m` with generator `1`.
    pub fn cyclic(m: usize) -> Self {
        AbelianGroup { table: (0..m).map(|a| (0..m).map(|b| (a + b) % m).collect()).collect(), identity: 0 }
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn pow(&self, g: usize, e: i64) -> usize {
        let k = self.element_order(g) as i64;
        let e = e.rem_euclid(k);
        (0..e).fold(self.identity, |acc, _| self.mul(acc, g))
    }

    pub fn inverse(&self, g: usize) -> usize {
        (0..self.order()).find(|&h| self.mul(g, h) == self.identity).expect("group element has an inverse")
    }

    pub fn element_order(&self, g: usize) -> u32 {
        let mut x = g;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    pub fn exponent(&self) -> u32 {
        (0..self.order()).map(|g| self.element_order(g)).fold(1, |a, b| a.lcm(&b))
    }

    /// All characters, by extending along a chain of subgroups.
    pub fn characters(&self) -> Vec<Character> {
        let n = self.order();
        let e = self.exponent();
        let mut members = vec![false; n];
        members[self.identity] = true;
        let mut chars: Vec<Vec<Option<u32>>> = vec![{
            let mut v = vec![None; n];
            v[self.identity] = Some(0);
            v
        }];
        while let Some(g) = (0..n).find(|&x| !members[x]) {
            // Smallest d with g^d in the current subgroup.
            let mut d = 1;
            let mut gd = g;
            while !members[gd] {
                gd = self.mul(gd, g);
                d += 1;
            }
            let cur: Vec<usize> = (0..n).filter(|&x| members[x]).collect();
            let mut next = Vec::with_capacity(chars.len() * d as usize);
            for chi in &chars {
                let y = chi[gd].expect("defined on subgroup");
                let step = e / d;
                let x0 = (0..e).find(|&x| (x * d) % e == y).expect("d-th root exists in mu_e");
                for t in 0..d {
                    let v = (x0 + t * step) % e;
                    let mut ext = chi.clone();
                    let mut gj = self.identity;
                    for j in 0..d {
                        for &h in &cur {
                            let val = (chi[h].expect("defined") + j * v) % e;
                            ext[self.mul(h, gj)] = Some(val);
                        }
                        gj = self.mul(gj, g);
                    }
                    next.push(ext);
                }
            }
            chars = next;
            let mut gj = self.identity;
            for _ in 0..d {
                for &h in &cur {
                    members[self.mul(h, gj)] = true;
                }
                gj = self.mul(gj, g);
            }
        }
        chars
            .into_iter()
            .map(|c| Character { exponent: e, values: c.into_iter().map(|v| v.expect("total")).collect() })
            .collect()
    }
}

/// Element of `Q(sqrt(ell), zeta)[G]`.
pub type GroupAlgebraElt = Vec<ExactScalar>;

pub fn ga_mul(g: &AbelianGroup, a: &GroupAlgebraElt, b: &GroupAlgebraElt) -> GroupAlgebraElt {
    let mut out: Vec<ExactScalar> = a.iter().map(ExactScalar::zero_like).collect();
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            let t = g.mul(i, j);
            out[t] = &out[t] + &(x * y);
        }
    }
    out
}

/// `e_chi = |G|^{-1} sum_g chi(g)^{-1} [g]`.
pub fn idempotent(g: &AbelianGroup, chi: &Character, ell: u64) -> GroupAlgebraElt {
    let inv = Rational::new(BigInt::one(), BigInt::from(g.order()));
    chi.values.iter().map(|&v| ExactScalar::zeta_pow(ell, chi.exponent, -i64::from(v)).scale(&inv)).collect()
}

/// `P(Fr^{-1})` in the group algebra.
pub fn frobenius_element(g: &AbelianGroup, p: &Poly, frob: usize, ell: u64) -> GroupAlgebraElt {
    let k = p.coeffs().iter().map(ExactScalar::order).fold(1, |a, b| a.lcm(&b));
    let mut x = vec![ExactScalar::zero(ell, k); g.order()];
    let fi = g.inverse(frob);
    let mut pos = g.identity;
    for c in p.coeffs() {
        x[pos] = &x[pos] + c;
        pos = g.mul(pos, fi);
    }
    x
}

/// Per-character eigenvalues of `P(Fr^{-1})` on `Q(sqrt(ell), zeta)[G]`.
pub fn tame_group_algebra_check(g: &AbelianGroup, sp: &SatakeParams, frob: usize) -> Result<Certificate> {
    if frob >= g.order() {
        return Err(TrcError::InvalidSignature("Frobenius index out of range".into()));
    }
    let ell = sp.ell;
    let fp = frob_poly_from_satake(sp);
    let x = frobenius_element(g, &fp.p, frob, ell);
    let chars = g.characters();
    let mut cert = Certificate::new(
        "tame-group-algebra",
        json!({"order": g.order(), "frobenius": frob, "n": sp.n, "ell": ell}),
        None,
    );
    cert.push(Check::from_bool(
        "character-count",
        chars.len() == g.order() && distinct(&chars),
        json!({"characters": chars.len()}),
    ));
    let mut total: GroupAlgebraElt = x.iter().map(ExactScalar::zero_like).collect();
    let fi = g.inverse(frob);
    let mut rows = Vec::new();
    for (i, chi) in chars.iter().enumerate() {
        let e = idempotent(g, chi, ell);
        let xe = ga_mul(g, &x, &e);
        let chi_fi = ExactScalar::zeta_pow(ell, chi.exponent, i64::from(chi.values[fi]));
        let eigen = fp.p.eval(&chi_fi);
        let scaled: GroupAlgebraElt = e.iter().map(|v| v * &eigen).collect();
        let ok = xe == scaled;
        let l_ok = eigen == l_inverse(sp, &chi_fi);
        cert.push(Check::from_bool(
            format!("chi[{i}]"),
            ok && l_ok,
            json!({"chi_frob_inverse": chi_fi.to_string(), "eigenvalue": eigen.to_string(), "equals_L_inverse": l_ok}),
        ));
        rows.push(json!({"character": chi.values, "exponent": chi.exponent, "eigenvalue": eigen.to_string()}));
        for (t, v) in total.iter_mut().zip(&xe) {
            *t = &*t + v;
        }
    }
    cert.push(Check::from_bool("fourier-inversion", total == x, Value::Null));
    cert.data = json!({"eigenvalues": rows});
    Ok(cert)
}

fn distinct(chars: &[Character]) -> bool {
    let mut v: Vec<&Vec<u32>> = chars.iter().map(|c| &c.values).collect();
    v.sort();
    v.dedup();
    v.len() == chars.len()
}

/// The eight values `mu_4 ∪ mu_6` as `(j, k)` pairs of `zeta_k^j`.
pub fn small_roots_of_unity() -> Vec<(i64, u32)> {
    vec![(0, 1), (1, 2), (1, 4), (3, 4), (1, 6), (2, 6), (4, 6), (5, 6)]
}

/// Summary of an exhaustive central-value sweep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepSummary {
    pub cases: u64,
    pub failures: Vec<String>,
}

/// Every multiset of `2n` values from [`small_roots_of_unity`] and every primitive `chi(ell)` of order `1..=max_k`.
pub fn central_value_sweep(n: usize, ell: u64, max_k: u32) -> Result<SweepSummary> {
    let roots = small_roots_of_unity();
    let mut cases = 0;
    let mut failures = Vec::new();
    let mut idx = vec![0usize; 2 * n];
    let chis: Vec<ExactScalar> = (1..=max_k).map(|k| ExactScalar::zeta_pow(ell, k, 1)).collect();
    loop {
        let sp = SatakeParams::from_roots(n, ell, &idx.iter().map(|&i| roots[i]).collect::<Vec<_>>())?;
        let fp = frob_poly_from_satake(&sp);
        if !(fp.p.degree() == Some(2 * n) && fp.p.constant_term(ell, 1).is_one()) {
            failures.push(format!("shape at {idx:?}"));
        }
        for (k, chi) in chis.iter().enumerate() {
            cases += 1;
            if !central_value_holds(&sp, &fp, chi) && failures.len() < 16 {
                failures.push(format!("alpha indices {idx:?}, chi order {}", k + 1));
            }
        }
        // Next nondecreasing index vector.
        let Some(pos) = (0..idx.len()).rev().find(|&i| idx[i] + 1 < roots.len()) else {
            break;
        };
        let v = idx[pos] + 1;
        for x in idx[pos..].iter_mut() {
            *x = v;
        }
    }
    Ok(SweepSummary { cases, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    fn sc(ell: u64, k: u32, text: &str) -> ExactScalar {
        ExactScalar::parse(ell, k, text).unwrap()
    }

    #[test]
    fn frob_poly_examples() {
        let sp = SatakeParams::from_roots(1, 5, &[(0, 1), (0, 1)]).unwrap();
        let fp = frob_poly_from_satake(&sp);
        let expect = Poly::new(vec![sc(5, 1, "1"), sc(5, 1, "-2*s"), sc(5, 1, "5")]);
        assert_eq!(fp.p_lambda, expect);
        let sp = SatakeParams::from_roots(1, 5, &[(0, 1), (1, 2)]).unwrap();
        let fp = frob_poly_from_satake(&sp);
        assert_eq!(fp.p_lambda, Poly::new(vec![sc(5, 1, "1"), sc(5, 1, "0"), sc(5, 1, "-5")]));
        assert!(fp.p_lambda.constant_term(5, 1).is_one());
    }

    #[test]
    fn central_value_examples() {
        let sp = SatakeParams::from_roots(1, 5, &[(0, 1), (0, 1)]).unwrap();
        let c = check_central_value(&sp, &CharacterValue::trivial(5));
        assert!(c.pass);
        assert_eq!(l_inverse(&sp, &ExactScalar::one(5, 1)), sc(5, 1, "6/5 - 2/5*s"));
        let minus = CharacterValue::new(5, 2, 1).unwrap();
        assert!(check_central_value(&sp, &minus).pass);
        assert_eq!(l_inverse(&sp, &minus.chi_ell), sc(5, 1, "6/5 + 2/5*s"));
        for n in 1..=3 {
            let sp = SatakeParams::from_roots(n, 3, &vec![(0, 1); 2 * n]).unwrap();
            let one = ExactScalar::one(3, 1);
            let base = &one - &ExactScalar::s_pow(3, 1, -1);
            assert_eq!(l_inverse(&sp, &one), base.pow(2 * n as i64).unwrap());
            assert!(check_central_value(&sp, &CharacterValue::trivial(3)).pass);
        }
    }

    #[test]
    fn wrong_twist_fails() {
        let sp = SatakeParams::from_roots(1, 5, &[(1, 4), (0, 1)]).unwrap();
        let fp = frob_poly_from_satake(&sp);
        let bad = FrobPoly { p: fp.p_lambda.clone(), ..fp };
        assert!(!central_value_certificate(&sp, &bad, &CharacterValue::trivial(5)).pass);
    }

    #[test]
    fn non_unitary_rejected() {
        assert!(SatakeParams::new(1, 5, vec![sc(5, 1, "2"), sc(5, 1, "1")]).is_err());
    }

    #[test]
    fn weil_examples() {
        for n in 1..=3usize {
            let b = ExactScalar::s_pow(5, 1, 2 * n as i64 - 1);
            assert!(weil_weight_check(&[b.clone()], n).pass);
            assert!(weil_weight_check(&[-&b], n).pass);
            let z = &b * &ExactScalar::zeta_pow(5, 6, 1);
            assert!(weil_weight_check(&[z], n).pass);
        }
        let low = ExactScalar::s_pow(5, 1, 1);
        assert!(!weil_weight_check(&[low], 2).pass);
        let odd = sc(5, 4, "1 + z");
        let c = weil_weight_check(&[odd], 1);
        assert_eq!(c.checks[0].status, Status::Unchecked);
    }

    #[test]
    fn tame_factor_examples() {
        let sp = SatakeParams::from_roots(1, 5, &[(0, 1), (0, 1)]).unwrap();
        assert_eq!(tame_factor(&sp, &CharacterValue::trivial(5)), sc(5, 1, "3/2 - 1/2*s"));
        let sp = SatakeParams::from_roots(1, 5, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(tame_factor(&sp, &CharacterValue::trivial(5)), ExactScalar::one(5, 1));
        assert_eq!(l_inverse(&sp, &ExactScalar::one(5, 1)).as_rational(), Some(rat(4, 5)));
    }

    #[test]
    fn characters_of_small_groups() {
        for m in 1..=8 {
            let g = AbelianGroup::cyclic(m);
            let ch = g.characters();
            assert_eq!(ch.len(), m);
            assert!(distinct(&ch));
        }
        // Z/2 x Z/4.
        let table: Vec<Vec<usize>> = (0..8)
            .map(|a: usize| (0..8).map(|b: usize| ((a / 4 + b / 4) % 2) * 4 + (a % 4 + b % 4) % 4).collect())
            .collect();
        let g = AbelianGroup::new(table).unwrap();
        let ch = g.characters();
        assert_eq!(ch.len(), 8);
        for c in &ch {
            for a in 0..8 {
                for b in 0..8 {
                    assert_eq!(c.values[g.mul(a, b)], (c.values[a] + c.values[b]) % c.exponent);
                }
            }
        }
    }

    #[test]
    fn group_algebra_examples() {
        let sp = SatakeParams::from_roots(1, 5, &[(1, 4), (3, 4)]).unwrap();
        let trivial = AbelianGroup::cyclic(1);
        let c = tame_group_algebra_check(&trivial, &sp, 0).unwrap();
        assert!(c.pass);
        let z2 = AbelianGroup::cyclic(2);
        let c = tame_group_algebra_check(&z2, &sp, 1).unwrap();
        assert!(c.pass);
        let fp = frob_poly_from_satake(&sp);
        let eig: Vec<&str> = c.data["eigenvalues"].as_array().unwrap().iter().map(|r| r["eigenvalue"].as_str().unwrap()).collect();
        let p1 = fp.p.eval(&ExactScalar::one(5, 1)).to_string();
        let pm1 = fp.p.eval(&ExactScalar::from_int(5, 1, -1)).to_string();
        assert!(eig.contains(&p1.as_str()) && eig.contains(&pm1.as_str()));
        let c = tame_group_algebra_check(&z2, &sp, 0).unwrap();
        assert!(c.pass);
        let eig: Vec<&str> = c.data["eigenvalues"].as_array().unwrap().iter().map(|r| r["eigenvalue"].as_str().unwrap()).collect();
        assert!(eig.iter().all(|e| *e == p1));
        let c = tame_group_algebra_check(&AbelianGroup::cyclic(6), &sp, 1).unwrap();
        assert!(c.pass, "{:?}", c.first_failure);
    }

    #[test]
    fn small_sweep() {
        let s = central_value_sweep(1, 5, 6).unwrap();
        assert_eq!(s.cases, 36 * 6);
        assert!(s.failures.is_empty());
    }
}
