//! End-to-end tame norm relation at desk scale.
//!
//! `Fr_lambda` is unramified only away from the conductor, so the group-algebra
//! check runs in `Gal(E[m p^r]/E) = Pic(O_{m p^r})`, where `ell ∤ m p`.
//! The class groups at `m` and `ell m` and their norm map are certified separately.

use num_bigint::BigInt;
use num_traits::One;
use serde_json::{json, Value};

use crate::cert::{Certificate, Check, Status};
use crate::classfield::{self, kronecker};
use crate::error::{Result, TrcError};
use crate::exactnum::Rational;
use crate::hecke;
use crate::lattice;
use crate::lfactor::{self, CharacterValue, SatakeParams};
use crate::qcomb::{b_coefficients, is_prime, lambda_closed_form, CoefficientTable, QCombContext};

/// Inputs of [`run_norm_relation`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormRelationConfig {
    pub n: usize,
    pub ell: u64,
    pub d_e: i64,
    pub m: i64,
    /// Auxiliary prime `p` and exponent `r` of the tower `E[m p^r]`.
    pub p: u64,
    pub r: u32,
    /// Satake parameters as `zeta_k^j` pairs `(j, k)`.
    pub alpha: Vec<(i64, u32)>,
    /// Lattice enumeration depth for the measure identity.
    pub depth: u32,
    /// Replaces `b_1` by `b_1 + 1`.
    pub perturb_b1: bool,
}

impl NormRelationConfig {
    /// `n = 1`, `d_E = -4`, `m = 1`, `ell = 5`, `alpha = (1, 1)`, `p = 3`, `r = 1`.
    pub fn gaussian_example() -> Self {
        NormRelationConfig { n: 1, ell: 5, d_e: -4, m: 1, p: 3, r: 1, alpha: vec![(0, 1), (0, 1)], depth: 1, perturb_b1: false }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "ell": self.ell,
            "d_E": self.d_e,
            "m": self.m,
            "p": self.p,
            "r": self.r,
            "alpha": self.alpha.iter().map(|(j, k)| format!("zeta_{k}^{j}")).collect::<Vec<_>>(),
            "depth": self.depth,
            "perturb_b1": self.perturb_b1,
        })
    }

    fn validate(&self) -> Result<i64> {
        let ell = self.ell as i64;
        if !is_prime(self.ell) || !is_prime(self.p) || self.p == self.ell {
            return Err(TrcError::InvalidSignature("ell and p must be distinct primes".into()));
        }
        if !classfield::is_fundamental(self.d_e) || self.m < 1 {
            return Err(TrcError::InvalidSignature(format!("need a fundamental d_E < 0 and m >= 1, got {} and {}", self.d_e, self.m)));
        }
        if kronecker(self.d_e, ell) != 1 {
            return Err(TrcError::Incompatible(format!("{ell} is not split in Q(sqrt({}))", self.d_e)));
        }
        if self.m % ell == 0 || self.d_e % ell == 0 {
            return Err(TrcError::Incompatible(format!("{ell} divides m d_E")));
        }
        let conductor = (self.p as i64)
            .checked_pow(self.r)
            .and_then(|q| q.checked_mul(self.m))
            .ok_or_else(|| TrcError::BoundExceeded("m p^r overflows".into()))?;
        Ok(conductor)
    }
}

fn steps_one_to_three(cfg: &NormRelationConfig, cert: &mut Certificate) -> Result<Value> {
    let ctx = QCombContext::new(cfg.n, cfg.ell)?;

    let table = CoefficientTable::compute(&ctx);
    let mut step = Certificate::new("qcomb", Value::Null, None);
    step.push(Check::from_bool("lambda=closed-form", table.lambda == lambda_closed_form(&ctx), Value::Null));
    step.push(Check::from_bool("congruences-mod-ell-1", table.congruences.pass(), table.certificates_json()["congruences_mod_ell_minus_1"].clone()));
    step.push(Check::from_bool("b0-integral", table.bcoef.b0_integral, Value::Null));
    step.push(Check::from_bool("b-prime-divisible", table.bcoef.b_prime_divisible.iter().all(|&x| x), Value::Null));
    cert.absorb("1-qcomb", &step);

    match lattice::verify_measure_identity(cfg.n, cfg.ell, cfg.depth) {
        Ok(lc) => cert.push(Check::from_bool(
            "2-lattice/measure-identity",
            lc.pass,
            json!({ "cases": lc.cases_checked, "depth": lc.depth, "first_failure": lc.first_failure }),
        )),
        Err(TrcError::BoundExceeded(why)) => cert.push(Check::new("2-lattice/measure-identity", Status::Unchecked, json!(why))),
        Err(e) => return Err(e),
    }

    let mut b = b_coefficients(&ctx).b;
    if cfg.perturb_b1 {
        b[1] += Rational::from_integer(BigInt::one());
    }
    let phi = hecke::phi_certificate(&ctx, Some(&b))?;
    cert.absorb("3-hecke", &phi);
    Ok(json!({ "lambda": crate::cert::ints_json(&table.lambda), "phi": phi.data }))
}

struct ClassData {
    cert: Certificate,
    group: lfactor::AbelianGroup,
    frob_arithmetic: usize,
    data: Value,
}

fn step_four(cfg: &NormRelationConfig, conductor: i64) -> Result<ClassData> {
    let ell = cfg.ell as i64;
    let mut cert = Certificate::new("classfield", Value::Null, None);
    let small = classfield::ring_class_group(cfg.d_e, cfg.m)?;
    let big = classfield::ring_class_group(cfg.d_e, ell * cfg.m)?;
    cert.absorb("Pic(O_m)", &classfield::group_certificate(&small));
    cert.absorb("Pic(O_ell_m)", &classfield::group_certificate(&big));
    cert.absorb("norm", &classfield::norm_map(&big, &small)?.certificate);
    let gal = classfield::ring_class_group(cfg.d_e, conductor)?;
    cert.absorb("Pic(O_mp^r)", &classfield::group_certificate(&gal));
    let fr = classfield::frobenius_class(&gal, ell)?;
    let data = json!({
        "Pic(O_m)": small.to_json(),
        "Pic(O_ell_m)": big.to_json(),
        "galois_group": gal.to_json(),
        "frobenius": {
            "prime_form": fr.prime_form.label(),
            "geometric": gal.forms[fr.geometric].label(),
            "arithmetic": gal.forms[fr.arithmetic].label(),
        },
    });
    Ok(ClassData { cert, group: gal.group, frob_arithmetic: fr.arithmetic, data })
}

/// Runs qcomb, lattice, hecke, classfield and lfactor in order and joins their checks.
pub fn run_norm_relation(cfg: &NormRelationConfig) -> Result<Certificate> {
    let conductor = cfg.validate()?;
    let sp = SatakeParams::from_roots(cfg.n, cfg.ell, &cfg.alpha)?;
    let mut cert = Certificate::new("norm-relation", cfg.to_json(), None);

    let (front, class) = std::thread::scope(|s| {
        let class = s.spawn(|| step_four(cfg, conductor));
        let mut part = Certificate::new("steps-1-3", Value::Null, None);
        let front = steps_one_to_three(cfg, &mut part).map(|v| (part, v));
        (front, class.join().expect("classfield step"))
    });
    let (front_cert, front_data) = front?;
    let class = class?;
    for c in front_cert.checks {
        cert.push(c);
    }
    cert.absorb("4-classfield", &class.cert);

    let tame = lfactor::tame_group_algebra_check(&class.group, &sp, class.frob_arithmetic)?;
    cert.absorb("5-lfactor", &tame);
    if class.group.order() == 1 {
        cert.absorb("5-lfactor/central-value", &lfactor::check_central_value(&sp, &CharacterValue::trivial(cfg.ell)));
    }
    cert.data = json!({
        "galois_conductor": conductor,
        "steps_1_3": front_data,
        "classfield": class.data,
        "eigenvalues": tame.data["eigenvalues"],
    });
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::ExactScalar;

    #[test]
    fn gaussian_example_passes_with_two_eigenvalues() {
        let cfg = NormRelationConfig::gaussian_example();
        let cert = run_norm_relation(&cfg).unwrap();
        assert!(cert.pass, "{}", cert.to_json_string());
        let eig: Vec<String> = cert.data["eigenvalues"].as_array().unwrap().iter().map(|e| e["eigenvalue"].as_str().unwrap().to_string()).collect();
        let sp = SatakeParams::from_roots(1, 5, &cfg.alpha).unwrap();
        let p = lfactor::frob_poly_from_satake(&sp).p;
        let mut expect: Vec<String> =
            [1i64, -1].iter().map(|&v| p.eval(&ExactScalar::from_int(5, 1, v)).to_string()).collect();
        let mut got = eig.clone();
        expect.sort();
        got.sort();
        assert_eq!(got, expect);
    }

    #[test]
    fn perturbed_b1_fails_at_hecke() {
        let cfg = NormRelationConfig { perturb_b1: true, ..NormRelationConfig::gaussian_example() };
        let cert = run_norm_relation(&cfg).unwrap();
        assert!(!cert.pass);
        let first = cert.first_failure.unwrap()["check"].as_str().unwrap().to_string();
        assert!(first.starts_with("3-hecke/"), "{first}");
    }

    #[test]
    fn trivial_group_reduces_to_central_value() {
        let cfg = NormRelationConfig { ell: 29, r: 0, ..NormRelationConfig::gaussian_example() };
        let cert = run_norm_relation(&cfg).unwrap();
        assert!(cert.pass, "{}", cert.to_json_string());
        assert!(cert.checks.iter().any(|c| c.name.starts_with("5-lfactor/central-value/")));
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let base = NormRelationConfig::gaussian_example();
        assert!(run_norm_relation(&NormRelationConfig { ell: 7, ..base.clone() }).is_err());
        assert!(run_norm_relation(&NormRelationConfig { m: 5, ..base.clone() }).is_err());
        assert!(run_norm_relation(&NormRelationConfig { p: 5, ..base }).is_err());
    }
}
