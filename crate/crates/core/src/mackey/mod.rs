//! Cohomology functors on finite groups: the function-space model, the axioms
//! (C1)-(C3), (G), (M), Hecke correspondences, the completed pushforward and
//! the ordinary projector on `p`-adic matrices.
//!
//! The completion `M^ = lim M(K)` is modeled by `M({1})`, since a finite group
//! has a smallest subgroup; genuinely infinite direct limits are out of reach.

pub mod functor;
pub mod group;
pub mod ord;

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

pub use functor::{
    check_c_axioms, check_cartesian_axiom, check_completed_pushforward, check_convolution,
    check_finite_level_diagram, check_galois_axiom, convolve_double_cosets, hecke_map, AuxLevel, CosetIndicator,
    Embedding, Fun, FunctorModel, HeckeCorrespondence, PushKind,
};
pub use group::{catalog, catalog_group, CatalogGroup, FiniteGroup, FiniteGroupCtx, Subgroup};
pub use ord::{ordinary_projector, OrdProjector, PadicEndo};

use crate::cert::{Certificate, Check};
use crate::error::{Result, TrcError};

pub const LIMITATION: &str = "completion modeled by M({1}); infinite direct limits are not probed";

/// Model names accepted by [`build_model`].
pub const MODELS: [&str; 3] = ["regular", "cosets", "two-orbit"];

/// `X = G`, `X = B \ G` or `X = B \ G ⊔ B' \ G` for the catalog stabilizers.
pub fn build_model(entry: &CatalogGroup, ctx: Arc<FiniteGroupCtx>, name: &str) -> Result<FunctorModel> {
    match name {
        "regular" => Ok(FunctorModel::regular(ctx)),
        "cosets" => FunctorModel::coset_spaces(ctx, &[entry.base], "cosets"),
        "two-orbit" => FunctorModel::coset_spaces(ctx, &[entry.base, entry.second], "two-orbit"),
        _ => Err(TrcError::Parse(format!("unknown model {name}; expected regular, cosets or two-orbit"))),
    }
}

/// Tally of one kind of check over many samples.
#[derive(Default)]
struct Tally {
    runs: usize,
    failed: usize,
    first: Option<Value>,
}

impl Tally {
    fn record(&mut self, cert: &Certificate) {
        self.runs += 1;
        if !cert.pass {
            self.failed += 1;
            if self.first.is_none() {
                self.first = Some(json!({ "inputs": cert.inputs, "failure": cert.first_failure }));
            }
        }
    }

    fn check(self, name: String) -> Check {
        Check::from_bool(name, self.failed == 0 && self.runs > 0, json!({ "samples": self.runs, "failed": self.failed, "first_failure": self.first }))
    }
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, xs: &[T]) -> T {
    *xs.choose(rng).expect("nonempty choice")
}

/// Random `U0`-invariant integer function on `X` for a random `U0 ⊂ H`.
fn random_fixed_vector(rng: &mut ChaCha8Rng, f: &FunctorModel, h: Subgroup) -> Fun {
    let u0 = pick(rng, &f.ctx.subgroups_of(h));
    let mut x = vec![0; f.points()];
    for orbit in f.orbits(u0) {
        let c = rng.gen_range(-3..=3);
        for p in orbit {
            x[p] = c;
        }
    }
    x
}

/// One draw of (C1)-(C3), (G), (M) and the convolution law; returns `K` and its normal subgroups.
fn axiom_step(f: &FunctorModel, rng: &mut ChaCha8Rng, tallies: &mut [(&str, Tally)]) -> (Subgroup, Vec<Subgroup>) {
    let ctx = &f.ctx;
    let ups = &ctx.upsilon;
    let n = ctx.group.order();
    let k = pick(rng, ups);
    let subs = ctx.subgroups_of(k);
    let l = pick(rng, &subs);
    tallies[0].1.record(&check_c_axioms(f, k, l, rng.gen_range(0..n)));
    let normal = ctx.normal_subgroups_of(k);
    let lg = if rng.gen_bool(0.5) { pick(rng, &normal) } else { l };
    tallies[1].1.record(&check_galois_axiom(f, k, lg));
    tallies[2].1.record(&check_cartesian_axiom(f, k, l, pick(rng, &subs)));
    let (kp, kpp) = (pick(rng, ups), pick(rng, ups));
    tallies[3].1.record(&check_convolution(f, k, kp, kpp, rng.gen_range(0..n), rng.gen_range(0..n)));
    (k, normal)
}

/// Runs every axiom family `samples` times on one model.
pub fn model_suite(f: &FunctorModel, samples: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let ctx = f.ctx.clone();
    let grp = &ctx.group;
    let ups = &ctx.upsilon;
    let n = grp.order();
    let prefix = format!("{}/{}", grp.name, f.name);
    let mut tallies: Vec<(&str, Tally)> =
        ["C1-C3", "galois", "cartesian", "hecke-convolution", "completed-pushforward", "finite-level-diagram"]
            .into_iter()
            .map(|k| (k, Tally::default()))
            .collect();
    let mut h_choices = vec![grp.whole()];
    h_choices.extend(ups.iter().copied().filter(|h| h.order() > 1 && h.order() < n).take(2));
    let embeddings = match h_choices.iter().map(|&h| Embedding::new(f, h)).collect::<Result<Vec<_>>>() {
        Ok(e) => e,
        Err(TrcError::Incompatible(why)) => {
            // not a cohomology functor: no completed pushforward to test
            tallies.truncate(4);
            let out = vec![Check::from_bool(format!("{prefix}/embedding"), false, json!(why))];
            for _ in 0..samples {
                axiom_step(f, rng, &mut tallies);
            }
            return Ok(out.into_iter().chain(tallies.into_iter().map(|(name, t)| t.check(format!("{prefix}/{name}")))).collect());
        }
        Err(e) => return Err(e),
    };
    for _ in 0..samples {
        let (k, normal) = axiom_step(f, rng, &mut tallies);
        let emb = embeddings.choose(rng).expect("embeddings");
        let x = random_fixed_vector(rng, f, emb.h);
        let hs: Vec<usize> = emb.h.elements().collect();
        let (g1, g) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let ln = pick(rng, &normal);
        tallies[4].1.record(&check_completed_pushforward(emb, &x, g1, k, ln, pick(rng, &hs), g));
        let top = grp.conj(g1, k).meet(emb.h);
        let u = pick(rng, &ctx.subgroups_of(top));
        tallies[5].1.record(&check_finite_level_diagram(emb, u, k, g1));
    }
    Ok(tallies.into_iter().map(|(name, t)| t.check(format!("{prefix}/{name}"))).collect())
}

/// Axiom report for one catalog group and model, `samples` seeded draws per family.
pub fn mackey_report(entry: &CatalogGroup, model: &str, samples: usize, seed: u64) -> Result<Certificate> {
    mackey_report_with(entry, model, samples, seed, PushKind::Trace)
}

/// As [`mackey_report`], with the pushforward replaced by `push`.
pub fn mackey_report_with(entry: &CatalogGroup, model: &str, samples: usize, seed: u64, push: PushKind) -> Result<Certificate> {
    let ctx = Arc::new(FiniteGroupCtx::standard(entry.group.clone())?);
    let f = build_model(entry, ctx.clone(), model)?.with_push_kind(push);
    let mut cert = Certificate::new(
        "mackey-test",
        json!({ "group": entry.group.name, "model": model, "samples": samples, "pushforward": format!("{push:?}") }),
        Some(seed),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for c in model_suite(&f, samples, &mut rng)? {
        cert.push(c);
    }
    cert.data = json!({
        "group_order": entry.group.order(),
        "upsilon_size": ctx.upsilon.len(),
        "points": f.points(),
        "limitations": [LIMITATION],
    });
    Ok(cert)
}

/// Every catalog group against every model.
pub fn mackey_catalog_report(samples: usize, seed: u64) -> Result<Certificate> {
    let mut cert = Certificate::new("mackey-test", json!({ "group": "all", "model": "all", "samples": samples }), Some(seed));
    for entry in catalog() {
        for model in MODELS {
            let r = mackey_report(&entry, model, samples, seed)?;
            for c in r.checks {
                cert.push(c);
            }
        }
    }
    cert.data = json!({ "limitations": [LIMITATION] });
    Ok(cert)
}

/// `samples` seeded projector certificates with `p ∈ {2,3,5}`, `d <= max_d`, `N <= max_n`.
pub fn ord_report(samples: usize, max_d: usize, max_n: u32, seed: u64) -> Result<Certificate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cert = Certificate::new(
        "ord-projector",
        json!({ "samples": samples, "max_d": max_d, "max_N": max_n }),
        Some(seed),
    );
    let mut tally = Tally::default();
    let mut equivariance = Tally::default();
    let mut ranks = vec![0usize; max_d + 1];
    for i in 0..samples {
        let p = [2u64, 3, 5][i % 3];
        let d = rng.gen_range(1..=max_d);
        let n = rng.gen_range(1..=max_n);
        let a = PadicEndo::random(&mut rng, p, n, d)?;
        let e = ordinary_projector(&a)?;
        ranks[e.e.rank_mod_p()] += 1;
        tally.record(&e.certificate);
        // e(CAC^-1) = C e(A) C^-1
        let c = PadicEndo::random_invertible(&mut rng, p, n, d)?;
        let ci = c.inverse().ok_or_else(|| TrcError::NotInvertible("conjugator".into()))?;
        let e2 = ordinary_projector(&c.mul(&a).mul(&ci))?;
        let mut eq = Certificate::new("ord-equivariance", json!({ "A": a.rows(), "C": c.rows(), "p": p, "N": n }), None);
        eq.push(Check::from_bool("conjugate", e2.e == c.mul(&e.e).mul(&ci), Value::Null));
        equivariance.record(&eq);
    }
    cert.push(tally.check("projector".into()));
    cert.push(equivariance.check("conjugation-equivariance".into()));
    cert.data = json!({ "rank_histogram": ranks });
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::group::{gl2_f3, symmetric3};
    use super::*;

    fn ctx_of(entry: &CatalogGroup) -> Arc<FiniteGroupCtx> {
        Arc::new(FiniteGroupCtx::standard(entry.group.clone()).unwrap())
    }

    #[test]
    fn galois_examples() {
        let s3 = symmetric3();
        let f = FunctorModel::regular(ctx_of(&s3));
        let (g, a3) = (s3.group.whole(), s3.subgroup("A3"));
        let cert = check_galois_axiom(&f, g, a3);
        assert!(cert.pass);
        assert_eq!(cert.checks[0].detail["index"], 2);
        assert!(check_galois_axiom(&f, a3, a3).pass);
        let gl = gl2_f3();
        let f = FunctorModel::regular(ctx_of(&gl));
        let cert = check_galois_axiom(&f, gl.subgroup("Borel"), gl.subgroup("UZ"));
        assert!(cert.pass);
        assert_eq!(cert.checks.len(), 2);
        // explicit coset sum: pr_* pr^* of the indicator of one Borel orbit is twice it
        let v = &f.basis(gl.subgroup("Borel"))[0];
        let w = f.pr_push(gl.subgroup("UZ"), gl.subgroup("Borel"), &f.pr_pull(gl.subgroup("UZ"), gl.subgroup("Borel"), v).unwrap()).unwrap();
        assert_eq!(w, v.iter().map(|x| 2 * x).collect::<Vec<_>>());
    }

    #[test]
    fn cartesian_examples() {
        let s3 = symmetric3();
        let f = FunctorModel::regular(ctx_of(&s3));
        let g = s3.group.whole();
        let cert = check_cartesian_axiom(&f, g, s3.subgroup("C2a"), s3.subgroup("C2b"));
        assert!(cert.pass);
        assert!(check_cartesian_axiom(&f, g, g, g).pass);
        // brute-force oracle: both sides evaluated pointwise from the definitions
        let (l, lp) = (s3.subgroup("C2a"), s3.subgroup("C2b"));
        let grp = &s3.group;
        for v in f.basis(lp) {
            // pr^* pr_* zeta (x) = sum over c in G/L' of zeta(x c)
            let lhs: Vec<i64> =
                (0..6).map(|x| grp.left_coset_reps(g, lp).iter().map(|&c| v[f.act(x, c)]).sum()).collect();
            let mut rhs = vec![0i64; 6];
            for gamma in grp.double_coset_reps(l, g, lp) {
                let lg = grp.conj(gamma, lp).meet(l);
                for (x, r) in rhs.iter_mut().enumerate() {
                    *r += grp.left_coset_reps(l, lg).iter().map(|&c| v[f.act(f.act(x, c), gamma)]).sum::<i64>();
                }
            }
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn index_scaled_pushforward_is_rejected() {
        let s3 = symmetric3();
        let f = FunctorModel::regular(ctx_of(&s3)).with_push_kind(PushKind::IndexScaled);
        let cert = check_cartesian_axiom(&f, s3.group.whole(), s3.subgroup("C2a"), s3.subgroup("C2b"));
        assert!(!cert.pass);
        assert!(!check_c_axioms(&f, s3.group.whole(), s3.subgroup("C2a"), 1).pass);
        assert!(Embedding::new(&f, s3.group.whole()).is_err());
    }

    #[test]
    fn hecke_examples() {
        let gl = gl2_f3();
        let ctx = ctx_of(&gl);
        let f = FunctorModel::coset_spaces(ctx.clone(), &[gl.base], "cosets").unwrap();
        let b = gl.subgroup("Borel");
        let (w, u) = (gl.element("w"), gl.element("u"));
        // sigma in K, K' = K: identity
        let h = hecke_map(&f, b, b, u).unwrap();
        assert_eq!(h.images, f.basis(b));
        assert!(check_convolution(&f, b, b, b, w, w).pass);
        assert!(check_convolution(&f, b, b, b, w, 0).pass);
        // T_w^2 = (q-1)·T_w + q·T_1 in the Iwahori-Hecke algebra of GL2(F3), q = 3
        let conv = convolve_double_cosets(&ctx, b, b, b, w, ctx.group.inv(w));
        assert_eq!(conv[0], 3);
        assert_eq!(conv[w], 2);
    }

    #[test]
    fn completed_pushforward_examples() {
        let s3 = symmetric3();
        let f = FunctorModel::regular(ctx_of(&s3));
        let g = s3.group.whole();
        let emb = Embedding::new(&f, g).unwrap();
        // constant x: Vol(K)-weighted constant
        let x = vec![1i64; 6];
        let k = s3.subgroup("C2a");
        let v = emb.completed_pushforward(&x, &[CosetIndicator { coeff: 1, g: 0, k }], AuxLevel::Trivial).unwrap();
        assert!(v.iter().all(|c| *c == crate::exactnum::rat(1, 3)));
        let cert = check_completed_pushforward(&emb, &[1, 0, 0, 1, 0, 0], 0, g, s3.subgroup("A3"), 1, 2);
        assert!(cert.pass, "{}", cert.to_json_string());
        let a3 = s3.subgroup("A3");
        for u in [a3, s3.group.trivial()] {
            assert!(check_finite_level_diagram(&emb, u, g, 0).pass);
        }
    }

    #[test]
    fn small_suite_passes() {
        for entry in catalog() {
            for model in MODELS {
                let r = mackey_report(&entry, model, 5, 1).unwrap();
                assert!(r.pass, "{}", r.to_json_string());
            }
        }
        assert!(ord_report(20, 4, 4, 2).unwrap().pass);
    }
}
