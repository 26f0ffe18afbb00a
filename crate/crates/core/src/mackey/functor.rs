//! Function-space cohomology functors `M(K) = {X/K -> Z}` and their axiom checks.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::Serialize;
use serde_json::{json, Value};

use super::group::{FiniteGroupCtx, Subgroup};
use crate::cert::{rat_json, Certificate, Check};
use crate::error::{Result, TrcError};
use crate::exactnum::Rational;

/// Integer-valued function on the base set.
pub type Fun = Vec<i64>;

/// How pushforwards are realized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PushKind {
    /// `zeta -> sum_gamma gamma tau^{-1} zeta`.
    Trace,
    /// `zeta -> [K':tau^{-1}L'tau] tau^{-1} zeta`; a negative control that is not Cartesian.
    IndexScaled,
}

/// `X` with a right action of `G`, given as a disjoint union of right coset spaces `B \ G`.
#[derive(Clone, Debug)]
pub struct FunctorModel {
    pub ctx: Arc<FiniteGroupCtx>,
    pub name: String,
    pub push_kind: PushKind,
    points: usize,
    act: Vec<u16>,
}

impl FunctorModel {
    pub fn coset_spaces(ctx: Arc<FiniteGroupCtx>, stabilizers: &[Subgroup], name: &str) -> Result<Self> {
        let g = &ctx.group;
        let n = g.order();
        let mut act = Vec::new();
        let mut offset = 0usize;
        for &b in stabilizers {
            if !g.is_subgroup(b) {
                return Err(TrcError::Incompatible("stabilizer is not a subgroup".into()));
            }
            // right cosets B x, indexed by first appearance
            let mut coset_of = vec![usize::MAX; n];
            let mut reps = Vec::new();
            for x in 0..n {
                if coset_of[x] == usize::MAX {
                    for h in b.elements() {
                        coset_of[g.mul(h, x)] = reps.len();
                    }
                    reps.push(x);
                }
            }
            for &x in &reps {
                for s in 0..n {
                    act.push((offset + coset_of[g.mul(x, s)]) as u16);
                }
            }
            offset += reps.len();
        }
        Ok(FunctorModel { ctx, name: name.to_string(), push_kind: PushKind::Trace, points: offset, act })
    }

    /// `X = G` with right translation.
    pub fn regular(ctx: Arc<FiniteGroupCtx>) -> Self {
        let t = ctx.group.trivial();
        Self::coset_spaces(ctx, &[t], "regular").expect("trivial stabilizer")
    }

    pub fn with_push_kind(mut self, kind: PushKind) -> Self {
        self.push_kind = kind;
        self
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// `x . g`.
    pub fn act(&self, x: usize, g: usize) -> usize {
        self.act[x * self.ctx.group.order() + g] as usize
    }

    /// `(g zeta)(x) = zeta(x g)`.
    pub fn translate(&self, v: &[i64], g: usize) -> Fun {
        (0..self.points).map(|x| v[self.act(x, g)]).collect()
    }

    pub fn is_invariant(&self, v: &[i64], k: Subgroup) -> bool {
        k.elements().all(|g| (0..self.points).all(|x| v[self.act(x, g)] == v[x]))
    }

    /// Orbits of `K` on `X`.
    pub fn orbits(&self, k: Subgroup) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.points];
        let mut out = Vec::new();
        for x in 0..self.points {
            if seen[x] {
                continue;
            }
            let mut orbit = Vec::new();
            for g in k.elements() {
                let y = self.act(x, g);
                if !seen[y] {
                    seen[y] = true;
                    orbit.push(y);
                }
            }
            orbit.sort_unstable();
            out.push(orbit);
        }
        out
    }

    /// Orbit indicators, a basis of `M(K)`.
    pub fn basis(&self, k: Subgroup) -> Vec<Fun> {
        self.orbits(k)
            .into_iter()
            .map(|o| {
                let mut v = vec![0; self.points];
                for x in o {
                    v[x] = 1;
                }
                v
            })
            .collect()
    }

    /// `[sigma]^*: M(K) -> M(L)` for `sigma^{-1} L sigma ⊂ K`.
    pub fn pullback(&self, sigma: usize, l: Subgroup, k: Subgroup, v: &[i64]) -> Result<Fun> {
        if !self.ctx.is_pull_morphism(sigma, l, k) {
            return Err(TrcError::Incompatible(format!("[{}] is not a morphism L -> K", self.ctx.group.label(sigma))));
        }
        Ok(self.translate(v, sigma))
    }

    /// `[tau]_*: M(L') -> M(K')` for `tau^{-1} L' tau ⊂ K'`.
    pub fn pushforward(&self, tau: usize, lp: Subgroup, kp: Subgroup, v: &[i64]) -> Result<Fun> {
        if !self.ctx.is_push_morphism(tau, lp, kp) {
            return Err(TrcError::Incompatible(format!("[{}] is not a morphism L' -> K'", self.ctx.group.label(tau))));
        }
        let g = &self.ctx.group;
        let ti = g.inv(tau);
        let inner = g.conj(ti, lp);
        let reps = g.left_coset_reps(kp, inner);
        Ok(match self.push_kind {
            PushKind::Trace => {
                let mut out = vec![0; self.points];
                for gamma in reps {
                    let w = self.translate(v, g.mul(gamma, ti));
                    add_into(&mut out, &w, 1);
                }
                out
            }
            PushKind::IndexScaled => scale(&self.translate(v, ti), reps.len() as i64),
        })
    }

    pub fn pr_pull(&self, l: Subgroup, k: Subgroup, v: &[i64]) -> Result<Fun> {
        self.pullback(0, l, k, v)
    }

    pub fn pr_push(&self, l: Subgroup, k: Subgroup, v: &[i64]) -> Result<Fun> {
        self.pushforward(0, l, k, v)
    }

    pub fn describe(&self) -> Value {
        json!({
            "group": self.ctx.group.name,
            "model": self.name,
            "points": self.points,
            "pushforward": self.push_kind,
        })
    }
}

pub(crate) fn add_into(acc: &mut [i64], v: &[i64], c: i64) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += c * b;
    }
}

pub(crate) fn scale(v: &[i64], c: i64) -> Fun {
    v.iter().map(|x| x * c).collect()
}

/// Rank over `Q` of integer vectors.
pub fn rank_q(rows: &[Fun]) -> usize {
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r == rank || m[r][c] == 0 {
                continue;
            }
            let (a, b) = (m[rank][c], m[r][c]);
            let g = a.gcd(&b);
            let (fa, fb) = (a / g, b / g);
            for j in 0..cols {
                m[r][j] = fa * m[r][j] - fb * m[rank][j];
            }
            let content = m[r].iter().fold(0i128, |acc, x| acc.gcd(x));
            if content > 1 {
                for x in m[r].iter_mut() {
                    *x /= content;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn fun_json(v: &[i64]) -> Value {
    json!(v)
}

fn err_check(name: &str, e: TrcError) -> Check {
    Check::from_bool(name, false, json!({ "error": e.to_string() }))
}

/// Axioms (C1)-(C3) for `L ⊂ K`, conjugation by `g` and `gamma ∈ K`.
pub fn check_c_axioms(f: &FunctorModel, k: Subgroup, l: Subgroup, g: usize) -> Certificate {
    let grp = &f.ctx.group;
    let mut cert = Certificate::new("c-axioms", json!({ "model": f.describe() }), None);
    // (C1): pullbacks and pushforwards land in the same invariant spaces.
    let mut c1 = Ok(true);
    for v in f.basis(l) {
        c1 = c1.and_then(|ok| Ok(ok && f.is_invariant(&f.pr_push(l, k, &v)?, k)));
    }
    for v in f.basis(k) {
        c1 = c1.and_then(|ok| Ok(ok && f.is_invariant(&f.pr_pull(l, k, &v)?, l)));
    }
    cert.push(match c1 {
        Ok(ok) => Check::from_bool("C1", ok, json!({ "dim_K": f.basis(k).len(), "dim_L": f.basis(l).len() })),
        Err(e) => err_check("C1", e),
    });
    // (C2): [g]^*_{L',K} = [g^{-1}]_* for L' = g K g^{-1}.
    let lp = grp.conj(g, k);
    let gi = grp.inv(g);
    let mut c2 = Ok(None);
    for (i, v) in f.basis(k).iter().enumerate() {
        if let Ok(None) = c2 {
            c2 = (|| -> Result<Option<usize>> {
                let a = f.pullback(g, lp, k, v)?;
                let b = f.pushforward(gi, k, lp, v)?;
                Ok((a != b).then_some(i))
            })();
        }
    }
    cert.push(match c2 {
        Ok(bad) => Check::from_bool("C2", bad.is_none(), json!({ "g": grp.label(g), "failing_basis": bad })),
        Err(e) => err_check("C2", e),
    });
    // (C3): [gamma]_{K,K,*} = id.
    let mut c3 = Ok(None);
    for gamma in k.elements() {
        for (i, v) in f.basis(k).iter().enumerate() {
            if let Ok(None) = c3 {
                c3 = f.pushforward(gamma, k, k, v).map(|w| (w != *v).then(|| (grp.label(gamma).to_string(), i)));
            }
        }
    }
    cert.push(match c3 {
        Ok(bad) => Check::from_bool("C3", bad.is_none(), json!({ "failing": bad })),
        Err(e) => err_check("C3", e),
    });
    cert
}

/// `pr_* pr^* = [K:L]` on `M(K)`, and `M(K) = M(L)^{K/L}` when `L` is normal in `K`.
pub fn check_galois_axiom(f: &FunctorModel, k: Subgroup, l: Subgroup) -> Certificate {
    let grp = &f.ctx.group;
    let index = (k.order() / l.order().max(1)) as i64;
    let mut cert = Certificate::new(
        "galois-axiom",
        json!({ "model": f.describe(), "K": grp.subgroup_json(k), "L": grp.subgroup_json(l) }),
        None,
    );
    if !l.is_subset(k) || !f.ctx.contains(k) || !f.ctx.contains(l) {
        cert.push(Check::from_bool("preconditions", false, json!("need L ⊂ K in Upsilon")));
        return cert;
    }
    let basis_k = f.basis(k);
    let lemma = basis_k.iter().enumerate().try_fold(None, |bad, (i, v)| -> Result<Option<usize>> {
        if bad.is_some() {
            return Ok(bad);
        }
        let w = f.pr_push(l, k, &f.pr_pull(l, k, v)?)?;
        Ok((w != scale(v, index)).then_some(i))
    });
    cert.push(match lemma {
        Ok(bad) => Check::from_bool("pr_*pr^*=index", bad.is_none(), json!({ "index": index, "failing_basis": bad })),
        Err(e) => err_check("pr_*pr^*=index", e),
    });
    if grp.is_normal_in(l, k) {
        let reps = grp.left_coset_reps(k, l);
        // The K/L-fixed part of M(L) is the image of the orbit sum.
        let averaged: Vec<Fun> = f
            .basis(l)
            .iter()
            .map(|v| {
                let mut s = vec![0; f.points()];
                for &r in &reps {
                    add_into(&mut s, &f.translate(v, r), 1);
                }
                s
            })
            .collect();
        let fixed_dim = rank_q(&averaged);
        let pulled: Vec<Fun> = basis_k.iter().filter_map(|v| f.pr_pull(l, k, v).ok()).collect();
        let pulled_fixed = pulled.iter().all(|v| reps.iter().all(|&r| f.translate(v, r) == *v));
        let ok = pulled.len() == basis_k.len() && pulled_fixed && rank_q(&pulled) == basis_k.len() && fixed_dim == basis_k.len();
        cert.push(Check::from_bool(
            "M(K)=M(L)^(K/L)",
            ok,
            json!({ "dim_K": basis_k.len(), "dim_fixed": fixed_dim, "pullbacks_fixed": pulled_fixed }),
        ));
    }
    cert
}

/// The double-coset square of axiom (M) on a basis of `M(L')`.
pub fn check_cartesian_axiom(f: &FunctorModel, k: Subgroup, l: Subgroup, lp: Subgroup) -> Certificate {
    let grp = &f.ctx.group;
    let mut cert = Certificate::new(
        "cartesian-axiom",
        json!({
            "model": f.describe(),
            "K": grp.subgroup_json(k),
            "L": grp.subgroup_json(l),
            "L'": grp.subgroup_json(lp),
        }),
        None,
    );
    if !l.is_subset(k) || !lp.is_subset(k) {
        cert.push(Check::from_bool("preconditions", false, json!("need L, L' ⊂ K")));
        return cert;
    }
    let gammas = grp.double_coset_reps(l, k, lp);
    let result = f.basis(lp).iter().enumerate().try_fold(None, |bad, (i, v)| -> Result<Option<usize>> {
        if bad.is_some() {
            return Ok(bad);
        }
        let lhs = f.pr_pull(l, k, &f.pr_push(lp, k, v)?)?;
        let mut rhs = vec![0; f.points()];
        for &gamma in &gammas {
            let lg = grp.conj(gamma, lp).meet(l);
            let pulled = f.pullback(gamma, lg, lp, v)?;
            add_into(&mut rhs, &f.pr_push(lg, l, &pulled)?, 1);
        }
        Ok((lhs != rhs).then_some(i))
    });
    let gamma_labels: Vec<&str> = gammas.iter().map(|&g| grp.label(g)).collect();
    cert.push(match result {
        Ok(bad) => Check::from_bool("square", bad.is_none(), json!({ "gammas": gamma_labels, "failing_basis": bad })),
        Err(e) => Check::from_bool("square", false, json!({ "gammas": gamma_labels, "error": e.to_string() })),
    });
    cert
}

/// Realized Hecke correspondence `[K' sigma K]: M(K) -> M(K')`.
#[derive(Clone, Debug)]
pub struct HeckeCorrespondence {
    pub source: Subgroup,
    pub target: Subgroup,
    pub sigma: usize,
    /// Images of the orbit basis of `M(K)`.
    pub images: Vec<Fun>,
}

impl HeckeCorrespondence {
    /// Applies the map to an element of `M(K)` written in functions on `X`.
    pub fn apply(&self, f: &FunctorModel, v: &[i64]) -> Result<Fun> {
        hecke_apply(f, self.source, self.target, self.sigma, v)
    }
}

fn hecke_apply(f: &FunctorModel, k: Subgroup, kp: Subgroup, sigma: usize, v: &[i64]) -> Result<Fun> {
    let grp = &f.ctx.group;
    let si = grp.inv(sigma);
    let a = k.meet(grp.conj(si, kp));
    let b = grp.conj(sigma, k).meet(kp);
    let w = f.pr_pull(a, k, v)?;
    let w = f.pullback(sigma, b, a, &w)?;
    f.pr_push(b, kp, &w)
}

/// `pr_* o [sigma]^* o pr^*` through `K ∩ sigma^{-1}K'sigma` and `sigma K sigma^{-1} ∩ K'`.
pub fn hecke_map(f: &FunctorModel, k: Subgroup, kp: Subgroup, sigma: usize) -> Result<HeckeCorrespondence> {
    let images = f.basis(k).iter().map(|v| hecke_apply(f, k, kp, sigma, v)).collect::<Result<_>>()?;
    Ok(HeckeCorrespondence { source: k, target: kp, sigma, images })
}

/// `(ch(K''tauK') * ch(K'sigmaK))(g)` with `vol(K') = 1`, as a function on `G`.
pub fn convolve_double_cosets(
    ctx: &FiniteGroupCtx,
    k: Subgroup,
    kp: Subgroup,
    kpp: Subgroup,
    sigma: usize,
    tau: usize,
) -> Vec<i64> {
    let grp = &ctx.group;
    let d1 = grp.double_coset(kpp, tau, kp);
    let d2 = grp.double_coset(kp, sigma, k);
    let reps = grp.left_coset_reps(grp.whole(), kp);
    (0..grp.order())
        .map(|g| reps.iter().filter(|&&h| d1.contains(h) && d2.contains(grp.mul(grp.inv(h), g))).count() as i64)
        .collect()
}

/// Part (a), double-coset dependence and the convolution law for `[K''tauK'] o [K'sigmaK]`.
pub fn check_convolution(
    f: &FunctorModel,
    k: Subgroup,
    kp: Subgroup,
    kpp: Subgroup,
    sigma: usize,
    tau: usize,
) -> Certificate {
    let grp = &f.ctx.group;
    let mut cert = Certificate::new(
        "hecke-convolution",
        json!({
            "model": f.describe(),
            "K": grp.subgroup_json(k),
            "K'": grp.subgroup_json(kp),
            "K''": grp.subgroup_json(kpp),
            "sigma": grp.label(sigma),
            "tau": grp.label(tau),
        }),
        None,
    );
    let run = || -> Result<Vec<Check>> {
        let mut checks = Vec::new();
        let h1 = hecke_map(f, k, kp, sigma)?;
        // another representative of the same double coset
        let kp_max = kp.elements().last().unwrap_or(0);
        let k_max = k.elements().last().unwrap_or(0);
        let sigma2 = grp.mul3(kp_max, sigma, k_max);
        let h1b = hecke_map(f, k, kp, sigma2)?;
        checks.push(Check::from_bool(
            "double-coset-only",
            h1.images == h1b.images,
            json!({ "sigma'": grp.label(sigma2) }),
        ));
        // part (a): j_{K'} o [K'sigmaK] = sum over alpha in K'sigmaK/K of alpha
        let alphas = grp.left_coset_reps(grp.double_coset(kp, sigma, k), k);
        let basis = f.basis(k);
        let part_a = basis.iter().zip(&h1.images).position(|(v, img)| {
            let mut s = vec![0; f.points()];
            for &a in &alphas {
                add_into(&mut s, &f.translate(v, a), 1);
            }
            s != *img
        });
        checks.push(Check::from_bool("part-a", part_a.is_none(), json!({ "cosets": alphas.len(), "failing_basis": part_a })));
        // composite versus convolution
        let conv = convolve_double_cosets(&f.ctx, k, kp, kpp, sigma, tau);
        let reps = grp.left_coset_reps(grp.whole(), k);
        let mut bad = None;
        for (i, v) in basis.iter().enumerate() {
            let composite = hecke_apply(f, kp, kpp, tau, &hecke_apply(f, k, kp, sigma, v)?)?;
            let mut expected = vec![0; f.points()];
            for &g in &reps {
                if conv[g] != 0 {
                    add_into(&mut expected, &f.translate(v, g), conv[g]);
                }
            }
            if composite != expected {
                bad = Some(json!({ "basis": i, "composite": fun_json(&composite), "convolution": fun_json(&expected) }));
                break;
            }
        }
        let support = reps.iter().filter(|&&g| conv[g] != 0).count();
        checks.push(Check::from_bool(
            "convolution",
            bad.is_none(),
            json!({ "support_cosets": support, "mismatch": bad }),
        ));
        Ok(checks)
    };
    match run() {
        Ok(checks) => checks.into_iter().for_each(|c| cert.push(c)),
        Err(e) => cert.push(err_check("hecke", e)),
    }
    cert
}

/// Choice of auxiliary level `U` in the completed pushforward.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuxLevel {
    /// `U = gKg^{-1} ∩ H ∩ Stab(x)`.
    Largest,
    /// A proper subgroup of the largest level when one exists.
    Smaller,
    Trivial,
}

/// Term `c · ch(gK)` of a Hecke algebra element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CosetIndicator {
    pub coeff: i64,
    pub g: usize,
    pub k: Subgroup,
}

/// `iota: H -> G` with `M_H` the restriction of `M_G` to `H` and `iota_* = pr_*`.
#[derive(Clone, Debug)]
pub struct Embedding<'a> {
    pub model: &'a FunctorModel,
    pub h: Subgroup,
}

impl<'a> Embedding<'a> {
    /// Checks that `M_H` and `M_G` are Galois and Cartesian on a deterministic family of triples.
    pub fn new(model: &'a FunctorModel, h: Subgroup) -> Result<Self> {
        let ctx = &model.ctx;
        if !ctx.contains(h) {
            return Err(TrcError::Incompatible("H is not in Upsilon".into()));
        }
        let mut triples = Vec::new();
        for (outer, cap) in [(ctx.group.whole(), 6usize), (h, 6)] {
            let subs = ctx.subgroups_of(outer);
            let step = (subs.len() / cap).max(1);
            for (i, &k) in subs.iter().enumerate().step_by(step) {
                let inner = ctx.subgroups_of(k);
                let l = inner[i % inner.len()];
                let lp = inner[(i * 7 + 3) % inner.len()];
                triples.push((k, l, lp));
            }
        }
        for (k, l, lp) in triples {
            for cert in [check_c_axioms(model, k, l, 0), check_galois_axiom(model, k, l), check_cartesian_axiom(model, k, l, lp)] {
                if !cert.pass {
                    return Err(TrcError::Incompatible(format!(
                        "model {} is not a Galois and Cartesian cohomology functor: {}",
                        model.name,
                        cert.first_failure.unwrap_or(Value::Null)
                    )));
                }
            }
        }
        Ok(Embedding { model, h })
    }

    fn grp(&self) -> &super::group::FiniteGroup {
        &self.model.ctx.group
    }

    /// `Vol(U) = |U| / |H|`.
    pub fn vol(&self, u: Subgroup) -> Rational {
        Rational::new(BigInt::from(u.order()), BigInt::from(self.h.order()))
    }

    /// `Stab_H(x)`.
    pub fn stabilizer(&self, x: &[i64]) -> Subgroup {
        Subgroup::from_elements(self.h.elements().filter(|&g| self.model.translate(x, g) == x))
    }

    /// Auxiliary level for `x ⊗ ch(gK)`.
    pub fn level(&self, x: &[i64], g: usize, k: Subgroup, aux: AuxLevel) -> Subgroup {
        let grp = self.grp();
        let top = grp.conj(g, k).meet(self.h).meet(self.stabilizer(x));
        match aux {
            AuxLevel::Largest => top,
            AuxLevel::Trivial => grp.trivial(),
            AuxLevel::Smaller => self
                .model
                .ctx
                .subgroups_of(top)
                .into_iter()
                .filter(|&s| s != top)
                .max_by_key(|s| (s.order(), s.0))
                .unwrap_or(top),
        }
    }

    /// `Vol(U) · [g]_* iota_* (x_U)` in `M_G(K)`, for a level `U ⊂ gKg^{-1} ∩ H` fixing `x`.
    pub fn finite_level(&self, x: &[i64], u: Subgroup, g: usize, k: Subgroup) -> Result<Vec<Rational>> {
        let grp = self.grp();
        let gk = grp.conj(g, k);
        if !u.is_subset(gk.meet(self.h)) || !self.model.is_invariant(x, u) {
            return Err(TrcError::Incompatible("level U must lie in gKg^-1 ∩ H and fix x".into()));
        }
        let pushed = self.model.pr_push(u, gk, x)?;
        let moved = self.model.pushforward(g, gk, k, &pushed)?;
        let vol = self.vol(u);
        Ok(moved.iter().map(|&c| &vol * Rational::from_integer(BigInt::from(c))).collect())
    }

    /// `hat iota_*(x ⊗ xi)` in `M_G({1})`.
    pub fn completed_pushforward(&self, x: &[i64], xi: &[CosetIndicator], aux: AuxLevel) -> Result<Vec<Rational>> {
        let mut out = vec![Rational::zero(); self.model.points()];
        for t in xi {
            let u = self.level(x, t.g, t.k, aux);
            let v = self.finite_level(x, u, t.g, t.k)?;
            let c = Rational::from_integer(BigInt::from(t.coeff));
            for (o, w) in out.iter_mut().zip(v) {
                *o += &c * w;
            }
        }
        Ok(out)
    }
}

fn rats_eq_json(a: &[Rational], b: &[Rational]) -> Value {
    json!({
        "lhs": a.iter().map(rat_json).collect::<Vec<_>>(),
        "rhs": b.iter().map(rat_json).collect::<Vec<_>>(),
    })
}

/// Level independence, `ch(K) = sum ch(gamma L)` compatibility and `H x G` equivariance.
pub fn check_completed_pushforward(
    emb: &Embedding<'_>,
    x: &[i64],
    g1: usize,
    k: Subgroup,
    l: Subgroup,
    h: usize,
    g: usize,
) -> Certificate {
    let grp = emb.grp();
    let mut cert = Certificate::new(
        "completed-pushforward",
        json!({
            "model": emb.model.describe(),
            "H": grp.subgroup_json(emb.h),
            "x": fun_json(x),
            "g1": grp.label(g1),
            "K": grp.subgroup_json(k),
            "L": grp.subgroup_json(l),
            "h": grp.label(h),
            "g": grp.label(g),
        }),
        None,
    );
    let run = || -> Result<Vec<Check>> {
        let mut checks = Vec::new();
        let xi = [CosetIndicator { coeff: 1, g: g1, k }];
        let levels = [AuxLevel::Largest, AuxLevel::Smaller, AuxLevel::Trivial];
        let vals = levels.iter().map(|&a| emb.completed_pushforward(x, &xi, a)).collect::<Result<Vec<_>>>()?;
        let orders: Vec<usize> = levels.iter().map(|&a| emb.level(x, g1, k, a).order()).collect();
        checks.push(Check::from_bool(
            "level-independence",
            vals[0] == vals[1] && vals[1] == vals[2],
            json!({ "level_orders": orders }),
        ));
        if emb.model.ctx.group.is_normal_in(l, k) {
            let whole = emb.completed_pushforward(x, &[CosetIndicator { coeff: 1, g: 0, k }], AuxLevel::Largest)?;
            let parts: Vec<CosetIndicator> =
                grp.left_coset_reps(k, l).into_iter().map(|gamma| CosetIndicator { coeff: 1, g: gamma, k: l }).collect();
            let split = emb.completed_pushforward(x, &parts, AuxLevel::Largest)?;
            checks.push(Check::from_bool(
                "ch(K)=sum ch(gamma L)",
                whole == split,
                if whole == split { json!({ "cosets": parts.len() }) } else { rats_eq_json(&whole, &split) },
            ));
        }
        if emb.h.contains(h) {
            let lhs_src = emb.completed_pushforward(x, &xi, AuxLevel::Largest)?;
            let lhs: Vec<Rational> = (0..emb.model.points()).map(|p| lhs_src[emb.model.act(p, g)].clone()).collect();
            let hx = emb.model.translate(x, h);
            let rep = grp.mul3(h, g1, grp.inv(g));
            let kk = grp.conj(g, k);
            let rhs = emb.completed_pushforward(&hx, &[CosetIndicator { coeff: 1, g: rep, k: kk }], AuxLevel::Largest)?;
            checks.push(Check::from_bool(
                "equivariance",
                lhs == rhs,
                if lhs == rhs { Value::Null } else { rats_eq_json(&lhs, &rhs) },
            ));
        }
        Ok(checks)
    };
    match run() {
        Ok(checks) => checks.into_iter().for_each(|c| cert.push(c)),
        Err(e) => cert.push(err_check("completed-pushforward", e)),
    }
    cert
}

/// The finite-level square: `Vol(U) j_K [g]_* iota_*(x) = hat iota_*(j_U x ⊗ ch(gK))` on a basis of `M_H(U)`.
pub fn check_finite_level_diagram(emb: &Embedding<'_>, u: Subgroup, k: Subgroup, g: usize) -> Certificate {
    let grp = emb.grp();
    let mut cert = Certificate::new(
        "finite-level-diagram",
        json!({
            "model": emb.model.describe(),
            "H": grp.subgroup_json(emb.h),
            "U": grp.subgroup_json(u),
            "K": grp.subgroup_json(k),
            "g": grp.label(g),
        }),
        None,
    );
    let run = || -> Result<Option<Value>> {
        for (i, x) in emb.model.basis(u).iter().enumerate() {
            let lhs = emb.finite_level(x, u, g, k)?;
            let rhs = emb.completed_pushforward(x, &[CosetIndicator { coeff: 1, g, k }], AuxLevel::Largest)?;
            if lhs != rhs {
                let mut d = rats_eq_json(&lhs, &rhs);
                d["basis"] = json!(i);
                return Ok(Some(d));
            }
        }
        Ok(None)
    };
    let top = grp.conj(g, k).meet(emb.h);
    cert.push(match run() {
        Ok(bad) => Check::from_bool(
            "diagram",
            bad.is_none(),
            json!({ "index_in_gKg^-1∩H": top.order() / u.order().max(1), "mismatch": bad }),
        ),
        Err(e) => err_check("diagram", e),
    });
    cert
}
