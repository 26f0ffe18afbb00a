//! Finite groups by Cayley table, with subgroups stored as bitmasks.

use std::collections::HashMap;

use serde_json::{json, Value};

use crate::error::{Result, TrcError};

/// Largest group order the bitmask representation supports.
pub const MAX_ORDER: usize = 64;

/// Set of group elements as a bitmask over element indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subgroup(pub u64);

impl Subgroup {
    pub fn contains(self, g: usize) -> bool {
        self.0 >> g & 1 == 1
    }

    pub fn order(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn meet(self, o: Subgroup) -> Subgroup {
        Subgroup(self.0 & o.0)
    }

    pub fn is_subset(self, o: Subgroup) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn elements(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..64).filter(move |&i| bits >> i & 1 == 1)
    }

    pub fn from_elements(xs: impl IntoIterator<Item = usize>) -> Self {
        Subgroup(xs.into_iter().fold(0u64, |m, x| m | 1 << x))
    }
}

/// Finite group with identity at index 0.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    pub name: String,
    order: usize,
    mul: Vec<u8>,
    inv: Vec<u8>,
    labels: Vec<String>,
}

impl FiniteGroup {
    /// Closure of permutation generators on `0..degree`, composed as `(gh)(i) = g(h(i))`.
    pub fn from_permutations(
        name: &str,
        degree: usize,
        gens: &[Vec<u8>],
        label: impl Fn(&[u8]) -> String,
    ) -> Result<Self> {
        let id: Vec<u8> = (0..degree as u8).collect();
        let compose = |g: &[u8], h: &[u8]| -> Vec<u8> { h.iter().map(|&i| g[i as usize]).collect() };
        let mut elems = vec![id.clone()];
        let mut index: HashMap<Vec<u8>, usize> = HashMap::from([(id, 0)]);
        let mut i = 0;
        while i < elems.len() {
            for g in gens {
                let y = compose(&elems[i], g);
                if !index.contains_key(&y) {
                    if elems.len() == MAX_ORDER {
                        return Err(TrcError::BoundExceeded(format!("group {name} has order > {MAX_ORDER}")));
                    }
                    index.insert(y.clone(), elems.len());
                    elems.push(y);
                }
            }
            i += 1;
        }
        let n = elems.len();
        let mut mul = vec![0u8; n * n];
        let mut inv = vec![0u8; n];
        for a in 0..n {
            for b in 0..n {
                let c = index[&compose(&elems[a], &elems[b])];
                mul[a * n + b] = c as u8;
                if c == 0 {
                    inv[a] = b as u8;
                }
            }
        }
        let labels = elems.iter().map(|e| label(e)).collect();
        Ok(FiniteGroup { name: name.to_string(), order: n, mul, inv, labels })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b] as usize
    }

    pub fn mul3(&self, a: usize, b: usize, c: usize) -> usize {
        self.mul(self.mul(a, b), c)
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    pub fn label(&self, g: usize) -> &str {
        &self.labels[g]
    }

    pub fn find(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn whole(&self) -> Subgroup {
        Subgroup(if self.order == 64 { u64::MAX } else { (1u64 << self.order) - 1 })
    }

    pub fn trivial(&self) -> Subgroup {
        Subgroup(1)
    }

    /// Subgroup generated by `gens`.
    pub fn generated(&self, gens: &[usize]) -> Subgroup {
        let mut set = Subgroup(1);
        let mut frontier = vec![0usize];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = self.mul(x, g);
                if !set.contains(y) {
                    set.0 |= 1 << y;
                    frontier.push(y);
                }
            }
        }
        set
    }

    pub fn is_subgroup(&self, s: Subgroup) -> bool {
        s.contains(0) && s.elements().all(|a| s.elements().all(|b| s.contains(self.mul(a, self.inv(b)))))
    }

    /// `g S g^{-1}`.
    pub fn conj(&self, g: usize, s: Subgroup) -> Subgroup {
        let gi = self.inv(g);
        Subgroup::from_elements(s.elements().map(|x| self.mul3(g, x, gi)))
    }

    pub fn is_normal_in(&self, l: Subgroup, k: Subgroup) -> bool {
        l.is_subset(k) && k.elements().all(|g| self.conj(g, l) == l)
    }

    /// `g S`.
    pub fn left_translate(&self, g: usize, s: Subgroup) -> Subgroup {
        Subgroup::from_elements(s.elements().map(|x| self.mul(g, x)))
    }

    /// `A g B`.
    pub fn double_coset(&self, a: Subgroup, g: usize, b: Subgroup) -> Subgroup {
        let mut m = 0u64;
        for x in a.elements() {
            let xg = self.mul(x, g);
            for y in b.elements() {
                m |= 1 << self.mul(xg, y);
            }
        }
        Subgroup(m)
    }

    /// Representatives of the left cosets `S / T` of a subset `S` that is a union of them.
    pub fn left_coset_reps(&self, s: Subgroup, t: Subgroup) -> Vec<usize> {
        let mut left = s.0;
        let mut reps = Vec::new();
        while left != 0 {
            let g = left.trailing_zeros() as usize;
            reps.push(g);
            left &= !self.left_translate(g, t).0;
        }
        reps
    }

    /// Representatives of `A \ K / B`.
    pub fn double_coset_reps(&self, a: Subgroup, k: Subgroup, b: Subgroup) -> Vec<usize> {
        let mut left = k.0;
        let mut reps = Vec::new();
        while left != 0 {
            let g = left.trailing_zeros() as usize;
            reps.push(g);
            left &= !self.double_coset(a, g, b).0;
        }
        reps
    }

    /// Every subgroup generated by at most two elements, closed under intersection.
    pub fn small_subgroups(&self) -> Vec<Subgroup> {
        let mut set = std::collections::BTreeSet::new();
        for a in 0..self.order {
            for b in a..self.order {
                set.insert(self.generated(&[a, b]));
            }
        }
        loop {
            let cur: Vec<Subgroup> = set.iter().copied().collect();
            let before = set.len();
            for &x in &cur {
                for &y in &cur {
                    set.insert(x.meet(y));
                }
            }
            if set.len() == before {
                return cur;
            }
        }
    }

    pub fn subgroup_json(&self, s: Subgroup) -> Value {
        json!({ "order": s.order(), "elements": s.elements().map(|g| self.label(g).to_string()).collect::<Vec<_>>() })
    }
}

/// Triple `(G, Sigma, Upsilon)` for a finite group; `Sigma` is a subgroup.
#[derive(Clone, Debug)]
pub struct FiniteGroupCtx {
    pub group: FiniteGroup,
    pub sigma: Subgroup,
    pub upsilon: Vec<Subgroup>,
}

impl FiniteGroupCtx {
    /// Validates the closure conditions on an explicit family.
    pub fn new(group: FiniteGroup, sigma: Subgroup, mut upsilon: Vec<Subgroup>) -> Result<Self> {
        upsilon.sort();
        upsilon.dedup();
        let ctx = FiniteGroupCtx { group, sigma, upsilon };
        ctx.validate()?;
        Ok(ctx)
    }

    /// Smallest family containing `seeds` and `{1}` that satisfies the closure conditions.
    pub fn closure(group: FiniteGroup, sigma: Subgroup, seeds: &[Subgroup]) -> Result<Self> {
        let mut set: std::collections::BTreeSet<Subgroup> = seeds.iter().copied().collect();
        set.insert(group.trivial());
        loop {
            let cur: Vec<Subgroup> = set.iter().copied().collect();
            let before = set.len();
            for &k in &cur {
                for g in sigma.elements() {
                    let c = group.conj(g, k);
                    if c.is_subset(sigma) {
                        set.insert(c);
                    }
                    for &l in &cur {
                        set.insert(k.meet(group.conj(g, l)));
                    }
                }
            }
            if set.len() == before {
                break;
            }
        }
        Self::new(group, sigma, set.into_iter().collect())
    }

    /// All subgroups generated by at most two elements, `Sigma = G`.
    pub fn standard(group: FiniteGroup) -> Result<Self> {
        let subs = group.small_subgroups();
        let whole = group.whole();
        Self::closure(group, whole, &subs)
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.group;
        let bad = |m: String| Err(TrcError::Incompatible(m));
        if !g.is_subgroup(self.sigma) {
            return bad("Sigma is not closed under multiplication".into());
        }
        if !self.upsilon.contains(&g.trivial()) {
            return bad("Upsilon lacks the trivial subgroup".into());
        }
        for &k in &self.upsilon {
            if !g.is_subgroup(k) || !k.is_subset(self.sigma) {
                return bad(format!("{:?} is not a subgroup of Sigma", g.subgroup_json(k)));
            }
            for s in self.sigma.elements() {
                let c = g.conj(s, k);
                if c.is_subset(self.sigma) && !self.contains(c) {
                    return bad("Upsilon not closed under conjugation".into());
                }
                for &l in &self.upsilon {
                    if !self.contains(k.meet(g.conj(s, l))) {
                        return bad("Upsilon not closed under intersection".into());
                    }
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, k: Subgroup) -> bool {
        self.upsilon.binary_search(&k).is_ok()
    }

    pub fn subgroups_of(&self, k: Subgroup) -> Vec<Subgroup> {
        self.upsilon.iter().copied().filter(|l| l.is_subset(k)).collect()
    }

    pub fn normal_subgroups_of(&self, k: Subgroup) -> Vec<Subgroup> {
        self.upsilon.iter().copied().filter(|&l| self.group.is_normal_in(l, k)).collect()
    }

    /// `[g]: L -> K` is a morphism of `P(G, Sigma)`.
    pub fn is_pull_morphism(&self, g: usize, l: Subgroup, k: Subgroup) -> bool {
        self.sigma.contains(g) && self.group.conj(self.group.inv(g), l).is_subset(k)
    }

    /// `[g]: L -> K` is a morphism of `P(G, Sigma^{-1})`.
    pub fn is_push_morphism(&self, g: usize, l: Subgroup, k: Subgroup) -> bool {
        self.sigma.contains(self.group.inv(g)) && self.group.conj(self.group.inv(g), l).is_subset(k)
    }
}

/// Catalog group together with named subgroups and elements.
#[derive(Clone, Debug)]
pub struct CatalogGroup {
    pub group: FiniteGroup,
    pub subgroups: Vec<(String, Subgroup)>,
    pub elements: Vec<(String, usize)>,
    /// Stabilizer used for the coset model `B \ G`.
    pub base: Subgroup,
    /// Second stabilizer for the two-orbit model.
    pub second: Subgroup,
}

impl CatalogGroup {
    pub fn subgroup(&self, name: &str) -> Subgroup {
        self.subgroups.iter().find(|(n, _)| n == name).map(|x| x.1).expect("named subgroup")
    }

    pub fn element(&self, name: &str) -> usize {
        self.elements.iter().find(|(n, _)| n == name).map(|x| x.1).expect("named element")
    }
}

fn perm_label(p: &[u8]) -> String {
    p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("")
}

fn perm(images: &[u8]) -> Vec<u8> {
    images.to_vec()
}

fn build(
    name: &str,
    degree: usize,
    gens: &[Vec<u8>],
    subs: &[(&str, &[Vec<u8>])],
    elems: &[(&str, Vec<u8>)],
    label: impl Fn(&[u8]) -> String,
    base: &str,
    second: &str,
) -> CatalogGroup {
    let group = FiniteGroup::from_permutations(name, degree, gens, &label).expect("catalog group");
    let idx = |p: &[u8]| group.find(&label(p)).expect("catalog element");
    let subgroups: Vec<(String, Subgroup)> = subs
        .iter()
        .map(|(n, g)| (n.to_string(), group.generated(&g.iter().map(|p| idx(p)).collect::<Vec<_>>())))
        .collect();
    let elements = elems.iter().map(|(n, p)| (n.to_string(), idx(p))).collect();
    let find = |n: &str| subgroups.iter().find(|(m, _)| m == n).unwrap().1;
    let (base, second) = (find(base), find(second));
    CatalogGroup { group, subgroups, elements, base, second }
}

pub fn symmetric3() -> CatalogGroup {
    let t01 = perm(&[1, 0, 2]);
    let t02 = perm(&[2, 1, 0]);
    let c = perm(&[1, 2, 0]);
    build(
        "S3",
        3,
        &[t01.clone(), c.clone()],
        &[("A3", &[c.clone()]), ("C2a", &[t01.clone()]), ("C2b", &[t02.clone()])],
        &[("t01", t01), ("t02", t02), ("c", c)],
        perm_label,
        "C2a",
        "A3",
    )
}

pub fn symmetric4() -> CatalogGroup {
    let t01 = perm(&[1, 0, 2, 3]);
    let c4 = perm(&[1, 2, 3, 0]);
    let c3 = perm(&[1, 2, 0, 3]);
    let t12 = perm(&[0, 2, 1, 3]);
    let v1 = perm(&[1, 0, 3, 2]);
    let v2 = perm(&[2, 3, 0, 1]);
    let s13 = perm(&[0, 3, 2, 1]);
    build(
        "S4",
        4,
        &[t01.clone(), c4.clone()],
        &[
            ("A4", &[c3.clone(), v1.clone()]),
            ("V4", &[v1.clone(), v2.clone()]),
            ("S3", &[t01.clone(), c3.clone()]),
            ("D8", &[c4.clone(), s13.clone()]),
            ("C4", &[c4.clone()]),
            ("C3", &[c3.clone()]),
        ],
        &[("t01", t01), ("t12", t12), ("c4", c4), ("c3", c3)],
        perm_label,
        "S3",
        "C4",
    )
}

pub fn dihedral8() -> CatalogGroup {
    let r = perm(&[1, 2, 3, 0]);
    let s = perm(&[0, 3, 2, 1]);
    let r2 = perm(&[2, 3, 0, 1]);
    let sr = perm(&[1, 0, 3, 2]);
    build(
        "D8",
        4,
        &[r.clone(), s.clone()],
        &[
            ("C4", &[r.clone()]),
            ("Z", &[r2.clone()]),
            ("S", &[s.clone()]),
            ("V", &[s.clone(), r2.clone()]),
            ("V'", &[sr.clone(), r2.clone()]),
        ],
        &[("r", r), ("s", s), ("sr", sr)],
        perm_label,
        "S",
        "Z",
    )
}

/// Permutation of `F_3^2` (index `a + 3b`) induced by `v -> M v`.
fn gl2f3_perm(m: [[i64; 2]; 2]) -> Vec<u8> {
    (0..9)
        .map(|i| {
            let (a, b) = (i % 3, i / 3);
            let x = (m[0][0] * a + m[0][1] * b).rem_euclid(3);
            let y = (m[1][0] * a + m[1][1] * b).rem_euclid(3);
            (x + 3 * y) as u8
        })
        .collect()
}

fn gl2f3_label(p: &[u8]) -> String {
    let e1 = p[1] as i64;
    let e2 = p[3] as i64;
    format!("[[{},{}],[{},{}]]", e1 % 3, e2 % 3, e1 / 3, e2 / 3)
}

pub fn gl2_f3() -> CatalogGroup {
    let u = gl2f3_perm([[1, 1], [0, 1]]);
    let d1 = gl2f3_perm([[2, 0], [0, 1]]);
    let d2 = gl2f3_perm([[1, 0], [0, 2]]);
    let z = gl2f3_perm([[2, 0], [0, 2]]);
    let w = gl2f3_perm([[0, 1], [1, 0]]);
    let l = gl2f3_perm([[1, 0], [1, 1]]);
    let sl_a = gl2f3_perm([[0, 2], [1, 0]]);
    build(
        "GL2(F3)",
        9,
        &[u.clone(), d1.clone(), w.clone()],
        &[
            ("Borel", &[u.clone(), d1.clone(), d2.clone()]),
            ("UZ", &[u.clone(), z.clone()]),
            ("U", &[u.clone()]),
            ("Torus", &[d1.clone(), d2.clone()]),
            ("SL2", &[u.clone(), l.clone()]),
            ("Q8", &[sl_a.clone(), gl2f3_perm([[1, 1], [1, 2]])]),
        ],
        &[("u", u), ("w", w), ("d1", d1), ("z", z), ("l", l)],
        gl2f3_label,
        "Borel",
        "UZ",
    )
}

/// The built-in catalog `{S3, S4, D8, GL2(F3)}`.
pub fn catalog() -> Vec<CatalogGroup> {
    vec![symmetric3(), symmetric4(), dihedral8(), gl2_f3()]
}

pub fn catalog_group(name: &str) -> Result<CatalogGroup> {
    catalog()
        .into_iter()
        .find(|c| c.group.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| TrcError::Parse(format!("unknown group {name}; expected S3, S4, D8 or GL2(F3)")))
}
