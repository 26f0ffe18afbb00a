//! Randomized invariants across modules.

use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use trc_core::classfield::{self, kronecker, QuadForm};
use trc_core::exactnum::{ExactScalar, Rational};
use trc_core::hecke;
use trc_core::lattice::LatticeClass;
use trc_core::lfactor::{self, SatakeParams};
use trc_core::mackey::{self, ordinary_projector, PadicEndo};
use trc_core::qcomb::{self, QCombContext};

const ELLS: [u64; 4] = [2, 3, 5, 7];
const ORDERS: [u32; 5] = [1, 3, 4, 6, 12];

fn scalar() -> impl Strategy<Value = (usize, usize, Vec<(i64, i64)>)> {
    (0..ELLS.len(), 0..ORDERS.len(), prop::collection::vec((-6i64..=6, 1i64..=4), 1..10))
}

fn build(ell: u64, k: u32, c: &[(i64, i64)]) -> ExactScalar {
    let coeffs: Vec<Rational> = c.iter().map(|&(p, q)| Rational::new(BigInt::from(p), BigInt::from(q))).collect();
    ExactScalar::from_coeffs(ell, k, &coeffs)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn exact_ring_axioms(a in scalar(), b in prop::collection::vec((-6i64..=6, 1i64..=4), 1..10), c in prop::collection::vec((-6i64..=6, 1i64..=4), 1..10)) {
        let (ell, k) = (ELLS[a.0], ORDERS[a.1]);
        let (x, y, z) = (build(ell, k, &a.2), build(ell, k, &b), build(ell, k, &c));
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert_eq!(&x * &y, &y * &x);
        if !x.is_zero() {
            prop_assert!((&x * &x.inverse().unwrap()).is_one());
        }
        prop_assert_eq!(x.conj_cyclo().conj_cyclo(), x.clone());
        prop_assert_eq!((&x * &y).conj_cyclo(), &x.conj_cyclo() * &y.conj_cyclo());
        prop_assert_eq!((&x + &y).conj_cyclo(), &x.conj_cyclo() + &y.conj_cyclo());
    }

    #[test]
    fn grassmann_ratio(n in 1usize..=5, m in 0usize..=5, r in 0usize..=5, li in 0..ELLS.len()) {
        prop_assume!(r <= m && m <= n);
        prop_assert!(qcomb::grassmann_ratio_identity(r, m, &QCombContext::new(n, ELLS[li]).unwrap()));
    }

    #[test]
    fn b_coefficients_integral(n in 1usize..=5, li in 0..ELLS.len()) {
        let ctx = QCombContext::new(n, ELLS[li]).unwrap();
        let b = qcomb::b_coefficients(&ctx);
        prop_assert!(b.all_integral() && b.b0_integral);
    }

    #[test]
    fn lattice_normal_form_is_canonical(
        li in 0..3usize,
        n in 1usize..=3,
        entries in prop::collection::vec(-9i64..=9, 9),
        ops in prop::collection::vec((0usize..3, 0usize..3, -4i64..=4, 0usize..3), 1..12),
    ) {
        let ell = [2u64, 3, 5][li];
        let rows: Vec<Vec<i64>> = (0..n).map(|i| entries[i * 3..i * 3 + n].to_vec()).collect();
        let Ok(l) = LatticeClass::from_rows(ell, n, &rows) else { return Ok(()); };
        let mut moved = rows.clone();
        for (i, j, c, kind) in ops {
            let (i, j) = (i % n, j % n);
            match kind {
                0 if i != j => {
                    let src = moved[j].clone();
                    for (a, b) in moved[i].iter_mut().zip(src) {
                        *a += c * b;
                    }
                }
                1 => moved.swap(i, j),
                _ => {
                    // scale by a unit prime to ell
                    let u = (1..).map(|t| t * c.signum().max(1)).find(|u| u % ell as i64 != 0).unwrap();
                    for a in moved[i].iter_mut() {
                        *a *= u;
                    }
                }
            }
        }
        prop_assert_eq!(LatticeClass::from_rows(ell, n, &moved).unwrap(), l);
    }

    #[test]
    fn lattice_join_properties(li in 0..2usize, e in prop::collection::vec(prop::collection::vec(-6i64..=6, 4), 3)) {
        let ell = [2u64, 3][li];
        let lat = |v: &Vec<i64>| {
            let rows = vec![vec![v[0], v[1]], vec![v[2], v[3]]];
            LatticeClass::from_rows(ell, 2, &rows).ok()
        };
        let (Some(a), Some(b), Some(c)) = (lat(&e[0]), lat(&e[1]), lat(&e[2])) else { return Ok(()); };
        prop_assert_eq!(a.join(&b).join(&c), a.join(&b.join(&c)));
        prop_assert_eq!(a.join(&b), b.join(&a));
        prop_assert_eq!(a.join(&a), a.clone());
        let ab = a.join(&b);
        prop_assert_eq!(ab.contains(&c), a.contains(&c) && b.contains(&c));
        prop_assert!(ab.relative_position().dominates(&a.relative_position()));
        prop_assert!(ab.relative_position().dominates(&b.relative_position()));
    }

    #[test]
    fn central_value_and_shape(n in 1usize..=3, li in 0..ELLS.len(), idx in prop::collection::vec(0usize..8, 6), k in 1u32..=6, j in 0i64..6) {
        let ell = ELLS[li];
        let roots = lfactor::small_roots_of_unity();
        let alpha: Vec<(i64, u32)> = idx[..2 * n].iter().map(|&i| roots[i]).collect();
        let sp = SatakeParams::from_roots(n, ell, &alpha).unwrap();
        let fp = lfactor::frob_poly_from_satake(&sp);
        prop_assert_eq!(fp.p.degree(), Some(2 * n));
        prop_assert!(fp.p.constant_term(ell, 1).is_one());
        let chi = lfactor::CharacterValue::new(ell, k, j).unwrap();
        prop_assert!(lfactor::check_central_value(&sp, &chi).pass);
    }

    #[test]
    fn fourier_inversion_on_class_groups(di in 0usize..40, m in 1i64..=4, f in 0usize..50, idx in prop::collection::vec(0usize..8, 2)) {
        let fundamentals: Vec<i64> = (3..400).map(|x| -x).filter(|&d| classfield::is_fundamental(d)).collect();
        let d = fundamentals[di % fundamentals.len()];
        let cl = classfield::ring_class_group(d, m).unwrap();
        prop_assume!(cl.order() <= 50);
        let roots = lfactor::small_roots_of_unity();
        let sp = SatakeParams::from_roots(1, 5, &[roots[idx[0]], roots[idx[1]]]).unwrap();
        let cert = lfactor::tame_group_algebra_check(&cl.group, &sp, f % cl.order()).unwrap();
        prop_assert!(cert.pass);
    }

    #[test]
    fn psi_reduction_mass(n in 1usize..=3, m in 1usize..=3, li in 0..2usize) {
        prop_assume!(m <= n);
        let ell = [2u64, 3][li];
        prop_assume!(ell.pow((m * n) as u32) <= 1 << 12);
        let ctx = QCombContext::new(n, ell).unwrap();
        let red = hecke::reduce_um_to_psi(m, &ctx).unwrap();
        let total: BigInt = red.multiplicities.iter().sum();
        prop_assert_eq!(total, BigInt::from(ell).pow((m * n) as u32));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn mackey_models_satisfy_axioms(gi in 0usize..4, mi in 0usize..3, seed in any::<u64>()) {
        let entry = &mackey::catalog()[gi];
        let cert = mackey::mackey_report(entry, mackey::MODELS[mi], 5, seed).unwrap();
        prop_assert!(cert.pass, "{:?}", cert.first_failure);
    }

    #[test]
    fn projector_is_schedule_independent(pi in 0usize..3, n in 1u32..=6, d in 1usize..=5, seed in any::<u64>()) {
        let p = [2u64, 3, 5][pi];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = PadicEndo::random(&mut rng, p, n, d).unwrap();
        let e = ordinary_projector(&a).unwrap();
        prop_assert!(e.certificate.pass);
        // exponents 2^k k! instead of k!
        let mut b = a.clone();
        let mut k = 1u128;
        while b.mul(&b) != b {
            b = b.pow(2 * k);
            k += 1;
            prop_assert!(k < 200);
        }
        prop_assert_eq!(b, e.e);
    }

    #[test]
    fn composition_is_an_abelian_group_law(di in 0usize..200, m in 1i64..=6, picks in prop::collection::vec(0usize..10_000, 3)) {
        let fundamentals: Vec<i64> = (3..3000).map(|x| -x).filter(|&d| classfield::is_fundamental(d)).collect();
        let d = fundamentals[di % fundamentals.len()] * m * m;
        let forms = classfield::reduced_forms(d);
        let [f, g, h] = [0, 1, 2].map(|i| forms[picks[i] % forms.len()]);
        let fg = f.compose(&g).unwrap();
        prop_assert_eq!(fg, g.compose(&f).unwrap());
        prop_assert_eq!(fg.compose(&h).unwrap(), f.compose(&g.compose(&h).unwrap()).unwrap());
        prop_assert_eq!(f.compose(&QuadForm::principal(d)).unwrap(), f);
        prop_assert_eq!(f.compose(&f.inverse()).unwrap(), QuadForm::principal(d));
        prop_assert!(forms.contains(&fg));
    }

    #[test]
    fn frobenius_is_well_defined(di in 0usize..100, m in 1i64..=5, li in 0usize..40) {
        let fundamentals: Vec<i64> = (3..1000).map(|x| -x).filter(|&d| classfield::is_fundamental(d)).collect();
        let d_e = fundamentals[di % fundamentals.len()];
        let cl = classfield::ring_class_group(d_e, m).unwrap();
        let split: Vec<i64> = (2..400).filter(|&p| qcomb::is_prime(p as u64) && kronecker(d_e, p) == 1 && m % p != 0).collect();
        prop_assume!(!split.is_empty());
        let ell = split[li % split.len()];
        let fr = classfield::frobenius_class(&cl, ell).unwrap();
        let f = fr.prime_form;
        for b in [f.b + 2 * ell, f.b - 2 * ell, f.b + 4 * ell] {
            let g = QuadForm { a: ell, b, c: (b * b - cl.d) / (4 * ell) };
            prop_assert_eq!(cl.class_of(&g).unwrap(), fr.geometric);
        }
        // the conjugate prime gives the inverse class
        let conj = QuadForm { a: ell, b: -f.b, c: f.c };
        prop_assert_eq!(cl.class_of(&conj).unwrap(), fr.arithmetic);
    }

    #[test]
    fn norm_maps_on_random_towers(di in 0usize..60, m in 1i64..=3, li in 0usize..6) {
        let fundamentals: Vec<i64> = (3..300).map(|x| -x).filter(|&d| classfield::is_fundamental(d)).collect();
        let d_e = fundamentals[di % fundamentals.len()];
        let split: Vec<i64> = (2..60).filter(|&p| qcomb::is_prime(p as u64) && kronecker(d_e, p) == 1 && m % p != 0).collect();
        prop_assume!(!split.is_empty());
        let ell = split[li % split.len()];
        prop_assume!(d_e.abs() * (ell * m).pow(2) <= 60_000);
        let (_, cert) = classfield::tower(d_e, m, ell).unwrap();
        prop_assert!(cert.pass, "{:?}", cert.first_failure);
    }

    #[test]
    fn kronecker_is_multiplicative(a in -200i64..200, b in -200i64..200, n in 1i64..300, k in 1i64..300) {
        prop_assert_eq!(kronecker(a * b, n), kronecker(a, n) * kronecker(b, n));
        prop_assert_eq!(kronecker(a, n * k), kronecker(a, n) * kronecker(a, k));
    }
}
