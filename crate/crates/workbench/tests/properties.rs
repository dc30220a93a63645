use proptest::prelude::*;

use workbench::deligne::{canonicalize, lifts, lifts_parity, Catalogue, DObject, ExtLabel};
use workbench::fusion::fuse_ext;
use workbench::gring::GRing;
use workbench::qmodules::WeightModule;
use workbench::qseries::ProductForm;
use workbench::scalars::{conductor_for, conductor_scope, q, qi, CycScalar, Q};

fn small_q(den: i64) -> impl Strategy<Value = Q> {
    (-12i64..=12, 1..=den).prop_map(|(n, d)| q(n, d))
}

/// Σ a_k e^{πi k/6}, an element of Q(ζ_12).
fn cyc() -> impl Strategy<Value = CycScalar> {
    prop::collection::vec((-3i64..=3, 0i64..12), 1..4).prop_map(|v| {
        v.into_iter()
            .fold(CycScalar::zero(), |acc, (a, k)| acc.add(&CycScalar::root(&q(k, 6)).mul(&CycScalar::from_i64(a))))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(a in cyc(), b in cyc(), c in cyc()) {
        let _g = conductor_scope(12);
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert!(a.sub(&a).is_zero());
        if let Some(ai) = a.inv() {
            prop_assert!(a.mul(&ai).is_one());
        } else {
            prop_assert!(a.is_zero());
        }
        let z = a.mul(&b).approx();
        let w = a.approx() * b.approx();
        prop_assert!((z - w).norm() < 1e-9 * (1.0 + w.norm()));
        prop_assert_eq!(a.conj().conj(), a);
    }

    #[test]
    fn ring_assoc_comm(p in 2u32..=6, xs in prop::collection::vec(-2i64..=2, 30), even in any::<bool>()) {
        let g = if even && p % 2 == 0 { GRing::even0(p).unwrap() } else { GRing::new(p) };
        let n = g.len();
        let pick = |off: usize| -> Vec<i64> { (0..n).map(|k| xs[(k + off) % xs.len()]).collect() };
        let (a, b, c) = (pick(0), pick(7), pick(13));
        prop_assert_eq!(g.multiply(&g.multiply(&a, &b), &c), g.multiply(&a, &g.multiply(&b, &c)));
        prop_assert_eq!(g.multiply(&a, &b), g.multiply(&b, &a));
        prop_assert_eq!(g.multiply(&g.unit(), &a), a);
    }

    #[test]
    fn canonical_labels(p in 2u32..=5, c in small_q(4), a in small_q(4), i in 0u32..4, ell in -3i64..=3, k in -3i64..=3) {
        let i = i % (p - 1).max(1);
        for l in [ExtLabel::EV { c: c.clone(), alpha: a.clone() }, ExtLabel::ES { c: c.clone(), i, ell }, ExtLabel::QP { c: c.clone(), i, ell }] {
            let once = canonicalize(&l, p);
            prop_assert_eq!(canonicalize(&once, p), once.clone());
            prop_assert_eq!(canonicalize(&l.shift(k, p), p), once);
        }
    }

    #[test]
    fn lifting_matches_parity(p in 2u32..=5, a in small_q(4), c in small_q(4)) {
        let _g = conductor_scope(conductor_for(p, &[a.clone(), c.clone()]));
        let d = DObject::new(c.clone(), WeightModule::<CycScalar>::typical(&a, p));
        prop_assert_eq!(lifts(&d).unwrap().0, lifts_parity(&Catalogue::V(a), &c, p));
    }

    #[test]
    fn truncation_sound(fs in prop::collection::vec((-1i64..=1, 1i64..=12, -2i64..=2), 1..5), cut in 1i64..=6) {
        let d = 12;
        let mut pf = ProductForm::one();
        for (b, e, m) in fs {
            if m != 0 {
                pf = pf.mul(&ProductForm::factor(b, q(e, 2), m));
            }
        }
        let full = pf.expand(d, &qi(8), 16).unwrap();
        let short = pf.expand(d, &qi(cut), 16).unwrap();
        prop_assert_eq!(full.series.truncate(&qi(cut)).unwrap().terms, short.series.terms);
        prop_assert_eq!(full.ledger, short.ledger);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn module_relations(p in 2u32..=4, i in 0u32..4, j in 0u32..4, ell in -2i64..=2, a in small_q(3)) {
        let _g = conductor_scope(conductor_for(p, &[a.clone()]));
        let s = WeightModule::<CycScalar>::simple(i % p, ell, p).unwrap();
        let t = WeightModule::<CycScalar>::simple(j % p, 0, p).unwrap();
        let v = WeightModule::<CycScalar>::typical(&a, p);
        let st = s.tensor(&t).unwrap();
        let sv = s.tensor(&v).unwrap();
        for m in [&s, &v, &st, &sv] {
            prop_assert!(m.check_relations().is_ok());
            let w: Vec<Q> = m.dual().weights.clone();
            let mut neg: Vec<Q> = m.weights.iter().map(|x| -x).collect();
            let mut w2 = w.clone();
            neg.sort();
            w2.sort();
            prop_assert_eq!(w2, neg);
        }
        prop_assert_eq!(s.hom_space(&st).len(), st.dual().hom_space(&s.dual()).len());
        prop_assert_eq!(t.hom_space(&st).len(), st.dual().hom_space(&t.dual()).len());
    }

    #[test]
    fn fusion_commutes(c1 in -2i64..=2, c2 in -2i64..=2) {
        let p = 3;
        let l1 = ExtLabel::ES { c: qi(c1) * qi(2) + qi(1), i: 1, ell: 0 };
        let l2 = ExtLabel::ES { c: qi(c2) * qi(2), i: 0, ell: 0 };
        let mut x = fuse_ext(&l1, &l2, p).unwrap();
        let mut y = fuse_ext(&l2, &l1, p).unwrap();
        x.sort();
        y.sort();
        prop_assert_eq!(x, y);
    }
}
