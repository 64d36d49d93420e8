use proptest::prelude::*;

use knotcensus::arith::gcd;
use knotcensus::census::{lattice_count_s_d, local_density};
use knotcensus::classgroup::compose;
use knotcensus::clheuristics::{build_distribution, FiniteAbelianGroup};
use knotcensus::localize::{knot_count, orbit_label};
use knotcensus::qform::{apply, canonical, enumerate_classes, equivalent, reduce, Discriminant, DiscKind, GLTransform, QuadForm};
use knotcensus::seifert::{alexander_polynomial, delta, s_equivalent, seifert_to_form, SeifertMatrix};

/// Products of elementary matrices, so always in `SL2(Z)`.
fn sl2() -> impl Strategy<Value = GLTransform> {
    prop::collection::vec((any::<bool>(), -3i128..=3), 0..6).prop_map(|steps| {
        steps.into_iter().fold(GLTransform::IDENTITY, |acc, (upper, t)| {
            let e = if upper { GLTransform::new(1, t, 0, 1) } else { GLTransform::new(1, 0, t, 1) };
            acc.mul(&e).unwrap()
        })
    })
}

/// Forms of discriminant `1 - 4m` with nonzero, non-square discriminant.
fn form() -> impl Strategy<Value = QuadForm> {
    (-40i128..=40, -20i128..=20, -40i128..=40)
        .prop_filter("b odd, non-square disc", |&(a, b, c)| {
            let d = (2 * b + 1).pow(2) - 4 * a * c;
            a != 0 && c != 0 && !matches!(Discriminant::new(d).map(|x| x.kind()), Ok(DiscKind::Split { .. }) | Err(_))
        })
        .prop_map(|(a, b, c)| QuadForm::new(a, 2 * b + 1, c).unwrap())
}

fn squarefree(d: u64) -> bool {
    (2..=d).take_while(|p| p * p <= d).all(|p| !d.is_multiple_of(p * p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reduction_is_idempotent_and_witnessed(q in form()) {
        let (r, w) = reduce(&q).unwrap();
        prop_assert_eq!(reduce(&r).unwrap().0, r);
        prop_assert_eq!(r.disc(), q.disc());
        if q.disc() < 0 {
            prop_assert_eq!(apply(&q, &w).unwrap(), r);
        }
    }

    #[test]
    fn canonical_form_is_an_invariant(q in form(), m in sl2()) {
        let moved = apply(&q, &m).unwrap();
        prop_assert_eq!(canonical(&moved).unwrap(), canonical(&q).unwrap());
        prop_assert!(equivalent(&q, &moved).unwrap());
    }

    #[test]
    fn composition_respects_classes(q in form(), m1 in sl2(), m2 in sl2()) {
        prop_assume!(q.is_primitive());
        let d = q.discriminant().unwrap();
        let p = enumerate_classes(&d, true).unwrap()[0];
        let x = compose(&d, &q, &p).unwrap();
        let y = compose(&d, &apply(&q, &m1).unwrap(), &apply(&p, &m2).unwrap()).unwrap();
        prop_assert_eq!(canonical(&x).unwrap(), canonical(&y).unwrap());
    }

    #[test]
    fn orbit_labels_are_invariant(q in form(), m in sl2()) {
        let mm = (1 - q.disc()) / 4;
        prop_assume!(mm.abs() <= 2000);
        prop_assert_eq!(orbit_label(&q, mm).unwrap(), orbit_label(&apply(&q, &m).unwrap(), mm).unwrap());
    }

    #[test]
    fn strata_sum_to_the_total(m in -3000i128..3000) {
        prop_assume!(m != 0);
        let c = knot_count(m).unwrap();
        prop_assert_eq!(c.strata.iter().map(|s| s.orbits).sum::<u64>(), c.total);
        for s in &c.strata {
            prop_assert_eq!(s.h_plus % s.kernel_order, 0);
        }
    }

    #[test]
    fn density_is_multiplicative(d1 in 1u64..200, d2 in 1u64..200) {
        prop_assume!(squarefree(d1) && squarefree(d2) && gcd(d1 as i128, d2 as i128) == 1);
        let (a, b, ab) = (local_density(d1).unwrap(), local_density(d2).unwrap(), local_density(d1 * d2).unwrap());
        prop_assert_eq!(ab.count, a.count * b.count);
        prop_assert_eq!(ab.rho, a.rho * b.rho);
    }

    #[test]
    fn lattice_counts_shrink_with_divisibility(x in 1u64..3000, d in 1u64..40) {
        let s1 = lattice_count_s_d(x, 1).unwrap();
        let sd = lattice_count_s_d(x, d).unwrap();
        prop_assert!(sd <= s1);
        prop_assert_eq!(lattice_count_s_d(x, d * 2).unwrap() <= sd, true);
    }

    #[test]
    fn group_normal_form_ignores_order(mut v in prop::collection::vec(1u64..40, 0..5), seed in any::<u64>()) {
        let g = FiniteAbelianGroup::from_cyclic_factors(&v).unwrap();
        let k = v.len().max(1);
        v.rotate_left(seed as usize % k);
        let h = FiniteAbelianGroup::from_cyclic_factors(&v).unwrap();
        prop_assert_eq!(&g, &h);
        prop_assert_eq!(g.order(), v.iter().product::<u64>());
        prop_assert!(g.invariants().windows(2).all(|w| w[1] % w[0] == 0));
        prop_assert_eq!(g.aut_order().unwrap() as f64, g.aut_order_f64());
    }

    #[test]
    fn quotient_orders_divide(v in prop::collection::vec(2u64..12, 1..4), x in prop::collection::vec(0u64..1000, 4)) {
        let g = FiniteAbelianGroup::from_cyclic_factors(&v).unwrap();
        let gen: Vec<u64> = g.invariants().iter().zip(&x).map(|(d, x)| x % d).collect();
        let q = g.quotient(&[gen]);
        prop_assert_eq!(g.order() % q.order(), 0);
    }

    #[test]
    fn weights_are_normalized(u in 0u32..4, b in 1u64..300) {
        let d = build_distribution(u, b).unwrap();
        let total: f64 = d.entries().iter().map(|e| e.1).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(d.entries().iter().all(|e| e.1 > 0.0 && e.0.order() <= b));
    }

    #[test]
    fn genus_one_alexander_identity(a in -50i128..50, b in -50i128..50, c in -50i128..50) {
        let p = SeifertMatrix::genus_one(a, b, c).unwrap();
        let m = p.det().unwrap();
        prop_assume!(m != 0);
        prop_assert_eq!(alexander_polynomial(&p).unwrap(), delta(m));
        prop_assert_eq!(seifert_to_form(&p).unwrap().disc(), 1 - 4 * m);
    }

    #[test]
    fn congruent_seifert_matrices_are_s_equivalent(a in -20i128..20, b in -20i128..20, c in -20i128..20, x in sl2()) {
        let p = SeifertMatrix::genus_one(a, b, c).unwrap();
        let m = p.det().unwrap();
        prop_assume!(m != 0 && m.abs() <= 3000);
        prop_assume!(!matches!(Discriminant::for_m(m).unwrap().kind(), DiscKind::Split { .. }));
        let xm = [[x.p, x.q], [x.r, x.s]];
        let rows: Vec<Vec<i128>> = (0..2)
            .map(|i| (0..2).map(|j| {
                (0..2).flat_map(|k| (0..2).map(move |l| (k, l))).map(|(k, l)| xm[i][k] * p.rows()[k][l] * xm[j][l]).sum()
            }).collect())
            .collect();
        let q = SeifertMatrix::new(rows).unwrap();
        prop_assert!(s_equivalent(&p, &q).unwrap());
        prop_assert!(s_equivalent(&q, &p).unwrap());
    }

    #[test]
    fn higher_genus_polynomials_are_symmetric(
        a in -6i128..6, b in -6i128..6, c in -6i128..6,
        d in -6i128..6, e in -6i128..6, f in -6i128..6,
        x in sl2(),
    ) {
        // Block sum of two genus-one matrices, mixed by a unimodular change of
        // basis acting on coordinates 2 and 3.
        let blocks = [[a, b, 0, 0], [b - 1, c, 0, 0], [0, 0, d, e], [0, 0, e - 1, f]];
        let g = [[1, 0, 0, 0], [0, x.p, x.q, 0], [0, x.r, x.s, 0], [0, 0, 0, 1]];
        let rows: Vec<Vec<i128>> = (0..4)
            .map(|i| (0..4).map(|j| {
                let mut s = 0;
                for k in 0..4 { for l in 0..4 { s += g[i][k] * blocks[k][l] * g[j][l]; } }
                s
            }).collect())
            .collect();
        let p = SeifertMatrix::new(rows).unwrap();
        let poly = alexander_polynomial(&p).unwrap();
        prop_assert!(poly.is_symmetric());
        prop_assert_eq!(poly.eval(1), Some(1));
    }
}
