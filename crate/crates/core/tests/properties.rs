use proptest::prelude::*;

use orlicz_lab::degiorgi::{level_gap_bound, levels};
use orlicz_lab::measure::{level_set_measure, lp_norm, ScalarField, WeightSpec, WeightedDomain};
use orlicz_lab::operator::{assemble, solve, EllipticOperatorSpec};
use orlicz_lab::orlicz::{holder_pairing, luxemburg_norm, modular};
use orlicz_lab::young::{log_grid, preceq_check, ConjugateForm, YoungFunction, YoungParams};

fn young() -> impl Strategy<Value = YoungParams> {
    (1.05f64..5.0, 0.0f64..4.0).prop_map(|(p, q)| YoungParams::new(p, q).unwrap())
}

/// Interval or ball with random positive cell weights.
fn domain() -> impl Strategy<Value = WeightedDomain> {
    (any::<bool>(), prop::collection::vec(0.05f64..20.0, 2..30), 0.2f64..4.0).prop_map(|(ball, w, len)| {
        let n = w.len();
        if ball {
            WeightedDomain::ball(3, len, n, &WeightSpec::Samples(w)).unwrap()
        } else {
            WeightedDomain::interval(0.0, len, n, &WeightSpec::Samples(w)).unwrap()
        }
    })
}

fn field_on(dom: &WeightedDomain, raw: &[f64], scale: f64) -> ScalarField {
    ScalarField::from_values(dom, (0..dom.len()).map(|i| scale * raw[i % raw.len()]).collect()).unwrap()
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), -10.0f64..10.0], 1..30)
}

fn scale() -> impl Strategy<Value = f64> {
    (-4.0f64..4.0).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn young_function_is_convex(a in young(), t1 in 0.0f64..50.0, dt in 0.0f64..50.0, theta in 0.0f64..1.0) {
        let t2 = t1 + dt;
        let lhs = a.eval(theta * t1 + (1.0 - theta) * t2).unwrap();
        let rhs = theta * a.eval(t1).unwrap() + (1.0 - theta) * a.eval(t2).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn young_inequality(a in young(), s in 0.0f64..100.0, t in 0.0f64..100.0) {
        let rhs = a.eval(s).unwrap() + a.conjugate_eval(t).unwrap();
        prop_assert!(s * t <= rhs * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn conjugate_inverse_round_trip(a in young(), y in scale()) {
        let t = a.conjugate_inverse(y).unwrap();
        prop_assert!((a.conjugate_eval(t).unwrap() / y - 1.0).abs() < 1e-9);
    }

    #[test]
    fn closed_conjugate_is_comparable(a in young(), t in scale()) {
        // Both representatives lie within fixed multiples of each other.
        let num = a.conjugate_eval(t).unwrap();
        let closed = a.conjugate_closed(t).unwrap();
        let inner = ConjugateForm::closed(a).value(t);
        prop_assert!((closed - inner).abs() <= 1e-12 * closed);
        prop_assert!(num > 0.0 && closed > 0.0);
    }

    #[test]
    fn norm_is_homogeneous(dom in domain(), a in young(), raw in values(), s in scale(), c in scale()) {
        let f = field_on(&dom, &raw, s);
        let n1 = luxemburg_norm(&f, &a, &dom).unwrap().value;
        let n2 = luxemburg_norm(&f.scaled(-c), &a, &dom).unwrap().value;
        prop_assert!((n2 - c * n1).abs() <= 1e-12 * c * n1.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn norm_triangle_inequality(dom in domain(), a in young(), r1 in values(), r2 in values(), s in scale()) {
        let f = field_on(&dom, &r1, s);
        let g = field_on(&dom, &r2, s);
        let sum = f.combine(1.0, &g, 1.0).unwrap();
        let n = |h: &ScalarField| luxemburg_norm(h, &a, &dom).unwrap().value;
        prop_assert!(n(&sum) <= (n(&f) + n(&g)) * (1.0 + 1e-9));
    }

    #[test]
    fn modular_is_one_at_the_norm(dom in domain(), a in young(), raw in values(), s in scale()) {
        let f = field_on(&dom, &raw, s);
        let rep = luxemburg_norm(&f, &a, &dom).unwrap();
        prop_assume!(rep.value > 0.0);
        let m = modular(&f, &a, rep.value, &dom).unwrap();
        prop_assert!((m - 1.0).abs() < 1e-9, "modular {}", m);
        prop_assert!(m <= 1.0);
    }

    #[test]
    fn holder_with_factor_two(dom in domain(), a in young(), r1 in values(), r2 in values(), s in scale(), t in scale()) {
        let f = field_on(&dom, &r1, s);
        let g = field_on(&dom, &r2, t);
        let rep = holder_pairing(&f, &g, &a, &dom).unwrap();
        prop_assert!(rep.holds, "{} > {}", rep.lhs, rep.rhs);
    }

    #[test]
    fn norm_comparison_follows_dominance(
        dom in domain(),
        pa in 1.1f64..3.0,
        dp in 0.0f64..2.0,
        qa in 0.0f64..3.0,
        dq in 0.0f64..2.0,
        raw in values(),
        s in scale(),
    ) {
        let a = YoungParams::new(pa, qa).unwrap();
        let b = YoungParams::new(pa + dp, qa + dq).unwrap();
        let rep = preceq_check(&a, &b, &log_grid(1e-3, 1e12, 200)).unwrap();
        prop_assert!(rep.holds);
        // A(t) <= B(ct) for t >= t0 gives ‖f‖_A <= c (1 + A(t0) v(Ω)) ‖f‖_B.
        let (c, t0) = (rep.c.unwrap(), rep.t0.unwrap());
        let k = c * (1.0 + a.eval(t0).unwrap() * dom.total_mass());
        let f = field_on(&dom, &raw, s);
        let na = luxemburg_norm(&f, &a, &dom).unwrap().value;
        let nb = luxemburg_norm(&f, &b, &dom).unwrap().value;
        prop_assert!(na <= k * nb * (1.0 + 1e-9) + 1e-300);
    }

    #[test]
    fn layer_cake(dom in domain(), raw in values(), s in scale(), p in 1.0f64..4.0) {
        let f = field_on(&dom, &raw, s).map(f64::abs);
        let mut levels: Vec<f64> = f.values().to_vec();
        levels.push(0.0);
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        let mut cake = 0.0;
        for w in levels.windows(2) {
            cake += (w[1].powf(p) - w[0].powf(p)) * level_set_measure(&f, w[0], &dom).unwrap();
        }
        let direct = lp_norm(&f, p, &dom).unwrap().powf(p);
        prop_assert!((cake - direct).abs() <= 1e-10 * direct.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn level_set_measure_is_nonincreasing(dom in domain(), raw in values(), r1 in -5.0f64..10.0, dr in 0.0f64..5.0) {
        let f = field_on(&dom, &raw, 1.0);
        let m1 = level_set_measure(&f, r1, &dom).unwrap();
        let m2 = level_set_measure(&f, r1 + dr, &dom).unwrap();
        prop_assert!(m2 <= m1);
        prop_assert!(m1 <= dom.total_mass() * (1.0 + 1e-12));
    }

    #[test]
    fn solver_is_linear_and_order_preserving(cells in 4usize..60, r1 in values(), r2 in values(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let dom = WeightedDomain::ball(3, 1.0, cells, &WeightSpec::uniform()).unwrap();
        let spec = EllipticOperatorSpec::uniform(&dom).unwrap();
        let f = field_on(&dom, &r1, 1.0).map(f64::abs);
        let g = field_on(&dom, &r2, 1.0);
        prop_assume!(f.abs_max() > 0.0 && g.abs_max() > 0.0);
        let u = |h: &ScalarField| solve(&assemble(&spec, h).unwrap(), 1e-12).unwrap();
        let (uf, ug) = (u(&f), u(&g));
        prop_assert!(uf.min() >= -1e-12 * uf.abs_max());
        let combo = f.combine(a, &g, b).unwrap();
        prop_assume!(combo.abs_max() > 0.0);
        let lhs = u(&combo);
        let rhs = uf.combine(a, &ug, b).unwrap();
        let scale = uf.abs_max() * a.abs() + ug.abs_max() * b.abs();
        let gap = lhs.combine(1.0, &rhs, -1.0).unwrap().abs_max();
        prop_assert!(gap <= 1e-8 * scale, "gap {}", gap);
    }

    #[test]
    fn levels_increase_below_r0(r0 in 0.1f64..100.0, eps in 0.05f64..5.0) {
        let c = levels(r0, eps, 200).unwrap();
        prop_assert!(c.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(c.iter().all(|x| *x < r0));
        if eps >= 1.0 {
            for k in 0..200 {
                prop_assert!(c[k + 1] - c[k] >= level_gap_bound(r0, eps, k) * (1.0 - 1e-12));
            }
        }
    }
}
