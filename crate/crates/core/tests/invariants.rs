use approx::assert_abs_diff_eq;
use jensen_bounds::bounds::{
    abel_decomposition, evaluate, extend_tuple, jensen_functional, BoundReport, Instance, Side,
    TheoremId,
};
use jensen_bounds::convexity::{ConvexityClass, FunctionSpec};
use jensen_bounds::oracle::{check, generate, CheckOutcome, FuzzConfig};
use jensen_bounds::tolerance::Tolerance;
use jensen_bounds::weights::{rearrange_raw, star_factors, BoundFactors, WeightMode, WeightTuple};
use proptest::prelude::*;

fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.iter().map(|w| w / s).collect()
    })
}

/// Prefix path in `[0, total]` turned into weights.
fn steffensen(n: usize, total: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..=1.0, n - 1).prop_map(move |mut path| {
        for s in &mut path {
            *s *= total;
        }
        path.push(total);
        let mut prev = 0.0;
        path.iter()
            .map(|&s| {
                let w = s - prev;
                prev = s;
                w
            })
            .collect()
    })
}

fn sorted_points(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..10.0, n).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        v
    })
}

fn quad() -> FunctionSpec {
    FunctionSpec::power(2, 0.0, 10.0).unwrap()
}

fn tol() -> Tolerance {
    Tolerance::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn quadratic_steffensen_closes(
        (x, a, c) in (2usize..10).prop_flat_map(|n| (sorted_points(n), steffensen(n, 1.7), 0.0f64..10.0))
    ) {
        let inst = Instance::new(quad(), x).with_a(a).with_c(c);
        let r = evaluate(&inst, TheoremId::Thm6, tol()).unwrap();
        prop_assert!(r.slack.abs() <= 1e-10, "{r:?}");
    }

    #[test]
    fn lambda_extremes_reduce(
        (x, a) in (2usize..8).prop_flat_map(|n| (sorted_points(n), simplex(n)))
    ) {
        let n = x.len();
        let base = Instance::new(quad(), x).with_a(a).with_class(ConvexityClass::Superquadratic);
        for (scaled, unscaled) in [(TheoremId::Thm16, TheoremId::Thm15), (TheoremId::Thm18, TheoremId::Thm17)] {
            let zero = evaluate(&base.clone().with_lambda(vec![0.0; n]), scaled, tol()).unwrap();
            let plain = evaluate(&base, unscaled, tol()).unwrap();
            prop_assert_eq!((zero.lhs, zero.mid, zero.rhs), (plain.lhs, plain.mid, plain.rhs));
            let one = evaluate(&base.clone().with_lambda(vec![1.0; n]), scaled, tol()).unwrap();
            prop_assert_eq!(one.lhs, 0.0);
            prop_assert_eq!(one.rhs, 0.0);
            prop_assert!(one.mid.unwrap_or(0.0) == 0.0);
        }
    }

    #[test]
    fn abel_identity(
        (x, a, c) in (2usize..8).prop_flat_map(|n| (sorted_points(n), steffensen(n, 2.3), 0.0f64..10.0))
    ) {
        let spec = FunctionSpec::power(3, 0.0, 10.0).unwrap();
        let w = WeightTuple::new(a.clone(), WeightMode::Steffensen).unwrap();
        let (_, parts) = abel_decomposition(&spec, &x, &w, c);
        prop_assert!(parts.iter().all(|(_, v)| *v >= 0.0), "{parts:?}");
        let total: f64 = parts.iter().map(|(_, v)| v).sum();
        let direct: f64 = x.iter().zip(&a).map(|(&xi, &ai)| ai * spec.modulus_value((xi - c).abs())).sum();
        prop_assert!((total - direct).abs() <= 1e-9 * (1.0 + direct.abs()), "{total} vs {direct}");
    }

    #[test]
    fn extension_is_valid(
        (x, p, q) in (2usize..8).prop_flat_map(|n| (sorted_points(n), simplex(n), simplex(n)))
    ) {
        let pair = rearrange_raw(&x, &p, &q, WeightMode::SteffensenNormalized, WeightMode::SteffensenNormalized).unwrap();
        let (lo, hi) = star_factors(&pair).unwrap();
        for (factor, side) in [(lo, Side::Lower), (hi, Side::Upper)] {
            let e = extend_tuple(&x, &p, &q, factor, side).unwrap();
            prop_assert!(e.points.windows(2).all(|w| w[0] <= w[1]));
            let mut acc = 0.0;
            for &w in e.weights.values() {
                acc += w;
                prop_assert!((0.0..=1.0 + 1e-12).contains(&acc), "{acc}");
            }
            prop_assert!((acc - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn factor_ordering((p, q) in (2usize..8).prop_flat_map(|n| (simplex(n), simplex(n)))) {
        let x: Vec<f64> = (0..p.len()).map(|i| i as f64).collect();
        let pw = WeightTuple::new(p, WeightMode::Simplex).unwrap();
        let qw = WeightTuple::new(q, WeightMode::Simplex).unwrap();
        let f = BoundFactors::compute(&x, &pw, &qw).unwrap();
        prop_assert!(f.m <= 1.0 && 1.0 <= f.big_m);
        prop_assert!(f.m_star <= 1.0 && 1.0 <= f.big_m_star);
        prop_assert!(f.m <= f.m_star + 1e-15 && f.big_m_star <= f.big_m + 1e-15, "{f:?}");
    }

    #[test]
    fn refinements_dominate_classical(
        (x, p, q) in (2usize..8).prop_flat_map(|n| (sorted_points(n), simplex(n), simplex(n)))
    ) {
        for (theorem, class) in [
            (TheoremId::Thm19Lower, ConvexityClass::Superquadratic),
            (TheoremId::Thm20Lower, ConvexityClass::UniformlyConvex),
        ] {
            let inst = Instance::new(quad(), x.clone()).with_pq(p.clone(), q.clone()).with_class(class);
            let r = evaluate(&inst, theorem, tol()).unwrap();
            prop_assert!(r.pass, "{r:?}");
            prop_assert!(r.rhs >= -1e-12);
        }
        let jp = jensen_functional(&quad(), &x, &WeightTuple::new(p, WeightMode::Simplex).unwrap()).unwrap();
        prop_assert!(jp >= -1e-12);
    }

    #[test]
    fn reports_round_trip(seed in 0u64..1000, idx in 0usize..24) {
        let theorem = TheoremId::ALL[idx];
        let inst = generate(&FuzzConfig::new(seed, 1), theorem, 0);
        let back = Instance::from_json(&inst.to_json()).unwrap();
        prop_assert_eq!(&back, &inst);
        let out = check(&inst, theorem, tol()).unwrap();
        prop_assert!(matches!(out, CheckOutcome::Pass(_)));
        let r = out.report();
        let parsed = BoundReport::from_csv(&r.to_csv()).unwrap();
        prop_assert_eq!(&parsed, r);
        let json: BoundReport = serde_json::from_str(&serde_json::to_string(r).unwrap()).unwrap();
        prop_assert_eq!(&json, r);
    }
}

#[test]
fn hand_refinement_instance() {
    let inst = Instance::new(FunctionSpec::power(2, 0.0, 1.0).unwrap(), vec![0.0, 1.0])
        .with_pq(vec![0.25, 0.75], vec![0.5, 0.5]);
    let r = evaluate(&inst, TheoremId::Thm19Lower, tol()).unwrap();
    assert_abs_diff_eq!(r.lhs, 0.0625, epsilon = 1e-12);
    assert_abs_diff_eq!(r.rhs, 0.0625, epsilon = 1e-12);
}
