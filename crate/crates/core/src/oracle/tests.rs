use super::*;
use crate::weights::{validate, WeightMode};

fn cfg(theorems: &[TheoremId], trials: u64) -> FuzzConfig {
    FuzzConfig {
        theorem_set: theorems.to_vec(),
        ..FuzzConfig::new(1, trials)
    }
}

#[test]
fn generation_is_reproducible() {
    let c = FuzzConfig::new(1, 10);
    for t in TheoremId::ALL {
        assert_eq!(generate(&c, t, 0), generate(&c, t, 0));
    }
    assert_ne!(
        generate(&c, TheoremId::Thm7, 0),
        generate(&c, TheoremId::Thm7, 1)
    );
}

#[test]
fn generator_postconditions() {
    let c = FuzzConfig::new(5, 200);
    for trial in 0..200 {
        let inst = generate(&c, TheoremId::Thm6, trial);
        validate(inst.a.as_ref().unwrap(), WeightMode::Steffensen).unwrap();
        assert!(inst.x.windows(2).all(|w| w[0] <= w[1]));

        let inst = generate(&c, TheoremId::Thm19Lower, trial);
        let q = validate(inst.q.as_ref().unwrap(), WeightMode::SteffensenNormalized).unwrap();
        let n = q.len();
        assert!(q.prefix_sums()[..n - 1].iter().all(|&v| v > 0.0 && v < 1.0));
        validate(inst.p.as_ref().unwrap(), WeightMode::SteffensenNormalized).unwrap();
    }
}

#[test]
fn generated_instances_evaluate() {
    let c = FuzzConfig::new(11, 50);
    for t in TheoremId::ALL {
        for trial in 0..50 {
            let inst = generate(&c, t, trial);
            let out = check(&inst, t, c.tolerance()).unwrap();
            assert!(
                matches!(out, CheckOutcome::Pass(_)),
                "{t} trial {trial}: {out:?}"
            );
        }
    }
}

#[test]
fn corrupted_weights_are_hypothesis_errors() {
    let spec = FunctionSpec::power(2, 0.0, 4.0).unwrap();
    let inst = Instance::new(spec, vec![1.0, 2.0, 3.0]).with_a(vec![-0.5, 1.0, 0.5]);
    let err = check(&inst, TheoremId::Thm6, Tolerance::default()).unwrap_err();
    assert!(matches!(err, Error::HypothesisViolated(_)));
}

#[test]
fn quadratic_equality_is_tight() {
    let spec = FunctionSpec::power(2, 0.0, 4.0).unwrap();
    let inst = Instance::new(spec, vec![0.5, 1.0, 3.0]).with_a(vec![0.3, -0.1, 0.8]);
    let out = check(&inst, TheoremId::Thm6, Tolerance::default()).unwrap();
    assert!(out.report().slack.abs() <= 1e-12);
}

fn printed_instance() -> Instance {
    let spec = FunctionSpec::power(2, 0.0, 4.0).unwrap();
    let mut inst = Instance::new(spec, vec![0.3, 1.7, 2.2, 3.9, 0.8])
        .with_a(vec![0.1, 0.3, 0.2, 0.15, 0.25])
        .with_class(ConvexityClass::PhiConvex);
    inst.error_scale = Some(2.5);
    inst
}

#[test]
fn printed_variant_shrinks_to_two_points() {
    let tol = Tolerance::default();
    let inst = printed_instance();
    let CheckOutcome::Violation(cex) = check(&inst, TheoremId::Thm13Printed, tol).unwrap() else {
        panic!("planted instance should violate");
    };
    let small = shrink(*cex, tol);
    assert_eq!(small.instance.x.len(), 2);
    assert!(small.shrink_steps >= 3);
    // stored instance reproduces the violation exactly
    let again = check(&small.instance, TheoremId::Thm13Printed, tol).unwrap();
    assert_eq!(again.report().slack, -small.violation);
    let back = Instance::from_json(&small.instance.to_json()).unwrap();
    assert_eq!(back, small.instance);
}

#[test]
fn shrink_keeps_steffensen_validity() {
    // Drop points from a Steffensen path and check validity directly.
    let w = [0.6, -0.4, 0.7, -0.3, 0.4];
    for i in 0..w.len() {
        let d = shrink_support::drop(&w, i);
        assert_eq!(d.len(), 4);
        validate(&d, WeightMode::Steffensen).unwrap();
    }
}

mod shrink_support {
    pub fn drop(w: &[f64], i: usize) -> Vec<f64> {
        super::super::shrink::drop_path_for_tests(w, i)
    }
}

#[test]
fn sweep_examples() {
    let spec = FunctionSpec::power(2, 0.0, 2.0).unwrap();
    let inst = Instance::new(spec, vec![0.0, 2.0])
        .with_a(vec![0.5, 0.5])
        .with_class(ConvexityClass::Superquadratic);
    let tol = Tolerance::default();
    let rows = sweep_lambda(&inst, TheoremId::Thm16, 5, tol).unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[4].t, 1.0);
    assert_eq!((rows[4].report.mid, rows[4].report.rhs), (Some(0.0), 0.0));
    let unscaled = evaluate(&inst, TheoremId::Thm15, tol).unwrap();
    assert_eq!(rows[0].report.rhs, unscaled.rhs);
    assert!(rows.iter().all(|r| r.report.pass));

    let rows = sweep_lambda(&inst, TheoremId::Thm16, 2, tol).unwrap();
    assert_eq!(rows.iter().map(|r| r.t).collect::<Vec<_>>(), vec![0.0, 1.0]);
    assert!(sweep_lambda(&inst, TheoremId::Thm15, 5, tol).is_err());
}

#[test]
fn probe_examples() {
    let v = monotonicity_probe(&FunctionSpec::power(2, 0.0, 4.0).unwrap(), 1.0, 50).unwrap();
    assert!(v.passed);
    assert_eq!(v.min_d, 0.0);

    let cube = FunctionSpec::power(3, 0.0, 4.0).unwrap();
    let v = monotonicity_probe(&cube, 1.0, 200).unwrap();
    assert!(v.passed, "{v:?}");
    assert!(v.min_d.abs() <= 1e-12);

    let err = monotonicity_probe_scaled(&cube, 10.0, 1.0, 50).unwrap_err();
    assert!(matches!(err, Error::HypothesisViolated(_)));
}

#[test]
fn config_validation() {
    assert!(FuzzConfig::from_json(r#"{"seed":1,"trials":0}"#).is_err());
    assert!(FuzzConfig::from_json(r#"{"seed":1,"trials":3,"n_range":[1,4]}"#).is_err());
    let err = FuzzConfig::from_json("{\"seed\":1,\n\"trails\":3}").unwrap_err();
    assert!(err.to_string().contains("line 2"), "{err}");
    let c =
        FuzzConfig::from_json(r#"{"seed":1,"trials":3,"class_set":["superquadratic"]}"#).unwrap();
    let active = c.active_theorems();
    assert!(active.contains(&TheoremId::Thm3) && active.contains(&TheoremId::Thm15));
    assert!(!active.contains(&TheoremId::Thm7));
}

#[test]
fn small_campaign_is_clean_and_deterministic() {
    let c = cfg(&TheoremId::ALL, 40);
    let a = run_fuzz(&c).unwrap();
    assert!(a.clean(), "{:?}", a.errors);
    let b = run_fuzz(&c).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    let v = &a.variant_findings[&TheoremId::Thm13Printed];
    assert_eq!(v.stats.trials, 40);
}
