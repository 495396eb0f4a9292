use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use swmhd_core::expr::{Assignment, Expr};
use swmhd_core::jet::VectorField;
use swmhd_core::reductions::*;
use swmhd_core::swmhd::{build_system, finite_transformation, generator_names, named_generator, SymmetryCase};

fn defaults(red: &SimilarityReduction) -> Assignment {
    red.values(&Assignment::new()).unwrap()
}

fn system_for(values: &Assignment) -> swmhd_core::swmhd::PdeSystem {
    build_system(values.get("g").unwrap(), values.get("f0").unwrap())
}

#[test]
fn every_ansatz_reduces_consistently() {
    for name in REDUCTION_NAMES {
        let red = SimilarityReduction::get(name).unwrap();
        let v = defaults(&red);
        let r = red.reduce(&system_for(&v), &v, 30, 11).unwrap();
        assert!(r.ansatz_invariant, "{name}");
        assert!(r.consistent, "{name}");
    }
}

#[test]
fn printed_reduced_systems() {
    let agrees = |name: &str| {
        let red = SimilarityReduction::get(name).unwrap();
        let v = defaults(&red);
        red.reduce(&system_for(&v), &v, 30, 3)
            .unwrap()
            .printed
            .iter()
            .map(|p| p.agrees)
            .collect::<Vec<_>>()
    };
    assert_eq!(agrees("X2"), vec![true]);
    assert_eq!(agrees("X1+a2X2"), vec![true]);
    assert_eq!(agrees("X2+z2Z2"), vec![true]);
    // full display right, simplified display wrong
    assert_eq!(agrees("Z1"), vec![true, false]);
    assert_eq!(agrees("X1"), vec![false]);
}

#[test]
fn zeta_ansatz_needs_the_time_translation() {
    let mut red = SimilarityReduction::get("X2+z2Z2").unwrap();
    let v = defaults(&red);
    let sys = system_for(&v);
    assert!(red.ansatz_invariance(&sys, 20, 1).unwrap().passed);
    red.generator = VectorField::combination([
        (Expr::one(), &named_generator("X2").unwrap()),
        (Expr::symbol("z2"), &named_generator("Z2").unwrap()),
    ]);
    assert!(!red.ansatz_invariance(&sys, 20, 1).unwrap().passed);
    assert!(matches!(red.reduce(&sys, &v, 20, 1), Err(ReductionError::NotInvariant { .. })));
}

#[test]
fn parameter_preconditions() {
    let x3 = SimilarityReduction::get("X3").unwrap();
    assert!(matches!(
        x3.values(&Assignment::from([("f0", 1.0)])),
        Err(ReductionError::Parameter(_))
    ));
    let dd = SimilarityReduction::get("X1+a2X2").unwrap();
    assert!(dd.values(&Assignment::from([("u0", 0.5), ("a0", 0.5)])).is_err());
    let z2 = SimilarityReduction::get("Z2").unwrap();
    assert!(z2.values(&Assignment::from([("f0", 0.0)])).is_err());
}

#[test]
fn stationary_and_constant_solutions() {
    for name in ["X2", "X3"] {
        let red = SimilarityReduction::get(name).unwrap();
        let v = defaults(&red);
        let sol = red.closed_form_solution(&v, FormKind::Printed).unwrap();
        let pts = sol.sample(100, &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(pts.len(), 100);
        let r = residual_check(&sol, &system_for(&v), &pts).unwrap();
        assert!(r.max() <= 1e-10, "{name}: {:?}", r);
    }
    // rest state: every term carries a derivative or a factor u, v
    let red = SimilarityReduction::get("X2").unwrap();
    let v = red.values(&Assignment::from([("u0", 0.0), ("v0", 0.0)])).unwrap();
    let sol = red.closed_form_solution(&v, FormKind::Corrected).unwrap();
    let pts = sol.sample(20, &mut ChaCha8Rng::seed_from_u64(4));
    assert_eq!(residual_check(&sol, &system_for(&v), &pts).unwrap().max(), 0.0);
}

#[test]
fn closed_form_reports() {
    let expect_corrected = ["Z2", "Z3", "X10+z2Z2", "X10+z3Z3", "X2+a10X10+z2Z2"];
    for name in expect_corrected {
        let red = SimilarityReduction::get(name).unwrap();
        let rep = closed_form_report(&red, &defaults(&red), 100, 1e-8, 7).unwrap();
        assert!(rep.corrected_form_used, "{name}");
        assert!(rep.passed(), "{name}: {rep:?}");
        assert!(rep.corrected_residual.iter().all(|r| *r <= 1e-8), "{name}");
        assert!(!rep.delta.is_empty());
        // oracle: the reduced system integrated from the form's own data
        assert!(rep.ode_deviation_corrected.unwrap() < 1e-6, "{name}");
        assert!(rep.ode_deviation_printed.unwrap() > 1e-3, "{name}");
        let json = serde_json::to_value(&rep).unwrap();
        for key in ["case", "params", "per_equation_max_residual", "status", "corrected_form_used"] {
            assert!(json.get(key).is_some());
        }
    }
    let red = SimilarityReduction::get("X2").unwrap();
    let rep = closed_form_report(&red, &defaults(&red), 100, 1e-10, 7).unwrap();
    assert_eq!(rep.status, "printed form passes");
}

#[test]
fn walls_are_reported() {
    let red = SimilarityReduction::get("Z3").unwrap();
    let v = red.values(&Assignment::from([("f0", 1.0)])).unwrap();
    let sol = red.closed_form_solution(&v, FormKind::Corrected).unwrap();
    assert!(matches!(sol.eval(PI / 2.0, 0.3), Err(ReductionError::Wall { .. })));
    assert!(sol.eval(0.3, 0.3).is_ok());
}

#[test]
fn invariant_surface_checks() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for name in ["X2", "X3", "Z2", "Z3", "X10+z2Z2", "X10+z3Z3", "X2+a10X10+z2Z2"] {
        let red = SimilarityReduction::get(name).unwrap();
        let sol = red.closed_form_solution(&defaults(&red), FormKind::Corrected).unwrap();
        let r = invariant_surface_check(&red.generator, &sol, 50, 1e-8, &mut rng).unwrap();
        assert!(r.passed, "{name}: {r:?}");
    }
    // a time-dependent solution is not invariant under time translation
    let red = SimilarityReduction::get("X2").unwrap();
    let sol = red.closed_form_solution(&defaults(&red), FormKind::Corrected).unwrap();
    let x1 = named_generator("X1").unwrap();
    assert!(!invariant_surface_check(&x1, &sol, 50, 1e-8, &mut rng).unwrap().passed);

    // the zeta ansatz with an arbitrary profile H(zeta)
    let red = SimilarityReduction::get("X2+z2Z2").unwrap();
    let v = defaults(&red);
    let zeta = &red.variable_def;
    let profile = Expr::one() + zeta * zeta / Expr::int(10);
    let mut fields = red.ansatz.clone();
    for f in fields.iter_mut() {
        *f = f.substitute_one("H", &profile).unwrap();
    }
    let sol = Solution {
        reduction: red.name.to_string(),
        kind: FormKind::Corrected,
        fields,
        values: v,
        walls: vec![],
        window: (0.0, 3.0),
    };
    assert!(invariant_surface_check(&red.generator, &sol, 50, 1e-8, &mut rng).unwrap().passed);
}

#[test]
fn symmetries_map_solutions_to_solutions() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let cases = [
        (SymmetryCase::Full, vec!["X2", "Z2", "Z3", "X10+z2Z2", "X10+z3Z3", "X2+a10X10+z2Z2"]),
        (SymmetryCase::Gravity, vec!["X3"]),
    ];
    for (case, names) in cases {
        for name in names {
            let red = SimilarityReduction::get(name).unwrap();
            let v = defaults(&red);
            let sys = system_for(&v);
            let sol = red.closed_form_solution(&v, FormKind::Corrected).unwrap();
            for g in generator_names(case) {
                let ft = finite_transformation(g, 0.3).unwrap();
                let moved = sol.transform(&ft).unwrap();
                let pts = moved.sample(30, &mut rng);
                assert!(pts.len() >= 20, "{name} {g}");
                let r = residual_check(&moved, &sys, &pts).unwrap();
                assert!(r.max() <= 1e-7, "{name} under {g}: {r:?}");
            }
        }
    }
}

#[test]
fn z2_and_z3_families_differ_by_a_quarter_period() {
    let v = SimilarityReduction::get("Z2").unwrap().values(&Assignment::new()).unwrap();
    assert!(phase_shift_error(&v, PI / 2.0, 50, 3).unwrap() < 1e-10);
    assert!(phase_shift_error(&v, PI / 4.0, 50, 3).unwrap() > 1e-2);
}

#[test]
fn reference_runs() {
    let cfg = OdeConfig::default();
    let fig1 = reference_run("fig1").unwrap().integrate(&cfg).unwrap();
    assert!(fig1.status.is_completed());
    assert_eq!(fig1.s.len(), 501);
    assert!(fig1.y.iter().all(|y| y[0] > 0.0));

    let sonic = reference_run("fig1-sonic").unwrap().integrate(&cfg).unwrap();
    match sonic.status {
        OdeStatus::WallHit { ref guard, at } => {
            assert_eq!(guard, "sonic point");
            assert!(at > 0.0 && at < 0.2);
        }
        ref other => panic!("{other:?}"),
    }

    let fig2 = reference_run("fig2").unwrap();
    let red = SimilarityReduction::get(fig2.reduction).unwrap();
    let v = red.values(&fig2.values).unwrap();
    let mut at = v.clone();
    at.set("zeta", fig2.start);
    at.set("H", fig2.initial[0]);
    assert!(red.rhs[0].eval(&at).unwrap().abs() < 1e-15);
    let traj = fig2.integrate(&cfg).unwrap();
    assert!(traj.status.is_completed());
    assert_eq!(traj.s.first(), Some(&-3.0));
    assert!(traj.y.iter().all(|y| y[0] > 0.0));

    let z1 = reference_run("z1").unwrap();
    let traj = z1.integrate(&cfg).unwrap();
    assert!(traj.status.is_completed());
    assert!(traj.y.iter().all(|y| (y[3] - z1.initial[3]).abs() <= 1e-9));

    for id in ["fig1", "fig2", "fig3", "z1"] {
        let run = reference_run(id).unwrap();
        for c in run.self_convergence(&cfg).unwrap() {
            assert!(c.passed() && c.drift <= 1e-6, "{id}: {c:?}");
        }
        let a = run.integrate(&cfg).unwrap().to_csv();
        let b = run.integrate(&cfg).unwrap().to_csv();
        assert_eq!(a, b);
    }
}

#[test]
fn fig3_trajectory_tracks_the_closed_form() {
    let run = reference_run("fig3").unwrap();
    let red = SimilarityReduction::get(run.reduction).unwrap();
    let sol = red.closed_form_solution(&red.values(&run.values).unwrap(), FormKind::Corrected).unwrap();
    let traj = run.integrate(&OdeConfig::with_tolerances(1e-10, 1e-12)).unwrap();
    assert!(traj.status.is_completed());
    for (t, y) in traj.s.iter().zip(&traj.y) {
        let exact = sol.eval(*t, 0.0).unwrap();
        for (a, b) in y.iter().zip(exact) {
            assert!((a - b).abs() <= 1e-7 * (1.0 + b.abs()), "t = {t}");
        }
    }
}
