use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;
use swmhd_core::expr::Assignment;
use swmhd_core::fvsolver::studies::{
    closed_form, cross_validate, galilean_test, smooth_profile, x2_convergence, StudyError,
};
use swmhd_core::fvsolver::{run_until, Boundary, FvError, GridState, Physics, SchemeConfig};
use swmhd_core::liealg::{
    classify_branch, expected_tables, invariance_check, verify_table, BasisAlgebra, CellStatus, GenericElement,
    LieError, TableError, TableReport,
};
use swmhd_core::reductions::{
    closed_form_report, reference_run, OdeConfig, OdeStatus, ReductionError, SimilarityReduction, FormKind,
    REDUCTION_NAMES, REFERENCE_RUNS,
};
use swmhd_core::swmhd::{build_system, generator_names, verify_case, SwmhdConfig, SwmhdError, SymmetryCase};

use crate::config::RunConfig;
use crate::output::Output;
use crate::CliError;

impl From<SwmhdError> for CliError {
    fn from(e: SwmhdError) -> Self {
        match e {
            SwmhdError::Expr(x) => CliError::Numerical(x.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<LieError> for CliError {
    fn from(e: LieError) -> Self {
        match e {
            LieError::ZeroElement | LieError::BadIndex(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<TableError> for CliError {
    fn from(e: TableError) -> Self {
        CliError::Mismatch(e.to_string())
    }
}

impl From<ReductionError> for CliError {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::Unknown(_) | ReductionError::Parameter(_) | ReductionError::Dimension { .. } => {
                CliError::Config(e.to_string())
            }
            ReductionError::NotInvariant { .. } | ReductionError::NoClosedForm(_) => CliError::Mismatch(e.to_string()),
            ReductionError::Wall { .. } | ReductionError::Expr(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<FvError> for CliError {
    fn from(e: FvError) -> Self {
        match e {
            FvError::Config(s) => CliError::Config(s),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<StudyError> for CliError {
    fn from(e: StudyError) -> Self {
        match e {
            StudyError::Fv(x) => x.into(),
            StudyError::Reduction(x) => x.into(),
            StudyError::Setup(s) => CliError::Config(s),
        }
    }
}

fn case_of(cfg: &RunConfig, default: SymmetryCase) -> Result<SymmetryCase, CliError> {
    match &cfg.case {
        Some(c) => Ok(c.parse()?),
        None => Ok(default),
    }
}

fn overrides(cfg: &RunConfig) -> Assignment {
    let mut a = Assignment::new();
    if let Some(g) = cfg.g {
        a.set("g", g);
    }
    if let Some(f0) = cfg.f0 {
        a.set("f0", f0);
    }
    for (k, v) in &cfg.params {
        a.set(k, *v);
    }
    a
}

fn table_reports(case: SymmetryCase, f0s: &[f64], tol: f64) -> Result<Vec<TableReport>, CliError> {
    let alg = BasisAlgebra::for_case(case);
    expected_tables(case)
        .iter()
        .map(|d| Ok(verify_table(&alg, d, &[0.1, 0.7], f0s, tol)?))
        .collect()
}

fn table_summary(r: &TableReport) -> String {
    format!(
        "{} ({}): {} match, {} annotated, {} mismatch",
        r.table,
        r.case,
        r.count(CellStatus::Match),
        r.count(CellStatus::AnnotatedTypo),
        r.cells.len() - r.count(CellStatus::Match) - r.count(CellStatus::AnnotatedTypo)
    )
}

pub fn tables(mut cfg: RunConfig) -> Result<(), CliError> {
    let case = case_of(&cfg, SymmetryCase::Coriolis)?;
    cfg.case = Some(case.id().into());
    let tol = *cfg.tol.get_or_insert(1e-10);
    let f0s = match cfg.f0 {
        Some(f) => vec![f],
        None => vec![1.0, 0.7],
    };
    let out = Output::new(&cfg)?;
    let reports = table_reports(case, &f0s, tol)?;
    let md: String = reports.iter().map(|r| r.to_markdown() + "\n").collect();
    out.text(&format!("tables-{}.md", case.id()), &md)?;
    out.json(&format!("tables-{}.json", case.id()), &reports)?;
    let mut bad = Vec::new();
    for r in &reports {
        say!("{}", table_summary(r));
        if !r.acceptable() {
            bad.push(r.table.clone());
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Mismatch(format!("unannotated differences in {}", bad.join(", "))))
    }
}

fn swmhd_config(cfg: &RunConfig, case: SymmetryCase) -> Result<SwmhdConfig, CliError> {
    let (g0, f00) = case.default_params();
    let c = SwmhdConfig {
        case,
        g: cfg.g.unwrap_or(g0),
        f0: cfg.f0.unwrap_or(f00),
        seed: cfg.seed.unwrap_or(42),
        trials: cfg.trials.unwrap_or(50),
        tol: cfg.tol.unwrap_or(1e-9),
    };
    if !case.accepts(c.g, c.f0) {
        return Err(CliError::Config(format!(
            "g = {}, f0 = {} does not belong to case {}",
            c.g, c.f0, case
        )));
    }
    Ok(c)
}

#[derive(Serialize)]
struct VerifyOutcome {
    case: String,
    basis_passed: bool,
    controls_failed: bool,
    report: swmhd_core::swmhd::CaseReport,
}

fn run_verify(cfg: &RunConfig, case: SymmetryCase, include: &[String]) -> Result<VerifyOutcome, CliError> {
    let config = swmhd_config(cfg, case)?;
    let report = verify_case(&config, include)?;
    let n = generator_names(case).len();
    Ok(VerifyOutcome {
        case: case.id().into(),
        basis_passed: report.generators[..n].iter().all(|v| v.passed),
        controls_failed: report.controls.iter().all(|v| !v.passed),
        report,
    })
}

pub fn verify(mut cfg: RunConfig, include: &[String]) -> Result<(), CliError> {
    let case = case_of(&cfg, SymmetryCase::Full)?;
    cfg.case = Some(case.id().into());
    let sc = swmhd_config(&cfg, case)?;
    (cfg.g, cfg.f0, cfg.seed, cfg.trials, cfg.tol) = (Some(sc.g), Some(sc.f0), Some(sc.seed), Some(sc.trials), Some(sc.tol));
    let out = Output::new(&cfg)?;
    let outcome = run_verify(&cfg, case, include)?;
    let mut text = String::new();
    let n = generator_names(case).len();
    for (k, v) in outcome.report.generators.iter().enumerate() {
        let role = if k < n { "generator" } else { "included" };
        let _ = writeln!(text, "{role} {}: {}", v.generator, verdict(v));
    }
    for v in &outcome.report.controls {
        let _ = writeln!(text, "control {}: {}", v.generator, verdict(v));
    }
    let passes = outcome.report.generators[..n].iter().filter(|v| v.passed).count();
    let _ = writeln!(text, "{passes}/{n} generators pass; controls all fail: {}", outcome.controls_failed);
    out.text(&format!("verify-{}.txt", case.id()), &text)?;
    out.json(&format!("verify-{}.json", case.id()), &outcome)?;
    if out.has_dir() {
        say_raw!("{text}");
    }
    if outcome.basis_passed && outcome.controls_failed {
        Ok(())
    } else {
        Err(CliError::Mismatch(format!("case {case}: expected verdicts not reproduced")))
    }
}

fn verdict(v: &swmhd_core::swmhd::SymmetryVerdict) -> String {
    match &v.witness {
        None if v.passed => "pass".into(),
        Some(w) => format!("FAIL (equation {}, residual {:.3e})", w.equation, w.value),
        None => "FAIL".into(),
    }
}

pub fn optimal(mut cfg: RunConfig, element: GenericElement, invariance: Option<usize>) -> Result<(), CliError> {
    let class = classify_branch(&element).map_err(|e| match e {
        LieError::ZeroElement => CliError::Config("all coefficients are zero; give at least one of --a1 … --z3".into()),
        other => other.into(),
    })?;
    let f0 = *cfg.f0.get_or_insert(1.0);
    let seed = *cfg.seed.get_or_insert(42);
    let out = Output::new(&cfg)?;
    let inv = match invariance {
        Some(n) => Some(invariance_check(&BasisAlgebra::for_case(SymmetryCase::Full), n, f0, seed)?),
        None => None,
    };
    let mut text = format!(
        "branch: {}\nbranch form: {}\nrepresentative: {{{}}}\nlisted: {}\n",
        class.branch, class.branch_form, class.representative, class.listed
    );
    if let Some(r) = &inv {
        let _ = writeln!(
            text,
            "invariance ({} samples): a1 drift {:.3e}, z1 drift {:.3e}, branch changes {}, passed {}",
            r.samples, r.max_a1_drift, r.max_z1_drift, r.branch_changes, r.passed
        );
    }
    out.text("optimal.txt", &text)?;
    out.json("optimal.json", &serde_json::json!({ "element": element, "classification": class, "invariance": inv }))?;
    if out.has_dir() {
        say_raw!("{text}");
    }
    match inv {
        Some(r) if !r.passed => Err(CliError::Mismatch("adjoint invariance failed".into())),
        _ => Ok(()),
    }
}

fn reduction_of(cfg: &RunConfig) -> Result<SimilarityReduction, CliError> {
    let name = cfg
        .case
        .as_deref()
        .ok_or_else(|| CliError::Config(format!("--case is required (one of {})", REDUCTION_NAMES.join(", "))))?;
    Ok(SimilarityReduction::get(name)?)
}

pub fn reduce(mut cfg: RunConfig) -> Result<(), CliError> {
    let red = reduction_of(&cfg)?;
    let seed = *cfg.seed.get_or_insert(42);
    let trials = *cfg.trials.get_or_insert(20);
    let tol = *cfg.tol.get_or_insert(1e-8);
    let values = red.values(&overrides(&cfg))?;
    let sys = build_system(values.get("g").unwrap_or(1.0), values.get("f0").unwrap_or(0.0));
    let out = Output::new(&cfg)?;
    let reduced = red.reduce(&sys, &values, trials, seed)?;
    let report = match red.closed_form() {
        Ok(_) => Some(closed_form_report(&red, &values, 100, tol, seed)?),
        Err(_) => None,
    };
    let mut text = reduced.to_text();
    if let Some(r) = &report {
        let _ = writeln!(text, "closed form: {}", r.status);
        let _ = writeln!(text, "  max residual per equation: {:?}", r.per_equation_max_residual);
        for d in &r.delta {
            let _ = writeln!(text, "  delta: {d}");
        }
    }
    let stem = file_stem(red.name);
    out.text(&format!("reduce-{stem}.txt"), &text)?;
    out.json(
        &format!("reduce-{stem}.json"),
        &serde_json::json!({ "reduced": reduced, "closed_form": report }),
    )?;
    if out.has_dir() {
        say_raw!("{text}");
    }
    if !reduced.consistent || !reduced.ansatz_invariant {
        return Err(CliError::Mismatch(format!("reduction {} is not consistent", red.name)));
    }
    match report {
        Some(r) if !r.passed() => Err(CliError::Mismatch(format!("closed form of {} fails", red.name))),
        _ => Ok(()),
    }
}

fn file_stem(name: &str) -> String {
    name.replace('+', "_")
}

pub fn integrate(mut cfg: RunConfig) -> Result<(), CliError> {
    let case = cfg.case.clone().unwrap_or_else(|| "fig1".into());
    let id = if REFERENCE_RUNS.contains(&case.as_str()) {
        case.clone()
    } else {
        REFERENCE_RUNS
            .iter()
            .find(|id| reference_run(id).map(|r| r.reduction == case).unwrap_or(false))
            .ok_or_else(|| {
                CliError::Config(format!(
                    "no reference run for `{case}` (runs: {}; reductions with runs: X1+a2X2, X2+z2Z2, X2+a10X10+z2Z2, Z1)",
                    REFERENCE_RUNS.join(", ")
                ))
            })?
            .to_string()
    };
    let mut run = reference_run(&id)?;
    run.values.extend(&overrides(&cfg));
    let defaults = OdeConfig::default();
    let ode = OdeConfig::with_tolerances(*cfg.rtol.get_or_insert(defaults.rtol), *cfg.atol.get_or_insert(defaults.atol));
    cfg.case = Some(case);
    let out = Output::new(&cfg)?;
    let traj = run.integrate(&ode)?;
    out.text(&format!("integrate-{id}.csv"), &traj.to_csv())?;
    let summary = format!(
        "{id}: {} on {} ({} steps, {} rejected), status {:?}",
        run.reduction, traj.variable, traj.steps, traj.rejected, traj.status
    );
    say!("{summary}");
    match traj.status {
        OdeStatus::Completed => Ok(()),
        other => Err(CliError::Numerical(format!("{id}: {other:?}"))),
    }
}

fn physics(cfg: &mut RunConfig, g: f64, f0: f64) -> Physics {
    Physics {
        g: *cfg.g.get_or_insert(g),
        f0: *cfg.f0.get_or_insert(f0),
    }
}

fn scheme(cfg: &mut RunConfig) -> Result<SchemeConfig, CliError> {
    let s = SchemeConfig {
        cfl: *cfg.cfl.get_or_insert(0.4),
        ..SchemeConfig::default()
    };
    s.validate()?;
    Ok(s)
}

pub fn simulate(mut cfg: RunConfig) -> Result<(), CliError> {
    let init = cfg.init.get_or_insert_with(|| "x2-closed-form".into()).clone();
    match init.as_str() {
        "galilean" => {
            let phys = physics(&mut cfg, 1.0, 0.0);
            let cells = *cfg.cells.get_or_insert(200);
            let sch = scheme(&mut cfg)?;
            let out = Output::new(&cfg)?;
            let r = galilean_test(phys, cells, 0.3, 1.0 / 3.0, 4, &sch)?;
            out.json("galilean.json", &r)?;
            say!(
                "f0 = {}: boost difference {:.3e}, discretization error {:.3e}, within {}x band: {}",
                r.f0, r.boost_difference, r.discretization_error, r.band, r.within_band
            );
            if r.within_band == (r.f0 == 0.0) {
                Ok(())
            } else {
                Err(CliError::Mismatch("boost test outcome differs from expectation".into()))
            }
        }
        "rotating-closed-form" => {
            let phys = physics(&mut cfg, 1.0, 1.0);
            let cells = *cfg.cells.get_or_insert(400);
            let duration = *cfg.t_end.get_or_insert(0.5);
            cfg.params.entry("z2".into()).or_insert(0.5);
            let sch = scheme(&mut cfg)?;
            let out = Output::new(&cfg)?;
            let sol = closed_form("X2+a10X10+z2Z2", &overrides(&cfg), FormKind::Corrected)?;
            let t0 = PI / (2.0 * phys.f0);
            let cv = cross_validate(&sol, cells, (-3.0, 3.0), t0, duration, (-1.0, 1.0), phys, &sch)?;
            out.json("rotating-closed-form.json", &cv)?;
            say!(
                "n = {}, dx = {:.4e}: L1 error {:.3e} on [{}, {}]",
                cv.cells,
                cv.dx,
                cv.error.l1_total(),
                cv.window.0,
                cv.window.1
            );
            Ok(())
        }
        "x2-closed-form" if cfg.convergence.is_some() => {
            let phys = physics(&mut cfg, 1.0, 1.0);
            let t_end = *cfg.t_end.get_or_insert(1.0);
            let sch = scheme(&mut cfg)?;
            let cells = cfg.convergence.clone().unwrap();
            if cells.len() < 2 {
                return Err(CliError::Config("--convergence needs at least two resolutions".into()));
            }
            let out = Output::new(&cfg)?;
            let study = x2_convergence(&cells, t_end, phys, &sch)?;
            out.text("convergence-x2.csv", &study.to_csv())?;
            out.json("convergence-x2.json", &study)?;
            say!("minimum observed order {:.4}", study.min_order);
            if study.min_order >= 0.8 {
                Ok(())
            } else {
                Err(CliError::Mismatch(format!("observed order {:.3} < 0.8", study.min_order)))
            }
        }
        _ if cfg.convergence.is_some() => Err(CliError::Config(
            "--convergence is only available with --init x2-closed-form".into(),
        )),
        "x2-closed-form" | "smooth" | "riemann" | "constant" => {
            let phys = physics(&mut cfg, 1.0, if init == "riemann" { 0.0 } else { 1.0 });
            let n = *cfg.cells.get_or_insert(200);
            let t_end = *cfg.t_end.get_or_insert(1.0);
            let sch = scheme(&mut cfg)?;
            let out = Output::new(&cfg)?;
            let state = match init.as_str() {
                "x2-closed-form" => {
                    let sol = closed_form("X2", &overrides(&cfg), FormKind::Printed)?;
                    GridState::from_fn(n, 0.0, 1.0, Boundary::Periodic, 0.0, |x| {
                        sol.eval(0.0, x).expect("the X2 solution has no walls")
                    })?
                }
                "smooth" => GridState::from_fn(n, 0.0, 1.0, Boundary::Periodic, 0.0, smooth_profile)?,
                "riemann" => GridState::from_fn(n, 0.0, 1.0, Boundary::Periodic, 0.0, |x| {
                    [if (0.3..0.6).contains(&x) { 2.0 } else { 1.0 }, 0.0, 0.0, 0.0, 0.0]
                })?,
                _ => GridState::from_fn(n, 0.0, 1.0, Boundary::Periodic, 0.0, |_| [1.2, 0.0, 0.0, 0.7, 0.5])?,
            };
            let m0 = state.mass();
            let run = run_until(&state, t_end, phys, &sch, &[])?;
            out.text(&format!("simulate-{init}-{n}.csv"), &run.state.to_csv())?;
            say!(
                "{init}: {} steps to t = {}, relative mass change {:.3e}",
                run.steps,
                run.state.time,
                (run.state.mass() - m0).abs() / m0
            );
            Ok(())
        }
        other => Err(CliError::Config(format!(
            "unknown --init `{other}` (x2-closed-form, rotating-closed-form, smooth, riemann, constant, galilean)"
        ))),
    }
}

#[derive(Debug, Clone, Serialize)]
struct Check {
    area: String,
    item: String,
    passed: bool,
    detail: String,
}

fn check(area: &str, item: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        area: area.into(),
        item: item.into(),
        passed,
        detail: detail.into(),
    }
}

pub fn report(mut cfg: RunConfig) -> Result<(), CliError> {
    let seed = *cfg.seed.get_or_insert(42);
    let out = Output::new(&cfg)?;
    let mut checks = Vec::new();

    for case in SymmetryCase::ALL {
        for r in table_reports(case, &[1.0, 0.7], 1e-10)? {
            checks.push(check("tables", r.table.clone() + " / " + case.id(), r.acceptable(), table_summary(&r)));
        }
    }
    for case in SymmetryCase::ALL {
        let run_cfg = RunConfig {
            seed: Some(seed),
            ..RunConfig::default()
        };
        let o = run_verify(&run_cfg, case, &[])?;
        let passes = o.report.generators.iter().filter(|v| v.passed).count();
        checks.push(check(
            "symmetries",
            case.id(),
            o.basis_passed && o.controls_failed,
            format!("{passes}/{} generators pass, controls fail: {}", o.report.generators.len(), o.controls_failed),
        ));
    }
    let inv = invariance_check(&BasisAlgebra::for_case(SymmetryCase::Full), 100, 1.0, seed)?;
    checks.push(check(
        "optimal system",
        "adjoint invariants",
        inv.passed,
        format!("a1 drift {:.2e}, z1 drift {:.2e}, branch changes {}", inv.max_a1_drift, inv.max_z1_drift, inv.branch_changes),
    ));
    for name in REDUCTION_NAMES {
        let red = SimilarityReduction::get(name)?;
        if red.closed_form().is_err() {
            continue;
        }
        let values = red.values(&Assignment::new())?;
        let r = closed_form_report(&red, &values, 100, 1e-8, seed)?;
        let worst = r.per_equation_max_residual.iter().fold(0.0f64, |m, v| m.max(*v));
        checks.push(check("closed forms", name, r.passed(), format!("{} (max residual {worst:.2e})", r.status)));
    }
    let ode = OdeConfig::default();
    for id in REFERENCE_RUNS {
        let run = reference_run(id)?;
        let traj = run.integrate(&ode)?;
        let expect_wall = id == "fig1-sonic";
        let completed = traj.status == OdeStatus::Completed;
        let drift = if expect_wall {
            0.0
        } else {
            run.self_convergence(&ode)?.iter().map(|c| c.drift).fold(0.0, f64::max)
        };
        checks.push(check(
            "reduced ODEs",
            id,
            completed != expect_wall && drift <= 1e-6,
            if expect_wall {
                format!("{:?} (wall expected)", traj.status)
            } else {
                format!("{:?}, self-convergence drift {drift:.2e}", traj.status)
            },
        ));
    }
    let sch = SchemeConfig::default();
    let study = x2_convergence(&[100, 200, 400, 800], 1.0, Physics { g: 1.0, f0: 1.0 }, &sch)?;
    checks.push(check(
        "finite volumes",
        "X2 convergence",
        study.min_order >= 0.8,
        format!("minimum observed order {:.3}", study.min_order),
    ));
    for f0 in [0.0, 1.0] {
        let r = galilean_test(Physics { g: 1.0, f0 }, 200, 0.3, 1.0 / 3.0, 4, &sch)?;
        checks.push(check(
            "finite volumes",
            format!("Galilean boost, f0 = {f0}"),
            r.within_band == (f0 == 0.0),
            format!("difference {:.2e} vs discretization error {:.2e}", r.boost_difference, r.discretization_error),
        ));
    }

    let mut md = String::from("| area | item | result | detail |\n|---|---|---|---|\n");
    for c in &checks {
        let _ = writeln!(md, "| {} | {} | {} | {} |", c.area, c.item, if c.passed { "pass" } else { "FAIL" }, c.detail);
    }
    out.text("report.md", &md)?;
    out.json("report.json", &checks)?;
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.passed).collect();
    say!("{}/{} checks pass", checks.len() - failed.len(), checks.len());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Mismatch(
            failed.iter().map(|c| format!("{}: {}", c.area, c.item)).collect::<Vec<_>>().join("; "),
        ))
    }
}
