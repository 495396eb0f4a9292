//! Canned numerical experiments shared by the tests and the command line.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use super::{
    compare_to_closed_form, convergence_table, run_until, state_difference, Boundary, ConvergenceRow, ErrorReport,
    FvError, GridState, Physics, SchemeConfig,
};
use crate::expr::Assignment;
use crate::reductions::{FormKind, ReductionError, SimilarityReduction, Solution};
use crate::swmhd::finite_transformation;

#[derive(Debug, Error)]
pub enum StudyError {
    #[error(transparent)]
    Fv(#[from] FvError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("{0}")]
    Setup(String),
}

/// Closed form of a reduction as a plain `(t, x) -> fields` function.
pub fn closed_form(name: &str, overrides: &Assignment, kind: FormKind) -> Result<Solution, StudyError> {
    let red = SimilarityReduction::get(name)?;
    let values = red.values(overrides)?;
    Ok(red.closed_form_solution(&values, kind)?)
}

fn exact(sol: &Solution) -> impl Fn(f64, f64) -> [f64; 5] + '_ {
    // callers stay inside the window, so a wall here is a setup bug
    move |t, x| sol.eval(t, x).expect("closed form evaluated on a wall")
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceStudy {
    pub case: String,
    pub t_end: f64,
    pub rows: Vec<ConvergenceRow>,
    pub min_order: f64,
    pub steps: Vec<usize>,
}

impl ConvergenceStudy {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cells,steps,l1_error,order\n");
        for (r, s) in self.rows.iter().zip(&self.steps) {
            let order = r.order.map(|o| format!("{o:.6}")).unwrap_or_default();
            out.push_str(&format!("{},{},{:.16e},{}\n", r.cells, s, r.l1_error, order));
        }
        out
    }
}

/// The X2 (uniform rotating) solution on the periodic unit interval, run
/// from `t = 0` to `t_end` at each resolution.
pub fn x2_convergence(
    cells: &[usize],
    t_end: f64,
    phys: Physics,
    cfg: &SchemeConfig,
) -> Result<ConvergenceStudy, StudyError> {
    let sol = closed_form("X2", &Assignment::from([("g", phys.g), ("f0", phys.f0)]), FormKind::Printed)?;
    let f = exact(&sol);
    let mut rows = Vec::new();
    let mut steps = Vec::new();
    for &n in cells {
        let init = GridState::from_fn(n, 0.0, 1.0, Boundary::Periodic, 0.0, |x| f(0.0, x))?;
        let run = run_until(&init, t_end, phys, cfg, &[])?;
        rows.push((n, compare_to_closed_form(&run.state, &f, None).l1_total()));
        steps.push(run.steps);
    }
    let rows = convergence_table(&rows);
    let min_order = rows.iter().filter_map(|r| r.order).fold(f64::INFINITY, f64::min);
    Ok(ConvergenceStudy {
        case: "X2".into(),
        t_end,
        rows,
        min_order,
        steps,
    })
}

/// Smooth periodic data on `[0, 1]` with every field varying.
pub fn smooth_profile(x: f64) -> [f64; 5] {
    let (s, c) = ((2.0 * PI * x).sin(), (2.0 * PI * x).cos());
    [1.0 + 0.2 * s, 0.1 * s, 0.05 * c, 0.5 + 0.1 * c, 0.2 + 0.1 * s]
}

#[derive(Debug, Clone, Serialize)]
pub struct GalileanReport {
    pub g: f64,
    pub f0: f64,
    pub cells: usize,
    pub epsilon: f64,
    pub t_end: f64,
    /// L1 distance between evolve and boost-evolve-unboost.
    pub boost_difference: f64,
    /// L1 distance between the plain run and a `refine`-times finer run.
    pub discretization_error: f64,
    pub band: f64,
    pub within_band: bool,
}

/// Boost by the Galilean generator, evolve, boost back, and compare with the
/// plain evolution. `epsilon * t_end` must be a whole number of cells.
pub fn galilean_test(
    phys: Physics,
    cells: usize,
    epsilon: f64,
    t_end: f64,
    refine: usize,
    cfg: &SchemeConfig,
) -> Result<GalileanReport, StudyError> {
    let params = Assignment::from([("g", phys.g), ("f0", phys.f0)]);
    let init = GridState::from_fn(cells, 0.0, 1.0, Boundary::Periodic, 0.0, smooth_profile)?;
    let plain = run_until(&init, t_end, phys, cfg, &[])?.state;

    let fine_init = GridState::from_fn(cells * refine, 0.0, 1.0, Boundary::Periodic, 0.0, smooth_profile)?;
    let fine = run_until(&fine_init, t_end, phys, cfg, &[])?.state.coarsened(refine)?;
    let discretization_error = state_difference(&plain, &fine);

    let boost = finite_transformation("X5", epsilon).map_err(|e| StudyError::Setup(e.to_string()))?;
    let unboost = finite_transformation("X5", -epsilon).map_err(|e| StudyError::Setup(e.to_string()))?;
    let boosted = init.transformed(&boost, &params)?;
    let evolved = run_until(&boosted, t_end, phys, cfg, &[])?.state;
    let back = evolved.transformed(&unboost, &params)?;
    let boost_difference = state_difference(&plain, &back);
    let band = 3.0;
    Ok(GalileanReport {
        g: phys.g,
        f0: phys.f0,
        cells,
        epsilon,
        t_end,
        boost_difference,
        discretization_error,
        band,
        within_band: boost_difference <= band * discretization_error,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossValidation {
    pub case: String,
    pub cells: usize,
    pub dx: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub window: (f64, f64),
    pub error: ErrorReport,
}

/// Samples a closed form at `t_start` on `domain` (outflow boundaries), runs
/// for `duration` and compares on `window`, which should sit far enough
/// inside the domain that boundary effects have not reached it.
pub fn cross_validate(
    sol: &Solution,
    cells: usize,
    domain: (f64, f64),
    t_start: f64,
    duration: f64,
    window: (f64, f64),
    phys: Physics,
    cfg: &SchemeConfig,
) -> Result<CrossValidation, StudyError> {
    let f = exact(sol);
    for t in [t_start, t_start + duration] {
        for x in [domain.0, domain.1] {
            if sol.wall_distance(t, x) < 1e-6 {
                return Err(StudyError::Setup(format!("closed form hits a wall at t = {t}, x = {x}")));
            }
        }
    }
    let init = GridState::from_fn(cells, domain.0, domain.1, Boundary::Outflow, t_start, |x| f(t_start, x))?;
    let run = run_until(&init, t_start + duration, phys, cfg, &[])?;
    Ok(CrossValidation {
        case: sol.reduction.clone(),
        cells,
        dx: init.dx,
        t_start,
        t_end: t_start + duration,
        window,
        error: compare_to_closed_form(&run.state, &f, Some(window)),
    })
}
