//! First-order finite volumes for the full system: Rusanov fluxes for the
//! conservative part, upwind/central treatment of the `(ha)_x` products,
//! SSP-RK2 in time.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::Assignment;
use crate::reductions::base_point;
use crate::swmhd::FiniteTransformation;

pub mod studies;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FvError {
    #[error("depth {h} <= 0 in cell {cell} at t = {time}")]
    Positivity { cell: usize, h: f64, time: f64 },
    #[error("time step {dt} underflowed at t = {time}")]
    CflUnderflow { dt: f64, time: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    /// Zero-gradient ghost cells.
    Outflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SchemeConfig {
    pub cfl: f64,
    /// Multiplies the wave-speed estimate `|u| + sqrt(g h + a^2)`.
    pub safety: f64,
    pub min_dt: f64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            cfl: 0.4,
            safety: 1.1,
            min_dt: 1e-12,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<(), FvError> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(FvError::Config(format!("cfl must lie in (0, 1), got {}", self.cfl)));
        }
        if self.safety < 1.0 {
            return Err(FvError::Config("safety factor below 1".into()));
        }
        Ok(())
    }
}

/// Per-cell `(h, hu, hv, ha, hb)`.
pub type Cell = [f64; 5];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridState {
    pub x0: f64,
    pub dx: f64,
    pub time: f64,
    pub boundary: Boundary,
    pub q: Vec<Cell>,
}

pub fn to_conserved(p: [f64; 5]) -> Cell {
    let h = p[0];
    [h, h * p[1], h * p[2], h * p[3], h * p[4]]
}

pub fn to_primitive(q: &Cell) -> [f64; 5] {
    let h = q[0];
    [h, q[1] / h, q[2] / h, q[3] / h, q[4] / h]
}

impl GridState {
    /// Samples primitive fields `(h, u, v, a, b)` at cell centres of `[x0, x1]`.
    pub fn from_fn(
        n_cells: usize,
        x0: f64,
        x1: f64,
        boundary: Boundary,
        time: f64,
        f: impl Fn(f64) -> [f64; 5],
    ) -> Result<Self, FvError> {
        if n_cells < 3 || x1 <= x0 {
            return Err(FvError::Config("need at least 3 cells on a nonempty interval".into()));
        }
        let dx = (x1 - x0) / n_cells as f64;
        let q: Vec<Cell> = (0..n_cells).map(|i| to_conserved(f(x0 + (i as f64 + 0.5) * dx))).collect();
        let state = Self {
            x0,
            dx,
            time,
            boundary,
            q,
        };
        state.check_positive()?;
        Ok(state)
    }

    pub fn n_cells(&self) -> usize {
        self.q.len()
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x0 + (i as f64 + 0.5) * self.dx
    }

    pub fn primitive(&self, i: usize) -> [f64; 5] {
        to_primitive(&self.q[i])
    }

    pub fn mass(&self) -> f64 {
        self.q.iter().map(|c| c[0]).sum::<f64>() * self.dx
    }

    fn check_positive(&self) -> Result<(), FvError> {
        match self.q.iter().position(|c| !(c[0] > 0.0)) {
            Some(cell) => Err(FvError::Positivity {
                cell,
                h: self.q[cell][0],
                time: self.time,
            }),
            None => Ok(()),
        }
    }

    /// Cyclic shift by `k` cells (periodic grids).
    pub fn shifted(&self, k: usize) -> Self {
        let n = self.q.len();
        let mut s = self.clone();
        for i in 0..n {
            s.q[(i + k) % n] = self.q[i];
        }
        s
    }

    /// Block averages over `factor` consecutive cells (conserved variables).
    pub fn coarsened(&self, factor: usize) -> Result<Self, FvError> {
        if factor == 0 || self.n_cells() % factor != 0 {
            return Err(FvError::Config(format!("{} cells do not coarsen by {factor}", self.n_cells())));
        }
        let q = self
            .q
            .chunks(factor)
            .map(|block| {
                let mut c = [0.0; 5];
                for cell in block {
                    for m in 0..5 {
                        c[m] += cell[m];
                    }
                }
                c.map(|v| v / factor as f64)
            })
            .collect();
        Ok(Self {
            dx: self.dx * factor as f64,
            q,
            ..self.clone()
        })
    }

    /// Applies a point transformation cell by cell. The map must send the
    /// grid onto itself: a common image time and a uniform shift by a whole
    /// number of cells (any shift needs periodic boundaries).
    pub fn transformed(&self, ft: &FiniteTransformation, params: &Assignment) -> Result<Self, FvError> {
        let n = self.n_cells();
        let mut images = Vec::with_capacity(n);
        for i in 0..n {
            let p = base_point(self.time, self.center(i), &self.primitive(i));
            images.push(ft.apply(&p, params).map_err(|e| FvError::Config(e.to_string()))?);
        }
        let time = images[0][0];
        let shift = (images[0][1] - self.center(0)) / self.dx;
        let k = shift.round();
        let grid_tol = 1e-9 * (1.0 + time.abs());
        let off_grid = images.iter().enumerate().any(|(i, im)| {
            (im[0] - time).abs() > grid_tol || ((im[1] - self.center(i)) / self.dx - k).abs() > 1e-6
        });
        if off_grid || (shift - k).abs() > 1e-6 {
            return Err(FvError::Config(format!("{} does not map the grid onto itself", ft.generator)));
        }
        if k != 0.0 && self.boundary != Boundary::Periodic {
            return Err(FvError::Config("shifting transformations need periodic boundaries".into()));
        }
        let k = (k as i64).rem_euclid(n as i64) as usize;
        let mut q = vec![[0.0; 5]; n];
        for (i, im) in images.iter().enumerate() {
            let mut prim = [0.0; 5];
            prim.copy_from_slice(&im[2..]);
            q[(i + k) % n] = to_conserved(prim);
        }
        let out = Self {
            time,
            q,
            ..self.clone()
        };
        out.check_positive()?;
        Ok(out)
    }

    /// `x,h,u,v,a,b` per cell, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,h,u,v,a,b\n");
        for i in 0..self.n_cells() {
            let p = self.primitive(i);
            let _ = write!(out, "{:.16e}", self.center(i));
            for v in p {
                let _ = write!(out, ",{v:.16e}");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Physics {
    pub g: f64,
    pub f0: f64,
}

fn flux(q: &Cell, g: f64) -> [f64; 5] {
    let [h, hu, hv, ha, hb] = *q;
    let (u, v, a, b) = (hu / h, hv / h, ha / h, hb / h);
    [
        hu,
        hu * u + 0.5 * g * h * h - ha * a,
        hu * v - ha * b,
        0.0,
        h * (u * b - v * a),
    ]
}

fn wave_speed(q: &Cell, g: f64) -> f64 {
    let h = q[0];
    let (u, a) = (q[1] / h, q[3] / h);
    u.abs() + (g * h + a * a).sqrt()
}

fn ghost(state: &GridState, q: &[Cell], i: isize) -> Cell {
    let n = q.len() as isize;
    let j = match state.boundary {
        Boundary::Periodic => i.rem_euclid(n),
        Boundary::Outflow => i.clamp(0, n - 1),
    };
    q[j as usize]
}

/// Largest stable step for the current state.
pub fn stable_dt(state: &GridState, phys: Physics, cfg: &SchemeConfig) -> f64 {
    let smax = state
        .q
        .iter()
        .map(|c| wave_speed(c, phys.g))
        .fold(0.0f64, f64::max)
        * cfg.safety;
    let advective = if smax > 0.0 { cfg.cfl * state.dx / smax } else { f64::INFINITY };
    // the rotation must be resolved even when nothing moves (g = 0, u = 0)
    let rotation = if phys.f0 != 0.0 { cfg.cfl / phys.f0.abs() } else { f64::INFINITY };
    advective.min(rotation)
}

fn rate(state: &GridState, q: &[Cell], phys: Physics, safety: f64) -> Vec<Cell> {
    let n = q.len();
    let g = phys.g;
    // interface i+1/2 between cells i and i+1, for i = -1..n-1
    let fluxes: Vec<[f64; 5]> = (0..=n)
        .into_par_iter()
        .map(|k| {
            let l = ghost(state, q, k as isize - 1);
            let r = ghost(state, q, k as isize);
            let (fl, fr) = (flux(&l, g), flux(&r, g));
            let s = wave_speed(&l, g).max(wave_speed(&r, g)) * safety;
            let mut out = [0.0; 5];
            for m in [0, 1, 2, 4] {
                out[m] = 0.5 * (fl[m] + fr[m]) - 0.5 * s * (r[m] - l[m]);
            }
            out
        })
        .collect();
    let dx = state.dx;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let c = q[i];
            let (left, right) = (ghost(state, q, i as isize - 1), ghost(state, q, i as isize + 1));
            let h = c[0];
            let (u, v) = (c[1] / h, c[2] / h);
            let mut out = [0.0; 5];
            for m in [0, 1, 2, 4] {
                out[m] = -(fluxes[i + 1][m] - fluxes[i][m]) / dx;
            }
            // u (ha)_x upwinded on the sign of u
            let dha = if u > 0.0 { c[3] - left[3] } else { right[3] - c[3] };
            out[3] = -u * dha / dx;
            // v (ha)_x central
            out[4] -= v * (right[3] - left[3]) / (2.0 * dx);
            out[1] -= phys.f0 * c[2];
            out[2] += phys.f0 * c[1];
            out
        })
        .collect()
}

fn axpy(q: &[Cell], dt: f64, r: &[Cell]) -> Vec<Cell> {
    q.iter()
        .zip(r)
        .map(|(a, b)| {
            let mut c = *a;
            for m in 0..5 {
                c[m] += dt * b[m];
            }
            c
        })
        .collect()
}

/// One SSP-RK2 step of size `dt`.
pub fn step_with(state: &GridState, phys: Physics, cfg: &SchemeConfig, dt: f64) -> Result<GridState, FvError> {
    let stage = |q: &[Cell], t: f64| -> Result<Vec<Cell>, FvError> {
        let r = rate(state, q, phys, cfg.safety);
        let next = axpy(q, dt, &r);
        if let Some(cell) = next.iter().position(|c| !(c[0] > 0.0)) {
            return Err(FvError::Positivity {
                cell,
                h: next[cell][0],
                time: t,
            });
        }
        Ok(next)
    };
    let q1 = stage(&state.q, state.time + dt)?;
    let q2 = stage(&q1, state.time + dt)?;
    let q: Vec<Cell> = state
        .q
        .iter()
        .zip(&q2)
        .map(|(a, b)| {
            let mut c = [0.0; 5];
            for m in 0..5 {
                c[m] = 0.5 * a[m] + 0.5 * b[m];
            }
            c
        })
        .collect();
    let out = GridState {
        q,
        time: state.time + dt,
        ..state.clone()
    };
    out.check_positive()?;
    Ok(out)
}

/// One step at the CFL-limited size.
pub fn step(state: &GridState, phys: Physics, cfg: &SchemeConfig) -> Result<GridState, FvError> {
    cfg.validate()?;
    let dt = stable_dt(state, phys, cfg);
    if !(dt > cfg.min_dt) {
        return Err(FvError::CflUnderflow { dt, time: state.time });
    }
    step_with(state, phys, cfg, dt)
}

#[derive(Debug, Clone, Serialize)]
pub struct Probe {
    pub time: f64,
    /// Primitive values at the probed cells.
    pub values: Vec<[f64; 5]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub state: GridState,
    pub steps: usize,
    pub probes: Vec<Probe>,
}

/// Steps until `t_end`, shortening the last step to land on it exactly.
pub fn run_until(
    state: &GridState,
    t_end: f64,
    phys: Physics,
    cfg: &SchemeConfig,
    probe_cells: &[usize],
) -> Result<RunResult, FvError> {
    cfg.validate()?;
    if probe_cells.iter().any(|&i| i >= state.n_cells()) {
        return Err(FvError::Config("probe cell out of range".into()));
    }
    let record = |s: &GridState| Probe {
        time: s.time,
        values: probe_cells.iter().map(|&i| s.primitive(i)).collect(),
    };
    let mut s = state.clone();
    let mut probes = if probe_cells.is_empty() { Vec::new() } else { vec![record(&s)] };
    let mut steps = 0;
    while s.time < t_end {
        let mut dt = stable_dt(&s, phys, cfg);
        if !(dt > cfg.min_dt) {
            return Err(FvError::CflUnderflow { dt, time: s.time });
        }
        let last = s.time + dt >= t_end;
        if last {
            dt = t_end - s.time;
        }
        s = step_with(&s, phys, cfg, dt)?;
        if last {
            s.time = t_end;
        }
        steps += 1;
        if !probe_cells.is_empty() {
            probes.push(record(&s));
        }
    }
    Ok(RunResult { state: s, steps, probes })
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub time: f64,
    pub cells: usize,
    /// Per primitive field `(h, u, v, a, b)`.
    pub l1: [f64; 5],
    pub linf: [f64; 5],
}

impl ErrorReport {
    pub fn l1_total(&self) -> f64 {
        self.l1.iter().sum()
    }
}

/// Cell-centred errors against `exact(t, x)`, optionally only on cells
/// whose centre lies in `window`.
pub fn compare_to_closed_form(
    state: &GridState,
    exact: impl Fn(f64, f64) -> [f64; 5],
    window: Option<(f64, f64)>,
) -> ErrorReport {
    let mut l1 = [0.0; 5];
    let mut linf = [0.0f64; 5];
    let mut cells = 0;
    for i in 0..state.n_cells() {
        let x = state.center(i);
        if let Some((a, b)) = window {
            if x < a || x > b {
                continue;
            }
        }
        cells += 1;
        let (num, ex) = (state.primitive(i), exact(state.time, x));
        for m in 0..5 {
            let e = (num[m] - ex[m]).abs();
            l1[m] += e * state.dx;
            linf[m] = linf[m].max(e);
        }
    }
    ErrorReport {
        time: state.time,
        cells,
        l1,
        linf,
    }
}

/// L1 difference between two states on the same grid.
pub fn state_difference(a: &GridState, b: &GridState) -> f64 {
    assert_eq!(a.n_cells(), b.n_cells());
    (0..a.n_cells())
        .map(|i| {
            let (p, q) = (a.primitive(i), b.primitive(i));
            (0..5).map(|m| (p[m] - q[m]).abs()).sum::<f64>() * a.dx
        })
        .sum()
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub l1_error: f64,
    pub order: Option<f64>,
}

/// Observed orders between consecutive rows.
pub fn convergence_table(rows: &[(usize, f64)]) -> Vec<ConvergenceRow> {
    rows.iter()
        .enumerate()
        .map(|(k, &(n, e))| ConvergenceRow {
            cells: n,
            l1_error: e,
            order: (k > 0).then(|| {
                let (n0, e0) = rows[k - 1];
                (e0 / e).ln() / (n as f64 / n0 as f64).ln()
            }),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(x: f64) -> [f64; 5] {
        let s = (2.0 * std::f64::consts::PI * x).sin();
        [1.0 + 0.2 * s, 0.1 * s, 0.05, 0.5 + 0.1 * s, 0.2]
    }

    #[test]
    fn constant_state_is_a_fixed_point() {
        let s = GridState::from_fn(50, 0.0, 1.0, Boundary::Periodic, 0.0, |_| [1.3, 0.0, 0.0, 0.7, 0.4]).unwrap();
        let phys = Physics { g: 1.0, f0: 1.0 };
        let mut t = s.clone();
        for _ in 0..200 {
            t = step(&t, phys, &SchemeConfig::default()).unwrap();
        }
        assert_eq!(t.q, s.q);
    }

    #[test]
    fn zero_time_is_identity() {
        let s = GridState::from_fn(20, 0.0, 1.0, Boundary::Periodic, 0.0, bump).unwrap();
        let r = run_until(&s, 0.0, Physics { g: 1.0, f0: 0.0 }, &SchemeConfig::default(), &[3]).unwrap();
        assert_eq!(r.steps, 0);
        assert_eq!(r.state, s);
        assert_eq!(r.probes.len(), 1);
    }

    #[test]
    fn lands_exactly_on_end_time() {
        let s = GridState::from_fn(40, 0.0, 1.0, Boundary::Outflow, 0.0, bump).unwrap();
        let r = run_until(&s, 0.123, Physics { g: 1.0, f0: 0.5 }, &SchemeConfig::default(), &[0, 39]).unwrap();
        assert_eq!(r.state.time, 0.123);
        assert_eq!(r.probes.len(), r.steps + 1);
    }

    #[test]
    fn rejects_bad_cfl_and_negative_depth() {
        let s = GridState::from_fn(10, 0.0, 1.0, Boundary::Periodic, 0.0, bump).unwrap();
        let cfg = SchemeConfig { cfl: 1.5, ..SchemeConfig::default() };
        assert!(matches!(step(&s, Physics { g: 1.0, f0: 0.0 }, &cfg), Err(FvError::Config(_))));
        let bad = GridState::from_fn(10, 0.0, 1.0, Boundary::Periodic, 0.0, |x| [x - 0.5, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(bad, Err(FvError::Positivity { .. })));
    }

    #[test]
    fn oversized_step_trips_positivity_guard() {
        let s = GridState::from_fn(50, 0.0, 1.0, Boundary::Periodic, 0.0, |x| {
            if x < 0.5 { [1.0, 2.0, 0.0, 0.0, 0.0] } else { [1e-3, -2.0, 0.0, 0.0, 0.0] }
        })
        .unwrap();
        let phys = Physics { g: 1.0, f0: 0.0 };
        let cfg = SchemeConfig::default();
        let dt = 20.0 * stable_dt(&s, phys, &cfg);
        assert!(matches!(step_with(&s, phys, &cfg, dt), Err(FvError::Positivity { .. })));
        // the CFL-limited scheme keeps the same state positive
        assert!(run_until(&s, 0.2, phys, &cfg, &[]).is_ok());
    }

    #[test]
    fn orders_from_rows() {
        let t = convergence_table(&[(100, 0.4), (200, 0.2), (400, 0.1)]);
        assert!(t[0].order.is_none());
        assert!((t[2].order.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn snapshot_csv_header() {
        let s = GridState::from_fn(4, 0.0, 1.0, Boundary::Periodic, 0.0, bump).unwrap();
        let csv = s.to_csv();
        assert!(csv.starts_with("x,h,u,v,a,b\n"));
        assert_eq!(csv.lines().count(), 5);
    }
}
