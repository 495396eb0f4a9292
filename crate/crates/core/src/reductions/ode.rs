//! Dormand–Prince 5(4) with dense output and domain guards.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OdeConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub initial_step: Option<f64>,
    pub max_steps: usize,
    /// Steps smaller than this (relative to the span) count as underflow.
    pub min_step: f64,
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            max_step: f64::INFINITY,
            initial_step: None,
            max_steps: 200_000,
            min_step: 1e-14,
        }
    }
}

impl OdeConfig {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        assert!(rtol > 0.0 && atol > 0.0);
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }
}

/// A domain condition `value(s, y) > 0`; integration stops once it fails.
pub struct Guard<'a> {
    pub name: String,
    pub value: Box<dyn Fn(f64, &[f64]) -> f64 + Sync + 'a>,
}

impl<'a> Guard<'a> {
    pub fn new(name: &str, value: impl Fn(f64, &[f64]) -> f64 + Sync + 'a) -> Self {
        Self {
            name: name.to_string(),
            value: Box::new(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum OdeStatus {
    Completed,
    WallHit { guard: String, at: f64 },
    StepUnderflow { at: f64 },
    TooManySteps { at: f64 },
}

impl OdeStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, OdeStatus::Completed)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub variable: String,
    pub names: Vec<String>,
    pub s: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub status: OdeStatus,
    pub steps: usize,
    pub rejected: usize,
}

impl Trajectory {
    pub fn last(&self) -> Option<(f64, &[f64])> {
        self.s.last().map(|s| (*s, self.y.last().unwrap().as_slice()))
    }

    /// Header row then one row per output point; 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.variable);
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (s, y) in self.s.iter().zip(&self.y) {
            let _ = write!(out, "{s:.16e}");
            for v in y {
                let _ = write!(out, ",{v:.16e}");
            }
            out.push('\n');
        }
        out
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Right-hand side; `None` signals a point outside the domain (the step is
/// rejected and retried smaller).
pub type Rhs<'a> = dyn Fn(f64, &[f64]) -> Option<Vec<f64>> + 'a;

struct Step {
    y_new: Vec<f64>,
    k: [Vec<f64>; 7],
    err: f64,
}

fn attempt(f: &Rhs, s: f64, y: &[f64], k1: &[f64], h: f64, cfg: &OdeConfig) -> Option<Step> {
    let n = y.len();
    let mut k: [Vec<f64>; 7] = Default::default();
    k[0] = k1.to_vec();
    for i in 1..7 {
        let yi: Vec<f64> = (0..n)
            .map(|m| y[m] + h * (0..i).map(|j| A[i][j] * k[j][m]).sum::<f64>())
            .collect();
        k[i] = f(s + C[i] * h, &yi)?;
        if k[i].iter().any(|v| !v.is_finite()) {
            return None;
        }
    }
    // the last stage is evaluated at the 5th-order solution (FSAL)
    let y_new: Vec<f64> = (0..n)
        .map(|m| y[m] + h * (0..6).map(|j| A[6][j] * k[j][m]).sum::<f64>())
        .collect();
    let mut acc = 0.0;
    for m in 0..n {
        let e = h * (0..7).map(|j| E[j] * k[j][m]).sum::<f64>();
        let sc = cfg.atol + cfg.rtol * y[m].abs().max(y_new[m].abs());
        acc += (e / sc).powi(2);
    }
    Some(Step {
        y_new,
        k,
        err: (acc / n.max(1) as f64).sqrt(),
    })
}

fn dense(y: &[f64], st: &Step, h: f64, theta: f64) -> Vec<f64> {
    let t1 = 1.0 - theta;
    (0..y.len())
        .map(|m| {
            let r2 = st.y_new[m] - y[m];
            let r3 = h * st.k[0][m] - r2;
            let r4 = r2 - h * st.k[6][m] - r3;
            let r5 = h * (0..7).map(|j| D[j] * st.k[j][m]).sum::<f64>();
            y[m] + theta * (r2 + t1 * (r3 + theta * (r4 + t1 * r5)))
        })
        .collect()
}

/// Integrates from `s0` through the `outputs` (monotone, all on the same
/// side of `s0`), reporting the solution at each output point reached.
pub fn integrate(
    f: &Rhs,
    s0: f64,
    y0: &[f64],
    outputs: &[f64],
    cfg: &OdeConfig,
    guards: &[Guard],
) -> (Vec<f64>, Vec<Vec<f64>>, OdeStatus, usize, usize) {
    let mut out_s = Vec::new();
    let mut out_y = Vec::new();
    let Some(&end) = outputs.last() else {
        return (out_s, out_y, OdeStatus::Completed, 0, 0);
    };
    let dir = if end >= s0 { 1.0 } else { -1.0 };
    let span = (end - s0).abs().max(1e-300);
    let mut next_out = 0;
    while next_out < outputs.len() && (outputs[next_out] - s0) * dir <= 0.0 {
        out_s.push(outputs[next_out]);
        out_y.push(y0.to_vec());
        next_out += 1;
    }
    let mut s = s0;
    let mut y = y0.to_vec();
    for g in guards {
        if (g.value)(s, &y) <= 0.0 {
            return (out_s, out_y, OdeStatus::WallHit { guard: g.name.clone(), at: s }, 0, 0);
        }
    }
    let Some(mut k1) = f(s, &y) else {
        return (out_s, out_y, OdeStatus::StepUnderflow { at: s }, 0, 0);
    };
    let mut h = cfg
        .initial_step
        .unwrap_or_else(|| {
            let ynorm = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let fnorm = k1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let guess = if fnorm > 0.0 { 0.01 * (ynorm.max(1e-5) / fnorm) } else { 1e-3 * span };
            guess.min(0.1 * span)
        })
        .min(cfg.max_step)
        * dir;
    let (mut steps, mut rejected) = (0, 0);
    while next_out < outputs.len() {
        if steps + rejected >= cfg.max_steps {
            return (out_s, out_y, OdeStatus::TooManySteps { at: s }, steps, rejected);
        }
        if (s + h - end) * dir > 0.0 {
            h = end - s;
        }
        if h.abs() < cfg.min_step * span.max(1.0) {
            return (out_s, out_y, OdeStatus::StepUnderflow { at: s }, steps, rejected);
        }
        let attempt = attempt(f, s, &y, &k1, h, cfg);
        let Some(st) = attempt.filter(|st| st.err.is_finite() && st.err <= 1.0) else {
            rejected += 1;
            h *= 0.25;
            continue;
        };
        // stop at a guard before accepting the step
        if let Some(g) = guards.iter().find(|g| (g.value)(s + h, &st.y_new) <= 0.0) {
            if h.abs() > cfg.min_step * span.max(1.0) * 1e3 {
                h *= 0.5;
                rejected += 1;
                continue;
            }
            return (out_s, out_y, OdeStatus::WallHit { guard: g.name.clone(), at: s }, steps, rejected);
        }
        let s_new = s + h;
        while next_out < outputs.len() && (outputs[next_out] - s_new) * dir <= 0.0 {
            let theta = (outputs[next_out] - s) / h;
            out_s.push(outputs[next_out]);
            out_y.push(if (outputs[next_out] - s_new).abs() == 0.0 {
                st.y_new.clone()
            } else {
                dense(&y, &st, h, theta)
            });
            next_out += 1;
        }
        steps += 1;
        let fac = if st.err == 0.0 { 10.0 } else { (0.9 * st.err.powf(-0.2)).clamp(0.2, 10.0) };
        s = s_new;
        y = st.y_new;
        k1 = st.k[6].clone();
        h = (h * fac).abs().min(cfg.max_step) * dir;
    }
    (out_s, out_y, OdeStatus::Completed, steps, rejected)
}

/// Convenience wrapper returning a [`Trajectory`].
pub fn solve(
    variable: &str,
    names: &[&str],
    f: &Rhs,
    s0: f64,
    y0: &[f64],
    outputs: &[f64],
    cfg: &OdeConfig,
    guards: &[Guard],
) -> Trajectory {
    let (s, y, status, steps, rejected) = integrate(f, s0, y0, outputs, cfg, guards);
    Trajectory {
        variable: variable.to_string(),
        names: names.iter().map(|n| n.to_string()).collect(),
        s,
        y,
        status,
        steps,
        rejected,
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let f = |_s: f64, y: &[f64]| Some(vec![-y[0]]);
        let outs = linspace(0.0, 5.0, 11);
        let (s, y, status, ..) = integrate(&f, 0.0, &[1.0], &outs, &OdeConfig::default(), &[]);
        assert!(status.is_completed());
        for (s, y) in s.iter().zip(&y) {
            assert!((y[0] - (-s).exp()).abs() < 1e-8, "{s}");
        }
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        let f = |_s: f64, y: &[f64]| Some(vec![y[1], -y[0]]);
        let outs = linspace(0.0, 10.0, 101);
        let cfg = OdeConfig::with_tolerances(1e-10, 1e-12);
        let (s, y, status, ..) = integrate(&f, 0.0, &[0.0, 1.0], &outs, &cfg, &[]);
        assert!(status.is_completed());
        let worst = s.iter().zip(&y).map(|(s, y)| (y[0] - s.sin()).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn backward_integration() {
        let f = |_s: f64, y: &[f64]| Some(vec![y[0]]);
        let (s, y, status, ..) = integrate(&f, 1.0, &[1.0], &[0.5, 0.0], &OdeConfig::default(), &[]);
        assert!(status.is_completed());
        assert_eq!(s, vec![0.5, 0.0]);
        assert!((y[1][0] - (-1.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn blow_up_stops_at_guard() {
        // y' = y^2, y(0) = 1 blows up at s = 1
        let f = |_s: f64, y: &[f64]| Some(vec![y[0] * y[0]]);
        let g = Guard::new("bounded", |_s, y: &[f64]| 1e6 - y[0]);
        let (_, _, status, ..) = integrate(&f, 0.0, &[1.0], &[2.0], &OdeConfig::default(), &[g]);
        match status {
            OdeStatus::WallHit { at, .. } => assert!((at - 1.0).abs() < 1e-4, "{at}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_layout() {
        let t = solve("s", &["y"], &|_s, y: &[f64]| Some(vec![-y[0]]), 0.0, &[1.0], &[0.0, 1.0], &OdeConfig::default(), &[]);
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "s,y");
        assert_eq!(lines[1], "0.0000000000000000e0,1.0000000000000000e0");
        assert!(!csv.contains('\r'));
    }
}
