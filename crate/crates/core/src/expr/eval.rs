use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Expr, ExprError, Node};

/// Numeric bindings for free symbols.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub bindings: BTreeMap<String, f64>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.bindings.insert(name.to_string(), value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.bindings.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.bindings.get(name).copied()
    }

    pub fn extend(&mut self, other: &Assignment) {
        for (k, v) in &other.bindings {
            self.bindings.insert(k.clone(), *v);
        }
    }
}

impl<const N: usize> From<[(&str, f64); N]> for Assignment {
    fn from(pairs: [(&str, f64); N]) -> Self {
        let mut a = Assignment::new();
        for (k, v) in pairs {
            a.set(k, v);
        }
        a
    }
}

impl Expr {
    pub fn eval(&self, at: &Assignment) -> Result<f64, ExprError> {
        let mut scale = 0.0;
        self.eval_tracked(at, &mut scale)
    }

    /// Evaluates and also reports the largest magnitude of any intermediate
    /// node value, which is the natural scale for cancellation error.
    pub fn eval_with_scale(&self, at: &Assignment) -> Result<(f64, f64), ExprError> {
        let mut scale = 0.0;
        let v = self.eval_tracked(at, &mut scale)?;
        Ok((v, scale))
    }

    fn eval_tracked(&self, at: &Assignment, scale: &mut f64) -> Result<f64, ExprError> {
        let v = match self.node() {
            Node::Const(c) => c.to_f64().unwrap_or(f64::NAN),
            Node::Symbol(s) => at.get(s).ok_or_else(|| ExprError::UnboundSymbol(s.to_string()))?,
            Node::Sum(terms) => {
                let mut acc = 0.0;
                for t in terms {
                    acc += t.eval_tracked(at, scale)?;
                }
                acc
            }
            Node::Product(factors) => {
                let mut acc = 1.0;
                for f in factors {
                    acc *= f.eval_tracked(at, scale)?;
                }
                acc
            }
            Node::Pow(base, n) => base.eval_tracked(at, scale)?.powi(*n as i32),
            Node::Quotient(num, den) => {
                let d = den.eval_tracked(at, scale)?;
                if d == 0.0 {
                    return Err(ExprError::SingularPoint);
                }
                num.eval_tracked(at, scale)? / d
            }
            Node::Sin(arg) => arg.eval_tracked(at, scale)?.sin(),
            Node::Cos(arg) => arg.eval_tracked(at, scale)?.cos(),
        };
        if !v.is_finite() {
            return Err(ExprError::SingularPoint);
        }
        if v.abs() > *scale {
            *scale = v.abs();
        }
        Ok(v)
    }
}

/// Draws from `[-2, -0.25] ∪ [0.25, 2]`.
pub fn sample_coordinate<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let magnitude = rng.gen_range(0.25..=2.0);
    if rng.gen_bool(0.5) {
        magnitude
    } else {
        -magnitude
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ZeroVerdict {
    Zero,
    NonZero {
        witness: Assignment,
        value: f64,
        scale: f64,
    },
}

impl ZeroVerdict {
    pub fn is_zero(&self) -> bool {
        matches!(self, ZeroVerdict::Zero)
    }
}

/// Randomised identity test. Symbols listed in `fixed` keep their value;
/// every other free symbol is sampled per trial.
#[derive(Debug, Clone)]
pub struct ZeroTest {
    pub trials: usize,
    pub tol: f64,
    pub fixed: Assignment,
    pub max_resamples: usize,
}

impl Default for ZeroTest {
    fn default() -> Self {
        Self {
            trials: 50,
            tol: 1e-9,
            fixed: Assignment::new(),
            max_resamples: 100,
        }
    }
}

impl ZeroTest {
    pub fn new(trials: usize, tol: f64) -> Self {
        Self {
            trials,
            tol,
            ..Self::default()
        }
    }

    pub fn with_fixed(mut self, fixed: Assignment) -> Self {
        self.fixed = fixed;
        self
    }

    pub fn run<R: Rng + ?Sized>(&self, e: &Expr, rng: &mut R) -> Result<ZeroVerdict, ExprError> {
        assert!(self.trials >= 1 && self.tol > 0.0);
        if e.is_zero() {
            return Ok(ZeroVerdict::Zero);
        }
        let free: Vec<String> = e
            .free_symbols()
            .into_iter()
            .filter(|s| self.fixed.get(s).is_none())
            .map(|s| s.to_string())
            .collect();
        for _ in 0..self.trials {
            let mut attempts = 0;
            let (point, value, scale) = loop {
                let mut point = self.fixed.clone();
                for s in &free {
                    point.set(s, sample_coordinate(rng));
                }
                match e.eval_with_scale(&point) {
                    Ok((v, scale)) => break (point, v, scale),
                    Err(ExprError::SingularPoint) => {
                        attempts += 1;
                        if attempts > self.max_resamples {
                            return Err(ExprError::SamplingExhausted(self.max_resamples));
                        }
                    }
                    Err(other) => return Err(other),
                }
            };
            if value.abs() > self.tol * (1.0 + scale) {
                return Ok(ZeroVerdict::NonZero {
                    witness: point,
                    value,
                    scale,
                });
            }
        }
        Ok(ZeroVerdict::Zero)
    }
}

pub fn is_zero_probabilistic<R: Rng + ?Sized>(
    e: &Expr,
    trials: usize,
    tol: f64,
    rng: &mut R,
) -> Result<ZeroVerdict, ExprError> {
    ZeroTest::new(trials, tol).run(e, rng)
}
