//! The one-dimensional rotating shallow-water MHD system, its generator
//! catalogs, and prolongation-based symmetry verification.

mod generators;
mod transform;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Assignment, Expr, ExprError, ZeroTest, ZeroVerdict};
use crate::jet::{Dependent, Independent, JetSpace, VectorField};

pub use generators::{display_name, generator_names, generators, named_generator, negative_controls};
pub use transform::{
    discrepancies, finite_transformation, flow_consistency_error, printed_transformation,
    FiniteTransformation, TransformDiscrepancy, CATALOG,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SwmhdError {
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("unknown case `{0}` (expected free, gravity, coriolis or full)")]
    UnknownCase(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymmetryCase {
    /// g = 0, f0 = 0
    Free,
    /// g != 0, f0 = 0
    Gravity,
    /// g = 0, f0 != 0
    Coriolis,
    /// g != 0, f0 != 0
    Full,
}

impl SymmetryCase {
    pub const ALL: [SymmetryCase; 4] = [
        SymmetryCase::Free,
        SymmetryCase::Gravity,
        SymmetryCase::Coriolis,
        SymmetryCase::Full,
    ];

    pub fn id(self) -> &'static str {
        match self {
            SymmetryCase::Free => "free",
            SymmetryCase::Gravity => "gravity",
            SymmetryCase::Coriolis => "coriolis",
            SymmetryCase::Full => "full",
        }
    }

    pub fn letter(self) -> char {
        match self {
            SymmetryCase::Free => 'a',
            SymmetryCase::Gravity => 'b',
            SymmetryCase::Coriolis => 'c',
            SymmetryCase::Full => 'd',
        }
    }

    pub fn dimension(self) -> usize {
        generator_names(self).len()
    }

    /// Representative `(g, f0)` for the case.
    pub fn default_params(self) -> (f64, f64) {
        match self {
            SymmetryCase::Free => (0.0, 0.0),
            SymmetryCase::Gravity => (1.0, 0.0),
            SymmetryCase::Coriolis => (0.0, 1.0),
            SymmetryCase::Full => (1.0, 1.0),
        }
    }

    pub fn accepts(self, g: f64, f0: f64) -> bool {
        let (gz, fz) = (g == 0.0, f0 == 0.0);
        match self {
            SymmetryCase::Free => gz && fz,
            SymmetryCase::Gravity => !gz && fz,
            SymmetryCase::Coriolis => gz && !fz,
            SymmetryCase::Full => !gz && !fz,
        }
    }

    pub fn algebra_label(self) -> &'static str {
        match self {
            SymmetryCase::Free => "{A_{3,3} ⋊ A_{2,1}} ⋊ A^a_{5,34}",
            SymmetryCase::Gravity => "A_{2,1} ⋊ A_{6,22}",
            SymmetryCase::Coriolis => "A_{3,5} ⋊ {A_{2,1} ⋊ A_{2,1}}",
            SymmetryCase::Full => "A_{3,5} ⋊ A_{3,3}",
        }
    }
}

impl fmt::Display for SymmetryCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for SymmetryCase {
    type Err = SwmhdError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "free" | "a" => Ok(SymmetryCase::Free),
            "gravity" | "b" => Ok(SymmetryCase::Gravity),
            "coriolis" | "c" => Ok(SymmetryCase::Coriolis),
            "full" | "d" => Ok(SymmetryCase::Full),
            _ => Err(SwmhdError::UnknownCase(s.to_string())),
        }
    }
}

/// Run configuration shared by the verification pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SwmhdConfig {
    pub case: SymmetryCase,
    pub g: f64,
    pub f0: f64,
    pub seed: u64,
    pub trials: usize,
    pub tol: f64,
}

impl Default for SwmhdConfig {
    fn default() -> Self {
        Self {
            case: SymmetryCase::Full,
            g: 1.0,
            f0: 1.0,
            seed: 42,
            trials: 50,
            tol: 1e-9,
        }
    }
}

impl SwmhdConfig {
    pub fn for_case(case: SymmetryCase) -> Self {
        let (g, f0) = case.default_params();
        Self {
            case,
            g,
            f0,
            ..Self::default()
        }
    }
}

/// The five residuals in first-order jet coordinates, with `g` and `f0`
/// kept as symbols and bound numerically per run.
#[derive(Debug, Clone)]
pub struct PdeSystem {
    pub g: f64,
    pub f0: f64,
    pub residuals: [Expr; 5],
    /// `h_t, u_t, v_t, a_t, b_t` in terms of base coordinates and
    /// x-derivatives.
    pub evolution: BTreeMap<String, Expr>,
}

pub fn build_system(g: f64, f0: f64) -> PdeSystem {
    let j = JetSpace;
    let dt = |e: &Expr| j.total_derivative(e, Independent::T).unwrap();
    let dx = |e: &Expr| j.total_derivative(e, Independent::X).unwrap();
    let [h, u, v, a, b] = Dependent::ALL.map(Dependent::symbol);
    let gs = Expr::symbol("g");
    let fs = Expr::symbol("f0");
    let ha = &h * &a;

    let residuals = [
        dt(&h) + dx(&(&h * &u)),
        dt(&(&h * &u))
            + dx(&(&h * &u * &u + Expr::ratio(1, 2) * &gs * &h * &h - &h * &a * &a))
            + &fs * &h * &v,
        dt(&(&h * &v)) + dx(&(&h * &u * &v - &h * &a * &b)) - &fs * &h * &u,
        dt(&ha) + &u * dx(&ha),
        dt(&(&h * &b)) + dx(&(&h * (&u * &b - &v * &a))) + &v * dx(&ha),
    ];

    // Each residual is affine in one new t-derivative once the earlier ones
    // are eliminated: solve in order h, u, v, a, b.
    let mut evolution = BTreeMap::new();
    for (dep, res) in Dependent::ALL.iter().zip(&residuals) {
        let name = j.derivative_name(*dep, Independent::T);
        let reduced = res.substitute(&evolution).expect("no denominators introduced");
        let coeff = reduced.differentiate(name);
        let rest = reduced
            .substitute_one(name, &Expr::zero())
            .expect("no denominators introduced");
        evolution.insert(name.to_string(), -(rest / coeff));
    }

    PdeSystem {
        g,
        f0,
        residuals,
        evolution,
    }
}

impl PdeSystem {
    pub fn parameters(&self) -> Assignment {
        Assignment::from([("g", self.g), ("f0", self.f0)])
    }

    /// Residuals with every t-derivative eliminated; identically zero.
    pub fn reduced_residuals(&self) -> Result<Vec<Expr>, ExprError> {
        self.residuals
            .iter()
            .map(|r| r.substitute(&self.evolution))
            .collect()
    }

    /// `X^[1](H^k)` modulo the system, one expression per residual.
    pub fn symmetry_conditions(&self, field: &VectorField) -> Result<Vec<Expr>, ExprError> {
        let prolonged = JetSpace.prolong_first(field);
        self.residuals
            .iter()
            .map(|r| prolonged.apply(r).substitute(&self.evolution))
            .collect()
    }
}

/// FNV-1a, used to give every generator its own reproducible stream.
pub fn stream_seed(seed: u64, name: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in name.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash ^ seed
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub equation: usize,
    pub point: Assignment,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryVerdict {
    pub generator: String,
    pub passed: bool,
    pub witness: Option<Witness>,
}

pub fn verify_symmetry(
    field: &VectorField,
    sys: &PdeSystem,
    trials: usize,
    tol: f64,
    seed: u64,
) -> Result<SymmetryVerdict, ExprError> {
    let name = field.label().to_string();
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, &name));
    let test = ZeroTest::new(trials, tol).with_fixed(sys.parameters());
    for (k, cond) in sys.symmetry_conditions(field)?.iter().enumerate() {
        if let ZeroVerdict::NonZero { witness, value, .. } = test.run(cond, &mut rng)? {
            return Ok(SymmetryVerdict {
                generator: name,
                passed: false,
                witness: Some(Witness {
                    equation: k + 1,
                    point: witness,
                    value,
                }),
            });
        }
    }
    Ok(SymmetryVerdict {
        generator: name,
        passed: true,
        witness: None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub config: SwmhdConfig,
    pub generators: Vec<SymmetryVerdict>,
    pub controls: Vec<SymmetryVerdict>,
}

impl CaseReport {
    /// Every basis generator passes and every negative control fails.
    pub fn success(&self) -> bool {
        self.generators.iter().all(|v| v.passed) && self.controls.iter().all(|v| !v.passed)
    }
}

/// Verifies a case's basis (plus `extra` names, reported alongside the
/// basis) and its negative controls in parallel.
pub fn verify_case(config: &SwmhdConfig, extra: &[String]) -> Result<CaseReport, SwmhdError> {
    let sys = build_system(config.g, config.f0);
    let mut basis: Vec<String> = generator_names(config.case).iter().map(|s| s.to_string()).collect();
    basis.extend(extra.iter().cloned());
    let controls: Vec<String> = negative_controls(config.case).iter().map(|s| s.to_string()).collect();
    let run = |names: &[String]| -> Result<Vec<SymmetryVerdict>, SwmhdError> {
        names
            .par_iter()
            .map(|n| {
                let field = named_generator(n).ok_or_else(|| SwmhdError::UnknownGenerator(n.clone()))?;
                Ok(verify_symmetry(&field, &sys, config.trials, config.tol, config.seed)?)
            })
            .collect()
    };
    Ok(CaseReport {
        config: config.clone(),
        generators: run(&basis)?,
        controls: run(&controls)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuity_residual_is_expanded() {
        let sys = build_system(1.0, 1.0);
        let s = Expr::symbol;
        assert_eq!(sys.residuals[0], s("h_t") + s("h_x") * s("u") + s("h") * s("u_x"));
        assert_eq!(sys.evolution["h_t"], -(s("h_x") * s("u") + s("h") * s("u_x")));
    }

    #[test]
    fn evolution_form_is_sound() {
        let sys = build_system(1.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let test = ZeroTest::default().with_fixed(sys.parameters());
        for r in sys.reduced_residuals().unwrap() {
            assert!(test.run(&r, &mut rng).unwrap().is_zero(), "{r}");
        }
        for (k, e) in &sys.evolution {
            assert!(!e.free_symbols().iter().any(|s| s.ends_with("_t")), "{k} = {e}");
        }
    }

    #[test]
    fn case_parsing_and_sizes() {
        assert_eq!("coriolis".parse::<SymmetryCase>().unwrap(), SymmetryCase::Coriolis);
        assert!("nope".parse::<SymmetryCase>().is_err());
        let dims: Vec<_> = SymmetryCase::ALL.iter().map(|c| c.dimension()).collect();
        assert_eq!(dims, [10, 8, 7, 6]);
        assert!(!generator_names(SymmetryCase::Full).contains(&"X5"));
    }

    #[test]
    fn time_translation_and_boost() {
        let sys = build_system(1.0, 1.0);
        let x1 = named_generator("X1").unwrap();
        assert!(verify_symmetry(&x1, &sys, 20, 1e-9, 0).unwrap().passed);
        let x5 = named_generator("X5").unwrap();
        let v = verify_symmetry(&x5, &sys, 20, 1e-9, 0).unwrap();
        assert!(!v.passed && v.witness.is_some());
    }

    #[test]
    fn stream_seeds_differ_per_name() {
        assert_ne!(stream_seed(42, "X1"), stream_seed(42, "X2"));
        assert_eq!(stream_seed(42, "Z3"), stream_seed(42, "Z3"));
    }

    #[test]
    fn zero_epsilon_is_identity() {
        let params = Assignment::from([("f0", 0.7)]);
        let p = [0.3, -1.1, 0.9, 0.4, -0.6, 1.3, 0.2];
        for name in CATALOG {
            let m = finite_transformation(name, 0.0).unwrap();
            assert_eq!(m.apply(&p, &params).unwrap(), p, "{name}");
        }
    }
}
