//! Adjoint invariants and the one-dimensional optimal system of the
//! six-dimensional algebra (gravity and rotation).

use std::fmt;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::expr::{sample_coordinate, Assignment, Expr, ZeroTest};

use super::{BasisAlgebra, LieError};

/// Coefficient names of the generic element, in basis order
/// `X1, X2, X10, Z1, Z2, Z3`.
pub const COEFFICIENTS: [&str; 6] = ["a1", "a2", "a10", "z1", "z2", "z3"];

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GenericElement {
    pub a1: f64,
    pub a2: f64,
    pub a10: f64,
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
}

impl GenericElement {
    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_vec(vec![self.a1, self.a2, self.a10, self.z1, self.z2, self.z3])
    }

    pub fn from_vector(v: &DVector<f64>) -> Self {
        assert_eq!(v.len(), 6);
        Self {
            a1: v[0],
            a2: v[1],
            a10: v[2],
            z1: v[3],
            z2: v[4],
            z3: v[5],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    I,
    II,
    III,
    IV,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Branch::I => "I",
            Branch::II => "II",
            Branch::III => "III",
            Branch::IV => "IV",
        };
        f.write_str(s)
    }
}

/// The optimal system as listed, in listing order.
pub const OPTIMAL_SYSTEM: [&str; 21] = [
    "X1",
    "X2",
    "X3",
    "X10",
    "Z1",
    "Z2",
    "Z3",
    "a1X1+z1Z1",
    "a1X1+a2X2",
    "a1X1+a10X10",
    "a1X1+a2X2+a10X10",
    "a2X2+a10X10",
    "a2X2+z2Z2",
    "a2X2+z3Z3",
    "a10X10+z2Z2",
    "a10X10+z3Z3",
    "z2Z2+z3Z3",
    "a2X2+a10X10+z2Z2",
    "a2X2+a10X10+z3Z3",
    "a10X10+z2Z2+z3Z3",
    "a2X2+a10X10+z2Z2+z3Z3",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub branch: Branch,
    /// Branch form, e.g. `a1X1+a2X2+a10X10`.
    pub branch_form: String,
    /// Member of the optimal system with the element's nonzero pattern.
    pub representative: String,
    /// Whether `representative` appears verbatim in [`OPTIMAL_SYSTEM`].
    pub listed: bool,
}

const TERMS: [(&str, &str); 6] = [
    ("a1", "X1"),
    ("a2", "X2"),
    ("a10", "X10"),
    ("z1", "Z1"),
    ("z2", "Z2"),
    ("z3", "Z3"),
];

fn pattern_label(active: &[usize]) -> String {
    if active.len() == 1 {
        return TERMS[active[0]].1.to_string();
    }
    active
        .iter()
        .map(|&k| format!("{}{}", TERMS[k].0, TERMS[k].1))
        .collect::<Vec<_>>()
        .join("+")
}

/// Branch of the generic element: decided by whether the invariants `a1`
/// and `z1` vanish after normalising to unit max-norm.
pub fn classify_branch(e: &GenericElement) -> Result<Classification, LieError> {
    let v = e.to_vector();
    let scale = v.amax();
    if scale == 0.0 || !scale.is_finite() {
        return Err(LieError::ZeroElement);
    }
    let nz: Vec<bool> = v.iter().map(|c| (c / scale).abs() > 1e-12).collect();
    let (branch, form, pool): (Branch, &str, &[usize]) = match (nz[0], nz[3]) {
        (true, true) => (Branch::I, "a1X1+z1Z1", &[0, 3]),
        (true, false) => (Branch::II, "a1X1+a2X2+a10X10", &[0, 1, 2]),
        (false, true) => (Branch::III, "z1Z1", &[3]),
        (false, false) => (Branch::IV, "a2X2+a10X10+z2Z2+z3Z3", &[1, 2, 4, 5]),
    };
    let mut active: Vec<usize> = pool.iter().copied().filter(|&k| nz[k]).collect();
    let mut label = pattern_label(&active);
    let mut listed = OPTIMAL_SYSTEM.contains(&label.as_str());
    if !listed {
        // Only a2X2+z2Z2+z3Z3 is missing from the list; the X1 rotation
        // turns (z2, z3) into (|z|, 0) without touching a2.
        active.retain(|&k| k != 5);
        label = pattern_label(&active);
        listed = OPTIMAL_SYSTEM.contains(&label.as_str());
    }
    Ok(Classification {
        branch,
        branch_form: form.to_string(),
        representative: label,
        listed,
    })
}

/// First-order operator `Σ c_k ∂/∂e_k` on functions of the generic-element
/// coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    pub label: String,
    pub coefficients: [Expr; 6],
}

impl LinearOperator {
    pub fn apply(&self, phi: &Expr) -> Expr {
        Expr::sum(
            COEFFICIENTS
                .iter()
                .zip(&self.coefficients)
                .map(|(n, c)| c * phi.differentiate(n)),
        )
    }
}

impl fmt::Display for LinearOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = COEFFICIENTS
            .iter()
            .zip(&self.coefficients)
            .filter(|(_, c)| !c.is_zero())
            .map(|(n, c)| format!("({c}) phi_{n}"))
            .collect();
        if terms.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&terms.join(" + "))
        }
    }
}

fn op(label: &str, terms: &[(&str, Expr)]) -> LinearOperator {
    let mut coefficients: [Expr; 6] = Default::default();
    for (n, c) in terms {
        let k = COEFFICIENTS.iter().position(|x| x == n).unwrap();
        coefficients[k] = &coefficients[k] + c;
    }
    LinearOperator {
        label: label.to_string(),
        coefficients,
    }
}

/// The six invariance constraints exactly as displayed (the sixth one
/// carries `phi_z2` where the bracket `[Z1, X2] = -X2` gives `phi_a2`).
pub fn displayed_constraints() -> Vec<LinearOperator> {
    let s = Expr::symbol;
    vec![
        op("1", &[("a2", s("z1"))]),
        op("2", &[("a10", Expr::int(2) * s("z1"))]),
        op("3", &[("z3", s("z2")), ("z2", -s("z3"))]),
        op("4", &[("z3", s("f0") * s("a1")), ("z2", -s("z1"))]),
        op("5", &[("z2", s("f0") * s("a1")), ("z3", s("z1"))]),
        op(
            "6",
            &[
                ("z2", s("a2") + s("z2")),
                ("a10", Expr::int(2) * s("a10")),
                ("z3", s("z3")),
            ],
        ),
    ]
}

/// Infinitesimal invariance conditions from the structure constants: for
/// each basis element `A`, `Σ_k (Σ_j c^k_{Aj} e_j) ∂phi/∂e_k = 0`.
pub fn derived_constraints(alg: &BasisAlgebra) -> Vec<LinearOperator> {
    assert_eq!(alg.len(), 6, "constraints are defined for the six-dimensional algebra");
    (0..6)
        .map(|a| {
            let mut buckets: [Vec<Expr>; 6] = Default::default();
            for j in 0..6 {
                for (k, c) in &alg.structure[a][j] {
                    buckets[*k].push(c * Expr::symbol(COEFFICIENTS[j]));
                }
            }
            LinearOperator {
                label: alg.names[a].clone(),
                coefficients: buckets.map(Expr::sum),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstraintCheck {
    pub label: String,
    pub operator: String,
    pub annihilates_a1: bool,
    pub annihilates_z1: bool,
    /// Label of a derived constraint this one is proportional to.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub proportional_to: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub f0: f64,
    pub samples: usize,
    pub max_a1_drift: f64,
    pub max_z1_drift: f64,
    pub branch_changes: usize,
    pub displayed: Vec<ConstraintCheck>,
    pub derived: Vec<ConstraintCheck>,
    pub passed: bool,
}

fn proportional<R: Rng>(p: &LinearOperator, q: &LinearOperator, rng: &mut R) -> bool {
    for _ in 0..8 {
        let mut at = Assignment::new();
        at.set("f0", sample_coordinate(rng));
        for n in COEFFICIENTS {
            at.set(n, sample_coordinate(rng));
        }
        let Ok(x) = p.coefficients.iter().map(|c| c.eval(&at)).collect::<Result<Vec<_>, _>>() else {
            return false;
        };
        let Ok(y) = q.coefficients.iter().map(|c| c.eval(&at)).collect::<Result<Vec<_>, _>>() else {
            return false;
        };
        let scale = x.iter().chain(&y).fold(0.0f64, |m, v| m.max(v.abs()));
        if x.iter().all(|v| *v == 0.0) != y.iter().all(|v| *v == 0.0) {
            return false;
        }
        for k in 0..6 {
            for l in (k + 1)..6 {
                if (x[k] * y[l] - x[l] * y[k]).abs() > 1e-9 * (1.0 + scale * scale) {
                    return false;
                }
            }
        }
    }
    true
}

fn check_constraints<R: Rng>(
    ops: &[LinearOperator],
    against: &[LinearOperator],
    rng: &mut R,
) -> Result<Vec<ConstraintCheck>, LieError> {
    let test = ZeroTest::new(30, 1e-10);
    ops.iter()
        .map(|o| {
            let a1 = test.run(&o.apply(&Expr::symbol("a1")), rng)?.is_zero();
            let z1 = test.run(&o.apply(&Expr::symbol("z1")), rng)?.is_zero();
            let proportional_to = against
                .iter()
                .find(|d| proportional(o, d, rng))
                .map(|d| d.label.clone());
            Ok(ConstraintCheck {
                label: o.label.clone(),
                operator: o.to_string(),
                annihilates_a1: a1,
                annihilates_z1: z1,
                proportional_to,
            })
        })
        .collect()
}

fn random_element<R: Rng>(rng: &mut R) -> GenericElement {
    loop {
        let mut v = DVector::zeros(6);
        for k in 0..6 {
            if rng.gen_bool(0.6) {
                v[k] = rng.gen_range(-2.0..=2.0);
            }
        }
        if v.amax() > 0.0 {
            return GenericElement::from_vector(&v);
        }
    }
}

/// Checks that `a1`, `z1` and the branch are unchanged by every
/// `Ad(exp(ε A))`, and tests `phi = a1`, `phi = z1` against the displayed
/// and the derived constraint systems.
pub fn invariance_check(
    alg: &BasisAlgebra,
    trials: usize,
    f0: f64,
    seed: u64,
) -> Result<InvarianceReport, LieError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = Assignment::from([("f0", f0)]);
    let (mut da1, mut dz1, mut changes) = (0.0f64, 0.0f64, 0);
    for a in 0..alg.len() {
        for _ in 0..trials {
            let e = random_element(&mut rng);
            let eps = rng.gen_range(-2.0..=2.0);
            let moved = GenericElement::from_vector(&alg.adjoint_action(a, &e.to_vector(), eps, &params)?);
            da1 = da1.max((moved.a1 - e.a1).abs());
            dz1 = dz1.max((moved.z1 - e.z1).abs());
            if classify_branch(&moved)?.branch != classify_branch(&e)?.branch {
                changes += 1;
            }
        }
    }
    let derived_ops = derived_constraints(alg);
    let displayed_ops = displayed_constraints();
    let displayed = check_constraints(&displayed_ops, &derived_ops, &mut rng)?;
    let derived = check_constraints(&derived_ops, &displayed_ops, &mut rng)?;
    let passed = da1 <= 1e-10
        && dz1 <= 1e-10
        && changes == 0
        && displayed
            .iter()
            .chain(&derived)
            .all(|c| c.annihilates_a1 && c.annihilates_z1);
    Ok(InvarianceReport {
        f0,
        samples: trials * alg.len(),
        max_a1_drift: da1,
        max_z1_drift: dz1,
        branch_changes: changes,
        displayed,
        derived,
        passed,
    })
}
