//! Commutators, structure constants and the adjoint action of the
//! symmetry algebras, plus table checks and the optimal-system classifier.

mod optimal;
mod tables;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expr::{sample_coordinate, Assignment, Expr, ExprError, ZeroTest};
use crate::jet::{VectorField, BASE_COORDINATES};
use crate::swmhd::{generator_names, generators, SymmetryCase};

pub use optimal::{
    classify_branch, derived_constraints, displayed_constraints, invariance_check, Branch,
    Classification, ConstraintCheck, GenericElement, InvarianceReport, LinearOperator,
    OPTIMAL_SYSTEM,
};
pub use tables::{
    expected_tables, parse_table, verify_table, Annotation, CellReport, CellStatus, ExpectedCell,
    TableDocument, TableError, TableKind, TableReport,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LieError {
    #[error("field is not in the span of the basis (largest residual {residual:e})")]
    NotInSpan { residual: f64 },
    #[error("basis fields are linearly dependent")]
    DependentBasis,
    #[error("bracket [{0}, {1}] does not close in the basis")]
    NotClosed(String, String),
    #[error("basis index {0} out of range")]
    BadIndex(usize),
    #[error("the zero element has no branch")]
    ZeroElement,
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// `[X, Y]^i = X(Y^i) - Y(X^i)`.
pub fn commutator(x: &VectorField, y: &VectorField) -> VectorField {
    let xs = x.coefficients();
    let ys = y.coefficients();
    let mut comps = Vec::with_capacity(7);
    for (k, z) in BASE_COORDINATES.iter().enumerate() {
        comps.push((*z, x.apply(&ys[k]) - y.apply(&xs[k])));
    }
    VectorField::from_components(&comps).expect("brackets of point fields are point fields")
}

/// A sparse linear combination `Σ c_k X_k` over a basis.
pub type Combination = Vec<(usize, Expr)>;

/// Ordered, named basis with its structure constants.
#[derive(Debug, Clone)]
pub struct BasisAlgebra {
    pub case: Option<SymmetryCase>,
    pub names: Vec<String>,
    pub basis: Vec<VectorField>,
    /// `structure[i][j]` expresses `[X_i, X_j]`.
    pub structure: Vec<Vec<Combination>>,
    pub algebra_label: String,
}

const FIT_POINTS: usize = 8;
const F0_NODES: [f64; 3] = [0.5, 1.0, 1.5];

fn depends_on_f0(fields: &[&VectorField]) -> bool {
    fields
        .iter()
        .any(|f| f.coefficients().iter().any(|c| c.contains_symbol("f0")))
}

/// Best rational approximation with a small denominator, if one is close.
fn rationalize(x: f64) -> Option<Expr> {
    const MAX_DEN: i64 = 64;
    if x.abs() < 1e-9 {
        return Some(Expr::zero());
    }
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    for _ in 0..20 {
        let a = r.floor();
        if a.abs() > 1e9 {
            break;
        }
        let a = a as i64;
        (h0, h1) = (h1, a * h1 + h0);
        (k0, k1) = (k1, a * k1 + k0);
        if k1 > MAX_DEN {
            return None;
        }
        if (x - h1 as f64 / k1 as f64).abs() < 1e-8 * (1.0 + x.abs()) {
            return Some(Expr::ratio(h1, k1));
        }
        let frac = r - a as f64;
        if frac.abs() < 1e-12 {
            break;
        }
        r = 1.0 / frac;
    }
    let _ = (h0, k0);
    None
}

fn least_squares(v: &VectorField, basis: &[&VectorField], f0: Option<f64>) -> Result<Vec<f64>, LieError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let n = basis.len();
    let rows = 7 * FIT_POINTS;
    let mut m = DMatrix::<f64>::zeros(rows, n);
    let mut rhs = DVector::<f64>::zeros(rows);
    for p in 0..FIT_POINTS {
        let mut at = Assignment::new();
        if let Some(f) = f0 {
            at.set("f0", f);
        }
        for c in BASE_COORDINATES {
            at.set(c, sample_coordinate(&mut rng));
        }
        let target = v.evaluate(&at)?;
        for (j, b) in basis.iter().enumerate() {
            let col = b.evaluate(&at)?;
            for k in 0..7 {
                m[(7 * p + k, j)] = col[k];
            }
        }
        for k in 0..7 {
            rhs[7 * p + k] = target[k];
        }
    }
    let svd = m.svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.iter().any(|s| *s <= 1e-10 * smax.max(1.0)) {
        return Err(LieError::DependentBasis);
    }
    let sol = svd.solve(&rhs, 1e-12).map_err(|_| LieError::DependentBasis)?;
    Ok(sol.iter().copied().collect())
}

/// Decomposes `v` over `basis`; coefficients may be polynomials (of degree
/// at most two) in `f0`. The numeric fit is only a guess: the returned
/// combination is accepted after the residual field passes the zero test.
pub fn decompose_in_basis(v: &VectorField, basis: &[VectorField]) -> Result<Combination, LieError> {
    let refs: Vec<&VectorField> = basis.iter().collect();
    let mut all = refs.clone();
    all.push(v);
    let n = basis.len();
    let coeffs: Vec<Option<Expr>> = if depends_on_f0(&all) {
        let samples: Vec<Vec<f64>> = F0_NODES
            .iter()
            .map(|f| least_squares(v, &refs, Some(*f)))
            .collect::<Result<_, _>>()?;
        (0..n)
            .map(|j| {
                // quadratic through the three nodes
                let [x0, x1, x2] = F0_NODES;
                let [y0, y1, y2] = [samples[0][j], samples[1][j], samples[2][j]];
                let d1 = (y1 - y0) / (x1 - x0);
                let d2 = ((y2 - y1) / (x2 - x1) - d1) / (x2 - x0);
                let c2 = d2;
                let c1 = d1 - d2 * (x0 + x1);
                let c0 = y0 - c1 * x0 - c2 * x0 * x0;
                let f0 = Expr::symbol("f0");
                Some(
                    rationalize(c0)?
                        + rationalize(c1)? * &f0
                        + rationalize(c2)? * f0.pow(2),
                )
            })
            .collect()
    } else {
        least_squares(v, &refs, None)?.into_iter().map(rationalize).collect()
    };
    let mut combo = Vec::new();
    for (j, c) in coeffs.into_iter().enumerate() {
        let c = c.ok_or(LieError::NotInSpan { residual: f64::NAN })?;
        if !c.is_zero() {
            combo.push((j, c));
        }
    }
    let recon = VectorField::combination(combo.iter().map(|(j, c)| (c.clone(), &basis[*j])));
    let residual = v - &recon;
    let mut rng = ChaCha8Rng::seed_from_u64(0xdec0);
    let test = ZeroTest::new(20, 1e-9);
    for c in residual.coefficients() {
        if let crate::expr::ZeroVerdict::NonZero { value, .. } = test.run(c, &mut rng)? {
            return Err(LieError::NotInSpan { residual: value.abs() });
        }
    }
    Ok(combo)
}

impl BasisAlgebra {
    pub fn new(names: Vec<String>, basis: Vec<VectorField>, label: &str) -> Result<Self, LieError> {
        let n = basis.len();
        let mut structure = vec![vec![Vec::new(); n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let br = commutator(&basis[i], &basis[j]);
                let combo = if br.is_zero() {
                    Vec::new()
                } else {
                    decompose_in_basis(&br, &basis)
                        .map_err(|_| LieError::NotClosed(names[i].clone(), names[j].clone()))?
                };
                structure[j][i] = combo.iter().map(|(k, c)| (*k, -c)).collect();
                structure[i][j] = combo;
            }
        }
        Ok(Self {
            case: None,
            names,
            basis,
            structure,
            algebra_label: label.to_string(),
        })
    }

    /// The algebra of a symmetry case, with display names.
    pub fn for_case(case: SymmetryCase) -> Self {
        let basis = generators(case);
        let names = basis.iter().map(|b| b.label().to_string()).collect();
        let mut alg = Self::new(names, basis, case.algebra_label())
            .expect("cataloged generator sets close");
        alg.case = Some(case);
        debug_assert_eq!(alg.len(), generator_names(case).len());
        alg
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Human-readable combination, e.g. `f0*Z3` or `-2*X10`.
    pub fn format_combination(&self, combo: &Combination) -> String {
        if combo.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (k, c)) in combo.iter().enumerate() {
            let name = &self.names[*k];
            let text = if c.is_one() {
                name.clone()
            } else if (c + Expr::one()).is_zero() {
                format!("-{name}")
            } else if matches!(c.node(), crate::expr::Node::Sum(_)) {
                format!("({c})*{name}")
            } else {
                format!("{c}*{name}")
            };
            if i > 0 {
                if let Some(rest) = text.strip_prefix('-') {
                    out.push_str(" - ");
                    out.push_str(rest);
                    continue;
                }
                out.push_str(" + ");
            }
            out.push_str(&text);
        }
        out
    }

    /// Matrix of `ad_{X_a}`: column `j` holds the coordinates of `[X_a, X_j]`.
    pub fn adjoint_matrix(&self, a: usize, params: &Assignment) -> Result<DMatrix<f64>, LieError> {
        if a >= self.len() {
            return Err(LieError::BadIndex(a));
        }
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            for (k, c) in &self.structure[a][j] {
                m[(*k, j)] = c.eval(params)?;
            }
        }
        Ok(m)
    }

    /// Coordinates of `Ad(exp(ε X_a)) B = exp(-ε ad_{X_a}) B`.
    pub fn adjoint_action(
        &self,
        a: usize,
        b: &DVector<f64>,
        eps: f64,
        params: &Assignment,
    ) -> Result<DVector<f64>, LieError> {
        let m = self.adjoint_matrix(a, params)? * (-eps);
        Ok(m.exp() * b)
    }

    pub fn unit(&self, j: usize) -> DVector<f64> {
        let mut v = DVector::zeros(self.len());
        v[j] = 1.0;
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::swmhd::named_generator;

    fn g(name: &str) -> VectorField {
        named_generator(name).unwrap()
    }

    #[test]
    fn bracket_examples() {
        assert_eq!(commutator(&g("X1"), &g("X3")), g("X1").map_coefficients(|c| c.clone()));
        assert!(commutator(&g("X2"), &g("X2")).is_zero());
        let br = commutator(&g("Z1"), &g("X10"));
        let expected = g("X10").scale(&Expr::int(-2));
        assert!((&br - &expected).is_zero(), "{br}");
    }

    #[test]
    fn rationalize_small_fractions() {
        assert_eq!(rationalize(0.5), Some(Expr::ratio(1, 2)));
        assert_eq!(rationalize(-3.0), Some(Expr::int(-3)));
        assert_eq!(rationalize(std::f64::consts::PI), None);
    }

    #[test]
    fn decomposition_examples() {
        let l6 = generators(SymmetryCase::Full);
        assert_eq!(decompose_in_basis(&g("X1"), &l6).unwrap(), vec![(0, Expr::one())]);
        let br = commutator(&g("X1"), &g("Z2"));
        assert_eq!(decompose_in_basis(&br, &l6).unwrap(), vec![(5, Expr::symbol("f0"))]);
        let dh = VectorField::from_components(&[("h", Expr::one())]).unwrap();
        assert!(matches!(decompose_in_basis(&dh, &l6), Err(LieError::NotInSpan { .. })));
    }

    #[test]
    fn adjoint_examples() {
        let l10 = BasisAlgebra::for_case(SymmetryCase::Free);
        let p = Assignment::new();
        let v = l10.adjoint_action(2, &l10.unit(0), 0.3, &p).unwrap();
        assert!((v[0] - 0.3f64.exp()).abs() < 1e-12);
        let l6 = BasisAlgebra::for_case(SymmetryCase::Full);
        let p = Assignment::from([("f0", 1.0)]);
        let eps = 0.7;
        let v = l6.adjoint_action(0, &l6.unit(4), eps, &p).unwrap();
        assert!((v[4] - eps.cos()).abs() < 1e-12 && (v[5] + eps.sin()).abs() < 1e-12);
        for a in 0..l6.len() {
            let v = l6.adjoint_action(a, &l6.unit(a), 1.3, &p).unwrap();
            assert!((v - l6.unit(a)).amax() < 1e-12);
        }
    }
}
