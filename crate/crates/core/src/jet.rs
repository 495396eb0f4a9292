//! First-order jet space over `(t, x)` with dependent variables
//! `(h, u, v, a, b)`, total derivatives, and first prolongation of point
//! vector fields.

use std::fmt;

use thiserror::Error;

use crate::expr::{Assignment, Expr, ExprError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("total derivative of `{0}` needs second-order jet coordinates")]
    SecondOrderRequired(String),
    #[error("vector field coefficient for `{coordinate}` depends on derivative coordinate `{symbol}`")]
    NotPointField { coordinate: String, symbol: String },
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Independent {
    T,
    X,
}

impl Independent {
    pub const ALL: [Independent; 2] = [Independent::T, Independent::X];

    pub fn name(self) -> &'static str {
        match self {
            Independent::T => "t",
            Independent::X => "x",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dependent {
    H,
    U,
    V,
    A,
    B,
}

impl Dependent {
    pub const ALL: [Dependent; 5] = [
        Dependent::H,
        Dependent::U,
        Dependent::V,
        Dependent::A,
        Dependent::B,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Dependent::H => "h",
            Dependent::U => "u",
            Dependent::V => "v",
            Dependent::A => "a",
            Dependent::B => "b",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn symbol(self) -> Expr {
        Expr::symbol(self.name())
    }
}

/// Base coordinates in artifact order.
pub const BASE_COORDINATES: [&str; 7] = ["t", "x", "h", "u", "v", "a", "b"];

const DERIVATIVE_NAMES: [[&str; 2]; 5] = [
    ["h_t", "h_x"],
    ["u_t", "u_x"],
    ["v_t", "v_x"],
    ["a_t", "a_x"],
    ["b_t", "b_x"],
];

/// The fixed first-order jet space of the SWMHD system: 2 independent,
/// 5 dependent and 10 first-derivative coordinates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct JetSpace;

impl JetSpace {
    pub fn new() -> Self {
        JetSpace
    }

    pub fn independent(&self) -> [Independent; 2] {
        Independent::ALL
    }

    pub fn dependent(&self) -> [Dependent; 5] {
        Dependent::ALL
    }

    pub fn derivative_name(&self, dep: Dependent, ind: Independent) -> &'static str {
        DERIVATIVE_NAMES[dep.index()][ind.index()]
    }

    pub fn derivative(&self, dep: Dependent, ind: Independent) -> Expr {
        Expr::symbol(self.derivative_name(dep, ind))
    }

    pub fn is_derivative_coordinate(&self, name: &str) -> bool {
        DERIVATIVE_NAMES.iter().flatten().any(|n| *n == name)
    }

    /// All 17 coordinate names in artifact order.
    pub fn coordinate_names(&self) -> Vec<&'static str> {
        let mut v: Vec<&'static str> = BASE_COORDINATES.to_vec();
        v.extend(DERIVATIVE_NAMES.iter().flatten());
        v
    }

    fn first_derivative_symbol_in(&self, e: &Expr) -> Option<String> {
        e.free_symbols()
            .into_iter()
            .find(|s| self.is_derivative_coordinate(s))
            .map(|s| s.to_string())
    }

    /// `D_wrt e` for `e` depending on base coordinates (and parameters) only.
    pub fn total_derivative(&self, e: &Expr, wrt: Independent) -> Result<Expr, JetError> {
        if let Some(sym) = self.first_derivative_symbol_in(e) {
            return Err(JetError::SecondOrderRequired(sym));
        }
        let mut terms = vec![e.differentiate(wrt.name())];
        for dep in Dependent::ALL {
            let partial = e.differentiate(dep.name());
            if !partial.is_zero() {
                terms.push(self.derivative(dep, wrt) * partial);
            }
        }
        Ok(Expr::sum(terms))
    }

    pub fn prolong_first(&self, field: &VectorField) -> ProlongedField {
        let mut eta1: [[Expr; 2]; 5] = Default::default();
        // D_i ξ^j, shared across all dependent variables
        let d_xi: [[Expr; 2]; 2] = Independent::ALL.map(|i| {
            Independent::ALL.map(|j| {
                self.total_derivative(field.xi(j), i)
                    .expect("point field coefficients never contain derivative coordinates")
            })
        });
        for dep in Dependent::ALL {
            for i in Independent::ALL {
                let mut terms = vec![self
                    .total_derivative(field.eta(dep), i)
                    .expect("point field coefficients never contain derivative coordinates")];
                for j in Independent::ALL {
                    let dx = &d_xi[i.index()][j.index()];
                    if !dx.is_zero() {
                        terms.push(-(self.derivative(dep, j) * dx));
                    }
                }
                eta1[dep.index()][i.index()] = Expr::sum(terms);
            }
        }
        ProlongedField {
            base: field.clone(),
            eta1,
        }
    }
}

/// Point-symmetry generator `ξ^t ∂_t + ξ^x ∂_x + Σ η^A ∂_A`.
#[derive(Clone, PartialEq)]
pub struct VectorField {
    coefficients: [Expr; 7],
    pub name: Option<String>,
}

impl Default for VectorField {
    fn default() -> Self {
        Self::zero()
    }
}

impl VectorField {
    pub fn zero() -> Self {
        Self {
            coefficients: Default::default(),
            name: None,
        }
    }

    /// Builds a field from `(coordinate, coefficient)` pairs; omitted
    /// coordinates get a zero coefficient.
    pub fn from_components(components: &[(&str, Expr)]) -> Result<Self, JetError> {
        let mut field = Self::zero();
        for (coord, coeff) in components {
            let idx = BASE_COORDINATES
                .iter()
                .position(|c| c == coord)
                .ok_or_else(|| JetError::UnknownCoordinate(coord.to_string()))?;
            if let Some(sym) = JetSpace.first_derivative_symbol_in(coeff) {
                return Err(JetError::NotPointField {
                    coordinate: coord.to_string(),
                    symbol: sym,
                });
            }
            field.coefficients[idx] = &field.coefficients[idx] + coeff;
        }
        Ok(field)
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }

    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or("<unnamed>")
    }

    pub fn coefficients(&self) -> &[Expr; 7] {
        &self.coefficients
    }

    pub fn coefficient(&self, coordinate: &str) -> Option<&Expr> {
        BASE_COORDINATES
            .iter()
            .position(|c| *c == coordinate)
            .map(|i| &self.coefficients[i])
    }

    pub fn xi(&self, ind: Independent) -> &Expr {
        &self.coefficients[ind.index()]
    }

    pub fn eta(&self, dep: Dependent) -> &Expr {
        &self.coefficients[2 + dep.index()]
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(Expr::is_zero)
    }

    /// `X(f) = Σ coefficient_i ∂f/∂z_i` over base coordinates.
    pub fn apply(&self, f: &Expr) -> Expr {
        Expr::sum(
            BASE_COORDINATES
                .iter()
                .zip(&self.coefficients)
                .filter(|(_, c)| !c.is_zero())
                .map(|(z, c)| c * f.differentiate(z)),
        )
    }

    pub fn map_coefficients(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        Self {
            coefficients: std::array::from_fn(|i| f(&self.coefficients[i])),
            name: None,
        }
    }

    pub fn try_map_coefficients(
        &self,
        f: impl Fn(&Expr) -> Result<Expr, ExprError>,
    ) -> Result<Self, ExprError> {
        let mut out = Self::zero();
        for (slot, c) in out.coefficients.iter_mut().zip(&self.coefficients) {
            *slot = f(c)?;
        }
        Ok(out)
    }

    pub fn scale(&self, factor: &Expr) -> Self {
        self.map_coefficients(|c| factor * c)
    }

    /// Linear combination `Σ w_k X_k`.
    pub fn combination<'a>(terms: impl IntoIterator<Item = (Expr, &'a VectorField)>) -> Self {
        let mut buckets: [Vec<Expr>; 7] = Default::default();
        for (w, field) in terms {
            for (b, c) in buckets.iter_mut().zip(&field.coefficients) {
                if !c.is_zero() && !w.is_zero() {
                    b.push(&w * c);
                }
            }
        }
        Self {
            coefficients: buckets.map(Expr::sum),
            name: None,
        }
    }

    pub fn evaluate(&self, at: &Assignment) -> Result<[f64; 7], ExprError> {
        let mut out = [0.0; 7];
        for (o, c) in out.iter_mut().zip(&self.coefficients) {
            *o = c.eval(at)?;
        }
        Ok(out)
    }
}

impl std::ops::Add<&VectorField> for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        VectorField::combination([(Expr::one(), self), (Expr::one(), rhs)])
    }
}

impl std::ops::Sub<&VectorField> for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: &VectorField) -> VectorField {
        VectorField::combination([(Expr::one(), self), (Expr::int(-1), rhs)])
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (z, c) in BASE_COORDINATES.iter().zip(&self.coefficients) {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.is_one() {
                write!(f, "∂_{z}")?;
            } else {
                write!(f, "({c})∂_{z}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorField[{}]({self})", self.label())
    }
}

/// First prolongation: the base field plus the ten coefficients of the
/// derivative coordinates.
#[derive(Debug, Clone)]
pub struct ProlongedField {
    pub base: VectorField,
    pub eta1: [[Expr; 2]; 5],
}

impl ProlongedField {
    pub fn eta1(&self, dep: Dependent, ind: Independent) -> &Expr {
        &self.eta1[dep.index()][ind.index()]
    }

    /// `X^[1](F)` for `F` on the first-order jet.
    pub fn apply(&self, f: &Expr) -> Expr {
        let mut terms = vec![self.base.apply(f)];
        for dep in Dependent::ALL {
            for ind in Independent::ALL {
                let c = self.eta1(dep, ind);
                if c.is_zero() {
                    continue;
                }
                let partial = f.differentiate(JetSpace.derivative_name(dep, ind));
                if !partial.is_zero() {
                    terms.push(c * partial);
                }
            }
        }
        Expr::sum(terms)
    }
}
