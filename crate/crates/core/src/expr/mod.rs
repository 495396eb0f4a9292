//! Small exact symbolic kernel.
//!
//! Trees are immutable and always held in a light canonical form: sums and
//! products are flattened and sorted, like terms are collected, rational
//! constants are folded, and negative powers are gathered into a single
//! `Quotient(numerator, denominator)` node. This is syntactic, not a full
//! rational normal form; semantic identity checks go through
//! [`is_zero_probabilistic`].

mod calculus;
mod display;
mod eval;

use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

pub use eval::{is_zero_probabilistic, sample_coordinate, Assignment, ZeroTest, ZeroVerdict};

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),
    #[error("division by zero while evaluating at the sample point")]
    SingularPoint,
    #[error("could not find a regular sample point after {0} resamples")]
    SamplingExhausted(usize),
}

/// Tree node. Only canonical trees are ever exposed through [`Expr`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Const(Rational),
    Symbol(Arc<str>),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    /// Exponent is always >= 2 in canonical form.
    Pow(Expr, u32),
    Quotient(Expr, Expr),
    Sin(Expr),
    Cos(Expr),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(Arc<Node>);

impl Expr {
    fn from_node(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(value: Rational) -> Self {
        Self::from_node(Node::Const(value))
    }

    pub fn int(value: i64) -> Self {
        Self::constant(Rational::from_integer(BigInt::from(value)))
    }

    pub fn ratio(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator in rational constant");
        Self::constant(Rational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    /// Exact rational image of a finite double.
    pub fn from_f64(value: f64) -> Self {
        assert!(value.is_finite(), "non-finite constant {value}");
        Self::constant(Rational::from_float(value).unwrap_or_else(Rational::zero))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn symbol(name: &str) -> Self {
        Self::from_node(Node::Symbol(Arc::from(name)))
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self.node() {
            Node::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_rational().is_some_and(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().is_some_and(|c| c.is_one())
    }

    pub fn to_f64(&self) -> Option<f64> {
        self.as_rational().and_then(|c| c.to_f64())
    }

    pub fn free_symbols(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Arc<str>>) {
        match self.node() {
            Node::Const(_) => {}
            Node::Symbol(s) => {
                out.insert(s.clone());
            }
            Node::Sum(xs) | Node::Product(xs) => xs.iter().for_each(|x| x.collect_symbols(out)),
            Node::Pow(b, _) => b.collect_symbols(out),
            Node::Quotient(n, d) => {
                n.collect_symbols(out);
                d.collect_symbols(out);
            }
            Node::Sin(a) | Node::Cos(a) => a.collect_symbols(out),
        }
    }

    pub fn contains_symbol(&self, name: &str) -> bool {
        match self.node() {
            Node::Const(_) => false,
            Node::Symbol(s) => &**s == name,
            Node::Sum(xs) | Node::Product(xs) => xs.iter().any(|x| x.contains_symbol(name)),
            Node::Pow(b, _) => b.contains_symbol(name),
            Node::Quotient(n, d) => n.contains_symbol(name) || d.contains_symbol(name),
            Node::Sin(a) | Node::Cos(a) => a.contains_symbol(name),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + match self.node() {
            Node::Const(_) | Node::Symbol(_) => 0,
            Node::Sum(xs) | Node::Product(xs) => xs.iter().map(Expr::size).sum(),
            Node::Pow(b, _) => b.size(),
            Node::Quotient(n, d) => n.size() + d.size(),
            Node::Sin(a) | Node::Cos(a) => a.size(),
        }
    }

    pub fn sin(&self) -> Expr {
        if self.is_zero() {
            return Expr::zero();
        }
        Self::from_node(Node::Sin(self.clone()))
    }

    pub fn cos(&self) -> Expr {
        if self.is_zero() {
            return Expr::one();
        }
        Self::from_node(Node::Cos(self.clone()))
    }

    /// Integer power; negative exponents produce a quotient.
    pub fn pow(&self, exponent: i32) -> Expr {
        self.try_pow(exponent).expect("zero raised to a negative power")
    }

    pub fn try_pow(&self, exponent: i32) -> Result<Expr, ExprError> {
        if exponent == 0 {
            return Ok(Expr::one());
        }
        let mut num = Vec::new();
        let mut den = Vec::new();
        if exponent > 0 {
            num.extend(std::iter::repeat(self.clone()).take(exponent as usize));
        } else {
            den.extend(std::iter::repeat(self.clone()).take(exponent.unsigned_abs() as usize));
        }
        build_term(num, den)
    }

    pub fn checked_div(&self, rhs: &Expr) -> Result<Expr, ExprError> {
        build_term(vec![self.clone()], vec![rhs.clone()])
    }

    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        build_sum(terms.into_iter().collect())
    }

    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        build_term(factors.into_iter().collect(), Vec::new())
            .expect("product without denominators cannot fail")
    }

    pub fn scale(&self, c: &Rational) -> Expr {
        self * &Expr::constant(c.clone())
    }

    /// Re-runs canonicalisation bottom-up. Canonical inputs come back unchanged.
    pub fn canonicalize(&self) -> Result<Expr, ExprError> {
        self.rebuild(&|_| None)
    }

    /// Rebuilds the tree through the canonical constructors, letting `leaf`
    /// replace symbols.
    pub(crate) fn rebuild(&self, leaf: &dyn Fn(&str) -> Option<Expr>) -> Result<Expr, ExprError> {
        Ok(match self.node() {
            Node::Const(_) => self.clone(),
            Node::Symbol(s) => leaf(s).unwrap_or_else(|| self.clone()),
            Node::Sum(xs) => build_sum(
                xs.iter()
                    .map(|x| x.rebuild(leaf))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            Node::Product(xs) => build_term(
                xs.iter()
                    .map(|x| x.rebuild(leaf))
                    .collect::<Result<Vec<_>, _>>()?,
                Vec::new(),
            )?,
            Node::Pow(b, n) => b.rebuild(leaf)?.try_pow(*n as i32)?,
            Node::Quotient(n, d) => build_term(vec![n.rebuild(leaf)?], vec![d.rebuild(leaf)?])?,
            Node::Sin(a) => a.rebuild(leaf)?.sin(),
            Node::Cos(a) => a.rebuild(leaf)?.cos(),
        })
    }

    /// Splits a canonical term into its rational coefficient and the
    /// coefficient-free remainder.
    fn split_coefficient(&self) -> (Rational, Option<Expr>) {
        match self.node() {
            Node::Const(c) => (c.clone(), None),
            Node::Product(xs) => match xs[0].node() {
                Node::Const(c) => {
                    let rest = &xs[1..];
                    let rest = if rest.len() == 1 {
                        rest[0].clone()
                    } else {
                        Expr::from_node(Node::Product(rest.to_vec()))
                    };
                    (c.clone(), Some(rest))
                }
                _ => (Rational::one(), Some(self.clone())),
            },
            Node::Quotient(n, d) => {
                let (c, rest) = n.split_coefficient();
                let rest = rest.unwrap_or_else(Expr::one);
                (c, Some(Expr::from_node(Node::Quotient(rest, d.clone()))))
            }
            _ => (Rational::one(), Some(self.clone())),
        }
    }
}

fn build_sum(terms: Vec<Expr>) -> Expr {
    let mut constant = Rational::zero();
    let mut collected: BTreeMap<Expr, Rational> = BTreeMap::new();
    let mut stack = terms;
    stack.reverse();
    while let Some(term) = stack.pop() {
        if let Node::Sum(inner) = term.node() {
            stack.extend(inner.iter().rev().cloned());
            continue;
        }
        match term.split_coefficient() {
            (c, None) => constant += c,
            (c, Some(rest)) => *collected.entry(rest).or_insert_with(Rational::zero) += c,
        }
    }
    let mut out: Vec<Expr> = Vec::with_capacity(collected.len() + 1);
    if !constant.is_zero() {
        out.push(Expr::constant(constant));
    }
    for (rest, c) in collected {
        if c.is_zero() {
            continue;
        }
        out.push(attach_coefficient(c, rest));
    }
    match out.len() {
        0 => Expr::zero(),
        1 => out.pop().unwrap(),
        _ => {
            out.sort();
            Expr::from_node(Node::Sum(out))
        }
    }
}

/// Multiplies a coefficient-free canonical term by a rational coefficient.
fn attach_coefficient(c: Rational, rest: Expr) -> Expr {
    if c.is_one() {
        return rest;
    }
    match rest.node() {
        Node::Product(xs) => {
            let mut v = Vec::with_capacity(xs.len() + 1);
            v.push(Expr::constant(c));
            v.extend(xs.iter().cloned());
            Expr::from_node(Node::Product(v))
        }
        Node::Quotient(n, d) => {
            let n = attach_coefficient(c, n.clone());
            Expr::from_node(Node::Quotient(n, d.clone()))
        }
        Node::Const(k) => Expr::constant(c * k),
        _ => Expr::from_node(Node::Product(vec![Expr::constant(c), rest])),
    }
}

/// Canonical product `num[0]·num[1]·… / (den[0]·den[1]·…)`.
fn build_term(num: Vec<Expr>, den: Vec<Expr>) -> Result<Expr, ExprError> {
    let mut coefficient = Rational::one();
    let mut powers: BTreeMap<Expr, i64> = BTreeMap::new();
    // (factor, sign of exponent multiplier)
    let mut stack: Vec<(Expr, i64)> = num
        .into_iter()
        .map(|f| (f, 1))
        .chain(den.into_iter().map(|f| (f, -1)))
        .collect();
    let mut zero_numerator = false;
    while let Some((factor, k)) = stack.pop() {
        match factor.node() {
            Node::Const(c) => {
                if c.is_zero() {
                    if k < 0 {
                        return Err(ExprError::ZeroDenominator);
                    }
                    zero_numerator = true;
                } else if k > 0 {
                    coefficient *= c.pow(k as i32);
                } else {
                    coefficient /= c.pow((-k) as i32);
                }
            }
            Node::Product(xs) => stack.extend(xs.iter().map(|x| (x.clone(), k))),
            Node::Quotient(n, d) => {
                stack.push((n.clone(), k));
                stack.push((d.clone(), -k));
            }
            Node::Pow(b, n) => *powers.entry(b.clone()).or_insert(0) += k * (*n as i64),
            _ => *powers.entry(factor.clone()).or_insert(0) += k,
        }
    }
    if zero_numerator {
        return Ok(Expr::zero());
    }

    let mut numer: Vec<Expr> = Vec::new();
    let mut denom: Vec<Expr> = Vec::new();
    for (base, e) in powers {
        match e.cmp(&0) {
            std::cmp::Ordering::Greater => numer.push(raise(base, e as u32)),
            std::cmp::Ordering::Less => denom.push(raise(base, (-e) as u32)),
            std::cmp::Ordering::Equal => {}
        }
    }

    // c·(a + b) is distributed so like terms can meet.
    if denom.is_empty() && numer.len() == 1 && !coefficient.is_one() {
        if let Node::Sum(ts) = numer[0].node() {
            return Ok(build_sum(
                ts.iter()
                    .map(|t| {
                        let (c, rest) = t.split_coefficient();
                        match rest {
                            None => Expr::constant(c * &coefficient),
                            Some(r) => attach_coefficient(c * &coefficient, r),
                        }
                    })
                    .collect(),
            ));
        }
    }

    let numerator = assemble(coefficient, numer);
    if denom.is_empty() {
        return Ok(numerator);
    }
    let denominator = assemble(Rational::one(), denom);
    Ok(Expr::from_node(Node::Quotient(numerator, denominator)))
}

fn raise(base: Expr, exponent: u32) -> Expr {
    if exponent == 1 {
        base
    } else {
        Expr::from_node(Node::Pow(base, exponent))
    }
}

fn assemble(coefficient: Rational, mut factors: Vec<Expr>) -> Expr {
    if coefficient.is_zero() {
        return Expr::zero();
    }
    factors.sort();
    if factors.is_empty() {
        return Expr::constant(coefficient);
    }
    if coefficient.is_one() && factors.len() == 1 {
        return factors.pop().unwrap();
    }
    let mut v = Vec::with_capacity(factors.len() + 1);
    if !coefficient.is_one() {
        v.push(Expr::constant(coefficient));
    }
    v.extend(factors);
    Expr::from_node(Node::Product(v))
}

impl From<i64> for Expr {
    fn from(v: i64) -> Self {
        Expr::int(v)
    }
}

impl From<&str> for Expr {
    fn from(name: &str) -> Self {
        Expr::symbol(name)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl $trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                (&self).$method(rhs)
            }
        }
        impl $trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                self.$method(&rhs)
            }
        }
        impl $trait<i64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: i64) -> Expr {
                (&self).$method(&Expr::int(rhs))
            }
        }
        impl $trait<i64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: i64) -> Expr {
                self.$method(&Expr::int(rhs))
            }
        }
    };
}

binop!(Add, add, |a, b| build_sum(vec![a.clone(), b.clone()]));
binop!(Sub, sub, |a, b| build_sum(vec![a.clone(), -b]));
binop!(Mul, mul, |a, b| Expr::product([a.clone(), b.clone()]));
binop!(Div, div, |a, b| a.checked_div(b).expect("division by the constant zero"));

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::product([Expr::int(-1), self.clone()])
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

#[cfg(test)]
mod tests;

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}
