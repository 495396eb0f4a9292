use std::collections::BTreeMap;

use super::{Expr, ExprError, Node};

impl Expr {
    /// Partial derivative with respect to `symbol`; every other symbol is a
    /// constant.
    pub fn differentiate(&self, symbol: &str) -> Expr {
        if !self.contains_symbol(symbol) {
            return Expr::zero();
        }
        match self.node() {
            Node::Const(_) => Expr::zero(),
            Node::Symbol(s) => {
                if &**s == symbol {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Sum(terms) => Expr::sum(terms.iter().map(|t| t.differentiate(symbol))),
            Node::Product(factors) => {
                let mut terms = Vec::with_capacity(factors.len());
                for (i, f) in factors.iter().enumerate() {
                    let df = f.differentiate(symbol);
                    if df.is_zero() {
                        continue;
                    }
                    let others = factors
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, g)| g.clone());
                    terms.push(Expr::product(std::iter::once(df).chain(others)));
                }
                Expr::sum(terms)
            }
            Node::Pow(base, n) => {
                let n = *n as i64;
                Expr::product([Expr::int(n), base.pow((n - 1) as i32), base.differentiate(symbol)])
            }
            Node::Quotient(num, den) => {
                // (n/d)' = n'/d - n·d'/d²
                let dn = num.differentiate(symbol);
                let dd = den.differentiate(symbol);
                let first = &dn / den;
                let second = Expr::product([num.clone(), dd]) / den.pow(2);
                first - second
            }
            Node::Sin(arg) => arg.cos() * arg.differentiate(symbol),
            Node::Cos(arg) => -(arg.sin() * arg.differentiate(symbol)),
        }
    }

    /// Simultaneous substitution of symbols, followed by re-canonicalisation.
    pub fn substitute(&self, replacements: &BTreeMap<String, Expr>) -> Result<Expr, ExprError> {
        if replacements.is_empty() {
            return Ok(self.clone());
        }
        self.rebuild(&|name| replacements.get(name).cloned())
    }

    /// Convenience wrapper for a single replacement.
    pub fn substitute_one(&self, symbol: &str, value: &Expr) -> Result<Expr, ExprError> {
        let mut map = BTreeMap::new();
        map.insert(symbol.to_string(), value.clone());
        self.substitute(&map)
    }
}
