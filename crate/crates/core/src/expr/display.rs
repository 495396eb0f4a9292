use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};

use super::{Expr, Node, Rational};

fn fmt_rational(c: &Rational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let big = BigInt::from(1_000_000);
    if c.is_integer() {
        write!(f, "{}", c.numer())
    } else if c.denom() <= &big && c.numer().abs() <= big {
        write!(f, "{}/{}", c.numer(), c.denom())
    } else {
        write!(f, "{:e}", c.to_f64().unwrap_or(f64::NAN))
    }
}

/// Binding strength used for parenthesisation.
fn precedence(e: &Expr) -> u8 {
    match e.node() {
        Node::Sum(_) => 1,
        Node::Const(c) if !c.is_integer() => 1,
        Node::Const(c) if c.is_negative() => 2,
        Node::Product(_) | Node::Quotient(..) => 2,
        Node::Pow(..) => 3,
        _ => 4,
    }
}

fn fmt_wrapped(e: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if precedence(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => fmt_rational(c, f),
            Node::Symbol(s) => write!(f, "{s}"),
            Node::Sum(terms) => {
                for (i, t) in terms.iter().enumerate() {
                    let (c, rest) = t.split_coefficient();
                    let negative = c.is_negative();
                    if i == 0 {
                        if negative {
                            write!(f, "-")?;
                        }
                    } else if negative {
                        write!(f, " - ")?;
                    } else {
                        write!(f, " + ")?;
                    }
                    let magnitude = c.abs();
                    match rest {
                        None => fmt_rational(&magnitude, f)?,
                        Some(r) => {
                            if !magnitude.is_one() {
                                fmt_rational(&magnitude, f)?;
                                write!(f, "*")?;
                                fmt_wrapped(&r, 2, f)?;
                            } else {
                                fmt_wrapped(&r, 2, f)?;
                            }
                        }
                    }
                }
                Ok(())
            }
            Node::Product(factors) => {
                for (i, x) in factors.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    if i == 0 && x.as_rational().is_some_and(|c| *c == -Rational::one()) {
                        write!(f, "-1")?;
                        continue;
                    }
                    fmt_wrapped(x, 3, f)?;
                }
                Ok(())
            }
            Node::Pow(base, n) => {
                fmt_wrapped(base, 4, f)?;
                write!(f, "^{n}")
            }
            Node::Quotient(num, den) => {
                fmt_wrapped(num, 2, f)?;
                write!(f, "/")?;
                fmt_wrapped(den, 4, f)
            }
            Node::Sin(a) => write!(f, "sin({a})"),
            Node::Cos(a) => write!(f, "cos({a})"),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}
