use crate::expr::Expr;
use crate::jet::VectorField;

use super::SymmetryCase;

fn s(name: &str) -> Expr {
    Expr::symbol(name)
}

fn field(name: &str, components: &[(&str, Expr)]) -> VectorField {
    VectorField::from_components(components)
        .expect("catalog generators are point fields")
        .named(name)
}

fn f0t() -> Expr {
    s("f0") * s("t")
}

/// Looks up a generator by its catalog name. `Z2` and `Z3` carry the
/// Coriolis parameter as the symbol `f0`.
///
/// `Z1` is the rotating-frame dilation `X3 + X8 - X9`. It is a symmetry only
/// when `g = 0`; with gravity the depth has to scale too, which is `Z1g`
/// (`Z1 + 2 X4`).
pub fn named_generator(name: &str) -> Option<VectorField> {
    let one = Expr::one;
    let v = match name {
        "X1" => field(name, &[("t", one())]),
        "X2" => field(name, &[("x", one())]),
        "X3" => field(name, &[("t", s("t")), ("x", s("x"))]),
        "X4" => field(name, &[("h", s("h"))]),
        "X5" => field(name, &[("x", s("t")), ("u", one())]),
        "X6" => field(name, &[("v", one())]),
        "X7" => field(name, &[("v", s("u")), ("b", s("a"))]),
        "X8" => field(name, &[("v", s("v")), ("b", s("b"))]),
        "X9" => field(name, &[("t", s("t")), ("u", -s("u")), ("a", -s("a"))]),
        "X10" => field(name, &[("b", Expr::one() / (s("a") * s("h")))]),
        "Y" => field(
            name,
            &[("t", s("t")), ("h", Expr::int(-2) * s("h")), ("u", -s("u")), ("a", -s("a"))],
        ),
        "Z1" => field(
            name,
            &[("x", s("x")), ("u", s("u")), ("v", s("v")), ("a", s("a")), ("b", s("b"))],
        ),
        "Z1g" => field(
            name,
            &[
                ("x", s("x")),
                ("h", Expr::int(2) * s("h")),
                ("u", s("u")),
                ("v", s("v")),
                ("a", s("a")),
                ("b", s("b")),
            ],
        ),
        "Z2" => field(
            name,
            &[
                ("x", f0t().sin()),
                ("u", s("f0") * f0t().cos()),
                ("v", s("f0") * f0t().sin()),
            ],
        ),
        "Z3" => field(
            name,
            &[
                ("x", f0t().cos()),
                ("u", -(s("f0") * f0t().sin())),
                ("v", s("f0") * f0t().cos()),
            ],
        ),
        _ => return None,
    };
    Some(v)
}

/// Catalog names of the basis of each case's algebra, in table order.
pub fn generator_names(case: SymmetryCase) -> &'static [&'static str] {
    match case {
        SymmetryCase::Free => &["X1", "X2", "X3", "X4", "X5", "X6", "X7", "X8", "X9", "X10"],
        SymmetryCase::Gravity => &["X1", "X2", "X3", "X5", "X6", "X8", "X10", "Y"],
        SymmetryCase::Coriolis => &["X1", "X2", "X4", "X10", "Z1", "Z2", "Z3"],
        SymmetryCase::Full => &["X1", "X2", "X10", "Z1g", "Z2", "Z3"],
    }
}

/// Label used in tables and reports; `Z1g` is displayed as `Z1` because it
/// occupies that slot of the case-(d) algebra.
pub fn display_name(catalog_name: &str) -> &str {
    match catalog_name {
        "Z1g" => "Z1",
        other => other,
    }
}

/// The basis of a case's algebra with display names attached.
pub fn generators(case: SymmetryCase) -> Vec<VectorField> {
    generator_names(case)
        .iter()
        .map(|n| {
            named_generator(n)
                .expect("case lists only name cataloged generators")
                .named(display_name(n))
        })
        .collect()
}

/// Fields that must *fail* the symmetry test for the case.
pub fn negative_controls(case: SymmetryCase) -> &'static [&'static str] {
    match case {
        SymmetryCase::Free => &[],
        SymmetryCase::Gravity => &["X4", "X9"],
        SymmetryCase::Coriolis => &["X3", "X5", "X9"],
        SymmetryCase::Full => &["X3", "X4", "X5", "Z1"],
    }
}
