//! Small loops over `x, y` used throughout the tests and docs.
//!
//! Row order is fixed, so multiplier `l{i}` of a dual always belongs to
//! row `i` as listed here.

use crate::linexpr::{LinExpr, Var};
use crate::loop_model::SlcLoop;
use crate::polyhedron::Constraint;
use crate::rational::int;

fn expr(terms: &[(i64, &str)], constant: i64) -> LinExpr {
    let mut e = LinExpr::constant(int(constant));
    for &(c, name) in terms {
        e.add_term(&Var::new(name), int(c));
    }
    e
}

fn geq(terms: &[(i64, &str)], constant: i64) -> Constraint {
    Constraint::geq(expr(terms, constant))
}

fn eq(terms: &[(i64, &str)], constant: i64) -> Constraint {
    Constraint::eq(expr(terms, constant))
}

fn xy(rows: Vec<Constraint>) -> SlcLoop {
    SlcLoop::new(vec![Var::new("x"), Var::new("y")], rows).expect("corpus loops are well formed")
}

/// `x >= 0, x' <= x + y, y' <= y - 1, y <= -1`; ranked by `x`.
pub fn ranked() -> SlcLoop {
    xy(vec![
        geq(&[(1, "x")], 0),
        geq(&[(1, "x"), (1, "y"), (-1, "x'")], 0),
        geq(&[(1, "y"), (-1, "y'")], -1),
        geq(&[(-1, "y")], -1),
    ])
}

/// `x >= 0, x' <= x + y, y' <= y - 1`; no linear ranking function, but `x`
/// ranks it once `-y >= 1`.
pub fn eventually_ranked() -> SlcLoop {
    xy(vec![
        geq(&[(1, "x")], 0),
        geq(&[(1, "x"), (1, "y"), (-1, "x'")], 0),
        geq(&[(1, "y"), (-1, "y'")], -1),
    ])
}

/// `x >= -1, x' <= x + y, y' <= y - 1`; needs the affine `x + 1`.
pub fn eventually_affine() -> SlcLoop {
    xy(vec![
        geq(&[(1, "x")], 1),
        geq(&[(1, "x"), (1, "y"), (-1, "x'")], 0),
        geq(&[(1, "y"), (-1, "y'")], -1),
    ])
}

/// `x >= 0, x' <= x + y, y' <= -y - 1`; `y` oscillates, so the increasing
/// function has to be found.
pub fn oscillating() -> SlcLoop {
    xy(vec![
        geq(&[(1, "x")], 0),
        geq(&[(1, "x"), (1, "y"), (-1, "x'")], 0),
        geq(&[(-1, "y"), (-1, "y'")], -1),
    ])
}

/// `x >= 1, x' = y, y' = y - 1`.
pub fn shifting() -> SlcLoop {
    xy(vec![
        geq(&[(1, "x")], -1),
        eq(&[(1, "x'"), (-1, "y")], 0),
        eq(&[(1, "y'"), (-1, "y")], 1),
    ])
}

/// `x >= 0, -x - 1 >= 0`: never executes.
pub fn unsatisfiable() -> SlcLoop {
    xy(vec![geq(&[(1, "x")], 0), geq(&[(-1, "x")], -1)])
}

/// `x' = x`: no linear function increases.
pub fn frozen() -> SlcLoop {
    SlcLoop::new(vec![Var::new("x")], vec![eq(&[(1, "x'"), (-1, "x")], 0)])
        .expect("well formed")
}

/// `x >= 1, x' <= x - 1`.
pub fn countdown() -> SlcLoop {
    SlcLoop::new(
        vec![Var::new("x")],
        vec![geq(&[(1, "x")], -1), geq(&[(1, "x"), (-1, "x'")], -1)],
    )
    .expect("well formed")
}

/// Every named loop above, for corpus-wide properties.
pub fn all() -> Vec<(&'static str, SlcLoop)> {
    vec![
        ("ranked", ranked()),
        ("eventually_ranked", eventually_ranked()),
        ("eventually_affine", eventually_affine()),
        ("oscillating", oscillating()),
        ("shifting", shifting()),
        ("unsatisfiable", unsatisfiable()),
        ("frozen", frozen()),
        ("countdown", countdown()),
    ]
}
