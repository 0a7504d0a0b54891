//! Single-path linear constraint loops `p(x) <- c(x, x'), p(x')`.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linexpr::{write_terms, Assignment, LinExpr, Var};
use crate::lp;
use crate::polyhedron::{Constraint, Polyhedron, Relation};
use crate::rational::Rational;

/// A loop over `n >= 1` variables whose body relates the current state `x`
/// to the next state `x'`. Body rows are non-strict.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SlcLoop {
    vars: Vec<Var>,
    primed: Vec<Var>,
    body: Polyhedron,
}

impl SlcLoop {
    /// Builds a loop from canonical rows over `vars` and their primed copies.
    pub fn new(vars: Vec<Var>, rows: Vec<Constraint>) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::Structural("a loop needs at least one variable".into()));
        }
        for (i, v) in vars.iter().enumerate() {
            if v.is_primed() {
                return Err(Error::Structural(format!(
                    "loop variable `{v}` must be unprimed"
                )));
            }
            if vars[..i].contains(v) {
                return Err(Error::Structural(format!("duplicate loop variable `{v}`")));
            }
        }
        let primed: Vec<Var> = vars.iter().map(Var::primed).collect();
        let all: Vec<Var> = vars.iter().chain(primed.iter()).cloned().collect();
        let mut body = Polyhedron::universe(all);
        for row in rows {
            if row.is_strict() {
                return Err(Error::StrictBodyRow(row.to_string()));
            }
            if let Some(v) = row.expr.vars().find(|v| !body.has_var(v)) {
                return Err(Error::UndeclaredVariable(v.name().to_string()));
            }
            body.push(row)?;
        }
        Ok(SlcLoop { vars, primed, body })
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn primed_vars(&self) -> &[Var] {
        &self.primed
    }

    pub fn body(&self) -> &Polyhedron {
        &self.body
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    /// Rewrites an expression over `x` into the same expression over `x'`.
    pub fn prime(&self, e: &LinExpr) -> LinExpr {
        e.rename(|v| match self.vars.iter().position(|w| w == v) {
            Some(i) => self.primed[i].clone(),
            None => v.clone(),
        })
    }

    /// Whether `(from, to)` is a transition: `to` is keyed by unprimed names.
    pub fn is_transition(&self, from: &Assignment, to: &Assignment) -> bool {
        let mut joint = from.clone();
        for (v, p) in self.vars.iter().zip(&self.primed) {
            match to.get(v) {
                Some(val) => {
                    joint.insert(p.clone(), val.clone());
                }
                None => return false,
            }
        }
        self.body.contains(&joint) == Some(true)
    }
}

impl fmt::Display for SlcLoop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p(")?;
        for (i, v) in self.vars.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ") <- {}", self.body)
    }
}

/// A candidate linear (or affine) function `Σ coeff·x + constant` over the
/// loop variables, stored densely in loop-variable order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CandidateFn {
    coeffs: Vec<(Var, Rational)>,
    constant: Rational,
}

impl CandidateFn {
    pub fn new(vars: &[Var], coeffs: Vec<Rational>, constant: Rational) -> Self {
        assert_eq!(vars.len(), coeffs.len(), "one coefficient per variable");
        CandidateFn {
            coeffs: vars.iter().cloned().zip(coeffs).collect(),
            constant,
        }
    }

    /// Reads coefficients of `vars` from `expr`; fails if `expr` mentions
    /// anything else.
    pub fn from_expr(expr: &LinExpr, vars: &[Var]) -> Result<Self> {
        if let Some(v) = expr.vars().find(|v| !vars.contains(v)) {
            return Err(Error::UndeclaredVariable(v.name().to_string()));
        }
        Ok(CandidateFn {
            coeffs: vars.iter().map(|v| (v.clone(), expr.coeff(v))).collect(),
            constant: expr.constant_term().clone(),
        })
    }

    /// Coefficients taken from `values` for the named variables, zero
    /// elsewhere.
    pub fn from_values(vars: &[Var], values: &Assignment, names: &[Var]) -> Self {
        CandidateFn {
            coeffs: vars
                .iter()
                .zip(names)
                .map(|(v, n)| (v.clone(), values.get(n).cloned().unwrap_or_else(Rational::zero)))
                .collect(),
            constant: Rational::zero(),
        }
    }

    pub fn coeffs(&self) -> &[(Var, Rational)] {
        &self.coeffs
    }

    pub fn coeff(&self, v: &Var) -> Rational {
        self.coeffs
            .iter()
            .find(|(w, _)| w == v)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn constant(&self) -> &Rational {
        &self.constant
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.coeffs.iter().map(|(v, _)| v)
    }

    pub fn is_linear(&self) -> bool {
        self.constant.is_zero()
    }

    pub fn with_constant(mut self, constant: Rational) -> Self {
        self.constant = constant;
        self
    }

    pub fn to_expr(&self) -> LinExpr {
        LinExpr::from_terms(
            self.coeffs.iter().map(|(v, c)| (c.clone(), v)),
            self.constant.clone(),
        )
    }

    pub fn eval(&self, point: &Assignment) -> Option<Rational> {
        self.to_expr().eval(point)
    }

    pub fn scaled(&self, q: &Rational) -> CandidateFn {
        CandidateFn {
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c * q)).collect(),
            constant: &self.constant * q,
        }
    }

    /// `-f` without the constant term.
    pub fn negated_linear(&self) -> CandidateFn {
        CandidateFn {
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), -c.clone())).collect(),
            constant: Rational::zero(),
        }
    }

    /// Drops the coefficient of `v`.
    pub fn without(&self, v: &Var) -> CandidateFn {
        CandidateFn {
            coeffs: self.coeffs.iter().filter(|(w, _)| w != v).cloned().collect(),
            constant: self.constant.clone(),
        }
    }
}

impl fmt::Display for CandidateFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.coeffs.iter().map(|(v, c)| (v, c)), &self.constant)
    }
}

/// Relations accepted in user-written constraints.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RawRelation {
    Le,
    Ge,
    Eq,
    Lt,
    Gt,
}

impl fmt::Display for RawRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RawRelation::Le => "<=",
            RawRelation::Ge => ">=",
            RawRelation::Eq => "=",
            RawRelation::Lt => "<",
            RawRelation::Gt => ">",
        })
    }
}

/// `lhs ⋈ rhs` as written by the user.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawConstraint {
    pub lhs: LinExpr,
    pub relation: RawRelation,
    pub rhs: LinExpr,
}

impl RawConstraint {
    pub fn new(lhs: LinExpr, relation: RawRelation, rhs: LinExpr) -> Self {
        RawConstraint { lhs, relation, rhs }
    }
}

impl fmt::Display for RawConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.relation, self.rhs)
    }
}

/// Rewrites `lhs ⋈ rhs` rows into `expr >= 0` / `expr = 0` over `vars` and
/// their primed copies. Strict rows are rejected.
pub fn canonicalize(raw: &[RawConstraint], vars: &[Var]) -> Result<SlcLoop> {
    let mut rows = Vec::with_capacity(raw.len());
    for r in raw {
        let declared = |v: &Var| vars.contains(v) || vars.iter().any(|w| &w.primed() == v);
        if let Some(v) = r.lhs.vars().chain(r.rhs.vars()).find(|v| !declared(v)) {
            return Err(Error::UndeclaredVariable(v.name().to_string()));
        }
        let row = match r.relation {
            RawRelation::Ge => Constraint::geq(r.lhs.clone() - r.rhs.clone()),
            RawRelation::Le => Constraint::geq(r.rhs.clone() - r.lhs.clone()),
            RawRelation::Eq => Constraint::eq(r.lhs.clone() - r.rhs.clone()),
            RawRelation::Lt | RawRelation::Gt => {
                return Err(Error::StrictBodyRow(r.to_string()))
            }
        };
        rows.push(row);
    }
    SlcLoop::new(vars.to_vec(), rows)
}

fn fresh_lift_var(vars: &[Var]) -> Var {
    let taken = |name: &str| vars.iter().any(|v| v.name() == name);
    if !taken("u") {
        return Var::new("u");
    }
    (1..)
        .map(|i| format!("u{i}"))
        .find(|n| !taken(n))
        .map(Var::new)
        .expect("unbounded search")
}

/// Appends a fresh variable `u` pinned by `u = 1` and `u' = 1`, so that
/// linear functions of the lifted loop are affine functions of the original.
/// The fresh variable is the last entry of the result's `vars()`.
pub fn affine_lift(lp: &SlcLoop) -> SlcLoop {
    let u = fresh_lift_var(lp.vars());
    let mut vars = lp.vars().to_vec();
    vars.push(u.clone());
    let mut rows = lp.body().constraints().to_vec();
    let one = LinExpr::constant(Rational::one());
    rows.push(Constraint::eq(LinExpr::var(&u) - one.clone()));
    rows.push(Constraint::eq(LinExpr::var(&u.primed()) - one));
    SlcLoop::new(vars, rows).expect("lifting preserves well-formedness")
}

pub fn body_satisfiable(lp: &SlcLoop) -> Result<bool> {
    lp::is_feasible(lp.body())
}

/// Whether all rows of the body are non-strict (always true for loops built
/// through [`SlcLoop::new`]).
pub fn body_is_non_strict(lp: &SlcLoop) -> bool {
    lp.body().constraints().iter().all(|c| c.relation != Relation::Gt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn v(n: &str) -> Var {
        Var::new(n)
    }

    fn e(terms: &[(i64, &str)], c: i64) -> LinExpr {
        let mut out = LinExpr::constant(int(c));
        for &(k, name) in terms {
            out.add_term(&v(name), int(k));
        }
        out
    }

    fn example1_raw() -> Vec<RawConstraint> {
        vec![
            RawConstraint::new(e(&[(1, "x")], 0), RawRelation::Ge, e(&[], 0)),
            RawConstraint::new(e(&[(1, "y'")], 0), RawRelation::Le, e(&[(1, "y")], -1)),
            RawConstraint::new(e(&[(1, "x'")], 0), RawRelation::Le, e(&[(1, "x"), (1, "y")], 0)),
            RawConstraint::new(e(&[(1, "y")], 0), RawRelation::Le, e(&[], -1)),
        ]
    }

    #[test]
    fn canonicalizes_example_one() {
        let lp = canonicalize(&example1_raw(), &[v("x"), v("y")]).unwrap();
        let rows: Vec<Constraint> = lp.body().constraints().to_vec();
        assert_eq!(
            rows,
            vec![
                Constraint::geq(e(&[(1, "x")], 0)),
                Constraint::geq(e(&[(1, "y"), (-1, "y'")], -1)),
                Constraint::geq(e(&[(1, "x"), (1, "y"), (-1, "x'")], 0)),
                Constraint::geq(e(&[(-1, "y")], -1)),
            ]
        );
    }

    #[test]
    fn equalities_are_kept() {
        let raw = [RawConstraint::new(e(&[(1, "x'")], 0), RawRelation::Eq, e(&[(1, "y")], 0))];
        let lp = canonicalize(&raw, &[v("x"), v("y")]).unwrap();
        assert_eq!(
            lp.body().constraints(),
            &[Constraint::eq(e(&[(1, "x'"), (-1, "y")], 0))]
        );
    }

    #[test]
    fn empty_body_is_universal() {
        let lp = canonicalize(&[], &[v("x")]).unwrap();
        assert!(lp.body().is_empty());
        assert!(body_satisfiable(&lp).unwrap());
    }

    #[test]
    fn strict_rows_and_unknown_vars_are_rejected() {
        let strict = [RawConstraint::new(e(&[(1, "x")], 0), RawRelation::Lt, e(&[], 0))];
        assert!(matches!(
            canonicalize(&strict, &[v("x")]),
            Err(Error::StrictBodyRow(_))
        ));
        let unknown = [RawConstraint::new(e(&[(1, "z")], 0), RawRelation::Ge, e(&[], 0))];
        assert!(matches!(
            canonicalize(&unknown, &[v("x")]),
            Err(Error::UndeclaredVariable(name)) if name == "z"
        ));
    }

    #[test]
    fn body_satisfiability() {
        let lp = canonicalize(&example1_raw(), &[v("x"), v("y")]).unwrap();
        assert!(body_satisfiable(&lp).unwrap());
        let witness: Assignment = [
            (v("x"), int(0)),
            (v("y"), int(-1)),
            (v("x'"), int(-1)),
            (v("y'"), int(-2)),
        ]
        .into_iter()
        .collect();
        assert_eq!(lp.body().contains(&witness), Some(true));

        let bad = SlcLoop::new(
            vec![v("x")],
            vec![Constraint::geq(e(&[(1, "x")], 0)), Constraint::geq(e(&[(-1, "x")], -1))],
        )
        .unwrap();
        assert!(!body_satisfiable(&bad).unwrap());
    }

    #[test]
    fn lifting_adds_pinned_fresh_variables() {
        let lp = canonicalize(&example1_raw(), &[v("x"), v("y")]).unwrap();
        let lifted = affine_lift(&lp);
        assert_eq!(lifted.vars(), &[v("x"), v("y"), v("u")]);
        let tail = &lifted.body().constraints()[4..];
        assert_eq!(
            tail,
            &[
                Constraint::eq(e(&[(1, "u")], -1)),
                Constraint::eq(e(&[(1, "u'")], -1)),
            ]
        );
        let twice = affine_lift(&lifted);
        assert_eq!(twice.vars().last(), Some(&v("u1")));
        assert_eq!(twice.body().len(), lp.body().len() + 4);
    }
}
