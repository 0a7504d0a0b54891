//! Fourier-Motzkin projection and redundancy removal.

use std::collections::HashSet;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linexpr::{LinExpr, Var};
use crate::lp::{self, implies, LpStatus, Objective};
use crate::polyhedron::{Constraint, Polyhedron, Relation};
use crate::rational::Rational;

pub const DEFAULT_FM_ROW_CAP: usize = 10_000;

/// Resource limits for projection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of rows a single elimination step may produce.
    pub fm_row_cap: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            fm_row_cap: DEFAULT_FM_ROW_CAP,
        }
    }
}

impl Limits {
    /// Reads `ELRF_FM_ROW_CAP`, falling back to the default when unset or
    /// unparsable.
    pub fn from_env() -> Self {
        let cap = std::env::var("ELRF_FM_ROW_CAP")
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(DEFAULT_FM_ROW_CAP);
        Limits { fm_row_cap: cap }
    }
}

fn contradiction() -> Constraint {
    Constraint::geq(LinExpr::constant(-Rational::one()))
}

/// Normalizes rows, drops tautologies and duplicates. A contradictory
/// constant row collapses the whole list to `[-1 >= 0]`.
fn simplify(rows: Vec<Constraint>) -> Vec<Constraint> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for row in rows {
        match row.constant_truth() {
            Some(true) => continue,
            Some(false) => return vec![contradiction()],
            None => {}
        }
        let row = row.normalized();
        if seen.insert(row.clone()) {
            out.push(row);
        }
    }
    // `e > 0` subsumes `e >= 0`.
    let strict: HashSet<LinExpr> = out
        .iter()
        .filter(|r| r.relation == Relation::Gt)
        .map(|r| r.expr.clone())
        .collect();
    out.retain(|r| !(r.relation == Relation::Geq && strict.contains(&r.expr)));
    out
}

fn is_contradiction(rows: &[Constraint]) -> bool {
    rows.len() == 1 && rows[0].constant_truth() == Some(false)
}

/// Removes every row implied by the remaining ones. The result has the same
/// solution set and no implied row.
pub fn remove_redundant(system: &Polyhedron) -> Result<Polyhedron> {
    let rows = simplify(system.constraints().to_vec());
    if is_contradiction(&rows) {
        return Ok(system.with_constraints(rows));
    }
    let mut kept = rows;
    let mut i = 0;
    while i < kept.len() {
        let mut others = kept.clone();
        let row = others.remove(i);
        if implies(&system.with_constraints(others.clone()), &row)? {
            kept = others;
        } else {
            i += 1;
        }
    }
    Ok(system.with_constraints(kept))
}

/// Projects `system` onto its variables minus `eliminate`.
///
/// Equalities are used for substitution before any inequality is combined;
/// a combined row is strict iff one of its parents is. Redundant rows are
/// pruned after every step.
pub fn fm_project(system: &Polyhedron, eliminate: &[Var], limits: &Limits) -> Result<Polyhedron> {
    if let Some(v) = eliminate.iter().find(|v| !system.has_var(v)) {
        return Err(Error::Structural(format!(
            "cannot eliminate `{v}`: not a variable of the system"
        )));
    }
    let mut remaining: Vec<Var> = system
        .vars()
        .iter()
        .filter(|v| eliminate.contains(v))
        .cloned()
        .collect();
    let mut current = Polyhedron::universe(system.vars().to_vec())
        .with_constraints(simplify(system.constraints().to_vec()));

    while !remaining.is_empty() {
        if is_contradiction(current.constraints()) {
            break;
        }
        let rows = current.constraints().to_vec();
        let substitution = rows.iter().enumerate().find_map(|(i, r)| {
            if r.relation != Relation::Eq {
                return None;
            }
            remaining.iter().find(|v| r.expr.mentions(v)).map(|v| (i, v.clone()))
        });
        let (v, new_rows) = match substitution {
            Some((idx, v)) => {
                let mut rows = rows;
                let eq = rows.remove(idx);
                let c = eq.expr.coeff(&v);
                // v = -(eq - c·v) / c
                let mut rest = eq.expr.clone();
                rest.add_term(&v, -c.clone());
                let replacement = rest.scaled(&(-Rational::one() / c));
                let rows = rows
                    .into_iter()
                    .map(|r| Constraint::new(r.expr.substitute(&v, &replacement), r.relation))
                    .collect::<Vec<_>>();
                (v, rows)
            }
            None => {
                let v = pick_variable(&rows, &remaining);
                (v.clone(), combine(rows, &v, limits)?)
            }
        };
        remaining.retain(|w| w != &v);
        let vars: Vec<Var> = current.vars().iter().filter(|w| **w != v).cloned().collect();
        let next = Polyhedron::universe(vars).with_constraints(simplify(new_rows));
        current = remove_redundant(&next)?;
    }

    let vars: Vec<Var> = system
        .vars()
        .iter()
        .filter(|v| !eliminate.contains(v))
        .cloned()
        .collect();
    let current = mark_implicit_equalities(current)?;
    let rows = reduce_by_equalities(current.constraints().to_vec(), &vars);
    Polyhedron::new(vars, rows)
}

/// Turns `e >= 0` into `e = 0` when `e` is zero on the whole polyhedron.
fn mark_implicit_equalities(system: Polyhedron) -> Result<Polyhedron> {
    if is_contradiction(system.constraints()) || !lp::is_feasible(&system)? {
        return Ok(system);
    }
    let mut changed = false;
    let mut rows = Vec::with_capacity(system.len());
    for r in system.constraints() {
        if r.relation == Relation::Geq && !r.expr.is_constant() {
            let out = lp::lp_solve(&system, Some(&Objective::maximize(r.expr.clone())))?;
            if out.status == LpStatus::Optimal && out.objective_value.as_ref().is_some_and(Zero::is_zero) {
                rows.push(Constraint::eq(r.expr.clone()));
                changed = true;
                continue;
            }
        }
        rows.push(r.clone());
    }
    if !changed {
        return Ok(system);
    }
    let next = Polyhedron::universe(system.vars().to_vec()).with_constraints(simplify(rows));
    remove_redundant(&next)
}

/// Gauss-Jordan on the equalities, pivoting on each one's last variable in
/// `order`, and substitution of the pivots into the inequalities. Gives the
/// same solution set in a presentation where no inequality mentions a
/// variable an equality determines.
fn reduce_by_equalities(rows: Vec<Constraint>, order: &[Var]) -> Vec<Constraint> {
    let mut rows = rows;
    let mut done = 0;
    while let Some(i) = (done..rows.len()).find(|&i| rows[i].relation == Relation::Eq) {
        rows.swap(done, i);
        let eq = rows[done].clone();
        let Some(pivot) = order.iter().rev().find(|v| eq.expr.mentions(v)).cloned() else {
            done += 1;
            continue;
        };
        let c = eq.expr.coeff(&pivot);
        let mut rest = eq.expr.clone();
        rest.add_term(&pivot, -c.clone());
        let replacement = rest.scaled(&(-Rational::one() / c));
        for (j, r) in rows.iter_mut().enumerate() {
            if j != done {
                *r = Constraint::new(r.expr.substitute(&pivot, &replacement), r.relation);
            }
        }
        done += 1;
    }
    simplify(rows)
}

/// The variable whose elimination creates the fewest rows.
fn pick_variable(rows: &[Constraint], remaining: &[Var]) -> Var {
    remaining
        .iter()
        .min_by_key(|v| {
            let pos = rows.iter().filter(|r| r.expr.coeff(v).is_positive()).count();
            let neg = rows.iter().filter(|r| r.expr.coeff(v).is_negative()).count();
            (pos * neg) as isize - (pos + neg) as isize
        })
        .expect("remaining is nonempty")
        .clone()
}

fn combine(rows: Vec<Constraint>, v: &Var, limits: &Limits) -> Result<Vec<Constraint>> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut out = Vec::new();
    for r in rows {
        let c = r.expr.coeff(v);
        if c.is_zero() {
            out.push(r);
        } else if c.is_positive() {
            pos.push(r);
        } else {
            neg.push(r);
        }
    }
    let produced = out.len() + pos.len() * neg.len();
    if produced > limits.fm_row_cap {
        return Err(Error::RowCap {
            rows: produced,
            cap: limits.fm_row_cap,
        });
    }
    for p in &pos {
        let cp = p.expr.coeff(v);
        for n in &neg {
            let cn = -n.expr.coeff(v);
            let mut e = p.expr.scaled(&cn);
            e.add_scaled(&n.expr, &cp);
            debug_assert!(e.coeff(v).is_zero());
            let relation = if p.is_strict() || n.is_strict() {
                Relation::Gt
            } else {
                Relation::Geq
            };
            out.push(Constraint::new(e, relation));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::equivalent;
    use crate::rational::int;

    fn v(n: &str) -> Var {
        Var::new(n)
    }

    fn expr(terms: &[(i64, &str)], c: i64) -> LinExpr {
        let mut e = LinExpr::constant(int(c));
        for &(k, name) in terms {
            e.add_term(&v(name), int(k));
        }
        e
    }

    fn poly(vars: &[&str], rows: Vec<Constraint>) -> Polyhedron {
        Polyhedron::new(vars.iter().map(|n| v(n)).collect(), rows).unwrap()
    }

    #[test]
    fn unconstrained_projection_is_empty() {
        let p = poly(&["x", "y"], vec![Constraint::geq(expr(&[(1, "x")], 0))]);
        let q = fm_project(&p, &[v("x")], &Limits::default()).unwrap();
        assert_eq!(q.vars(), &[v("y")]);
        assert!(q.is_empty());
    }

    #[test]
    fn eliminating_y_keeps_both_bounds_on_x() {
        // {x + y >= 0, -y >= 0, x <= 3}: y in [-x, 0] is nonempty iff x >= 0.
        let p = poly(
            &["x", "y"],
            vec![
                Constraint::geq(expr(&[(1, "x"), (1, "y")], 0)),
                Constraint::geq(expr(&[(-1, "y")], 0)),
                Constraint::geq(expr(&[(-1, "x")], 3)),
            ],
        );
        let q = fm_project(&p, &[v("y")], &Limits::default()).unwrap();
        let expected = poly(
            &["x"],
            vec![
                Constraint::geq(expr(&[(1, "x")], 0)),
                Constraint::geq(expr(&[(-1, "x")], 3)),
            ],
        );
        assert!(equivalent(&q, &expected).unwrap());
        assert_eq!(q.len(), 2);
    }

    #[test]
    fn strictness_propagates() {
        // x > y, y >= 0  ==>  x > 0
        let p = poly(
            &["x", "y"],
            vec![
                Constraint::gt(expr(&[(1, "x"), (-1, "y")], 0)),
                Constraint::geq(expr(&[(1, "y")], 0)),
            ],
        );
        let q = fm_project(&p, &[v("y")], &Limits::default()).unwrap();
        assert_eq!(q.constraints(), &[Constraint::gt(expr(&[(1, "x")], 0))]);
    }

    #[test]
    fn equalities_substitute() {
        // x = 2y, y >= 1  ==>  x >= 2
        let p = poly(
            &["x", "y"],
            vec![
                Constraint::eq(expr(&[(1, "x"), (-2, "y")], 0)),
                Constraint::geq(expr(&[(1, "y")], -1)),
            ],
        );
        let q = fm_project(&p, &[v("y")], &Limits::default()).unwrap();
        assert_eq!(q.constraints(), &[Constraint::geq(expr(&[(1, "x")], -2))]);
    }

    #[test]
    fn row_cap_fails_loudly() {
        let mut rows = Vec::new();
        for i in 0..6 {
            rows.push(Constraint::geq(expr(&[(1, "z"), (i + 1, "x")], i)));
            rows.push(Constraint::geq(expr(&[(-1, "z"), (i + 2, "y")], i)));
        }
        let p = poly(&["x", "y", "z"], rows);
        let err = fm_project(&p, &[v("z")], &Limits { fm_row_cap: 10 }).unwrap_err();
        assert!(matches!(err, Error::RowCap { rows: 36, cap: 10 }));
    }

    #[test]
    fn redundancy_examples() {
        let p = poly(
            &["x"],
            vec![
                Constraint::geq(expr(&[(1, "x")], 0)),
                Constraint::geq(expr(&[(1, "x")], 1)),
            ],
        );
        let r = remove_redundant(&p).unwrap();
        assert_eq!(r.constraints(), &[Constraint::geq(expr(&[(1, "x")], 0))]);

        let p = poly(&["x"], vec![Constraint::geq(expr(&[(1, "x")], 0))]);
        assert_eq!(remove_redundant(&p).unwrap(), p);
    }

    #[test]
    fn infeasible_projection_is_a_contradiction() {
        let p = poly(
            &["x", "y"],
            vec![
                Constraint::geq(expr(&[(1, "y")], 0)),
                Constraint::geq(expr(&[(-1, "y")], -1)),
            ],
        );
        let q = fm_project(&p, &[v("y")], &Limits::default()).unwrap();
        assert!(!crate::lp::is_feasible(&q).unwrap());
    }
}
