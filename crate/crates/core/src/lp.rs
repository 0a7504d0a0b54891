//! Exact rational linear programming.
//!
//! A dense two-phase primal simplex over [`Rational`] with Bland's
//! anti-cycling rule. Strict rows are handled on top of it: every strict
//! row `e > 0` becomes `e >= s` for one shared slack `s` with `0 <= s <= 1`,
//! and the system is strictly feasible iff the maximal `s` is positive.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linexpr::{Assignment, LinExpr, Var};
use crate::polyhedron::{Constraint, Polyhedron, Relation};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Maximize,
    Minimize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Objective {
    pub expr: LinExpr,
    pub direction: Direction,
}

impl Objective {
    pub fn minimize(expr: LinExpr) -> Self {
        Objective {
            expr,
            direction: Direction::Minimize,
        }
    }

    pub fn maximize(expr: LinExpr) -> Self {
        Objective {
            expr,
            direction: Direction::Maximize,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    /// Feasible, no objective was given.
    Feasible,
    Infeasible,
    Unbounded,
    /// The optimum is attained at `point`.
    Optimal,
    /// Strict rows only: the objective's supremum (or infimum) is finite
    /// but not attained. `objective_value` holds the bound, no point.
    Supremum,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub point: Option<Assignment>,
    pub objective_value: Option<Rational>,
}

impl LpOutcome {
    fn infeasible() -> Self {
        LpOutcome {
            status: LpStatus::Infeasible,
            point: None,
            objective_value: None,
        }
    }

    fn unbounded() -> Self {
        LpOutcome {
            status: LpStatus::Unbounded,
            point: None,
            objective_value: None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        !matches!(self.status, LpStatus::Infeasible)
    }
}

/// Solves `system`, optionally optimizing `objective` over it.
///
/// Without an objective the result is `Feasible` (with an exact witness) or
/// `Infeasible`. With one, `Optimal`, `Unbounded`, `Infeasible`, or for
/// systems with strict rows possibly `Supremum`.
pub fn lp_solve(system: &Polyhedron, objective: Option<&Objective>) -> Result<LpOutcome> {
    if let Some(obj) = objective {
        if let Some(v) = obj.expr.vars().find(|v| !system.has_var(v)) {
            return Err(Error::Structural(format!(
                "objective mentions `{v}`, which the system does not declare"
            )));
        }
    }
    let outcome = if system.has_strict() {
        solve_strict(system, objective)?
    } else {
        match solve_closed(system, objective)? {
            Closed::Infeasible => LpOutcome::infeasible(),
            Closed::Unbounded => LpOutcome::unbounded(),
            Closed::Optimal(point, value) => LpOutcome {
                status: if objective.is_some() {
                    LpStatus::Optimal
                } else {
                    LpStatus::Feasible
                },
                point: Some(point),
                objective_value: objective.map(|_| value),
            },
        }
    };
    if let Some(point) = &outcome.point {
        if system.contains(point) != Some(true) {
            return Err(Error::Internal(format!(
                "simplex returned a point violating {system}"
            )));
        }
    }
    Ok(outcome)
}

pub fn is_feasible(system: &Polyhedron) -> Result<bool> {
    Ok(lp_solve(system, None)?.is_feasible())
}

/// A point of `system`, if it has one.
pub fn feasible_point(system: &Polyhedron) -> Result<Option<Assignment>> {
    Ok(lp_solve(system, None)?.point)
}

/// Whether every solution of `system` satisfies `row`.
pub fn implies(system: &Polyhedron, row: &Constraint) -> Result<bool> {
    for neg in row.negation() {
        let mut probe = system.clone();
        probe.push_extending(neg);
        if is_feasible(&probe)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether the solution set of `inner` is contained in that of `outer`.
pub fn includes(outer: &Polyhedron, inner: &Polyhedron) -> Result<bool> {
    for row in outer.constraints() {
        if !implies(inner, row)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Same solution set, checked by mutual inclusion.
pub fn equivalent(a: &Polyhedron, b: &Polyhedron) -> Result<bool> {
    Ok(includes(a, b)? && includes(b, a)?)
}

/// The largest `s` in `[0, 1]` such that every strict row `e > 0` of
/// `system` can be satisfied as `e >= s` together with the non-strict rows.
/// `None` when the strict system is infeasible (including `s* = 0`).
pub fn strict_margin(system: &Polyhedron) -> Result<Option<Rational>> {
    Ok(margin_and_point(system)?.map(|(s, _)| s))
}

/// Replaces every strict row `e > 0` by `e - margin >= 0`.
pub fn tighten_strict(system: &Polyhedron, margin: &Rational) -> Polyhedron {
    system.with_constraints(
        system
            .constraints()
            .iter()
            .map(|c| match c.relation {
                Relation::Gt => {
                    let mut e = c.expr.clone();
                    e.add_constant(&-margin.clone());
                    Constraint::geq(e)
                }
                _ => c.clone(),
            })
            .collect(),
    )
}

fn fresh_var(system: &Polyhedron, base: &str) -> Var {
    let mut name = base.to_string();
    while system.has_var(&Var::new(&name)) {
        name.push('_');
    }
    Var::new(name)
}

fn margin_and_point(system: &Polyhedron) -> Result<Option<(Rational, Assignment)>> {
    let s = fresh_var(system, "$margin");
    let mut relaxed = system.with_constraints(Vec::new());
    relaxed.add_var(s.clone());
    for c in system.constraints() {
        let row = match c.relation {
            Relation::Gt => {
                let mut e = c.expr.clone();
                e.add_term(&s, -Rational::one());
                Constraint::geq(e)
            }
            _ => c.clone(),
        };
        relaxed.push_extending(row);
    }
    relaxed.push_extending(Constraint::geq(LinExpr::var(&s)));
    relaxed.push_extending(Constraint::geq(
        LinExpr::constant(Rational::one()) - LinExpr::var(&s),
    ));
    let obj = Objective::maximize(LinExpr::var(&s));
    match solve_closed(&relaxed, Some(&obj))? {
        Closed::Optimal(mut point, value) if value.is_positive() => {
            point.remove(&s);
            Ok(Some((value, point)))
        }
        Closed::Unbounded => Err(Error::Internal("bounded margin LP reported unbounded".into())),
        _ => Ok(None),
    }
}

fn solve_strict(system: &Polyhedron, objective: Option<&Objective>) -> Result<LpOutcome> {
    let Some((_, point)) = margin_and_point(system)? else {
        return Ok(LpOutcome::infeasible());
    };
    let Some(obj) = objective else {
        return Ok(LpOutcome {
            status: LpStatus::Feasible,
            point: Some(point),
            objective_value: None,
        });
    };
    // A nonempty strict system is dense in its closure, so the closure's
    // optimum is the supremum; it is attained iff the optimal face meets the
    // strict system.
    match solve_closed(&system.closure(), Some(obj))? {
        Closed::Infeasible => Err(Error::Internal(
            "closure infeasible although the strict system is feasible".into(),
        )),
        Closed::Unbounded => Ok(LpOutcome::unbounded()),
        Closed::Optimal(_, value) => {
            let mut face = system.clone();
            let mut e = obj.expr.clone();
            e.add_constant(&-value.clone());
            face.push_extending(Constraint::eq(e));
            match margin_and_point(&face)? {
                Some((_, p)) => Ok(LpOutcome {
                    status: LpStatus::Optimal,
                    point: Some(p),
                    objective_value: Some(value),
                }),
                None => Ok(LpOutcome {
                    status: LpStatus::Supremum,
                    point: None,
                    objective_value: Some(value),
                }),
            }
        }
    }
}

enum Closed {
    Infeasible,
    Unbounded,
    Optimal(Assignment, Rational),
}

/// How a system variable maps to tableau columns.
enum ColumnMap {
    /// `v = x[col]`, `x[col] >= 0`
    NonNeg(usize),
    /// `v = x[pos] - x[neg]`
    Free(usize, usize),
}

/// Solves a system with no strict rows. Without an objective, returns any
/// vertex as `Optimal(point, 0)`.
fn solve_closed(system: &Polyhedron, objective: Option<&Objective>) -> Result<Closed> {
    // Trivial rows first: a false constant row makes everything infeasible.
    let mut rows: Vec<&Constraint> = Vec::new();
    for c in system.constraints() {
        match c.constant_truth() {
            Some(true) => {}
            Some(false) => return Ok(Closed::Infeasible),
            None => rows.push(c),
        }
    }

    // Rows `c*v >= 0` with c > 0 become column sign restrictions.
    let vars = system.vars();
    let mut nonneg = vec![false; vars.len()];
    let mut kept: Vec<&Constraint> = Vec::new();
    for c in rows {
        if c.relation == Relation::Geq && c.expr.num_terms() == 1 && c.expr.constant_term().is_zero()
        {
            let (v, coeff) = c.expr.terms().next().expect("one term");
            if coeff.is_positive() {
                let idx = vars.iter().position(|w| w == v).expect("validated polyhedron");
                nonneg[idx] = true;
                continue;
            }
        }
        kept.push(c);
    }

    let mut ncols = 0usize;
    let mut map = Vec::with_capacity(vars.len());
    for &nn in &nonneg {
        if nn {
            map.push(ColumnMap::NonNeg(ncols));
            ncols += 1;
        } else {
            map.push(ColumnMap::Free(ncols, ncols + 1));
            ncols += 2;
        }
    }
    let var_index = |v: &Var| vars.iter().position(|w| w == v).expect("validated polyhedron");

    // Each kept row: Σ a·x (- slack) = rhs.
    let nslack = kept.iter().filter(|c| c.relation == Relation::Geq).count();
    let structural = ncols;
    let total_before_art = structural + nslack;
    let mut dense_rows: Vec<(Vec<Rational>, Rational, Option<usize>)> = Vec::new();
    let mut slack_col = structural;
    for c in &kept {
        let mut row = vec![Rational::zero(); total_before_art];
        for (v, coeff) in c.expr.terms() {
            match map[var_index(v)] {
                ColumnMap::NonNeg(col) => row[col] += coeff,
                ColumnMap::Free(p, n) => {
                    row[p] += coeff;
                    row[n] -= coeff;
                }
            }
        }
        let mut rhs = -c.expr.constant_term().clone();
        let mut slack = None;
        if c.relation == Relation::Geq {
            row[slack_col] = -Rational::one();
            slack = Some(slack_col);
            slack_col += 1;
        }
        // Orient so that rhs >= 0; for inequality rows with rhs == 0 prefer
        // the orientation where the slack enters with +1.
        let flip = rhs.is_negative() || (rhs.is_zero() && slack.is_some());
        if flip {
            for x in row.iter_mut() {
                *x = -x.clone();
            }
            rhs = -rhs;
        }
        let basic_slack = slack.filter(|&s| row[s].is_positive());
        dense_rows.push((row, rhs, basic_slack));
    }

    let mut cost = vec![Rational::zero(); total_before_art];
    let mut cost_constant = Rational::zero();
    if let Some(obj) = objective {
        let sign = match obj.direction {
            Direction::Minimize => Rational::one(),
            Direction::Maximize => -Rational::one(),
        };
        for (v, coeff) in obj.expr.terms() {
            let c = coeff * &sign;
            match map[var_index(v)] {
                ColumnMap::NonNeg(col) => cost[col] += &c,
                ColumnMap::Free(p, n) => {
                    cost[p] += &c;
                    cost[n] -= &c;
                }
            }
        }
        cost_constant = obj.expr.constant_term().clone();
    }

    let mut tableau = Tableau::new(dense_rows, total_before_art);
    if !tableau.phase_one() {
        return Ok(Closed::Infeasible);
    }
    if !tableau.phase_two(&cost) {
        return Ok(Closed::Unbounded);
    }
    let x = tableau.solution();
    let mut point = Assignment::new();
    for (i, v) in vars.iter().enumerate() {
        let value = match map[i] {
            ColumnMap::NonNeg(col) => x[col].clone(),
            ColumnMap::Free(p, n) => &x[p] - &x[n],
        };
        point.insert(v.clone(), value);
    }
    let value = match objective {
        Some(obj) => obj.expr.eval(&point).expect("objective vars validated"),
        None => cost_constant,
    };
    Ok(Closed::Optimal(point, value))
}

/// Dense simplex tableau for `A x = b, x >= 0`, `b >= 0`.
struct Tableau {
    /// `rows[i]` has `ncols + 1` entries, the last one the right-hand side.
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    /// Real (non-artificial) column count.
    ncols: usize,
    /// Total column count including artificials.
    width: usize,
}

impl Tableau {
    fn new(dense_rows: Vec<(Vec<Rational>, Rational, Option<usize>)>, ncols: usize) -> Self {
        let nart = dense_rows.iter().filter(|r| r.2.is_none()).count();
        let width = ncols + nart;
        let mut rows = Vec::with_capacity(dense_rows.len());
        let mut basis = Vec::with_capacity(dense_rows.len());
        let mut art = ncols;
        for (mut row, rhs, basic_slack) in dense_rows {
            row.resize(width, Rational::zero());
            match basic_slack {
                Some(s) => basis.push(s),
                None => {
                    row[art] = Rational::one();
                    basis.push(art);
                    art += 1;
                }
            }
            row.push(rhs);
            rows.push(row);
        }
        Tableau {
            rows,
            basis,
            ncols,
            width,
        }
    }

    fn rhs(&self, i: usize) -> &Rational {
        &self.rows[i][self.width]
    }

    fn pivot(&mut self, obj: &mut [Rational], r: usize, col: usize) {
        let inv = Rational::one() / &self.rows[r][col];
        for x in self.rows[r].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let support: Vec<usize> = (0..=self.width)
            .filter(|&j| !self.rows[r][j].is_zero())
            .collect();
        let pivot_row = self.rows[r].clone();
        let eliminate = |target: &mut [Rational]| {
            let factor = target[col].clone();
            if factor.is_zero() {
                return;
            }
            for &j in &support {
                target[j] -= &factor * &pivot_row[j];
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(obj);
        self.basis[r] = col;
    }

    /// Reduced-cost row for `cost` (length `width`) under the current basis;
    /// the last entry holds minus the objective value.
    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut obj: Vec<Rational> = cost.to_vec();
        obj.resize(self.width + 1, Rational::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = obj[b].clone();
            if cb.is_zero() {
                continue;
            }
            for (o, a) in obj.iter_mut().zip(&self.rows[i]) {
                if !a.is_zero() {
                    *o -= &cb * a;
                }
            }
        }
        obj
    }

    /// Bland's rule iterations over columns `< limit`. Returns false if
    /// unbounded.
    fn optimize(&mut self, obj: &mut [Rational], limit: usize) -> bool {
        loop {
            let Some(col) = (0..limit).find(|&j| obj[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, _)) = best else {
                return false;
            };
            self.pivot(obj, r, col);
        }
    }

    /// Minimizes the sum of artificials, then removes them. False if the
    /// system is infeasible.
    fn phase_one(&mut self) -> bool {
        if self.width == self.ncols {
            return true;
        }
        let mut cost = vec![Rational::zero(); self.width];
        for c in cost.iter_mut().skip(self.ncols) {
            *c = Rational::one();
        }
        let mut obj = self.reduced_costs(&cost);
        let width = self.width;
        self.optimize(&mut obj, width);
        if !obj[self.width].is_zero() {
            return false;
        }
        // Drive zero-valued artificials out of the basis.
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= self.ncols {
                match (0..self.ncols).find(|&j| !self.rows[i][j].is_zero()) {
                    Some(j) => {
                        let mut scratch = vec![Rational::zero(); self.width + 1];
                        self.pivot(&mut scratch, i, j);
                    }
                    None => {
                        // Redundant equality.
                        self.rows.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        let ncols = self.ncols;
        for row in self.rows.iter_mut() {
            let rhs = row[self.width].clone();
            row.truncate(ncols);
            row.push(rhs);
        }
        self.width = ncols;
        true
    }

    fn phase_two(&mut self, cost: &[Rational]) -> bool {
        let mut obj = self.reduced_costs(cost);
        let width = self.width;
        self.optimize(&mut obj, width)
    }

    fn solution(&self) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.width];
        for (i, &b) in self.basis.iter().enumerate() {
            x[b] = self.rhs(i).clone();
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

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
    fn contradictory_bounds_are_infeasible() {
        let p = poly(
            &["x"],
            vec![
                Constraint::geq(expr(&[(1, "x")], 0)),
                Constraint::geq(expr(&[(-1, "x")], -1)),
            ],
        );
        assert_eq!(lp_solve(&p, None).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn strict_rows_are_exact() {
        // x >= 0, -x >= 0 is feasible; adding x > 0 is not.
        let base = poly(
            &["x"],
            vec![
                Constraint::geq(expr(&[(1, "x")], 0)),
                Constraint::geq(expr(&[(-1, "x")], 0)),
            ],
        );
        assert!(is_feasible(&base).unwrap());
        let strict = base.with(Constraint::gt(expr(&[(1, "x")], 0)));
        assert_eq!(lp_solve(&strict, None).unwrap().status, LpStatus::Infeasible);
        // 0 < x < 1/1000 is feasible, and the witness is strictly inside.
        let thin = poly(
            &["x"],
            vec![
                Constraint::gt(expr(&[(1, "x")], 0)),
                Constraint::gt(LinExpr::constant(ratio(1, 1000)) - LinExpr::var(&v("x"))),
            ],
        );
        let out = lp_solve(&thin, None).unwrap();
        assert_eq!(out.status, LpStatus::Feasible);
        assert_eq!(thin.contains(out.point.as_ref().unwrap()), Some(true));
    }

    #[test]
    fn optimization_over_free_variables() {
        // max x + y s.t. x + 2y <= 4, 3x + y <= 6 (x, y free) is unbounded
        // below x; with x, y >= 0 the optimum is 14/5 at (8/5, 6/5).
        let mut p = poly(
            &["x", "y"],
            vec![
                Constraint::geq(expr(&[(-1, "x"), (-2, "y")], 4)),
                Constraint::geq(expr(&[(-3, "x"), (-1, "y")], 6)),
            ],
        );
        let obj = Objective::maximize(expr(&[(1, "x"), (1, "y")], 0));
        let out = lp_solve(&p, Some(&obj)).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert_eq!(out.objective_value, Some(ratio(14, 5)));
        let min = Objective::minimize(expr(&[(1, "x"), (1, "y")], 0));
        assert_eq!(lp_solve(&p, Some(&min)).unwrap().status, LpStatus::Unbounded);
        p.push(Constraint::geq(expr(&[(1, "x")], 0))).unwrap();
        p.push(Constraint::geq(expr(&[(1, "y")], 0))).unwrap();
        let out = lp_solve(&p, Some(&min)).unwrap();
        assert_eq!(out.objective_value, Some(int(0)));
    }

    #[test]
    fn supremum_of_open_set_is_reported() {
        let p = poly(&["x"], vec![Constraint::gt(expr(&[(-1, "x")], 1))]);
        let out = lp_solve(&p, Some(&Objective::maximize(expr(&[(1, "x")], 0)))).unwrap();
        assert_eq!(out.status, LpStatus::Supremum);
        assert_eq!(out.objective_value, Some(int(1)));
        assert!(out.point.is_none());
        // Attained when the optimal face meets the strict part.
        let q = poly(
            &["x", "y"],
            vec![
                Constraint::geq(expr(&[(-1, "x")], 1)),
                Constraint::gt(expr(&[(1, "y")], 0)),
            ],
        );
        let out = lp_solve(&q, Some(&Objective::maximize(expr(&[(1, "x")], 0)))).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert_eq!(out.objective_value, Some(int(1)));
    }

    #[test]
    fn equalities_and_redundant_rows() {
        let p = poly(
            &["x", "y"],
            vec![
                Constraint::eq(expr(&[(1, "x"), (1, "y")], -2)),
                Constraint::eq(expr(&[(2, "x"), (2, "y")], -4)),
                Constraint::eq(expr(&[(1, "x"), (-1, "y")], 0)),
            ],
        );
        let out = lp_solve(&p, None).unwrap();
        let pt = out.point.unwrap();
        assert_eq!(pt[&v("x")], int(1));
        assert_eq!(pt[&v("y")], int(1));
    }

    #[test]
    fn objective_must_use_declared_vars() {
        let p = poly(&["x"], vec![]);
        let obj = Objective::minimize(expr(&[(1, "z")], 0));
        assert!(matches!(lp_solve(&p, Some(&obj)), Err(Error::Structural(_))));
    }

    #[test]
    fn implication_and_equivalence() {
        let p = poly(&["x"], vec![Constraint::geq(expr(&[(1, "x")], 0))]);
        assert!(implies(&p, &Constraint::geq(expr(&[(1, "x")], 1))).unwrap());
        assert!(!implies(&p, &Constraint::gt(expr(&[(1, "x")], 0))).unwrap());
        let q = poly(
            &["x"],
            vec![
                Constraint::geq(expr(&[(2, "x")], 0)),
                Constraint::geq(expr(&[(1, "x")], 5)),
            ],
        );
        assert!(equivalent(&p, &q).unwrap());
    }

    #[test]
    fn margin_is_capped_at_one() {
        let p = poly(&["x"], vec![Constraint::gt(expr(&[(1, "x")], 0))]);
        assert_eq!(strict_margin(&p).unwrap(), Some(int(1)));
        let q = poly(
            &["x"],
            vec![
                Constraint::gt(expr(&[(1, "x")], 0)),
                Constraint::gt(LinExpr::constant(ratio(1, 2)) - LinExpr::var(&v("x"))),
            ],
        );
        assert_eq!(strict_margin(&q).unwrap(), Some(ratio(1, 4)));
    }
}
