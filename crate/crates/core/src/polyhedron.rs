//! Conjunctions of linear constraints in canonical `expr ⋈ 0` form.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linexpr::{write_terms, Assignment, LinExpr, Var};
use crate::rational::{denominator_lcm, numerator_gcd, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    /// `expr >= 0`
    Geq,
    /// `expr > 0`
    Gt,
    /// `expr = 0`
    Eq,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub expr: LinExpr,
    pub relation: Relation,
}

impl Constraint {
    pub fn new(expr: LinExpr, relation: Relation) -> Self {
        Constraint { expr, relation }
    }

    pub fn geq(expr: LinExpr) -> Self {
        Self::new(expr, Relation::Geq)
    }

    pub fn gt(expr: LinExpr) -> Self {
        Self::new(expr, Relation::Gt)
    }

    pub fn eq(expr: LinExpr) -> Self {
        Self::new(expr, Relation::Eq)
    }

    pub fn is_strict(&self) -> bool {
        self.relation == Relation::Gt
    }

    /// Exact check at `point`; `None` if a variable is unassigned.
    pub fn holds(&self, point: &Assignment) -> Option<bool> {
        let value = self.expr.eval(point)?;
        Some(match self.relation {
            Relation::Geq => !value.is_negative(),
            Relation::Gt => value.is_positive(),
            Relation::Eq => value.is_zero(),
        })
    }

    /// For a row without variables, whether it is trivially true.
    pub fn constant_truth(&self) -> Option<bool> {
        if !self.expr.is_constant() {
            return None;
        }
        self.holds(&Assignment::new())
    }

    /// Scales to integer coefficients with unit content. Equalities are
    /// oriented so that their leading coefficient is positive.
    pub fn normalized(&self) -> Constraint {
        let mut values: Vec<&Rational> = self.expr.terms().map(|(_, c)| c).collect();
        values.push(self.expr.constant_term());
        let lcm = Rational::from_integer(denominator_lcm(values.iter().copied()));
        let scaled = self.expr.scaled(&lcm);
        let mut ints: Vec<&Rational> = scaled.terms().map(|(_, c)| c).collect();
        ints.push(scaled.constant_term());
        let mut gcd = numerator_gcd(ints);
        if gcd.is_zero() {
            gcd = BigInt::one();
        }
        let mut factor = Rational::new(BigInt::one(), gcd);
        if self.relation == Relation::Eq {
            if let Some((_, c)) = scaled.terms().next() {
                if c.is_negative() {
                    factor = -factor;
                }
            }
        }
        Constraint::new(scaled.scaled(&factor), self.relation)
    }

    /// Rows whose disjunction is the complement of this row.
    pub fn negation(&self) -> Vec<Constraint> {
        let neg = -self.expr.clone();
        match self.relation {
            Relation::Geq => vec![Constraint::gt(neg)],
            Relation::Gt => vec![Constraint::geq(neg)],
            Relation::Eq => vec![Constraint::gt(self.expr.clone()), Constraint::gt(neg)],
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.relation {
            Relation::Geq => ">=",
            Relation::Gt => ">",
            Relation::Eq => "=",
        };
        write!(f, "{} {op} 0", self.expr)
    }
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Renders `row` as `lhs op rhs` with the constant moved to the right and a
/// positive leading coefficient, e.g. `-b1 - 2 >= 0` becomes `b1 <= -2`.
pub fn pretty_constraint(row: &Constraint) -> String {
    let row = row.normalized();
    let mut lhs: Vec<(Var, Rational)> = row
        .expr
        .terms()
        .map(|(v, c)| (v.clone(), c.clone()))
        .collect();
    let mut rhs = -row.expr.constant_term().clone();
    let mut op = match row.relation {
        Relation::Geq => ">=",
        Relation::Gt => ">",
        Relation::Eq => "=",
    };
    if lhs.first().is_some_and(|(_, c)| c.is_negative()) {
        for (_, c) in lhs.iter_mut() {
            *c = -c.clone();
        }
        rhs = -rhs;
        op = match op {
            ">=" => "<=",
            ">" => "<",
            other => other,
        };
    }
    let mut out = String::new();
    write_terms(
        &mut out,
        lhs.iter().map(|(v, c)| (v, c)),
        &Rational::zero(),
    )
    .expect("writing to a String cannot fail");
    format!("{out} {op} {}", crate::rational::format_rational(&rhs))
}

/// A finite conjunction of constraints over an ordered variable set.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Polyhedron {
    vars: Vec<Var>,
    constraints: Vec<Constraint>,
}

impl Polyhedron {
    /// The unconstrained polyhedron over `vars`.
    pub fn universe(vars: Vec<Var>) -> Self {
        let mut seen = BTreeSet::new();
        let vars = vars.into_iter().filter(|v| seen.insert(v.clone())).collect();
        Polyhedron {
            vars,
            constraints: Vec::new(),
        }
    }

    /// Fails if a constraint mentions a variable outside `vars`.
    pub fn new(vars: Vec<Var>, constraints: Vec<Constraint>) -> Result<Self> {
        let mut p = Self::universe(vars);
        for c in constraints {
            p.push(c)?;
        }
        Ok(p)
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn has_var(&self, v: &Var) -> bool {
        self.vars.contains(v)
    }

    pub fn has_strict(&self) -> bool {
        self.constraints.iter().any(Constraint::is_strict)
    }

    pub fn push(&mut self, c: Constraint) -> Result<()> {
        if let Some(v) = c.expr.vars().find(|v| !self.vars.contains(v)) {
            return Err(Error::Structural(format!(
                "constraint `{c}` mentions `{v}`, which is not among the declared variables"
            )));
        }
        self.constraints.push(c);
        Ok(())
    }

    /// Adds `c`, declaring any new variables it mentions.
    pub fn push_extending(&mut self, c: Constraint) {
        for v in c.expr.vars() {
            if !self.vars.contains(v) {
                self.vars.push(v.clone());
            }
        }
        self.constraints.push(c);
    }

    pub fn add_var(&mut self, v: Var) {
        if !self.vars.contains(&v) {
            self.vars.push(v);
        }
    }

    pub fn with(mut self, c: Constraint) -> Self {
        self.push_extending(c);
        self
    }

    /// Conjunction; the variable list is the ordered union.
    pub fn conjoin(&self, other: &Polyhedron) -> Polyhedron {
        let mut out = self.clone();
        for v in &other.vars {
            out.add_var(v.clone());
        }
        out.constraints.extend(other.constraints.iter().cloned());
        out
    }

    /// Exact membership test. `None` if `point` misses a variable used by a row.
    pub fn contains(&self, point: &Assignment) -> Option<bool> {
        for c in &self.constraints {
            if !c.holds(point)? {
                return Some(false);
            }
        }
        Some(true)
    }

    /// The same rows with strict inequalities relaxed to non-strict.
    pub fn closure(&self) -> Polyhedron {
        Polyhedron {
            vars: self.vars.clone(),
            constraints: self
                .constraints
                .iter()
                .map(|c| match c.relation {
                    Relation::Gt => Constraint::geq(c.expr.clone()),
                    _ => c.clone(),
                })
                .collect(),
        }
    }

    /// Replaces the constraint list, keeping the variable set.
    pub(crate) fn with_constraints(&self, constraints: Vec<Constraint>) -> Polyhedron {
        Polyhedron {
            vars: self.vars.clone(),
            constraints,
        }
    }

    /// Substitutes fixed values for some variables and drops them from the
    /// variable list.
    pub fn fix(&self, values: &Assignment) -> Polyhedron {
        Polyhedron {
            vars: self
                .vars
                .iter()
                .filter(|v| !values.contains_key(v))
                .cloned()
                .collect(),
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint::new(c.expr.partial_eval(values), c.relation))
                .collect(),
        }
    }
}

impl fmt::Display for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.constraints.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polyhedron{:?} {self}", self.vars)
    }
}
