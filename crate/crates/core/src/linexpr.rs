//! Variables and linear expressions with rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::rational::{format_rational, Rational};

/// A variable identifier. Cheap to clone and safe to share across threads.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: impl AsRef<str>) -> Self {
        Var(Arc::from(name.as_ref()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// The post-state copy `x'` of a loop variable `x`.
    pub fn primed(&self) -> Var {
        Var::new(format!("{}'", self.0))
    }

    pub fn is_primed(&self) -> bool {
        self.0.ends_with('\'')
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var::new(s)
    }
}

/// A point: values for some set of variables.
pub type Assignment = BTreeMap<Var, Rational>;

/// `Σ coeff·var + constant`. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LinExpr {
    coeffs: BTreeMap<Var, Rational>,
    constant: Rational,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        LinExpr {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(v: &Var) -> Self {
        Self::term(Rational::one(), v)
    }

    pub fn term(c: Rational, v: &Var) -> Self {
        let mut e = Self::zero();
        e.add_term(v, c);
        e
    }

    /// Builds from `(coefficient, variable)` pairs plus a constant.
    pub fn from_terms<'a>(
        terms: impl IntoIterator<Item = (Rational, &'a Var)>,
        constant: Rational,
    ) -> Self {
        let mut e = Self::constant(constant);
        for (c, v) in terms {
            e.add_term(v, c);
        }
        e
    }

    pub fn add_term(&mut self, v: &Var, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(v.clone()).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(v);
        }
    }

    pub fn add_constant(&mut self, c: &Rational) {
        self.constant += c;
    }

    pub fn coeff(&self, v: &Var) -> Rational {
        self.coeffs.get(v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> &Rational {
        &self.constant
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Var, &Rational)> {
        self.coeffs.iter()
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.coeffs.keys()
    }

    pub fn mentions(&self, v: &Var) -> bool {
        self.coeffs.contains_key(v)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn scaled(&self, q: &Rational) -> LinExpr {
        if q.is_zero() {
            return LinExpr::zero();
        }
        LinExpr {
            coeffs: self
                .coeffs
                .iter()
                .map(|(v, c)| (v.clone(), c * q))
                .collect(),
            constant: &self.constant * q,
        }
    }

    /// `self + q·other`.
    pub fn add_scaled(&mut self, other: &LinExpr, q: &Rational) {
        if q.is_zero() {
            return;
        }
        for (v, c) in &other.coeffs {
            self.add_term(v, c * q);
        }
        self.constant += &other.constant * q;
    }

    /// Evaluates at `point`; `None` if some variable is unassigned.
    pub fn eval(&self, point: &Assignment) -> Option<Rational> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            acc += c * point.get(v)?;
        }
        Some(acc)
    }

    /// Replaces `v` by `replacement`.
    pub fn substitute(&self, v: &Var, replacement: &LinExpr) -> LinExpr {
        match self.coeffs.get(v) {
            None => self.clone(),
            Some(c) => {
                let c = c.clone();
                let mut out = self.clone();
                out.coeffs.remove(v);
                out.add_scaled(replacement, &c);
                out
            }
        }
    }

    /// Substitutes every assigned variable by its value.
    pub fn partial_eval(&self, values: &Assignment) -> LinExpr {
        let mut out = LinExpr::constant(self.constant.clone());
        for (v, c) in &self.coeffs {
            match values.get(v) {
                Some(val) => out.constant += c * val,
                None => out.add_term(v, c.clone()),
            }
        }
        out
    }

    /// Renames variables through `f`; coefficients of colliding images add up.
    pub fn rename(&self, mut f: impl FnMut(&Var) -> Var) -> LinExpr {
        let mut out = LinExpr::constant(self.constant.clone());
        for (v, c) in &self.coeffs {
            out.add_term(&f(v), c.clone());
        }
        out
    }

    /// The expression without its constant term.
    pub fn linear_part(&self) -> LinExpr {
        LinExpr {
            coeffs: self.coeffs.clone(),
            constant: Rational::zero(),
        }
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        self.add_scaled(&rhs, &Rational::one());
        self
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, rhs: LinExpr) -> LinExpr {
        self.add_scaled(&rhs, &-Rational::one());
        self
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self.scaled(&-Rational::one())
    }
}

/// Writes `terms` and `constant` in the `2*x - 3/2*y + 1` style the loop
/// file parser accepts.
pub(crate) fn write_terms<'a>(
    f: &mut impl fmt::Write,
    terms: impl IntoIterator<Item = (&'a Var, &'a Rational)>,
    constant: &Rational,
) -> fmt::Result {
    let mut first = true;
    for (v, c) in terms {
        if c.is_zero() {
            continue;
        }
        let magnitude = c.abs();
        if first {
            if c.is_negative() {
                f.write_str("-")?;
            }
        } else if c.is_negative() {
            f.write_str(" - ")?;
        } else {
            f.write_str(" + ")?;
        }
        if magnitude.is_one() {
            write!(f, "{v}")?;
        } else {
            write!(f, "{}*{v}", format_rational(&magnitude))?;
        }
        first = false;
    }
    if first {
        write!(f, "{}", format_rational(constant))?;
    } else if !constant.is_zero() {
        let sign = if constant.is_negative() { "-" } else { "+" };
        write!(f, " {sign} {}", format_rational(&constant.abs()))?;
    }
    Ok(())
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.coeffs.iter(), &self.constant)
    }
}

impl fmt::Debug for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinExpr({self})")
    }
}
