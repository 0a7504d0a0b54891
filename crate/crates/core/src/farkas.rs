//! Farkas duals of parametric implications and their linearization.
//!
//! For a satisfiable premise `S = { a_i·x + b_i >= 0 }`, the implication
//! `S => c·x + d >= 0` holds iff there are multipliers `λ_i >= 0` with
//! `c_j = Σ λ_i a_ij` for every variable and `d >= Σ λ_i b_i`. Here the
//! coefficients `c`, `d` (and, for the one extra premise row `f(x) >= k`,
//! the coefficients of that row) may be linear in parameters, so the dual
//! can contain products `λ·param`. [`linearize`] removes them by splitting
//! on `λ = 0` versus `λ > 0`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linexpr::{Assignment, LinExpr, Var};
use crate::loop_model::{CandidateFn, SlcLoop};
use crate::polyhedron::{Constraint, Polyhedron, Relation};
use crate::rational::Rational;

/// `Σ_j coeff_j·x_j + constant >= 0` where each coefficient is itself a
/// linear expression over parameters.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ParamRow {
    pub coeffs: BTreeMap<Var, LinExpr>,
    pub constant: LinExpr,
}

impl ParamRow {
    /// A row with constant coefficients.
    pub fn from_expr(e: &LinExpr) -> Self {
        ParamRow {
            coeffs: e
                .terms()
                .map(|(v, c)| (v.clone(), LinExpr::constant(c.clone())))
                .collect(),
            constant: LinExpr::constant(e.constant_term().clone()),
        }
    }

    pub fn coeff(&self, v: &Var) -> LinExpr {
        self.coeffs.get(v).cloned().unwrap_or_default()
    }

    pub fn set_coeff(&mut self, v: &Var, e: LinExpr) {
        if e == LinExpr::zero() {
            self.coeffs.remove(v);
        } else {
            self.coeffs.insert(v.clone(), e);
        }
    }

    fn params(&self) -> impl Iterator<Item = &Var> {
        self.coeffs
            .values()
            .chain(std::iter::once(&self.constant))
            .flat_map(|e| e.vars())
    }
}

/// A function template `Σ coeff_j·x_j + constant` over loop variables whose
/// coefficients are linear in parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FnTemplate {
    pub coeffs: Vec<(Var, LinExpr)>,
    pub constant: LinExpr,
}

impl FnTemplate {
    /// One fresh parameter per loop variable, named `{prefix}1 .. {prefix}n`.
    pub fn parametric(vars: &[Var], prefix: &str) -> (FnTemplate, Vec<Var>) {
        let params: Vec<Var> = (1..=vars.len())
            .map(|i| Var::new(format!("{prefix}{i}")))
            .collect();
        let t = FnTemplate {
            coeffs: vars
                .iter()
                .zip(&params)
                .map(|(v, p)| (v.clone(), LinExpr::var(p)))
                .collect(),
            constant: LinExpr::zero(),
        };
        (t, params)
    }

    pub fn fixed(f: &CandidateFn) -> FnTemplate {
        FnTemplate {
            coeffs: f
                .coeffs()
                .iter()
                .map(|(v, c)| (v.clone(), LinExpr::constant(c.clone())))
                .collect(),
            constant: LinExpr::constant(f.constant().clone()),
        }
    }
}

/// `coeff · multiplier · param`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Product {
    pub coeff: Rational,
    pub multiplier: Var,
    pub param: Var,
}

/// `linear + Σ products ⋈ 0`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualRow {
    pub linear: LinExpr,
    pub products: Vec<Product>,
    pub relation: Relation,
}

impl DualRow {
    fn is_trivial(&self) -> bool {
        self.products.is_empty() && self.linear == LinExpr::zero()
    }
}

/// Which premise row a multiplier belongs to. Equality rows contribute two
/// multipliers, one per orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PremiseRef {
    pub row: usize,
    pub negated: bool,
}

/// `∃ λ >= 0` such that coefficient-matching equalities and the offset
/// inequality hold, over multipliers and parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualSystem {
    multipliers: Vec<Var>,
    params: Vec<Var>,
    rows: Vec<DualRow>,
    premise_rows: Vec<PremiseRef>,
}

impl DualSystem {
    pub fn multipliers(&self) -> &[Var] {
        &self.multipliers
    }

    pub fn params(&self) -> &[Var] {
        &self.params
    }

    pub fn rows(&self) -> &[DualRow] {
        &self.rows
    }

    pub fn premise_rows(&self) -> &[PremiseRef] {
        &self.premise_rows
    }

    pub fn is_linear(&self) -> bool {
        self.rows.iter().all(|r| r.products.is_empty())
    }

    fn vars(&self) -> Vec<Var> {
        self.multipliers.iter().chain(&self.params).cloned().collect()
    }

    /// The dual as a polyhedron over multipliers and parameters. Fails if it
    /// still contains products.
    pub fn system(&self) -> Result<Polyhedron> {
        if !self.is_linear() {
            return Err(Error::Structural(
                "dual system contains multiplier-parameter products; linearize it first".into(),
            ));
        }
        Polyhedron::new(
            self.vars(),
            self.rows
                .iter()
                .map(|r| Constraint::new(r.linear.clone(), r.relation))
                .collect(),
        )
    }

    /// Substitutes values for some parameters, which turns the products on
    /// them into linear multiplier terms. Returns a polyhedron over the
    /// multipliers and the parameters left free.
    pub fn instantiate(&self, values: &Assignment) -> Result<Polyhedron> {
        let mut rows = Vec::with_capacity(self.rows.len());
        for r in &self.rows {
            let mut e = r.linear.partial_eval(values);
            for p in &r.products {
                let value = values.get(&p.param).ok_or_else(|| {
                    Error::Structural(format!("no value for product parameter `{}`", p.param))
                })?;
                e.add_term(&p.multiplier, &p.coeff * value);
            }
            rows.push(Constraint::new(e, r.relation));
        }
        let vars = self
            .vars()
            .into_iter()
            .filter(|v| !values.contains_key(v))
            .collect();
        Polyhedron::new(vars, rows)
    }
}

/// Dual of `premise => conclusion >= 0`, with multipliers named
/// `{prefix}1, {prefix}2, ...` in premise row order.
pub fn farkas_dual(
    premise: &Polyhedron,
    conclusion: &ParamRow,
    params: &[Var],
    prefix: &str,
) -> Result<DualSystem> {
    let (rows, refs) = expand_premise(premise)?;
    dual_of(&rows, refs, premise.vars(), conclusion, params, prefix)
}

fn expand_premise(premise: &Polyhedron) -> Result<(Vec<ParamRow>, Vec<PremiseRef>)> {
    let mut rows = Vec::new();
    let mut refs = Vec::new();
    for (i, c) in premise.constraints().iter().enumerate() {
        match c.relation {
            Relation::Gt => {
                return Err(Error::Structural(format!(
                    "premise row `{c}` is strict; Farkas duals need non-strict premises"
                )))
            }
            Relation::Geq => {
                rows.push(ParamRow::from_expr(&c.expr));
                refs.push(PremiseRef { row: i, negated: false });
            }
            Relation::Eq => {
                rows.push(ParamRow::from_expr(&c.expr));
                refs.push(PremiseRef { row: i, negated: false });
                rows.push(ParamRow::from_expr(&-c.expr.clone()));
                refs.push(PremiseRef { row: i, negated: true });
            }
        }
    }
    Ok((rows, refs))
}

/// `multiplier · e`, splitting `e`'s parameter terms into products.
fn scale_by_multiplier(row: &mut DualRow, lambda: &Var, e: &LinExpr, sign: &Rational) {
    row.linear.add_term(lambda, e.constant_term() * sign);
    for (param, q) in e.terms() {
        row.products.push(Product {
            coeff: q * sign,
            multiplier: lambda.clone(),
            param: param.clone(),
        });
    }
}

fn dual_of(
    premise: &[ParamRow],
    refs: Vec<PremiseRef>,
    universals: &[Var],
    conclusion: &ParamRow,
    params: &[Var],
    prefix: &str,
) -> Result<DualSystem> {
    let declared: BTreeSet<&Var> = params.iter().collect();
    for row in premise.iter().chain(std::iter::once(conclusion)) {
        if let Some(p) = row.params().find(|p| !declared.contains(p)) {
            return Err(Error::Structural(format!("undeclared parameter `{p}`")));
        }
    }
    let multipliers: Vec<Var> = (1..=premise.len())
        .map(|i| Var::new(format!("{prefix}{i}")))
        .collect();
    let mut universals: Vec<Var> = universals.to_vec();
    for v in conclusion.coeffs.keys() {
        if !universals.contains(v) {
            universals.push(v.clone());
        }
    }

    let one = Rational::one();
    let minus_one = -Rational::one();
    let mut rows = Vec::new();
    // Σ λ_i a_ij - c_j = 0
    for x in &universals {
        let mut row = DualRow {
            linear: -conclusion.coeff(x),
            products: Vec::new(),
            relation: Relation::Eq,
        };
        for (lambda, premise_row) in multipliers.iter().zip(premise) {
            scale_by_multiplier(&mut row, lambda, &premise_row.coeff(x), &one);
        }
        if !row.is_trivial() {
            rows.push(row);
        }
    }
    // d - Σ λ_i b_i >= 0
    let mut offset = DualRow {
        linear: conclusion.constant.clone(),
        products: Vec::new(),
        relation: Relation::Geq,
    };
    for (lambda, premise_row) in multipliers.iter().zip(premise) {
        scale_by_multiplier(&mut offset, lambda, &premise_row.constant, &minus_one);
    }
    rows.push(offset);
    for lambda in &multipliers {
        rows.push(DualRow {
            linear: LinExpr::var(lambda),
            products: Vec::new(),
            relation: Relation::Geq,
        });
    }
    Ok(DualSystem {
        multipliers,
        params: params.to_vec(),
        rows,
        premise_rows: refs,
    })
}

/// The threshold parameter used by [`build_dec_pos`].
pub fn threshold_var() -> Var {
    Var::new("k")
}

/// Multiplier prefixes for the decrease and positivity duals.
pub const DEC_PREFIX: &str = "l";
pub const POS_PREFIX: &str = "lp";

/// Builds the decrease dual (`ρ(x) >= 1 + ρ(x')`) and positivity dual
/// (`ρ(x) >= 0`) under the loop body, with the extra premise row
/// `f(x) >= k` appended last when `f` is given.
pub fn build_dec_pos(
    lp: &SlcLoop,
    rho: &FnTemplate,
    f: Option<&FnTemplate>,
) -> Result<(DualSystem, DualSystem)> {
    let (mut premise, mut refs) = expand_premise(lp.body())?;
    let mut params: Vec<Var> = Vec::new();
    let mut note = |e: &LinExpr| {
        for v in e.vars() {
            if !params.contains(v) {
                params.push(v.clone());
            }
        }
    };
    for (_, c) in &rho.coeffs {
        note(c);
    }
    note(&rho.constant);
    if let Some(f) = f {
        for (_, c) in &f.coeffs {
            note(c);
        }
        note(&f.constant);
        let k = threshold_var();
        let mut row = ParamRow::default();
        for (x, c) in &f.coeffs {
            row.set_coeff(x, c.clone());
        }
        row.constant = f.constant.clone() - LinExpr::var(&k);
        premise.push(row);
        refs.push(PremiseRef {
            row: lp.body().len(),
            negated: false,
        });
        params.push(k);
    }

    let mut dec = ParamRow {
        constant: LinExpr::constant(-Rational::one()),
        ..ParamRow::default()
    };
    let mut pos = ParamRow {
        constant: rho.constant.clone(),
        ..ParamRow::default()
    };
    for ((x, c), xp) in rho.coeffs.iter().zip(lp.primed_vars()) {
        dec.set_coeff(x, c.clone());
        dec.set_coeff(xp, -c.clone());
        pos.set_coeff(x, c.clone());
    }
    let universals = lp.body().vars();
    let dec = dual_of(&premise, refs.clone(), universals, &dec, &params, DEC_PREFIX)?;
    let pos = dual_of(&premise, refs, universals, &pos, &params, POS_PREFIX)?;
    Ok((dec, pos))
}

/// The dual of `f(x') >= 1 + f(x)` with `f` parametric; its projection onto
/// the `b` parameters is the space of increasing functions.
pub fn increasing_dual(lp: &SlcLoop, prefix: &str) -> Result<(DualSystem, Vec<Var>)> {
    let (f, params) = FnTemplate::parametric(lp.vars(), "b");
    let mut row = ParamRow {
        constant: LinExpr::constant(-Rational::one()),
        ..ParamRow::default()
    };
    for ((x, c), xp) in f.coeffs.iter().zip(lp.primed_vars()) {
        row.set_coeff(x, -c.clone());
        row.set_coeff(xp, c.clone());
    }
    let dual = farkas_dual(lp.body(), &row, &params, prefix)?;
    Ok((dual, params))
}

/// The two linear branches of a dual whose products all involve one
/// multiplier `λ`: `case1` sets `λ = 0`, `case2` requires `λ > 0` and
/// replaces each product `λ·param` with a fresh variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearizedPair {
    pub case1: Polyhedron,
    pub case2: Polyhedron,
    /// `(param, product variable)`, the threshold first.
    pub product_vars: Vec<(Var, Var)>,
    pub lambda_var: Var,
}

impl LinearizedPair {
    pub fn product_of(&self, param: &Var) -> Option<&Var> {
        self.product_vars
            .iter()
            .find(|(p, _)| p == param)
            .map(|(_, v)| v)
    }

    /// From a `case2` solution, the parameter values `param = product / λ`
    /// that make the original dual feasible.
    pub fn recover_parameters(&self, solution: &Assignment) -> Result<Assignment> {
        let lambda = solution
            .get(&self.lambda_var)
            .ok_or_else(|| Error::Internal(format!("no value for `{}`", self.lambda_var)))?;
        if !lambda.is_positive() {
            return Err(Error::Internal(format!(
                "`{}` = {lambda} in a case-2 solution",
                self.lambda_var
            )));
        }
        let mut out = Assignment::new();
        for (param, product) in &self.product_vars {
            let value = solution.get(product).cloned().unwrap_or_else(Rational::zero);
            out.insert(param.clone(), value / lambda);
        }
        Ok(out)
    }
}

fn product_name(param: &Var, lambda: &Var) -> Var {
    Var::new(format!("{param}*{lambda}"))
}

/// Splits `dual` on its product multiplier. `k` and `f_params` are the only
/// parameters allowed inside products.
pub fn linearize(dual: &DualSystem, k: &Var, f_params: &[Var]) -> Result<LinearizedPair> {
    let mut lambdas: Vec<&Var> = Vec::new();
    for r in &dual.rows {
        for p in &r.products {
            if !lambdas.contains(&&p.multiplier) {
                lambdas.push(&p.multiplier);
            }
            if &p.param != k && !f_params.contains(&p.param) {
                return Err(Error::Structural(format!(
                    "product with unexpected parameter `{}`",
                    p.param
                )));
            }
        }
    }
    let lambda = match lambdas.as_slice() {
        [one] => (*one).clone(),
        [] => {
            return Err(Error::Structural(
                "dual has no multiplier-parameter products to linearize".into(),
            ))
        }
        _ => {
            return Err(Error::Structural(format!(
                "products on several multipliers: {lambdas:?}"
            )))
        }
    };

    let mut product_vars = Vec::new();
    for param in std::iter::once(k).chain(f_params) {
        product_vars.push((param.clone(), product_name(param, &lambda)));
    }
    let product = |param: &Var| -> Var {
        product_vars
            .iter()
            .find(|(p, _)| p == param)
            .map(|(_, v)| v.clone())
            .expect("checked above")
    };

    let eliminated: BTreeSet<&Var> = std::iter::once(k).chain(f_params).collect();
    let kept_params: Vec<Var> = dual
        .params
        .iter()
        .filter(|p| !eliminated.contains(p))
        .cloned()
        .collect();

    let mut case1_rows = Vec::new();
    let mut case2_rows = Vec::new();
    let zero_lambda: Assignment = [(lambda.clone(), Rational::zero())].into_iter().collect();
    for r in &dual.rows {
        let is_sign_row = r.relation == Relation::Geq
            && r.products.is_empty()
            && r.linear == LinExpr::var(&lambda);
        if is_sign_row {
            case2_rows.push(Constraint::gt(LinExpr::var(&lambda)));
            continue;
        }
        let c1 = Constraint::new(r.linear.partial_eval(&zero_lambda), r.relation);
        if c1.constant_truth() != Some(true) {
            case1_rows.push(c1);
        }
        let mut e = r.linear.clone();
        for p in &r.products {
            e.add_term(&product(&p.param), p.coeff.clone());
        }
        case2_rows.push(Constraint::new(e, r.relation));
    }

    let case1_vars: Vec<Var> = dual
        .multipliers
        .iter()
        .filter(|m| **m != lambda)
        .chain(&kept_params)
        .cloned()
        .collect();
    let case2_vars: Vec<Var> = dual
        .multipliers
        .iter()
        .chain(&kept_params)
        .cloned()
        .chain(product_vars.iter().map(|(_, v)| v.clone()))
        .collect();
    Ok(LinearizedPair {
        case1: Polyhedron::new(case1_vars, case1_rows)?,
        case2: Polyhedron::new(case2_vars, case2_rows)?,
        product_vars,
        lambda_var: lambda,
    })
}
