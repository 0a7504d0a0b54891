//! Ranking function detection.
//!
//! Plain linear ranking functions come from one Farkas system. Eventual
//! ranking functions add a premise row `f(x) >= k`; the resulting products
//! of `k` (and of `f`'s coefficients when `f` is unknown) with that row's
//! multiplier are split into a "multiplier is zero" case and a "multiplier
//! is positive" case, giving four linear systems to try.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::farkas::{
    build_dec_pos, increasing_dual, linearize, threshold_var, FnTemplate, LinearizedPair,
};
use crate::fm::{fm_project, Limits};
use crate::linexpr::{Assignment, LinExpr, Var};
use crate::loop_model::{affine_lift, body_satisfiable, CandidateFn, SlcLoop};
use crate::lp::{self, lp_solve, LpStatus, Objective};
use crate::polyhedron::{pretty_constraint, Constraint, Polyhedron};
use crate::rational::{denominator_lcm, max_rational, Rational};
use crate::verify::verify_increasing;

/// Diagnostic attached to a negative answer of the full search: the
/// combined case was only tried in its relaxed form.
pub const RELAXED_ONLY: &str = "phi22 relaxed only";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CertificateKind {
    Lrf,
    Elrf,
    EventualAffine,
    TriviallyTerminating,
    None,
}

/// Which decrease/positivity branches the witness came from. `Phi22` is the
/// exact combined case (available when `f` is given); `Phi22Relaxed` lets
/// the two branches use different increasing functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CaseTag {
    Phi11,
    Phi12,
    Phi21,
    Phi22,
    Phi22Relaxed,
}

impl CaseTag {
    pub const ALL: [CaseTag; 5] = [
        CaseTag::Phi11,
        CaseTag::Phi12,
        CaseTag::Phi21,
        CaseTag::Phi22,
        CaseTag::Phi22Relaxed,
    ];

    /// `DEC1_POS1` and so on.
    pub fn label(self) -> &'static str {
        match self {
            CaseTag::Phi11 => "DEC1_POS1",
            CaseTag::Phi12 => "DEC1_POS2",
            CaseTag::Phi21 => "DEC2_POS1",
            CaseTag::Phi22 => "DEC2_POS2",
            CaseTag::Phi22Relaxed => "DEC2_POS2_RELAXED",
        }
    }

    pub fn from_label(label: &str) -> Option<CaseTag> {
        CaseTag::ALL.into_iter().find(|t| t.label() == label)
    }

    fn dec_positive(self) -> bool {
        matches!(self, CaseTag::Phi21 | CaseTag::Phi22 | CaseTag::Phi22Relaxed)
    }

    fn pos_positive(self) -> bool {
        matches!(self, CaseTag::Phi12 | CaseTag::Phi22 | CaseTag::Phi22Relaxed)
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// The increasing function of an eventual certificate. `MinPair` stands for
/// `min(decrease, positivity)`, which is increasing but not linear: the
/// decrease condition is guarded by the first, positivity by the second.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IncreasingFn {
    Single(CandidateFn),
    MinPair {
        decrease: CandidateFn,
        positivity: CandidateFn,
    },
}

impl IncreasingFn {
    pub fn functions(&self) -> Vec<&CandidateFn> {
        match self {
            IncreasingFn::Single(f) => vec![f],
            IncreasingFn::MinPair {
                decrease,
                positivity,
            } => vec![decrease, positivity],
        }
    }

    pub fn decrease_guard(&self) -> &CandidateFn {
        match self {
            IncreasingFn::Single(f) => f,
            IncreasingFn::MinPair { decrease, .. } => decrease,
        }
    }

    pub fn positivity_guard(&self) -> &CandidateFn {
        match self {
            IncreasingFn::Single(f) => f,
            IncreasingFn::MinPair { positivity, .. } => positivity,
        }
    }
}

/// A positive-multiplier branch: `λ` and the `(param, param·λ)` pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub lambda: Var,
    pub product_vars: Vec<(Var, Var)>,
}

impl Branch {
    fn of(pair: &LinearizedPair) -> Branch {
        Branch {
            lambda: pair.lambda_var.clone(),
            product_vars: pair.product_vars.clone(),
        }
    }

    /// `param = product / λ` for every product of the branch.
    pub fn recover(&self, assignment: &Assignment) -> Result<Assignment> {
        let lambda = assignment
            .get(&self.lambda)
            .ok_or_else(|| Error::Internal(format!("no value for `{}`", self.lambda)))?;
        if !lambda.is_positive() {
            return Err(Error::Internal(format!(
                "`{}` = {lambda} in a positive-multiplier branch",
                self.lambda
            )));
        }
        Ok(self
            .product_vars
            .iter()
            .map(|(param, product)| {
                let p = assignment.get(product).cloned().unwrap_or_else(Rational::zero);
                (param.clone(), p / lambda)
            })
            .collect())
    }
}

/// The LP point a certificate was read from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawSolution {
    pub assignment: Assignment,
    pub dec: Option<Branch>,
    pub pos: Option<Branch>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub rho: Option<CandidateFn>,
    pub k: Option<Rational>,
    pub f: Option<IncreasingFn>,
    pub case: Option<CaseTag>,
    pub raw_solution: Option<RawSolution>,
    pub diagnostics: Vec<String>,
}

impl Certificate {
    pub fn none(diagnostics: Vec<String>) -> Certificate {
        Certificate {
            kind: CertificateKind::None,
            rho: None,
            k: None,
            f: None,
            case: None,
            raw_solution: None,
            diagnostics,
        }
    }

    pub fn trivially_terminating() -> Certificate {
        Certificate {
            kind: CertificateKind::TriviallyTerminating,
            ..Certificate::none(Vec::new())
        }
    }

    /// Whether the certificate proves termination.
    pub fn is_found(&self) -> bool {
        self.kind != CertificateKind::None
    }
}

/// The coefficient vectors `b` whose `b·x` is increasing for a loop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncSpace {
    pub space: Polyhedron,
    /// `b1 .. bn`, one per loop variable.
    pub params: Vec<Var>,
}

impl IncSpace {
    pub fn is_empty(&self) -> Result<bool> {
        Ok(!lp::is_feasible(&self.space)?)
    }

    pub fn contains(&self, f: &CandidateFn) -> Option<bool> {
        let point: Assignment = self
            .params
            .iter()
            .zip(f.coeffs())
            .map(|(b, (_, c))| (b.clone(), c.clone()))
            .collect();
        self.space.contains(&point)
    }

    /// Rows in `b1 <= -2` style.
    pub fn pretty_rows(&self) -> Vec<String> {
        self.space.constraints().iter().map(pretty_constraint).collect()
    }
}

fn rho_template(lp: &SlcLoop) -> (FnTemplate, Vec<Var>) {
    FnTemplate::parametric(lp.vars(), "a")
}

/// A reproducible point of `system`: strict rows are tightened by the
/// largest uniform margin, then `Σ|a_i|` over `coeffs` is minimized, then
/// the sum of `thresholds`. Finally the point is scaled so that the
/// `coeffs` become integers, when the scaled point is still a solution.
pub fn canonical_witness(
    system: &Polyhedron,
    coeffs: &[Var],
    thresholds: &[Var],
) -> Result<Option<Assignment>> {
    let closed = if system.has_strict() {
        match lp::strict_margin(system)? {
            Some(margin) => lp::tighten_strict(system, &margin),
            None => return Ok(None),
        }
    } else if lp::is_feasible(system)? {
        system.clone()
    } else {
        return Ok(None);
    };

    let mut sys = closed;
    let mut l1 = LinExpr::zero();
    for a in coeffs {
        let t = Var::new(format!("|{a}|"));
        sys.push_extending(Constraint::geq(LinExpr::var(&t) - LinExpr::var(a)));
        sys.push_extending(Constraint::geq(LinExpr::var(&t) + LinExpr::var(a)));
        l1.add_term(&t, Rational::one());
    }
    let first = lp_solve(&sys, Some(&Objective::minimize(l1.clone())))?;
    let (mut point, best) = match (first.status, first.point, first.objective_value) {
        (LpStatus::Optimal, Some(p), Some(v)) => (p, v),
        (status, _, _) => {
            return Err(Error::Internal(format!(
                "minimizing |a| over a feasible system gave {status:?}"
            )))
        }
    };
    if !thresholds.is_empty() {
        let mut capped = sys.clone();
        capped.push_extending(Constraint::geq(LinExpr::constant(best) - l1));
        let total = LinExpr::from_terms(thresholds.iter().map(|v| (Rational::one(), v)), Rational::zero());
        let second = lp_solve(&capped, Some(&Objective::minimize(total)))?;
        if second.status == LpStatus::Optimal {
            point = second.point.expect("optimal point");
        }
    }
    point.retain(|v, _| system.has_var(v));

    let lcm = Rational::from_integer(denominator_lcm(
        coeffs.iter().filter_map(|a| point.get(a)),
    ));
    if !lcm.is_one() {
        let scaled: Assignment = point.iter().map(|(v, q)| (v.clone(), q * &lcm)).collect();
        if system.contains(&scaled) == Some(true) {
            point = scaled;
        }
    }
    Ok(Some(point))
}

fn found(
    kind: CertificateKind,
    rho: CandidateFn,
    k: Option<Rational>,
    f: Option<IncreasingFn>,
    case: Option<CaseTag>,
    raw: RawSolution,
) -> Certificate {
    Certificate {
        kind,
        rho: Some(rho),
        k,
        f,
        case,
        raw_solution: Some(raw),
        diagnostics: Vec::new(),
    }
}

/// Searches for `ρ(x) = a·x` with `c(x, x') => ρ(x) >= 1 + ρ(x') ∧ ρ(x) >= 0`.
pub fn detect_lrf(lp: &SlcLoop) -> Result<Certificate> {
    if !body_satisfiable(lp)? {
        return Ok(Certificate::trivially_terminating());
    }
    let (rho, a) = rho_template(lp);
    let (dec, pos) = build_dec_pos(lp, &rho, None)?;
    let system = dec.system()?.conjoin(&pos.system()?);
    Ok(match canonical_witness(&system, &a, &[])? {
        None => Certificate::none(Vec::new()),
        Some(point) => found(
            CertificateKind::Lrf,
            CandidateFn::from_values(lp.vars(), &point, &a),
            None,
            None,
            None,
            RawSolution {
                assignment: point,
                dec: None,
                pos: None,
            },
        ),
    })
}

/// Every linear ranking function, as a polyhedron over `a1 .. an`.
pub fn lrf_space(lp: &SlcLoop, limits: &Limits) -> Result<Polyhedron> {
    let (rho, a) = rho_template(lp);
    if !body_satisfiable(lp)? {
        return Ok(Polyhedron::universe(a));
    }
    let (dec, pos) = build_dec_pos(lp, &rho, None)?;
    let system = dec.system()?.conjoin(&pos.system()?);
    let multipliers: Vec<Var> = dec
        .multipliers()
        .iter()
        .chain(pos.multipliers())
        .cloned()
        .collect();
    fm_project(&system, &multipliers, limits)
}

/// Every linear increasing function, as a polyhedron over `b1 .. bn`.
pub fn inc_space(lp: &SlcLoop, limits: &Limits) -> Result<IncSpace> {
    let (dual, params) = increasing_dual(lp, "l")?;
    if !body_satisfiable(lp)? {
        return Ok(IncSpace {
            space: Polyhedron::universe(params.clone()),
            params,
        });
    }
    let space = fm_project(&dual.system()?, dual.multipliers(), limits)?;
    Ok(IncSpace { space, params })
}

/// `k` for a witness of the given case: `0` when neither branch uses the
/// threshold row, otherwise `P/λ` of the branches that do, taking the larger
/// when both do.
pub fn extract_threshold(case: CaseTag, raw: &RawSolution) -> Result<Rational> {
    let k = threshold_var();
    let from = |branch: &Option<Branch>| -> Result<Rational> {
        let branch = branch
            .as_ref()
            .ok_or_else(|| Error::Internal(format!("case {case} without its branch data")))?;
        branch
            .recover(&raw.assignment)?
            .remove(&k)
            .ok_or_else(|| Error::Internal("branch without a threshold product".into()))
    };
    Ok(match (case.dec_positive(), case.pos_positive()) {
        (false, false) => Rational::zero(),
        (false, true) => from(&raw.pos)?,
        (true, false) => from(&raw.dec)?,
        (true, true) => max_rational(&from(&raw.dec)?, &from(&raw.pos)?),
    })
}

struct Case<'a> {
    tag: CaseTag,
    dec: Option<&'a LinearizedPair>,
    pos: Option<&'a LinearizedPair>,
}

impl Case<'_> {
    fn thresholds(&self) -> Vec<Var> {
        let k = threshold_var();
        [self.dec, self.pos]
            .into_iter()
            .flatten()
            .filter_map(|p| p.product_of(&k).cloned())
            .collect()
    }

    fn raw(&self, assignment: Assignment) -> RawSolution {
        RawSolution {
            assignment,
            dec: self.dec.map(Branch::of),
            pos: self.pos.map(Branch::of),
        }
    }
}

fn cases<'a>(d: &'a LinearizedPair, p: &'a LinearizedPair, combined: CaseTag) -> [Case<'a>; 4] {
    [
        Case { tag: CaseTag::Phi11, dec: None, pos: None },
        Case { tag: CaseTag::Phi12, dec: None, pos: Some(p) },
        Case { tag: CaseTag::Phi21, dec: Some(d), pos: None },
        Case { tag: combined, dec: Some(d), pos: Some(p) },
    ]
}

fn case_system(case: &Case, d: &LinearizedPair, p: &LinearizedPair, extra: &[Polyhedron]) -> Polyhedron {
    let dec = if case.dec.is_some() { &d.case2 } else { &d.case1 };
    let pos = if case.pos.is_some() { &p.case2 } else { &p.case1 };
    let mut system = dec.conjoin(pos);
    for e in extra {
        system = system.conjoin(e);
    }
    system
}

/// Searches for `ρ` such that `ρ` ranks the loop on every transition with
/// `f(x) >= k`, for some `k`. `f` must be increasing.
pub fn detect_elrf_given_f(lp: &SlcLoop, f: &CandidateFn) -> Result<Certificate> {
    if !body_satisfiable(lp)? {
        return Ok(Certificate::trivially_terminating());
    }
    if !verify_increasing(lp, f)? {
        return Err(Error::NotIncreasing(f.to_string()));
    }
    let (rho, a) = rho_template(lp);
    let (dec, pos) = build_dec_pos(lp, &rho, Some(&FnTemplate::fixed(f)))?;
    let k = threshold_var();
    let d = linearize(&dec, &k, &[])?;
    let p = linearize(&pos, &k, &[])?;
    for case in cases(&d, &p, CaseTag::Phi22) {
        let system = case_system(&case, &d, &p, &[]);
        if let Some(point) = canonical_witness(&system, &a, &case.thresholds())? {
            let raw = case.raw(point);
            let threshold = extract_threshold(case.tag, &raw)?;
            return Ok(found(
                CertificateKind::Elrf,
                CandidateFn::from_values(lp.vars(), &raw.assignment, &a),
                Some(threshold),
                Some(IncreasingFn::Single(f.clone())),
                Some(case.tag),
                raw,
            ));
        }
    }
    Ok(Certificate::none(Vec::new()))
}

/// The least threshold from which the fixed `ρ` ranks `(loop, f)`, found by
/// running the four case systems with `ρ`'s coefficients pinned. `None` if
/// no threshold works.
pub fn threshold_for(lp: &SlcLoop, f: &CandidateFn, rho: &CandidateFn) -> Result<Option<Rational>> {
    if !body_satisfiable(lp)? {
        return Ok(Some(Rational::zero()));
    }
    let (dec, pos) = build_dec_pos(lp, &FnTemplate::fixed(rho), Some(&FnTemplate::fixed(f)))?;
    let k = threshold_var();
    let d = linearize(&dec, &k, &[])?;
    let p = linearize(&pos, &k, &[])?;
    let mut best: Option<Rational> = None;
    for case in cases(&d, &p, CaseTag::Phi22) {
        let system = case_system(&case, &d, &p, &[]);
        if let Some(point) = canonical_witness(&system, &[], &case.thresholds())? {
            let t = extract_threshold(case.tag, &case.raw(point))?;
            best = Some(match best {
                Some(b) if b <= t => b,
                _ => t,
            });
        }
    }
    Ok(best)
}

/// `m·b + d ⋈ 0` over INC becomes `m·p + d·λ ⋈ 0` with `p = b·λ`, which is
/// equivalent for `λ > 0`.
fn homogenize(inc: &IncSpace, pair: &LinearizedPair) -> Result<Polyhedron> {
    let mut vars = vec![pair.lambda_var.clone()];
    let mut rows = Vec::new();
    for row in inc.space.constraints() {
        let mut e = LinExpr::term(row.expr.constant_term().clone(), &pair.lambda_var);
        for (b, m) in row.expr.terms() {
            let p = pair
                .product_of(b)
                .ok_or_else(|| Error::Internal(format!("no product variable for `{b}`")))?;
            if !vars.contains(p) {
                vars.push(p.clone());
            }
            e.add_term(p, m.clone());
        }
        rows.push(Constraint::new(e, row.relation));
    }
    Polyhedron::new(vars, rows)
}

fn recovered_fn(lp: &SlcLoop, branch: &Option<Branch>, raw: &RawSolution, b: &[Var]) -> Result<CandidateFn> {
    let branch = branch
        .as_ref()
        .ok_or_else(|| Error::Internal("missing branch".into()))?;
    Ok(CandidateFn::from_values(lp.vars(), &branch.recover(&raw.assignment)?, b))
}

/// The order in which [`detect_elrf`] tries the cases.
pub const SEARCH_ORDER: [CaseTag; 4] = [
    CaseTag::Phi11,
    CaseTag::Phi12,
    CaseTag::Phi21,
    CaseTag::Phi22Relaxed,
];

const INC_EMPTY: &str = "no linear increasing function exists (INC is empty)";

/// Searches for an increasing `f` together with an eventual ranking
/// function. The combined case is tried in relaxed form only, where the
/// decrease and positivity conditions may use different increasing
/// functions; a positive answer then carries both.
pub fn detect_elrf(lp: &SlcLoop, limits: &Limits) -> Result<Certificate> {
    detect_elrf_ordered(lp, limits, &SEARCH_ORDER)
}

/// [`detect_elrf`] with the cases tried in `order`, a permutation of
/// [`SEARCH_ORDER`]. Only the witness may depend on the order.
pub fn detect_elrf_ordered(lp: &SlcLoop, limits: &Limits, order: &[CaseTag]) -> Result<Certificate> {
    let mut sorted = order.to_vec();
    sorted.sort_by_key(|t| SEARCH_ORDER.iter().position(|s| s == t));
    if sorted != SEARCH_ORDER {
        return Err(Error::Structural(format!(
            "case order must be a permutation of {:?}",
            SEARCH_ORDER.map(CaseTag::label)
        )));
    }
    if !body_satisfiable(lp)? {
        return Ok(Certificate::trivially_terminating());
    }
    let (rho, a) = rho_template(lp);
    let (f, b) = FnTemplate::parametric(lp.vars(), "b");
    let (dec, pos) = build_dec_pos(lp, &rho, Some(&f))?;
    let k = threshold_var();
    let d = linearize(&dec, &k, &b)?;
    let p = linearize(&pos, &k, &b)?;
    let all = cases(&d, &p, CaseTag::Phi22Relaxed);

    // Computed on first use; `None` inside once INC is known to be empty.
    let mut inc: Option<Option<(Polyhedron, Polyhedron)>> = None;
    for tag in order {
        let case = all.iter().find(|c| c.tag == *tag).expect("order was validated");
        if case.tag == CaseTag::Phi11 {
            let plain = case_system(case, &d, &p, &[]);
            if let Some(point) = canonical_witness(&plain, &a, &[])? {
                let rho = CandidateFn::from_values(lp.vars(), &point, &a);
                let f = rho.negated_linear();
                return Ok(found(
                    CertificateKind::Elrf,
                    rho,
                    Some(Rational::zero()),
                    Some(IncreasingFn::Single(f)),
                    Some(CaseTag::Phi11),
                    case.raw(point),
                ));
            }
            continue;
        }
        if inc.is_none() {
            let space = inc_space(lp, limits)?;
            inc = Some(if space.is_empty()? {
                None
            } else {
                Some((homogenize(&space, &d)?, homogenize(&space, &p)?))
            });
        }
        let Some(Some((inc_d, inc_p))) = &inc else {
            continue;
        };
        let mut extra = Vec::new();
        if case.dec.is_some() {
            extra.push(inc_d.clone());
        }
        if case.pos.is_some() {
            extra.push(inc_p.clone());
        }
        let system = case_system(case, &d, &p, &extra);
        let Some(point) = canonical_witness(&system, &a, &case.thresholds())? else {
            continue;
        };
        let raw = case.raw(point);
        let threshold = extract_threshold(case.tag, &raw)?;
        let f = match case.tag {
            CaseTag::Phi12 => IncreasingFn::Single(recovered_fn(lp, &raw.pos, &raw, &b)?),
            CaseTag::Phi21 => IncreasingFn::Single(recovered_fn(lp, &raw.dec, &raw, &b)?),
            _ => IncreasingFn::MinPair {
                decrease: recovered_fn(lp, &raw.dec, &raw, &b)?,
                positivity: recovered_fn(lp, &raw.pos, &raw, &b)?,
            },
        };
        return Ok(found(
            CertificateKind::Elrf,
            CandidateFn::from_values(lp.vars(), &raw.assignment, &a),
            Some(threshold),
            Some(f),
            Some(case.tag),
            raw,
        ));
    }
    Ok(match inc {
        Some(None) => Certificate::none(vec![INC_EMPTY.into()]),
        _ => Certificate::none(vec![RELAXED_ONLY.into()]),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AffineMode {
    Lrf,
    ElrfGivenF(CandidateFn),
    Elrf,
}

/// Runs a linear detector on the loop extended with a variable pinned to 1
/// and folds that variable's coefficient back into constants.
pub fn detect_affine(lp: &SlcLoop, mode: &AffineMode, limits: &Limits) -> Result<Certificate> {
    let lifted = affine_lift(lp);
    let u = lifted.vars().last().expect("lifted loops are nonempty").clone();
    let cert = match mode {
        AffineMode::Lrf => detect_lrf(&lifted)?,
        AffineMode::ElrfGivenF(f) => {
            if body_satisfiable(lp)? && !verify_increasing(lp, f)? {
                return Err(Error::NotIncreasing(f.to_string()));
            }
            let mut coeffs: Vec<Rational> = f.coeffs().iter().map(|(_, c)| c.clone()).collect();
            coeffs.push(Rational::zero());
            detect_elrf_given_f(&lifted, &CandidateFn::new(lifted.vars(), coeffs, Rational::zero()))?
        }
        AffineMode::Elrf => detect_elrf(&lifted, limits)?,
    };
    if !matches!(cert.kind, CertificateKind::Lrf | CertificateKind::Elrf) {
        return Ok(cert);
    }
    let fold = |g: &CandidateFn| -> (CandidateFn, Rational) {
        (g.without(&u), g.coeff(&u))
    };
    let rho = cert.rho.as_ref().map(|r| {
        let (linear, offset) = fold(r);
        let constant = offset + r.constant();
        linear.with_constant(constant)
    });
    // On the lifted loop `f(x) + b_u·u >= k` is `f(x) >= k - b_u`.
    let (f, k) = match (&cert.f, &cert.k) {
        (Some(IncreasingFn::Single(g)), Some(k)) => {
            let (g, shift) = fold(g);
            (Some(IncreasingFn::Single(g)), Some(k - shift))
        }
        (Some(IncreasingFn::MinPair { decrease, positivity }), Some(k)) => {
            let (fd, sd) = fold(decrease);
            let (fp, sp) = fold(positivity);
            let k = max_rational(&(k - sd), &(k - sp));
            (Some(IncreasingFn::MinPair { decrease: fd, positivity: fp }), Some(k))
        }
        (f, k) => (f.clone(), k.clone()),
    };
    let kind = match mode {
        AffineMode::Lrf => CertificateKind::Lrf,
        _ => CertificateKind::EventualAffine,
    };
    Ok(Certificate {
        kind,
        rho,
        k,
        f,
        ..cert
    })
}
