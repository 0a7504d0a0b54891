//! Certificate checkers.
//!
//! Each check states the property as "this system has no solution" and asks
//! the LP solver. Nothing here looks at dual systems or at how a certificate
//! was found.

use num_traits::{One, Zero};

use crate::detect::{Certificate, CertificateKind, IncreasingFn};
use crate::error::{Error, Result};
use crate::linexpr::Assignment;
use crate::loop_model::{CandidateFn, SlcLoop};
use crate::lp::{self, lp_solve, LpStatus, Objective};
use crate::polyhedron::{Constraint, Polyhedron};
use crate::rational::Rational;

fn body_with(lp: &SlcLoop, guard: Option<(&CandidateFn, &Rational)>) -> Polyhedron {
    let mut system = lp.body().clone();
    if let Some((f, k)) = guard {
        let mut e = f.to_expr();
        e.add_constant(&-k.clone());
        system.push_extending(Constraint::geq(e));
    }
    system
}

/// `ρ(x) - ρ(x') - eps < 0`, i.e. `eps + ρ(x') - ρ(x) > 0`.
fn no_decrease(lp: &SlcLoop, rho: &CandidateFn, eps: &Rational) -> Constraint {
    let e = rho.to_expr();
    let mut row = lp.prime(&e.linear_part()) - e.linear_part();
    row.add_constant(eps);
    Constraint::gt(row)
}

fn negative(rho: &CandidateFn) -> Constraint {
    Constraint::gt(-rho.to_expr())
}

/// A transition (keyed by `x` and `x'`) on which `ρ` decreases by less than
/// `eps`, restricted to `f(x) >= k` when a guard is given.
pub fn decrease_counterexample(
    lp: &SlcLoop,
    rho: &CandidateFn,
    eps: &Rational,
    guard: Option<(&CandidateFn, &Rational)>,
) -> Result<Option<Assignment>> {
    let system = body_with(lp, guard).with(no_decrease(lp, rho, eps));
    lp::feasible_point(&system)
}

/// A transition source with `ρ(x) < 0`, restricted to `f(x) >= k` when a
/// guard is given.
pub fn positivity_counterexample(
    lp: &SlcLoop,
    rho: &CandidateFn,
    guard: Option<(&CandidateFn, &Rational)>,
) -> Result<Option<Assignment>> {
    let system = body_with(lp, guard).with(negative(rho));
    lp::feasible_point(&system)
}

/// `c(x, x') => ρ(x) >= eps + ρ(x')`.
pub fn verify_decrease_by(lp: &SlcLoop, rho: &CandidateFn, eps: &Rational) -> Result<bool> {
    Ok(decrease_counterexample(lp, rho, eps, None)?.is_none())
}

/// `ρ` (linear or affine) is a ranking function: it decreases by at least 1
/// and is non-negative on every transition.
pub fn verify_lrf(lp: &SlcLoop, rho: &CandidateFn) -> Result<bool> {
    Ok(decrease_counterexample(lp, rho, &Rational::one(), None)?.is_none()
        && positivity_counterexample(lp, rho, None)?.is_none())
}

/// `c(x, x') => f(x') >= 1 + f(x)`. Increasing functions are linear; a
/// nonzero constant is rejected.
pub fn verify_increasing(lp: &SlcLoop, f: &CandidateFn) -> Result<bool> {
    if !f.is_linear() {
        return Err(Error::AffineIncreasing(f.to_string()));
    }
    let e = f.to_expr();
    let mut row = e.clone() - lp.prime(&e);
    row.add_constant(&Rational::one());
    Ok(!lp::is_feasible(&lp.body().clone().with(Constraint::gt(row)))?)
}

fn require_increasing(lp: &SlcLoop, f: &CandidateFn) -> Result<()> {
    if verify_increasing(lp, f)? {
        Ok(())
    } else {
        Err(Error::NotIncreasing(f.to_string()))
    }
}

/// Decrease of `ρ` on every transition with `f(x) >= k`.
pub fn verify_eventual_decrease(
    lp: &SlcLoop,
    f: &CandidateFn,
    rho: &CandidateFn,
    k: &Rational,
) -> Result<bool> {
    Ok(decrease_counterexample(lp, rho, &Rational::one(), Some((f, k)))?.is_none())
}

/// Non-negativity of `ρ` on every transition with `f(x) >= k`.
pub fn verify_eventual_positivity(
    lp: &SlcLoop,
    f: &CandidateFn,
    rho: &CandidateFn,
    k: &Rational,
) -> Result<bool> {
    Ok(positivity_counterexample(lp, rho, Some((f, k)))?.is_none())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElrfVerdict {
    pub holds: bool,
    /// The threshold that was checked, or the one computed when none was
    /// given.
    pub k: Option<Rational>,
}

/// Checks that `ρ` is an eventual ranking function for `(loop, f)`.
///
/// With `k` given, both conditions are checked under `f(x) >= k`. Without
/// it, the least workable threshold is computed: over the transitions that
/// violate a condition, `f(x)` must stay bounded above, and any `k` beyond
/// that bound works. If the bound is attained the threshold is the bound
/// plus one, otherwise the bound itself.
pub fn verify_elrf(
    lp: &SlcLoop,
    f: &CandidateFn,
    rho: &CandidateFn,
    k: Option<&Rational>,
) -> Result<ElrfVerdict> {
    require_increasing(lp, f)?;
    if let Some(k) = k {
        let holds = verify_eventual_decrease(lp, f, rho, k)?
            && verify_eventual_positivity(lp, f, rho, k)?;
        return Ok(ElrfVerdict {
            holds,
            k: Some(k.clone()),
        });
    }
    let body = lp.body();
    let mut threshold: Option<Rational> = None;
    for bad in [no_decrease(lp, rho, &Rational::one()), negative(rho)] {
        let system = body.clone().with(bad);
        let outcome = lp_solve(&system, Some(&Objective::maximize(f.to_expr())))?;
        let needed = match outcome.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => return Ok(ElrfVerdict { holds: false, k: None }),
            LpStatus::Optimal => outcome.objective_value.expect("optimal value") + Rational::one(),
            LpStatus::Supremum => outcome.objective_value.expect("supremum value"),
            LpStatus::Feasible => {
                return Err(Error::Internal("objective ignored by the solver".into()))
            }
        };
        threshold = Some(match threshold {
            Some(t) if t >= needed => t,
            _ => needed,
        });
    }
    Ok(ElrfVerdict {
        holds: true,
        k: Some(threshold.unwrap_or_else(Rational::zero)),
    })
}

/// Re-checks a certificate against the loop it claims to be about.
/// `None` certificates claim nothing and are never verified.
pub fn verify_certificate(lp: &SlcLoop, cert: &Certificate) -> Result<bool> {
    match cert.kind {
        CertificateKind::None => Ok(false),
        CertificateKind::TriviallyTerminating => Ok(!lp::is_feasible(lp.body())?),
        CertificateKind::Lrf => match &cert.rho {
            Some(rho) => verify_lrf(lp, rho),
            None => Ok(false),
        },
        CertificateKind::Elrf | CertificateKind::EventualAffine => {
            let (Some(rho), Some(k), Some(f)) = (&cert.rho, &cert.k, &cert.f) else {
                return Ok(false);
            };
            match f {
                IncreasingFn::Single(f) => {
                    if !verify_increasing(lp, f)? {
                        return Ok(false);
                    }
                    Ok(verify_elrf(lp, f, rho, Some(k))?.holds)
                }
                IncreasingFn::MinPair {
                    decrease,
                    positivity,
                } => Ok(verify_increasing(lp, decrease)?
                    && verify_increasing(lp, positivity)?
                    && verify_eventual_decrease(lp, decrease, rho, k)?
                    && verify_eventual_positivity(lp, positivity, rho, k)?),
            }
        }
    }
}
