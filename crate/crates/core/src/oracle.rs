//! Concrete execution of loops, used to falsify certificates and to build
//! random test loops.

use std::fmt;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::detect::{Certificate, CertificateKind, IncreasingFn};
use crate::error::{Error, Result};
use crate::linexpr::{Assignment, LinExpr, Var};
use crate::loop_model::{body_satisfiable, CandidateFn, SlcLoop};
use crate::lp::{self, lp_solve, LpStatus, Objective};
use crate::polyhedron::{Constraint, Polyhedron};
use crate::rational::{int, ratio, Rational};

pub const DEFAULT_MAX_STEPS: usize = 1_000;
pub const RANDOM_LOOP_RETRY_CAP: usize = 100;

/// Successive values of the loop variables. `terminated` is set when the
/// last point has no successor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub points: Vec<Assignment>,
    pub terminated: bool,
}

impl Trace {
    pub fn transitions(&self) -> impl Iterator<Item = (&Assignment, &Assignment)> {
        self.points.windows(2).map(|w| (&w[0], &w[1]))
    }
}

/// How a successor is picked among all the body allows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Whatever point the LP solver returns first.
    LpWitness,
    /// The successor closest, in a randomly weighted L1 sense, to a random
    /// target near the current point.
    Randomized(u64),
}

/// Minimizes `Σ w_i |v_i - target_i|`; always bounded below.
fn closest_point(
    system: &Polyhedron,
    targets: &[(Var, Rational, Rational)],
) -> Result<Option<Assignment>> {
    let mut sys = system.clone();
    let mut objective = LinExpr::zero();
    for (i, (v, target, weight)) in targets.iter().enumerate() {
        let t = Var::new(format!("$dist{i}"));
        let diff = LinExpr::var(v) - LinExpr::constant(target.clone());
        sys.push_extending(Constraint::geq(LinExpr::var(&t) - diff.clone()));
        sys.push_extending(Constraint::geq(LinExpr::var(&t) + diff));
        objective.add_term(&t, weight.clone());
    }
    let out = lp_solve(&sys, Some(&Objective::minimize(objective)))?;
    Ok(match out.status {
        LpStatus::Optimal => out.point.map(|mut p| {
            p.retain(|v, _| system.has_var(v));
            p
        }),
        LpStatus::Infeasible => None,
        status => {
            return Err(Error::Internal(format!(
                "distance minimization returned {status:?}"
            )))
        }
    })
}

fn random_weight(rng: &mut ChaCha8Rng) -> Rational {
    ratio(rng.gen_range(1..=4), rng.gen_range(1..=3))
}

/// A successor of `point`, or `None` if the body admits none.
pub fn step(lp: &SlcLoop, point: &Assignment, strategy: Strategy) -> Result<Option<Assignment>> {
    let mut fixed = Assignment::new();
    for v in lp.vars() {
        let value = point
            .get(v)
            .ok_or_else(|| Error::Structural(format!("point does not assign `{v}`")))?;
        fixed.insert(v.clone(), value.clone());
    }
    let successors = lp.body().fix(&fixed);
    let next = match strategy {
        Strategy::LpWitness => lp::feasible_point(&successors)?,
        Strategy::Randomized(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let targets: Vec<_> = lp
                .vars()
                .iter()
                .zip(lp.primed_vars())
                .map(|(v, vp)| {
                    let target = &fixed[v] + int(rng.gen_range(-8..=8));
                    (vp.clone(), target, random_weight(&mut rng))
                })
                .collect();
            closest_point(&successors, &targets)?
        }
    };
    Ok(next.map(|p| {
        lp.vars()
            .iter()
            .zip(lp.primed_vars())
            .map(|(v, vp)| (v.clone(), p.get(vp).cloned().unwrap_or_else(Rational::zero)))
            .collect()
    }))
}

/// A point with at least one successor, near a random target.
pub fn sample_start(lp: &SlcLoop, seed: u64) -> Result<Option<Assignment>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let targets: Vec<_> = lp
        .body()
        .vars()
        .iter()
        .map(|v| (v.clone(), int(rng.gen_range(-20..=20)), random_weight(&mut rng)))
        .collect();
    let point = closest_point(lp.body(), &targets)?;
    Ok(point.map(|mut p| {
        p.retain(|v, _| lp.vars().contains(v));
        p
    }))
}

/// Runs the loop from `start` for at most `max_steps` transitions.
pub fn run_trace(lp: &SlcLoop, start: Assignment, seed: u64, max_steps: usize) -> Result<Trace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = vec![start];
    for _ in 0..max_steps {
        let current = points.last().expect("nonempty");
        match step(lp, current, Strategy::Randomized(rng.gen()))? {
            Some(next) => {
                if !lp.is_transition(current, &next) {
                    return Err(Error::Internal(format!(
                        "simulated step {current:?} -> {next:?} violates the body"
                    )));
                }
                points.push(next);
            }
            None => {
                return Ok(Trace {
                    points,
                    terminated: true,
                })
            }
        }
    }
    Ok(Trace {
        points,
        terminated: false,
    })
}

/// A transition on which a certificate's claim fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub trial: usize,
    pub step: usize,
    pub from: Assignment,
    pub to: Assignment,
    pub condition: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |p: &Assignment| {
            p.iter()
                .map(|(v, q)| format!("{v}={q}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        write!(
            f,
            "trial {} step {}: {} from ({}) to ({})",
            self.trial,
            self.step,
            self.condition,
            show(&self.from),
            show(&self.to)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleReport {
    pub trials: usize,
    pub transitions: usize,
    pub terminated: usize,
    pub violations: Vec<Violation>,
}

impl OracleReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

fn at_least(g: &CandidateFn, k: &Rational, x: &Assignment) -> bool {
    g.eval(x).is_some_and(|v| &v >= k)
}

/// Which conditions the certificate demands of the transition `x -> x'`.
fn failed_conditions(cert: &Certificate, x: &Assignment, xp: &Assignment) -> Vec<String> {
    let mut failed = Vec::new();
    if cert.kind == CertificateKind::TriviallyTerminating {
        failed.push("transition of a loop claimed never to run".to_string());
        return failed;
    }
    let Some(rho) = &cert.rho else {
        return failed;
    };
    let (dec_guarded, pos_guarded) = match (&cert.f, &cert.k) {
        (Some(f), Some(k)) => (at_least(f.decrease_guard(), k, x), at_least(f.positivity_guard(), k, x)),
        _ => (true, true),
    };
    let (Some(before), Some(after)) = (rho.eval(x), rho.eval(xp)) else {
        failed.push("rho does not evaluate on the trace".to_string());
        return failed;
    };
    if dec_guarded && before < after.clone() + Rational::one() {
        failed.push(format!("rho(x) = {before} < 1 + rho(x') = {}", after + Rational::one()));
    }
    if pos_guarded && before < Rational::zero() {
        failed.push(format!("rho(x) = {before} < 0"));
    }
    failed
}

/// Simulates `trials` seeded traces and reports every transition that
/// contradicts the certificate.
pub fn check_certificate_on_traces(
    lp: &SlcLoop,
    cert: &Certificate,
    trials: usize,
    max_steps: usize,
    seed: u64,
) -> Result<OracleReport> {
    if cert.kind == CertificateKind::None {
        return Err(Error::Structural("a negative verdict has nothing to check".into()));
    }
    if let Some(IncreasingFn::MinPair { .. }) = &cert.f {
        if cert.k.is_none() {
            return Err(Error::Structural("min-pair certificate without threshold".into()));
        }
    }
    let per_trial: Vec<Result<(usize, bool, Vec<Violation>)>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let Some(start) = sample_start(lp, rng.gen())? else {
                return Ok((0, true, Vec::new()));
            };
            let trace = run_trace(lp, start, rng.gen(), max_steps)?;
            let mut violations = Vec::new();
            for (step, (x, xp)) in trace.transitions().enumerate() {
                for condition in failed_conditions(cert, x, xp) {
                    violations.push(Violation {
                        trial,
                        step,
                        from: x.clone(),
                        to: xp.clone(),
                        condition,
                    });
                }
            }
            Ok((trace.points.len() - 1, trace.terminated, violations))
        })
        .collect();
    let mut report = OracleReport {
        trials,
        transitions: 0,
        terminated: 0,
        violations: Vec::new(),
    };
    for r in per_trial {
        let (n, terminated, violations) = r?;
        report.transitions += n;
        report.terminated += usize::from(terminated);
        report.violations.extend(violations);
    }
    Ok(report)
}

fn random_coeff(rng: &mut ChaCha8Rng, bound: i64) -> i64 {
    if rng.gen_bool(0.5) {
        0
    } else {
        rng.gen_range(-bound..=bound)
    }
}

fn random_row(rng: &mut ChaCha8Rng, vars: &[Var], primed: &[Var], bound: i64) -> Constraint {
    let mut e = LinExpr::constant(int(rng.gen_range(-bound..=bound)));
    match rng.gen_range(0..3) {
        // guard over x
        0 => {
            for v in vars {
                e.add_term(v, int(random_coeff(rng, bound)));
            }
            if e.is_constant() {
                let v = &vars[rng.gen_range(0..vars.len())];
                e.add_term(v, int(if rng.gen_bool(0.5) { 1 } else { -1 }));
            }
            Constraint::geq(e)
        }
        // update of one x'
        1 => {
            for v in vars {
                e.add_term(v, int(random_coeff(rng, bound)));
            }
            let target = &primed[rng.gen_range(0..primed.len())];
            match rng.gen_range(0..5) {
                0..=2 => {
                    e.add_term(target, -int(1));
                    Constraint::geq(e)
                }
                3 => {
                    e.add_term(target, int(1));
                    Constraint::geq(-e)
                }
                _ => {
                    e.add_term(target, -int(1));
                    Constraint::eq(e)
                }
            }
        }
        _ => {
            for v in vars.iter().chain(primed) {
                e.add_term(v, int(random_coeff(rng, bound)));
            }
            if e.is_constant() {
                e.add_term(&primed[0], -int(1));
                e.add_term(&vars[0], int(1));
            }
            Constraint::geq(e)
        }
    }
}

/// A loop over `x1 .. xn` with `n_rows` random integer rows, coefficients in
/// `[-coeff_bound, coeff_bound]`. Deterministic in `seed`; unsatisfiable
/// bodies are redrawn.
pub fn random_loop(n_vars: usize, n_rows: usize, coeff_bound: i64, seed: u64) -> Result<SlcLoop> {
    if n_vars == 0 || n_rows == 0 {
        return Err(Error::Structural(
            "random loops need at least one variable and one row".into(),
        ));
    }
    let vars: Vec<Var> = (1..=n_vars).map(|i| Var::new(format!("x{i}"))).collect();
    let primed: Vec<Var> = vars.iter().map(Var::primed).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_LOOP_RETRY_CAP {
        let rows = (0..n_rows)
            .map(|_| random_row(&mut rng, &vars, &primed, coeff_bound.max(1)))
            .collect();
        let lp = SlcLoop::new(vars.clone(), rows)?;
        if body_satisfiable(&lp)? {
            return Ok(lp);
        }
    }
    Err(Error::RetryCapExhausted(RANDOM_LOOP_RETRY_CAP))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::detect::CaseTag;

    fn v(n: &str) -> Var {
        Var::new(n)
    }

    fn at(pairs: &[(&str, i64)]) -> Assignment {
        pairs.iter().map(|&(n, q)| (v(n), int(q))).collect()
    }

    #[test]
    fn successors() {
        let lp = corpus::ranked();
        let next = step(&lp, &at(&[("x", 0), ("y", -1)]), Strategy::LpWitness)
            .unwrap()
            .unwrap();
        assert!(next[&v("x")] <= int(-1));
        assert!(next[&v("y")] <= int(-2));
        assert_eq!(step(&lp, &at(&[("x", -1), ("y", -1)]), Strategy::Randomized(3)).unwrap(), None);

        let lp = corpus::shifting();
        for strategy in [Strategy::LpWitness, Strategy::Randomized(9)] {
            let next = step(&lp, &at(&[("x", 1), ("y", 0)]), strategy).unwrap();
            assert_eq!(next, Some(at(&[("x", 0), ("y", -1)])));
        }
    }

    #[test]
    fn traces_follow_the_body() {
        let lp = corpus::eventually_ranked();
        let start = sample_start(&lp, 5).unwrap().unwrap();
        let trace = run_trace(&lp, start, 11, 200).unwrap();
        assert!(trace.terminated);
        for (x, xp) in trace.transitions() {
            assert!(lp.is_transition(x, xp));
        }
    }

    fn eventual(lp: &SlcLoop, rho: &[i64], f: &[i64], k: i64) -> Certificate {
        let c = |xs: &[i64]| CandidateFn::new(lp.vars(), xs.iter().map(|&q| int(q)).collect(), int(0));
        Certificate {
            kind: CertificateKind::Elrf,
            rho: Some(c(rho)),
            k: Some(int(k)),
            f: Some(IncreasingFn::Single(c(f))),
            case: Some(CaseTag::Phi21),
            raw_solution: None,
            diagnostics: Vec::new(),
        }
    }

    #[test]
    fn good_and_bad_certificates() {
        let lp = corpus::eventually_ranked();
        let good = check_certificate_on_traces(&lp, &eventual(&lp, &[1, 0], &[0, -1], 1), 100, 1000, 7)
            .unwrap();
        assert!(good.is_clean(), "{:?}", good.violations.first());
        assert!(good.transitions > 0);
        let bad = check_certificate_on_traces(&lp, &eventual(&lp, &[0, 1], &[0, -1], 1), 20, 1000, 7)
            .unwrap();
        assert!(!bad.is_clean());
    }

    #[test]
    fn dead_loops_have_no_transitions() {
        let lp = corpus::unsatisfiable();
        let r = check_certificate_on_traces(&lp, &Certificate::trivially_terminating(), 10, 100, 1)
            .unwrap();
        assert_eq!(r.transitions, 0);
        assert_eq!(r.terminated, 10);
        assert!(r.is_clean());
    }

    #[test]
    fn random_loops_are_reproducible() {
        let a = random_loop(2, 4, 3, 7).unwrap();
        let b = random_loop(2, 4, 3, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.body().len(), 4);
        assert!(random_loop(0, 4, 3, 7).is_err());
    }
}
