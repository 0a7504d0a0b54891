//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use elrf::corpus;
use elrf::detect::{
    detect_affine, detect_elrf, detect_elrf_given_f, detect_lrf, inc_space, lrf_space, AffineMode, CaseTag,
    Certificate, CertificateKind, IncreasingFn,
};
use elrf::fm::{fm_project, Limits};
use elrf::linexpr::{Assignment, LinExpr, Var};
use elrf::loop_model::{affine_lift, CandidateFn, SlcLoop};
use elrf::lp::{self, equivalent, lp_solve, LpStatus, Objective};
use elrf::oracle::check_certificate_on_traces;
use elrf::polyhedron::{Constraint, Polyhedron};
use elrf::rational::{int, ratio};
use elrf::verify::{verify_certificate, verify_elrf, verify_increasing, verify_lrf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_corpus, random_system, reconstruction, FSource};

const SIMULATION_TRACES: usize = 100;
const SIMULATION_STEPS: usize = 1_000;
const SIMULATION_SEED: u64 = 2024;
const PROPERTY_BUDGET: Duration = Duration::from_secs(60);
const RANDOM_LOOPS: u64 = 50;
const FM_SYSTEMS: u64 = 200;
const FM_POINTS_PER_SYSTEM: usize = 12;

type Outcome = Result<String, String>;

fn v(n: &str) -> Var {
    Var::new(n)
}

fn xy(a: i64, b: i64, c: i64) -> CandidateFn {
    CandidateFn::new(&[v("x"), v("y")], vec![int(a), int(b)], int(c))
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn check<T>(r: elrf::error::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Certificates to replay on traces, with the loop each one is for.
#[derive(Default)]
struct Emitted(Vec<(String, SlcLoop, Certificate)>);

impl Emitted {
    fn add(&mut self, name: impl Into<String>, lp: &SlcLoop, cert: &Certificate) {
        if cert.is_found() {
            self.0.push((name.into(), lp.clone(), cert.clone()));
        }
    }
}

/// Case-2 branches checked and failures, for the reconstruction criterion.
#[derive(Default)]
struct Reconstructions {
    checked: usize,
    failures: Vec<String>,
}

impl Reconstructions {
    fn record(&mut self, name: &str, lp: &SlcLoop, cert: &Certificate, f: FSource<'_>) -> Result<(), String> {
        let Some(raw) = &cert.raw_solution else {
            return Ok(());
        };
        for (branch, ok) in check(reconstruction(lp, raw, f))? {
            self.checked += 1;
            if !ok {
                self.failures.push(format!("{name} ({branch})"));
            }
        }
        Ok(())
    }
}

struct Suite {
    emitted: Emitted,
    rebuilt: Reconstructions,
    limits: Limits,
}

fn infeasible_with(lp: &SlcLoop, row: Constraint) -> Result<bool, String> {
    let out = check(lp_solve(&lp.body().clone().with(row), None))?;
    Ok(out.status == LpStatus::Infeasible)
}

fn ranked_loop_verifies(s: &mut Suite) -> Outcome {
    let lp = corpus::ranked();
    let x = LinExpr::var(&v("x"));
    let xp = LinExpr::var(&v("x'"));
    // x < 1 + x' and x < 0 must both be unsatisfiable under the body.
    let no_decrease = Constraint::gt(xp + LinExpr::constant(int(1)) - x.clone());
    ensure(infeasible_with(&lp, no_decrease)?, "x < 1 + x' is satisfiable")?;
    ensure(infeasible_with(&lp, Constraint::gt(-x))?, "x < 0 is satisfiable")?;
    ensure(check(verify_lrf(&lp, &xy(1, 0, 0)))?, "verify_lrf rejects x")?;
    let cert = check(detect_lrf(&lp))?;
    s.emitted.add("ranked loop", &lp, &cert);
    Ok("both negation systems infeasible; verify_lrf(x) = true".into())
}

fn lrf_space_matches(s: &mut Suite) -> Outcome {
    let lp = corpus::ranked();
    let space = check(lrf_space(&lp, &s.limits))?;
    let a = |i| LinExpr::var(&v(&format!("a{i}")));
    let expected = Polyhedron::new(
        vec![v("a1"), v("a2")],
        vec![Constraint::eq(a(2)), Constraint::geq(a(1) - LinExpr::constant(int(1)))],
    )
    .unwrap();
    ensure(check(equivalent(&space, &expected))?, format!("got {space:?}"))?;
    Ok("{a2 = 0, a1 >= 1} by mutual inclusion".into())
}

fn eventual_with_given_f(s: &mut Suite) -> Outcome {
    let lp = corpus::eventually_ranked();
    ensure(check(detect_lrf(&lp))?.kind == CertificateKind::None, "unexpected LRF")?;
    let f = xy(0, -1, 0);
    let cert = check(detect_elrf_given_f(&lp, &f))?;
    ensure(cert.kind == CertificateKind::Elrf, format!("kind {:?}", cert.kind))?;
    ensure(cert.case == Some(CaseTag::Phi21), format!("case {:?}", cert.case))?;
    ensure(cert.rho.as_ref() == Some(&xy(1, 0, 0)), format!("rho {:?}", cert.rho))?;
    ensure(cert.k == Some(int(1)), format!("k {:?}", cert.k))?;
    let verdict = check(verify_elrf(&lp, &f, &xy(1, 0, 0), Some(&int(1))))?;
    ensure(verdict.holds, "verify_elrf rejects the certificate")?;
    let report = check(check_certificate_on_traces(
        &lp,
        &cert,
        SIMULATION_TRACES,
        SIMULATION_STEPS,
        SIMULATION_SEED,
    ))?;
    if let Some(first) = report.violations.first() {
        return Err(format!("violation: {first}"));
    }
    s.rebuilt.record("eventually ranked loop", &lp, &cert, FSource::Given(&f))?;
    s.emitted.add("eventually ranked loop, f = -y", &lp, &cert);
    Ok(format!(
        "DEC2_POS1, rho = x, k = 1; {} transitions simulated",
        report.transitions
    ))
}

fn affine_from_threshold(s: &mut Suite) -> Outcome {
    let lp = corpus::eventually_affine();
    let f = xy(0, -1, 0);
    let linear = check(detect_elrf_given_f(&lp, &f))?;
    ensure(linear.kind == CertificateKind::None, format!("linear mode found {:?}", linear.rho))?;
    let cert = check(detect_affine(&lp, &AffineMode::ElrfGivenF(f.clone()), &s.limits))?;
    ensure(cert.kind == CertificateKind::EventualAffine, format!("kind {:?}", cert.kind))?;
    ensure(cert.rho.as_ref() == Some(&xy(1, 0, 1)), format!("rho {:?}", cert.rho))?;
    ensure(cert.k == Some(int(1)), format!("k {:?}", cert.k))?;
    ensure(check(verify_certificate(&lp, &cert))?, "certificate does not verify")?;
    let lifted = affine_lift(&lp);
    let lifted_f = CandidateFn::new(lifted.vars(), vec![int(0), int(-1), int(0)], int(0));
    s.rebuilt.record("eventually affine loop", &lifted, &cert, FSource::Given(&lifted_f))?;
    s.emitted.add("eventually affine loop, f = -y", &lp, &cert);
    Ok("linear: none; affine: rho = x + 1, k = 1".into())
}

fn oscillating_loop(s: &mut Suite) -> Outcome {
    let lp = corpus::oscillating();
    let inc = check(inc_space(&lp, &s.limits))?;
    let b = |i| LinExpr::var(&v(&format!("b{i}")));
    let expected = Polyhedron::new(
        vec![v("b1"), v("b2")],
        vec![
            Constraint::geq(-b(1) - LinExpr::constant(int(2))),
            Constraint::eq(b(1) - b(2).scaled(&int(2))),
        ],
    )
    .unwrap();
    ensure(check(equivalent(&inc.space, &expected))?, format!("INC = {:?}", inc.pretty_rows()))?;
    let cert = check(detect_elrf(&lp, &s.limits))?;
    ensure(cert.case == Some(CaseTag::Phi21), format!("case {:?}", cert.case))?;
    let Some(IncreasingFn::Single(f)) = &cert.f else {
        return Err(format!("f = {:?}", cert.f));
    };
    ensure(inc.contains(f) == Some(true), format!("{f} is not in INC"))?;
    ensure(check(verify_increasing(&lp, f))?, format!("{f} is not increasing"))?;
    ensure(check(verify_certificate(&lp, &cert))?, "certificate does not verify")?;
    s.rebuilt.record("oscillating loop", &lp, &cert, FSource::Searched)?;
    s.emitted.add("oscillating loop", &lp, &cert);
    Ok(format!("INC = {}; DEC2_POS1 with f = {f}", inc.pretty_rows().join(", ")))
}

fn shifting_loop(s: &mut Suite) -> Outcome {
    let lp = corpus::shifting();
    let cert = check(detect_elrf(&lp, &s.limits))?;
    ensure(cert.is_found(), "no certificate")?;
    ensure(check(verify_certificate(&lp, &cert))?, "certificate does not verify")?;
    s.rebuilt.record("shifting loop", &lp, &cert, FSource::Searched)?;
    s.emitted.add("shifting loop", &lp, &cert);
    let rho = cert.rho.as_ref().map(ToString::to_string).unwrap_or_default();
    Ok(format!(
        "{} with rho = {rho}",
        cert.case.map_or("no case", CaseTag::label)
    ))
}

fn lrf_implies_elrf(s: &mut Suite) -> Outcome {
    let start = Instant::now();
    let mut with_lrf = 0;
    let mut with_elrf = 0;
    let mut exceptions = Vec::new();
    for (name, lp) in random_corpus(RANDOM_LOOPS) {
        let lrf = check(detect_lrf(&lp))?;
        let elrf = check(detect_elrf(&lp, &s.limits))?;
        if lrf.is_found() {
            with_lrf += 1;
            if !check(verify_certificate(&lp, &lrf))? {
                exceptions.push(format!("{name}: LRF does not verify"));
            }
            if !elrf.is_found() {
                exceptions.push(format!("{name}: LRF found but no ELRF"));
            }
        }
        if elrf.is_found() {
            with_elrf += 1;
            if !check(verify_certificate(&lp, &elrf))? {
                exceptions.push(format!("{name}: ELRF does not verify"));
            }
        }
        s.rebuilt.record(&name, &lp, &elrf, FSource::Searched)?;
        s.emitted.add(format!("{name} (lrf)"), &lp, &lrf);
        s.emitted.add(format!("{name} (elrf)"), &lp, &elrf);
    }
    let elapsed = start.elapsed();
    ensure(exceptions.is_empty(), exceptions.join("; "))?;
    ensure(elapsed <= PROPERTY_BUDGET, format!("took {elapsed:?}"))?;
    Ok(format!(
        "{RANDOM_LOOPS} loops, {with_lrf} with LRF, {with_elrf} with ELRF, in {:.1}s",
        elapsed.as_secs_f64()
    ))
}

fn reconstruction_holds(s: &mut Suite) -> Outcome {
    ensure(s.rebuilt.checked > 0, "no case-2 solution was produced")?;
    ensure(s.rebuilt.failures.is_empty(), s.rebuilt.failures.join("; "))?;
    Ok(format!("{} case-2 branches reconstructed", s.rebuilt.checked))
}

fn sample_points(system: &Polyhedron, kept: &[Var], rng: &mut ChaCha8Rng) -> Vec<Assignment> {
    let mut points = Vec::new();
    while points.len() < FM_POINTS_PER_SYSTEM {
        if points.len() % 2 == 0 {
            points.push(
                kept.iter()
                    .map(|v| (v.clone(), ratio(rng.gen_range(-10..=10), 2)))
                    .collect(),
            );
            continue;
        }
        // A vertex of the system inside a random box, restricted to `kept`,
        // so that boundary points of the projection are exercised.
        let mut boxed = system.clone();
        let mut objective = LinExpr::zero();
        for v in system.vars() {
            let t = int(rng.gen_range(-5..=5));
            let e = LinExpr::var(v) - LinExpr::constant(t);
            boxed = boxed
                .with(Constraint::geq(e.clone() + LinExpr::constant(int(3))))
                .with(Constraint::geq(LinExpr::constant(int(3)) - e));
            objective.add_term(v, int(rng.gen_range(-3..=3)));
        }
        match lp_solve(&boxed, Some(&Objective::minimize(objective))) {
            Ok(out) if out.point.is_some() => {
                let mut p = out.point.unwrap();
                p.retain(|v, _| kept.contains(v));
                points.push(p);
            }
            _ => points.push(kept.iter().map(|v| (v.clone(), int(rng.gen_range(-5..=5)))).collect()),
        }
    }
    points
}

fn fm_agrees_with_lp(s: &mut Suite) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut inside = 0;
    let mut exceptions = Vec::new();
    for seed in 0..FM_SYSTEMS {
        let (system, eliminate) = random_system(seed);
        let projection = check(fm_project(&system, &eliminate, &s.limits))?;
        let kept: Vec<Var> = system.vars().iter().filter(|v| !eliminate.contains(v)).cloned().collect();
        for point in sample_points(&system, &kept, &mut rng) {
            let expected = check(lp::is_feasible(&system.fix(&point)))?;
            let got = projection.contains(&point);
            inside += usize::from(expected);
            if got != Some(expected) {
                exceptions.push(format!("system {seed} at {point:?}: projection says {got:?}"));
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(exceptions.is_empty(), exceptions.join("; "))?;
    ensure(elapsed <= PROPERTY_BUDGET, format!("took {elapsed:?}"))?;
    Ok(format!(
        "{FM_SYSTEMS} systems, {} points ({inside} inside), in {:.1}s",
        FM_SYSTEMS as usize * FM_POINTS_PER_SYSTEM,
        elapsed.as_secs_f64()
    ))
}

fn certificates_survive_simulation(s: &mut Suite) -> Outcome {
    let mut transitions = 0;
    let mut failures = Vec::new();
    for (name, lp, cert) in &s.emitted.0 {
        let report = check(check_certificate_on_traces(
            lp,
            cert,
            SIMULATION_TRACES,
            SIMULATION_STEPS,
            SIMULATION_SEED,
        ))?;
        transitions += report.transitions;
        if let Some(first) = report.violations.first() {
            failures.push(format!("{name}: {first}"));
        }
    }
    ensure(!s.emitted.0.is_empty(), "no certificates were emitted")?;
    ensure(failures.is_empty(), failures.join("; "))?;
    Ok(format!(
        "{} certificates, {transitions} transitions, no violations",
        s.emitted.0.len()
    ))
}

#[test]
fn acceptance() {
    type Criterion = fn(&mut Suite) -> Outcome;
    let criteria: [(&str, Criterion); 10] = [
        ("ranked loop verifies with rho = x", ranked_loop_verifies),
        ("ranking function space of the ranked loop", lrf_space_matches),
        ("eventual ranking from a given increasing function", eventual_with_given_f),
        ("eventual affine ranking function", affine_from_threshold),
        ("increasing functions of the oscillating loop", oscillating_loop),
        ("shifting loop has a certificate", shifting_loop),
        ("every LRF is an eventual LRF on random loops", lrf_implies_elrf),
        ("thresholds rebuild feasible duals", reconstruction_holds),
        ("projection agrees with LP completion", fm_agrees_with_lp),
        ("certificates hold on simulated traces", certificates_survive_simulation),
    ];
    let mut suite = Suite {
        emitted: Emitted::default(),
        rebuilt: Reconstructions::default(),
        limits: Limits::default(),
    };
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run(&mut suite);
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.2}s): {detail}", i + 1),
            Err(why) => {
                println!("FAIL {:>2} {name} ({secs:.2}s): {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
