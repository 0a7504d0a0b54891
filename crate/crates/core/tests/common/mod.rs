#![allow(dead_code)]

use elrf::detect::RawSolution;
use elrf::error::Result;
use elrf::farkas::{build_dec_pos, FnTemplate};
use elrf::linexpr::{LinExpr, Var};
use elrf::loop_model::{CandidateFn, SlcLoop};
use elrf::lp;
use elrf::oracle::random_loop;
use elrf::polyhedron::{Constraint, Polyhedron};
use elrf::rational::int;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Where the increasing function of a certificate came from.
pub enum FSource<'a> {
    Given(&'a CandidateFn),
    Searched,
}

/// For every positive-multiplier branch of `raw`, whether putting
/// `k = P/λ` and `b = p/λ` back into the product-bearing dual leaves a
/// feasible system.
pub fn reconstruction(lp: &SlcLoop, raw: &RawSolution, f: FSource<'_>) -> Result<Vec<(&'static str, bool)>> {
    let (rho, a) = FnTemplate::parametric(lp.vars(), "a");
    let f = match f {
        FSource::Given(g) => FnTemplate::fixed(g),
        FSource::Searched => FnTemplate::parametric(lp.vars(), "b").0,
    };
    let (dec, pos) = build_dec_pos(lp, &rho, Some(&f))?;
    let mut out = Vec::new();
    for (label, branch, dual) in [("decrease", &raw.dec, &dec), ("positivity", &raw.pos, &pos)] {
        let Some(branch) = branch else { continue };
        let mut values = branch.recover(&raw.assignment)?;
        for ai in &a {
            values.insert(
                ai.clone(),
                raw.assignment.get(ai).cloned().unwrap_or_else(Zero::zero),
            );
        }
        out.push((label, lp::is_feasible(&dual.instantiate(&values)?)?));
    }
    Ok(out)
}

/// The random loop corpus: 2 or 3 variables, 2 to 6 rows, coefficients in
/// `[-3, 3]`.
pub fn random_corpus(count: u64) -> Vec<(String, SlcLoop)> {
    (0..count)
        .map(|seed| {
            let n_vars = 2 + (seed % 2) as usize;
            let n_rows = 2 + (seed % 5) as usize;
            let lp = random_loop(n_vars, n_rows, 3, seed).expect("random loop");
            (format!("random loop {seed}"), lp)
        })
        .collect()
}

/// A random system over up to four variables with up to eight rows, and a
/// nonempty set of variables to eliminate.
pub fn random_system(seed: u64) -> (Polyhedron, Vec<Var>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=4);
    let vars: Vec<Var> = (1..=n).map(|i| Var::new(format!("v{i}"))).collect();
    let m = rng.gen_range(1..=8);
    let mut rows = Vec::new();
    for _ in 0..m {
        let mut e = LinExpr::constant(int(rng.gen_range(-4..=4)));
        for v in &vars {
            if rng.gen_bool(0.6) {
                e.add_term(v, int(rng.gen_range(-3..=3)));
            }
        }
        rows.push(match rng.gen_range(0..8) {
            0 => Constraint::eq(e),
            1 => Constraint::gt(e),
            _ => Constraint::geq(e),
        });
    }
    let mut eliminate: Vec<Var> = vars.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
    if eliminate.is_empty() {
        eliminate.push(vars[rng.gen_range(0..n)].clone());
    }
    (Polyhedron::new(vars, rows).expect("well formed"), eliminate)
}

/// Points of `system`: vertices of its intersection with random boxes.
/// Fewer than `count` come back when the boxes miss the system.
pub fn points_of(system: &Polyhedron, count: usize, rng: &mut ChaCha8Rng) -> Vec<elrf::linexpr::Assignment> {
    let mut out = Vec::new();
    for _ in 0..count * 3 {
        if out.len() == count {
            break;
        }
        let mut boxed = system.clone();
        let mut objective = LinExpr::zero();
        for v in system.vars() {
            let t = int(rng.gen_range(-6..=6));
            let e = LinExpr::var(v) - LinExpr::constant(t);
            let r = int(rng.gen_range(1..=6));
            boxed = boxed
                .with(Constraint::geq(e.clone() + LinExpr::constant(r.clone())))
                .with(Constraint::geq(LinExpr::constant(r) - e));
            objective.add_term(v, int(rng.gen_range(-2..=2)));
        }
        let out_lp = lp::lp_solve(&boxed, Some(&lp::Objective::minimize(objective))).expect("lp");
        if let Some(p) = out_lp.point {
            out.push(p);
        }
    }
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
