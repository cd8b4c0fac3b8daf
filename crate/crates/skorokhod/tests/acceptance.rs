//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs as a plain binary (`harness = false`) so the lines are
//! always printed.

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use skorokhod::config::LoadedConfig;
use skorokhod::verify::{self, Suite, SuiteReport};
use skorokhod_core::regulated::RegulatedPath;
use skorokhod_core::sample::random_problem;
use skorokhod_core::sde::{solve, solve_with_guess, InitialGuess};
use skorokhod_core::semimartingale::simulate_driver;
use skorokhod_core::two_sided::{
    check_rp_conditions, decompose_k, reflect, reflect_explicit, reflect_recursive, sup_distance, ReflectionSolution,
    Route,
};

/// Outcome of one criterion: pass flag and a one-line summary.
type Outcome = (bool, String);

/// Values and right values of a path on the grid `{0, 1, 2}`.
type Criterion = fn() -> Outcome;

type Slots = ([f64; 3], [f64; 3]);

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

fn path(v: [f64; 3], r: [f64; 3]) -> RegulatedPath {
    RegulatedPath::new(vec![0.0, 1.0, 2.0], v.to_vec(), r.to_vec()).unwrap()
}

fn suite_summary(r: &SuiteReport) -> String {
    let parts: Vec<String> = r.metrics.iter().map(|(name, m)| format!("{name} = {:.3e}", m.worst)).collect();
    format!("{} trials; {}", r.trials, parts.join("; "))
}

fn timed_suite(suite: Suite, trials: usize, limit: Duration) -> Outcome {
    let start = Instant::now();
    let r = verify::run(suite, trials, 0, None);
    let elapsed = start.elapsed();
    let mut msg = suite_summary(&r);
    if let Some(seed) = r.witness_seed() {
        msg += &format!("; witness seed {seed}");
    }
    (r.pass && within(elapsed, limit), format!("{msg}; {elapsed:.2?}"))
}

fn golden() -> Outcome {
    let y = path([0.0, -1.0, -1.0], [0.0, 3.0, -1.0]);
    let l = path([0.0; 3], [0.0; 3]);
    let u = path([2.0; 3], [2.0; 3]);
    let mut ok = true;
    let mut slowest = Duration::ZERO;
    for route in Route::ALL {
        let start = Instant::now();
        let sol = reflect(route, &y, &l, &u).unwrap();
        slowest = slowest.max(start.elapsed());
        let (k, x) = (&sol.k, &sol.x);
        ok &= k.values()[1] == 1.0
            && k.right_values()[1] == -1.0
            && x.values()[1] == 0.0
            && x.right_values()[1] == 2.0
            && k.right_jump(1) == -2.0;
    }
    (
        ok && within(slowest, Duration::from_millis(1)),
        format!("k(1) = 1, k(1+) = -1 on every route; slowest {slowest:.2?}"),
    )
}

fn routes() -> Outcome {
    timed_suite(Suite::Routes, 500, Duration::from_secs(30))
}

fn checker() -> Outcome {
    timed_suite(Suite::Checker, 500, Duration::from_secs(30))
}

fn lipschitz() -> Outcome {
    timed_suite(Suite::Lipschitz, 500, Duration::from_secs(60))
}

/// Same seeds and instance stream as [`routes`], so it covers the same trials.
fn identity() -> Outcome {
    timed_suite(Suite::Identity, 500, Duration::from_secs(30))
}

fn crossing() -> Outcome {
    timed_suite(Suite::Crossing, 200, Duration::from_secs(30))
}

/// Integer values `lo..=hi`.
fn ints(lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    (lo.ceil() as i64..=hi.floor() as i64).map(|v| v as f64)
}

/// Every lattice candidate `x̂` inside `[l, u]` with `x̂(0) = y(0)`, taken
/// with `k̂ = x̂ - y` and the minimal split of `k̂`, is run through the
/// checker; those with zero residual must equal the explicit route.
fn exhaustive() -> Outcome {
    let start = Instant::now();
    let c = |v: f64| ([v; 3], [v; 3]);
    let mut barriers: Vec<(Slots, Slots)> = Vec::new();
    for (lo, hi) in [
        (-2.0, -1.0),
        (-1.0, 0.0),
        (0.0, 1.0),
        (1.0, 2.0),
        (-2.0, 0.0),
        (-1.0, 1.0),
        (0.0, 2.0),
        (-1.0, 2.0),
        (-2.0, 1.0),
    ] {
        barriers.push((c(lo), c(hi)));
    }
    // moving barriers with left and right jumps of their own
    barriers.push((([-1.0, 0.0, -1.0], [-1.0, -1.0, 0.0]), ([1.0, 1.0, 0.0], [1.0, 2.0, 1.0])));
    barriers.push((([0.0, -1.0, 0.0], [0.0, 0.0, -2.0]), ([1.0, 1.0, 2.0], [1.0, 2.0, 0.0])));
    barriers.push((([-2.0, -2.0, -1.0], [-2.0, 0.0, -1.0]), ([0.0, 1.0, 0.0], [0.0, 1.0, 1.0])));
    barriers.push((([-1.0, -1.0, -1.0], [-1.0, -2.0, 1.0]), ([0.0, 0.0, 1.0], [0.0, 0.0, 2.0])));
    barriers.push((([0.0, 1.0, -1.0], [0.0, -1.0, 0.0]), ([2.0, 2.0, 1.0], [2.0, 0.0, 2.0])));
    barriers.push((([-2.0, -1.0, -2.0], [-2.0, 1.0, -1.0]), ([-1.0, 1.0, 0.0], [-1.0, 2.0, 0.0])));

    let vals = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let (mut instances, mut candidates, mut mismatches) = (0usize, 0usize, 0usize);
    for &((lv, lr), (uv, ur)) in &barriers {
        let (l, u) = (path(lv, lr), path(uv, ur));
        for &y0 in vals.iter().filter(|&&v| lv[0] <= v && v <= uv[0]) {
            for y1 in vals.iter().flat_map(|&a| vals.map(|b| (a, b))) {
                for y2 in vals.iter().flat_map(|&a| vals.map(|b| (a, b))) {
                    let y = path([y0, y1.0, y2.0], [y0, y1.1, y2.1]);
                    let reference = reflect_explicit(&y, &l, &u).unwrap();
                    instances += 1;
                    let mut found = 0;
                    // slots after the first: (0+), 1, 1+, 2, 2+
                    let ranges: Vec<Vec<f64>> = [(0, true), (1, false), (1, true), (2, false), (2, true)]
                        .iter()
                        .map(|&(i, r)| ints(l.slot(i, r), u.slot(i, r)).collect())
                        .collect();
                    for a in &ranges[0] {
                        for b in &ranges[1] {
                            for c in &ranges[2] {
                                for d in &ranges[3] {
                                    for e in &ranges[4] {
                                        let x = RegulatedPath::from_raw(
                                            vec![0.0, 1.0, 2.0],
                                            vec![y0, *b, *d],
                                            vec![*a, *c, *e],
                                        );
                                        let k = x.zip_map(&y, |x, y| x - y).unwrap();
                                        let (phi1, phi2) = decompose_k(&k);
                                        let cand = ReflectionSolution { x, k, phi1, phi2, ..reference.clone() };
                                        candidates += 1;
                                        let report = check_rp_conditions(&cand, &y, &l, &u, 0.0).unwrap();
                                        if report.max_residual() == 0.0 {
                                            found += 1;
                                            if cand.x != reference.x || cand.k != reference.k {
                                                mismatches += 1;
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                    // the reference itself is a lattice candidate, so exactly one must pass
                    if found != 1 {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    (
        mismatches == 0 && within(elapsed, Duration::from_secs(120)),
        format!("{instances} instances, {candidates} candidates, {mismatches} non-unique or differing; {elapsed:.2?}"),
    )
}

fn bv() -> Outcome {
    timed_suite(Suite::Bv, 100, Duration::from_secs(30))
}

fn sde() -> Outcome {
    let start = Instant::now();
    let cfg = LoadedConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/jump_affine.toml")).unwrap();
    let tol = 10.0 * cfg.config.solver.picard_tol;
    let (mut failures, mut identity, mut guesses, mut halvings, mut points) = (Vec::new(), 0.0_f64, 0.0_f64, 0, 0);
    for seed in 0..100 {
        let problem = cfg.problem(simulate_driver(&cfg.config.driver, seed).unwrap()).unwrap();
        points = problem.grid().len();
        let (a, b) = match (solve(&problem), solve_with_guess(&problem, &InitialGuess::Upper)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                failures.push(seed);
                continue;
            }
        };
        halvings = halvings.max(a.halvings).max(b.halvings);
        let (l, u) = (problem.barriers().lower(), problem.barriers().upper());
        let contained = a.x.slots().zip(l.slots().zip(u.slots())).all(|(x, (l, u))| l <= x && x <= u);
        let res = a.report.get("X = X0").unwrap().residual;
        identity = identity.max(res);
        let d = sup_distance(&a.x, &b.x).max(sup_distance(&a.k, &b.k));
        guesses = guesses.max(d);
        if !contained || res > tol || d > tol || a.halvings > 2 || b.halvings > 2 {
            failures.push(seed);
        }
    }
    let elapsed = start.elapsed();
    (
        failures.is_empty() && within(elapsed, Duration::from_secs(120)),
        format!(
            "100 seeds x {points} points; failing seeds {failures:?}; max identity residual {identity:.2e}; \
             max guess distance {guesses:.2e}; max halvings {halvings}; {elapsed:.2?}"
        ),
    )
}

fn prefix(p: &RegulatedPath, n: usize) -> RegulatedPath {
    RegulatedPath::new(p.times()[..n].to_vec(), p.values()[..n].to_vec(), p.right_values()[..n].to_vec()).unwrap()
}

fn performance() -> Outcome {
    let p = random_problem(&mut ChaCha8Rng::seed_from_u64(2024), 1_000_000, 0.1);
    let start = Instant::now();
    let full = reflect_recursive(&p.y, &p.l, &p.u).unwrap();
    let elapsed = start.elapsed();
    let n = 10_000;
    let head = reflect_explicit(&prefix(&p.y, n), &prefix(&p.l, n), &prefix(&p.u, n)).unwrap();
    let d = sup_distance(&prefix(&full.x, n), &head.x).max(sup_distance(&prefix(&full.k, n), &head.k));
    (
        d <= 1e-12 && within(elapsed, Duration::from_secs(1)),
        format!("10^6 points in {elapsed:.2?}; prefix distance to explicit {d:.2e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("golden example", golden),
        ("route equivalence", routes),
        ("condition checker", checker),
        ("lipschitz bounds", lipschitz),
        ("max identity", identity),
        ("crossing decomposition", crossing),
        ("exhaustive uniqueness", exhaustive),
        ("bv inequality", bv),
        ("reflected sde", sde),
        ("performance", performance),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (pass, msg) = run();
        all &= pass;
        println!("{} {:>2} {name}: {msg}", if pass { "PASS" } else { "FAIL" }, i + 1);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
