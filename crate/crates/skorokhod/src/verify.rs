//! Randomized invariant suites over the reflection maps and path helpers.
//!
//! Trial `i` of a run with seed `s` draws its instance from
//! `ChaCha8Rng::seed_from_u64(s + i)`, so a failing trial is reproduced from
//! its witness seed alone.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use skorokhod_core::one_sided::reflect_lower;
use skorokhod_core::regulated::{RegulatedPath, TimePoint};
use skorokhod_core::sample::{perturb, random_bv, random_problem, Problem};
use skorokhod_core::semimartingale::bv_square_check;
use skorokhod_core::two_sided::{
    alpha_map, beta_map, check_rp_conditions, crossing_decomposition, lipschitz_gap, reflect, sup_distance, theta_map,
    Route,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Routes,
    Lipschitz,
    Identity,
    Crossing,
    Bv,
    Jumps,
    Checker,
    All,
}

impl Suite {
    pub const EACH: [Suite; 7] =
        [Suite::Routes, Suite::Lipschitz, Suite::Identity, Suite::Crossing, Suite::Bv, Suite::Jumps, Suite::Checker];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Routes => "routes",
            Suite::Lipschitz => "lipschitz",
            Suite::Identity => "identity",
            Suite::Crossing => "crossing",
            Suite::Bv => "bv",
            Suite::Jumps => "jumps",
            Suite::Checker => "checker",
            Suite::All => "all",
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            Suite::Crossing | Suite::Bv => 200,
            _ => 500,
        }
    }

    /// Tolerance used when `--tol` is not given.
    pub fn default_tol(self) -> f64 {
        match self {
            Suite::Checker => 1e-9,
            Suite::Crossing | Suite::Jumps => 0.0,
            _ => 1e-12,
        }
    }
}

/// Worst value of one measured quantity, which must stay `≤ limit`.
#[derive(Clone, Debug, Serialize)]
pub struct Metric {
    pub worst: f64,
    pub limit: f64,
    pub witness_seed: Option<u64>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub pass: bool,
    pub metrics: BTreeMap<&'static str, Metric>,
}

impl SuiteReport {
    /// Seed of the first failing metric's worst trial.
    pub fn witness_seed(&self) -> Option<u64> {
        self.metrics.values().find(|m| !m.pass).and_then(|m| m.witness_seed)
    }
}

struct Tracker {
    metrics: BTreeMap<&'static str, Metric>,
}

impl Tracker {
    fn new() -> Self {
        Self { metrics: BTreeMap::new() }
    }

    fn see(&mut self, name: &'static str, value: f64, limit: f64, seed: u64) {
        let m = self.metrics.entry(name).or_insert(Metric {
            worst: f64::NEG_INFINITY,
            limit,
            witness_seed: None,
            pass: true,
        });
        if value > m.worst || value.is_nan() {
            m.worst = value;
            m.witness_seed = Some(seed);
        }
        m.pass &= value <= limit;
    }

    fn finish(self, suite: Suite, trials: usize, seed: u64, tol: f64) -> SuiteReport {
        let pass = self.metrics.values().all(|m| m.pass);
        SuiteReport { suite: suite.name(), trials, seed, tol, pass, metrics: self.metrics }
    }
}

/// Random instance size in `2..=1000`, skewed towards small grids.
fn instance(rng: &mut ChaCha8Rng) -> Problem {
    let n = if rng.random_bool(0.2) { rng.random_range(200..=1000) } else { rng.random_range(2..200) };
    random_problem(rng, n, 0.1)
}

/// Runs one suite; `All` is expanded by [`run_all`].
pub fn run(suite: Suite, trials: usize, seed: u64, tol: Option<f64>) -> SuiteReport {
    let tol = tol.unwrap_or(suite.default_tol());
    let mut t = Tracker::new();
    for trial in 0..trials {
        let s = seed.wrapping_add(trial as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        match suite {
            Suite::Routes => routes_trial(&mut t, &mut rng, s, tol),
            Suite::Lipschitz => lipschitz_trial(&mut t, &mut rng, s, tol),
            Suite::Identity => identity_trial(&mut t, &mut rng, s, tol),
            Suite::Crossing => crossing_trial(&mut t, &mut rng, s, tol),
            Suite::Bv => bv_trial(&mut t, &mut rng, s, tol),
            Suite::Jumps => jumps_trial(&mut t, &mut rng, s, tol),
            Suite::Checker => checker_trial(&mut t, &mut rng, s, tol),
            Suite::All => unreachable!("expanded by run_all"),
        }
    }
    t.finish(suite, trials, seed, tol)
}

/// Every suite with its default trial count unless `trials` is given.
pub fn run_all(trials: Option<usize>, seed: u64, tol: Option<f64>) -> Vec<SuiteReport> {
    Suite::EACH.iter().map(|&s| run(s, trials.unwrap_or(s.default_trials()), seed, tol)).collect()
}

fn routes_trial(t: &mut Tracker, rng: &mut ChaCha8Rng, seed: u64, tol: f64) {
    let p = instance(rng);
    let sols: Vec<_> = Route::ALL.iter().map(|&r| reflect(r, &p.y, &p.l, &p.u).expect("valid instance")).collect();
    let (mut dx, mut dk, mut jump_sets) = (0.0_f64, 0.0_f64, 0.0);
    for a in 0..sols.len() {
        for b in a + 1..sols.len() {
            dx = dx.max(sup_distance(&sols[a].x, &sols[b].x));
            dk = dk.max(sup_distance(&sols[a].k, &sols[b].k));
            if sols[a].right_jump_up_times != sols[b].right_jump_up_times
                || sols[a].right_jump_down_times != sols[b].right_jump_down_times
            {
                jump_sets += 1.0;
            }
        }
    }
    t.see("max route distance x", dx, tol, seed);
    t.see("max route distance k", dk, tol, seed);
    t.see("right-jump time sets differing", jump_sets, 0.0, seed);
}

fn lipschitz_trial(t: &mut Tracker, rng: &mut ChaCha8Rng, seed: u64, tol: f64) {
    let n = rng.random_range(2..300);
    let p = random_problem(rng, n, 0.1);
    let size = rng.random_range(0.0..0.04);
    let y2 = perturb(rng, &p.y, 10.0 * size);
    let l2 = perturb(rng, &p.l, size);
    let u2 = perturb(rng, &p.u, size);
    let horizon = p.y.horizon() + 1.0;
    let gap = lipschitz_gap(&p.y, &y2, &p.l, &l2, &p.u, &u2, horizon).expect("valid instance");
    let (rk, rx) = gap.ratios();
    t.see("worst ratio k (limit 2)", rk, 2.0 + tol, seed);
    t.see("worst ratio x (limit 3)", rx, 3.0 + tol, seed);
}

fn identity_trial(t: &mut Tracker, rng: &mut ChaCha8Rng, seed: u64, tol: f64) {
    let p = instance(rng);
    let alpha = alpha_map(&p.y, &p.l).expect("valid instance");
    let beta = beta_map(&p.y, &p.l, &p.u).expect("valid instance");
    let xi = reflect_lower(&p.y, &p.l).expect("valid instance").xi;
    let theta = theta_map(&xi, &p.l, &p.u).expect("valid instance");
    let lhs = alpha.zip_map(&beta, f64::max).expect("same grid");
    let rhs = alpha.zip_map(&theta, |a, th| a + th).expect("same grid");
    t.see("max |alpha v beta - (alpha + theta)|", sup_distance(&lhs, &rhs), tol, seed);
}

fn crossing_trial(t: &mut Tracker, rng: &mut ChaCha8Rng, seed: u64, tol: f64) {
    let p = instance(rng);
    let xi = reflect_lower(&p.y, &p.l).expect("valid instance").xi;
    let theta = theta_map(&xi, &p.l, &p.u).expect("valid instance");
    match crossing_decomposition(&xi, &p.l, &p.u) {
        Ok(dec) => {
            t.see("max |reconstructed theta - theta|", sup_distance(&dec.theta, &theta), tol, seed);
            t.see("interleaving violations", f64::from(u8::from(!dec.is_interleaved())), 0.0, seed);
            t.see("alternations / grid size", dec.alternations() as f64 / p.y.len() as f64, 1.0, seed);
        }
        Err(_) => t.see("decomposition errors", 1.0, 0.0, seed),
    }
}

fn bv_trial(t: &mut Tracker, rng: &mut ChaCha8Rng, seed: u64, tol: f64) {
    let n = rng.random_range(2..200);
    let a = random_bv(rng, n);
    let report = bv_square_check(&a, tol);
    let negative_gap = report.get("square inequality").map_or(f64::INFINITY, |c| c.residual);
    let mismatch = report.get("gap equals").map_or(f64::INFINITY, |c| c.residual);
    t.see("max negative gap", negative_gap, tol, seed);
    t.see("max relative gap mismatch", mismatch, 1e-9, seed);
    // jump-free paths on a grid are constant: the inequality is an equality
    let flat = RegulatedPath::constant(a.times(), rng.random_range(-5.0..5.0)).expect("valid grid");
    let gap =
        skorokhod_core::semimartingale::bv_square_sides(&flat).iter().fold(0.0_f64, |m, (l, r)| m.max((r - l).abs()));
    t.see("max |gap| on jump-free paths", gap, 0.0, seed);
}

fn jumps_trial(t: &mut Tracker, rng: &mut ChaCha8Rng, seed: u64, _tol: f64) {
    let p = instance(rng);
    let sol = reflect(Route::Recursive, &p.y, &p.l, &p.u).expect("valid instance");
    let (mut right, mut left) = (0.0_f64, 0.0_f64);
    for i in 0..sol.k.len() {
        right = right.max((sol.phi1.right_jump(i) * sol.phi2.right_jump(i)).abs());
        left = left.max((sol.phi1.left_jump(i) * sol.phi2.left_jump(i)).abs());
    }
    let overlap = sol.right_jump_up_times.iter().filter(|s| sol.right_jump_down_times.contains(s)).count();
    t.see("max |D+phi1 * D+phi2|", right, 0.0, seed);
    t.see("max |D-phi1 * D-phi2|", left, 0.0, seed);
    t.see("up/down right-jump times shared", overlap as f64, 0.0, seed);
}

fn checker_trial(t: &mut Tracker, rng: &mut ChaCha8Rng, seed: u64, tol: f64) {
    let p = instance(rng);
    let mut missed = 0.0;
    for route in Route::ALL {
        let sol = reflect(route, &p.y, &p.l, &p.u).expect("valid instance");
        let report = check_rp_conditions(&sol, &p.y, &p.l, &p.u, tol).expect("same grid");
        t.see("max residual on route outputs", report.max_residual(), tol, seed);
        if route != Route::Recursive {
            continue;
        }
        // identity fault at a random slot must be caught at that slot
        let i = rng.random_range(0..p.y.len());
        let right = rng.random_bool(0.5);
        let mut bad = sol.clone();
        if right {
            bad.x.right_values_mut()[i] += 1e-6;
        } else {
            bad.x.values_mut()[i] += 1e-6;
        }
        let r = check_rp_conditions(&bad, &p.y, &p.l, &p.u, tol).expect("same grid");
        let c = r.get("x = y + k").expect("identity condition");
        let at = TimePoint { time: p.y.times()[i], right_limit: right };
        if c.pass || c.witness != Some(at) {
            missed += 1.0;
        }
        // pushing x outside the barriers must fail containment
        let mut out = sol.clone();
        out.x.values_mut()[i] = p.u.values()[i] + 1.0;
        let r = check_rp_conditions(&out, &p.y, &p.l, &p.u, tol).expect("same grid");
        let c = r.get("l <= x <= u").expect("containment condition");
        if c.pass || c.witness != Some(TimePoint::at(p.y.times()[i])) {
            missed += 1.0;
        }
        // a decreasing phi1 must fail monotonicity
        let mut dec = sol.clone();
        let j = p.y.len() - 1;
        dec.phi1.right_values_mut()[j] -= 1.0;
        dec.phi2.right_values_mut()[j] -= 1.0;
        let r = check_rp_conditions(&dec, &p.y, &p.l, &p.u, tol).expect("same grid");
        if r.get("phi1, phi2 non-decreasing").expect("monotonicity condition").pass {
            missed += 1.0;
        }
    }
    t.see("injected faults not detected", missed, 0.0, seed);
}
