use alloc::vec::Vec;

use super::{check_sde, CoefficientSpec, SdeProblem};
use crate::error::{Error, Result};
use crate::regulated::RegulatedPath;
use crate::report::ConditionReport;
use crate::semimartingale::{quadratic_variation, stieltjes, total_variation, SemimartingalePath};
use crate::two_sided::{recursion_step, reflect_recursive, sup_distance, ReflectionSolution};

/// How many times `m` is halved before giving up.
const MAX_HALVINGS: u32 = 2;
/// Geometric-mean contraction ratio above which `m` is halved.
const SLOW_RATIO: f64 = 0.9;

/// Grid indices `[start, end)` of one localization interval; `end` is
/// `None` for the last interval, which runs to the horizon inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalizationInterval {
    pub start: usize,
    pub end: Option<usize>,
}

impl LocalizationInterval {
    fn last(&self, n: usize) -> usize {
        self.end.map_or(n - 1, |e| e - 1)
    }
}

/// Starting point of the Picard iteration on each interval.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialGuess {
    /// Constant at the interval's start value.
    StartValue,
    Upper,
    Lower,
    /// A path read on the problem grid.
    Path(RegulatedPath),
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntervalDiagnostics {
    pub start_time: f64,
    /// `+∞` for the last interval.
    pub end_time: f64,
    pub iterations: usize,
    /// `‖X^{n+1} - X^n‖_∞` per iteration.
    pub residuals: Vec<f64>,
    /// Geometric mean of successive residual ratios (0 when undefined).
    pub ratio: f64,
    /// Residuals decreased strictly after the first iteration. Diagnostic
    /// only; a non-monotone run still counts as converged.
    pub monotone: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdeSolution {
    pub x: RegulatedPath,
    pub k: RegulatedPath,
    /// `X₀ + σ(X)·M + b(X)·V`.
    pub y: RegulatedPath,
    /// `0 = τ₀ < τ₁ < … < +∞`.
    pub tau_times: Vec<f64>,
    pub intervals: Vec<IntervalDiagnostics>,
    pub m_used: f64,
    pub halvings: u32,
    pub report: ConditionReport,
}

/// Cumulative localization budget read at right slots:
/// `[M] + |V|² + σ(·,0)²·[M] + b(·,0)²·|V|`, the square taken over the
/// increment since the anchor.
struct Budget {
    qv: Vec<f64>,
    tv: Vec<f64>,
    sq: Vec<f64>,
    bq: Vec<f64>,
}

impl Budget {
    fn new(driver: &SemimartingalePath, sigma: &CoefficientSpec, b: &CoefficientSpec) -> Result<Self> {
        driver.validate()?;
        let grid = driver.grid();
        let zero = RegulatedPath::zero(grid)?;
        let s0 = sigma.apply(&sigma.factor_on(grid), &zero).map(|v| v * v);
        let b0 = b.apply(&b.factor_on(grid), &zero).map(|v| v * v);
        let qv = quadratic_variation(driver);
        let tv = total_variation(driver);
        let sq = stieltjes(&s0, &qv)?;
        let bq = stieltjes(&b0, &tv)?;
        let r = |p: RegulatedPath| p.into_parts().2;
        Ok(Self { qv: r(qv), tv: r(tv), sq: r(sq), bq: r(bq) })
    }

    fn since(&self, a: usize, j: usize) -> f64 {
        let dv = self.tv[j] - self.tv[a];
        (self.qv[j] - self.qv[a]) + dv * dv + (self.sq[j] - self.sq[a]) + (self.bq[j] - self.bq[a])
    }
}

/// Stopping indices: `τ_{n+1}` is the first grid time after `τ_n` whose
/// right slot brings the budget since `τ_n+` to `m`.
pub fn localization_intervals(
    driver: &SemimartingalePath,
    sigma: &CoefficientSpec,
    b: &CoefficientSpec,
    m: f64,
) -> Result<Vec<LocalizationInterval>> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::invalid("localization budget m must be positive"));
    }
    let budget = Budget::new(driver, sigma, b)?;
    let n = driver.len();
    let mut out = Vec::new();
    let mut a = 0;
    loop {
        let end = (a + 1..n).find(|&j| budget.since(a, j) >= m);
        out.push(LocalizationInterval { start: a, end });
        match end {
            Some(e) => a = e,
            None => return Ok(out),
        }
    }
}

/// `[0, τ₁, τ₂, …, +∞]`.
pub fn localization_times(
    driver: &SemimartingalePath,
    sigma: &CoefficientSpec,
    b: &CoefficientSpec,
    m: f64,
) -> Result<Vec<f64>> {
    let grid = driver.grid();
    let mut out: Vec<f64> = localization_intervals(driver, sigma, b, m)?.iter().map(|iv| grid[iv.start]).collect();
    out.push(f64::INFINITY);
    Ok(out)
}

/// Everything the Picard map needs on one interval, shifted to start at 0
/// and flattened at the origin (jumps at the start are handled by the
/// closure step).
struct Window {
    t0: f64,
    m: RegulatedPath,
    v: RegulatedPath,
    fs: RegulatedPath,
    fb: RegulatedPath,
    l: RegulatedPath,
    u: RegulatedPath,
}

impl Window {
    fn new(problem: &SdeProblem, iv: LocalizationInterval, m: &RegulatedPath, v: &RegulatedPath) -> Self {
        let range = iv.start..iv.last(m.len()) + 1;
        let w = |p: &RegulatedPath| p.window(range.clone(), true);
        Self {
            t0: problem.grid()[iv.start],
            m: w(m),
            v: w(v),
            fs: w(&problem.sigma_factor),
            fb: w(&problem.b_factor),
            l: w(problem.barriers().lower()),
            u: w(problem.barriers().upper()),
        }
    }

    /// `start + σ(X)·M + b(X)·V` on the window, with integrands at `s-`.
    fn drive(&self, problem: &SdeProblem, x: &RegulatedPath, start: f64) -> Result<RegulatedPath> {
        let n = self.m.len();
        let mut values = Vec::with_capacity(n);
        let mut rights = Vec::with_capacity(n);
        let mut acc = start;
        for i in 0..n {
            let (fs, fb, g) = if i == 0 {
                (self.fs.values()[0], self.fb.values()[0], x.values()[0])
            } else {
                (self.fs.right_values()[i - 1], self.fb.right_values()[i - 1], x.right_values()[i - 1])
            };
            let hs = fs * problem.sigma().kind().eval(g);
            let hb = fb * problem.b().kind().eval(g);
            acc += hs * self.m.left_jump(i) + hb * self.v.left_jump(i);
            values.push(acc);
            acc += hs * self.m.right_jump(i) + hb * self.v.right_jump(i);
            rights.push(acc);
            if !acc.is_finite() {
                return Err(Error::Diverged { time: self.t0 + self.m.times()[i] });
            }
        }
        Ok(RegulatedPath::from_raw(self.m.times().to_vec(), values, rights))
    }

    fn step(&self, problem: &SdeProblem, x: &RegulatedPath, start: f64) -> Result<(RegulatedPath, ReflectionSolution)> {
        let y = self.drive(problem, x, start)?;
        let sol = reflect_recursive(&y, &self.l, &self.u)?;
        Ok((y, sol))
    }
}

/// One application of `X ↦ Γ(X_{τ+} + σ(X)·M + b(X)·V, L, U)` on `interval`.
///
/// `guess` and the result live on the interval's window: grid indices of
/// the interval, times shifted to start at 0.
pub fn picard_map(
    guess: &RegulatedPath,
    problem: &SdeProblem,
    interval: LocalizationInterval,
    start: f64,
) -> Result<RegulatedPath> {
    let d = problem.driver();
    let w = Window::new(problem, interval, &d.martingale(), &d.finite_variation());
    if !guess.same_grid(&w.m) {
        return Err(Error::GridMismatch);
    }
    Ok(w.step(problem, guess, start)?.1.x)
}

pub fn solve(problem: &SdeProblem) -> Result<SdeSolution> {
    solve_with_guess(problem, &InitialGuess::StartValue)
}

/// Solves on successive localization intervals, halving `m` (at most twice)
/// when an interval fails to converge or contracts slowly.
pub fn solve_with_guess(problem: &SdeProblem, guess: &InitialGuess) -> Result<SdeSolution> {
    let mut current = problem.clone();
    let mut halvings = 0;
    loop {
        let attempt = solve_fixed(&current, guess);
        let slow = match &attempt {
            Ok(sol) => sol.intervals.iter().any(|iv| iv.ratio >= SLOW_RATIO),
            Err(Error::NonConvergence { .. } | Error::Diverged { .. }) => true,
            Err(_) => false,
        };
        if !slow || halvings == MAX_HALVINGS {
            return attempt.map(|mut sol| {
                sol.halvings = halvings;
                sol
            });
        }
        halvings += 1;
        current = current.with_m(current.m() / 2.0)?;
    }
}

fn solve_fixed(problem: &SdeProblem, guess: &InitialGuess) -> Result<SdeSolution> {
    let intervals = problem.intervals()?;
    let grid = problem.grid();
    let n = grid.len();
    let driver = problem.driver();
    let (m, v) = (driver.martingale(), driver.finite_variation());
    let (l, u) = (problem.barriers().lower(), problem.barriers().upper());
    let guess_path = match guess {
        InitialGuess::Path(p) => Some(p.resample(grid)),
        _ => None,
    };

    let x0 = problem.x0();
    let (mut xv, mut xr) = (alloc::vec![x0; n], alloc::vec![x0; n]);
    let (mut kv, mut kr) = (alloc::vec![0.0; n], alloc::vec![0.0; n]);
    let (mut yv, mut yr) = (alloc::vec![x0; n], alloc::vec![x0; n]);
    let mut diagnostics = Vec::with_capacity(intervals.len());

    for iv in &intervals {
        let a = iv.start;
        let w = Window::new(problem, *iv, &m, &v);
        let start = xr[a];
        let mut x = match guess {
            InitialGuess::StartValue => w.m.map(|_| start),
            InitialGuess::Upper => w.u.clone(),
            InitialGuess::Lower => w.l.clone(),
            InitialGuess::Path(_) => {
                let p = guess_path.as_ref().expect("resampled above");
                p.window(a..iv.last(n) + 1, true).zip_map(&w.m, |g, _| g)?
            }
        };
        let mut residuals = Vec::new();
        let mut done = None;
        for _ in 0..problem.max_iters() {
            let (y, sol) = w.step(problem, &x, start)?;
            let diff = sup_distance(&sol.x, &x);
            residuals.push(diff);
            x = sol.x.clone();
            if diff < problem.picard_tol() {
                done = Some((y, sol));
                break;
            }
        }
        let ratio = contraction_ratio(&residuals);
        let Some((y, sol)) = done else {
            return Err(Error::NonConvergence {
                interval_start: grid[a],
                iterations: residuals.len(),
                residual: residuals.last().copied().unwrap_or(f64::NAN),
                ratio,
                budget: problem.m(),
            });
        };

        // window slot j is global index a + j; the slots at a itself come
        // from the closure (or the initial condition)
        let k_start = kr[a];
        for j in 1..y.len() {
            let i = a + j;
            xv[i] = sol.x.values()[j];
            xr[i] = sol.x.right_values()[j];
            kv[i] = k_start + sol.k.values()[j];
            kr[i] = k_start + sol.k.right_values()[j];
            yv[i] = y.values()[j] - k_start;
            yr[i] = y.right_values()[j] - k_start;
        }

        if let Some(b) = iv.end {
            let g = xr[b - 1];
            let hs = problem.sigma_factor.right_values()[b - 1] * problem.sigma().kind().eval(g);
            let hb = problem.b_factor.right_values()[b - 1] * problem.b().kind().eval(g);
            let y_at = yr[b - 1] + hs * m.left_jump(b) + hb * v.left_jump(b);
            let y_right = y_at + hs * m.right_jump(b) + hb * v.right_jump(b);
            if !y_right.is_finite() {
                return Err(Error::Diverged { time: grid[b] });
            }
            let (lb, ub) = ((l.values()[b], l.right_values()[b]), (u.values()[b], u.right_values()[b]));
            let (k, k_right) = recursion_step(kr[b - 1], (y_at, y_right), lb, ub);
            xv[b] = (y_at + k).max(lb.0).min(ub.0);
            xr[b] = (y_right + k_right).max(lb.1).min(ub.1);
            kv[b] = k;
            kr[b] = k_right;
            yv[b] = y_at;
            yr[b] = y_right;
        }

        diagnostics.push(IntervalDiagnostics {
            start_time: grid[a],
            end_time: iv.end.map_or(f64::INFINITY, |e| grid[e]),
            iterations: residuals.len(),
            monotone: residuals.windows(2).skip(1).all(|w| w[1] < w[0]),
            residuals,
            ratio,
        });
    }

    let mut tau_times: Vec<f64> = intervals.iter().map(|iv| grid[iv.start]).collect();
    tau_times.push(f64::INFINITY);
    let path = |v, r| RegulatedPath::from_raw(grid.to_vec(), v, r);
    let mut sol = SdeSolution {
        x: path(xv, xr),
        k: path(kv, kr),
        y: path(yv, yr),
        tau_times,
        intervals: diagnostics,
        m_used: problem.m(),
        halvings: 0,
        report: ConditionReport::new(0.0),
    };
    sol.report = check_sde(&sol, problem, 10.0 * problem.picard_tol())?;
    Ok(sol)
}

fn contraction_ratio(residuals: &[f64]) -> f64 {
    let mut log_sum = 0.0;
    let mut count = 0;
    for w in residuals.windows(2) {
        if w[0] > 0.0 && w[1] > 0.0 {
            log_sum += libm::log(w[1] / w[0]);
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        libm::exp(log_sum / count as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::two_sided::BarrierPair;
    use alloc::vec;

    fn deterministic_driver(n: usize, step: f64, qv_rate: f64) -> SemimartingalePath {
        let grid = RegulatedPath::uniform_grid(n, step);
        let mut d = SemimartingalePath::zero(&grid).unwrap();
        let inc = libm::sqrt(qv_rate * step);
        let vals: Vec<f64> = (0..grid.len()).map(|i| i as f64 * inc).collect();
        d.mc = RegulatedPath::from_raw(grid, vals.clone(), vals);
        d
    }

    fn problem(driver: SemimartingalePath, m: f64) -> SdeProblem {
        let pair = BarrierPair::constant(driver.grid(), -100.0, 100.0).unwrap();
        SdeProblem::new(0.0, CoefficientSpec::zero(), CoefficientSpec::zero(), driver, pair, m, 1e-12, 50).unwrap()
    }

    #[test]
    fn steady_bracket_growth_gives_even_spacing() {
        // [M] grows by 0.4 per unit time, so m = 1 is used up every 2.5
        let p = problem(deterministic_driver(1000, 0.01, 0.4), 1.0);
        let taus = localization_times(p.driver(), p.sigma(), p.b(), p.m()).unwrap();
        assert_eq!(*taus.last().unwrap(), f64::INFINITY);
        let finite = &taus[..taus.len() - 1];
        assert_eq!(finite.len(), 4);
        for w in finite.windows(2) {
            assert!((w[1] - w[0] - 2.5).abs() <= 0.011, "{taus:?}");
        }
    }

    #[test]
    fn a_single_large_jump_is_a_stopping_time() {
        let grid = RegulatedPath::uniform_grid(10, 1.0);
        let mut d = SemimartingalePath::zero(&grid).unwrap();
        let vals: Vec<f64> = grid.iter().map(|&t| if t >= 4.0 { 5.0 } else { 0.0 }).collect();
        d.md = RegulatedPath::from_raw(grid.clone(), vals.clone(), vals);
        let p = problem(d, 1.0);
        let taus = localization_times(p.driver(), p.sigma(), p.b(), p.m()).unwrap();
        assert_eq!(taus, vec![0.0, 4.0, f64::INFINITY]);
    }

    #[test]
    fn contraction_ratio_is_a_geometric_mean() {
        assert_eq!(contraction_ratio(&[1.0]), 0.0);
        assert!((contraction_ratio(&[1.0, 0.5, 0.125]) - libm::sqrt(0.125)).abs() < 1e-12);
        assert!((contraction_ratio(&[1.0, 0.1, 0.01]) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn zero_coefficients_reflect_the_start_value() {
        let p = problem(deterministic_driver(20, 0.1, 1.0), 0.3);
        let sol = solve(&p).unwrap();
        assert!(sol.x.slots().all(|v| v == 0.0));
        assert!(sol.k.slots().all(|v| v == 0.0));
        assert!(sol.report.all_pass(), "{}", sol.report);
    }

    #[test]
    fn picard_map_rejects_a_guess_on_the_wrong_grid() {
        let p = problem(deterministic_driver(20, 0.1, 1.0), 0.3);
        let iv = p.intervals().unwrap()[0];
        let bad = RegulatedPath::zero(&[0.0, 1.0]).unwrap();
        assert_eq!(picard_map(&bad, &p, iv, 0.0), Err(Error::GridMismatch));
    }
}
