use alloc::vec::Vec;

use super::{SdeProblem, SdeSolution};
use crate::error::{Error, Result};
use crate::regulated::{merged_grid, RegulatedPath, TimePoint};
use crate::report::{ConditionReport, Worst};
use crate::semimartingale::{galchuk_integral, quadratic_variation, simulate_driver, DriverSpec, SemimartingalePath};
use crate::two_sided::{reflect_recursive, BarrierPair};

/// Running partial sum that remembers its worst excursion in one direction.
struct OneSided {
    sign: f64,
    sum: f64,
    worst: Worst,
}

impl OneSided {
    /// Tracks `Σ term` which must stay `≤ 0` (`sign = 1`) or `≥ 0` (`sign = -1`).
    fn new(sign: f64) -> Self {
        Self { sign, sum: 0.0, worst: Worst::default() }
    }

    fn add(&mut self, term: f64, at: TimePoint) {
        self.sum += term;
        self.worst.see(self.sign * self.sum, at);
    }
}

/// Measures the defining conditions of a reflected SDE solution:
///
/// * `K₀ = 0`;
/// * containment `L ≤ X ≤ U`;
/// * the contact sums on left jumps, `Σ ((X-L) ∧ (X₊-L₊)) Δ⁻K ≤ 0` and
///   `Σ ((U-X) ∧ (U₊-X₊)) Δ⁻K ≥ 0` at every time;
/// * the four right-jump sums, e.g. `Σ (X₊-L₊) Δ⁺K ≤ 0`;
/// * `X = X₀ + σ(X)·M + b(X)·V + K`, with the integrals recomputed from `X`.
///
/// On a grid the continuous part of `K` vanishes, so the contact sums only
/// see jumps.
pub fn check_sde(sol: &SdeSolution, problem: &SdeProblem, tol: f64) -> Result<ConditionReport> {
    let grid = problem.grid();
    let (x, k) = (&sol.x, &sol.k);
    if x.times() != grid || k.times() != grid {
        return Err(Error::GridMismatch);
    }
    let (l, u) = (problem.barriers().lower(), problem.barriers().upper());

    let driver = problem.driver();
    let sigma_x = problem.sigma_along(x);
    let b_x = problem.b_along(x);
    let ym = galchuk_integral(&sigma_x, &driver.martingale_part())?.path;
    let yv = galchuk_integral(&b_x, &driver.variation_part())?.path;

    let mut contain = Worst::default();
    let mut identity = Worst::default();
    let mut lower = OneSided::new(1.0);
    let mut upper = OneSided::new(-1.0);
    let mut jumps = [OneSided::new(1.0), OneSided::new(1.0), OneSided::new(-1.0), OneSided::new(-1.0)];
    for (i, &t) in grid.iter().enumerate() {
        for right in [false, true] {
            let at = TimePoint { time: t, right_limit: right };
            let xs = x.slot(i, right);
            contain.see(l.slot(i, right) - xs, at);
            contain.see(xs - u.slot(i, right), at);
            let y = problem.x0() + ym.slot(i, right) + yv.slot(i, right);
            identity.see((xs - y - k.slot(i, right)).abs(), at);
        }
        let at = TimePoint::at(t);
        let (xv, xr) = (x.values()[i], x.right_values()[i]);
        let (lv, lr) = (l.values()[i], l.right_values()[i]);
        let (uv, ur) = (u.values()[i], u.right_values()[i]);
        let (dl, dr) = (k.left_jump(i), k.right_jump(i));
        lower.add((xv - lv).min(xr - lr) * dl, at);
        upper.add((uv - xv).min(ur - xr) * dl, at);
        jumps[0].add((xr - lr) * dr, at);
        jumps[1].add((uv - xv) * dr, at);
        jumps[2].add((ur - xr) * dr, at);
        jumps[3].add((xv - lv) * dr, at);
    }

    let mut report = ConditionReport::new(tol);
    let k0 = k.values()[0].abs().max(k.right_values()[0].abs());
    report.push("K_0 = 0", k0, Some(TimePoint::at(grid[0])));
    report.push("L <= X <= U", contain.value.max(0.0), contain.at);
    report.push("lower contact sum (X-L)^(X+-L+) D-K <= 0", lower.worst.value.max(0.0), lower.worst.at);
    report.push("upper contact sum (U-X)^(U+-X+) D-K >= 0", upper.worst.value.max(0.0), upper.worst.at);
    let names = ["(X+ - L+) D+K <= 0", "(U - X) D+K <= 0", "(U+ - X+) D+K >= 0", "(X - L) D+K >= 0"];
    for (name, s) in names.iter().zip(&jumps) {
        report.push(*name, s.worst.value.max(0.0), s.worst.at);
    }
    report.push("X = X0 + sigma(X).M + b(X).V + K", identity.value, identity.at);
    Ok(report)
}

/// Monte Carlo comparison of the two sides of the jump stability estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpEstimateReport {
    pub samples: usize,
    /// Mean of `sup_{s<T} |ΔK_s|² + sup_{s<T} |ΔX_s|²`.
    pub lhs_mean: f64,
    /// Mean of `[M - M̃]_{T-} + |V - Ṽ|²_{T-}`.
    pub rhs_mean: f64,
    pub ratio: f64,
    /// Ratios over the first and second half of the samples.
    pub half_ratios: (f64, f64),
}

/// `(lhs, rhs)` for one pair of drivers: reflect `x0 + X` and `x0 + X̃`
/// between the same barriers and compare the differences with the driver
/// difference. Drivers on different grids are merged first.
pub fn jump_estimate_terms(
    x0: f64,
    barriers: &BarrierPair,
    x: &SemimartingalePath,
    x_tilde: &SemimartingalePath,
) -> Result<(f64, f64)> {
    let grid = merged_grid(&[&x.mc, &x_tilde.mc, barriers.lower()]);
    let x = x.resample(&grid);
    let xt = x_tilde.resample(&grid);
    let barriers = barriers.resample(&grid);
    let (l, u) = (barriers.lower(), barriers.upper());
    let reflect = |d: &SemimartingalePath| reflect_recursive(&d.total().map(|v| x0 + v), l, u);
    let (a, b) = (reflect(&x)?, reflect(&xt)?);

    // slots strictly before the horizon: everything up to the right slot
    // of the second-to-last grid time
    let n = grid.len();
    let sup_sq = |p: &RegulatedPath, q: &RegulatedPath| {
        (0..n - 1).flat_map(|i| [false, true].map(|r| (i, r))).fold(0.0_f64, |m, (i, r)| {
            let d = p.slot(i, r) - q.slot(i, r);
            m.max(d * d)
        })
    };
    let lhs = sup_sq(&a.k, &b.k) + sup_sq(&a.x, &b.x);

    let diff = x.difference(&xt)?;
    let before = n.saturating_sub(2);
    let bracket = quadratic_variation(&diff.martingale_part()).right_values()[before];
    let variation = crate::semimartingale::total_variation(&diff).right_values()[before];
    Ok((lhs, bracket + variation * variation))
}

/// Averages [`jump_estimate_terms`] over drivers simulated from `spec` and
/// `spec_tilde` with common seeds.
pub fn jump_estimate_sanity(
    x0: f64,
    barriers: &BarrierPair,
    spec: &DriverSpec,
    spec_tilde: &DriverSpec,
    seeds: &[u64],
) -> Result<JumpEstimateReport> {
    if seeds.len() < 2 {
        return Err(Error::invalid("need at least two seeds"));
    }
    let mut terms = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let a = simulate_driver(spec, seed)?;
        let b = simulate_driver(spec_tilde, seed)?;
        terms.push(jump_estimate_terms(x0, barriers, &a, &b)?);
    }
    let ratio_of = |ts: &[(f64, f64)]| {
        let (l, r) = ts.iter().fold((0.0, 0.0), |(l, r), t| (l + t.0, r + t.1));
        (l / ts.len() as f64, r / ts.len() as f64)
    };
    let (lhs_mean, rhs_mean) = ratio_of(&terms);
    let half = terms.len() / 2;
    let (l1, r1) = ratio_of(&terms[..half]);
    let (l2, r2) = ratio_of(&terms[half..]);
    Ok(JumpEstimateReport {
        samples: terms.len(),
        lhs_mean,
        rhs_mean,
        ratio: lhs_mean / rhs_mean,
        half_ratios: (l1 / r1, l2 / r2),
    })
}
