//! Two-barrier reflection of a regulated path `y` between `l ≤ u`.
//!
//! Three independent routes compute the same pair `(x, k)`:
//!
//! * [`reflect_explicit`]: `k = -(α(y, l) ∨ β(y, l, u))`, quadratic time;
//! * [`reflect_recursive`]: a single forward pass over `(k_t, k_{t+})`;
//! * [`reflect_composed`]: reflect at `l` first, then subtract Θ of the
//!   one-sided output.
//!
//! [`check_rp_conditions`] verifies a candidate against the full set of
//! reflection conditions, independently of how it was produced.

mod check;
mod crossing;
mod maps;

use alloc::borrow::Cow;
use alloc::vec::Vec;
use core::fmt;

pub use check::check_rp_conditions;
pub use crossing::{crossing_decomposition, CrossingDecomposition, Segment, SegmentKind};
pub use maps::{alpha_map, beta_map, theta_map};

use crate::error::{Error, Result};
use crate::one_sided::reflect_lower;
use crate::regulated::{align, running_guarded_inf, RegulatedPath};

/// Threshold on `|Δ⁺k|` for listing right-jump times.
pub const JUMP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Route {
    Explicit,
    Recursive,
    Composed,
}

impl Route {
    pub const ALL: [Route; 3] = [Route::Explicit, Route::Recursive, Route::Composed];

    pub fn name(self) -> &'static str {
        match self {
            Route::Explicit => "explicit",
            Route::Recursive => "recursive",
            Route::Composed => "composed",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit" => Ok(Route::Explicit),
            "recursive" => Ok(Route::Recursive),
            "composed" => Ok(Route::Composed),
            other => Err(Error::invalid(alloc::format!("unknown route '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReflectionSolution {
    pub x: RegulatedPath,
    pub k: RegulatedPath,
    /// Non-decreasing part of `k` pushing up at the lower barrier.
    pub phi1: RegulatedPath,
    /// Non-decreasing part of `k` pushing down at the upper barrier.
    pub phi2: RegulatedPath,
    pub route: Route,
    /// Grid times with `Δ⁺k > JUMP_TOL`.
    pub right_jump_up_times: Vec<f64>,
    /// Grid times with `Δ⁺k < -JUMP_TOL`.
    pub right_jump_down_times: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeparationReport {
    pub pass: bool,
    /// `min (u - l)` over every value and right-value slot.
    pub margin: f64,
    /// Slot time where the margin is attained.
    pub witness: f64,
}

/// Passes iff `u - l > 0` at every value and right-value slot. Left limits
/// are earlier right values, so they are covered.
pub fn barrier_separation_check(l: &RegulatedPath, u: &RegulatedPath) -> SeparationReport {
    let [l, u] = align([l, u]);
    let mut margin = f64::INFINITY;
    let mut witness = 0.0;
    for (i, &t) in l.times().iter().enumerate() {
        let m = (u.values()[i] - l.values()[i]).min(u.right_values()[i] - l.right_values()[i]);
        if m < margin {
            margin = m;
            witness = t;
        }
    }
    SeparationReport { pass: margin > 0.0, margin, witness }
}

/// A lower/upper barrier pair on one grid with strictly positive separation.
#[derive(Clone, Debug, PartialEq)]
pub struct BarrierPair {
    lower: RegulatedPath,
    upper: RegulatedPath,
}

impl BarrierPair {
    pub fn new(lower: &RegulatedPath, upper: &RegulatedPath) -> Result<Self> {
        let report = barrier_separation_check(lower, upper);
        if !report.pass {
            return Err(Error::BarrierSeparation { time: report.witness, margin: report.margin });
        }
        let [lower, upper] = align([lower, upper]);
        Ok(Self { lower: lower.into_owned(), upper: upper.into_owned() })
    }

    pub fn constant(times: &[f64], lower: f64, upper: f64) -> Result<Self> {
        Self::new(&RegulatedPath::constant(times, lower)?, &RegulatedPath::constant(times, upper)?)
    }

    pub fn lower(&self) -> &RegulatedPath {
        &self.lower
    }

    pub fn upper(&self) -> &RegulatedPath {
        &self.upper
    }

    /// Both barriers read on `grid`.
    pub fn resample(&self, grid: &[f64]) -> BarrierPair {
        BarrierPair { lower: self.lower.resample(grid), upper: self.upper.resample(grid) }
    }
}

/// Aligns the inputs and checks the standing assumptions: no jump at 0,
/// `l_0 ≤ y_0 ≤ u_0` and barrier separation.
fn prepare<'a>(
    y: &'a RegulatedPath,
    l: &'a RegulatedPath,
    u: &'a RegulatedPath,
) -> Result<[Cow<'a, RegulatedPath>; 3]> {
    let [y, l, u] = align([y, l, u]);
    for p in [&y, &l, &u] {
        if p.values()[0] != p.right_values()[0] {
            return Err(Error::JumpAtZero);
        }
    }
    let (y0, l0, u0) = (y.values()[0], l.values()[0], u.values()[0]);
    if !(l0 <= y0 && y0 <= u0) {
        return Err(Error::InitialCondition { lower: l0, value: y0, upper: u0 });
    }
    let sep = barrier_separation_check(&l, &u);
    if !sep.pass {
        return Err(Error::BarrierSeparation { time: sep.witness, margin: sep.margin });
    }
    Ok([y, l, u])
}

/// `x` from `x`-candidate slots, pulled back onto `[l, u]` where rounding in
/// `y + k` stepped outside by an ulp.
fn clamp_into(x: RegulatedPath, l: &RegulatedPath, u: &RegulatedPath) -> RegulatedPath {
    let (times, mut values, mut right_values) = x.into_parts();
    for i in 0..times.len() {
        values[i] = values[i].max(l.values()[i]).min(u.values()[i]);
        right_values[i] = right_values[i].max(l.right_values()[i]).min(u.right_values()[i]);
    }
    RegulatedPath::from_raw(times, values, right_values)
}

fn assemble(
    x: RegulatedPath,
    k: RegulatedPath,
    l: &RegulatedPath,
    u: &RegulatedPath,
    route: Route,
) -> ReflectionSolution {
    let x = clamp_into(x, l, u);
    let (phi1, phi2) = decompose_k(&k);
    let mut up = Vec::new();
    let mut down = Vec::new();
    for (i, &t) in k.times().iter().enumerate() {
        let d = k.right_jump(i);
        if d > JUMP_TOL {
            up.push(t);
        } else if d < -JUMP_TOL {
            down.push(t);
        }
    }
    ReflectionSolution { x, k, phi1, phi2, route, right_jump_up_times: up, right_jump_down_times: down }
}

/// `k = -(α(y, l) ∨ β(y, l, u))`, `x = y + k`.
pub fn reflect_explicit(y: &RegulatedPath, l: &RegulatedPath, u: &RegulatedPath) -> Result<ReflectionSolution> {
    let [y, l, u] = prepare(y, l, u)?;
    let alpha = alpha_map(&y, &l)?;
    let beta = beta_map(&y, &l, &u)?;
    let k = alpha.zip_map(&beta, |a, b| 0.0 - a.max(b))?;
    let x = y.zip_map(&k, |a, b| a + b)?;
    Ok(assemble(x, k, &l, &u, Route::Explicit))
}

/// One step of the forward recursion: `(k_t, k_{t+})` from `k_{t-}` and the
/// slot values of `y`, `l`, `u` at `t`.
#[inline]
pub(crate) fn recursion_step(k_left: f64, y: (f64, f64), l: (f64, f64), u: (f64, f64)) -> (f64, f64) {
    let (yv, yr) = y;
    let (lv, lr) = l;
    let (uv, ur) = u;
    let cap = (uv - yv).min(ur - yr).max(lv - yv);
    let floor = (lv - yv).max(lr - yr).min(uv - yv);
    let k = k_left.min(cap).max(floor);
    let k_right = k.min(ur - yr).max(lr - yr);
    (k, k_right)
}

/// Single forward pass, linear in the grid size. The recursion starts from
/// `k_{0-} = 0`, which gives `k_0 = 0` under the standing assumptions.
pub fn reflect_recursive(y: &RegulatedPath, l: &RegulatedPath, u: &RegulatedPath) -> Result<ReflectionSolution> {
    let [y, l, u] = prepare(y, l, u)?;
    let n = y.len();
    let mut kv = Vec::with_capacity(n);
    let mut kr = Vec::with_capacity(n);
    let mut k_left = 0.0;
    for i in 0..n {
        let (k, k_right) = recursion_step(
            k_left,
            (y.values()[i], y.right_values()[i]),
            (l.values()[i], l.right_values()[i]),
            (u.values()[i], u.right_values()[i]),
        );
        kv.push(k);
        kr.push(k_right);
        k_left = k_right;
    }
    let k = RegulatedPath::from_raw(y.times().to_vec(), kv, kr);
    let x = y.zip_map(&k, |a, b| a + b)?;
    Ok(assemble(x, k, &l, &u, Route::Recursive))
}

/// Reflect at `l`, then `x = ξ - Θ(ξ, l, u)` and `k = -(α + Θ)`.
pub fn reflect_composed(y: &RegulatedPath, l: &RegulatedPath, u: &RegulatedPath) -> Result<ReflectionSolution> {
    let [y, l, u] = prepare(y, l, u)?;
    let lower = reflect_lower(&y, &l)?;
    let theta = theta_map(&lower.xi, &l, &u)?;
    let alpha = running_guarded_inf(&y.zip_map(&l, |a, b| a - b)?);
    let k = alpha.zip_map(&theta, |a, th| 0.0 - (a + th))?;
    let x = lower.xi.zip_map(&theta, |xi, th| xi - th)?;
    Ok(assemble(x, k, &l, &u, Route::Composed))
}

pub fn reflect(route: Route, y: &RegulatedPath, l: &RegulatedPath, u: &RegulatedPath) -> Result<ReflectionSolution> {
    match route {
        Route::Explicit => reflect_explicit(y, l, u),
        Route::Recursive => reflect_recursive(y, l, u),
        Route::Composed => reflect_composed(y, l, u),
    }
}

/// Splits `k - k_0` into non-decreasing `φ¹ - φ²`.
///
/// Every grid increment of `k` (left jump `Δ⁻k` or right jump `Δ⁺k`) goes to
/// `φ¹` when positive and to `φ²` when negative, which is the minimal
/// decomposition for piecewise-constant paths.
pub fn decompose_k(k: &RegulatedPath) -> (RegulatedPath, RegulatedPath) {
    let n = k.len();
    let mut p1 = (Vec::with_capacity(n), Vec::with_capacity(n));
    let mut p2 = (Vec::with_capacity(n), Vec::with_capacity(n));
    let (mut a1, mut a2) = (0.0_f64, 0.0_f64);
    for i in 0..n {
        let left = k.left_jump(i);
        a1 += left.max(0.0);
        a2 += (-left).max(0.0);
        p1.0.push(a1);
        p2.0.push(a2);
        let right = k.right_jump(i);
        a1 += right.max(0.0);
        a2 += (-right).max(0.0);
        p1.1.push(a1);
        p2.1.push(a2);
    }
    let times = k.times().to_vec();
    (RegulatedPath::from_raw(times.clone(), p1.0, p1.1), RegulatedPath::from_raw(times, p2.0, p2.1))
}

/// Sup-norm distances on `[0, T)` between two reflection problems and their
/// solutions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LipschitzGap {
    pub k_gap: f64,
    pub x_gap: f64,
    pub y_dist: f64,
    pub l_dist: f64,
    pub u_dist: f64,
}

impl LipschitzGap {
    /// `‖y-ỹ‖ + ‖l-l̃‖ + ‖u-ũ‖`.
    pub fn rhs(&self) -> f64 {
        self.y_dist + self.l_dist + self.u_dist
    }

    /// Ratios `‖k-k̃‖ / rhs` and `‖x-x̃‖ / rhs` (0 when rhs is 0 and the gaps vanish).
    pub fn ratios(&self) -> (f64, f64) {
        let rhs = self.rhs();
        let ratio = |gap: f64| if gap == 0.0 { 0.0 } else { gap / rhs };
        (ratio(self.k_gap), ratio(self.x_gap))
    }
}

#[allow(clippy::too_many_arguments)]
pub fn lipschitz_gap(
    y: &RegulatedPath,
    y_tilde: &RegulatedPath,
    l: &RegulatedPath,
    l_tilde: &RegulatedPath,
    u: &RegulatedPath,
    u_tilde: &RegulatedPath,
    horizon: f64,
) -> Result<LipschitzGap> {
    let a = reflect_recursive(y, l, u)?;
    let b = reflect_recursive(y_tilde, l_tilde, u_tilde)?;
    let dist = |p: &RegulatedPath, q: &RegulatedPath| -> Result<f64> {
        let [p, q] = align([p, q]);
        p.zip_map(&q, |a, b| a - b)?.sup_norm_before(horizon)
    };
    Ok(LipschitzGap {
        k_gap: dist(&a.k, &b.k)?,
        x_gap: dist(&a.x, &b.x)?,
        y_dist: dist(y, y_tilde)?,
        l_dist: dist(l, l_tilde)?,
        u_dist: dist(u, u_tilde)?,
    })
}

/// Largest slot-wise distance between two paths on the merged grid.
pub fn sup_distance(a: &RegulatedPath, b: &RegulatedPath) -> f64 {
    let [a, b] = align([a, b]);
    a.slots().zip(b.slots()).fold(0.0, |m, (p, q)| m.max((p - q).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn jump_example() -> (RegulatedPath, RegulatedPath, RegulatedPath) {
        let y = RegulatedPath::new(vec![0.0, 1.0], vec![0.0, -1.0], vec![0.0, 3.0]).unwrap();
        let l = RegulatedPath::zero(y.times()).unwrap();
        let u = RegulatedPath::constant(y.times(), 2.0).unwrap();
        (y, l, u)
    }

    #[test]
    fn jump_example_on_every_route() {
        let (y, l, u) = jump_example();
        for route in Route::ALL {
            let sol = reflect(route, &y, &l, &u).unwrap();
            assert_eq!(sol.k.values()[1], 1.0, "{route}");
            assert_eq!(sol.k.right_values()[1], -1.0, "{route}");
            assert_eq!(sol.x.values()[1], 0.0, "{route}");
            assert_eq!(sol.x.right_values()[1], 2.0, "{route}");
            assert_eq!(sol.k.right_jump(1), -2.0, "{route}");
            assert_eq!(sol.right_jump_down_times, vec![1.0]);
            assert!(sol.right_jump_up_times.is_empty());
            // φ¹ carries the left jump, φ² the right jump of size 2
            assert_eq!(sol.phi1.values()[1], 1.0);
            assert_eq!(sol.phi2.right_values()[1] - sol.phi2.values()[1], 2.0);
        }
    }

    #[test]
    fn interior_path_is_untouched() {
        let times = RegulatedPath::uniform_grid(5, 0.5);
        let y = RegulatedPath::right_continuous(times.clone(), vec![0.0, 0.3, -0.4, 0.9, -0.9, 0.1]).unwrap();
        let pair = BarrierPair::constant(&times, -1.0, 1.0).unwrap();
        for route in Route::ALL {
            let sol = reflect(route, &y, pair.lower(), pair.upper()).unwrap();
            assert!(sol.k.slots().all(|k| k == 0.0));
            assert_eq!(sol.x, y);
        }
    }

    #[test]
    fn far_upper_barrier_reduces_to_lower_reflection() {
        let times = RegulatedPath::uniform_grid(4, 1.0);
        let y =
            RegulatedPath::new(times.clone(), vec![0.5, -1.0, 2.0, -3.0, 0.0], vec![0.5, 1.0, -2.0, 0.0, 0.0]).unwrap();
        let l = RegulatedPath::zero(&times).unwrap();
        let u = RegulatedPath::constant(&times, 1e6).unwrap();
        let composed = reflect_composed(&y, &l, &u).unwrap();
        let lower = reflect_lower(&y, &l).unwrap();
        assert_eq!(composed.x, lower.xi);
        assert_eq!(composed.k, lower.kappa);
    }

    #[test]
    fn decompose_k_examples() {
        let inc = RegulatedPath::new(vec![0.0, 1.0, 2.0], vec![0.5, 1.0, 3.0], vec![0.5, 2.0, 3.0]).unwrap();
        let (p1, p2) = decompose_k(&inc);
        assert!(p2.slots().all(|v| v == 0.0));
        assert_eq!(p1, inc.map(|v| v - 0.5));

        // k = t - 2 (t-1)^+ on a unit grid
        let times = RegulatedPath::uniform_grid(4, 1.0);
        let k = RegulatedPath::right_continuous(times.clone(), vec![0.0, 1.0, 0.0, -1.0, -2.0]).unwrap();
        let (p1, p2) = decompose_k(&k);
        assert_eq!(p1.values(), &[0.0, 1.0, 1.0, 1.0, 1.0]);
        assert_eq!(p2.values(), &[0.0, 0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn separation_examples() {
        let times = vec![0.0, 1.0, 2.0];
        let l = RegulatedPath::new(times.clone(), vec![0.0, 0.5, 0.0], vec![0.0, -1.0, 0.2]).unwrap();
        let u = l.map(|v| v + 1.0);
        let ok = barrier_separation_check(&l, &u);
        assert!(ok.pass);
        assert_eq!(ok.margin, 1.0);

        let mut touching = u.clone();
        touching.right_values_mut()[1] = l.right_values()[1];
        let bad = barrier_separation_check(&l, &touching);
        assert!(!bad.pass);
        assert_eq!(bad.witness, 1.0);
        assert!(BarrierPair::new(&l, &touching).is_err());

        // the gap shrinks towards 0 only beyond the grid
        let shrinking = RegulatedPath::right_continuous(times.clone(), vec![1.0, 0.5, 0.25]).unwrap();
        let zero = RegulatedPath::zero(&times).unwrap();
        assert!(barrier_separation_check(&zero, &shrinking).pass);
    }

    #[test]
    fn preconditions_are_enforced() {
        let (y, l, u) = jump_example();
        let low_y = y.map(|v| v - 5.0);
        assert!(matches!(reflect_explicit(&low_y, &l, &u), Err(Error::InitialCondition { .. })));
        let narrow = u.map(|_| 0.0);
        assert!(matches!(reflect_recursive(&y, &l, &narrow), Err(Error::BarrierSeparation { .. })));
        let jumpy = RegulatedPath::from_raw(vec![0.0, 1.0], vec![0.0, 0.0], vec![1.0, 1.0]);
        assert_eq!(reflect_composed(&jumpy, &l, &u), Err(Error::JumpAtZero));
    }

    #[test]
    fn lipschitz_gap_examples() {
        let (y, l, u) = jump_example();
        let same = lipschitz_gap(&y, &y, &l, &l, &u, &u, 2.0).unwrap();
        assert_eq!((same.k_gap, same.x_gap, same.rhs()), (0.0, 0.0, 0.0));

        let shifted = y.map(|v| v + 0.1);
        let gap = lipschitz_gap(&y, &shifted, &l, &l, &u, &u, 2.0).unwrap();
        assert!(gap.k_gap <= 2.0 * gap.rhs() + 1e-15);
        assert!(gap.x_gap <= 3.0 * gap.rhs() + 1e-15);
        assert!(gap.k_gap <= 0.2 + 1e-15 && gap.x_gap <= 0.3 + 1e-15);
    }
}
