//! Discretized optional semimartingale drivers `X = M + V` with
//! `M = Mc + Md + Mg` and `V = Vr + Vg`, and the four-term stochastic
//! integral against them.
//!
//! Component conventions on the grid:
//!
//! | part | Δ⁻ | Δ⁺ | simulated as |
//! |------|----|----|--------------|
//! | `Mc` | Brownian increment (tagged continuous) | 0 | `vol·√dt·Z` |
//! | `Md` | compensated Poisson jump | 0 | `Σ sizes − λ·dt·E[size]` |
//! | `Mg` | 0 | `±size` | at scheduled times |
//! | `Vr` | drift and scheduled left jumps | 0 | deterministic |
//! | `Vg` | 0 | scheduled right jumps | deterministic |

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::regulated::{RegulatedPath, TimePoint};
use crate::report::{ConditionReport, Worst};

/// Law of the jump sizes of `Md`. All laws are bounded.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "law", rename_all = "snake_case"))]
pub enum JumpSizeLaw {
    Fixed {
        size: f64,
    },
    Uniform {
        low: f64,
        high: f64,
    },
    /// `±size` with probability 1/2 each.
    Symmetric {
        size: f64,
    },
}

impl Default for JumpSizeLaw {
    fn default() -> Self {
        JumpSizeLaw::Fixed { size: 1.0 }
    }
}

impl JumpSizeLaw {
    pub fn mean(&self) -> f64 {
        match *self {
            JumpSizeLaw::Fixed { size } => size,
            JumpSizeLaw::Uniform { low, high } => 0.5 * (low + high),
            JumpSizeLaw::Symmetric { .. } => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            JumpSizeLaw::Fixed { size } | JumpSizeLaw::Symmetric { size } => size.is_finite(),
            JumpSizeLaw::Uniform { low, high } => low.is_finite() && high.is_finite() && low <= high,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("jump size law must be finite (and low <= high)"))
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            JumpSizeLaw::Fixed { size } => size,
            JumpSizeLaw::Uniform { low, high } => {
                if low == high {
                    low
                } else {
                    rng.random_range(low..high)
                }
            }
            JumpSizeLaw::Symmetric { size } => {
                if rng.random_bool(0.5) {
                    size
                } else {
                    -size
                }
            }
        }
    }
}

/// A deterministic jump of `size` at `time` (snapped to the nearest grid time).
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScheduledJump {
    pub time: f64,
    pub size: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct DriverSpec {
    pub horizon: f64,
    pub step: f64,
    /// Brownian volatility of `Mc`.
    pub volatility: f64,
    /// Poisson intensity of `Md`.
    pub intensity: f64,
    pub jump_law: JumpSizeLaw,
    /// Times of the centred right jumps of `Mg`.
    pub right_jump_times: Vec<f64>,
    /// `Mg` jumps by `±right_jump_size`.
    pub right_jump_size: f64,
    /// Slope of the continuous part of `Vr`.
    pub drift: f64,
    pub drift_jumps: Vec<ScheduledJump>,
    pub drift_right_jumps: Vec<ScheduledJump>,
}

impl Default for DriverSpec {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            step: 0.01,
            volatility: 0.0,
            intensity: 0.0,
            jump_law: JumpSizeLaw::default(),
            right_jump_times: Vec::new(),
            right_jump_size: 0.0,
            drift: 0.0,
            drift_jumps: Vec::new(),
            drift_right_jumps: Vec::new(),
        }
    }
}

impl DriverSpec {
    /// Brownian motion with volatility `vol` on `[0, horizon]`.
    pub fn brownian(horizon: f64, step: f64, vol: f64) -> Self {
        Self { horizon, step, volatility: vol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let finite_pos = |x: f64| x.is_finite() && x > 0.0;
        let finite_nonneg = |x: f64| x.is_finite() && x >= 0.0;
        if !finite_pos(self.horizon) || !finite_pos(self.step) || self.step > self.horizon {
            return Err(Error::invalid("horizon and step must be positive with step <= horizon"));
        }
        if self.horizon / self.step > 1e8 {
            return Err(Error::invalid("grid too fine (more than 1e8 steps)"));
        }
        if !finite_nonneg(self.volatility) {
            return Err(Error::invalid("volatility must be finite and >= 0"));
        }
        if !finite_nonneg(self.intensity) || self.intensity * self.step > 1e6 {
            return Err(Error::invalid("intensity must be finite and >= 0"));
        }
        self.jump_law.validate()?;
        if !self.right_jump_size.is_finite() || !self.drift.is_finite() {
            return Err(Error::invalid("right_jump_size and drift must be finite"));
        }
        let in_range = |t: f64| t.is_finite() && t > 0.0 && t <= self.horizon;
        if !self.right_jump_times.iter().all(|&t| in_range(t)) {
            return Err(Error::invalid("right jump times must lie in (0, horizon]"));
        }
        for j in self.drift_jumps.iter().chain(&self.drift_right_jumps) {
            if !in_range(j.time) || !j.size.is_finite() {
                return Err(Error::invalid("scheduled jumps need a time in (0, horizon] and a finite size"));
            }
        }
        Ok(())
    }

    /// `0, step, 2·step, …` up to the horizon.
    pub fn grid(&self) -> Vec<f64> {
        let n = libm::round(self.horizon / self.step) as usize;
        (0..=n).map(|i| i as f64 * self.step).collect()
    }

    fn grid_index(&self, t: f64, len: usize) -> usize {
        (libm::round(t / self.step) as usize).clamp(1, len - 1)
    }
}

/// Component-wise driver on a shared grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SemimartingalePath {
    pub mc: RegulatedPath,
    pub md: RegulatedPath,
    pub mg: RegulatedPath,
    pub vr: RegulatedPath,
    pub vg: RegulatedPath,
}

impl SemimartingalePath {
    pub fn zero(grid: &[f64]) -> Result<Self> {
        let z = RegulatedPath::zero(grid)?;
        Ok(Self { mc: z.clone(), md: z.clone(), mg: z.clone(), vr: z.clone(), vg: z })
    }

    pub fn grid(&self) -> &[f64] {
        self.mc.times()
    }

    pub fn len(&self) -> usize {
        self.mc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mc.is_empty()
    }

    fn parts(&self) -> [&RegulatedPath; 5] {
        [&self.mc, &self.md, &self.mg, &self.vr, &self.vg]
    }

    fn sum(paths: &[&RegulatedPath]) -> RegulatedPath {
        let mut out = paths[0].clone();
        for p in &paths[1..] {
            out = out.zip_map(p, |a, b| a + b).expect("driver components share one grid");
        }
        out
    }

    /// `M = Mc + Md + Mg`.
    pub fn martingale(&self) -> RegulatedPath {
        Self::sum(&[&self.mc, &self.md, &self.mg])
    }

    /// `Mr = Mc + Md`.
    pub fn martingale_r(&self) -> RegulatedPath {
        Self::sum(&[&self.mc, &self.md])
    }

    /// `V = Vr + Vg`.
    pub fn finite_variation(&self) -> RegulatedPath {
        Self::sum(&[&self.vr, &self.vg])
    }

    /// `M + V`.
    pub fn total(&self) -> RegulatedPath {
        Self::sum(&self.parts())
    }

    /// Component-wise `self - other`; both drivers must share the grid.
    pub fn difference(&self, other: &SemimartingalePath) -> Result<SemimartingalePath> {
        let d = |a: &RegulatedPath, b: &RegulatedPath| a.zip_map(b, |x, y| x - y);
        Ok(Self {
            mc: d(&self.mc, &other.mc)?,
            md: d(&self.md, &other.md)?,
            mg: d(&self.mg, &other.mg)?,
            vr: d(&self.vr, &other.vr)?,
            vg: d(&self.vg, &other.vg)?,
        })
    }

    /// Every component multiplied by `c`.
    pub fn scaled(&self, c: f64) -> SemimartingalePath {
        let s = |p: &RegulatedPath| p.map(|v| c * v);
        Self { mc: s(&self.mc), md: s(&self.md), mg: s(&self.mg), vr: s(&self.vr), vg: s(&self.vg) }
    }

    /// The martingale components only (`V = 0`).
    pub fn martingale_part(&self) -> SemimartingalePath {
        let z = self.vr.map(|_| 0.0);
        Self { vr: z.clone(), vg: z, ..self.clone() }
    }

    /// The finite-variation components only (`M = 0`).
    pub fn variation_part(&self) -> SemimartingalePath {
        let z = self.mc.map(|_| 0.0);
        Self { mc: z.clone(), md: z.clone(), mg: z, ..self.clone() }
    }

    /// Every component read on a finer `grid`.
    pub fn resample(&self, grid: &[f64]) -> SemimartingalePath {
        let r = |p: &RegulatedPath| p.resample(grid);
        Self { mc: r(&self.mc), md: r(&self.md), mg: r(&self.mg), vr: r(&self.vr), vg: r(&self.vg) }
    }

    /// Checks the jump-type constraints of every component.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid();
        for p in self.parts() {
            if p.times() != grid {
                return Err(Error::GridMismatch);
            }
            if p.values()[0] != 0.0 || p.right_values()[0] != 0.0 {
                return Err(Error::invalid("driver components must start at 0 without a jump"));
            }
        }
        for p in [&self.mc, &self.md, &self.vr] {
            if (0..p.len()).any(|i| p.right_jump(i) != 0.0) {
                return Err(Error::invalid("Mc, Md and Vr must be right-continuous"));
            }
        }
        for p in [&self.mg, &self.vg] {
            if (0..p.len()).any(|i| p.left_jump(i) != 0.0) {
                return Err(Error::invalid("Mg and Vg must be left-continuous"));
            }
        }
        Ok(())
    }
}

fn right_continuous(grid: &[f64], increments: &[f64]) -> RegulatedPath {
    let mut values = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    for &d in increments {
        acc += d;
        values.push(acc);
    }
    RegulatedPath::from_raw(grid.to_vec(), values.clone(), values)
}

fn left_continuous(grid: &[f64], right_jumps: &[f64]) -> RegulatedPath {
    let mut values = Vec::with_capacity(grid.len());
    let mut rights = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    for &d in right_jumps {
        values.push(acc);
        acc += d;
        rights.push(acc);
    }
    RegulatedPath::from_raw(grid.to_vec(), values, rights)
}

/// Simulates a driver; the same `seed` always gives the same path.
pub fn simulate_driver(spec: &DriverSpec, seed: u64) -> Result<SemimartingalePath> {
    spec.validate()?;
    let grid = spec.grid();
    let n = grid.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut dc = alloc::vec![0.0; n];
    let mut dd = alloc::vec![0.0; n];
    let mut dvr = alloc::vec![0.0; n];
    let compensator = spec.intensity * spec.jump_law.mean();
    let poisson = if spec.intensity > 0.0 {
        Some(Poisson::new(spec.intensity * spec.step).map_err(|_| Error::invalid("bad intensity"))?)
    } else {
        None
    };
    for i in 1..n {
        let dt = grid[i] - grid[i - 1];
        if spec.volatility > 0.0 {
            let z: f64 = StandardNormal.sample(&mut rng);
            dc[i] = spec.volatility * libm::sqrt(dt) * z;
        }
        if let Some(poisson) = &poisson {
            let count = poisson.sample(&mut rng) as u64;
            let mut jumps = 0.0;
            for _ in 0..count {
                jumps += spec.jump_law.sample(&mut rng);
            }
            dd[i] = jumps - compensator * dt;
        }
        dvr[i] = spec.drift * dt;
    }
    for j in &spec.drift_jumps {
        dvr[spec.grid_index(j.time, n)] += j.size;
    }

    let mut dg = alloc::vec![0.0; n];
    for &t in &spec.right_jump_times {
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        dg[spec.grid_index(t, n)] += sign * spec.right_jump_size;
    }
    let mut dvg = alloc::vec![0.0; n];
    for j in &spec.drift_right_jumps {
        dvg[spec.grid_index(j.time, n)] += j.size;
    }

    Ok(SemimartingalePath {
        mc: right_continuous(&grid, &dc),
        md: right_continuous(&grid, &dd),
        mg: left_continuous(&grid, &dg),
        vr: right_continuous(&grid, &dvr),
        vg: left_continuous(&grid, &dvg),
    })
}

/// Accumulates `f(Δ⁻)` over `(0, t]` from the right-continuous parts and
/// `f(Δ⁺)` over `[0, t)` from the left-continuous parts; right-limit slots
/// include the right jump at `t`.
fn accumulate(rc: &[&RegulatedPath], lc: &[&RegulatedPath], f: impl Fn(f64) -> f64) -> RegulatedPath {
    let grid = rc[0].times();
    let n = grid.len();
    let mut values = Vec::with_capacity(n);
    let mut rights = Vec::with_capacity(n);
    let mut acc = 0.0;
    for i in 0..n {
        for p in rc {
            acc += f(p.left_jump(i));
        }
        values.push(acc);
        for p in lc {
            acc += f(p.right_jump(i));
        }
        rights.push(acc);
    }
    RegulatedPath::from_raw(grid.to_vec(), values, rights)
}

/// `[M]_t = Σ (ΔMc)² + Σ (Δ⁻Md)² + Σ_{s<t} (Δ⁺Mg)²`.
pub fn quadratic_variation(x: &SemimartingalePath) -> RegulatedPath {
    accumulate(&[&x.mc, &x.md], &[&x.mg], |d| d * d)
}

/// `|V|_t = Σ |ΔVr| + Σ_{s<t} |Δ⁺Vg|`.
pub fn total_variation(x: &SemimartingalePath) -> RegulatedPath {
    accumulate(&[&x.vr], &[&x.vg], f64::abs)
}

/// `H(t_i-)`: the previous right value, and `H(0)` at the first grid time.
#[inline]
pub(crate) fn left_limit(h: &RegulatedPath, i: usize) -> f64 {
    if i == 0 {
        h.values()[0]
    } else {
        h.right_values()[i - 1]
    }
}

/// `∫_{]0,t]} H_{s-} dX^r_s + ∫_{[0,t[} H_{s-} dX_{s+}` for a single
/// integrator path `X` on the grid of `H`: left jumps form the first sum,
/// right jumps the second.
pub fn stieltjes(h: &RegulatedPath, x: &RegulatedPath) -> Result<RegulatedPath> {
    if !h.same_grid(x) {
        return Err(Error::GridMismatch);
    }
    let n = h.len();
    let mut values = Vec::with_capacity(n);
    let mut rights = Vec::with_capacity(n);
    let mut acc = 0.0;
    for i in 0..n {
        let hl = left_limit(h, i);
        acc += hl * x.left_jump(i);
        values.push(acc);
        acc += hl * x.right_jump(i);
        rights.push(acc);
    }
    Ok(RegulatedPath::from_raw(h.times().to_vec(), values, rights))
}

/// `H·X` split by integrator.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralResult {
    pub path: RegulatedPath,
    /// Against `Mr = Mc + Md`.
    pub against_mr: RegulatedPath,
    /// Against the right jumps of `Mg`.
    pub against_mg: RegulatedPath,
    pub against_vr: RegulatedPath,
    pub against_vg: RegulatedPath,
}

/// The four-term integral of `H` against `X = M + V`. `H` must already be
/// sampled on the driver grid.
pub fn galchuk_integral(h: &RegulatedPath, x: &SemimartingalePath) -> Result<IntegralResult> {
    if h.times() != x.grid() {
        return Err(Error::GridMismatch);
    }
    let against_mr = stieltjes(h, &x.martingale_r())?;
    let against_mg = stieltjes(h, &x.mg)?;
    let against_vr = stieltjes(h, &x.vr)?;
    let against_vg = stieltjes(h, &x.vg)?;
    let mut path = against_mr.clone();
    for p in [&against_mg, &against_vr, &against_vg] {
        path = path.zip_map(p, |a, b| a + b)?;
    }
    Ok(IntegralResult { path, against_mr, against_mg, against_vr, against_vg })
}

/// `(lhs, rhs)` of the bounded-variation square inequality at every slot:
///
/// `A_t² ≤ A_0² + ∫_{]0,t]} (A_s + A_{s+}) dA^r_s + 2 Σ_{s<t} A_{s+} Δ⁺A_s − Σ_{s≤t} Δ⁺A_s Δ⁻A_s`.
///
/// On a grid `dA^r` is the left jumps. The right-limit slot at `t_i` is read
/// as `t ∈ (t_i, t_{i+1})`, so it also counts the jumps at `t_i`.
pub fn bv_square_sides(a: &RegulatedPath) -> Vec<(f64, f64)> {
    let a0 = a.values()[0];
    let mut rhs = a0 * a0;
    let mut out = Vec::with_capacity(2 * a.len());
    for i in 0..a.len() {
        let (v, r) = (a.values()[i], a.right_values()[i]);
        let (dl, dr) = (a.left_jump(i), a.right_jump(i));
        // at a grid time A_s = v and A_{s+} = r
        rhs += (v + r) * dl - dr * dl;
        out.push((v * v, rhs));
        rhs += 2.0 * r * dr;
        out.push((r * r, rhs));
    }
    out
}

/// Checks the inequality slot by slot. The gap `rhs - lhs` must be `≥ -tol`
/// and equals the dropped squared jumps `Σ (Δ⁻A)² + Σ_{s<t} (Δ⁺A)²`.
pub fn bv_square_check(a: &RegulatedPath, tol: f64) -> ConditionReport {
    let mut violation = Worst::default();
    let mut mismatch = Worst::default();
    let mut dropped = 0.0;
    let sides = bv_square_sides(a);
    for i in 0..a.len() {
        let t = a.times()[i];
        dropped += a.left_jump(i) * a.left_jump(i);
        let (lhs, rhs) = sides[2 * i];
        violation.see(lhs - rhs, TimePoint::at(t));
        mismatch.see(((rhs - lhs) - dropped).abs(), TimePoint::at(t));
        dropped += a.right_jump(i) * a.right_jump(i);
        let (lhs, rhs) = sides[2 * i + 1];
        violation.see(lhs - rhs, TimePoint::right_of(t));
        mismatch.see(((rhs - lhs) - dropped).abs(), TimePoint::right_of(t));
    }
    let mut report = ConditionReport::new(tol);
    report.push("square inequality (gap >= 0)", violation.value.max(0.0), violation.at);
    let scale = a.slots().fold(1.0_f64, |m, v| m.max(v * v));
    report.push("gap equals dropped squared jumps", mismatch.value / scale, mismatch.at);
    report
}
