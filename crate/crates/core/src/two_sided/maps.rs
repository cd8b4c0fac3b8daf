//! The maps α, β and Θ evaluated exactly on grid paths.
//!
//! The sup/inf in β and Θ range over every time `s ≤ t`, including the open
//! intervals between grid times. On a grid path all times inside one open
//! interval are interchangeable, so the scans run over *points*: point `2i`
//! is grid time `t_i` and point `2i + 1` stands for the open interval
//! `(t_i, t_{i+1})` (or `(t_N, ∞)` after the horizon). A point carries the
//! pair `(f(s), f(s+))`, which is `(v_i, r_i)` at a grid time and `(r_i, r_i)`
//! inside an interval. The map value at point `2i + 1` is the right limit at
//! `t_i`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::regulated::{align, running_guarded_inf, RegulatedPath};

/// `(f(s), f(s+))` at point `p`.
#[inline]
pub(crate) fn point(path: &RegulatedPath, p: usize) -> (f64, f64) {
    let i = p / 2;
    let r = path.right_values()[i];
    if p % 2 == 0 {
        (path.values()[i], r)
    } else {
        (r, r)
    }
}

pub(crate) fn point_count(path: &RegulatedPath) -> usize {
    2 * path.len()
}

/// Packs per-point results back into a path on `grid`.
pub(crate) fn from_points(grid: &[f64], out: &[f64]) -> RegulatedPath {
    let values = out.iter().step_by(2).copied().collect();
    let right_values = out.iter().skip(1).step_by(2).copied().collect();
    RegulatedPath::from_raw(grid.to_vec(), values, right_values)
}

pub(crate) fn check_order(l: &RegulatedPath, u: &RegulatedPath) -> Result<()> {
    for (i, &t) in l.times().iter().enumerate() {
        if l.values()[i] > u.values()[i] || l.right_values()[i] > u.right_values()[i] {
            return Err(Error::BarrierOrder { time: t });
        }
    }
    Ok(())
}

/// `out[t] = max_{s≤t} ( g[s] ∧ min_{s≤r≤t} h[r] )`, by rescanning every
/// `s ≤ t` for each `t`.
///
/// The backward scan stops once the running inf of `h` can no longer beat
/// the best value found, which leaves the result unchanged.
pub(crate) fn sup_inf_scan(g: &[f64], h: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(g.len());
    for t in 0..g.len() {
        let mut best = f64::NEG_INFINITY;
        let mut inner = f64::INFINITY;
        for s in (0..=t).rev() {
            inner = inner.min(h[s]);
            if inner <= best {
                break;
            }
            best = best.max(g[s].min(inner));
        }
        out.push(best);
    }
    out
}

/// `α(y, l)_t = inf_{s≤t} ((y_s - l_s) ∧ (y_{s+} - l_{s+}) ∧ 0)`.
pub fn alpha_map(y: &RegulatedPath, l: &RegulatedPath) -> Result<RegulatedPath> {
    let [y, l] = align([y, l]);
    Ok(running_guarded_inf(&y.zip_map(&l, |a, b| a - b)?))
}

/// Lower-gap and upper-gap terms `g_s`, `h_s` at every point.
fn scan_terms(y: &RegulatedPath, l: &RegulatedPath, u: &RegulatedPath, positive_part: bool) -> (Vec<f64>, Vec<f64>) {
    let n = point_count(y);
    let mut g = Vec::with_capacity(n);
    let mut h = Vec::with_capacity(n);
    for p in 0..n {
        let (ys, yr) = point(y, p);
        let (ls, lr) = point(l, p);
        let (us, ur) = point(u, p);
        let above = (ys - us).max(yr - ur);
        g.push(if positive_part { above.max(0.0) } else { above });
        h.push((ys - ls).min(yr - lr).max(ys - us));
    }
    (g, h)
}

/// `β(y, l, u)_t = sup_{s≤t} ( ((y_s-u_s) ∨ (y_{s+}-u_{s+})) ∧ inf_{s≤r≤t} [((y_r-l_r) ∧ (y_{r+}-l_{r+})) ∨ (y_r-u_r)] )`.
///
/// Quadratic in the grid size.
pub fn beta_map(y: &RegulatedPath, l: &RegulatedPath, u: &RegulatedPath) -> Result<RegulatedPath> {
    let [y, l, u] = align([y, l, u]);
    check_order(&l, &u)?;
    let (g, h) = scan_terms(&y, &l, &u, false);
    Ok(from_points(y.times(), &sup_inf_scan(&g, &h)))
}

/// Θ: β with the positive part taken on the upper-gap term. Non-negative.
///
/// Intended for `ξ` already reflected at `l`. Quadratic in the grid size.
pub fn theta_map(xi: &RegulatedPath, l: &RegulatedPath, u: &RegulatedPath) -> Result<RegulatedPath> {
    let [xi, l, u] = align([xi, l, u]);
    check_order(&l, &u)?;
    let (g, h) = scan_terms(&xi, &l, &u, true);
    Ok(from_points(xi.times(), &sup_inf_scan(&g, &h)))
}
