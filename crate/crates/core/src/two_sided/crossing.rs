//! Piecewise description of Θ(ξ) through the alternating crossing times
//! `s_0 = 0 ≤ t_0 < s_1 < t_1 < …`.
//!
//! * `t_0`: first time with `ξ ≥ u`;
//! * `s_n`: first time after `t_{n-1}` with `ξ - l ≤ sup_{[t_{n-1}, t]} (ξ - u)`;
//! * `t_n`: first time after `s_n` with `inf_{[s_n, t]} (ξ - l) ≤ ξ_t - u_t`.
//!
//! Θ is 0 before `t_0`, a running sup of `g ∧ (ξ - l)` on each `[t_{n-1}, s_n)`
//! and a running inf of `h` on each `[s_n, t_n)`. Times are located on the
//! same point model as the maps, so a crossing inside `(t_i, t_{i+1})` is
//! reported as `t_i+`.

use alloc::vec::Vec;

use super::barrier_separation_check;
use super::maps::{check_order, from_points, point, point_count};
use crate::error::{Error, Result};
use crate::regulated::{align, RegulatedPath, TimePoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum SegmentKind {
    /// Running sup of `g ∧ (ξ - l)` (zero before `t_0`).
    Sup,
    /// Running inf of `h`.
    Inf,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Segment {
    pub start: TimePoint,
    /// Exclusive; `time = +∞` for the last segment.
    pub end: TimePoint,
    pub kind: SegmentKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossingDecomposition {
    /// `s_0 = 0, s_1, …`; a trailing `+∞` marks a time that never occurs.
    pub s_times: Vec<TimePoint>,
    pub t_times: Vec<TimePoint>,
    /// Θ rebuilt from the piecewise formulas.
    pub theta: RegulatedPath,
    pub segments: Vec<Segment>,
}

impl CrossingDecomposition {
    /// Number of sup/inf alternations.
    pub fn alternations(&self) -> usize {
        self.segments.len().saturating_sub(1)
    }

    /// `s_n ≤ t_n ≤ s_{n+1}` with each family strictly increasing, on the
    /// finite entries.
    pub fn is_interleaved(&self) -> bool {
        let key = |p: &TimePoint| (p.time, p.right_limit as u8);
        let finite = |v: &[TimePoint]| v.iter().filter(|p| p.time.is_finite()).map(key).collect::<Vec<_>>();
        let (s, t) = (finite(&self.s_times), finite(&self.t_times));
        let strict = |v: &[(f64, u8)]| v.windows(2).all(|w| w[0] < w[1]);
        let mut merged = Vec::with_capacity(s.len() + t.len());
        for i in 0..s.len().max(t.len()) {
            merged.extend(s.get(i).copied());
            merged.extend(t.get(i).copied());
        }
        strict(&s) && strict(&t) && merged.windows(2).all(|w| w[0] <= w[1])
    }
}

fn to_time(grid: &[f64], p: usize) -> TimePoint {
    TimePoint { time: grid[p / 2], right_limit: p % 2 == 1 }
}

const NEVER: TimePoint = TimePoint { time: f64::INFINITY, right_limit: false };

pub fn crossing_decomposition(
    xi: &RegulatedPath,
    l: &RegulatedPath,
    u: &RegulatedPath,
) -> Result<CrossingDecomposition> {
    let [xi, l, u] = align([xi, l, u]);
    check_order(&l, &u)?;
    let sep = barrier_separation_check(&l, &u);
    if !sep.pass {
        return Err(Error::BarrierSeparation { time: sep.witness, margin: sep.margin });
    }
    let n = point_count(&xi);
    let grid = xi.times();

    let mut e = Vec::with_capacity(n);
    let mut d = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    let mut h = Vec::with_capacity(n);
    for p in 0..n {
        let (xs, xr) = point(&xi, p);
        let (ls, lr) = point(&l, p);
        let (us, ur) = point(&u, p);
        e.push(xs - us);
        d.push(xs - ls);
        g.push((xs - us).max(xr - ur).max(0.0));
        h.push((xs - ls).min(xr - lr).max(xs - us));
    }

    let mut theta = alloc::vec![0.0; n];
    let mut s_pts = alloc::vec![to_time(grid, 0)];
    let mut t_pts = Vec::new();
    let mut segments = Vec::new();
    let push_segment = |segments: &mut Vec<Segment>, a: usize, b: Option<usize>, kind| {
        if b != Some(a) {
            let end = b.map_or(NEVER, |b| to_time(grid, b));
            segments.push(Segment { start: to_time(grid, a), end, kind });
        }
    };

    let t0 = infimum((0..n).find(|&p| e[p] >= 0.0), 0);
    push_segment(&mut segments, 0, t0, SegmentKind::Sup);
    let Some(mut cursor) = t0 else {
        t_pts.push(NEVER);
        return Ok(finish(grid, theta, s_pts, t_pts, segments));
    };
    t_pts.push(to_time(grid, cursor));
    let mut last_s = 0;

    loop {
        // [t_{n-1}, s_n): running sup of g ∧ (ξ - l)
        let mut run_e = f64::NEG_INFINITY;
        let found = (cursor..n).find(|&p| {
            run_e = run_e.max(e[p]);
            d[p] <= run_e
        });
        let s = infimum(found, cursor);
        let mut run = f64::NEG_INFINITY;
        for p in cursor..s.unwrap_or(n) {
            run = run.max(g[p].min(d[p]));
            theta[p] = run;
        }
        push_segment(&mut segments, cursor, s, SegmentKind::Sup);
        let Some(s) = s else {
            s_pts.push(NEVER);
            break;
        };
        if s <= last_s {
            return Err(Error::CrossingStalled { time: grid[s / 2] });
        }
        last_s = s;
        s_pts.push(to_time(grid, s));

        // [s_n, t_n): running inf of h
        let mut run_d = f64::INFINITY;
        let found = (s..n).find(|&p| {
            run_d = run_d.min(d[p]);
            run_d <= e[p]
        });
        let t = infimum(found, s);
        let mut run = f64::INFINITY;
        for p in s..t.unwrap_or(n) {
            run = run.min(h[p]);
            theta[p] = run;
        }
        push_segment(&mut segments, s, t, SegmentKind::Inf);
        let Some(t) = t else {
            t_pts.push(NEVER);
            break;
        };
        if t <= cursor {
            return Err(Error::CrossingStalled { time: grid[t / 2] });
        }
        t_pts.push(to_time(grid, t));
        cursor = t;
    }
    Ok(finish(grid, theta, s_pts, t_pts, segments))
}

/// The infimum of a set first met at point `p`: a condition holding on the
/// open interval after `t_i` has infimum `t_i` itself.
fn infimum(first: Option<usize>, floor: usize) -> Option<usize> {
    first.map(|p| if p % 2 == 1 && p > floor { p - 1 } else { p })
}

fn finish(
    grid: &[f64],
    theta: Vec<f64>,
    s_times: Vec<TimePoint>,
    t_times: Vec<TimePoint>,
    segments: Vec<Segment>,
) -> CrossingDecomposition {
    CrossingDecomposition { s_times, t_times, theta: from_points(grid, &theta), segments }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::one_sided::reflect_lower;
    use crate::two_sided::theta_map;
    use alloc::vec;

    #[test]
    fn never_reaching_the_upper_barrier() {
        let times = RegulatedPath::uniform_grid(3, 1.0);
        let xi = RegulatedPath::right_continuous(times.clone(), vec![0.0, 0.5, 0.2, 0.9]).unwrap();
        let pair = crate::two_sided::BarrierPair::constant(&times, 0.0, 1.0).unwrap();
        let dec = crossing_decomposition(&xi, pair.lower(), pair.upper()).unwrap();
        assert_eq!(dec.t_times, vec![NEVER]);
        assert_eq!(dec.segments.len(), 1);
        assert_eq!(dec.segments[0].kind, SegmentKind::Sup);
        assert!(dec.theta.slots().all(|v| v == 0.0));
    }

    #[test]
    fn one_up_and_one_down_crossing() {
        // up to 3 above u = 2, then down to l = 0 and back inside
        let times = RegulatedPath::uniform_grid(5, 1.0);
        let y = RegulatedPath::right_continuous(times.clone(), vec![1.0, 2.5, 3.0, 1.0, -0.5, 1.0]).unwrap();
        let l = RegulatedPath::zero(&times).unwrap();
        let u = RegulatedPath::constant(&times, 2.0).unwrap();
        let xi = reflect_lower(&y, &l).unwrap().xi;
        let dec = crossing_decomposition(&xi, &l, &u).unwrap();
        assert_eq!(dec.t_times[0], TimePoint::at(1.0));
        assert_eq!(dec.s_times[1], TimePoint::at(3.0));
        assert_eq!(dec.t_times.len(), 2);
        assert_eq!(dec.s_times.len(), 2);
        let kinds: Vec<_> = dec.segments.iter().map(|s| s.kind).collect();
        assert_eq!(kinds, vec![SegmentKind::Sup, SegmentKind::Sup, SegmentKind::Inf]);
        assert!(dec.is_interleaved());
        assert_eq!(dec.theta, theta_map(&xi, &l, &u).unwrap());
    }
}
