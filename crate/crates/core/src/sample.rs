//! Random regulated paths and reflection problems for property checks.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::regulated::RegulatedPath;

/// Strictly increasing grid of `n` points starting at 0 with steps in
/// `[0.1, 1)`.
pub fn random_grid<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut t = 0.0;
    let mut times = Vec::with_capacity(n);
    for _ in 0..n {
        times.push(t);
        t += rng.random_range(0.1..1.0);
    }
    times
}

/// Gaussian random walk with extra left jumps and right jumps, each present
/// with probability `jump_prob` at a grid time. No jump at 0.
pub fn random_walk<R: Rng + ?Sized>(
    rng: &mut R,
    times: &[f64],
    start: f64,
    scale: f64,
    jump_prob: f64,
) -> RegulatedPath {
    let n = times.len();
    let mut values = Vec::with_capacity(n);
    let mut rights = Vec::with_capacity(n);
    let mut level = start;
    for i in 0..n {
        if i > 0 {
            let z: f64 = StandardNormal.sample(rng);
            level += scale * z;
            if rng.random_bool(jump_prob) {
                level += rng.random_range(-3.0..3.0) * scale;
            }
        }
        values.push(level);
        if i > 0 && rng.random_bool(jump_prob) {
            level += rng.random_range(-3.0..3.0) * scale;
        }
        rights.push(level);
    }
    RegulatedPath::from_raw(times.to_vec(), values, rights)
}

/// Lower barrier a slow walk around `-1`, upper barrier `l + min_sep + w`
/// with `w ≥ 0` regulated, so `u - l ≥ min_sep` at every slot.
pub fn random_barriers<R: Rng + ?Sized>(rng: &mut R, times: &[f64], min_sep: f64) -> (RegulatedPath, RegulatedPath) {
    let l = random_walk(rng, times, -1.0, 0.15, 0.2);
    let w = random_walk(rng, times, 1.5, 0.2, 0.2).map(|v| v.abs() + min_sep);
    let u = l.zip_map(&w, |a, b| a + b).expect("same grid");
    (l, u)
}

/// A valid two-barrier problem `(y, l, u)` on an `n`-point random grid.
#[derive(Clone, Debug)]
pub struct Problem {
    pub y: RegulatedPath,
    pub l: RegulatedPath,
    pub u: RegulatedPath,
}

pub fn random_problem<R: Rng + ?Sized>(rng: &mut R, n: usize, min_sep: f64) -> Problem {
    let times = random_grid(rng, n);
    let (l, u) = random_barriers(rng, &times, min_sep);
    let (l0, u0) = (l.values()[0], u.values()[0]);
    let start = rng.random_range(l0..=u0);
    let scale = rng.random_range(0.1..1.5);
    let y = random_walk(rng, &times, start, scale, 0.3);
    Problem { y, l, u }
}

/// `path` plus a random bounded regulated perturbation that vanishes at 0
/// (so `path + δ` keeps the no-jump-at-zero convention).
pub fn perturb<R: Rng + ?Sized>(rng: &mut R, path: &RegulatedPath, size: f64) -> RegulatedPath {
    let mut out = path.clone();
    let n = out.len();
    for i in 1..n {
        out.values_mut()[i] += rng.random_range(-size..=size);
        out.right_values_mut()[i] += rng.random_range(-size..=size);
    }
    out
}

/// Random bounded-variation path with left and right jumps of either sign
/// (and no jump at 0).
pub fn random_bv<R: Rng + ?Sized>(rng: &mut R, n: usize) -> RegulatedPath {
    let times = random_grid(rng, n);
    let start = rng.random_range(-2.0..2.0);
    random_walk(rng, &times, start, 0.5, 0.5)
}
