//! Regulated (làdlàg) paths on a finite grid.
//!
//! A [`RegulatedPath`] stores, for every grid time `t_i`, the value `f(t_i)`
//! and the right limit `f(t_i+)`. Between grid times the path is constant and
//! equal to the right limit of the preceding grid time, so `f(t_{i+1}-) = r_i`.
//! Past the last grid time every path is held constant at its final right
//! limit.
//!
//! Every reflection map in this crate is built from pointwise lattice
//! operations and running sup/inf over these `(value, right)` pairs, so the
//! family is closed under all of them and the maps are computed exactly.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// A grid time or its right limit.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimePoint {
    pub time: f64,
    /// `true` for the right-limit slot `t+`.
    pub right_limit: bool,
}

impl TimePoint {
    pub fn at(time: f64) -> Self {
        Self { time, right_limit: false }
    }

    pub fn right_of(time: f64) -> Self {
        Self { time, right_limit: true }
    }
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.right_limit {
            write!(f, "{}+", self.time)
        } else {
            write!(f, "{}", self.time)
        }
    }
}

/// `(f(t-), f(t), f(t+))`; the left limit is absent at `t = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Triplet {
    pub left: Option<f64>,
    pub value: f64,
    pub right: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct ValidationOptions {
    /// Require `f(0) = f(0+)`.
    pub no_jump_at_zero: bool,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self { no_jump_at_zero: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ValidationIssue {
    Empty,
    LengthMismatch { times: usize, values: usize, right_values: usize },
    FirstTimeNotZero { time: f64 },
    TimesNotIncreasing { index: usize },
    NonFinite { index: usize },
    JumpAtZero { value: f64, right: f64 },
}

impl ValidationIssue {
    /// Grid index the issue refers to, when there is one.
    pub fn index(&self) -> Option<usize> {
        match *self {
            ValidationIssue::FirstTimeNotZero { .. } | ValidationIssue::JumpAtZero { .. } => Some(0),
            ValidationIssue::TimesNotIncreasing { index } | ValidationIssue::NonFinite { index } => Some(index),
            ValidationIssue::Empty | ValidationIssue::LengthMismatch { .. } => None,
        }
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ValidationIssue::Empty => write!(f, "path has no grid points"),
            ValidationIssue::LengthMismatch { times, values, right_values } => {
                write!(f, "length mismatch: {times} times, {values} values, {right_values} right values")
            }
            ValidationIssue::FirstTimeNotZero { time } => {
                write!(f, "first grid time is {time}, expected 0")
            }
            ValidationIssue::TimesNotIncreasing { index } => {
                write!(f, "times not strictly increasing at index {index}")
            }
            ValidationIssue::NonFinite { index } => write!(f, "non-finite entry at index {index}"),
            ValidationIssue::JumpAtZero { value, right } => {
                write!(f, "jump at 0: value {value} != right value {right}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Jumps of a path at one grid time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JumpEntry {
    pub time: f64,
    /// `f(t) - f(t-)`, zero at `t = 0`.
    pub left: f64,
    /// `f(t+) - f(t)`.
    pub right: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct JumpReport {
    pub entries: Vec<JumpEntry>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombineOp {
    Add,
    Sub,
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegulatedPath {
    times: Vec<f64>,
    values: Vec<f64>,
    right_values: Vec<f64>,
}

impl RegulatedPath {
    /// Builds a path and checks every invariant under the default options.
    pub fn new(times: Vec<f64>, values: Vec<f64>, right_values: Vec<f64>) -> Result<Self> {
        let path = Self { times, values, right_values };
        match path.validate(ValidationOptions::default()).issues.first() {
            Some(issue) => Err(Error::InvalidPath(*issue)),
            None => Ok(path),
        }
    }

    /// Builds a path without checking anything. Use [`validate`](Self::validate)
    /// to inspect it afterwards.
    pub fn from_raw(times: Vec<f64>, values: Vec<f64>, right_values: Vec<f64>) -> Self {
        Self { times, values, right_values }
    }

    /// Right-continuous path: `f(t_i+) = f(t_i)`.
    pub fn right_continuous(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let right = values.clone();
        Self::new(times, values, right)
    }

    pub fn constant(times: &[f64], c: f64) -> Result<Self> {
        Self::new(times.to_vec(), vec![c; times.len()], vec![c; times.len()])
    }

    pub fn zero(times: &[f64]) -> Result<Self> {
        Self::constant(times, 0.0)
    }

    /// Uniform grid `0, step, 2 step, ..., n step`.
    pub fn uniform_grid(n: usize, step: f64) -> Vec<f64> {
        (0..=n).map(|i| i as f64 * step).collect()
    }

    pub fn validate(&self, opts: ValidationOptions) -> ValidationReport {
        let mut issues = Vec::new();
        let n = self.times.len();
        if n == 0 {
            issues.push(ValidationIssue::Empty);
            return ValidationReport { issues };
        }
        if self.values.len() != n || self.right_values.len() != n {
            issues.push(ValidationIssue::LengthMismatch {
                times: n,
                values: self.values.len(),
                right_values: self.right_values.len(),
            });
            return ValidationReport { issues };
        }
        if self.times[0] != 0.0 {
            issues.push(ValidationIssue::FirstTimeNotZero { time: self.times[0] });
        }
        for i in 0..n {
            if !(self.times[i].is_finite() && self.values[i].is_finite() && self.right_values[i].is_finite()) {
                issues.push(ValidationIssue::NonFinite { index: i });
            }
            if i > 0 && !(self.times[i] > self.times[i - 1]) {
                issues.push(ValidationIssue::TimesNotIncreasing { index: i });
            }
        }
        if opts.no_jump_at_zero && self.values[0] != self.right_values[0] {
            issues.push(ValidationIssue::JumpAtZero { value: self.values[0], right: self.right_values[0] });
        }
        ValidationReport { issues }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn right_values(&self) -> &[f64] {
        &self.right_values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        (self.times, self.values, self.right_values)
    }

    /// `f(t_i+) - f(t_i)`.
    pub fn right_jump(&self, i: usize) -> f64 {
        self.right_values[i] - self.values[i]
    }

    /// `f(t_i) - f(t_i-)`, zero at the first grid time.
    pub fn left_jump(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.values[i] - self.right_values[i - 1]
        }
    }

    pub fn same_grid(&self, other: &RegulatedPath) -> bool {
        self.times == other.times
    }

    /// Value at a slot: `right = false` is `f(t_i)`, `true` is `f(t_i+)`.
    pub fn slot(&self, i: usize, right: bool) -> f64 {
        if right {
            self.right_values[i]
        } else {
            self.values[i]
        }
    }

    /// Values in time order `f(t_0), f(t_0+), f(t_1), f(t_1+), ...`.
    pub fn slots(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().zip(&self.right_values).flat_map(|(&v, &r)| [v, r])
    }

    pub fn eval_triplet(&self, t: f64) -> Result<Triplet> {
        let (start, end) = (self.times[0], self.horizon());
        if !(t >= start && t <= end) {
            return Err(Error::OutOfRange { t, start, end });
        }
        Ok(self.eval_extended(t))
    }

    /// Like [`eval_triplet`](Self::eval_triplet) but holds the path constant
    /// after the horizon.
    pub fn eval_extended(&self, t: f64) -> Triplet {
        match self.times.binary_search_by(|probe| probe.total_cmp(&t)) {
            Ok(i) => Triplet {
                left: if i == 0 { None } else { Some(self.right_values[i - 1]) },
                value: self.values[i],
                right: self.right_values[i],
            },
            Err(i) => {
                // t lies in the open interval after grid index i - 1
                let r = self.right_values[i.saturating_sub(1)];
                Triplet { left: Some(r), value: r, right: r }
            }
        }
    }

    /// The same path read on another grid through [`eval_extended`](Self::eval_extended).
    pub fn resample(&self, grid: &[f64]) -> RegulatedPath {
        let mut values = Vec::with_capacity(grid.len());
        let mut right_values = Vec::with_capacity(grid.len());
        for &t in grid {
            let tr = self.eval_extended(t);
            values.push(tr.value);
            right_values.push(tr.right);
        }
        RegulatedPath { times: grid.to_vec(), values, right_values }
    }

    /// Pointwise map applied to values and right values.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> RegulatedPath {
        RegulatedPath {
            times: self.times.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            right_values: self.right_values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise binary map on a shared grid.
    pub fn zip_map(&self, other: &RegulatedPath, mut f: impl FnMut(f64, f64) -> f64) -> Result<RegulatedPath> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        Ok(RegulatedPath {
            times: self.times.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            right_values: self.right_values.iter().zip(&other.right_values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn negate(&self) -> RegulatedPath {
        self.map(|v| 0.0 - v)
    }

    /// Sub-path on grid indices `range`, with times shifted so the first one is 0.
    ///
    /// When `flatten_start` is set the first slot takes the right value, so the
    /// sub-path does not jump at its origin.
    pub fn window(&self, range: core::ops::Range<usize>, flatten_start: bool) -> RegulatedPath {
        let t0 = self.times[range.start];
        let times = self.times[range.clone()].iter().map(|&t| t - t0).collect();
        let mut values: Vec<f64> = self.values[range.clone()].to_vec();
        let right_values: Vec<f64> = self.right_values[range].to_vec();
        if flatten_start {
            values[0] = right_values[0];
        }
        RegulatedPath { times, values, right_values }
    }

    /// Mutable access for fault injection and in-place construction.
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn right_values_mut(&mut self) -> &mut [f64] {
        &mut self.right_values
    }

    pub fn sup_norm_before(&self, horizon: f64) -> Result<f64> {
        if !(horizon > 0.0) {
            return Err(Error::invalid("sup norm horizon must be positive"));
        }
        Ok(self
            .times
            .iter()
            .zip(self.values.iter().zip(&self.right_values))
            .take_while(|(&t, _)| t < horizon)
            .fold(0.0_f64, |acc, (_, (&v, &r))| acc.max(v.abs()).max(r.abs())))
    }

    pub fn jumps(&self, tol: f64) -> JumpReport {
        let entries = (0..self.len())
            .filter_map(|i| {
                let (left, right) = (self.left_jump(i), self.right_jump(i));
                (left.abs() > tol || right.abs() > tol).then_some(JumpEntry { time: self.times[i], left, right })
            })
            .collect();
        JumpReport { entries }
    }
}

/// Sorted union of several grids.
pub fn merged_grid(paths: &[&RegulatedPath]) -> Vec<f64> {
    let mut grid: Vec<f64> = paths.iter().flat_map(|p| p.times.iter().copied()).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Brings paths onto one grid, borrowing when they already share it.
pub fn align<'a, const N: usize>(paths: [&'a RegulatedPath; N]) -> [alloc::borrow::Cow<'a, RegulatedPath>; N] {
    use alloc::borrow::Cow;
    if paths.iter().all(|p| p.same_grid(paths[0])) {
        return paths.map(Cow::Borrowed);
    }
    let grid = merged_grid(&paths);
    paths.map(|p| Cow::Owned(p.resample(&grid)))
}

/// Pointwise `ca·a ⊕ cb·b`, on the merged grid when the grids differ.
pub fn combine(a: &RegulatedPath, b: &RegulatedPath, op: CombineOp, ca: f64, cb: f64) -> Result<RegulatedPath> {
    if !(ca.is_finite() && cb.is_finite()) {
        return Err(Error::invalid("combine coefficients must be finite"));
    }
    let [a, b] = align([a, b]);
    a.zip_map(&b, |x, y| {
        let (x, y) = (ca * x, cb * y);
        match op {
            CombineOp::Add => x + y,
            CombineOp::Sub => x - y,
            CombineOp::Min => x.min(y),
            CombineOp::Max => x.max(y),
        }
    })
}

/// `t ↦ inf_{s≤t} (a_s ∧ a_{s+} ∧ 0)`.
///
/// The result is non-increasing, non-positive and right-continuous.
pub fn running_guarded_inf(a: &RegulatedPath) -> RegulatedPath {
    let mut acc = 0.0_f64;
    let values: Vec<f64> = a
        .values
        .iter()
        .zip(&a.right_values)
        .map(|(&v, &r)| {
            acc = acc.min(v).min(r);
            acc
        })
        .collect();
    RegulatedPath { times: a.times.clone(), right_values: values.clone(), values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn example_path() -> RegulatedPath {
        RegulatedPath::new(vec![0.0, 1.0, 2.0], vec![0.0, -1.0, 3.0], vec![0.0, 3.0, 3.0]).unwrap()
    }

    #[test]
    fn validate_flags_each_issue() {
        let ok = RegulatedPath::from_raw(vec![0.0, 1.0], vec![0.0, 0.0], vec![0.0, 0.0]);
        assert!(ok.validate(ValidationOptions::default()).is_valid());

        let jump = RegulatedPath::from_raw(vec![0.0, 1.0], vec![0.0, -1.0], vec![1.0, 3.0]);
        let report = jump.validate(ValidationOptions::default());
        assert_eq!(report.issues, vec![ValidationIssue::JumpAtZero { value: 0.0, right: 1.0 }]);
        assert!(jump.validate(ValidationOptions { no_jump_at_zero: false }).is_valid());

        let flat = RegulatedPath::from_raw(vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0]);
        assert_eq!(
            flat.validate(ValidationOptions::default()).issues,
            vec![ValidationIssue::TimesNotIncreasing { index: 1 }]
        );

        let nan = RegulatedPath::from_raw(vec![0.0, 1.0], vec![0.0, f64::NAN], vec![0.0, 0.0]);
        assert_eq!(nan.validate(ValidationOptions::default()).issues, vec![ValidationIssue::NonFinite { index: 1 }]);
        assert!(RegulatedPath::new(vec![0.5], vec![0.0], vec![0.0]).is_err());
        assert!(RegulatedPath::new(vec![0.0, 1.0], vec![0.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn eval_triplet_reads_slots() {
        let c = RegulatedPath::constant(&[0.0, 0.5, 2.0], 1.5).unwrap();
        for t in [0.25, 0.5, 1.9, 2.0] {
            assert_eq!(c.eval_triplet(t).unwrap(), Triplet { left: Some(1.5), value: 1.5, right: 1.5 });
        }
        assert_eq!(c.eval_triplet(0.0).unwrap().left, None);

        let p = example_path();
        assert_eq!(p.eval_triplet(1.0).unwrap(), Triplet { left: Some(0.0), value: -1.0, right: 3.0 });
        assert_eq!(p.eval_triplet(1.5).unwrap(), Triplet { left: Some(3.0), value: 3.0, right: 3.0 });
        assert!(matches!(p.eval_triplet(2.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(p.eval_triplet(-0.1), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn combine_identities() {
        let y = example_path();
        let zero = RegulatedPath::zero(y.times()).unwrap();
        assert_eq!(combine(&y, &zero, CombineOp::Add, 1.0, 1.0).unwrap(), y);
        assert_eq!(combine(&y, &y, CombineOp::Sub, 1.0, 1.0).unwrap(), zero);
        assert!(combine(&y, &y, CombineOp::Add, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn combine_merges_grids() {
        let a = RegulatedPath::new(vec![0.0, 1.0], vec![1.0, 2.0], vec![1.0, -1.0]).unwrap();
        let b = RegulatedPath::new(vec![0.0, 0.5, 1.5], vec![0.0, 4.0, 0.0], vec![0.0, 0.5, 0.0]).unwrap();
        let m = combine(&a, &b, CombineOp::Min, 1.0, 1.0).unwrap();
        assert_eq!(m.times(), &[0.0, 0.5, 1.0, 1.5]);
        assert_eq!(m.values(), &[0.0, 1.0, 0.5, -1.0]);
        assert_eq!(m.right_values(), &[0.0, 0.5, -1.0, -1.0]);
    }

    #[test]
    fn sup_norm_before_excludes_the_horizon() {
        let p = RegulatedPath::new(vec![0.0, 1.0], vec![0.0, -1.0], vec![0.0, 3.0]).unwrap();
        assert_eq!(p.sup_norm_before(1.0).unwrap(), 0.0);
        assert_eq!(p.sup_norm_before(1.5).unwrap(), 3.0);
        assert!(p.sup_norm_before(0.0).is_err());
        let c = RegulatedPath::constant(&[0.0, 1.0], -2.0).unwrap();
        assert_eq!(c.sup_norm_before(0.3).unwrap(), 2.0);
    }

    #[test]
    fn running_guarded_inf_examples() {
        let pos = RegulatedPath::new(vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 2.0], vec![1.0, 3.0, 0.5]).unwrap();
        let m = running_guarded_inf(&pos);
        assert!(m.slots().all(|v| v == 0.0));

        let a = RegulatedPath::new(vec![0.0, 1.0], vec![0.0, -2.0], vec![0.0, -2.0]).unwrap();
        let m = running_guarded_inf(&a);
        assert_eq!(m.values(), &[0.0, -2.0]);
        assert_eq!(m.right_values(), &[0.0, -2.0]);

        let dec = RegulatedPath::right_continuous(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, -1.0, -3.0, -5.0]).unwrap();
        assert_eq!(running_guarded_inf(&dec).values()[3], -5.0);
    }

    #[test]
    fn jumps_of_example_path() {
        let p = RegulatedPath::new(vec![0.0, 1.0], vec![0.0, -1.0], vec![0.0, 3.0]).unwrap();
        let report = p.jumps(0.0);
        assert_eq!(report.entries, vec![JumpEntry { time: 1.0, left: -1.0, right: 4.0 }]);
        assert!(RegulatedPath::constant(&[0.0, 1.0, 2.0], 7.0).unwrap().jumps(0.0).entries.is_empty());

        // right jumps only: f(t_i) equals the previous right value
        let rj = RegulatedPath::new(vec![0.0, 1.0, 2.0], vec![0.0, 0.0, 2.0], vec![0.0, 2.0, 2.0]).unwrap();
        let report = rj.jumps(1e-12);
        assert_eq!(report.entries, vec![JumpEntry { time: 1.0, left: 0.0, right: 2.0 }]);
    }
}
