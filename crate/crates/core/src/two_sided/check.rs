use super::ReflectionSolution;
use crate::error::{Error, Result};
use crate::regulated::{RegulatedPath, TimePoint};
use crate::report::{ConditionReport, Worst};

/// Signed Stieltjes-type sum with the location of its largest term.
#[derive(Default)]
struct Sum {
    signed: f64,
    abs: f64,
    worst: Worst,
}

impl Sum {
    fn add(&mut self, term: f64, at: TimePoint) {
        self.signed += term;
        self.abs += term.abs();
        self.worst.see(term.abs(), at);
    }
}

/// Measures every reflection condition on a candidate solution.
///
/// * `x = y + k` and `k = φ¹ - φ²`;
/// * `l ≤ x ≤ u`;
/// * `φ¹, φ²` non-decreasing from 0;
/// * `Σ ((x-l) ∧ (x₊-l₊)) Δ⁻φ¹ = 0` and `Σ ((u-x) ∧ (u₊-x₊)) Δ⁻φ² = 0`;
/// * the four right-jump sums, e.g. `Σ (x₊ - l₊) Δ⁺φ¹ = 0`.
///
/// On a grid `dφ^r` is carried entirely by left jumps. The left-jump contact
/// residual is the absolute value of the signed sum; a negative sum is
/// flagged without failing. The right-jump residuals add absolute terms so
/// that opposite-signed violations cannot cancel.
pub fn check_rp_conditions(
    sol: &ReflectionSolution,
    y: &RegulatedPath,
    l: &RegulatedPath,
    u: &RegulatedPath,
    tol: f64,
) -> Result<ConditionReport> {
    let (x, k, p1, p2) = (&sol.x, &sol.k, &sol.phi1, &sol.phi2);
    if ![k, p1, p2, y, l, u].iter().all(|p| x.same_grid(p)) {
        return Err(Error::GridMismatch);
    }
    let mut identity = Worst::default();
    let mut split = Worst::default();
    let mut contain = Worst::default();
    let mut monotone = Worst::default();
    let mut lower_r = Sum::default();
    let mut upper_r = Sum::default();
    let mut jumps: [Sum; 4] = Default::default();

    let k0 = k.values()[0];
    let mut prev = (0.0_f64, 0.0_f64);
    for (i, &t) in x.times().iter().enumerate() {
        for right in [false, true] {
            let at = TimePoint { time: t, right_limit: right };
            let (xs, ks) = (x.slot(i, right), k.slot(i, right));
            let (a, b) = (p1.slot(i, right), p2.slot(i, right));
            identity.see((xs - y.slot(i, right) - ks).abs(), at);
            split.see((ks - k0 - (a - b)).abs(), at);
            contain.see(l.slot(i, right) - xs, at);
            contain.see(xs - u.slot(i, right), at);
            monotone.see(prev.0 - a, at);
            monotone.see(prev.1 - b, at);
            prev = (a, b);
        }
        let at = TimePoint::at(t);
        let below = (x.values()[i] - l.values()[i]).min(x.right_values()[i] - l.right_values()[i]);
        let above = (u.values()[i] - x.values()[i]).min(u.right_values()[i] - x.right_values()[i]);
        if i > 0 {
            lower_r.add(below * p1.left_jump(i), at);
            upper_r.add(above * p2.left_jump(i), at);
        }
        let (j1, j2) = (p1.right_jump(i), p2.right_jump(i));
        jumps[0].add((x.right_values()[i] - l.right_values()[i]) * j1, at);
        jumps[1].add((u.values()[i] - x.values()[i]) * j1, at);
        jumps[2].add((u.right_values()[i] - x.right_values()[i]) * j2, at);
        jumps[3].add((x.values()[i] - l.values()[i]) * j2, at);
    }
    monotone.see(p1.values()[0].abs(), TimePoint::at(0.0));
    monotone.see(p2.values()[0].abs(), TimePoint::at(0.0));
    let identity_res = identity.value.max(split.value);
    let identity_at = if identity.value >= split.value { identity.at } else { split.at };

    let mut report = ConditionReport::new(tol);
    report.push("x = y + k = y + phi1 - phi2", identity_res, identity_at);
    report.push("l <= x <= u", contain.value.max(0.0), contain.at);
    report.push("phi1, phi2 non-decreasing from 0", monotone.value.max(0.0), monotone.at);
    for (name, sum) in [("lower contact integral d phi1^r", &lower_r), ("upper contact integral d phi2^r", &upper_r)] {
        let c = report.push(name, sum.signed.abs(), sum.worst.at);
        if sum.signed < -tol {
            c.flag = Some(alloc::format!("negative signed sum {:e}", sum.signed));
        }
    }
    let names = [
        "right jump (x+ - l+) D+phi1",
        "right jump (u - x) D+phi1",
        "right jump (u+ - x+) D+phi2",
        "right jump (x - l) D+phi2",
    ];
    for (name, sum) in names.iter().zip(&jumps) {
        report.push(*name, sum.abs, sum.worst.at);
    }
    Ok(report)
}
