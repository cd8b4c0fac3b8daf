//! One-sided reflection at a lower or an upper regulated barrier.
//!
//! The regulator is `κ = -α(y - l)` for a lower barrier and `κ = -α(u - y)`
//! for an upper one, where `α` is [`running_guarded_inf`].

use crate::error::{Error, Result};
use crate::regulated::{align, running_guarded_inf, RegulatedPath, TimePoint};
use crate::report::{ConditionReport, Worst};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OneSidedSolution {
    /// Reflected path ξ.
    pub xi: RegulatedPath,
    /// Non-decreasing, right-continuous regulator κ with κ₀ = 0.
    pub kappa: RegulatedPath,
    pub side: Side,
}

pub fn reflect_lower(y: &RegulatedPath, l: &RegulatedPath) -> Result<OneSidedSolution> {
    let [y, l] = align([y, l]);
    if y.values()[0] < l.values()[0] {
        return Err(Error::InitialCondition { lower: l.values()[0], value: y.values()[0], upper: f64::INFINITY });
    }
    let gap = y.zip_map(&l, |a, b| a - b)?;
    let kappa = running_guarded_inf(&gap).negate();
    // max with l absorbs the rounding of y + κ at contact
    let xi = y.zip_map(&kappa, |a, k| a + k)?.zip_map(&l, f64::max)?;
    Ok(OneSidedSolution { xi, kappa, side: Side::Lower })
}

pub fn reflect_upper(y: &RegulatedPath, u: &RegulatedPath) -> Result<OneSidedSolution> {
    let [y, u] = align([y, u]);
    if y.values()[0] > u.values()[0] {
        return Err(Error::InitialCondition { lower: f64::NEG_INFINITY, value: y.values()[0], upper: u.values()[0] });
    }
    let gap = u.zip_map(&y, |a, b| a - b)?;
    let kappa = running_guarded_inf(&gap).negate();
    let xi = y.zip_map(&kappa, |a, k| a - k)?.zip_map(&u, f64::min)?;
    Ok(OneSidedSolution { xi, kappa, side: Side::Upper })
}

/// Checks identity and containment, monotonicity from zero, right-continuity
/// and the complementarity integral of a one-sided solution.
pub fn check_one_sided(
    sol: &OneSidedSolution,
    y: &RegulatedPath,
    barrier: &RegulatedPath,
    tol: f64,
) -> Result<ConditionReport> {
    let (xi, kappa) = (&sol.xi, &sol.kappa);
    if !(xi.same_grid(kappa) && xi.same_grid(y) && xi.same_grid(barrier)) {
        return Err(Error::GridMismatch);
    }
    let sign = match sol.side {
        Side::Lower => 1.0,
        Side::Upper => -1.0,
    };
    // distance to the barrier on the admissible side
    let room = |i: usize, right: bool| sign * (xi.slot(i, right) - barrier.slot(i, right));
    let times = xi.times();

    let mut identity = Worst::default();
    let mut monotone = Worst::default();
    let mut right_cont = Worst::default();
    let mut complementarity = 0.0_f64;
    let mut compl_worst = Worst::default();
    let mut prev = 0.0_f64;
    for (i, &t) in times.iter().enumerate() {
        for right in [false, true] {
            let at = TimePoint { time: t, right_limit: right };
            let expected = y.slot(i, right) + sign * kappa.slot(i, right);
            identity.see((xi.slot(i, right) - expected).abs(), at);
            identity.see(-room(i, right), at);
            let k = kappa.slot(i, right);
            monotone.see(prev - k, at);
            prev = k;
        }
        right_cont.see(kappa.right_jump(i).abs(), TimePoint::at(t));
        if i > 0 {
            let mass = kappa.left_jump(i);
            let term = room(i, false).min(room(i, true)) * mass;
            complementarity += term;
            compl_worst.see(term.abs(), TimePoint::at(t));
        }
    }
    monotone.see(kappa.values()[0].abs(), TimePoint::at(0.0));

    let mut report = ConditionReport::new(tol);
    report.push("identity and containment", identity.value, identity.at);
    report.push("non-decreasing from zero", monotone.value, monotone.at);
    report.push("right-continuous", right_cont.value, right_cont.at);
    report.push("complementarity", complementarity.abs(), compl_worst.at);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rescan_alpha(a: &RegulatedPath) -> alloc::vec::Vec<f64> {
        // O(n²): recompute inf_{s<=t} per grid time from scratch
        (0..a.len()).map(|i| (0..=i).fold(0.0_f64, |m, j| m.min(a.values()[j]).min(a.right_values()[j]))).collect()
    }

    #[test]
    fn no_contact_means_no_push() {
        let y = RegulatedPath::new(vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 0.5], vec![1.0, 0.1, 3.0]).unwrap();
        let l = RegulatedPath::zero(y.times()).unwrap();
        let sol = reflect_lower(&y, &l).unwrap();
        assert!(sol.kappa.slots().all(|k| k == 0.0));
        assert_eq!(sol.xi, y);
    }

    #[test]
    fn lower_push_at_a_drop() {
        let y = RegulatedPath::new(vec![0.0, 1.0], vec![1.0, -2.0], vec![1.0, -2.0]).unwrap();
        let l = RegulatedPath::zero(y.times()).unwrap();
        let sol = reflect_lower(&y, &l).unwrap();
        assert_eq!(sol.kappa.values(), &[0.0, 2.0]);
        assert_eq!(sol.kappa.right_values(), &[0.0, 2.0]);
        assert_eq!(sol.xi.values()[1], 0.0);
        assert!(check_one_sided(&sol, &y, &l, 1e-12).unwrap().all_pass());
    }

    #[test]
    fn upper_push_on_a_ramp() {
        let times = RegulatedPath::uniform_grid(4, 1.0);
        let y = RegulatedPath::right_continuous(times.clone(), vec![0.0, 1.0, 2.0, 3.0, 3.0]).unwrap();
        let u = RegulatedPath::constant(&times, 1.0).unwrap();
        let sol = reflect_upper(&y, &u).unwrap();
        assert_eq!(*sol.kappa.values().last().unwrap(), 2.0);
        assert!(sol.xi.slots().all(|x| x <= 1.0));
        assert!(check_one_sided(&sol, &y, &u, 1e-12).unwrap().all_pass());
    }

    #[test]
    fn upper_is_mirrored_lower() {
        let y =
            RegulatedPath::new(vec![0.0, 0.5, 1.0, 2.0], vec![0.0, 1.5, -0.5, 2.5], vec![0.0, 0.2, 3.0, 1.0]).unwrap();
        let u = RegulatedPath::new(vec![0.0, 0.7, 1.5], vec![1.0, 0.8, 1.2], vec![1.0, 1.1, 1.2]).unwrap();
        let up = reflect_upper(&y, &u).unwrap();
        let low = reflect_lower(&y.negate(), &u.negate()).unwrap();
        assert_eq!(up.xi, low.xi.negate());
        assert_eq!(up.kappa, low.kappa);
    }

    #[test]
    fn kappa_matches_rescan() {
        let y = RegulatedPath::new(
            vec![0.0, 1.0, 2.0, 3.0, 4.0],
            vec![0.5, -0.3, 0.8, -1.2, 0.1],
            vec![0.5, 0.4, -0.9, 2.0, -3.0],
        )
        .unwrap();
        let l = RegulatedPath::constant(y.times(), -0.2).unwrap();
        let sol = reflect_lower(&y, &l).unwrap();
        let gap = y.zip_map(&l, |a, b| a - b).unwrap();
        let expected: alloc::vec::Vec<f64> = rescan_alpha(&gap).iter().map(|a| -a).collect();
        assert_eq!(sol.kappa.values(), expected.as_slice());
    }

    #[test]
    fn domain_errors() {
        let y = RegulatedPath::constant(&[0.0, 1.0], -1.0).unwrap();
        let z = RegulatedPath::zero(&[0.0, 1.0]).unwrap();
        assert!(matches!(reflect_lower(&y, &z), Err(Error::InitialCondition { .. })));
        assert!(matches!(reflect_upper(&y.negate(), &z), Err(Error::InitialCondition { .. })));
    }

    #[test]
    fn checker_catches_injected_faults() {
        let y = RegulatedPath::new(vec![0.0, 1.0, 2.0], vec![1.0, -2.0, 0.0], vec![1.0, -2.0, 0.0]).unwrap();
        let l = RegulatedPath::zero(y.times()).unwrap();
        let sol = reflect_lower(&y, &l).unwrap();

        let mut bumped = sol.clone();
        bumped.kappa.values_mut()[1] += 1.0;
        let report = check_one_sided(&bumped, &y, &l, 1e-9).unwrap();
        assert!(!report.get("non-decreasing").unwrap().pass || !report.get("phi1, phi2 non-decreasing").unwrap().pass);

        let mut jumpy = sol.clone();
        jumpy.kappa.right_values_mut()[2] += 0.5;
        let report = check_one_sided(&jumpy, &y, &l, 1e-9).unwrap();
        let rc = report.get("right-continuous").unwrap();
        assert!(!rc.pass);
        assert_eq!(rc.witness, Some(TimePoint::at(2.0)));
    }
}
