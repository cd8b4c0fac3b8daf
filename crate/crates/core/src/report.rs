use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::regulated::TimePoint;

/// Outcome of one named condition.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Condition {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
    /// Where the residual is attained, when it is nonzero.
    pub witness: Option<TimePoint>,
    /// Set for anomalies that are reported but do not fail the condition.
    pub flag: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConditionReport {
    pub tol: f64,
    pub conditions: Vec<Condition>,
}

impl ConditionReport {
    pub fn new(tol: f64) -> Self {
        Self { tol, conditions: Vec::new() }
    }

    /// Records a condition; it passes iff `residual <= tol`.
    pub fn push(&mut self, name: impl Into<String>, residual: f64, witness: Option<TimePoint>) -> &mut Condition {
        self.conditions.push(Condition {
            name: name.into(),
            pass: residual <= self.tol,
            residual,
            witness: if residual > 0.0 { witness } else { None },
            flag: None,
        });
        self.conditions.last_mut().unwrap()
    }

    pub fn all_pass(&self) -> bool {
        self.conditions.iter().all(|c| c.pass)
    }

    pub fn get(&self, prefix: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name.starts_with(prefix))
    }

    pub fn failures(&self) -> impl Iterator<Item = &Condition> {
        self.conditions.iter().filter(|c| !c.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.conditions.iter().fold(0.0, |m, c| m.max(c.residual))
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.conditions {
            write!(f, "{} {:<48} residual {:e}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.residual)?;
            if let Some(w) = c.witness {
                write!(f, " at t = {w}")?;
            }
            if let Some(flag) = &c.flag {
                write!(f, " [{flag}]")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Tracks the largest value seen and where it occurred.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Worst {
    pub value: f64,
    pub at: Option<TimePoint>,
}

impl Worst {
    pub fn see(&mut self, value: f64, at: TimePoint) {
        if value > self.value || (value.is_nan() && !self.value.is_nan()) {
            self.value = value;
            self.at = Some(at);
        }
    }
}
