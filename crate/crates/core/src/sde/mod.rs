//! Reflected SDEs `X = X₀ + σ(·,X)·M + b(·,X)·V + K` between two regulated
//! barriers, solved by Picard iteration of the two-barrier map on
//! localization intervals.

mod check;
mod solve;

use alloc::vec::Vec;

pub use check::{check_sde, jump_estimate_sanity, jump_estimate_terms, JumpEstimateReport};
pub use solve::{
    localization_intervals, localization_times, picard_map, solve, solve_with_guess, InitialGuess, IntervalDiagnostics,
    LocalizationInterval, SdeSolution,
};

use crate::error::{Error, Result};
use crate::regulated::{merged_grid, RegulatedPath};
use crate::semimartingale::SemimartingalePath;
use crate::two_sided::BarrierPair;

/// State part `g(x)` of a separable coefficient `f(t)·g(x)`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum CoefficientKind {
    Constant {
        c: f64,
    },
    /// `a + b·x`.
    Affine {
        a: f64,
        b: f64,
    },
    /// Piecewise linear through `(x[i], y[i])`, flat outside.
    Table {
        x: Vec<f64>,
        y: Vec<f64>,
    },
}

impl CoefficientKind {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            CoefficientKind::Constant { c } => *c,
            CoefficientKind::Affine { a, b } => a + b * x,
            CoefficientKind::Table { x: xs, y: ys } => {
                let n = xs.len();
                if x <= xs[0] {
                    return ys[0];
                }
                if x >= xs[n - 1] {
                    return ys[n - 1];
                }
                let j = xs.partition_point(|&p| p <= x);
                let (x0, x1, y0, y1) = (xs[j - 1], xs[j], ys[j - 1], ys[j]);
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }

    /// Smallest Lipschitz constant of `g`.
    pub fn slope(&self) -> f64 {
        match self {
            CoefficientKind::Constant { .. } => 0.0,
            CoefficientKind::Affine { b, .. } => b.abs(),
            CoefficientKind::Table { x, y } => {
                x.windows(2).zip(y.windows(2)).fold(0.0, |m, (xw, yw)| m.max(((yw[1] - yw[0]) / (xw[1] - xw[0])).abs()))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            CoefficientKind::Constant { c } if c.is_finite() => Ok(()),
            CoefficientKind::Affine { a, b } if a.is_finite() && b.is_finite() => Ok(()),
            CoefficientKind::Table { x, y } => {
                if x.is_empty() || x.len() != y.len() {
                    return Err(Error::invalid("coefficient table needs matching, non-empty x and y"));
                }
                if !x.iter().chain(y).all(|v| v.is_finite()) || x.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::invalid("coefficient table x must be finite and strictly increasing"));
                }
                Ok(())
            }
            _ => Err(Error::invalid("coefficient parameters must be finite")),
        }
    }
}

/// `σ(t, x) = f(t)·g(x)` with regulated `f` (1 when absent) and a declared
/// Lipschitz constant `λ` in `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSpec {
    kind: CoefficientKind,
    time_factor: Option<RegulatedPath>,
    lipschitz: f64,
}

impl CoefficientSpec {
    /// Fails unless `λ ≥ sup|f| · slope(g)`.
    pub fn new(kind: CoefficientKind, time_factor: Option<RegulatedPath>, lipschitz: f64) -> Result<Self> {
        kind.validate()?;
        let sup_f = time_factor.as_ref().map_or(1.0, |f| f.slots().fold(0.0_f64, |m, v| m.max(v.abs())));
        if let Some(f) = &time_factor {
            if !f.slots().all(f64::is_finite) {
                return Err(Error::invalid("time factor must be finite"));
            }
        }
        let needed = sup_f * kind.slope();
        if !(lipschitz.is_finite() && lipschitz >= needed * (1.0 - 1e-12)) {
            return Err(Error::invalid(alloc::format!(
                "declared Lipschitz constant {lipschitz} is below the true constant {needed}"
            )));
        }
        Ok(Self { kind, time_factor, lipschitz })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(CoefficientKind::Constant { c }, None, 0.0)
    }

    pub fn affine(a: f64, b: f64) -> Result<Self> {
        Self::new(CoefficientKind::Affine { a, b }, None, b.abs())
    }

    pub fn zero() -> Self {
        Self { kind: CoefficientKind::Constant { c: 0.0 }, time_factor: None, lipschitz: 0.0 }
    }

    pub fn kind(&self) -> &CoefficientKind {
        &self.kind
    }

    pub fn time_factor(&self) -> Option<&RegulatedPath> {
        self.time_factor.as_ref()
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// `f` read on `grid`.
    pub(crate) fn factor_on(&self, grid: &[f64]) -> RegulatedPath {
        match &self.time_factor {
            Some(f) => f.resample(grid),
            None => RegulatedPath::from_raw(grid.to_vec(), alloc::vec![1.0; grid.len()], alloc::vec![1.0; grid.len()]),
        }
    }

    /// `σ(t, x(t))` slot by slot, with `f` already on the grid of `x`.
    pub(crate) fn apply(&self, factor: &RegulatedPath, x: &RegulatedPath) -> RegulatedPath {
        factor.zip_map(x, |f, v| f * self.kind.eval(v)).expect("factor sampled on the state grid")
    }
}

/// A reflected SDE with its solver settings.
///
/// The driver, the barriers and the time factors are brought onto one grid
/// (the union of the driver and barrier grids).
#[derive(Clone, Debug)]
pub struct SdeProblem {
    x0: f64,
    sigma: CoefficientSpec,
    b: CoefficientSpec,
    driver: SemimartingalePath,
    barriers: BarrierPair,
    m: f64,
    picard_tol: f64,
    max_iters: usize,
    sigma_factor: RegulatedPath,
    b_factor: RegulatedPath,
}

impl SdeProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        x0: f64,
        sigma: CoefficientSpec,
        b: CoefficientSpec,
        driver: SemimartingalePath,
        barriers: BarrierPair,
        m: f64,
        picard_tol: f64,
        max_iters: usize,
    ) -> Result<Self> {
        driver.validate()?;
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::invalid("localization budget m must be positive"));
        }
        if !(picard_tol.is_finite() && picard_tol > 0.0) || max_iters == 0 {
            return Err(Error::invalid("picard_tol must be positive and max_iters at least 1"));
        }
        let grid = merged_grid(&[&driver.mc, barriers.lower()]);
        let driver = if grid.as_slice() == driver.grid() { driver } else { driver.resample(&grid) };
        let barriers = barriers.resample(driver.grid());
        for p in [barriers.lower(), barriers.upper()] {
            if p.values()[0] != p.right_values()[0] {
                return Err(Error::JumpAtZero);
            }
        }
        let (l0, u0) = (barriers.lower().values()[0], barriers.upper().values()[0]);
        if !(l0 <= x0 && x0 <= u0) {
            return Err(Error::InitialCondition { lower: l0, value: x0, upper: u0 });
        }
        let sigma_factor = sigma.factor_on(driver.grid());
        let b_factor = b.factor_on(driver.grid());
        Ok(Self { x0, sigma, b, driver, barriers, m, picard_tol, max_iters, sigma_factor, b_factor })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn sigma(&self) -> &CoefficientSpec {
        &self.sigma
    }

    pub fn b(&self) -> &CoefficientSpec {
        &self.b
    }

    pub fn driver(&self) -> &SemimartingalePath {
        &self.driver
    }

    pub fn barriers(&self) -> &BarrierPair {
        &self.barriers
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn picard_tol(&self) -> f64 {
        self.picard_tol
    }

    pub fn max_iters(&self) -> usize {
        self.max_iters
    }

    pub fn grid(&self) -> &[f64] {
        self.driver.grid()
    }

    /// The same problem with another localization budget.
    pub fn with_m(&self, m: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::invalid("localization budget m must be positive"));
        }
        Ok(Self { m, ..self.clone() })
    }

    /// The same problem with other barriers (resampled on the problem grid).
    pub fn with_barriers(&self, barriers: BarrierPair) -> Result<Self> {
        Self::new(
            self.x0,
            self.sigma.clone(),
            self.b.clone(),
            self.driver.clone(),
            barriers,
            self.m,
            self.picard_tol,
            self.max_iters,
        )
    }

    /// Localization intervals for the current budget `m`.
    pub fn intervals(&self) -> Result<Vec<LocalizationInterval>> {
        localization_intervals(&self.driver, &self.sigma, &self.b, self.m)
    }

    /// `σ(t, x_t)` on the problem grid.
    pub fn sigma_along(&self, x: &RegulatedPath) -> RegulatedPath {
        self.sigma.apply(&self.sigma_factor, x)
    }

    /// `b(t, x_t)` on the problem grid.
    pub fn b_along(&self, x: &RegulatedPath) -> RegulatedPath {
        self.b.apply(&self.b_factor, x)
    }
}
