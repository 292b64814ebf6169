//! The normalized Lane-Emden profile `Q`, the velocity `u*` it induces, and
//! the constants of its oscillating tail.
//!
//! `Q'' + (2/y) Q' + 4π ρ_Q = 0` with `ρ_Q = ((γ-1)Q/γ)^{1/(γ-1)}`,
//! `Q(0) = γ/(γ-1)` so that the central density is one.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::fit::{fit_oscillation, fit_oscillation_free, line_fit, Corrections, OscillationFit};
use crate::integrate::{integrate_raw, IntegrateOptions, IntegrationResult, OdeSystem, Termination};
use crate::params::GammaParams;

/// Where the center series hands over to numerical integration.
pub const SERIES_SWITCH: f64 = 1e-3;
/// Default outer radius: long enough for more than five log-periods.
pub const DEFAULT_Y_MAX: f64 = 1e14;
/// Default lower edge of the tail-fit window.
pub const DEFAULT_TAIL_LO: f64 = 1e2;
pub const DEFAULT_TOL: f64 = 1e-12;
const GRID_PER_DECADE: usize = 50;

fn density(gamma: f64, q: f64) -> f64 {
    ((gamma - 1.0) / gamma * q).powf(1.0 / (gamma - 1.0))
}

/// `(Q, Q')` in `y`, used between the series switch and `y = 1`.
struct Inner {
    gamma: f64,
}

impl OdeSystem<2> for Inner {
    fn rhs(&self, y: f64, x: &[f64; 2]) -> Result<[f64; 2]> {
        if !(x[0] > 0.0) {
            return Err(Error::PositivityViolation { y });
        }
        Ok([x[1], -2.0 * x[1] / y - 4.0 * PI * density(self.gamma, x[0])])
    }
}

/// `(Q, P = y Q')`, stepped in `ln y` beyond `y = 1`.
struct Outer {
    gamma: f64,
}

impl OdeSystem<2> for Outer {
    fn rhs(&self, y: f64, x: &[f64; 2]) -> Result<[f64; 2]> {
        if !(x[0] > 0.0) {
            return Err(Error::PositivityViolation { y });
        }
        Ok([x[1] / y, (-x[1] - 4.0 * PI * y * y * density(self.gamma, x[0])) / y])
    }
}

/// One grid point of the Lane-Emden profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LanePoint {
    pub y: f64,
    pub q: f64,
    pub dq: f64,
    pub rho: f64,
    pub ustar: f64,
}

#[derive(Debug, Clone)]
pub struct LaneEmdenSolution {
    pub params: GammaParams,
    pub y_max: f64,
    pub tol: f64,
    /// Log-spaced profile starting at `y = 0`.
    pub grid: Vec<LanePoint>,
    inner: IntegrationResult<2>,
    outer: IntegrationResult<2>,
}

/// Tail constants of `y^{2/(2-γ)} ρ_Q - k ≈ c2 sin(ν ln y + d2) y^{-μ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailFit {
    pub c2: f64,
    pub d2: f64,
    pub window: (f64, f64),
    pub rel_residual: f64,
}

impl LaneEmdenSolution {
    fn q_series(&self, y: f64) -> (f64, f64) {
        let g = self.params.gamma;
        let q2 = -2.0 * PI / 3.0;
        let q4 = 2.0 * PI * PI / (15.0 * g);
        let y2 = y * y;
        (g / (g - 1.0) + q2 * y2 + q4 * y2 * y2, 2.0 * q2 * y + 4.0 * q4 * y2 * y)
    }

    /// `(Q, Q')` at `y`, from the center series or the interpolants.
    pub fn q_at(&self, y: f64) -> Result<(f64, f64)> {
        if !(0.0..=self.y_max * (1.0 + 1e-12)).contains(&y) {
            return Err(domain(format!("y = {y} outside the Lane-Emden domain [0, {}]", self.y_max)));
        }
        if y < SERIES_SWITCH {
            return Ok(self.q_series(y));
        }
        if y <= 1.0 {
            let x = self.inner.eval(y).ok_or_else(|| domain("inner interpolation failed"))?;
            return Ok((x[0], x[1]));
        }
        let x = self.outer.eval(y.min(self.y_max)).ok_or_else(|| domain("outer interpolation failed"))?;
        Ok((x[0], x[1] / y))
    }

    pub fn density_at(&self, y: f64) -> Result<f64> {
        Ok(density(self.params.gamma, self.q_at(y)?.0))
    }

    /// `u*` from its closed form. Eliminating `Q''` with the equation itself
    /// leaves `u* = [(3γ-4) Q' - 4π(2-γ) y ρ] / (4π ρ)`.
    pub fn ustar_at(&self, y: f64) -> Result<f64> {
        let g = self.params.gamma;
        let (q, dq) = self.q_at(y)?;
        let rho = density(g, q);
        Ok(((3.0 * g - 4.0) * dq - 4.0 * PI * (2.0 - g) * y * rho) / (4.0 * PI * rho))
    }

    /// Lane-Emden residual at `y`, relative to the size of its terms.
    ///
    /// `Q''` comes from a five-point difference of `Q'` in `ln y`, so this is
    /// an independent check on the stored interpolants.
    pub fn equation_residual(&self, y: f64) -> Result<f64> {
        let (q, dq) = self.q_at(y)?;
        let ddq = log_derivative(|t| Ok(self.q_at(t)?.1), y)? / y;
        let rho = density(self.params.gamma, q);
        let terms = [ddq, 2.0 * dq / y, 4.0 * PI * rho];
        let scale: f64 = terms.iter().map(|t| t.abs()).sum();
        Ok(terms.iter().sum::<f64>().abs() / scale)
    }

    /// Relative residual of `(2 + (2-γ) y ∂y) ρ + y^{-2} ∂y(y² ρ u*) = 0`,
    /// the linear equation `u*` is built to solve.
    pub fn continuity_residual(&self, y: f64) -> Result<f64> {
        let g = self.params.gamma;
        let rho = self.density_at(y)?;
        let drho = log_derivative(|t| self.density_at(t), y)? / y;
        let flux = |t: f64| -> Result<f64> { Ok(t * t * self.density_at(t)? * self.ustar_at(t)?) };
        let dflux = log_derivative(flux, y)? / y;
        let terms = [2.0 * rho, (2.0 - g) * y * drho, dflux / (y * y)];
        let scale: f64 = terms.iter().map(|t| t.abs()).sum();
        Ok(terms.iter().sum::<f64>().abs() / scale)
    }

    /// Bounds `c ≤ Q ⟨y⟩^{2(γ-1)/(2-γ)} ≤ C` over the grid.
    pub fn q_bounds(&self) -> (f64, f64) {
        let g = self.params.gamma;
        let e = 2.0 * (g - 1.0) / (2.0 - g);
        self.grid.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), p| {
            let v = p.q * (1.0 + p.y * p.y).powf(e / 2.0);
            (lo.min(v), hi.max(v))
        })
    }
}

/// Fourth-order central difference of `f` with respect to `ln y`.
fn log_derivative(f: impl Fn(f64) -> Result<f64>, y: f64) -> Result<f64> {
    let h = 1e-3;
    let at = |k: f64| f(y * (k * h).exp());
    Ok((-at(2.0)? + 8.0 * at(1.0)? - 8.0 * at(-1.0)? + at(-2.0)?) / (12.0 * h))
}

/// Integrates the normalized Lane-Emden equation out to `y_max`.
pub fn solve_laneemden(params: &GammaParams, y_max: f64, tol: f64) -> Result<LaneEmdenSolution> {
    params.require_strict()?;
    if !(y_max >= 1e3) || !(tol > 0.0) {
        return Err(domain("Lane-Emden solve needs y_max >= 1e3 and tol > 0"));
    }
    let g = params.gamma;
    let mut le = LaneEmdenSolution {
        params: *params,
        y_max,
        tol,
        grid: Vec::new(),
        inner: empty(),
        outer: empty(),
    };
    let start = le.q_series(SERIES_SWITCH);
    let opts = IntegrateOptions { rtol: tol, atol: tol * 1e-4, ..IntegrateOptions::default() };
    let inner = integrate_raw(&Inner { gamma: g }, SERIES_SWITCH, [start.0, start.1], 1.0, &opts, &[])?;
    check(&inner)?;
    let (_, x1) = inner.last();
    let outer = integrate_raw(&Outer { gamma: g }, 1.0, [x1[0], x1[1]], y_max, &opts.log(), &[])?;
    check(&outer)?;
    le.inner = inner;
    le.outer = outer;

    let decades = y_max.log10() + 4.0;
    let n = (decades * GRID_PER_DECADE as f64).ceil() as usize;
    let mut grid = vec![LanePoint { y: 0.0, q: g / (g - 1.0), dq: 0.0, rho: 1.0, ustar: 0.0 }];
    for i in 0..=n {
        let y = (1e-4f64).powf(1.0 - i as f64 / n as f64) * y_max.powf(i as f64 / n as f64);
        let y = if i == n { y_max } else { y };
        let (q, dq) = le.q_at(y)?;
        if !(q > 0.0) {
            return Err(Error::PositivityViolation { y });
        }
        grid.push(LanePoint { y, q, dq, rho: density(g, q), ustar: le.ustar_at(y)? });
    }
    le.grid = grid;
    Ok(le)
}

fn empty() -> IntegrationResult<2> {
    struct Zero;
    impl OdeSystem<2> for Zero {
        fn rhs(&self, _: f64, _: &[f64; 2]) -> Result<[f64; 2]> {
            Ok([0.0; 2])
        }
    }
    integrate_raw(&Zero, 0.0, [0.0; 2], 0.0, &IntegrateOptions::default(), &[]).expect("trivial integration")
}

fn check(r: &IntegrationResult<2>) -> Result<()> {
    match r.termination {
        Termination::Completed => Ok(()),
        Termination::StepUnderflow { t } => Err(Error::PositivityViolation { y: t }),
        _ => Err(Error::StiffnessFailure { x: r.last().0 }),
    }
}

/// The `u*` profile on the solution grid as `(y, u*)` pairs.
pub fn ustar(le: &LaneEmdenSolution) -> Vec<(f64, f64)> {
    le.grid.iter().map(|p| (p.y, p.ustar)).collect()
}

/// `u*'(0)` by Richardson extrapolation of `u*(y)/y` near the center.
pub fn ustar_slope_at_origin(le: &LaneEmdenSolution) -> Result<f64> {
    let h = SERIES_SWITCH;
    let f = |y: f64| -> Result<f64> { Ok(le.ustar_at(y)? / y) };
    Ok((4.0 * f(h)? - f(2.0 * h)?) / 3.0)
}

fn tail_samples(lo: f64, hi: f64, f: impl Fn(f64) -> Result<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = 4000;
    let (a, b) = (lo.ln(), hi.ln());
    let s: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    let v = s.iter().map(|s| f(s.exp())).collect::<Result<Vec<_>>>()?;
    Ok((s, v))
}

/// Density deviation `y^{2/(2-γ)} ρ_Q - k` sampled on `[lo, hi]` in `ln y`.
pub fn density_tail(le: &LaneEmdenSolution, lo: f64, hi: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let p = le.params;
    tail_samples(lo, hi, |y| Ok(y.powf(p.alpha()) * le.density_at(y)? - p.k))
}

/// Fits the tail over `[lo, hi]` at the exact `(μ, ν)`.
pub fn fit_tail_window(le: &LaneEmdenSolution, lo: f64, hi: f64) -> Result<TailFit> {
    let p = le.params;
    let (s, f) = density_tail(le, lo, hi)?;
    let fit = fit_oscillation(&s, &f, p.mu, p.nu, Corrections::Nonlinear)?;
    if fit.rel_residual > 0.1 {
        return Err(Error::FitUnreliable { residual: fit.rel_residual });
    }
    Ok(TailFit { c2: fit.amplitude, d2: fit.phase, window: (lo, hi), rel_residual: fit.rel_residual })
}

/// Fits the tail over the default window `[10², y_max]`.
pub fn fit_tail(le: &LaneEmdenSolution) -> Result<TailFit> {
    fit_tail_window(le, DEFAULT_TAIL_LO, le.y_max)
}

/// Diagnostic tail fit with decay and frequency both free.
pub fn fit_tail_free(le: &LaneEmdenSolution) -> Result<OscillationFit> {
    let p = le.params;
    let (s, f) = density_tail(le, DEFAULT_TAIL_LO, le.y_max)?;
    fit_oscillation_free(&s, &f, p.mu, p.nu, Corrections::Nonlinear)
}

/// Fits `u* y^{μ-1}` to an oscillation at the exact `(μ, ν)`.
pub fn fit_ustar_tail(le: &LaneEmdenSolution) -> Result<OscillationFit> {
    let p = le.params;
    let (s, f) = tail_samples(DEFAULT_TAIL_LO, le.y_max, |y| Ok(le.ustar_at(y)? / y))?;
    fit_oscillation(&s, &f, p.mu, p.nu, Corrections::Nonlinear)
}

/// Slope of `ln ρ_Q` against `ln y` over `[lo, hi]`.
pub fn density_exponent(le: &LaneEmdenSolution, lo: f64, hi: f64) -> Result<f64> {
    let (s, rho) = tail_samples(lo, hi, |y| le.density_at(y))?;
    let logs: Vec<f64> = rho.iter().map(|r| r.ln()).collect();
    Ok(line_fit(&s, &logs).0)
}

/// Rescaled profile `(Q_λ(y), u_λ(y)) = (λ^{-2(γ-1)/(2-γ)} Q(y/λ), λ u*(y/λ))`.
pub fn scale(le: &LaneEmdenSolution, lambda: f64, y: f64) -> Result<(f64, f64)> {
    if !(lambda > 0.0) {
        return Err(domain("scaling parameter must be positive"));
    }
    let x = y / lambda;
    if !(0.0..=le.y_max).contains(&x) {
        return Err(domain(format!("y/λ = {x} outside the computed domain")));
    }
    let g = le.params.gamma;
    let (q, _) = le.q_at(x)?;
    Ok((lambda.powf(-2.0 * (g - 1.0) / (2.0 - g)) * q, lambda * le.ustar_at(x)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solution() -> LaneEmdenSolution {
        solve_laneemden(&GammaParams::new(1.1).unwrap(), 1e4, 1e-12).unwrap()
    }

    #[test]
    fn normalization_and_center() {
        let le = solution();
        assert!((le.grid[0].q - 1.1 / 0.1).abs() < 1e-12);
        assert_eq!(le.grid[0].ustar, 0.0);
        assert!((ustar_slope_at_origin(&le).unwrap() + 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn grid_is_monotone() {
        let le = solution();
        assert!(le.grid.windows(2).all(|w| w[0].y < w[1].y));
        assert!(le.grid.iter().all(|p| p.q > 0.0));
    }

    #[test]
    fn rejects_short_domain() {
        assert!(solve_laneemden(&GammaParams::new(1.1).unwrap(), 10.0, 1e-12).is_err());
    }

    #[test]
    fn scaling_identity() {
        let le = solution();
        let (q, u) = scale(&le, 1.0, 2.0).unwrap();
        assert_eq!(q, le.q_at(2.0).unwrap().0);
        assert_eq!(u, le.ustar_at(2.0).unwrap());
        assert!(scale(&le, 1e-6, 1.0).is_err());
    }
}
