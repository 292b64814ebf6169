//! Order-by-order Taylor solutions at the singular points of the system.
//!
//! Unknown coefficients are found by linearity probing. At a singular point
//! the leading coefficient matrix `A0` has a left null vector `l`. With `n`
//! orthogonal to it, the pair `(n·R_{m-1}, l·R_m)` of residual coefficients
//! is affine in the order-`m` coefficients and independent of everything
//! above them. Three residual evaluations therefore fix order `m`.

use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::params::GammaParams;
use crate::sonic::{characteristic_params_at_sonic, NormalFormParams, SonicPointData};
use crate::system::State;

/// Default truncation order for launching off singular points.
pub const DEFAULT_ORDER: usize = 10;
/// Fraction of the estimated radius inside which a series may be evaluated.
pub const TRUST_FACTOR: f64 = 0.5;
const CONDITION_LIMIT: f64 = 1e12;
const AFFINE_TOLERANCE: f64 = 1e-6;

/// A power series truncated after a fixed number of coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncatedSeries {
    pub coeffs: Vec<f64>,
}

impl TruncatedSeries {
    pub fn zeros(len: usize) -> Self {
        Self { coeffs: vec![0.0; len] }
    }

    pub fn constant(c: f64, len: usize) -> Self {
        let mut s = Self::zeros(len);
        s.coeffs[0] = c;
        s
    }

    /// `c + t` truncated to `len` coefficients.
    pub fn variable(c: f64, len: usize) -> Self {
        let mut s = Self::constant(c, len);
        if len > 1 {
            s.coeffs[1] = 1.0;
        }
        s
    }

    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, k: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    pub fn add_const(&self, k: f64) -> Self {
        let mut s = self.clone();
        s.coeffs[0] += k;
        s
    }

    /// Term-wise derivative. The top coefficient is unknown after
    /// differentiation and is set to zero.
    pub fn derivative(&self) -> Self {
        let n = self.len();
        let mut out = vec![0.0; n];
        for i in 1..n {
            out[i - 1] = i as f64 * self.coeffs[i];
        }
        Self { coeffs: out }
    }

    pub fn recip(&self) -> Result<Self> {
        let f = &self.coeffs;
        if f[0] == 0.0 {
            return Err(domain("reciprocal of a series with zero constant term"));
        }
        let mut h = vec![0.0; f.len()];
        h[0] = 1.0 / f[0];
        for n in 1..f.len() {
            let s: f64 = (1..=n).map(|j| f[j] * h[n - j]).sum();
            h[n] = -s / f[0];
        }
        Ok(Self { coeffs: h })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.recip()?)
    }

    /// `self^alpha` for a series with positive constant term.
    pub fn powf(&self, alpha: f64) -> Result<Self> {
        let f = &self.coeffs;
        if !(f[0] > 0.0) {
            return Err(domain("real power of a series needs a positive constant term"));
        }
        let mut g = vec![0.0; f.len()];
        g[0] = f[0].powf(alpha);
        for n in 1..f.len() {
            let s: f64 = (1..=n).map(|j| ((alpha + 1.0) * j as f64 - n as f64) * f[j] * g[n - j]).sum();
            g[n] = s / (n as f64 * f[0]);
        }
        Ok(Self { coeffs: g })
    }

    /// Horner evaluation of the value and first derivative at offset `t`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let mut v = 0.0;
        let mut d = 0.0;
        for &c in self.coeffs.iter().rev() {
            d = d * t + v;
            v = v * t + c;
        }
        (v, d)
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, o: &TruncatedSeries) -> TruncatedSeries {
        TruncatedSeries { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, o: &TruncatedSeries) -> TruncatedSeries {
        TruncatedSeries { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        self.scale(-1.0)
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, o: &TruncatedSeries) -> TruncatedSeries {
        let n = self.len().min(o.len());
        let mut out = vec![0.0; n];
        for (i, a) in self.coeffs.iter().take(n).enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in o.coeffs.iter().take(n - i).enumerate() {
                out[i + j] += a * b;
            }
        }
        TruncatedSeries { coeffs: out }
    }
}

/// A singular 2×2 system whose residual can be expanded in a local variable.
pub trait SingularSeriesSystem {
    /// Residual series of both equations for trial series of the unknowns.
    fn residual(&self, x: &[TruncatedSeries; 2]) -> Result<[TruncatedSeries; 2]>;
    /// Left null vector of the leading coefficient matrix.
    fn null_vector(&self) -> [f64; 2];
    /// Normal-form parameters when known, used to reject resonant points early.
    fn normal_form(&self) -> Option<NormalFormParams> {
        None
    }
}

/// Solves orders `2..=order` given the order-0 and order-1 coefficients.
pub fn solve_singular_series<S: SingularSeriesSystem + ?Sized>(
    sys: &S,
    c0: [f64; 2],
    c1: [f64; 2],
    order: usize,
) -> Result<[Vec<f64>; 2]> {
    if let Some(nf) = sys.normal_form() {
        if nf.is_resonant() {
            return Err(Error::Resonant { kappa: nf.kappa });
        }
    }
    let l = sys.null_vector();
    let ln = l[0].hypot(l[1]);
    let l = [l[0] / ln, l[1] / ln];
    let n = [-l[1], l[0]];
    let mut x = [vec![c0[0], c1[0]], vec![c0[1], c1[1]]];
    for m in 2..=order {
        let len = m + 2;
        let eqs = |trial: [f64; 2]| -> Result<[f64; 2]> {
            let series: [TruncatedSeries; 2] = std::array::from_fn(|i| {
                let mut c = x[i].clone();
                c.push(trial[i]);
                c.resize(len, 0.0);
                TruncatedSeries::from_coeffs(c)
            });
            let r = sys.residual(&series)?;
            Ok([
                n[0] * r[0].coeffs[m - 1] + n[1] * r[1].coeffs[m - 1],
                l[0] * r[0].coeffs[m] + l[1] * r[1].coeffs[m],
            ])
        };
        let f0 = eqs([0.0, 0.0])?;
        // The residual is affine in the trial pair, so any probe step is exact
        // in principle. In rounding, a step far below the true coefficient
        // cancels away, so a first pass at unit steps sets the scale for a
        // second pass.
        let probe = |h: [f64; 2]| -> Result<[[f64; 2]; 2]> {
            let fa = eqs([h[0], 0.0])?;
            let fb = eqs([0.0, h[1]])?;
            Ok([
                [(fa[0] - f0[0]) / h[0], (fb[0] - f0[0]) / h[1]],
                [(fa[1] - f0[1]) / h[0], (fb[1] - f0[1]) / h[1]],
            ])
        };
        let start = |i: usize| x[i][m - 1].abs().max(x[i][m - 2].abs()).max(1.0);
        let mut h = [start(0), start(1)];
        let mut floor = h;
        let mut mat = probe(h)?;
        for _ in 0..8 {
            if let Some(j) = (0..2).find(|&j| mat[0][j] == 0.0 && mat[1][j] == 0.0) {
                h[j] *= 1e6;
                floor[j] = h[j];
            } else {
                let Some(first) = crate::system::solve2(&mat, [-f0[0], -f0[1]]) else { break };
                let next: [f64; 2] = std::array::from_fn(|i| first[i].abs().max(floor[i]));
                if (0..2).all(|i| (next[i] / h[i]).abs().log10().abs() < 2.0) {
                    break;
                }
                h = next;
            }
            mat = probe(h)?;
        }
        if condition_number(&mat) > CONDITION_LIMIT {
            return Err(Error::ResonantOrder(m));
        }
        // Equilibration would blow a column of pure rounding noise up to
        // unit size. A real column is the same at any step; noise is not.
        let check = probe([h[0] * 7.3, h[1] * 7.3])?;
        for j in 0..2 {
            let size = mat[0][j].abs().max(mat[1][j].abs());
            let drift = (check[0][j] - mat[0][j]).abs().max((check[1][j] - mat[1][j]).abs());
            if drift > AFFINE_TOLERANCE * size {
                return Err(Error::ResonantOrder(m));
            }
        }
        let sol = crate::system::solve2(&mat, [-f0[0], -f0[1]]).ok_or(Error::ResonantOrder(m))?;
        x[0].push(sol[0]);
        x[1].push(sol[1]);
    }
    Ok(x)
}

/// Condition number after equilibrating columns and then rows, so that the
/// units of `ρ` and `u` (which differ by many decades in a dense core) do not
/// masquerade as resonance.
fn condition_number(m: &[[f64; 2]; 2]) -> f64 {
    let mut m = *m;
    for j in 0..2 {
        let s = m[0][j].abs().max(m[1][j].abs());
        if s == 0.0 {
            return f64::INFINITY;
        }
        m[0][j] /= s;
        m[1][j] /= s;
    }
    for row in &mut m {
        let s = row[0].abs().max(row[1].abs());
        if s == 0.0 {
            return f64::INFINITY;
        }
        row[0] /= s;
        row[1] /= s;
    }
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let s1 = a * a + b * b + c * c + d * d;
    let det = (a * d - b * c).abs();
    if det == 0.0 {
        return f64::INFINITY;
    }
    // σmax/σmin from the Frobenius norm and the determinant.
    let disc = (s1 * s1 - 4.0 * det * det).max(0.0).sqrt();
    let smax2 = 0.5 * (s1 + disc);
    let smin2 = det * det / smax2;
    (smax2 / smin2).sqrt()
}

/// Scalar model `(a t + b w) w' + c t + d w = 0` in normal form, paired with
/// a trivial second unknown `v' = 0` so that it fits the 2×2 machinery.
///
/// At order `m` the pivot multiplying `w_m` is `(a + bU)(m + κ)`, so the
/// recursion must break down exactly at `m = -κ`.
#[derive(Debug, Clone, Copy)]
pub struct NormalFormModel {
    pub nf: NormalFormParams,
    /// Whether to expose the normal form for the early resonance check.
    pub precheck: bool,
}

impl SingularSeriesSystem for NormalFormModel {
    fn residual(&self, x: &[TruncatedSeries; 2]) -> Result<[TruncatedSeries; 2]> {
        let NormalFormParams { a, b, c, d, .. } = self.nf;
        let len = x[0].len();
        let t = TruncatedSeries::variable(0.0, len);
        let (v, w) = (&x[0], &x[1]);
        let lead = &t.scale(a) + &w.scale(b);
        let r2 = &(&lead * &w.derivative()) + &(&t.scale(c) + &w.scale(d));
        Ok([v.derivative(), r2])
    }
    fn null_vector(&self) -> [f64; 2] {
        [0.0, 1.0]
    }
    fn normal_form(&self) -> Option<NormalFormParams> {
        self.precheck.then_some(self.nf)
    }
}

/// Solves the model to `order` starting from `w = U t`.
pub fn solve_normal_form_model(model: &NormalFormModel, order: usize) -> Result<Vec<f64>> {
    let [_, w] = solve_singular_series(model, [0.0, 0.0], [0.0, model.nf.u], order)?;
    Ok(w)
}

/// Which singular point a Taylor solution is centered on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Center {
    Sonic,
    Origin,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaylorSolution {
    pub kind: Center,
    pub center: f64,
    pub coeffs_rho: Vec<f64>,
    pub coeffs_u: Vec<f64>,
    pub radius_estimate: f64,
}

struct SonicSystem<'a> {
    params: &'a GammaParams,
    center: f64,
    null: [f64; 2],
    nf: NormalFormParams,
}

/// The full system expanded about a regular (non-zero) point `center`.
fn full_residual(params: &GammaParams, center: f64, x: &[TruncatedSeries; 2]) -> Result<[TruncatedSeries; 2]> {
    let g = params.gamma;
    let len = x[0].len();
    let y = TruncatedSeries::variable(center, len);
    let (rho, u) = (&x[0], &x[1]);
    let drho = rho.derivative();
    let du = u.derivative();
    let c = u + &y.scale(2.0 - g);
    let inv_y = y.recip()?;
    let b1 = &(&rho.scale(2.0) * &(u + &y)) * &inv_y;
    let r1 = &(&(&c * &drho) + &(rho * &du)) + &b1;
    let r2 = &(&(&rho.powf(g - 2.0)?.scale(g) * &drho) + &(&c * &du))
        + &(&u.scale(g - 1.0) + &(rho * &c).scale(params.coupling()));
    Ok([r1, r2])
}

impl SingularSeriesSystem for SonicSystem<'_> {
    fn residual(&self, x: &[TruncatedSeries; 2]) -> Result<[TruncatedSeries; 2]> {
        full_residual(self.params, self.center, x)
    }
    fn null_vector(&self) -> [f64; 2] {
        self.null
    }
    fn normal_form(&self) -> Option<NormalFormParams> {
        Some(self.nf)
    }
}

struct OriginSystem<'a> {
    params: &'a GammaParams,
}

impl SingularSeriesSystem for OriginSystem<'_> {
    /// The first equation is multiplied through by `y` to clear its pole.
    fn residual(&self, x: &[TruncatedSeries; 2]) -> Result<[TruncatedSeries; 2]> {
        let g = self.params.gamma;
        let len = x[0].len();
        let y = TruncatedSeries::variable(0.0, len);
        let (rho, u) = (&x[0], &x[1]);
        let drho = rho.derivative();
        let du = u.derivative();
        let c = u + &y.scale(2.0 - g);
        let r1 = &(&(&(&y * &c) * &drho) + &(&(&y * rho) * &du)) + &(&rho.scale(2.0) * &(u + &y));
        let r2 = &(&(&rho.powf(g - 2.0)?.scale(g) * &drho) + &(&c * &du))
            + &(&u.scale(g - 1.0) + &(rho * &c).scale(self.params.coupling()));
        Ok([r1, r2])
    }
    fn null_vector(&self) -> [f64; 2] {
        [1.0, 0.0]
    }
}

/// Taylor solution about the sonic point of `sp` along the LPH branch.
pub fn taylor_at_sonic(params: &GammaParams, sp: &SonicPointData, order: usize) -> Result<TaylorSolution> {
    if order < 2 {
        return Err(domain("series order must be at least 2"));
    }
    let nf = characteristic_params_at_sonic(params, sp)?;
    let c = sp.u0 + (2.0 - params.gamma) * sp.y_star;
    let sys = SonicSystem { params, center: sp.y_star, null: [c, -sp.rho0], nf };
    let [r, u] = solve_singular_series(&sys, [sp.rho0, sp.u0], [sp.rho1, sp.u1], order)?;
    Ok(finish(Center::Sonic, sp.y_star, r, u))
}

/// Taylor solution about a regular center with density `rho_center`.
pub fn taylor_at_origin(params: &GammaParams, rho_center: f64, order: usize) -> Result<TaylorSolution> {
    params.require_strict()?;
    if order < 2 {
        return Err(domain("series order must be at least 2"));
    }
    let nf = crate::sonic::origin_params(rho_center)?;
    debug_assert!(!nf.is_resonant());
    let sys = OriginSystem { params };
    let [r, u] = solve_singular_series(&sys, [rho_center, 0.0], [0.0, nf.u], order)?;
    Ok(finish(Center::Origin, 0.0, r, u))
}

fn finish(kind: Center, center: f64, coeffs_rho: Vec<f64>, coeffs_u: Vec<f64>) -> TaylorSolution {
    let radius_estimate = radius_estimate(&coeffs_rho).min(radius_estimate(&coeffs_u));
    TaylorSolution { kind, center, coeffs_rho, coeffs_u, radius_estimate }
}

/// Radius of convergence from a least-squares fit of `ln|c_n|` against `n`
/// over the upper half of the orders. Infinite when the tail vanishes.
pub fn radius_estimate(coeffs: &[f64]) -> f64 {
    let order = coeffs.len().saturating_sub(1);
    // Coefficients below this floor are rounding noise, not signal.
    let floor = 1e-12 * coeffs.iter().take(2).fold(1.0_f64, |m, c| m.max(c.abs()));
    let pts: Vec<(f64, f64)> = (order.div_ceil(2).max(1)..=order)
        .filter(|&n| coeffs[n].abs() > floor)
        .map(|n| (n as f64, coeffs[n].abs().ln()))
        .collect();
    if pts.len() < 2 {
        return f64::INFINITY;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (-slope).exp()
}

impl TaylorSolution {
    pub fn order(&self) -> usize {
        self.coeffs_rho.len() - 1
    }

    /// State and derivative at `y`, refusing points outside the trust region.
    pub fn evaluate(&self, y: f64) -> Result<(State, (f64, f64))> {
        let t = y - self.center;
        let radius = self.radius_estimate * TRUST_FACTOR;
        if !(t.abs() < radius) {
            return Err(Error::TrustRegionExceeded { y, radius });
        }
        let (r, dr) = TruncatedSeries::from_coeffs(self.coeffs_rho.clone()).eval(t);
        let (u, du) = TruncatedSeries::from_coeffs(self.coeffs_u.clone()).eval(t);
        Ok((State { rho: r, u }, (dr, du)))
    }

    /// Residual coefficients of orders `0..order`, scaled by the largest
    /// magnitude entering each equation.
    ///
    /// Coefficients are weighted by `R^m` first, with `R` the radius
    /// estimate, which is the residual in the variable `(y - center)/R`.
    /// Without it a dense core, where coefficients grow like `R^{-m}`, would
    /// be judged by its highest order alone.
    pub fn residual_orders(&self, params: &GammaParams) -> Result<Vec<[f64; 2]>> {
        let x = [
            TruncatedSeries::from_coeffs(self.coeffs_rho.clone()),
            TruncatedSeries::from_coeffs(self.coeffs_u.clone()),
        ];
        let r = match self.kind {
            Center::Sonic => full_residual(params, self.center, &x)?,
            Center::Origin => OriginSystem { params }.residual(&x)?,
        };
        let rad = if self.radius_estimate.is_finite() { self.radius_estimate } else { 1.0 };
        let weighted = |s: &TruncatedSeries| -> Vec<f64> {
            s.coeffs.iter().enumerate().map(|(m, c)| c * rad.powi(m as i32)).collect()
        };
        let scale = |v: &[f64]| v.iter().fold(0.0_f64, |m, c| m.max(c.abs())).max(1e-300);
        let (r0, r1) = (weighted(&r[0]), weighted(&r[1]));
        let s0 = scale(&r0).max(scale(&weighted(&x[0])));
        let s1 = scale(&r1).max(scale(&weighted(&x[1])));
        Ok((0..self.order()).map(|m| [r0[m] / s0, r1[m] / s1]).collect())
    }
}

/// Free-function form of [`TaylorSolution::evaluate`].
pub fn evaluate(ts: &TaylorSolution, y: f64) -> Result<(State, (f64, f64))> {
    ts.evaluate(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(c: &[f64]) -> TruncatedSeries {
        TruncatedSeries::from_coeffs(c.to_vec())
    }

    #[test]
    fn reciprocal_of_one_minus_t() {
        let r = series(&[1.0, -1.0, 0.0, 0.0, 0.0]).recip().unwrap();
        assert_eq!(r.coeffs, vec![1.0; 5]);
    }

    #[test]
    fn square_root_squares_back() {
        let f = series(&[4.0, 1.0, -0.5, 0.25, 0.1]);
        let s = f.powf(0.5).unwrap();
        let back = &s * &s;
        for (a, b) in back.coeffs.iter().zip(&f.coeffs) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn horner_value_and_derivative() {
        let (v, d) = series(&[1.0, 2.0, 3.0]).eval(2.0);
        assert_eq!((v, d), (17.0, 14.0));
    }

    #[test]
    fn friedman_center_is_exact() {
        let p = GammaParams::new(1.1).unwrap();
        let rho_c = 1.0 / (6.0 * std::f64::consts::PI);
        let ts = taylor_at_origin(&p, rho_c, 8).unwrap();
        assert_eq!(ts.coeffs_rho[0], rho_c);
        for n in 1..=8 {
            assert!(ts.coeffs_rho[n].abs() < 1e-13, "rho_{n} = {}", ts.coeffs_rho[n]);
            let expected = if n == 1 { -2.0 / 3.0 } else { 0.0 };
            assert!((ts.coeffs_u[n] - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn trust_region_is_enforced() {
        let p = GammaParams::new(1.1).unwrap();
        let sp = crate::sonic::solve_sonic(&p, 0.0).unwrap();
        let ts = taylor_at_sonic(&p, &sp, 10).unwrap();
        assert!(ts.evaluate(sp.y_star).is_ok());
        let edge = sp.y_star + 1.001 * ts.radius_estimate * TRUST_FACTOR;
        assert!(matches!(ts.evaluate(edge), Err(Error::TrustRegionExceeded { .. })));
    }

    #[test]
    fn order_must_be_at_least_two() {
        let p = GammaParams::new(1.1).unwrap();
        assert!(taylor_at_origin(&p, 1.0, 1).is_err());
    }
}
