//! The exterior linearization around the far-field solution: a Gauss
//! hypergeometric homogeneous solution and its oscillating limit at `z → 0`.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::fit::{fit_oscillation, fit_oscillation_free, phase_distance, Corrections, OscillationFit};
use crate::integrate::{integrate, IntegrateOptions, IntegrationResult, OdeSystem};
use crate::params::GammaParams;
use crate::system::{solve2, Mat2};

/// Terms summed before the series is declared divergent.
pub const MAX_TERMS: usize = 100_000;
/// Largest `|ξ|` at which the series is evaluated directly.
pub const XI_WINDOW: f64 = 0.9;
/// Inner end of the numerical extension, as a fraction of `y_f`.
pub const EXTENSION_END: f64 = 1e-8;
/// Fit window for `c1, d1`, as fractions of `y_f`.
pub const FIT_WINDOW: (f64, f64) = (1e-8, 1e-2);

/// `2F1(a, conj(a); c; z)` for real `c` and real `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypergeometricArgs {
    pub a_re: f64,
    pub a_im: f64,
    pub c: f64,
    pub z: f64,
}

/// Sums the hypergeometric series with a conjugate parameter pair.
///
/// Since `b = conj(a)`, the Pochhammer product `(a)_n (b)_n` is `∏|a + j|²`
/// and every term is real, so no complex arithmetic appears at all.
pub fn gauss_2f1_conjugate(args: &HypergeometricArgs) -> Result<f64> {
    let HypergeometricArgs { a_re, a_im, c, z } = *args;
    if c <= 0.0 && c.fract() == 0.0 {
        return Err(domain(format!("c = {c} is a non-positive integer")));
    }
    if !(z.abs() < 1.0) {
        return Err(domain(format!("|z| = {} is outside the disc of convergence", z.abs())));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        term *= ((nf + a_re).powi(2) + a_im * a_im) / ((c + nf) * (1.0 + nf)) * z;
        sum += term;
        if term.abs() < 1e-16 * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::ConvergenceFailure { terms: MAX_TERMS })
}

/// Homogeneous solution value and `z`-derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomPoint {
    pub z: f64,
    pub p: f64,
    pub omega: f64,
    pub dp: f64,
    pub domega: f64,
}

/// The linearized exterior system `E(z) X' + F(z) X = 0`.
#[derive(Debug, Clone, Copy)]
pub struct LinearizedSystem {
    pub params: GammaParams,
}

impl LinearizedSystem {
    pub fn matrices(&self, z: f64) -> (Mat2, Mat2) {
        let p = &self.params;
        let g = p.gamma;
        let a = p.alpha();
        let yfa = p.y_f.powf(a);
        let tg = 2.0 - g;
        let e = [[tg * z, p.k * z], [tg * tg * yfa / p.k * z.powf(1.0 - a), tg * z]];
        let f = [
            [0.0, (4.0 - 3.0 * g) / tg * p.k],
            [2.0 * tg * tg * yfa / (p.k * z.powf(a)), 1.0 + 2.0 * yfa / z.powf(a)],
        ];
        (e, f)
    }

    /// `|E X' + F X|` relative to the size of the two terms.
    pub fn residual(&self, h: &HomPoint) -> f64 {
        let (e, f) = self.matrices(h.z);
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for i in 0..2 {
            let ex = e[i][0] * h.dp + e[i][1] * h.domega;
            let fx = f[i][0] * h.p + f[i][1] * h.omega;
            num = num.max((ex + fx).abs());
            den = den.max(ex.abs() + fx.abs());
        }
        num / den
    }
}

impl OdeSystem<2> for LinearizedSystem {
    fn rhs(&self, z: f64, x: &[f64; 2]) -> Result<[f64; 2]> {
        if !(z > 0.0) {
            return Err(Error::OriginSingular(z));
        }
        let (e, f) = self.matrices(z);
        let fx = [f[0][0] * x[0] + f[0][1] * x[1], f[1][0] * x[0] + f[1][1] * x[1]];
        let d = solve2(&e, fx).ok_or(Error::SonicSingular { y: z, discriminant: 0.0 })?;
        Ok([-d[0], -d[1]])
    }
}

/// The homogeneous solution normalized by its value at `y_f`, its
/// numerical continuation toward the center, and the fitted constants.
#[derive(Debug, Clone)]
pub struct HomSolution {
    pub params: GammaParams,
    /// `z`-interval where `|ξ| < 0.9`.
    pub window: (f64, f64),
    pub c1: f64,
    pub d1: f64,
    pub p_fit: OscillationFit,
    pub omega_fit: OscillationFit,
    extension: IntegrationResult<2>,
}

struct HypergeometricData {
    a_re: f64,
    a_im: f64,
    c: f64,
}

fn hypergeometric_data(p: &GammaParams) -> HypergeometricData {
    let h = (2.0 - p.gamma) / 2.0;
    HypergeometricData { a_re: -h * p.mu, a_im: -h * p.nu, c: (5.0 * p.gamma - 3.0) / 2.0 }
}

/// `ξ(z) = 1 - (y_f / z)^{2/(2-γ)}`.
pub fn xi(params: &GammaParams, z: f64) -> f64 {
    1.0 - (params.y_f / z).powf(params.alpha())
}

/// The window `|ξ| < 0.9` as an interval in `z`.
pub fn series_window(params: &GammaParams) -> (f64, f64) {
    let inv = 1.0 / params.alpha();
    (params.y_f * (1.0 + XI_WINDOW).powf(-inv), params.y_f * (1.0 - XI_WINDOW).powf(-inv))
}

/// Evaluates the homogeneous solution from the hypergeometric series.
pub fn hom_series(params: &GammaParams, z: f64) -> Result<HomPoint> {
    params.require_strict()?;
    if !(z > 0.0) {
        return Err(Error::OriginSingular(z));
    }
    let x = xi(params, z);
    if !(x.abs() < XI_WINDOW) {
        return Err(Error::OutsideWindow { xi: x });
    }
    let g = params.gamma;
    let k = params.k;
    let HypergeometricData { a_re, a_im, c } = hypergeometric_data(params);
    let f = |shift: f64| gauss_2f1_conjugate(&HypergeometricArgs { a_re: a_re + shift, a_im, c: c + shift, z: x });
    let ab0 = a_re * a_re + a_im * a_im;
    let ab1 = (a_re + 1.0).powi(2) + a_im * a_im;
    let s = 6.0 * g * g - 15.0 * g + 11.0;
    let norm = s / (3.0 * g - 1.0);
    let g1 = norm * f(0.0)?;
    let g1p = norm * ab0 / c * f(1.0)?;
    let g1pp = norm * ab0 / c * ab1 / (c + 1.0) * f(2.0)?;

    let tg = 2.0 - g;
    let q = 4.0 - 3.0 * g;
    let (ap, bp) = ((3.0 * g - 1.0) / s, -6.0 * (g - 1.0) / (q * s));
    let (aw, bw) = (-2.0 * tg * tg / (s * k), 2.0 * tg / (q * s * k));
    let scale = k * (3.0 * g - 1.0) / (2.0 * tg);
    // ξ' = α (1 - ξ) / z
    let dxi = params.alpha() * (1.0 - x) / z;
    let d_pre = |a: f64, b: f64| (a + b) * g1p + b * x * g1pp;
    Ok(HomPoint {
        z,
        p: scale * (ap * g1 + bp * x * g1p),
        omega: scale * (aw * g1 + bw * x * g1p),
        dp: scale * d_pre(ap, bp) * dxi,
        domega: scale * d_pre(aw, bw) * dxi,
    })
}

impl HomSolution {
    /// Value and derivative at `z`: from the series inside the window, from
    /// the continued solution between `1e-8 y_f` and the window.
    pub fn eval(&self, z: f64) -> Result<HomPoint> {
        if z >= self.window.0 {
            return hom_series(&self.params, z);
        }
        let x = self.extension.eval(z).ok_or_else(|| domain(format!("z = {z} below the continued range")))?;
        let sys = LinearizedSystem { params: self.params };
        let d = sys.rhs(z, &x)?;
        Ok(HomPoint { z, p: x[0], omega: x[1], dp: d[0], domega: d[1] })
    }

    /// Inner end of the continued solution.
    pub fn z_min(&self) -> f64 {
        self.extension.last().0
    }

    /// `ω` phase minus `p` phase, reduced to `(-π, π]` around `θ0`.
    pub fn phase_offset_error(&self) -> f64 {
        phase_distance(self.omega_fit.phase - self.p_fit.phase, self.params.theta0)
    }

    /// Samples `z^μ (p, ω)` on the fit window, in `ln z`.
    fn tail(&self) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        sample_extension(&self.params, &self.extension)
    }

    /// Free-exponent fit of `p_hom` near the center, as a diagnostic.
    pub fn free_fit(&self) -> Result<OscillationFit> {
        let (s, p, _) = self.tail()?;
        fit_oscillation_free(&s, &p, self.params.mu, self.params.nu, Corrections::None)
    }
}

fn sample_extension(params: &GammaParams, ext: &IntegrationResult<2>) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let n = 4000;
    let (lo, hi) = ((FIT_WINDOW.0 * params.y_f).ln(), (FIT_WINDOW.1 * params.y_f).ln());
    let mut s = Vec::with_capacity(n + 1);
    let mut p = Vec::with_capacity(n + 1);
    let mut w = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let si = lo + (hi - lo) * i as f64 / n as f64;
        let x = ext.eval(si.exp().max(ext.last().0)).ok_or_else(|| domain("extension does not cover the fit window"))?;
        s.push(si);
        p.push(x[0]);
        w.push(x[1]);
    }
    Ok((s, p, w))
}

/// Builds the homogeneous solution and extracts its limiting constants.
pub fn hom_solution(params: &GammaParams) -> Result<HomSolution> {
    params.require_strict()?;
    let window = series_window(params);
    // Start just inside the window edge so the seed is a series value.
    let z0 = window.0 * (1.0 + 1e-9);
    let seed = hom_series(params, z0)?;
    let opts = IntegrateOptions { rtol: 1e-12, atol: 1e-14, ..IntegrateOptions::default() }.log();
    let extension = integrate(
        &LinearizedSystem { params: *params },
        z0,
        [seed.p, seed.omega],
        EXTENSION_END * params.y_f,
        &opts,
        &[],
    )?;
    let (c1, d1, p_fit, omega_fit) = extract_c1_d1(params, &extension)?;
    Ok(HomSolution { params: *params, window, c1, d1, p_fit, omega_fit, extension })
}

/// Fits `z^μ p_hom ≈ c1 sin(ν ln z + d1)` and the matching `ω` oscillation.
pub fn extract_c1_d1(
    params: &GammaParams,
    extension: &IntegrationResult<2>,
) -> Result<(f64, f64, OscillationFit, OscillationFit)> {
    let (s, p, w) = sample_extension(params, extension)?;
    let pf = fit_oscillation(&s, &p, params.mu, params.nu, Corrections::None)?;
    let wf = fit_oscillation(&s, &w, params.mu, params.nu, Corrections::None)?;
    let worst = pf.rel_residual.max(wf.rel_residual);
    if worst > 0.05 {
        return Err(Error::FitUnreliable { residual: worst });
    }
    Ok((pf.amplitude, pf.phase, pf, wf))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_real_case() {
        // 2F1(1, 1; 2; z) = -ln(1 - z)/z
        let v = gauss_2f1_conjugate(&HypergeometricArgs { a_re: 1.0, a_im: 0.0, c: 2.0, z: 0.5 }).unwrap();
        assert!((v - 2.0 * 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn zero_argument_and_bad_input() {
        let a = HypergeometricArgs { a_re: 0.3, a_im: 0.7, c: 1.5, z: 0.0 };
        assert_eq!(gauss_2f1_conjugate(&a).unwrap(), 1.0);
        assert!(gauss_2f1_conjugate(&HypergeometricArgs { c: -2.0, ..a }).is_err());
        assert!(gauss_2f1_conjugate(&HypergeometricArgs { z: 1.0, ..a }).is_err());
    }

    #[test]
    fn taylor_data_at_far_field_point() {
        let p = GammaParams::new(1.1).unwrap();
        let h = hom_series(&p, p.y_f).unwrap();
        assert!((h.p - 2.3 * p.k / 1.8).abs() < 1e-12);
        assert!((h.omega + 0.9).abs() < 1e-12);
    }

    #[test]
    fn window_is_enforced() {
        let p = GammaParams::new(1.1).unwrap();
        let (lo, hi) = series_window(&p);
        assert!(hom_series(&p, lo * 0.99).is_err());
        assert!(hom_series(&p, hi * 1.01).is_err());
        assert!(hom_series(&p, lo * 1.01).is_ok());
    }
}
