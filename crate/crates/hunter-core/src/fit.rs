//! Least-squares fits of log-periodic oscillations.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{domain, Result};

/// Solves `min ‖Σ c_j col_j − f‖₂` and returns the coefficients and the RMS residual.
pub fn linear_lsq(columns: &[Vec<f64>], f: &[f64]) -> Result<(Vec<f64>, f64)> {
    let m = f.len();
    let n = columns.len();
    if n == 0 || m < n || columns.iter().any(|c| c.len() != m) {
        return Err(domain("ill-shaped least-squares problem"));
    }
    let a = DMatrix::from_fn(m, n, |i, j| columns[j][i]);
    let b = DVector::from_column_slice(f);
    let svd = a.clone().svd(true, true);
    let x = svd.solve(&b, 1e-14).map_err(|e| domain(e.to_string()))?;
    let r = &a * &x - &b;
    Ok((x.iter().copied().collect(), (r.norm_squared() / m as f64).sqrt()))
}

/// Result of fitting `e^{-μ s} c sin(ν s + d)` plus optional corrections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillationFit {
    pub amplitude: f64,
    /// Phase in `[0, 2π)`.
    pub phase: f64,
    /// RMS residual relative to the amplitude.
    pub rel_residual: f64,
    pub mu: f64,
    pub nu: f64,
}

/// Corrections included alongside the leading oscillation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Corrections {
    None,
    /// Second- and third-order harmonics decaying toward larger `s`.
    Nonlinear,
}

fn design(s: &[f64], mu: f64, nu: f64, corr: Corrections) -> Vec<Vec<f64>> {
    let mut cols = vec![
        s.iter().map(|s| (nu * s).sin()).collect::<Vec<_>>(),
        s.iter().map(|s| (nu * s).cos()).collect(),
    ];
    if corr == Corrections::Nonlinear {
        // A quadratic interaction of the leading mode produces a mean shift
        // and a second harmonic one decay order down; cubic terms add the
        // first and third harmonics two orders down.
        let terms: [(f64, f64, fn(f64) -> f64); 7] = [
            (1.0, 0.0, f64::cos),
            (1.0, 2.0, f64::sin),
            (1.0, 2.0, f64::cos),
            (2.0, 1.0, f64::sin),
            (2.0, 1.0, f64::cos),
            (2.0, 3.0, f64::sin),
            (2.0, 3.0, f64::cos),
        ];
        for (order, harmonic, trig) in terms {
            cols.push(s.iter().map(|s| (-order * mu * s).exp() * trig(harmonic * nu * s)).collect());
        }
    }
    cols
}

fn solve_fit(s: &[f64], f: &[f64], mu: f64, nu: f64, corr: Corrections) -> Result<(Vec<f64>, Vec<Vec<f64>>, f64)> {
    let g: Vec<f64> = s.iter().zip(f).map(|(s, f)| f * (mu * s).exp()).collect();
    let cols = design(s, mu, nu, corr);
    let (c, rms) = linear_lsq(&cols, &g)?;
    Ok((c, cols, rms))
}

/// Fits `f(s) ≈ e^{-μ s} [c sin(ν s + d) + corrections]` at fixed `(μ, ν)`.
pub fn fit_oscillation(s: &[f64], f: &[f64], mu: f64, nu: f64, corr: Corrections) -> Result<OscillationFit> {
    let (c, _, rms) = solve_fit(s, f, mu, nu, corr)?;
    let amplitude = c[0].hypot(c[1]);
    Ok(OscillationFit {
        amplitude,
        phase: c[1].atan2(c[0]).rem_euclid(TAU),
        rel_residual: rms / amplitude,
        mu,
        nu,
    })
}

/// Fits with `μ` and `ν` free, starting from the given guesses.
///
/// Residuals are always weighted by `e^{μ0 s}` so that moving `μ` cannot
/// lower the cost just by rescaling the data.
pub fn fit_oscillation_free(
    s: &[f64],
    f: &[f64],
    mu0: f64,
    nu0: f64,
    corr: Corrections,
) -> Result<OscillationFit> {
    let cost = |p: [f64; 2]| -> f64 {
        let Ok((c, cols, _)) = solve_fit(s, f, p[0], p[1], corr) else {
            return f64::INFINITY;
        };
        let sum: f64 = (0..s.len())
            .map(|i| {
                let model: f64 = c.iter().zip(&cols).map(|(c, col)| c * col[i]).sum();
                ((f[i] - (-p[0] * s[i]).exp() * model) * (mu0 * s[i]).exp()).powi(2)
            })
            .sum();
        sum
    };
    let best = nelder_mead(cost, [mu0, nu0], [0.05 * mu0.abs().max(0.01), 0.05 * nu0.abs()], 400);
    fit_oscillation(s, f, best[0], best[1], corr)
}

fn nelder_mead(f: impl Fn([f64; 2]) -> f64, x0: [f64; 2], step: [f64; 2], iters: usize) -> [f64; 2] {
    let mut pts = [x0, [x0[0] + step[0], x0[1]], [x0[0], x0[1] + step[1]]];
    let mut vals = pts.map(&f);
    for _ in 0..iters {
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = idx.map(|i| pts[i]);
        vals = idx.map(|i| vals[i]);
        let spread = (pts[2][0] - pts[0][0]).abs() + (pts[2][1] - pts[0][1]).abs();
        if spread < 1e-12 {
            break;
        }
        let c = [(pts[0][0] + pts[1][0]) / 2.0, (pts[0][1] + pts[1][1]) / 2.0];
        let along = |t: f64| [c[0] + t * (pts[2][0] - c[0]), c[1] + t * (pts[2][1] - c[1])];
        let xr = along(-1.0);
        let fr = f(xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(xe);
            if fe < fr {
                pts[2] = xe;
                vals[2] = fe;
            } else {
                pts[2] = xr;
                vals[2] = fr;
            }
        } else if fr < vals[1] {
            pts[2] = xr;
            vals[2] = fr;
        } else {
            let xc = along(if fr < vals[2] { -0.5 } else { 0.5 });
            let fc = f(xc);
            if fc < vals[2].min(fr) {
                pts[2] = xc;
                vals[2] = fc;
            } else {
                for i in 1..3 {
                    pts[i] = [(pts[i][0] + pts[0][0]) / 2.0, (pts[i][1] + pts[0][1]) / 2.0];
                    vals[i] = f(pts[i]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    pts[best]
}

/// Slope and intercept of an ordinary least-squares line.
pub fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Signed distance between two phases, reduced to `(-π, π]`.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > std::f64::consts::PI {
        d - TAU
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(mu: f64, nu: f64, c: f64, d: f64) -> (Vec<f64>, Vec<f64>) {
        let s: Vec<f64> = (0..2000).map(|i| 2.0 + i as f64 * 0.01).collect();
        let f = s.iter().map(|s| c * (-mu * s).exp() * (nu * s + d).sin()).collect();
        (s, f)
    }

    #[test]
    fn recovers_amplitude_and_phase() {
        let (s, f) = samples(0.3, 1.2, 0.7, 2.5);
        let fit = fit_oscillation(&s, &f, 0.3, 1.2, Corrections::None).unwrap();
        assert!((fit.amplitude - 0.7).abs() < 1e-10);
        assert!((fit.phase - 2.5).abs() < 1e-10);
        assert!(fit.rel_residual < 1e-10);
    }

    #[test]
    fn free_fit_finds_frequency_and_decay() {
        let (s, f) = samples(0.25, 1.1, 1.0, 0.4);
        let fit = fit_oscillation_free(&s, &f, 0.27, 1.15, Corrections::None).unwrap();
        assert!((fit.nu - 1.1).abs() < 1e-6, "{fit:?}");
        assert!((fit.mu - 0.25).abs() < 1e-6, "{fit:?}");
    }

    #[test]
    fn phase_distance_wraps() {
        assert!((phase_distance(0.1, TAU - 0.1) - 0.2).abs() < 1e-12);
        assert!((phase_distance(TAU - 0.1, 0.1) + 0.2).abs() < 1e-12);
    }

    #[test]
    fn line_fit_is_exact_on_lines() {
        let x = [1.0, 2.0, 3.0];
        let y = [3.0, 5.0, 7.0];
        let (m, b) = line_fit(&x, &y);
        assert!((m - 2.0).abs() < 1e-14 && (b - 1.0).abs() < 1e-14);
    }
}
