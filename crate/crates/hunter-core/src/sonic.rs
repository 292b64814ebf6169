//! Sonic-point conditions along the Larson-Penston-Hunter branch and the
//! normal-form parameters of the two singular points.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::params::GammaParams;

/// Taylor data of the smooth branch through the sonic point for a given `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SonicPointData {
    pub eps: f64,
    pub omega0: f64,
    pub p0: f64,
    pub y_star: f64,
    pub rho0: f64,
    pub u0: f64,
    /// `y* p'/p - 2/(2-γ)` at the sonic point, which equals `y* ρ'/ρ`.
    pub r: f64,
    /// `y* ω'` at the sonic point.
    pub w: f64,
    pub rho1: f64,
    pub u1: f64,
}

/// Characteristic parameters of a singular point in normal form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalFormParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub u: f64,
    pub kappa: f64,
}

impl NormalFormParams {
    /// Residual of `(a + bU)U + c + dU`.
    pub fn quadratic_residual(&self) -> f64 {
        (self.a + self.b * self.u) * self.u + self.c + self.d * self.u
    }

    /// True when κ sits on a non-positive integer at or below -2, where the
    /// order-by-order recursion loses solvability.
    pub fn is_resonant(&self) -> bool {
        let r = self.kappa.round();
        r <= -2.0 && (self.kappa - r).abs() < 1e-9
    }
}

fn sonic_base(params: &GammaParams, eps: f64) -> Result<(f64, f64, f64)> {
    params.require_strict()?;
    let g = params.gamma;
    let two_g = 2.0 - g;
    if !eps.is_finite() {
        return Err(domain("eps must be finite"));
    }
    let omega0 = two_g / (1.0 + eps);
    if !(omega0 > 0.0) || 1.0 + eps <= 0.0 {
        return Err(domain(format!("eps = {eps} gives a non-positive sonic velocity")));
    }
    let bracket = (4.0 - 3.0 * g) / (4.0 * PI)
        * (2.0 * omega0 * omega0 + (g - 1.0) * omega0 + two_g * (g - 1.0))
        / omega0;
    let p0 = g.powf(1.0 / two_g) / omega0.powf(2.0 / two_g) * bracket.powf(1.0 / two_g);
    let y_star = g.powf(two_g / 2.0) * p0.powf((g - 1.0) * two_g / 2.0) / omega0.powf(two_g);
    Ok((omega0, p0, y_star))
}

fn normal_form(params: &GammaParams, omega0: f64, rho0: f64, y_star: f64, eps: f64) -> Result<NormalFormParams> {
    let g = params.gamma;
    let two_g = 2.0 - g;
    let yw = y_star * omega0;
    let a = (2.0 * two_g + (g - 3.0) * (omega0 + g - 1.0)) / (4.0 * yw);
    let b = -(g + 1.0) / (4.0 * rho0);
    let c = rho0 / (4.0 * yw * yw)
        * (-(g + 3.0) * omega0 * omega0 + (-2.0 * g * g + g + 3.0) * omega0 + two_g * (g - 1.0).powi(2))
        - rho0 * rho0 / (4.0 * yw * yw) * params.coupling() * (4.0 - 3.0 * g - 2.0 * omega0);
    let d = (3.0 * (g - 1.0) + (g - 3.0) * (omega0 + g - 1.0)) / (4.0 * yw);
    let disc = (a + d) * (a + d) - 4.0 * b * c;
    if !(disc >= 0.0) {
        return Err(Error::BranchLost { eps });
    }
    let u = (-(a + d) + disc.sqrt()) / (2.0 * b);
    let apbu = a + b * u;
    if apbu.abs() < 1e-14 * (a.abs() + (b * u).abs()) {
        return Err(Error::DegenerateBranch);
    }
    Ok(NormalFormParams { a, b, c, d, u, kappa: (d + b * u) / apbu })
}

/// Sonic data on the LPH branch for `ε`, with `ω0 = (2-γ)/(1+ε)`.
pub fn solve_sonic(params: &GammaParams, eps: f64) -> Result<SonicPointData> {
    let (omega0, p0, y_star) = sonic_base(params, eps)?;
    let g = params.gamma;
    let rho0 = p0 * y_star.powf(-params.alpha());
    let u0 = y_star * (omega0 - (2.0 - g));
    let nf = normal_form(params, omega0, rho0, y_star, eps)?;
    let r = (nf.u * y_star * omega0 / rho0 - (omega0 + g - 1.0)) / omega0;
    let w = (4.0 - 3.0 * g) - 3.0 * omega0 - omega0 * r;
    Ok(SonicPointData {
        eps,
        omega0,
        p0,
        y_star,
        rho0,
        u0,
        r,
        w,
        rho1: rho0 * r / y_star,
        u1: w + u0 / y_star,
    })
}

/// Normal-form parameters at the sonic point described by `sp`.
pub fn characteristic_params_at_sonic(params: &GammaParams, sp: &SonicPointData) -> Result<NormalFormParams> {
    normal_form(params, sp.omega0, sp.rho0, sp.y_star, sp.eps)
}

/// Normal-form parameters of the regular center with density `rho_center`.
pub fn origin_params(rho_center: f64) -> Result<NormalFormParams> {
    if !(rho_center > 0.0) {
        return Err(domain("central density must be positive"));
    }
    let r = rho_center;
    Ok(NormalFormParams { a: r, b: 0.0, c: 2.0 * r, d: 2.0 * r, u: -2.0 / 3.0, kappa: 2.0 })
}

/// The quadratic satisfied by `R` on the sonic locus.
pub fn r_quadratic_residual(params: &GammaParams, omega0: f64, r: f64) -> f64 {
    let g = params.gamma;
    let w = omega0;
    -(1.0 + g) * w * w * r * r + (9.0 - 7.0 * g - 8.0 * w) * w * r - 6.0 * w * w + (8.0 - 6.0 * g) * w
        + (-3.0 * g * g + 9.0 * g - 6.0)
        + (4.0 - 3.0 * g) * (2.0 - g) * (1.0 - g) / w
}
