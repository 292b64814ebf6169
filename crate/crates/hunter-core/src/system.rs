//! The self-similar Euler-Poisson system `A(y, ρ, u) (ρ', u')ᵀ + B(y, ρ, u) = 0`
//! and its changes of variables.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::OdeSystem;
use crate::params::GammaParams;

/// Absolute threshold on the sonic discriminant below which the right-hand
/// side refuses to divide.
pub const DEFAULT_TOL_SONIC: f64 = 1e-9;

/// Self-similar density and velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct State {
    pub rho: f64,
    pub u: f64,
}

/// Far-field adapted variables `p = y^{2/(2-γ)} ρ`, `w = u/y + (2-γ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PwState {
    pub p: f64,
    pub w: f64,
}

/// Self-similar enthalpy `γ/(γ-1) ρ^{γ-1}` paired with the velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnthalpyState {
    pub w_enth: f64,
    pub u: f64,
}

pub type Mat2 = [[f64; 2]; 2];

/// Solves `m x = rhs` by Cramer's rule, returning `None` for a zero determinant.
pub fn solve2(m: &Mat2, rhs: [f64; 2]) -> Option<[f64; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([
        (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det,
        (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det,
    ])
}

/// Coefficient matrix `A` and forcing `B` at `(y, s)`.
pub fn coefficients(params: &GammaParams, y: f64, s: State) -> (Mat2, [f64; 2]) {
    let g = params.gamma;
    let c = s.u + (2.0 - g) * y;
    let a = [[c, s.rho], [g * s.rho.powf(g - 2.0), c]];
    let b = [
        2.0 * s.rho * (s.u + y) / y,
        (g - 1.0) * s.u + params.coupling() * s.rho * c,
    ];
    (a, b)
}

/// `D = (u + (2-γ)y)² - γ ρ^{γ-1}`, the determinant of `A`.
pub fn sonic_discriminant(params: &GammaParams, y: f64, s: State) -> f64 {
    let c = s.u + (2.0 - params.gamma) * y;
    c * c - params.gamma * s.rho.powf(params.gamma - 1.0)
}

/// `(ρ', u')` away from sonic points, with the default sonic tolerance.
pub fn rhs_rho_u(params: &GammaParams, y: f64, s: State) -> Result<(f64, f64)> {
    rhs_rho_u_with_tol(params, y, s, DEFAULT_TOL_SONIC)
}

pub fn rhs_rho_u_with_tol(params: &GammaParams, y: f64, s: State, tol_sonic: f64) -> Result<(f64, f64)> {
    if y <= 0.0 {
        return Err(Error::OriginSingular(y));
    }
    let d = sonic_discriminant(params, y, s);
    if !(d.abs() > tol_sonic) {
        return Err(Error::SonicSingular { y, discriminant: d });
    }
    let (a, b) = coefficients(params, y, s);
    let x = solve2(&a, [-b[0], -b[1]]).ok_or(Error::SonicSingular { y, discriminant: d })?;
    Ok((x[0], x[1]))
}

/// `A ds + B`, which vanishes exactly when `ds` solves the system at `(y, s)`.
pub fn residual(params: &GammaParams, y: f64, s: State, ds: (f64, f64)) -> (f64, f64) {
    let (a, b) = coefficients(params, y, s);
    (
        a[0][0] * ds.0 + a[0][1] * ds.1 + b[0],
        a[1][0] * ds.0 + a[1][1] * ds.1 + b[1],
    )
}

pub fn to_pw(params: &GammaParams, y: f64, s: State) -> PwState {
    PwState {
        p: y.powf(params.alpha()) * s.rho,
        w: s.u / y + (2.0 - params.gamma),
    }
}

pub fn from_pw(params: &GammaParams, z: f64, s: PwState) -> State {
    State {
        rho: s.p * z.powf(-params.alpha()),
        u: z * (s.w - (2.0 - params.gamma)),
    }
}

/// `(p', w')` for the system written directly in the far-field variables.
pub fn rhs_pw(params: &GammaParams, z: f64, s: PwState) -> Result<(f64, f64)> {
    if z <= 0.0 {
        return Err(Error::OriginSingular(z));
    }
    let g = params.gamma;
    let two_g = 2.0 - g;
    let (p, w) = (s.p, s.w);
    let za = z.powf(-params.alpha());
    let e = [
        [w * z, p * z],
        [g / (z.powf(g / two_g) * p.powf(two_g)), w * z],
    ];
    let f = [
        (4.0 - 3.0 * g) / two_g * p * (w - two_g),
        w * (w - two_g) + (g - 1.0) * (w - two_g)
            + za * (params.coupling() * p * w - 2.0 * g / two_g * p.powf(g - 1.0)),
    ];
    // det E equals the sonic discriminant expressed in these variables.
    let d = w * w * z * z - g * p.powf(g - 1.0) * z.powf(2.0 - params.alpha());
    if !(d.abs() > DEFAULT_TOL_SONIC) {
        return Err(Error::SonicSingular { y: z, discriminant: d });
    }
    let x = solve2(&e, [-f[0], -f[1]]).ok_or(Error::SonicSingular { y: z, discriminant: d })?;
    Ok((x[0], x[1]))
}

pub fn to_enthalpy(params: &GammaParams, s: State) -> EnthalpyState {
    let g = params.gamma;
    EnthalpyState { w_enth: g / (g - 1.0) * s.rho.powf(g - 1.0), u: s.u }
}

pub fn from_enthalpy(params: &GammaParams, s: EnthalpyState) -> State {
    let g = params.gamma;
    State { rho: ((g - 1.0) / g * s.w_enth).powf(1.0 / (g - 1.0)), u: s.u }
}

/// The system in `y` with state `(ρ, u)`.
#[derive(Debug, Clone, Copy)]
pub struct RhoUSystem {
    pub params: GammaParams,
}

impl OdeSystem<2> for RhoUSystem {
    fn rhs(&self, y: f64, x: &[f64; 2]) -> Result<[f64; 2]> {
        let (dr, du) = rhs_rho_u(&self.params, y, State { rho: x[0], u: x[1] })?;
        Ok([dr, du])
    }
}

/// The system in `y` with state `(ln ρ, u/y)`, meant to be stepped in `ln y`.
///
/// Densities span twenty decades between the sonic point and a resolved
/// core, and `u` shrinks linearly toward the origin. These variables keep
/// both components of order one so a mixed error norm stays meaningful.
#[derive(Debug, Clone, Copy)]
pub struct ScaledRhoUSystem {
    pub params: GammaParams,
}

impl ScaledRhoUSystem {
    pub fn to_state(y: f64, x: &[f64; 2]) -> State {
        State { rho: x[0].exp(), u: x[1] * y }
    }

    pub fn from_state(y: f64, s: State) -> [f64; 2] {
        [s.rho.ln(), s.u / y]
    }
}

impl OdeSystem<2> for ScaledRhoUSystem {
    fn rhs(&self, y: f64, x: &[f64; 2]) -> Result<[f64; 2]> {
        let st = Self::to_state(y, x);
        let (dr, du) = rhs_rho_u(&self.params, y, st)?;
        Ok([dr / st.rho, (du - x[1]) / y])
    }
}

/// The system in `z` with state `(p, w)`.
#[derive(Debug, Clone, Copy)]
pub struct PwSystem {
    pub params: GammaParams,
}

impl OdeSystem<2> for PwSystem {
    fn rhs(&self, z: f64, x: &[f64; 2]) -> Result<[f64; 2]> {
        let (dp, dw) = rhs_pw(&self.params, z, PwState { p: x[0], w: x[1] })?;
        Ok([dp, dw])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{explicit_derivative, explicit_solution, ExplicitKind};

    #[test]
    fn friedman_derivative() {
        let p = GammaParams::new(1.1).unwrap();
        for y in [0.1, 1.0, 3.0] {
            let s = explicit_solution(&p, ExplicitKind::Friedman, y).unwrap();
            let (dr, du) = rhs_rho_u(&p, y, s).unwrap();
            assert!(dr.abs() < 1e-14);
            assert!((du + 2.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn far_field_pw_is_stationary() {
        let p = GammaParams::new(1.1).unwrap();
        for z in [0.3, 2.0, 7.0] {
            let s = explicit_solution(&p, ExplicitKind::FarField, z).unwrap();
            let pw = to_pw(&p, z, s);
            assert!((pw.p - p.k).abs() < 1e-14);
            assert!((pw.w - 0.9).abs() < 1e-15);
            let (dp, dw) = rhs_pw(&p, z, pw).unwrap();
            assert!(dp.abs() < 1e-12 && dw.abs() < 1e-12, "{dp} {dw}");
        }
    }

    #[test]
    fn sonic_point_is_rejected() {
        let p = GammaParams::new(1.1).unwrap();
        let s = explicit_solution(&p, ExplicitKind::FarField, p.y_f).unwrap();
        assert!(sonic_discriminant(&p, p.y_f, s).abs() < 1e-14);
        assert!(matches!(rhs_rho_u(&p, p.y_f, s), Err(Error::SonicSingular { .. })));
        assert!(matches!(rhs_rho_u(&p, 0.0, s), Err(Error::OriginSingular(_))));
    }

    #[test]
    fn residual_perturbation_scales_with_a11() {
        let p = GammaParams::new(1.1).unwrap();
        let y = 1.3;
        let s = State { rho: 0.2, u: -0.1 };
        let ds = rhs_rho_u(&p, y, s).unwrap();
        let (a, _) = coefficients(&p, y, s);
        let delta = 1e-3;
        let (r1, r2) = residual(&p, y, s, (ds.0 + delta, ds.1));
        assert!((r1 - a[0][0] * delta).abs() < 1e-14);
        assert!((r2 - a[1][0] * delta).abs() < 1e-14);
    }

    #[test]
    fn far_field_closed_form_derivative() {
        let p = GammaParams::new(1.1).unwrap();
        let s = explicit_solution(&p, ExplicitKind::FarField, 2.0).unwrap();
        let (dr, du) = rhs_rho_u(&p, 2.0, s).unwrap();
        let (er, _) = explicit_derivative(&p, ExplicitKind::FarField, 2.0).unwrap();
        let expected = -(2.0 / 0.9) * p.k * 2f64.powf(-2.0 / 0.9 - 1.0);
        assert!((er - expected).abs() < 1e-15);
        assert!((dr - expected).abs() < 1e-13 * expected.abs());
        assert!(du.abs() < 1e-14);
    }
}
