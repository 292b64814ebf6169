//! Constants derived from the polytropic index and the two explicit profiles.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::system::State;

/// Upper end of the admissible polytropic range (exclusive).
pub const GAMMA_MAX: f64 = 1.2;

/// All quantities fixed by the polytropic index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaParams {
    pub gamma: f64,
    /// Amplitude of the static far-field density `k y^{-2/(2-γ)}`.
    pub k: f64,
    /// Sonic point of the far-field solution.
    pub y_f: f64,
    /// Decay exponent of the tail oscillations.
    pub mu: f64,
    /// Log-frequency of the tail oscillations.
    pub nu: f64,
    /// Phase offset between the density and velocity oscillations.
    pub theta0: f64,
}

impl GammaParams {
    /// Builds the constants for `gamma` in `[1, 6/5)`.
    pub fn new(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || !(1.0..GAMMA_MAX).contains(&gamma) {
            return Err(domain(format!("gamma = {gamma} outside [1, 6/5)")));
        }
        let g = gamma;
        let two_g = 2.0 - g;
        let k = (g * (4.0 - 3.0 * g) / (2.0 * PI * two_g * two_g)).powf(1.0 / two_g);
        let y_f = g.sqrt() / two_g * ((4.0 - 3.0 * g) / (2.0 * PI)).powf((g - 1.0) / 2.0);
        let disc = -g * g - 20.0 * g + 28.0;
        let mu = (6.0 - 5.0 * g) / (2.0 * two_g);
        let nu = disc.sqrt() / (2.0 * two_g);
        let theta0 = (disc.sqrt() / (2.0 + g)).atan() + PI;
        Ok(Self { gamma, k, y_f, mu, nu, theta0 })
    }

    /// Like [`GammaParams::new`] but rejects the isothermal endpoint, which
    /// every module beyond this one needs because of `(γ-1)` factors.
    pub fn strict(gamma: f64) -> Result<Self> {
        if gamma <= 1.0 {
            return Err(domain(format!("gamma = {gamma} must exceed 1")));
        }
        Self::new(gamma)
    }

    pub(crate) fn require_strict(&self) -> Result<()> {
        if self.gamma <= 1.0 {
            Err(domain("this operation needs gamma > 1"))
        } else {
            Ok(())
        }
    }

    /// Far-field exponent `2/(2-γ)`.
    pub fn alpha(&self) -> f64 {
        2.0 / (2.0 - self.gamma)
    }

    /// Gravity coupling `4π/(4-3γ)` that appears in the reduced system.
    pub fn coupling(&self) -> f64 {
        4.0 * PI / (4.0 - 3.0 * self.gamma)
    }
}

/// Free-function form of [`GammaParams::new`].
pub fn derive_params(gamma: f64) -> Result<GammaParams> {
    GammaParams::new(gamma)
}

/// The two closed-form self-similar profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExplicitKind {
    Friedman,
    FarField,
}

impl ExplicitKind {
    pub const ALL: [ExplicitKind; 2] = [ExplicitKind::Friedman, ExplicitKind::FarField];

    pub fn name(self) -> &'static str {
        match self {
            ExplicitKind::Friedman => "friedman",
            ExplicitKind::FarField => "far-field",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// Value of an explicit solution at `y`.
pub fn explicit_solution(params: &GammaParams, kind: ExplicitKind, y: f64) -> Result<State> {
    match kind {
        ExplicitKind::Friedman => {
            if y < 0.0 {
                return Err(domain("Friedman solution needs y >= 0"));
            }
            Ok(State { rho: 1.0 / (6.0 * PI), u: -2.0 * y / 3.0 })
        }
        ExplicitKind::FarField => {
            if y <= 0.0 {
                return Err(domain("far-field density is singular at the origin"));
            }
            Ok(State { rho: params.k * y.powf(-params.alpha()), u: 0.0 })
        }
    }
}

/// Derivative `(ρ', u')` of an explicit solution at `y`.
pub fn explicit_derivative(params: &GammaParams, kind: ExplicitKind, y: f64) -> Result<(f64, f64)> {
    let s = explicit_solution(params, kind, y)?;
    Ok(match kind {
        ExplicitKind::Friedman => (0.0, -2.0 / 3.0),
        ExplicitKind::FarField => (-params.alpha() * s.rho / y, 0.0),
    })
}

/// A complex number as a plain pair; only eigenvalues need it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

/// Residue of the linearization at the origin of the far-field solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidueMatrix {
    pub matrix: [[f64; 2]; 2],
    /// Eigenvalues of the negated residue, imaginary part descending.
    pub eigenvalues: [Complex; 2],
}

pub fn residue_matrix(params: &GammaParams) -> ResidueMatrix {
    let g = params.gamma;
    let two_g = 2.0 - g;
    let k = params.k;
    let matrix = [
        [2.0, 2.0 * k / (two_g * two_g)],
        [-2.0 * two_g / k, -(3.0 * g - 2.0) / two_g],
    ];
    let trace = -(matrix[0][0] + matrix[1][1]);
    let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
    let half = trace / 2.0;
    let disc = half * half - det;
    let eigenvalues = if disc < 0.0 {
        let im = (-disc).sqrt();
        [Complex { re: half, im }, Complex { re: half, im: -im }]
    } else {
        let r = disc.sqrt();
        [Complex { re: half + r, im: 0.0 }, Complex { re: half - r, im: 0.0 }]
    };
    ResidueMatrix { matrix, eigenvalues }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isothermal_endpoint() {
        let p = GammaParams::new(1.0).unwrap();
        assert!((p.k - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!((p.y_f - 1.0).abs() < 1e-15);
        assert_eq!(p.mu, 0.5);
        assert!((p.nu - 7f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_out_of_range() {
        for g in [0.9, 1.2, 1.3, f64::NAN] {
            assert!(GammaParams::new(g).is_err());
        }
        assert!(GammaParams::strict(1.0).is_err());
    }

    #[test]
    fn far_field_origin_is_an_error() {
        let p = GammaParams::new(1.1).unwrap();
        assert!(explicit_solution(&p, ExplicitKind::FarField, 0.0).is_err());
        let f = explicit_solution(&p, ExplicitKind::Friedman, 0.0).unwrap();
        assert_eq!(f.u, 0.0);
    }

    #[test]
    fn residue_trace_and_determinant() {
        let p = GammaParams::new(1.1).unwrap();
        let r = residue_matrix(&p);
        let [l1, l2] = r.eigenvalues;
        assert!((l1.re + l2.re + 2.0 * p.mu).abs() < 1e-12);
        let prod = l1.re * l2.re - l1.im * l2.im;
        assert!((prod - (p.mu * p.mu + p.nu * p.nu)).abs() < 1e-12);
    }

    #[test]
    fn names_round_trip() {
        for k in ExplicitKind::ALL {
            assert_eq!(ExplicitKind::from_name(k.name()), Some(k));
        }
    }
}
