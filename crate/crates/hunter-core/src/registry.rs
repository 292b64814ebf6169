//! Lookup of right-hand sides and explicit profiles by name, for callers
//! such as the command line that select them from text.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::integrate::{integrate, IntegrateOptions, IntegrationResult, OdeSystem};
use crate::linear::LinearizedSystem;
use crate::params::{ExplicitKind, GammaParams};
use crate::system::{from_pw, to_pw, PwState, PwSystem, RhoUSystem, ScaledRhoUSystem, State};

/// The right-hand sides an integration can be run with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RhsSelector {
    /// `(ρ, u)` stepped in `y`.
    RhoU,
    /// `(ln ρ, u/y)` stepped in `ln y`.
    ScaledRhoU,
    /// `(p, w)` stepped in `z`.
    Pw,
    /// The exterior linearization, stepped in `ln z`.
    Linearized,
}

impl RhsSelector {
    pub const ALL: [RhsSelector; 4] =
        [RhsSelector::RhoU, RhsSelector::ScaledRhoU, RhsSelector::Pw, RhsSelector::Linearized];

    pub fn name(self) -> &'static str {
        match self {
            RhsSelector::RhoU => "rho-u",
            RhsSelector::ScaledRhoU => "scaled-rho-u",
            RhsSelector::Pw => "pw",
            RhsSelector::Linearized => "linearized",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    /// The system itself, boxed so callers can hold any of them.
    pub fn system(self, params: &GammaParams) -> Box<dyn OdeSystem<2> + Send + Sync> {
        let params = *params;
        match self {
            RhsSelector::RhoU => Box::new(RhoUSystem { params }),
            RhsSelector::ScaledRhoU => Box::new(ScaledRhoUSystem { params }),
            RhsSelector::Pw => Box::new(PwSystem { params }),
            RhsSelector::Linearized => Box::new(LinearizedSystem { params }),
        }
    }

    fn log_stepping(self) -> bool {
        matches!(self, RhsSelector::ScaledRhoU | RhsSelector::Linearized)
    }

    /// Packs `(ρ, u)` at `y` into this system's variables. The linearized
    /// system has no such packing; its state is passed through as is.
    pub fn pack(self, params: &GammaParams, y: f64, s: State) -> [f64; 2] {
        match self {
            RhsSelector::RhoU | RhsSelector::Linearized => [s.rho, s.u],
            RhsSelector::ScaledRhoU => ScaledRhoUSystem::from_state(y, s),
            RhsSelector::Pw => {
                let pw = to_pw(params, y, s);
                [pw.p, pw.w]
            }
        }
    }

    /// Inverse of [`RhsSelector::pack`].
    pub fn unpack(self, params: &GammaParams, y: f64, x: &[f64; 2]) -> State {
        match self {
            RhsSelector::RhoU | RhsSelector::Linearized => State { rho: x[0], u: x[1] },
            RhsSelector::ScaledRhoU => ScaledRhoUSystem::to_state(y, x),
            RhsSelector::Pw => from_pw(params, y, PwState { p: x[0], w: x[1] }),
        }
    }
}

/// Integrates the selected system from `(y0, s0)` to `y1`.
///
/// The result is in the selected system's own variables; use
/// [`RhsSelector::unpack`] to read `(ρ, u)` back.
pub fn integrate_selected(
    params: &GammaParams,
    selector: RhsSelector,
    y0: f64,
    s0: State,
    y1: f64,
    tol: f64,
) -> Result<IntegrationResult<2>> {
    if !(tol > 0.0) {
        return Err(domain("tolerance must be positive"));
    }
    let mut opts = IntegrateOptions::with_tol(tol);
    if selector.log_stepping() {
        opts = opts.log();
    }
    let sys = selector.system(params);
    integrate(&sys, y0, selector.pack(params, y0, s0), y1, &opts, &[])
}

/// Explicit profiles by name.
pub fn explicit_by_name(name: &str) -> Result<ExplicitKind> {
    ExplicitKind::from_name(name).ok_or_else(|| {
        let known: Vec<&str> = ExplicitKind::ALL.iter().map(|k| k.name()).collect();
        domain(format!("unknown explicit solution '{name}' (known: {})", known.join(", ")))
    })
}

/// Right-hand sides by name.
pub fn rhs_by_name(name: &str) -> Result<RhsSelector> {
    RhsSelector::from_name(name).ok_or_else(|| {
        let known: Vec<&str> = RhsSelector::ALL.iter().map(|k| k.name()).collect();
        domain(format!("unknown system '{name}' (known: {})", known.join(", ")))
    })
}
