//! Shooting from the sonic point toward the center, the ε-scan that finds
//! Hunter-type solutions, and assembly of their global profiles.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::fit::line_fit;
use crate::integrate::{
    integrate_raw, Event, EventKind, IntegrateOptions, IntegrationResult, Termination, DENSITY_FLOOR,
};
use crate::laneemden::LaneEmdenSolution;
use crate::params::GammaParams;
use crate::series::{taylor_at_origin, taylor_at_sonic, TaylorSolution, DEFAULT_ORDER};
use crate::sonic::solve_sonic;
use crate::system::{sonic_discriminant, ScaledRhoUSystem, State};

/// Launch offset from the sonic point, as a fraction of `y_f`.
pub const LAUNCH_OFFSET: f64 = 1e-3;
/// `|u/y + 2/3|` beyond which the trajectory has left the regular-center
/// branch for good.
pub const DEPARTURE: f64 = 10.0;
pub const DEFAULT_Y_MIN: f64 = 1e-10;
pub const DEFAULT_Y_MAX: f64 = 1e3;
pub const DEFAULT_TOL: f64 = 1e-11;
pub const DEFAULT_SCAN: (f64, f64) = (1e-6, 0.5);
pub const DEFAULT_GRID_PER_DECADE: usize = 40;
/// Relative bracket width at which bisection stops.
pub const BISECTION_WIDTH: f64 = 1e-12;
/// A shot has probed the regular core when it stays on the center branch
/// down to this fraction of the core scale `λ`.
pub const CORE_RESOLUTION: f64 = 0.01;
/// Relative gluing mismatch tolerated between series and trajectories.
pub const GLUE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ShotTermination {
    ReachedYmin,
    DensityFloor,
    Blowup,
    SonicCollision,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShotDiagnostics {
    pub eps: f64,
    /// `u(y_min)/y_min + 2/3`, present only when the shot reached `y_min`.
    pub defect: Option<f64>,
    /// Signed value of `u/y + 2/3` where the shot stopped. Equals the defect
    /// on completed shots and `±10` on departures, so it changes sign
    /// continuously across genuine roots and can drive bisection everywhere.
    pub scan_value: f64,
    pub termination: ShotTermination,
    pub y_end: f64,
    pub rho_end: f64,
    /// `y_end / λ` with `λ = ρ_end^{-(2-γ)/2}`: how deep inside its own core
    /// the shot was still on the center branch.
    pub core_depth: f64,
    pub steps: usize,
}

impl ShotDiagnostics {
    /// True when the shot followed the regular center deep into its core,
    /// either to `y_min` or until the unstable mode took over.
    pub fn probed_core(&self) -> bool {
        matches!(self.termination, ShotTermination::ReachedYmin | ShotTermination::Blowup)
            && self.core_depth <= CORE_RESOLUTION
    }
}

struct Launch {
    taylor: TaylorSolution,
    y_star: f64,
    delta: f64,
}

fn launch(params: &GammaParams, eps: f64) -> Result<Launch> {
    let sp = solve_sonic(params, eps)?;
    let taylor = taylor_at_sonic(params, &sp, DEFAULT_ORDER)?;
    let delta = LAUNCH_OFFSET * params.y_f;
    Ok(Launch { taylor, y_star: sp.y_star, delta })
}

fn options(tol: f64) -> IntegrateOptions {
    IntegrateOptions { rtol: tol, atol: tol, ..IntegrateOptions::default() }.log()
}

fn trajectory(
    params: &GammaParams,
    l: &Launch,
    y_end: f64,
    tol: f64,
) -> Result<IntegrationResult<2>> {
    let inward = y_end < l.y_star;
    let y0 = if inward { l.y_star - l.delta } else { l.y_star + l.delta };
    let (s0, _) = l.taylor.evaluate(y0)?;
    let x0 = ScaledRhoUSystem::from_state(y0, s0);
    let mut events = vec![Event::new(EventKind::DensityFloor, true, |_, x: &[f64; 2]| x[0] - DENSITY_FLOOR.ln())];
    if inward {
        events.push(Event::new(EventKind::Blowup, true, |_, x: &[f64; 2]| (x[1] + 2.0 / 3.0).abs() - DEPARTURE));
    }
    integrate_raw(&ScaledRhoUSystem { params: *params }, y0, x0, y_end, &options(tol), &events)
}

fn classify(params: &GammaParams, r: &IntegrationResult<2>) -> ShotTermination {
    match r.termination {
        Termination::Completed => ShotTermination::ReachedYmin,
        Termination::Event(EventKind::DensityFloor) => ShotTermination::DensityFloor,
        Termination::StepUnderflow { .. } => {
            let (y, x) = r.last();
            let s = ScaledRhoUSystem::to_state(y, &x);
            let c = s.u + (2.0 - params.gamma) * y;
            if sonic_discriminant(params, y, s).abs() < 1e-6 * c * c {
                ShotTermination::SonicCollision
            } else {
                ShotTermination::Blowup
            }
        }
        _ => ShotTermination::Blowup,
    }
}

/// Launches from the sonic series at `y* - δ` and integrates toward `y_min`.
///
/// Integrator events are reported through the termination kind; only
/// failures to set up the launch are errors.
pub fn shoot_inward(params: &GammaParams, eps: f64, y_min: f64, tol: f64) -> Result<ShotDiagnostics> {
    if !(y_min > 0.0 && y_min <= 0.1 * params.y_f) {
        return Err(domain(format!("y_min = {y_min} must lie in (0, 0.1 y_f]")));
    }
    let l = launch(params, eps)?;
    let r = trajectory(params, &l, y_min, tol)?;
    let termination = classify(params, &r);
    let (y_end, x) = r.last();
    let value = x[1] + 2.0 / 3.0;
    Ok(ShotDiagnostics {
        eps,
        defect: (termination == ShotTermination::ReachedYmin).then_some(value),
        scan_value: value,
        termination,
        y_end,
        rho_end: x[0].exp(),
        core_depth: y_end * (x[0] * (2.0 - params.gamma) / 2.0).exp(),
        steps: r.samples.len() - 1,
    })
}

/// One sample of an assembled profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub y: f64,
    pub rho: f64,
    pub u: f64,
    /// `y^{2/(2-γ)} ρ`.
    pub p: f64,
    /// `u/y + 2 - γ`.
    pub w: f64,
    /// Sonic discriminant.
    pub d: f64,
}

impl ProfilePoint {
    fn new(params: &GammaParams, y: f64, s: State) -> Self {
        ProfilePoint {
            y,
            rho: s.rho,
            u: s.u,
            p: y.powf(params.alpha()) * s.rho,
            w: s.u / y + 2.0 - params.gamma,
            d: sonic_discriminant(params, y, s),
        }
    }
}

/// Decay constants over `[y_f, Y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundConstants {
    /// `sup y^{2/(2-γ)} ρ`.
    pub density: f64,
    /// `sup y^{(γ-1)/(2-γ)} |u|`.
    pub velocity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HunterSolution {
    /// Crossing count minus one.
    pub index: usize,
    pub eps: f64,
    /// Positive ε, the sign the existence theory constructs.
    pub canonical: bool,
    pub y_star: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub crossings: usize,
    pub sonic_points: usize,
    pub central_density: f64,
    /// `ρ(y_min)^{-(2-γ)/2}`, the scale of the Lane-Emden core.
    pub lambda_est: f64,
    pub defect: f64,
    pub bounds: BoundConstants,
    /// `p(Y_max)/k`.
    pub far_field_ratio: f64,
    pub positive: bool,
    pub exterior_monotone: bool,
    pub glue_mismatch: f64,
    /// Invariants that failed, by name. Empty for a clean solution.
    pub violations: Vec<String>,
    pub profile: Vec<ProfilePoint>,
}

/// Samples `t` on a log grid of `per_decade` points per decade.
fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let n = ((hi / lo).log10() * per_decade as f64).ceil().max(1.0) as usize;
    (0..=n).map(|i| if i == n { hi } else { lo * (hi / lo).powf(i as f64 / n as f64) }).collect()
}

fn glue_mismatch(l: &Launch, r: &IntegrationResult<2>, inward: bool) -> Result<f64> {
    // Compare the trajectory with the series a few offsets further out,
    // still well inside the trust region.
    let y = if inward { l.y_star - 4.0 * l.delta } else { l.y_star + 4.0 * l.delta };
    let (s, _) = l.taylor.evaluate(y)?;
    let x = r.eval(y).ok_or_else(|| domain("trajectory does not reach the gluing point"))?;
    let t = ScaledRhoUSystem::to_state(y, &x);
    Ok(((t.rho - s.rho).abs() / s.rho).max((t.u - s.u).abs() / y))
}

/// Regular-center series that replaces the trajectory deep in the core.
struct CorePatch {
    taylor: TaylorSolution,
    y_cut: f64,
    mismatch: f64,
}

/// Matches the center series to a trajectory that followed the regular
/// center deep into its core.
///
/// Even at a refined root the unstable mode of the center grows back from
/// rounding error, far inside the core where the series is accurate to
/// rounding. The cut is the core sample where series and trajectory agree
/// best, usually the outermost one since the unstable mode is smallest
/// there. Returns
/// `None` when the trajectory never got deep enough to use the series, and
/// an error when it departed before that.
fn core_patch(params: &GammaParams, inner: &IntegrationResult<2>) -> Result<Option<CorePatch>> {
    let g = params.gamma;
    let (y_end, x_end) = inner.last();
    let lambda = (-x_end[0] * (2.0 - g) / 2.0).exp();
    if y_end > CORE_RESOLUTION * lambda {
        if inner.termination == Termination::Completed {
            return Ok(None);
        }
        return Err(domain(format!("departure at y = {y_end:e} outside the core of scale {lambda:e}")));
    }
    let candidates: Vec<(f64, [f64; 2])> =
        inner.samples.iter().filter(|(y, _)| *y < 0.1 * lambda).copied().collect();
    if candidates.is_empty() {
        return Err(domain("no trajectory samples inside the core"));
    }
    let stride = candidates.len().div_ceil(24);
    let mut best: Option<CorePatch> = None;
    for &(y_cut, x_cut) in candidates.iter().step_by(stride) {
        let Ok(patch) = match_center_series(params, y_cut, ScaledRhoUSystem::to_state(y_cut, &x_cut)) else {
            continue;
        };
        if best.as_ref().map_or(true, |b| patch.mismatch < b.mismatch) {
            best = Some(patch);
        }
    }
    best.map(Some).ok_or_else(|| domain("center series could not be matched inside the core"))
}

/// Tunes the central density so the center series has density `target.rho`
/// at `y_cut`, and reports the remaining mismatch.
fn match_center_series(params: &GammaParams, y_cut: f64, target: State) -> Result<CorePatch> {
    let mut rho_c = target.rho;
    let mut taylor = taylor_at_origin(params, rho_c, DEFAULT_ORDER)?;
    for _ in 0..50 {
        let (s, _) = taylor.evaluate(y_cut)?;
        let next = rho_c * target.rho / s.rho;
        let done = (next - rho_c).abs() <= 1e-15 * rho_c;
        rho_c = next;
        taylor = taylor_at_origin(params, rho_c, DEFAULT_ORDER)?;
        if done {
            break;
        }
    }
    let (s, _) = taylor.evaluate(y_cut)?;
    let mismatch = ((s.rho - target.rho).abs() / target.rho).max((s.u - target.u).abs() / y_cut);
    Ok(CorePatch { taylor, y_cut, mismatch })
}

/// Builds the global profile through the sonic point of `eps`.
pub fn assemble_profile(
    params: &GammaParams,
    eps: f64,
    y_min: f64,
    y_max: f64,
    tol: f64,
    grid_per_decade: usize,
) -> Result<HunterSolution> {
    params.require_strict()?;
    if !(y_min > 0.0 && y_max > 2.0 * params.y_f && grid_per_decade > 0) {
        return Err(domain("assembly needs 0 < y_min, y_max > 2 y_f and a positive grid density"));
    }
    let l = launch(params, eps)?;
    let inner = trajectory(params, &l, y_min, tol)?;
    let outer = trajectory(params, &l, y_max, tol)?;
    if outer.termination != Termination::Completed {
        return Err(domain(format!("outward trajectory stopped early at y = {:e}", outer.last().0)));
    }
    let core = match inner.termination {
        Termination::Completed | Termination::Event(EventKind::Blowup) => core_patch(params, &inner)?,
        _ => return Err(domain(format!("inward trajectory stopped early at y = {:e}", inner.last().0))),
    };
    let mut glue = glue_mismatch(&l, &inner, true)?.max(glue_mismatch(&l, &outer, false)?);
    if let Some(c) = &core {
        glue = glue.max(c.mismatch);
    }
    if glue > GLUE_TOLERANCE {
        return Err(Error::GlueMismatch { mismatch: glue });
    }

    let mut profile = Vec::new();
    let mut pushed_star = false;
    for y in log_grid(y_min, y_max, grid_per_decade) {
        if !pushed_star && y >= l.y_star {
            profile.push(ProfilePoint::new(params, l.y_star, l.taylor.evaluate(l.y_star)?.0));
            pushed_star = true;
            if y == l.y_star {
                continue;
            }
        }
        let s = match &core {
            Some(c) if y < c.y_cut => c.taylor.evaluate(y)?.0,
            _ if (y - l.y_star).abs() <= l.delta => l.taylor.evaluate(y)?.0,
            _ => {
                let r = if y < l.y_star { &inner } else { &outer };
                let x = r.eval(y).ok_or_else(|| domain(format!("no trajectory covers y = {y:e}")))?;
                ScaledRhoUSystem::to_state(y, &x)
            }
        };
        profile.push(ProfilePoint::new(params, y, s));
    }

    let g = params.gamma;
    let scale_d = |p: &ProfilePoint| (p.u + (2.0 - g) * p.y).powi(2) + g * p.rho.powf(g - 1.0);
    let sig: Vec<i32> = profile
        .iter()
        .filter(|p| p.d.abs() > 1e-9 * scale_d(p))
        .map(|p| p.d.signum() as i32)
        .collect();
    let sonic_points = sig.windows(2).filter(|w| w[0] != w[1]).count();
    let d_signs_ok = profile
        .iter()
        .filter(|p| (p.y - l.y_star).abs() > 1e-9 * l.y_star)
        .all(|p| (p.d < 0.0) == (p.y < l.y_star));
    let positive = profile.iter().all(|p| p.rho > 0.0 && p.rho.is_finite());
    let exterior: Vec<&ProfilePoint> = profile.iter().filter(|p| p.y > l.y_star).collect();
    let exterior_monotone =
        exterior.windows(2).all(|w| w[1].u + (2.0 - g) * w[1].y > w[0].u + (2.0 - g) * w[0].y);
    let bounds = bound_constants(params, &profile);
    let crossings = count_farfield_crossings(params, &profile)?;
    let first = profile[0];
    let last = profile[profile.len() - 1];
    let central_density = first.rho;
    let lambda_est = central_density.powf(-(2.0 - g) / 2.0);

    let mut violations = Vec::new();
    if sonic_points != 1 || !d_signs_ok {
        violations.push("single sonic point with D < 0 inside and D > 0 outside".to_string());
    }
    if !(l.y_star > 0.0 && l.y_star < 2.0 * params.y_f) {
        violations.push("sonic point in (0, 2 y_f)".to_string());
    }
    if !positive {
        violations.push("positive density".to_string());
    }
    if !exterior_monotone {
        violations.push("exterior monotonicity of u + (2-γ)y".to_string());
    }
    if !(bounds.density.is_finite() && bounds.velocity.is_finite()) {
        violations.push("finite decay bounds".to_string());
    }
    if y_min > CORE_RESOLUTION * lambda_est {
        violations.push("core resolved at y_min".to_string());
    }
    Ok(HunterSolution {
        index: crossings.saturating_sub(1),
        eps,
        canonical: eps > 0.0,
        y_star: l.y_star,
        y_min,
        y_max,
        crossings,
        sonic_points,
        central_density,
        lambda_est,
        defect: first.u / first.y + 2.0 / 3.0,
        bounds,
        far_field_ratio: last.p / params.k,
        positive,
        exterior_monotone,
        glue_mismatch: glue,
        violations,
        profile,
    })
}

/// `sup y^{2/(2-γ)} ρ` and `sup y^{(γ-1)/(2-γ)} |u|` over `[y_f, 10³ y_f]`
/// intersected with the profile.
pub fn bound_constants(params: &GammaParams, profile: &[ProfilePoint]) -> BoundConstants {
    let g = params.gamma;
    let e = (g - 1.0) / (2.0 - g);
    profile
        .iter()
        .filter(|p| p.y >= params.y_f && p.y <= 1e3 * params.y_f * (1.0 + 1e-12))
        .fold(BoundConstants { density: 0.0, velocity: 0.0 }, |b, p| BoundConstants {
            density: b.density.max(p.p),
            velocity: b.velocity.max(p.y.powf(e) * p.u.abs()),
        })
}

/// Sign changes of `y^{2/(2-γ)} ρ - k` along the profile.
///
/// Values within `1e-12 k` of zero count as zero. A profile that is zero
/// everywhere has no crossings; a zero where the slope in `y` is below
/// `1e-8` is a tangency and cannot be counted reliably.
pub fn count_farfield_crossings(params: &GammaParams, profile: &[ProfilePoint]) -> Result<usize> {
    let k = params.k;
    let f: Vec<(f64, f64)> = profile.iter().map(|p| (p.y, p.p - k)).collect();
    let zero = 1e-12 * k;
    let nonzero: Vec<(usize, f64)> = f.iter().enumerate().filter(|(_, v)| v.1.abs() > zero).map(|(i, v)| (i, v.1)).collect();
    let mut count = 0;
    for w in nonzero.windows(2) {
        let ((i, a), (j, b)) = (w[0], w[1]);
        if a.signum() == b.signum() {
            if j > i + 1 {
                // Touched zero between two samples of equal sign.
                return Err(Error::AmbiguousCrossing { y: f[i + 1].0 });
            }
            continue;
        }
        let slope = (b - a) / (f[j].0 - f[i].0);
        if !(slope.abs() > 1e-8) {
            return Err(Error::AmbiguousCrossing { y: f[i].0 });
        }
        count += 1;
    }
    Ok(count)
}

/// Result of a full ε-scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HunterScan {
    pub solutions: Vec<HunterSolution>,
    /// Refined brackets discarded as spurious, with the reason.
    pub rejected: Vec<(f64, String)>,
    pub shots: usize,
}

/// Scan and refinement settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanConfig {
    pub eps_lo: f64,
    pub eps_hi: f64,
    pub grid_per_decade: usize,
    /// `y_min` in units of `y_f`.
    pub y_min: f64,
    /// `Y_max` in units of `y_f`.
    pub y_max: f64,
    pub tol: f64,
    /// Profile samples per decade.
    pub profile_per_decade: usize,
    /// Worker threads for the scan; `0` uses the rayon default. Left out
    /// of serialized output, which must not depend on the machine.
    #[serde(skip)]
    pub threads: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            eps_lo: DEFAULT_SCAN.0,
            eps_hi: DEFAULT_SCAN.1,
            grid_per_decade: DEFAULT_GRID_PER_DECADE,
            y_min: DEFAULT_Y_MIN,
            y_max: DEFAULT_Y_MAX,
            tol: DEFAULT_TOL,
            profile_per_decade: DEFAULT_GRID_PER_DECADE,
            threads: 0,
        }
    }
}

fn bisect(params: &GammaParams, mut a: ShotDiagnostics, mut b: ShotDiagnostics, y_min: f64, tol: f64) -> Result<(ShotDiagnostics, ShotDiagnostics)> {
    while (b.eps - a.eps).abs() > BISECTION_WIDTH * a.eps.abs().max(b.eps.abs()) {
        let m = shoot_inward(params, 0.5 * (a.eps + b.eps), y_min, tol)?;
        if m.scan_value.signum() == a.scan_value.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    Ok((a, b))
}

/// Scans `±[eps_lo, eps_hi]` for sign changes of the shooting functional,
/// refines each by bisection, and assembles the genuine roots.
///
/// Solutions come back sorted by decreasing `|ε|`.
pub fn find_hunter(params: &GammaParams, cfg: &ScanConfig) -> Result<HunterScan> {
    params.require_strict()?;
    if !(cfg.eps_lo > 0.0 && cfg.eps_hi.is_finite() && cfg.grid_per_decade > 0) {
        return Err(domain("scan needs 0 < eps_lo, a finite eps_hi and a positive grid density"));
    }
    if cfg.eps_lo >= cfg.eps_hi {
        return Ok(HunterScan { solutions: Vec::new(), rejected: Vec::new(), shots: 0 });
    }
    let y_min = cfg.y_min * params.y_f;
    let mut grid = log_grid(cfg.eps_lo, cfg.eps_hi, cfg.grid_per_decade);
    let negatives: Vec<f64> = grid.iter().rev().map(|e| -e).collect();
    grid.splice(0..0, negatives);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| domain(e.to_string()))?;
    let shots: Vec<Option<ShotDiagnostics>> = pool.install(|| {
        use rayon::prelude::*;
        grid.par_iter().map(|&e| shoot_inward(params, e, y_min, cfg.tol).ok()).collect()
    });
    let mut brackets = Vec::new();
    for w in shots.windows(2) {
        if let (Some(a), Some(b)) = (w[0], w[1]) {
            if a.eps.signum() == b.eps.signum() && a.scan_value.signum() != b.scan_value.signum() {
                brackets.push((a, b));
            }
        }
    }
    let refined: Vec<Result<std::result::Result<HunterSolution, (f64, String)>>> = pool.install(|| {
        use rayon::prelude::*;
        brackets
            .par_iter()
            .map(|&(a, b)| {
                let (a, b) = bisect(params, a, b, y_min, cfg.tol)?;
                let eps = 0.5 * (a.eps + b.eps);
                if !(a.probed_core() && b.probed_core()) {
                    return Ok(Err((eps, "sign switch without a regular core".to_string())));
                }
                match assemble_profile(params, eps, y_min, cfg.y_max * params.y_f, cfg.tol, cfg.profile_per_decade) {
                    Ok(sol) => Ok(Ok(sol)),
                    Err(e) => Ok(Err((eps, e.to_string()))),
                }
            })
            .collect()
    });
    let mut solutions = Vec::new();
    let mut rejected = Vec::new();
    for r in refined {
        match r? {
            Ok(s) => solutions.push(s),
            Err(x) => rejected.push(x),
        }
    }
    solutions.sort_by(|a, b| b.eps.abs().total_cmp(&a.eps.abs()));
    Ok(HunterScan { solutions, rejected, shots: grid.len() })
}

/// Slope of `ln|ε_i|` against the index, over the given solutions.
pub fn eps_regression_slope(solutions: &[HunterSolution]) -> Option<f64> {
    if solutions.len() < 2 {
        return None;
    }
    let i: Vec<f64> = solutions.iter().map(|s| s.index as f64).collect();
    let e: Vec<f64> = solutions.iter().map(|s| s.eps.abs().ln()).collect();
    Some(line_fit(&i, &e).0)
}

/// The asymptotic prediction `-π μ / ν` for [`eps_regression_slope`].
pub fn predicted_slope(params: &GammaParams) -> f64 {
    -std::f64::consts::PI * params.mu / params.nu
}

/// Best scaled Lane-Emden fit to the core of `sol`.
///
/// Returns `(λ, sup relative density difference)` over `[y_min, λ_est/2]`.
pub fn interior_le_mismatch(params: &GammaParams, sol: &HunterSolution, le: &LaneEmdenSolution) -> Result<(f64, f64)> {
    let hi = 0.5 * sol.lambda_est;
    if !(sol.y_min < hi) {
        return Err(domain("core window is empty"));
    }
    let pts: Vec<&ProfilePoint> = sol.profile.iter().filter(|p| p.y <= hi).collect();
    let alpha = params.alpha();
    let mismatch = |ln_lambda: f64| -> f64 {
        let lambda = ln_lambda.exp();
        pts.iter()
            .map(|p| match le.density_at(p.y / lambda) {
                Ok(r) => (p.rho / (lambda.powf(-alpha) * r) - 1.0).abs(),
                Err(_) => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    };
    // Golden-section search on ln λ around the estimate.
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (sol.lambda_est.ln() - 0.7, sol.lambda_est.ln() + 0.7);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (mismatch(c), mismatch(d));
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = mismatch(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = mismatch(d);
        }
    }
    let best = 0.5 * (a + b);
    Ok((best.exp(), mismatch(best)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn far_field_defect_is_two_thirds() {
        let p = GammaParams::new(1.1).unwrap();
        let d = shoot_inward(&p, 0.0, 1e-3 * p.y_f, 1e-11).unwrap();
        assert_eq!(d.termination, ShotTermination::ReachedYmin);
        assert!((d.defect.unwrap() - 2.0 / 3.0).abs() < 1e-8, "{d:?}");
    }

    #[test]
    fn y_min_must_be_inside() {
        let p = GammaParams::new(1.1).unwrap();
        assert!(shoot_inward(&p, 0.1, 0.5 * p.y_f, 1e-10).is_err());
    }

    #[test]
    fn log_grid_hits_endpoints() {
        let g = log_grid(1e-3, 1.0, 10);
        assert_eq!(g.len(), 31);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[30], 1.0);
    }

    #[test]
    fn crossings_of_far_field_and_friedman() {
        let p = GammaParams::new(1.1).unwrap();
        let far: Vec<ProfilePoint> = log_grid(0.01, 100.0, 20)
            .into_iter()
            .map(|y| ProfilePoint::new(&p, y, State { rho: p.k * y.powf(-p.alpha()), u: 0.0 }))
            .collect();
        assert_eq!(count_farfield_crossings(&p, &far).unwrap(), 0);
        let fried: Vec<ProfilePoint> = log_grid(0.01, 100.0, 20)
            .into_iter()
            .map(|y| ProfilePoint::new(&p, y, State { rho: 1.0 / (6.0 * std::f64::consts::PI), u: -y / 3.0 }))
            .collect();
        assert_eq!(count_farfield_crossings(&p, &fried).unwrap(), 1);
    }
}
