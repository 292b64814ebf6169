//! The subcommands. Each renders its whole output to strings so that the
//! caller decides where bytes go, and so that two runs can be compared.

use serde::Serialize;

use hunter_core::laneemden::{self, solve_laneemden, TailFit};
use hunter_core::linear::hom_solution;
use hunter_core::params::{residue_matrix, Complex, GammaParams};
use hunter_core::fit::OscillationFit;
use hunter_core::series::{taylor_at_sonic, DEFAULT_ORDER};
use hunter_core::shoot::{
    self, assemble_profile, eps_regression_slope, find_hunter, predicted_slope, BoundConstants, HunterSolution,
    ScanConfig,
};
use hunter_core::sonic::{characteristic_params_at_sonic, solve_sonic, NormalFormParams, SonicPointData};
use hunter_core::verify::{Outcome, Suite, VerifyConfig};

use crate::config::{Format, RunConfig};
use crate::exit::CliError;
use crate::output::{csv_table, csv_text, json_document, sig17};

pub const DEFAULT_GAMMA: f64 = 1.1;
/// Profile and table samples per decade when none is configured.
pub const DEFAULT_SAMPLES_PER_DECADE: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Params,
    Sonic,
    Shoot,
    Profile,
    LaneEmden,
    Linear,
    Verify,
}

/// Process-level settings that do not belong in a config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Context {
    /// Scan worker threads; `0` lets the pool decide.
    pub threads: usize,
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    /// The main document, printed or written to `--out`.
    pub main: String,
    /// Extra files keyed by name. Only `shoot` has any: one profile per
    /// root, written next to the summary when `--out` names a directory.
    pub files: Vec<(String, String)>,
    /// Failed acceptance criteria, for `verify`.
    pub failed: usize,
}

impl Rendered {
    fn single(main: String) -> Self {
        Rendered { main, files: Vec::new(), failed: 0 }
    }
}

pub fn run(cmd: Command, cfg: &RunConfig, ctx: &Context) -> Result<Rendered, CliError> {
    cfg.validate()?;
    match cmd {
        Command::Params => cmd_params(cfg),
        Command::Sonic => cmd_sonic(cfg),
        Command::Shoot => cmd_shoot(cfg, ctx),
        Command::Profile => cmd_profile(cfg),
        Command::LaneEmden => cmd_laneemden(cfg),
        Command::Linear => cmd_linear(cfg),
        Command::Verify => cmd_verify(cfg, ctx),
    }
}

fn gamma(cfg: &RunConfig) -> f64 {
    cfg.gamma.unwrap_or(DEFAULT_GAMMA)
}

fn key_values(pairs: &[(&str, f64)]) -> String {
    csv_text(&["name", "value"], pairs.iter().map(|(k, v)| vec![k.to_string(), sig17(*v)]))
}

#[derive(Serialize)]
struct Identities {
    /// `|k y_f^{-2/(2-γ)} / ((4-3γ)/2π) - 1|`.
    far_field_amplitude: f64,
    /// `|γ k^{γ-2} / ((2-γ)² y_f^{2/(2-γ)} / k) - 1|`.
    sonic_balance: f64,
    /// `|sin θ0 / (-ν √(2-γ) / 2) - 1|`.
    phase_offset: f64,
}

#[derive(Serialize)]
struct ParamsDoc {
    params: GammaParams,
    alpha: f64,
    residue_eigenvalues: [Complex; 2],
    identities: Identities,
}

fn cmd_params(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let p = GammaParams::new(gamma(cfg))?;
    let g = p.gamma;
    let a = p.alpha();
    let rel = |x: f64, y: f64| (x / y - 1.0).abs();
    let identities = Identities {
        far_field_amplitude: rel(p.k * p.y_f.powf(-a), (4.0 - 3.0 * g) / (2.0 * std::f64::consts::PI)),
        sonic_balance: rel(g * p.k.powf(g - 2.0), (2.0 - g).powi(2) * p.y_f.powf(a) / p.k),
        phase_offset: rel(p.theta0.sin(), -p.nu * (2.0 - g).sqrt() / 2.0),
    };
    let doc = ParamsDoc { params: p, alpha: a, residue_eigenvalues: residue_matrix(&p).eigenvalues, identities };
    Ok(Rendered::single(match cfg.format.unwrap_or(Format::Json) {
        Format::Json => json_document("params", &doc),
        Format::Csv => key_values(&[
            ("gamma", p.gamma),
            ("k", p.k),
            ("y_f", p.y_f),
            ("mu", p.mu),
            ("nu", p.nu),
            ("theta0", p.theta0),
            ("alpha", a),
        ]),
    }))
}

#[derive(Serialize)]
struct SonicDoc {
    gamma: f64,
    sonic: SonicPointData,
    normal_form: NormalFormParams,
    series_order: usize,
    coeffs_rho: Vec<f64>,
    coeffs_u: Vec<f64>,
    radius_estimate: f64,
}

fn cmd_sonic(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let p = GammaParams::strict(gamma(cfg))?;
    let order = cfg.order.unwrap_or(DEFAULT_ORDER);
    let sp = solve_sonic(&p, cfg.eps.unwrap_or(0.0))?;
    let nf = characteristic_params_at_sonic(&p, &sp)?;
    let ts = taylor_at_sonic(&p, &sp, order)?;
    Ok(Rendered::single(match cfg.format.unwrap_or(Format::Json) {
        Format::Json => json_document(
            "sonic",
            &SonicDoc {
                gamma: p.gamma,
                sonic: sp,
                normal_form: nf,
                series_order: order,
                coeffs_rho: ts.coeffs_rho,
                coeffs_u: ts.coeffs_u,
                radius_estimate: ts.radius_estimate,
            },
        ),
        Format::Csv => key_values(&[
            ("eps", sp.eps),
            ("omega0", sp.omega0),
            ("p0", sp.p0),
            ("y_star", sp.y_star),
            ("rho0", sp.rho0),
            ("u0", sp.u0),
            ("r", sp.r),
            ("w", sp.w),
            ("rho1", sp.rho1),
            ("u1", sp.u1),
            ("a", nf.a),
            ("b", nf.b),
            ("c", nf.c),
            ("d", nf.d),
            ("u", nf.u),
            ("kappa", nf.kappa),
        ]),
    }))
}

/// A solution without its profile samples.
#[derive(Serialize)]
struct SolutionSummary {
    index: usize,
    eps: f64,
    canonical: bool,
    y_star: f64,
    crossings: usize,
    sonic_points: usize,
    central_density: f64,
    lambda_est: f64,
    defect: f64,
    bounds: BoundConstants,
    far_field_ratio: f64,
    positive: bool,
    exterior_monotone: bool,
    glue_mismatch: f64,
    violations: Vec<String>,
}

impl From<&HunterSolution> for SolutionSummary {
    fn from(s: &HunterSolution) -> Self {
        SolutionSummary {
            index: s.index,
            eps: s.eps,
            canonical: s.canonical,
            y_star: s.y_star,
            crossings: s.crossings,
            sonic_points: s.sonic_points,
            central_density: s.central_density,
            lambda_est: s.lambda_est,
            defect: s.defect,
            bounds: s.bounds,
            far_field_ratio: s.far_field_ratio,
            positive: s.positive,
            exterior_monotone: s.exterior_monotone,
            glue_mismatch: s.glue_mismatch,
            violations: s.violations.clone(),
        }
    }
}

#[derive(Serialize)]
struct Rejected {
    eps: f64,
    reason: String,
}

#[derive(Serialize)]
struct ShootDoc {
    gamma: f64,
    scan: ScanConfig,
    shots: usize,
    solutions: Vec<SolutionSummary>,
    rejected: Vec<Rejected>,
    regression_slope: Option<f64>,
    predicted_slope: f64,
}

const SUMMARY_COLUMNS: [&str; 12] = [
    "index",
    "eps",
    "y_star",
    "crossings",
    "sonic_points",
    "central_density",
    "lambda_est",
    "defect",
    "density_bound",
    "velocity_bound",
    "far_field_ratio",
    "glue_mismatch",
];

fn scan_config(cfg: &RunConfig, ctx: &Context) -> ScanConfig {
    let d = ScanConfig::default();
    ScanConfig {
        eps_lo: cfg.scan_lo.unwrap_or(d.eps_lo),
        eps_hi: cfg.scan_hi.unwrap_or(d.eps_hi),
        grid_per_decade: cfg.grid_per_decade.unwrap_or(d.grid_per_decade),
        y_min: cfg.ymin.unwrap_or(d.y_min),
        y_max: cfg.ymax.unwrap_or(d.y_max),
        tol: cfg.tol.unwrap_or(d.tol),
        profile_per_decade: d.profile_per_decade,
        threads: ctx.threads,
    }
}

pub const PROFILE_COLUMNS: [&str; 6] = ["y", "rho", "u", "p", "w", "D"];

fn profile_csv(sol: &HunterSolution) -> String {
    csv_table(&PROFILE_COLUMNS, sol.profile.iter().map(|q| vec![q.y, q.rho, q.u, q.p, q.w, q.d]))
}

fn cmd_shoot(cfg: &RunConfig, ctx: &Context) -> Result<Rendered, CliError> {
    let p = GammaParams::strict(gamma(cfg))?;
    let scan = scan_config(cfg, ctx);
    let res = find_hunter(&p, &scan)?;
    let main = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => json_document(
            "shoot",
            &ShootDoc {
                gamma: p.gamma,
                scan,
                shots: res.shots,
                solutions: res.solutions.iter().map(SolutionSummary::from).collect(),
                rejected: res.rejected.iter().map(|(eps, reason)| Rejected { eps: *eps, reason: reason.clone() }).collect(),
                regression_slope: eps_regression_slope(&res.solutions),
                predicted_slope: predicted_slope(&p),
            },
        ),
        Format::Csv => csv_text(
            &SUMMARY_COLUMNS,
            res.solutions.iter().map(|s| {
                let mut row = vec![s.index.to_string()];
                row.extend([s.eps, s.y_star].map(sig17));
                row.push(s.crossings.to_string());
                row.push(s.sonic_points.to_string());
                row.extend(
                    [
                        s.central_density,
                        s.lambda_est,
                        s.defect,
                        s.bounds.density,
                        s.bounds.velocity,
                        s.far_field_ratio,
                        s.glue_mismatch,
                    ]
                    .map(sig17),
                );
                row
            }),
        ),
    };
    let files = res.solutions.iter().map(|s| (format!("profile_{}.csv", s.index), profile_csv(s))).collect();
    Ok(Rendered { main, files, failed: 0 })
}

#[derive(Serialize)]
struct ProfileDoc {
    gamma: f64,
    solution: SolutionSummary,
    profile: Vec<shoot::ProfilePoint>,
}

fn cmd_profile(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let p = GammaParams::strict(gamma(cfg))?;
    let eps = cfg.eps.ok_or_else(|| CliError::Usage("profile needs --eps (a root reported by shoot)".into()))?;
    let d = ScanConfig::default();
    let sol = assemble_profile(
        &p,
        eps,
        cfg.ymin.unwrap_or(d.y_min) * p.y_f,
        cfg.ymax.unwrap_or(d.y_max) * p.y_f,
        cfg.tol.unwrap_or(d.tol),
        cfg.grid_per_decade.unwrap_or(DEFAULT_SAMPLES_PER_DECADE),
    )?;
    Ok(Rendered::single(match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => profile_csv(&sol),
        Format::Json => json_document(
            "profile",
            &ProfileDoc { gamma: p.gamma, solution: SolutionSummary::from(&sol), profile: sol.profile.clone() },
        ),
    }))
}

#[derive(Serialize)]
struct LaneEmdenDoc {
    gamma: f64,
    y_max: f64,
    tol: f64,
    ustar_slope_at_origin: f64,
    density_exponent: f64,
    tail: TailFit,
    free_fit: OscillationFit,
    ustar_fit: OscillationFit,
    q_bounds: (f64, f64),
}

fn cmd_laneemden(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let p = GammaParams::strict(gamma(cfg))?;
    let le = solve_laneemden(
        &p,
        cfg.ymax.unwrap_or(laneemden::DEFAULT_Y_MAX),
        cfg.tol.unwrap_or(laneemden::DEFAULT_TOL),
    )?;
    Ok(Rendered::single(match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_table(&["y", "Q", "density", "ustar"], le.grid.iter().map(|q| vec![q.y, q.q, q.rho, q.ustar])),
        Format::Json => json_document(
            "laneemden",
            &LaneEmdenDoc {
                gamma: p.gamma,
                y_max: le.y_max,
                tol: le.tol,
                ustar_slope_at_origin: laneemden::ustar_slope_at_origin(&le)?,
                density_exponent: laneemden::density_exponent(&le, laneemden::DEFAULT_TAIL_LO, le.y_max)?,
                tail: laneemden::fit_tail(&le)?,
                free_fit: laneemden::fit_tail_free(&le)?,
                ustar_fit: laneemden::fit_ustar_tail(&le)?,
                q_bounds: le.q_bounds(),
            },
        ),
    }))
}

#[derive(Serialize)]
struct LinearDoc {
    gamma: f64,
    window: (f64, f64),
    z_min: f64,
    c1: f64,
    d1: f64,
    p_fit: OscillationFit,
    omega_fit: OscillationFit,
    phase_offset_error: f64,
}

fn cmd_linear(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let p = GammaParams::strict(gamma(cfg))?;
    let hom = hom_solution(&p)?;
    Ok(Rendered::single(match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let (lo, hi) = (hom.z_min(), hom.window.1);
            let per = cfg.grid_per_decade.unwrap_or(DEFAULT_SAMPLES_PER_DECADE);
            // The series window is open at its outer end.
            let n = ((hi / lo).log10() * per as f64).ceil().max(1.0) as usize;
            let mut rows = Vec::with_capacity(n);
            for i in 0..n {
                let z = lo * (hi / lo).powf(i as f64 / n as f64);
                let h = hom.eval(z)?;
                rows.push(vec![z, h.p, h.omega]);
            }
            csv_table(&["z", "p_hom", "omega_hom"], rows)
        }
        Format::Json => json_document(
            "linear",
            &LinearDoc {
                gamma: p.gamma,
                window: hom.window,
                z_min: hom.z_min(),
                c1: hom.c1,
                d1: hom.d1,
                p_fit: hom.p_fit,
                omega_fit: hom.omega_fit,
                phase_offset_error: hom.phase_offset_error(),
            },
        ),
    }))
}

#[derive(Serialize)]
struct VerifyDoc<'a> {
    config: &'a VerifyConfig,
    criteria: &'a [Outcome],
    passed: bool,
}

/// Runs the library criteria and then the suite a second time, so that
/// criterion 11 can compare the two renderings byte for byte.
fn cmd_verify(cfg: &RunConfig, ctx: &Context) -> Result<Rendered, CliError> {
    let vc = VerifyConfig {
        hunter_gamma: gamma(cfg),
        scan: scan_config(cfg, ctx),
        ..VerifyConfig::default()
    };
    let first = Suite::new(vc.clone()).run_all();
    let second = Suite::new(vc.clone()).run_all();
    let same = first == second && render_verify(&first, &vc, cfg.format) == render_verify(&second, &vc, cfg.format);
    let mut all = first;
    all.push(Outcome {
        id: 11,
        title: "determinism".into(),
        passed: same,
        details: vec![if same { "two runs identical".into() } else { "two runs differ [violated]".into() }],
    });
    let failed = all.iter().filter(|o| !o.passed).count();
    Ok(Rendered { main: render_verify(&all, &vc, cfg.format), files: Vec::new(), failed })
}

fn render_verify(outcomes: &[Outcome], vc: &VerifyConfig, format: Option<Format>) -> String {
    match format {
        None => outcomes.iter().map(|o| o.line() + "\n").collect(),
        Some(Format::Json) => json_document(
            "verify",
            &VerifyDoc { config: vc, criteria: outcomes, passed: outcomes.iter().all(|o| o.passed) },
        ),
        Some(Format::Csv) => csv_text(
            &["id", "passed", "title"],
            outcomes.iter().map(|o| vec![o.id.to_string(), o.passed.to_string(), o.title.clone()]),
        ),
    }
}
