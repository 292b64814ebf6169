//! Values computed once by independent means and frozen here.
//!
//! The 30-digit values come from mpmath: the system matrices assembled by
//! hand and solved, `hyp2f1` with the conjugate parameter pair, and the
//! chain rule into `(p, w)`. The Lane-Emden, linear and shooting constants
//! were cross-checked against each other (tail phase against `θ0`, root
//! spacing against `e^{-π/ν}`) when first computed.

use std::f64::consts::PI;

use hunter_core::integrate::{detect_sonic, integrate, IntegrateOptions};
use hunter_core::laneemden::{fit_tail, solve_laneemden, DEFAULT_TOL, DEFAULT_Y_MAX};
use hunter_core::linear::{gauss_2f1_conjugate, hom_solution, HypergeometricArgs};
use hunter_core::params::{explicit_solution, residue_matrix, ExplicitKind, GammaParams};
use hunter_core::series::{taylor_at_origin, taylor_at_sonic};
use hunter_core::shoot::{find_hunter, ScanConfig};
use hunter_core::sonic::solve_sonic;
use hunter_core::system::{rhs_pw, rhs_rho_u, PwState, RhoUSystem, State};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn rhs_at_a_generic_state() {
    let p = GammaParams::new(1.1).unwrap();
    let (dr, du) = rhs_rho_u(&p, 1.0, State { rho: 0.2, u: -0.1 }).unwrap();
    assert!(rel(dr, -0.95948629030096665146) < 1e-13, "{dr}");
    assert!(rel(du, 2.0379451612038666058) < 1e-13, "{du}");
}

#[test]
fn rhs_pw_at_a_generic_state() {
    let p = GammaParams::new(1.05).unwrap();
    let s = PwState { p: 1.1 * p.k, w: 0.9 * (2.0 - p.gamma) };
    let (dp, dw) = rhs_pw(&p, 1.5, s).unwrap();
    assert!(rel(dp, -0.0083936484770396766103) < 1e-11, "{dp}");
    assert!(rel(dw, 0.10235519939924335286) < 1e-11, "{dw}");
}

#[test]
fn residue_eigenvalues_at_gamma_1_1() {
    let p = GammaParams::new(1.1).unwrap();
    let [l1, l2] = residue_matrix(&p).eigenvalues;
    let im = 4.79f64.sqrt() / 1.8;
    assert!((l1.re + 5.0 / 18.0).abs() < 1e-12 && (l2.re + 5.0 / 18.0).abs() < 1e-12);
    assert!((l1.im - im).abs() < 1e-12 && (l2.im + im).abs() < 1e-12);
}

/// `2F1(a, ā; c; z)` at γ = 1.1, where `a = (2-γ)/2 (-μ - iν)` and
/// `c = (5γ-3)/2`.
#[test]
fn hypergeometric_against_thirty_digit_values() {
    let p = GammaParams::new(1.1).unwrap();
    let h = (2.0 - p.gamma) / 2.0;
    let fixtures = [
        (-0.85, 0.81870872369174815447),
        (-0.68, 0.85069483142452557104),
        (-0.51, 0.88451312800972071999),
        (-0.34, 0.9204286576759213531),
        (-0.17, 0.95877788696352862065),
        (0.0, 1.0),
        (0.17, 1.044689160187736692),
        (0.34, 1.0936887769653744201),
        (0.51, 1.1482808387329465085),
        (0.68, 1.2106336422776542717),
        (0.3, 1.081713630148604172396818),
    ];
    for (z, want) in fixtures {
        let args = HypergeometricArgs { a_re: -h * p.mu, a_im: -h * p.nu, c: (5.0 * p.gamma - 3.0) / 2.0, z };
        let got = gauss_2f1_conjugate(&args).unwrap();
        assert!(rel(got, want) < 1e-12, "z = {z}: {got} vs {want}");
    }
}

#[test]
fn friedman_trajectory_crosses_the_sonic_locus_where_predicted() {
    let p = GammaParams::new(1.1).unwrap();
    let s0 = explicit_solution(&p, ExplicitKind::Friedman, 0.1).unwrap();
    let sys = RhoUSystem { params: p };
    let before = integrate(&sys, 0.1, [s0.rho, s0.u], 3.8, &IntegrateOptions::with_tol(1e-12), &[]).unwrap();
    assert_eq!(detect_sonic(&p, &before), None);
    let s1 = explicit_solution(&p, ExplicitKind::Friedman, 3.8).unwrap();
    // Friedman's derivative stays finite through the crossing, since the
    // numerators vanish with D, so stepping across it succeeds.
    let r = integrate(&sys, 3.8, [s1.rho, s1.u], 10.0, &IntegrateOptions::with_tol(1e-12), &[]).unwrap();
    let y = detect_sonic(&p, &r).expect("crossing");
    assert!(rel(y, 3.8810970354046672276) < 1e-10, "{y}");
}

#[test]
fn far_field_series_reproduces_closed_form_off_center() {
    let p = GammaParams::new(1.1).unwrap();
    let ts = taylor_at_sonic(&p, &solve_sonic(&p, 0.0).unwrap(), 10).unwrap();
    let y = p.y_f + 0.01;
    let (s, _) = ts.evaluate(y).unwrap();
    let exact = explicit_solution(&p, ExplicitKind::FarField, y).unwrap();
    assert!(rel(s.rho, exact.rho) < 1e-10);
    assert!(s.u.abs() < 1e-10);
}

#[test]
fn sonic_series_derivative_matches_finite_differences() {
    let p = GammaParams::new(1.1).unwrap();
    let ts = taylor_at_sonic(&p, &solve_sonic(&p, 0.05).unwrap(), 8).unwrap();
    let y = ts.center;
    for delta in [1e-3, 5e-4] {
        let (a, _) = ts.evaluate(y + delta).unwrap();
        let (b, _) = ts.evaluate(y - delta).unwrap();
        let (_, d) = ts.evaluate(y).unwrap();
        let fd = ((a.rho - b.rho) / (2.0 * delta), (a.u - b.u) / (2.0 * delta));
        // Central differences carry an O(δ²) error.
        assert!((fd.0 - d.0).abs() < 10.0 * delta * delta * d.0.abs().max(1.0));
        assert!((fd.1 - d.1).abs() < 10.0 * delta * delta * d.1.abs().max(1.0));
    }
}

#[test]
fn origin_series_curvature_matches_a_short_integration() {
    let p = GammaParams::new(1.1).unwrap();
    let ts = taylor_at_origin(&p, 1.0, 10).unwrap();
    let sys = RhoUSystem { params: p };
    let y0 = 1e-3;
    let (s0, _) = ts.evaluate(y0).unwrap();
    let r = integrate(&sys, y0, [s0.rho, s0.u], 3e-2, &IntegrateOptions::with_tol(1e-13), &[]).unwrap();
    // ρ = ρ0 + c2 y² + c4 y⁴, so fitting the integrated values at two
    // radii separates c2 from c4.
    let (ya, yb) = (1e-2, 2e-2);
    let (ra, rb) = (r.eval(ya).unwrap()[0] - 1.0, r.eval(yb).unwrap()[0] - 1.0);
    let c2 = (ra * yb.powi(4) - rb * ya.powi(4)) / (ya * ya * yb.powi(4) - yb * yb * ya.powi(4));
    assert!(rel(2.0 * c2, 2.0 * ts.coeffs_rho[2]) < 1e-5, "{c2} vs {}", ts.coeffs_rho[2]);
}

#[test]
fn lane_emden_quadrature_oracle_and_center() {
    let p = GammaParams::strict(1.1).unwrap();
    let le = solve_laneemden(&p, 1e3, DEFAULT_TOL).unwrap();
    let g = p.gamma;
    // u*(1) from (y² ρ u*)' = -y² (2ρ + (2-γ) y ρ'), by Simpson's rule.
    let f = |r: f64| {
        let (q, dq) = le.q_at(r).unwrap();
        let rho = le.density_at(r).unwrap();
        let drho = rho * dq / ((g - 1.0) * q);
        (2.0 * rho + (2.0 - g) * r * drho) * r * r
    };
    let n = 2000;
    let h = 1.0 / n as f64;
    let integral = (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            w * f(i as f64 * h)
        })
        .sum::<f64>()
        * h
        / 3.0;
    let quadrature = -integral / le.density_at(1.0).unwrap();
    let closed = le.ustar_at(1.0).unwrap();
    assert!((quadrature - closed).abs() < 1e-6, "{quadrature} vs {closed}");

    // Q''(0) = -4π/3 from a quadratic fit of Q(y) - Q(0) at small radii.
    let q0 = g / (g - 1.0);
    let (ya, yb) = (2e-3, 4e-3);
    let (qa, qb) = (le.q_at(ya).unwrap().0 - q0, le.q_at(yb).unwrap().0 - q0);
    let c2 = (qa * yb.powi(4) - qb * ya.powi(4)) / (ya * ya * yb.powi(4) - yb * yb * ya.powi(4));
    assert!((2.0 * c2 + 4.0 * PI / 3.0).abs() < 1e-6, "{}", 2.0 * c2);
    assert_eq!(le.grid[0].q, q0);
}

#[test]
fn frozen_tail_and_hypergeometric_constants() {
    let p = GammaParams::strict(1.1).unwrap();
    let tail = fit_tail(&solve_laneemden(&p, DEFAULT_Y_MAX, DEFAULT_TOL).unwrap()).unwrap();
    assert!(rel(tail.c2, 0.12499000543896009) < 1e-6, "{}", tail.c2);
    assert!(rel(tail.d2, 1.1889524972860501) < 1e-6, "{}", tail.d2);
    let hom = hom_solution(&p).unwrap();
    assert!(rel(hom.c1, 0.10605921133032115) < 1e-6, "{}", hom.c1);
    assert!(rel(hom.d1, 1.41107849040628) < 1e-6, "{}", hom.d1);
}

#[test]
fn frozen_hunter_roots_at_gamma_1_1() {
    let p = GammaParams::strict(1.1).unwrap();
    let scan = find_hunter(&p, &ScanConfig::default()).unwrap();
    let want = [
        -0.45105633696,
        0.28847267542,
        -0.12450542343,
        0.064763686987,
        -0.030645350299,
        0.015178426016,
        -0.0073509796470,
    ];
    let got: Vec<f64> = scan.solutions.iter().map(|s| s.eps).collect();
    assert_eq!(got.len(), want.len(), "{got:?}");
    for (g, w) in got.iter().zip(want) {
        assert!(rel(*g, w) < 1e-9, "{g} vs {w}");
    }
}
