//! Closed-form statements of the underlying analysis, checked numerically.

use std::f64::consts::PI;

use hunter_core::laneemden::{solve_laneemden, ustar_slope_at_origin};
use hunter_core::linear::hom_series;
use hunter_core::params::{derive_params, explicit_solution, ExplicitKind, GammaParams};
use hunter_core::series::taylor_at_origin;
use hunter_core::sonic::{characteristic_params_at_sonic, origin_params, r_quadratic_residual, solve_sonic};
use hunter_core::system::{rhs_pw, to_pw};

const GAMMAS: [f64; 3] = [1.05, 1.1, 1.15];
const EPS: [f64; 6] = [-0.1, -0.05, -0.01, 0.01, 0.05, 0.1];

#[test]
fn isothermal_numerology() {
    let p = derive_params(1.0).unwrap();
    assert!((p.mu - 0.5).abs() < 1e-14);
    assert!((p.nu - 7f64.sqrt() / 2.0).abs() < 1e-14);
    assert!((p.k - 1.0 / (2.0 * PI)).abs() < 1e-15);
    assert!((p.y_f - 1.0).abs() < 1e-15);
}

#[test]
fn far_field_is_stationary_in_pw_variables() {
    for g in GAMMAS {
        let p = GammaParams::strict(g).unwrap();
        for z in [0.3, 2.0, 7.0] {
            let s = to_pw(&p, z, explicit_solution(&p, ExplicitKind::FarField, z).unwrap());
            assert!((s.p / p.k - 1.0).abs() < 1e-14 && (s.w - (2.0 - g)).abs() < 1e-14);
            let (dp, dw) = rhs_pw(&p, z, s).unwrap();
            assert!(dp.abs() < 1e-12 && dw.abs() < 1e-12, "{dp} {dw}");
        }
        let f = to_pw(&p, 1.0, explicit_solution(&p, ExplicitKind::Friedman, 1.0).unwrap());
        assert!((f.p - 1.0 / (6.0 * PI)).abs() < 1e-15);
        assert!((f.w - (2.0 - g - 2.0 / 3.0)).abs() < 1e-15);
    }
}

#[test]
fn sonic_conditions_along_the_branch() {
    for g in GAMMAS {
        let p = GammaParams::strict(g).unwrap();
        for e in EPS {
            let sp = solve_sonic(&p, e).unwrap();
            let w0 = sp.omega0;
            assert!((w0 - (2.0 - g) / (1.0 + e)).abs() < 1e-15);
            let sonic = sp.y_star * w0 - g.sqrt() * sp.rho0.powf((g - 1.0) / 2.0);
            assert!(sonic.abs() < 1e-12, "sonic condition {sonic}");
            let lhs = 4.0 * PI * sp.rho0 * w0 / (4.0 - 3.0 * g);
            let rhs = 2.0 * w0 * w0 + (g - 1.0) * w0 + (2.0 - g) * (g - 1.0);
            assert!((lhs - rhs).abs() < 1e-12);
            assert!((w0 * sp.r + sp.w + 3.0 * w0 - (4.0 - 3.0 * g)).abs() < 1e-12);
            assert!(r_quadratic_residual(&p, w0, sp.r).abs() < 1e-10);

            let nf = characteristic_params_at_sonic(&p, &sp).unwrap();
            assert!(nf.quadratic_residual().abs() < 1e-10);
            assert!(nf.a + nf.b * nf.u != 0.0);
            let u_from_r = sp.rho0 / (sp.y_star * w0) * (w0 * sp.r + w0 + g - 1.0);
            assert!((nf.u - u_from_r).abs() < 1e-10, "U map {} vs {}", nf.u, u_from_r);
            assert!(nf.kappa > -0.5 && !nf.is_resonant());
        }
    }
}

#[test]
fn far_field_root_of_the_r_quadratic() {
    for g in GAMMAS {
        let p = GammaParams::strict(g).unwrap();
        assert!(r_quadratic_residual(&p, 2.0 - g, -2.0 / (2.0 - g)).abs() < 1e-12);
    }
    let p = GammaParams::strict(1.1).unwrap();
    assert!(r_quadratic_residual(&p, 0.9, 0.0).abs() > 1e-3);
    let nf = characteristic_params_at_sonic(&p, &solve_sonic(&p, 0.0).unwrap()).unwrap();
    assert!((nf.kappa - 0.25).abs() < 1e-12);
}

#[test]
fn origin_normal_form() {
    let nf = origin_params(1.0).unwrap();
    assert_eq!((nf.a, nf.b, nf.c, nf.d), (1.0, 0.0, 2.0, 2.0));
    assert!((nf.u + 2.0 / 3.0).abs() < 1e-15 && (nf.kappa - 2.0).abs() < 1e-15);
    let f = origin_params(1.0 / (6.0 * PI)).unwrap();
    assert!((f.a - 1.0 / (6.0 * PI)).abs() < 1e-18 && f.quadratic_residual().abs() < 1e-15);
    assert!(origin_params(0.0).is_err());
}

#[test]
fn boundary_conditions_at_the_center() {
    let p = GammaParams::strict(1.1).unwrap();
    for rho_c in [1e-2, 1.0, 1e6] {
        let ts = taylor_at_origin(&p, rho_c, 10).unwrap();
        assert_eq!(ts.coeffs_rho[0], rho_c);
        assert_eq!(ts.coeffs_rho[1], 0.0);
        assert_eq!(ts.coeffs_u[0], 0.0);
        assert!((ts.coeffs_u[1] + 2.0 / 3.0).abs() < 1e-15);
        for n in (1..ts.coeffs_rho.len()).step_by(2) {
            assert!(ts.coeffs_rho[n].abs() <= 1e-12 * rho_c, "odd coefficient {n}");
        }
    }
}

#[test]
fn ustar_starts_with_slope_minus_two_thirds() {
    for g in GAMMAS {
        let le = solve_laneemden(&GammaParams::strict(g).unwrap(), 1e3, 1e-12).unwrap();
        assert!((ustar_slope_at_origin(&le).unwrap() + 2.0 / 3.0).abs() < 1e-6);
        assert_eq!(le.grid[0].ustar, 0.0);
    }
}

/// The homogeneous solution is the ε-derivative of the sonic data.
#[test]
fn homogeneous_solution_matches_sonic_eps_derivatives() {
    for g in GAMMAS {
        let p = GammaParams::strict(g).unwrap();
        let h = 1e-5;
        let data = |e: f64| {
            let s = solve_sonic(&p, e).unwrap();
            let a = p.alpha();
            [s.p0, s.omega0, s.p0 * (s.r + a) / s.y_star, s.w / s.y_star]
        };
        let (up, dn) = (data(h), data(-h));
        let hom = hom_series(&p, p.y_f).unwrap();
        let got = [hom.p, hom.omega, hom.dp, hom.domega];
        for i in 0..4 {
            let fd = (up[i] - dn[i]) / (2.0 * h);
            assert!((fd / got[i] - 1.0).abs() < 1e-5, "gamma {g} component {i}: {fd} vs {}", got[i]);
        }
        let printed_p = (3.0 * g - 1.0) * p.k / (2.0 * (2.0 - g));
        assert!((hom.p / printed_p - 1.0).abs() < 1e-12 && (hom.omega + (2.0 - g)).abs() < 1e-12);
    }
}
