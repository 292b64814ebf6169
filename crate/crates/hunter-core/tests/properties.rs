//! Randomized invariants.

use std::f64::consts::PI;

use hunter_core::integrate::{integrate, IntegrateOptions};
use hunter_core::params::{explicit_solution, ExplicitKind, GammaParams};
use hunter_core::series::TruncatedSeries;
use hunter_core::sonic::{characteristic_params_at_sonic, solve_sonic};
use hunter_core::system::{
    from_enthalpy, from_pw, rhs_pw, rhs_rho_u, sonic_discriminant, to_enthalpy, to_pw, RhoUSystem, State,
};
use proptest::prelude::*;

fn gamma() -> impl Strategy<Value = f64> {
    1.01f64..1.19
}

fn series(len: usize) -> impl Strategy<Value = TruncatedSeries> {
    proptest::collection::vec(-2.0f64..2.0, len).prop_map(TruncatedSeries::from_coeffs)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derived_constants_satisfy_their_defining_relations(g in gamma()) {
        let p = GammaParams::strict(g).unwrap();
        let two_g = 2.0 - g;
        // The far field is sonic at y_f.
        let rho_f = p.k * p.y_f.powf(-p.alpha());
        prop_assert!((two_g * two_g * p.y_f * p.y_f - g * rho_f.powf(g - 1.0)).abs() < 1e-12);
        // And it solves the static balance 2πk(2-γ)² = γ(4-3γ) k^{γ-1}.
        prop_assert!(close(2.0 * PI * p.k * two_g * two_g, g * (4.0 - 3.0 * g) * p.k.powf(g - 1.0), 1e-12));
        prop_assert!(p.mu > 0.0 && p.nu > 0.0);
        prop_assert!(p.theta0 > PI && p.theta0 < 1.5 * PI);
    }

    #[test]
    fn variable_changes_round_trip(g in gamma(), y in 0.01f64..50.0, rho in 1e-6f64..1e3, u in -5.0f64..5.0) {
        let p = GammaParams::strict(g).unwrap();
        let s = State { rho, u };
        let back = from_pw(&p, y, to_pw(&p, y, s));
        prop_assert!(close(back.rho, rho, 1e-12) && close(back.u, u, 1e-12));
        let back = from_enthalpy(&p, to_enthalpy(&p, s));
        prop_assert!(close(back.rho, rho, 1e-10) && back.u == u);
    }

    /// Both forms of the system describe the same flow.
    #[test]
    fn pw_form_is_the_chain_rule_image(g in gamma(), y in 0.1f64..10.0, rho in 0.01f64..2.0, u in -2.0f64..2.0) {
        let p = GammaParams::strict(g).unwrap();
        let s = State { rho, u };
        prop_assume!(sonic_discriminant(&p, y, s).abs() > 1e-3);
        let (dr, du) = rhs_rho_u(&p, y, s).unwrap();
        let (dp, dw) = rhs_pw(&p, y, to_pw(&p, y, s)).unwrap();
        let a = p.alpha();
        let want_p = a * y.powf(a - 1.0) * rho + y.powf(a) * dr;
        let want_w = du / y - u / (y * y);
        prop_assert!(close(dp, want_p, 1e-8), "{} vs {}", dp, want_p);
        prop_assert!(close(dw, want_w, 1e-8), "{} vs {}", dw, want_w);
    }

    #[test]
    fn series_products_are_commutative_and_distributive(a in series(8), b in series(8), c in series(8)) {
        let ab = &a * &b;
        let ba = &b * &a;
        for (x, y) in ab.coeffs.iter().zip(&ba.coeffs) {
            prop_assert!(close(*x, *y, 1e-14));
        }
        let lhs = &a * &(&b + &c);
        let rhs = &(&a * &b) + &(&a * &c);
        for (x, y) in lhs.coeffs.iter().zip(&rhs.coeffs) {
            prop_assert!(close(*x, *y, 1e-12));
        }
    }

    #[test]
    fn series_reciprocal_and_powers(mut a in series(8), c0 in 0.5f64..3.0, alpha in -2.0f64..2.0) {
        a.coeffs[0] = c0;
        let one = &a * &a.recip().unwrap();
        prop_assert!(close(one.coeffs[0], 1.0, 1e-13));
        for x in &one.coeffs[1..] {
            prop_assert!(x.abs() < 1e-9, "{:?}", one.coeffs);
        }
        // a^α a^(1-α) = a
        let prod = &a.powf(alpha).unwrap() * &a.powf(1.0 - alpha).unwrap();
        for (x, y) in prod.coeffs.iter().zip(&a.coeffs) {
            prop_assert!(close(*x, *y, 1e-10), "{:?} vs {:?}", prod.coeffs, a.coeffs);
        }
        // (a²)' = 2 a a' below the top order, which differentiation drops.
        let lhs = (&a * &a).derivative();
        let rhs = (&a * &a.derivative()).scale(2.0);
        let n = lhs.len() - 1;
        for (x, y) in lhs.coeffs[..n].iter().zip(&rhs.coeffs[..n]) {
            prop_assert!(close(*x, *y, 1e-12));
        }
    }

    #[test]
    fn sonic_branch_invariants(g in gamma(), e in 0.002f64..0.2, neg in any::<bool>()) {
        let e = if neg { -e } else { e };
        let p = GammaParams::strict(g).unwrap();
        let sp = solve_sonic(&p, e).unwrap();
        let w0 = sp.omega0;
        prop_assert!(close(w0, (2.0 - g) / (1.0 + e), 1e-14));
        prop_assert!((sp.y_star * w0 - g.sqrt() * sp.rho0.powf((g - 1.0) / 2.0)).abs() < 1e-11);
        prop_assert!(sp.rho0 > 0.0 && sp.y_star > 0.0);
        let nf = characteristic_params_at_sonic(&p, &sp).unwrap();
        prop_assert!(nf.quadratic_residual().abs() < 1e-9);
        prop_assert!(nf.kappa > -0.5);
    }

    /// The far field changes from supersonic to subsonic at y_f.
    #[test]
    fn far_field_discriminant_changes_sign_at_y_f(g in gamma(), d in 1e-3f64..0.5) {
        let p = GammaParams::strict(g).unwrap();
        let disc = |y: f64| sonic_discriminant(&p, y, explicit_solution(&p, ExplicitKind::FarField, y).unwrap());
        prop_assert!(disc(p.y_f * (1.0 - d)) < 0.0);
        prop_assert!(disc(p.y_f * (1.0 + d)) > 0.0);
        prop_assert!(disc(p.y_f).abs() < 1e-12);
    }

    #[test]
    fn integration_is_reversible(g in gamma(), y0 in 0.1f64..0.4, span in 0.1f64..0.5) {
        let p = GammaParams::strict(g).unwrap();
        let sys = RhoUSystem { params: p };
        let s0 = explicit_solution(&p, ExplicitKind::Friedman, y0).unwrap();
        let opts = IntegrateOptions::with_tol(1e-12);
        let fwd = integrate(&sys, y0, [s0.rho, s0.u], y0 + span, &opts, &[]).unwrap();
        let (t1, x1) = fwd.last();
        let exact = explicit_solution(&p, ExplicitKind::Friedman, t1).unwrap();
        prop_assert!(close(x1[0], exact.rho, 1e-9) && close(x1[1], exact.u, 1e-9));
        let back = integrate(&sys, t1, x1, y0, &opts, &[]).unwrap();
        let (t0, x0) = back.last();
        prop_assert_eq!(t0, y0);
        prop_assert!(close(x0[0], s0.rho, 1e-9) && close(x0[1], s0.u, 1e-9));
    }
}
