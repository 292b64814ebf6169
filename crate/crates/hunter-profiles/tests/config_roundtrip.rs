use hunter_profiles::{Format, RunConfig};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    any::<f64>().prop_filter("finite", |x| x.is_finite())
}

/// Configurations that pass validation, with values whose shortest
/// decimal form is long.
fn config() -> impl Strategy<Value = RunConfig> {
    use proptest::option::of;
    (
        (of(finite()), of(finite()), of(2usize..=40)),
        (of(1e-300f64..=1e-3), of(1e-300f64..=0.1), of(1.000001f64..1e300)),
        (of(1e-300f64..1e300), of(1e-300f64..=1.0), of(1usize..=10_000)),
        (of("[a-z0-9_./]{1,20}"), of(prop_oneof![Just(Format::Csv), Just(Format::Json)])),
    )
        .prop_map(|((gamma, eps, order), (tol, ymin, ymax), (scan_lo, scan_hi, grid_per_decade), (out, format))| {
            RunConfig { gamma, eps, order, tol, ymin, ymax, scan_lo, scan_hi, grid_per_decade, out, format }
        })
}

proptest! {
    #[test]
    fn file_form_round_trips_exactly(cfg in config()) {
        let text = cfg.to_file_string();
        prop_assert_eq!(RunConfig::parse_file(&text).unwrap(), cfg);
    }

    #[test]
    fn merging_prefers_the_override(a in config(), b in config()) {
        let m = a.clone().merged(&b);
        prop_assert_eq!(m.gamma, b.gamma.or(a.gamma));
        prop_assert_eq!(&m.out, &b.out.clone().or(a.out.clone()));
        prop_assert_eq!(m.grid_per_decade, b.grid_per_decade.or(a.grid_per_decade));
        prop_assert_eq!(a.clone().merged(&RunConfig::default()), a);
    }
}
