use proptest::prelude::*;
use spikelab::geometry::{BoundaryManifold, ManifoldSpec};
use spikelab::numerics::loglog_slope;
use spikelab::reduction::Cutoff;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ellipse_spec_roundtrips_through_text(a in 0.5f64..4.0, b in 0.5f64..4.0, neg in any::<bool>()) {
        let o = if neg { -1 } else { 1 };
        let text = format!("ellipse:{a},{b}:{o}");
        let spec = ManifoldSpec::parse(&text).unwrap();
        prop_assert_eq!(spec, ManifoldSpec::Ellipse { a, b, orientation: o });
        let json = serde_json::to_string(&spec).unwrap();
        prop_assert_eq!(serde_json::from_str::<ManifoldSpec>(&json).unwrap(), spec);
    }

    #[test]
    fn cutoff_stays_in_unit_interval(r in 0.05f64..2.0, rho in 0.0f64..4.0) {
        let c = Cutoff { r };
        let v = c.value(rho);
        prop_assert!((0.0..=1.0).contains(&v));
        if rho <= r / 2.0 { prop_assert_eq!(v, 1.0); }
        if rho >= r { prop_assert_eq!(v, 0.0); }
        prop_assert!(c.deriv(rho).abs() <= c.max_slope() + 1e-12);
    }

    #[test]
    fn ellipse_curvature_has_both_reflection_symmetries(t in 0.0f64..std::f64::consts::PI) {
        let m = BoundaryManifold::from_str_spec("ellipse:2,1").unwrap();
        let k = m.curve_curvature(t);
        prop_assert!((k - m.curve_curvature(-t)).abs() < 1e-13);
        prop_assert!((k - m.curve_curvature(std::f64::consts::PI - t)).abs() < 1e-13);
        prop_assert!(k > 0.0);
    }

    #[test]
    fn boundary_exp_then_log_is_identity(t in 0.0f64..std::f64::consts::TAU, y in -0.4f64..0.4) {
        let m = BoundaryManifold::from_str_spec("ellipse:2,1").unwrap();
        let q = m.point(&[t]);
        let x = m.exp(&q, &[y]).unwrap();
        let back = m.log(&q, &x.x).unwrap();
        prop_assert!((back[0] - y).abs() < 1e-9, "{} vs {}", back[0], y);
    }

    #[test]
    fn loglog_slope_recovers_power_laws(k in -3.0f64..3.0, c in 0.1f64..10.0) {
        let x: Vec<f64> = (1..8).map(|i| 0.01 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|x| c * x.powf(k)).collect();
        prop_assert!((loglog_slope(&x, &y) - k).abs() < 1e-10);
    }
}
