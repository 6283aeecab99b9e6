use collab_activity::metrics::{momentum, normalized_ratio_sd, rmse, MetricsError, MomentumReport};
use proptest::prelude::*;

fn arb_matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..8, 1usize..10).prop_flat_map(|(u, w)| prop::collection::vec(prop::collection::vec(-50.0f64..50.0, w), u))
}

#[test]
fn hand_examples() {
    let rho = normalized_ratio_sd(&[1.0, 3.0], 2.0).unwrap();
    assert_eq!(rho, 0.5);
    assert_eq!(MomentumReport::new(rho, 1.0, 1.0).unwrap().system_mass, 2.0);
    let flat = normalized_ratio_sd(&[2.0, 2.0, 2.0], 3.0).unwrap();
    assert_eq!(flat, 0.0);
    assert_eq!(MomentumReport::new(flat, 5.0, 5.0), Err(MetricsError::ZeroVariance));
    assert_eq!(
        momentum(flat, &[1.0, 2.0]).unwrap_err().to_string(),
        "zero variance: mass undefined"
    );
    assert_eq!(rmse(&[vec![3.0]], &[vec![1.0]]).unwrap(), 2.0);
}

proptest! {
    #[test]
    fn ratio_scaling_scales_rho_and_mass(
        ratios in prop::collection::vec(0.1f64..20.0, 2..30),
        kappa in 0.5f64..20.0,
        c in 0.01f64..100.0,
    ) {
        prop_assume!(ratios.iter().any(|&r| (r - ratios[0]).abs() > 1e-6));
        let rho = normalized_ratio_sd(&ratios, kappa).unwrap();
        let scaled: Vec<f64> = ratios.iter().map(|r| r * c).collect();
        let rho_c = normalized_ratio_sd(&scaled, kappa).unwrap();
        prop_assert!((rho_c - c * rho).abs() <= 1e-12 * c * rho);
        let (m, m_c) = (MomentumReport::new(rho, 1.0, 1.0).unwrap(), MomentumReport::new(rho_c, 1.0, 1.0).unwrap());
        prop_assert!((m_c.system_mass - m.system_mass / c).abs() <= 1e-12 * m.system_mass / c);
        prop_assert_eq!(m.system_mass, 1.0 / rho);
    }

    #[test]
    fn momentum_is_linear_in_activity(
        rho in 0.001f64..2.0,
        weekly in prop::collection::vec(0.0f64..1e4, 4..60),
        c in 0.0f64..10.0,
    ) {
        let base = momentum(rho, &weekly).unwrap();
        let scaled: Vec<f64> = weekly.iter().map(|w| w * c).collect();
        let m = momentum(rho, &scaled).unwrap();
        let tol = 1e-9 * (1.0 + base.momentum_average * c);
        prop_assert!((m.momentum_average - c * base.momentum_average).abs() <= tol);
        prop_assert!((m.momentum_last_month - c * base.momentum_last_month).abs() <= 1e-9 * (1.0 + base.momentum_last_month * c));
        prop_assert_eq!(base.momentum_average, base.system_mass * base.activity_mean_weekly);
        prop_assert_eq!(base.momentum_last_month, base.system_mass * base.activity_last_month);
    }

    #[test]
    fn rmse_ignores_user_and_week_order(a in arb_matrix(), shift in prop::collection::vec(-5.0f64..5.0, 80), rot in 0usize..10) {
        let b: Vec<Vec<f64>> = a
            .iter()
            .enumerate()
            .map(|(u, row)| row.iter().enumerate().map(|(w, v)| v + shift[(u * 10 + w) % 80]).collect())
            .collect();
        let base = rmse(&a, &b).unwrap();
        let mut pa = a.clone();
        let mut pb = b.clone();
        pa.reverse();
        pb.reverse();
        for (ra, rb) in pa.iter_mut().zip(pb.iter_mut()) {
            let k = rot % ra.len();
            ra.rotate_left(k);
            rb.rotate_left(k);
        }
        prop_assert!((rmse(&pa, &pb).unwrap() - base).abs() <= 1e-12 * (1.0 + base));
    }

    #[test]
    fn constant_error_gives_that_error(a in arb_matrix(), e in -10.0f64..10.0) {
        let b: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|v| v + e).collect()).collect();
        prop_assert!((rmse(&a, &b).unwrap() - e.abs()).abs() <= 1e-9);
        prop_assert_eq!(rmse(&a, &a).unwrap(), 0.0);
    }
}
