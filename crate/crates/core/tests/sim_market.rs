use std::sync::Arc;

use mmtrade::distributions::{make_gaussian, make_tabulated, make_uniform, std_normal_cdf};
use mmtrade::engine::{acceptance_prob, expected_cycle_length, expected_log_return, profit_intensity};
use mmtrade::market::{demand_curve, equilibrium_price, log_cross_ratio, supply_curve, MarketPair, PortfolioPoint};
use mmtrade::maxent::{MaxEntModel, GOLDEN};
use mmtrade::sim::{check_wald, ks_critical_value, ks_statistic, simulate, simulate_with_accepted, truncated_cdf};
use mmtrade::{Error, MMConfig, Orientation, PriceDistribution, SimConfig};
use proptest::prelude::*;

fn normal_buyer(a: f64) -> MMConfig {
    MMConfig::new(Arc::new(make_gaussian(0.0, 1.0).unwrap()), a, 1.0, Orientation::Buyer).unwrap()
}

#[test]
fn simulation_is_deterministic() {
    let cfg = SimConfig::new(normal_buyer(0.27603), 50_000, 9).unwrap();
    assert_eq!(simulate(&cfg).unwrap(), simulate(&cfg).unwrap());
    let sharded = cfg.clone().with_shards(4).unwrap();
    assert_eq!(simulate(&sharded).unwrap(), simulate(&sharded).unwrap());
    let other = SimConfig::new(normal_buyer(0.27603), 50_000, 10).unwrap();
    assert_ne!(simulate(&cfg).unwrap().mean_tau, simulate(&other).unwrap().mean_tau);
}

#[test]
fn error_shrinks_like_inverse_root_n() {
    let mm = normal_buyer(0.27603);
    let target = profit_intensity(&mm).unwrap();
    let mut ses = Vec::new();
    for n in [10_000u64, 100_000, 1_000_000] {
        let s = simulate(&SimConfig::new(mm.clone(), n, 42).unwrap()).unwrap();
        let err = (s.intensity_estimate - target).abs();
        assert!(err <= 4.0 * s.se_intensity, "n={n}: error {err} vs se {}", s.se_intensity);
        ses.push(s.se_intensity * (n as f64).sqrt());
    }
    // se·√n is roughly constant across two decades
    let (lo, hi) = ses.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
    assert!(hi / lo < 1.5, "{ses:?}");
}

#[test]
fn accepted_prices_follow_the_truncated_law() {
    for (mm, seed) in [
        (normal_buyer(0.27603), 42u64),
        (
            MMConfig::new(Arc::new(MaxEntModel::new(1.0, 1.0 / GOLDEN).unwrap()), 1.0, 1.0, Orientation::Seller)
                .unwrap(),
            43,
        ),
        (
            MMConfig::new(
                Arc::new(make_tabulated(vec![-1.0, 0.0, 1.0, 2.0], vec![0.2, 0.5, 0.3]).unwrap()),
                0.2,
                1.0,
                Orientation::Seller,
            )
            .unwrap(),
            44,
        ),
    ] {
        let (_, mut accepted) = simulate_with_accepted(&SimConfig::new(mm.clone(), 100_000, seed).unwrap()).unwrap();
        let n = accepted.len();
        let d = ks_statistic(&mut accepted, |x| truncated_cdf(&mm, x));
        assert!(d < ks_critical_value(n, 0.001), "D={d} n={n}");
    }
}

#[test]
fn wald_identities_hold_statistically() {
    let w = check_wald(&SimConfig::new(normal_buyer(0.0), 200_000, 5).unwrap()).unwrap();
    assert!(w.residual.abs() <= 3.0 * w.se);
    assert!(w.var_residual.abs() <= 3.0 * w.var_se);
}

#[test]
fn means_match_the_engine() {
    let mm = MMConfig::new(Arc::new(make_uniform(-1.0, 1.0).unwrap()), 0.3, 2.0, Orientation::Seller).unwrap();
    let s = simulate(&SimConfig::new(mm.clone(), 200_000, 3).unwrap()).unwrap();
    assert!((s.mean_tau - expected_cycle_length(&mm).unwrap()).abs() <= 4.0 * s.se_tau);
    assert!((s.mean_return - expected_log_return(&mm).unwrap()).abs() <= 4.0 * s.se_return);
    assert!((s.acceptance_fraction - acceptance_prob(&mm)).abs() <= 4.0 * s.se_acceptance);
    assert_eq!(s.n_cycles, 200_000);
}

#[test]
fn simulation_input_validation() {
    assert!(matches!(SimConfig::new(normal_buyer(0.0), 0, 1), Err(Error::InvalidParameter(_))));
    assert!(SimConfig::new(normal_buyer(0.0), 10, 1).unwrap().with_shards(0).is_err());
    // acceptance below the degeneracy floor
    assert!(SimConfig::new(normal_buyer(9.0), 10, 1).is_err());
    assert_eq!(ks_statistic(&mut [], |x| x), 0.0);
}

#[test]
fn ks_reference_critical_value() {
    // c(0.001) = sqrt(-ln(0.0005)/2)
    let c = (-(0.0005f64).ln() / 2.0).sqrt();
    assert!((ks_critical_value(10_000, 0.001) - c / 100.0).abs() < 1e-12);
}

#[test]
fn supply_plus_demand_is_one() {
    let laws: Vec<Arc<dyn PriceDistribution>> = vec![
        Arc::new(make_gaussian(0.0, 1.0).unwrap()),
        Arc::new(make_gaussian(3.0, 0.2).unwrap()),
        Arc::new(make_uniform(-1.0, 5.0).unwrap()),
        Arc::new(MaxEntModel::new(1.0, 2.0).unwrap()),
    ];
    for d in laws {
        let mp = MarketPair::symmetric(d);
        for k in 0..=200 {
            let y = -10.0 + 20.0 * k as f64 / 200.0;
            assert!((supply_curve(&mp, y) + demand_curve(&mp, y) - 1.0).abs() <= 1e-10);
        }
    }
}

#[test]
fn symmetric_laws_clear_at_their_centre() {
    for (centre, d) in [
        (0.0, Arc::new(make_gaussian(0.0, 1.0).unwrap()) as Arc<dyn PriceDistribution>),
        (2.5, Arc::new(make_gaussian(2.5, 0.7).unwrap())),
        (1.0, Arc::new(make_uniform(-1.0, 3.0).unwrap())),
        (0.0, Arc::new(make_tabulated(vec![-2.0, -1.0, 1.0, 2.0], vec![0.25, 0.5, 0.25]).unwrap())),
    ] {
        let eq = equilibrium_price(&MarketPair::symmetric(d)).unwrap();
        assert!((eq.price - centre).abs() <= 1e-10, "{} vs {centre}", eq.price);
        assert!(eq.warning.is_none());
    }
}

#[test]
fn asymmetric_market_equilibrium() {
    // supply N(0,1), demand N(1,1): Φ(x) = Φ(1-x) at x = 1/2
    let mp = MarketPair::new(Arc::new(make_gaussian(0.0, 1.0).unwrap()), Arc::new(make_gaussian(1.0, 1.0).unwrap()));
    let eq = equilibrium_price(&mp).unwrap();
    assert!((eq.price - 0.5).abs() < 1e-10);
    assert!((eq.supply - std_normal_cdf(0.5)).abs() < 1e-10);
}

#[test]
fn cross_ratio_invariance_grid() {
    let amounts: Vec<f64> = (0..10).map(|k| 0.1 + (10.0 - 0.1) * k as f64 / 9.0).collect();
    for (pb, ps) in [(0.1, 0.5), (-0.27603, 0.0), (0.0, 0.7), (1.5, -2.0), (-3.0, 3.0)] {
        let first = log_cross_ratio(
            &PortfolioPoint::new(amounts[0], pb).unwrap(),
            &PortfolioPoint::new(amounts[0], ps).unwrap(),
        )
        .unwrap();
        for &v in &amounts {
            for &w in &amounts {
                let l = log_cross_ratio(&PortfolioPoint::new(v, pb).unwrap(), &PortfolioPoint::new(w, ps).unwrap())
                    .unwrap();
                assert!((l - first).abs() <= 1e-12);
                assert!((l - (ps - pb)).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn cross_ratio_rejects_bad_portfolios() {
    assert!(PortfolioPoint::new(0.0, 0.1).is_err());
    assert!(PortfolioPoint::new(1.0, f64::INFINITY).is_err());
    let p = PortfolioPoint::new(1.0, 0.3).unwrap();
    assert!(matches!(log_cross_ratio(&p, &p), Err(Error::InvalidParameter(_))));
    // equal money but different prices is fine
    let q = PortfolioPoint::new(1.0, 0.8).unwrap();
    assert!((log_cross_ratio(&p, &q).unwrap() - 0.5).abs() < 1e-15);
}

proptest! {
    #[test]
    fn cross_ratio_equals_log_return(v in 1e-3f64..1e3, w in 1e-3f64..1e3, pb in -20.0f64..20.0, ps in -20.0f64..20.0) {
        prop_assume!(v != w || pb != ps);
        let l = log_cross_ratio(&PortfolioPoint::new(v, pb).unwrap(), &PortfolioPoint::new(w, ps).unwrap()).unwrap();
        prop_assert!((l - (ps - pb)).abs() <= 1e-12 * (1.0 + (ps - pb).abs()));
    }

    #[test]
    fn curves_are_monotone(mu in -5.0f64..5.0, sigma in 0.1f64..5.0, x in -20.0f64..20.0, dx in 0.0f64..3.0) {
        let mp = MarketPair::symmetric(Arc::new(make_gaussian(mu, sigma).unwrap()));
        prop_assert!(supply_curve(&mp, x) <= supply_curve(&mp, x + dx));
        prop_assert!(demand_curve(&mp, x) >= demand_curve(&mp, x + dx));
    }
}
