use mmtrade::distributions::{
    integrate, integrate_with_breaks, make_gaussian, make_tabulated, make_uniform, GaussianDist, Reflected,
};
use mmtrade::maxent::MaxEntModel;
use mmtrade::{PriceDistribution, Side};
use proptest::prelude::*;

fn zoo() -> Vec<Box<dyn PriceDistribution>> {
    vec![
        Box::new(make_gaussian(0.0, 1.0).unwrap()),
        Box::new(make_gaussian(-1.5, 0.3).unwrap()),
        Box::new(make_gaussian(4.0, 7.0).unwrap()),
        Box::new(make_uniform(-2.0, 3.0).unwrap()),
        Box::new(make_tabulated(vec![-1.0, 0.0, 0.5, 2.0], vec![0.2, 0.5, 0.3]).unwrap()),
        Box::new(make_tabulated(vec![0.0, 1.0, 2.0, 3.0], vec![0.4, 0.0, 0.6]).unwrap()),
        Box::new(MaxEntModel::new(1.0, 1.618_034).unwrap()),
        Box::new(MaxEntModel::new(0.1, 3.0).unwrap()),
        Box::new(MaxEntModel::new(7.3, 0.2).unwrap()),
        Box::new(Reflected::new(MaxEntModel::new(1.0, 0.5).unwrap())),
    ]
}

fn total_mass(d: &dyn PriceDistribution) -> f64 {
    let s = d.support();
    integrate_with_breaks(|p| d.density(p), s.lower, s.upper, &d.breakpoints(), 1e-12).unwrap()
}

fn grid(d: &dyn PriceDistribution, n: usize) -> Vec<f64> {
    let (lo, hi) = (d.quantile(1e-6) - 1.0, d.quantile(1.0 - 1e-6) + 1.0);
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

#[test]
fn densities_integrate_to_one() {
    for d in zoo() {
        let m = total_mass(d.as_ref());
        assert!((m - 1.0).abs() <= 1e-9, "{d:?}: mass {m}");
    }
}

#[test]
fn cdf_is_monotone_on_a_fine_grid() {
    for d in zoo() {
        let xs = grid(d.as_ref(), 1000);
        let mut prev = 0.0;
        for x in xs {
            let c = d.cdf(x);
            assert!((0.0..=1.0).contains(&c));
            assert!(c >= prev, "{d:?}: cdf drops at {x}");
            prev = c;
        }
    }
}

#[test]
fn partial_moments_add_up_to_the_mean() {
    for d in zoo() {
        let s = d.support();
        let full = integrate_with_breaks(|p| p * d.density(p), s.lower, s.upper, &d.breakpoints(), 1e-12).unwrap();
        assert!((d.mean() - full).abs() <= 1e-9, "{d:?}");
        for b in grid(d.as_ref(), 37) {
            let sum = d.partial_first_moment(b, Side::Below) + d.partial_first_moment(b, Side::Above);
            assert!((sum - full).abs() <= 1e-9, "{d:?} at {b}: {sum} vs {full}");
        }
    }
}

#[test]
fn partial_moments_match_quadrature() {
    for d in zoo() {
        let s = d.support();
        for b in grid(d.as_ref(), 11) {
            let b = b.clamp(s.lower, s.upper);
            let mut breaks = d.breakpoints();
            breaks.push(b);
            let below = if b > s.lower {
                integrate_with_breaks(|p| p * d.density(p), s.lower, b, &breaks, 1e-12).unwrap()
            } else {
                0.0
            };
            assert!((d.partial_first_moment(b, Side::Below) - below).abs() <= 1e-9, "{d:?} at {b}");
        }
    }
}

#[test]
fn gaussian_cdf_matches_quadrature_of_density() {
    for (mu, sigma) in [(0.0, 1.0), (2.5, 0.4), (-3.0, 5.0)] {
        let g = GaussianDist::new(mu, sigma).unwrap();
        for k in 0..100 {
            let x = mu - 6.0 * sigma + 12.0 * sigma * k as f64 / 99.0;
            let q = integrate(|p| g.density(p), f64::NEG_INFINITY, x, 1e-12).unwrap();
            assert!((g.cdf(x) - q).abs() <= 1e-9, "N({mu},{sigma}) at {x}: {} vs {q}", g.cdf(x));
        }
    }
}

#[test]
fn quantile_round_trip() {
    for d in zoo() {
        for k in 0..=200 {
            let u = 1e-6 + (1.0 - 2e-6) * k as f64 / 200.0;
            let x = d.quantile(u);
            assert!((d.cdf(x) - u).abs() <= 1e-8, "{d:?} at u={u}: cdf(q)={}", d.cdf(x));
        }
    }
}

#[test]
fn reflection_is_exact() {
    let m = MaxEntModel::new(1.0, 0.7).unwrap();
    let r = Reflected::new(m);
    for x in [0.0, 0.3, 1.0, 2.5] {
        assert_eq!(r.density(-x), m.density(x));
        assert_eq!(r.cdf(-x), m.sf(x));
    }
    assert_eq!(r.mean(), -m.mean());
}

#[test]
fn constructors_reject_bad_input() {
    assert!(make_gaussian(0.0, 0.0).is_err());
    assert!(make_gaussian(f64::NAN, 1.0).is_err());
    assert!(make_uniform(1.0, 1.0).is_err());
    assert!(make_tabulated(vec![0.0, 1.0, 0.5], vec![0.5, 0.5]).is_err());
    assert!(make_tabulated(vec![0.0, 1.0], vec![0.5, 0.5]).is_err());
    assert!(make_tabulated(vec![0.0, 1.0], vec![-1.0]).is_err());
    assert!(make_tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 0.0]).is_err());
}

proptest! {
    #[test]
    fn gaussian_invariants(mu in -50.0f64..50.0, sigma in 0.01f64..20.0, z in -6.0f64..6.0) {
        let g = GaussianDist::new(mu, sigma).unwrap();
        let x = mu + sigma * z;
        prop_assert!((g.cdf(x) + g.sf(x) - 1.0).abs() <= 1e-15);
        let sum = g.partial_first_moment(x, Side::Below) + g.partial_first_moment(x, Side::Above);
        prop_assert!((sum - mu).abs() <= 1e-9 * (1.0 + mu.abs()));
        let u = g.cdf(x);
        if (1e-6..=1.0 - 1e-6).contains(&u) {
            prop_assert!((g.cdf(g.quantile(u)) - u).abs() <= 1e-8);
        }
    }

    #[test]
    fn tabulated_invariants(masses in prop::collection::vec(0.0f64..5.0, 1..12), start in -10.0f64..10.0, u in 1e-6f64..(1.0 - 1e-6)) {
        prop_assume!(masses.iter().sum::<f64>() > 1e-3);
        let edges: Vec<f64> = (0..=masses.len()).map(|k| start + 0.5 * k as f64).collect();
        let d = make_tabulated(edges.clone(), masses).unwrap();
        prop_assert!((d.cdf(*edges.last().unwrap()) - 1.0).abs() <= 1e-12);
        prop_assert!((d.cdf(d.quantile(u)) - u).abs() <= 1e-8);
        let b = start + 0.3;
        let sum = d.partial_first_moment(b, Side::Below) + d.partial_first_moment(b, Side::Above);
        prop_assert!((sum - d.mean()).abs() <= 1e-9 * (1.0 + d.mean().abs()));
    }

    #[test]
    fn maxent_invariants(a in 0.0f64..10.0, t in 0.05f64..10.0, x in 0.0f64..30.0) {
        let m = MaxEntModel::new(a, t).unwrap();
        prop_assert!((m.cdf(x) + m.sf(x) - 1.0).abs() <= 1e-14);
        let sum = m.partial_first_moment(x, Side::Below) + m.partial_first_moment(x, Side::Above);
        prop_assert!((sum - m.mean()).abs() <= 1e-9 * (1.0 + m.mean()));
        let u = m.cdf(x);
        if (1e-6..=1.0 - 1e-6).contains(&u) {
            prop_assert!((m.cdf(m.quantile(u)) - u).abs() <= 1e-8);
        }
    }
}
