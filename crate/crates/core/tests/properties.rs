use mmwave_sir::coverage::{equal_pathloss_boundary, path_loss, state_probability};
use mmwave_sir::fit::ks_statistic;
use mmwave_sir::rng::par_map_streams;
use mmwave_sir::{FittedDist, Law, LinkState, SystemParams};
use proptest::prelude::*;

fn law() -> impl Strategy<Value = Law> {
    prop_oneof![
        (1e-3..10.0f64).prop_map(|rate| Law::Exponential { rate }),
        (0.1..10.0f64, 0.2..3.0f64).prop_map(|(a, b)| Law::LogLogistic { a, b }),
        (0.2..3.0f64, 0.2..3.0f64).prop_map(|(c, k)| Law::Burr { c, k }),
        (0.1..3.0f64, -2.0..2.0f64).prop_map(|(sigma, mu)| Law::LogNormal { sigma, mu }),
        (0.1..5.0f64, 0.1..100.0f64).prop_map(|(m, g)| Law::Nakagami { m, g }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cdf_is_monotone_and_bounded(law in law(), x in 1e-6..1e3f64, dx in 0.0..10.0f64) {
        let lo = law.distribution(x);
        let hi = law.distribution(x + dx);
        prop_assert!((0.0..=1.0).contains(&lo));
        prop_assert!(hi >= lo - 1e-12);
        prop_assert!(law.density(x) >= 0.0);
    }

    #[test]
    fn quantile_inverts_cdf(law in law(), p in 0.01..0.99f64) {
        let q = law.quantile(p);
        prop_assert!((law.distribution(q) - p).abs() < 1e-6);
    }

    #[test]
    fn ks_is_a_distance(law in law(), seed in 0u64..1000) {
        let draws = par_map_streams(seed, 300, |rng, _| law.sample(rng));
        let d = ks_statistic(&draws, &FittedDist::uncapped(law).unwrap()).unwrap();
        prop_assert!(d > 0.0 && d <= 1.0);
    }

    #[test]
    fn boundary_equalizes_path_loss(r in 0.1..5000.0f64, from_los in any::<bool>()) {
        let p = SystemParams::default();
        let (i, j) = if from_los { (LinkState::Los, LinkState::Nlos) } else { (LinkState::Nlos, LinkState::Los) };
        let b = equal_pathloss_boundary(r, i, j, &p).unwrap();
        let lhs = path_loss(b, j, &p).unwrap();
        let rhs = path_loss(r, i, &p).unwrap();
        prop_assert!((lhs / rhs - 1.0).abs() < 1e-9);
        prop_assert!(equal_pathloss_boundary(r * 1.01, i, j, &p).unwrap() > b);
    }

    #[test]
    fn state_probabilities_sum_to_one(r in 0.0..1e4f64) {
        let p = SystemParams::default();
        let total = state_probability(r, LinkState::Los, &p) + state_probability(r, LinkState::Nlos, &p);
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}
