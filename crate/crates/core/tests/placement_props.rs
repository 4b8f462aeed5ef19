mod common;

use common::{mean_scenario, random_stable, rng, cov_scenario};
use netdetect::error_prob::{finite_snr_mean, pe_mean};
use netdetect::lti::{stacked_moments, GridOptions, SensorSet};
use netdetect::placement::{enumerate_subsets, rank_placements, Criterion, PlacementModel};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn snr_order_is_error_probability_order(seed in any::<u64>(), k in 1usize..3) {
        let mut r = rng(seed);
        let n = r.random_range(4..8);
        let rho = r.random_range(0.3..0.9);
        let model = random_stable(&mut r, n, 1, 0.4, false, rho);
        let mean = PlacementModel { scenario: mean_scenario(1, n, 2.0, 1.0, 1.5, 50), sigma_v2: 1.0 };
        let cov = PlacementModel { scenario: cov_scenario(1, n, 2.0, 0.2, 50), sigma_v2: 1.0 };
        let pool: Vec<usize> = (1..n).collect();
        let subsets = enumerate_subsets(&model, &pool, k, 0).unwrap();
        for crit in [Criterion::Mean, Criterion::Covariance] {
            let rk = rank_placements(&model, Some(&mean), Some(&cov), &subsets, crit, None, GridOptions::with_points(256)).unwrap();
            let pe: Vec<f64> = rk.ranked.iter().map(|p| match crit {
                Criterion::Mean => p.pe_mean.unwrap(),
                Criterion::Covariance => p.pe_cov.unwrap(),
            }).collect();
            prop_assert!(pe.windows(2).all(|w| w[0] <= w[1]));
            for (i, p) in rk.ranked.iter().enumerate() {
                prop_assert_eq!(p.rank, i + 1);
                prop_assert_eq!(p.label, rk.ranked.len() - i);
            }
        }
    }

    #[test]
    fn adding_a_sensor_never_hurts(seed in any::<u64>(), horizon in 1usize..15) {
        let mut r = rng(seed);
        let n = r.random_range(3..8);
        let rho = r.random_range(0.3..0.95);
        let model = random_stable(&mut r, n, 1, 0.4, false, rho);
        let sc = mean_scenario(1, n, 2.0, 1.0, 1.5, horizon);
        let sv2 = r.random_range(0.1..2.0);
        let mut nodes = vec![r.random_range(0..n)];
        let pe = |nodes: &[usize]| {
            let s = SensorSet::new(nodes, n, sv2).unwrap();
            pe_mean(finite_snr_mean(&stacked_moments(&model, &s, &sc).unwrap()).unwrap()).unwrap().value
        };
        let mut prev = pe(&nodes);
        for v in 0..n {
            if nodes.contains(&v) || r.random_bool(0.5) {
                continue;
            }
            nodes.push(v);
            nodes.sort_unstable();
            let next = pe(&nodes);
            prop_assert!(next <= prev * (1.0 + 1e-9) + 1e-300, "{next} > {prev}");
            prev = next;
        }
    }
}
