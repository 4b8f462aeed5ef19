mod common;

use common::{cov_scenario, mean_scenario, random_cutset, rng, CutsetShape};
use netdetect::cutset::{nonneg_criteria, noisy_verdict, toeplitz_inverse_entries, Conclusion};
use netdetect::graph::toeplitz_matrix;
use netdetect::lti::{subsystem_sv_extremes, GridOptions};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn shape(r: &mut impl Rng, nonneg: bool, rho: f64) -> CutsetShape {
    let ns = r.random_range(1..=3);
    CutsetShape {
        ns,
        nc: r.random_range(1..=2),
        np: r.random_range(1..=3),
        r: r.random_range(1..=ns),
        nonneg,
        rho: Some(rho),
        feedback: false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn verdicts_imply_the_direct_ordering(seed in any::<u64>()) {
        let mut r = rng(seed);
        let nonneg = r.random_bool(0.5);
        let rho = r.random_range(0.2..0.9);
        let sh = shape(&mut r, nonneg, rho);
        let inst = random_cutset(&mut r, &sh);
        let n = inst.model.n();
        let sv2 = r.random_range(0.1..3.0);
        let mean = mean_scenario(sh.r, n, 2.0, 1.0, 1.5, 100);
        let cov = cov_scenario(sh.r, n, 2.0, 0.5, 100);
        let v = noisy_verdict(&inst.partition, &inst.model, sv2, &[&mean, &cov], GridOptions::with_points(512)).unwrap();
        for (verdict, direct) in [&v.mean, &v.cov].into_iter().zip(&v.direct) {
            prop_assert!(direct.agrees_with(verdict.conclusion, 1e-6), "{} vs {:?}", verdict.conclusion, direct);
        }
    }

    #[test]
    fn nonnegative_partitions_peak_at_one(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = r.random_range(0.2..0.95);
        let sh = shape(&mut r, true, rho);
        let inst = random_cutset(&mut r, &sh);
        let ext = subsystem_sv_extremes(&inst.partition, false, GridOptions::with_points(512)).unwrap();
        prop_assert!((ext.sup_max.value - ext.max_at_one).abs() <= 1e-9 * ext.max_at_one + 1e-12);
    }

    #[test]
    fn norm_bound_keeps_the_gain_below_one(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = r.random_range(0.05..0.5);
        let sh = shape(&mut r, true, rho);
        let inst = random_cutset(&mut r, &sh);
        let crit = nonneg_criteria(&inst.partition).unwrap();
        prop_assume!(crit.bound_pass);
        let ext = subsystem_sv_extremes(&inst.partition, true, GridOptions::default()).unwrap();
        prop_assert!(ext.max_at_one < 1.0, "rho_bar(1) = {}", ext.max_at_one);
        prop_assert_eq!(crit.verdict().conclusion, Conclusion::CutsetNoWorse);
    }

    #[test]
    fn toeplitz_closed_form_matches_dense_inverse(seed in any::<u64>(), n in 2usize..=50) {
        let mut r = rng(seed);
        let a = r.random_range(0.0..0.6);
        let b = r.random_range(0.0..(1.0 - a) / 2.0);
        let c = r.random_range(0.0..(1.0 - a) / 2.0);
        let dense = (DMatrix::identity(n, n) - toeplitz_matrix(n, a, b, c).unwrap()).try_inverse().unwrap();
        let closed = toeplitz_inverse_entries(n, a, b, c).unwrap();
        prop_assert!((dense - closed).amax() < 1e-10);
    }
}
