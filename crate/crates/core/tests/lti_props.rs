mod common;

use common::{mean_scenario, random_spd, random_stable, rng};
use nalgebra::{DMatrix, DVector};
use netdetect::graph::NetworkModel;
use netdetect::linalg::sym_eigen_desc;
use netdetect::lti::{hinf_gain, stacked_moments, transfer, GridOptions, ScenarioSpec, SensorSet};
use netdetect::monte_carlo::TrajectorySampler;
use netdetect::detectors::Hypothesis;
use num_complex::Complex;
use proptest::prelude::*;
use rand::Rng;

fn sensors_for(r: &mut impl Rng, n: usize, sv2: f64) -> SensorSet<f64> {
    let mut nodes: Vec<usize> = (0..n).filter(|_| r.random_bool(0.5)).collect();
    if nodes.is_empty() {
        nodes.push(n - 1);
    }
    SensorSet::new(&nodes, n, sv2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn impulse_blocks_reproduce_the_noiseless_trajectory(seed in any::<u64>(), n in 1usize..7, horizon in 1usize..12) {
        let mut r = rng(seed);
        let inputs = r.random_range(1..=n.min(3));
        let model = random_stable(&mut r, n, inputs, 0.4, false, 0.9);
        let sensors = sensors_for(&mut r, n, 0.0);
        let mu = DVector::from_fn(inputs, |_, _| r.random_range(-2.0..2.0));
        let sc = mean_scenario(inputs, n, 0.0, 0.0, 1.0, horizon);
        let m = stacked_moments(&model, &sensors, &sc).unwrap();
        let stacked_mu = DVector::from_fn(inputs * horizon, |k, _| mu[k % inputs]);
        let predicted = &m.impulse * stacked_mu;

        let mut x = DVector::zeros(n);
        let mut simulated = Vec::new();
        for _ in 0..horizon {
            x = model.adjacency() * x + model.input_matrix() * &mu;
            simulated.extend((sensors.selector() * &x).iter().copied());
        }
        for (p, s) in predicted.iter().zip(&simulated) {
            prop_assert!((p - s).abs() <= 1e-12 * (1.0 + s.abs()));
        }
    }

    #[test]
    fn stacked_covariances_are_psd(seed in any::<u64>(), n in 1usize..6, horizon in 1usize..8) {
        let mut r = rng(seed);
        let inputs = r.random_range(1..=n.min(2));
        let model = random_stable(&mut r, n, inputs, 0.5, false, 0.8);
        let sv2 = if r.random_bool(0.3) { 0.0 } else { r.random_range(0.1..2.0) };
        let sensors = sensors_for(&mut r, n, sv2);
        let s1 = random_spd(&mut r, inputs);
        let s2 = random_spd(&mut r, inputs);
        let s0 = random_spd(&mut r, n);
        let sc = ScenarioSpec::new(DVector::zeros(inputs), DVector::zeros(inputs), s1, s2, (0.5, 0.5), s0, horizon).unwrap();
        let m = stacked_moments(&model, &sensors, &sc).unwrap();
        for s in [&m.sigma_bar_1, &m.sigma_bar_2] {
            prop_assert!((s - s.transpose()).amax() <= 1e-12 * s.amax().max(1.0));
            let low = *sym_eigen_desc(s).values.iter().last().unwrap();
            prop_assert!(low >= -1e-10 * s.amax().max(1.0));
        }
    }

    #[test]
    fn nonnegative_gain_peaks_at_one(seed in any::<u64>(), n in 2usize..7) {
        let mut r = rng(seed);
        let inputs = r.random_range(1..=n.min(2));
        let rho = r.random_range(0.2..0.95);
        let model = random_stable(&mut r, n, inputs, 0.4, true, rho);
        let sensors = sensors_for(&mut r, n, 1.0);
        let w = DMatrix::identity(inputs, inputs);
        let peak = hinf_gain(&model, &sensors, &w, GridOptions::with_points(512)).unwrap();
        let at_one = transfer(&model, &sensors, Complex::new(1.0, 0.0)).unwrap();
        let s1 = at_one.svd(false, false).singular_values[0];
        prop_assert!((peak.value - s1).abs() <= 1e-9 * s1 + 1e-12, "peak {} at {}, T(1) {}", peak.value, peak.omega, s1);
    }

    #[test]
    fn nilpotent_transfer_at_one_is_a_finite_sum(seed in any::<u64>(), n in 1usize..8) {
        // strictly lower-triangular adjacency, so G^n = 0
        let mut r = rng(seed);
        let g = DMatrix::from_fn(n, n, |i, j| if i > j && r.random_bool(0.5) { r.random_range(-1.0..1.0) } else { 0.0 });
        let model = NetworkModel::from_matrix(g.clone(), &[0]).unwrap();
        let sensors = sensors_for(&mut r, n, 0.0);
        let mut sum = DMatrix::<f64>::identity(n, n);
        let mut power = DMatrix::<f64>::identity(n, n);
        for _ in 1..n {
            power = &power * &g;
            sum += &power;
        }
        let expected = sensors.selector() * sum * model.input_matrix();
        let got = transfer(&model, &sensors, Complex::new(1.0, 0.0)).unwrap();
        for (e, t) in expected.iter().zip(got.iter()) {
            prop_assert!((t.re - e).abs() <= 1e-12 * (1.0 + e.abs()) && t.im.abs() <= 1e-12);
        }
    }
}

/// Sample moments of simulated outputs against the stacked moments.
#[test]
fn simulated_outputs_match_stacked_moments() {
    let mut r = rng(4);
    let n = 4;
    let model = random_stable(&mut r, n, 1, 0.5, false, 0.8);
    let sensors = SensorSet::new(&[1, 3], n, 0.5).unwrap();
    let sc = ScenarioSpec::new(
        DVector::from_element(1, 1.5),
        DVector::from_element(1, 0.5),
        DMatrix::from_element(1, 1, 2.0),
        DMatrix::from_element(1, 1, 2.0),
        (0.5, 0.5),
        DMatrix::identity(n, n) * 0.3,
        3,
    )
    .unwrap();
    let m = stacked_moments(&model, &sensors, &sc).unwrap();
    let dim = m.dim();
    let sampler = TrajectorySampler::new(&model, &sc, &sensors).unwrap();
    let trials = 1_000_000u64;
    let mut sum = DVector::<f64>::zeros(dim);
    let mut outer = DMatrix::<f64>::zeros(dim, dim);
    for t in 0..trials {
        let y = DVector::from_vec(sampler.sample(Hypothesis::H1, t).y);
        sum += &y;
        outer += &y * y.transpose();
    }
    let count = trials as f64;
    let mean = &sum / count;
    let cov = &outer / count - &mean * mean.transpose();
    let sigma = &m.sigma_bar_1;
    for i in 0..dim {
        let se = (sigma[(i, i)] / count).sqrt();
        assert!((mean[i] - m.mu_bar_1[i]).abs() <= 4.0 * se, "mean {i}");
        for j in 0..dim {
            // var of x_i x_j for a Gaussian pair
            let se = ((sigma[(i, i)] * sigma[(j, j)] + sigma[(i, j)].powi(2)) / count).sqrt();
            assert!((cov[(i, j)] - sigma[(i, j)]).abs() <= 3.0 * se, "cov ({i}, {j})");
        }
    }
}
