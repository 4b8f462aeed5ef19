#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use netdetect::graph::{build_network, verify_cutset, CutsetPartition, NetworkModel};
use netdetect::lti::ScenarioSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn weight(rng: &mut ChaCha8Rng, nonneg: bool) -> f64 {
    let w = rng.random_range(0.1..1.0);
    if nonneg || rng.random_bool(0.5) {
        w
    } else {
        -w
    }
}

/// Rescales `g` to spectral radius `rho` when it is not nilpotent.
fn rescale(g: &mut DMatrix<f64>, rho: f64) {
    let nilpotent = NetworkModel::from_matrix(g.clone(), &[0]).is_ok_and(|m| m.is_nilpotent());
    if !nilpotent {
        *g *= rho / netdetect::linalg::spectral_radius(g);
    }
}

/// Random network with the given radius; inputs are the first `r` nodes.
pub fn random_stable(rng: &mut ChaCha8Rng, n: usize, r: usize, density: f64, nonneg: bool, rho: f64) -> NetworkModel<f64> {
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if rng.random_bool(density) {
                g[(i, j)] = weight(rng, nonneg);
            }
        }
    }
    // keep every node reachable from the inputs
    for i in r..n {
        if g.row(i).iter().all(|&w| w == 0.0) {
            let j = rng.random_range(0..i);
            g[(i, j)] = weight(rng, nonneg);
        }
    }
    rescale(&mut g, rho);
    let inputs: Vec<usize> = (0..r).collect();
    NetworkModel::from_matrix(g, &inputs).unwrap()
}

/// A network with a valid cutset: sources `0..ns`, cutset next, then `P`.
pub struct CutsetInstance {
    pub model: NetworkModel<f64>,
    pub partition: CutsetPartition<f64>,
}

pub struct CutsetShape {
    pub ns: usize,
    pub nc: usize,
    pub np: usize,
    pub r: usize,
    pub nonneg: bool,
    /// Target spectral radius; `None` leaves the weights as drawn.
    pub rho: Option<f64>,
    /// Allow `P -> C` feedback edges.
    pub feedback: bool,
}

pub fn random_cutset(rng: &mut ChaCha8Rng, shape: &CutsetShape) -> CutsetInstance {
    let CutsetShape { ns, nc, np, r, nonneg, .. } = *shape;
    let n = ns + nc + np;
    let s: Vec<usize> = (0..ns).collect();
    let c: Vec<usize> = (ns..ns + nc).collect();
    let p: Vec<usize> = (ns + nc..n).collect();
    let mut g = DMatrix::zeros(n, n);
    let maybe = |g: &mut DMatrix<f64>, rng: &mut ChaCha8Rng, i: usize, j: usize, prob: f64| {
        if rng.random_bool(prob) {
            g[(i, j)] = weight(rng, nonneg);
        }
    };
    for &i in &s {
        for &j in &s {
            maybe(&mut g, rng, i, j, 0.3);
        }
    }
    for &i in &c {
        for &j in s.iter().chain(&c) {
            maybe(&mut g, rng, i, j, 0.4);
        }
        if shape.feedback {
            for &j in &p {
                maybe(&mut g, rng, i, j, 0.15);
            }
        }
        let j = s[rng.random_range(0..ns)];
        if g.row(i).columns(0, ns).iter().all(|&w| w == 0.0) {
            g[(i, j)] = weight(rng, nonneg);
        }
    }
    for &i in &p {
        for &j in c.iter().chain(&p) {
            maybe(&mut g, rng, i, j, 0.4);
        }
        if g.row(i).columns(ns, nc + np).iter().all(|&w| w == 0.0) {
            let j = c[rng.random_range(0..nc)];
            g[(i, j)] = weight(rng, nonneg);
        }
    }
    // inputs must reach the source block's links to C
    for (k, &ci) in c.iter().enumerate() {
        let src = k % r.min(ns);
        if g[(ci, src)] == 0.0 {
            g[(ci, src)] = weight(rng, nonneg);
        }
    }
    if let Some(rho) = shape.rho {
        rescale(&mut g, rho);
    }
    let inputs: Vec<usize> = (0..r).collect();
    let model = NetworkModel::from_matrix(g, &inputs).unwrap();
    let partition = verify_cutset(&model, &s, &c, &p, 1).unwrap();
    CutsetInstance { model, partition }
}

pub fn scalar_model(g: f64) -> NetworkModel<f64> {
    if g == 0.0 {
        build_network(1, &[], &[0]).unwrap()
    } else {
        build_network(1, &[(0, 0, g)], &[0]).unwrap()
    }
}

/// Mean shift with isotropic covariance, equal priors, `Sigma_0 = 0`.
pub fn mean_scenario(r: usize, n: usize, mu1: f64, mu2: f64, s: f64, horizon: usize) -> ScenarioSpec<f64> {
    ScenarioSpec::mean_shift(
        DVector::from_element(r, mu1),
        DVector::from_element(r, mu2),
        DMatrix::identity(r, r) * s,
        n,
        horizon,
    )
    .unwrap()
}

/// Covariance shift `s1 I` versus `s2 I`, zero mean.
pub fn cov_scenario(r: usize, n: usize, s1: f64, s2: f64, horizon: usize) -> ScenarioSpec<f64> {
    ScenarioSpec::cov_shift(
        DVector::zeros(r),
        DMatrix::identity(r, r) * s1,
        DMatrix::identity(r, r) * s2,
        n,
        horizon,
    )
    .unwrap()
}

/// Random symmetric positive definite matrix.
pub fn random_spd(rng: &mut ChaCha8Rng, k: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(k, k, |_, _| rng.random_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(k, k) * 0.2
}
