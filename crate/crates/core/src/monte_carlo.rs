//! Seeded Monte Carlo estimates of detector error probabilities.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::detectors::{
    build_cov_rule, build_mean_rule, build_mean_rule_support, optimal_discriminant, Detector, Hypothesis,
};
use crate::error::{Error, Result};
use crate::error_prob::{finite_snr_mean, pe_ldmap, pe_mean_priors};
use crate::graph::NetworkModel;
use crate::linalg::{psd_sqrt, sym_eigen_desc, PSD_CLAMP};
use crate::lti::{stacked_moments, ScenarioSpec, SensorSet, StackedMoments};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorKind {
    /// MAP rule for the mean-shift model.
    MapMean,
    /// LD-MAP rule for the covariance-shift model.
    LdmapCov,
    /// MAP rule on the inputs `w[0..N-1]` themselves.
    OracleInput,
}

impl std::fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::MapMean => "map_mean",
            Self::LdmapCov => "ldmap_cov",
            Self::OracleInput => "oracle_input",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialPlan<T: Scalar> {
    /// Trials per hypothesis.
    pub trials: usize,
    pub seed: u64,
    pub scenario: ScenarioSpec<T>,
    pub sensors: SensorSet<T>,
    pub detector: DetectorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalReport<T: Scalar> {
    pub p_hat: T,
    pub std_err: T,
    /// Trials per hypothesis.
    pub trials_used: usize,
    /// Misclassified trials under `H1` and `H2`.
    pub errors: [u64; 2],
    pub analytic_pe: Option<T>,
}

impl<T: Scalar> EmpiricalReport<T> {
    /// `|p_hat - analytic| <= k * std_err`, or `None` without a companion.
    pub fn within(&self, k: f64) -> Option<bool> {
        self.analytic_pe
            .map(|pe| (self.p_hat - pe).mag() <= T::lit(k) * self.std_err)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sub-seed of trial `trial` under `hypothesis`.
pub fn sub_seed(master: u64, hypothesis: Hypothesis, trial: u64) -> u64 {
    let h = splitmix64(master ^ splitmix64(hypothesis.index() as u64 + 1));
    splitmix64(h ^ splitmix64(trial))
}

/// One simulated run: stacked measurements and the inputs that drove them.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw<T> {
    /// `[y[1]; ...; y[N]]`, length `mN`.
    pub y: Vec<T>,
    /// `[w[0]; ...; w[N-1]]`, length `rN`.
    pub w: Vec<T>,
}

/// Precomputed square roots for repeated trajectory sampling.
///
/// Process noise (`x[0]` and `w`) and sensor noise come from separate ChaCha
/// streams of the same seed, so runs that differ only in the sensor noise
/// level share their input realizations.
#[derive(Debug, Clone)]
pub struct TrajectorySampler<'a, T: Scalar> {
    model: &'a NetworkModel<T>,
    nodes: Vec<usize>,
    sigma_v: T,
    mu: [DVector<T>; 2],
    root: [DMatrix<T>; 2],
    root0: DMatrix<T>,
    horizon: usize,
}

impl<'a, T: Scalar> TrajectorySampler<'a, T> {
    pub fn new(model: &'a NetworkModel<T>, scenario: &ScenarioSpec<T>, sensors: &SensorSet<T>) -> Result<Self> {
        scenario.validate()?;
        if sensors.n() != model.n() || scenario.r() != model.r() || scenario.sigma0.nrows() != model.n() {
            return Err(Error::Dimension(format!(
                "network n={} r={}, sensors over {} nodes, scenario r={}, Sigma_0 {}x{}",
                model.n(),
                model.r(),
                sensors.n(),
                scenario.r(),
                scenario.sigma0.nrows(),
                scenario.sigma0.ncols()
            )));
        }
        if scenario.horizon == 0 {
            return Err(Error::InvalidParameter("horizon N must be >= 1".into()));
        }
        Ok(Self {
            model,
            nodes: sensors.nodes().to_vec(),
            sigma_v: sensors.sigma_v2().sqrt(),
            mu: [scenario.mu1.clone(), scenario.mu2.clone()],
            root: [psd_sqrt(&scenario.sigma1)?, psd_sqrt(&scenario.sigma2)?],
            root0: psd_sqrt(&scenario.sigma0)?,
            horizon: scenario.horizon,
        })
    }

    pub fn sample(&self, hypothesis: Hypothesis, seed: u64) -> Draw<T> {
        let n = self.model.n();
        let r = self.model.r();
        let m = self.nodes.len();
        let g = self.model.adjacency();
        let inputs = self.model.inputs();
        let h = hypothesis.index();
        let (mu, root) = (&self.mu[h], &self.root[h]);

        let mut proc = ChaCha8Rng::seed_from_u64(seed);
        let mut sens = ChaCha8Rng::seed_from_u64(seed);
        sens.set_stream(1);
        let mut z = vec![T::zero(); n.max(r)];

        let mut x = vec![T::zero(); n];
        normals(&mut proc, &mut z[..n]);
        mat_vec_into(&self.root0, &z[..n], &mut x);

        let mut next = vec![T::zero(); n];
        let mut w = vec![T::zero(); r * self.horizon];
        let mut y = vec![T::zero(); m * self.horizon];
        for k in 0..self.horizon {
            let wk = &mut w[k * r..(k + 1) * r];
            normals(&mut proc, &mut z[..r]);
            mat_vec_into(root, &z[..r], wk);
            for (wi, &mi) in wk.iter_mut().zip(mu.iter()) {
                *wi += mi;
            }
            mat_vec_into(g, &x, &mut next);
            for (&node, &wi) in inputs.iter().zip(wk.iter()) {
                next[node] += wi;
            }
            std::mem::swap(&mut x, &mut next);
            for (i, &node) in self.nodes.iter().enumerate() {
                let v: f64 = sens.sample(StandardNormal);
                y[k * m + i] = x[node] + self.sigma_v * T::lit(v);
            }
        }
        Draw { y, w }
    }
}

fn normals<T: Scalar>(rng: &mut ChaCha8Rng, out: &mut [T]) {
    for o in out {
        let v: f64 = rng.sample(StandardNormal);
        *o = T::lit(v);
    }
}

fn mat_vec_into<T: Scalar>(a: &DMatrix<T>, x: &[T], out: &mut [T]) {
    out.iter_mut().for_each(|o| *o = T::zero());
    for (j, &xj) in x.iter().enumerate() {
        if xj == T::zero() {
            continue;
        }
        for (o, &aij) in out.iter_mut().zip(a.column(j).iter()) {
            *o += aij * xj;
        }
    }
}

/// Stacked measurements of one trajectory, fully determined by `sub_seed`.
pub fn simulate_trajectory<T: Scalar>(
    model: &NetworkModel<T>,
    scenario: &ScenarioSpec<T>,
    hypothesis: Hypothesis,
    sensors: &SensorSet<T>,
    sub_seed: u64,
) -> Result<Vec<T>> {
    Ok(TrajectorySampler::new(model, scenario, sensors)?.sample(hypothesis, sub_seed).y)
}

/// Gaussian log density restricted to the support of a possibly singular
/// covariance.
#[derive(Debug, Clone)]
struct SupportDensity<T: Scalar> {
    mu: DVector<T>,
    /// Orthonormal basis of the range, columns scaled by `1 / sqrt(lambda)`.
    whiten: DMatrix<T>,
    basis: DMatrix<T>,
    log_det: T,
}

impl<T: Scalar> SupportDensity<T> {
    fn new(mu: &DVector<T>, sigma: &DMatrix<T>) -> Self {
        let eig = sym_eigen_desc(sigma);
        let top = eig.values.iter().fold(T::zero(), |a, &v| a.max(v));
        let thr = T::tol(PSD_CLAMP) * top.max(T::one());
        let rank = eig.values.iter().filter(|&&v| v > thr).count();
        let basis = eig.vectors.columns(0, rank).into_owned();
        let mut whiten = basis.clone();
        let mut log_det = T::zero();
        for k in 0..rank {
            let lam = eig.values[k];
            log_det += lam.ln();
            whiten.column_mut(k).scale_mut(T::one() / lam.sqrt());
        }
        Self {
            mu: mu.clone(),
            whiten,
            basis,
            log_det,
        }
    }

    fn rank(&self) -> usize {
        self.basis.ncols()
    }

    /// `None` off the support.
    fn log_density(&self, w: &[T]) -> Option<T> {
        let d = DVector::from_column_slice(w) - &self.mu;
        let outside = &d - &self.basis * (self.basis.transpose() * &d);
        let scale = T::one() + d.norm() + self.mu.norm();
        if outside.norm() > T::tol(1e-9) * scale {
            return None;
        }
        let u = self.whiten.transpose() * d;
        Some(-(u.norm_squared() + self.log_det) * T::lit(0.5))
    }
}

/// MAP rule with direct access to `w[0..N-1]`. A point on the support of
/// only one hypothesis goes to it; when both supports contain the point but
/// differ in dimension, the lower-dimensional one carries the point mass.
#[derive(Debug, Clone)]
pub struct OracleInputRule<T: Scalar> {
    dens: [SupportDensity<T>; 2],
    r: usize,
    gamma: T,
}

impl<T: Scalar> OracleInputRule<T> {
    pub fn new(scenario: &ScenarioSpec<T>) -> Result<Self> {
        scenario.validate()?;
        let gamma = crate::detectors::log_prior_ratio((scenario.pi1, scenario.pi2))?;
        Ok(Self {
            dens: [
                SupportDensity::new(&scenario.mu1, &scenario.sigma1),
                SupportDensity::new(&scenario.mu2, &scenario.sigma2),
            ],
            r: scenario.r(),
            gamma,
        })
    }

    pub fn decide_inputs(&self, w: &[T]) -> Hypothesis {
        let mut ll = [Some(T::zero()); 2];
        for chunk in w.chunks(self.r) {
            for (h, dens) in self.dens.iter().enumerate() {
                ll[h] = ll[h].and_then(|acc| dens.log_density(chunk).map(|v| acc + v));
            }
        }
        match (ll[0], ll[1]) {
            (_, None) => Hypothesis::H1,
            (None, Some(_)) => Hypothesis::H2,
            (Some(l1), Some(l2)) => match self.dens[0].rank().cmp(&self.dens[1].rank()) {
                std::cmp::Ordering::Less => Hypothesis::H1,
                std::cmp::Ordering::Greater => Hypothesis::H2,
                std::cmp::Ordering::Equal => {
                    if l2 - l1 > self.gamma {
                        Hypothesis::H2
                    } else {
                        Hypothesis::H1
                    }
                }
            },
        }
    }
}

enum Rule<T: Scalar> {
    Measurements(Box<dyn Detector<T> + Send>),
    Inputs(OracleInputRule<T>),
}

impl<T: Scalar> Rule<T> {
    fn decide(&self, d: &Draw<T>) -> Hypothesis {
        match self {
            Self::Measurements(rule) => rule.decide(&d.y),
            Self::Inputs(rule) => rule.decide_inputs(&d.w),
        }
    }
}

fn build_rule<T: Scalar>(
    plan: &TrialPlan<T>,
    moments: &StackedMoments<T>,
) -> Result<(Rule<T>, Option<T>)> {
    let sc = &plan.scenario;
    let priors = (sc.pi1, sc.pi2);
    match plan.detector {
        DetectorKind::MapMean => {
            if plan.sensors.sigma_v2() > T::zero() {
                let rule = build_mean_rule(moments, priors)?;
                let analytic = pe_mean_priors(finite_snr_mean(moments)?, sc.pi1)?;
                Ok((Rule::Measurements(Box::new(rule)), Some(analytic)))
            } else {
                let rule = build_mean_rule_support(moments, priors)?;
                let analytic = finite_snr_mean(moments)
                    .ok()
                    .and_then(|eta| pe_mean_priors(eta, sc.pi1).ok());
                Ok((Rule::Measurements(Box::new(rule)), analytic))
            }
        }
        DetectorKind::LdmapCov => {
            let (b, _) = optimal_discriminant(&moments.sigma_bar_1, &moments.sigma_bar_2)?;
            let rule = build_cov_rule(moments, &b, priors)?;
            let analytic = pe_ldmap(rule.d1, rule.d2, sc.pi1)?;
            Ok((Rule::Measurements(Box::new(rule)), Some(analytic)))
        }
        DetectorKind::OracleInput => Ok((Rule::Inputs(OracleInputRule::new(sc)?), None)),
    }
}

/// `P_hat = pi_1 e_1 / T + pi_2 e_2 / T` with the stratified standard error.
pub fn estimate_error<T: Scalar>(plan: &TrialPlan<T>, model: &NetworkModel<T>) -> Result<EmpiricalReport<T>> {
    if plan.trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let moments = stacked_moments(model, &plan.sensors, &plan.scenario)?;
    let (rule, analytic_pe) = build_rule(plan, &moments)?;
    let sampler = TrajectorySampler::new(model, &plan.scenario, &plan.sensors)?;

    let mut errors = [0u64; 2];
    for h in [Hypothesis::H1, Hypothesis::H2] {
        errors[h.index()] = (0..plan.trials as u64)
            .into_par_iter()
            .filter(|&t| rule.decide(&sampler.sample(h, sub_seed(plan.seed, h, t))) != h)
            .count() as u64;
    }

    let trials = T::from_count(plan.trials);
    let priors = [plan.scenario.pi1, plan.scenario.pi2];
    let mut p_hat = T::zero();
    let mut var = T::zero();
    for h in 0..2 {
        let rate = T::lit(errors[h] as f64) / trials;
        p_hat += priors[h] * rate;
        var += priors[h] * priors[h] * rate * (T::one() - rate) / trials;
    }
    Ok(EmpiricalReport {
        p_hat: p_hat.min(T::one()).max(T::zero()),
        std_err: var.sqrt(),
        trials_used: plan.trials,
        errors,
        analytic_pe,
    })
}

/// `sqrt(se_a^2 + se_b^2)`.
pub fn combined_std_err<T: Scalar>(a: &EmpiricalReport<T>, b: &EmpiricalReport<T>) -> T {
    (a.std_err * a.std_err + b.std_err * b.std_err).sqrt()
}
