//! Error probabilities and SNRs of the mean-shift and covariance-shift
//! detectors, finite-horizon and asymptotic.
//!
//! For the mean-shift MAP rule the statistic `mu_delta' Sigma^{-1} Y` is
//! Gaussian with separation `eta^2` and variance `eta^2` under both
//! hypotheses, so with equal priors each conditional error equals
//! `Q(eta / 2)` and so does their average.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::graph::NetworkModel;
use crate::linalg::{self, psd_inv_sqrt, psd_sqrt, sym_eigen_desc, top_generalized_eigen};
use crate::lti::{
    hinf_gain, matrices_close, stacked_moments, transfer, GridOptions, IdenticalStats, ModelKind,
    ScenarioSpec, SensorSet, StackedMoments,
};
use crate::scalar::Scalar;

/// `Pr[Z >= t]` for a standard normal `Z`.
pub fn gaussian_q<T: Scalar>(t: T) -> T {
    T::lit(0.5 * libm::erfc(t.as_f64() / std::f64::consts::SQRT_2))
}

/// `Pr[Y >= t]` for `Y ~ chi^2(1)`.
pub fn chi2_q1<T: Scalar>(t: T) -> Result<T> {
    if !(t >= T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "chi-squared threshold {} must be non-negative",
            t.as_f64()
        )));
    }
    Ok(T::lit(2.0) * gaussian_q(t.sqrt()))
}

/// A probability, flagged when it comes from a degenerate limit
/// (`eta = 0` or `R = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probability<T: Scalar> {
    pub value: T,
    pub degenerate: bool,
}

fn non_negative<T: Scalar>(x: T, what: &str) -> Result<()> {
    if !(x >= T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "{what} = {} must be non-negative",
            x.as_f64()
        )));
    }
    Ok(())
}

fn check_prior<T: Scalar>(pi1: T) -> Result<()> {
    if !(pi1 > T::zero() && pi1 < T::one()) {
        return Err(Error::InvalidParameter(format!(
            "prior pi_1 = {} must lie in (0, 1)",
            pi1.as_f64()
        )));
    }
    Ok(())
}

/// Equal-prior error probability of the mean-shift MAP rule, `Q(eta / 2)`.
pub fn pe_mean<T: Scalar>(eta: T) -> Result<Probability<T>> {
    non_negative(eta, "eta")?;
    Ok(Probability {
        value: gaussian_q(eta * T::lit(0.5)),
        degenerate: eta == T::zero(),
    })
}

/// Mean-shift MAP error probability for priors `(pi1, 1 - pi1)`.
pub fn pe_mean_priors<T: Scalar>(eta: T, pi1: T) -> Result<T> {
    non_negative(eta, "eta")?;
    check_prior(pi1)?;
    let pi2 = T::one() - pi1;
    if eta == T::zero() {
        return Ok(pi1.min(pi2));
    }
    let gamma = (pi1 / pi2).ln();
    let half = eta * T::lit(0.5);
    let shift = gamma / eta;
    Ok(pi1 * gaussian_q(half + shift) + pi2 * gaussian_q(half - shift))
}

/// `tau = ln R / (R - 1)`, continuous at `R = 1`.
pub fn tau<T: Scalar>(r: T) -> T {
    let x = r - T::one();
    if x.mag() < T::tol(1e-300) {
        return T::one();
    }
    T::lit(libm::log1p(x.as_f64()) / x.as_f64())
}

/// Equal-prior error probability of the LD-MAP covariance rule with SNR `R`.
pub fn pe_cov<T: Scalar>(r: T) -> Result<Probability<T>> {
    if !(r >= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "covariance SNR R = {} must be >= 1",
            r.as_f64()
        )));
    }
    if r == T::one() {
        return Ok(Probability {
            value: T::lit(0.5),
            degenerate: true,
        });
    }
    if r.as_f64().is_infinite() {
        return Ok(Probability {
            value: T::zero(),
            degenerate: false,
        });
    }
    let t = tau(r);
    let half = T::lit(0.5);
    Ok(Probability {
        value: half * (T::one() - chi2_q1(t)?) + half * chi2_q1(t * r)?,
        degenerate: false,
    })
}

/// Error probability of the scalar LD-MAP rule whose projected statistic
/// has variance `d1` under `H1` and `d2` under `H2`, priors `(pi1, 1 - pi1)`.
pub fn pe_ldmap<T: Scalar>(d1: T, d2: T, pi1: T) -> Result<T> {
    if !(d1 > T::zero() && d2 > T::zero()) {
        return Err(Error::InvalidParameter("projected variances must be positive".into()));
    }
    check_prior(pi1)?;
    let pi2 = T::one() - pi1;
    let gamma = (pi1 / pi2).ln();
    let two = T::lit(2.0);
    if d1 == d2 {
        return Ok(if gamma >= T::zero() { pi2 } else { pi1 });
    }
    if d1 > d2 {
        // decide H2 inside |u|^2 < t*, t* / d1 = tau1
        let r = d1 / d2;
        let tau1 = (r.ln() - two * gamma) / (r - T::one());
        if tau1 <= T::zero() {
            return Ok(pi2);
        }
        Ok(pi1 * (T::one() - chi2_q1(tau1)?) + pi2 * chi2_q1(tau1 * r)?)
    } else {
        let r = d2 / d1;
        let tau2 = (r.ln() + two * gamma) / (r - T::one());
        if tau2 <= T::zero() {
            return Ok(pi1);
        }
        Ok(pi1 * chi2_q1(tau2 * r)? + pi2 * (T::one() - chi2_q1(tau2)?))
    }
}

/// `eta_hat = sqrt(mu_delta' Sigma_c^{-1} mu_delta)` for a mean-shift model.
pub fn finite_snr_mean<T: Scalar>(moments: &StackedMoments<T>) -> Result<T> {
    if !moments.same_covariance() {
        return Err(Error::NotMeanShift("stacked covariances differ".into()));
    }
    let chol = linalg::cholesky(&moments.sigma_bar_1)?;
    let delta = moments.mu_delta();
    let solved = chol.solve(&delta);
    Ok(delta.dot(&solved).max(T::zero()).sqrt())
}

/// `R_hat = lambda_max(Sigma_bar_1 Sigma_bar_2^{-1})`.
pub fn finite_snr_cov<T: Scalar>(moments: &StackedMoments<T>) -> Result<T> {
    top_generalized_eigen(&moments.sigma_bar_1, &moments.sigma_bar_2).map(|(r, _)| r)
}

/// Asymptotic SNR with a flag for networks outside the nilpotent regime,
/// where the large-horizon approximation carries a transient mismatch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticSnr<T: Scalar> {
    pub value: T,
    pub nilpotent: bool,
}

fn real_transfer_at_one<T: Scalar>(model: &NetworkModel<T>, sensors: &SensorSet<T>) -> Result<DMatrix<T>> {
    let rho = model.spectral_radius();
    if rho >= T::one() {
        return Err(Error::Unstable(rho.as_f64()));
    }
    Ok(transfer(model, sensors, Complex::new(T::one(), T::zero()))?.map(|z| z.re))
}

/// `N * mu' [L'L + s I]^{-1} L'L mu`, evaluated through the eigenvectors of
/// `L'L` so that rank-deficient `L` with `s = 0` gives the projector.
fn projected_energy<T: Scalar>(l: &DMatrix<T>, mu: &DVector<T>, sigma_v2: T, horizon: usize) -> T {
    let eig = sym_eigen_desc(&(l.transpose() * l));
    let top = eig.values.iter().fold(T::zero(), |a, &v| a.max(v));
    let thr = T::tol(linalg::PSD_CLAMP) * top.max(T::one());
    let mut acc = T::zero();
    for (k, &lambda) in eig.values.iter().enumerate() {
        if lambda <= thr {
            continue;
        }
        let c = eig.vectors.column(k).dot(mu);
        acc += lambda / (lambda + sigma_v2) * c * c;
    }
    T::from_count(horizon) * acc
}

/// Large-horizon mean-shift SNR `eta` for the sensor set.
pub fn asym_snr_mean<T: Scalar>(
    model: &NetworkModel<T>,
    sensors: &SensorSet<T>,
    scenario: &ScenarioSpec<T>,
) -> Result<AsymptoticSnr<T>> {
    match scenario.kind() {
        ModelKind::MeanShift | ModelKind::Identical => {}
        _ => return Err(Error::NotMeanShift("input covariances differ".into())),
    }
    let t1 = real_transfer_at_one(model, sensors)?;
    let root = psd_sqrt(&scenario.sigma1)?;
    let inv_root = psd_inv_sqrt(&scenario.sigma1)?;
    let l = &t1 * root;
    let mu = inv_root * (&scenario.mu2 - &scenario.mu1);
    Ok(AsymptoticSnr {
        value: projected_energy(&l, &mu, sensors.sigma_v2(), scenario.horizon).sqrt(),
        nilpotent: model.is_nilpotent(),
    })
}

/// `kappa` with `Sigma_2 = kappa Sigma_1`, if the covariances are proportional.
fn proportionality<T: Scalar>(s1: &DMatrix<T>, s2: &DMatrix<T>) -> Option<T> {
    let num = s1.dot(s2);
    let den = s1.dot(s1);
    if den <= T::zero() {
        return None;
    }
    let kappa = num / den;
    matrices_close(&(s1 * kappa), s2, 1e-10).then_some(kappa)
}

/// Large-horizon covariance SNR `1 + ||T Sigma_1^{1/2}||_inf^2 / sigma_v^2`
/// for `Sigma_2 = 0`; with `Sigma_2 = kappa Sigma_1` (`0 <= kappa < 1`) it
/// generalizes to `(g^2 + sigma_v^2) / (kappa g^2 + sigma_v^2)`.
pub fn asym_snr_cov<T: Scalar>(
    model: &NetworkModel<T>,
    sensors: &SensorSet<T>,
    scenario: &ScenarioSpec<T>,
    opts: GridOptions,
) -> Result<T> {
    let sv2 = sensors.sigma_v2();
    if sv2 <= T::zero() {
        return Err(Error::InvalidParameter(
            "asymptotic covariance SNR needs sigma_v^2 > 0".into(),
        ));
    }
    let kappa = cov_shrink(scenario)?;
    let w = psd_sqrt(&scenario.sigma1)?;
    let g = hinf_gain(model, sensors, &w, opts)?.value;
    Ok(cov_snr_from_gain(g, sv2, kappa))
}

/// `kappa` in `Sigma_2 = kappa Sigma_1` for a covariance-shift scenario,
/// zero when `Sigma_2 = 0`.
pub fn cov_shrink<T: Scalar>(scenario: &ScenarioSpec<T>) -> Result<T> {
    if !crate::lti::vectors_close(&scenario.mu1, &scenario.mu2) {
        return Err(Error::NotCovShift("input means differ".into()));
    }
    let kappa = if linalg::max_abs(&scenario.sigma2) == T::zero() {
        T::zero()
    } else {
        proportionality(&scenario.sigma1, &scenario.sigma2).ok_or_else(|| {
            Error::NotCovShift("Sigma_2 must be zero or proportional to Sigma_1".into())
        })?
    };
    if kappa >= T::one() {
        return Err(Error::NotCovShift(format!(
            "Sigma_2 = {} Sigma_1 does not shrink the covariance",
            kappa.as_f64()
        )));
    }
    Ok(kappa)
}

/// `(g^2 + sigma_v^2) / (kappa g^2 + sigma_v^2)` with `g = ||T Sigma_1^{1/2}||_inf`.
pub fn cov_snr_from_gain<T: Scalar>(g: T, sigma_v2: T, kappa: T) -> T {
    let g2 = g * g;
    (g2 + sigma_v2) / (kappa * g2 + sigma_v2)
}

/// Mean-shift SNR for `N(mu_i 1, sigma_c^2 D)` hypotheses.
pub fn identical_stats_eta<T: Scalar>(
    model: &NetworkModel<T>,
    sensors: &SensorSet<T>,
    stats: &IdenticalStats<T>,
    horizon: usize,
) -> Result<T> {
    if stats.s1 != stats.s2 {
        return Err(Error::NotMeanShift("sigma_1^2 != sigma_2^2".into()));
    }
    let scenario = stats.scenario(model.n(), horizon)?;
    asym_snr_mean(model, sensors, &scenario).map(|a| a.value)
}

/// Covariance SNR `(s1 g^2 + sigma_v^2) / (s2 g^2 + sigma_v^2)` with
/// `g = ||T(z) D^{1/2}||_inf`.
pub fn identical_stats_r<T: Scalar>(
    model: &NetworkModel<T>,
    sensors: &SensorSet<T>,
    stats: &IdenticalStats<T>,
    opts: GridOptions,
) -> Result<T> {
    if !(stats.s1 > stats.s2) {
        return Err(Error::NotCovShift(format!(
            "needs sigma_1^2 > sigma_2^2, got {} and {}",
            stats.s1.as_f64(),
            stats.s2.as_f64()
        )));
    }
    non_negative(stats.s2, "sigma_2^2")?;
    let sv2 = sensors.sigma_v2();
    if sv2 == T::zero() {
        if stats.s2 == T::zero() {
            return Err(Error::InvalidParameter(
                "R is unbounded with sigma_2^2 = 0 and noiseless sensors".into(),
            ));
        }
        return Ok(stats.s1 / stats.s2);
    }
    let g = hinf_gain(model, sensors, &psd_sqrt(&stats.d)?, opts)?.value;
    let g2 = g * g;
    Ok((stats.s1 * g2 + sv2) / (stats.s2 * g2 + sv2))
}

/// Identical-statistics SNRs; each is `None` when its model does not apply
/// (`eta_s` needs `s1 = s2`, `R_s` needs `s1 > s2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdenticalSnrs<T: Scalar> {
    pub eta_s: Option<T>,
    pub r_s: Option<T>,
}

pub fn identical_stats_snrs<T: Scalar>(
    model: &NetworkModel<T>,
    sensors: &SensorSet<T>,
    stats: &IdenticalStats<T>,
    horizon: usize,
    opts: GridOptions,
) -> Result<IdenticalSnrs<T>> {
    if stats.s1 < stats.s2 {
        return Err(Error::NotCovShift("sigma_1^2 < sigma_2^2".into()));
    }
    let eta_s = if stats.s1 == stats.s2 {
        Some(identical_stats_eta(model, sensors, stats, horizon)?)
    } else {
        None
    };
    let r_s = if stats.s1 > stats.s2 {
        Some(identical_stats_r(model, sensors, stats, opts)?)
    } else {
        None
    };
    Ok(IdenticalSnrs { eta_s, r_s })
}

/// Finite-horizon and asymptotic SNRs for one sensor set; entries are `None`
/// when the scenario does not fit the corresponding model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrReport<T: Scalar> {
    pub eta_hat: Option<T>,
    pub eta_asym: Option<AsymptoticSnr<T>>,
    pub r_hat: Option<T>,
    pub r_asym: Option<T>,
    pub tau: Option<T>,
    pub horizon: usize,
}

pub fn snr_report<T: Scalar>(
    model: &NetworkModel<T>,
    sensors: &SensorSet<T>,
    scenario: &ScenarioSpec<T>,
    opts: GridOptions,
) -> Result<SnrReport<T>> {
    let moments = stacked_moments(model, sensors, scenario)?;
    let kind = scenario.kind();
    let mean_like = matches!(kind, ModelKind::MeanShift | ModelKind::Identical);
    let cov_like = kind == ModelKind::CovShift;
    let stable = model.spectral_radius() < T::one();
    let eta_hat = if mean_like { Some(finite_snr_mean(&moments)?) } else { None };
    let eta_asym = if mean_like && stable {
        Some(asym_snr_mean(model, sensors, scenario)?)
    } else {
        None
    };
    let r_hat = if cov_like { Some(finite_snr_cov(&moments)?) } else { None };
    let r_asym = if cov_like && stable && sensors.sigma_v2() > T::zero() {
        asym_snr_cov(model, sensors, scenario, opts).ok()
    } else {
        None
    };
    Ok(SnrReport {
        eta_hat,
        eta_asym,
        r_hat,
        r_asym,
        tau: r_hat.map(tau),
        horizon: scenario.horizon,
    })
}
