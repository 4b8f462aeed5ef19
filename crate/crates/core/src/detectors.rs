//! MAP mean-shift rule and LD-MAP covariance-shift rule on the stacked
//! measurement vector.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, sym_eigen_desc, top_generalized_eigen};
use crate::lti::StackedMoments;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Hypothesis {
    H1,
    H2,
}

impl Hypothesis {
    pub fn index(self) -> usize {
        match self {
            Self::H1 => 0,
            Self::H2 => 1,
        }
    }
}

/// A binary decision rule on a stacked measurement vector.
pub trait Detector<T: Scalar>: Sync {
    fn decide(&self, y: &[T]) -> Hypothesis;
}

/// Evaluates `rule` on `y`.
pub fn decide<T: Scalar, D: Detector<T> + ?Sized>(rule: &D, y: &[T]) -> Hypothesis {
    rule.decide(y)
}

/// `gamma = ln(pi_1 / pi_2)`.
pub fn log_prior_ratio<T: Scalar>(priors: (T, T)) -> Result<T> {
    let (p1, p2) = priors;
    if !(p1 > T::zero() && p2 > T::zero()) {
        return Err(Error::InvalidParameter(
            "MAP rule needs both priors strictly positive".into(),
        ));
    }
    Ok((p1 / p2).ln())
}

/// Decides `H2` iff `w' Y > threshold`; ties go to `H1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanShiftRule<T: Scalar> {
    pub w: DVector<T>,
    pub threshold: T,
}

impl<T: Scalar> Detector<T> for MeanShiftRule<T> {
    fn decide(&self, y: &[T]) -> Hypothesis {
        debug_assert_eq!(y.len(), self.w.len());
        let s = self
            .w
            .iter()
            .zip(y)
            .fold(T::zero(), |acc, (&w, &y)| acc + w * y);
        if s > self.threshold {
            Hypothesis::H2
        } else {
            Hypothesis::H1
        }
    }
}

/// MAP rule for `N(mu_bar_i, Sigma_bar_c)` with invertible `Sigma_bar_c`:
/// `w = 2 Sigma_c^{-1} mu_delta`, threshold
/// `2 gamma + mu_delta' Sigma_c^{-1} (mu_bar_1 + mu_bar_2)`.
pub fn build_mean_rule<T: Scalar>(moments: &StackedMoments<T>, priors: (T, T)) -> Result<MeanShiftRule<T>> {
    if !moments.same_covariance() {
        return Err(Error::NotMeanShift("stacked covariances differ".into()));
    }
    let gamma = log_prior_ratio(priors)?;
    let chol = linalg::cholesky(&moments.sigma_bar_1)?;
    let delta = moments.mu_delta();
    let solved = chol.solve(&delta);
    let sum = &moments.mu_bar_1 + &moments.mu_bar_2;
    let two = T::lit(2.0);
    Ok(MeanShiftRule {
        threshold: two * gamma + solved.dot(&sum),
        w: solved * two,
    })
}

/// MAP rule when `Sigma_bar_c` may be singular (noiseless sensors).
///
/// Both hypotheses live on affine copies of `range(Sigma_bar_c)`. When
/// `mu_delta` leaves that range the supports are disjoint and the rule
/// thresholds the out-of-range component at its midpoint, which is exact;
/// otherwise the pseudo-inverse replaces the inverse.
pub fn build_mean_rule_support<T: Scalar>(
    moments: &StackedMoments<T>,
    priors: (T, T),
) -> Result<MeanShiftRule<T>> {
    if !moments.same_covariance() {
        return Err(Error::NotMeanShift("stacked covariances differ".into()));
    }
    let gamma = log_prior_ratio(priors)?;
    let eig = sym_eigen_desc(&moments.sigma_bar_1);
    let top = eig.values.iter().fold(T::zero(), |a, &v| a.max(v));
    let thr = T::tol(linalg::PSD_CLAMP) * top.max(T::one());
    let rank = eig.values.iter().filter(|&&v| v > thr).count();
    let basis = eig.vectors.columns(0, rank);
    let delta = moments.mu_delta();
    let coeffs = basis.transpose() * &delta;
    let outside = &delta - &basis * &coeffs;
    let sum = &moments.mu_bar_1 + &moments.mu_bar_2;
    let half = T::lit(0.5);
    if outside.norm() > T::tol(1e-8) * delta.norm().max(T::one()) {
        return Ok(MeanShiftRule {
            threshold: outside.dot(&sum) * half,
            w: outside,
        });
    }
    let scaled = DVector::from_fn(rank, |k, _| coeffs[k] / eig.values[k]);
    let solved = &basis * scaled;
    let two = T::lit(2.0);
    Ok(MeanShiftRule {
        threshold: two * gamma + solved.dot(&sum),
        w: solved * two,
    })
}

/// LD-MAP rule on `y = b' Y`: decides `H2` iff
/// `ln(d1 / d2) - 2 gamma > (y - b' mu_bar_c)^2 (1 / d2 - 1 / d1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovShiftRule<T: Scalar> {
    pub b: DVector<T>,
    pub mu_c_proj: T,
    pub d1: T,
    pub d2: T,
    pub gamma: T,
}

impl<T: Scalar> CovShiftRule<T> {
    /// Decision on an already projected statistic `y = b' Y`.
    pub fn decide_projected(&self, y: T) -> Hypothesis {
        let u = y - self.mu_c_proj;
        let lhs = (self.d1 / self.d2).ln() - T::lit(2.0) * self.gamma;
        let rhs = u * u * (T::one() / self.d2 - T::one() / self.d1);
        if lhs > rhs {
            Hypothesis::H2
        } else {
            Hypothesis::H1
        }
    }
}

impl<T: Scalar> Detector<T> for CovShiftRule<T> {
    fn decide(&self, y: &[T]) -> Hypothesis {
        debug_assert_eq!(y.len(), self.b.len());
        let proj = self
            .b
            .iter()
            .zip(y)
            .fold(T::zero(), |acc, (&b, &y)| acc + b * y);
        self.decide_projected(proj)
    }
}

/// Maximizer `b` of `b' S1 b / b' S2 b` and the maximum `R_hat`.
/// `b` has unit length and a positive first non-zero entry; degenerate top
/// eigenspaces resolve to the direction nearest the lowest-index axis.
pub fn optimal_discriminant<T: Scalar>(s1: &DMatrix<T>, s2: &DMatrix<T>) -> Result<(DVector<T>, T)> {
    let (r, b) = top_generalized_eigen(s1, s2)?;
    Ok((b, r))
}

pub fn build_cov_rule<T: Scalar>(
    moments: &StackedMoments<T>,
    b: &DVector<T>,
    priors: (T, T),
) -> Result<CovShiftRule<T>> {
    if b.len() != moments.dim() {
        return Err(Error::Dimension(format!(
            "discriminant has length {}, measurements {}",
            b.len(),
            moments.dim()
        )));
    }
    if !moments.same_mean() {
        return Err(Error::NotCovShift("stacked means differ".into()));
    }
    let gamma = log_prior_ratio(priors)?;
    let d1 = b.dot(&(&moments.sigma_bar_1 * b));
    let d2 = b.dot(&(&moments.sigma_bar_2 * b));
    if !(d1 > T::zero() && d2 > T::zero()) {
        return Err(Error::NotCovShift(format!(
            "projected variances must be positive, got {} and {}",
            d1.as_f64(),
            d2.as_f64()
        )));
    }
    if (d1 - d2).mag() <= T::tol(1e-12) * d1.max(d2) {
        return Err(Error::NotCovShift("d1 = d2 along the discriminant".into()));
    }
    Ok(CovShiftRule {
        mu_c_proj: b.dot(&moments.mu_bar_1),
        b: b.clone(),
        d1,
        d2,
        gamma,
    })
}
