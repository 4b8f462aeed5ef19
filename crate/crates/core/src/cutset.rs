//! Cutset versus partitioned-set comparisons and Toeplitz line networks.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::error_prob::{asym_snr_cov, asym_snr_mean, pe_cov, pe_mean};
use crate::graph::{CutsetPartition, NetworkModel};
use crate::linalg::inf_norm;
use crate::lti::{subsystem_sv_extremes, GridOptions, ModelKind, ScenarioSpec, SensorSet, SvExtremes};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Noiseless,
    Noisy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conclusion {
    /// `P_e(C_d) <= P_e(P)`.
    CutsetNoWorse,
    /// `P_e(C_d) > P_e(P)`.
    CutsetWorse,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AppliesTo {
    Mean,
    Covariance,
    Both,
}

macro_rules! snake_display {
    ($ty:ty { $($variant:ident => $text:literal),* $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$variant => $text),* })
            }
        }
    };
}

snake_display!(Regime { Noiseless => "noiseless", Noisy => "noisy" });
snake_display!(Conclusion {
    CutsetNoWorse => "cutset_no_worse",
    CutsetWorse => "cutset_worse",
    Inconclusive => "inconclusive",
});
snake_display!(AppliesTo { Mean => "mean", Covariance => "covariance", Both => "both" });

/// Outcome of a sufficient-condition check. `Inconclusive` whenever no
/// hypothesis of the comparison theorems holds.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonVerdict<T: Scalar> {
    pub regime: Regime,
    pub condition: String,
    pub values: Vec<(String, T)>,
    pub conclusion: Conclusion,
    pub applies_to: AppliesTo,
}

/// With noiseless sensors the cutset is never worse, whatever the weights.
pub fn noiseless_verdict<T: Scalar>(sigma_v2: T) -> Result<ComparisonVerdict<T>> {
    if sigma_v2 != T::zero() {
        return Err(Error::Inapplicable(format!(
            "noiseless comparison needs sigma_v^2 = 0, got {}",
            sigma_v2.as_f64()
        )));
    }
    Ok(ComparisonVerdict {
        regime: Regime::Noiseless,
        condition: "sigma_v^2 = 0".into(),
        values: vec![("sigma_v2".into(), sigma_v2)],
        conclusion: Conclusion::CutsetNoWorse,
        applies_to: AppliesTo::Both,
    })
}

/// Direct comparison of the asymptotic error probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectComparison<T: Scalar> {
    pub applies_to: AppliesTo,
    pub pe_cutset: T,
    pub pe_partitioned: T,
}

impl<T: Scalar> DirectComparison<T> {
    /// Whether the computed probabilities are consistent with `conclusion`,
    /// allowing a relative slack for grid and rounding error.
    pub fn agrees_with(&self, conclusion: Conclusion, rel_slack: f64) -> bool {
        let slack = T::lit(rel_slack) * self.pe_cutset.max(self.pe_partitioned) + T::lit(1e-300);
        match conclusion {
            Conclusion::CutsetNoWorse => self.pe_cutset <= self.pe_partitioned + slack,
            Conclusion::CutsetWorse => self.pe_cutset + slack >= self.pe_partitioned,
            Conclusion::Inconclusive => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyVerdict<T: Scalar> {
    pub mean: ComparisonVerdict<T>,
    pub cov: ComparisonVerdict<T>,
    pub extremes: SvExtremes<T>,
    pub direct: Vec<DirectComparison<T>>,
}

/// Asymptotic error probability of one sensor set under a mean-shift or
/// covariance-shift scenario.
pub fn asymptotic_pe<T: Scalar>(
    model: &NetworkModel<T>,
    sensors: &SensorSet<T>,
    scenario: &ScenarioSpec<T>,
    opts: GridOptions,
) -> Result<(AppliesTo, T)> {
    match scenario.kind() {
        ModelKind::MeanShift => {
            let eta = asym_snr_mean(model, sensors, scenario)?.value;
            Ok((AppliesTo::Mean, pe_mean(eta)?.value))
        }
        ModelKind::CovShift => {
            let r = asym_snr_cov(model, sensors, scenario, opts)?;
            Ok((AppliesTo::Covariance, pe_cov(r)?.value))
        }
        other => Err(Error::Inapplicable(format!(
            "asymptotic error probability needs a mean- or covariance-shift model, got {other:?}"
        ))),
    }
}

/// Maps the singular-value extremes of `T_s` through the noisy comparison
/// cases, and evaluates the asymptotic error probabilities of `C_d` and `P`
/// for each supplied scenario.
pub fn noisy_verdict<T: Scalar>(
    partition: &CutsetPartition<T>,
    model: &NetworkModel<T>,
    sigma_v2: T,
    scenarios: &[&ScenarioSpec<T>],
    opts: GridOptions,
) -> Result<NoisyVerdict<T>> {
    if !(sigma_v2 > T::zero()) {
        return Err(Error::Inapplicable(format!(
            "noisy comparison needs sigma_v^2 > 0, got {}",
            sigma_v2.as_f64()
        )));
    }
    let ex = subsystem_sv_extremes(partition, false, opts)?;
    let one = T::one();

    let mean = if ex.max_at_one <= one {
        verdict(
            "rho_bar(1) <= 1",
            vec![("rho_bar(1)", ex.max_at_one)],
            Conclusion::CutsetNoWorse,
            AppliesTo::Mean,
        )
    } else if ex.min_at_one > one {
        verdict(
            "rho_lower(1) > 1",
            vec![("rho_lower(1)", ex.min_at_one)],
            Conclusion::CutsetWorse,
            AppliesTo::Mean,
        )
    } else {
        verdict(
            "rho_bar(1) > 1 and rho_lower(1) <= 1",
            vec![("rho_bar(1)", ex.max_at_one), ("rho_lower(1)", ex.min_at_one)],
            Conclusion::Inconclusive,
            AppliesTo::Mean,
        )
    };
    let cov = if ex.sup_max.value <= one {
        verdict(
            "sup rho_bar <= 1",
            vec![("sup_rho_bar", ex.sup_max.value)],
            Conclusion::CutsetNoWorse,
            AppliesTo::Covariance,
        )
    } else if ex.inf_min.value > one {
        verdict(
            "inf rho_lower > 1",
            vec![("inf_rho_lower", ex.inf_min.value)],
            Conclusion::CutsetWorse,
            AppliesTo::Covariance,
        )
    } else {
        verdict(
            "sup rho_bar > 1 and inf rho_lower <= 1",
            vec![("sup_rho_bar", ex.sup_max.value), ("inf_rho_lower", ex.inf_min.value)],
            Conclusion::Inconclusive,
            AppliesTo::Covariance,
        )
    };

    let n = model.n();
    let cut = SensorSet::new(&partition.cutset, n, sigma_v2)?;
    let part = SensorSet::new(&partition.partitioned, n, sigma_v2)?;
    let mut direct = Vec::with_capacity(scenarios.len());
    for sc in scenarios {
        let (applies_to, pe_c) = asymptotic_pe(model, &cut, sc, opts)?;
        let (_, pe_p) = asymptotic_pe(model, &part, sc, opts)?;
        direct.push(DirectComparison {
            applies_to,
            pe_cutset: pe_c,
            pe_partitioned: pe_p,
        });
    }
    Ok(NoisyVerdict {
        mean,
        cov,
        extremes: ex,
        direct,
    })
}

fn verdict<T: Scalar>(
    condition: &str,
    values: Vec<(&str, T)>,
    conclusion: Conclusion,
    applies_to: AppliesTo,
) -> ComparisonVerdict<T> {
    ComparisonVerdict {
        regime: Regime::Noisy,
        condition: condition.into(),
        values: values.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        conclusion,
        applies_to,
    }
}

/// Algebraic criteria for non-negative networks on `G~ = [G_pp G_pc]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonnegCriteria<T: Scalar> {
    pub gtilde_norm: T,
    /// `1 / sqrt(m_1)`.
    pub bound: T,
    /// `||G~||_inf <= 1 / sqrt(m_1)`: cutset no worse for both models.
    pub bound_pass: bool,
    pub min_row_sum: T,
    pub n1: usize,
    /// `n_1 = 1` and every row sum of `G~` exceeds one: cutset no better
    /// than any subset of `P`.
    pub rowsum_pass: bool,
}

impl<T: Scalar> NonnegCriteria<T> {
    pub fn verdict(&self) -> ComparisonVerdict<T> {
        let (condition, conclusion) = if self.bound_pass {
            ("||G~||_inf <= 1/sqrt(m1)", Conclusion::CutsetNoWorse)
        } else if self.rowsum_pass {
            ("n1 = 1 and all row sums of G~ > 1", Conclusion::CutsetWorse)
        } else {
            ("neither non-negative criterion holds", Conclusion::Inconclusive)
        };
        ComparisonVerdict {
            regime: Regime::Noisy,
            condition: condition.into(),
            values: vec![
                ("gtilde_norm".into(), self.gtilde_norm),
                ("bound".into(), self.bound),
                ("min_row_sum".into(), self.min_row_sum),
            ],
            conclusion,
            applies_to: AppliesTo::Both,
        }
    }
}

pub fn nonneg_criteria<T: Scalar>(partition: &CutsetPartition<T>) -> Result<NonnegCriteria<T>> {
    if partition.permuted.iter().any(|&g| g < T::zero()) {
        return Err(Error::Inapplicable(
            "non-negative criteria need an entrywise non-negative G".into(),
        ));
    }
    let gt = partition.gtilde();
    let m1 = partition.partitioned.len();
    let n1 = partition.cutset.len();
    let gtilde_norm = inf_norm(&gt);
    let bound = T::one() / T::from_count(m1).sqrt();
    let min_row_sum = gt
        .row_iter()
        .map(|row| row.sum())
        .fold(T::max_value().unwrap_or(T::one()), |a, s| a.min(s));
    Ok(NonnegCriteria {
        gtilde_norm,
        bound,
        bound_pass: gtilde_norm <= bound,
        min_row_sum,
        n1,
        rowsum_pass: n1 == 1 && min_row_sum > T::one(),
    })
}

/// Spectral radius of the tridiagonal Toeplitz matrix with non-negative
/// entries, `a + 2 sqrt(bc) cos(pi / (n + 1))`.
pub fn toeplitz_spectral_radius<T: Scalar>(n: usize, a: T, b: T, c: T) -> T {
    let angle = T::pi() / T::from_count(n + 1);
    a.mag() + T::lit(2.0) * (b * c).sqrt() * angle.cos()
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy)]
struct DoubleDouble<T: Scalar> {
    hi: T,
    lo: T,
}

impl<T: Scalar> DoubleDouble<T> {
    fn from(x: T) -> Self {
        Self { hi: x, lo: T::zero() }
    }

    fn two_sum(a: T, b: T) -> Self {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        Self { hi: s, lo: err }
    }

    fn two_prod(a: T, b: T) -> Self {
        let p = a * b;
        let err = a.mul_add(b, -p);
        Self { hi: p, lo: err }
    }

    fn add(self, o: Self) -> Self {
        let s = Self::two_sum(self.hi, o.hi);
        let lo = s.lo + self.lo + o.lo;
        Self::two_sum(s.hi, lo)
    }

    fn mul(self, o: Self) -> Self {
        let p = Self::two_prod(self.hi, o.hi);
        let lo = p.lo + (self.hi * o.lo + self.lo * o.hi);
        Self::two_sum(p.hi, lo)
    }

    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }

    fn value(self) -> T {
        self.hi + self.lo
    }
}

/// Above this size the recursions run in double-double arithmetic.
const EXTENDED_PRECISION_ABOVE: usize = 30;

/// `theta_k = a~ theta_{k-1} - b~ c~ theta_{k-2}`, `k = 0..=n`.
fn theta_sequence<T: Scalar>(n: usize, at: T, bc: T) -> Vec<T> {
    if n > EXTENDED_PRECISION_ABOVE {
        let (at, bc) = (DoubleDouble::from(at), DoubleDouble::from(bc).neg());
        let mut th = vec![DoubleDouble::from(T::one()), at];
        for k in 2..=n {
            th.push(at.mul(th[k - 1]).add(bc.mul(th[k - 2])));
        }
        th.into_iter().map(DoubleDouble::value).collect()
    } else {
        let mut th = vec![T::one(), at];
        for k in 2..=n {
            th.push(at * th[k - 1] - bc * th[k - 2]);
        }
        th
    }
}

/// `phi_{n+1} = 1`, `phi_n = a~`, `phi_k = a~ phi_{k+1} - b~ c~ phi_{k+2}`;
/// index `k` in `1..=n+1` is stored at `k`.
fn phi_sequence<T: Scalar>(n: usize, at: T, bc: T) -> Vec<T> {
    let mut phi = vec![T::zero(); n + 2];
    phi[n + 1] = T::one();
    phi[n] = at;
    if n > EXTENDED_PRECISION_ABOVE {
        let (atd, bcd) = (DoubleDouble::from(at), DoubleDouble::from(bc).neg());
        let mut next2 = DoubleDouble::from(T::one());
        let mut next1 = atd;
        for k in (1..n).rev() {
            let cur = atd.mul(next1).add(bcd.mul(next2));
            phi[k] = cur.value();
            next2 = next1;
            next1 = cur;
        }
    } else {
        for k in (1..n).rev() {
            phi[k] = at * phi[k + 1] - bc * phi[k + 2];
        }
    }
    phi
}

fn check_toeplitz<T: Scalar>(n: usize, a: T, b: T, c: T) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("line network needs n >= 1".into()));
    }
    for (name, v) in [("a", a), ("b", b), ("c", c)] {
        if !(v >= T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "{name} = {} must be non-negative",
                v.as_f64()
            )));
        }
    }
    let rho = toeplitz_spectral_radius(n, a, b, c);
    if rho >= T::one() {
        return Err(Error::Unstable(rho.as_f64()));
    }
    if T::one() - rho <= T::tol(1e-12) {
        return Err(Error::NearSingular(format!("det(I - G) ~ 0, radius {}", rho.as_f64())));
    }
    Ok(())
}

/// Closed-form `(I - G)^{-1}` for the tridiagonal Toeplitz line network.
///
/// With `a~ = 1 - a`, `b~ = -b`, `c~ = -c` the `(l, q)` entry (1-based) is
/// `(-1)^{l+q} b~^{q-l} theta_{l-1} phi_{q+1} / theta_n` for `q >= l` and
/// `(-1)^{l+q} c~^{l-q} theta_{q-1} phi_{l+1} / theta_n` otherwise.
pub fn toeplitz_inverse_entries<T: Scalar>(n: usize, a: T, b: T, c: T) -> Result<DMatrix<T>> {
    check_toeplitz(n, a, b, c)?;
    let at = T::one() - a;
    let bc = b * c;
    let theta = theta_sequence(n, at, bc);
    let phi = phi_sequence(n, at, bc);
    let det = theta[n];
    if !(det > T::zero()) {
        return Err(Error::NearSingular(format!("theta_n = {}", det.as_f64())));
    }
    // (-1)^{l+q} (-x)^{k} = x^k for k = |l - q|, so every entry is >= 0.
    let mut out = DMatrix::zeros(n, n);
    for l in 1..=n {
        for q in 1..=n {
            let v = if q >= l {
                b.powi((q - l) as i32) * theta[l - 1] * phi[q + 1]
            } else {
                c.powi((l - q) as i32) * theta[q - 1] * phi[l + 1]
            };
            out[(l - 1, q - 1)] = v / det;
        }
    }
    Ok(out)
}

/// Observed ordering of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    StrictlyDecreasing,
    NonIncreasing,
    StrictlyIncreasing,
    NonDecreasing,
    Constant,
    Mixed,
}

snake_display!(Monotonicity {
    StrictlyDecreasing => "strictly_decreasing",
    NonIncreasing => "non_increasing",
    StrictlyIncreasing => "strictly_increasing",
    NonDecreasing => "non_decreasing",
    Constant => "constant",
    Mixed => "mixed",
});

pub fn classify<T: Scalar>(values: &[T]) -> Monotonicity {
    let pairs: Vec<(T, T)> = values.windows(2).map(|w| (w[0], w[1])).collect();
    let all = |f: &dyn Fn(T, T) -> bool| pairs.iter().all(|&(x, y)| f(x, y));
    if all(&|x, y| x == y) {
        Monotonicity::Constant
    } else if all(&|x, y| x > y) {
        Monotonicity::StrictlyDecreasing
    } else if all(&|x, y| x < y) {
        Monotonicity::StrictlyIncreasing
    } else if all(&|x, y| x >= y) {
        Monotonicity::NonIncreasing
    } else if all(&|x, y| x <= y) {
        Monotonicity::NonDecreasing
    } else {
        Monotonicity::Mixed
    }
}

/// Column `q` of `(I - G)^{-1}` from the input node downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct GainProfile<T: Scalar> {
    pub q: usize,
    /// `|(I - G)^{-1}_{l,q}|` for `l = q..n` (0-based `l`).
    pub values: Vec<T>,
    /// `a + b + c < 1`, the row-sum condition under which the profile is
    /// expected to decrease.
    pub predicted_decreasing: bool,
    pub observed: Monotonicity,
}

pub fn toeplitz_gain_profile<T: Scalar>(n: usize, a: T, b: T, c: T, q: usize) -> Result<GainProfile<T>> {
    if q >= n {
        return Err(Error::NodeOutOfRange { node: q, n });
    }
    let inv = toeplitz_inverse_entries(n, a, b, c)?;
    let values: Vec<T> = (q..n).map(|l| inv[(l, q)].mag()).collect();
    Ok(GainProfile {
        q,
        observed: classify(&values),
        values,
        predicted_decreasing: a + b + c < T::one(),
    })
}

/// Scalar parameters for the single-input line comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SisoScenario<T: Scalar> {
    pub mu_delta: T,
    /// Common input variance of the mean-shift model.
    pub sigma_c2: T,
    /// Input variances of the covariance-shift model.
    pub s1: T,
    pub s2: T,
    pub sigma_v2: T,
    pub horizon: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SisoRow<T: Scalar> {
    pub node: usize,
    pub gain: T,
    pub eta_s: T,
    pub r_s: T,
    pub pe_mean: T,
    pub pe_cov: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominance {
    /// `||G~||_inf <= 1`: the cutset node should be best.
    CutsetBest,
    /// All row sums of `G~` exceed one: the cutset node should be worst.
    CutsetWorst,
    Neither,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SisoReport<T: Scalar> {
    pub q: usize,
    pub j: usize,
    /// Rows for `l = j..n`, the cutset node first.
    pub rows: Vec<SisoRow<T>>,
    pub gtilde_norm: T,
    pub min_row_sum: T,
    pub predicted: Dominance,
    /// `P_e(j) <= P_e(l)` for every partitioned `l`, both models.
    pub cutset_best: bool,
    /// `P_e(j) >= P_e(l)` for every partitioned `l`, both models.
    pub cutset_worst: bool,
}

/// Per-node identical-statistics error probabilities on the line network
/// with input `q` and cutset node `j`; partitioned set `{j+1, ..., n}`.
/// Indices are 0-based with `q < j < n - 1`.
pub fn siso_orderings<T: Scalar>(
    n: usize,
    a: T,
    b: T,
    c: T,
    q: usize,
    j: usize,
    sc: &SisoScenario<T>,
) -> Result<SisoReport<T>> {
    if !(q < j && j + 1 < n) {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= q < j < n, got q = {}, j = {}, n = {n}",
            q + 1,
            j + 1
        )));
    }
    if !(sc.sigma_v2 > T::zero()) {
        return Err(Error::InvalidParameter("SISO comparison needs sigma_v^2 > 0".into()));
    }
    if !(sc.s1 > sc.s2 && sc.s2 >= T::zero() && sc.sigma_c2 > T::zero()) {
        return Err(Error::InvalidParameter(
            "need sigma_c^2 > 0 and sigma_1^2 > sigma_2^2 >= 0".into(),
        ));
    }
    if sc.horizon == 0 {
        return Err(Error::InvalidParameter("horizon N must be >= 1".into()));
    }
    let inv = toeplitz_inverse_entries(n, a, b, c)?;
    let sv2 = sc.sigma_v2;
    let nn = T::from_count(sc.horizon);
    let mut rows = Vec::with_capacity(n - j);
    for l in j..n {
        // non-negative G: the sup over the circle sits at z = 1
        let g = inv[(l, q)].mag();
        let g2 = g * g;
        let eta2 = nn * sc.mu_delta * sc.mu_delta * g2 / (sc.sigma_c2 * g2 + sv2);
        let eta_s = eta2.sqrt();
        let r_s = (sc.s1 * g2 + sv2) / (sc.s2 * g2 + sv2);
        rows.push(SisoRow {
            node: l,
            gain: g,
            eta_s,
            r_s,
            pe_mean: pe_mean(eta_s)?.value,
            pe_cov: pe_cov(r_s)?.value,
        });
    }
    // G~ rows of P = {j+1..n}: row j+1 sees c (from j), a, b; the last row lacks b
    let m1 = n - j - 1;
    let row_sums: Vec<T> = (0..m1)
        .map(|k| if k + 1 == m1 { c + a } else { c + a + b })
        .collect();
    let gtilde_norm = row_sums.iter().fold(T::zero(), |x, &s| x.max(s));
    let min_row_sum = row_sums.iter().fold(T::max_value().unwrap_or(T::one()), |x, &s| x.min(s));
    let predicted = if gtilde_norm <= T::one() {
        Dominance::CutsetBest
    } else if min_row_sum > T::one() {
        Dominance::CutsetWorst
    } else {
        Dominance::Neither
    };
    let head = rows[0];
    let rest = &rows[1..];
    Ok(SisoReport {
        q,
        j,
        cutset_best: rest.iter().all(|r| head.pe_mean <= r.pe_mean && head.pe_cov <= r.pe_cov),
        cutset_worst: rest.iter().all(|r| head.pe_mean >= r.pe_mean && head.pe_cov >= r.pe_cov),
        rows,
        gtilde_norm,
        min_row_sum,
        predicted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_network, toeplitz_matrix, verify_cutset};
    use approx::assert_relative_eq;

    fn chain(a: f64, c: f64) -> (NetworkModel<f64>, CutsetPartition<f64>) {
        let m = build_network(3, &[(1, 0, 1.0), (2, 1, c), (2, 2, a)], &[0]).unwrap();
        let p = verify_cutset(&m, &[0], &[1], &[2], 1).unwrap();
        (m, p)
    }

    #[test]
    fn noiseless_is_unconditional() {
        let v = noiseless_verdict(0.0).unwrap();
        assert_eq!(v.conclusion, Conclusion::CutsetNoWorse);
        assert_eq!(v.applies_to, AppliesTo::Both);
        assert!(noiseless_verdict(0.1).is_err());
    }

    #[test]
    fn scalar_chain_cases() {
        let (m, p) = chain(0.3, 0.5);
        let v = noisy_verdict(&p, &m, 1.0, &[], GridOptions::default()).unwrap();
        assert_eq!(v.mean.conclusion, Conclusion::CutsetNoWorse);
        assert_relative_eq!(v.mean.values[0].1, 0.5 / 0.7, max_relative = 1e-14);
        assert_eq!(v.cov.conclusion, Conclusion::CutsetNoWorse);

        let (m, p) = chain(0.3, 0.9);
        let v = noisy_verdict(&p, &m, 1.0, &[], GridOptions::default()).unwrap();
        assert_eq!(v.mean.conclusion, Conclusion::CutsetWorse);
        // |T_s| on the circle dips to 0.9 / 1.3 < 1
        assert_eq!(v.cov.conclusion, Conclusion::Inconclusive);
        assert!(noisy_verdict(&p, &m, 0.0, &[], GridOptions::default()).is_err());
    }

    #[test]
    fn verdicts_agree_with_direct_probabilities() {
        for c in [0.5, 0.9, 1.5] {
            let (m, p) = chain(0.3, c);
            let mean = ScenarioSpec::mean_shift(
                nalgebra::DVector::from_element(1, 1.0),
                nalgebra::DVector::zeros(1),
                DMatrix::from_element(1, 1, 1.0),
                3,
                50,
            )
            .unwrap();
            let cov = ScenarioSpec::cov_shift(
                nalgebra::DVector::zeros(1),
                DMatrix::from_element(1, 1, 2.0),
                DMatrix::zeros(1, 1),
                3,
                50,
            )
            .unwrap();
            let v = noisy_verdict(&p, &m, 0.7, &[&mean, &cov], GridOptions::default()).unwrap();
            assert!(v.direct[0].agrees_with(v.mean.conclusion, 1e-9));
            assert!(v.direct[1].agrees_with(v.cov.conclusion, 1e-9));
        }
    }

    #[test]
    fn nonneg_bound_and_rowsums() {
        let (_, p) = chain(0.3, 0.2);
        let crit = nonneg_criteria(&p).unwrap();
        assert!(crit.bound_pass);
        assert_eq!(crit.verdict().conclusion, Conclusion::CutsetNoWorse);
        let (_, p) = chain(0.3, 0.9);
        let crit = nonneg_criteria(&p).unwrap();
        assert!(!crit.bound_pass && crit.rowsum_pass);
        let neg = build_network(3, &[(1, 0, 1.0), (2, 1, -0.5)], &[0]).unwrap();
        let p = verify_cutset(&neg, &[0], &[1], &[2], 1).unwrap();
        assert!(matches!(nonneg_criteria(&p), Err(Error::Inapplicable(_))));
        let zero = build_network(3, &[(1, 0, 1.0)], &[0]).unwrap();
        let p = verify_cutset(&zero, &[0], &[1], &[2], 1).unwrap();
        assert!(nonneg_criteria(&p).unwrap().bound_pass);
    }

    #[test]
    fn inverse_small_cases() {
        let one = toeplitz_inverse_entries(1, 0.4, 0.2, 0.3).unwrap();
        assert_relative_eq!(one[(0, 0)], 1.0 / 0.6, max_relative = 1e-15);
        let lower = toeplitz_inverse_entries(6, 0.3, 0.0, 0.5).unwrap();
        for l in 0..6 {
            for q in 0..=l {
                let expected = 0.5f64.powi((l - q) as i32) / 0.7f64.powi((l - q + 1) as i32);
                assert_relative_eq!(lower[(l, q)], expected, max_relative = 1e-14);
            }
        }
        assert!(toeplitz_inverse_entries(3, 0.6, 0.4, 0.4).is_err());
    }

    #[test]
    fn inverse_matches_dense_with_extended_precision() {
        for n in [5, 31, 45] {
            let g = toeplitz_matrix(n, 0.35, 0.2, 0.25).unwrap();
            let dense = (DMatrix::identity(n, n) - g).try_inverse().unwrap();
            let closed = toeplitz_inverse_entries(n, 0.35, 0.2, 0.25).unwrap();
            assert!((dense - closed).amax() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn profile_shapes() {
        let p = toeplitz_gain_profile(8, 0.2, 0.1, 0.3, 2).unwrap();
        assert!(p.predicted_decreasing);
        assert_eq!(p.observed, Monotonicity::StrictlyDecreasing);
        let g = toeplitz_gain_profile(8, 0.3, 0.0, 0.8, 1).unwrap();
        assert_eq!(g.observed, Monotonicity::StrictlyIncreasing);
        for (k, v) in g.values.iter().enumerate() {
            assert_relative_eq!(*v, (0.8f64 / 0.7).powi(k as i32) / 0.7, max_relative = 1e-13);
        }
        let up = toeplitz_gain_profile(5, 0.3, 0.2, 0.0, 1).unwrap();
        assert_eq!(up.values[1..], [0.0; 3]);
        assert_eq!(up.observed, Monotonicity::NonIncreasing);
    }

    #[test]
    fn siso_orderings_follow_conditions() {
        let sc = SisoScenario {
            mu_delta: 1.0,
            sigma_c2: 1.5,
            s1: 2.0,
            s2: 1.0,
            sigma_v2: 1.2,
            horizon: 100,
        };
        let good = siso_orderings(10, 0.2, 0.1, 0.3, 1, 4, &sc).unwrap();
        assert_eq!(good.predicted, Dominance::CutsetBest);
        assert!(good.cutset_best);
        let bad = siso_orderings(10, 0.3, 0.0, 0.8, 1, 4, &sc).unwrap();
        assert_eq!(bad.predicted, Dominance::CutsetWorst);
        assert!(bad.cutset_worst);
        assert!(siso_orderings(10, 0.2, 0.1, 0.3, 4, 4, &sc).is_err());
    }

    #[test]
    fn classify_sequences() {
        assert_eq!(classify(&[3.0, 2.0, 1.0]), Monotonicity::StrictlyDecreasing);
        assert_eq!(classify(&[1.0, 1.0]), Monotonicity::Constant);
        assert_eq!(classify(&[1.0, 2.0, 2.0]), Monotonicity::NonDecreasing);
        assert_eq!(classify(&[1.0, 2.0, 1.0]), Monotonicity::Mixed);
    }
}
