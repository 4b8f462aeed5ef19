//! Stacked measurement moments, transfer matrices and unit-circle gains.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{check_node_list, CutsetPartition, NetworkModel};
use crate::linalg::{self, check_psd, complex_singular_values, max_abs, to_complex};
use crate::scalar::Scalar;

/// Sensor nodes `J` with selector `C` and i.i.d. noise variance.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorSet<T: Scalar> {
    nodes: Vec<usize>,
    selector: DMatrix<T>,
    sigma_v2: T,
}

impl<T: Scalar> SensorSet<T> {
    /// `nodes` are 0-based indices into a network of `n` nodes.
    pub fn new(nodes: &[usize], n: usize, sigma_v2: T) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::EmptySet("sensor set"));
        }
        check_node_list(nodes, n)?;
        if !(sigma_v2 >= T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "sensor noise variance {} must be non-negative",
                sigma_v2.as_f64()
            )));
        }
        let mut selector = DMatrix::zeros(nodes.len(), n);
        for (row, &j) in nodes.iter().enumerate() {
            selector[(row, j)] = T::one();
        }
        Ok(Self {
            nodes: nodes.to_vec(),
            selector,
            sigma_v2,
        })
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn m(&self) -> usize {
        self.nodes.len()
    }

    pub fn n(&self) -> usize {
        self.selector.ncols()
    }

    pub fn selector(&self) -> &DMatrix<T> {
        &self.selector
    }

    pub fn sigma_v2(&self) -> T {
        self.sigma_v2
    }

    pub fn with_noise(&self, sigma_v2: T) -> Result<Self> {
        Self::new(&self.nodes, self.n(), sigma_v2)
    }
}

/// Which moments differ between the two hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Same covariance, different means.
    MeanShift,
    /// Same mean, different covariances.
    CovShift,
    /// Both moments coincide.
    Identical,
    /// Both moments differ.
    General,
}

/// Hypothesis pair `H_i: w[k] ~ N(mu_i, Sigma_i)` with priors, initial-state
/// covariance and horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec<T: Scalar> {
    pub mu1: DVector<T>,
    pub mu2: DVector<T>,
    pub sigma1: DMatrix<T>,
    pub sigma2: DMatrix<T>,
    pub pi1: T,
    pub pi2: T,
    pub sigma0: DMatrix<T>,
    pub horizon: usize,
}

impl<T: Scalar> ScenarioSpec<T> {
    pub fn new(
        mu1: DVector<T>,
        mu2: DVector<T>,
        sigma1: DMatrix<T>,
        sigma2: DMatrix<T>,
        priors: (T, T),
        sigma0: DMatrix<T>,
        horizon: usize,
    ) -> Result<Self> {
        let spec = Self {
            mu1,
            mu2,
            sigma1,
            sigma2,
            pi1: priors.0,
            pi2: priors.1,
            sigma0,
            horizon,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Equal priors, `Sigma_0 = 0`.
    pub fn mean_shift(
        mu1: DVector<T>,
        mu2: DVector<T>,
        sigma: DMatrix<T>,
        n: usize,
        horizon: usize,
    ) -> Result<Self> {
        let half = T::lit(0.5);
        Self::new(mu1, mu2, sigma.clone(), sigma, (half, half), DMatrix::zeros(n, n), horizon)
    }

    /// Equal priors, `Sigma_0 = 0`.
    pub fn cov_shift(
        mu: DVector<T>,
        sigma1: DMatrix<T>,
        sigma2: DMatrix<T>,
        n: usize,
        horizon: usize,
    ) -> Result<Self> {
        let half = T::lit(0.5);
        Self::new(mu.clone(), mu, sigma1, sigma2, (half, half), DMatrix::zeros(n, n), horizon)
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.mu1.len();
        if self.mu2.len() != r || self.sigma1.shape() != (r, r) || self.sigma2.shape() != (r, r) {
            return Err(Error::Dimension(format!(
                "hypothesis moments: mu {} / {}, Sigma {:?} / {:?}",
                r,
                self.mu2.len(),
                self.sigma1.shape(),
                self.sigma2.shape()
            )));
        }
        if !self.sigma0.is_square() {
            return Err(Error::Dimension("Sigma_0 must be square".into()));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidParameter("horizon N must be >= 1".into()));
        }
        check_psd(&self.sigma1, "Sigma_1")?;
        check_psd(&self.sigma2, "Sigma_2")?;
        check_psd(&self.sigma0, "Sigma_0")?;
        let (p1, p2) = (self.pi1, self.pi2);
        if !(p1 >= T::zero() && p2 >= T::zero()) || (p1 + p2 - T::one()).mag() > T::tol(1e-12) {
            return Err(Error::InvalidParameter(format!(
                "priors ({}, {}) must be non-negative and sum to 1",
                p1.as_f64(),
                p2.as_f64()
            )));
        }
        Ok(())
    }

    pub fn r(&self) -> usize {
        self.mu1.len()
    }

    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        let mut out = self.clone();
        out.horizon = horizon;
        out.validate()?;
        Ok(out)
    }

    /// `ln(pi_1 / pi_2)`; fails when a prior is zero.
    pub fn gamma(&self) -> Result<T> {
        if self.pi1 <= T::zero() || self.pi2 <= T::zero() {
            return Err(Error::InvalidParameter(
                "MAP rule needs both priors strictly positive".into(),
            ));
        }
        Ok((self.pi1 / self.pi2).ln())
    }

    pub fn kind(&self) -> ModelKind {
        let same_mean = vectors_close(&self.mu1, &self.mu2);
        let same_cov = matrices_close(&self.sigma1, &self.sigma2, linalg::SYMMETRY_TOL);
        match (same_mean, same_cov) {
            (true, true) => ModelKind::Identical,
            (false, true) => ModelKind::MeanShift,
            (true, false) => ModelKind::CovShift,
            (false, false) => ModelKind::General,
        }
    }
}

pub(crate) fn vectors_close<T: Scalar>(a: &DVector<T>, b: &DVector<T>) -> bool {
    let scale = a.amax().max(b.amax()).max(T::one());
    (a - b).amax() <= T::tol(1e-12) * scale
}

pub(crate) fn matrices_close<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>, rel_tol: f64) -> bool {
    if a.shape() != b.shape() {
        return false;
    }
    let scale = max_abs(a).max(max_abs(b)).max(T::one());
    max_abs(&(a - b)) <= T::tol(rel_tol) * scale
}

/// Identical-statistics hypotheses `N(mu_i 1, sigma_i^2 D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdenticalStats<T: Scalar> {
    pub mu1: T,
    pub mu2: T,
    pub s1: T,
    pub s2: T,
    pub d: DMatrix<T>,
}

impl<T: Scalar> IdenticalStats<T> {
    /// `D = I_r`.
    pub fn isotropic(mu1: T, mu2: T, s1: T, s2: T, r: usize) -> Self {
        Self {
            mu1,
            mu2,
            s1,
            s2,
            d: DMatrix::identity(r, r),
        }
    }

    pub fn r(&self) -> usize {
        self.d.nrows()
    }

    /// Full scenario with equal priors and `Sigma_0 = 0`.
    pub fn scenario(&self, n: usize, horizon: usize) -> Result<ScenarioSpec<T>> {
        let r = self.r();
        let half = T::lit(0.5);
        ScenarioSpec::new(
            DVector::from_element(r, self.mu1),
            DVector::from_element(r, self.mu2),
            &self.d * self.s1,
            &self.d * self.s2,
            (half, half),
            DMatrix::zeros(n, n),
            horizon,
        )
    }
}

/// Moments of the stacked measurement vector `Y = [y[1]; ...; y[N]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedMoments<T: Scalar> {
    pub mu_bar_1: DVector<T>,
    pub mu_bar_2: DVector<T>,
    pub sigma_bar_1: DMatrix<T>,
    pub sigma_bar_2: DMatrix<T>,
    /// Rows `C G^p`, `p = 1..N`.
    pub obs: DMatrix<T>,
    /// Block `(p, q)` equals `C G^{p-q} Pi` for `p >= q`.
    pub impulse: DMatrix<T>,
    pub m: usize,
    pub horizon: usize,
    pub sigma_v2: T,
}

impl<T: Scalar> StackedMoments<T> {
    pub fn dim(&self) -> usize {
        self.mu_bar_1.len()
    }

    pub fn mu_delta(&self) -> DVector<T> {
        &self.mu_bar_2 - &self.mu_bar_1
    }

    pub fn same_covariance(&self) -> bool {
        matrices_close(&self.sigma_bar_1, &self.sigma_bar_2, linalg::SYMMETRY_TOL)
    }

    pub fn same_mean(&self) -> bool {
        vectors_close(&self.mu_bar_1, &self.mu_bar_2)
    }
}

fn check_dims<T: Scalar>(
    model: &NetworkModel<T>,
    sensors: &SensorSet<T>,
    scenario: &ScenarioSpec<T>,
) -> Result<()> {
    let n = model.n();
    if sensors.n() != n {
        return Err(Error::Dimension(format!(
            "sensor selector has {} columns, network has {} nodes",
            sensors.n(),
            n
        )));
    }
    if scenario.r() != model.r() {
        return Err(Error::Dimension(format!(
            "scenario has {} inputs, network has {}",
            scenario.r(),
            model.r()
        )));
    }
    if scenario.sigma0.nrows() != n {
        return Err(Error::Dimension(format!(
            "Sigma_0 is {}x{}, network has {} nodes",
            scenario.sigma0.nrows(),
            scenario.sigma0.ncols(),
            n
        )));
    }
    Ok(())
}

/// Markov parameters `C G^l Pi` for `l = 0..len`.
pub fn markov_parameters<T: Scalar>(
    model: &NetworkModel<T>,
    sensors: &SensorSet<T>,
    len: usize,
) -> Vec<DMatrix<T>> {
    let mut out = Vec::with_capacity(len);
    let mut cg = sensors.selector().clone();
    for l in 0..len {
        if l > 0 {
            cg = &cg * model.adjacency();
        }
        out.push(&cg * model.input_matrix());
    }
    out
}

/// Builds `mu_bar_i`, `Sigma_bar_i`, `O` and `F` for the stacked output.
pub fn stacked_moments<T: Scalar>(
    model: &NetworkModel<T>,
    sensors: &SensorSet<T>,
    scenario: &ScenarioSpec<T>,
) -> Result<StackedMoments<T>> {
    check_dims(model, sensors, scenario)?;
    let (n, m, r, big_n) = (model.n(), sensors.m(), model.r(), scenario.horizon);
    let g = model.adjacency();

    let mut obs = DMatrix::zeros(m * big_n, n);
    let mut cg = sensors.selector().clone();
    for p in 0..big_n {
        cg = &cg * g;
        obs.view_mut((p * m, 0), (m, n)).copy_from(&cg);
    }

    let k = markov_parameters(model, sensors, big_n);
    let mut impulse = DMatrix::zeros(m * big_n, r * big_n);
    for p in 0..big_n {
        for q in 0..=p {
            impulse.view_mut((p * m, q * r), (m, r)).copy_from(&k[p - q]);
        }
    }

    let stacked_mean = |mu: &DVector<T>| {
        let mut out = DVector::zeros(m * big_n);
        let mut acc = DVector::zeros(m);
        for p in 0..big_n {
            acc += &k[p] * mu;
            out.rows_mut(p * m, m).copy_from(&acc);
        }
        out
    };

    let base = {
        let mut b = &obs * &scenario.sigma0 * obs.transpose();
        for i in 0..m * big_n {
            b[(i, i)] += sensors.sigma_v2();
        }
        b
    };
    let stacked_cov = |sigma: &DMatrix<T>| {
        let ks: Vec<DMatrix<T>> = k.iter().map(|kl| kl * sigma).collect();
        let mut acc = DMatrix::zeros(m * big_n, m * big_n);
        for p in 0..big_n {
            for q in 0..=p {
                let mut block = &ks[p] * k[q].transpose();
                if q > 0 {
                    block += acc.view(((p - 1) * m, (q - 1) * m), (m, m));
                }
                acc.view_mut((p * m, q * m), (m, m)).copy_from(&block);
                if q < p {
                    acc.view_mut((q * m, p * m), (m, m)).copy_from(&block.transpose());
                }
            }
        }
        acc + &base
    };

    Ok(StackedMoments {
        mu_bar_1: stacked_mean(&scenario.mu1),
        mu_bar_2: stacked_mean(&scenario.mu2),
        sigma_bar_1: stacked_cov(&scenario.sigma1),
        sigma_bar_2: stacked_cov(&scenario.sigma2),
        obs,
        impulse,
        m,
        horizon: big_n,
        sigma_v2: sensors.sigma_v2(),
    })
}

/// Relative pivot size below which `zI - G` is treated as singular.
const RESOLVENT_TOL: f64 = 1e-13;

/// Solves `(zI - g) X = rhs`.
fn resolvent_solve<T: Scalar>(
    g: &DMatrix<T>,
    z: Complex<T>,
    rhs: &DMatrix<Complex<T>>,
) -> Result<DMatrix<Complex<T>>> {
    let n = g.nrows();
    let mut a = -to_complex(g);
    for i in 0..n {
        a[(i, i)] += z;
    }
    let scale = a.iter().fold(T::zero(), |acc, x| acc.max(nalgebra::ComplexField::modulus(*x)));
    let singular = || Error::SingularResolvent {
        re: z.re.as_f64(),
        im: z.im.as_f64(),
    };
    let lu = a.lu();
    let u = lu.u();
    let min_pivot = (0..n).fold(T::max_value().unwrap_or(T::one()), |acc, i| {
        acc.min(nalgebra::ComplexField::modulus(u[(i, i)]))
    });
    if n > 0 && min_pivot <= T::tol(RESOLVENT_TOL) * scale.max(T::one()) {
        return Err(singular());
    }
    lu.solve(rhs).ok_or_else(singular)
}

/// `T(z) = C (zI - G)^{-1} Pi`.
pub fn transfer<T: Scalar>(
    model: &NetworkModel<T>,
    sensors: &SensorSet<T>,
    z: Complex<T>,
) -> Result<DMatrix<Complex<T>>> {
    if sensors.n() != model.n() {
        return Err(Error::Dimension("sensor set does not match network".into()));
    }
    let x = resolvent_solve(model.adjacency(), z, &to_complex(model.input_matrix()))?;
    Ok(to_complex(sensors.selector()) * x)
}

/// Frequency grid settings for suprema over the unit circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    /// Samples of `omega` over `[0, pi]`.
    pub points: usize,
    /// Golden-section stopping width relative to `pi`.
    pub rel_tol: f64,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            points: 4096,
            rel_tol: 1e-8,
        }
    }
}

impl GridOptions {
    pub fn with_points(points: usize) -> Self {
        Self {
            points,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::InvalidParameter("frequency grid needs >= 2 points".into()));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter("grid tolerance must be positive".into()));
        }
        Ok(())
    }

    /// `omega_k = pi k / (points - 1)`. Real systems have conjugate-symmetric
    /// responses, so the upper half circle carries every singular value.
    pub fn omegas<T: Scalar>(&self) -> Vec<T> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|k| T::lit(std::f64::consts::PI * k as f64 / last))
            .collect()
    }
}

/// Extremal value of a frequency function and where it is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyPoint<T: Scalar> {
    pub value: T,
    pub omega: T,
}

fn unit_t<T: Scalar>(omega: T) -> Complex<T> {
    Complex::new(omega.cos(), omega.sin())
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
fn golden_max<T: Scalar>(
    f: &dyn Fn(T) -> Result<T>,
    mut lo: T,
    mut hi: T,
    width: T,
) -> Result<FrequencyPoint<T>> {
    let ratio = T::lit(0.618_033_988_749_894_8);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > width {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 {
        FrequencyPoint { value: f1, omega: x1 }
    } else {
        FrequencyPoint { value: f2, omega: x2 }
    })
}

/// Grid scan plus golden-section polish of `sign * f`; returns the best of
/// the grid point and the refined point.
fn extremize<T: Scalar>(
    values: &[T],
    omegas: &[T],
    f: &dyn Fn(T) -> Result<T>,
    maximize: bool,
    opts: &GridOptions,
) -> Result<FrequencyPoint<T>> {
    let better = |a: T, b: T| if maximize { a > b } else { a < b };
    let mut best = 0;
    for (k, &v) in values.iter().enumerate() {
        if better(v, values[best]) {
            best = k;
        }
    }
    let grid_best = FrequencyPoint {
        value: values[best],
        omega: omegas[best],
    };
    let lo = omegas[best.saturating_sub(1)];
    let hi = omegas[(best + 1).min(omegas.len() - 1)];
    let width = T::lit(opts.rel_tol * std::f64::consts::PI);
    let signed = |w: T| f(w).map(|v| if maximize { v } else { -v });
    let mut refined = golden_max(&signed, lo, hi, width)?;
    if !maximize {
        refined.value = -refined.value;
    }
    Ok(if better(refined.value, grid_best.value) {
        refined
    } else {
        grid_best
    })
}

fn require_stable<T: Scalar>(model: &NetworkModel<T>) -> Result<()> {
    let rho = model.spectral_radius();
    if rho >= T::one() {
        return Err(Error::Unstable(rho.as_f64()));
    }
    Ok(())
}

/// Precomputed state responses `(zI - G)^{-1} Pi W` on the frequency grid,
/// shared by every sensor subset of one network.
#[derive(Debug, Clone)]
pub struct FrequencyResponse<'a, T: Scalar> {
    model: &'a NetworkModel<T>,
    input: DMatrix<Complex<T>>,
    omegas: Vec<T>,
    states: Vec<DMatrix<Complex<T>>>,
    opts: GridOptions,
}

impl<'a, T: Scalar> FrequencyResponse<'a, T> {
    /// `weight` is `r x r` (e.g. `Sigma_1^{1/2}`). Requires a stable network.
    pub fn new(model: &'a NetworkModel<T>, weight: &DMatrix<T>, opts: GridOptions) -> Result<Self> {
        opts.validate()?;
        if weight.nrows() != model.r() {
            return Err(Error::Dimension(format!(
                "weight has {} rows, network has {} inputs",
                weight.nrows(),
                model.r()
            )));
        }
        require_stable(model)?;
        let input = to_complex(&(model.input_matrix() * weight));
        let omegas = opts.omegas::<T>();
        let states = omegas
            .par_iter()
            .map(|&w| resolvent_solve(model.adjacency(), unit_t(w), &input))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            model,
            input,
            omegas,
            states,
            opts,
        })
    }

    fn rows(state: &DMatrix<Complex<T>>, nodes: &[usize]) -> DMatrix<Complex<T>> {
        DMatrix::from_fn(nodes.len(), state.ncols(), |i, j| state[(nodes[i], j)])
    }

    /// `sup_omega sigma_max(T(e^{i omega}) W)` for the given sensor nodes.
    pub fn gain(&self, nodes: &[usize]) -> Result<FrequencyPoint<T>> {
        check_node_list(nodes, self.model.n())?;
        let top = |m: &DMatrix<Complex<T>>| complex_singular_values(m).first().copied().unwrap_or(T::zero());
        let values: Vec<T> = self
            .states
            .par_iter()
            .map(|s| top(&Self::rows(s, nodes)))
            .collect();
        let f = |w: T| -> Result<T> {
            let s = resolvent_solve(self.model.adjacency(), unit_t(w), &self.input)?;
            Ok(top(&Self::rows(&s, nodes)))
        };
        extremize(&values, &self.omegas, &f, true, &self.opts)
    }

    /// Gain at `z = 1`.
    pub fn gain_at_one(&self, nodes: &[usize]) -> Result<T> {
        check_node_list(nodes, self.model.n())?;
        Ok(complex_singular_values(&Self::rows(&self.states[0], nodes))
            .first()
            .copied()
            .unwrap_or(T::zero()))
    }
}

/// `||T(z) W||_inf` over the unit circle.
pub fn hinf_gain<T: Scalar>(
    model: &NetworkModel<T>,
    sensors: &SensorSet<T>,
    weight: &DMatrix<T>,
    opts: GridOptions,
) -> Result<FrequencyPoint<T>> {
    if sensors.n() != model.n() {
        return Err(Error::Dimension("sensor set does not match network".into()));
    }
    FrequencyResponse::new(model, weight, opts)?.gain(sensors.nodes())
}

/// Singular-value extremes of `T_s(z) = (zI - G_pp)^{-1} G_pc`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvExtremes<T: Scalar> {
    /// `sup_{|z|=1} rho_bar(z)`.
    pub sup_max: FrequencyPoint<T>,
    /// `inf_{|z|=1} rho_lower(z)`.
    pub inf_min: FrequencyPoint<T>,
    pub max_at_one: T,
    pub min_at_one: T,
    /// False when only `z = 1` was evaluated.
    pub sampled: bool,
}

/// Distance of the spectrum of `G_pp` from the unit circle below which the
/// comparison theorem is rejected.
const UNIT_CIRCLE_TOL: f64 = 1e-9;

/// Largest and smallest singular values of `T_s` at `z = 1` and over the
/// unit circle. The smallest one is taken over the `n_1` input directions,
/// so it is zero whenever `card(P) < card(C_d)`.
pub fn subsystem_sv_extremes<T: Scalar>(
    partition: &CutsetPartition<T>,
    at_z1_only: bool,
    opts: GridOptions,
) -> Result<SvExtremes<T>> {
    opts.validate()?;
    let gpp = &partition.blocks.pp;
    let gpc = to_complex(&partition.blocks.pc);
    for lambda in linalg::eigenvalues(gpp) {
        let r = nalgebra::ComplexField::modulus(lambda);
        if (r - T::one()).mag() <= T::tol(UNIT_CIRCLE_TOL) {
            return Err(Error::UnitCircleEigenvalue(r.as_f64()));
        }
    }
    let (m1, n1) = partition.blocks.pc.shape();
    let extremes = |w: T| -> Result<(T, T)> {
        let ts = resolvent_solve(gpp, unit_t(w), &gpc)?;
        let sv = complex_singular_values(&ts);
        let top = sv.first().copied().unwrap_or(T::zero());
        let bottom = if m1 < n1 {
            T::zero()
        } else {
            sv.last().copied().unwrap_or(T::zero())
        };
        Ok((top, bottom))
    };
    let (max1, min1) = extremes(T::zero())?;
    if at_z1_only {
        let zero = T::zero();
        return Ok(SvExtremes {
            sup_max: FrequencyPoint { value: max1, omega: zero },
            inf_min: FrequencyPoint { value: min1, omega: zero },
            max_at_one: max1,
            min_at_one: min1,
            sampled: false,
        });
    }
    let omegas = opts.omegas::<T>();
    let values = omegas
        .par_iter()
        .map(|&w| extremes(w))
        .collect::<Result<Vec<_>>>()?;
    let tops: Vec<T> = values.iter().map(|v| v.0).collect();
    let bottoms: Vec<T> = values.iter().map(|v| v.1).collect();
    let sup_max = extremize(&tops, &omegas, &|w| extremes(w).map(|v| v.0), true, &opts)?;
    let inf_min = extremize(&bottoms, &omegas, &|w| extremes(w).map(|v| v.1), false, &opts)?;
    Ok(SvExtremes {
        sup_max,
        inf_min,
        max_at_one: max1,
        min_at_one: min1,
        sampled: true,
    })
}
