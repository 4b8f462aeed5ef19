//! Exhaustive ranking of equal-size sensor subsets by asymptotic error
//! probability.

use std::cmp::Ordering;

use itertools::Itertools;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::error_prob::{asym_snr_mean, cov_shrink, cov_snr_from_gain, pe_cov, pe_mean};
use crate::graph::{check_node_list, distance, NetworkModel};
use crate::linalg::psd_sqrt;
use crate::lti::{FrequencyResponse, GridOptions, ScenarioSpec, SensorSet};
use crate::scalar::Scalar;

/// All `k`-subsets of `pool` whose distance from the input nodes is at
/// least `d`, in lexicographic order.
pub fn enumerate_subsets<T: Scalar>(
    model: &NetworkModel<T>,
    pool: &[usize],
    k: usize,
    d: usize,
) -> Result<Vec<Vec<usize>>> {
    check_node_list(pool, model.n())?;
    if k == 0 {
        return Err(Error::EmptySet("subset cardinality"));
    }
    if k > pool.len() {
        return Err(Error::InvalidParameter(format!(
            "cardinality {k} exceeds pool size {}",
            pool.len()
        )));
    }
    let mut sorted = pool.to_vec();
    sorted.sort_unstable();
    let inputs = model.inputs();
    let mut out = Vec::new();
    for subset in sorted.into_iter().combinations(k) {
        let far_enough = match distance(model, inputs, &subset)? {
            Some(dist) => dist >= d,
            None => true,
        };
        if far_enough {
            out.push(subset);
        }
    }
    Ok(out)
}

/// Scenario plus sensor noise for one detection model.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementModel<T: Scalar> {
    pub scenario: ScenarioSpec<T>,
    pub sigma_v2: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    Mean,
    Covariance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedPlacement<T: Scalar> {
    pub subset: Vec<usize>,
    pub eta: Option<T>,
    pub pe_mean: Option<T>,
    pub r: Option<T>,
    pub pe_cov: Option<T>,
    /// 1 = lowest error probability.
    pub rank: usize,
    /// Label in decreasing order of error probability (1 = worst).
    pub label: usize,
    pub is_cutset: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacementRanking<T: Scalar> {
    pub criterion: Criterion,
    pub ranked: Vec<RankedPlacement<T>>,
    /// Subsets that could not be evaluated, with the reason.
    pub excluded: Vec<(Vec<usize>, String)>,
}

impl<T: Scalar> PlacementRanking<T> {
    pub fn position(&self, subset: &[usize]) -> Option<&RankedPlacement<T>> {
        let mut key = subset.to_vec();
        key.sort_unstable();
        self.ranked.iter().find(|p| p.subset == key)
    }
}

struct CovContext<'a, T: Scalar> {
    response: FrequencyResponse<'a, T>,
    kappa: T,
    sigma_v2: T,
}

/// Evaluates every subset under the configured models and sorts by the
/// chosen criterion. The sort key is the SNR (descending), which orders the
/// error probabilities identically but stays informative where they
/// underflow; equal keys fall back to lexicographic subset order.
pub fn rank_placements<T: Scalar>(
    model: &NetworkModel<T>,
    mean: Option<&PlacementModel<T>>,
    cov: Option<&PlacementModel<T>>,
    subsets: &[Vec<usize>],
    criterion: Criterion,
    cutset: Option<&[usize]>,
    opts: GridOptions,
) -> Result<PlacementRanking<T>> {
    let wanted = match criterion {
        Criterion::Mean => mean.is_some(),
        Criterion::Covariance => cov.is_some(),
    };
    if !wanted {
        return Err(Error::InvalidParameter(format!(
            "ranking by {criterion:?} needs that model configured"
        )));
    }
    let cov_ctx = match cov {
        Some(pm) => {
            if !(pm.sigma_v2 > T::zero()) {
                return Err(Error::InvalidParameter(
                    "covariance ranking needs sigma_v^2 > 0".into(),
                ));
            }
            let kappa = cov_shrink(&pm.scenario)?;
            let root = psd_sqrt(&pm.scenario.sigma1)?;
            Some(CovContext {
                response: FrequencyResponse::new(model, &root, opts)?,
                kappa,
                sigma_v2: pm.sigma_v2,
            })
        }
        None => None,
    };
    let cut_key = cutset.map(|c| {
        let mut c = c.to_vec();
        c.sort_unstable();
        c
    });

    let evaluated: Vec<std::result::Result<RankedPlacement<T>, (Vec<usize>, String)>> = subsets
        .par_iter()
        .map(|subset| {
            let mut key = subset.clone();
            key.sort_unstable();
            evaluate(model, &key, mean, cov_ctx.as_ref())
                .map(|mut p| {
                    p.is_cutset = cut_key.as_ref() == Some(&key);
                    p
                })
                .map_err(|e| (key, e.to_string()))
        })
        .collect();

    let mut ranked = Vec::new();
    let mut excluded = Vec::new();
    for e in evaluated {
        match e {
            Ok(p) => ranked.push(p),
            Err(x) => excluded.push(x),
        }
    }
    let snr = |p: &RankedPlacement<T>| match criterion {
        Criterion::Mean => p.eta,
        Criterion::Covariance => p.r,
    };
    ranked.sort_by(|a, b| {
        snr(b)
            .partial_cmp(&snr(a))
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.subset.cmp(&b.subset))
    });
    let total = ranked.len();
    for (i, p) in ranked.iter_mut().enumerate() {
        p.rank = i + 1;
        p.label = total - i;
    }
    Ok(PlacementRanking {
        criterion,
        ranked,
        excluded,
    })
}

fn evaluate<T: Scalar>(
    model: &NetworkModel<T>,
    subset: &[usize],
    mean: Option<&PlacementModel<T>>,
    cov: Option<&CovContext<'_, T>>,
) -> Result<RankedPlacement<T>> {
    let mut out = RankedPlacement {
        subset: subset.to_vec(),
        eta: None,
        pe_mean: None,
        r: None,
        pe_cov: None,
        rank: 0,
        label: 0,
        is_cutset: false,
    };
    if let Some(pm) = mean {
        let sensors = SensorSet::new(subset, model.n(), pm.sigma_v2)?;
        let eta = asym_snr_mean(model, &sensors, &pm.scenario)?.value;
        out.pe_mean = Some(pe_mean(eta)?.value);
        out.eta = Some(eta);
    }
    if let Some(ctx) = cov {
        let g = ctx.response.gain(subset)?.value;
        let r = cov_snr_from_gain(g, ctx.sigma_v2, ctx.kappa);
        out.pe_cov = Some(pe_cov(r)?.value);
        out.r = Some(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_network;
    use nalgebra::{DMatrix, DVector};

    fn binomial(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    fn line(n: usize) -> NetworkModel<f64> {
        let edges: Vec<_> = (1..n).map(|i| (i, i - 1, 0.5)).collect();
        build_network(n, &edges, &[0]).unwrap()
    }

    #[test]
    fn subset_counts_match_binomials() {
        let m = line(12);
        for n in 1..=12usize {
            let pool: Vec<usize> = (0..n).collect();
            for k in 1..=n {
                let subs = enumerate_subsets(&m, &pool, k, 0).unwrap();
                assert_eq!(subs.len() as u64, binomial(n as u64, k as u64));
            }
        }
        let pool: Vec<usize> = (2..12).collect();
        assert_eq!(enumerate_subsets(&m, &pool, 3, 0).unwrap().len(), 120);
        assert_eq!(enumerate_subsets(&m, &pool, 10, 0).unwrap().len(), 1);
        assert!(enumerate_subsets(&m, &pool, 11, 0).is_err());
    }

    #[test]
    fn subsets_are_lexicographic_and_distance_filtered() {
        let m = line(6);
        let subs = enumerate_subsets(&m, &[4, 1, 3, 2], 2, 0).unwrap();
        assert_eq!(subs[0], vec![1, 2]);
        assert!(subs.windows(2).all(|w| w[0] < w[1]));
        // node 1 is one hop from the input
        let far = enumerate_subsets(&m, &[1, 2, 3], 1, 2).unwrap();
        assert_eq!(far, vec![vec![2], vec![3]]);
    }

    fn models(n: usize) -> (PlacementModel<f64>, PlacementModel<f64>) {
        let mean = ScenarioSpec::mean_shift(
            DVector::from_element(1, 2.0),
            DVector::from_element(1, 1.0),
            DMatrix::from_element(1, 1, 1.5),
            n,
            200,
        )
        .unwrap();
        let cov = ScenarioSpec::cov_shift(
            DVector::zeros(1),
            DMatrix::from_element(1, 1, 2.0),
            DMatrix::zeros(1, 1),
            n,
            200,
        )
        .unwrap();
        (
            PlacementModel { scenario: mean, sigma_v2: 1.2 },
            PlacementModel { scenario: cov, sigma_v2: 1.2 },
        )
    }

    #[test]
    fn decaying_line_prefers_upstream_nodes() {
        let m = line(6);
        let (mean, cov) = models(6);
        let subs = enumerate_subsets(&m, &[1, 2, 3, 4, 5], 1, 0).unwrap();
        let opts = GridOptions::with_points(256);
        for crit in [Criterion::Mean, Criterion::Covariance] {
            let rk = rank_placements(&m, Some(&mean), Some(&cov), &subs, crit, Some(&[1]), opts).unwrap();
            let order: Vec<usize> = rk.ranked.iter().map(|p| p.subset[0]).collect();
            assert_eq!(order, vec![1, 2, 3, 4, 5]);
            assert!(rk.ranked[0].is_cutset);
            assert_eq!(rk.ranked[0].label, 5);
            let pes: Vec<f64> = rk
                .ranked
                .iter()
                .map(|p| match crit {
                    Criterion::Mean => p.pe_mean.unwrap(),
                    Criterion::Covariance => p.pe_cov.unwrap(),
                })
                .collect();
            assert!(pes.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn duplicate_subsets_score_identically_and_tie_lexicographically() {
        let m = line(4);
        let (mean, _) = models(4);
        let subs = vec![vec![3, 2], vec![2, 3]];
        let rk = rank_placements(&m, Some(&mean), None, &subs, Criterion::Mean, None, GridOptions::default())
            .unwrap();
        assert_eq!(rk.ranked[0].pe_mean, rk.ranked[1].pe_mean);
        assert_eq!(rk.ranked[0].subset, vec![2, 3]);
        assert!(rank_placements(&m, Some(&mean), None, &subs, Criterion::Covariance, None, GridOptions::default())
            .is_err());
    }

    #[test]
    fn failing_subsets_are_excluded() {
        let m = line(4);
        let (mean, _) = models(4);
        let subs = vec![vec![1], vec![9]];
        let rk = rank_placements(&m, Some(&mean), None, &subs, Criterion::Mean, None, GridOptions::default())
            .unwrap();
        assert_eq!(rk.ranked.len(), 1);
        assert_eq!(rk.excluded[0].0, vec![9]);
    }
}
