//! Reference networks and scenario parameters used by the examples and tests.
//!
//! The networks are hand-built to satisfy a fixed structure: non-negative
//! weights, nilpotency of the short-memory 10-node graph, row sums of `G~`
//! above one there, and `||G~||_inf <= 0.35 < 1/sqrt(7)` on the 50-node
//! graph. All node lists below are 0-based.

use crate::error::Result;
use crate::graph::{build_network, parse_edge_list, NetworkModel};
use crate::lti::{IdenticalStats, ScenarioSpec};
use crate::scalar::Scalar;

pub const NINE_NODE_EDGES: &str = include_str!("../fixtures/nine_node.edges");
pub const TEN_NODE_SHORT_EDGES: &str = include_str!("../fixtures/ten_node_short.edges");
pub const TEN_NODE_LONG_EDGES: &str = include_str!("../fixtures/ten_node_long.edges");
pub const FIFTY_NODE_EDGES: &str = include_str!("../fixtures/fifty_node.edges");

/// Node sets of one cutset example.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub n: usize,
    pub inputs: &'static [usize],
    pub source: &'static [usize],
    pub cutset: &'static [usize],
    pub partitioned: &'static [usize],
}

pub const NINE_NODE: Layout = Layout {
    n: 9,
    inputs: &[0, 1],
    source: &[0, 1, 2],
    cutset: &[3, 4, 5],
    partitioned: &[6, 7, 8],
};

/// `{5, 6, 7}` (1-based) stops being a cutset: node 4 feeds node 8 directly.
pub const NINE_NODE_BROKEN: Layout = Layout {
    n: 9,
    inputs: &[0, 1],
    source: &[0, 1, 2, 3],
    cutset: &[4, 5, 6],
    partitioned: &[7, 8],
};

pub const TEN_NODE: Layout = Layout {
    n: 10,
    inputs: &[0, 1],
    source: &[0, 1],
    cutset: &[2],
    partitioned: &[3, 4, 5, 6, 7, 8, 9],
};

pub const FIFTY_NODE: Layout = Layout {
    n: 50,
    inputs: &[0, 1, 2, 4, 20, 25, 35, 42],
    source: &[
        0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 22, 23, 24, 25,
        26, 27, 28, 30, 31, 32, 35, 36, 38, 40, 42, 44, 45, 46, 49,
    ],
    cutset: &[21, 29, 37],
    partitioned: &[33, 34, 39, 41, 43, 47, 48],
};

impl Layout {
    pub fn network<T: Scalar>(&self, edges: &str) -> Result<NetworkModel<T>> {
        build_network(self.n, &parse_edge_list(edges)?, self.inputs)
    }

    /// Cutset and partitioned nodes, the candidate sensor pool.
    pub fn pool(&self) -> Vec<usize> {
        let mut pool: Vec<usize> = self.cutset.iter().chain(self.partitioned).copied().collect();
        pool.sort_unstable();
        pool
    }
}

pub fn nine_node<T: Scalar>() -> Result<NetworkModel<T>> {
    NINE_NODE.network(NINE_NODE_EDGES)
}

/// Nilpotent 10-node network (`G^10 = 0`).
pub fn ten_node_short<T: Scalar>() -> Result<NetworkModel<T>> {
    TEN_NODE.network(TEN_NODE_SHORT_EDGES)
}

/// The 10-node network with a 0.97 self-loop on the cutset node, `rho(G) = 0.97`.
pub fn ten_node_long<T: Scalar>() -> Result<NetworkModel<T>> {
    TEN_NODE.network(TEN_NODE_LONG_EDGES)
}

pub fn fifty_node<T: Scalar>() -> Result<NetworkModel<T>> {
    FIFTY_NODE.network(FIFTY_NODE_EDGES)
}

pub const HORIZON: usize = 200;

/// Mean shift with `mu_1 = 2`, `mu_2 = 1`, common variance 1.5.
pub fn mean_stats<T: Scalar>(r: usize) -> IdenticalStats<T> {
    IdenticalStats::isotropic(T::lit(2.0), T::lit(1.0), T::lit(1.5), T::lit(1.5), r)
}

pub const MEAN_SIGMA_V2: f64 = 1.2;

/// Covariance shift of the 10-node example: variances 2 and 1.
pub fn ten_node_cov_stats<T: Scalar>() -> IdenticalStats<T> {
    IdenticalStats::isotropic(T::zero(), T::zero(), T::lit(2.0), T::lit(1.0), 2)
}

pub const TEN_NODE_COV_SIGMA_V2: f64 = 1.2;

/// Covariance shift of the 50-node example: variances 25 and 0.1.
pub fn fifty_node_cov_stats<T: Scalar>() -> IdenticalStats<T> {
    IdenticalStats::isotropic(T::zero(), T::zero(), T::lit(25.0), T::lit(0.1), 8)
}

pub const FIFTY_NODE_COV_SIGMA_V2: f64 = 0.5;

/// Scenario on `layout` from `stats` with horizon `N`.
pub fn scenario<T: Scalar>(layout: &Layout, stats: &IdenticalStats<T>, horizon: usize) -> Result<ScenarioSpec<T>> {
    stats.scenario(layout.n, horizon)
}
