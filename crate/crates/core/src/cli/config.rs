//! JSON run configuration.
//!
//! Node labels are 1-based in the file and 0-based once loaded. Matrices are
//! row lists, a scalar `s` (meaning `s I`), or `{"file": path}` with one
//! whitespace-separated row per line. Relative paths resolve against the
//! config file's directory.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::graph::{build_network, parse_edge_list, toeplitz_line, NetworkModel};
use crate::lti::{IdenticalStats, ModelKind, ScenarioSpec};
use crate::monte_carlo::DetectorKind;
use crate::placement::Criterion;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub network: NetworkBlock,
    #[serde(default)]
    pub scenarios: Vec<ScenarioBlock>,
    pub partition: Option<PartitionBlock>,
    /// Sensor sets to analyze, e.g. `"3"` or `"4,5,9-10"`.
    #[serde(default)]
    pub sensors: Vec<String>,
    pub rank: Option<RankBlock>,
    #[serde(default)]
    pub options: OptionsBlock,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkBlock {
    pub n: Option<usize>,
    pub edges: Option<EdgeSource>,
    pub inputs: Option<String>,
    pub toeplitz: Option<ToeplitzBlock>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum EdgeSource {
    Path(String),
    Inline(Vec<(usize, usize, f64)>),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToeplitzBlock {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Input node.
    pub q: usize,
    /// Cutset node for the single-input comparison.
    pub j: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    MeanShift,
    CovShift,
    IdenticalStats,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum VectorValue {
    Scalar(f64),
    List(Vec<f64>),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum MatrixValue {
    Scalar(f64),
    Rows(Vec<Vec<f64>>),
    File { file: String },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioBlock {
    pub name: Option<String>,
    pub model: ModelName,
    pub mu1: Option<VectorValue>,
    pub mu2: Option<VectorValue>,
    pub sigma1: Option<MatrixValue>,
    pub sigma2: Option<MatrixValue>,
    /// Identical statistics: `sigma_1^2`, `sigma_2^2` and `D`.
    pub s1: Option<f64>,
    pub s2: Option<f64>,
    pub d: Option<MatrixValue>,
    pub priors: Option<(f64, f64)>,
    pub sigma_v2: f64,
    pub sigma0: Option<MatrixValue>,
    pub horizon: usize,
    pub detector: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionBlock {
    pub source: Option<String>,
    pub cutset: Option<String>,
    pub partitioned: Option<String>,
    #[serde(default = "one")]
    pub d: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankBlock {
    pub k: Option<usize>,
    pub pool: Option<String>,
    pub d: Option<usize>,
    pub criterion: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsBlock {
    pub grid: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<String>,
}

/// A scenario ready for analysis.
#[derive(Debug, Clone)]
pub struct NamedScenario {
    pub name: String,
    pub spec: ScenarioSpec<f64>,
    pub sigma_v2: f64,
    pub detector: DetectorKind,
    pub stats: Option<IdenticalStats<f64>>,
}

impl NamedScenario {
    pub fn is_mean(&self) -> bool {
        matches!(self.spec.kind(), ModelKind::MeanShift | ModelKind::Identical)
    }

    pub fn is_cov(&self) -> bool {
        self.spec.kind() == ModelKind::CovShift
    }
}

#[derive(Debug, Clone)]
pub struct Partition {
    pub source: Vec<usize>,
    pub cutset: Vec<usize>,
    pub partitioned: Vec<usize>,
    pub d: usize,
}

#[derive(Debug, Clone)]
pub struct RankSpec {
    pub k: Option<usize>,
    pub pool: Option<Vec<usize>>,
    pub d: Option<usize>,
    pub criterion: Option<Criterion>,
}

/// Fully resolved configuration.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub model: NetworkModel<f64>,
    pub toeplitz: Option<ToeplitzBlock>,
    pub scenarios: Vec<NamedScenario>,
    pub partition: Option<Partition>,
    pub sensors: Vec<Vec<usize>>,
    pub rank: RankSpec,
    pub grid: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

/// Parses `"1,2,5-7"` into sorted 0-based labels.
pub fn parse_node_set(text: &str, n: usize) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let label = |s: &str| -> Result<usize> {
            let v: usize = s
                .trim()
                .parse()
                .map_err(|_| invalid(format!("node label `{s}` is not a positive integer")))?;
            if v == 0 || v > n {
                return Err(invalid(format!("node #{v} outside 1..={n}")));
            }
            Ok(v - 1)
        };
        match part.split_once('-') {
            Some((lo, hi)) => {
                let (lo, hi) = (label(lo)?, label(hi)?);
                if lo > hi {
                    return Err(invalid(format!("empty node range `{part}`")));
                }
                out.extend(lo..=hi);
            }
            None => out.push(label(part)?),
        }
    }
    out.sort_unstable();
    let len = out.len();
    out.dedup();
    if out.len() != len {
        return Err(invalid(format!("node set `{text}` lists a node twice")));
    }
    Ok(out)
}

pub fn format_node_set(nodes: &[usize]) -> String {
    nodes.iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>().join(";")
}

fn read_matrix(base: &Path, value: &MatrixValue, dim: usize, what: &str) -> Result<DMatrix<f64>> {
    let m = match value {
        MatrixValue::Scalar(s) => DMatrix::identity(dim, dim) * *s,
        MatrixValue::Rows(rows) => rows_to_matrix(rows, what)?,
        MatrixValue::File { file } => {
            let path = base.join(file);
            let text = fs::read_to_string(&path)
                .map_err(|e| invalid(format!("{what}: cannot read {}: {e}", path.display())))?;
            let mut rows = Vec::new();
            for (k, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let row = line
                    .split_whitespace()
                    .map(|s| s.parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::Parse {
                        line: k + 1,
                        msg: format!("{}: {e}", path.display()),
                    })?;
                rows.push(row);
            }
            rows_to_matrix(&rows, what)?
        }
    };
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::Dimension(format!(
            "{what} is {}x{}, expected {dim}x{dim}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m)
}

fn rows_to_matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != nc) {
        return Err(Error::Dimension(format!("{what}: ragged rows")));
    }
    Ok(DMatrix::from_fn(nr, nc, |i, j| rows[i][j]))
}

fn read_vector(value: &VectorValue, dim: usize, what: &str) -> Result<DVector<f64>> {
    match value {
        VectorValue::Scalar(s) => Ok(DVector::from_element(dim, *s)),
        VectorValue::List(v) if v.len() == dim => Ok(DVector::from_column_slice(v)),
        VectorValue::List(v) => Err(Error::Dimension(format!(
            "{what} has {} entries, expected {dim}",
            v.len()
        ))),
    }
}

fn required<'a, V>(v: &'a Option<V>, what: &str, model: &str) -> Result<&'a V> {
    v.as_ref()
        .ok_or_else(|| invalid(format!("{model} scenario needs `{what}`")))
}

fn load_network(base: &Path, block: &NetworkBlock) -> Result<NetworkModel<f64>> {
    match (&block.edges, &block.toeplitz) {
        (Some(_), Some(_)) | (None, None) => Err(invalid(
            "network needs exactly one source: `edges` or `toeplitz`",
        )),
        (None, Some(t)) => {
            if t.q == 0 || t.q > t.n {
                return Err(invalid(format!("toeplitz input node #{} outside 1..={}", t.q, t.n)));
            }
            toeplitz_line(t.n, t.a, t.b, t.c, &[t.q - 1])
        }
        (Some(src), None) => {
            let n = block.n.ok_or_else(|| invalid("edge-list network needs `n`"))?;
            let edges = match src {
                EdgeSource::Path(p) => {
                    let path = base.join(p);
                    let text = fs::read_to_string(&path)
                        .map_err(|e| invalid(format!("cannot read edge list {}: {e}", path.display())))?;
                    parse_edge_list(&text)?
                }
                EdgeSource::Inline(list) => {
                    let mut out = Vec::with_capacity(list.len());
                    for &(i, j, w) in list {
                        if i == 0 || j == 0 {
                            return Err(invalid("edge labels are 1-based"));
                        }
                        out.push((i - 1, j - 1, w));
                    }
                    out
                }
            };
            let inputs = parse_node_set(block.inputs.as_deref().unwrap_or(""), n)?;
            if inputs.is_empty() {
                return Err(invalid("edge-list network needs `inputs`"));
            }
            build_network(n, &edges, &inputs)
        }
    }
}

fn load_scenario(base: &Path, block: &ScenarioBlock, index: usize, n: usize, r: usize) -> Result<NamedScenario> {
    let model = match block.model {
        ModelName::MeanShift => "mean_shift",
        ModelName::CovShift => "cov_shift",
        ModelName::IdenticalStats => "identical_stats",
    };
    let priors = block.priors.unwrap_or((0.5, 0.5));
    let sigma0 = match &block.sigma0 {
        Some(v) => read_matrix(base, v, n, "sigma0")?,
        None => DMatrix::zeros(n, n),
    };
    if !(block.sigma_v2 >= 0.0) {
        return Err(invalid(format!("sigma_v2 = {} must be >= 0", block.sigma_v2)));
    }
    let (spec, stats) = match block.model {
        ModelName::MeanShift | ModelName::CovShift => {
            let mu1 = read_vector(required(&block.mu1, "mu1", model)?, r, "mu1")?;
            let mu2 = match (&block.mu2, block.model) {
                (Some(v), _) => read_vector(v, r, "mu2")?,
                (None, ModelName::CovShift) => mu1.clone(),
                (None, _) => return Err(invalid("mean_shift scenario needs `mu2`")),
            };
            let sigma1 = read_matrix(base, required(&block.sigma1, "sigma1", model)?, r, "sigma1")?;
            let sigma2 = match (&block.sigma2, block.model) {
                (Some(v), _) => read_matrix(base, v, r, "sigma2")?,
                (None, ModelName::MeanShift) => sigma1.clone(),
                (None, _) => return Err(invalid("cov_shift scenario needs `sigma2`")),
            };
            let spec = ScenarioSpec::new(mu1, mu2, sigma1, sigma2, priors, sigma0, block.horizon)?;
            let kind = spec.kind();
            let fits = match block.model {
                ModelName::MeanShift => matches!(kind, ModelKind::MeanShift | ModelKind::Identical),
                _ => kind == ModelKind::CovShift,
            };
            if !fits {
                return Err(invalid(format!("scenario parameters do not form a {model} model ({kind:?})")));
            }
            (spec, None)
        }
        ModelName::IdenticalStats => {
            let scalar = |v: &Option<VectorValue>, what: &str| -> Result<f64> {
                match required(v, what, model)? {
                    VectorValue::Scalar(s) => Ok(*s),
                    VectorValue::List(_) => Err(invalid(format!("identical_stats `{what}` is a scalar"))),
                }
            };
            let d = match &block.d {
                Some(v) => read_matrix(base, v, r, "d")?,
                None => DMatrix::identity(r, r),
            };
            let stats = IdenticalStats {
                mu1: scalar(&block.mu1, "mu1")?,
                mu2: scalar(&block.mu2, "mu2")?,
                s1: *required(&block.s1, "s1", model)?,
                s2: *required(&block.s2, "s2", model)?,
                d,
            };
            let base_spec = stats.scenario(n, block.horizon)?;
            let spec = ScenarioSpec::new(
                base_spec.mu1,
                base_spec.mu2,
                base_spec.sigma1,
                base_spec.sigma2,
                priors,
                sigma0,
                block.horizon,
            )?;
            if !matches!(spec.kind(), ModelKind::MeanShift | ModelKind::CovShift | ModelKind::Identical) {
                return Err(invalid(
                    "identical_stats needs sigma_1^2 = sigma_2^2 or mu_1 = mu_2",
                ));
            }
            (spec, Some(stats))
        }
    };
    let detector = match block.detector.as_deref() {
        None => {
            if spec.kind() == ModelKind::CovShift {
                DetectorKind::LdmapCov
            } else {
                DetectorKind::MapMean
            }
        }
        Some("map_mean") => DetectorKind::MapMean,
        Some("ldmap_cov") => DetectorKind::LdmapCov,
        Some("oracle_input") => DetectorKind::OracleInput,
        Some(other) => return Err(invalid(format!("unknown detector `{other}`"))),
    };
    Ok(NamedScenario {
        name: block.name.clone().unwrap_or_else(|| format!("{model}#{}", index + 1)),
        spec,
        sigma_v2: block.sigma_v2,
        detector,
        stats,
    })
}

pub fn parse_criterion(text: &str) -> Result<Criterion> {
    match text {
        "mean" => Ok(Criterion::Mean),
        "cov" | "covariance" => Ok(Criterion::Covariance),
        other => Err(invalid(format!("unknown ranking criterion `{other}`"))),
    }
}

impl Loaded {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: format!("{}: {e}", path.display()),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::resolve(base, cfg)
    }

    pub fn resolve(base: &Path, cfg: RunConfig) -> Result<Self> {
        let model = load_network(base, &cfg.network)?;
        let (n, r) = (model.n(), model.r());
        let scenarios = cfg
            .scenarios
            .iter()
            .enumerate()
            .map(|(k, s)| load_scenario(base, s, k, n, r))
            .collect::<Result<Vec<_>>>()?;
        let partition = match &cfg.partition {
            Some(p) => {
                let set = |s: &Option<String>| parse_node_set(s.as_deref().unwrap_or(""), n);
                Some(Partition {
                    source: set(&p.source)?,
                    cutset: set(&p.cutset)?,
                    partitioned: set(&p.partitioned)?,
                    d: p.d,
                })
            }
            None => None,
        };
        let sensors = cfg
            .sensors
            .iter()
            .map(|s| parse_node_set(s, n))
            .collect::<Result<Vec<_>>>()?;
        let rank = match &cfg.rank {
            Some(b) => RankSpec {
                k: b.k,
                pool: b.pool.as_deref().map(|p| parse_node_set(p, n)).transpose()?,
                d: b.d,
                criterion: b.criterion.as_deref().map(parse_criterion).transpose()?,
            },
            None => RankSpec {
                k: None,
                pool: None,
                d: None,
                criterion: None,
            },
        };
        Ok(Self {
            model,
            toeplitz: cfg.network.toeplitz,
            scenarios,
            partition,
            sensors,
            rank,
            grid: cfg.options.grid,
            trials: cfg.options.trials,
            seed: cfg.options.seed,
            out: cfg.options.out.map(|o| base.join(o)),
        })
    }
}
