//! Weighted digraphs, node cutsets and Toeplitz line networks.
//!
//! Influence convention: an entry `g[(i, j)] != 0` means the state of node
//! `j` feeds node `i` at the next step (`x_i[k+1] = sum_j g_ij x_j[k]`), so
//! influence flows `j -> i`. Every path, distance and separator computation
//! in this module follows that direction.

use std::collections::VecDeque;
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Network dynamics `x[k+1] = G x[k] + Pi w[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel<T: Scalar> {
    adjacency: DMatrix<T>,
    inputs: Vec<usize>,
    input_matrix: DMatrix<T>,
}

impl<T: Scalar> NetworkModel<T> {
    /// Wraps a dense adjacency matrix. `inputs` are 0-based node indices.
    pub fn from_matrix(adjacency: DMatrix<T>, inputs: &[usize]) -> Result<Self> {
        if !adjacency.is_square() {
            return Err(Error::Dimension(format!(
                "adjacency must be square, got {:?}",
                adjacency.shape()
            )));
        }
        let n = adjacency.nrows();
        check_node_list(inputs, n)?;
        let mut input_matrix = DMatrix::zeros(n, inputs.len());
        for (col, &k) in inputs.iter().enumerate() {
            input_matrix[(k, col)] = T::one();
        }
        Ok(Self {
            adjacency,
            inputs: inputs.to_vec(),
            input_matrix,
        })
    }

    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }

    /// Number of inputs `r`.
    pub fn r(&self) -> usize {
        self.inputs.len()
    }

    pub fn adjacency(&self) -> &DMatrix<T> {
        &self.adjacency
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    /// Selector `Pi = [e_k1 ... e_kr]`.
    pub fn input_matrix(&self) -> &DMatrix<T> {
        &self.input_matrix
    }

    /// Same inputs, every edge reversed (`G^T`).
    pub fn reversed(&self) -> Self {
        Self {
            adjacency: self.adjacency.transpose(),
            inputs: self.inputs.clone(),
            input_matrix: self.input_matrix.clone(),
        }
    }

    pub fn with_inputs(&self, inputs: &[usize]) -> Result<Self> {
        Self::from_matrix(self.adjacency.clone(), inputs)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.adjacency.iter().all(|&g| g >= T::zero())
    }

    /// Nodes directly influenced by `node`.
    pub fn successors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        let col = self.adjacency.column(node);
        (0..self.n()).filter(move |&i| col[i] != T::zero())
    }

    pub fn spectral_radius(&self) -> T {
        crate::linalg::spectral_radius(&self.adjacency)
    }

    /// True when `G^n` vanishes to working precision.
    pub fn is_nilpotent(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return true;
        }
        let scale = crate::linalg::max_abs(&self.adjacency).max(T::one());
        let mut p = self.adjacency.clone();
        for _ in 1..n {
            p = &p * &self.adjacency;
        }
        crate::linalg::max_abs(&p) <= T::tol(1e-12) * scale.powi(n as i32)
    }
}

pub(crate) fn check_node_list(nodes: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &v in nodes {
        if v >= n {
            return Err(Error::NodeOutOfRange { node: v, n });
        }
        if seen[v] {
            return Err(Error::DuplicateNode(v));
        }
        seen[v] = true;
    }
    Ok(())
}

/// Assembles a dense network from an edge list of `(i, j, g_ij)` triples.
///
/// Indices are 0-based. Duplicate edges, zero weights and out-of-range
/// nodes are rejected.
pub fn build_network<T: Scalar>(
    n: usize,
    edges: &[(usize, usize, T)],
    inputs: &[usize],
) -> Result<NetworkModel<T>> {
    let mut g = DMatrix::zeros(n, n);
    let mut present = vec![false; n * n];
    for &(i, j, w) in edges {
        for node in [i, j] {
            if node >= n {
                return Err(Error::NodeOutOfRange { node, n });
            }
        }
        if present[i * n + j] {
            return Err(Error::DuplicateEdge(i, j));
        }
        if w == T::zero() {
            return Err(Error::ZeroWeight(i, j));
        }
        present[i * n + j] = true;
        g[(i, j)] = w;
    }
    NetworkModel::from_matrix(g, inputs)
}

/// Parses `row col weight` lines with 1-based node labels into 0-based
/// triples. Blank lines and `#` comments are skipped.
pub fn parse_edge_list<T: Scalar>(text: &str) -> Result<Vec<(usize, usize, T)>> {
    let mut edges = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fail = |msg: String| Error::Parse { line: k + 1, msg };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(fail(format!("expected `row col weight`, found {} fields", fields.len())));
        }
        let node = |s: &str| -> Result<usize> {
            match s.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(fail(format!("node label `{s}` is not a positive integer"))),
            }
        };
        let w: f64 = fields[2]
            .parse()
            .map_err(|_| fail(format!("weight `{}` is not a number", fields[2])))?;
        if !w.is_finite() {
            return Err(fail(format!("weight `{}` is not finite", fields[2])));
        }
        edges.push((node(fields[0])?, node(fields[1])?, T::lit(w)));
    }
    Ok(edges)
}

/// Tridiagonal Toeplitz adjacency with diagonal `a`, super-diagonal `b` and
/// sub-diagonal `c`.
pub fn toeplitz_matrix<T: Scalar>(n: usize, a: T, b: T, c: T) -> Result<DMatrix<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("line network needs n >= 1".into()));
    }
    for (name, v) in [("a", a), ("b", b), ("c", c)] {
        if v < T::zero() {
            return Err(Error::InvalidParameter(format!(
                "{name} = {} must be non-negative",
                v.as_f64()
            )));
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            a
        } else if j == i + 1 {
            b
        } else if i == j + 1 {
            c
        } else {
            T::zero()
        }
    }))
}

/// Toeplitz line network with the given input nodes.
pub fn toeplitz_line<T: Scalar>(
    n: usize,
    a: T,
    b: T,
    c: T,
    inputs: &[usize],
) -> Result<NetworkModel<T>> {
    NetworkModel::from_matrix(toeplitz_matrix(n, a, b, c)?, inputs)
}

/// Multi-source BFS along influence edges, skipping `blocked` nodes.
/// Returns hop counts and BFS parents.
fn bfs(
    model_succ: &dyn Fn(usize) -> Vec<usize>,
    n: usize,
    sources: &[usize],
    blocked: &[bool],
) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
    let mut dist = vec![None; n];
    let mut parent = vec![None; n];
    let mut queue = VecDeque::new();
    for &s in sources {
        if !blocked[s] && dist[s].is_none() {
            dist[s] = Some(0);
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap_or(0);
        for v in model_succ(u) {
            if !blocked[v] && dist[v].is_none() {
                dist[v] = Some(du + 1);
                parent[v] = Some(u);
                queue.push_back(v);
            }
        }
    }
    (dist, parent)
}

fn trace_path(parent: &[Option<usize>], end: usize) -> Vec<usize> {
    let mut path = vec![end];
    let mut cur = end;
    while let Some(p) = parent[cur] {
        path.push(p);
        cur = p;
    }
    path.reverse();
    path
}

fn successor_fn<T: Scalar>(model: &NetworkModel<T>) -> impl Fn(usize) -> Vec<usize> + '_ {
    move |u| model.successors(u).collect()
}

/// Shortest influence-path length from any node of `a` to any node of `b`;
/// `None` when no path exists.
pub fn distance<T: Scalar>(model: &NetworkModel<T>, a: &[usize], b: &[usize]) -> Result<Option<usize>> {
    if a.is_empty() {
        return Err(Error::EmptySet("distance source set"));
    }
    if b.is_empty() {
        return Err(Error::EmptySet("distance target set"));
    }
    let n = model.n();
    for &v in a.iter().chain(b) {
        if v >= n {
            return Err(Error::NodeOutOfRange { node: v, n });
        }
    }
    let succ = successor_fn(model);
    let (dist, _) = bfs(&succ, n, a, &vec![false; n]);
    Ok(b.iter().filter_map(|&j| dist[j]).min())
}

/// Named condition of a node cutset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutsetCondition {
    SourceNonEmpty,
    CutsetNonEmpty,
    PartitionedNonEmpty,
    PositiveDistance,
    Disjoint,
    CoversAllNodes,
    InputsInSource,
    MinimumDistance,
    Separation,
    ZeroBlocks,
}

impl fmt::Display for CutsetCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::SourceNonEmpty => "S non-empty",
            Self::CutsetNonEmpty => "C_d non-empty",
            Self::PartitionedNonEmpty => "P non-empty",
            Self::PositiveDistance => "d positive",
            Self::Disjoint => "S, C_d, P disjoint",
            Self::CoversAllNodes => "S, C_d, P cover V",
            Self::InputsInSource => "K subset of S",
            Self::MinimumDistance => "dist(K, C_d) >= d",
            Self::Separation => "every path from S to P meets C_d",
            Self::ZeroBlocks => "G_sp = 0 and G_ps = 0",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutsetViolation {
    pub condition: CutsetCondition,
    pub detail: String,
    /// Offending influence path (0-based nodes), when one exists.
    pub witness: Option<Vec<usize>>,
}

/// Every violated cutset condition.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct CutsetError {
    pub violations: Vec<CutsetViolation>,
}

impl CutsetError {
    pub fn violates(&self, condition: CutsetCondition) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }
}

impl fmt::Display for CutsetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "not a node cutset:")?;
        for v in &self.violations {
            write!(f, " [{}] {}", v.condition, v.detail)?;
            if let Some(path) = &v.witness {
                let labels: Vec<String> = path.iter().map(|k| (k + 1).to_string()).collect();
                write!(f, " (path {})", labels.join(" -> "))?;
            }
            write!(f, ";")?;
        }
        Ok(())
    }
}

/// Sub-blocks of `M^{-1} G M` for the ordering `(S, C_d, P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionBlocks<T: Scalar> {
    pub ss: DMatrix<T>,
    pub sc: DMatrix<T>,
    pub cs: DMatrix<T>,
    pub cc: DMatrix<T>,
    pub cp: DMatrix<T>,
    pub pc: DMatrix<T>,
    pub pp: DMatrix<T>,
}

/// A verified node cutset together with its block decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct CutsetPartition<T: Scalar> {
    pub source: Vec<usize>,
    pub cutset: Vec<usize>,
    pub partitioned: Vec<usize>,
    pub d: usize,
    pub blocks: PartitionBlocks<T>,
    /// `M^{-1} G M` with rows/columns ordered `S, C_d, P`.
    pub permuted: DMatrix<T>,
}

impl<T: Scalar> CutsetPartition<T> {
    /// `[G_pp  G_pc]`.
    pub fn gtilde(&self) -> DMatrix<T> {
        let m1 = self.partitioned.len();
        let n1 = self.cutset.len();
        let mut out = DMatrix::zeros(m1, m1 + n1);
        out.view_mut((0, 0), (m1, m1)).copy_from(&self.blocks.pp);
        out.view_mut((0, m1), (m1, n1)).copy_from(&self.blocks.pc);
        out
    }

    /// Node order `S, C_d, P` defining the permutation `M`.
    pub fn order(&self) -> Vec<usize> {
        self.source
            .iter()
            .chain(&self.cutset)
            .chain(&self.partitioned)
            .copied()
            .collect()
    }
}

fn sub_block<T: Scalar>(g: &DMatrix<T>, rows: &[usize], cols: &[usize]) -> DMatrix<T> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| g[(rows[i], cols[j])])
}

/// Checks the node-cutset conditions for `(S, C_d, P)` and returns the
/// block decomposition on success.
pub fn verify_cutset<T: Scalar>(
    model: &NetworkModel<T>,
    source: &[usize],
    cutset: &[usize],
    partitioned: &[usize],
    d: usize,
) -> std::result::Result<CutsetPartition<T>, CutsetError> {
    let n = model.n();
    let mut violations = Vec::new();
    let mut push = |condition, detail: String, witness| {
        violations.push(CutsetViolation {
            condition,
            detail,
            witness,
        })
    };

    for (set, cond) in [
        (source, CutsetCondition::SourceNonEmpty),
        (cutset, CutsetCondition::CutsetNonEmpty),
        (partitioned, CutsetCondition::PartitionedNonEmpty),
    ] {
        if set.is_empty() {
            push(cond, "set is empty".into(), None);
        }
    }
    if d == 0 {
        push(CutsetCondition::PositiveDistance, "d = 0".into(), None);
    }

    // 0 = unassigned, 1 = S, 2 = C, 3 = P
    let mut label = vec![0u8; n];
    let mut overlap = Vec::new();
    for (set, tag) in [(source, 1u8), (cutset, 2), (partitioned, 3)] {
        for &v in set {
            if v >= n {
                push(
                    CutsetCondition::CoversAllNodes,
                    format!("node #{} out of range", v + 1),
                    None,
                );
                continue;
            }
            if label[v] != 0 {
                overlap.push(v);
            }
            label[v] = tag;
        }
    }
    if !overlap.is_empty() {
        let labels: Vec<String> = overlap.iter().map(|v| format!("#{}", v + 1)).collect();
        push(
            CutsetCondition::Disjoint,
            format!("nodes in more than one set: {}", labels.join(", ")),
            None,
        );
    }
    let missing: Vec<String> = (0..n)
        .filter(|&v| label[v] == 0)
        .map(|v| format!("#{}", v + 1))
        .collect();
    if !missing.is_empty() {
        push(
            CutsetCondition::CoversAllNodes,
            format!("nodes in no set: {}", missing.join(", ")),
            None,
        );
    }
    let stray: Vec<String> = model
        .inputs()
        .iter()
        .filter(|&&k| label[k] != 1)
        .map(|k| format!("#{}", k + 1))
        .collect();
    if !stray.is_empty() {
        push(
            CutsetCondition::InputsInSource,
            format!("input nodes outside S: {}", stray.join(", ")),
            None,
        );
    }

    let succ = successor_fn(model);
    let in_range = |set: &[usize]| set.iter().copied().filter(|&v| v < n).collect::<Vec<_>>();
    let (source_r, cutset_r, part_r) = (in_range(source), in_range(cutset), in_range(partitioned));

    if !model.inputs().is_empty() && !cutset_r.is_empty() && d > 0 {
        let (dist, parent) = bfs(&succ, n, model.inputs(), &vec![false; n]);
        let closest = cutset_r
            .iter()
            .filter_map(|&c| dist[c].map(|h| (h, c)))
            .min();
        if let Some((hops, node)) = closest {
            if hops < d {
                push(
                    CutsetCondition::MinimumDistance,
                    format!("dist(K, C_d) = {hops} < {d}"),
                    Some(trace_path(&parent, node)),
                );
            }
        }
    }

    if !source_r.is_empty() && !part_r.is_empty() {
        let mut blocked = vec![false; n];
        for &c in &cutset_r {
            blocked[c] = true;
        }
        let (dist, parent) = bfs(&succ, n, &source_r, &blocked);
        if let Some(&hit) = part_r.iter().find(|&&p| dist[p].is_some()) {
            push(
                CutsetCondition::Separation,
                format!("node #{} reachable from S avoiding C_d", hit + 1),
                Some(trace_path(&parent, hit)),
            );
        }
    }

    let g = model.adjacency();
    let mut direct = Vec::new();
    for &s in &source_r {
        for &p in &part_r {
            if g[(s, p)] != T::zero() {
                direct.push((p, s));
            }
            if g[(p, s)] != T::zero() && direct.iter().all(|&e| e != (s, p)) {
                direct.push((s, p));
            }
        }
    }
    if let Some(&(from, to)) = direct.first() {
        push(
            CutsetCondition::ZeroBlocks,
            format!(
                "{} direct edge(s) between S and P, e.g. #{} -> #{}",
                direct.len(),
                from + 1,
                to + 1
            ),
            Some(vec![from, to]),
        );
    }

    if !violations.is_empty() {
        return Err(CutsetError { violations });
    }

    let mut s_sorted = source.to_vec();
    let mut c_sorted = cutset.to_vec();
    let mut p_sorted = partitioned.to_vec();
    s_sorted.sort_unstable();
    c_sorted.sort_unstable();
    p_sorted.sort_unstable();

    let order: Vec<usize> = s_sorted
        .iter()
        .chain(&c_sorted)
        .chain(&p_sorted)
        .copied()
        .collect();
    let permuted = sub_block(g, &order, &order);
    let blocks = PartitionBlocks {
        ss: sub_block(g, &s_sorted, &s_sorted),
        sc: sub_block(g, &s_sorted, &c_sorted),
        cs: sub_block(g, &c_sorted, &s_sorted),
        cc: sub_block(g, &c_sorted, &c_sorted),
        cp: sub_block(g, &c_sorted, &p_sorted),
        pc: sub_block(g, &p_sorted, &c_sorted),
        pp: sub_block(g, &p_sorted, &p_sorted),
    };
    let (ns, nc) = (s_sorted.len(), c_sorted.len());
    let np = p_sorted.len();
    debug_assert!(permuted.view((0, ns + nc), (ns, np)).iter().all(|&x| x == T::zero()));
    debug_assert!(permuted.view((ns + nc, 0), (np, ns)).iter().all(|&x| x == T::zero()));

    Ok(CutsetPartition {
        source: s_sorted,
        cutset: c_sorted,
        partitioned: p_sorted,
        d,
        blocks,
        permuted,
    })
}
