//! Directed weighted interaction networks.
//!
//! Networks are immutable after construction. The adjacency weight
//! `a[i][j] ∈ [0, 1]` is the strength with which agent `i` listens to
//! agent `j`; `neighbor_counts[i]` is the number of nonzero weights in
//! row `i`. The Laplacian has `l_ij = -a_ij` off the diagonal and
//! `l_ii = Σ_j a_ij`, so its row sums are exactly zero.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

/// Hard cap on the agent count accepted from external files.
pub const MAX_AGENTS: usize = 100_000;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("agent count {0} exceeds the supported maximum {MAX_AGENTS}")]
    TooManyAgents(usize),
    #[error("arc ({i}, {j}) is out of range for {n} agents")]
    ArcOutOfRange { i: usize, j: usize, n: usize },
    #[error("invariant violation: self-loop a_{i}{i} must be zero")]
    SelfLoop { i: usize },
    #[error("invariant violation: weight a[{i}][{j}] = {w} outside [0, 1]")]
    WeightOutOfRange { i: usize, j: usize, w: f64 },
    #[error("duplicate arc ({i}, {j})")]
    DuplicateArc { i: usize, j: usize },
    #[error("invariant violation: agent {i} has no neighbors")]
    IsolatedAgent { i: usize },
    #[error("invariant violation: network is not strongly connected")]
    NotStronglyConnected,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("barabasi-albert generator requires n >= m+1 and m >= 1 (got n={n}, m={m})")]
    BadBaParams { n: usize, m: usize },
    #[error("removal fraction {0} outside [0, 1)")]
    BadRemovalFraction(f64),
    #[error("input edge list is not connected")]
    NotConnected,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Immutable directed weighted graph with cached Laplacian structure.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    n: usize,
    /// Out-neighbors per row, sorted by target index: `(j, a_ij)` with `a_ij > 0`.
    out: Vec<Vec<(usize, f64)>>,
    /// `l_ii = Σ_j a_ij` per row.
    row_sums: Vec<f64>,
}

impl Network {
    /// Build a network from explicit arcs, checking the structural
    /// invariants (no self-loops, weights in `[0, 1]`, no duplicates).
    ///
    /// Strong connectivity and the no-isolated-agent rule are *not*
    /// enforced here; see [`Network::validate`].
    pub fn from_arcs(n: usize, arcs: &[(usize, usize, f64)]) -> Result<Self, NetError> {
        if n > MAX_AGENTS {
            return Err(NetError::TooManyAgents(n));
        }
        let mut out: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, w) in arcs {
            if i >= n || j >= n {
                return Err(NetError::ArcOutOfRange { i, j, n });
            }
            if i == j {
                if w != 0.0 {
                    return Err(NetError::SelfLoop { i });
                }
                continue;
            }
            if !(0.0..=1.0).contains(&w) || !w.is_finite() {
                return Err(NetError::WeightOutOfRange { i, j, w });
            }
            if w > 0.0 {
                out[i].push((j, w));
            }
        }
        for (i, row) in out.iter_mut().enumerate() {
            row.sort_unstable_by_key(|&(j, _)| j);
            if row.windows(2).any(|p| p[0].0 == p[1].0) {
                let j = row.windows(2).find(|p| p[0].0 == p[1].0).unwrap()[0].0;
                return Err(NetError::DuplicateArc { i, j });
            }
        }
        let row_sums = out.iter().map(|r| r.iter().map(|&(_, w)| w).sum()).collect();
        Ok(Network { n, out, row_sums })
    }

    /// Check the standing assumptions: every agent has at least one
    /// neighbor and the graph is strongly connected.
    pub fn validate(&self) -> Result<(), NetError> {
        if let Some(i) = self.out.iter().position(|r| r.is_empty()) {
            return Err(NetError::IsolatedAgent { i });
        }
        if !self.is_strongly_connected() {
            return Err(NetError::NotStronglyConnected);
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of arcs with positive weight.
    pub fn arc_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// Number of out-neighbors of agent `i` (the `n_i` of the gain bounds).
    pub fn neighbor_count(&self, i: usize) -> usize {
        self.out[i].len()
    }

    pub fn neighbor_counts(&self) -> Vec<usize> {
        self.out.iter().map(Vec::len).collect()
    }

    /// Out-neighbors of `i` as `(j, a_ij)` pairs sorted by `j`.
    pub fn out_edges(&self, i: usize) -> &[(usize, f64)] {
        &self.out[i]
    }

    /// All arcs in row-major order.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, w)| (i, j, w)))
    }

    /// Dense row-major adjacency matrix.
    pub fn adjacency_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for (i, j, w) in self.arcs() {
            a[i * n + j] = w;
        }
        a
    }

    /// Dense row-major Laplacian.
    pub fn laplacian_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut l = vec![0.0; n * n];
        for (i, j, w) in self.arcs() {
            l[i * n + j] = -w;
        }
        for i in 0..n {
            l[i * n + i] = self.row_sums[i];
        }
        l
    }

    /// Sparse Laplacian product `out = L x`, accumulated as
    /// `Σ_j a_ij (x_i − x_j)` so consensus states map to exact zeros.
    pub fn laplacian_mul(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        for i in 0..self.n {
            let xi = x[i];
            let mut acc = 0.0;
            for &(j, w) in &self.out[i] {
                acc += w * (xi - x[j]);
            }
            out[i] = acc;
        }
    }

    /// True iff every agent can reach every other along directed arcs.
    pub fn is_strongly_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        scc_count(self.n, |i| self.out[i].iter().map(|&(j, _)| j)) == 1
    }
}

/// Number of strongly connected components of the digraph given by an
/// out-neighbor function. Iterative Tarjan.
fn scc_count<I, F>(n: usize, out: F) -> usize
where
    I: Iterator<Item = usize>,
    F: Fn(usize) -> I,
{
    const UNSET: usize = usize::MAX;
    let adj: Vec<Vec<usize>> = (0..n).map(|v| out(v).collect()).collect();
    let mut index = vec![UNSET; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut comps = 0usize;
    let mut frames: Vec<(usize, usize)> = Vec::new(); // (node, neighbor cursor)

    for root in 0..n {
        if index[root] != UNSET {
            continue;
        }
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        frames.push((root, 0));

        while let Some(&mut (v, ref mut cursor)) = frames.last_mut() {
            if *cursor < adj[v].len() {
                let w = adj[v][*cursor];
                *cursor += 1;
                if index[w] == UNSET {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                frames.pop();
                if low[v] == index[v] {
                    comps += 1;
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        if w == v {
                            break;
                        }
                    }
                }
                if let Some(&mut (p, _)) = frames.last_mut() {
                    low[p] = low[p].min(low[v]);
                }
            }
        }
    }
    comps
}

/// Undirected Barabási–Albert preferential-attachment graph.
///
/// Starts from a complete graph on `m + 1` nodes; every further node
/// attaches to `m` distinct existing nodes with probability proportional
/// to their degree. The result is connected and has exactly
/// `m(m+1)/2 + m(n-m-1)` edges.
pub fn generate_ba(n: usize, m: usize, seed: u64) -> Result<Vec<(usize, usize)>, NetError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_ba_with(n, m, &mut rng)
}

/// [`generate_ba`] driven by an external RNG stream.
pub fn generate_ba_with<R: Rng>(n: usize, m: usize, rng: &mut R) -> Result<Vec<(usize, usize)>, NetError> {
    if m < 1 || n < m + 1 {
        return Err(NetError::BadBaParams { n, m });
    }
    if n > MAX_AGENTS {
        return Err(NetError::TooManyAgents(n));
    }
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(m * (m + 1) / 2 + m * (n - m - 1));
    // One entry per endpoint, so sampling an entry is degree-proportional.
    let mut endpoints: Vec<usize> = Vec::new();
    for i in 0..=m {
        for j in 0..i {
            edges.push((j, i));
            endpoints.push(i);
            endpoints.push(j);
        }
    }
    let mut targets: Vec<usize> = Vec::with_capacity(m);
    for v in (m + 1)..n {
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.gen_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t, v));
            endpoints.push(t);
            endpoints.push(v);
        }
    }
    Ok(edges)
}

/// Result of [`directify`]: the network plus how much was actually removed.
#[derive(Debug, Clone)]
pub struct DirectifyOutcome {
    pub network: Network,
    /// Number of arcs removed.
    pub removed: usize,
    /// Number of removals requested (`⌊fraction · arcs⌋`).
    pub requested: usize,
    /// `removed / initial arc count`.
    pub realized_fraction: f64,
}

/// Turn an undirected edge list into a strongly connected directed network.
///
/// Every edge becomes two arcs of weight 1; arcs are then visited in
/// seeded-random order and removed unless the removal would break strong
/// connectivity, until `⌊removal_fraction · arcs⌋` removals succeed or all
/// arcs have been tried. The realized removal fraction may therefore fall
/// short of the requested one.
pub fn directify(
    edges: &[(usize, usize)],
    removal_fraction: f64,
    seed: u64,
) -> Result<DirectifyOutcome, NetError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    directify_with(edges, removal_fraction, &mut rng)
}

/// [`directify`] driven by an external RNG stream.
pub fn directify_with<R: Rng>(
    edges: &[(usize, usize)],
    removal_fraction: f64,
    rng: &mut R,
) -> Result<DirectifyOutcome, NetError> {
    if !(0.0..1.0).contains(&removal_fraction) {
        return Err(NetError::BadRemovalFraction(removal_fraction));
    }
    let n = edges
        .iter()
        .map(|&(a, b)| a.max(b) + 1)
        .max()
        .unwrap_or(0);
    if n == 0 {
        return Err(NetError::NotConnected);
    }
    if n > MAX_AGENTS {
        return Err(NetError::TooManyAgents(n));
    }

    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in edges {
        if a == b {
            return Err(NetError::SelfLoop { i: a });
        }
        adj[a].push(b);
        adj[b].push(a);
    }
    if !undirected_connected(&adj) {
        return Err(NetError::NotConnected);
    }

    let mut arcs: Vec<(usize, usize)> = Vec::with_capacity(2 * edges.len());
    for &(a, b) in edges {
        arcs.push((a, b));
        arcs.push((b, a));
    }
    arcs.sort_unstable();
    arcs.dedup();
    let initial = arcs.len();
    let requested = (removal_fraction * initial as f64).floor() as usize;

    let mut order = arcs.clone();
    order.shuffle(rng);

    let mut present: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(i, j) in &arcs {
        present[i].push(j);
    }
    let mut removed = 0usize;
    for &(i, j) in &order {
        if removed == requested {
            break;
        }
        let pos = present[i].iter().position(|&t| t == j).unwrap();
        present[i].swap_remove(pos);
        if scc_count(n, |v| present[v].iter().copied()) == 1 {
            removed += 1;
        } else {
            present[i].push(j);
        }
    }

    let final_arcs: Vec<(usize, usize, f64)> = present
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().map(move |&j| (i, j, 1.0)))
        .collect();
    let network = Network::from_arcs(n, &final_arcs)?;
    network.validate()?;
    Ok(DirectifyOutcome {
        network,
        removed,
        requested,
        realized_fraction: removed as f64 / initial as f64,
    })
}

fn undirected_connected(adj: &[Vec<usize>]) -> bool {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut todo = vec![0usize];
    seen[0] = true;
    while let Some(v) = todo.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                todo.push(w);
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// Parse a network from the edge-list text format:
/// a header line `n <count>` followed by one `i j w` line per arc.
/// Lines starting with `#` and blank lines are ignored.
///
/// The parsed network must satisfy all invariants, including strong
/// connectivity.
pub fn parse_network(text: &str) -> Result<Network, NetError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or(NetError::Parse {
        line: 1,
        msg: "missing header line `n <count>`".into(),
    })?;
    let mut hp = header.split_whitespace();
    match (hp.next(), hp.next(), hp.next()) {
        (Some("n"), Some(cnt), None) => {
            let n: usize = cnt.parse().map_err(|_| NetError::Parse {
                line: hline,
                msg: format!("invalid agent count `{cnt}`"),
            })?;
            let mut arcs = Vec::new();
            for (lineno, line) in lines {
                let mut parts = line.split_whitespace();
                let (i, j, w) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
                    (Some(i), Some(j), Some(w), None) => (i, j, w),
                    _ => {
                        return Err(NetError::Parse {
                            line: lineno,
                            msg: format!("expected `i j w`, got `{line}`"),
                        })
                    }
                };
                let i: usize = i.parse().map_err(|_| NetError::Parse {
                    line: lineno,
                    msg: format!("invalid index `{i}`"),
                })?;
                let j: usize = j.parse().map_err(|_| NetError::Parse {
                    line: lineno,
                    msg: format!("invalid index `{j}`"),
                })?;
                let w: f64 = w.parse().map_err(|_| NetError::Parse {
                    line: lineno,
                    msg: format!("invalid weight `{w}`"),
                })?;
                arcs.push((i, j, w));
            }
            let net = Network::from_arcs(n, &arcs)?;
            net.validate()?;
            Ok(net)
        }
        _ => Err(NetError::Parse {
            line: hline,
            msg: format!("expected header `n <count>`, got `{header}`"),
        }),
    }
}

/// Serialize a network to the edge-list text format. Weights round-trip
/// bit-exactly through [`parse_network`].
pub fn network_to_string(net: &Network) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "n {}", net.n());
    for (i, j, w) in net.arcs() {
        let _ = writeln!(s, "{i} {j} {w}");
    }
    s
}

pub fn load_network<P: AsRef<Path>>(path: P) -> Result<Network, NetError> {
    parse_network(&std::fs::read_to_string(path)?)
}

pub fn save_network<P: AsRef<Path>>(net: &Network, path: P) -> Result<(), NetError> {
    std::fs::write(path, network_to_string(net))?;
    Ok(())
}
