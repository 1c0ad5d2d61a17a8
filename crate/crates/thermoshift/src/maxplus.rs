//! Zero-temperature engine: maximizing value by max-mean-cycle, calibrated
//! sub-actions as tropical eigenvectors, the Mane kernel, the critical
//! (Aubry) subgraph, and maximizing-measure data.
//!
//! For a locally constant potential on a finite shift the supremum of
//! integral f over invariant measures is attained on cycle measures of the
//! context graph, so m(f) is the maximum cycle mean and a calibrated
//! sub-action is a max-plus eigenvector of the in-edge Lax operator
//! `V(d) = max over edges c->d of [f(e) + V(c)] - m(f)`.

use crate::context::ContextGraph;
use crate::error::{Result, ShiftError};
use serde::Serialize;

/// Edges with normalized weight below this are treated as lying on the
/// zero level set. Shared with the deviation module; one order above the
/// accumulated 1e-12 arithmetic noise.
pub const R_ZERO_THRESHOLD: f64 = 1e-9;

/// Zero-temperature data of one instance.
#[derive(Debug, Clone, Serialize)]
pub struct MaxPlusSolution {
    /// Maximum cycle mean m(f).
    pub m_f: f64,
    /// Calibrated sub-action per context, normalized so min V = 0.
    pub v: Vec<f64>,
    /// Edges lying on some cycle of mean exactly m(f).
    pub critical_edges: Vec<usize>,
    /// Nodes of the critical edges.
    pub aubry_contexts: Vec<usize>,
    /// Edge-frequency vector of one maximizing measure.
    pub max_measure: Vec<f64>,
    /// True iff the critical subgraph is a single simple cycle, in which case
    /// the maximizing measure is unique.
    pub unique: bool,
}

/// Mane kernel at context resolution: `phi[c][d]` is the supremum over
/// admissible paths c -> d of length >= 1 of the sum of f - m(f); `-inf`
/// when d is unreachable from c.
#[derive(Debug, Clone)]
pub struct ManeKernel {
    phi: Vec<f64>,
    n: usize,
}

impl ManeKernel {
    pub fn get(&self, c: usize, d: usize) -> f64 {
        self.phi[c * self.n + d]
    }

    pub fn node_count(&self) -> usize {
        self.n
    }
}

/// Exact maximum cycle mean via Karp's recurrence with every node as a
/// source, so cycles in every component are seen.
pub fn max_mean_cycle(graph: &ContextGraph) -> f64 {
    let n = graph.node_count();
    // walk[k][v] = max weight of a k-edge walk ending at v (any start).
    let mut walk = vec![vec![0.0f64; n]];
    for k in 1..=n {
        let prev = &walk[k - 1];
        let mut cur = vec![f64::NEG_INFINITY; n];
        for e in graph.edges() {
            let cand = prev[e.src] + e.weight;
            if cand > cur[e.dst] {
                cur[e.dst] = cand;
            }
        }
        walk.push(cur);
    }
    let mut best = f64::NEG_INFINITY;
    for v in 0..n {
        if walk[n][v] == f64::NEG_INFINITY {
            continue;
        }
        let mut worst = f64::INFINITY;
        for (k, row) in walk.iter().enumerate().take(n) {
            if row[v] == f64::NEG_INFINITY {
                continue;
            }
            let ratio = (walk[n][v] - row[v]) / (n - k) as f64;
            if ratio < worst {
                worst = ratio;
            }
        }
        if worst > best {
            best = worst;
        }
    }
    best
}

/// Normalized edge residues `r(e) = m_f + V(dst) - V(src) - f(e)`; the
/// sub-action inequality is `r >= 0`, calibration is `min over in-edges = 0`
/// at every node.
pub fn normalized_residues(graph: &ContextGraph, m_f: f64, v: &[f64]) -> Vec<f64> {
    graph
        .edges()
        .iter()
        .map(|e| m_f + (v[e.dst] - v[e.src]) - e.weight)
        .collect()
}

fn lax_step(graph: &ContextGraph, m_f: f64, v: &[f64]) -> Vec<f64> {
    (0..graph.node_count())
        .map(|d| {
            graph
                .in_edges(d)
                .iter()
                .map(|&e| {
                    let edge = graph.edge(e);
                    edge.weight + v[edge.src]
                })
                .fold(f64::NEG_INFINITY, f64::max)
                - m_f
        })
        .collect()
}

/// Calibrated sub-action by damping-free value iteration of the one-step Lax
/// operator. The orbit of the normalized operator is eventually periodic with
/// the cyclicity of the critical graph; once a period is detected, the
/// pointwise maximum over one period is an eigenvector (the operator is
/// max-plus linear, so it maps the orbit's max to itself). Normalized so
/// min V = 0. `v0` must have one entry per context.
pub fn calibrated_subaction_from(
    graph: &ContextGraph,
    m_f: f64,
    tol: f64,
    v0: &[f64],
) -> Result<Vec<f64>> {
    let n = graph.node_count();
    assert_eq!(v0.len(), n);
    let scale = 1.0
        + graph
            .edges()
            .iter()
            .map(|e| e.weight.abs())
            .fold(m_f.abs(), f64::max);
    let detect_tol = 1e-12 * scale;
    let window = 64usize;
    let cap = n * n + 1000;

    let mut history: Vec<Vec<f64>> = vec![v0.to_vec()];
    let mut residual = f64::INFINITY;
    for _ in 0..cap {
        let next = lax_step(graph, m_f, history.last().unwrap());
        // Compare against the recent orbit for an exact period.
        let t = history.len();
        for gamma in 1..=window.min(t) {
            let cand = &history[t - gamma];
            let close = cand
                .iter()
                .zip(&next)
                .all(|(a, b)| (a - b).abs() <= detect_tol);
            if !close {
                continue;
            }
            // Pointwise max over one period.
            let mut v: Vec<f64> = next.clone();
            for past in &history[t - gamma..] {
                for (vi, pi) in v.iter_mut().zip(past) {
                    *vi = vi.max(*pi);
                }
            }
            let check = lax_step(graph, m_f, &v);
            residual = v
                .iter()
                .zip(&check)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if residual <= tol {
                let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
                if !min.is_finite() {
                    return Err(ShiftError::NoConvergence {
                        iterations: t,
                        residual: f64::INFINITY,
                    });
                }
                for vi in &mut v {
                    *vi -= min;
                }
                return Ok(v);
            }
        }
        history.push(next);
        if history.len() > 2 * window {
            history.drain(..history.len() - 2 * window);
        }
    }
    Err(ShiftError::NoConvergence {
        iterations: cap,
        residual,
    })
}

/// Value iteration from the zero vector.
pub fn calibrated_subaction(graph: &ContextGraph, m_f: f64, tol: f64) -> Result<Vec<f64>> {
    calibrated_subaction_from(graph, m_f, tol, &vec![0.0; graph.node_count()])
}

/// All-pairs max-weight path values under the normalized weights f - m(f).
/// No cycle has positive normalized weight, so Floyd-Warshall relaxation over
/// walks is exact; a positive diagonal therefore signals that `m_f` was not
/// the true maximum.
pub fn mane_kernel(graph: &ContextGraph, m_f: f64) -> Result<ManeKernel> {
    let n = graph.node_count();
    let mut phi = vec![f64::NEG_INFINITY; n * n];
    for e in graph.edges() {
        let cell = &mut phi[e.src * n + e.dst];
        *cell = cell.max(e.weight - m_f);
    }
    for k in 0..n {
        for i in 0..n {
            let ik = phi[i * n + k];
            if ik == f64::NEG_INFINITY {
                continue;
            }
            for j in 0..n {
                let kj = phi[k * n + j];
                if kj == f64::NEG_INFINITY {
                    continue;
                }
                let cand = ik + kj;
                if cand > phi[i * n + j] {
                    phi[i * n + j] = cand;
                }
            }
        }
    }
    for c in 0..n {
        if phi[c * n + c] > R_ZERO_THRESHOLD {
            return Err(ShiftError::PositiveCycleDetected);
        }
    }
    Ok(ManeKernel { phi, n })
}

/// Sub-action reconstructed from the kernel: `V(d) = max over aubry contexts
/// a of phi(a, d)`, the zero-normalization on the Aubry set. With a unique
/// maximizing measure this coincides with any calibrated sub-action up to an
/// additive constant.
pub fn subaction_from_kernel(
    kernel: &ManeKernel,
    aubry_contexts: &[usize],
) -> Vec<f64> {
    let n = kernel.node_count();
    (0..n)
        .map(|d| {
            aubry_contexts
                .iter()
                .map(|&a| kernel.get(a, d))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

/// Kosaraju on an explicit adjacency list; returns a component id per node.
fn scc_ids(n: usize, adj: &[Vec<usize>]) -> Vec<usize> {
    let mut radj = vec![Vec::new(); n];
    for (u, nbrs) in adj.iter().enumerate() {
        for &v in nbrs {
            radj[v].push(u);
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut stack = vec![(s, 0usize)];
        seen[s] = true;
        while let Some(&mut (u, ref mut i)) = stack.last_mut() {
            if *i < adj[u].len() {
                let v = adj[u][*i];
                *i += 1;
                if !seen[v] {
                    seen[v] = true;
                    stack.push((v, 0));
                }
            } else {
                order.push(u);
                stack.pop();
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut id = 0;
    for &root in order.iter().rev() {
        if comp[root] != usize::MAX {
            continue;
        }
        let mut stack = vec![root];
        comp[root] = id;
        while let Some(u) = stack.pop() {
            for &v in &radj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = id;
                    stack.push(v);
                }
            }
        }
        id += 1;
    }
    comp
}

/// Critical subgraph analysis: critical edges, Aubry contexts, one maximizing
/// measure supported on the lexicographically smallest critical cycle, and a
/// conservative uniqueness diagnostic (single nontrivial strongly connected
/// component that is itself one simple cycle).
pub fn aubry_and_measure(
    graph: &ContextGraph,
    m_f: f64,
    v: &[f64],
) -> (Vec<usize>, Vec<usize>, Vec<f64>, bool) {
    let n = graph.node_count();
    let residues = normalized_residues(graph, m_f, v);
    let zero_edges: Vec<usize> = (0..graph.edges().len())
        .filter(|&e| residues[e] <= R_ZERO_THRESHOLD)
        .collect();
    let mut adj = vec![Vec::new(); n];
    for &e in &zero_edges {
        adj[graph.edge(e).src].push(graph.edge(e).dst);
    }
    let comp = scc_ids(n, &adj);
    // A component is cyclic if it has an internal zero-edge (covers both
    // multi-node components and single nodes with a zero self-loop).
    let mut cyclic = std::collections::BTreeSet::new();
    for &e in &zero_edges {
        let (s, d) = (graph.edge(e).src, graph.edge(e).dst);
        if comp[s] == comp[d] {
            cyclic.insert(comp[s]);
        }
    }
    let critical_edges: Vec<usize> = zero_edges
        .iter()
        .copied()
        .filter(|&e| {
            let (s, d) = (graph.edge(e).src, graph.edge(e).dst);
            comp[s] == comp[d] && cyclic.contains(&comp[s])
        })
        .collect();
    let mut aubry: Vec<usize> = critical_edges
        .iter()
        .flat_map(|&e| [graph.edge(e).src, graph.edge(e).dst])
        .collect();
    aubry.sort_unstable();
    aubry.dedup();

    let unique = {
        let comps: std::collections::BTreeSet<usize> =
            critical_edges.iter().map(|&e| comp[graph.edge(e).src]).collect();
        comps.len() == 1 && critical_edges.len() == aubry.len()
    };

    // Maximizing measure: uniform edge frequencies on the critical cycle
    // reached by always taking the smallest critical successor inside the
    // start node's component, starting from the smallest Aubry context.
    let mut measure = vec![0.0; graph.edges().len()];
    if let Some(&start) = aubry.first() {
        let start_comp = comp[start];
        let mut visited_at: Vec<Option<usize>> = vec![None; n];
        let mut path_nodes = vec![start];
        let mut path_edges: Vec<usize> = Vec::new();
        visited_at[start] = Some(0);
        let mut cur = start;
        loop {
            let next_edge = critical_edges
                .iter()
                .copied()
                .filter(|&e| {
                    graph.edge(e).src == cur && comp[graph.edge(e).dst] == start_comp
                })
                .min_by_key(|&e| graph.edge(e).word.clone())
                .expect("critical node keeps a critical successor in its component");
            let nxt = graph.edge(next_edge).dst;
            path_edges.push(next_edge);
            if let Some(first) = visited_at[nxt] {
                let cycle_edges = &path_edges[first..];
                let p = cycle_edges.len() as f64;
                for &e in cycle_edges {
                    measure[e] = 1.0 / p;
                }
                break;
            }
            visited_at[nxt] = Some(path_nodes.len());
            path_nodes.push(nxt);
            cur = nxt;
        }
    }

    (critical_edges, aubry, measure, unique)
}

/// Full zero-temperature solve: m(f), a calibrated sub-action, the critical
/// subgraph, and one maximizing measure.
pub fn solve(graph: &ContextGraph, tol: f64) -> Result<MaxPlusSolution> {
    let m_f = max_mean_cycle(graph);
    let v = calibrated_subaction(graph, m_f, tol)?;
    let (critical_edges, aubry_contexts, max_measure, unique) =
        aubry_and_measure(graph, m_f, &v);
    Ok(MaxPlusSolution {
        m_f,
        v,
        critical_edges,
        aubry_contexts,
        max_measure,
        unique,
    })
}

/// Brute-force maximum over simple cycles; test oracle for Karp's value.
pub fn brute_force_max_cycle_mean(graph: &ContextGraph) -> f64 {
    let n = graph.node_count();
    let mut best = f64::NEG_INFINITY;
    // DFS over simple paths from each smallest-node anchor.
    fn dfs(
        graph: &ContextGraph,
        start: usize,
        cur: usize,
        sum: f64,
        len: usize,
        on_path: &mut Vec<bool>,
        best: &mut f64,
    ) {
        for &e in graph.out_edges(cur) {
            let edge = graph.edge(e);
            if edge.dst == start {
                let mean = (sum + edge.weight) / (len + 1) as f64;
                if mean > *best {
                    *best = mean;
                }
            } else if edge.dst > start && !on_path[edge.dst] {
                on_path[edge.dst] = true;
                dfs(graph, start, edge.dst, sum + edge.weight, len + 1, on_path, best);
                on_path[edge.dst] = false;
            }
        }
    }
    for start in 0..n {
        let mut on_path = vec![false; n];
        on_path[start] = true;
        dfs(graph, start, start, 0.0, 0, &mut on_path, &mut best);
    }
    best
}
