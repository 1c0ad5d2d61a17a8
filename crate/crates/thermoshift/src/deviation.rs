//! The deviation function I of the zero-temperature large deviation
//! principle, evaluated on eventually periodic points and minimized over
//! cylinders.
//!
//! With a calibrated sub-action V, the one-step rate is
//! `R_+ = -f - V + V o sigma + m(f) >= 0`, which at context resolution is the
//! normalized edge residue r(e); `I(x)` is the sum of r along the orbit.

use crate::context::ContextGraph;
use crate::error::{Result, ShiftError};
use crate::maxplus::{self, ManeKernel, R_ZERO_THRESHOLD};
use serde::Serialize;
use std::collections::BinaryHeap;

/// Per-edge rate weights `r(e) = m_f + V(dst) - V(src) - f(e)`, validated
/// against the sub-action inequality and clamped to be exactly nonnegative.
#[derive(Debug, Clone)]
pub struct RPlusWeights {
    r: Vec<f64>,
    m_f: f64,
}

impl RPlusWeights {
    pub fn new(graph: &ContextGraph, m_f: f64, v: &[f64]) -> Result<Self> {
        let raw = maxplus::normalized_residues(graph, m_f, v);
        let mut r = Vec::with_capacity(raw.len());
        for (edge, &ri) in raw.iter().enumerate() {
            if ri < -1e-12 {
                return Err(ShiftError::SubActionViolated { edge, r: ri });
            }
            r.push(ri.max(0.0));
        }
        Ok(Self { r, m_f })
    }

    pub fn m_f(&self) -> f64 {
        self.m_f
    }

    /// R_+ on one context transition.
    pub fn r_plus(&self, edge: usize) -> f64 {
        self.r[edge]
    }

    pub fn all(&self) -> &[f64] {
        &self.r
    }

    /// Sum of r over the consecutive context transitions of `word`
    /// (the partial sum `R_+^n` along the cylinder's forced prefix).
    pub fn i_prefix(&self, graph: &ContextGraph, word: &[u32]) -> Result<f64> {
        if word.len() < graph.context_len() {
            return Err(ShiftError::WordTooShort {
                len: word.len(),
                need: graph.context_len(),
            });
        }
        let edges = graph
            .edge_path(word)
            .ok_or_else(|| ShiftError::InadmissibleWord(word.to_vec()))?;
        Ok(edges.into_iter().map(|e| self.r[e]).sum())
    }

    /// I on the eventually periodic point `pre . cycle^inf`: finite iff every
    /// transition of the periodic tail has r = 0 (within the shared
    /// threshold), in which case only the pre-periodic and connecting
    /// transitions contribute.
    pub fn i_of_eventually_periodic(
        &self,
        graph: &ContextGraph,
        pre: &[u32],
        cycle: &[u32],
    ) -> Result<Deviation> {
        if cycle.is_empty() {
            return Err(ShiftError::WordTooShort { len: 0, need: 1 });
        }
        // Expand far enough that every distinct transition appears: the
        // transient ones live in pre plus one period, the periodic ones
        // repeat with the cycle length afterwards.
        let l = graph.context_len();
        let mut expanded = pre.to_vec();
        while expanded.len() < pre.len() + 2 * cycle.len() + l + 1 {
            expanded.extend_from_slice(cycle);
        }
        let edges = graph
            .edge_path(&expanded)
            .ok_or_else(|| ShiftError::InadmissibleWord(expanded.clone()))?;
        let transient = pre.len();
        let mut total = 0.0;
        for (j, e) in edges.iter().enumerate() {
            if j < transient {
                total += self.r[*e];
            } else if j < transient + cycle.len() {
                if self.r[*e] > R_ZERO_THRESHOLD {
                    return Ok(Deviation::Infinite);
                }
                total += self.r[*e];
            }
        }
        Ok(Deviation::Finite(total))
    }
}

/// I-values live in [0, +inf]; the infinite case is an explicit variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Deviation {
    Finite(f64),
    Infinite,
}

impl Deviation {
    pub fn finite(self) -> Option<f64> {
        match self {
            Deviation::Finite(x) => Some(x),
            Deviation::Infinite => None,
        }
    }
}

/// Distance from every context to the Aubry set under the rate weights,
/// with one outgoing step recorded for witness reconstruction.
#[derive(Debug, Clone)]
pub struct AubryDistances {
    dist: Vec<f64>,
    /// Next edge on a minimizing path toward the Aubry set; None on the set
    /// itself or off any finite-cost route.
    next_hop: Vec<Option<usize>>,
}

impl AubryDistances {
    /// Multi-source Dijkstra on the reversed graph, sources the Aubry
    /// contexts at distance zero. Weights are nonnegative by the sub-action
    /// inequality. Deterministic: the heap orders by (distance, node) and
    /// equal-distance relaxations never replace an earlier hop.
    pub fn new(graph: &ContextGraph, weights: &RPlusWeights, aubry: &[usize]) -> Self {
        let n = graph.node_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut next_hop: Vec<Option<usize>> = vec![None; n];
        let mut heap: BinaryHeap<std::cmp::Reverse<(OrdF64, usize)>> = BinaryHeap::new();
        for &a in aubry {
            dist[a] = 0.0;
            heap.push(std::cmp::Reverse((OrdF64(0.0), a)));
        }
        let mut settled = vec![false; n];
        while let Some(std::cmp::Reverse((OrdF64(d), node))) = heap.pop() {
            if settled[node] {
                continue;
            }
            settled[node] = true;
            for &e in graph.in_edges(node) {
                let edge = graph.edge(e);
                let cand = d + weights.r_plus(e);
                if cand < dist[edge.src] {
                    dist[edge.src] = cand;
                    next_hop[edge.src] = Some(e);
                    heap.push(std::cmp::Reverse((OrdF64(cand), edge.src)));
                }
            }
        }
        Self { dist, next_hop }
    }

    pub fn dist(&self, context: usize) -> f64 {
        self.dist[context]
    }

    /// Context path from `start` to the Aubry set along recorded hops.
    pub fn witness_path(&self, graph: &ContextGraph, start: usize) -> Vec<usize> {
        let mut path = vec![start];
        let mut cur = start;
        while let Some(e) = self.next_hop[cur] {
            cur = graph.edge(e).dst;
            path.push(cur);
        }
        path
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Infimum of I over one cylinder, with the witness continuation.
#[derive(Debug, Clone, Serialize)]
pub struct DeviationResult {
    pub word: Vec<u32>,
    pub inf_i: Deviation,
    /// Minimizing continuation to the Aubry set, as context ids.
    pub witness: Vec<usize>,
    pub prefix_cost: f64,
}

/// inf over [word] of I.
///
/// The reduction is exact: any x in the cylinder with finite I has all but
/// finitely many orbit steps at r = 0, and on a finite graph that forces the
/// tail into a zero-r cycle, i.e. into the critical subgraph whose nodes are
/// the Aubry contexts; the cost of x is then (prefix sum over the forced
/// transitions) + (cost of its free continuation to the Aubry set), which is
/// at least prefix + shortest-path distance. Conversely the shortest path
/// extends to a point of the cylinder realizing exactly that value, by
/// following the path and then circulating on the critical cycle forever.
/// Words shorter than a context force no transition at all, so the infimum
/// is over every context refining them.
pub fn inf_deviation_on_cylinder(
    graph: &ContextGraph,
    weights: &RPlusWeights,
    aubry_dist: &AubryDistances,
    word: &[u32],
) -> DeviationResult {
    let l = graph.context_len();
    if word.len() < l {
        let mut best: Option<(f64, usize)> = None;
        for c in graph.contexts_extending(word) {
            let d = aubry_dist.dist(c);
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, c));
            }
        }
        return match best {
            Some((d, c)) if d.is_finite() => DeviationResult {
                word: word.to_vec(),
                inf_i: Deviation::Finite(d),
                witness: aubry_dist.witness_path(graph, c),
                prefix_cost: 0.0,
            },
            _ => DeviationResult {
                word: word.to_vec(),
                inf_i: Deviation::Infinite,
                witness: Vec::new(),
                prefix_cost: 0.0,
            },
        };
    }
    let (Some(ctxs), Ok(prefix_cost)) = (
        graph.context_path(word),
        weights.i_prefix(graph, word),
    ) else {
        return DeviationResult {
            word: word.to_vec(),
            inf_i: Deviation::Infinite,
            witness: Vec::new(),
            prefix_cost: 0.0,
        };
    };
    let last = *ctxs.last().unwrap();
    let d = aubry_dist.dist(last);
    if !d.is_finite() {
        return DeviationResult {
            word: word.to_vec(),
            inf_i: Deviation::Infinite,
            witness: Vec::new(),
            prefix_cost,
        };
    }
    DeviationResult {
        word: word.to_vec(),
        inf_i: Deviation::Finite(prefix_cost + d),
        witness: aubry_dist.witness_path(graph, last),
        prefix_cost,
    }
}

/// Report of the zero-level-set audit over periodic context cycles.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroLevelReport {
    /// True when the uniqueness hypothesis fails and the check was skipped.
    pub skipped: bool,
    pub cycles_checked: usize,
    pub violations: Vec<String>,
}

impl ZeroLevelReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exhaustive audit of the zero level set on cycles of period <= max_period:
/// a cycle has mean m(f) iff all its transitions have r = 0, critical cycles
/// lie inside the kernel's zero-diagonal set, and (when the scan covers every
/// simple cycle) the Aubry contexts are exactly the kernel-zero contexts.
/// Requires a unique maximizing measure; otherwise reports skipped.
pub fn zero_level_check(
    graph: &ContextGraph,
    weights: &RPlusWeights,
    kernel: &ManeKernel,
    aubry_contexts: &[usize],
    unique: bool,
    max_period: usize,
) -> ZeroLevelReport {
    if !unique {
        return ZeroLevelReport {
            skipped: true,
            cycles_checked: 0,
            violations: Vec::new(),
        };
    }
    let mut violations = Vec::new();
    let cycles = enumerate_context_cycles(graph, max_period);
    let mut critical_nodes: std::collections::BTreeSet<usize> =
        std::collections::BTreeSet::new();
    for cyc in &cycles {
        let p = cyc.len();
        let mut sum_f = 0.0;
        let mut all_zero = true;
        for j in 0..p {
            let e = graph
                .edge_between(cyc[j], cyc[(j + 1) % p])
                .expect("cycle edges exist");
            sum_f += graph.edge(e).weight;
            if weights.r_plus(e) > R_ZERO_THRESHOLD {
                all_zero = false;
            }
        }
        let mean_is_max = (sum_f / p as f64 - weights.m_f()).abs() <= R_ZERO_THRESHOLD;
        if mean_is_max != all_zero {
            violations.push(format!(
                "cycle {cyc:?}: mean-at-maximum = {mean_is_max} but zero-rate = {all_zero}"
            ));
        }
        if all_zero {
            for &c in cyc {
                critical_nodes.insert(c);
                if kernel.get(c, c).abs() > R_ZERO_THRESHOLD {
                    violations.push(format!(
                        "critical cycle {cyc:?}: context {c} has phi(c,c) = {}",
                        kernel.get(c, c)
                    ));
                }
            }
        }
    }
    // With every simple cycle scanned, the contexts found on critical cycles
    // must agree with both the kernel diagnostic and the SCC analysis.
    if max_period >= graph.node_count() {
        let kernel_zero: std::collections::BTreeSet<usize> = (0..graph.node_count())
            .filter(|&c| kernel.get(c, c).abs() <= R_ZERO_THRESHOLD)
            .collect();
        let aubry: std::collections::BTreeSet<usize> =
            aubry_contexts.iter().copied().collect();
        if critical_nodes != kernel_zero || critical_nodes != aubry {
            violations.push(format!(
                "zero level mismatch: cycles {critical_nodes:?}, kernel {kernel_zero:?}, aubry {aubry:?}"
            ));
        }
    }
    ZeroLevelReport {
        skipped: false,
        cycles_checked: cycles.len(),
        violations,
    }
}

/// Simple cycles of the context graph up to `max_len`, as node sequences
/// starting at their smallest node, lexicographic.
pub fn enumerate_context_cycles(graph: &ContextGraph, max_len: usize) -> Vec<Vec<usize>> {
    let n = graph.node_count();
    let mut out = Vec::new();
    fn dfs(
        graph: &ContextGraph,
        start: usize,
        cur: usize,
        max_len: usize,
        path: &mut Vec<usize>,
        on_path: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        for &e in graph.out_edges(cur) {
            let nxt = graph.edge(e).dst;
            if nxt == start {
                out.push(path.clone());
            } else if nxt > start && !on_path[nxt] && path.len() < max_len {
                path.push(nxt);
                on_path[nxt] = true;
                dfs(graph, start, nxt, max_len, path, on_path, out);
                on_path[nxt] = false;
                path.pop();
            }
        }
    }
    for start in 0..n {
        let mut on_path = vec![false; n];
        let mut path = vec![start];
        on_path[start] = true;
        dfs(graph, start, start, max_len, &mut path, &mut on_path, &mut out);
    }
    out
}
