//! Finite-dimensional reduction of (Sigma_A, sigma, f) for locally constant
//! potentials.
//!
//! A context is an admissible word of length max(range - 1, 1); eigenvectors
//! of the transfer operator and sub-actions depend on exactly these
//! coordinates. One application of the shift moves context x_0..x_{l-1} to
//! x_1..x_l, so transitions are labelled by admissible words of length l + 1,
//! and the potential evaluates on an edge through the first `range` symbols
//! of its word.

use crate::potential::Potential;
use crate::shift::MarkovShift;
use std::collections::BTreeMap;

/// One admissible transition between contexts.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextEdge {
    pub src: usize,
    pub dst: usize,
    /// The (l+1)-word labelling the transition; its l-prefix is the source
    /// context, its l-suffix the target context.
    pub word: Vec<u32>,
    /// f evaluated on the first `range` symbols of `word`.
    pub weight: f64,
}

/// Context set and admissible transitions of an instance, with the potential
/// baked into edge weights. Contexts and edges are in lexicographic order so
/// every downstream computation is reproducible.
#[derive(Debug, Clone)]
pub struct ContextGraph {
    contexts: Vec<Vec<u32>>,
    index: BTreeMap<Vec<u32>, usize>,
    edges: Vec<ContextEdge>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
    context_len: usize,
    range: u32,
}

impl ContextGraph {
    pub fn new(shift: &MarkovShift, potential: &Potential) -> Self {
        let range = potential.range();
        let l = (range as usize).saturating_sub(1).max(1);
        let contexts: Vec<Vec<u32>> = shift.enumerate_words(l).collect();
        let index: BTreeMap<Vec<u32>, usize> = contexts
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, w)| (w, i))
            .collect();
        let mut edges = Vec::new();
        let mut out_edges = vec![Vec::new(); contexts.len()];
        let mut in_edges = vec![Vec::new(); contexts.len()];
        for word in shift.enumerate_words(l + 1) {
            let src = index[&word[..l]];
            let dst = index[&word[1..]];
            let weight = potential
                .eval(&word)
                .expect("edge word admissible and long enough");
            let id = edges.len();
            edges.push(ContextEdge {
                src,
                dst,
                word,
                weight,
            });
            out_edges[src].push(id);
            in_edges[dst].push(id);
        }
        Self {
            contexts,
            index,
            edges,
            out_edges,
            in_edges,
            context_len: l,
            range,
        }
    }

    pub fn context_len(&self) -> usize {
        self.context_len
    }

    pub fn range(&self) -> u32 {
        self.range
    }

    pub fn node_count(&self) -> usize {
        self.contexts.len()
    }

    pub fn contexts(&self) -> &[Vec<u32>] {
        &self.contexts
    }

    pub fn context_word(&self, id: usize) -> &[u32] {
        &self.contexts[id]
    }

    pub fn context_id(&self, word: &[u32]) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn edges(&self) -> &[ContextEdge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &ContextEdge {
        &self.edges[id]
    }

    pub fn out_edges(&self, node: usize) -> &[usize] {
        &self.out_edges[node]
    }

    pub fn in_edges(&self, node: usize) -> &[usize] {
        &self.in_edges[node]
    }

    /// The unique edge from `src` to `dst`, if admissible. (Contexts overlap
    /// on l-1 symbols, so an ordered pair determines at most one edge word.)
    pub fn edge_between(&self, src: usize, dst: usize) -> Option<usize> {
        self.out_edges[src]
            .iter()
            .copied()
            .find(|&e| self.edges[e].dst == dst)
    }

    /// Edge id of the transition labelled by `word[0..=l]`, if admissible.
    pub fn edge_of_window(&self, window: &[u32]) -> Option<usize> {
        let l = self.context_len;
        debug_assert!(window.len() == l + 1);
        let src = self.context_id(&window[..l])?;
        self.out_edges[src]
            .iter()
            .copied()
            .find(|&e| self.edges[e].word == window)
    }

    /// Context ids along an admissible word of length >= l, one per window,
    /// or None if the word is shorter or leaves the graph.
    pub fn context_path(&self, word: &[u32]) -> Option<Vec<usize>> {
        let l = self.context_len;
        if word.len() < l {
            return None;
        }
        (0..=word.len() - l)
            .map(|j| self.context_id(&word[j..j + l]))
            .collect()
    }

    /// Edge ids along an admissible word, one per (l+1)-window.
    pub fn edge_path(&self, word: &[u32]) -> Option<Vec<usize>> {
        let l = self.context_len;
        if word.len() < l + 1 {
            return Some(Vec::new());
        }
        (0..word.len() - l)
            .map(|j| self.edge_of_window(&word[j..j + l + 1]))
            .collect()
    }

    /// All contexts whose word starts with `prefix` (for cylinders shorter
    /// than the context length); the context's own refinements otherwise.
    pub fn contexts_extending(&self, prefix: &[u32]) -> Vec<usize> {
        if prefix.len() >= self.context_len {
            return self
                .context_id(&prefix[..self.context_len])
                .into_iter()
                .collect();
        }
        self.contexts
            .iter()
            .enumerate()
            .filter(|(_, w)| w.starts_with(prefix))
            .map(|(i, _)| i)
            .collect()
    }
}
