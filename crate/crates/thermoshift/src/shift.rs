//! Symbolic space: alphabet, transition structure, words, cylinders, and the
//! structural hypotheses (irreducibility, topological mixing, finite
//! primitivity / BIP).
//!
//! The countable shift is always handled through a finite truncation chosen
//! upstream; this module is purely finite. All values are immutable after
//! construction and safe to share across threads.

use crate::error::{Result, ShiftError};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// A finite Markov shift: symbols `0..alphabet_size` and a boolean transition
/// table. Entry `(a, b)` is true iff the word `ab` is admissible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovShift {
    alphabet_size: u32,
    /// Row-major `alphabet_size x alphabet_size` table.
    adjacency: Vec<bool>,
    metric_base: f64,
}

/// Finite primitivity (BIP) witness: every admissible pair of symbols is
/// connected by a word of exactly `k0` intermediate symbols, all drawn from
/// the finite subalphabet `f`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimitivityWitness {
    pub k0: u32,
    /// Subalphabet; here always the full truncated alphabet.
    pub f: Vec<u32>,
}

impl MarkovShift {
    /// Build a shift from a square boolean table. Rejects tables in which some
    /// symbol has no out-edge or no in-edge, since such symbols carry no
    /// bi-infinite admissible extension.
    pub fn new(adjacency: Vec<Vec<bool>>, metric_base: f64) -> Result<Self> {
        let n = adjacency.len();
        if n == 0 {
            return Err(ShiftError::NoEdges);
        }
        for (row, r) in adjacency.iter().enumerate() {
            if r.len() != n {
                return Err(ShiftError::NonSquare {
                    row,
                    len: r.len(),
                    expected: n,
                });
            }
        }
        if !(metric_base > 0.0 && metric_base < 1.0) {
            return Err(ShiftError::BadMetricBase(metric_base));
        }
        if !adjacency.iter().flatten().any(|&b| b) {
            return Err(ShiftError::NoEdges);
        }
        for a in 0..n {
            if !adjacency[a].iter().any(|&b| b) {
                return Err(ShiftError::EmptyRowOrColumn {
                    symbol: a as u32,
                    out: true,
                });
            }
            if !adjacency.iter().any(|row| row[a]) {
                return Err(ShiftError::EmptyRowOrColumn {
                    symbol: a as u32,
                    out: false,
                });
            }
        }
        let flat = adjacency.into_iter().flatten().collect();
        Ok(Self {
            alphabet_size: n as u32,
            adjacency: flat,
            metric_base,
        })
    }

    /// Full shift on `n` symbols.
    pub fn full(n: u32) -> Result<Self> {
        Self::new(vec![vec![true; n as usize]; n as usize], 0.5)
    }

    pub fn alphabet_size(&self) -> u32 {
        self.alphabet_size
    }

    pub fn metric_base(&self) -> f64 {
        self.metric_base
    }

    /// Is the one-step transition `a -> b` admissible?
    pub fn admissible_pair(&self, a: u32, b: u32) -> bool {
        let n = self.alphabet_size as usize;
        a < self.alphabet_size
            && b < self.alphabet_size
            && self.adjacency[a as usize * n + b as usize]
    }

    /// Is every consecutive pair of `symbols` admissible? The empty word and
    /// single symbols (in range) are admissible.
    pub fn admissible_word(&self, symbols: &[u32]) -> bool {
        if symbols.iter().any(|&s| s >= self.alphabet_size) {
            return false;
        }
        symbols.windows(2).all(|p| self.admissible_pair(p[0], p[1]))
    }

    /// Successors of a symbol, ascending.
    pub fn successors(&self, a: u32) -> impl Iterator<Item = u32> + '_ {
        (0..self.alphabet_size).filter(move |&b| self.admissible_pair(a, b))
    }

    /// Predecessors of a symbol, ascending.
    pub fn predecessors(&self, b: u32) -> impl Iterator<Item = u32> + '_ {
        (0..self.alphabet_size).filter(move |&a| self.admissible_pair(a, b))
    }

    /// One strongly connected component covering every symbol?
    pub fn is_irreducible(&self) -> bool {
        let sccs = self.strongly_connected_components();
        sccs.len() == 1
    }

    /// gcd of the lengths of all cycles. Computed per strongly connected
    /// component from BFS level differences, then combined across components.
    pub fn period(&self) -> u64 {
        let mut g: u64 = 0;
        for scc in self.strongly_connected_components() {
            if let Some(p) = self.component_period(&scc) {
                g = gcd(g, p);
            }
        }
        // A valid shift always contains a cycle, so g > 0 here.
        g.max(1)
    }

    /// Irreducible with period one.
    pub fn is_topologically_mixing(&self) -> bool {
        self.is_irreducible() && self.period() == 1
    }

    /// Smallest `k0 <= n^2` such that every pair of symbols is connected by an
    /// admissible word of exactly `k0` intermediate symbols. Present exactly
    /// when the shift is topologically mixing; `f` defaults to the whole
    /// truncated alphabet.
    pub fn primitivity_witness(&self) -> Option<PrimitivityWitness> {
        if !self.is_topologically_mixing() {
            return None;
        }
        let n = self.alphabet_size as usize;
        // reach[a*n+b] = is there a path a -> b of length exactly m?
        let mut reach = self.adjacency.clone();
        let cap = (n * n) as u32;
        for m in 1..=cap + 1 {
            if reach.iter().all(|&b| b) {
                return Some(PrimitivityWitness {
                    k0: m - 1,
                    f: (0..self.alphabet_size).collect(),
                });
            }
            let mut next = vec![false; n * n];
            for a in 0..n {
                for c in 0..n {
                    if reach[a * n + c] {
                        for b in 0..n {
                            if self.adjacency[c * n + b] {
                                next[a * n + b] = true;
                            }
                        }
                    }
                }
            }
            reach = next;
        }
        // Mixing guarantees positivity within n^2 steps (Wielandt bound).
        unreachable!("mixing shift must have a positive power within n^2 steps")
    }

    /// All admissible words of `length`, lexicographic.
    pub fn enumerate_words(&self, length: usize) -> WordIter<'_> {
        WordIter::new(self, length)
    }

    /// All simple cycles of length at most `max_len`, each exactly once, as
    /// node sequences starting at their smallest symbol, lexicographic.
    pub fn enumerate_cycles(&self, max_len: usize) -> Vec<Vec<u32>> {
        let n = self.alphabet_size as usize;
        let mut out = Vec::new();
        let mut path: Vec<u32> = Vec::new();
        let mut on_path = vec![false; n];
        for start in 0..self.alphabet_size {
            path.push(start);
            on_path[start as usize] = true;
            self.cycle_dfs(start, max_len, &mut path, &mut on_path, &mut out);
            on_path[start as usize] = false;
            path.pop();
        }
        out
    }

    fn cycle_dfs(
        &self,
        start: u32,
        max_len: usize,
        path: &mut Vec<u32>,
        on_path: &mut [bool],
        out: &mut Vec<Vec<u32>>,
    ) {
        let last = *path.last().unwrap();
        for next in self.successors(last) {
            if next == start {
                out.push(path.clone());
            } else if next > start && !on_path[next as usize] && path.len() < max_len {
                path.push(next);
                on_path[next as usize] = true;
                self.cycle_dfs(start, max_len, path, on_path, out);
                on_path[next as usize] = false;
                path.pop();
            }
        }
    }

    /// Strongly connected components (Kosaraju), each sorted ascending, listed
    /// by smallest member.
    pub fn strongly_connected_components(&self) -> Vec<Vec<u32>> {
        let n = self.alphabet_size as usize;
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        for s in 0..n {
            if seen[s] {
                continue;
            }
            // Iterative post-order DFS on the forward graph.
            let mut stack: Vec<(u32, Box<dyn Iterator<Item = u32> + '_>)> =
                vec![(s as u32, Box::new(self.successors(s as u32)))];
            seen[s] = true;
            while let Some((node, iter)) = stack.last_mut() {
                let node = *node;
                match iter.next() {
                    Some(nb) if !seen[nb as usize] => {
                        seen[nb as usize] = true;
                        stack.push((nb, Box::new(self.successors(nb))));
                    }
                    Some(_) => {}
                    None => {
                        order.push(node);
                        stack.pop();
                    }
                }
            }
        }
        let mut comp = vec![usize::MAX; n];
        let mut comps: Vec<Vec<u32>> = Vec::new();
        for &root in order.iter().rev() {
            if comp[root as usize] != usize::MAX {
                continue;
            }
            let id = comps.len();
            let mut members = vec![root];
            comp[root as usize] = id;
            let mut stack = vec![root];
            while let Some(v) = stack.pop() {
                for p in self.predecessors(v) {
                    if comp[p as usize] == usize::MAX {
                        comp[p as usize] = id;
                        members.push(p);
                        stack.push(p);
                    }
                }
            }
            members.sort_unstable();
            comps.push(members);
        }
        comps.sort_by_key(|c| c[0]);
        comps
    }

    /// Period of one SCC via BFS level differences; None when the component
    /// has no internal edge.
    fn component_period(&self, scc: &[u32]) -> Option<u64> {
        let in_scc = {
            let mut v = vec![false; self.alphabet_size as usize];
            for &s in scc {
                v[s as usize] = true;
            }
            v
        };
        let root = scc[0];
        let mut level = vec![i64::MIN; self.alphabet_size as usize];
        level[root as usize] = 0;
        let mut queue = std::collections::VecDeque::from([root]);
        let mut g: u64 = 0;
        while let Some(u) = queue.pop_front() {
            for v in self.successors(u) {
                if !in_scc[v as usize] {
                    continue;
                }
                if level[v as usize] == i64::MIN {
                    level[v as usize] = level[u as usize] + 1;
                    queue.push_back(v);
                } else {
                    let d = level[u as usize] + 1 - level[v as usize];
                    g = gcd(g, d.unsigned_abs());
                }
            }
        }
        if g == 0 {
            None
        } else {
            Some(g)
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Render a word as a digit string when every symbol is a single digit,
/// dash-separated otherwise ("0-11-3").
pub fn word_to_string(word: &[u32]) -> String {
    if word.iter().all(|&s| s < 10) {
        word.iter().map(|s| s.to_string()).collect()
    } else {
        word.iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }
}

/// Parse a word from a digit string or a dash-separated symbol list.
pub fn parse_word(s: &str) -> Result<Vec<u32>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if s.contains('-') {
        s.split('-')
            .map(|part| {
                part.parse::<u32>()
                    .map_err(|_| ShiftError::Config(format!("bad word component {part:?}")))
            })
            .collect()
    } else {
        s.chars()
            .map(|c| {
                c.to_digit(10)
                    .ok_or_else(|| ShiftError::Config(format!("bad word digit {c:?}")))
            })
            .collect()
    }
}

/// A finite word over the alphabet of a specific shift. Inadmissible words
/// are representable (their cylinders are empty) and queryable; symbols
/// outside the alphabet are rejected outright.
#[derive(Debug, Clone, PartialEq)]
pub struct Word {
    symbols: Vec<u32>,
    admissible: bool,
    shift: Arc<MarkovShift>,
}

impl Word {
    pub fn new(shift: &Arc<MarkovShift>, symbols: Vec<u32>) -> Result<Self> {
        for &s in &symbols {
            if s >= shift.alphabet_size() {
                return Err(ShiftError::SymbolOutOfRange {
                    symbol: s,
                    alphabet_size: shift.alphabet_size(),
                });
            }
        }
        let admissible = shift.admissible_word(&symbols);
        Ok(Self {
            symbols,
            admissible,
            shift: Arc::clone(shift),
        })
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn is_admissible(&self) -> bool {
        self.admissible
    }

    pub fn shift(&self) -> &Arc<MarkovShift> {
        &self.shift
    }
}

/// Lexicographic stream over admissible words of a fixed length.
pub struct WordIter<'a> {
    shift: &'a MarkovShift,
    current: Option<Vec<u32>>,
    length: usize,
}

impl<'a> WordIter<'a> {
    fn new(shift: &'a MarkovShift, length: usize) -> Self {
        let mut it = Self {
            shift,
            current: None,
            length,
        };
        if length == 0 {
            return it;
        }
        it.current = it.first_from(vec![]);
        it
    }

    /// Smallest admissible completion of `prefix` to full length, if any.
    fn first_from(&self, mut prefix: Vec<u32>) -> Option<Vec<u32>> {
        while prefix.len() < self.length {
            let next = if prefix.is_empty() {
                Some(0)
            } else {
                self.shift.successors(*prefix.last().unwrap()).next()
            };
            match next {
                Some(nb) => prefix.push(nb),
                // Unreachable on valid shifts (every symbol has an out-edge).
                None => return self.advance(prefix),
            }
        }
        Some(prefix)
    }

    /// Next admissible word after `word` in lexicographic order.
    fn advance(&self, mut word: Vec<u32>) -> Option<Vec<u32>> {
        while let Some(last) = word.pop() {
            let candidates: Vec<u32> = if word.is_empty() {
                ((last + 1)..self.shift.alphabet_size()).collect()
            } else {
                self.shift
                    .successors(*word.last().unwrap())
                    .filter(|&s| s > last)
                    .collect()
            };
            for c in candidates {
                word.push(c);
                if let Some(full) = self.first_from(word.clone()) {
                    return Some(full);
                }
                word.pop();
            }
        }
        None
    }
}

impl Iterator for WordIter<'_> {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let current = self.current.take()?;
        self.current = self.advance(current.clone());
        Some(current)
    }
}
