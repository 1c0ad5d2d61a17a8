//! Potentials, Birkhoff sums, variation/Walters moduli, and the coercive
//! tail machinery that selects truncation levels for countable-alphabet
//! models.
//!
//! Only locally constant potentials of finite range are represented exactly.
//! A general potential enters as a user-supplied range-k discretization
//! `f_k(w) := f(representative of [w])`, the representative being the
//! lexicographically minimal admissible extension; the induced error in every
//! downstream quantity is bounded by the user's `Var_k f` bound.

use crate::error::{Result, ShiftError};
use crate::shift::MarkovShift;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Locally constant potential of range `k`: the value at a point depends only
/// on its first `k` symbols. Every admissible word of length `k` has a finite
/// value. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Potential {
    range: u32,
    values: BTreeMap<Vec<u32>, f64>,
    shift: Arc<MarkovShift>,
}

impl Potential {
    pub fn new(
        shift: Arc<MarkovShift>,
        range: u32,
        values: BTreeMap<Vec<u32>, f64>,
    ) -> Result<Self> {
        if range == 0 {
            return Err(ShiftError::ZeroRange);
        }
        for w in shift.enumerate_words(range as usize) {
            match values.get(&w) {
                Some(v) if v.is_finite() => {}
                _ => return Err(ShiftError::BadPotentialValue(w)),
            }
        }
        // Values on inadmissible words are silently unreachable; drop them so
        // two equal potentials compare equal.
        let values = values
            .into_iter()
            .filter(|(w, _)| shift.admissible_word(w))
            .collect();
        Ok(Self {
            range,
            values,
            shift,
        })
    }

    /// Convenience constructor from a closure on admissible range-words.
    pub fn from_fn(
        shift: Arc<MarkovShift>,
        range: u32,
        f: impl Fn(&[u32]) -> f64,
    ) -> Result<Self> {
        if range == 0 {
            return Err(ShiftError::ZeroRange);
        }
        let values = shift
            .enumerate_words(range as usize)
            .map(|w| {
                let v = f(&w);
                (w, v)
            })
            .collect();
        Self::new(shift, range, values)
    }

    pub fn range(&self) -> u32 {
        self.range
    }

    pub fn shift(&self) -> &Arc<MarkovShift> {
        &self.shift
    }

    pub fn values(&self) -> &BTreeMap<Vec<u32>, f64> {
        &self.values
    }

    /// Largest |f| over admissible range-words.
    pub fn sup_abs(&self) -> f64 {
        self.values.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Value on the first `range` symbols of `word`.
    pub fn eval(&self, word: &[u32]) -> Result<f64> {
        if word.len() < self.range as usize {
            return Err(ShiftError::WordTooShort {
                len: word.len(),
                need: self.range as usize,
            });
        }
        let key = &word[..self.range as usize];
        if !self.shift.admissible_word(key) {
            return Err(ShiftError::InadmissibleWord(word.to_vec()));
        }
        Ok(self.values[key])
    }

    /// `S_n f` along `word`, with `n = |word| - range + 1`. A word of length
    /// `range - 1` carries the empty sum `S_0 f = 0`.
    pub fn birkhoff_sum(&self, word: &[u32]) -> Result<f64> {
        let k = self.range as usize;
        if word.len() + 1 < k {
            return Err(ShiftError::WordTooShort {
                len: word.len(),
                need: k - 1,
            });
        }
        if !self.shift.admissible_word(word) {
            return Err(ShiftError::InadmissibleWord(word.to_vec()));
        }
        let n = word.len() + 1 - k;
        let mut s = 0.0;
        for j in 0..n {
            s += self.values[&word[j..j + k]];
        }
        Ok(s)
    }

    /// `S_p f` on the periodic point of a closed cycle of length `p`; windows
    /// wrap modulo the cycle length.
    pub fn birkhoff_sum_periodic(&self, cycle: &[u32]) -> Result<f64> {
        if cycle.is_empty() {
            return Err(ShiftError::WordTooShort { len: 0, need: 1 });
        }
        if !self.shift.admissible_word(cycle) {
            return Err(ShiftError::InadmissibleWord(cycle.to_vec()));
        }
        if !self
            .shift
            .admissible_pair(*cycle.last().unwrap(), cycle[0])
        {
            return Err(ShiftError::CycleNotClosed);
        }
        let p = cycle.len();
        let k = self.range as usize;
        let mut s = 0.0;
        for j in 0..p {
            let window: Vec<u32> = (0..k).map(|t| cycle[(j + t) % p]).collect();
            s += self.values[&window];
        }
        Ok(s)
    }

    /// Walters modulus `M_j = sup_{n>=1} Var_{n+j}(S_n f)`.
    ///
    /// For a locally constant potential of range k this is zero once
    /// j >= k - 1: agreeing on n+j coordinates then pins every window of
    /// S_n f. For smaller j the supremum saturates at n = k - 1 - j, because
    /// for larger n the differing windows depend only on the last k-1 shared
    /// symbols and the two free tails, and every admissible context occurs as
    /// such a suffix. The maximum over n = 1 ..= k-1-j is therefore exact.
    pub fn walters_modulus(&self, j: u32) -> f64 {
        let k = self.range;
        if j + 1 >= k {
            return 0.0;
        }
        let mut m = 0.0f64;
        for n in 1..=(k - 1 - j) as usize {
            m = m.max(self.variation_of_birkhoff(n, n + j as usize));
        }
        m
    }

    /// Exact `Var_m(S_n f)`: maximum of |S_n f(x) - S_n f(y)| over pairs of
    /// admissible words agreeing on their first `m` symbols.
    pub fn variation_of_birkhoff(&self, n: usize, m: usize) -> f64 {
        let len = n + self.range as usize - 1;
        if m >= len {
            return 0.0;
        }
        // Group words by shared prefix; spread of S_n f within a group.
        let mut spread: BTreeMap<Vec<u32>, (f64, f64)> = BTreeMap::new();
        for w in self.shift.enumerate_words(len) {
            let s = self.birkhoff_sum(&w).expect("enumerated word admissible");
            let key = w[..m].to_vec();
            let e = spread.entry(key).or_insert((s, s));
            e.0 = e.0.min(s);
            e.1 = e.1.max(s);
        }
        spread
            .values()
            .map(|(lo, hi)| hi - lo)
            .fold(0.0, f64::max)
    }
}

/// Coercive tail data for a countable-alphabet model: an envelope
/// `e_i >= sup f|_[i]` together with a computable bound
/// `T(N) >= sum_{i>=N} exp(e_i)` with `T(N) -> 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "envelope", rename_all = "snake_case")]
pub enum TailEnvelope {
    /// `exp(e_i) = rate^i` with `rate` in (0,1): `T(N) = rate^N / (1 - rate)`.
    Geometric { rate: f64 },
    /// Explicit finite list of `e_i`; symbols beyond the list do not exist,
    /// so `T(len) = 0`.
    Explicit { values: Vec<f64> },
    /// `e_i = value` for every i. Never summable; `truncation_level` always
    /// fails on it. Exists so that divergent user input is representable.
    Constant { value: f64 },
}

impl TailEnvelope {
    /// Upper bound on the tail mass `sum_{i>=n} exp(e_i)`.
    pub fn tail_bound(&self, n: usize) -> f64 {
        match self {
            TailEnvelope::Geometric { rate } => {
                if *rate <= 0.0 || *rate >= 1.0 {
                    return f64::INFINITY;
                }
                rate.powi(n as i32) / (1.0 - rate)
            }
            TailEnvelope::Explicit { values } => {
                values.iter().skip(n).map(|e| e.exp()).sum()
            }
            TailEnvelope::Constant { .. } => f64::INFINITY,
        }
    }

    /// Smallest `N` in the envelope's domain with `T(N) <= epsilon`.
    pub fn truncation_level(&self, epsilon: f64) -> Result<usize> {
        if !(epsilon > 0.0) {
            return Err(ShiftError::Config(
                "truncation epsilon must be positive".into(),
            ));
        }
        match self {
            TailEnvelope::Geometric { rate } => {
                if !(*rate > 0.0 && *rate < 1.0) {
                    return Err(ShiftError::EnvelopeNotSummable { epsilon });
                }
                if self.tail_bound(0) <= epsilon {
                    return Ok(0);
                }
                // rate^N <= epsilon (1 - rate)
                let guess = ((epsilon * (1.0 - rate)).ln() / rate.ln()).ceil();
                let mut n = guess.max(0.0) as usize;
                while self.tail_bound(n) > epsilon {
                    n += 1;
                }
                while n > 0 && self.tail_bound(n - 1) <= epsilon {
                    n -= 1;
                }
                Ok(n)
            }
            TailEnvelope::Explicit { values } => {
                for n in 0..=values.len() {
                    if self.tail_bound(n) <= epsilon {
                        return Ok(n);
                    }
                }
                Err(ShiftError::EnvelopeNotSummable { epsilon })
            }
            TailEnvelope::Constant { .. } => {
                Err(ShiftError::EnvelopeNotSummable { epsilon })
            }
        }
    }
}

/// Adjacency rule of a countable-alphabet model.
pub enum AdjacencyRule {
    Full,
    Custom(Box<dyn Fn(u32, u32) -> bool + Send + Sync>),
}

impl AdjacencyRule {
    fn admissible(&self, a: u32, b: u32) -> bool {
        match self {
            AdjacencyRule::Full => true,
            AdjacencyRule::Custom(f) => f(a, b),
        }
    }
}

/// Value rule of a countable-alphabet model, evaluated on admissible
/// range-words of the truncation.
pub enum ValueRule {
    /// `f(x) = -slope * x_0`, range 1.
    LinearSymbolPenalty { slope: f64 },
    Custom(Box<dyn Fn(&[u32]) -> Option<f64> + Send + Sync>),
}

impl ValueRule {
    fn eval(&self, w: &[u32]) -> Option<f64> {
        match self {
            ValueRule::LinearSymbolPenalty { slope } => Some(-slope * w[0] as f64),
            ValueRule::Custom(f) => f(w),
        }
    }
}

/// A countable-alphabet Markov model, handled through finite truncations.
/// The declared `Var_1` bound of the rule is recorded but not verified on the
/// infinite alphabet.
pub struct CountableModel {
    pub range: u32,
    pub adjacency: AdjacencyRule,
    pub values: ValueRule,
    pub envelope: TailEnvelope,
    pub declared_var1: Option<f64>,
}

impl CountableModel {
    /// The built-in family `f(x) = -slope * x_0` on the full countable shift.
    pub fn linear_symbol_penalty(slope: f64) -> Self {
        CountableModel {
            range: 1,
            adjacency: AdjacencyRule::Full,
            values: ValueRule::LinearSymbolPenalty { slope },
            envelope: TailEnvelope::Geometric {
                rate: (-slope).exp(),
            },
            declared_var1: Some(0.0),
        }
    }

    /// Finite instance over symbols `0..n`, values copied from the rule.
    pub fn truncate(&self, n: u32) -> Result<(Arc<MarkovShift>, Potential)> {
        if n == 0 {
            return Err(ShiftError::Config("truncation level must be >= 1".into()));
        }
        let table: Vec<Vec<bool>> = (0..n)
            .map(|a| (0..n).map(|b| self.adjacency.admissible(a, b)).collect())
            .collect();
        let shift = Arc::new(MarkovShift::new(table, 0.5)?);
        let mut values = BTreeMap::new();
        for w in shift.enumerate_words(self.range as usize) {
            match self.values.eval(&w) {
                Some(v) if v.is_finite() => {
                    values.insert(w, v);
                }
                _ => return Err(ShiftError::RuleFailure(w)),
            }
        }
        let potential = Potential::new(Arc::clone(&shift), self.range, values)?;
        Ok((shift, potential))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;

    #[test]
    fn eval_bernoulli() {
        let (_, f) = instances::bernoulli2();
        assert_eq!(f.eval(&[1, 0, 1]).unwrap(), -1.0);
        assert_eq!(f.eval(&[0]).unwrap(), 0.0);
        assert!(matches!(
            f.eval(&[]),
            Err(ShiftError::WordTooShort { .. })
        ));
    }

    #[test]
    fn eval_golden_range_two() {
        let (_, f) = instances::golden3();
        assert_eq!(f.eval(&[0, 1, 2]).unwrap(), 0.0);
        assert_eq!(f.eval(&[2, 0]).unwrap(), -0.5);
        assert!(matches!(
            f.eval(&[2, 2]),
            Err(ShiftError::InadmissibleWord(_))
        ));
        assert!(matches!(f.eval(&[2]), Err(ShiftError::WordTooShort { .. })));
    }

    #[test]
    fn birkhoff_sums() {
        let (_, f) = instances::bernoulli2();
        assert_eq!(f.birkhoff_sum(&[0, 1, 1, 0]).unwrap(), -2.0);
        // S_0 f = 0 on a word of length range - 1 (empty word for range 1).
        assert_eq!(f.birkhoff_sum(&[]).unwrap(), 0.0);

        let (_, g) = instances::golden3();
        assert_eq!(g.birkhoff_sum_periodic(&[0, 1]).unwrap(), 0.0);
        assert_eq!(g.birkhoff_sum(&[1]).unwrap(), 0.0); // S_0 for range 2
        assert_eq!(g.birkhoff_sum(&[0, 1, 0]).unwrap(), 0.0);
        assert_eq!(g.birkhoff_sum(&[0, 0, 2]).unwrap(), -3.0);
        // [2,0,2] is admissible as a word but the wrap 2 -> 2 is not.
        assert!(matches!(
            g.birkhoff_sum_periodic(&[2, 0, 2]),
            Err(ShiftError::CycleNotClosed)
        ));
        assert!(matches!(
            g.birkhoff_sum_periodic(&[2, 2]),
            Err(ShiftError::InadmissibleWord(_))
        ));
    }

    #[test]
    fn birkhoff_additivity() {
        let (_, f) = instances::golden3();
        let w = [0u32, 1, 0, 0, 2, 0, 1, 1, 2, 1];
        for n in 0..=w.len() - 2 {
            let whole = f.birkhoff_sum(&w).unwrap();
            let head = f.birkhoff_sum(&w[..n + 1]).unwrap();
            let tail = f.birkhoff_sum(&w[n..]).unwrap();
            assert_eq!(whole, head + tail, "split at {n}");
        }
    }

    #[test]
    fn walters_modulus_vanishes_for_short_ranges() {
        let (_, f) = instances::bernoulli2();
        for j in 1..5 {
            assert_eq!(f.walters_modulus(j), 0.0);
        }
        let (_, g) = instances::golden3();
        assert_eq!(g.walters_modulus(1), 0.0);
        assert_eq!(g.walters_modulus(2), 0.0);
    }

    #[test]
    fn walters_modulus_range_three_vs_brute_force() {
        let (_, f) = instances::golden_k3();
        let m1 = f.walters_modulus(1);
        assert!(m1 > 0.0);
        // Brute force over all word pairs up to length 8: Var_{n+1}(S_n f)
        // never exceeds M_1 and attains it at saturation.
        let mut best = 0.0f64;
        for n in 1..=6usize {
            let v = f.variation_of_birkhoff(n, n + 1);
            assert!(v <= m1 + 1e-12, "n={n}: {v} > {m1}");
            best = best.max(v);
        }
        assert!((best - m1).abs() <= 1e-12);
        // Monotone nonincreasing in j, zero at the range.
        assert!(f.walters_modulus(2) <= m1);
        assert_eq!(f.walters_modulus(2), 0.0);
    }

    #[test]
    fn variation_zero_at_and_beyond_range() {
        for f in [
            instances::bernoulli2().1,
            instances::golden3().1,
            instances::golden_k3().1,
        ] {
            let k = f.range() as usize;
            for m in k..k + 3 {
                for n in 1..=3usize {
                    if m >= n + k - 1 {
                        assert_eq!(f.variation_of_birkhoff(n, m), 0.0);
                    }
                }
                // Var_m(f) itself is Var with n = 1.
                assert_eq!(f.variation_of_birkhoff(1, m), 0.0);
            }
        }
    }

    #[test]
    fn truncation_level_geometric() {
        // e_i = -i, i.e. rate = exp(-1): T(N) = e^{-N} / (1 - e^{-1}).
        let env = TailEnvelope::Geometric {
            rate: (-1.0f64).exp(),
        };
        assert_eq!(env.truncation_level(1e-6).unwrap(), 15);
        assert_eq!(env.truncation_level(env.tail_bound(0) + 1.0).unwrap(), 0);
    }

    #[test]
    fn truncation_level_divergent() {
        let env = TailEnvelope::Constant { value: 0.0 };
        assert!(matches!(
            env.truncation_level(1e-6),
            Err(ShiftError::EnvelopeNotSummable { .. })
        ));
    }

    #[test]
    fn truncation_level_explicit() {
        let env = TailEnvelope::Explicit {
            values: vec![0.0, -1.0, -2.0],
        };
        // T(0) = 1 + e^{-1} + e^{-2}, T(3) = 0.
        assert_eq!(env.truncation_level(10.0).unwrap(), 0);
        assert_eq!(env.truncation_level(1e-9).unwrap(), 3);
    }

    #[test]
    fn truncate_linear_penalty() {
        let model = CountableModel::linear_symbol_penalty(1.0);
        let (shift, f) = model.truncate(3).unwrap();
        assert_eq!(shift.alphabet_size(), 3);
        for i in 0..3u32 {
            assert_eq!(f.eval(&[i]).unwrap(), -(i as f64));
        }
        // N = 1: single loop, f == 0.
        let (s1, f1) = model.truncate(1).unwrap();
        assert_eq!(s1.alphabet_size(), 1);
        assert_eq!(f1.eval(&[0]).unwrap(), 0.0);
    }

    #[test]
    fn truncations_agree_on_common_words() {
        let model = CountableModel::linear_symbol_penalty(1.0);
        let (_, f5) = model.truncate(5).unwrap();
        let (_, f15) = model.truncate(15).unwrap();
        for (w, v) in f5.values() {
            assert_eq!(f15.values()[w], *v);
        }
    }

    #[test]
    fn missing_value_rejected() {
        let shift = Arc::new(MarkovShift::full(2).unwrap());
        let mut values = BTreeMap::new();
        values.insert(vec![0], 0.0);
        assert!(matches!(
            Potential::new(shift, 1, values),
            Err(ShiftError::BadPotentialValue(_))
        ));
    }
}
