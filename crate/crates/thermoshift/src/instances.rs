//! Reference instances shipped with the crate. The golden cases have
//! closed-form or hand-checkable thermodynamic data and are used throughout
//! the examples and the acceptance suite.

use crate::potential::{CountableModel, Potential};
use crate::shift::MarkovShift;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Full 2-shift with the range-1 potential f|[0] = 0, f|[1] = -1.
///
/// Everything is closed form: log lambda_beta = log(1 + e^{-beta}), h == 1,
/// the Gibbs measure is Bernoulli, m(f) = 0 on the fixed point 0^inf, and
/// inf I([1]) = 1.
pub fn bernoulli2() -> (Arc<MarkovShift>, Potential) {
    let shift = Arc::new(MarkovShift::full(2).unwrap());
    let mut values = BTreeMap::new();
    values.insert(vec![0], 0.0);
    values.insert(vec![1], -1.0);
    let f = Potential::new(Arc::clone(&shift), 1, values).unwrap();
    (shift, f)
}

pub fn golden3_shift() -> MarkovShift {
    let table = vec![
        vec![true, true, true],
        vec![true, true, true],
        vec![true, true, false],
    ];
    MarkovShift::new(table, 0.5).unwrap()
}

/// The golden 3-node instance: 3 symbols, every transition admissible except
/// 2 -> 2, range-2 potential with all values exactly representable:
///
/// ```text
/// f(0,0) = -1    f(0,1) =  0     f(0,2) = -2
/// f(1,0) =  0    f(1,1) = -1.5   f(1,2) = -1
/// f(2,0) = -0.5  f(2,1) = -2.5
/// ```
///
/// m(f) = 0, attained exactly once, by the 2-cycle 0 <-> 1; every other cycle
/// has strictly negative mean (the runner-up is 0 -> 1 -> 2 -> 0 at -1/2).
pub fn golden3() -> (Arc<MarkovShift>, Potential) {
    let shift = Arc::new(golden3_shift());
    let mut values = BTreeMap::new();
    values.insert(vec![0, 0], -1.0);
    values.insert(vec![0, 1], 0.0);
    values.insert(vec![0, 2], -2.0);
    values.insert(vec![1, 0], 0.0);
    values.insert(vec![1, 1], -1.5);
    values.insert(vec![1, 2], -1.0);
    values.insert(vec![2, 0], -0.5);
    values.insert(vec![2, 1], -2.5);
    let f = Potential::new(Arc::clone(&shift), 2, values).unwrap();
    (shift, f)
}

/// Range-3 instance on the full 2-shift; exercises contexts longer than one
/// symbol and a nonzero Walters modulus M_1. Unique maximizing measure: the
/// fixed point 0^inf (the word 000 is the only zero-mean cycle window).
pub fn golden_k3() -> (Arc<MarkovShift>, Potential) {
    let shift = Arc::new(MarkovShift::full(2).unwrap());
    let mut values = BTreeMap::new();
    values.insert(vec![0, 0, 0], 0.0);
    values.insert(vec![0, 0, 1], -1.0);
    values.insert(vec![0, 1, 0], -0.5);
    values.insert(vec![0, 1, 1], -1.5);
    values.insert(vec![1, 0, 0], -0.25);
    values.insert(vec![1, 0, 1], -2.0);
    values.insert(vec![1, 1, 0], -1.0);
    values.insert(vec![1, 1, 1], -3.0);
    let f = Potential::new(Arc::clone(&shift), 3, values).unwrap();
    (shift, f)
}

/// Full 2-shift with f == 0: every invariant measure maximizes, so the
/// maximizing measure is not unique. Negative control for uniqueness-gated
/// checks.
pub fn flat2() -> (Arc<MarkovShift>, Potential) {
    let shift = Arc::new(MarkovShift::full(2).unwrap());
    let f = Potential::from_fn(Arc::clone(&shift), 1, |_| 0.0).unwrap();
    (shift, f)
}

/// Two symbols, only 0 -> 1 and 1 -> 0 admissible: irreducible with period 2,
/// not mixing. Negative control for structural hypotheses.
pub fn period2_shift() -> MarkovShift {
    MarkovShift::new(vec![vec![false, true], vec![true, false]], 0.5).unwrap()
}

/// The countable full shift with f(x) = -x_0 and its geometric tail
/// envelope. Truncated at N the eigenvalue is the finite geometric sum
/// (1 - e^{-beta N}) / (1 - e^{-beta}).
pub fn countable_linear() -> CountableModel {
    CountableModel::linear_symbol_penalty(1.0)
}
