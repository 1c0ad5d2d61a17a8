//! Log-domain arithmetic helpers.
//!
//! All Boltzmann-weight arithmetic in this crate stays in log space so that
//! beta values in the hundreds never materialize exp(beta*f).

/// log(exp(a) + exp(b)) without overflow. Either argument may be -inf.
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// log(sum_i exp(t_i)); -inf on an empty slice.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = terms.iter().map(|&t| (t - m).exp()).sum();
    m + s.ln()
}

/// Format a float with 17 significant digits, enough to round-trip f64.
pub fn fmt_g17(x: f64) -> String {
    if x == f64::INFINITY {
        return "inf".to_string();
    }
    if x == f64::NEG_INFINITY {
        return "-inf".to_string();
    }
    format!("{:.16e}", x)
}
