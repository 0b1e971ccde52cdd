//! Small numerical kernels shared by the classical and quantum entropy code.

/// `ln Σ exp(a_i)`, shifted by the maximum so that very negative exponents
/// (eigenvalue^q with q in the thousands) neither underflow nor lose the
/// dominant term. Returns `-inf` for an empty input.
pub(crate) fn log_sum_exp<I>(terms: I) -> f64
where
    I: IntoIterator<Item = f64>,
    I::IntoIter: Clone,
{
    let iter = terms.into_iter();
    let max = iter.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = iter.map(|t| (t - max).exp()).sum();
    max + sum.ln()
}

/// One term `p (p^(q-1) - 1) / (1 - q)` of the Tsallis sum, so that
/// `S_q = Σ tsallis_term(p_i)`. Written with `expm1` so that every term keeps
/// full relative precision as q approaches 1; the terms all share one sign,
/// so summing them never cancels.
#[inline]
pub(crate) fn tsallis_term(p: f64, q: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    p * ((q - 1.0) * p.ln()).exp_m1() / (1.0 - q)
}

/// `-p ln p` with `0 ln 0 = 0`.
#[inline]
pub(crate) fn shannon_term(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.ln()
    }
}
