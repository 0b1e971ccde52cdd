//! Classical nonadditive information measures.
//!
//! Tsallis entropy `S_q[p] = (Σ p_i^q - 1) / (1 - q)`, escort distributions,
//! normalized q-expectation values and the nonadditive conditional entropy,
//! both as an escort-weighted average of conditional entropies and in the
//! ratio form `[S_q(A,B) - S_q(A)] / [1 + (1-q) S_q(A)]`. The two forms agree
//! identically; the tests check that numerically.

use crate::error::{validation, Error, Result};
use crate::numeric::{log_sum_exp, shannon_term, tsallis_term};

/// `|q - 1|` below this routes to the Shannon / von Neumann formulas.
pub const LIMIT_POINT_TOL: f64 = 1e-9;

/// Accepted deviation of a probability sum from 1.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// |1 + (1-q) S_q(A)| below this is reported as [`Error::Singularity`].
pub const SINGULAR_DENOMINATOR: f64 = 1e-300;

/// Required agreement between the alternative decompositions in [`tripartite_chain`].
pub const CHAIN_TOL: f64 = 1e-10;

/// The entropic index `q > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EntropicIndex(f64);

impl EntropicIndex {
    pub fn new(q: f64) -> Result<Self> {
        if !q.is_finite() || q <= 0.0 {
            return Err(validation(format!("entropic index must be a positive finite real, got {q}")));
        }
        Ok(Self(q))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// True when q is close enough to 1 that the additive (Shannon / von Neumann)
    /// formulas are used instead of the 0/0 quotient.
    #[inline]
    pub fn is_limit_point(self) -> bool {
        (self.0 - 1.0).abs() <= LIMIT_POINT_TOL
    }
}

impl TryFrom<f64> for EntropicIndex {
    type Error = Error;

    fn try_from(q: f64) -> Result<Self> {
        Self::new(q)
    }
}

/// A finite probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDist(Vec<f64>);

impl ProbDist {
    /// Validates `p` and renormalizes it if the sum is within [`PROB_SUM_TOL`] of 1.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        check_probabilities(&p)?;
        Ok(Self(renormalize(p)))
    }

    pub fn uniform(outcomes: usize) -> Result<Self> {
        if outcomes == 0 {
            return Err(validation("uniform distribution needs at least one outcome"));
        }
        Ok(Self(vec![1.0 / outcomes as f64; outcomes]))
    }

    /// Point mass on `index`.
    pub fn deterministic(outcomes: usize, index: usize) -> Result<Self> {
        if index >= outcomes {
            return Err(validation(format!("index {index} out of range for {outcomes} outcomes")));
        }
        let mut p = vec![0.0; outcomes];
        p[index] = 1.0;
        Ok(Self(p))
    }

    #[inline]
    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

fn check_probabilities(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(validation("probability vector is empty"));
    }
    for (i, &v) in p.iter().enumerate() {
        if !v.is_finite() || v < 0.0 || v > 1.0 + PROB_SUM_TOL {
            return Err(validation(format!("probability p[{i}] = {v} outside [0, 1]")));
        }
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(validation(format!("probabilities sum to {sum}, not 1")));
    }
    Ok(())
}

fn renormalize(mut p: Vec<f64>) -> Vec<f64> {
    let sum: f64 = p.iter().sum();
    if sum != 1.0 {
        for v in &mut p {
            *v = (*v / sum).min(1.0);
        }
    }
    p
}

/// Joint distribution over several subsystems, stored flat in row-major
/// (lexicographic) order of the multi-index: the last subsystem varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist {
    dims: Vec<usize>,
    p: Vec<f64>,
}

impl JointDist {
    pub fn new(dims: Vec<usize>, p: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(validation(format!("invalid subsystem dimensions {dims:?}")));
        }
        let size = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::Capacity(format!("joint of dims {dims:?} is too large")))?;
        if size != p.len() {
            return Err(validation(format!(
                "dims {dims:?} need {size} probabilities, got {}",
                p.len()
            )));
        }
        check_probabilities(&p)?;
        Ok(Self { dims, p: renormalize(p) })
    }

    /// Product distribution `p_1 ⊗ p_2 ⊗ ...`.
    pub fn product(factors: &[&ProbDist]) -> Result<Self> {
        if factors.is_empty() {
            return Err(validation("product of zero distributions"));
        }
        let mut p = vec![1.0];
        for f in factors {
            p = p
                .iter()
                .flat_map(|&a| f.probs().iter().map(move |&b| a * b))
                .collect();
        }
        Self::new(factors.iter().map(|f| f.len()).collect(), p)
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    #[inline]
    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    #[inline]
    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    /// The joint viewed as a single distribution over all multi-indices.
    pub fn flatten(&self) -> ProbDist {
        ProbDist(self.p.clone())
    }

    /// Marginal over the listed subsystems, in the given order.
    pub fn marginal(&self, keep: &[usize]) -> Result<JointDist> {
        let groups: Vec<&[usize]> = keep.iter().map(std::slice::from_ref).collect();
        self.regroup(&groups)
    }

    /// Sums out every subsystem not named in `groups` and fuses each group
    /// into one subsystem whose outcomes are the group's multi-indices.
    /// `regroup(&[&[1, 2], &[0]])` turns p(A,B,C) into p((B,C), A).
    pub fn regroup(&self, groups: &[&[usize]]) -> Result<JointDist> {
        if groups.is_empty() || groups.iter().any(|g| g.is_empty()) {
            return Err(validation("regroup needs non-empty groups"));
        }
        let mut seen = vec![false; self.dims.len()];
        for &s in groups.iter().flat_map(|g| g.iter()) {
            if s >= self.dims.len() {
                return Err(validation(format!(
                    "subsystem {s} out of range for {} subsystems",
                    self.dims.len()
                )));
            }
            if std::mem::replace(&mut seen[s], true) {
                return Err(validation(format!("subsystem {s} listed twice")));
            }
        }

        let new_dims: Vec<usize> = groups
            .iter()
            .map(|g| g.iter().map(|&s| self.dims[s]).product())
            .collect();
        let new_strides = row_major_strides(&new_dims);
        // Contribution of each original subsystem's index to the new flat index.
        let mut weight = vec![0usize; self.dims.len()];
        for (g, group) in groups.iter().enumerate() {
            let mut w = new_strides[g];
            for &s in group.iter().rev() {
                weight[s] = w;
                w *= self.dims[s];
            }
        }

        let mut out = vec![0.0; new_dims.iter().product()];
        let mut index = vec![0usize; self.dims.len()];
        for &v in &self.p {
            let target: usize = index.iter().zip(&weight).map(|(i, w)| i * w).sum();
            out[target] += v;
            increment_multi_index(&mut index, &self.dims);
        }
        JointDist::new(new_dims, out)
    }
}

pub(crate) fn row_major_strides(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    strides
}

pub(crate) fn increment_multi_index(index: &mut [usize], dims: &[usize]) {
    for k in (0..index.len()).rev() {
        index[k] += 1;
        if index[k] < dims[k] {
            return;
        }
        index[k] = 0;
    }
}

/// Tsallis entropy of a probability slice that is already known to sum to 1.
pub(crate) fn tsallis_of(p: &[f64], q: EntropicIndex) -> f64 {
    if q.is_limit_point() {
        p.iter().map(|&v| shannon_term(v)).sum()
    } else {
        p.iter().map(|&v| tsallis_term(v, q.value())).sum()
    }
}

/// `S_q[p] = (Σ p_i^q - 1) / (1 - q)`; Shannon entropy (natural log) at the limit point.
pub fn tsallis_entropy(p: &ProbDist, q: EntropicIndex) -> f64 {
    tsallis_of(p.probs(), q)
}

/// Escort weights `p_i^q / Σ_j p_j^q`, evaluated in the log domain.
pub(crate) fn escort_weights(p: &[f64], q: EntropicIndex) -> Result<Vec<f64>> {
    if q.is_limit_point() {
        return Ok(p.to_vec());
    }
    let q = q.value();
    let log_norm = log_sum_exp(p.iter().filter(|&&v| v > 0.0).map(|&v| q * v.ln()));
    if log_norm == f64::NEG_INFINITY {
        return Err(validation("escort of an all-zero vector"));
    }
    Ok(p.iter()
        .map(|&v| if v > 0.0 { (q * v.ln() - log_norm).exp() } else { 0.0 })
        .collect())
}

/// Escort distribution `P_i = p_i^q / Σ_j p_j^q`.
pub fn escort(p: &ProbDist, q: EntropicIndex) -> Result<ProbDist> {
    ProbDist::new(escort_weights(p.probs(), q)?)
}

/// Normalized q-expectation `Σ_i values_i P_i` under the escort of `p`.
pub fn q_expectation(values: &[f64], p: &ProbDist, q: EntropicIndex) -> Result<f64> {
    if values.len() != p.len() {
        return Err(validation(format!(
            "{} values for a distribution over {} outcomes",
            values.len(),
            p.len()
        )));
    }
    let w = escort_weights(p.probs(), q)?;
    Ok(values.iter().zip(&w).map(|(v, w)| v * w).sum())
}

fn require_subsystems(joint: &JointDist, n: usize) -> Result<()> {
    if joint.num_subsystems() != n {
        return Err(validation(format!(
            "expected a joint over {n} subsystems, got {}",
            joint.num_subsystems()
        )));
    }
    Ok(())
}

/// `S_q(B|A)` as the escort average (under p(A)) of the Tsallis entropies of
/// the conditional slices p(B | A = i). Rows with p_i(A) = 0 are dropped.
pub fn conditional_entropy_def(joint: &JointDist, q: EntropicIndex) -> Result<f64> {
    require_subsystems(joint, 2)?;
    let cols = joint.dims()[1];
    let rows: Vec<(f64, &[f64])> = joint
        .probs()
        .chunks(cols)
        .map(|row| (row.iter().sum::<f64>(), row))
        .filter(|(pa, _)| *pa > 0.0)
        .collect();

    let marginal: Vec<f64> = rows.iter().map(|(pa, _)| *pa).collect();
    let weights = escort_weights(&marginal, q)?;

    let mut total = 0.0;
    let mut slice = vec![0.0; cols];
    for ((pa, row), w) in rows.iter().zip(&weights) {
        for (s, &v) in slice.iter_mut().zip(row.iter()) {
            *s = v / pa;
        }
        total += w * tsallis_of(&slice, q);
    }
    Ok(total)
}

/// `S_q(B|A) = [S_q(A,B) - S_q(A)] / [1 + (1-q) S_q(A)]`; `S(A,B) - S(A)` at the limit point.
pub fn conditional_entropy_ratio(joint: &JointDist, q: EntropicIndex) -> Result<f64> {
    require_subsystems(joint, 2)?;
    let s_ab = tsallis_of(joint.probs(), q);
    let s_a = tsallis_of(joint.marginal(&[0])?.probs(), q);
    if q.is_limit_point() {
        return Ok(s_ab - s_a);
    }
    ratio_form(s_ab, s_a, q.value())
}

/// `(s_ab - s_a) / (1 + (1-q) s_a)`, rejecting a vanishing denominator.
/// For a genuine distribution the denominator equals `Σ p_A^q > 0`; it can
/// only reach zero through roundoff or inconsistent inputs.
fn ratio_form(s_ab: f64, s_a: f64, q: f64) -> Result<f64> {
    let denom = 1.0 + (1.0 - q) * s_a;
    if denom.abs() < SINGULAR_DENOMINATOR {
        return Err(Error::Singularity(denom.abs()));
    }
    Ok((s_ab - s_a) / denom)
}

/// `S_q(A) + S_q(B|A) + (1-q) S_q(A) S_q(B|A)`.
pub fn compose_pseudoadditive(s_a: f64, s_b_given_a: f64, q: EntropicIndex) -> f64 {
    s_a + s_b_given_a + (1.0 - q.value()) * s_a * s_b_given_a
}

/// Entropies along the chain p(A,B,C) = p(C) p(B|C) p(A|B,C), with the
/// residuals of the generalized composition law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripartiteChain {
    pub s_abc: f64,
    pub s_bc: f64,
    pub s_c: f64,
    pub s_a_given_bc: f64,
    pub s_b_given_c: f64,
    /// |S_q(A,B,C) - three-term composition of S_q(C), S_q(B|C), S_q(A|B,C)|.
    pub residual: f64,
    /// |S_q(A,B,C) - two-term composition of S_q(B,C), S_q(A|B,C)|.
    pub two_step_residual: f64,
    /// |S_q(B|C) solved back out of the chain - S_q(B|C) computed directly|.
    /// Diagnostic only: solving back divides by `1 + (1-q)(…)`, a power sum
    /// that gets tiny at large q, so this amplifies roundoff accordingly.
    pub recovered_b_given_c_deviation: f64,
}

/// Three-term pseudoadditive composition.
fn compose_three(s_c: f64, s_b_given_c: f64, s_a_given_bc: f64, q: f64) -> f64 {
    let k = 1.0 - q;
    s_c + s_b_given_c
        + s_a_given_bc
        + k * (s_c * s_b_given_c
            + s_b_given_c * s_a_given_bc
            + s_a_given_bc * s_c
            + k * s_c * s_b_given_c * s_a_given_bc)
}

/// Evaluates every entropy of the tripartite chain from marginals and
/// conditionals and checks both decompositions of the composition law to
/// [`CHAIN_TOL`].
pub fn tripartite_chain(joint: &JointDist, q: EntropicIndex) -> Result<TripartiteChain> {
    require_subsystems(joint, 3)?;
    let qv = q.value();
    let s_abc = tsallis_of(joint.probs(), q);
    let s_bc = tsallis_of(joint.marginal(&[1, 2])?.probs(), q);
    let s_c = tsallis_of(joint.marginal(&[2])?.probs(), q);
    let s_a_given_bc = conditional_entropy_def(&joint.regroup(&[&[1, 2], &[0]])?, q)?;
    let s_b_given_c = conditional_entropy_def(&joint.regroup(&[&[2], &[1]])?, q)?;

    let residual = (s_abc - compose_three(s_c, s_b_given_c, s_a_given_bc, qv)).abs();
    let two_step_residual = (s_abc - compose_pseudoadditive(s_bc, s_a_given_bc, q)).abs();

    let k = 1.0 - qv;
    let rest = s_c + s_a_given_bc + k * s_c * s_a_given_bc;
    let recovered = (s_abc - rest) / (1.0 + k * rest);
    let recovered_b_given_c_deviation = (recovered - s_b_given_c).abs();

    let chain = TripartiteChain {
        s_abc,
        s_bc,
        s_c,
        s_a_given_bc,
        s_b_given_c,
        residual,
        two_step_residual,
        recovered_b_given_c_deviation,
    };
    let worst = residual.max(two_step_residual);
    if !(worst <= CHAIN_TOL) {
        return Err(Error::Numerical(format!(
            "composition law violated by {worst:e} (q = {qv})"
        )));
    }
    Ok(chain)
}
