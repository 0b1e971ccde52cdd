//! Density matrices, degeneracy-aware spectra and quantum Tsallis entropies.
//!
//! Dense matrices are only used at oracle scale (total dimension up to
//! [`ORACLE_MAX_DIM`]); everything entropic is computed from a [`Spectrum`],
//! which stores each distinct eigenvalue once together with its multiplicity.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::classical::{
    escort_weights, increment_multi_index, row_major_strides, tsallis_of, EntropicIndex, ProbDist,
};
use crate::error::{validation, Error, Result};
use crate::numeric::{log_sum_exp, shannon_term, tsallis_term};

/// Largest total Hilbert-space dimension handled by dense matrices.
pub const ORACLE_MAX_DIM: usize = 4096;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;

/// Eigenvalues down to this are clamped to zero; anything lower is not PSD.
pub const PSD_TOL: f64 = 1e-10;

/// Numerically computed eigenvalues closer than this are merged into one level.
pub const EIGEN_MERGE_TOL: f64 = 1e-9;

/// Accepted |Σ multiplicity · eigenvalue - 1| for a spectrum.
pub const SPECTRUM_SUM_TOL: f64 = 1e-12;

/// A Hermitian, positive-semidefinite, unit-trace matrix acting on the tensor
/// product of subsystems with the given dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    mat: DMatrix<Complex64>,
}

fn total_dimension(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(validation(format!("invalid subsystem dimensions {dims:?}")));
    }
    let total = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .filter(|&t| t <= ORACLE_MAX_DIM)
        .ok_or_else(|| {
            Error::Capacity(format!(
                "dimensions {dims:?} exceed the dense limit of {ORACLE_MAX_DIM}"
            ))
        })?;
    Ok(total)
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positive semidefiniteness.
    pub fn new(dims: Vec<usize>, mat: DMatrix<Complex64>) -> Result<Self> {
        let rho = Self::from_trusted(dims, mat)?;
        rho.check_invariants()?;
        Ok(rho)
    }

    /// Only the shape is checked; for constructions that preserve the invariants.
    pub(crate) fn from_trusted(dims: Vec<usize>, mat: DMatrix<Complex64>) -> Result<Self> {
        let total = total_dimension(&dims)?;
        if mat.nrows() != total || mat.ncols() != total {
            return Err(validation(format!(
                "matrix is {}x{}, dims {dims:?} need {total}x{total}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self { dims, mat })
    }

    /// `|ψ⟩⟨ψ|` for a unit vector ψ.
    pub fn pure(dims: Vec<usize>, psi: &[Complex64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > TRACE_TOL {
            return Err(validation(format!("state vector has squared norm {norm}")));
        }
        let n = psi.len();
        let mat = DMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj());
        Self::from_trusted(dims, mat)
    }

    /// Diagonal density matrix with the given (classical) probabilities.
    pub fn diagonal(dims: Vec<usize>, p: &ProbDist) -> Result<Self> {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            p.len(),
            p.probs().iter().map(|&v| Complex64::new(v, 0.0)),
        ));
        Self::from_trusted(dims, d)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let total = total_dimension(&dims)?;
        Self::diagonal(dims, &ProbDist::uniform(total)?)
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    #[inline]
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    /// Largest entrywise deviation from another matrix of the same shape.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        if self.mat.shape() != other.mat.shape() {
            return f64::INFINITY;
        }
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn check_invariants(&self) -> Result<()> {
        let n = self.dim();
        for i in 0..n {
            for j in i..n {
                let dev = (self.mat[(i, j)] - self.mat[(j, i)].conj()).norm();
                if dev > HERMITIAN_TOL {
                    return Err(validation(format!(
                        "not Hermitian: entry ({i},{j}) deviates by {dev:e}"
                    )));
                }
            }
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(validation(format!("trace is {tr}, not 1")));
        }
        let min = eigenvalues(self)?.into_iter().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(validation(format!("smallest eigenvalue {min:e} is negative")));
        }
        Ok(())
    }
}

/// Kronecker product `a ⊗ b`; subsystem dimensions are concatenated.
pub fn tensor_product(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    let dims: Vec<usize> = a.dims.iter().chain(&b.dims).copied().collect();
    total_dimension(&dims)?;
    DensityMatrix::from_trusted(dims, a.mat.kronecker(&b.mat))
}

/// Reduced density matrix on the subsystems in `keep` (a set; order ignored,
/// the result lists subsystems in ascending order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() {
        return Err(validation("partial trace must keep at least one subsystem"));
    }
    let n_sub = rho.dims.len();
    if let Some(&bad) = keep.iter().find(|&&k| k >= n_sub) {
        return Err(validation(format!(
            "subsystem {bad} out of range for {n_sub} subsystems"
        )));
    }
    let traced: Vec<usize> = (0..n_sub).filter(|s| !keep.contains(s)).collect();

    let strides = row_major_strides(&rho.dims);
    let kept_dims: Vec<usize> = keep.iter().map(|&k| rho.dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&t| rho.dims[t]).collect();

    // Flat offsets in the full space contributed by each kept / traced multi-index.
    let offsets = |subsystems: &[usize], sub_dims: &[usize]| -> Vec<usize> {
        let count: usize = sub_dims.iter().product();
        let mut out = Vec::with_capacity(count);
        let mut idx = vec![0usize; sub_dims.len()];
        for _ in 0..count {
            out.push(idx.iter().zip(subsystems).map(|(i, &s)| i * strides[s]).sum());
            increment_multi_index(&mut idx, sub_dims);
        }
        out
    };
    let kept_off = offsets(&keep, &kept_dims);
    let traced_off = offsets(&traced, &traced_dims);

    let m = kept_off.len();
    let mat = DMatrix::from_fn(m, m, |i, j| {
        traced_off
            .iter()
            .map(|&t| rho.mat[(kept_off[i] + t, kept_off[j] + t)])
            .sum()
    });
    DensityMatrix::from_trusted(kept_dims, mat)
}

fn eigenvalues(rho: &DensityMatrix) -> Result<Vec<f64>> {
    // The implicit QR iteration occasionally produces NaN on exactly rank-one
    // sparse inputs (pure GHZ states with N = 8, 16); the identity-shifted
    // matrix has the same eigenvectors and avoids the degenerate arithmetic.
    if let Some(values) = eigenvalues_shifted(rho, 0.0) {
        return Ok(values);
    }
    eigenvalues_shifted(rho, 1.0)
        .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))
}

/// Eigenvalues of `rho + shift·I`, minus `shift`; `None` on failure or non-finite output.
fn eigenvalues_shifted(rho: &DensityMatrix, shift: f64) -> Option<Vec<f64>> {
    let n = rho.dim();
    let values: Vec<f64> = if rho.mat.iter().all(|z| z.im == 0.0) {
        let m = rho.mat.map(|z| z.re) + DMatrix::<f64>::identity(n, n) * shift;
        m.try_symmetric_eigen(f64::EPSILON, 0)?.eigenvalues.iter().map(|v| v - shift).collect()
    } else {
        let m = &rho.mat + DMatrix::<Complex64>::identity(n, n) * Complex64::new(shift, 0.0);
        m.try_symmetric_eigen(f64::EPSILON, 0)?.eigenvalues.iter().map(|v| v - shift).collect()
    };
    values.iter().all(|v| v.is_finite()).then_some(values)
}

/// Eigenvalue spectrum of a density matrix, with near-equal eigenvalues merged.
pub fn spectrum_of(rho: &DensityMatrix) -> Result<Spectrum> {
    Spectrum::from_eigenvalues(&eigenvalues(rho)?)
}

/// One distinct eigenvalue and how many times it occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub value: f64,
    pub multiplicity: u64,
}

/// Multiset of eigenvalues of a density matrix, sorted by descending eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    levels: Vec<Level>,
}

impl Spectrum {
    /// Builds a spectrum from closed-form levels. Zero-multiplicity levels are
    /// dropped and bit-identical eigenvalues are merged; near-equal ones are not.
    pub fn from_levels<I>(levels: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, u64)>,
    {
        Self::build(
            levels
                .into_iter()
                .map(|(value, multiplicity)| Level { value, multiplicity })
                .collect(),
            0.0,
        )
    }

    /// Builds a spectrum from numerically computed eigenvalues, merging values
    /// within [`EIGEN_MERGE_TOL`] of the first value of their run.
    ///
    /// Merged levels below `16 · len · ε` are eigensolver roundoff around an
    /// exact zero and are set to 0; otherwise `λ^q` for q < 1 would inflate
    /// them into visible entropy.
    pub fn from_eigenvalues(values: &[f64]) -> Result<Self> {
        let floor = 16.0 * values.len() as f64 * f64::EPSILON;
        let mut s = Self::build(
            values
                .iter()
                .map(|&value| Level { value, multiplicity: 1 })
                .collect(),
            EIGEN_MERGE_TOL,
        )?;
        for l in &mut s.levels {
            if l.value <= floor {
                l.value = 0.0;
            }
        }
        Ok(s)
    }

    fn build(mut raw: Vec<Level>, merge_tol: f64) -> Result<Self> {
        raw.retain(|l| l.multiplicity > 0);
        if raw.is_empty() {
            return Err(validation("spectrum has no levels"));
        }
        for l in &mut raw {
            if !l.value.is_finite() || l.value < -PSD_TOL || l.value > 1.0 + PSD_TOL {
                return Err(validation(format!("eigenvalue {} outside [0, 1]", l.value)));
            }
            l.value = l.value.max(0.0);
        }
        raw.sort_by(|a, b| b.value.total_cmp(&a.value));

        let mut levels: Vec<Level> = Vec::with_capacity(raw.len());
        // (first value of the run, Σ mult·value, Σ mult)
        let mut run: Option<(f64, f64, u64)> = None;
        let flush = |run: (f64, f64, u64), levels: &mut Vec<Level>| {
            let (first, weighted, mult) = run;
            let value = if merge_tol == 0.0 { first } else { weighted / mult as f64 };
            levels.push(Level { value, multiplicity: mult });
        };
        for l in raw {
            run = match run {
                Some((first, weighted, mult)) if first - l.value <= merge_tol => {
                    let mult = mult.checked_add(l.multiplicity).ok_or_else(|| {
                        Error::Capacity("spectrum multiplicity overflows u64".into())
                    })?;
                    Some((first, weighted + l.value * l.multiplicity as f64, mult))
                }
                Some(done) => {
                    flush(done, &mut levels);
                    Some((l.value, l.value * l.multiplicity as f64, l.multiplicity))
                }
                None => Some((l.value, l.value * l.multiplicity as f64, l.multiplicity)),
            };
        }
        if let Some(done) = run {
            flush(done, &mut levels);
        }

        let total: f64 = levels.iter().map(|l| l.value * l.multiplicity as f64).sum();
        if (total - 1.0).abs() > SPECTRUM_SUM_TOL {
            return Err(validation(format!("spectrum sums to {total}, not 1")));
        }
        Ok(Self { levels })
    }

    #[inline]
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Sum of multiplicities, i.e. the Hilbert-space dimension.
    pub fn dimension(&self) -> u64 {
        self.levels.iter().map(|l| l.multiplicity).sum()
    }

    pub fn largest(&self) -> Level {
        self.levels[0]
    }

    /// Spectrum of `ρ ⊗ σ`. Products are merged only when bit-identical.
    pub fn tensor(&self, other: &Spectrum) -> Result<Spectrum> {
        let mut raw = Vec::with_capacity(self.levels.len() * other.levels.len());
        for a in &self.levels {
            for b in &other.levels {
                let mult = a.multiplicity.checked_mul(b.multiplicity).ok_or_else(|| {
                    Error::Capacity("product spectrum multiplicity overflows u64".into())
                })?;
                raw.push(Level { value: a.value * b.value, multiplicity: mult });
            }
        }
        Self::build(raw, 0.0)
    }
}

/// `ln Tr ρ^q`.
///
/// Evaluated as a max-shifted log-sum-exp over `ln(mult) + q ln(λ)` (zero
/// eigenvalues skipped), which stays finite for q in the millions. For q
/// within 1/2 of 1 and a trace above 1/2 it is instead taken as
/// `ln_1p(Σ mult λ (λ^(q-1) - 1))`, which keeps full relative precision as
/// the result approaches 0.
pub fn q_trace(s: &Spectrum, q: EntropicIndex) -> f64 {
    let qv = q.value();
    if (qv - 1.0).abs() <= 0.5 {
        let t: f64 = s
            .levels
            .iter()
            .filter(|l| l.value > 0.0)
            .map(|l| l.multiplicity as f64 * l.value * ((qv - 1.0) * l.value.ln()).exp_m1())
            .sum();
        if t > -0.5 {
            return t.ln_1p();
        }
    }
    log_sum_exp(
        s.levels
            .iter()
            .filter(|l| l.value > 0.0)
            .map(|l| (l.multiplicity as f64).ln() + qv * l.value.ln()),
    )
}

/// von Neumann entropy `-Σ mult λ ln λ`.
pub fn von_neumann(s: &Spectrum) -> f64 {
    s.levels
        .iter()
        .map(|l| l.multiplicity as f64 * shannon_term(l.value))
        .sum()
}

/// `S_q[ρ] = (Tr ρ^q - 1) / (1 - q)`; von Neumann entropy at the limit point.
pub fn quantum_tsallis(s: &Spectrum, q: EntropicIndex) -> f64 {
    if q.is_limit_point() {
        return von_neumann(s);
    }
    s.levels
        .iter()
        .map(|l| l.multiplicity as f64 * tsallis_term(l.value, q.value()))
        .sum()
}

/// Quantum nonadditive conditional entropy from the spectra of the joint
/// state and of the marginal being conditioned on, in ratio form:
/// `(Tr ρ_joint^q / Tr ρ_marginal^q - 1) / (1 - q)`. Negative values signal
/// entanglement.
pub fn quantum_conditional(joint: &Spectrum, marginal: &Spectrum, q: EntropicIndex) -> f64 {
    if q.is_limit_point() {
        return von_neumann(joint) - von_neumann(marginal);
    }
    (q_trace(joint, q) - q_trace(marginal, q)).exp_m1() / (1.0 - q.value())
}

/// Mixture `Σ_λ w_λ ρ_λ(A) ⊗ ρ_λ(B)` with every `ρ_λ` diagonal in the
/// computational basis, `ρ_λ(A) = Σ_a r_λ(a)|a⟩⟨a|`, `ρ_λ(B) = Σ_b s_λ(b)|b⟩⟨b|`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableDecomposition {
    weights: ProbDist,
    local_a: Vec<ProbDist>,
    local_b: Vec<ProbDist>,
}

impl SeparableDecomposition {
    pub fn new(weights: ProbDist, local_a: Vec<ProbDist>, local_b: Vec<ProbDist>) -> Result<Self> {
        let terms = weights.len();
        if local_a.len() != terms || local_b.len() != terms {
            return Err(validation(format!(
                "{terms} weights but {} A-factors and {} B-factors",
                local_a.len(),
                local_b.len()
            )));
        }
        let da = local_a[0].len();
        let db = local_b[0].len();
        if local_a.iter().any(|r| r.len() != da) || local_b.iter().any(|s| s.len() != db) {
            return Err(validation("local distributions have inconsistent lengths"));
        }
        Ok(Self { weights, local_a, local_b })
    }

    pub fn weights(&self) -> &ProbDist {
        &self.weights
    }

    pub fn local_a(&self) -> &[ProbDist] {
        &self.local_a
    }

    pub fn local_b(&self) -> &[ProbDist] {
        &self.local_b
    }

    pub fn dim_a(&self) -> usize {
        self.local_a[0].len()
    }

    pub fn dim_b(&self) -> usize {
        self.local_b[0].len()
    }

    /// `Σ_λ w_λ r_λ(a)`.
    fn weight_of_a(&self, a: usize) -> f64 {
        self.terms().map(|(w, r, _)| w * r.probs()[a]).sum()
    }

    fn terms(&self) -> impl Iterator<Item = (f64, &ProbDist, &ProbDist)> + '_ {
        self.weights
            .probs()
            .iter()
            .zip(self.local_a.iter().zip(&self.local_b))
            .map(|(&w, (r, s))| (w, r, s))
    }
}

/// The separable density matrix described by `d`, on dims `[dim A, dim B]`.
pub fn separable_state(d: &SeparableDecomposition) -> Result<DensityMatrix> {
    let (da, db) = (d.dim_a(), d.dim_b());
    total_dimension(&[da, db])?;
    let mut diag = vec![0.0; da * db];
    for (w, r, s) in d.terms() {
        for (a, &ra) in r.probs().iter().enumerate() {
            for (b, &sb) in s.probs().iter().enumerate() {
                diag[a * db + b] += w * ra * sb;
            }
        }
    }
    DensityMatrix::diagonal(vec![da, db], &ProbDist::new(diag)?)
}

/// `S_q(B|A)` of a separable state without any matrix algebra: the escort
/// average over `a` (weights `[Σ_λ w_λ r_λ(a)]^q`) of the Tsallis entropy of
/// `π(b|a) = Σ_λ w_λ r_λ(a) s_λ(b) / Σ_λ w_λ r_λ(a)`. Values of `a` with zero
/// total weight are skipped.
pub fn separable_conditional_direct(d: &SeparableDecomposition, q: EntropicIndex) -> Result<f64> {
    let db = d.dim_b();
    let rows: Vec<(usize, f64)> = (0..d.dim_a())
        .map(|a| (a, d.weight_of_a(a)))
        .filter(|&(_, pa)| pa > 0.0)
        .collect();
    let pa: Vec<f64> = rows.iter().map(|&(_, p)| p).collect();
    let escort = escort_weights(&pa, q)?;

    let mut pi = vec![0.0; db];
    let mut total = 0.0;
    for (&(a, weight_a), e) in rows.iter().zip(&escort) {
        pi.iter_mut().for_each(|v| *v = 0.0);
        for (w, r, s) in d.terms() {
            let wr = w * r.probs()[a];
            for (v, &sb) in pi.iter_mut().zip(s.probs()) {
                *v += wr * sb;
            }
        }
        pi.iter_mut().for_each(|v| *v /= weight_a);
        total += e * tsallis_of(&pi, q);
    }
    Ok(total)
}
