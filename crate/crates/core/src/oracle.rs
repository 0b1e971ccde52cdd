//! Dense-matrix oracle for the closed forms.
//!
//! Builds Werner states explicitly, traces out parties, diagonalizes, and
//! compares every closed-form spectrum and conditional entropy against the
//! brute-force numbers. Also runs the randomized check that separable states
//! never have negative conditional entropy.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classical::{tsallis_entropy, EntropicIndex, ProbDist};
use crate::error::{validation, Error, Result};
use crate::quantum::{
    partial_trace, quantum_conditional, separable_conditional_direct, separable_state,
    spectrum_of, DensityMatrix, SeparableDecomposition, Spectrum, ORACLE_MAX_DIM,
};
use crate::werner::{
    conditional_entropy_block, conditional_entropy_closed, diagonal_index, joint_spectrum,
    marginal_spectrum, werner_density, WernerParams,
};

/// Per-level and per-entropy agreement required between closed form and oracle.
///
/// Applied as `|closed - oracle| <= ORACLE_TOL * max(1, |oracle|)`: absolute
/// for values up to one, relative beyond. Conditional entropies at large q
/// reach 1e7, where a single ulp already exceeds 1e-10.
pub const ORACLE_TOL: f64 = 1e-10;

/// Entrywise agreement required between the traced-out and the directly built marginal.
pub const MARGINAL_MATRIX_TOL: f64 = 1e-12;

/// Lower bound accepted for a separable conditional entropy.
pub const NONNEGATIVE_TOL: f64 = 1e-12;

/// Entropic indices exercised by [`verify_separable_witness`].
pub const WITNESS_Q: [f64; 4] = [0.5, 2.0, 10.0, 100.0];

/// One closed-form-versus-oracle comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub case: String,
    pub quantity: String,
    pub closed_form: f64,
    pub oracle: f64,
    pub abs_dev: f64,
    pub pass: bool,
}

impl Comparison {
    fn within(case: &str, quantity: impl Into<String>, closed_form: f64, oracle: f64, tol: f64) -> Self {
        let abs_dev = (closed_form - oracle).abs();
        Self {
            case: case.to_string(),
            quantity: quantity.into(),
            closed_form,
            oracle,
            abs_dev,
            pass: abs_dev <= tol * oracle.abs().max(1.0),
        }
    }
}

/// Sorted list of comparisons; serializes as a bare JSON array.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Report {
    entries: Vec<Comparison>,
}

impl Report {
    fn from_entries(mut entries: Vec<Comparison>) -> Self {
        entries.sort_by(|a, b| (&a.case, &a.quantity).cmp(&(&b.case, &b.quantity)));
        Self { entries }
    }

    pub fn entries(&self) -> &[Comparison] {
        &self.entries
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Comparison> {
        self.entries.iter().filter(|c| !c.pass)
    }

    /// Largest `abs_dev / max(1, |oracle|)` among comparisons whose quantity
    /// starts with `prefix`; this is the figure tested against the tolerance.
    pub fn max_scaled_deviation(&self, prefix: &str) -> f64 {
        self.entries
            .iter()
            .filter(|c| c.quantity.starts_with(prefix))
            .map(|c| c.abs_dev / c.oracle.abs().max(1.0))
            .fold(0.0, f64::max)
    }

    /// Largest `abs_dev` among comparisons whose quantity starts with `prefix`.
    pub fn max_deviation(&self, prefix: &str) -> f64 {
        self.entries
            .iter()
            .filter(|c| c.quantity.starts_with(prefix))
            .map(|c| c.abs_dev)
            .fold(0.0, f64::max)
    }

    pub fn merge(self, other: Report) -> Report {
        Report::from_entries(self.entries.into_iter().chain(other.entries).collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

/// Reduced state of the last `retained` parties of the dense Werner state.
///
/// The partial trace is cross-checked entrywise against the direct form
/// `(1-x)/N^m · I + (x/N) Σ_k |k…k⟩⟨k…k|`.
pub fn oracle_marginal(p: &WernerParams, retained: u32) -> Result<DensityMatrix> {
    let n_par = p.parties();
    if retained < 1 || retained >= n_par {
        return Err(validation(format!(
            "retained parties must be in 1..={}, got {retained}",
            n_par - 1
        )));
    }
    let rho = werner_density(p)?;
    let keep: Vec<usize> = ((n_par - retained) as usize..n_par as usize).collect();
    let traced = partial_trace(&rho, &keep)?;

    let n_lev = p.levels() as usize;
    let m = retained as usize;
    let dim = traced.dim();
    let x = p.mixing();
    let mut direct = DMatrix::from_diagonal_element(dim, dim, Complex64::new((1.0 - x) / dim as f64, 0.0));
    for k in 0..n_lev {
        let i = diagonal_index(n_lev, m, k);
        direct[(i, i)] += Complex64::new(x / n_lev as f64, 0.0);
    }
    let direct = DensityMatrix::from_trusted(vec![n_lev; m], direct)?;
    let dev = traced.max_abs_diff(&direct);
    if !(dev <= MARGINAL_MATRIX_TOL) {
        return Err(Error::Numerical(format!(
            "partial trace deviates from the direct marginal by {dev:e} ({})",
            case_label(p)
        )));
    }
    Ok(traced)
}

fn case_label(p: &WernerParams) -> String {
    format!("N={} n={} x={}", p.levels(), p.parties(), p.mixing())
}

fn compare_spectra(case: &str, name: &str, closed: &Spectrum, oracle: &Spectrum, out: &mut Vec<Comparison>) {
    let (c, o) = (closed.levels(), oracle.levels());
    if c.len() != o.len() {
        out.push(Comparison::within(case, format!("{name}.level_count"), c.len() as f64, o.len() as f64, 0.0));
        return;
    }
    for (i, (lc, lo)) in c.iter().zip(o).enumerate() {
        out.push(Comparison::within(case, format!("{name}.level[{i}].value"), lc.value, lo.value, ORACLE_TOL));
        out.push(Comparison::within(
            case,
            format!("{name}.level[{i}].multiplicity"),
            lc.multiplicity as f64,
            lo.multiplicity as f64,
            0.0,
        ));
    }
}

/// Certifies the closed-form spectra and conditional entropies of every
/// parameter set against dense diagonalization, for every q in `q_grid`.
///
/// Parameters beyond [`ORACLE_MAX_DIM`] are a precondition violation and
/// return [`Error::Capacity`]; mismatches are recorded as failing entries.
pub fn verify_family(p_grid: &[WernerParams], q_grid: &[EntropicIndex]) -> Result<Report> {
    let mut out = Vec::new();
    for p in p_grid {
        if p.dimension()? > ORACLE_MAX_DIM as u64 {
            return Err(Error::Capacity(format!("{} exceeds the oracle limit", case_label(p))));
        }
        let case = case_label(p);
        let n_par = p.parties();

        let oracle_joint = spectrum_of(&werner_density(p)?)?;
        compare_spectra(&case, "joint", &joint_spectrum(p)?, &oracle_joint, &mut out);

        let mut oracle_marginals = Vec::with_capacity(n_par as usize - 1);
        for m in 1..n_par {
            let oracle = spectrum_of(&oracle_marginal(p, m)?)?;
            compare_spectra(&case, &format!("marginal(m={m})"), &marginal_spectrum(p, m)?, &oracle, &mut out);
            oracle_marginals.push(oracle);
        }

        for &q in q_grid {
            for k in 1..n_par {
                let oracle = quantum_conditional(&oracle_joint, &oracle_marginals[k as usize - 1], q);
                let closed = conditional_entropy_block(p, k, q)?;
                out.push(Comparison::within(
                    &case,
                    format!("conditional_block(k={k}) q={}", q.value()),
                    closed,
                    oracle,
                    ORACLE_TOL,
                ));
                if k == n_par - 1 {
                    out.push(Comparison::within(
                        &case,
                        format!("conditional_closed q={}", q.value()),
                        conditional_entropy_closed(p, q)?,
                        oracle,
                        ORACLE_TOL,
                    ));
                }
            }
        }
    }
    Ok(Report::from_entries(out))
}

/// The standard oracle grid: N ∈ {2, 3}, n ∈ {2, 3, 4}, x ∈ {0, 0.1, …, 1},
/// q ∈ {0.5, 1, 2, 5, 20}, restricted to total dimension at most `max_dim`.
pub fn default_family_grid(max_dim: u64) -> (Vec<WernerParams>, Vec<EntropicIndex>) {
    let mut params = Vec::new();
    for n_lev in [2u32, 3] {
        for n_par in [2u32, 3, 4] {
            if (n_lev as u64).pow(n_par) > max_dim.min(ORACLE_MAX_DIM as u64) {
                continue;
            }
            for i in 0..=10 {
                params.push(WernerParams::new(n_lev, n_par, i as f64 / 10.0).expect("grid parameters are valid"));
            }
        }
    }
    let qs = [0.5, 1.0, 2.0, 5.0, 20.0]
        .iter()
        .map(|&q| EntropicIndex::new(q).expect("grid q is positive"))
        .collect();
    (params, qs)
}

/// Probability vector from independent uniform variates, normalized.
fn random_dist(rng: &mut ChaCha8Rng, len: usize) -> ProbDist {
    loop {
        let raw: Vec<f64> = (0..len).map(|_| rng.gen::<f64>()).collect();
        let sum: f64 = raw.iter().sum();
        if sum > 0.0 {
            if let Ok(p) = ProbDist::new(raw.iter().map(|v| v / sum).collect()) {
                return p;
            }
        }
    }
}

/// Random separable decomposition: A and B of dimension 2..=4, `terms` mixture components.
fn random_decomposition(rng: &mut ChaCha8Rng, terms: usize) -> SeparableDecomposition {
    let da = rng.gen_range(2..=4);
    let db = rng.gen_range(2..=4);
    let weights = random_dist(rng, terms);
    let local_a = (0..terms).map(|_| random_dist(rng, da)).collect();
    let local_b = (0..terms).map(|_| random_dist(rng, db)).collect();
    SeparableDecomposition::new(weights, local_a, local_b).expect("consistent by construction")
}

/// Randomized check that separable states have nonnegative conditional
/// entropy, and that the direct (escort-average) evaluation agrees with the
/// spectral ratio form on the constructed density matrix.
///
/// Uses ChaCha8 seeded with `seed`. Trial 0 is always a single-term product
/// decomposition, whose conditional entropy must equal the Tsallis entropy of
/// its B factor; later trials have 1 to 6 terms.
pub fn verify_separable_witness(trials: usize, seed: u64) -> Result<Report> {
    if trials == 0 {
        return Err(validation("at least one trial is required"));
    }
    let qs: Vec<EntropicIndex> = WITNESS_Q.iter().map(|&q| EntropicIndex::new(q)).collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trials * qs.len() * 2 + qs.len());

    for t in 0..trials {
        let terms = if t == 0 { 1 } else { rng.gen_range(1..=6) };
        let d = random_decomposition(&mut rng, terms);
        let case = format!("witness trial={t:05} dims={}x{} terms={terms}", d.dim_a(), d.dim_b());

        let rho = separable_state(&d)?;
        let joint = spectrum_of(&rho)?;
        let marginal = spectrum_of(&partial_trace(&rho, &[0])?)?;

        for &q in &qs {
            let direct = separable_conditional_direct(&d, q)?;
            out.push(Comparison {
                case: case.clone(),
                quantity: format!("nonnegative q={}", q.value()),
                closed_form: direct,
                oracle: 0.0,
                abs_dev: (-direct).max(0.0),
                pass: direct >= -NONNEGATIVE_TOL,
            });
            out.push(Comparison::within(
                &case,
                format!("direct_vs_spectral q={}", q.value()),
                direct,
                quantum_conditional(&joint, &marginal, q),
                ORACLE_TOL,
            ));
            if t == 0 {
                out.push(Comparison::within(
                    &case,
                    format!("product_reduction q={}", q.value()),
                    direct,
                    tsallis_entropy(&d.local_b()[0], q),
                    ORACLE_TOL,
                ));
            }
        }
    }
    Ok(Report::from_entries(out))
}
