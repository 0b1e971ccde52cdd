//! The Werner–Popescu-like family on n parties with N levels each:
//!
//! ```text
//! ρ = (1 - x) / N^n · I + x |Ψ⟩⟨Ψ|,   |Ψ⟩ = N^{-1/2} Σ_k |k⟩ ⊗ … ⊗ |k⟩
//! ```
//!
//! All spectra here are closed forms, so entropies can be evaluated for
//! N^n far beyond anything a dense matrix could hold. The dense constructions
//! exist for cross-checking only.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::classical::EntropicIndex;
use crate::error::{validation, Error, Result};
use crate::quantum::{quantum_conditional, DensityMatrix, Spectrum, ORACLE_MAX_DIM};

/// Levels per party, number of parties and the mixing parameter `x ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerParams {
    levels: u32,
    parties: u32,
    mixing: f64,
}

impl WernerParams {
    pub fn new(levels: u32, parties: u32, mixing: f64) -> Result<Self> {
        if levels < 2 {
            return Err(validation(format!("need at least 2 levels per party, got {levels}")));
        }
        if parties < 2 {
            return Err(validation(format!("need at least 2 parties, got {parties}")));
        }
        if !(0.0..=1.0).contains(&mixing) {
            return Err(validation(format!("mixing parameter {mixing} outside [0, 1]")));
        }
        let p = Self { levels, parties, mixing };
        p.dimension()?;
        Ok(p)
    }

    #[inline]
    pub fn levels(&self) -> u32 {
        self.levels
    }

    #[inline]
    pub fn parties(&self) -> u32 {
        self.parties
    }

    #[inline]
    pub fn mixing(&self) -> f64 {
        self.mixing
    }

    pub fn with_mixing(&self, mixing: f64) -> Result<Self> {
        Self::new(self.levels, self.parties, mixing)
    }

    /// Total dimension N^n; rejected when it does not fit in a `u64`.
    pub fn dimension(&self) -> Result<u64> {
        checked_power(self.levels, self.parties)
    }
}

fn checked_power(base: u32, exp: u32) -> Result<u64> {
    (base as u64)
        .checked_pow(exp)
        .ok_or_else(|| Error::Capacity(format!("{base}^{exp} does not fit in 64 bits")))
}

fn dense_dimension(levels: u32, parties: u32) -> Result<usize> {
    let d = checked_power(levels, parties)?;
    if d > ORACLE_MAX_DIM as u64 {
        return Err(Error::Capacity(format!(
            "dimension {levels}^{parties} = {d} exceeds the dense limit of {ORACLE_MAX_DIM}"
        )));
    }
    Ok(d as usize)
}

/// Flat index of the basis state |k, k, …, k⟩ in an n-party, N-level register.
pub(crate) fn diagonal_index(levels: usize, parties: usize, k: usize) -> usize {
    // Σ_j k N^j = k (N^n - 1) / (N - 1)
    (0..parties).fold(0, |acc, _| acc * levels + k)
}

/// `N^{-1/2} Σ_k |k⟩^{⊗n}`.
pub fn ghz_vector(levels: u32, parties: u32) -> Result<Vec<Complex64>> {
    if levels < 2 || parties < 1 {
        return Err(validation(format!(
            "GHZ vector needs N >= 2 and n >= 1, got N = {levels}, n = {parties}"
        )));
    }
    let dim = dense_dimension(levels, parties)?;
    let amp = Complex64::new(1.0 / (levels as f64).sqrt(), 0.0);
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    for k in 0..levels as usize {
        psi[diagonal_index(levels as usize, parties as usize, k)] = amp;
    }
    Ok(psi)
}

/// Dense `(1-x)/N^n · I + x |Ψ⟩⟨Ψ|`.
pub fn werner_density(p: &WernerParams) -> Result<DensityMatrix> {
    let (n_lev, n_par) = (p.levels as usize, p.parties as usize);
    let dim = dense_dimension(p.levels, p.parties)?;
    let x = p.mixing;
    let mut mat = DMatrix::from_diagonal_element(dim, dim, Complex64::new((1.0 - x) / dim as f64, 0.0));
    let ghz: Vec<usize> = (0..n_lev).map(|k| diagonal_index(n_lev, n_par, k)).collect();
    let w = Complex64::new(x / n_lev as f64, 0.0);
    for &i in &ghz {
        for &j in &ghz {
            mat[(i, j)] += w;
        }
    }
    DensityMatrix::from_trusted(vec![n_lev; n_par], mat)
}

/// Spectrum of the full state: `(1-x)/N^n` with multiplicity `N^n - 1` and
/// `(1 + (N^n - 1)x)/N^n` once. The zero level at x = 1 is kept.
pub fn joint_spectrum(p: &WernerParams) -> Result<Spectrum> {
    let d = p.dimension()?;
    let df = d as f64;
    let x = p.mixing;
    Spectrum::from_levels([
        ((1.0 - x) / df, d - 1),
        ((1.0 + (df - 1.0) * x) / df, 1),
    ])
}

/// Spectrum of the reduced state on `retained` parties (1 ≤ m ≤ n-1).
///
/// Tracing out parties decoheres the GHZ projector into `(x/N) Σ_k |k…k⟩⟨k…k|`,
/// so the marginal is diagonal: `(1-x)/N^m` with multiplicity `N^m - N` and
/// `(1 + (N^{m-1} - 1)x)/N^m` with multiplicity N. For m = 1 only the second
/// level survives and equals 1/N.
pub fn marginal_spectrum(p: &WernerParams, retained: u32) -> Result<Spectrum> {
    if retained < 1 || retained >= p.parties {
        return Err(validation(format!(
            "retained parties must be in 1..={}, got {retained}",
            p.parties - 1
        )));
    }
    let dm = checked_power(p.levels, retained)?;
    let dm_f = dm as f64;
    let n = p.levels as u64;
    let inner = checked_power(p.levels, retained - 1)? as f64;
    let x = p.mixing;
    Spectrum::from_levels([
        ((1.0 - x) / dm_f, dm - n),
        ((1.0 + (inner - 1.0) * x) / dm_f, n),
    ])
}

/// `S_q(A_1 | A_2, …, A_n)`: conditioning on all parties but one.
pub fn conditional_entropy_closed(p: &WernerParams, q: EntropicIndex) -> Result<f64> {
    conditional_entropy_block(p, p.parties - 1, q)
}

/// Conditional entropy of the other parties given `conditioned` of them,
/// e.g. `S_q(A,B | C)` for n = 3 and `conditioned = 1`.
pub fn conditional_entropy_block(p: &WernerParams, conditioned: u32, q: EntropicIndex) -> Result<f64> {
    let joint = joint_spectrum(p)?;
    let marginal = marginal_spectrum(p, conditioned)?;
    Ok(quantum_conditional(&joint, &marginal, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{tsallis_entropy, ProbDist};
    use crate::quantum::{partial_trace, spectrum_of, Level};

    fn q(v: f64) -> EntropicIndex {
        EntropicIndex::new(v).unwrap()
    }

    fn params(n_lev: u32, n_par: u32, x: f64) -> WernerParams {
        WernerParams::new(n_lev, n_par, x).unwrap()
    }

    fn assert_levels(s: &Spectrum, expected: &[(f64, u64)], tol: f64) {
        assert_eq!(s.levels().len(), expected.len(), "{s:?} vs {expected:?}");
        for (l, &(v, m)) in s.levels().iter().zip(expected) {
            assert!((l.value - v).abs() <= tol, "{s:?} vs {expected:?}");
            assert_eq!(l.multiplicity, m, "{s:?} vs {expected:?}");
        }
    }

    #[test]
    fn params_validation() {
        assert!(WernerParams::new(1, 3, 0.5).is_err());
        assert!(WernerParams::new(2, 1, 0.5).is_err());
        assert!(WernerParams::new(2, 3, 1.1).is_err());
        assert!(WernerParams::new(2, 3, f64::NAN).is_err());
        assert!(WernerParams::new(2, 63, 0.5).is_ok());
        assert!(matches!(WernerParams::new(2, 64, 0.5), Err(Error::Capacity(_))));
        assert!(matches!(WernerParams::new(10, 20, 0.5), Err(Error::Capacity(_))));
    }

    #[test]
    fn ghz_vector_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = ghz_vector(2, 3).unwrap();
        assert_eq!(psi.len(), 8);
        assert!((psi[0].re - s).abs() < 1e-15 && (psi[7].re - s).abs() < 1e-15);
        assert!(psi[1..7].iter().all(|a| a.norm() == 0.0));

        let psi = ghz_vector(3, 2).unwrap();
        let nonzero: Vec<usize> = (0..9).filter(|&i| psi[i].norm() > 0.0).collect();
        assert_eq!(nonzero, vec![0, 4, 8]);

        let psi = ghz_vector(5, 1).unwrap();
        assert!(psi.iter().all(|a| (a.norm_sqr() - 0.2).abs() < 1e-15));
        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-15);
        assert!(matches!(ghz_vector(2, 13), Err(Error::Capacity(_))));
    }

    #[test]
    fn werner_density_endpoints() {
        let rho = werner_density(&params(2, 3, 0.0)).unwrap();
        assert!(rho.max_abs_diff(&DensityMatrix::maximally_mixed(vec![2, 2, 2]).unwrap()) < 1e-16);
        let rho = werner_density(&params(2, 3, 1.0)).unwrap();
        let ghz = DensityMatrix::pure(vec![2, 2, 2], &ghz_vector(2, 3).unwrap()).unwrap();
        assert!(rho.max_abs_diff(&ghz) < 1e-15);
        rho.check_invariants().unwrap();
        assert!(matches!(werner_density(&params(4, 7, 0.5)), Err(Error::Capacity(_))));
    }

    #[test]
    fn joint_spectrum_examples() {
        let x = 0.4;
        let s = joint_spectrum(&params(2, 3, x)).unwrap();
        assert_levels(&s, &[(0.475, 1), (0.075, 7)], 1e-15);
        let dense = spectrum_of(&werner_density(&params(2, 3, x)).unwrap()).unwrap();
        assert_levels(&dense, &[(0.475, 1), (0.075, 7)], 1e-14);

        for (n_lev, n_par) in [(2, 2), (3, 4), (7, 9)] {
            let s = joint_spectrum(&params(n_lev, n_par, 0.0)).unwrap();
            let d = (n_lev as u64).pow(n_par);
            assert_eq!(s.levels(), &[Level { value: 1.0 / d as f64, multiplicity: d }]);
        }

        let s = joint_spectrum(&params(3, 2, 0.5)).unwrap();
        assert_levels(&s, &[(5.0 / 9.0, 1), (0.5 / 9.0, 8)], 1e-15);
        let dense = spectrum_of(&werner_density(&params(3, 2, 0.5)).unwrap()).unwrap();
        assert_levels(&dense, &[(5.0 / 9.0, 1), (0.5 / 9.0, 8)], 1e-14);

        let s = joint_spectrum(&params(2, 3, 1.0)).unwrap();
        assert_levels(&s, &[(1.0, 1), (0.0, 7)], 0.0);
    }

    #[test]
    fn joint_spectrum_at_scale() {
        // 2^60: far beyond dense matrices, still exact multiplicities
        let s = joint_spectrum(&params(2, 60, 0.3)).unwrap();
        assert_eq!(s.dimension(), 1u64 << 60);
        assert_eq!(s.levels()[1].multiplicity, (1u64 << 60) - 1);
    }

    #[test]
    fn marginal_spectrum_examples() {
        for x in [0.0, 0.25, 0.9] {
            let s = marginal_spectrum(&params(2, 3, x), 2).unwrap();
            if x == 0.0 {
                assert_levels(&s, &[(0.25, 4)], 0.0);
            } else {
                assert_levels(&s, &[((1.0 + x) / 4.0, 2), ((1.0 - x) / 4.0, 2)], 1e-16);
            }
            let s = marginal_spectrum(&params(2, 3, x), 1).unwrap();
            assert_levels(&s, &[(0.5, 2)], 0.0);
        }

        let p = params(3, 3, 0.3);
        let s = marginal_spectrum(&p, 2).unwrap();
        let expected = [((1.0 + 2.0 * 0.3) / 9.0, 3), (0.7 / 9.0, 6)];
        assert_levels(&s, &expected, 1e-16);
        let dense = spectrum_of(&partial_trace(&werner_density(&p).unwrap(), &[1, 2]).unwrap()).unwrap();
        assert_levels(&dense, &expected, 1e-14);

        assert!(marginal_spectrum(&p, 0).is_err());
        assert!(marginal_spectrum(&p, 3).is_err());
    }

    #[test]
    fn marginal_of_werner_is_not_a_smaller_werner_state() {
        for (n_lev, n_par, m) in [(2, 3, 2), (3, 4, 2), (2, 5, 3)] {
            let marginal = marginal_spectrum(&params(n_lev, n_par, 1.0), m).unwrap();
            let smaller = joint_spectrum(&params(n_lev, m, 1.0)).unwrap();
            assert_ne!(marginal, smaller);
            let marginal = marginal_spectrum(&params(n_lev, n_par, 0.0), m).unwrap();
            let smaller = joint_spectrum(&params(n_lev, m, 0.0)).unwrap();
            assert_eq!(marginal, smaller);
        }
    }

    #[test]
    fn ghz_single_party_marginal_is_maximally_mixed() {
        let rho = werner_density(&params(2, 3, 1.0)).unwrap();
        let c = partial_trace(&rho, &[2]).unwrap();
        assert!(c.max_abs_diff(&DensityMatrix::maximally_mixed(vec![2]).unwrap()) < 1e-15);
    }

    /// Three-qubit closed forms written out term by term.
    fn eq_three_qubit(x: f64, qq: f64, conditioned_on_pair: bool) -> f64 {
        let num = 7.0 * ((1.0 - x) / 8.0).powf(qq) + ((1.0 + 7.0 * x) / 8.0).powf(qq);
        let den = if conditioned_on_pair {
            2.0 * ((1.0 - x) / 4.0).powf(qq) + 2.0 * ((1.0 + x) / 4.0).powf(qq)
        } else {
            2.0 * 0.5f64.powf(qq)
        };
        (num / den - 1.0) / (1.0 - qq)
    }

    #[test]
    fn three_qubit_conditional_entropies_match_term_by_term_forms() {
        for x in [0.0, 0.1, 0.2, 0.45, 0.8, 1.0] {
            for qq in [0.5, 2.0, 3.7, 20.0] {
                let p = params(2, 3, x);
                // values reach ~1e4 at q = 20, so compare relative to magnitude
                let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
                let pair = conditional_entropy_closed(&p, q(qq)).unwrap();
                assert!(close(pair, eq_three_qubit(x, qq, true)), "x={x} q={qq}");
                let single = conditional_entropy_block(&p, 1, q(qq)).unwrap();
                assert!(close(single, eq_three_qubit(x, qq, false)), "x={x} q={qq}");
                assert_eq!(conditional_entropy_block(&p, 2, q(qq)).unwrap(), pair);
            }
        }
    }

    #[test]
    fn maximally_mixed_slice_is_uniform_entropy() {
        for (n_lev, n_par) in [(2, 2), (2, 3), (3, 4), (5, 6), (2, 40)] {
            for qq in [0.2, 0.5, 1.0, 2.0, 10.0, 1e3] {
                let v = conditional_entropy_closed(&params(n_lev, n_par, 0.0), q(qq)).unwrap();
                let u = tsallis_entropy(&ProbDist::uniform(n_lev as usize).unwrap(), q(qq));
                assert!((v - u).abs() < 1e-12, "N={n_lev} n={n_par} q={qq}: {v} vs {u}");
                if qq != 1.0 {
                    let closed = ((n_lev as f64).powf(1.0 - qq) - 1.0) / (1.0 - qq);
                    assert!((v - closed).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn two_qubit_boundary_at_large_q() {
        let v = conditional_entropy_closed(&params(2, 2, 1.0 / 3.0), q(1e4)).unwrap();
        // at x = 1/3 the largest eigenvalues coincide and the ratio of traces is 1/2
        assert!(v.abs() < 1e-4);
        assert!(v > 0.0);
    }
}
