//! Locating the boundary x*(q) at which the conditional entropy of the
//! Werner family changes sign, and its q → ∞ limit.
//!
//! The sign of `S_q = (Tr ρ_J^q / Tr ρ_M^q - 1) / (1 - q)` only depends on
//! `ln Tr ρ_M^q - ln Tr ρ_J^q` (and on which side of 1 q lies), so the solver
//! never leaves the log domain and works at q = 1e4 as well as at q = 2.

use crate::classical::EntropicIndex;
use crate::error::{validation, Error, Result};
use crate::quantum::{q_trace, von_neumann};
use crate::werner::{joint_spectrum, marginal_spectrum, WernerParams};

/// Number of uniformly spaced points on [0, 1] scanned for a sign change.
pub const SCAN_POINTS: usize = 1024;

/// Bisection stops once the bracket is at most this wide.
pub const BRACKET_TOL: f64 = 1e-12;

/// Log-ratios (or von Neumann differences) smaller than this count as zero.
pub const SIGN_TIE_TOL: f64 = 1e-14;

/// Allowed increase of x* between consecutive q before a curve counts as non-monotone.
pub const MONOTONE_TOL: f64 = 1e-9;

/// Sign of the conditional entropy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }

    fn of(v: f64) -> Sign {
        if v.abs() < SIGN_TIE_TOL {
            Sign::Zero
        } else if v > 0.0 {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }
}

/// Sign of `S_q(A_1 | A_2 … A_n)`.
pub fn entropy_sign(p: &WernerParams, q: EntropicIndex) -> Result<Sign> {
    entropy_sign_block(p, p.parties() - 1, q)
}

/// Sign of the conditional entropy given `conditioned` parties.
pub fn entropy_sign_block(p: &WernerParams, conditioned: u32, q: EntropicIndex) -> Result<Sign> {
    let joint = joint_spectrum(p)?;
    let marginal = marginal_spectrum(p, conditioned)?;
    if q.is_limit_point() {
        return Ok(Sign::of(von_neumann(&joint) - von_neumann(&marginal)));
    }
    let d = q_trace(&marginal, q) - q_trace(&joint, q);
    Ok(Sign::of(if q.value() > 1.0 { d } else { -d }))
}

/// One point x*(q) of the entanglement boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPoint {
    pub q: f64,
    /// `None` when the scan found no sign change on [0, 1].
    pub x_star: Option<f64>,
    /// Width of the final bisection bracket (0 for an exact hit).
    pub bracket_width: f64,
    /// Sign changes seen on the scan grid; 1 when the root is unique at grid resolution.
    pub sign_changes: usize,
}

impl ThresholdPoint {
    pub fn converged(&self) -> bool {
        self.x_star.is_some()
    }
}

/// First zero of `S_q(A_1 | A_2 … A_n)` in x, starting from x = 0.
pub fn threshold_for_q(levels: u32, parties: u32, q: EntropicIndex) -> Result<ThresholdPoint> {
    let base = WernerParams::new(levels, parties, 0.0)?;
    threshold_block_for_q(&base, parties - 1, q)
}

/// First zero in x of the conditional entropy given `conditioned` parties.
///
/// Scans [`SCAN_POINTS`] uniform points for the first sign change (counting
/// all of them), then bisects the bracketing cell down to [`BRACKET_TOL`].
pub fn threshold_block_for_q(
    family: &WernerParams,
    conditioned: u32,
    q: EntropicIndex,
) -> Result<ThresholdPoint> {
    let sign_at = |x: f64| -> Result<Sign> {
        entropy_sign_block(&family.with_mixing(x)?, conditioned, q)
    };

    let step = 1.0 / (SCAN_POINTS - 1) as f64;
    let grid = |i: usize| if i == SCAN_POINTS - 1 { 1.0 } else { i as f64 * step };
    let signs: Vec<Sign> = (0..SCAN_POINTS).map(|i| sign_at(grid(i))).collect::<Result<_>>()?;

    // A grid point with an exact zero between nonzero neighbours counts as one change.
    let nonzero: Vec<(usize, Sign)> = signs
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, s)| s != Sign::Zero)
        .collect();
    let sign_changes = nonzero.windows(2).filter(|w| w[0].1 != w[1].1).count();

    let mut point = ThresholdPoint { q: q.value(), x_star: None, bracket_width: 0.0, sign_changes };

    for i in 0..SCAN_POINTS {
        if signs[i] == Sign::Zero {
            point.x_star = Some(grid(i));
            return Ok(point);
        }
        if i + 1 < SCAN_POINTS && signs[i + 1] != Sign::Zero && signs[i + 1] != signs[i] {
            let (mut lo, mut hi) = (grid(i), grid(i + 1));
            let lo_sign = signs[i];
            while hi - lo > BRACKET_TOL {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                match sign_at(mid)? {
                    Sign::Zero => {
                        point.x_star = Some(mid);
                        return Ok(point);
                    }
                    s if s == lo_sign => lo = mid,
                    _ => hi = mid,
                }
            }
            point.x_star = Some(0.5 * (lo + hi));
            point.bracket_width = hi - lo;
            return Ok(point);
        }
    }
    Ok(point)
}

/// Boundary points over a grid of q values for fixed (N, n).
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdCurve {
    pub levels: u32,
    pub parties: u32,
    pub points: Vec<ThresholdPoint>,
}

impl ThresholdCurve {
    /// Evaluates every grid point without checking monotonicity.
    pub fn scan(levels: u32, parties: u32, q_grid: &[EntropicIndex]) -> Result<Self> {
        if q_grid.windows(2).any(|w| w[1].value() <= w[0].value()) {
            return Err(validation("q grid must be strictly increasing"));
        }
        let points = q_grid
            .iter()
            .map(|&q| threshold_for_q(levels, parties, q))
            .collect::<Result<_>>()?;
        Ok(Self { levels, parties, points })
    }

    /// First consecutive pair of converged points where x* increases by more
    /// than [`MONOTONE_TOL`].
    pub fn monotonicity_violation(&self) -> Option<Error> {
        let converged: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter_map(|p| p.x_star.map(|x| (p.q, x)))
            .collect();
        converged.windows(2).find_map(|w| {
            let ((q_prev, x_prev), (q_next, x_next)) = (w[0], w[1]);
            (x_next > x_prev + MONOTONE_TOL).then_some(Error::NonMonotone {
                q_prev,
                x_prev,
                q_next,
                x_next,
            })
        })
    }
}

/// [`ThresholdCurve::scan`] followed by the monotonicity check.
pub fn threshold_curve(levels: u32, parties: u32, q_grid: &[EntropicIndex]) -> Result<ThresholdCurve> {
    let curve = ThresholdCurve::scan(levels, parties, q_grid)?;
    match curve.monotonicity_violation() {
        Some(e) => Err(e),
        None => Ok(curve),
    }
}

/// q → ∞ boundary of `S_q(A_1 | A_2 … A_n)`: `1 / (1 + N^{n-1})`.
///
/// For large q, `Tr ρ^q` is dominated by the largest eigenvalue, so the sign
/// flips where the largest joint eigenvalue meets the largest marginal one:
///
/// ```text
/// (1 + (N^n - 1)x) / N^n = (1 + (N^{n-2} - 1)x) / N^{n-1}
/// ⇔ 1 + (N^n - 1)x = N + (N^{n-1} - N)x
/// ⇔ (N - 1)(N^{n-1} + 1) x = N - 1
/// ⇔ x = 1 / (1 + N^{n-1})
/// ```
pub fn asymptotic_threshold(levels: u32, parties: u32) -> Result<f64> {
    asymptotic_threshold_block(levels, parties, parties.saturating_sub(1))
}

/// q → ∞ boundary when conditioning on `k` parties (1 ≤ k ≤ n-1).
///
/// The largest marginal eigenvalue is now `(1 + (N^{k-1} - 1)x)/N^k`, and
/// equating it with the largest joint eigenvalue gives
///
/// ```text
/// x = (N^{n-k} - 1) / (N^n - N^{n-1} + N^{n-k} - 1) = G / (N^{n-1} + G),
/// G = (N^{n-k} - 1)/(N - 1) = 1 + N + … + N^{n-k-1}
/// ```
///
/// which reduces to `1 / (1 + N^{n-1})` at k = n-1 and grows as k shrinks.
pub fn asymptotic_threshold_block(levels: u32, parties: u32, conditioned: u32) -> Result<f64> {
    if levels < 2 || parties < 2 {
        return Err(validation(format!(
            "need N >= 2 and n >= 2, got N = {levels}, n = {parties}"
        )));
    }
    if conditioned < 1 || conditioned >= parties {
        return Err(validation(format!(
            "conditioned parties must be in 1..={}, got {conditioned}",
            parties - 1
        )));
    }
    let n_lev = levels as f64;
    let geometric: f64 = (0..parties - conditioned).map(|j| n_lev.powi(j as i32)).sum();
    let top = n_lev.powi(parties as i32 - 1);
    Ok(geometric / (top + geometric))
}
