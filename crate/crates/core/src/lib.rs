//! Nonadditive (Tsallis) classical and quantum conditional entropies, and the
//! entanglement boundary of Werner–Popescu-like states of n parties with N
//! levels each.
//!
//! - [`classical`]: Tsallis entropy, escort distributions, q-expectations,
//!   conditional entropy and the generalized composition law.
//! - [`quantum`]: density matrices, spectra, quantum Tsallis and conditional entropies,
//!   separable states.
//! - [`werner`]: the state family with closed-form spectra of the joint state and its marginals.
//! - [`separability`]: the boundary x*(q) where the conditional entropy vanishes and its q → ∞ limit.
//! - [`oracle`]: dense-matrix cross-checks of the closed forms.
//! - [`cli`]: the `qtsallis` command-line front end.

pub mod classical;
pub mod cli;
pub mod error;
pub mod format;
mod numeric;
pub mod oracle;
pub mod quantum;
pub mod separability;
pub mod werner;

pub use classical::{
    compose_pseudoadditive, conditional_entropy_def, conditional_entropy_ratio, escort,
    q_expectation, tripartite_chain, tsallis_entropy, EntropicIndex, JointDist, ProbDist,
    TripartiteChain,
};
pub use error::{Error, Result};
pub use oracle::{oracle_marginal, verify_family, verify_separable_witness, Comparison, Report};
pub use quantum::{
    partial_trace, q_trace, quantum_conditional, quantum_tsallis, separable_conditional_direct,
    separable_state, spectrum_of, tensor_product, von_neumann, DensityMatrix, Level,
    SeparableDecomposition, Spectrum,
};
pub use separability::{
    asymptotic_threshold, asymptotic_threshold_block, entropy_sign, entropy_sign_block,
    threshold_block_for_q, threshold_curve, threshold_for_q, Sign, ThresholdCurve, ThresholdPoint,
};
pub use werner::{
    conditional_entropy_block, conditional_entropy_closed, ghz_vector, joint_spectrum,
    marginal_spectrum, werner_density, WernerParams,
};
