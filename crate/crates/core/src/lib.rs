//! Bosonic quantum channels on a truncated Fock space.
//!
//! The crate models channels through finite Kraus lists acting on dense
//! `N x N` operators, checks whether a subspace `K` is an invariant hull of a
//! channel, tests the unitality condition `P_K Φ*(P_K) P_K = P_K` that makes
//! the restriction `P_K Φ(·) P_K` a subchannel, computes Bloch-sphere averaged
//! fidelities of encoded qubits and searches for the best qubit encodings.
//!
//! Module map:
//!
//! * [`fock`]: vectors, operators, coherent states, log-binomials.
//! * [`channel`]: Kraus channels, adjoint map, superoperators, self checks.
//! * [`zoo`]: phase damping, amplitude damping, depolarizing and their closed forms.
//! * [`subchannel`]: subspaces, restrictions, hull and unitality checks, fixed points.
//! * [`fidelity`]: pure-state fidelity, closed-form and quadrature Bloch averages.
//! * [`encoder`]: encoding ansatz, simplex search, pair sweeps.

pub mod channel;
pub mod encoder;
pub mod error;
pub mod fidelity;
pub mod fock;
pub mod format;
pub mod nelder_mead;
pub mod quadrature;
pub mod sampling;
pub mod subchannel;
pub mod tolerance;
pub mod zoo;

pub use channel::{
    adjoint_apply, apply_channel, superoperator_of, verify_channel, ChannelFamily, ChannelVerification, KrausChannel,
    KrausOperator, Superoperator,
};
pub use encoder::{
    contiguous_pair_sweep, encoding_from_coefficients, optimize_encoding, optimize_encoding_with, three_level_encoding,
    EncodingAnsatz, OptimizationResult, OptimizerConfig, PairFidelity, PairSweep,
};
pub use error::{Error, Result};
pub use fidelity::{
    amplitude_damping_series_fidelity, average_fidelity_closed, average_fidelity_quadrature, pure_fidelity,
    reference_formula, EncodedQubit, FidelityMethod, FidelityReport, ReferenceFamily, SeriesExponent,
};
pub use fock::{coherent_state, fock_state, log_binomial, CoherentState, FockOperator, FockVector};
pub use subchannel::{
    fixed_point_space, invariant_hull_check, projector, restrict, unitality_check, HullReport, RestrictedChannel,
    Subspace, UnitalityCheck,
};
pub use tolerance::Tolerances;
pub use zoo::{
    amplitude_damping, amplitude_damping_closed, amplitude_damping_matrix_form, coherent_action_closed, depolarizing,
    phase_damping, phase_damping_closed,
};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
