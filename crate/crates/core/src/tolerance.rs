//! Numerical tolerances shared across the crate.
//!
//! Structural invariants (hermiticity, idempotence, norms) are held at
//! [`STRUCTURAL`]; anything that goes through an eigen- or singular-value
//! solver is held at [`SPECTRAL`]. Functions with a `_with` suffix accept a
//! [`Tolerances`] override.

pub const STRUCTURAL: f64 = 1e-12;
pub const SPECTRAL: f64 = 1e-10;

/// Largest leakage out of `K` still accepted as an invariant hull.
pub const HULL_LEAKAGE: f64 = 1e-9;
/// Largest `‖P_K Φ*(P_K) P_K − P_K‖` accepted as unital.
pub const UNITALITY: f64 = 1e-9;
/// Norm and orthogonality slack for encodings and subspaces.
pub const CONSTRAINT: f64 = 1e-10;
/// Singular-value threshold for the fixed-point null space.
pub const FIXED_POINT: f64 = 1e-8;
/// Target unitality defect when truncating infinite Kraus sums.
pub const KRAUS_TAIL: f64 = 1e-12;
/// Channel defect on the probed block above which hull verdicts are refused.
pub const HULL_CHANNEL_DEFECT: f64 = 1e-8;
/// Largest coherent-state truncation deficit accepted by closed forms.
pub const COHERENT_DEFICIT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub structural: f64,
    pub spectral: f64,
    pub hull_leakage: f64,
    pub unitality: f64,
    pub constraint: f64,
    pub fixed_point: f64,
    pub hull_channel_defect: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structural: STRUCTURAL,
            spectral: SPECTRAL,
            hull_leakage: HULL_LEAKAGE,
            unitality: UNITALITY,
            constraint: CONSTRAINT,
            fixed_point: FIXED_POINT,
            hull_channel_defect: HULL_CHANNEL_DEFECT,
        }
    }
}
