//! Truncated Fock space: state vectors, dense operators and the
//! combinatorics behind the damping channels.
//!
//! Index `k` of a [`FockVector`] is the coefficient of the number state
//! `|k⟩`; entry `(k, s)` of a [`FockOperator`] is the coefficient of
//! `|k⟩⟨s|`.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tolerance;
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amps: DVector<C64>,
}

impl FockVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::domain("Fock vector needs at least one level"));
        }
        Ok(Self { amps: DVector::from_vec(amplitudes) })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&a| C64::new(a, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Self { amps: DVector::zeros(dim.max(1)) }
    }

    pub(crate) fn from_dvector(amps: DVector<C64>) -> Self {
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.amps.as_slice()
    }

    pub fn as_dvector(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &FockVector) -> C64 {
        self.amps.dotc(&other.amps)
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::domain("cannot normalize the zero vector"));
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self { amps: &self.amps * factor }
    }

    pub fn add_scaled(&self, other: &FockVector, factor: C64) -> Result<Self> {
        Error::check_dim(self.dim(), other.dim())?;
        Ok(Self { amps: &self.amps + &other.amps * factor })
    }

    /// Zero-pads (or rejects truncation of) the vector to `dim` levels.
    pub fn embedded(&self, dim: usize) -> Result<Self> {
        if dim < self.dim() && self.amps.rows_range(dim..).iter().any(|a| *a != C64::new(0.0, 0.0)) {
            return Err(Error::domain(format!("vector has support above level {dim}, cannot embed into {dim} levels")));
        }
        let mut v = DVector::zeros(dim);
        let n = dim.min(self.dim());
        v.rows_mut(0, n).copy_from(&self.amps.rows(0, n));
        Ok(Self { amps: v })
    }

    /// Number of leading levels holding all nonzero amplitudes.
    pub fn support_extent(&self) -> usize {
        self.amps.iter().rposition(|a| a.norm_sqr() > 0.0).map_or(0, |k| k + 1)
    }

    /// `|self⟩⟨other|`.
    pub fn outer(&self, other: &FockVector) -> FockOperator {
        FockOperator { m: &self.amps * other.amps.adjoint() }
    }

    pub fn projector(&self) -> FockOperator {
        self.outer(self)
    }
}

/// `|k⟩` in a space truncated at `dim` levels.
pub fn fock_state(k: usize, dim: usize) -> Result<FockVector> {
    if k >= dim {
        return Err(Error::OutOfRange { index: k, dim });
    }
    let mut amps = DVector::zeros(dim);
    amps[k] = C64::new(1.0, 0.0);
    Ok(FockVector { amps })
}

#[derive(Debug, Clone)]
pub struct CoherentState {
    pub alpha: C64,
    pub vector: FockVector,
    /// Probability weight `1 − Σ_{k<dim} |amp_k|²` lost to truncation.
    pub deficit: f64,
}

/// Truncated coherent state `e^{−|α|²/2} Σ_k α^k/√(k!) |k⟩`, not renormalized.
pub fn coherent_state(alpha: C64, dim: usize) -> CoherentState {
    let dim = dim.max(1);
    let mean = alpha.norm_sqr();
    let amps: Vec<C64> = (0..dim).map(|k| coherent_amplitude(alpha, k)).collect();
    CoherentState { alpha, vector: FockVector { amps: DVector::from_vec(amps) }, deficit: poisson_tail(mean, dim) }
}

fn coherent_amplitude(alpha: C64, k: usize) -> C64 {
    let r = alpha.norm();
    if r == 0.0 {
        return if k == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
    }
    let log_mag = -0.5 * r * r + k as f64 * r.ln() - 0.5 * ln_factorial(k as u64);
    C64::from_polar(log_mag.exp(), k as f64 * alpha.arg())
}

/// `Σ_{k ≥ from} e^{−mean} mean^k / k!`, summed directly so small tails
/// carry no cancellation error.
fn poisson_tail(mean: f64, from: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let ln_mean = mean.ln();
    let mut total = 0.0;
    let mut k = from as u64;
    loop {
        let term = (-mean + k as f64 * ln_mean - ln_factorial(k)).exp();
        total += term;
        let past_peak = k as f64 > mean;
        if past_peak && (term == 0.0 || term < total * 1e-18) {
            break;
        }
        k += 1;
    }
    total
}

pub(crate) fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else {
        libm::lgamma(n as f64 + 1.0)
    }
}

/// Number of sequential log-ratio terms below which `ln C_k^i` is summed
/// directly; above it the log-gamma difference is already relatively exact.
const LOG_RATIO_TERMS: u64 = 64;

/// `ln C_k^i = ln(k! / ((k−i)! i!))` without forming factorials.
pub fn log_binomial(k: u64, i: u64) -> Result<f64> {
    if i > k {
        return Err(Error::domain(format!("binomial C({k},{i}) needs i <= k")));
    }
    let m = i.min(k - i);
    if m == 0 {
        return Ok(0.0);
    }
    if m <= LOG_RATIO_TERMS {
        // ln Π_{j=1}^{m} (k−m+j)/j, all terms nonnegative
        let rest = (k - m) as f64;
        return Ok((1..=m).map(|j| (rest / j as f64).ln_1p()).sum());
    }
    Ok(libm::lgamma(k as f64 + 1.0) - libm::lgamma(m as f64 + 1.0) - libm::lgamma((k - m) as f64 + 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    m: DMatrix<C64>,
}

impl FockOperator {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        if m.nrows() == 0 {
            return Err(Error::domain("operator needs at least one level"));
        }
        Ok(Self { m })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { m: DMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: DMatrix::identity(dim, dim) }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self { m: DMatrix::from_fn(dim, dim, f) }
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        Self { m: DMatrix::from_diagonal(&DVector::from_column_slice(diag)) }
    }

    /// `|k⟩⟨s|`.
    pub fn ket_bra(k: usize, s: usize, dim: usize) -> Result<Self> {
        for idx in [k, s] {
            if idx >= dim {
                return Err(Error::OutOfRange { index: idx, dim });
            }
        }
        let mut m = DMatrix::zeros(dim, dim);
        m[(k, s)] = C64::new(1.0, 0.0);
        Ok(Self { m })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn entry(&self, k: usize, s: usize) -> C64 {
        self.m[(k, s)]
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut DMatrix<C64> {
        &mut self.m
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self { m: &self.m * factor }
    }

    /// `max |x_ks − conj(x_sk)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for k in 0..n {
            for s in k..n {
                worst = worst.max((self.m[(k, s)] - self.m[(s, k)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Smallest eigenvalue of the hermitian part `(x + x†)/2`.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.m + self.m.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues().min()
    }

    /// Hermitian, positive semidefinite and of unit trace.
    pub fn is_state(&self) -> bool {
        self.is_hermitian(tolerance::STRUCTURAL)
            && self.min_eigenvalue() >= -tolerance::SPECTRAL
            && (self.trace() - C64::new(1.0, 0.0)).norm() <= tolerance::SPECTRAL
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.m.singular_values().max()
    }

    pub fn hs_norm(&self) -> f64 {
        self.m.norm()
    }

    /// Hilbert–Schmidt inner product `Tr(self† other)`.
    pub fn hs_inner(&self, other: &FockOperator) -> C64 {
        self.m.dotc(&other.m)
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &FockOperator) -> f64 {
        self.m.iter().zip(other.m.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `⟨u|self|v⟩`.
    pub fn sandwich(&self, u: &FockVector, v: &FockVector) -> C64 {
        u.as_dvector().dotc(&(&self.m * v.as_dvector()))
    }

    pub fn expectation(&self, v: &FockVector) -> C64 {
        self.sandwich(v, v)
    }

    /// Top-left `block x block` corner.
    pub fn block(&self, block: usize) -> Self {
        let b = block.min(self.dim());
        Self { m: self.m.view((0, 0), (b, b)).into_owned() }
    }

    /// Zero-padded copy on `dim` levels.
    pub fn embedded(&self, dim: usize) -> Self {
        let n = self.dim().min(dim);
        let mut m = DMatrix::zeros(dim, dim);
        m.view_mut((0, 0), (n, n)).copy_from(&self.m.view((0, 0), (n, n)));
        Self { m }
    }
}

impl Add for &FockOperator {
    type Output = FockOperator;
    fn add(self, rhs: &FockOperator) -> FockOperator {
        FockOperator { m: &self.m + &rhs.m }
    }
}

impl Sub for &FockOperator {
    type Output = FockOperator;
    fn sub(self, rhs: &FockOperator) -> FockOperator {
        FockOperator { m: &self.m - &rhs.m }
    }
}

impl Mul for &FockOperator {
    type Output = FockOperator;
    fn mul(self, rhs: &FockOperator) -> FockOperator {
        FockOperator { m: &self.m * &rhs.m }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fock_state_basis() {
        let v = fock_state(0, 4).unwrap();
        assert_eq!(v.amplitudes()[0], C64::new(1.0, 0.0));
        assert_eq!(fock_state(3, 4).unwrap().support_extent(), 4);
        assert!(matches!(fock_state(4, 4), Err(Error::OutOfRange { index: 4, dim: 4 })));
    }

    #[test]
    fn fock_states_orthonormal() {
        for k in 0..6 {
            for s in 0..6 {
                let ip = fock_state(k, 6).unwrap().inner(&fock_state(s, 6).unwrap());
                assert_eq!(ip, C64::new(if k == s { 1.0 } else { 0.0 }, 0.0));
            }
        }
    }

    #[test]
    fn vacuum_coherent_state() {
        let c = coherent_state(C64::new(0.0, 0.0), 8);
        assert_eq!(c.vector.amplitudes()[0], C64::new(1.0, 0.0));
        assert!(c.vector.amplitudes()[1..].iter().all(|a| a.norm() == 0.0));
        assert_eq!(c.deficit, 0.0);
    }

    #[test]
    fn coherent_two_levels() {
        let c = coherent_state(C64::new(1.0, 0.0), 2);
        let e = (-0.5f64).exp();
        for a in c.vector.amplitudes() {
            assert!((a - C64::new(e, 0.0)).norm() < 1e-15);
        }
        assert!((c.deficit - (1.0 - 2.0 * (-1.0f64).exp())).abs() < 1e-14);
        assert!((c.deficit - 0.26424).abs() < 1e-5);
    }

    #[test]
    fn coherent_small_alpha_deficit() {
        let c = coherent_state(C64::new(0.5, 0.0), 32);
        assert!(c.deficit < 1e-12);
        assert!((c.vector.norm_sqr() + c.deficit - 1.0).abs() < 1e-14);
    }

    #[test]
    fn coherent_phase() {
        let alpha = C64::new(0.0, 0.5);
        let c = coherent_state(alpha, 6);
        let direct = (-alpha.norm_sqr() / 2.0).exp() * alpha.powu(3) / 6f64.sqrt();
        assert!((c.vector.amplitudes()[3] - direct).norm() < 1e-15);
    }

    #[test]
    fn coherent_deficit_monotone() {
        let alpha = C64::new(1.3, -0.4);
        let mut last = 1.0;
        for dim in 1..40 {
            let d = coherent_state(alpha, dim).deficit;
            assert!(d <= last, "dim {dim}: {d} > {last}");
            last = d;
        }
    }

    #[test]
    fn log_binomial_small() {
        assert!((log_binomial(4, 2).unwrap() - 6f64.ln()).abs() < 1e-15);
        assert_eq!(log_binomial(10, 0).unwrap(), 0.0);
        assert_eq!(log_binomial(10, 10).unwrap(), 0.0);
        assert!(log_binomial(3, 4).is_err());
    }

    #[test]
    fn log_binomial_rounds_to_exact_integers() {
        for k in 0u64..=30 {
            let mut exact: u64 = 1;
            for i in 0..=k {
                if let Some(step) = (k + 1 - i).checked_mul(exact).and_then(|x| x.checked_div(i)) {
                    exact = step;
                }
                let rounded = log_binomial(k, i).unwrap().exp().round() as u64;
                assert_eq!(rounded, exact, "C({k},{i})");
            }
        }
    }

    #[test]
    fn operator_basics() {
        let x = FockOperator::ket_bra(1, 2, 4).unwrap();
        assert_eq!(x.entry(1, 2), C64::new(1.0, 0.0));
        assert!(!x.is_hermitian(1e-12));
        let p = fock_state(1, 3).unwrap().projector();
        assert!(p.is_state());
        assert!((p.operator_norm() - 1.0).abs() < 1e-12);
        assert!(FockOperator::ket_bra(4, 0, 4).is_err());
    }

    #[test]
    fn min_eigenvalue_detects_negativity() {
        let x = FockOperator::diagonal(&[C64::new(1.5, 0.0), C64::new(-0.5, 0.0)]);
        assert!((x.min_eigenvalue() + 0.5).abs() < 1e-12);
        assert!(!x.is_state());
    }

    #[test]
    fn embed_rejects_lossy() {
        let v = fock_state(3, 5).unwrap();
        assert!(v.embedded(3).is_err());
        assert_eq!(v.embedded(8).unwrap().support_extent(), 4);
    }
}
