//! Transmission fidelity of encoded qubits.
//!
//! A qubit encoded in `K = span{ψ₀, ψ₁}` carries the pure state
//! `ψ = cos(θ/2) ψ₀ + e^{iφ} sin(θ/2) ψ₁`; its fidelity after the channel is
//! `f(θ, φ) = ⟨ψ|Φ(|ψ⟩⟨ψ|)|ψ⟩` and the figure of merit is the uniform average
//! of `f` over the Bloch sphere.
//!
//! Writing `ψ = Σ_i a_i ψ_i`, `f` is the quartic form
//! `Σ a_i ā_j ā_k a_l T[i][j][k][l]` in the coefficients, with the transfer
//! tensor `T[i][j][k][l] = ⟨ψ_k|Φ(|ψ_i⟩⟨ψ_j|)|ψ_l⟩`. Over the sphere the only
//! surviving moments are `⟨|a_0|⁴⟩ = ⟨|a_1|⁴⟩ = 1/3` and
//! `⟨|a_0|²|a_1|²⟩ = 1/6`, which collapse to
//!
//! ```text
//! F = (1/6) Σ_{i,l} ( T[i][i][l][l] + T[i][l][i][l] )
//! ```
//!
//! [`average_fidelity_closed`] evaluates that contraction;
//! [`average_fidelity_quadrature`] integrates `f` numerically and serves as
//! its independent check.

use std::f64::consts::PI;

use crate::channel::{ChannelFamily, KrausChannel};
use crate::error::{Error, Result};
use crate::fock::{log_binomial, FockVector};
use crate::quadrature::sphere_average;
use crate::subchannel::Subspace;
use crate::tolerance;
use crate::C64;

pub const DEFAULT_QUADRATURE_NODES: usize = 16;
pub const MIN_QUADRATURE_NODES: usize = 8;

/// `T[i][j][k][l] = ⟨ψ_k|Φ(|ψ_i⟩⟨ψ_j|)|ψ_l⟩`.
pub type TransferTensor = [[[[C64; 2]; 2]; 2]; 2];

#[derive(Debug, Clone)]
pub struct EncodedQubit {
    subspace: Subspace,
    theta: f64,
    phi: f64,
}

impl EncodedQubit {
    pub fn new(subspace: Subspace, theta: f64, phi: f64) -> Result<Self> {
        if subspace.d() != 2 {
            return Err(Error::domain(format!("an encoded qubit needs d = 2, got d = {}", subspace.d())));
        }
        if !(0.0..=PI).contains(&theta) || !phi.is_finite() {
            return Err(Error::domain(format!("Bloch angles out of range: theta={theta}, phi={phi}")));
        }
        Ok(Self { subspace, theta, phi: phi.rem_euclid(2.0 * PI) })
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn state(&self) -> FockVector {
        let [b0, b1] = [&self.subspace.basis()[0], &self.subspace.basis()[1]];
        b0.scaled(C64::new((self.theta / 2.0).cos(), 0.0))
            .add_scaled(b1, C64::from_polar((self.theta / 2.0).sin(), self.phi))
            .expect("basis vectors share a dimension")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FidelityMethod {
    ClosedForm,
    Quadrature { n_theta: usize, n_phi: usize },
}

#[derive(Debug, Clone)]
pub struct FidelityReport {
    pub value: f64,
    pub method: FidelityMethod,
    /// `|closed − quadrature|` when both were evaluated.
    pub cross_check_gap: Option<f64>,
    pub channel: ChannelFamily,
    pub channel_dim: usize,
    pub kraus_terms: usize,
    pub channel_tp_defect: f64,
    pub encoding: Subspace,
}

fn clip_unit(v: f64) -> f64 {
    if (-tolerance::SPECTRAL..0.0).contains(&v) {
        0.0
    } else if v > 1.0 && v <= 1.0 + tolerance::SPECTRAL {
        1.0
    } else {
        v
    }
}

fn check_qubit(ch: &KrausChannel, k: &Subspace) -> Result<()> {
    Error::check_dim(ch.dim(), k.dim())?;
    if k.d() != 2 {
        return Err(Error::domain(format!("qubit fidelity needs d = 2, got d = {}", k.d())));
    }
    Ok(())
}

/// `f(ψ) = ⟨ψ|Φ(|ψ⟩⟨ψ|)|ψ⟩ = Σ_i |⟨ψ|E_i|ψ⟩|²` for a unit vector `ψ`.
pub(crate) fn pure_state_fidelity(ch: &KrausChannel, psi: &FockVector) -> f64 {
    ch.kraus_operators().iter().map(|e| e.sandwich(psi, psi).norm_sqr()).sum()
}

/// Fidelity of the single encoded state selected by `(θ, φ)`.
pub fn pure_fidelity(ch: &KrausChannel, q: &EncodedQubit) -> Result<f64> {
    Error::check_dim(ch.dim(), q.subspace().dim())?;
    Ok(clip_unit(pure_state_fidelity(ch, &q.state())))
}

/// Transfer tensor from Kraus matrix elements:
/// `T[i][j][k][l] = Σ_m ⟨ψ_k|E_m|ψ_i⟩ conj(⟨ψ_l|E_m|ψ_j⟩)`.
pub fn transfer_tensor(ch: &KrausChannel, k: &Subspace) -> Result<TransferTensor> {
    check_qubit(ch, k)?;
    let b = k.basis();
    let mut t = [[[[C64::new(0.0, 0.0); 2]; 2]; 2]; 2];
    for e in ch.kraus_operators() {
        // a[row][col] = ⟨ψ_row|E|ψ_col⟩
        let a = [
            [e.sandwich(&b[0], &b[0]), e.sandwich(&b[0], &b[1])],
            [e.sandwich(&b[1], &b[0]), e.sandwich(&b[1], &b[1])],
        ];
        for i in 0..2 {
            for j in 0..2 {
                for kk in 0..2 {
                    for l in 0..2 {
                        t[i][j][kk][l] += a[kk][i] * a[l][j].conj();
                    }
                }
            }
        }
    }
    Ok(t)
}

/// The same tensor from four full channel applications `Φ(|ψ_i⟩⟨ψ_j|)`.
pub fn transfer_tensor_via_apply(ch: &KrausChannel, k: &Subspace) -> Result<TransferTensor> {
    check_qubit(ch, k)?;
    let b = k.basis();
    let mut t = [[[[C64::new(0.0, 0.0); 2]; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let y = ch.apply(&b[i].outer(&b[j]))?;
            for kk in 0..2 {
                for l in 0..2 {
                    t[i][j][kk][l] = y.sandwich(&b[kk], &b[l]);
                }
            }
        }
    }
    Ok(t)
}

/// Bloch-sphere average of the quartic form defined by `t`.
pub fn contract_bloch_average(t: &TransferTensor) -> f64 {
    let pairs = [(0, 0), (0, 1), (1, 0), (1, 1)];
    let acc: C64 = pairs.iter().map(|&(i, l)| t[i][i][l][l] + t[i][l][i][l]).sum();
    acc.re / 6.0
}

fn report(ch: &KrausChannel, k: &Subspace, value: f64, method: FidelityMethod) -> FidelityReport {
    FidelityReport {
        value: clip_unit(value),
        method,
        cross_check_gap: None,
        channel: ch.family(),
        channel_dim: ch.dim(),
        kraus_terms: ch.kraus_truncation(),
        channel_tp_defect: ch.tp_defect(),
        encoding: k.clone(),
    }
}

/// Exact Bloch average from the moment contraction of the transfer tensor.
pub fn average_fidelity_closed(ch: &KrausChannel, k: &Subspace) -> Result<FidelityReport> {
    let t = transfer_tensor(ch, k)?;
    Ok(report(ch, k, contract_bloch_average(&t), FidelityMethod::ClosedForm))
}

/// Gauss–Legendre (in `cos θ`) by trapezoid (in `φ`) quadrature of `f`.
/// `f` is a trigonometric polynomial of degree 4, so 16 x 16 nodes are exact
/// up to roundoff.
pub fn average_fidelity_quadrature(
    ch: &KrausChannel,
    k: &Subspace,
    n_theta: usize,
    n_phi: usize,
) -> Result<FidelityReport> {
    check_qubit(ch, k)?;
    if n_theta < MIN_QUADRATURE_NODES || n_phi < MIN_QUADRATURE_NODES {
        return Err(Error::domain(format!(
            "quadrature needs at least {MIN_QUADRATURE_NODES} nodes per axis, got {n_theta} x {n_phi}"
        )));
    }
    let [b0, b1] = [&k.basis()[0], &k.basis()[1]];
    let value = sphere_average(n_theta, n_phi, |theta, phi| {
        let psi = b0
            .scaled(C64::new((theta / 2.0).cos(), 0.0))
            .add_scaled(b1, C64::from_polar((theta / 2.0).sin(), phi))
            .expect("same dimension");
        pure_state_fidelity(ch, &psi)
    });
    Ok(report(ch, k, value, FidelityMethod::Quadrature { n_theta, n_phi }))
}

/// Closed form with the quadrature gap attached.
pub fn average_fidelity_checked(
    ch: &KrausChannel,
    k: &Subspace,
    n_theta: usize,
    n_phi: usize,
) -> Result<FidelityReport> {
    let mut closed = average_fidelity_closed(ch, k)?;
    let quad = average_fidelity_quadrature(ch, k, n_theta, n_phi)?;
    closed.cross_check_gap = Some((closed.value - quad.value).abs());
    Ok(closed)
}

/// Encodings with a known closed-form average fidelity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceFamily {
    /// Phase damping on `span{|k⟩, |s⟩}`: `2/3 + η^{(k−s)²}/3`.
    PhaseDamping { eta: f64, k: usize, s: usize },
    /// Amplitude damping on `span{|0⟩, |1⟩}`: `1/2 + η/6 + √η/3`.
    AmplitudeDamping01 { eta: f64 },
}

impl ReferenceFamily {
    /// `phase-damping` takes `[eta, k, s]`, `amplitude-damping-01` takes `[eta]`.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self> {
        let level = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::domain(format!("level index must be a nonnegative integer, got {v}")))
            }
        };
        match (name, params) {
            ("phase-damping", &[eta, k, s]) => Ok(Self::PhaseDamping { eta, k: level(k)?, s: level(s)? }),
            ("amplitude-damping-01", &[eta]) => Ok(Self::AmplitudeDamping01 { eta }),
            _ => Err(Error::domain(format!("unknown reference family {name} with {} parameters", params.len()))),
        }
    }
}

pub fn reference_formula(family: ReferenceFamily) -> Result<f64> {
    match family {
        ReferenceFamily::PhaseDamping { eta, k, s } => {
            if !(eta > 0.0 && eta <= 1.0) || k == s {
                return Err(Error::domain(format!(
                    "phase-damping reference needs 0 < eta <= 1 and k != s (eta={eta}, k={k}, s={s})"
                )));
            }
            let d = k.abs_diff(s) as f64;
            Ok(2.0 / 3.0 + eta.powf(d * d) / 3.0)
        }
        ReferenceFamily::AmplitudeDamping01 { eta } => {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::domain(format!("eta = {eta} outside [0, 1]")));
            }
            Ok(0.5 + eta / 6.0 + eta.sqrt() / 3.0)
        }
    }
}

/// Power of `(1 − η)` attached to the `k`-photon-loss term of the
/// amplitude-damping fidelity series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesExponent {
    /// `(1 − η)^k`: one factor `(1 − η)^{k/2}` from `E_k` and one from `E_k†`.
    Corrected,
    /// `(1 − η)^{k/2}`, as the series is commonly printed.
    AsPrinted,
}

/// Average fidelity of amplitude damping on the encoding
/// `ψ₀ = Σ c_n |n⟩`, `ψ₁ = Σ d_n |n⟩`, summed term by term:
///
/// ```text
/// F = 1/6 Σ_k Σ_{n,m≥k} √(C_n^k C_m^k) η^{(n+m−2k)/2} (1−η)^{p(k)}
///       × [ c_n c̄_m (d̄_{n−k} d_{m−k} + 2 c̄_{n−k} c_{m−k})
///         + d_n d̄_m (c̄_{n−k} c_{m−k} + 2 d̄_{n−k} d_{m−k})
///         + d_n d̄_{n−k} c̄_m c_{m−k} + c_n c̄_{n−k} d̄_m d_{m−k} ]
/// ```
///
/// with `p(k) = k` for [`SeriesExponent::Corrected`]. Only the corrected
/// exponent agrees with the moment contraction; see the fidelity tests.
pub fn amplitude_damping_series_fidelity(eta: f64, c: &[C64], d: &[C64], exponent: SeriesExponent) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::domain(format!("eta = {eta} outside [0, 1]")));
    }
    let len = c.len().max(d.len());
    let zero = C64::new(0.0, 0.0);
    let cc = |n: usize| c.get(n).copied().unwrap_or(zero);
    let dd = |n: usize| d.get(n).copied().unwrap_or(zero);
    let pow = |base: f64, e: f64| if e == 0.0 { 1.0 } else { base.powf(e) };
    let mut total = C64::new(0.0, 0.0);
    for k in 0..len {
        let loss = match exponent {
            SeriesExponent::Corrected => pow(1.0 - eta, k as f64),
            SeriesExponent::AsPrinted => pow(1.0 - eta, k as f64 / 2.0),
        };
        for n in k..len {
            for m in k..len {
                let binom = (0.5 * (log_binomial(n as u64, k as u64)? + log_binomial(m as u64, k as u64)?)).exp();
                let weight = binom * pow(eta, (n + m - 2 * k) as f64 / 2.0) * loss;
                let (nk, mk) = (n - k, m - k);
                let bracket = cc(n) * cc(m).conj() * (dd(nk).conj() * dd(mk) + cc(nk).conj() * cc(mk) * 2.0)
                    + dd(n) * dd(m).conj() * (cc(nk).conj() * cc(mk) + dd(nk).conj() * dd(mk) * 2.0)
                    + dd(n) * dd(nk).conj() * cc(m).conj() * cc(mk)
                    + cc(n) * cc(nk).conj() * dd(m).conj() * dd(mk);
                total += bracket * weight;
            }
        }
    }
    Ok(total.re / 6.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{amplitude_damping, phase_damping};

    fn qubit(levels: [usize; 2], dim: usize) -> Subspace {
        Subspace::from_levels(&levels, dim).unwrap()
    }

    #[test]
    fn identity_channel_is_perfect() {
        let ch = KrausChannel::identity(4);
        let k = qubit([1, 3], 4);
        for (t, p) in [(0.0, 0.0), (1.0, 2.0), (PI, 5.0)] {
            let q = EncodedQubit::new(k.clone(), t, p).unwrap();
            assert!((pure_fidelity(&ch, &q).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!((average_fidelity_closed(&ch, &k).unwrap().value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phase_damping_pure_fidelity_matches_formula() {
        let eta: f64 = 0.6;
        let ch = phase_damping(eta, 8, None).unwrap();
        let (k, s) = (1, 3);
        for (theta, phi) in [(0.0, 0.0), (0.4, 1.0), (PI / 2.0, 3.0), (2.5, 6.0)] {
            let q = EncodedQubit::new(qubit([k, s], 8), theta, phi).unwrap();
            let (c, sn) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            let expected = c.powi(4) + sn.powi(4) + 2.0 * eta.powi(4) * c * c * sn * sn;
            assert!((pure_fidelity(&ch, &q).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn encoded_qubit_validation() {
        assert!(EncodedQubit::new(Subspace::from_levels(&[0, 1, 2], 4).unwrap(), 0.0, 0.0).is_err());
        assert!(EncodedQubit::new(qubit([0, 1], 4), 4.0, 0.0).is_err());
        let q = EncodedQubit::new(qubit([0, 1], 4), 1.0, 7.0).unwrap();
        assert!((q.state().norm_sqr() - 1.0).abs() < 1e-12);
        assert!(q.phi() < 2.0 * PI);
    }

    #[test]
    fn closed_matches_reference_values() {
        let pd = phase_damping(0.5, 8, None).unwrap();
        let v = average_fidelity_closed(&pd, &qubit([0, 1], 8)).unwrap().value;
        assert!((v - 5.0 / 6.0).abs() < 1e-12);
        let ad = amplitude_damping(0.25, 8).unwrap();
        let v = average_fidelity_closed(&ad, &qubit([0, 1], 8)).unwrap().value;
        assert!((v - 0.708_333_333_333_333_3).abs() < 1e-12);
    }

    #[test]
    fn quadrature_examples() {
        let pd = phase_damping(0.5, 8, None).unwrap();
        let v = average_fidelity_quadrature(&pd, &qubit([0, 1], 8), 16, 16).unwrap().value;
        assert!((v - 0.833_333_333_3).abs() < 1e-10);
        let ad1 = amplitude_damping(1.0, 4).unwrap();
        assert!((average_fidelity_quadrature(&ad1, &qubit([0, 1], 4), 16, 16).unwrap().value - 1.0).abs() < 1e-12);
        let ad0 = amplitude_damping(0.0, 4).unwrap();
        assert!((average_fidelity_quadrature(&ad0, &qubit([0, 1], 4), 16, 16).unwrap().value - 0.5).abs() < 1e-12);
        assert!(average_fidelity_quadrature(&ad0, &qubit([0, 1], 4), 7, 16).is_err());
    }

    #[test]
    fn checked_report_carries_gap() {
        let ad = amplitude_damping(0.4, 6).unwrap();
        let r = average_fidelity_checked(&ad, &qubit([0, 2], 6), 16, 16).unwrap();
        assert!(r.cross_check_gap.unwrap() < 1e-12);
        assert_eq!(r.method, FidelityMethod::ClosedForm);
        assert_eq!(r.kraus_terms, 6);
    }

    #[test]
    fn reference_formula_values() {
        let v = reference_formula(ReferenceFamily::PhaseDamping { eta: 0.9, k: 3, s: 5 }).unwrap();
        assert!((v - (2.0 / 3.0 + 0.9f64.powi(4) / 3.0)).abs() < 1e-15);
        assert!((v - 0.8854).abs() < 1e-4);
        assert!((reference_formula(ReferenceFamily::AmplitudeDamping01 { eta: 1.0 }).unwrap() - 1.0).abs() < 1e-15);
        let v = reference_formula(ReferenceFamily::AmplitudeDamping01 { eta: 0.25 }).unwrap();
        assert!((v - 0.708_333_33).abs() < 1e-8);
        assert!(ReferenceFamily::from_name("squeezing", &[0.5]).is_err());
        assert!(ReferenceFamily::from_name("phase-damping", &[0.5, 1.0]).is_err());
        assert_eq!(
            ReferenceFamily::from_name("phase-damping", &[0.5, 1.0, 2.0]).unwrap(),
            ReferenceFamily::PhaseDamping { eta: 0.5, k: 1, s: 2 }
        );
    }

    #[test]
    fn wrong_subspace_dimension() {
        let ch = amplitude_damping(0.5, 4).unwrap();
        assert!(average_fidelity_closed(&ch, &Subspace::from_levels(&[0, 1, 2], 4).unwrap()).is_err());
        assert!(average_fidelity_closed(&ch, &qubit([0, 1], 5)).is_err());
    }

    #[test]
    fn series_with_printed_exponent_disagrees() {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let (c, d) = ([one, zero], [zero, one]);
        let eta: f64 = 0.5;
        let truth = 0.5 + eta / 6.0 + eta.sqrt() / 3.0;
        let corrected = amplitude_damping_series_fidelity(eta, &c, &d, SeriesExponent::Corrected).unwrap();
        let printed = amplitude_damping_series_fidelity(eta, &c, &d, SeriesExponent::AsPrinted).unwrap();
        assert!((corrected - truth).abs() < 1e-14);
        // the single-loss term contributes (1−η)/6 vs √(1−η)/6
        assert!((printed - truth - ((1.0 - eta).sqrt() - (1.0 - eta)) / 6.0).abs() < 1e-14);
    }
}
