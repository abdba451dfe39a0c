//! Phase damping, amplitude damping and depolarizing channels, with the
//! closed-form actions used to cross-check the Kraus constructions.

use crate::channel::{ChannelFamily, KrausChannel, KrausOperator};
use crate::error::{Error, Result};
use crate::fock::{coherent_state, ln_factorial, log_binomial, FockOperator};
use crate::tolerance;
use crate::C64;

/// Hard cap on the number of phase-damping Kraus terms.
pub const MAX_PHASE_KRAUS_TERMS: usize = 1 << 16;

/// `x ln y` with `0 ln 0 = 0`.
fn xlny(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} = {v} outside [0, 1]")))
    }
}

fn check_phase_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("phase damping needs 0 < eta <= 1, got {eta}")))
    }
}

/// `ln E_i[k][k] = i ln(k √(−2 ln η)) − ½ ln i! + k² ln η`.
fn phase_kraus_log_entry(i: usize, k: usize, ln_rate: f64, ln_eta: f64) -> f64 {
    if k == 0 {
        return if i == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let kf = k as f64;
    i as f64 * (kf.ln() + ln_rate) - 0.5 * ln_factorial(i as u64) + kf * kf * ln_eta
}

/// Phase damping with diagonal Kraus operators
/// `E_i = Σ_k (k√(−2 ln η))^i / √(i!) · η^{k²} |k⟩⟨k|`.
///
/// Without an explicit `kraus_truncation`, terms are added until every level
/// of the truncated space is complete to [`tolerance::KRAUS_TAIL`]; the
/// achieved defect is kept on the channel.
pub fn phase_damping(eta: f64, dim: usize, kraus_truncation: Option<usize>) -> Result<KrausChannel> {
    check_phase_eta(eta)?;
    if dim == 0 {
        return Err(Error::domain("dim must be positive"));
    }
    let family = ChannelFamily::PhaseDamping { eta };
    if eta == 1.0 {
        let id = KrausChannel::identity(dim);
        return KrausChannel::from_kraus_operators(dim, id.kraus_operators().to_vec(), family);
    }
    let ln_eta = eta.ln();
    let ln_rate = 0.5 * (-2.0 * ln_eta).ln();
    let build = |i: usize| -> KrausOperator {
        let entries =
            (0..dim).map(|k| (k, k, C64::new(phase_kraus_log_entry(i, k, ln_rate, ln_eta).exp(), 0.0))).collect();
        KrausOperator::from_entries(dim, entries).expect("diagonal in range")
    };

    let ops = match kraus_truncation {
        Some(0) => return Err(Error::domain("kraus_truncation must be positive")),
        Some(t) => (0..t).map(build).collect(),
        None => {
            let top = (dim - 1) as f64;
            let mean_max = top * top * (-2.0 * ln_eta);
            let give_up = (mean_max + 40.0 * mean_max.sqrt() + 100.0) as usize;
            let mut completeness = vec![0.0f64; dim];
            let mut ops = Vec::new();
            for i in 0..MAX_PHASE_KRAUS_TERMS.min(give_up) {
                let op = build(i);
                for &(k, _, v) in op.entries() {
                    completeness[k] += v.norm_sqr();
                }
                ops.push(op);
                let worst = completeness.iter().map(|a| (1.0 - a).abs()).fold(0.0, f64::max);
                if worst <= tolerance::KRAUS_TAIL {
                    break;
                }
            }
            ops
        }
    };
    KrausChannel::from_kraus_operators(dim, ops, family)
}

/// Coefficient `η^{(k−s)²}` of `Φ(|k⟩⟨s|) = η^{(k−s)²} |k⟩⟨s|`.
pub fn phase_damping_closed(eta: f64, k: usize, s: usize) -> Result<f64> {
    check_phase_eta(eta)?;
    let d = k.abs_diff(s) as f64;
    Ok(eta.powf(d * d))
}

/// `√(C_k^i) η^{(k−i)/2} (1−η)^{i/2}`, the weight of `|k−i⟩⟨k|` in `E_i`.
fn amplitude_weight(k: usize, i: usize, eta: f64) -> f64 {
    let lc = log_binomial(k as u64, i as u64).expect("i <= k");
    (0.5 * lc + xlny(0.5 * (k - i) as f64, eta) + xlny(0.5 * i as f64, 1.0 - eta)).exp()
}

/// Amplitude damping with `dim` Kraus operators
/// `E_i = Σ_{k≥i} √(C_k^i) η^{(k−i)/2} (1−η)^{i/2} |k−i⟩⟨k|`.
pub fn amplitude_damping(eta: f64, dim: usize) -> Result<KrausChannel> {
    check_unit_interval("eta", eta)?;
    if dim == 0 {
        return Err(Error::domain("dim must be positive"));
    }
    let ops = (0..dim)
        .map(|i| {
            let entries = (i..dim).map(|k| (k - i, k, C64::new(amplitude_weight(k, i, eta), 0.0))).collect();
            KrausOperator::from_entries(dim, entries).expect("in range")
        })
        .collect();
    KrausChannel::from_kraus_operators(dim, ops, ChannelFamily::AmplitudeDamping { eta })
}

/// `Φ(|k⟩⟨s|) = Σ_{i≤k} √(C_k^i C_s^i) η^{(k+s)/2−i} (1−η)^i |k−i⟩⟨s−i|`
/// for `k ≤ s`; the `k > s` case is the adjoint of `(s, k)`.
pub fn amplitude_damping_closed(eta: f64, k: usize, s: usize, dim: usize) -> Result<FockOperator> {
    check_unit_interval("eta", eta)?;
    if s >= dim {
        return Err(Error::OutOfRange { index: s, dim });
    }
    if k > s {
        return Err(Error::ContractViolation(format!(
            "closed amplitude-damping action needs k <= s, got k={k}, s={s}; take the adjoint of (s, k)"
        )));
    }
    let mut out = FockOperator::zeros(dim);
    let m = out.matrix_mut();
    for i in 0..=k {
        let ln = 0.5 * (log_binomial(k as u64, i as u64)? + log_binomial(s as u64, i as u64)?)
            + xlny(0.5 * (k + s) as f64 - i as f64, eta)
            + xlny(i as f64, 1.0 - eta);
        m[(k - i, s - i)] += C64::new(ln.exp(), 0.0);
    }
    Ok(out)
}

/// Entrywise form `y_kl = Σ_i √(C_{k+i}^i C_{l+i}^i) η^{(k+l)/2} (1−η)^i x_{k+i,l+i}`,
/// with `i` running while both indices stay inside the truncation.
pub fn amplitude_damping_matrix_form(eta: f64, x: &FockOperator) -> Result<FockOperator> {
    check_unit_interval("eta", eta)?;
    let n = x.dim();
    Ok(FockOperator::from_fn(n, |k, l| {
        let base = xlny(0.5 * (k + l) as f64, eta);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n - k.max(l) {
            let ln = 0.5
                * (log_binomial((k + i) as u64, i as u64).expect("i <= k+i")
                    + log_binomial((l + i) as u64, i as u64).expect("i <= l+i"))
                + base
                + xlny(i as f64, 1.0 - eta);
            acc += x.entry(k + i, l + i) * ln.exp();
        }
        acc
    }))
}

/// `Φ(x) = p x + (1−p) Tr(x) I/N`, realized by `√p I` together with the
/// `N²` operators `√((1−p)/N) |a⟩⟨b|`.
pub fn depolarizing(p: f64, dim: usize) -> Result<KrausChannel> {
    check_unit_interval("p", p)?;
    if dim == 0 {
        return Err(Error::domain("dim must be positive"));
    }
    let mut ops = Vec::new();
    if p > 0.0 {
        let s = C64::new(p.sqrt(), 0.0);
        ops.push(KrausOperator::from_entries(dim, (0..dim).map(|k| (k, k, s)).collect())?);
    }
    if p < 1.0 {
        let s = C64::new(((1.0 - p) / dim as f64).sqrt(), 0.0);
        for a in 0..dim {
            for b in 0..dim {
                ops.push(KrausOperator::from_entries(dim, vec![(a, b, s)])?);
            }
        }
    }
    KrausChannel::from_kraus_operators(dim, ops, ChannelFamily::Depolarizing { p })
}

/// Smallest truncation at which a coherent state's deficit drops to `limit`.
fn required_coherent_dim(alpha: C64, limit: f64) -> usize {
    let mut dim = 1;
    while coherent_state(alpha, dim).deficit > limit {
        dim += 1;
    }
    dim
}

/// `Φ(|α⟩⟨β|) = |√η α⟩⟨√η β| · exp[(1−η)(−(|α|²+|β|²)/2 + α β̄)]` built from
/// truncated coherent states.
pub fn coherent_action_closed(eta: f64, alpha: C64, beta: C64, dim: usize) -> Result<FockOperator> {
    check_unit_interval("eta", eta)?;
    for z in [alpha, beta] {
        if coherent_state(z, dim).deficit > tolerance::COHERENT_DEFICIT {
            return Err(Error::Precision {
                what: format!("coherent state {z} loses more than {:e} of its weight", tolerance::COHERENT_DEFICIT),
                required_dim: required_coherent_dim(z, tolerance::COHERENT_DEFICIT),
            });
        }
    }
    let root = eta.sqrt();
    let ket = coherent_state(alpha * root, dim).vector;
    let bra = coherent_state(beta * root, dim).vector;
    let factor = ((alpha.norm_sqr() + beta.norm_sqr()) * -0.5 + alpha * beta.conj()) * (1.0 - eta);
    Ok(ket.outer(&bra).scaled(factor.exp()))
}
