//! Subspaces `K`, the restriction `Ψ(x) = P_K Φ(x) P_K`, invariant hulls and
//! the fixed points of a channel.
//!
//! `σ(K)` is an invariant hull when every state supported on `K` is mapped
//! back onto `K`. Because `Φ` is linear it suffices to probe the `d²`
//! operators `|b_i⟩⟨b_j|` spanning the operators on `K`. The restriction is a
//! subchannel exactly when it is trace preserving, i.e. when
//! `P_K Φ*(P_K) P_K = P_K`.
//!
//! All verdicts are relative to the truncated channel: reports carry the
//! channel's completeness defect on the levels `K` touches.

use nalgebra::DMatrix;

use crate::channel::{superoperator_of, KrausChannel, Superoperator};
use crate::error::{Error, Result};
use crate::fock::{coherent_state, fock_state, FockOperator, FockVector};
use crate::tolerance::{self, Tolerances};
use crate::C64;

/// An ordered orthonormal basis `b_0, …, b_{d−1}` inside `dim` levels.
#[derive(Debug, Clone)]
pub struct Subspace {
    dim: usize,
    basis: Vec<FockVector>,
}

impl Subspace {
    pub fn new(basis: Vec<FockVector>) -> Result<Self> {
        let dim = basis.first().map(FockVector::dim).ok_or_else(|| Error::domain("empty basis"))?;
        for v in &basis {
            Error::check_dim(dim, v.dim())?;
        }
        if basis.len() > dim {
            return Err(Error::domain(format!("{} basis vectors in {dim} levels", basis.len())));
        }
        for (i, v) in basis.iter().enumerate() {
            let defect = (v.norm_sqr() - 1.0).abs();
            if defect > tolerance::CONSTRAINT {
                return Err(Error::Normalization { index: i, defect });
            }
        }
        for i in 0..basis.len() {
            for j in i + 1..basis.len() {
                let overlap = basis[i].inner(&basis[j]).norm();
                if overlap > tolerance::CONSTRAINT {
                    return Err(Error::Orthogonality { overlap });
                }
            }
        }
        Ok(Self { dim, basis })
    }

    /// `span{|k⟩ : k ∈ levels}` in that order.
    pub fn from_levels(levels: &[usize], dim: usize) -> Result<Self> {
        let basis = levels.iter().map(|&k| fock_state(k, dim)).collect::<Result<Vec<_>>>()?;
        Self::new(basis).map_err(|e| match e {
            Error::Orthogonality { .. } => Error::domain(format!("repeated level in {levels:?}")),
            other => other,
        })
    }

    /// Even and odd cat states `N±(|α⟩ ± |−α⟩)`, normalized on the truncation.
    pub fn cat_states(alpha: C64, dim: usize) -> Result<Self> {
        let plus = coherent_state(alpha, dim);
        if plus.deficit > tolerance::COHERENT_DEFICIT {
            return Err(Error::Precision {
                what: format!("coherent state {alpha} is truncated too hard for cat states"),
                required_dim: (1..)
                    .find(|&n| coherent_state(alpha, n).deficit <= tolerance::COHERENT_DEFICIT)
                    .unwrap_or(dim),
            });
        }
        let minus = coherent_state(-alpha, dim);
        let one = C64::new(1.0, 0.0);
        let even = plus.vector.add_scaled(&minus.vector, one)?.normalized()?;
        let odd = plus.vector.add_scaled(&minus.vector, -one)?.normalized()?;
        Self::new(vec![even, odd])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Subspace dimension `d`.
    pub fn d(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[FockVector] {
        &self.basis
    }

    pub fn projector(&self) -> FockOperator {
        let mut p = FockOperator::zeros(self.dim);
        for b in &self.basis {
            p = &p + &b.projector();
        }
        p
    }

    /// Number of leading levels that carry every basis vector.
    pub fn support_extent(&self) -> usize {
        self.basis.iter().map(FockVector::support_extent).max().unwrap_or(0)
    }

    pub fn embedded(&self, dim: usize) -> Result<Self> {
        let basis = self.basis.iter().map(|b| b.embedded(dim)).collect::<Result<Vec<_>>>()?;
        Self::new(basis)
    }

    /// Same span, basis `b'_j = Σ_i U_ij b_i` for a `d x d` unitary `U`.
    pub fn rotated(&self, u: &DMatrix<C64>) -> Result<Self> {
        Error::check_dim(self.d(), u.nrows())?;
        Error::check_dim(self.d(), u.ncols())?;
        let basis = (0..self.d())
            .map(|j| {
                self.basis
                    .iter()
                    .enumerate()
                    .try_fold(FockVector::zeros(self.dim), |acc, (i, b)| acc.add_scaled(b, u[(i, j)]))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(basis)
    }

    /// `Tr(P_self P_other) / d_self`; 1 when `self ⊆ other`.
    pub fn overlap(&self, other: &Subspace) -> Result<f64> {
        Error::check_dim(self.dim, other.dim)?;
        let weight: f64 = self.basis.iter().flat_map(|a| other.basis.iter().map(move |b| a.inner(b).norm_sqr())).sum();
        Ok(weight / self.d() as f64)
    }
}

/// `P_K = Σ_j |b_j⟩⟨b_j|`.
pub fn projector(k: &Subspace) -> FockOperator {
    k.projector()
}

/// The compressed map `x ↦ P_K Φ(x) P_K` on operators supported on `K`.
#[derive(Debug, Clone)]
pub struct RestrictedChannel<'a> {
    channel: &'a KrausChannel,
    subspace: &'a Subspace,
    projector: FockOperator,
}

impl RestrictedChannel<'_> {
    pub fn subspace(&self) -> &Subspace {
        self.subspace
    }

    pub fn projector(&self) -> &FockOperator {
        &self.projector
    }

    pub fn apply(&self, x: &FockOperator) -> Result<FockOperator> {
        Error::check_dim(self.projector.dim(), x.dim())?;
        let p = &self.projector;
        let off_support = (x - &(&(p * x) * p)).hs_norm();
        if off_support > tolerance::SPECTRAL {
            return Err(Error::ContractViolation(format!("input has weight {off_support:.3e} outside the subspace")));
        }
        let y = self.channel.apply(x)?;
        Ok(&(p * &y) * p)
    }
}

pub fn restrict<'a>(ch: &'a KrausChannel, k: &'a Subspace) -> Result<RestrictedChannel<'a>> {
    Error::check_dim(ch.dim(), k.dim())?;
    Ok(RestrictedChannel { channel: ch, subspace: k, projector: k.projector() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HullReport {
    pub is_invariant_hull: bool,
    /// Largest `‖Φ(x) − P_K Φ(x) P_K‖` (operator norm) over the probes.
    pub max_leakage: f64,
    /// Same, in Hilbert–Schmidt norm.
    pub max_leakage_hs: f64,
    pub probed_inputs: usize,
    /// Trace preserving on `K` and `Ψ(P_K) = P_K`.
    pub is_unital_subchannel: bool,
    /// `‖P_K Φ*(P_K) P_K − P_K‖`.
    pub unitality_defect: f64,
    /// `‖P_K Φ(P_K) P_K − P_K‖`.
    pub output_unitality_defect: f64,
    /// Completeness defect of the truncated channel on the levels `K` touches.
    pub channel_block_defect: f64,
}

pub fn invariant_hull_check(ch: &KrausChannel, k: &Subspace) -> Result<HullReport> {
    invariant_hull_check_with(ch, k, &Tolerances::default())
}

pub fn invariant_hull_check_with(ch: &KrausChannel, k: &Subspace, tol: &Tolerances) -> Result<HullReport> {
    Error::check_dim(ch.dim(), k.dim())?;
    let block = k.support_extent().max(1);
    let channel_block_defect = ch.tp_defect_on_block(block);
    if channel_block_defect > tol.hull_channel_defect {
        return Err(Error::TruncationDefect { block, defect: channel_block_defect, limit: tol.hull_channel_defect });
    }
    let p = k.projector();
    let mut max_leakage = 0.0f64;
    let mut max_leakage_hs = 0.0f64;
    for bi in k.basis() {
        for bj in k.basis() {
            let y = ch.apply(&bi.outer(bj))?;
            let leak = &y - &(&(&p * &y) * &p);
            max_leakage = max_leakage.max(leak.operator_norm());
            max_leakage_hs = max_leakage_hs.max(leak.hs_norm());
        }
    }
    let unital = unitality_check_with(ch, k, tol)?;
    Ok(HullReport {
        is_invariant_hull: max_leakage <= tol.hull_leakage,
        max_leakage,
        max_leakage_hs,
        probed_inputs: k.d() * k.d(),
        is_unital_subchannel: unital.holds && unital.output_holds,
        unitality_defect: unital.defect,
        output_unitality_defect: unital.output_defect,
        channel_block_defect,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitalityCheck {
    /// `‖P_K Φ*(P_K) P_K − P_K‖` in operator norm; zero iff `Ψ` is trace preserving.
    pub defect: f64,
    pub holds: bool,
    /// `‖P_K Φ(P_K) P_K − P_K‖`; zero iff `Ψ` maps `P_K/d` to itself.
    pub output_defect: f64,
    pub output_holds: bool,
}

pub fn unitality_check(ch: &KrausChannel, k: &Subspace) -> Result<UnitalityCheck> {
    unitality_check_with(ch, k, &Tolerances::default())
}

pub fn unitality_check_with(ch: &KrausChannel, k: &Subspace, tol: &Tolerances) -> Result<UnitalityCheck> {
    Error::check_dim(ch.dim(), k.dim())?;
    let p = k.projector();
    let back = ch.adjoint_apply(&p)?;
    let diff = &(&(&p * &back) * &p) - &p;
    let defect = crate::channel::hermitian_norm(&diff);
    let out = ch.apply(&p)?;
    let out_diff = &(&(&p * &out) * &p) - &p;
    let output_defect = crate::channel::hermitian_norm(&out_diff);
    Ok(UnitalityCheck {
        defect,
        holds: defect <= tol.unitality,
        output_defect,
        output_holds: output_defect <= tol.unitality,
    })
}

/// Hilbert–Schmidt orthonormal basis of `{x : Φ(x) = x}`, read off the right
/// singular vectors of `S − I` whose singular values fall below `tol`.
pub fn fixed_point_space(ch: &KrausChannel, tol: f64) -> Result<Vec<FockOperator>> {
    let sup = superoperator_of(ch)?;
    let n2 = sup.dim() * sup.dim();
    let shifted = sup.matrix() - DMatrix::<C64>::identity(n2, n2);
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::Resource("singular vectors unavailable".into()))?;
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= tol)
        .map(|(j, _)| Superoperator::unstack(&v_t.row(j).adjoint(), sup.dim()))
        .collect()
}
