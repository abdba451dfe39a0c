//! Completely positive maps in Kraus form.
//!
//! A [`KrausChannel`] holds a finite list `{E_i}` and acts as
//! `Φ(x) = Σ_i E_i x E_i†`; its adjoint under the trace pairing is
//! `Φ*(x) = Σ_i E_i† x E_i`. Kraus operators are stored as coordinate lists:
//! the damping families are diagonal or single-shift matrices, and phase
//! damping at small `η` needs thousands of terms.
//!
//! Superoperators use column stacking: `vec(x)[k + N·s] = x[k][s]`, so that
//! `vec(A x B) = (Bᵀ ⊗ A) vec(x)` and `vec(Φ(x)) = (Σ_i conj(E_i) ⊗ E_i) vec(x)`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::{FockOperator, FockVector};
use crate::sampling;
use crate::tolerance;
use crate::C64;

/// Largest truncation for which a dense `N² x N²` superoperator is built.
pub const MAX_SUPEROPERATOR_DIM: usize = 64;

pub const DEFAULT_VERIFY_SEED: u64 = 0x5eed_c0de;
pub const DEFAULT_VERIFY_SAMPLES: usize = 20;

/// A Kraus operator in coordinate form, entries sorted by `(row, col)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausOperator {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl KrausOperator {
    /// Duplicate coordinates are summed; exact zeros are dropped.
    pub fn from_entries(dim: usize, mut entries: Vec<(usize, usize, C64)>) -> Result<Self> {
        for &(r, c, _) in &entries {
            if r >= dim || c >= dim {
                return Err(Error::OutOfRange { index: r.max(c), dim });
            }
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|e| e.2 != C64::new(0.0, 0.0));
        Ok(Self { dim, entries: merged })
    }

    pub fn from_dense(op: &FockOperator) -> Self {
        let n = op.dim();
        let mut entries = Vec::new();
        for r in 0..n {
            for c in 0..n {
                let v = op.entry(r, c);
                if v != C64::new(0.0, 0.0) {
                    entries.push((r, c, v));
                }
            }
        }
        Self { dim: n, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_dense(&self) -> FockOperator {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] = v;
        }
        FockOperator::new(m).expect("square")
    }

    /// `⟨u|E|v⟩`.
    pub fn sandwich(&self, u: &FockVector, v: &FockVector) -> C64 {
        let (ua, va) = (u.amplitudes(), v.amplitudes());
        self.entries.iter().map(|&(r, c, e)| ua[r].conj() * e * va[c]).sum()
    }

    pub fn apply_to(&self, v: &FockVector) -> FockVector {
        let va = v.amplitudes();
        let mut out = DVector::zeros(self.dim);
        for &(r, c, e) in &self.entries {
            out[r] += e * va[c];
        }
        FockVector::from_dvector(out)
    }

    fn adjoint_entries(&self) -> Vec<(usize, usize, C64)> {
        self.entries.iter().map(|&(r, c, v)| (c, r, v.conj())).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelFamily {
    PhaseDamping { eta: f64 },
    AmplitudeDamping { eta: f64 },
    Depolarizing { p: f64 },
    Custom,
}

impl ChannelFamily {
    pub fn tag(&self) -> &'static str {
        match self {
            ChannelFamily::PhaseDamping { .. } => "phase-damping",
            ChannelFamily::AmplitudeDamping { .. } => "amplitude-damping",
            ChannelFamily::Depolarizing { .. } => "depolarizing",
            ChannelFamily::Custom => "custom",
        }
    }

    /// Damping parameter; `None` for depolarizing and custom channels.
    pub fn eta(&self) -> Option<f64> {
        match *self {
            ChannelFamily::PhaseDamping { eta } | ChannelFamily::AmplitudeDamping { eta } => Some(eta),
            _ => None,
        }
    }
}

impl fmt::Display for ChannelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ChannelFamily::PhaseDamping { eta } => write!(f, "phase-damping(eta={eta})"),
            ChannelFamily::AmplitudeDamping { eta } => write!(f, "amplitude-damping(eta={eta})"),
            ChannelFamily::Depolarizing { p } => write!(f, "depolarizing(p={p})"),
            ChannelFamily::Custom => f.write_str("custom"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct KrausChannel {
    dim: usize,
    kraus: Vec<KrausOperator>,
    family: ChannelFamily,
    tp_defect: f64,
    /// `M[a][c] = Σ_i E_i[a][a] conj(E_i[c][c])` when every `E_i` is diagonal,
    /// so that `Φ(x) = M ∘ x` entrywise.
    schur: Option<DMatrix<C64>>,
}

impl KrausChannel {
    /// Custom channel from dense Kraus operators.
    pub fn new(kraus: Vec<FockOperator>) -> Result<Self> {
        let dim = kraus.first().map(FockOperator::dim).ok_or_else(|| Error::domain("empty Kraus list"))?;
        let ops = kraus
            .iter()
            .map(|op| Error::check_dim(dim, op.dim()).map(|_| KrausOperator::from_dense(op)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_kraus_operators(dim, ops, ChannelFamily::Custom)
    }

    pub fn from_kraus_operators(dim: usize, kraus: Vec<KrausOperator>, family: ChannelFamily) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::domain("empty Kraus list"));
        }
        for op in &kraus {
            Error::check_dim(dim, op.dim())?;
        }
        let schur = kraus.iter().all(|op| op.entries.iter().all(|e| e.0 == e.1)).then(|| {
            let mut m = DMatrix::<C64>::zeros(dim, dim);
            for op in &kraus {
                for &(a, _, v) in &op.entries {
                    for &(c, _, w) in &op.entries {
                        m[(a, c)] += v * w.conj();
                    }
                }
            }
            m
        });
        let mut ch = Self { dim, kraus, family, tp_defect: 0.0, schur };
        ch.tp_defect = ch.tp_defect_on_block(dim);
        Ok(ch)
    }

    /// The identity channel, `{I}`.
    pub fn identity(dim: usize) -> Self {
        let op = KrausOperator::from_entries(dim, (0..dim).map(|k| (k, k, C64::new(1.0, 0.0))).collect())
            .expect("diagonal in range");
        Self::from_kraus_operators(dim, vec![op], ChannelFamily::Custom).expect("nonempty")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> ChannelFamily {
        self.family
    }

    pub fn eta(&self) -> Option<f64> {
        self.family.eta()
    }

    pub fn kraus_operators(&self) -> &[KrausOperator] {
        &self.kraus
    }

    /// Number of Kraus terms kept.
    pub fn kraus_truncation(&self) -> usize {
        self.kraus.len()
    }

    pub fn kraus_dense(&self, i: usize) -> Option<FockOperator> {
        self.kraus.get(i).map(KrausOperator::to_dense)
    }

    /// `‖Σ_i E_i† E_i − I‖` on the full truncated space.
    pub fn tp_defect(&self) -> f64 {
        self.tp_defect
    }

    /// `Σ_i E_i† E_i`.
    pub fn completeness(&self) -> FockOperator {
        let n = self.dim;
        let mut acc = DMatrix::<C64>::zeros(n, n);
        for op in &self.kraus {
            // (E†E)[b][d] = Σ_a conj(E[a][b]) E[a][d]; entries are row-sorted
            for row in op.entries.chunk_by(|x, y| x.0 == y.0) {
                for &(_, b, v) in row {
                    let vc = v.conj();
                    for &(_, d, w) in row {
                        acc[(b, d)] += vc * w;
                    }
                }
            }
        }
        FockOperator::new(acc).expect("square")
    }

    /// Operator-norm defect of `Σ E_i†E_i − I` on the top-left `block` levels.
    pub fn tp_defect_on_block(&self, block: usize) -> f64 {
        let b = block.clamp(1, self.dim);
        let diff = &self.completeness().block(b) - &FockOperator::identity(b);
        hermitian_norm(&diff)
    }

    pub fn apply(&self, x: &FockOperator) -> Result<FockOperator> {
        Error::check_dim(self.dim, x.dim())?;
        Ok(self.kraus_sum(x, false))
    }

    pub fn adjoint_apply(&self, x: &FockOperator) -> Result<FockOperator> {
        Error::check_dim(self.dim, x.dim())?;
        Ok(self.kraus_sum(x, true))
    }

    fn kraus_sum(&self, x: &FockOperator, adjoint: bool) -> FockOperator {
        let n = self.dim;
        let xm = x.matrix();
        if let Some(m) = &self.schur {
            let y = DMatrix::from_fn(n, n, |a, c| if adjoint { m[(a, c)].conj() } else { m[(a, c)] } * xm[(a, c)]);
            return FockOperator::new(y).expect("square");
        }
        let mut y = DMatrix::<C64>::zeros(n, n);
        for op in &self.kraus {
            let adj;
            let entries: &[(usize, usize, C64)] = if adjoint {
                adj = op.adjoint_entries();
                &adj
            } else {
                &op.entries
            };
            if entries.len() <= 2 * n {
                // y[a][c] += A[a][b] x[b][d] conj(A[c][d]); the pair coefficient
                // is formed first so hermitian inputs give exactly hermitian output
                for &(a, b, v) in entries {
                    for &(c, d, w) in entries {
                        y[(a, c)] += v * w.conj() * xm[(b, d)];
                    }
                }
            } else {
                let mut a = DMatrix::<C64>::zeros(n, n);
                for &(r, c, v) in entries {
                    a[(r, c)] = v;
                }
                y += &a * xm * a.adjoint();
            }
        }
        FockOperator::new(y).expect("square")
    }
}

/// Operator norm of a (numerically) hermitian matrix via its spectrum.
pub(crate) fn hermitian_norm(x: &FockOperator) -> f64 {
    let h = (x.matrix() + x.matrix().adjoint()) * C64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().fold(0.0f64, |m, e| m.max(e.abs()))
}

/// `Φ(x) = Σ_i E_i x E_i†`.
pub fn apply_channel(ch: &KrausChannel, x: &FockOperator) -> Result<FockOperator> {
    ch.apply(x)
}

/// `Φ*(x) = Σ_i E_i† x E_i`.
pub fn adjoint_apply(ch: &KrausChannel, x: &FockOperator) -> Result<FockOperator> {
    ch.adjoint_apply(x)
}

#[derive(Debug, Clone)]
pub struct ChannelVerification {
    pub block: usize,
    /// `‖Σ E_i†E_i − I‖` restricted to the block.
    pub tp_defect: f64,
    /// Worst hermiticity defect of `Φ(x)` over unit-norm hermitian samples.
    pub hermiticity_defect: f64,
    /// Smallest eigenvalue of `Φ(ρ)` over sampled states on the block.
    pub min_output_eigenvalue: f64,
    pub samples: usize,
    pub seed: u64,
    pub tp_ok: bool,
    pub hermiticity_ok: bool,
    pub positivity_ok: bool,
}

impl ChannelVerification {
    pub fn passed(&self) -> bool {
        self.tp_ok && self.hermiticity_ok && self.positivity_ok
    }
}

pub fn verify_channel(ch: &KrausChannel, block: usize) -> Result<ChannelVerification> {
    verify_channel_seeded(ch, block, DEFAULT_VERIFY_SEED, DEFAULT_VERIFY_SAMPLES)
}

/// Defects above tolerance are reported, never raised.
pub fn verify_channel_seeded(
    ch: &KrausChannel,
    block: usize,
    seed: u64,
    samples: usize,
) -> Result<ChannelVerification> {
    if block == 0 || block > ch.dim() {
        return Err(Error::OutOfRange { index: block, dim: ch.dim() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tp_defect = ch.tp_defect_on_block(block);
    let mut herm = 0.0f64;
    let mut min_eig = f64::INFINITY;
    for _ in 0..samples {
        let h = sampling::random_hermitian(&mut rng, block).embedded(ch.dim());
        let h = h.scaled(C64::new(1.0 / h.hs_norm(), 0.0));
        herm = herm.max(ch.apply(&h)?.hermiticity_defect());
        let rho = sampling::random_state(&mut rng, ch.dim(), block);
        min_eig = min_eig.min(ch.apply(&rho)?.min_eigenvalue());
    }
    Ok(ChannelVerification {
        block,
        tp_defect,
        hermiticity_defect: herm,
        min_output_eigenvalue: min_eig,
        samples,
        seed,
        tp_ok: tp_defect <= tolerance::SPECTRAL,
        hermiticity_ok: herm <= tolerance::STRUCTURAL,
        positivity_ok: samples == 0 || min_eig >= -tolerance::SPECTRAL,
    })
}

/// Dense linearization of a channel on column-stacked operators.
#[derive(Debug, Clone)]
pub struct Superoperator {
    dim: usize,
    matrix: DMatrix<C64>,
}

impl Superoperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn stack(x: &FockOperator) -> DVector<C64> {
        DVector::from_column_slice(x.matrix().as_slice())
    }

    pub fn unstack(v: &DVector<C64>, dim: usize) -> Result<FockOperator> {
        Error::check_dim(dim * dim, v.len())?;
        FockOperator::new(DMatrix::from_column_slice(dim, dim, v.as_slice()))
    }

    pub fn apply(&self, x: &FockOperator) -> Result<FockOperator> {
        Error::check_dim(self.dim, x.dim())?;
        Self::unstack(&(&self.matrix * Self::stack(x)), self.dim)
    }
}

/// `Σ_i conj(E_i) ⊗ E_i`; refused above [`MAX_SUPEROPERATOR_DIM`] levels.
pub fn superoperator_of(ch: &KrausChannel) -> Result<Superoperator> {
    let n = ch.dim();
    if n > MAX_SUPEROPERATOR_DIM {
        return Err(Error::Resource(format!(
            "superoperator on {n} levels needs a {}x{} matrix; truncate to at most {MAX_SUPEROPERATOR_DIM} levels",
            n * n,
            n * n
        )));
    }
    let mut s = DMatrix::<C64>::zeros(n * n, n * n);
    for op in ch.kraus_operators() {
        for &(r1, c1, v) in op.entries() {
            for &(r2, c2, w) in op.entries() {
                s[(r1 + n * r2, c1 + n * c2)] += v * w.conj();
            }
        }
    }
    Ok(Superoperator { dim: n, matrix: s })
}
