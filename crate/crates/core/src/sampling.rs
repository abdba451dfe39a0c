//! Seeded random operators for sampled self checks and tests.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::fock::{FockOperator, FockVector};
use crate::C64;

fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Density matrix `G G† / Tr(G G†)` supported on the first `block` levels.
pub fn random_state(rng: &mut impl Rng, dim: usize, block: usize) -> FockOperator {
    let b = block.clamp(1, dim);
    let g = ginibre(rng, b, b);
    let mut rho = &g * g.adjoint();
    let tr = rho.trace();
    rho /= tr;
    FockOperator::new(rho).expect("square").embedded(dim)
}

pub fn random_hermitian(rng: &mut impl Rng, dim: usize) -> FockOperator {
    let g = ginibre(rng, dim, dim);
    FockOperator::new((&g + g.adjoint()) * C64::new(0.5, 0.0)).expect("square")
}

pub fn random_operator(rng: &mut impl Rng, dim: usize) -> FockOperator {
    FockOperator::new(ginibre(rng, dim, dim)).expect("square")
}

/// Unit vector supported on the first `block` levels.
pub fn random_unit_vector(rng: &mut impl Rng, dim: usize, block: usize) -> FockVector {
    let b = block.clamp(1, dim);
    let amps: Vec<C64> = (0..dim).map(|k| if k < b { gaussian(rng) } else { C64::new(0.0, 0.0) }).collect();
    FockVector::new(amps).expect("nonempty").normalized().expect("nonzero")
}

/// Haar-like unitary from the QR factor of a Ginibre matrix.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> DMatrix<C64> {
    let qr = ginibre(rng, n, n).qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}
