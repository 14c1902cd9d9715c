//! Seeded random states, unitaries and ensembles for sweeps, property tests and benches.

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::linalg::{c, CMatrix, CVector};
use crate::qstate::{DensityOperator, Ensemble, PureState, Signal, SubsystemPartition};

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn ginibre(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(gaussian(rng), gaussian(rng)))
}

/// Haar-random pure state.
pub fn random_pure_state(dim: usize, rng: &mut ChaCha8Rng) -> PureState {
    let v = CVector::from_fn(dim, |_, _| c(gaussian(rng), gaussian(rng)));
    PureState::normalized(v).expect("nonzero gaussian vector")
}

/// Random density operator of the given rank (induced measure from a Ginibre matrix).
pub fn random_density(dim: usize, rank: usize, rng: &mut ChaCha8Rng) -> DensityOperator {
    let g = ginibre(dim, rank.clamp(1, dim), rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let m = m.unscale(tr);
    DensityOperator::new((&m + m.adjoint()).scale(0.5)).expect("valid by construction")
}

/// Haar-random unitary via QR of a Ginibre matrix with phase-corrected `R`.
pub fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let qr = ginibre(dim, dim, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..dim {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// Flat-Dirichlet probability vector with strictly positive entries.
pub fn random_probabilities(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| Distribution::<f64>::sample(&Exp1, rng) + 1e-3).collect();
    let total: f64 = w.iter().sum();
    let mut p: Vec<f64> = w.iter().map(|x| x / total).collect();
    // absorb rounding into the last entry so the sum is 1 to machine precision
    let rest: f64 = p[..n - 1].iter().sum();
    p[n - 1] = 1.0 - rest;
    p
}

/// Random ensemble of `n` signals; each is mixed with probability `mixed_fraction`.
pub fn random_ensemble(
    dim: usize,
    n: usize,
    mixed_fraction: f64,
    partition: Option<SubsystemPartition>,
    rng: &mut ChaCha8Rng,
) -> Ensemble {
    let probs = random_probabilities(n, rng);
    let members = probs
        .into_iter()
        .map(|p| {
            let signal = if rng.random::<f64>() < mixed_fraction {
                let rank = rng.random_range(1..=dim);
                Signal::Mixed(random_density(dim, rank, rng))
            } else {
                Signal::Pure(random_pure_state(dim, rng))
            };
            (p, signal)
        })
        .collect();
    Ensemble::new(members, partition).expect("valid by construction")
}

/// Random real vector with standard normal entries.
pub fn random_real_vector(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| gaussian(rng))
}
