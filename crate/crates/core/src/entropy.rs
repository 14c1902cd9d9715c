//! Shannon, binary, von Neumann and relative entropies. Every value is in bits.

use crate::error::{Error, Result};
use crate::linalg::HermitianEigen;
use crate::qstate::DensityOperator;

/// Weights at or below this contribute nothing to an entropy (`0 log 0 = 0`).
pub const ZERO_CLAMP: f64 = 1e-12;

/// Eigenvalues of `σ` above this define its support.
pub const SUPPORT_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    /// Entries within `1e-12` outside `[0, 1]` are clamped; the sum must be 1 within `1e-9`.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let mut weights = weights;
        for w in weights.iter_mut() {
            if !w.is_finite() || *w < -ZERO_CLAMP || *w > 1.0 + ZERO_CLAMP {
                return Err(Error::InvalidProbabilities(format!("weight {w} outside [0, 1]")));
            }
            *w = w.clamp(0.0, 1.0);
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidProbabilities(format!("weights sum to {total}")));
        }
        Ok(Self(weights))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn shannon_entropy(p: &ProbabilityVector) -> f64 {
    shannon_bits(p.weights())
}

/// Unchecked Shannon entropy for hot loops.
#[inline]
pub fn shannon_bits(weights: &[f64]) -> f64 {
    weights
        .iter()
        .filter(|&&q| q > ZERO_CLAMP)
        .map(|&q| -q * q.log2())
        .sum::<f64>()
        .max(0.0)
}

pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(-ZERO_CLAMP..=1.0 + ZERO_CLAMP).contains(&p) {
        return Err(Error::DomainError(p));
    }
    let p = p.clamp(0.0, 1.0);
    Ok(shannon_bits(&[p, 1.0 - p]))
}

pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    let spectrum: Vec<f64> = rho
        .eigenvalues()
        .into_iter()
        .map(|l| l.clamp(0.0, 1.0))
        .collect();
    shannon_bits(&spectrum)
}

/// `S(ρ‖σ) = tr ρ log₂ρ − tr ρ log₂σ`, or `+∞` when the support of `ρ` leaves that of `σ`.
pub fn relative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            context: "relative entropy",
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let eig = HermitianEigen::new(sigma.matrix())?;
    let n = rho.dim();
    let outside = crate::linalg::identity(n) - eig.support_projector(SUPPORT_THRESHOLD);
    let leak = &outside * rho.matrix() * &outside;
    if crate::linalg::max_abs(&leak) > 1e-9 {
        return Ok(f64::INFINITY);
    }
    // −tr ρ log σ = −Σ_k log₂λ_k ⟨v_k|ρ|v_k⟩ over the support of σ
    let mut cross = 0.0;
    for (k, &lambda) in eig.values.iter().enumerate() {
        if lambda > SUPPORT_THRESHOLD {
            let v = eig.vectors.column(k);
            let weight = v.dotc(&(rho.matrix() * v)).re;
            cross -= weight * lambda.log2();
        }
    }
    Ok((cross - von_neumann_entropy(rho)).max(0.0))
}
