//! The quantumness measure `Q`: entropy produced by dephasing an ensemble in a
//! distinguishable basis, minimized over a basis family.
//!
//! `Q` is reported as an upper bound unless it can be certified. Two certificates
//! exist: the average entanglement entropy of a full-span pure bipartite
//! ensemble (a lower bound that every product basis respects), and for a single
//! qubit an exhaustive grid over all bases.

use serde::{Deserialize, Serialize};

use crate::basis::{self, BasisFamily, DistinguishabilityStatus, MeasurementBasis};
use crate::entropy;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, ZERO};
use crate::optimizer::{self, Mode, OptimizerConfig, OptimizerTrace};
use crate::qstate::{self, DensityOperator, Ensemble, Signal};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureConfig {
    pub optimizer: OptimizerConfig,
    /// Attempt to certify the optimizer value as exact.
    pub certify: bool,
    pub certification_tol: f64,
    pub overlap_tol: f64,
    /// Step of the qubit grid oracle, in radians.
    pub grid_resolution: f64,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerConfig::default(),
            certify: true,
            certification_tol: 1e-4,
            overlap_tol: basis::DEFAULT_OVERLAP_TOL,
            grid_resolution: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    UpperBound,
    Exact,
}

#[derive(Debug, Clone, Serialize)]
pub struct QReport {
    pub value: f64,
    pub direction: Direction,
    pub family: String,
    pub achieving_basis: MeasurementBasis,
    pub basis_status: DistinguishabilityStatus,
    pub lower_bound: Option<f64>,
    pub lower_bound_source: String,
    pub optimizer_trace: OptimizerTrace,
    /// The raw optimum was below `-1e-6` before clamping to zero.
    pub negative_clamped: bool,
}

impl QReport {
    pub fn budget_exhausted(&self) -> bool {
        self.optimizer_trace.budget_exhausted
    }
}

enum PreparedSignal {
    Pure(CVector),
    Mixed(CMatrix),
}

/// Entropy production `Σ_x p_x [H(p_{·|x}) − S(ρ_x)]` as a reusable objective. Signal
/// entropies are computed once.
pub struct ProductionObjective {
    dim: usize,
    weights: Vec<f64>,
    signals: Vec<PreparedSignal>,
    signal_entropies: Vec<f64>,
}

impl ProductionObjective {
    pub fn new(ensemble: &Ensemble) -> Self {
        let signals = ensemble
            .members()
            .iter()
            .map(|m| match &m.signal {
                Signal::Pure(psi) => PreparedSignal::Pure(psi.amplitudes().clone()),
                Signal::Mixed(rho) => PreparedSignal::Mixed(rho.matrix().clone()),
            })
            .collect();
        Self {
            dim: ensemble.dim(),
            weights: ensemble.priors(),
            signals,
            signal_entropies: ensemble.members().iter().map(|m| m.signal.entropy()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Click probabilities of signal `x` in the basis with columns `u`.
    fn clicks(&self, x: usize, u: &CMatrix, out: &mut [f64]) {
        match &self.signals[x] {
            PreparedSignal::Pure(psi) => {
                let amps = u.ad_mul(psi);
                for (o, a) in out.iter_mut().zip(amps.iter()) {
                    *o = a.norm_sqr();
                }
            }
            PreparedSignal::Mixed(rho) => {
                let w = rho * u;
                for (i, o) in out.iter_mut().enumerate() {
                    let mut acc = ZERO;
                    for k in 0..self.dim {
                        acc += u[(k, i)].conj() * w[(k, i)];
                    }
                    *o = acc.re;
                }
            }
        }
    }

    pub fn evaluate(&self, basis: &MeasurementBasis) -> f64 {
        let u = basis.matrix();
        let mut clicks = vec![0.0; u.ncols()];
        let mut total = 0.0;
        for x in 0..self.signals.len() {
            self.clicks(x, u, &mut clicks);
            total += self.weights[x] * (entropy::shannon_bits(&clicks) - self.signal_entropies[x]);
        }
        total
    }
}

fn check_dims(ensemble: &Ensemble, basis: &MeasurementBasis) -> Result<()> {
    if ensemble.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            context: "basis vs ensemble",
            expected: ensemble.dim(),
            found: basis.dim(),
        });
    }
    Ok(())
}

/// Average entropy produced by dephasing every signal in `basis`. Not clamped.
pub fn entropy_production(ensemble: &Ensemble, basis: &MeasurementBasis) -> Result<f64> {
    check_dims(ensemble, basis)?;
    Ok(ProductionObjective::new(ensemble).evaluate(basis))
}

/// Entropy production computed as `Σ_x p_x S(ρ_x ‖ σ_x)` with `σ_x` the dephased signal,
/// restricted to the basis vectors that overlap the ensemble support.
pub fn classical_distance(ensemble: &Ensemble, basis: &MeasurementBasis) -> Result<f64> {
    classical_distance_with_tol(ensemble, basis, basis::DEFAULT_OVERLAP_TOL)
}

pub fn classical_distance_with_tol(ensemble: &Ensemble, basis: &MeasurementBasis, overlap_tol: f64) -> Result<f64> {
    check_dims(ensemble, basis)?;
    let kept = basis::support_overlap_filter(basis, ensemble, overlap_tol)?;
    let vectors: Vec<CVector> = kept.iter().map(|&i| basis.vector(i)).collect();
    let mut total = 0.0;
    for member in ensemble.members() {
        let rho = member.signal.density();
        let mut sigma = CMatrix::zeros(ensemble.dim(), ensemble.dim());
        for a in &vectors {
            let weight = a.dotc(&(rho.matrix() * a)).re.max(0.0);
            sigma += (a * a.adjoint()).scale(weight);
        }
        let d = entropy::relative_entropy(&rho, &DensityOperator::from_matrix_unchecked(sigma))?;
        if d.is_infinite() {
            return Ok(f64::INFINITY);
        }
        total += member.probability * d;
    }
    Ok(total)
}

/// `Σ_x p_x E(ψ_x)` with `E` the entanglement entropy; a lower bound on `Q` for pure
/// bipartite ensembles whose supports span the whole space.
pub fn avg_entanglement_lower_bound(ensemble: &Ensemble) -> Result<f64> {
    let partition = ensemble.partition().ok_or(Error::MissingPartition)?;
    partition.require_bipartite()?;
    let pure = ensemble
        .members()
        .iter()
        .enumerate()
        .map(|(index, m)| m.signal.as_pure().ok_or(Error::NotPure { index }))
        .collect::<Result<Vec<_>>>()?;
    let rank = ensemble.support_rank();
    if rank != ensemble.dim() {
        return Err(Error::NotFullSpan {
            rank,
            dim: ensemble.dim(),
        });
    }
    let mut total = 0.0;
    for (m, psi) in ensemble.members().iter().zip(&pure) {
        total += m.probability * qstate::entanglement_entropy(psi, partition)?;
    }
    Ok(total)
}

/// Upgrades `upper` to exact when it is within `tol` of `lower`; records `lower` either way.
pub fn certify(upper: QReport, lower: f64, tol: f64) -> QReport {
    certify_with_source(upper, lower, tol, "supplied")
}

fn certify_with_source(mut upper: QReport, lower: f64, tol: f64, source: &str) -> QReport {
    upper.lower_bound = Some(lower);
    upper.lower_bound_source = source.to_string();
    if upper.value - lower <= tol && !upper.budget_exhausted() {
        upper.direction = Direction::Exact;
    }
    upper
}

pub(crate) fn require_partition(ensemble: &Ensemble, family: &BasisFamily) -> Result<()> {
    if let BasisFamily::LocalProduct(p) = family {
        let own = ensemble.partition().ok_or(Error::MissingPartition)?;
        if own != p {
            return Err(Error::InvalidPartition(format!(
                "family partition {:?} differs from ensemble partition {:?}",
                p.local_dims(),
                own.local_dims()
            )));
        }
    }
    family.check_dim(ensemble.dim())
}

/// Minimum entropy production over `family`, certified when possible.
pub fn quantum_correlation(ensemble: &Ensemble, family: &BasisFamily, cfg: &MeasureConfig) -> Result<QReport> {
    require_partition(ensemble, family)?;
    let objective = ProductionObjective::new(ensemble);
    let eval = |b: &MeasurementBasis| objective.evaluate(b);
    let opt = optimizer::minimize(&eval, family, ensemble.dim(), &cfg.optimizer)?;
    let negative_clamped = opt.value < -1e-6;
    let report = QReport {
        value: opt.value.max(0.0),
        direction: Direction::UpperBound,
        family: family.kind_name().to_string(),
        basis_status: basis::distinguishability_status(&opt.basis, family, ensemble),
        achieving_basis: opt.basis,
        lower_bound: None,
        lower_bound_source: String::new(),
        optimizer_trace: opt.trace,
        negative_clamped,
    };
    if !cfg.certify {
        return Ok(report);
    }
    match family {
        BasisFamily::FullUnitary if ensemble.dim() == 2 => {
            let grid = optimizer::qubit_grid_oracle(
                &eval,
                2,
                cfg.grid_resolution,
                Mode::Minimize,
                cfg.optimizer.execution,
            )?;
            let source = format!(
                "qubit grid oracle (resolution {}, slack {:.3e})",
                cfg.grid_resolution, grid.slack
            );
            let mut report = report;
            report.lower_bound = Some(grid.value);
            report.lower_bound_source = source;
            if (report.value - grid.value).abs() <= cfg.certification_tol && !report.budget_exhausted() {
                report.direction = Direction::Exact;
            }
            Ok(report)
        }
        BasisFamily::FullUnitary if ensemble.dim() == 1 => {
            let mut report = report;
            report.lower_bound = Some(0.0);
            report.lower_bound_source = "one-dimensional space".into();
            report.direction = Direction::Exact;
            Ok(report)
        }
        BasisFamily::LocalProduct(_) | BasisFamily::Explicit { .. } => {
            match avg_entanglement_lower_bound(ensemble) {
                Ok(lower) => Ok(certify_with_source(
                    report,
                    lower,
                    cfg.certification_tol,
                    "average entanglement entropy",
                )),
                Err(_) => Ok(report),
            }
        }
        _ => Ok(report),
    }
}

/// `Q` over the union of several families: the smallest per-family report wins
/// (earliest family on ties).
pub fn quantum_correlation_over(ensemble: &Ensemble, families: &[BasisFamily], cfg: &MeasureConfig) -> Result<QReport> {
    let mut best: Option<QReport> = None;
    for family in families {
        let report = quantum_correlation(ensemble, family, cfg)?;
        best = match best {
            Some(b) if b.value <= report.value => Some(b),
            _ => Some(report),
        };
    }
    best.ok_or_else(|| Error::InvalidConfig("no basis family given".into()))
}
