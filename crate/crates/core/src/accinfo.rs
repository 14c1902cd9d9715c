//! Accessible information and the complementarity check `I_acc + Q ≤ log₂N`.
//!
//! Accessible information is only optimized over rank-one projective measurements
//! (global, or tensor products of local bases). The optimum is therefore a lower
//! bound; upper bounds come from the Holevo quantity and, for pure bipartite
//! ensembles under local operations, from `log₂n − Ē`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisFamily, MeasurementBasis};
use crate::entropy;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::linalg::{self, CMatrix, HermitianEigen};
use crate::optimizer::{self, Mode, OptimizerTrace};
use crate::qmeasure::{self, Direction, MeasureConfig, QReport};
use crate::qstate::{self, Ensemble};

#[derive(Debug, Clone, PartialEq)]
pub enum Measurement {
    ProjectiveGlobal(MeasurementBasis),
    /// One local basis per subsystem, measured simultaneously.
    ProjectiveLocalProduct(Vec<MeasurementBasis>),
    GeneralPovm(Vec<CMatrix>),
}

impl Measurement {
    /// Validates `Σ E_y = I` within `1e-9` and `E_y ≥ 0` within `1e-10`.
    pub fn povm(elements: Vec<CMatrix>) -> Result<Self> {
        let dim = elements
            .first()
            .map(|e| e.nrows())
            .ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
        let mut sum = CMatrix::zeros(dim, dim);
        for (y, e) in elements.iter().enumerate() {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(Error::InvalidPovm(format!("element {y} is not {dim}x{dim}")));
            }
            if linalg::hermiticity_deviation(e) > 1e-10 {
                return Err(Error::InvalidPovm(format!("element {y} is not Hermitian")));
            }
            let low = *HermitianEigen::new(e)?.values.last().expect("nonempty");
            if low < -1e-10 {
                return Err(Error::InvalidPovm(format!("element {y} has eigenvalue {low:e}")));
            }
            sum += e;
        }
        let deviation = linalg::max_abs(&(sum - linalg::identity(dim)));
        if deviation > 1e-9 {
            return Err(Error::InvalidPovm(format!("elements sum to identity only within {deviation:e}")));
        }
        Ok(Measurement::GeneralPovm(elements))
    }

    pub fn dim(&self) -> usize {
        match self {
            Measurement::ProjectiveGlobal(b) => b.dim(),
            Measurement::ProjectiveLocalProduct(bs) => bs.iter().map(MeasurementBasis::dim).product(),
            Measurement::GeneralPovm(es) => es[0].nrows(),
        }
    }

    /// `p[(y, x)] = tr(E_y ρ_x)`.
    pub fn outcome_probabilities(&self, ensemble: &Ensemble) -> Result<DMatrix<f64>> {
        if self.dim() != ensemble.dim() {
            return Err(Error::DimensionMismatch {
                context: "measurement vs ensemble",
                expected: ensemble.dim(),
                found: self.dim(),
            });
        }
        let probs = match self {
            Measurement::ProjectiveGlobal(b) => crate::basis::click_distribution(ensemble, b)?.probs().clone(),
            Measurement::ProjectiveLocalProduct(bs) => {
                if let Some(p) = ensemble.partition() {
                    let dims: Vec<usize> = bs.iter().map(MeasurementBasis::dim).collect();
                    if p.local_dims() != dims.as_slice() {
                        return Err(Error::InvalidPartition(format!(
                            "local bases of dims {dims:?} do not match partition {:?}",
                            p.local_dims()
                        )));
                    }
                }
                crate::basis::click_distribution(ensemble, &MeasurementBasis::tensor(bs))?.probs().clone()
            }
            Measurement::GeneralPovm(es) => {
                let rhos: Vec<CMatrix> = ensemble.members().iter().map(|m| m.signal.density().matrix().clone()).collect();
                DMatrix::from_fn(es.len(), rhos.len(), |y, x| (&es[y] * &rhos[x]).trace().re.max(0.0))
            }
        };
        Ok(probs)
    }
}

/// Mutual information computed both as `H(X) − H(X|Y)` and as `H(Y) − H(Y|X)`.
pub fn mutual_information_routes(ensemble: &Ensemble, m: &Measurement) -> Result<(f64, f64)> {
    let cond = m.outcome_probabilities(ensemble)?;
    let priors = ensemble.priors();
    let (n_out, n_sig) = (cond.nrows(), cond.ncols());
    let r: Vec<f64> = (0..n_out)
        .map(|y| (0..n_sig).map(|x| priors[x] * cond[(y, x)]).sum())
        .collect();

    let mut h_x_given_y = 0.0;
    for (y, &ry) in r.iter().enumerate() {
        if ry > 1e-15 {
            let posterior: Vec<f64> = (0..n_sig).map(|x| priors[x] * cond[(y, x)] / ry).collect();
            h_x_given_y += ry * entropy::shannon_bits(&posterior);
        }
    }
    let via_x = entropy::shannon_bits(&priors) - h_x_given_y;

    let h_y_given_x: f64 = (0..n_sig)
        .map(|x| priors[x] * entropy::shannon_bits(cond.column(x).as_slice()))
        .sum();
    let via_y = entropy::shannon_bits(&r) - h_y_given_x;
    Ok((via_x, via_y))
}

pub fn mutual_information(ensemble: &Ensemble, m: &Measurement) -> Result<f64> {
    let (via_x, via_y) = mutual_information_routes(ensemble, m)?;
    debug_assert!((via_x - via_y).abs() < 1e-9, "mutual information routes disagree: {via_x} vs {via_y}");
    Ok(via_y.max(0.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct IaccEstimate {
    /// Lower bound on the accessible information.
    pub value: f64,
    pub local: bool,
    pub achieving_basis: MeasurementBasis,
    pub optimizer_trace: OptimizerTrace,
}

/// Maximum mutual information over rank-one projective measurements, global or
/// (with `local`) tensor products of local bases.
pub fn accessible_info_projective(ensemble: &Ensemble, cfg: &optimizer::OptimizerConfig, local: bool) -> Result<IaccEstimate> {
    let family = if local {
        BasisFamily::LocalProduct(ensemble.partition().ok_or(Error::MissingPartition)?.clone())
    } else {
        BasisFamily::FullUnitary
    };
    let objective = |b: &MeasurementBasis| {
        mutual_information(ensemble, &Measurement::ProjectiveGlobal(b.clone())).unwrap_or(f64::NEG_INFINITY)
    };
    let opt = optimizer::maximize(&objective, &family, ensemble.dim(), cfg)?;
    Ok(IaccEstimate {
        value: opt.value,
        local,
        achieving_basis: opt.basis,
        optimizer_trace: opt.trace,
    })
}

/// `χ = S(Σ p_x ρ_x) − Σ p_x S(ρ_x)`.
pub fn holevo_bound(ensemble: &Ensemble) -> f64 {
    let avg = ensemble.average_state();
    let spectrum: Vec<f64> = HermitianEigen::new(avg.matrix())
        .expect("finite average state")
        .values
        .into_iter()
        .map(|l| l.clamp(0.0, 1.0))
        .collect();
    let mixed: f64 = ensemble.members().iter().map(|m| m.probability * m.signal.entropy()).sum();
    (entropy::shannon_bits(&spectrum) - mixed).max(0.0)
}

/// `log₂n − Σ_x p_x E(ψ_x)`: upper bound on locally accessible information of a pure
/// bipartite ensemble.
pub fn entanglement_complementarity_bound(ensemble: &Ensemble) -> Result<f64> {
    let partition = ensemble.partition().ok_or(Error::MissingPartition)?;
    partition.require_bipartite()?;
    let mut avg = 0.0;
    for (index, m) in ensemble.members().iter().enumerate() {
        let psi = m.signal.as_pure().ok_or(Error::NotPure { index })?;
        avg += m.probability * qstate::entanglement_entropy(&psi, partition)?;
    }
    Ok((ensemble.dim() as f64).log2() - avg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operations {
    /// Any quantum operation on a single system.
    All,
    /// Local operations and classical communication between the subsystems.
    Locc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Upper bounds on both terms already satisfy the inequality.
    Confirmed,
    /// Neither confirmed nor contradicted by the available bounds.
    Consistent,
    /// Lower bounds on both terms exceed `log₂N`.
    WitnessOfViolation,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplementarityReport {
    pub n_states: usize,
    pub log2_n: f64,
    pub operations: Operations,
    pub iacc_lower: f64,
    pub iacc_upper: f64,
    pub iacc_upper_source: String,
    pub q_upper: f64,
    pub q_exact: Option<f64>,
    pub q_lower: f64,
    pub verdict: Verdict,
    /// `iacc_lower + q_upper` equals `log₂N` within tolerance.
    pub saturated: bool,
    pub details: String,
    pub q_report: QReport,
    pub iacc_estimate: IaccEstimate,
}

fn operations_for(families: &[BasisFamily]) -> Result<Operations> {
    let full = families.iter().filter(|f| matches!(f, BasisFamily::FullUnitary)).count();
    match full {
        0 if !families.is_empty() => Ok(Operations::Locc),
        n if n == families.len() && n > 0 => Ok(Operations::All),
        _ => Err(Error::InvalidConfig(
            "families must be either all full-unitary or all local (local-product / explicit)".into(),
        )),
    }
}

/// Brackets both terms of `I_acc + Q ≤ log₂N` and classifies the result.
pub fn check_complementarity(ensemble: &Ensemble, families: &[BasisFamily], cfg: &MeasureConfig) -> Result<ComplementarityReport> {
    let ops = operations_for(families)?;
    let tol = cfg.certification_tol;
    let n = ensemble.len();
    let log2_n = (n as f64).log2();

    let q_report = qmeasure::quantum_correlation_over(ensemble, families, cfg)?;
    let iacc = accessible_info_projective(ensemble, &cfg.optimizer, ops == Operations::Locc)?;

    let mut notes = Vec::new();
    let mut iacc_upper = holevo_bound(ensemble);
    let mut iacc_upper_source = "holevo".to_string();
    if ops == Operations::Locc {
        if let Ok(bound) = entanglement_complementarity_bound(ensemble) {
            if bound < iacc_upper {
                iacc_upper = bound;
                iacc_upper_source = "dimension minus average entanglement".into();
            }
        }
    }
    if ops == Operations::All && ensemble.dim() == 2 && cfg.certify {
        let objective = |b: &MeasurementBasis| {
            mutual_information(ensemble, &Measurement::ProjectiveGlobal(b.clone())).unwrap_or(f64::NEG_INFINITY)
        };
        let grid = optimizer::qubit_grid_oracle(&objective, 2, cfg.grid_resolution, Mode::Maximize, cfg.optimizer.execution)?;
        if (grid.value - iacc.value).abs() <= tol && iacc.value < iacc_upper {
            iacc_upper = iacc.value;
            iacc_upper_source = "projective optimum certified by qubit grid".into();
            notes.push("accessible information restricted to projective measurements".to_string());
        }
    }
    let iacc_lower = iacc.value.min(iacc_upper);

    let q_upper = q_report.value;
    let q_exact = (q_report.direction == Direction::Exact).then_some(q_upper);
    let q_lower = match (q_report.direction, q_report.lower_bound) {
        (_, Some(lb)) if q_report.lower_bound_source.starts_with("average entanglement") => lb,
        (Direction::Exact, _) => (q_upper - tol).max(0.0),
        _ => 0.0,
    };

    let verdict = if q_exact.is_some_and(|q| iacc_upper + q <= log2_n + tol) {
        Verdict::Confirmed
    } else if iacc_lower + q_lower > log2_n + tol {
        Verdict::WitnessOfViolation
    } else {
        Verdict::Consistent
    };
    let saturated = (iacc_lower + q_upper - log2_n).abs() <= tol.max(1e-3);
    notes.push("verdict uses the unregularized measure; the relation may require an ancilla-regularized variant".into());
    if q_exact.is_none() {
        notes.push(format!("Q is an upper bound only (lower bound {q_lower:.6})"));
    }
    Ok(ComplementarityReport {
        n_states: n,
        log2_n,
        operations: ops,
        iacc_lower,
        iacc_upper,
        iacc_upper_source,
        q_upper,
        q_exact,
        q_lower,
        verdict,
        saturated,
        details: notes.join("; "),
        q_report,
        iacc_estimate: iacc,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeisenbergCheck {
    pub samples: usize,
    pub violations: usize,
    /// Largest `I(B) + production(B) − log₂N` seen.
    pub max_excess: f64,
    /// Best mutual information over the sampled bases (a lower bound on `I_acc`).
    pub best_information: f64,
    /// Smallest entropy production over the sampled bases (an upper bound on `Q`).
    pub min_production: f64,
}

impl HeisenbergCheck {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Checks `I(B) + production(B) ≤ log₂N + 1e-6` for `samples` random projective bases.
pub fn heisenberg_restricted_check(ensemble: &Ensemble, samples: usize, seed: u64, execution: Execution) -> Result<HeisenbergCheck> {
    let n = ensemble.len();
    if n < ensemble.dim() {
        return Err(Error::PreconditionViolation(format!(
            "{n} signals in dimension {}: needs at least as many signals as dimensions",
            ensemble.dim()
        )));
    }
    let log2_n = (n as f64).log2();
    let objective = qmeasure::ProductionObjective::new(ensemble);
    let points = exec::map_indexed(samples, execution, |s| -> Result<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(s as u64);
        let b = optimizer::random_basis(&BasisFamily::FullUnitary, ensemble.dim(), &mut rng)?;
        let production = objective.evaluate(&b);
        let info = mutual_information(ensemble, &Measurement::ProjectiveGlobal(b))?;
        Ok((info, production))
    });
    let mut check = HeisenbergCheck {
        samples,
        violations: 0,
        max_excess: f64::NEG_INFINITY,
        best_information: f64::NEG_INFINITY,
        min_production: f64::INFINITY,
    };
    for point in points {
        let (info, production) = point?;
        let excess = info + production - log2_n;
        if excess > 1e-6 {
            check.violations += 1;
        }
        check.max_excess = check.max_excess.max(excess);
        check.best_information = check.best_information.max(info);
        check.min_production = check.min_production.min(production);
    }
    Ok(check)
}
