//! Measurement bases, the basis families searched when minimizing entropy
//! production, click statistics, and distinguishability certification.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::qstate::{self, Ensemble, PureState, SubsystemPartition};

/// Orthonormality tolerance on the Gram matrix.
pub const BASIS_TOL: f64 = 1e-9;

/// Default threshold on `⟨a_i|P_A|a_i⟩` for a basis vector to count as overlapping the
/// ensemble support.
pub const DEFAULT_OVERLAP_TOL: f64 = 1e-9;

/// Complete orthonormal basis; column `i` of the matrix is `|a_i⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis {
    matrix: CMatrix,
}

impl MeasurementBasis {
    pub fn from_columns(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                context: "basis must have dim vectors of length dim",
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if !linalg::is_finite(&matrix) {
            return Err(Error::NonFinite);
        }
        let gram = matrix.adjoint() * &matrix;
        let deviation = linalg::max_abs(&(gram - linalg::identity(matrix.nrows())));
        if deviation > BASIS_TOL {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Self { matrix })
    }

    pub fn new(vectors: &[PureState]) -> Result<Self> {
        let dim = vectors.first().map(PureState::dim).unwrap_or(0);
        if let Some(v) = vectors.iter().find(|v| v.dim() != dim) {
            return Err(Error::DimensionMismatch {
                context: "basis vector",
                expected: dim,
                found: v.dim(),
            });
        }
        let cols: Vec<CVector> = vectors.iter().map(|v| v.amplitudes().clone()).collect();
        if cols.is_empty() {
            return Err(Error::DimensionMismatch {
                context: "basis must have dim vectors of length dim",
                expected: 1,
                found: 0,
            });
        }
        Self::from_columns(CMatrix::from_columns(&cols))
    }

    pub(crate) fn from_unitary_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn computational(dim: usize) -> Self {
        Self {
            matrix: linalg::identity(dim),
        }
    }

    /// `{|a_i⟩ ⊗ |b_j⟩ ⊗ …}` ordered with the first factor most significant.
    pub fn tensor(factors: &[MeasurementBasis]) -> Self {
        let mut it = factors.iter();
        let first = it.next().expect("at least one factor").matrix.clone();
        Self {
            matrix: it.fold(first, |acc, f| linalg::tensor_product(&acc, &f.matrix)),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn len(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The basis vectors as columns, i.e. the unitary taking the computational basis here.
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn vector(&self, i: usize) -> CVector {
        self.matrix.column(i).into_owned()
    }

    pub fn vectors(&self) -> Vec<PureState> {
        (0..self.len())
            .map(|i| PureState::from_unit_vector(self.vector(i)))
            .collect()
    }

    /// `{U|a_i⟩}`.
    pub fn transform(&self, unitary: &CMatrix) -> Result<Self> {
        if unitary.nrows() != self.dim() || unitary.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "basis transform",
                expected: self.dim(),
                found: unitary.nrows(),
            });
        }
        Self::from_columns(unitary * &self.matrix)
    }
}

/// Serialized as a list of vectors, each a list of `[re, im]` pairs.
impl serde::Serialize for MeasurementBasis {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let vectors: Vec<Vec<[f64; 2]>> = (0..self.len())
            .map(|i| self.matrix.column(i).iter().map(|z| [z.re, z.im]).collect())
            .collect();
        vectors.serialize(serializer)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BasisFamily {
    /// Every orthonormal basis of the ambient space (single system, all operations allowed).
    FullUnitary,
    /// Tensor products of one local basis per subsystem.
    LocalProduct(SubsystemPartition),
    /// A single user-supplied basis.
    Explicit {
        basis: MeasurementBasis,
        certified: bool,
        certificate_note: String,
    },
}

impl BasisFamily {
    pub fn kind_name(&self) -> &'static str {
        match self {
            BasisFamily::FullUnitary => "full-unitary",
            BasisFamily::LocalProduct(_) => "local-product",
            BasisFamily::Explicit { .. } => "explicit",
        }
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            BasisFamily::FullUnitary => Ok(()),
            BasisFamily::LocalProduct(p) => p.check_dim(dim),
            BasisFamily::Explicit { basis, .. } => {
                if basis.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        context: "explicit basis",
                        expected: dim,
                        found: basis.dim(),
                    });
                }
                Ok(())
            }
        }
    }

    /// Transforms the family along with an ensemble rotated by `unitary`. Local-product
    /// families are only closed under local unitaries; callers are responsible for that.
    pub fn transform(&self, unitary: &CMatrix) -> Result<Self> {
        Ok(match self {
            BasisFamily::Explicit {
                basis,
                certified,
                certificate_note,
            } => BasisFamily::Explicit {
                basis: basis.transform(unitary)?,
                certified: *certified,
                certificate_note: certificate_note.clone(),
            },
            other => other.clone(),
        })
    }

    /// The family matching [`Ensemble::with_ancilla`]: explicit vectors are extended by
    /// the ancilla's computational basis and local factors grow on the first subsystem.
    pub fn with_ancilla(&self, partition: Option<&SubsystemPartition>, ancilla_dim: usize) -> Result<Self> {
        Ok(match self {
            BasisFamily::FullUnitary => BasisFamily::FullUnitary,
            BasisFamily::LocalProduct(p) => {
                let mut dims = p.local_dims().to_vec();
                dims[0] *= ancilla_dim;
                BasisFamily::LocalProduct(SubsystemPartition::new(dims)?)
            }
            BasisFamily::Explicit {
                basis,
                certified,
                certificate_note,
            } => {
                let mut m = linalg::tensor_product(basis.matrix(), &linalg::identity(ancilla_dim));
                if let Some(p) = partition {
                    m = qstate::ancilla_permutation(p.local_dims(), ancilla_dim) * m;
                }
                BasisFamily::Explicit {
                    basis: MeasurementBasis::from_columns(m)?,
                    certified: *certified,
                    certificate_note: certificate_note.clone(),
                }
            }
        })
    }
}

/// `probs[(i, x)] = ⟨a_i|ρ_x|a_i⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClickDistribution {
    probs: DMatrix<f64>,
}

impl ClickDistribution {
    pub(crate) fn from_matrix(mut probs: DMatrix<f64>) -> Result<Self> {
        for x in 0..probs.ncols() {
            let mut total = 0.0;
            for i in 0..probs.nrows() {
                let p = probs[(i, x)];
                if !(-1e-12..=1.0 + 1e-12).contains(&p) {
                    return Err(Error::InvalidProbabilities(format!(
                        "click probability {p} for outcome {i}, signal {x}"
                    )));
                }
                probs[(i, x)] = p.clamp(0.0, 1.0);
                total += probs[(i, x)];
            }
            if (total - 1.0).abs() > BASIS_TOL {
                return Err(Error::InvalidProbabilities(format!(
                    "click column {x} sums to {total}"
                )));
            }
        }
        Ok(Self { probs })
    }

    pub fn n_outcomes(&self) -> usize {
        self.probs.nrows()
    }

    pub fn n_signals(&self) -> usize {
        self.probs.ncols()
    }

    pub fn probs(&self) -> &DMatrix<f64> {
        &self.probs
    }

    pub fn get(&self, outcome: usize, signal: usize) -> f64 {
        self.probs[(outcome, signal)]
    }

    pub fn column(&self, signal: usize) -> Vec<f64> {
        self.probs.column(signal).iter().copied().collect()
    }

    pub fn restricted_column(&self, signal: usize, outcomes: &[usize]) -> Vec<f64> {
        outcomes.iter().map(|&i| self.probs[(i, signal)]).collect()
    }
}

fn check_basis_dim(ensemble: &Ensemble, basis: &MeasurementBasis) -> Result<()> {
    if ensemble.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            context: "basis vs ensemble",
            expected: ensemble.dim(),
            found: basis.dim(),
        });
    }
    Ok(())
}

pub fn click_distribution(ensemble: &Ensemble, basis: &MeasurementBasis) -> Result<ClickDistribution> {
    check_basis_dim(ensemble, basis)?;
    let n = basis.len();
    let cols: Vec<CVector> = (0..n).map(|i| basis.vector(i)).collect();
    let probs = DMatrix::from_fn(n, ensemble.len(), |i, x| {
        ensemble.members()[x].signal.expectation(&cols[i])
    });
    ClickDistribution::from_matrix(probs)
}

/// Indices `i` (0-based) with `⟨a_i|P_A|a_i⟩ > tol`, `P_A` the projector onto the union of
/// signal supports.
pub fn support_overlap_filter(basis: &MeasurementBasis, ensemble: &Ensemble, tol: f64) -> Result<Vec<usize>> {
    check_basis_dim(ensemble, basis)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!("overlap tolerance {tol} must be positive")));
    }
    let support = ensemble.support_projector();
    Ok((0..basis.len())
        .filter(|&i| {
            let v = basis.vector(i);
            v.dotc(&(&support * &v)).re > tol
        })
        .collect())
}

const PRODUCT_TOL: f64 = 1e-9;

/// Whether `v` factorizes across every subsystem of the partition.
fn is_product_vector(v: &PureState, partition: &SubsystemPartition) -> Result<bool> {
    if partition.parts() == 2 {
        let s = qstate::schmidt_coefficients(v, partition)?;
        return Ok(s.get(1).copied().unwrap_or(0.0) < PRODUCT_TOL);
    }
    for k in 0..partition.parts() {
        let red = qstate::partial_trace(&v.density(), partition, &[k])?;
        let spectrum = red.eigenvalues();
        if spectrum.get(1).copied().unwrap_or(0.0) >= PRODUCT_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// True iff every basis vector has Schmidt rank one (across every cut of the partition).
pub fn is_product_basis(basis: &MeasurementBasis, partition: &SubsystemPartition) -> Result<bool> {
    partition.check_dim(basis.dim())?;
    for v in basis.vectors() {
        if !is_product_vector(&v, partition)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// True iff the basis equals `{|e^1_{i_1}⟩ ⊗ … ⊗ |e^k_{i_k}⟩}` for one orthonormal basis per
/// subsystem, up to phases and ordering.
pub fn is_tensor_of_local_bases(basis: &MeasurementBasis, partition: &SubsystemPartition) -> Result<bool> {
    if !is_product_basis(basis, partition)? {
        return Ok(false);
    }
    let dims = partition.local_dims();
    let vectors = basis.vectors();
    let mut labels = vec![Vec::with_capacity(dims.len()); vectors.len()];
    for (k, &dk) in dims.iter().enumerate() {
        let mut classes: Vec<CVector> = Vec::new();
        for (i, v) in vectors.iter().enumerate() {
            let red = qstate::partial_trace(&v.density(), partition, &[k])?;
            let factor = red.eigen().vectors.column(0).into_owned();
            let mut label = None;
            for (ci, rep) in classes.iter().enumerate() {
                let overlap = rep.dotc(&factor).norm_sqr();
                if overlap > 1.0 - PRODUCT_TOL {
                    label = Some(ci);
                    break;
                }
                if overlap > PRODUCT_TOL {
                    return Ok(false);
                }
            }
            let label = label.unwrap_or_else(|| {
                classes.push(factor);
                classes.len() - 1
            });
            labels[i].push(label);
        }
        if classes.len() != dk {
            return Ok(false);
        }
    }
    labels.sort();
    labels.dedup();
    Ok(labels.len() == vectors.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistinguishabilityStatus {
    CertifiedDistinguishable,
    AssertedByUser,
    ProductNecessaryOnly,
    Unknown,
}

/// Classifies how far the overlapping part of `basis` is known to be distinguishable
/// under the operations `family` stands for.
pub fn distinguishability_status(
    basis: &MeasurementBasis,
    family: &BasisFamily,
    ensemble: &Ensemble,
) -> DistinguishabilityStatus {
    use DistinguishabilityStatus::*;
    let partition = match family {
        BasisFamily::FullUnitary => return CertifiedDistinguishable,
        BasisFamily::Explicit { certified: true, .. } => return AssertedByUser,
        BasisFamily::LocalProduct(p) => Some(p),
        BasisFamily::Explicit { .. } => ensemble.partition(),
    };
    let Some(partition) = partition else {
        return Unknown;
    };
    if partition.check_dim(basis.dim()).is_err() {
        return Unknown;
    }
    if is_tensor_of_local_bases(basis, partition).unwrap_or(false) {
        return CertifiedDistinguishable;
    }
    // Only the part of the basis overlapping the ensemble support has to be product.
    let overlapping = support_overlap_filter(basis, ensemble, DEFAULT_OVERLAP_TOL).unwrap_or_default();
    let all_product = overlapping.iter().all(|&i| {
        is_product_vector(&PureState::from_unit_vector(basis.vector(i)), partition).unwrap_or(false)
    });
    if all_product && !overlapping.is_empty() {
        ProductNecessaryOnly
    } else {
        Unknown
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{DensityOperator, Signal};
    use std::f64::consts::FRAC_1_SQRT_2;

    const H: f64 = FRAC_1_SQRT_2;

    fn bell_basis() -> MeasurementBasis {
        MeasurementBasis::new(&[
            PureState::from_real(&[H, 0.0, 0.0, H]).unwrap(),
            PureState::from_real(&[H, 0.0, 0.0, -H]).unwrap(),
            PureState::from_real(&[0.0, H, H, 0.0]).unwrap(),
            PureState::from_real(&[0.0, H, -H, 0.0]).unwrap(),
        ])
        .unwrap()
    }

    fn bell_ensemble() -> Ensemble {
        Ensemble::uniform(
            bell_basis().vectors().into_iter().map(Signal::Pure).collect(),
            Some(SubsystemPartition::bipartite(2, 2)),
        )
        .unwrap()
    }

    #[test]
    fn rejects_non_orthonormal() {
        let v = PureState::from_real(&[H, H]).unwrap();
        assert!(matches!(
            MeasurementBasis::new(&[PureState::basis(2, 0), v]),
            Err(Error::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn bell_clicks_in_computational_basis() {
        let clicks = click_distribution(&bell_ensemble(), &MeasurementBasis::computational(4)).unwrap();
        // outcomes 00, 01, 10, 11 → |φ+⟩ clicks 00 or 11 with probability 1/2
        assert!((clicks.get(0, 0) - 0.5).abs() < 1e-12);
        assert!((clicks.get(3, 0) - 0.5).abs() < 1e-12);
        assert!(clicks.get(1, 0).abs() < 1e-12 && clicks.get(2, 0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_signals_in_own_basis_are_deterministic() {
        let e = bell_ensemble();
        let clicks = click_distribution(&e, &bell_basis()).unwrap();
        for x in 0..4 {
            for i in 0..4 {
                let expected = if i == x { 1.0 } else { 0.0 };
                assert!((clicks.get(i, x) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn maximally_mixed_signal_clicks_uniformly() {
        let e = Ensemble::new(vec![(1.0, DensityOperator::maximally_mixed(2).into())], None).unwrap();
        let b = MeasurementBasis::new(&[
            PureState::from_real(&[H, H]).unwrap(),
            PureState::from_real(&[H, -H]).unwrap(),
        ])
        .unwrap();
        let clicks = click_distribution(&e, &b).unwrap();
        assert!((clicks.get(0, 0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn click_distribution_dimension_mismatch() {
        assert!(matches!(
            click_distribution(&bell_ensemble(), &MeasurementBasis::computational(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn overlap_filter_cases() {
        let full = support_overlap_filter(&MeasurementBasis::computational(4), &bell_ensemble(), 1e-9).unwrap();
        assert_eq!(full, vec![0, 1, 2, 3]);
        let e = Ensemble::new(vec![(1.0, PureState::basis(2, 0).into())], None).unwrap();
        assert_eq!(support_overlap_filter(&MeasurementBasis::computational(2), &e, 1e-9).unwrap(), vec![0]);
        assert!(support_overlap_filter(&MeasurementBasis::computational(2), &e, 0.0).is_err());
    }

    #[test]
    fn product_basis_tests() {
        let part = SubsystemPartition::bipartite(2, 2);
        assert!(is_product_basis(&MeasurementBasis::computational(4), &part).unwrap());
        assert!(!is_product_basis(&bell_basis(), &part).unwrap());
        assert!(is_tensor_of_local_bases(&MeasurementBasis::computational(4), &part).unwrap());
    }

    #[test]
    fn product_but_not_tensor_form() {
        // {|00⟩, |01⟩, |1+⟩, |1−⟩}: every vector is product, B's basis depends on A's outcome
        let part = SubsystemPartition::bipartite(2, 2);
        let b = MeasurementBasis::new(&[
            PureState::basis(4, 0),
            PureState::basis(4, 1),
            PureState::from_real(&[0.0, 0.0, H, H]).unwrap(),
            PureState::from_real(&[0.0, 0.0, H, -H]).unwrap(),
        ])
        .unwrap();
        assert!(is_product_basis(&b, &part).unwrap());
        assert!(!is_tensor_of_local_bases(&b, &part).unwrap());
        let status = distinguishability_status(&b, &BasisFamily::LocalProduct(part), &bell_ensemble());
        assert_eq!(status, DistinguishabilityStatus::ProductNecessaryOnly);
    }

    #[test]
    fn status_classification() {
        let part = SubsystemPartition::bipartite(2, 2);
        let e = bell_ensemble();
        let lp = BasisFamily::LocalProduct(part);
        assert_eq!(
            distinguishability_status(&MeasurementBasis::computational(4), &lp, &e),
            DistinguishabilityStatus::CertifiedDistinguishable
        );
        assert_eq!(distinguishability_status(&bell_basis(), &lp, &e), DistinguishabilityStatus::Unknown);
        assert_eq!(
            distinguishability_status(&bell_basis(), &BasisFamily::FullUnitary, &e),
            DistinguishabilityStatus::CertifiedDistinguishable
        );
        let explicit = BasisFamily::Explicit {
            basis: bell_basis(),
            certified: true,
            certificate_note: "user".into(),
        };
        assert_eq!(distinguishability_status(&bell_basis(), &explicit, &e), DistinguishabilityStatus::AssertedByUser);
    }

    #[test]
    fn tripartite_tensor_basis() {
        let part = SubsystemPartition::new(vec![2, 2, 2]).unwrap();
        let plus_minus = MeasurementBasis::new(&[
            PureState::from_real(&[H, H]).unwrap(),
            PureState::from_real(&[H, -H]).unwrap(),
        ])
        .unwrap();
        let b = MeasurementBasis::tensor(&[
            MeasurementBasis::computational(2),
            plus_minus.clone(),
            MeasurementBasis::computational(2),
        ]);
        assert!(is_tensor_of_local_bases(&b, &part).unwrap());
        let ghz = PureState::from_real(&[H, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, H]).unwrap();
        assert!(!is_product_vector(&ghz, &part).unwrap());
    }

    #[test]
    fn ancilla_extension_of_explicit_family() {
        let part = SubsystemPartition::bipartite(2, 2);
        let family = BasisFamily::Explicit {
            basis: bell_basis(),
            certified: false,
            certificate_note: String::new(),
        };
        let BasisFamily::Explicit { basis, .. } = family.with_ancilla(Some(&part), 3).unwrap() else {
            panic!("explicit family expected");
        };
        assert_eq!(basis.dim(), 12);
        // |Φ+> ⊗ |0>_anc with the ancilla between the two qubits: amplitudes at |0,0,0> and |1,0,1>.
        let v = basis.vector(0);
        assert!((v[0].re - H).abs() < 1e-12);
        assert!((v[7].re - H).abs() < 1e-12);
        let local = BasisFamily::LocalProduct(part.clone()).with_ancilla(Some(&part), 3).unwrap();
        assert_eq!(local, BasisFamily::LocalProduct(SubsystemPartition::bipartite(6, 2)));
    }
}
