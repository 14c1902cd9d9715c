//! States, density operators, ensembles and their bipartite structure.
//!
//! All types validate on construction with a fixed tolerance of `1e-10` and are
//! immutable afterwards.

use crate::entropy;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, HermitianEigen};

/// Tolerance for state invariants (norm, Hermiticity, trace, positivity).
pub const STATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidConfig("state has zero dimension".into()));
        }
        if !amplitudes.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized { norm });
        }
        Self::new(amplitudes.unscale(norm))
    }

    pub fn from_components(amplitudes: &[(f64, f64)]) -> Result<Self> {
        Self::new(CVector::from_iterator(
            amplitudes.len(),
            amplitudes.iter().map(|&(re, im)| c(re, im)),
        ))
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(CVector::from_iterator(
            amplitudes.len(),
            amplitudes.iter().map(|&re| c(re, 0.0)),
        ))
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[index] = linalg::ONE;
        Self { amplitudes: v }
    }

    pub(crate) fn from_unit_vector(amplitudes: CVector) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator {
            matrix: linalg::projector(&self.amplitudes),
        }
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            amplitudes: linalg::tensor_vectors(&self.amplitudes, &other.amplitudes),
        }
    }

    pub fn apply(&self, unitary: &CMatrix) -> Result<PureState> {
        check_square(unitary, self.dim(), "unitary action")?;
        PureState::normalized(unitary * &self.amplitudes)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                context: "density operator must be square",
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if !linalg::is_finite(&matrix) {
            return Err(Error::NonFinite);
        }
        let deviation = linalg::hermiticity_deviation(&matrix);
        if deviation > STATE_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > STATE_TOL {
            return Err(Error::NotTraceOne { trace });
        }
        let eig = HermitianEigen::new(&matrix)?;
        let smallest = *eig.values.last().expect("nonempty spectrum");
        if smallest < -STATE_TOL {
            return Err(Error::NotPositive {
                eigenvalue: smallest,
            });
        }
        Ok(Self { matrix })
    }

    /// Skips validation; only for operators built from already-valid pieces.
    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: linalg::identity(dim).unscale(dim as f64),
        }
    }

    /// Diagonal operator in the computational basis.
    pub fn diagonal(weights: &[f64]) -> Result<Self> {
        let n = weights.len();
        Self::new(CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c(weights[i], 0.0)
            } else {
                linalg::ZERO
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn eigen(&self) -> HermitianEigen {
        HermitianEigen::new(&self.matrix).expect("validated density operator")
    }

    /// Eigenvalues in nonincreasing order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigen().values
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Returns the state vector when the operator has rank one (purity within `1e-9` of 1).
    pub fn as_pure(&self) -> Option<PureState> {
        if (self.purity() - 1.0).abs() > 1e-9 {
            return None;
        }
        let eig = self.eigen();
        Some(PureState::from_unit_vector(
            eig.vectors.column(0).into_owned(),
        ))
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator {
            matrix: linalg::tensor_product(&self.matrix, &other.matrix),
        }
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, unitary: &CMatrix) -> Result<DensityOperator> {
        check_square(unitary, self.dim(), "unitary conjugation")?;
        let m = unitary * &self.matrix * unitary.adjoint();
        Ok(DensityOperator {
            matrix: (&m + m.adjoint()).scale(0.5),
        })
    }

    pub fn entropy(&self) -> f64 {
        entropy::von_neumann_entropy(self)
    }
}

/// Local dimensions of the subsystems `A, B, C, …`, most significant first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsystemPartition {
    local_dims: Vec<usize>,
}

impl SubsystemPartition {
    pub fn new(local_dims: Vec<usize>) -> Result<Self> {
        if local_dims.is_empty() {
            return Err(Error::InvalidPartition("no subsystems".into()));
        }
        if local_dims.contains(&0) {
            return Err(Error::InvalidPartition(
                "subsystem dimensions must be positive".into(),
            ));
        }
        Ok(Self { local_dims })
    }

    pub fn bipartite(dim_a: usize, dim_b: usize) -> Self {
        Self::new(vec![dim_a, dim_b]).expect("positive dims")
    }

    pub fn local_dims(&self) -> &[usize] {
        &self.local_dims
    }

    pub fn parts(&self) -> usize {
        self.local_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.local_dims.iter().product()
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.total_dim() != dim {
            return Err(Error::DimensionMismatch {
                context: "subsystem partition",
                expected: dim,
                found: self.total_dim(),
            });
        }
        Ok(())
    }

    pub(crate) fn require_bipartite(&self) -> Result<(usize, usize)> {
        match self.local_dims[..] {
            [a, b] => Ok((a, b)),
            _ => Err(Error::InvalidPartition(format!(
                "expected 2 subsystems, found {}",
                self.parts()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Signal {
    Pure(PureState),
    Mixed(DensityOperator),
}

impl Signal {
    pub fn dim(&self) -> usize {
        match self {
            Signal::Pure(psi) => psi.dim(),
            Signal::Mixed(rho) => rho.dim(),
        }
    }

    pub fn density(&self) -> DensityOperator {
        match self {
            Signal::Pure(psi) => psi.density(),
            Signal::Mixed(rho) => rho.clone(),
        }
    }

    /// Pure signals, and mixed signals of rank one, as state vectors.
    pub fn as_pure(&self) -> Option<PureState> {
        match self {
            Signal::Pure(psi) => Some(psi.clone()),
            Signal::Mixed(rho) => rho.as_pure(),
        }
    }

    pub fn entropy(&self) -> f64 {
        match self {
            Signal::Pure(_) => 0.0,
            Signal::Mixed(rho) => rho.entropy(),
        }
    }

    /// `⟨v|ρ|v⟩`.
    pub fn expectation(&self, v: &CVector) -> f64 {
        match self {
            Signal::Pure(psi) => v.dotc(psi.amplitudes()).norm_sqr(),
            Signal::Mixed(rho) => v.dotc(&(rho.matrix() * v)).re,
        }
    }

    pub fn tensor(&self, other: &Signal) -> Signal {
        match (self, other) {
            (Signal::Pure(a), Signal::Pure(b)) => Signal::Pure(a.tensor(b)),
            _ => Signal::Mixed(self.density().tensor(&other.density())),
        }
    }

    pub fn transform(&self, unitary: &CMatrix) -> Result<Signal> {
        Ok(match self {
            Signal::Pure(psi) => Signal::Pure(psi.apply(unitary)?),
            Signal::Mixed(rho) => Signal::Mixed(rho.conjugate_by(unitary)?),
        })
    }
}

impl From<PureState> for Signal {
    fn from(psi: PureState) -> Self {
        Signal::Pure(psi)
    }
}

impl From<DensityOperator> for Signal {
    fn from(rho: DensityOperator) -> Self {
        Signal::Mixed(rho)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub probability: f64,
    pub signal: Signal,
}

/// Weighted collection of signals on a common Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    dim: usize,
    members: Vec<Member>,
    partition: Option<SubsystemPartition>,
}

impl Ensemble {
    /// Zero-probability members are dropped. Probabilities must lie in `[0, 1]` and sum to 1
    /// within `1e-10`.
    pub fn new(
        members: Vec<(f64, Signal)>,
        partition: Option<SubsystemPartition>,
    ) -> Result<Self> {
        let dim = members
            .first()
            .map(|(_, s)| s.dim())
            .ok_or(Error::EmptyEnsemble)?;
        let mut total = 0.0;
        for (idx, (p, s)) in members.iter().enumerate() {
            if !p.is_finite() || *p < 0.0 || *p > 1.0 {
                return Err(Error::InvalidProbabilities(format!(
                    "member {idx} has probability {p}"
                )));
            }
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: "ensemble member",
                    expected: dim,
                    found: s.dim(),
                });
            }
            total += p;
        }
        if (total - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidProbabilities(format!(
                "probabilities sum to {total}"
            )));
        }
        if let Some(part) = &partition {
            part.check_dim(dim)?;
        }
        let members: Vec<Member> = members
            .into_iter()
            .filter(|(p, _)| *p > 0.0)
            .map(|(probability, signal)| Member {
                probability,
                signal,
            })
            .collect();
        if members.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        Ok(Self {
            dim,
            members,
            partition,
        })
    }

    /// Equal priors over the given signals.
    pub fn uniform(
        signals: Vec<Signal>,
        partition: Option<SubsystemPartition>,
    ) -> Result<Self> {
        let n = signals.len() as f64;
        Self::new(signals.into_iter().map(|s| (1.0 / n, s)).collect(), partition)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn partition(&self) -> Option<&SubsystemPartition> {
        self.partition.as_ref()
    }

    pub fn priors(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.probability).collect()
    }

    pub fn is_pure(&self) -> bool {
        self.members.iter().all(|m| m.signal.as_pure().is_some())
    }

    pub fn with_partition(mut self, partition: Option<SubsystemPartition>) -> Result<Self> {
        if let Some(part) = &partition {
            part.check_dim(self.dim)?;
        }
        self.partition = partition;
        Ok(self)
    }

    /// `Σ_x p_x ρ_x`.
    pub fn average_state(&self) -> DensityOperator {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for member in &self.members {
            m += member.signal.density().matrix().scale(member.probability);
        }
        DensityOperator::from_matrix_unchecked(m)
    }

    /// Projector onto the union of the signal supports (eigenspaces above `1e-10`).
    pub fn support_projector(&self) -> CMatrix {
        let mut sum = CMatrix::zeros(self.dim, self.dim);
        for member in &self.members {
            let p = match &member.signal {
                Signal::Pure(psi) => linalg::projector(psi.amplitudes()),
                Signal::Mixed(rho) => rho.eigen().support_projector(STATE_TOL),
            };
            sum += p;
        }
        HermitianEigen::new(&sum)
            .expect("finite support sum")
            .support_projector(STATE_TOL)
    }

    pub fn support_rank(&self) -> usize {
        let p = self.support_projector();
        p.trace().re.round() as usize
    }

    /// Applies `U` to every signal. The partition is kept.
    pub fn transform(&self, unitary: &CMatrix) -> Result<Ensemble> {
        let members = self
            .members
            .iter()
            .map(|m| Ok((m.probability, m.signal.transform(unitary)?)))
            .collect::<Result<Vec<_>>>()?;
        Ensemble::new(members, self.partition.clone())
    }

    /// Replaces every signal `ρ_x` by `ρ_x ⊗ |0⟩⟨0|` with the ancilla of dimension
    /// `ancilla_dim` attached to the first subsystem.
    pub fn with_ancilla(&self, ancilla_dim: usize) -> Result<Ensemble> {
        if ancilla_dim == 0 {
            return Err(Error::InvalidConfig("ancilla dimension must be positive".into()));
        }
        let anc = Signal::Pure(PureState::basis(ancilla_dim, 0));
        let partition = self.partition.as_ref().map(|p| {
            let mut dims = p.local_dims().to_vec();
            dims[0] *= ancilla_dim;
            SubsystemPartition::new(dims).expect("positive dims")
        });
        // A's ancilla must sit next to A, so permute |a, b, …, anc⟩ -> |a, anc, b, …⟩.
        let perm = self
            .partition
            .as_ref()
            .map(|p| ancilla_permutation(p.local_dims(), ancilla_dim));
        let members = self
            .members
            .iter()
            .map(|m| {
                let ext = m.signal.tensor(&anc);
                let ext = match &perm {
                    Some(perm) => ext.transform(perm)?,
                    None => ext,
                };
                Ok((m.probability, ext))
            })
            .collect::<Result<Vec<_>>>()?;
        Ensemble::new(members, partition)
    }
}

/// Permutation matrix taking `|x_1 … x_k, anc⟩` to `|x_1, anc, x_2 … x_k⟩`.
pub(crate) fn ancilla_permutation(local_dims: &[usize], ancilla_dim: usize) -> CMatrix {
    let mut src_dims = local_dims.to_vec();
    src_dims.push(ancilla_dim);
    let mut dst_dims = vec![local_dims[0], ancilla_dim];
    dst_dims.extend_from_slice(&local_dims[1..]);
    let total: usize = src_dims.iter().product();
    let mut perm = CMatrix::zeros(total, total);
    for src in 0..total {
        let d = linalg::digits(src, &src_dims);
        let mut moved = vec![d[0], d[d.len() - 1]];
        moved.extend_from_slice(&d[1..d.len() - 1]);
        let dst = moved
            .iter()
            .zip(&dst_dims)
            .fold(0, |acc, (&digit, &dim)| acc * dim + digit);
        perm[(dst, src)] = linalg::ONE;
    }
    perm
}

fn check_square(m: &CMatrix, dim: usize, context: &'static str) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch {
            context,
            expected: dim,
            found: m.nrows(),
        });
    }
    Ok(())
}

pub use linalg::tensor_product;

/// Reduced operator on the subsystems listed in `keep` (order of `keep` is ignored;
/// kept subsystems appear in their original order).
pub fn partial_trace(
    rho: &DensityOperator,
    partition: &SubsystemPartition,
    keep: &[usize],
) -> Result<DensityOperator> {
    partition.check_dim(rho.dim())?;
    let dims = partition.local_dims();
    if keep.is_empty() || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidPartition(format!(
            "keep set {keep:?} is not a nonempty subset of {} subsystems",
            dims.len()
        )));
    }
    let kept: Vec<bool> = (0..dims.len()).map(|k| keep.contains(&k)).collect();
    let out_dim: usize = dims
        .iter()
        .zip(&kept)
        .filter(|(_, &k)| k)
        .map(|(&d, _)| d)
        .product();
    let n = rho.dim();
    // (kept index, traced index) for every full index
    let split: Vec<(usize, usize)> = (0..n)
        .map(|r| {
            let d = linalg::digits(r, dims);
            let (mut ki, mut ti) = (0, 0);
            for (k, &digit) in d.iter().enumerate() {
                if kept[k] {
                    ki = ki * dims[k] + digit;
                } else {
                    ti = ti * dims[k] + digit;
                }
            }
            (ki, ti)
        })
        .collect();
    let mut out = CMatrix::zeros(out_dim, out_dim);
    let m = rho.matrix();
    for r in 0..n {
        for col in 0..n {
            if split[r].1 == split[col].1 {
                out[(split[r].0, split[col].0)] += m[(r, col)];
            }
        }
    }
    DensityOperator::new(out)
}

/// Squared Schmidt coefficients in nonincreasing order; they sum to 1.
pub fn schmidt_coefficients(psi: &PureState, partition: &SubsystemPartition) -> Result<Vec<f64>> {
    partition.check_dim(psi.dim())?;
    let (da, db) = partition.require_bipartite()?;
    let coeff = CMatrix::from_fn(da, db, |i, j| psi.amplitudes()[i * db + j]);
    let reduced = if da <= db {
        &coeff * coeff.adjoint()
    } else {
        coeff.adjoint() * &coeff
    };
    let eig = HermitianEigen::new(&reduced)?;
    let mut values: Vec<f64> = eig.values.iter().map(|&l| l.clamp(0.0, 1.0)).collect();
    let total: f64 = values.iter().sum();
    values.iter_mut().for_each(|v| *v /= total);
    Ok(values)
}

/// Entropy of entanglement of a bipartite pure state, in bits.
pub fn entanglement_entropy(psi: &PureState, partition: &SubsystemPartition) -> Result<f64> {
    Ok(entropy::shannon_bits(&schmidt_coefficients(psi, partition)?))
}
