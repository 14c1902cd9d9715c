//! Exploratory sweeps over random ensembles. Rows flag candidate counterexamples to
//! open conjectures; nothing here asserts them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::accinfo;
use crate::basis::BasisFamily;
use crate::catalog;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::qmeasure::{self, MeasureConfig};
use crate::qstate::{DensityOperator, Ensemble, Signal, SubsystemPartition};
use crate::sampling;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    /// `Q ≥ Ē + log₂N − log₂n` for pure two-qubit ensembles.
    #[value(name = "conjecture-er-gap", alias = "conjecture-ER-gap")]
    ConjectureErGap,
    /// `Q` does not increase under a local dephasing of the first subsystem.
    LocalDephasingMonotonicity,
    /// `I(B) + production(B) ≤ log₂N` at random bases of single-system ensembles.
    RandomHeisenberg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepSource {
    Random,
    BPrime,
    BellFour,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub kind: SweepKind,
    pub source: SweepSource,
    pub samples: usize,
    pub seed: u64,
    /// Random bases per sample for the Heisenberg sweep.
    pub bases: usize,
    pub measure: MeasureConfig,
}

/// One CSV row. Columns that do not apply to a kind are left empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub kind: &'static str,
    pub sample: usize,
    pub seed: u64,
    pub dim: usize,
    pub n_states: usize,
    pub param: String,
    pub q_upper: Option<f64>,
    pub q_lower: Option<f64>,
    pub q_after: Option<f64>,
    pub delta_q: Option<f64>,
    pub iacc_lower: Option<f64>,
    pub iacc_upper: Option<f64>,
    pub bound: Option<f64>,
    pub slack: Option<f64>,
    pub violations: Option<usize>,
    pub candidate: bool,
}

pub const CSV_HEADER: [&str; 16] = [
    "kind", "sample", "seed", "dim", "n_states", "param", "q_upper", "q_lower", "q_after", "delta_q",
    "iacc_lower", "iacc_upper", "bound", "slack", "violations", "candidate",
];

/// Sampling-noise margin on optimizer upper bounds before a row is flagged.
const GAP_MARGIN: f64 = 1e-6;
const DEPHASING_MARGIN: f64 = 1e-4;

fn row(kind: &'static str, sample: usize, seed: u64, e: &Ensemble) -> SweepRow {
    SweepRow {
        kind,
        sample,
        seed,
        dim: e.dim(),
        n_states: e.len(),
        param: String::new(),
        q_upper: None,
        q_lower: None,
        q_after: None,
        delta_q: None,
        iacc_lower: None,
        iacc_upper: None,
        bound: None,
        slack: None,
        violations: None,
        candidate: false,
    }
}

fn sample_rng(seed: u64, sample: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample as u64);
    rng
}

fn bipartite_source(source: SweepSource, rng: &mut ChaCha8Rng) -> Result<(Ensemble, String)> {
    let partition = SubsystemPartition::bipartite(2, 2);
    Ok(match source {
        SweepSource::Random => {
            let n = rng.random_range(2..=4);
            (sampling::random_ensemble(4, n, 0.0, Some(partition), rng), String::new())
        }
        SweepSource::BPrime => {
            let (a2, c2) = (rng.random_range(0.05..0.95), rng.random_range(0.05..0.95));
            (catalog::b_prime_real(a2, c2)?.ensemble, format!("a2={a2:.6};c2={c2:.6}"))
        }
        SweepSource::BellFour => (catalog::bell_four().ensemble, String::new()),
    })
}

fn er_gap_row(sample: usize, cfg: &SweepConfig) -> Result<SweepRow> {
    let mut rng = sample_rng(cfg.seed, sample);
    let (ensemble, param) = bipartite_source(cfg.source, &mut rng)?;
    let partition = ensemble.partition().expect("bipartite source").clone();
    let family = BasisFamily::LocalProduct(partition);
    let q = qmeasure::quantum_correlation(&ensemble, &family, &cfg.measure)?;
    let iacc = accinfo::accessible_info_projective(&ensemble, &cfg.measure.optimizer, true)?;
    let eq5 = accinfo::entanglement_complementarity_bound(&ensemble)?;
    let avg_e = (ensemble.dim() as f64).log2() - eq5;
    let bound = avg_e + (ensemble.len() as f64).log2() - (ensemble.dim() as f64).log2();

    let mut r = row("conjecture-er-gap", sample, cfg.seed, &ensemble);
    r.param = param;
    r.q_upper = Some(q.value);
    r.q_lower = qmeasure::avg_entanglement_lower_bound(&ensemble).ok();
    r.iacc_lower = Some(iacc.value);
    r.iacc_upper = Some(eq5.min(accinfo::holevo_bound(&ensemble)));
    r.bound = Some(bound);
    r.slack = Some(q.value - bound);
    r.candidate = q.value < bound - GAP_MARGIN;
    Ok(r)
}

/// `ρ ↦ (1−λ)ρ + λ Σ_i (P_i⊗I) ρ (P_i⊗I)` with `P_i` projectors onto the columns of
/// `local_unitary`, acting on the first subsystem.
pub fn dephase_first_subsystem(ensemble: &Ensemble, local_unitary: &CMatrix, strength: f64) -> Result<Ensemble> {
    let partition = ensemble.partition().ok_or(Error::MissingPartition)?;
    let (da, _) = partition.require_bipartite()?;
    if local_unitary.nrows() != da {
        return Err(Error::DimensionMismatch {
            context: "local dephasing basis",
            expected: da,
            found: local_unitary.nrows(),
        });
    }
    if !(0.0..=1.0).contains(&strength) {
        return Err(Error::DomainError(strength));
    }
    let rest = ensemble.dim() / da;
    let projectors: Vec<CMatrix> = (0..da)
        .map(|i| linalg::tensor_product(&linalg::projector(&local_unitary.column(i).into_owned()), &linalg::identity(rest)))
        .collect();
    let members = ensemble
        .members()
        .iter()
        .map(|m| {
            let rho = m.signal.density().matrix().clone();
            let mut out = rho.scale(1.0 - strength);
            for p in &projectors {
                out += (p * &rho * p).scale(strength);
            }
            let out = (&out + out.adjoint()).scale(0.5);
            Ok((m.probability, Signal::Mixed(DensityOperator::new(out)?)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(members, Some(partition.clone()))
}

fn dephasing_row(sample: usize, cfg: &SweepConfig) -> Result<SweepRow> {
    let mut rng = sample_rng(cfg.seed, sample);
    let (ensemble, mut param) = bipartite_source(cfg.source, &mut rng)?;
    let strength: f64 = rng.random();
    let u = sampling::random_unitary(2, &mut rng);
    let dephased = dephase_first_subsystem(&ensemble, &u, strength)?;
    let family = BasisFamily::LocalProduct(ensemble.partition().expect("bipartite").clone());
    let before = qmeasure::quantum_correlation(&ensemble, &family, &cfg.measure)?;
    let after = qmeasure::quantum_correlation(&dephased, &family, &cfg.measure)?;

    if !param.is_empty() {
        param.push(';');
    }
    param.push_str(&format!("strength={strength:.6}"));
    let mut r = row("local-dephasing-monotonicity", sample, cfg.seed, &ensemble);
    r.param = param;
    r.q_upper = Some(before.value);
    r.q_lower = before.lower_bound;
    r.q_after = Some(after.value);
    r.delta_q = Some(after.value - before.value);
    r.candidate = after.value - before.value > DEPHASING_MARGIN;
    Ok(r)
}

fn heisenberg_row(sample: usize, cfg: &SweepConfig) -> Result<SweepRow> {
    let mut rng = sample_rng(cfg.seed, sample);
    let n = rng.random_range(2..=4usize);
    let dim = rng.random_range(2..=n.min(3));
    let ensemble = sampling::random_ensemble(dim, n, 0.5, None, &mut rng);
    let basis_seed: u64 = rng.random();
    let check = accinfo::heisenberg_restricted_check(&ensemble, cfg.bases, basis_seed, cfg.measure.optimizer.execution)?;

    let log2_n = (n as f64).log2();
    let mut r = row("random-heisenberg", sample, cfg.seed, &ensemble);
    r.param = format!("bases={}", cfg.bases);
    r.q_upper = Some(check.min_production);
    r.iacc_lower = Some(check.best_information);
    r.iacc_upper = Some(accinfo::holevo_bound(&ensemble));
    r.bound = Some(log2_n);
    r.slack = Some(-check.max_excess);
    r.violations = Some(check.violations);
    r.candidate = !check.holds();
    Ok(r)
}

/// Runs one sample. Rows are reproducible from `(kind, source, seed, sample)`.
pub fn sweep_row(sample: usize, cfg: &SweepConfig) -> Result<SweepRow> {
    match cfg.kind {
        SweepKind::ConjectureErGap => er_gap_row(sample, cfg),
        SweepKind::LocalDephasingMonotonicity => dephasing_row(sample, cfg),
        SweepKind::RandomHeisenberg => heisenberg_row(sample, cfg),
    }
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    (0..cfg.samples).map(|s| sweep_row(s, cfg)).collect()
}

pub fn write_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::OptimizerConfig;

    fn quick(kind: SweepKind, source: SweepSource) -> SweepConfig {
        SweepConfig {
            kind,
            source,
            samples: 2,
            seed: 3,
            bases: 50,
            measure: MeasureConfig {
                optimizer: OptimizerConfig { restarts: 2, max_evals_per_restart: 3000, ..OptimizerConfig::default() },
                ..MeasureConfig::default()
            },
        }
    }

    #[test]
    fn full_dephasing_of_bell_states_keeps_them_valid() {
        let e = catalog::bell_four().ensemble;
        let d = dephase_first_subsystem(&e, &linalg::identity(2), 1.0).unwrap();
        assert_eq!(d.len(), 4);
        assert!(d.members().iter().all(|m| (m.signal.density().purity() - 0.5).abs() < 1e-12));
    }

    #[test]
    fn csv_has_fixed_header() {
        let rows = run_sweep(&quick(SweepKind::RandomHeisenberg, SweepSource::Random)).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(text.lines().count(), 3);
        assert!(rows.iter().all(|r| !r.candidate));
    }

    #[test]
    fn b_prime_sits_on_the_gap_bound() {
        let rows = run_sweep(&quick(SweepKind::ConjectureErGap, SweepSource::BPrime)).unwrap();
        for r in rows {
            assert!(r.slack.unwrap() >= -1e-6, "{r:?}");
        }
    }
}
