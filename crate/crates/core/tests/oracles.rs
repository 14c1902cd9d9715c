//! Library results against independent, test-only computations. Oracle values are
//! computed here from first principles and frozen as constants.

use num_complex::Complex64;
use qensemble::accinfo::{self, Measurement};
use qensemble::basis::{BasisFamily, MeasurementBasis};
use qensemble::catalog;
use qensemble::entropy;
use qensemble::linalg::{c, CMatrix, CVector};
use qensemble::optimizer::{self, OptimizerConfig, UnitaryPoint};
use qensemble::qmeasure::{self, Direction, MeasureConfig};
use qensemble::qstate::{self, DensityOperator, Ensemble, PureState, SubsystemPartition};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

const H_COS2_PI_8: f64 = 0.600876036692856;
const H_QUARTER: f64 = 0.811278124459133;
const B_PRIME_03_05: f64 = 0.940645449615346;
const LOG2_3_MINUS_2_3: f64 = 0.918295834054490;
const ZERO_PLUS_Q: f64 = 0.5;

fn h2(p: f64) -> f64 {
    let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.log2() };
    term(p) + term(1.0 - p)
}

#[test]
fn frozen_constants_match_the_naive_formula() {
    assert!((h2((PI / 8.0).cos().powi(2)) - H_COS2_PI_8).abs() < 1e-14);
    assert!((h2(0.25) - H_QUARTER).abs() < 1e-14);
    assert!((0.5 * (h2(0.3) + h2(0.5)) - B_PRIME_03_05).abs() < 1e-14);
    assert!((3f64.log2() - 2.0 / 3.0 - LOG2_3_MINUS_2_3).abs() < 1e-14);
}

#[test]
fn binary_entropy_matches_oracle() {
    assert!((entropy::binary_entropy(0.25).unwrap() - H_QUARTER).abs() < 1e-12);
    assert!((entropy::binary_entropy((PI / 8.0).cos().powi(2)).unwrap() - H_COS2_PI_8).abs() < 1e-12);
}

fn random_state(dim: usize, rng: &mut ChaCha8Rng) -> PureState {
    qensemble::sampling::random_pure_state(dim, rng)
}

#[test]
fn partial_trace_matches_index_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (da, db) = (2, 3);
    let psi = random_state(da * db, &mut rng);
    let a = psi.amplitudes();
    let p = SubsystemPartition::bipartite(da, db);

    let mut keep_a = vec![vec![Complex64::new(0.0, 0.0); da]; da];
    for i in 0..da {
        for j in 0..da {
            for k in 0..db {
                keep_a[i][j] += a[i * db + k] * a[j * db + k].conj();
            }
        }
    }
    let lib = qstate::partial_trace(&psi.density(), &p, &[0]).unwrap();
    for i in 0..da {
        for j in 0..da {
            assert!((lib.matrix()[(i, j)] - keep_a[i][j]).norm() < 1e-12);
        }
    }

    let mut keep_b = vec![vec![Complex64::new(0.0, 0.0); db]; db];
    for i in 0..db {
        for j in 0..db {
            for k in 0..da {
                keep_b[i][j] += a[k * db + i] * a[k * db + j].conj();
            }
        }
    }
    let lib = qstate::partial_trace(&psi.density(), &p, &[1]).unwrap();
    for i in 0..db {
        for j in 0..db {
            assert!((lib.matrix()[(i, j)] - keep_b[i][j]).norm() < 1e-12);
        }
    }
}

#[test]
fn schmidt_coefficients_match_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let p = SubsystemPartition::bipartite(2, 2);
    for _ in 0..20 {
        let psi = random_state(4, &mut rng);
        let m = psi.amplitudes();
        // singular values squared of [[m0, m1], [m2, m3]]
        let t: f64 = m.iter().map(|z| z.norm_sqr()).sum();
        let det = (m[0] * m[3] - m[1] * m[2]).norm_sqr();
        let disc = (t * t - 4.0 * det).max(0.0).sqrt();
        let (hi, lo) = ((t + disc) / 2.0, (t - disc) / 2.0);
        let s = qstate::schmidt_coefficients(&psi, &p).unwrap();
        assert!((s[0] - hi).abs() < 1e-10 && (s[1] - lo).abs() < 1e-10);
        let e = qstate::entanglement_entropy(&psi, &p).unwrap();
        assert!((e - h2(hi)).abs() < 1e-10);
    }
}

/// `exp(i θ n·σ) = cos θ I + i sin θ n·σ`.
fn pauli_exponential(theta: f64, n: [f64; 3]) -> CMatrix {
    let (s, co) = theta.sin_cos();
    let i = c(0.0, 1.0);
    let ns = CMatrix::from_row_slice(2, 2, &[c(n[2], 0.0), c(n[0], -n[1]), c(n[0], n[1]), c(-n[2], 0.0)]);
    CMatrix::identity(2, 2).map(|z| z * co) + ns.map(|z| i * s * z)
}

fn generator(theta: f64, n: [f64; 3]) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(n[2], 0.0), c(n[0], -n[1]), c(n[0], n[1]), c(-n[2], 0.0)]).map(|z| z * theta)
}

#[test]
fn unitary_exponential_matches_pauli_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let v = qensemble::sampling::random_real_vector(4, &mut rng);
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let n = [v[0] / norm, v[1] / norm, v[2] / norm];
        let u = optimizer::unitary_from_generator(&UnitaryPoint::new(generator(v[3], n)).unwrap());
        let want = pauli_exponential(v[3], n);
        assert!((u - want).iter().all(|z| z.norm() < 1e-12));
    }
    // -π/4 about Y sends |0⟩ to |+⟩; π/2 about Y sends it to |1⟩ up to phase
    let u = optimizer::unitary_from_generator(&UnitaryPoint::new(generator(-PI / 4.0, [0.0, 1.0, 0.0])).unwrap());
    assert!((u[(0, 0)] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
    assert!((u[(1, 0)] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
    let u = optimizer::unitary_from_generator(&UnitaryPoint::new(generator(PI / 2.0, [0.0, 1.0, 0.0])).unwrap());
    assert!(u[(0, 0)].norm() < 1e-12 && (u[(1, 0)].norm() - 1.0).abs() < 1e-12);
}

fn zero_plus() -> Ensemble {
    Ensemble::uniform(
        vec![
            PureState::basis(2, 0).into(),
            PureState::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap().into(),
        ],
        None,
    )
    .unwrap()
}

/// Entropy production of `{|0⟩, |+⟩}` in the real basis with Bloch direction `beta`.
fn zero_plus_production(beta: f64) -> f64 {
    0.5 * (h2((beta / 2.0).cos().powi(2)) + h2(((PI / 2.0 - beta) / 2.0).cos().powi(2)))
}

/// Mutual information of `{|0⟩, |+⟩}` in the same basis, via the joint table.
fn zero_plus_information(beta: f64) -> f64 {
    let click = |x: usize| {
        let angle = if x == 0 { 0.0 } else { PI / 2.0 };
        ((beta - angle) / 2.0).cos().powi(2)
    };
    let mut info = 0.0;
    for y in 0..2 {
        let cond = |x: usize| if y == 0 { click(x) } else { 1.0 - click(x) };
        let r = 0.5 * (cond(0) + cond(1));
        for x in 0..2 {
            let joint = 0.5 * cond(x);
            if joint > 0.0 {
                info += joint * (joint / (0.5 * r)).log2();
            }
        }
    }
    info
}

#[test]
fn zero_plus_real_plane_scan() {
    let steps = 200_000;
    let (mut q, mut i) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..steps {
        let beta = PI * k as f64 / steps as f64;
        q = q.min(zero_plus_production(beta));
        i = i.max(zero_plus_information(beta));
    }
    assert!((q - ZERO_PLUS_Q).abs() < 1e-12);
    assert!((i - (1.0 - H_COS2_PI_8)).abs() < 1e-8);
}

#[test]
fn zero_plus_library_matches_oracles() {
    let e = zero_plus();
    let report = qmeasure::quantum_correlation(&e, &BasisFamily::FullUnitary, &MeasureConfig::default()).unwrap();
    assert!((report.value - ZERO_PLUS_Q).abs() < 1e-6);
    assert_eq!(report.direction, Direction::Exact);
    // the symmetric basis is not optimal for production
    let symmetric = optimizer::qubit_basis(PI / 4.0, 0.0);
    assert!((qmeasure::entropy_production(&e, &symmetric).unwrap() - H_COS2_PI_8).abs() < 1e-12);

    let iacc = accinfo::accessible_info_projective(&e, &OptimizerConfig::default(), false).unwrap();
    assert!((iacc.value - (1.0 - H_COS2_PI_8)).abs() < 1e-6);
    assert!((accinfo::holevo_bound(&e) - H_COS2_PI_8).abs() < 1e-12);
}

#[test]
fn bayes_table_for_three_bell_local_computational() {
    // outcome 00/11 for φ±, 01/10 for ψ+; the φ pair stays ambiguous
    let priors = [1.0 / 3.0; 3];
    let cond = [[0.5, 0.0, 0.0, 0.5], [0.5, 0.0, 0.0, 0.5], [0.0, 0.5, 0.5, 0.0]];
    let mut oracle = 0.0;
    for y in 0..4 {
        let r: f64 = (0..3).map(|x| priors[x] * cond[x][y]).sum();
        for x in 0..3 {
            let joint = priors[x] * cond[x][y];
            if joint > 0.0 {
                oracle += joint * (joint / (priors[x] * r)).log2();
            }
        }
    }
    assert!((oracle - LOG2_3_MINUS_2_3).abs() < 1e-12);

    let entry = catalog::three_bell();
    let m = Measurement::ProjectiveLocalProduct(vec![MeasurementBasis::computational(2), MeasurementBasis::computational(2)]);
    let (via_x, via_y) = accinfo::mutual_information_routes(&entry.ensemble, &m).unwrap();
    assert!((via_x - oracle).abs() < 1e-12 && (via_y - oracle).abs() < 1e-12);
}

#[test]
fn canonical_set_gram_matrix() {
    for d in [2usize, 3, 4] {
        let state = |n: usize, m: usize| -> Vec<Complex64> {
            let mut v = vec![Complex64::new(0.0, 0.0); d * d];
            for j in 0..d {
                v[j * d + (j + m) % d] = Complex64::from_polar(1.0 / (d as f64).sqrt(), 2.0 * PI * (j * n) as f64 / d as f64);
            }
            v
        };
        let states: Vec<Vec<Complex64>> = (0..d).flat_map(|n| (0..d).map(move |m| (n, m))).map(|(n, m)| state(n, m)).collect();
        for (a, sa) in states.iter().enumerate() {
            for (b, sb) in states.iter().enumerate() {
                let ip: Complex64 = sa.iter().zip(sb).map(|(x, y)| x.conj() * y).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((ip - want).norm() < 1e-10);
            }
        }
        let entry = catalog::canonical_maxent(d).unwrap();
        for (member, s) in entry.ensemble.members().iter().zip(&states) {
            let psi = member.signal.as_pure().unwrap();
            assert!(psi.amplitudes().iter().zip(s).all(|(x, y)| (x - y).norm() < 1e-12));
        }
    }
}

#[test]
fn b_prime_lower_bound_matches_binary_entropy_oracle() {
    let e = catalog::b_prime_real(0.3, 0.5).unwrap();
    let lb = qmeasure::avg_entanglement_lower_bound(&e.ensemble).unwrap();
    assert!((lb - B_PRIME_03_05).abs() < 1e-12);
}

#[test]
fn relative_entropy_of_diagonal_pair() {
    let rho = DensityOperator::diagonal(&[0.75, 0.25]).unwrap();
    let sigma = DensityOperator::maximally_mixed(2);
    assert!((entropy::relative_entropy(&rho, &sigma).unwrap() - (1.0 - H_QUARTER)).abs() < 1e-12);
    let pure0 = DensityOperator::diagonal(&[1.0, 0.0]).unwrap();
    let pure1 = DensityOperator::diagonal(&[0.0, 1.0]).unwrap();
    assert!(entropy::relative_entropy(&pure0, &pure1).unwrap().is_infinite());
}

#[test]
fn grid_oracle_brackets_zero_plus() {
    let e = zero_plus();
    let objective = qmeasure::ProductionObjective::new(&e);
    let grid = optimizer::qubit_grid_oracle(
        &|b: &MeasurementBasis| objective.evaluate(b),
        2,
        1e-3,
        optimizer::Mode::Minimize,
        Default::default(),
    )
    .unwrap();
    assert!((grid.value - ZERO_PLUS_Q).abs() < 2e-3);
    let info = |b: &MeasurementBasis| accinfo::mutual_information(&e, &Measurement::ProjectiveGlobal(b.clone())).unwrap();
    let grid = optimizer::qubit_grid_oracle(&info, 2, 1e-3, optimizer::Mode::Maximize, Default::default()).unwrap();
    assert!((grid.value - (1.0 - H_COS2_PI_8)).abs() < 2e-3);
}

#[test]
fn sampling_never_beats_bell_minimum() {
    let e = catalog::bell_four().ensemble;
    let objective = qmeasure::ProductionObjective::new(&e);
    let family = BasisFamily::LocalProduct(SubsystemPartition::bipartite(2, 2));
    let s = optimizer::random_sampling_oracle(
        &|b: &MeasurementBasis| objective.evaluate(b),
        &family,
        4,
        10_000,
        5,
        optimizer::Mode::Minimize,
        Default::default(),
    )
    .unwrap();
    assert!(s.value >= 1.0 - 1e-9);
}

#[test]
fn amplitudes_of_b_prime_states() {
    let e = catalog::b_prime(c(0.6, 0.0), c(0.0, 0.8), c(FRAC_1_SQRT_2, 0.0), c(0.0, -FRAC_1_SQRT_2)).unwrap();
    let second = e.ensemble.members()[1].signal.as_pure().unwrap();
    let want = CVector::from_vec(vec![c(0.0, -0.8), c(0.0, 0.0), c(0.0, 0.0), c(-0.6, 0.0)]);
    assert!((second.amplitudes() - want).norm() < 1e-12);
}
