//! Derivative-free optimization over unitary-parametrized basis families, plus
//! brute-force oracles used to certify results in small dimension.
//!
//! A point of the search space is a list of real generator parameters. For a
//! `d`-dimensional factor the `d²` parameters fill a Hermitian matrix `G`
//! (diagonal first, then real and imaginary parts of the upper triangle) and the
//! basis is given by the columns of `exp(iG)`. Local-product families use one
//! generator per subsystem and take the tensor product of the local unitaries.
//!
//! Restart 0 always starts at the zero generator, i.e. the computational basis
//! (or its tensor-product analogue). Restarts are independent and are reduced
//! in index order, so the result does not depend on [`Execution`].

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::basis::{BasisFamily, MeasurementBasis};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::linalg::{self, c, CMatrix, HermitianEigen};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_evals_per_restart: usize,
    pub seed: u64,
    /// Stop when the spread of objective values across the simplex falls below this.
    pub convergence_tol: f64,
    /// Initial simplex step in generator units (radians).
    pub simplex_scale: f64,
    #[serde(default)]
    pub execution: Execution,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_evals_per_restart: 20_000,
            seed: 0x5eed,
            convergence_tol: 1e-9,
            simplex_scale: 0.3,
            execution: Execution::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_evals_per_restart == 0 {
            return Err(Error::InvalidConfig(
                "restarts and max_evals_per_restart must be positive".into(),
            ));
        }
        if !(self.convergence_tol > 0.0 && self.simplex_scale > 0.0) {
            return Err(Error::InvalidConfig(
                "convergence_tol and simplex_scale must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Minimize,
    Maximize,
}

impl Mode {
    fn sign(self) -> f64 {
        match self {
            Mode::Minimize => 1.0,
            Mode::Maximize => -1.0,
        }
    }
}

/// Hermitian generator of a unitary `exp(iG)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryPoint {
    generator: CMatrix,
}

impl UnitaryPoint {
    pub fn new(generator: CMatrix) -> Result<Self> {
        if generator.nrows() != generator.ncols() {
            return Err(Error::DimensionMismatch {
                context: "generator must be square",
                expected: generator.nrows(),
                found: generator.ncols(),
            });
        }
        if !linalg::is_finite(&generator) {
            return Err(Error::NonFinite);
        }
        let deviation = linalg::hermiticity_deviation(&generator);
        if deviation > 1e-10 {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { generator })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            generator: CMatrix::zeros(dim, dim),
        }
    }

    /// Builds the generator from `dim²` real parameters.
    pub fn from_params(dim: usize, params: &[f64]) -> Result<Self> {
        if params.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                context: "generator parameters",
                expected: dim * dim,
                found: params.len(),
            });
        }
        Ok(Self {
            generator: generator_from_params(dim, params),
        })
    }

    pub fn dim(&self) -> usize {
        self.generator.nrows()
    }

    pub fn generator(&self) -> &CMatrix {
        &self.generator
    }
}

fn generator_from_params(dim: usize, params: &[f64]) -> CMatrix {
    let mut g = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        g[(i, i)] = c(params[i], 0.0);
    }
    let mut k = dim;
    for i in 0..dim {
        for j in (i + 1)..dim {
            let z = c(params[k], params[k + 1]);
            g[(i, j)] = z;
            g[(j, i)] = z.conj();
            k += 2;
        }
    }
    g
}

/// `exp(iG)` through the eigendecomposition `G = V Λ V†`.
pub fn unitary_from_generator(point: &UnitaryPoint) -> CMatrix {
    exp_i_hermitian(&point.generator)
}

fn exp_i_hermitian(g: &CMatrix) -> CMatrix {
    if g.iter().all(|z| *z == linalg::ZERO) {
        return linalg::identity(g.nrows());
    }
    HermitianEigen::new(g)
        .expect("finite generator")
        .map_spectrum(|l| c(l.cos(), l.sin()))
}

/// Parametrized view of a [`BasisFamily`] at a fixed ambient dimension.
#[derive(Debug, Clone)]
pub(crate) enum SearchSpace {
    Full(usize),
    Local(Vec<usize>),
    Fixed(MeasurementBasis),
}

impl SearchSpace {
    pub(crate) fn new(family: &BasisFamily, dim: usize) -> Result<Self> {
        family.check_dim(dim)?;
        Ok(match family {
            BasisFamily::FullUnitary => SearchSpace::Full(dim),
            BasisFamily::LocalProduct(p) => SearchSpace::Local(p.local_dims().to_vec()),
            BasisFamily::Explicit { basis, .. } => SearchSpace::Fixed(basis.clone()),
        })
    }

    pub(crate) fn n_params(&self) -> usize {
        match self {
            SearchSpace::Full(d) => d * d,
            SearchSpace::Local(dims) => dims.iter().map(|d| d * d).sum(),
            SearchSpace::Fixed(_) => 0,
        }
    }

    pub(crate) fn basis_at(&self, params: &[f64]) -> MeasurementBasis {
        match self {
            SearchSpace::Full(d) => MeasurementBasis::from_unitary_unchecked(exp_i_hermitian(
                &generator_from_params(*d, params),
            )),
            SearchSpace::Local(dims) => {
                let mut offset = 0;
                let mut u: Option<CMatrix> = None;
                for &d in dims {
                    let local = exp_i_hermitian(&generator_from_params(d, &params[offset..offset + d * d]));
                    offset += d * d;
                    u = Some(match u {
                        None => local,
                        Some(acc) => linalg::tensor_product(&acc, &local),
                    });
                }
                MeasurementBasis::from_unitary_unchecked(u.expect("nonempty partition"))
            }
            SearchSpace::Fixed(b) => b.clone(),
        }
    }

    fn random_params(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..self.n_params())
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                z * PI / 2.0
            })
            .collect()
    }
}

/// A random basis of `family`, drawn from a Gaussian generator in each factor.
pub fn random_basis(family: &BasisFamily, dim: usize, rng: &mut ChaCha8Rng) -> Result<MeasurementBasis> {
    let space = SearchSpace::new(family, dim)?;
    Ok(space.basis_at(&space.random_params(rng)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerTrace {
    pub restarts: usize,
    pub best_per_restart: Vec<f64>,
    pub evaluations: u64,
    pub best_restart: usize,
    /// The winning restart hit its evaluation budget before converging.
    pub budget_exhausted: bool,
}

#[derive(Debug, Clone)]
pub struct OptimizeResult {
    pub value: f64,
    pub basis: MeasurementBasis,
    pub trace: OptimizerTrace,
}

struct SimplexRun {
    x: Vec<f64>,
    value: f64,
    evals: usize,
    converged: bool,
}

/// Nelder–Mead with coefficients reflect 1, expand 2, contract ½, shrink ½.
fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    scale: f64,
    max_evals: usize,
    tol: f64,
) -> SimplexRun {
    let n = x0.len();
    let mut evals = 0usize;
    let eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += scale;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p, &mut evals)).collect();
    if n == 0 {
        return SimplexRun {
            x: x0.to_vec(),
            value: vals[0],
            evals,
            converged: true,
        };
    }
    let mut converged = false;
    loop {
        // stable sort keeps the older point first on ties
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        if (vals[n] - vals[0]).abs() <= tol {
            converged = true;
            break;
        }
        if evals >= max_evals {
            break;
        }
        let mut centroid = vec![0.0; n];
        for p in &pts[..n] {
            for (cj, pj) in centroid.iter_mut().zip(p) {
                *cj += pj / n as f64;
            }
        }
        let along = |t: f64, from: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(from)
                .map(|(cj, fj)| cj + t * (fj - cj))
                .collect()
        };
        let xr = along(-1.0, &pts[n]);
        let fr = eval(&xr, &mut evals);
        if fr < vals[0] {
            let xe = along(-2.0, &pts[n]);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc, accept) = if fr < vals[n] {
            let xc = along(-0.5, &pts[n]);
            let fc = eval(&xc, &mut evals);
            (xc, fc, fc <= fr)
        } else {
            let xc = along(0.5, &pts[n]);
            let fc = eval(&xc, &mut evals);
            (xc, fc, fc < vals[n])
        };
        if accept {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        let best = pts[0].clone();
        for i in 1..=n {
            pts[i] = best
                .iter()
                .zip(&pts[i])
                .map(|(b, p)| b + 0.5 * (p - b))
                .collect();
            vals[i] = eval(&pts[i], &mut evals);
        }
    }
    SimplexRun {
        x: pts.swap_remove(0),
        value: vals[0],
        evals,
        converged,
    }
}

/// One restart: simplex descent, re-seeded around the incumbent until a fresh simplex
/// no longer improves it.
fn run_restart(
    f: &dyn Fn(&[f64]) -> f64,
    x0: Vec<f64>,
    cfg: &OptimizerConfig,
) -> SimplexRun {
    let mut run = nelder_mead(f, &x0, cfg.simplex_scale, cfg.max_evals_per_restart, cfg.convergence_tol);
    while run.converged && run.evals < cfg.max_evals_per_restart && !x0.is_empty() {
        let budget = cfg.max_evals_per_restart - run.evals;
        let next = nelder_mead(f, &run.x, cfg.simplex_scale, budget, cfg.convergence_tol);
        let improved = run.value - next.value > cfg.convergence_tol;
        let evals = run.evals + next.evals;
        if next.value < run.value {
            run = SimplexRun { evals, ..next };
        } else {
            run.evals = evals;
            run.converged = next.converged || run.converged;
        }
        if !improved {
            break;
        }
    }
    run
}

fn optimize<F>(objective: &F, family: &BasisFamily, dim: usize, cfg: &OptimizerConfig, mode: Mode) -> Result<OptimizeResult>
where
    F: Fn(&MeasurementBasis) -> f64 + Sync,
{
    cfg.validate()?;
    let space = SearchSpace::new(family, dim)?;
    let sign = mode.sign();
    let f = |x: &[f64]| sign * objective(&space.basis_at(x));
    let restarts = if space.n_params() == 0 { 1 } else { cfg.restarts };
    let runs = exec::map_indexed(restarts, cfg.execution, |r| {
        let x0 = if r == 0 {
            vec![0.0; space.n_params()]
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(r as u64);
            space.random_params(&mut rng)
        };
        run_restart(&f, x0, cfg)
    });
    let mut best = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.value < runs[best].value {
            best = r;
        }
    }
    let trace = OptimizerTrace {
        restarts,
        best_per_restart: runs.iter().map(|r| sign * r.value).collect(),
        evaluations: runs.iter().map(|r| r.evals as u64).sum(),
        best_restart: best,
        budget_exhausted: !runs[best].converged,
    };
    Ok(OptimizeResult {
        value: sign * runs[best].value,
        basis: space.basis_at(&runs[best].x),
        trace,
    })
}

/// Minimizes `objective` over the bases of `family` in ambient dimension `dim`.
pub fn minimize<F>(objective: &F, family: &BasisFamily, dim: usize, cfg: &OptimizerConfig) -> Result<OptimizeResult>
where
    F: Fn(&MeasurementBasis) -> f64 + Sync,
{
    optimize(objective, family, dim, cfg, Mode::Minimize)
}

pub fn maximize<F>(objective: &F, family: &BasisFamily, dim: usize, cfg: &OptimizerConfig) -> Result<OptimizeResult>
where
    F: Fn(&MeasurementBasis) -> f64 + Sync,
{
    optimize(objective, family, dim, cfg, Mode::Maximize)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOracleResult {
    pub value: f64,
    /// Bloch polar angle of the first basis vector.
    pub theta: f64,
    pub phi: f64,
    /// Sum of the largest objective changes between grid neighbours along each axis.
    pub slack: f64,
    pub evaluations: u64,
}

/// Qubit basis `{|n⟩, |n⊥⟩}` with `|n⟩ = cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
pub fn qubit_basis(theta: f64, phi: f64) -> MeasurementBasis {
    let (s, co) = (theta / 2.0).sin_cos();
    let e = c(phi.cos(), phi.sin());
    let m = CMatrix::from_row_slice(2, 2, &[c(co, 0.0), -e.conj() * s, e * s, c(co, 0.0)]);
    MeasurementBasis::from_unitary_unchecked(m)
}

const GRID_ROWS_PER_TASK: usize = 16;

/// Exhaustive scan of qubit bases over `θ ∈ [0, π/2]`, `φ ∈ [0, 2π)` at the given step.
pub fn qubit_grid_oracle<F>(objective: &F, dim: usize, resolution: f64, mode: Mode, execution: Execution) -> Result<GridOracleResult>
where
    F: Fn(&MeasurementBasis) -> f64 + Sync,
{
    if dim != 2 {
        return Err(Error::DimensionMismatch {
            context: "qubit grid oracle",
            expected: 2,
            found: dim,
        });
    }
    if !(resolution > 0.0 && resolution < 1.0) {
        return Err(Error::InvalidConfig(format!("grid resolution {resolution} must lie in (0, 1)")));
    }
    let n_theta = (PI / 2.0 / resolution).ceil() as usize + 1;
    let n_phi = (2.0 * PI / resolution).ceil() as usize;
    let theta_at = |i: usize| (i as f64 * resolution).min(PI / 2.0);
    let phi_at = |j: usize| j as f64 * resolution;
    let sign = mode.sign();
    let row = |i: usize| -> Vec<f64> {
        (0..n_phi)
            .map(|j| sign * objective(&qubit_basis(theta_at(i), phi_at(j))))
            .collect()
    };
    let tasks = n_theta.div_ceil(GRID_ROWS_PER_TASK);
    // (best value, theta index, phi index, max dθ, max dφ)
    let partial = exec::map_indexed(tasks, execution, |t| {
        let start = t * GRID_ROWS_PER_TASK;
        let end = ((t + 1) * GRID_ROWS_PER_TASK).min(n_theta);
        let mut best = (f64::INFINITY, start, 0usize);
        let (mut d_theta, mut d_phi) = (0.0f64, 0.0f64);
        let mut prev: Option<Vec<f64>> = None;
        for i in start..end {
            let values = row(i);
            for j in 0..n_phi {
                if values[j] < best.0 {
                    best = (values[j], i, j);
                }
                if j + 1 < n_phi {
                    d_phi = d_phi.max((values[j + 1] - values[j]).abs());
                }
            }
            if let Some(p) = &prev {
                d_theta = p.iter().zip(&values).fold(d_theta, |m, (a, b)| m.max((a - b).abs()));
            }
            prev = Some(values);
        }
        // neighbour row of the next task, for the θ-difference across the boundary
        if end < n_theta {
            let next = row(end);
            let last = prev.expect("nonempty chunk");
            d_theta = last.iter().zip(&next).fold(d_theta, |m, (a, b)| m.max((a - b).abs()));
        }
        (best, d_theta, d_phi)
    });
    let mut best = (f64::INFINITY, 0, 0);
    let (mut d_theta, mut d_phi) = (0.0f64, 0.0f64);
    for (b, dt, dp) in partial {
        if b.0 < best.0 {
            best = b;
        }
        d_theta = d_theta.max(dt);
        d_phi = d_phi.max(dp);
    }
    Ok(GridOracleResult {
        value: sign * best.0,
        theta: theta_at(best.1),
        phi: phi_at(best.2),
        slack: d_theta + d_phi,
        evaluations: (n_theta * n_phi + tasks.saturating_sub(1) * n_phi) as u64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingResult {
    pub value: f64,
    pub samples: usize,
}

/// Best objective over `samples` random bases of `family`. A statistical bracket only.
pub fn random_sampling_oracle<F>(
    objective: &F,
    family: &BasisFamily,
    dim: usize,
    samples: usize,
    seed: u64,
    mode: Mode,
    execution: Execution,
) -> Result<SamplingResult>
where
    F: Fn(&MeasurementBasis) -> f64 + Sync,
{
    let space = SearchSpace::new(family, dim)?;
    let sign = mode.sign();
    let samples = samples.max(1);
    let values = exec::map_indexed(samples, execution, |s| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(s as u64);
        sign * objective(&space.basis_at(&space.random_params(&mut rng)))
    });
    let best = values.into_iter().fold(f64::INFINITY, f64::min);
    Ok(SamplingResult {
        value: sign * best,
        samples,
    })
}
