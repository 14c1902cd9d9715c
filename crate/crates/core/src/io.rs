//! JSON file formats for ensembles and explicit measurement bases.
//!
//! Complex numbers are `[re, im]` pairs. Mixed-state matrices are row-major.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::basis::{BasisFamily, MeasurementBasis};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector};
use crate::qstate::{DensityOperator, Ensemble, PureState, Signal, SubsystemPartition};

pub const FORMAT_VERSION: &str = "1";

/// Sums and norms within this distance of 1 are silently renormalized.
pub const RENORMALIZE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleFile {
    pub format_version: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsystems: Option<Vec<usize>>,
    pub states: Vec<StateEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StateEntry {
    Pure { probability: f64, amplitudes: Vec<[f64; 2]> },
    Mixed { probability: f64, matrix: Vec<[f64; 2]> },
}

impl StateEntry {
    pub fn probability(&self) -> f64 {
        match self {
            StateEntry::Pure { probability, .. } | StateEntry::Mixed { probability, .. } => *probability,
        }
    }
}

fn field_error(field: impl Into<String>, message: impl ToString) -> Error {
    Error::File { field: field.into(), message: message.to_string() }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let field = if path == "." { "document".to_string() } else { path };
        field_error(field, format!("{inner}"))
    })
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

impl EnsembleFile {
    pub fn parse(text: &str) -> Result<Self> {
        parse_json(text)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn from_ensemble(ensemble: &Ensemble) -> Self {
        let states = ensemble
            .members()
            .iter()
            .map(|m| match &m.signal {
                Signal::Pure(psi) => StateEntry::Pure {
                    probability: m.probability,
                    amplitudes: psi.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
                },
                Signal::Mixed(rho) => {
                    let mat = rho.matrix();
                    let d = mat.nrows();
                    StateEntry::Mixed {
                        probability: m.probability,
                        matrix: (0..d * d).map(|k| mat[(k / d, k % d)]).map(|z| [z.re, z.im]).collect(),
                    }
                }
            })
            .collect();
        Self {
            format_version: FORMAT_VERSION.into(),
            dim: ensemble.dim(),
            subsystems: ensemble.partition().map(|p| p.local_dims().to_vec()),
            states,
        }
    }

    pub fn to_ensemble(&self) -> Result<Ensemble> {
        if self.format_version != FORMAT_VERSION {
            return Err(field_error(
                "format_version",
                format!("unsupported version '{}', expected '{FORMAT_VERSION}'", self.format_version),
            ));
        }
        if self.dim == 0 {
            return Err(field_error("dim", "must be positive"));
        }
        if self.states.is_empty() {
            return Err(field_error("states", "no states given"));
        }
        let partition = match &self.subsystems {
            Some(dims) => {
                let p = SubsystemPartition::new(dims.clone()).map_err(|e| field_error("subsystems", e))?;
                p.check_dim(self.dim).map_err(|e| field_error("subsystems", e))?;
                Some(p)
            }
            None => None,
        };

        let total: f64 = self.states.iter().map(StateEntry::probability).sum();
        for (i, s) in self.states.iter().enumerate() {
            let p = s.probability();
            if !p.is_finite() || p < 0.0 {
                return Err(field_error(format!("states[{i}].probability"), format!("{p} is not a probability")));
            }
        }
        if (total - 1.0).abs() > RENORMALIZE_TOL {
            return Err(field_error("states[*].probability", format!("probabilities sum to {total}, expected 1")));
        }

        let d = self.dim;
        let mut members = Vec::with_capacity(self.states.len());
        for (i, s) in self.states.iter().enumerate() {
            let signal = match s {
                StateEntry::Pure { amplitudes, .. } => {
                    let field = format!("states[{i}].amplitudes");
                    if amplitudes.len() != d {
                        return Err(field_error(field, format!("{} entries, expected {d}", amplitudes.len())));
                    }
                    let v = CVector::from_iterator(d, amplitudes.iter().map(|[re, im]| c(*re, *im)));
                    let norm = v.norm();
                    if !norm.is_finite() || (norm - 1.0).abs() > RENORMALIZE_TOL {
                        return Err(field_error(field, format!("norm {norm}, expected 1")));
                    }
                    Signal::Pure(PureState::normalized(v).map_err(|e| field_error(field, e))?)
                }
                StateEntry::Mixed { matrix, .. } => {
                    let field = format!("states[{i}].matrix");
                    if matrix.len() != d * d {
                        return Err(field_error(field, format!("{} entries, expected {}", matrix.len(), d * d)));
                    }
                    let m = CMatrix::from_fn(d, d, |r, col| {
                        let [re, im] = matrix[r * d + col];
                        c(re, im)
                    });
                    let trace = m.trace().re;
                    if !trace.is_finite() || (trace - 1.0).abs() > RENORMALIZE_TOL {
                        return Err(field_error(field, format!("trace {trace}, expected 1")));
                    }
                    Signal::Mixed(DensityOperator::new(m.unscale(trace)).map_err(|e| field_error(field, e))?)
                }
            };
            members.push((s.probability() / total, signal));
        }
        Ensemble::new(members, partition).map_err(|e| field_error("states", e))
    }
}

pub fn read_ensemble(path: &Path) -> Result<Ensemble> {
    EnsembleFile::read(path)?.to_ensemble()
}

pub fn write_ensemble(path: &Path, ensemble: &Ensemble) -> Result<()> {
    std::fs::write(path, EnsembleFile::from_ensemble(ensemble).to_json())
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// An explicit basis for the `explicit:<path>` family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisFile {
    pub format_version: String,
    pub dim: usize,
    /// Each vector is a list of `[re, im]` amplitudes.
    pub vectors: Vec<Vec<[f64; 2]>>,
    /// The user vouches that the basis is distinguishable under the allowed operations.
    #[serde(default)]
    pub certified: bool,
    #[serde(default)]
    pub note: String,
}

impl BasisFile {
    pub fn parse(text: &str) -> Result<Self> {
        parse_json(text)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?)
    }

    pub fn to_family(&self) -> Result<BasisFamily> {
        if self.format_version != FORMAT_VERSION {
            return Err(field_error("format_version", format!("unsupported version '{}'", self.format_version)));
        }
        let d = self.dim;
        if self.vectors.len() != d {
            return Err(field_error("vectors", format!("{} vectors, expected {d}", self.vectors.len())));
        }
        let mut states = Vec::with_capacity(d);
        for (i, v) in self.vectors.iter().enumerate() {
            let field = format!("vectors[{i}]");
            if v.len() != d {
                return Err(field_error(field, format!("{} entries, expected {d}", v.len())));
            }
            let v = CVector::from_iterator(d, v.iter().map(|[re, im]| c(*re, *im)));
            states.push(PureState::normalized(v).map_err(|e| field_error(field, e))?);
        }
        let basis = MeasurementBasis::new(&states).map_err(|e| field_error("vectors", e))?;
        Ok(BasisFamily::Explicit {
            basis,
            certified: self.certified,
            certificate_note: self.note.clone(),
        })
    }
}
