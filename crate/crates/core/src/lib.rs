//! Quantumness of ensembles of quantum states.
//!
//! The central quantity is the smallest entropy an ensemble produces when it is
//! dephased in a basis its signals can be distinguished in. Around it the crate
//! provides accessible information bounds, a complementarity checker, a catalog
//! of reference ensembles and a command-line front end.

pub mod accinfo;
pub mod basis;
pub mod catalog;
pub mod cli;
pub mod entropy;
pub mod error;
pub mod exec;
pub mod io;
pub mod linalg;
pub mod optimizer;
pub mod qmeasure;
pub mod qstate;
pub mod sampling;
pub mod sweep;

pub use error::{Error, Result};
pub use exec::Execution;
