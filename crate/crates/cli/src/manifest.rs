use std::fs;
use std::path::Path;

use qpadm_core::metrics::EvalReport;
use qpadm_core::solvers::TraceRecord;
use qpadm_core::{Dataset, Variant};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bench::Experiment;
use crate::{with_path, CliResult};

/// SHA-256 over the shape, task flags and little-endian values of a dataset.
pub fn fingerprint(data: &Dataset<f64>) -> String {
    let mut h = Sha256::new();
    h.update((data.n() as u64).to_le_bytes());
    h.update((data.p() as u64).to_le_bytes());
    h.update([data.has_intercept() as u8, data.labels().is_some() as u8]);
    for v in data.features().as_slice() {
        h.update(v.to_le_bytes());
    }
    for v in data.response() {
        h.update(v.to_le_bytes());
    }
    if let Some(l) = data.labels() {
        for v in l {
            h.update(v.to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Outcome of one (variant, M) fit within a replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub variant: Variant,
    pub blocks: usize,
    pub lambda: Option<f64>,
    /// LLA outer steps of the selected fit (1 for LASSO).
    pub outer_steps: Option<usize>,
    pub report: Option<EvalReport>,
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceRecord>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub index: usize,
    pub seed: u64,
    pub fingerprint: String,
    pub fits: Vec<FitRecord>,
}

/// Mean and sample standard deviation of one metric (`sd = 0` for a single value).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let sd = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        };
        Some(Self { mean, sd })
    }
}

/// Per (variant, M) aggregate; percentages for P1/P2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub variant: Variant,
    pub blocks: usize,
    pub succeeded: usize,
    pub failed: usize,
    pub p1: Option<Summary>,
    pub p2: Option<Summary>,
    pub ae: Option<Summary>,
    pub nonzero: Option<Summary>,
    pub sparsity: Option<Summary>,
    pub iterations: Option<Summary>,
    pub train_acc: Option<Summary>,
    pub test_acc: Option<Summary>,
    pub wall_time: Option<Summary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: Experiment,
    pub master_seed: u64,
    pub replications: Vec<Replication>,
    pub aggregates: Vec<Aggregate>,
}

pub fn write_json<S: Serialize>(value: &S, path: &Path) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| crate::CliError::failure(e.to_string()))?;
    with_path(fs::write(path, text + "\n"), path)
}
