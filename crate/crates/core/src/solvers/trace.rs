use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Per-iteration diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    /// Penalized objective at the central estimate.
    pub objective: f64,
    /// `maxₘ ‖βₘ − β‖₂`.
    pub consensus_residual: f64,
    /// `maxₘ ‖ỹₘ − X̃ₘβₘ − ξₘ + ηₘ‖₂` (with `rₘ` for the baseline).
    pub fit_residual: f64,
    /// `‖βᵏ − βᵏ⁻¹‖₂ / max(1, ‖βᵏ‖₂)`.
    pub rel_change: f64,
    /// Total mass removed by projecting corrected slacks onto the nonnegative orthant.
    pub clamped: f64,
    /// `‖gᵏ − gᵏ⁺¹‖_H`, filled in by the diagnostics.
    pub h_norm: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<TraceRecord>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub(crate) fn push<T: Real>(&mut self, r: RecordValues<T>) {
        self.records.push(TraceRecord {
            iteration: self.records.len() + 1,
            objective: r.objective.as_f64(),
            consensus_residual: r.consensus.as_f64(),
            fit_residual: r.fit.as_f64(),
            rel_change: r.rel_change.as_f64(),
            clamped: r.clamped.as_f64(),
            h_norm: None,
        });
    }

    /// Stopping-statistic history.
    pub fn rel_changes(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.rel_change).collect()
    }

    /// Writes the trace as CSV with a header row.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.records {
            out.serialize(r).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let records = rdr
            .deserialize()
            .collect::<std::result::Result<Vec<TraceRecord>, _>>()
            .map_err(csv_err)?;
        Ok(Self { records })
    }
}

pub(crate) struct RecordValues<T> {
    pub objective: T,
    pub consensus: T,
    pub fit: T,
    pub rel_change: T,
    pub clamped: T,
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        line,
        reason: e.to_string(),
    }
}
