use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::model::{Dataset, Task};
use crate::scalar::Real;

use super::libsvm::open_maybe_gz;

/// Dense CSV layout: one sample per row, response (or ±1 label) in the last column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvOptions {
    pub header: bool,
    pub task: Task,
    /// Prepend an all-ones column.
    pub intercept: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            header: true,
            task: Task::Regression,
            intercept: false,
        }
    }
}

pub fn parse_csv<T: Real, R: Read>(reader: R, opts: CsvOptions) -> Result<Dataset<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(opts.header)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut values: Vec<Vec<f64>> = Vec::new();
    let first_line = if opts.header { 2 } else { 1 };
    for (k, rec) in rdr.records().enumerate() {
        let line = first_line + k;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            reason: e.to_string(),
        })?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    reason: format!("bad number `{f}`"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if row.len() < 2 {
            return Err(Error::Parse {
                line,
                reason: "need at least one feature and a response".into(),
            });
        }
        values.push(row);
    }
    if values.is_empty() {
        return Err(Error::Data("no samples in CSV input".into()));
    }
    let offset = usize::from(opts.intercept);
    let p = values[0].len() - 1;
    let n = values.len();
    let x = DenseMatrix::from_fn(n, p + offset, |i, j| {
        if j < offset {
            T::one()
        } else {
            T::lit(values[i][j - offset])
        }
    });
    let y: Vec<T> = values.iter().map(|r| T::lit(r[p])).collect();
    match opts.task {
        Task::Regression => Dataset::regression(x, y, opts.intercept),
        Task::Classification => Dataset::classification(x, y, opts.intercept),
    }
}

pub fn read_csv<T: Real>(path: &Path, opts: CsvOptions) -> Result<Dataset<T>> {
    parse_csv(open_maybe_gz(path)?, opts)
}

/// Writes raw features and response (labels for classification) with a header row `x1..xp,y`.
pub fn write_csv<T: Real, W: Write>(data: &Dataset<T>, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let x = data.raw_features();
    let offset = usize::from(data.has_intercept());
    let y = data.labels().unwrap_or(data.response());
    let mut header: Vec<String> = (1..=x.cols() - offset).map(|j| format!("x{j}")).collect();
    header.push("y".into());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    out.write_record(&header).map_err(io)?;
    for (i, &yi) in y.iter().enumerate() {
        let mut rec: Vec<String> = (offset..x.cols()).map(|j| x[(i, j)].to_string()).collect();
        rec.push(yi.to_string());
        out.write_record(&rec).map_err(io)?;
    }
    out.flush()?;
    Ok(())
}
