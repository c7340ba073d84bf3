use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::model::Dataset;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LibsvmOptions {
    /// Feature count; defaults to the largest index seen.
    pub dims: Option<usize>,
    /// Prepend an all-ones column.
    pub intercept: bool,
}

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

fn parse_label(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, format!("bad label `{tok}`")))?;
    match v {
        v if v == 1.0 => Ok(1.0),
        v if v == -1.0 || v == 0.0 => Ok(-1.0),
        _ => Err(parse_err(line, format!("label `{tok}` is not one of -1, 0, +1"))),
    }
}

/// Parses `<label> <index>:<value> ...` lines into a classification dataset.
///
/// Blank lines and `#` comments are skipped; labels `0` map to `−1`.
pub fn parse_libsvm<T: Real, R: BufRead>(reader: R, opts: LibsvmOptions) -> Result<Dataset<T>> {
    let mut labels = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut max_index = 0;
    for (k, line) in reader.lines().enumerate() {
        let lineno = k + 1;
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut toks = body.split_ascii_whitespace();
        let label = parse_label(toks.next().unwrap_or_default(), lineno)?;
        let mut entries = Vec::new();
        let mut last = 0;
        for tok in toks {
            let (i, v) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("token `{tok}` is not index:value")))?;
            let idx: usize = i
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad index `{i}`")))?;
            let val: f64 = v
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad value `{v}`")))?;
            if idx == 0 {
                return Err(parse_err(lineno, "indices are 1-based"));
            }
            if idx <= last {
                return Err(parse_err(lineno, format!("index {idx} does not increase")));
            }
            if !val.is_finite() {
                return Err(parse_err(lineno, format!("non-finite value `{v}`")));
            }
            last = idx;
            entries.push((idx, val));
        }
        max_index = max_index.max(last);
        labels.push(T::lit(label));
        rows.push(entries);
    }
    if rows.is_empty() {
        return Err(Error::Data("no samples in libsvm input".into()));
    }
    let p = match opts.dims {
        Some(d) if d < max_index => {
            return Err(Error::Data(format!("feature index {max_index} exceeds requested dimension {d}")))
        }
        Some(d) => d,
        None => max_index,
    };
    let offset = usize::from(opts.intercept);
    let cols = p + offset;
    let n = rows.len();
    let mut x = DenseMatrix::zeros(n, cols);
    for (i, row) in rows.iter().enumerate() {
        if opts.intercept {
            x[(i, 0)] = T::one();
        }
        for &(j, v) in row {
            x[(i, j - 1 + offset)] = T::lit(v);
        }
    }
    Dataset::classification(x, labels, opts.intercept)
}

/// Opens a possibly gzip-compressed file (detected by magic bytes).
pub fn open_maybe_gz(path: &Path) -> Result<Box<dyn BufRead>> {
    let mut f = File::open(path).map_err(|e| with_path(e, path))?;
    let mut magic = [0u8; 2];
    let got = f.read(&mut magic).map_err(|e| with_path(e, path))?;
    let f = File::open(path).map_err(|e| with_path(e, path))?;
    if got == 2 && magic == [0x1f, 0x8b] {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(f))))
    } else {
        Ok(Box::new(BufReader::new(f)))
    }
}

pub(crate) fn with_path(e: std::io::Error, path: &Path) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

pub fn read_libsvm<T: Real>(path: &Path, opts: LibsvmOptions) -> Result<Dataset<T>> {
    parse_libsvm(open_maybe_gz(path)?, opts)
}

/// Writes raw features and labels of a classification dataset; the intercept column is dropped.
pub fn write_libsvm<T: Real, W: Write>(data: &Dataset<T>, mut w: W) -> Result<()> {
    let labels = data
        .labels()
        .ok_or_else(|| Error::Data("libsvm output needs a classification dataset".into()))?;
    let x = data.raw_features();
    let offset = usize::from(data.has_intercept());
    for (i, &y) in labels.iter().enumerate() {
        write!(w, "{}", if y > T::zero() { "+1" } else { "-1" })?;
        for j in offset..x.cols() {
            let v = x[(i, j)];
            if v != T::zero() {
                write!(w, " {}:{}", j + 1 - offset, v)?;
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str, dims: Option<usize>) -> Result<Dataset<f64>> {
        parse_libsvm(s.as_bytes(), LibsvmOptions { dims, intercept: false })
    }

    #[test]
    fn format_examples() {
        let d = parse("+1 3:0.5\n", Some(4)).unwrap();
        assert_eq!(d.features().row(0), vec![0.0, 0.0, 0.5, 0.0]);
        assert_eq!(d.response(), &[1.0]);
        let d = parse("-1 1:2.0\n", Some(1)).unwrap();
        assert_eq!(d.features().row(0), vec![-2.0]);
        assert_eq!(d.response(), &[1.0]);
        let d = parse("+1\n-1 2:1\n", None).unwrap();
        assert_eq!(d.features().row(0), vec![0.0, 0.0]);
        assert_eq!(d.p(), 2);
    }

    #[test]
    fn zero_one_labels_and_comments() {
        let d = parse("# header\n0 1:1\n\n1 1:1 # trailing\n", None).unwrap();
        assert_eq!(d.labels().unwrap(), &[-1.0, 1.0]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let line_of = |s: &str| match parse(s, None) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        };
        assert_eq!(line_of("+1 1:1\n+1 2:1 2:3\n"), 2);
        assert_eq!(line_of("+1 1:1\n\n2 1:1\n"), 3);
        assert_eq!(line_of("+1 x:1\n"), 1);
        assert_eq!(line_of("+1 0:1\n"), 1);
        assert_eq!(line_of("+1 1=1\n"), 1);
        assert!(parse("+1 5:1\n", Some(3)).is_err());
    }

    #[test]
    fn intercept_and_round_trip() {
        let src = "+1 1:0.5 3:-2\n-1 2:1.5\n";
        let d: Dataset<f64> = parse_libsvm(
            src.as_bytes(),
            LibsvmOptions {
                dims: Some(3),
                intercept: true,
            },
        )
        .unwrap();
        assert_eq!(d.p(), 4);
        assert_eq!(d.features().row(1), vec![-1.0, 0.0, -1.5, 0.0]);
        let mut out = Vec::new();
        write_libsvm(&d, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "+1 1:0.5 3:-2\n-1 2:1.5\n");
    }

    #[test]
    fn gzip_input() {
        use flate2::write::GzEncoder;
        use flate2::Compression;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.svm.gz");
        let mut enc = GzEncoder::new(File::create(&path).unwrap(), Compression::default());
        enc.write_all(b"+1 1:1\n-1 2:3\n").unwrap();
        enc.finish().unwrap();
        let d: Dataset<f64> = read_libsvm(&path, LibsvmOptions::default()).unwrap();
        assert_eq!(d.n(), 2);
        assert_eq!(d.features().row(1), vec![0.0, -3.0]);
    }
}
