//! MatrixMarket coordinate (sparse) and array (dense) formats, real general only.

use std::io::{BufRead, Write};

use super::{CsrMatrix, DenseMatrix};
use crate::{Error, Result};

pub fn write_csr<W: Write>(a: &CsrMatrix, mut w: W) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v)?;
        }
    }
    Ok(())
}

pub fn write_dense<W: Write>(a: &DenseMatrix, mut w: W) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} {}", a.nrows(), a.ncols())?;
    // column-major per the format
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            writeln!(w, "{:.17e}", a[(i, j)])?;
        }
    }
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    /// Next non-comment, non-blank line.
    fn next_data(&mut self) -> Result<Option<(usize, String)>> {
        for l in self.inner.by_ref() {
            self.line += 1;
            let l = l?;
            let t = l.trim();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            return Ok(Some((self.line, t.to_string())));
        }
        Ok(None)
    }

    fn expect(&mut self) -> Result<(usize, String)> {
        self.next_data()?.ok_or(Error::Parse { line: self.line + 1, msg: "unexpected end of file".into() })
    }
}

fn parse<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.and_then(|t| t.parse().ok()).ok_or_else(|| Error::Parse { line, msg: format!("expected {what}") })
}

fn header<R: BufRead>(r: R, kind: &str) -> Result<Lines<R>> {
    let mut lines = Lines { inner: r.lines(), line: 0 };
    let first = lines.inner.next().transpose()?.unwrap_or_default();
    lines.line = 1;
    let toks: Vec<String> = first.split_whitespace().map(str::to_ascii_lowercase).collect();
    if toks.len() != 5 || toks[0] != "%%matrixmarket" || toks[1] != "matrix" {
        return Err(Error::Parse { line: 1, msg: "missing %%MatrixMarket matrix banner".into() });
    }
    if toks[2] != kind || toks[3] != "real" || toks[4] != "general" {
        return Err(Error::Parse { line: 1, msg: format!("only '{kind} real general' is supported") });
    }
    Ok(lines)
}

pub fn read_csr<R: BufRead>(r: R) -> Result<CsrMatrix> {
    let mut lines = header(r, "coordinate")?;
    let (ln, size) = lines.expect()?;
    let mut it = size.split_whitespace();
    let nrows: usize = parse(it.next(), ln, "row count")?;
    let ncols: usize = parse(it.next(), ln, "column count")?;
    let nnz: usize = parse(it.next(), ln, "entry count")?;
    let mut trip = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        let (ln, l) = lines.expect()?;
        let mut it = l.split_whitespace();
        let i: usize = parse(it.next(), ln, "row index")?;
        let j: usize = parse(it.next(), ln, "column index")?;
        let v: f64 = parse(it.next(), ln, "value")?;
        if i == 0 || j == 0 || i > nrows || j > ncols {
            return Err(Error::Parse { line: ln, msg: format!("index ({i},{j}) out of range") });
        }
        trip.push((i - 1, j - 1, v));
    }
    Ok(CsrMatrix::from_triplets(nrows, ncols, &trip))
}

pub fn read_dense<R: BufRead>(r: R) -> Result<DenseMatrix> {
    let mut lines = header(r, "array")?;
    let (ln, size) = lines.expect()?;
    let mut it = size.split_whitespace();
    let nrows: usize = parse(it.next(), ln, "row count")?;
    let ncols: usize = parse(it.next(), ln, "column count")?;
    let mut m = DenseMatrix::zeros(nrows, ncols);
    for j in 0..ncols {
        for i in 0..nrows {
            let (ln, l) = lines.expect()?;
            m[(i, j)] = parse(l.split_whitespace().next(), ln, "value")?;
        }
    }
    Ok(m)
}
