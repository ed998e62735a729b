//! Plain-text matrix files: a `CMAT <rows> <cols>` header followed by `rows*cols` lines of
//! `re im` in column-major order, written with 17 significant digits.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

pub fn write_cmat_string(m: &ComplexMatrix) -> String {
    let mut out = format!("CMAT {} {}\n", m.rows(), m.cols());
    for z in m.as_slice() {
        out.push_str(&format!("{:.16e} {:.16e}\n", z.re, z.im));
    }
    out
}

pub fn write_cmat(path: &Path, m: &ComplexMatrix) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(write_cmat_string(m).as_bytes())?;
    Ok(())
}

pub fn parse_cmat(text: &str) -> Result<ComplexMatrix> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let mut h = header.split_whitespace();
    if h.next() != Some("CMAT") {
        return Err(Error::Parse(format!("expected CMAT header, found {header:?}")));
    }
    let dim = |tok: Option<&str>, what: &str| -> Result<usize> {
        tok.ok_or_else(|| Error::Parse(format!("header is missing {what}")))?
            .parse::<usize>()
            .map_err(|e| Error::Parse(format!("bad {what} in header: {e}")))
    };
    let rows = dim(h.next(), "rows")?;
    let cols = dim(h.next(), "cols")?;
    let mut data = Vec::with_capacity(rows * cols);
    for (k, line) in lines.enumerate() {
        let mut it = line.split_whitespace();
        let mut num = |part: &str| -> Result<f64> {
            let tok = it.next().ok_or_else(|| Error::Parse(format!("entry {k}: missing {part} part")))?;
            let v: f64 = tok.parse().map_err(|e| Error::Parse(format!("entry {k}: bad {part} part {tok:?}: {e}")))?;
            if !v.is_finite() {
                return Err(Error::Parse(format!("entry {k}: non-finite {part} part {tok:?}")));
            }
            Ok(v)
        };
        let re = num("real")?;
        let im = num("imaginary")?;
        data.push(C64::new(re, im));
    }
    if data.len() != rows * cols {
        return Err(Error::Parse(format!("expected {} entries, found {}", rows * cols, data.len())));
    }
    ComplexMatrix::from_col_major(rows, cols, data)
}

pub fn read_cmat(path: &Path) -> Result<ComplexMatrix> {
    let text = fs::read_to_string(path)?;
    parse_cmat(&text)
}
