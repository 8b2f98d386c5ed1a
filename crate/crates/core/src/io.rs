//! Text formats: Matrix Market (coordinate and array), quadratic maps, plain
//! vectors.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kron::{QuadMap, SparseMat};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_err(path: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        msg: msg.into(),
    }
}

/// Non-comment lines with their 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('%'))
}

fn parse_fields<T: std::str::FromStr>(path: &str, line: usize, text: &str, count: usize) -> Result<Vec<T>> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != count {
        return Err(parse_err(path, line, format!("expected {count} fields, found {}", fields.len())));
    }
    fields
        .iter()
        .map(|f| {
            f.parse::<T>()
                .map_err(|_| parse_err(path, line, format!("cannot parse '{f}'")))
        })
        .collect()
}

fn one_based(path: &str, line: usize, v: usize, bound: usize) -> Result<usize> {
    if v == 0 || v > bound {
        return Err(parse_err(path, line, format!("index {v} outside 1..={bound}")));
    }
    Ok(v - 1)
}

pub fn sparse_to_mm(m: &SparseMat) -> String {
    let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(s, "{} {} {}", m.rows(), m.cols(), m.nnz());
    for &(i, j, v) in m.entries() {
        let _ = writeln!(s, "{} {} {:.17e}", i + 1, j + 1, v);
    }
    s
}

pub fn parse_mm(text: &str, path: &str) -> Result<SparseMat> {
    let header = text
        .lines()
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let lower = header.to_ascii_lowercase();
    if !lower.starts_with("%%matrixmarket matrix") {
        return Err(parse_err(path, 1, "missing %%MatrixMarket header"));
    }
    if !lower.contains("real") || !lower.contains("general") {
        return Err(parse_err(path, 1, "only real general matrices are supported"));
    }
    let mut lines = data_lines(text);
    let (ln, size) = lines.next().ok_or_else(|| parse_err(path, 2, "missing size line"))?;
    if lower.contains("coordinate") {
        let dims: Vec<usize> = parse_fields(path, ln, size, 3)?;
        let (rows, cols, nnz) = (dims[0], dims[1], dims[2]);
        let mut entries = Vec::with_capacity(nnz);
        for (ln, l) in lines {
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 3 {
                return Err(parse_err(path, ln, format!("expected 3 fields, found {}", f.len())));
            }
            let i: usize = f[0].parse().map_err(|_| parse_err(path, ln, "bad row index"))?;
            let j: usize = f[1].parse().map_err(|_| parse_err(path, ln, "bad column index"))?;
            let v: f64 = f[2].parse().map_err(|_| parse_err(path, ln, "bad value"))?;
            entries.push((one_based(path, ln, i, rows)?, one_based(path, ln, j, cols)?, v));
        }
        if entries.len() != nnz {
            return Err(parse_err(path, ln, format!("header announces {nnz} entries, found {}", entries.len())));
        }
        SparseMat::new(rows, cols, entries)
    } else if lower.contains("array") {
        let dense = parse_array_body(path, ln, size, lines)?;
        Ok(SparseMat::from_dense(&dense))
    } else {
        Err(parse_err(path, 1, "unknown Matrix Market layout"))
    }
}

fn parse_array_body<'a>(
    path: &str,
    ln: usize,
    size: &str,
    lines: impl Iterator<Item = (usize, &'a str)>,
) -> Result<DMatrix<f64>> {
    let dims: Vec<usize> = parse_fields(path, ln, size, 2)?;
    let (rows, cols) = (dims[0], dims[1]);
    let mut vals = Vec::with_capacity(rows * cols);
    for (ln, l) in lines {
        let v: Vec<f64> = parse_fields(path, ln, l, 1)?;
        vals.push(v[0]);
    }
    if vals.len() != rows * cols {
        return Err(parse_err(path, ln, format!("expected {} values, found {}", rows * cols, vals.len())));
    }
    Ok(DMatrix::from_column_slice(rows, cols, &vals))
}

pub fn dense_to_mm(m: &DMatrix<f64>) -> String {
    let mut s = String::from("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(s, "{} {}", m.nrows(), m.ncols());
    for v in m.iter() {
        let _ = writeln!(s, "{:.17e}", v);
    }
    s
}

pub fn parse_dense_mm(text: &str, path: &str) -> Result<DMatrix<f64>> {
    let header = text.lines().next().unwrap_or("").to_ascii_lowercase();
    if header.contains("coordinate") {
        return Ok(parse_mm(text, path)?.to_dense());
    }
    if !header.starts_with("%%matrixmarket matrix array") {
        return Err(parse_err(path, 1, "missing %%MatrixMarket array header"));
    }
    let mut lines = data_lines(text);
    let (ln, size) = lines.next().ok_or_else(|| parse_err(path, 2, "missing size line"))?;
    parse_array_body(path, ln, size, lines)
}

pub fn quad_to_text(g: &QuadMap) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "%%QuadMap {} {} {} {}", g.rows(), g.left(), g.right(), g.nnz());
    for &(i, j, k, v) in g.entries() {
        let _ = writeln!(s, "{} {} {} {:.17e}", i + 1, j + 1, k + 1, v);
    }
    s
}

pub fn parse_quad(text: &str, path: &str) -> Result<QuadMap> {
    let header = text.lines().next().ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let rest = header
        .trim()
        .strip_prefix("%%QuadMap")
        .ok_or_else(|| parse_err(path, 1, "missing %%QuadMap header"))?;
    let dims: Vec<usize> = parse_fields(path, 1, rest, 4)?;
    let (rows, left, right, nnz) = (dims[0], dims[1], dims[2], dims[3]);
    let mut entries = Vec::with_capacity(nnz);
    for (ln, l) in data_lines(text) {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 4 {
            return Err(parse_err(path, ln, format!("expected 4 fields, found {}", f.len())));
        }
        let idx = |s: &str, bound: usize| -> Result<usize> {
            let v: usize = s.parse().map_err(|_| parse_err(path, ln, format!("bad index '{s}'")))?;
            one_based(path, ln, v, bound)
        };
        let v: f64 = f[3].parse().map_err(|_| parse_err(path, ln, "bad value"))?;
        entries.push((idx(f[0], rows)?, idx(f[1], left)?, idx(f[2], right)?, v));
    }
    if entries.len() != nnz {
        return Err(parse_err(path, 1, format!("header announces {nnz} entries, found {}", entries.len())));
    }
    QuadMap::new(rows, left, right, entries)
}

pub fn vec_to_text(v: &DVector<f64>) -> String {
    let mut s = String::new();
    for x in v.iter() {
        let _ = writeln!(s, "{:.17e}", x);
    }
    s
}

pub fn parse_vec(text: &str, path: &str) -> Result<DVector<f64>> {
    let mut vals = Vec::new();
    for (ln, l) in data_lines(text) {
        let v: Vec<f64> = parse_fields(path, ln, l, 1)?;
        vals.push(v[0]);
    }
    Ok(DVector::from_vec(vals))
}

pub fn read_sparse(path: &Path) -> Result<SparseMat> {
    parse_mm(&read(path)?, &path.display().to_string())
}

pub fn read_dense(path: &Path) -> Result<DMatrix<f64>> {
    parse_dense_mm(&read(path)?, &path.display().to_string())
}

pub fn read_quad(path: &Path) -> Result<QuadMap> {
    parse_quad(&read(path)?, &path.display().to_string())
}

pub fn read_vec(path: &Path) -> Result<DVector<f64>> {
    parse_vec(&read(path)?, &path.display().to_string())
}

pub fn write_sparse(path: &Path, m: &SparseMat) -> Result<()> {
    write_text(path, &sparse_to_mm(m))
}

pub fn write_dense(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    write_text(path, &dense_to_mm(m))
}

pub fn write_quad(path: &Path, g: &QuadMap) -> Result<()> {
    write_text(path, &quad_to_text(g))
}

pub fn write_vec(path: &Path, v: &DVector<f64>) -> Result<()> {
    write_text(path, &vec_to_text(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_round_trip() {
        let m = SparseMat::new(3, 2, vec![(0, 1, 0.1), (2, 0, -3.25e-7)]).unwrap();
        let back = parse_mm(&sparse_to_mm(&m), "mem").unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn quad_round_trip() {
        let g = QuadMap::new(2, 3, 1, vec![(1, 2, 0, 1.0 / 3.0), (0, 0, 0, 2.0)]).unwrap();
        let back = parse_quad(&quad_to_text(&g), "mem").unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn dense_round_trip() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, std::f64::consts::PI]);
        assert_eq!(parse_dense_mm(&dense_to_mm(&m), "mem").unwrap(), m);
    }

    #[test]
    fn parse_error_reports_line() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1.0\n";
        match parse_mm(text, "bad.mtx") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn index_out_of_range_rejected() {
        let text = "%%QuadMap 1 1 1 1\n1 2 1 1.0\n";
        assert!(matches!(parse_quad(text, "q"), Err(Error::Parse { line: 2, .. })));
    }
}
