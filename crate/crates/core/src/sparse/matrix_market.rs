//! MatrixMarket coordinate format (real, general), 1-based indices.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::csr::CsrMatrix;
use crate::error::{Error, Result};

pub fn write_matrix_market<W: Write>(m: &CsrMatrix, mut out: W) -> std::io::Result<()> {
    let mut buf = String::new();
    buf.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(buf, "{} {} {}", m.n_rows(), m.n_cols(), m.nnz());
    for i in 0..m.n_rows() {
        let (cols, vals) = m.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            let _ = writeln!(buf, "{} {} {:e}", i + 1, j + 1, v);
        }
    }
    out.write_all(buf.as_bytes())
}

pub fn read_matrix_market<R: BufRead>(input: R) -> Result<CsrMatrix> {
    let mut lines = input.lines().enumerate();
    let bad = |line: usize, msg: &str| Error::InvalidInput(format!("MatrixMarket line {}: {msg}", line + 1));

    let (n, header) = lines
        .next()
        .ok_or_else(|| Error::InvalidInput("MatrixMarket: empty input".into()))?;
    let header = header.map_err(|e| bad(n, &e.to_string()))?;
    let lower = header.to_ascii_lowercase();
    if !lower.starts_with("%%matrixmarket matrix coordinate real") {
        return Err(bad(n, "expected '%%MatrixMarket matrix coordinate real ...' header"));
    }
    let symmetric = lower.contains("symmetric");

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    for (n, line) in lines {
        let line = line.map_err(|e| bad(n, &e.to_string()))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(bad(n, "expected 'rows cols nnz'"));
                }
                let p = |s: &str| s.parse::<usize>().map_err(|_| bad(n, "bad size field"));
                size = Some((p(fields[0])?, p(fields[1])?, p(fields[2])?));
            }
            Some((rows, cols, _)) => {
                if fields.len() != 3 {
                    return Err(bad(n, "expected 'row col value'"));
                }
                let i: usize = fields[0].parse().map_err(|_| bad(n, "bad row index"))?;
                let j: usize = fields[1].parse().map_err(|_| bad(n, "bad column index"))?;
                let v: f64 = fields[2].parse().map_err(|_| bad(n, "bad value"))?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(bad(n, "index out of range (indices are 1-based)"));
                }
                triplets.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (rows, cols, nnz) = size.ok_or_else(|| Error::InvalidInput("MatrixMarket: missing size line".into()))?;
    let expected = if symmetric {
        triplets.iter().filter(|(i, j, _)| i <= j).count()
    } else {
        triplets.len()
    };
    if expected != nnz {
        return Err(Error::InvalidInput(format!(
            "MatrixMarket: header declares {nnz} entries, found {expected}"
        )));
    }
    CsrMatrix::from_triplets(rows, cols, triplets)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let a = CsrMatrix::from_triplets(3, 2, [(0, 0, 1.25), (2, 1, -3.0e-7), (1, 0, 4.0)]).unwrap();
        let mut buf = Vec::new();
        write_matrix_market(&a, &mut buf).unwrap();
        let back = read_matrix_market(buf.as_slice()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn one_based_indices() {
        let text = "%%MatrixMarket matrix coordinate real general\n% c\n2 2 1\n2 1 5.0\n";
        let m = read_matrix_market(text.as_bytes()).unwrap();
        assert_eq!(m.get(1, 0), 5.0);
        let zero_based = "%%MatrixMarket matrix coordinate real general\n2 2 1\n0 1 5.0\n";
        assert!(read_matrix_market(zero_based.as_bytes()).is_err());
    }
}
