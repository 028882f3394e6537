//! Edge lists, label files and the binary Z₂ matrix format.

use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::model::{Graph, LabelVector};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn two_numbers(line: &str, lineno: usize) -> Result<(usize, usize)> {
    let mut it = line.split_ascii_whitespace();
    let mut next = || -> Result<usize> {
        it.next()
            .ok_or_else(|| parse_err(lineno, "expected two integers"))?
            .parse()
            .map_err(|e| parse_err(lineno, format!("{e}")))
    };
    let (a, b) = (next()?, next()?);
    if it.next().is_some() {
        return Err(parse_err(lineno, "trailing tokens"));
    }
    Ok((a, b))
}

/// Header `n m`, then `m` lines `u v` with `u < v`.
pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Graph> {
    let mut lines = reader.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(s) if s.trim().is_empty() => None,
        Ok(s) => Some(Ok((i + 1, s))),
        Err(e) => Some(Err(Error::from(e))),
    });
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))??;
    let (n, m) = two_numbers(&header, hl)?;
    let mut edges = Vec::with_capacity(m);
    for item in lines {
        let (ln, line) = item?;
        let (u, v) = two_numbers(&line, ln)?;
        if u >= v {
            return Err(parse_err(ln, format!("edge ({u}, {v}) must satisfy u < v")));
        }
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(parse_err(hl, format!("header declares {m} edges, found {}", edges.len())));
    }
    Graph::from_edges(n, edges)
}

pub fn write_edge_list<W: Write>(graph: &Graph, mut w: W) -> Result<()> {
    writeln!(w, "{} {}", graph.n(), graph.edge_count())?;
    for &(u, v) in graph.edges() {
        writeln!(w, "{u} {v}")?;
    }
    Ok(())
}

/// One `+1` or `-1` per line.
pub fn read_labels<R: BufRead>(reader: R) -> Result<LabelVector> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        match line.trim() {
            "" => continue,
            "+1" | "1" => out.push(1),
            "-1" => out.push(-1),
            other => return Err(parse_err(i + 1, format!("expected +1 or -1, got `{other}`"))),
        }
    }
    LabelVector::new(out)
}

pub fn write_labels<W: Write>(labels: &LabelVector, mut w: W) -> Result<()> {
    for &x in labels.as_slice() {
        writeln!(w, "{}", if x > 0 { "+1" } else { "-1" })?;
    }
    Ok(())
}

/// Little-endian `u64` n followed by `n²` little-endian `f64`, row-major.
pub fn read_z2_matrix<R: Read>(mut reader: R) -> Result<DenseMatrix<f64>> {
    let mut head = [0u8; 8];
    reader.read_exact(&mut head)?;
    let n = usize::try_from(u64::from_le_bytes(head)).map_err(|_| parse_err(0, "n does not fit in usize"))?;
    let len = n.checked_mul(n).ok_or_else(|| parse_err(0, "n² overflows"))?;
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    if bytes.len() != len * 8 {
        return Err(parse_err(0, format!("expected {} payload bytes, found {}", len * 8, bytes.len())));
    }
    let data = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
    DenseMatrix::new(n, data)
}

pub fn write_z2_matrix<W: Write>(m: &DenseMatrix<f64>, mut w: W) -> Result<()> {
    w.write_all(&(m.n() as u64).to_le_bytes())?;
    for &x in m.as_slice() {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}
