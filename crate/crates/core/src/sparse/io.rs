//! Matrix Market coordinate files and the plain-text graph format.
//!
//! Graph format (0-based indices):
//!
//! ```text
//! graph <n> <m> <s>
//! <i> <j> <w>        # m edge lines
//! <j> <wD>           # s boundary lines
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{CsrMatrix, GraphProblem};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmSymmetry {
    General,
    Symmetric,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| parse_err(line, format!("bad {what} '{tok}'")))
}

pub fn read_matrix_market<R: Read>(reader: R) -> Result<CsrMatrix> {
    let reader = BufReader::new(reader);
    let mut lines = reader.lines().enumerate();

    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, "missing %%MatrixMarket matrix header"));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(1, format!("unsupported format '{}'", tokens[2])));
    }
    let pattern = match tokens[3].as_str() {
        "real" | "integer" => false,
        "pattern" => true,
        other => return Err(parse_err(1, format!("unsupported field '{other}'"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => MmSymmetry::General,
        "symmetric" => MmSymmetry::Symmetric,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut it = trimmed.split_whitespace();
        match size {
            None => {
                let r = field(it.next(), lineno, "row count")?;
                let c = field(it.next(), lineno, "column count")?;
                let nnz = field(it.next(), lineno, "entry count")?;
                size = Some((r, c, nnz));
                triplets.reserve(if symmetry == MmSymmetry::Symmetric { 2 * nnz } else { nnz });
            }
            Some((r, c, _)) => {
                let i: usize = field(it.next(), lineno, "row index")?;
                let j: usize = field(it.next(), lineno, "column index")?;
                if i == 0 || j == 0 || i > r || j > c {
                    return Err(parse_err(lineno, format!("entry ({i}, {j}) out of range")));
                }
                let v: f64 = if pattern { 1.0 } else { field(it.next(), lineno, "value")? };
                triplets.push((i - 1, j - 1, v));
                if symmetry == MmSymmetry::Symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (r, c, nnz) = size.ok_or_else(|| parse_err(1, "missing size line"))?;
    let stored =
        if symmetry == MmSymmetry::Symmetric { triplets.iter().filter(|t| t.0 >= t.1).count() } else { triplets.len() };
    if stored != nnz {
        return Err(parse_err(1, format!("header declares {nnz} entries, found {stored}")));
    }
    CsrMatrix::from_triplets(r, c, &triplets)
}

pub fn write_matrix_market<W: Write>(m: &CsrMatrix, symmetry: MmSymmetry, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    let entries: Vec<(usize, usize, f64)> = (0..m.n_rows())
        .flat_map(|i| {
            let (cols, vals) = m.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v)).collect::<Vec<_>>()
        })
        .filter(|&(i, j, _)| symmetry == MmSymmetry::General || i >= j)
        .collect();
    let sym = match symmetry {
        MmSymmetry::General => "general",
        MmSymmetry::Symmetric => "symmetric",
    };
    writeln!(w, "%%MatrixMarket matrix coordinate real {sym}")?;
    writeln!(w, "{} {} {}", m.n_rows(), m.n_cols(), entries.len())?;
    for (i, j, v) in entries {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_market_file(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    read_matrix_market(File::open(path)?)
}

pub fn write_matrix_market_file(m: &CsrMatrix, symmetry: MmSymmetry, path: impl AsRef<Path>) -> Result<()> {
    write_matrix_market(m, symmetry, File::create(path)?)
}

pub fn read_graph<R: Read>(reader: R) -> Result<GraphProblem> {
    let reader = BufReader::new(reader);
    let mut rows =
        reader.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| {
            l.as_ref().map(|s| !s.trim().is_empty() && !s.trim_start().starts_with('#')).unwrap_or(true)
        });

    let (lineno, header) = rows.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?;
    let mut it = header.split_whitespace();
    if it.next() != Some("graph") {
        return Err(parse_err(lineno, "expected 'graph n m s' header"));
    }
    let n: usize = field(it.next(), lineno, "vertex count")?;
    let m: usize = field(it.next(), lineno, "edge count")?;
    let s: usize = field(it.next(), lineno, "boundary count")?;

    let mut edges = Vec::with_capacity(m);
    let mut boundary = Vec::with_capacity(s);
    for k in 0..m + s {
        let (lineno, line) =
            rows.next().ok_or_else(|| parse_err(lineno, format!("expected {} data lines, found {k}", m + s)))?;
        let line = line?;
        let mut it = line.split_whitespace();
        if k < m {
            let i = field(it.next(), lineno, "edge start")?;
            let j = field(it.next(), lineno, "edge end")?;
            let w = field(it.next(), lineno, "edge weight")?;
            edges.push((i, j, w));
        } else {
            let j = field(it.next(), lineno, "boundary vertex")?;
            let w = field(it.next(), lineno, "boundary weight")?;
            boundary.push((j, w));
        }
    }
    if let Some((lineno, _)) = rows.next() {
        return Err(parse_err(lineno, "trailing data after declared entries"));
    }
    GraphProblem::new(n, edges, boundary)
}

pub fn write_graph<W: Write>(g: &GraphProblem, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "graph {} {} {}", g.n(), g.edges().len(), g.boundary().len())?;
    for &(i, j, wt) in g.edges() {
        writeln!(w, "{i} {j} {wt:e}")?;
    }
    for &(j, wt) in g.boundary() {
        writeln!(w, "{j} {wt:e}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_graph_file(path: impl AsRef<Path>) -> Result<GraphProblem> {
    read_graph(File::open(path)?)
}
