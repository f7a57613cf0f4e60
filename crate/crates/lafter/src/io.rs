//! Text formats for graphs, masks, labels and pair lists.
//!
//! * Edge list: one `src dst` or `src dst v` per line (tab or space
//!   separated, `v ∈ {0,1}`, default 1); `#` starts a comment line.
//! * Dense matrix: `N` lines of `N` space-separated `0`/`1` tokens.
//! * Mask: one `i j flag` per line, `1` for a training entry and `0` for a
//!   held-out one; entries not listed are unobserved.
//! * Pairs: `i j` per line, comma or whitespace separated; a third column is
//!   ignored so that mask and edge files can be reused as pair lists.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use lafter_core::{AdjacencyMatrix, BinaryMatrix, ObservationMask};

use crate::error::{Error, Result};

/// Data lines with their 1-based line numbers: blank lines and `#` comments
/// are dropped.
fn data_lines<R: BufRead>(reader: R) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        out.push((idx + 1, trimmed.to_string()));
    }
    Ok(out)
}

fn parse_index(token: &str, line: usize, what: &str) -> Result<usize> {
    token
        .parse::<usize>()
        .map_err(|_| Error::parse(line, format!("{what} `{token}` is not a non-negative integer")))
}

fn parse_bit(token: &str, line: usize) -> Result<bool> {
    match token {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(Error::parse(line, format!("expected 0 or 1, found `{token}`"))),
    }
}

pub fn load_edge_list<R: BufRead>(reader: R, n: Option<usize>) -> Result<AdjacencyMatrix> {
    let mut edges = Vec::new();
    let mut max_id = None;
    for (line, text) in data_lines(reader)? {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.len() != 2 && tokens.len() != 3 {
            return Err(Error::parse(line, format!("expected `src dst [v]`, found {} fields", tokens.len())));
        }
        let src = parse_index(tokens[0], line, "source id")?;
        let dst = parse_index(tokens[1], line, "target id")?;
        let value = match tokens.get(2) {
            Some(t) => parse_bit(t, line)?,
            None => true,
        };
        if let Some(n) = n {
            let id = src.max(dst);
            if id >= n {
                return Err(Error::parse(line, format!("node id {id} out of range for {n} nodes")));
            }
        }
        max_id = Some(max_id.map_or(src.max(dst), |m: usize| m.max(src).max(dst)));
        edges.push((src, dst, value));
    }
    let n = match (n, max_id) {
        (Some(n), _) => n,
        (None, Some(m)) => m + 1,
        (None, None) => return Err(Error::Usage("empty edge list needs an explicit node count".into())),
    };
    let mut adj = AdjacencyMatrix::zeros(n)?;
    for (i, j, v) in edges {
        adj.set(i, j, v)?;
    }
    Ok(adj)
}

pub fn load_dense_matrix<R: BufRead>(reader: R) -> Result<AdjacencyMatrix> {
    let lines = data_lines(reader)?;
    let n = lines.len();
    if n == 0 {
        return Err(Error::parse(1, "dense matrix has no rows"));
    }
    let mut entries = BinaryMatrix::zeros(n, n);
    for (row, (line, text)) in lines.iter().enumerate() {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.len() != n {
            return Err(Error::parse(*line, format!("expected {n} entries, found {}", tokens.len())));
        }
        for (col, t) in tokens.iter().enumerate() {
            entries.set(row, col, parse_bit(t, *line)? as u8);
        }
    }
    Ok(AdjacencyMatrix::with_detected_symmetry(entries)?)
}

pub fn write_dense_matrix<W: Write>(adj: &AdjacencyMatrix, mut out: W) -> io::Result<()> {
    let mut line = String::with_capacity(2 * adj.n());
    for i in 0..adj.n() {
        line.clear();
        for j in 0..adj.n() {
            if j > 0 {
                line.push(' ');
            }
            line.push(if adj.get(i, j) == 1 { '1' } else { '0' });
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum MatrixFormat {
    /// Dense if every data line is a row of `N` binary tokens with `N` rows,
    /// otherwise an edge list.
    #[default]
    Auto,
    Edges,
    Dense,
}

fn looks_dense(text: &str) -> bool {
    let lines = data_lines(text.as_bytes()).unwrap_or_default();
    let n = lines.len();
    n > 0
        && lines.iter().all(|(_, l)| {
            let tokens: Vec<&str> = l.split_whitespace().collect();
            tokens.len() == n && tokens.iter().all(|t| *t == "0" || *t == "1")
        })
}

pub fn parse_matrix(text: &str, format: MatrixFormat, n: Option<usize>) -> Result<AdjacencyMatrix> {
    let dense = match format {
        MatrixFormat::Auto => looks_dense(text),
        MatrixFormat::Edges => false,
        MatrixFormat::Dense => true,
    };
    if dense {
        let adj = load_dense_matrix(text.as_bytes())?;
        if let Some(n) = n.filter(|&n| n != adj.n()) {
            return Err(Error::Usage(format!("node count {n} does not match the {0}x{0} matrix", adj.n())));
        }
        Ok(adj)
    } else {
        load_edge_list(text.as_bytes(), n)
    }
}

pub fn read_matrix(path: &Path, format: MatrixFormat, n: Option<usize>) -> Result<AdjacencyMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    parse_matrix(&text, format, n).map_err(|e| e.in_file(path))
}

/// Reads a mask file into `(train, test)` masks over `n` nodes.
pub fn load_mask<R: BufRead>(reader: R, n: usize) -> Result<(ObservationMask, ObservationMask)> {
    let mut train = ObservationMask::empty(n);
    let mut test = ObservationMask::empty(n);
    for (line, text) in data_lines(reader)? {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.len() != 3 {
            return Err(Error::parse(line, format!("expected `i j flag`, found {} fields", tokens.len())));
        }
        let i = parse_index(tokens[0], line, "row")?;
        let j = parse_index(tokens[1], line, "column")?;
        if i >= n || j >= n {
            return Err(Error::parse(line, format!("entry ({i}, {j}) out of range for {n} nodes")));
        }
        let is_train = parse_bit(tokens[2], line)?;
        if train.is_observed(i, j) || test.is_observed(i, j) {
            return Err(Error::parse(line, format!("entry ({i}, {j}) listed twice")));
        }
        if is_train { &mut train } else { &mut test }.set(i, j, true)?;
    }
    Ok((train, test))
}

pub fn read_mask(path: &Path, n: usize) -> Result<(ObservationMask, ObservationMask)> {
    let file = File::open(path).map_err(|e| Error::from(e).in_file(path))?;
    load_mask(BufReader::new(file), n).map_err(|e| e.in_file(path))
}

/// Row-major listing of every entry in `train ∪ test`.
pub fn write_mask<W: Write>(train: &ObservationMask, test: &ObservationMask, mut out: W) -> io::Result<()> {
    for i in 0..train.n() {
        for j in 0..train.n() {
            if train.is_observed(i, j) {
                writeln!(out, "{i} {j} 1")?;
            } else if test.is_observed(i, j) {
                writeln!(out, "{i} {j} 0")?;
            }
        }
    }
    Ok(())
}

/// One label per non-empty line.
pub fn load_labels<R: BufRead>(reader: R) -> Result<Vec<String>> {
    let mut labels = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let trimmed = line.trim();
        if !trimmed.is_empty() {
            labels.push(trimmed.to_string());
        }
    }
    Ok(labels)
}

pub fn read_labels(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).map_err(|e| Error::from(e).in_file(path))?;
    load_labels(BufReader::new(file)).map_err(|e| e.in_file(path))
}

pub fn load_pairs<R: BufRead>(reader: R) -> Result<Vec<(usize, usize)>> {
    let mut pairs = Vec::new();
    for (line, text) in data_lines(reader)? {
        let tokens: Vec<&str> = text.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).collect();
        if tokens.len() < 2 || tokens.len() > 3 {
            return Err(Error::parse(line, format!("expected `i j`, found {} fields", tokens.len())));
        }
        // Tolerate a header row such as `i,j`.
        if pairs.is_empty() && tokens[0].parse::<usize>().is_err() && tokens[1].parse::<usize>().is_err() {
            continue;
        }
        pairs.push((parse_index(tokens[0], line, "row")?, parse_index(tokens[1], line, "column")?));
    }
    Ok(pairs)
}

pub fn read_pairs(path: &Path) -> Result<Vec<(usize, usize)>> {
    let file = File::open(path).map_err(|e| Error::from(e).in_file(path))?;
    load_pairs(BufReader::new(file)).map_err(|e| e.in_file(path))
}

/// Writes `path` through a temporary file in the same directory and renames
/// it into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    let wrap = |e: io::Error| Error::from(e).in_file(path);
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::Builder::new().prefix(".lafter-").tempfile_in(dir).map_err(wrap)?;
    {
        let mut out = BufWriter::new(tmp.as_file());
        write(&mut out).map_err(wrap)?;
        out.flush().map_err(wrap)?;
    }
    tmp.persist(path).map_err(|e| wrap(e.error))?;
    Ok(())
}
