//! File formats: matrix text files, model descriptions and graph files,
//! plus content digests for run records.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::models::{Constraint, DppModel};
use crate::numerics::EnsembleMatrix;
use crate::planar::PlanarGraph;

/// Line 1 holds `n`, the next `n` lines hold `n` decimal entries each;
/// lines starting with `#` are comments.
pub fn parse_matrix(text: &str) -> Result<EnsembleMatrix> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let n: usize = header.parse().map_err(|_| Error::Parse(format!("matrix size '{header}' is not an integer")))?;
    let mut rows = Vec::with_capacity(n);
    for r in 0..n {
        let line = lines.next().ok_or_else(|| Error::Parse(format!("expected {n} rows, found {r}")))?;
        let row = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("'{t}' is not a decimal number"))))
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != n {
            return Err(Error::Parse(format!("row {r} has {} entries, expected {n}", row.len())));
        }
        rows.push(row);
    }
    if let Some(extra) = lines.next() {
        return Err(Error::Parse(format!("unexpected trailing line '{extra}'")));
    }
    EnsembleMatrix::from_rows(&rows)
}

/// Shortest round-trip representation of every entry.
pub fn format_matrix(m: &EnsembleMatrix) -> String {
    let a = m.matrix();
    let mut s = format!("{}\n", a.nrows());
    for r in 0..a.nrows() {
        let row: Vec<String> = (0..a.ncols()).map(|c| format!("{:?}", a[(r, c)])).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

pub fn read_matrix(path: &Path) -> Result<EnsembleMatrix> {
    parse_matrix(&read(path)?)
}

/// `{"matrix": <path>, "constraint": {...}}`; the matrix path is relative to
/// the description file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDescription {
    pub matrix: PathBuf,
    #[serde(default = "no_constraint")]
    pub constraint: Constraint,
}

fn no_constraint() -> Constraint {
    Constraint::None
}

pub fn read_model(path: &Path) -> Result<DppModel> {
    let desc: ModelDescription =
        serde_json::from_str(&read(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let matrix = match path.parent() {
        Some(dir) if desc.matrix.is_relative() => dir.join(&desc.matrix),
        _ => desc.matrix.clone(),
    };
    DppModel::new(read_matrix(&matrix)?, desc.constraint)
}

/// `"0,1:1;2,3:1"`: blocks separated by `;`, each `elements:quota`.
pub fn parse_partition(spec: &str) -> Result<Constraint> {
    let mut blocks = Vec::new();
    let mut quotas = Vec::new();
    for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (elems, quota) =
            part.split_once(':').ok_or_else(|| Error::Parse(format!("partition block '{part}' lacks ':quota'")))?;
        blocks.push(parse_index_list(elems)?);
        quotas.push(quota.trim().parse().map_err(|_| Error::Parse(format!("quota '{quota}' is not an integer")))?);
    }
    if blocks.is_empty() {
        return Err(Error::Parse("empty partition".into()));
    }
    Ok(Constraint::Partition { blocks, quotas })
}

/// `"i,j,..."`, empty for the empty set.
pub fn parse_index_list(spec: &str) -> Result<Vec<usize>> {
    spec.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("'{t}' is not an index"))))
        .collect()
}

pub fn read_graph(path: &Path) -> Result<PlanarGraph> {
    PlanarGraph::parse(&read(path)?)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// SHA-256 over the matrix entries (little-endian bit patterns) and the
/// constraint, hex encoded.
pub fn model_digest(model: &DppModel) -> String {
    let mut h = Sha256::new();
    let m = model.ensemble().matrix();
    h.update((m.nrows() as u64).to_le_bytes());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            h.update(m[(r, c)].to_bits().to_le_bytes());
        }
    }
    h.update(serde_json::to_vec(model.constraint()).expect("constraint serializes"));
    hex::encode(h.finalize())
}

/// SHA-256 over the vertex count, edges and rotation system.
pub fn graph_digest(g: &PlanarGraph) -> String {
    hex::encode(Sha256::digest(g.to_text().as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let m = parse_matrix("# diag\n3\n1 0 0\n0 2.5 0\n# comment\n0 0 3\n").unwrap();
        assert_eq!(m.matrix()[(1, 1)], 2.5);
        assert_eq!(parse_matrix(&format_matrix(&m)).unwrap(), m);
        assert!(parse_matrix("2\n1 0\n").is_err());
        assert!(parse_matrix("2\n1 0\n0 1,5\n").is_err());
        assert!(parse_matrix("1\n1 2\n").is_err());
    }

    #[test]
    fn partition_syntax() {
        let c = parse_partition("0,1:1;2,3:1").unwrap();
        assert_eq!(c, Constraint::Partition { blocks: vec![vec![0, 1], vec![2, 3]], quotas: vec![1, 1] });
        assert!(parse_partition("0,1").is_err());
        assert_eq!(parse_index_list("").unwrap(), Vec::<usize>::new());
    }

    #[test]
    fn model_file_resolves_relative_matrix() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("l.txt"), "2\n1 0\n0 1\n").unwrap();
        fs::write(dir.path().join("m.json"), r#"{"matrix": "l.txt", "constraint": {"type": "cardinality", "k": 1}}"#)
            .unwrap();
        let model = read_model(&dir.path().join("m.json")).unwrap();
        assert_eq!(model.sample_size(), Some(1));
        let plain = DppModel::plain(model.ensemble().clone()).unwrap();
        assert_ne!(model_digest(&model), model_digest(&plain));
        assert_eq!(model_digest(&model), model_digest(&model.clone()));
    }
}
