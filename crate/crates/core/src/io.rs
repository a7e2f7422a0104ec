//! Grid CSV parsing and artifact serialization.
//!
//! Grid CSV: header `ix,iy,x,y,u,v,value` with an optional trailing `water`
//! column (`1`/`0`, `true`/`false`). `NA` marks a missing entry. A node is water
//! when it carries a value, or when both velocity components are present and
//! the row is flagged as water.
//!
//! Network JSON: `{vertices:[{id,x,y}], edges:[{tail,head,length,prob}],
//! sources:[ids], outlets:[ids]}`. Sink mass is not stored: an outlet keeps the
//! probability its edges leave unassigned.
//!
//! Matrix files: row-major little-endian `f64` payload plus a `<file>.json`
//! sidecar holding the dimensions, a SHA-256 of the payload and free-form
//! metadata.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::network::{DirectedNetwork, Edge, NetworkError, Vertex};

pub const MISSING: &str = "NA";
const GRID_HEADER: [&str; 7] = ["ix", "iy", "x", "y", "u", "v", "value"];
const SPACING_TOLERANCE: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("duplicate grid index ({ix}, {iy}) on line {line}")]
    DuplicateIndex { ix: usize, iy: usize, line: usize },
    #[error("invalid grid spacing: {0}")]
    Spacing(String),
    #[error("grid has too few nodes: {0}")]
    TooFewNodes(String),
    #[error("invalid network document: {0}")]
    Schema(String),
    #[error("matrix checksum mismatch: sidecar {expected}, payload {found}")]
    Checksum { expected: String, found: String },
    #[error("truncated matrix payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl IoError {
    pub fn file(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        IoError::File { path: path.as_ref().to_path_buf(), source }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridNode {
    pub ix: usize,
    pub iy: usize,
    pub x: f64,
    pub y: f64,
    /// Eastward velocity (0 when missing).
    pub u: f64,
    /// Northward velocity (0 when missing).
    pub v: f64,
    pub value: Option<f64>,
    pub is_water: bool,
}

/// Regular planar grid of velocity nodes. Node order is preserved from input.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityGrid {
    pub nx: usize,
    pub ny: usize,
    pub spacing_x: f64,
    pub spacing_y: f64,
    pub nodes: Vec<GridNode>,
}

impl VelocityGrid {
    /// Validates the node set against explicit spacings.
    pub fn with_spacing(nodes: Vec<GridNode>, spacing_x: f64, spacing_y: f64) -> Result<Self, IoError> {
        if !(spacing_x > 0.0 && spacing_y > 0.0 && spacing_x.is_finite() && spacing_y.is_finite()) {
            return Err(IoError::Spacing(format!("spacings must be positive, got ({spacing_x}, {spacing_y})")));
        }
        if nodes.is_empty() {
            return Err(IoError::TooFewNodes("no rows".into()));
        }
        let mut seen = HashSet::with_capacity(nodes.len());
        for (k, n) in nodes.iter().enumerate() {
            if !seen.insert((n.ix, n.iy)) {
                return Err(IoError::DuplicateIndex { ix: n.ix, iy: n.iy, line: k + 2 });
            }
            if !n.is_water && n.value.is_some() {
                return Err(IoError::Malformed { line: k + 2, message: "land node carries a value".into() });
            }
        }
        let nx = nodes.iter().map(|n| n.ix).max().unwrap_or(0) + 1;
        let ny = nodes.iter().map(|n| n.iy).max().unwrap_or(0) + 1;
        Ok(Self { nx, ny, spacing_x, spacing_y, nodes })
    }

    pub fn water_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_water).count()
    }

    /// Observed values of the water nodes, in network vertex order
    /// (row-major by `iy`, then `ix`).
    pub fn water_values(&self) -> Vec<Option<f64>> {
        let mut water: Vec<&GridNode> = self.nodes.iter().filter(|n| n.is_water).collect();
        water.sort_by_key(|n| (n.iy, n.ix));
        water.iter().map(|n| n.value).collect()
    }
}

fn parse_field(raw: &str, line: usize, name: &str) -> Result<Option<f64>, IoError> {
    let raw = raw.trim();
    if raw == MISSING {
        return Ok(None);
    }
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(Some)
        .ok_or_else(|| IoError::Malformed { line, message: format!("column `{name}`: cannot parse `{raw}`") })
}

fn parse_index(raw: &str, line: usize, name: &str) -> Result<usize, IoError> {
    raw.trim()
        .parse::<usize>()
        .map_err(|_| IoError::Malformed { line, message: format!("column `{name}`: invalid index `{}`", raw.trim()) })
}

fn parse_flag(raw: &str, line: usize) -> Result<bool, IoError> {
    match raw.trim() {
        "1" | "true" | "TRUE" | "True" => Ok(true),
        "0" | "false" | "FALSE" | "False" | "" => Ok(false),
        other => Err(IoError::Malformed { line, message: format!("column `water`: invalid flag `{other}`") }),
    }
}

/// Infers a spacing along one axis from `(index, coordinate)` pairs and checks
/// that every coordinate sits on the implied lattice.
fn infer_spacing(points: &[(usize, f64)], axis: &str) -> Result<Option<f64>, IoError> {
    let (lo, hi) = points.iter().fold((points[0], points[0]), |(lo, hi), &p| {
        (if p.0 < lo.0 { p } else { lo }, if p.0 > hi.0 { p } else { hi })
    });
    if hi.0 == lo.0 {
        return Ok(None);
    }
    let spacing = (hi.1 - lo.1) / (hi.0 - lo.0) as f64;
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(IoError::Spacing(format!("non-positive {axis} spacing {spacing}")));
    }
    for &(i, c) in points {
        let expected = lo.1 + (i as f64 - lo.0 as f64) * spacing;
        if (c - expected).abs() > SPACING_TOLERANCE * spacing.max(1.0) {
            return Err(IoError::Spacing(format!(
                "{axis} coordinate {c} at index {i} is off the lattice (expected {expected})"
            )));
        }
    }
    Ok(Some(spacing))
}

/// Parses a grid CSV document.
///
/// Rejects malformed rows (reporting the line), duplicate indices, spacings
/// that are non-positive or inconsistent with the indices, and grids with fewer
/// than two rows or no water node.
pub fn parse_grid(text: &str) -> Result<VelocityGrid, IoError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).flexible(true).from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    let names: Vec<&str> = header.iter().collect();
    let has_water_flag = match names.len() {
        7 => false,
        8 if names[7] == "water" => true,
        _ => {
            return Err(IoError::Malformed {
                line: 1,
                message: format!("expected header `{}` (optionally `,water`), got `{}`", GRID_HEADER.join(","), names.join(",")),
            })
        }
    };
    if names[..7] != GRID_HEADER {
        return Err(IoError::Malformed { line: 1, message: format!("expected header `{}`", GRID_HEADER.join(",")) });
    }

    let mut nodes = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let line = k + 2;
        let record = record?;
        if record.len() != names.len() {
            return Err(IoError::Malformed { line, message: format!("expected {} fields, found {}", names.len(), record.len()) });
        }
        let ix = parse_index(&record[0], line, "ix")?;
        let iy = parse_index(&record[1], line, "iy")?;
        let x = parse_field(&record[2], line, "x")?;
        let y = parse_field(&record[3], line, "y")?;
        let (Some(x), Some(y)) = (x, y) else {
            return Err(IoError::Malformed { line, message: "coordinates may not be missing".into() });
        };
        let u = parse_field(&record[4], line, "u")?;
        let v = parse_field(&record[5], line, "v")?;
        let value = parse_field(&record[6], line, "value")?;
        let flagged = has_water_flag && parse_flag(&record[7], line)?;
        let is_water = value.is_some() || (u.is_some() && v.is_some() && flagged);
        nodes.push(GridNode { ix, iy, x, y, u: u.unwrap_or(0.0), v: v.unwrap_or(0.0), value, is_water });
    }
    if nodes.len() < 2 {
        return Err(IoError::TooFewNodes(format!("{} row(s); at least 2 are required", nodes.len())));
    }
    if !nodes.iter().any(|n| n.is_water) {
        return Err(IoError::TooFewNodes("no water node".into()));
    }
    let mut seen = HashSet::with_capacity(nodes.len());
    for (k, n) in nodes.iter().enumerate() {
        if !seen.insert((n.ix, n.iy)) {
            return Err(IoError::DuplicateIndex { ix: n.ix, iy: n.iy, line: k + 2 });
        }
    }
    let xs: Vec<(usize, f64)> = nodes.iter().map(|n| (n.ix, n.x)).collect();
    let ys: Vec<(usize, f64)> = nodes.iter().map(|n| (n.iy, n.y)).collect();
    let sx = infer_spacing(&xs, "x")?;
    let sy = infer_spacing(&ys, "y")?;
    let (sx, sy) = match (sx, sy) {
        (Some(a), Some(b)) => (a, b),
        (Some(a), None) => (a, a),
        (None, Some(b)) => (b, b),
        (None, None) => return Err(IoError::Spacing("cannot infer spacing from a single node position".into())),
    };
    // Nodes sharing an index must share the coordinate along that axis.
    for n in &nodes {
        let first_x = xs.iter().find(|p| p.0 == n.ix).map(|p| p.1).unwrap_or(n.x);
        let first_y = ys.iter().find(|p| p.0 == n.iy).map(|p| p.1).unwrap_or(n.y);
        if (n.x - first_x).abs() > SPACING_TOLERANCE * sx.max(1.0) || (n.y - first_y).abs() > SPACING_TOLERANCE * sy.max(1.0) {
            return Err(IoError::Spacing(format!("node ({}, {}) is off the lattice", n.ix, n.iy)));
        }
    }
    VelocityGrid::with_spacing(nodes, sx, sy)
}

fn format_opt(v: Option<f64>) -> String {
    v.map_or_else(|| MISSING.to_string(), |v| v.to_string())
}

/// Writes the grid as CSV with the `water` column, so that `parse_grid`
/// reproduces it exactly.
pub fn write_grid(grid: &VelocityGrid) -> String {
    let mut out = format!("{},water\n", GRID_HEADER.join(","));
    for n in &grid.nodes {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            n.ix,
            n.iy,
            n.x,
            n.y,
            n.u,
            n.v,
            format_opt(n.value),
            u8::from(n.is_water)
        ));
    }
    out
}

pub fn read_grid_file(path: impl AsRef<Path>) -> Result<VelocityGrid, IoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| IoError::file(path, e))?;
    parse_grid(&text)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexDoc {
    id: usize,
    x: f64,
    y: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    tail: usize,
    head: usize,
    length: f64,
    prob: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    vertices: Vec<VertexDoc>,
    edges: Vec<EdgeDoc>,
    sources: Vec<usize>,
    outlets: Vec<usize>,
}

/// Serializes a network to pretty-printed JSON with shortest round-trip floats.
pub fn write_network(net: &DirectedNetwork) -> String {
    let doc = NetworkDoc {
        vertices: net.vertices().iter().map(|v| VertexDoc { id: v.id, x: v.x, y: v.y }).collect(),
        edges: net
            .edges()
            .iter()
            .map(|e| EdgeDoc { tail: e.tail, head: e.head, length: e.length, prob: e.prob })
            .collect(),
        sources: (0..net.len()).filter(|&a| net.is_source(a)).collect(),
        outlets: (0..net.len()).filter(|&a| net.is_outlet(a)).collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("network document serializes");
    s.push('\n');
    s
}

/// Parses a network JSON document and checks it against the source/outlet lists.
pub fn read_network(text: &str) -> Result<DirectedNetwork, IoError> {
    let doc: NetworkDoc = serde_json::from_str(text)?;
    let n = doc.vertices.len();
    let vertices: Vec<Vertex> = doc.vertices.iter().map(|v| Vertex { id: v.id, x: v.x, y: v.y }).collect();
    let edges: Vec<Edge> =
        doc.edges.iter().map(|e| Edge { tail: e.tail, head: e.head, length: e.length, prob: e.prob }).collect();
    let mut is_outlet = vec![false; n];
    for &o in &doc.outlets {
        if o >= n {
            return Err(IoError::Schema(format!("outlet {o} is not a vertex")));
        }
        is_outlet[o] = true;
    }
    let mut assigned = vec![0.0; n];
    for e in &edges {
        if e.tail >= n {
            return Err(IoError::Schema(format!("edge tail {} is not a vertex", e.tail)));
        }
        assigned[e.tail] += e.prob;
    }
    let sink: Vec<f64> = (0..n).map(|a| if is_outlet[a] { 1.0 - assigned[a] } else { 0.0 }).collect();
    if let Some(a) = (0..n).find(|&a| is_outlet[a] && !(sink[a] > 0.0)) {
        return Err(IoError::Schema(format!("outlet {a} has no probability left for the sink")));
    }
    let net = DirectedNetwork::new(vertices, edges, sink).map_err(|e: NetworkError| IoError::Schema(e.to_string()))?;
    let sources: Vec<usize> = (0..n).filter(|&a| net.is_source(a)).collect();
    let mut listed = doc.sources.clone();
    listed.sort_unstable();
    if listed != sources {
        return Err(IoError::Schema("source list does not match the edge structure".into()));
    }
    Ok(net)
}

pub fn write_network_file(path: impl AsRef<Path>, net: &DirectedNetwork) -> Result<(), IoError> {
    let path = path.as_ref();
    fs::write(path, write_network(net)).map_err(|e| IoError::file(path, e))
}

pub fn read_network_file(path: impl AsRef<Path>) -> Result<DirectedNetwork, IoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| IoError::file(path, e))?;
    read_network(&text)
}

/// Sidecar descriptor of a binary matrix file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDescriptor {
    pub n_rows: usize,
    pub n_cols: usize,
    pub dtype: String,
    pub sha256: String,
    /// Extra metadata (for ensembles: seed, m, n, params).
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    pub meta: serde_json::Map<String, serde_json::Value>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Encodes a matrix as a row-major little-endian payload and its descriptor.
pub fn encode_matrix(m: &DMatrix<f64>, meta: serde_json::Map<String, serde_json::Value>) -> (Vec<u8>, MatrixDescriptor) {
    let mut bytes = Vec::with_capacity(m.len() * 8);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            bytes.extend_from_slice(&m[(i, j)].to_le_bytes());
        }
    }
    let desc = MatrixDescriptor {
        n_rows: m.nrows(),
        n_cols: m.ncols(),
        dtype: "f64-le".into(),
        sha256: sha256_hex(&bytes),
        meta,
    };
    (bytes, desc)
}

pub fn decode_matrix(bytes: &[u8], desc: &MatrixDescriptor) -> Result<DMatrix<f64>, IoError> {
    let expected = desc.n_rows * desc.n_cols * 8;
    if bytes.len() != expected {
        return Err(IoError::Truncated { expected, found: bytes.len() });
    }
    let found = sha256_hex(bytes);
    if found != desc.sha256 {
        return Err(IoError::Checksum { expected: desc.sha256.clone(), found });
    }
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
    Ok(DMatrix::from_row_iterator(desc.n_rows, desc.n_cols, values))
}

/// Path of the JSON sidecar that accompanies a matrix payload.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_matrix(
    path: impl AsRef<Path>,
    m: &DMatrix<f64>,
    meta: serde_json::Map<String, serde_json::Value>,
) -> Result<MatrixDescriptor, IoError> {
    let path = path.as_ref();
    let (bytes, desc) = encode_matrix(m, meta);
    fs::write(path, &bytes).map_err(|e| IoError::file(path, e))?;
    let side = sidecar_path(path);
    let mut text = serde_json::to_string_pretty(&desc)?;
    text.push('\n');
    fs::write(&side, text).map_err(|e| IoError::file(&side, e))?;
    Ok(desc)
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<(DMatrix<f64>, MatrixDescriptor), IoError> {
    let path = path.as_ref();
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| IoError::file(&side, e))?;
    let desc: MatrixDescriptor = serde_json::from_str(&text)?;
    let bytes = fs::read(path).map_err(|e| IoError::file(path, e))?;
    let m = decode_matrix(&bytes, &desc)?;
    Ok((m, desc))
}
