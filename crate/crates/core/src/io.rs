//! File formats: graphs and embeddings as JSON; distance matrices and
//! pairwise embedded distances as CSV. Rationals travel as `{"num", "exp"}`
//! (or `{"num", "den"}`) in JSON and as `num/2^exp` (or `num/den`) in CSV.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::distortion::{PairwiseTable, SparseVector};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::exact;
use crate::graphs::{BundleGraph, Family, GraphMeta, VertexCode};
use crate::metric::DistanceMatrix;

#[derive(Serialize, Deserialize)]
struct VertexRecord {
    id: usize,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    set: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<Dyadic>,
}

#[derive(Serialize, Deserialize)]
struct GraphRecord {
    family: Family,
    depth: u32,
    branching: u32,
    height: u32,
    bottom: usize,
    top: usize,
    vertices: Vec<VertexRecord>,
    edges: Vec<(usize, usize)>,
}

pub fn graph_to_json(g: &BundleGraph) -> Result<String> {
    let vertices = (0..g.len())
        .map(|id| VertexRecord {
            id,
            set: g.code(id).map(|c| c.set().to_vec()),
            r: g.code(id).map(|c| c.r()),
        })
        .collect();
    let record = GraphRecord {
        family: g.family(),
        depth: g.depth(),
        branching: g.branching(),
        height: g.height(),
        bottom: g.bottom(),
        top: g.top(),
        vertices,
        edges: g.edges().to_vec(),
    };
    Ok(serde_json::to_string_pretty(&record)?)
}

/// Parses and re-validates a graph; codes are kept only when every vertex
/// carries one.
pub fn graph_from_json(text: &str) -> Result<BundleGraph> {
    let record: GraphRecord = serde_json::from_str(text)?;
    let n = record.vertices.len();
    for (i, v) in record.vertices.iter().enumerate() {
        if v.id != i {
            return Err(Error::Parse(format!(
                "vertex at position {i} has id {}",
                v.id
            )));
        }
    }
    let meta = GraphMeta {
        family: record.family,
        depth: record.depth,
        branching: record.branching,
    };
    let g = BundleGraph::from_edges(n, &record.edges, record.bottom, record.top, meta)?;
    if g.height() != record.height {
        return Err(Error::Parse(format!(
            "declared height {} but the graph has height {}",
            record.height,
            g.height()
        )));
    }
    let codes: Option<Vec<VertexCode>> = record
        .vertices
        .into_iter()
        .map(|v| match (v.set, v.r) {
            (Some(set), Some(r)) => Some(VertexCode::new(set, r)),
            _ => None,
        })
        .collect::<Option<Vec<_>>>()
        .map(|codes| codes.into_iter().collect::<Result<Vec<_>>>())
        .transpose()?;
    Ok(match codes {
        Some(codes) => g.with_codes(codes),
        None => g,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct Coord(#[serde(with = "exact::json")] BigRational);

/// `{"vertex_id": {"coord": rational, ...}, ...}`, one vertex per line, keys
/// in numeric order.
pub fn embedding_to_json(vectors: &[SparseVector]) -> Result<String> {
    let mut text = String::from("{\n");
    for (v, vec) in vectors.iter().enumerate() {
        let coords = vec
            .iter()
            .map(|(k, x)| {
                Ok(format!(
                    "\"{k}\":{}",
                    serde_json::to_string(&Coord(x.clone()))?
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let sep = if v + 1 < vectors.len() { "," } else { "" };
        let _ = writeln!(text, "  \"{v}\": {{{}}}{sep}", coords.join(","));
    }
    text.push('}');
    Ok(text)
}

/// Reads an embedding for vertices `0..n`; every vertex needs an entry.
pub fn embedding_from_json(text: &str, n: usize) -> Result<Vec<SparseVector>> {
    let raw: BTreeMap<String, BTreeMap<String, Coord>> = serde_json::from_str(text)?;
    let mut vectors: Vec<Option<SparseVector>> = vec![None; n];
    for (id, coords) in raw {
        let v: usize = id
            .parse()
            .map_err(|_| Error::Parse(format!("vertex id {id:?} is not an integer")))?;
        let slot = vectors
            .get_mut(v)
            .ok_or_else(|| Error::Parse(format!("vertex id {v} out of range (graph has {n})")))?;
        let mut vec = SparseVector::new();
        for (key, Coord(x)) in coords {
            let key: u64 = key
                .parse()
                .map_err(|_| Error::Parse(format!("coordinate {key:?} is not an integer")))?;
            vec.add_to(key, &x);
        }
        *slot = Some(vec);
    }
    vectors
        .into_iter()
        .enumerate()
        .map(|(v, x)| x.ok_or_else(|| Error::MissingImage(v.to_string())))
        .collect()
}

pub fn distance_csv(dm: &DistanceMatrix) -> String {
    let n = dm.len();
    let mut out = String::from("id");
    for j in 0..n {
        let _ = write!(out, ",{j}");
    }
    out.push('\n');
    for i in 0..n {
        let _ = write!(out, "{i}");
        for &d in dm.row(i) {
            let _ = write!(out, ",{d}");
        }
        out.push('\n');
    }
    out
}

pub fn distance_from_csv(text: &str) -> Result<DistanceMatrix> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty distance file".into()))?;
    let n = header.split(',').count() - 1;
    let rows = lines
        .enumerate()
        .map(|(i, line)| {
            let mut cells = line.split(',');
            let id: usize = cells
                .next()
                .and_then(|c| c.trim().parse().ok())
                .ok_or_else(|| Error::Parse(format!("row {i}: bad id")))?;
            if id != i {
                return Err(Error::Parse(format!("row {i} labelled {id}")));
            }
            let row = cells
                .map(|c| {
                    c.trim()
                        .parse::<u32>()
                        .map_err(|_| Error::Parse(format!("row {i}: bad entry {c:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != n {
                return Err(Error::Parse(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    DistanceMatrix::from_rows(rows)
}

pub const PAIR_HEADER: &str = "x,y,graph_distance,exponent,power,value";

/// One row per pair `x < y`: graph distance, the exponent `e`, the exact
/// `e`-th power of the embedded distance and its float root.
pub fn pair_table_csv(
    n: usize,
    exponent: u32,
    dm: &DistanceMatrix,
    power: impl Fn(usize, usize) -> BigRational,
) -> String {
    let mut out = format!("{PAIR_HEADER}\n");
    for x in 0..n {
        for y in x + 1..n {
            let pw = power(x, y);
            let _ = writeln!(
                out,
                "{x},{y},{},{exponent},{},{}",
                dm.get(x, y),
                exact::display(&pw),
                exact::root(&pw, exponent)
            );
        }
    }
    out
}

/// Reads a pair CSV back into a table; every pair of `0..n` must appear
/// once and the exponent must be the same on every row.
pub fn pair_table_from_csv(text: &str) -> Result<(PairwiseTable, DistanceMatrix)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == PAIR_HEADER => {}
        other => return Err(Error::Parse(format!("unexpected pair header {other:?}"))),
    }
    let mut rows = Vec::new();
    let mut exponent = None;
    for (i, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 6 {
            return Err(Error::Parse(format!(
                "pair row {i} has {} cells",
                cells.len()
            )));
        }
        let bad = |what: &str| Error::Parse(format!("pair row {i}: bad {what}"));
        let x: usize = cells[0].parse().map_err(|_| bad("x"))?;
        let y: usize = cells[1].parse().map_err(|_| bad("y"))?;
        let d: u32 = cells[2].parse().map_err(|_| bad("distance"))?;
        let e: u32 = cells[3].parse().map_err(|_| bad("exponent"))?;
        let pw = exact::parse(cells[4]).ok_or_else(|| bad("power"))?;
        if *exponent.get_or_insert(e) != e {
            return Err(bad("exponent (mixed)"));
        }
        rows.push((x, y, d, pw));
    }
    let n = rows.iter().map(|r| r.1 + 1).max().unwrap_or(0);
    let mut dist = vec![vec![0u32; n]; n];
    let mut values: BTreeMap<(usize, usize), BigRational> = BTreeMap::new();
    for (x, y, d, pw) in rows {
        let key = (x.min(y), x.max(y));
        if x == y || values.insert(key, pw).is_some() {
            return Err(Error::Parse(format!(
                "pair ({x}, {y}) repeated or diagonal"
            )));
        }
        dist[x][y] = d;
        dist[y][x] = d;
    }
    if values.len() != n * n.saturating_sub(1) / 2 {
        return Err(Error::Parse(format!(
            "{} pairs listed, {n} vertices need {}",
            values.len(),
            n * n.saturating_sub(1) / 2
        )));
    }
    let table =
        PairwiseTable::from_values(n, exponent.unwrap_or(1), values.into_values().collect());
    Ok((table, DistanceMatrix::from_rows(dist)?))
}
