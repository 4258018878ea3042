//! Exact shortest-path metrics on bundle graphs, the closed form on coded
//! diamonds and the self-similarity isometries between depths.

use std::collections::VecDeque;
use std::fmt;

use rayon::prelude::*;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::graphs::bundle::bfs;
use crate::graphs::code::{shift_in, shift_out, VertexCode};
use crate::graphs::BundleGraph;

/// Symmetric all-pairs distance table, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<u32>,
}

impl DistanceMatrix {
    pub fn from_rows(rows: Vec<Vec<u32>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Parse("distance matrix is not square".into()));
        }
        Ok(DistanceMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Every unordered pair `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| (i + 1..self.n).map(move |j| (i, j)))
    }

    /// Checks symmetry, the zero diagonal and positivity off the diagonal.
    pub fn check_shape(&self) -> Result<()> {
        for i in 0..self.n {
            if self.get(i, i) != 0 {
                return Err(Error::InvalidParameter(format!("d({i}, {i}) is not zero")));
            }
            for j in i + 1..self.n {
                let d = self.get(i, j);
                if d != self.get(j, i) || d == 0 {
                    return Err(Error::InvalidParameter(format!(
                        "entries ({i}, {j}) are not a metric distance"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Unweighted all-pairs distances, one BFS per source in parallel.
pub fn bfs_all_pairs(g: &BundleGraph) -> Result<DistanceMatrix> {
    let n = g.len();
    let adjacency: Vec<Vec<usize>> = (0..n).map(|v| g.neighbors(v).to_vec()).collect();
    let rows: Vec<Result<Vec<u32>>> = (0..n)
        .into_par_iter()
        .map(|s| {
            bfs(&adjacency, s)
                .into_iter()
                .enumerate()
                .map(|(t, d)| d.ok_or(Error::Disconnected { from: s, to: t }))
                .collect()
        })
        .collect();
    let mut data = Vec::with_capacity(n * n);
    for row in rows {
        data.extend(row?);
    }
    Ok(DistanceMatrix { n, data })
}

fn codes_of(g: &BundleGraph) -> Result<&[VertexCode]> {
    g.codes()
        .ok_or_else(|| Error::NotDiamond(format!("{} graph without vertex codes", g.family())))
}

/// Whether a path along which `r` strictly increases joins `x` and `y`,
/// searched by BFS over increasing edges only.
pub fn vertical_path_test(g: &BundleGraph, x: usize, y: usize) -> Result<bool> {
    let codes = codes_of(g)?;
    if x == y {
        return Ok(true);
    }
    let (lo, hi) = if codes[x].r() <= codes[y].r() {
        (x, y)
    } else {
        (y, x)
    };
    let target = codes[hi].r();
    if codes[lo].r() == target {
        return Ok(false);
    }
    let mut seen = vec![false; g.len()];
    seen[lo] = true;
    let mut queue = VecDeque::from([lo]);
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            let r = codes[v].r();
            if !seen[v] && r > codes[u].r() && r <= target {
                if v == hi {
                    return Ok(true);
                }
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    Ok(false)
}

/// `2^k |r - s|` as an integer.
fn vertical_length(x: &VertexCode, y: &VertexCode, k: u32) -> u64 {
    let d = (x.r() - y.r()).abs().times_pow2(k as i32);
    d.to_integer().expect("labels live on the 2^-k grid") as u64
}

/// Distance on the coded diamond of depth `k`, assembled from the terminal
/// formula, the two-branch formula and recursion into the half-parts.
pub fn closed_form_distance(x: &VertexCode, y: &VertexCode, k: u32) -> u64 {
    if x == y {
        return 0;
    }
    let (Some(i), Some(j)) = (x.min(), y.min()) else {
        return vertical_length(x, y, k);
    };
    let (r, s) = (x.r(), y.r());
    if i != j {
        let sum = r + s;
        let other = Dyadic::from_int(2) - sum;
        let best = if sum <= other { sum } else { other };
        return best.times_pow2(k as i32).to_integer().unwrap() as u64;
    }
    let half = Dyadic::HALF;
    if (r <= half && half <= s) || (s <= half && half <= r) {
        return vertical_length(x, y, k);
    }
    let which = if r < half {
        Isometry::Down(j)
    } else {
        Isometry::Up(j)
    };
    let x1 = which.apply(x, k).expect("part checked");
    let y1 = which.apply(y, k).expect("part checked");
    closed_form_distance(&x1, &y1, k - 1)
}

/// All-pairs closed form on a coded graph.
pub fn closed_form_all_pairs(g: &BundleGraph) -> Result<DistanceMatrix> {
    let codes = codes_of(g)?;
    let n = g.len();
    let k = g.depth();
    let rows: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|a| {
            (0..n)
                .map(|b| closed_form_distance(&codes[a], &codes[b], k) as u32)
                .collect()
        })
        .collect();
    Ok(DistanceMatrix {
        n,
        data: rows.into_iter().flatten().collect(),
    })
}

/// Pairs joined by a vertical path are exactly those at distance
/// `2^k |r - s|`; cheaper than the path search for bulk classification.
pub fn is_vertical_pair(x: &VertexCode, y: &VertexCode, d: u64, k: u32) -> bool {
    d == vertical_length(x, y, k)
}

/// The three maps from a half-part of branch `j` at depth `k` onto depth
/// `k - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Isometry {
    /// Lower half, `(A, r) -> (s_j^-1 A, 2r)`, bottom fixed.
    Down(u32),
    /// Upper half, `(A, r) -> (s_j^-1 A, 2r - 1)`, top fixed.
    Up(u32),
    /// Upper half turned over, `(A, r) -> (s_j^-1 A, 2(1 - r))`, top to bottom.
    Flip(u32),
}

impl fmt::Display for Isometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Isometry::Down(j) => write!(f, "({j},-)"),
            Isometry::Up(j) => write!(f, "({j},+)"),
            Isometry::Flip(j) => write!(f, "flip({j},+)"),
        }
    }
}

impl Isometry {
    pub fn branch(&self) -> u32 {
        match *self {
            Isometry::Down(j) | Isometry::Up(j) | Isometry::Flip(j) => j,
        }
    }

    /// Membership in the domain part.
    pub fn contains(&self, v: &VertexCode) -> bool {
        let j = self.branch();
        match self {
            Isometry::Down(_) => {
                *v == VertexCode::bottom() || (v.min() == Some(j) && v.r() <= Dyadic::HALF)
            }
            Isometry::Up(_) | Isometry::Flip(_) => {
                *v == VertexCode::top() || (v.min() == Some(j) && v.r() >= Dyadic::HALF)
            }
        }
    }

    pub fn apply(&self, v: &VertexCode, k: u32) -> Result<VertexCode> {
        if k == 0 || !self.contains(v) || v.level() > k {
            return Err(Error::OutsidePart {
                code: v.to_string(),
                part: self.to_string(),
            });
        }
        if v.is_terminal() {
            return Ok(match self {
                Isometry::Flip(_) => VertexCode::bottom(),
                _ => v.clone(),
            });
        }
        let set = shift_out(self.branch(), v.set()).expect("contains checked the minimum");
        let r = v.r();
        let r = match self {
            Isometry::Down(_) => r.double(),
            Isometry::Up(_) => r.double() - Dyadic::ONE,
            Isometry::Flip(_) => (Dyadic::ONE - r).double(),
        };
        Ok(VertexCode::from_parts(set, r))
    }

    /// Inverse map from depth `k - 1` back into the part.
    pub fn invert(&self, v: &VertexCode) -> VertexCode {
        let j = self.branch();
        let s = v.r();
        match self {
            Isometry::Down(_) if *v == VertexCode::bottom() => VertexCode::bottom(),
            Isometry::Up(_) if *v == VertexCode::top() => VertexCode::top(),
            Isometry::Flip(_) if *v == VertexCode::bottom() => VertexCode::top(),
            Isometry::Down(_) => VertexCode::from_parts(shift_in(j, v.set()), s.halve()),
            Isometry::Up(_) => {
                VertexCode::from_parts(shift_in(j, v.set()), (s + Dyadic::ONE).halve())
            }
            Isometry::Flip(_) => {
                VertexCode::from_parts(shift_in(j, v.set()), Dyadic::ONE - s.halve())
            }
        }
    }
}
