//! Tree embedding of the coded diamond into a sup-norm sequence space: each
//! vertex `(A, r)` goes to `sum_{D ⪯ A} c_k(|D|, r) y_D` with one coordinate
//! per tree node.

use std::collections::HashMap;

use num_rational::BigRational;

use crate::distortion::{Norm, SparseVector, VectorEmbedding};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::graphs::code::{format_set, set_admissible, VertexCode};
use crate::graphs::coded::admissible_sets;
use crate::graphs::BundleGraph;

/// Memoized coefficients `c_k(i, r)` for a fixed depth `k`.
#[derive(Clone, Debug)]
pub struct CoefficientTable {
    k: u32,
    values: HashMap<(u32, u32, Dyadic), u64>,
}

fn in_domain(k: u32, i: u32, r: Dyadic) -> bool {
    if i > k {
        return false;
    }
    if i == 0 && (r == Dyadic::ZERO || r == Dyadic::ONE) {
        return true;
    }
    r.exponent() >= i.max(1) && r.exponent() <= k && r.in_level(r.exponent())
}

impl CoefficientTable {
    pub fn new(k: u32) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidParameter("coefficients need k >= 1".into()));
        }
        let mut table = CoefficientTable {
            k,
            values: HashMap::new(),
        };
        // fill everything a depth-k vertex can ask for
        for m in 0..=k {
            for r in crate::graphs::coded::level_labels(m) {
                for i in 0..=m {
                    table.compute(k, i, r);
                }
            }
        }
        Ok(table)
    }

    pub fn depth(&self) -> u32 {
        self.k
    }

    /// `c_k(i, r)`.
    pub fn get(&self, i: u32, r: Dyadic) -> Result<u64> {
        if !in_domain(self.k, i, r) {
            return Err(Error::InvalidParameter(format!(
                "c_{}({i}, {r:?}) is outside the coefficient domain",
                self.k
            )));
        }
        Ok(self.values[&(self.k, i, r)])
    }

    fn compute(&mut self, k: u32, i: u32, r: Dyadic) -> u64 {
        if let Some(&v) = self.values.get(&(k, i, r)) {
            return v;
        }
        let v = if i == 0 {
            r.times_pow2(k as i32)
                .to_integer()
                .expect("r on the 2^-k grid") as u64
        } else if r <= Dyadic::HALF {
            self.compute(k - 1, i - 1, r.double())
        } else {
            self.compute(k - 1, i - 1, (Dyadic::ONE - r).double())
        };
        self.values.insert((k, i, r), v);
        v
    }
}

/// The canonical tree: every admissible node gets its own coordinate, in the
/// order of `max(A)` and then lexicographic `A`.
#[derive(Clone, Debug)]
pub struct GoodTree {
    nodes: Vec<Vec<u32>>,
    coordinate: HashMap<Vec<u32>, u64>,
}

impl GoodTree {
    pub fn canonical(k: u32, w: u32) -> Self {
        let mut nodes: Vec<Vec<u32>> = (0..=k).flat_map(|m| admissible_sets(m, w)).collect();
        nodes.sort_by(|a, b| {
            let ma = a.last().copied().unwrap_or(0);
            let mb = b.last().copied().unwrap_or(0);
            ma.cmp(&mb).then_with(|| a.cmp(b))
        });
        GoodTree::from_nodes(nodes)
    }

    /// A tree from an explicit node order; coordinates are positions.
    pub fn from_nodes(nodes: Vec<Vec<u32>>) -> Self {
        let coordinate = nodes
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i as u64))
            .collect();
        GoodTree { nodes, coordinate }
    }

    pub fn nodes(&self) -> &[Vec<u32>] {
        &self.nodes
    }

    pub fn coordinate(&self, node: &[u32]) -> Option<u64> {
        self.coordinate.get(node).copied()
    }

    /// Whether `max(A_i) < max(A_j)` forces `i < j`.
    pub fn is_compatible(&self) -> bool {
        let maxes: Vec<u32> = self
            .nodes
            .iter()
            .map(|a| a.last().copied().unwrap_or(0))
            .collect();
        maxes.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn admits(&self, w: u32) -> bool {
        self.nodes.iter().all(|a| set_admissible(a, w))
    }
}

/// `Ψ_k(A, r)`.
pub fn psi(
    k: u32,
    v: &VertexCode,
    tree: &GoodTree,
    table: &CoefficientTable,
) -> Result<SparseVector> {
    if table.depth() != k || v.level() > k {
        return Err(Error::InvalidParameter(format!(
            "vertex {v} with a depth-{} table at depth {k}",
            table.depth()
        )));
    }
    let mut out = SparseVector::new();
    for m in 0..=v.set().len() {
        let node = v.prefix(m);
        let coord = tree
            .coordinate(node)
            .ok_or_else(|| Error::MissingTreeNode(format_set(node)))?;
        let c = table.get(m as u32, v.r())?;
        out.add_to(coord, &BigRational::from_integer((c as i64).into()));
    }
    Ok(out)
}

/// The `y_∅` coordinate of `Ψ_k(v)`, which is `r 2^k`.
pub fn functional_coordinate(k: u32, v: &VertexCode) -> Result<u64> {
    if k == 0 {
        return Ok(v.r().to_integer().unwrap_or(0) as u64);
    }
    CoefficientTable::new(k)?.get(0, v.r())
}

/// `Ψ_k` on every vertex of a coded diamond, under the sup norm.
pub fn psi_embedding(g: &BundleGraph) -> Result<VectorEmbedding> {
    let codes = g
        .codes()
        .ok_or_else(|| Error::NotDiamond(format!("{} graph without vertex codes", g.family())))?;
    let k = g.depth();
    let table = CoefficientTable::new(k)?;
    let tree = GoodTree::canonical(k, g.branching());
    let vectors = codes
        .iter()
        .map(|c| psi(k, c, &tree, &table))
        .collect::<Result<Vec<_>>>()?;
    Ok(VectorEmbedding::new(vectors, Norm::Sup))
}

/// Smallest integer `p >= 1` with `p >= ln(2k + 2) / ln(1 + eps / 3)`.
pub fn lp_parameter(k: u32, eps: f64) -> Result<u32> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let bound = (2.0 * k as f64 + 2.0).ln() / (eps / 3.0).ln_1p();
    // absorb rounding when the ratio is an exact integer
    let p = (bound - 1e-9).ceil().max(1.0);
    Ok(p as u32)
}
