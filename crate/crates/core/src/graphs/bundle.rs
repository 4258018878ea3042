use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::code::VertexCode;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Diamond,
    Laakso,
    Parasol,
    CustomBase,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Diamond => "diamond",
            Family::Laakso => "laakso",
            Family::Parasol => "parasol",
            Family::CustomBase => "custom-base",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diamond" => Ok(Family::Diamond),
            "laakso" => Ok(Family::Laakso),
            "parasol" => Ok(Family::Parasol),
            "custom" | "custom-base" => Ok(Family::CustomBase),
            other => Err(Error::InvalidSpec(format!("unknown family {other:?}"))),
        }
    }
}

/// Where a vertex of a recursively built graph came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// A vertex of the outer factor that carried no provenance of its own,
    /// such as a terminal of the single-edge seed.
    Outer,
    /// Created by substituting the base into the oriented edge `(lower, upper)`;
    /// `inner` is the index of the originating internal vertex of the base.
    Substituted {
        lower: usize,
        upper: usize,
        inner: usize,
    },
}

/// A finite bundle: connected, simple, with terminals `bottom` and `top` such
/// that every vertex lies on a geodesic between them. Edges are stored
/// oriented from the bottom side to the top side.
#[derive(Clone, Debug)]
pub struct BundleGraph {
    family: Family,
    depth: u32,
    branching: u32,
    height: u32,
    bottom: usize,
    top: usize,
    adjacency: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    levels: Vec<u32>,
    codes: Option<Vec<VertexCode>>,
    provenance: Option<Vec<Provenance>>,
}

/// Family metadata attached to a graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GraphMeta {
    pub family: Family,
    pub depth: u32,
    pub branching: u32,
}

impl BundleGraph {
    /// Builds a graph and checks the cheap bundle conditions: simple,
    /// connected, every edge joins consecutive levels from the bottom, and
    /// `d(b, v) + d(v, t) = d(b, t)` for every vertex.
    pub fn from_edges(
        n: usize,
        edges: &[(usize, usize)],
        bottom: usize,
        top: usize,
        meta: GraphMeta,
    ) -> Result<Self> {
        if n < 2 || bottom >= n || top >= n || bottom == top {
            return Err(Error::NotABundleShape(format!(
                "need two distinct terminals among {n} vertices"
            )));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::NotABundleShape(format!(
                    "edge ({u}, {v}) out of range"
                )));
            }
            if u == v {
                return Err(Error::NotABundleShape(format!("loop at vertex {u}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for (v, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::NotABundleShape(format!("multi-edge at vertex {v}")));
            }
        }
        let from_bottom = bfs(&adjacency, bottom);
        if let Some(to) = from_bottom.iter().position(|d| d.is_none()) {
            return Err(Error::Disconnected { from: bottom, to });
        }
        let levels: Vec<u32> = from_bottom.into_iter().map(|d| d.unwrap()).collect();
        let from_top: Vec<u32> = bfs(&adjacency, top)
            .into_iter()
            .map(|d| d.unwrap())
            .collect();
        let height = levels[top];
        let mut oriented = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if levels[v] == levels[u] + 1 {
                oriented.push((u, v));
            } else if levels[u] == levels[v] + 1 {
                oriented.push((v, u));
            } else {
                return Err(Error::NotABundleShape(format!(
                    "edge ({u}, {v}) joins vertices at equal distance {} from the bottom",
                    levels[u]
                )));
            }
        }
        if let Some(v) = (0..n).find(|&v| levels[v] + from_top[v] != height) {
            return Err(Error::NotABundleShape(format!(
                "vertex {v} is not on a bottom-top geodesic"
            )));
        }
        Ok(BundleGraph {
            family: meta.family,
            depth: meta.depth,
            branching: meta.branching,
            height,
            bottom,
            top,
            adjacency,
            edges: oriented,
            levels,
            codes: None,
            provenance: None,
        })
    }

    /// The two-vertex graph with a single edge, `G^{⊘0}`.
    pub fn single_edge(meta: GraphMeta) -> Self {
        BundleGraph::from_edges(2, &[(0, 1)], 0, 1, meta).expect("single edge is a bundle")
    }

    pub(crate) fn with_codes(mut self, codes: Vec<VertexCode>) -> Self {
        assert_eq!(codes.len(), self.len());
        self.codes = Some(codes);
        self
    }

    pub(crate) fn with_provenance(mut self, provenance: Vec<Provenance>) -> Self {
        assert_eq!(provenance.len(), self.len());
        self.provenance = Some(provenance);
        self
    }

    pub(crate) fn set_meta(&mut self, meta: GraphMeta) {
        self.family = meta.family;
        self.depth = meta.depth;
        self.branching = meta.branching;
    }

    pub fn meta(&self) -> GraphMeta {
        GraphMeta {
            family: self.family,
            depth: self.depth,
            branching: self.branching,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn branching(&self) -> u32 {
        self.branching
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn top(&self) -> usize {
        self.top
    }

    /// Oriented edges `(lower, upper)`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Distance of each vertex from the bottom terminal.
    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn codes(&self) -> Option<&[VertexCode]> {
        self.codes.as_deref()
    }

    pub fn code(&self, v: usize) -> Option<&VertexCode> {
        self.codes.as_ref().map(|c| &c[v])
    }

    pub fn provenance(&self) -> Option<&[Provenance]> {
        self.provenance.as_deref()
    }

    /// Vertices that are neither bottom nor top.
    pub fn internal_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&v| v != self.bottom && v != self.top)
    }

    /// Enumerates simple bottom-top paths depth first, stopping at the first
    /// pair of unequal length or after `step_budget` DFS steps. Returns the
    /// number of complete paths seen and whether enumeration finished.
    pub fn check_paths(&self, step_budget: usize) -> Result<PathCheck> {
        let n = self.len();
        let mut on_path = vec![false; n];
        let mut path = vec![self.bottom];
        on_path[self.bottom] = true;
        // stack of next-neighbour cursors
        let mut cursor = vec![0usize];
        let mut first: Option<Vec<usize>> = None;
        let mut paths = 0usize;
        let mut steps = 0usize;
        while let Some(&v) = path.last() {
            if steps >= step_budget {
                return Ok(PathCheck {
                    paths,
                    complete: false,
                });
            }
            steps += 1;
            if v == self.top {
                paths += 1;
                match &first {
                    None => first = Some(path.clone()),
                    Some(f) if f.len() != path.len() => {
                        return Err(Error::NotABundle {
                            first_len: f.len() - 1,
                            first: f.clone(),
                            second_len: path.len() - 1,
                            second: path.clone(),
                        });
                    }
                    _ => {}
                }
                on_path[v] = false;
                path.pop();
                cursor.pop();
                continue;
            }
            let c = cursor.last_mut().unwrap();
            let nbrs = &self.adjacency[v];
            while *c < nbrs.len() && on_path[nbrs[*c]] {
                *c += 1;
            }
            if *c < nbrs.len() {
                let w = nbrs[*c];
                *c += 1;
                on_path[w] = true;
                path.push(w);
                cursor.push(0);
            } else {
                on_path[v] = false;
                path.pop();
                cursor.pop();
            }
        }
        Ok(PathCheck {
            paths,
            complete: true,
        })
    }
}

/// Outcome of a bounded simple-path enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PathCheck {
    pub paths: usize,
    pub complete: bool,
}

pub(crate) fn bfs(adjacency: &[Vec<usize>], source: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; adjacency.len()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &v in &adjacency[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Requested family member, truncated to a finite branching width.
#[derive(Clone, Debug)]
pub struct BundleSpec {
    pub family: Family,
    pub depth: u32,
    pub branching: u32,
    /// Base bundle for [`Family::CustomBase`].
    pub custom_base: Option<BundleGraph>,
}

impl BundleSpec {
    pub fn new(family: Family, depth: u32, branching: u32) -> Self {
        BundleSpec {
            family,
            depth,
            branching,
            custom_base: None,
        }
    }

    pub fn diamond(depth: u32, branching: u32) -> Self {
        BundleSpec::new(Family::Diamond, depth, branching)
    }

    pub fn custom(depth: u32, base: BundleGraph) -> Self {
        BundleSpec {
            family: Family::CustomBase,
            depth,
            branching: 0,
            custom_base: Some(base),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.family {
            Family::CustomBase => {
                if self.custom_base.is_none() {
                    return Err(Error::InvalidSpec(
                        "custom-base family needs a base graph".into(),
                    ));
                }
            }
            _ => {
                if self.branching < 2 {
                    return Err(Error::InvalidSpec(format!(
                        "branching must be at least 2, got {}",
                        self.branching
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn meta(&self) -> GraphMeta {
        GraphMeta {
            family: self.family,
            depth: self.depth,
            branching: self.branching,
        }
    }
}
