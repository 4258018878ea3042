use std::collections::HashMap;

use super::bundle::{BundleGraph, Family, Provenance};
use super::code::VertexCode;
use super::coded::code_index;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// Backtracking budget for the generic search.
const SEARCH_BUDGET: usize = 5_000_000;

/// A terminal-preserving graph isomorphism, `image[v]` is the vertex of the
/// second graph matched with vertex `v` of the first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isomorphism {
    pub image: Vec<usize>,
    /// Whether the map came from the coding recipe rather than the search.
    pub by_recipe: bool,
}

impl Isomorphism {
    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.image.len()];
        for (v, &u) in self.image.iter().enumerate() {
            inv[u] = v;
        }
        inv
    }
}

/// Finds an isomorphism mapping bottom to bottom and top to top. Recursive
/// diamonds matched against coded diamonds use the explicit coding map;
/// anything else goes through colour refinement and backtracking.
pub fn check_isomorphism(g1: &BundleGraph, g2: &BundleGraph) -> Result<Isomorphism> {
    invariant_witness(g1, g2)?;
    if let Some(image) = recipe_map(g1, g2) {
        if verify(g1, g2, &image) {
            return Ok(Isomorphism {
                image,
                by_recipe: true,
            });
        }
    }
    if let Some(inv) = recipe_map(g2, g1) {
        if verify(g2, g1, &inv) {
            let iso = Isomorphism {
                image: inv,
                by_recipe: true,
            };
            return Ok(Isomorphism {
                image: iso.inverse(),
                by_recipe: true,
            });
        }
    }
    generic_search(g1, g2).map(|image| Isomorphism {
        image,
        by_recipe: false,
    })
}

fn invariant_witness(g1: &BundleGraph, g2: &BundleGraph) -> Result<()> {
    if g1.len() != g2.len() {
        return Err(Error::NotIsomorphic(format!(
            "vertex counts {} and {}",
            g1.len(),
            g2.len()
        )));
    }
    if g1.edge_count() != g2.edge_count() {
        return Err(Error::NotIsomorphic(format!(
            "edge counts {} and {}",
            g1.edge_count(),
            g2.edge_count()
        )));
    }
    if g1.height() != g2.height() {
        return Err(Error::NotIsomorphic(format!(
            "heights {} and {}",
            g1.height(),
            g2.height()
        )));
    }
    let degrees = |g: &BundleGraph| {
        let mut d: Vec<usize> = (0..g.len()).map(|v| g.degree(v)).collect();
        d.sort_unstable();
        d
    };
    let (d1, d2) = (degrees(g1), degrees(g2));
    if let Some(i) = (0..d1.len()).find(|&i| d1[i] != d2[i]) {
        return Err(Error::NotIsomorphic(format!(
            "sorted degree sequences differ at position {i}: {} vs {}",
            d1[i], d2[i]
        )));
    }
    Ok(())
}

/// The inductive coding map for a recursive diamond `g1` onto a coded
/// diamond `g2`: a vertex substituted into the edge with endpoint images
/// `(A, r)`, `(B, s)`, `|B| > |A|`, as the j-th midpoint goes to
/// `(B ∪ {max B + j}, (r + s) / 2)`.
fn recipe_map(g1: &BundleGraph, g2: &BundleGraph) -> Option<Vec<usize>> {
    if g1.family() != Family::Diamond || g2.family() != Family::Diamond {
        return None;
    }
    let provenance = g1.provenance()?;
    let codes2 = g2.codes()?;
    let index = code_index(codes2);
    let mut codes1: Vec<VertexCode> = Vec::with_capacity(g1.len());
    for (v, p) in provenance.iter().enumerate() {
        let code = match *p {
            Provenance::Outer if v == g1.bottom() => VertexCode::bottom(),
            Provenance::Outer if v == g1.top() => VertexCode::top(),
            Provenance::Outer => return None,
            Provenance::Substituted {
                lower,
                upper,
                inner,
            } => {
                let (a, b) = (codes1.get(lower)?, codes1.get(upper)?);
                let long = if a.level() >= b.level() { a } else { b };
                // diamond base midpoints are stored at 2..=w+1
                let j = u32::try_from(inner.checked_sub(1)?).ok()?;
                let mut set = long.set().to_vec();
                set.push(long.set().last().copied().unwrap_or(0) + j);
                let r = (a.r() + b.r()) * Dyadic::HALF;
                if !r.in_level(set.len() as u32) {
                    return None;
                }
                VertexCode::from_parts(set, r)
            }
        };
        codes1.push(code);
    }
    codes1.iter().map(|c| index.get(c).copied()).collect()
}

fn verify(g1: &BundleGraph, g2: &BundleGraph, image: &[usize]) -> bool {
    if image.len() != g1.len() || g1.len() != g2.len() {
        return false;
    }
    let mut seen = vec![false; g2.len()];
    for &u in image {
        if u >= g2.len() || std::mem::replace(&mut seen[u], true) {
            return false;
        }
    }
    image[g1.bottom()] == g2.bottom()
        && image[g1.top()] == g2.top()
        && g1.edge_count() == g2.edge_count()
        && g1
            .edges()
            .iter()
            .all(|&(u, v)| g2.adjacent(image[u], image[v]))
}

/// Colour refinement over both graphs with a shared palette.
fn refine(g1: &BundleGraph, g2: &BundleGraph) -> (Vec<u32>, Vec<u32>) {
    let initial = |g: &BundleGraph| -> Vec<(bool, bool, usize, u32, u32)> {
        (0..g.len())
            .map(|v| {
                let level = g.levels()[v];
                (
                    v == g.bottom(),
                    v == g.top(),
                    g.degree(v),
                    level,
                    g.height() - level,
                )
            })
            .collect()
    };
    let mut palette: HashMap<(bool, bool, usize, u32, u32), u32> = HashMap::new();
    let mut start = |sig: Vec<(bool, bool, usize, u32, u32)>| -> Vec<u32> {
        sig.into_iter()
            .map(|s| {
                let next = palette.len() as u32;
                *palette.entry(s).or_insert(next)
            })
            .collect()
    };
    let mut c1 = start(initial(g1));
    let mut c2 = start(initial(g2));
    let mut classes = count_classes(&c1, &c2);
    loop {
        let mut table: HashMap<(u32, Vec<u32>), u32> = HashMap::new();
        let mut step = |g: &BundleGraph, c: &[u32]| -> Vec<u32> {
            (0..g.len())
                .map(|v| {
                    let mut around: Vec<u32> = g.neighbors(v).iter().map(|&u| c[u]).collect();
                    around.sort_unstable();
                    let next = table.len() as u32;
                    *table.entry((c[v], around)).or_insert(next)
                })
                .collect()
        };
        let n1 = step(g1, &c1);
        let n2 = step(g2, &c2);
        let next_classes = count_classes(&n1, &n2);
        c1 = n1;
        c2 = n2;
        if next_classes == classes {
            return (c1, c2);
        }
        classes = next_classes;
    }
}

fn count_classes(a: &[u32], b: &[u32]) -> usize {
    let mut all: Vec<u32> = a.iter().chain(b).copied().collect();
    all.sort_unstable();
    all.dedup();
    all.len()
}

fn generic_search(g1: &BundleGraph, g2: &BundleGraph) -> Result<Vec<usize>> {
    let (c1, c2) = refine(g1, g2);
    let histogram = |c: &[u32]| {
        let mut h: HashMap<u32, usize> = HashMap::new();
        for &x in c {
            *h.entry(x).or_default() += 1;
        }
        h
    };
    let (h1, h2) = (histogram(&c1), histogram(&c2));
    if let Some((&colour, &count)) = h1.iter().find(|(k, v)| h2.get(k) != Some(v)) {
        let v = c1.iter().position(|&c| c == colour).unwrap();
        return Err(Error::NotIsomorphic(format!(
            "refined colour class of vertex {v} (degree {}, level {}) has {count} members in the first graph and {} in the second",
            g1.degree(v),
            g1.levels()[v],
            h2.get(&colour).copied().unwrap_or(0)
        )));
    }
    if c1[g1.bottom()] != c2[g2.bottom()] || c1[g1.top()] != c2[g2.top()] {
        return Err(Error::NotIsomorphic("terminal colours differ".into()));
    }
    // BFS order from the bottom, so every vertex after the first has an
    // already placed neighbour
    let mut order = Vec::with_capacity(g1.len());
    let mut placed = vec![false; g1.len()];
    order.push(g1.bottom());
    placed[g1.bottom()] = true;
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for &u in g1.neighbors(v) {
            if !placed[u] {
                placed[u] = true;
                order.push(u);
            }
        }
    }
    let mut search = Search {
        g1,
        g2,
        c1: &c1,
        c2: &c2,
        order: &order,
        image: vec![usize::MAX; g1.len()],
        preimage: vec![usize::MAX; g2.len()],
        steps: 0,
    };
    match search.extend(0) {
        Some(true) => Ok(search.image),
        Some(false) => Err(Error::NotIsomorphic(
            "exhaustive search found no terminal-preserving bijection".into(),
        )),
        None => Err(Error::NotIsomorphic(format!(
            "undetermined: search budget of {SEARCH_BUDGET} steps exhausted"
        ))),
    }
}

struct Search<'a> {
    g1: &'a BundleGraph,
    g2: &'a BundleGraph,
    c1: &'a [u32],
    c2: &'a [u32],
    order: &'a [usize],
    image: Vec<usize>,
    preimage: Vec<usize>,
    steps: usize,
}

impl Search<'_> {
    /// `None` when the budget runs out.
    fn extend(&mut self, depth: usize) -> Option<bool> {
        if depth == self.order.len() {
            return Some(true);
        }
        let v = self.order[depth];
        let candidates: Vec<usize> = if depth == 0 {
            vec![self.g2.bottom()]
        } else {
            let anchor = self
                .g1
                .neighbors(v)
                .iter()
                .find(|&&u| self.image[u] != usize::MAX)
                .map(|&u| self.image[u])
                .expect("BFS order");
            self.g2.neighbors(anchor).to_vec()
        };
        for c in candidates {
            self.steps += 1;
            if self.steps > SEARCH_BUDGET {
                return None;
            }
            if self.preimage[c] != usize::MAX || self.c1[v] != self.c2[c] || !self.consistent(v, c)
            {
                continue;
            }
            self.image[v] = c;
            self.preimage[c] = v;
            match self.extend(depth + 1) {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => {}
            }
            self.image[v] = usize::MAX;
            self.preimage[c] = usize::MAX;
        }
        Some(false)
    }

    fn consistent(&self, v: usize, c: usize) -> bool {
        if (v == self.g1.top()) != (c == self.g2.top()) {
            return false;
        }
        let mut mapped = 0;
        for &u in self.g1.neighbors(v) {
            let iu = self.image[u];
            if iu != usize::MAX {
                if !self.g2.adjacent(c, iu) {
                    return false;
                }
                mapped += 1;
            }
        }
        let mapped2 = self
            .g2
            .neighbors(c)
            .iter()
            .filter(|&&x| self.preimage[x] != usize::MAX)
            .count();
        mapped == mapped2
    }
}
