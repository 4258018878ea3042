use super::bundle::{BundleGraph, BundleSpec, Family, GraphMeta, Provenance};
use crate::error::{Error, Result};

/// DFS step budget for the simple-path check on product inputs.
const PATH_CHECK_BUDGET: usize = 2_000_000;

/// `K_{2,w}`: 0 is the bottom, 1 the top, `1 + j` the j-th midpoint.
pub fn diamond_base(w: u32) -> BundleGraph {
    let w = w as usize;
    let mut edges = Vec::with_capacity(2 * w);
    for j in 1..=w {
        edges.push((0, 1 + j));
        edges.push((1 + j, 1));
    }
    let meta = GraphMeta {
        family: Family::Diamond,
        depth: 1,
        branching: w as u32,
    };
    BundleGraph::from_edges(w + 2, &edges, 0, 1, meta).expect("K_{2,w} is a bundle")
}

/// Laakso base: a stem of one edge at each end with a fan of `w` vertices in
/// the middle. 0 bottom, 1 top, 2 and 3 the stem vertices, `3 + j` the fan.
pub fn laakso_base(w: u32) -> BundleGraph {
    let w = w as usize;
    let mut edges = vec![(0, 2), (3, 1)];
    for j in 1..=w {
        edges.push((2, 3 + j));
        edges.push((3 + j, 3));
    }
    let meta = GraphMeta {
        family: Family::Laakso,
        depth: 1,
        branching: w as u32,
    };
    BundleGraph::from_edges(w + 4, &edges, 0, 1, meta).expect("laakso base is a bundle")
}

/// Parasol base: bottom, a single vertex above it, a fan of `w` vertices,
/// and the tip joined to the whole fan. 0 bottom, 1 tip, 2 stem, `2 + j` fan.
pub fn parasol_base(w: u32) -> BundleGraph {
    let w = w as usize;
    let mut edges = vec![(0, 2)];
    for j in 1..=w {
        edges.push((2, 2 + j));
        edges.push((2 + j, 1));
    }
    let meta = GraphMeta {
        family: Family::Parasol,
        depth: 1,
        branching: w as u32,
    };
    BundleGraph::from_edges(w + 3, &edges, 0, 1, meta).expect("parasol base is a bundle")
}

/// `H ⊘ G`. Both inputs are checked for the bundle property first.
pub fn oslash_product(h: &BundleGraph, g: &BundleGraph) -> Result<BundleGraph> {
    h.check_paths(PATH_CHECK_BUDGET)?;
    g.check_paths(PATH_CHECK_BUDGET)?;
    let mut out = oslash_unchecked(h, g);
    out.set_meta(GraphMeta {
        family: Family::CustomBase,
        depth: h.depth() + g.depth(),
        branching: g.branching(),
    });
    Ok(out)
}

/// Edge substitution without the path check. Each oriented edge `(u, v)` of
/// `h`, taken in order, receives a copy of the internal vertices of `g`, with
/// the bottom of `g` glued to `u` and its top glued to `v`.
pub(crate) fn oslash_unchecked(h: &BundleGraph, g: &BundleGraph) -> BundleGraph {
    let inner: Vec<usize> = g.internal_vertices().collect();
    let mut slot = vec![usize::MAX; g.len()];
    for (pos, &x) in inner.iter().enumerate() {
        slot[x] = pos;
    }
    let base = h.len();
    let n = base + h.edge_count() * inner.len();
    let mut edges = Vec::with_capacity(h.edge_count() * g.edge_count());
    let mut provenance: Vec<Provenance> = match h.provenance() {
        Some(p) => p.to_vec(),
        None => vec![Provenance::Outer; base],
    };
    provenance.reserve(n - base);
    for (e, &(u, v)) in h.edges().iter().enumerate() {
        let offset = base + e * inner.len();
        for &x in &inner {
            provenance.push(Provenance::Substituted {
                lower: u,
                upper: v,
                inner: x,
            });
        }
        let image = |x: usize| {
            if x == g.bottom() {
                u
            } else if x == g.top() {
                v
            } else {
                offset + slot[x]
            }
        };
        for &(a, b) in g.edges() {
            edges.push((image(a), image(b)));
        }
    }
    BundleGraph::from_edges(n, &edges, h.bottom(), h.top(), h.meta())
        .expect("product of bundles is a bundle")
        .with_provenance(provenance)
}

/// Base graph of a family, truncated to the requested width.
pub fn base_graph(spec: &BundleSpec) -> Result<BundleGraph> {
    spec.validate()?;
    let base = match spec.family {
        Family::Diamond => diamond_base(spec.branching),
        Family::Laakso => laakso_base(spec.branching),
        Family::Parasol => parasol_base(spec.branching),
        Family::CustomBase => {
            let base = spec.custom_base.clone().expect("validated");
            base.check_paths(PATH_CHECK_BUDGET)?;
            if base.internal_vertices().next().is_none() {
                return Err(Error::InvalidSpec(
                    "custom base needs at least one internal vertex".into(),
                ));
            }
            base
        }
    };
    Ok(base)
}

/// `base^{⊘depth}`, built as `((e ⊘ G) ⊘ G) ⊘ ...` from the single edge `e`.
/// The vertices of the depth `k - 1` graph are then an index prefix of the
/// depth `k` graph.
pub fn build_recursive(spec: &BundleSpec) -> Result<BundleGraph> {
    let base = base_graph(spec)?;
    let meta = GraphMeta {
        family: spec.family,
        depth: 0,
        branching: spec.branching,
    };
    let mut g = BundleGraph::single_edge(meta);
    for _ in 0..spec.depth {
        g = oslash_unchecked(&g, &base);
    }
    g.set_meta(spec.meta());
    if g.provenance().is_none() {
        g = g.with_provenance(vec![Provenance::Outer; 2]);
    }
    Ok(g)
}
