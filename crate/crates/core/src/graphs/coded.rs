use std::collections::HashMap;

use super::bundle::{BundleGraph, BundleSpec, Family};
use super::code::VertexCode;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// All truncation-admissible sets of size `m` in lexicographic order.
pub fn admissible_sets(m: u32, w: u32) -> Vec<Vec<u32>> {
    fn extend(prefix: &mut Vec<u32>, m: usize, w: u32, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == m {
            out.push(prefix.clone());
            return;
        }
        let last = prefix.last().copied().unwrap_or(0);
        for a in last + 1..=last + w {
            prefix.push(a);
            extend(prefix, m, w, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::with_capacity(m as usize), m as usize, w, &mut out);
    out
}

/// `B_m` in increasing order.
pub fn level_labels(m: u32) -> impl Iterator<Item = Dyadic> {
    let count: i128 = if m == 0 { 2 } else { 1 << (m - 1) };
    (0..count).map(move |i| {
        if m == 0 {
            Dyadic::from_int(i)
        } else {
            Dyadic::new(2 * i + 1, m)
        }
    })
}

/// Vertex codes of the truncated coded diamond in storage order: the two
/// terminals, then by `|A|`, `A` lexicographically, `r` increasing.
pub fn coded_vertices(k: u32, w: u32) -> Vec<VertexCode> {
    let mut out = vec![VertexCode::bottom(), VertexCode::top()];
    for m in 1..=k {
        for set in admissible_sets(m, w) {
            for r in level_labels(m) {
                out.push(VertexCode::from_parts(set.clone(), r));
            }
        }
    }
    out
}

/// The two lower-level neighbours `(up, down)` of a maximal vertex: up has
/// label `r + 2^-k`, down has label `r - 2^-k`.
pub fn up_down_edge(v: &VertexCode, k: u32) -> Result<(VertexCode, VertexCode)> {
    if k == 0 || v.level() != k {
        return Err(Error::NotMaximal {
            code: v.to_string(),
            depth: k,
        });
    }
    let digits = v
        .r()
        .binary_digits(k)
        .expect("label of a maximal vertex has k digits");
    let step = Dyadic::new(1, k);
    let last_with = |bit: bool| (1..k as usize).rev().find(|&i| digits[i - 1] == bit);
    let down = match last_with(true) {
        Some(i) => VertexCode::from_parts(v.prefix(i).to_vec(), v.r() - step),
        None => VertexCode::bottom(),
    };
    let up = match last_with(false) {
        Some(i) => VertexCode::from_parts(v.prefix(i).to_vec(), v.r() + step),
        None => VertexCode::top(),
    };
    Ok((up, down))
}

/// The coded diamond of depth `k` truncated to width `w`.
pub fn build_coded(spec: &BundleSpec) -> Result<BundleGraph> {
    if spec.family != Family::Diamond {
        return Err(Error::NotDiamond(spec.family.to_string()));
    }
    spec.validate()?;
    let (k, w) = (spec.depth, spec.branching);
    let codes = coded_vertices(k, w);
    let index = code_index(&codes);
    let mut edges = Vec::new();
    if k == 0 {
        edges.push((0, 1));
    } else {
        for (i, code) in codes.iter().enumerate().filter(|(_, c)| c.level() == k) {
            let (up, down) = up_down_edge(code, k)?;
            edges.push((index[&down], i));
            edges.push((i, index[&up]));
        }
    }
    let g = BundleGraph::from_edges(codes.len(), &edges, 0, 1, spec.meta())?;
    Ok(g.with_codes(codes))
}

pub fn code_index(codes: &[VertexCode]) -> HashMap<VertexCode, usize> {
    codes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.clone(), i))
        .collect()
}

/// `|V_k|` of the truncated coded diamond: `2 + sum_{m=1..k} w^m 2^{m-1}`.
pub fn coded_vertex_count(k: u32, w: u32) -> usize {
    2 + (1..=k)
        .map(|m| (w as usize).pow(m) << (m - 1))
        .sum::<usize>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(set: &[u32], num: i128, exp: u32) -> VertexCode {
        VertexCode::new(set.to_vec(), Dyadic::new(num, exp)).unwrap()
    }

    #[test]
    fn counts() {
        for (k, w, n) in [(2, 2, 12), (2, 3, 23), (3, 2, 44), (1, 3, 5), (0, 4, 2)] {
            let g = build_coded(&BundleSpec::diamond(k, w)).unwrap();
            assert_eq!(g.len(), n);
            assert_eq!(coded_vertex_count(k, w), n);
            assert_eq!(g.edge_count(), (2 * w as usize).pow(k));
            assert_eq!(g.height(), 1 << k);
        }
    }

    #[test]
    fn neighbours_at_depth_two() {
        let (up, down) = up_down_edge(&code(&[1, 2], 3, 2), 2).unwrap();
        assert_eq!(up, VertexCode::top());
        assert_eq!(down, code(&[1], 1, 1));
        let (up, down) = up_down_edge(&code(&[1, 3], 1, 2), 2).unwrap();
        assert_eq!(up, code(&[1], 1, 1));
        assert_eq!(down, VertexCode::bottom());
        let (up, down) = up_down_edge(&code(&[5], 1, 1), 1).unwrap();
        assert_eq!((up, down), (VertexCode::top(), VertexCode::bottom()));
        let (up, down) = up_down_edge(&code(&[1, 2, 4], 5, 3), 3).unwrap();
        assert_eq!(up, code(&[1, 2], 3, 2));
        assert_eq!(down, code(&[1], 1, 1));
        assert!(up_down_edge(&code(&[1], 1, 1), 2).is_err());
    }

    #[test]
    fn up_down_matches_neighbour_scan() {
        let g = build_coded(&BundleSpec::diamond(3, 2)).unwrap();
        let codes = g.codes().unwrap();
        for v in (0..g.len()).filter(|&v| codes[v].level() == 3) {
            let mut scanned: Vec<&VertexCode> = g.neighbors(v).iter().map(|&u| &codes[u]).collect();
            scanned.sort();
            let (up, down) = up_down_edge(&codes[v], 3).unwrap();
            let mut expected = vec![&up, &down];
            expected.sort();
            assert_eq!(scanned, expected);
        }
    }

    #[test]
    fn edges_join_prefixes_at_label_gap() {
        let g = build_coded(&BundleSpec::diamond(3, 3)).unwrap();
        let codes = g.codes().unwrap();
        let step = Dyadic::new(1, 3);
        for &(u, v) in g.edges() {
            let (a, b) = (&codes[u], &codes[v]);
            assert_eq!((a.r() - b.r()).abs(), step);
            let (short, long) = if a.level() < b.level() {
                (a, b)
            } else {
                (b, a)
            };
            assert!(super::super::code::is_proper_prefix(
                short.set(),
                long.set()
            ));
            assert_eq!(long.level(), 3);
        }
    }

    #[test]
    fn rejects_other_families() {
        let err = build_coded(&BundleSpec::new(Family::Laakso, 1, 2)).unwrap_err();
        assert!(matches!(err, Error::NotDiamond(_)));
    }
}
