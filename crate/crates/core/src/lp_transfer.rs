//! Transfer of an embedding of the 2-branching diamond `D_k^2` into a normed
//! space `Y` to an embedding of the width-`w` diamond into `L_p([0,1], Y)`.
//!
//! Elements of `L_p([0,1], Y)` are modelled as step functions over finitely
//! many independent fair bits. Every value such a function takes is the image
//! of some vertex of `D_k^2`, so tables store vertex indices of the base graph
//! (its "palette") instead of vectors.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;

use crate::distortion::{
    evaluate, Norm, PairMeasure, PairwiseTable, SparseVector, VectorEmbedding,
};
use crate::error::{Error, Result};
use crate::exact;
use crate::graphs::{build_coded, code_index, BundleGraph, BundleSpec, VertexCode};
use crate::metric::{bfs_all_pairs, is_vertical_pair, DistanceMatrix, Isometry};

/// Largest number of bits a single `lp_distance` call will enumerate.
pub const BIT_GUARD: usize = 24;

/// Deepest transfer the module agrees to build.
pub const MAX_DEPTH: u32 = 4;

/// An embedding of the coded `D_k^2` into `(Y, norm)`, certified to be
/// 1-Lipschitz and injective.
#[derive(Clone, Debug)]
pub struct BaseEmbedding {
    depth: u32,
    codes: Vec<VertexCode>,
    vectors: Vec<SparseVector>,
    norm: Norm,
    /// `(1/C)^e` where `e` is the exponent of `norm`.
    colipschitz_power: BigRational,
}

impl BaseEmbedding {
    /// Certifies `(1/C) d <= ‖φ(x) - φ(y)‖ <= d` on every pair, with vectors
    /// listed in coded-vertex order.
    pub fn new(depth: u32, vectors: Vec<SparseVector>, norm: Norm) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidParameter(
                "base depth must be at least 1".into(),
            ));
        }
        let g = diamond2(depth)?;
        if vectors.len() != g.len() {
            return Err(Error::Uncertified(format!(
                "{} vectors given, D_{depth}^2 has {} vertices",
                vectors.len(),
                g.len()
            )));
        }
        let dm = bfs_all_pairs(&g)?;
        let report = evaluate(
            &VectorEmbedding::new(vectors.clone(), norm),
            &dm,
            "base",
            None,
        )
        .map_err(|e| Error::Uncertified(e.to_string()))?;
        if report.lipschitz_power > BigRational::one() {
            return Err(Error::Uncertified(format!(
                "Lipschitz constant {} exceeds 1 on pair {:?}",
                report.lipschitz, report.lipschitz_pair
            )));
        }
        Ok(BaseEmbedding {
            depth,
            codes: g.codes().expect("coded graph").to_vec(),
            vectors,
            norm,
            colipschitz_power: report.colipschitz_power,
        })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn codes(&self) -> &[VertexCode] {
        &self.codes
    }

    pub fn vectors(&self) -> &[SparseVector] {
        &self.vectors
    }

    pub fn colipschitz_power(&self) -> &BigRational {
        &self.colipschitz_power
    }

    /// `C^p` for the certified constant `C`.
    pub fn constant_power(&self, p: u32) -> Result<BigRational> {
        let e = self.norm.exponent();
        if !p.is_multiple_of(e) {
            return Err(Error::InvalidParameter(format!(
                "cannot raise a {} base to the power {p} exactly",
                self.norm
            )));
        }
        Ok(exact::pow(&self.colipschitz_power.recip(), p / e))
    }

    /// `C` as a float.
    pub fn constant(&self) -> f64 {
        1.0 / exact::root(&self.colipschitz_power, self.norm.exponent())
    }

    /// `φ` composed with the identification of `D_{k-1}^2` with one of the
    /// four depth-`(k-1)` subdiamonds.
    pub fn restrict(&self, which: Subdiamond) -> Result<BaseEmbedding> {
        if self.depth < 2 {
            return Err(Error::InvalidParameter(
                "restriction needs a base of depth at least 2".into(),
            ));
        }
        let index = code_index(&self.codes);
        let vectors = coded_vertices2(self.depth - 1)
            .iter()
            .map(|c| {
                let up = which.isometry().invert(c);
                index
                    .get(&up)
                    .map(|&i| self.vectors[i].clone())
                    .ok_or_else(|| Error::MissingImage(up.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        BaseEmbedding::new(self.depth - 1, vectors, self.norm)
    }
}

/// `v -> (d(v, u))_u` on `D_k^2`, isometric under the sup norm.
pub fn frechet_base(k: u32) -> Result<BaseEmbedding> {
    let g = diamond2(k)?;
    let dm = bfs_all_pairs(&g)?;
    let vectors = (0..g.len())
        .map(|v| {
            SparseVector::from_ints(
                dm.row(v)
                    .iter()
                    .enumerate()
                    .map(|(u, &d)| (u as u64, d as i64)),
            )
        })
        .collect();
    BaseEmbedding::new(k, vectors, Norm::Sup)
}

fn diamond2(k: u32) -> Result<BundleGraph> {
    build_coded(&BundleSpec::diamond(k, 2))
}

fn coded_vertices2(k: u32) -> Vec<VertexCode> {
    crate::graphs::coded_vertices(k, 2)
}

/// The four depth-`(k-1)` subdiamonds of `D_k^2`. Left is branch 1, right is
/// branch 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subdiamond {
    LeftUpper,
    RightUpper,
    LeftLower,
    RightLower,
}

impl Subdiamond {
    pub const ALL: [Subdiamond; 4] = [
        Subdiamond::LeftUpper,
        Subdiamond::RightUpper,
        Subdiamond::LeftLower,
        Subdiamond::RightLower,
    ];

    /// The map from the subdiamond onto `D_{k-1}^2`; it keeps top, bottom,
    /// left and right.
    pub fn isometry(self) -> Isometry {
        match self {
            Subdiamond::LeftUpper => Isometry::Up(1),
            Subdiamond::RightUpper => Isometry::Up(2),
            Subdiamond::LeftLower => Isometry::Down(1),
            Subdiamond::RightLower => Isometry::Down(2),
        }
    }
}

impl fmt::Display for Subdiamond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subdiamond::LeftUpper => "l+",
            Subdiamond::RightUpper => "r+",
            Subdiamond::LeftLower => "l-",
            Subdiamond::RightLower => "r-",
        })
    }
}

impl FromStr for Subdiamond {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l+" => Ok(Subdiamond::LeftUpper),
            "r+" => Ok(Subdiamond::RightUpper),
            "l-" => Ok(Subdiamond::LeftLower),
            "r-" => Ok(Subdiamond::RightLower),
            _ => Err(Error::Parse(format!("unknown subdiamond {s:?}"))),
        }
    }
}

/// A function of finitely many fair bits. Bit `t` of a table index is the
/// value of `deps[t]`; entries are palette indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepFunction {
    deps: Vec<u32>,
    table: Vec<u32>,
}

impl StepFunction {
    pub fn constant(value: u32) -> Self {
        StepFunction {
            deps: Vec::new(),
            table: vec![value],
        }
    }

    /// Checks that `deps` is strictly increasing and `table` is total.
    pub fn new(deps: Vec<u32>, table: Vec<u32>) -> Result<Self> {
        if deps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "bit list must be strictly increasing".into(),
            ));
        }
        if deps.len() >= usize::BITS as usize || table.len() != 1usize << deps.len() {
            return Err(Error::InvalidParameter(format!(
                "table of {} entries for {} bits",
                table.len(),
                deps.len()
            )));
        }
        Ok(StepFunction { deps, table })
    }

    pub fn deps(&self) -> &[u32] {
        &self.deps
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    /// Value under an assignment given as a predicate on bit ids.
    pub fn value_with(&self, bit: impl Fn(u32) -> bool) -> u32 {
        let idx = self
            .deps
            .iter()
            .enumerate()
            .filter(|&(_, &b)| bit(b))
            .fold(0usize, |acc, (t, _)| acc | 1 << t);
        self.table[idx]
    }

    /// `if bit { high } else { low }`.
    fn select(bit: u32, low: &StepFunction, high: &StepFunction) -> StepFunction {
        let mut deps: Vec<u32> = low.deps.iter().chain(&high.deps).copied().collect();
        deps.push(bit);
        deps.sort_unstable();
        deps.dedup();
        let sel = deps.binary_search(&bit).expect("bit was inserted");
        let low_pos = positions(&deps, &low.deps);
        let high_pos = positions(&deps, &high.deps);
        let table = (0..1usize << deps.len())
            .map(|i| {
                if i >> sel & 1 == 1 {
                    high.table[project(i, &high_pos)]
                } else {
                    low.table[project(i, &low_pos)]
                }
            })
            .collect();
        StepFunction { deps, table }
    }
}

/// Positions of `sub` inside the sorted superset `all`.
fn positions(all: &[u32], sub: &[u32]) -> Vec<usize> {
    sub.iter()
        .map(|b| all.binary_search(b).expect("subset of the union"))
        .collect()
}

fn project(i: usize, pos: &[usize]) -> usize {
    pos.iter()
        .enumerate()
        .fold(0, |acc, (t, &q)| acc | (i >> q & 1) << t)
}

/// `‖f - g‖_p^p` on the joint refinement of the two bit lists, given
/// `power(a, b) = ‖y_a - y_b‖_Y^p` for palette entries.
pub fn lp_distance_power(
    f: &StepFunction,
    g: &StepFunction,
    power: impl Fn(u32, u32) -> BigRational,
) -> Result<BigRational> {
    let mut union: Vec<u32> = f.deps.iter().chain(&g.deps).copied().collect();
    union.sort_unstable();
    union.dedup();
    if union.len() > BIT_GUARD {
        return Err(Error::TooManyBits {
            bits: union.len(),
            limit: BIT_GUARD,
        });
    }
    let fp = positions(&union, &f.deps);
    let gp = positions(&union, &g.deps);
    let mut counts: std::collections::HashMap<(u32, u32), u64> = Default::default();
    for i in 0..1usize << union.len() {
        let a = f.table[project(i, &fp)];
        let b = g.table[project(i, &gp)];
        if a != b {
            *counts.entry((a, b)).or_default() += 1;
        }
    }
    let total: BigRational = counts
        .into_iter()
        .map(|((a, b), c)| power(a, b) * BigRational::from_integer(BigInt::from(c)))
        .sum();
    Ok(total / BigRational::from_integer(BigInt::one() << union.len()))
}

/// Hands out fresh bit identifiers, so that every recursive piece draws from
/// its own pool.
#[derive(Default)]
struct BitPool {
    next: u32,
}

impl BitPool {
    fn fresh(&mut self, n: u32) -> Vec<u32> {
        let out = (self.next..self.next + n).collect();
        self.next += n;
        out
    }
}

/// The transferred map on the coded width-`w` diamond.
#[derive(Clone, Debug)]
pub struct Transfer {
    pub depth: u32,
    pub branching: u32,
    pub p: u32,
    pub codes: Vec<VertexCode>,
    pub functions: Vec<StepFunction>,
    /// Total number of bits drawn.
    pub bits: u32,
    base: Arc<BaseEmbedding>,
    /// `‖φ(a) - φ(b)‖_Y^p` for palette pairs, row-major.
    palette_powers: Arc<Vec<BigRational>>,
}

/// Builds the step-function images of every vertex of `D_k^w`.
pub fn transfer(base: &BaseEmbedding, p: u32, w: u32) -> Result<Transfer> {
    if p < 1 {
        return Err(Error::InvalidParameter(format!("p = {p} is below 1")));
    }
    if w < 2 {
        return Err(Error::InvalidParameter(format!("branching {w} is below 2")));
    }
    let k = base.depth;
    if k > MAX_DEPTH {
        return Err(Error::InvalidParameter(format!(
            "transfer depth {k} exceeds the guard {MAX_DEPTH}"
        )));
    }
    let e = base.norm.exponent();
    if !p.is_multiple_of(e) {
        return Err(Error::InvalidParameter(format!(
            "base norm {} has no exact {p}-th power",
            base.norm
        )));
    }
    let n = base.vectors.len();
    let palette_powers: Vec<BigRational> = (0..n * n)
        .into_par_iter()
        .map(|ab| {
            let (a, b) = (ab / n, ab % n);
            exact::pow(
                &base.norm.distance_power(&base.vectors[a], &base.vectors[b]),
                p / e,
            )
        })
        .collect();

    // palette map of the full base: identity on coded D_k^2
    let palette: Vec<u32> = (0..n as u32).collect();
    let mut pool = BitPool::default();
    let (codes, functions) = build_level(k, w, &palette, &mut pool);
    Ok(Transfer {
        depth: k,
        branching: w,
        p,
        codes,
        functions,
        bits: pool.next,
        base: Arc::new(base.clone()),
        palette_powers: Arc::new(palette_powers),
    })
}

/// `base[i]` is the palette index of the `i`-th coded vertex of `D_m^2`.
fn build_level(
    m: u32,
    w: u32,
    base: &[u32],
    pool: &mut BitPool,
) -> (Vec<VertexCode>, Vec<StepFunction>) {
    let codes2 = coded_vertices2(m);
    let index2 = code_index(&codes2);
    let at = |c: &VertexCode| base[index2[c]];
    let codes = crate::graphs::coded_vertices(m, w);
    let selectors = pool.fresh(w);

    if m == 1 {
        let left = at(&VertexCode::from_parts(vec![1], crate::Dyadic::HALF));
        let right = at(&VertexCode::from_parts(vec![2], crate::Dyadic::HALF));
        let functions = codes
            .iter()
            .map(|c| match c.min() {
                None => StepFunction::constant(at(c)),
                Some(j) => StepFunction::select(
                    selectors[j as usize - 1],
                    &StepFunction::constant(left),
                    &StepFunction::constant(right),
                ),
            })
            .collect();
        return (codes, functions);
    }

    let lower = coded_vertices2(m - 1);
    let subs: Vec<(Vec<VertexCode>, Vec<StepFunction>)> = Subdiamond::ALL
        .iter()
        .map(|s| {
            let sub_base: Vec<u32> = lower.iter().map(|c| at(&s.isometry().invert(c))).collect();
            build_level(m - 1, w, &sub_base, pool)
        })
        .collect();
    let sub_index = code_index(&subs[0].0);

    let functions = codes
        .iter()
        .map(|c| {
            let Some(j) = c.min() else {
                return StepFunction::constant(at(c));
            };
            let (iso, l, r) = if c.r() >= crate::Dyadic::HALF {
                (Isometry::Up(j), &subs[0].1, &subs[1].1)
            } else {
                (Isometry::Down(j), &subs[2].1, &subs[3].1)
            };
            let inner = iso.apply(c, m).expect("vertex lies in its own half");
            let i = sub_index[&inner];
            StepFunction::select(selectors[j as usize - 1], &l[i], &r[i])
        })
        .collect();
    (codes, functions)
}

impl Transfer {
    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn base(&self) -> &BaseEmbedding {
        &self.base
    }

    /// `‖φ_b(a) - φ_b(b)‖_Y^p` for palette indices.
    pub fn palette_power(&self, a: u32, b: u32) -> BigRational {
        let n = self.base.vectors.len();
        self.palette_powers[a as usize * n + b as usize].clone()
    }

    /// `‖φ̄(x_i) - φ̄(x_j)‖_p^p`, exact.
    pub fn distance_power(&self, i: usize, j: usize) -> Result<BigRational> {
        lp_distance_power(&self.functions[i], &self.functions[j], |a, b| {
            self.palette_power(a, b)
        })
    }

    /// `‖φ̄(x_i) - φ̄(x_j)‖_p` as a float.
    pub fn distance(&self, i: usize, j: usize) -> Result<f64> {
        Ok(exact::root(&self.distance_power(i, j)?, self.p))
    }

    /// All pairwise `p`-th powers, computed in parallel.
    pub fn pair_table(&self) -> Result<PairwiseTable> {
        PairwiseTable::try_build(self.len(), self.p, |i, j| self.distance_power(i, j))
    }

    /// `2 C^p`, the `p`-th power of the distortion the transfer guarantees.
    pub fn guaranteed_distortion_power(&self) -> Result<BigRational> {
        Ok(self.base.constant_power(self.p)? * exact::int(2))
    }

    /// Checks that every atom value of `φ̄(x)` is `φ(ρ)` for a base vertex
    /// `ρ` at the height of `x`. Returns the first offending vertex.
    pub fn provenance_violation(&self) -> Option<usize> {
        let base_codes = &self.base.codes;
        (0..self.len()).find(|&i| {
            let r = self.codes[i].r();
            self.functions[i]
                .table
                .iter()
                .any(|&a| base_codes[a as usize].r() != r)
        })
    }

    /// The coded width-`w` diamond the transfer is defined on.
    pub fn graph(&self) -> Result<BundleGraph> {
        build_coded(&BundleSpec::diamond(self.depth, self.branching))
    }
}

/// Outcome of the three transfer inequalities, decided on `p`-th powers.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferCheck {
    /// Edges with `‖Δ‖^p > 1`.
    pub lipschitz_violations: usize,
    /// Vertical pairs with `‖Δ‖^p < (d/C)^p`.
    pub vertical_violations: usize,
    /// Pairs with `‖Δ‖^p < d^p / (2 C^p)`.
    pub pair_violations: usize,
    pub pairs: usize,
}

impl TransferCheck {
    pub fn passed(&self) -> bool {
        self.lipschitz_violations == 0 && self.vertical_violations == 0 && self.pair_violations == 0
    }
}

/// Runs the edge, vertical and all-pairs checks against a precomputed table.
pub fn check_transfer(
    t: &Transfer,
    table: &PairwiseTable,
    dm: &DistanceMatrix,
) -> Result<TransferCheck> {
    let cp = t.base.constant_power(t.p)?;
    let g = t.graph()?;
    let one = BigRational::one();
    let lipschitz_violations = g
        .edges()
        .iter()
        .filter(|&&(a, b)| table.pair_power(a, b) > one)
        .count();
    let two = exact::int(2);
    let mut vertical_violations = 0;
    let mut pair_violations = 0;
    let mut pairs = 0;
    for (i, j) in dm.pairs() {
        let d = dm.get(i, j);
        if d == 0 {
            continue;
        }
        pairs += 1;
        let got = table.pair_power(i, j) * &cp;
        let dp = exact::pow(&exact::int(d as i64), t.p);
        if is_vertical_pair(&t.codes[i], &t.codes[j], d as u64, t.depth) && got < dp {
            vertical_violations += 1;
        }
        if got * &two < dp {
            pair_violations += 1;
        }
    }
    Ok(TransferCheck {
        lipschitz_violations,
        vertical_violations,
        pair_violations,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distortion::evaluate;
    use crate::Dyadic;
    use num_traits::Zero;

    fn code(set: &[u32], num: i128, exp: u32) -> VertexCode {
        VertexCode::new(set.to_vec(), Dyadic::new(num, exp)).unwrap()
    }

    #[test]
    fn frechet_is_isometric() {
        let b1 = frechet_base(1).unwrap();
        let idx = code_index(b1.codes());
        let (s, t) = (idx[&VertexCode::bottom()], idx[&VertexCode::top()]);
        assert_eq!(
            Norm::Sup.distance_power(&b1.vectors()[s], &b1.vectors()[t]),
            exact::int(2)
        );
        assert_eq!(b1.vectors()[s].get(s as u64), None);
        let b2 = frechet_base(2).unwrap();
        assert_eq!(b2.colipschitz_power(), &BigRational::one());
        assert_eq!(b2.constant(), 1.0);
    }

    #[test]
    fn uncertified_base_rejected() {
        let b = frechet_base(1).unwrap();
        let doubled: Vec<_> = b
            .vectors()
            .iter()
            .map(|v| v.scale(&exact::int(2)))
            .collect();
        assert!(matches!(
            BaseEmbedding::new(1, doubled, Norm::Sup),
            Err(Error::Uncertified(_))
        ));
        assert!(BaseEmbedding::new(1, vec![SparseVector::new()], Norm::Sup).is_err());
    }

    #[test]
    fn restrictions() {
        let b2 = frechet_base(2).unwrap();
        let idx2 = code_index(b2.codes());
        for s in Subdiamond::ALL {
            let r = b2.restrict(s).unwrap();
            assert_eq!(r.colipschitz_power(), &BigRational::one(), "{s}");
            assert_eq!(r.vectors().len(), 4);
        }
        let lu = b2.restrict(Subdiamond::LeftUpper).unwrap();
        let idx1 = code_index(lu.codes());
        assert_eq!(
            lu.vectors()[idx1[&VertexCode::bottom()]],
            b2.vectors()[idx2[&code(&[1], 1, 1)]]
        );
        let ru = b2.restrict(Subdiamond::RightUpper).unwrap();
        assert_eq!(
            lu.vectors()[idx1[&VertexCode::top()]],
            ru.vectors()[idx1[&VertexCode::top()]]
        );
        let ll = b2.restrict(Subdiamond::LeftLower).unwrap();
        let rl = b2.restrict(Subdiamond::RightLower).unwrap();
        assert_eq!(
            ll.vectors()[idx1[&VertexCode::bottom()]],
            rl.vectors()[idx1[&VertexCode::bottom()]]
        );
        assert!(b2
            .restrict(Subdiamond::LeftUpper)
            .unwrap()
            .restrict(Subdiamond::LeftUpper)
            .is_err());
        assert_eq!("r-".parse::<Subdiamond>().unwrap(), Subdiamond::RightLower);
    }

    #[test]
    fn depth_one_shape() {
        let b = frechet_base(1).unwrap();
        let t = transfer(&b, 2, 3).unwrap();
        let idx = code_index(&t.codes);
        let base_idx = code_index(b.codes());
        let bot = &t.functions[idx[&VertexCode::bottom()]];
        assert!(bot.deps().is_empty());
        assert_eq!(bot.table(), &[base_idx[&VertexCode::bottom()] as u32]);
        let m1 = &t.functions[idx[&code(&[1], 1, 1)]];
        assert_eq!(m1.deps().len(), 1);
        let vl = base_idx[&code(&[1], 1, 1)] as u32;
        let vr = base_idx[&code(&[2], 1, 1)] as u32;
        assert_eq!(m1.table(), &[vl, vr]);
        // two midpoints: half of ‖φ(v_l) - φ(v_r)‖^p
        let m3 = &t.functions[idx[&code(&[3], 1, 1)]];
        let got = lp_distance_power(m1, m3, |a, b| t.palette_power(a, b)).unwrap();
        assert_eq!(got, t.palette_power(vl, vr) / exact::int(2));
        assert_eq!(got, exact::int(2));
        assert_eq!(t.bits, 3);
    }

    #[test]
    fn lp_distance_trivia() {
        let f = StepFunction::new(vec![0, 3], vec![0, 1, 1, 2]).unwrap();
        let pw = |a: u32, b: u32| exact::int((a as i64 - b as i64).abs());
        assert_eq!(lp_distance_power(&f, &f, pw).unwrap(), BigRational::zero());
        let c0 = StepFunction::constant(0);
        let c2 = StepFunction::constant(2);
        assert_eq!(lp_distance_power(&c0, &c2, pw).unwrap(), exact::int(2));
        assert_eq!(lp_distance_power(&f, &c0, pw).unwrap(), BigRational::one());
        assert!(StepFunction::new(vec![1, 1], vec![0; 4]).is_err());
        assert!(StepFunction::new(vec![1], vec![0; 3]).is_err());
        let wide = StepFunction {
            deps: (0..25).collect(),
            table: Vec::new(),
        };
        assert!(matches!(
            lp_distance_power(&wide, &c0, pw),
            Err(Error::TooManyBits { bits: 25, .. })
        ));
    }

    #[test]
    fn dependency_sizes() {
        for k in 1..=3 {
            let t = transfer(&frechet_base(k).unwrap(), 1, 2).unwrap();
            let max = t.functions.iter().map(|f| f.deps().len()).max().unwrap();
            assert_eq!(max, (1 << k) - 1, "k = {k}");
        }
    }

    /// Expands both functions over every bit drawn so far and sums directly.
    fn full_atom_power(t: &Transfer, i: usize, j: usize) -> BigRational {
        let n = t.bits;
        let mut total = BigRational::zero();
        for a in 0..1u64 << n {
            let bit = |b: u32| a >> b & 1 == 1;
            let x = t.functions[i].value_with(bit);
            let y = t.functions[j].value_with(bit);
            let diff = t.base().vectors()[x as usize].sub(&t.base().vectors()[y as usize]);
            total += exact::pow(&Norm::Sup.power(&diff), t.p);
        }
        total / BigRational::from_integer(BigInt::one() << n)
    }

    #[test]
    fn matches_full_atom_expansion() {
        let t = transfer(&frechet_base(2).unwrap(), 1, 2).unwrap();
        assert_eq!(t.bits, 10);
        for i in 0..t.len() {
            for j in i + 1..t.len() {
                assert_eq!(
                    t.distance_power(i, j).unwrap(),
                    full_atom_power(&t, i, j),
                    "{i} {j}"
                );
            }
        }
    }

    #[test]
    fn provenance_holds() {
        for k in 1..=2 {
            for w in 2..=3 {
                let t = transfer(&frechet_base(k).unwrap(), 2, w).unwrap();
                assert_eq!(t.provenance_violation(), None, "k = {k}, w = {w}");
            }
        }
    }

    #[test]
    fn inequalities_small() {
        for (k, w) in [(1, 2), (1, 3), (2, 2), (2, 3)] {
            for p in [1, 2] {
                let t = transfer(&frechet_base(k).unwrap(), p, w).unwrap();
                let table = t.pair_table().unwrap();
                let dm = bfs_all_pairs(&t.graph().unwrap()).unwrap();
                let check = check_transfer(&t, &table, &dm).unwrap();
                assert!(check.passed(), "k={k} w={w} p={p}: {check:?}");
                let report = evaluate(&table, &dm, "transfer", None).unwrap();
                assert!(report.distortion_power_at_most(&t.guaranteed_distortion_power().unwrap()));
            }
        }
    }

    #[test]
    fn bad_parameters() {
        let b = frechet_base(1).unwrap();
        assert!(transfer(&b, 0, 2).is_err());
        assert!(transfer(&b, 1, 1).is_err());
        let l2 = BaseEmbedding::new(1, b.vectors().to_vec(), Norm::Lp(2));
        // the sup-isometric vectors are not 1-Lipschitz in the 2-norm
        assert!(l2.is_err());
    }
}
