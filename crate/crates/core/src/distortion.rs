//! Lipschitz and co-Lipschitz constants of vertex maps, compared exactly on
//! `e`-th powers of norms where `e` is 1 for the sup and one norms and `p`
//! for the p-norm.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact;
use crate::metric::DistanceMatrix;

/// Finitely supported vector with exact entries; zeros are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SparseVector {
    entries: BTreeMap<u64, BigRational>,
}

impl SparseVector {
    pub fn new() -> Self {
        SparseVector::default()
    }

    pub fn from_entries<I: IntoIterator<Item = (u64, BigRational)>>(entries: I) -> Self {
        let mut v = SparseVector::new();
        for (k, x) in entries {
            v.add_to(k, &x);
        }
        v
    }

    pub fn from_ints<I: IntoIterator<Item = (u64, i64)>>(entries: I) -> Self {
        SparseVector::from_entries(entries.into_iter().map(|(k, x)| (k, exact::int(x))))
    }

    pub fn add_to(&mut self, key: u64, x: &BigRational) {
        if x.is_zero() {
            return;
        }
        let slot = self.entries.entry(key).or_insert_with(BigRational::zero);
        *slot += x;
        if slot.is_zero() {
            self.entries.remove(&key);
        }
    }

    pub fn get(&self, key: u64) -> Option<&BigRational> {
        self.entries.get(&key)
    }

    pub fn support(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &BigRational)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    pub fn sub(&self, other: &SparseVector) -> SparseVector {
        let mut out = self.clone();
        for (k, x) in other.iter() {
            out.add_to(k, &-x);
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> SparseVector {
        SparseVector::from_entries(self.iter().map(|(k, x)| (k, x * c)))
    }
}

/// Norm on finitely supported vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Norm {
    Sup,
    L1,
    /// Integer `p >= 1`.
    Lp(u32),
}

impl Norm {
    pub fn lp(p: u32) -> Result<Self> {
        if p < 1 {
            return Err(Error::InvalidParameter(format!("p = {p} is below 1")));
        }
        Ok(Norm::Lp(p))
    }

    /// The power `e` at which norms are compared exactly.
    pub fn exponent(&self) -> u32 {
        match self {
            Norm::Sup | Norm::L1 => 1,
            Norm::Lp(p) => *p,
        }
    }

    /// `‖v‖^e`, exact.
    pub fn power(&self, v: &SparseVector) -> BigRational {
        match self {
            Norm::Sup => v
                .iter()
                .map(|(_, x)| x.abs())
                .max()
                .unwrap_or_else(BigRational::zero),
            Norm::L1 => v.iter().map(|(_, x)| x.abs()).sum(),
            Norm::Lp(p) => v.iter().map(|(_, x)| exact::pow(&x.abs(), *p)).sum(),
        }
    }

    /// `‖v‖` as a float.
    pub fn value(&self, v: &SparseVector) -> f64 {
        exact::root(&self.power(v), self.exponent())
    }

    pub fn distance_power(&self, a: &SparseVector, b: &SparseVector) -> BigRational {
        self.power(&a.sub(b))
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::Sup => f.write_str("sup"),
            Norm::L1 => f.write_str("l1"),
            Norm::Lp(p) => write!(f, "p:{p}"),
        }
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sup" | "inf" | "linf" | "c0" => Ok(Norm::Sup),
            "l1" | "one" => Ok(Norm::L1),
            other => {
                let p = other
                    .strip_prefix("p:")
                    .or_else(|| other.strip_prefix("lp:"))
                    .ok_or_else(|| Error::Parse(format!("unknown norm {other:?}")))?;
                let p: f64 = p
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad exponent in {other:?}")))?;
                if p < 1.0 {
                    return Err(Error::InvalidParameter(format!("p = {p} is below 1")));
                }
                if p.fract() != 0.0 || p > 64.0 {
                    return Err(Error::InvalidParameter(format!(
                        "exact p-norms need an integer p in 1..=64, got {p}"
                    )));
                }
                Norm::lp(p as u32)
            }
        }
    }
}

/// Anything that can report `‖f(i) - f(j)‖^e` exactly for vertex indices.
pub trait PairMeasure: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn exponent(&self) -> u32;

    fn pair_power(&self, i: usize, j: usize) -> BigRational;

    /// Support size of the image of vertex `i`, when images are vectors.
    fn support(&self, _i: usize) -> Option<usize> {
        None
    }
}

/// A vertex map into a sequence space under a fixed norm.
#[derive(Clone, Debug)]
pub struct VectorEmbedding {
    pub vectors: Vec<SparseVector>,
    pub norm: Norm,
}

impl VectorEmbedding {
    pub fn new(vectors: Vec<SparseVector>, norm: Norm) -> Self {
        VectorEmbedding { vectors, norm }
    }

    /// Orders a map keyed by vertex index, failing on the first gap.
    pub fn from_map(mut map: BTreeMap<usize, SparseVector>, n: usize, norm: Norm) -> Result<Self> {
        let vectors = (0..n)
            .map(|v| {
                map.remove(&v)
                    .ok_or_else(|| Error::MissingImage(v.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorEmbedding { vectors, norm })
    }

    pub fn with_norm(&self, norm: Norm) -> Self {
        VectorEmbedding {
            vectors: self.vectors.clone(),
            norm,
        }
    }
}

impl PairMeasure for VectorEmbedding {
    fn len(&self) -> usize {
        self.vectors.len()
    }

    fn exponent(&self) -> u32 {
        self.norm.exponent()
    }

    fn pair_power(&self, i: usize, j: usize) -> BigRational {
        self.norm.distance_power(&self.vectors[i], &self.vectors[j])
    }

    fn support(&self, i: usize) -> Option<usize> {
        Some(self.vectors[i].support())
    }
}

/// Precomputed pairwise powers, stored for `i < j`.
#[derive(Clone, Debug)]
pub struct PairwiseTable {
    n: usize,
    exponent: u32,
    values: Vec<BigRational>,
}

impl PairwiseTable {
    /// Evaluates `f(i, j)` for every `i < j`, in parallel.
    pub fn build<F>(n: usize, exponent: u32, f: F) -> Self
    where
        F: Fn(usize, usize) -> BigRational + Sync,
    {
        let values = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| (i + 1..n).map(move |j| (i, j)).collect::<Vec<_>>())
            .map(|(i, j)| f(i, j))
            .collect();
        PairwiseTable {
            n,
            exponent,
            values,
        }
    }

    pub fn try_build<F>(n: usize, exponent: u32, f: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> Result<BigRational> + Sync,
    {
        let values = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| (i + 1..n).map(move |j| (i, j)).collect::<Vec<_>>())
            .map(|(i, j)| f(i, j))
            .collect::<Result<Vec<_>>>()?;
        Ok(PairwiseTable {
            n,
            exponent,
            values,
        })
    }

    /// Values listed for `i < j` in lexicographic order.
    pub fn from_values(n: usize, exponent: u32, values: Vec<BigRational>) -> Self {
        assert_eq!(
            values.len(),
            n * n.saturating_sub(1) / 2,
            "one value per pair"
        );
        PairwiseTable {
            n,
            exponent,
            values,
        }
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }
}

impl PairMeasure for PairwiseTable {
    fn len(&self) -> usize {
        self.n
    }

    fn exponent(&self) -> u32 {
        self.exponent
    }

    fn pair_power(&self, i: usize, j: usize) -> BigRational {
        if i == j {
            return BigRational::zero();
        }
        self.values[self.slot(i, j)].clone()
    }
}

/// A measure restricted to a vertex subset, with values multiplied by
/// `scale^e` so that a subset sitting at scale `s` in the big graph is
/// compared against its own metric.
pub struct Restricted<'a, M: PairMeasure + ?Sized> {
    pub inner: &'a M,
    pub subset: Vec<usize>,
    pub scale: BigRational,
}

impl<M: PairMeasure + ?Sized> PairMeasure for Restricted<'_, M> {
    fn len(&self) -> usize {
        self.subset.len()
    }

    fn exponent(&self) -> u32 {
        self.inner.exponent()
    }

    fn pair_power(&self, i: usize, j: usize) -> BigRational {
        self.inner.pair_power(self.subset[i], self.subset[j])
            * exact::pow(&self.scale, self.inner.exponent())
    }

    fn support(&self, i: usize) -> Option<usize> {
        self.inner.support(self.subset[i])
    }
}

/// Extremes of `‖f(x) - f(y)‖^e / d(x, y)^e` over one class of pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extremes {
    pub pairs: usize,
    #[serde(with = "exact::json")]
    pub max_power: BigRational,
    pub max: f64,
    pub max_pair: (usize, usize),
    #[serde(with = "exact::json")]
    pub min_power: BigRational,
    pub min: f64,
    pub min_pair: (usize, usize),
}

impl Extremes {
    fn single(i: usize, j: usize, ratio: BigRational, e: u32) -> Self {
        let value = exact::root(&ratio, e);
        Extremes {
            pairs: 1,
            max_power: ratio.clone(),
            max: value,
            max_pair: (i, j),
            min_power: ratio,
            min: value,
            min_pair: (i, j),
        }
    }

    /// Associative merge; ties keep the lexicographically smaller pair.
    fn merge(mut self, other: Extremes) -> Extremes {
        self.pairs += other.pairs;
        match other.max_power.cmp(&self.max_power) {
            Ordering::Greater => {
                self.max_power = other.max_power;
                self.max = other.max;
                self.max_pair = other.max_pair;
            }
            Ordering::Equal if other.max_pair < self.max_pair => self.max_pair = other.max_pair,
            _ => {}
        }
        match other.min_power.cmp(&self.min_power) {
            Ordering::Less => {
                self.min_power = other.min_power;
                self.min = other.min;
                self.min_pair = other.min_pair;
            }
            Ordering::Equal if other.min_pair < self.min_pair => self.min_pair = other.min_pair,
            _ => {}
        }
        self
    }
}

fn merge_opt(a: Option<Extremes>, b: Option<Extremes>) -> Option<Extremes> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.merge(b)),
        (a, None) => a,
        (None, b) => b,
    }
}

#[derive(Default)]
struct Partial {
    all: Option<Extremes>,
    vertical: Option<Extremes>,
    non_vertical: Option<Extremes>,
}

impl Partial {
    fn merge(self, other: Partial) -> Partial {
        Partial {
            all: merge_opt(self.all, other.all),
            vertical: merge_opt(self.vertical, other.vertical),
            non_vertical: merge_opt(self.non_vertical, other.non_vertical),
        }
    }
}

/// Outcome of a full pair scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub norm: String,
    pub exponent: u32,
    pub vertices: usize,
    pub pairs: usize,
    /// `lipschitz^e`, exact.
    #[serde(with = "exact::json")]
    pub lipschitz_power: BigRational,
    pub lipschitz: f64,
    #[serde(with = "exact::json")]
    pub colipschitz_power: BigRational,
    pub colipschitz: f64,
    /// `(lipschitz / colipschitz)^e`, exact.
    #[serde(with = "exact::json")]
    pub distortion_power: BigRational,
    pub distortion: f64,
    pub lipschitz_pair: (usize, usize),
    pub colipschitz_pair: (usize, usize),
    pub vertical: Option<Extremes>,
    pub non_vertical: Option<Extremes>,
    pub max_support: Option<usize>,
    /// Free-form labels attached by callers (family, depth, target, ...).
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
}

impl DistortionReport {
    /// `distortion <= bound`, decided on `e`-th powers.
    pub fn distortion_at_most(&self, bound: &BigRational) -> bool {
        self.distortion_power <= exact::pow(bound, self.exponent)
    }

    /// `distortion^e <= bound_power`.
    pub fn distortion_power_at_most(&self, bound_power: &BigRational) -> bool {
        &self.distortion_power <= bound_power
    }

    pub fn with_label(mut self, key: &str, value: impl ToString) -> Self {
        self.labels.insert(key.to_string(), value.to_string());
        self
    }
}

/// `(power / d^e)` for one pair.
pub fn pair_ratio_power(power: &BigRational, d: u32, e: u32) -> BigRational {
    power / exact::pow(&BigRational::from_integer(BigInt::from(d)), e)
}

/// Scans every pair `i < j` with `d(i, j) > 0`. `vertical`, when given,
/// splits the pairs into two classes reported separately.
pub fn evaluate<M: PairMeasure + ?Sized>(
    map: &M,
    dm: &DistanceMatrix,
    norm_label: &str,
    vertical: Option<&(dyn Fn(usize, usize) -> bool + Sync)>,
) -> Result<DistortionReport> {
    let n = dm.len();
    if map.len() != n {
        return Err(Error::MissingImage(format!(
            "map covers {} vertices, metric has {n}",
            map.len()
        )));
    }
    let e = map.exponent();
    let partial = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = Partial::default();
            for j in i + 1..n {
                let d = dm.get(i, j);
                if d == 0 {
                    continue;
                }
                let ratio = pair_ratio_power(&map.pair_power(i, j), d, e);
                let one = Extremes::single(i, j, ratio, e);
                match vertical.map(|f| f(i, j)) {
                    Some(true) => acc.vertical = merge_opt(acc.vertical.take(), Some(one.clone())),
                    Some(false) => {
                        acc.non_vertical = merge_opt(acc.non_vertical.take(), Some(one.clone()))
                    }
                    None => {}
                }
                acc.all = merge_opt(acc.all.take(), Some(one));
            }
            acc
        })
        .reduce(Partial::default, Partial::merge);
    let all = partial
        .all
        .ok_or_else(|| Error::InvalidParameter("need at least two distinct vertices".into()))?;
    let max_support = (0..n).filter_map(|i| map.support(i)).max();
    let distortion_power = if all.min_power.is_zero() {
        return Err(Error::InvalidParameter(format!(
            "map is not injective: pair {:?} collapses",
            all.min_pair
        )));
    } else {
        &all.max_power / &all.min_power
    };
    Ok(DistortionReport {
        norm: norm_label.to_string(),
        exponent: e,
        vertices: n,
        pairs: all.pairs,
        lipschitz: all.max,
        colipschitz: all.min,
        distortion: exact::root(&distortion_power, e),
        lipschitz_power: all.max_power,
        colipschitz_power: all.min_power,
        distortion_power,
        lipschitz_pair: all.max_pair,
        colipschitz_pair: all.min_pair,
        vertical: partial.vertical,
        non_vertical: partial.non_vertical,
        max_support,
        labels: BTreeMap::new(),
    })
}
