//! Bernoulli-event embedding into L1: each coded vertex `(A, r)` becomes an
//! event `S(A, r)` built from independent fair signs indexed by nonempty
//! prefixes, and the image is `2^k` times its indicator.

use std::collections::{BTreeMap, BTreeSet};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::graphs::code::{format_set, VertexCode};
use crate::metric::Isometry;

/// Variable `ε_D` for a nonempty prefix `D`.
pub type Variable = Vec<u32>;

/// Intersection of sign constraints `ε_D = ±1`; `true` stands for `+1`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CylinderEvent {
    constraints: BTreeMap<Variable, bool>,
}

impl CylinderEvent {
    pub fn new() -> Self {
        CylinderEvent::default()
    }

    /// Adds `ε_var = sign`; contradictory constraints are an error.
    pub fn require(mut self, var: Variable, sign: bool) -> Result<Self> {
        if let Some(&old) = self.constraints.get(&var) {
            if old != sign {
                return Err(Error::InvalidParameter(format!(
                    "variable {} constrained to both signs",
                    format_set(&var)
                )));
            }
        }
        self.constraints.insert(var, sign);
        Ok(self)
    }

    pub fn constraints(&self) -> impl Iterator<Item = (&Variable, bool)> {
        self.constraints.iter().map(|(k, v)| (k, *v))
    }

    pub fn measure(&self) -> Dyadic {
        Dyadic::new(1, self.constraints.len() as u32)
    }

    /// Some shared variable carries opposite signs.
    pub fn disjoint_from(&self, other: &CylinderEvent) -> bool {
        self.constraints
            .iter()
            .any(|(var, &s)| other.constraints.get(var).is_some_and(|&t| t != s))
    }

    fn contains(&self, assignment: &BTreeMap<&Variable, bool>) -> bool {
        self.constraints
            .iter()
            .all(|(var, &s)| assignment.get(var) == Some(&s))
    }
}

/// A finite union of pairwise disjoint cylinders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EventSet {
    Empty,
    Full,
    Cylinders(Vec<CylinderEvent>),
}

impl EventSet {
    /// Certifies pairwise disjointness.
    pub fn from_cylinders(cylinders: Vec<CylinderEvent>) -> Result<Self> {
        for (a, x) in cylinders.iter().enumerate() {
            for (b, y) in cylinders.iter().enumerate().skip(a + 1) {
                if !x.disjoint_from(y) {
                    return Err(Error::Overlap(format!("cylinders {a} and {b}")));
                }
            }
        }
        if cylinders.is_empty() {
            return Ok(EventSet::Empty);
        }
        Ok(EventSet::Cylinders(cylinders))
    }

    pub fn measure(&self) -> Dyadic {
        match self {
            EventSet::Empty => Dyadic::ZERO,
            EventSet::Full => Dyadic::ONE,
            EventSet::Cylinders(c) => c.iter().map(CylinderEvent::measure).sum(),
        }
    }

    pub fn variables(&self) -> BTreeSet<&Variable> {
        match self {
            EventSet::Cylinders(c) => c.iter().flat_map(|e| e.constraints.keys()).collect(),
            _ => BTreeSet::new(),
        }
    }

    fn contains(&self, assignment: &BTreeMap<&Variable, bool>) -> bool {
        match self {
            EventSet::Empty => false,
            EventSet::Full => true,
            EventSet::Cylinders(c) => c.iter().any(|e| e.contains(assignment)),
        }
    }
}

/// Largest number of variables the atom enumeration accepts.
const ATOM_VARIABLE_LIMIT: usize = 24;

/// Counts atoms over the union of variables mentioned by `sets` and returns
/// the measure of those atoms accepted by `pick`.
pub fn atom_measure<F>(sets: &[&EventSet], pick: F) -> Result<Dyadic>
where
    F: Fn(&[bool]) -> bool,
{
    let vars: Vec<&Variable> = sets
        .iter()
        .flat_map(|s| s.variables())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if vars.len() > ATOM_VARIABLE_LIMIT {
        return Err(Error::TooManyBits {
            bits: vars.len(),
            limit: ATOM_VARIABLE_LIMIT,
        });
    }
    let mut hits: i128 = 0;
    let mut assignment: BTreeMap<&Variable, bool> = vars.iter().map(|&v| (v, false)).collect();
    let mut member = vec![false; sets.len()];
    for atom in 0u64..1 << vars.len() {
        for (bit, var) in vars.iter().enumerate() {
            assignment.insert(var, (atom >> bit) & 1 == 1);
        }
        for (slot, set) in member.iter_mut().zip(sets) {
            *slot = set.contains(&assignment);
        }
        if pick(&member) {
            hits += 1;
        }
    }
    Ok(Dyadic::new(hits, vars.len() as u32))
}

/// `T^i(A, r)`; requires `σ_i = 1`.
pub fn build_t(v: &VertexCode, i: usize) -> Result<CylinderEvent> {
    let n = v.set().len();
    let digits = v
        .r()
        .binary_digits(n as u32)
        .ok_or_else(|| Error::InvalidCode(v.to_string()))?;
    if i == 0 || i > n || !digits[i - 1] {
        return Err(Error::InvalidParameter(format!(
            "digit {i} of {v} is not 1"
        )));
    }
    let mut event = CylinderEvent::new().require(v.prefix(i).to_vec(), true)?;
    for m in 1..i {
        // a one digit below i asks for -1, a zero digit for +1
        event = event.require(v.prefix(m).to_vec(), !digits[m - 1])?;
    }
    Ok(event)
}

/// `S(A, r)`: the disjoint union of `T^i` over the one digits of `r`.
pub fn build_s(v: &VertexCode) -> Result<EventSet> {
    if *v == VertexCode::bottom() {
        return Ok(EventSet::Empty);
    }
    if *v == VertexCode::top() {
        return Ok(EventSet::Full);
    }
    let n = v.set().len();
    let digits = v
        .r()
        .binary_digits(n as u32)
        .ok_or_else(|| Error::InvalidCode(v.to_string()))?;
    let cylinders = (1..=n)
        .filter(|&i| digits[i - 1])
        .map(|i| build_t(v, i))
        .collect::<Result<Vec<_>>>()?;
    EventSet::from_cylinders(cylinders)
}

/// `P(S1 Δ S2)` by atom enumeration.
pub fn symmetric_difference_measure(s1: &EventSet, s2: &EventSet) -> Result<Dyadic> {
    atom_measure(&[s1, s2], |m| m[0] != m[1])
}

/// `‖Ψ(x) - Ψ(y)‖_1 = 2^k P(S(x) Δ S(y))`, by atom enumeration.
pub fn l1_embedding_distance(k: u32, x: &VertexCode, y: &VertexCode) -> Result<Dyadic> {
    let m = symmetric_difference_measure(&build_s(x)?, &build_s(y)?)?;
    Ok(m.times_pow2(k as i32))
}

/// `P(S(x) Δ S(y))` by case analysis: nested events on a common vertical
/// path, independent events on different branches, recursion through the
/// conditioned half-spaces otherwise.
pub fn closed_form_measure(x: &VertexCode, y: &VertexCode, k: u32) -> Dyadic {
    let (r, s) = (x.r(), y.r());
    let (Some(i), Some(j)) = (x.min(), y.min()) else {
        return (r - s).abs();
    };
    if i != j {
        return r + s - (r * s).double();
    }
    let half = Dyadic::HALF;
    if (r <= half && half <= s) || (s <= half && half <= r) {
        return (r - s).abs();
    }
    let which = if r < half {
        Isometry::Down(j)
    } else {
        Isometry::Up(j)
    };
    let x1 = which.apply(x, k).expect("part checked");
    let y1 = which.apply(y, k).expect("part checked");
    closed_form_measure(&x1, &y1, k - 1).halve()
}

pub fn closed_form_distance(x: &VertexCode, y: &VertexCode, k: u32) -> Dyadic {
    closed_form_measure(x, y, k).times_pow2(k as i32)
}
