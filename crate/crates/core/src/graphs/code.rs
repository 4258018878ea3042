use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// A coded diamond vertex `(A, r)`: a strictly increasing set of positive
/// integers together with a label `r` in `B_|A|`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexCode {
    set: Vec<u32>,
    r: Dyadic,
}

impl VertexCode {
    pub fn new(set: Vec<u32>, r: Dyadic) -> Result<Self> {
        if set.first() == Some(&0) {
            return Err(Error::InvalidCode(format!("{set:?} contains 0")));
        }
        if set.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidCode(format!(
                "{set:?} is not strictly increasing"
            )));
        }
        if !r.in_level(set.len() as u32) {
            return Err(Error::InvalidCode(format!(
                "label {r:?} is not in B_{}",
                set.len()
            )));
        }
        Ok(VertexCode { set, r })
    }

    /// Builds a code from trusted parts. Only for values produced by the
    /// coding maps of this crate.
    pub(crate) fn from_parts(set: Vec<u32>, r: Dyadic) -> Self {
        debug_assert!(r.in_level(set.len() as u32), "{set:?} {r:?}");
        VertexCode { set, r }
    }

    /// The bottom terminal `(∅, 0)`.
    pub fn bottom() -> Self {
        VertexCode {
            set: Vec::new(),
            r: Dyadic::ZERO,
        }
    }

    /// The top terminal `(∅, 1)`.
    pub fn top() -> Self {
        VertexCode {
            set: Vec::new(),
            r: Dyadic::ONE,
        }
    }

    pub fn set(&self) -> &[u32] {
        &self.set
    }

    pub fn r(&self) -> Dyadic {
        self.r
    }

    /// `|A|`.
    pub fn level(&self) -> u32 {
        self.set.len() as u32
    }

    pub fn is_terminal(&self) -> bool {
        self.set.is_empty()
    }

    pub fn min(&self) -> Option<u32> {
        self.set.first().copied()
    }

    /// `A|_m`.
    pub fn prefix(&self, m: usize) -> &[u32] {
        &self.set[..m.min(self.set.len())]
    }

    /// Whether this vertex survives truncation of the branching to `w`:
    /// first element and consecutive gaps at most `w`.
    pub fn admissible(&self, w: u32) -> bool {
        set_admissible(&self.set, w)
    }
}

/// Truncation test on a bare set.
pub fn set_admissible(set: &[u32], w: u32) -> bool {
    let mut prev = 0;
    for &a in set {
        if a <= prev || a - prev > w {
            return false;
        }
        prev = a;
    }
    true
}

/// `A ≺ B`: `A` is a proper initial segment of `B`.
pub fn is_proper_prefix(a: &[u32], b: &[u32]) -> bool {
    a.len() < b.len() && b[..a.len()] == *a
}

/// `s_j(A) = {j} ∪ (A + j)`, with `s_j(∅) = {j}`.
pub fn shift_in(j: u32, set: &[u32]) -> Vec<u32> {
    std::iter::once(j)
        .chain(set.iter().map(|a| a + j))
        .collect()
}

/// `s_j^{-1}(A) = (A \ {j}) - j` for a set whose minimum is `j`.
pub fn shift_out(j: u32, set: &[u32]) -> Option<Vec<u32>> {
    match set.split_first() {
        Some((&first, rest)) if first == j => Some(rest.iter().map(|a| a - j).collect()),
        _ => None,
    }
}

pub fn format_set(set: &[u32]) -> String {
    let items: Vec<String> = set.iter().map(|a| a.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

impl fmt::Display for VertexCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {:?})", format_set(&self.set), self.r)
    }
}

impl fmt::Debug for VertexCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
