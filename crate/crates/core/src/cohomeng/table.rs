use serde::{Deserialize, Serialize};

use crate::error::{QdError, Result};
use crate::polyring::binomial;

/// A cohomology dimension: exact, or an interval with optional upper end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Exact(u64),
    Interval(u64, Option<u64>),
}

impl Entry {
    pub const UNKNOWN: Entry = Entry::Interval(0, None);

    pub fn new(lo: u64, hi: Option<u64>) -> Self {
        match hi {
            Some(h) if h == lo => Entry::Exact(lo),
            _ => Entry::Interval(lo, hi),
        }
    }

    pub fn lo(&self) -> u64 {
        match *self {
            Entry::Exact(v) | Entry::Interval(v, _) => v,
        }
    }

    pub fn hi(&self) -> Option<u64> {
        match *self {
            Entry::Exact(v) => Some(v),
            Entry::Interval(_, h) => h,
        }
    }

    pub fn exact(&self) -> Option<u64> {
        match *self {
            Entry::Exact(v) => Some(v),
            Entry::Interval(lo, Some(hi)) if lo == hi => Some(lo),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.hi() == Some(0)
    }

    pub fn contains(&self, v: u64) -> bool {
        v >= self.lo() && self.hi().is_none_or(|h| v <= h)
    }

    /// Intersection; `None` when empty.
    pub fn meet(&self, other: &Entry) -> Option<Entry> {
        let lo = self.lo().max(other.lo());
        let hi = match (self.hi(), other.hi()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        if hi.is_some_and(|h| h < lo) {
            None
        } else {
            Some(Entry::new(lo, hi))
        }
    }
}

/// Cohomology table `(h^0, ..., h^n)` of a sheaf on an `n`-dimensional variety.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CohTable {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twist: Option<i32>,
    pub h: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_used: Option<i32>,
}

impl CohTable {
    pub fn exact(n: usize, values: &[u64]) -> Result<Self> {
        if values.len() != n + 1 {
            return Err(QdError::TableDimension(values.len(), n + 1));
        }
        Ok(Self {
            n,
            twist: None,
            h: values.iter().map(|&v| Entry::Exact(v)).collect(),
            bound_used: None,
        })
    }

    pub fn unknown(n: usize) -> Self {
        Self {
            n,
            twist: None,
            h: vec![Entry::UNKNOWN; n + 1],
            bound_used: None,
        }
    }

    pub fn zero(n: usize) -> Self {
        Self::exact(n, &vec![0; n + 1]).expect("length matches")
    }

    pub fn is_exact(&self) -> bool {
        self.h.iter().all(|e| e.exact().is_some())
    }

    /// Exact values, or an error if any entry is an interval.
    pub fn values(&self) -> Result<Vec<u64>> {
        self.h.iter().map(|e| e.exact().ok_or(QdError::InexactTable)).collect()
    }

    pub fn get(&self, i: usize) -> Entry {
        self.h.get(i).copied().unwrap_or(Entry::Exact(0))
    }

    /// True when `h^i = 0` for every `i > 0`.
    pub fn higher_vanish(&self) -> bool {
        self.h.iter().skip(1).all(Entry::is_zero)
    }

    /// True when every entry other than `h^k` is zero.
    pub fn concentrated_in(&self, k: usize) -> bool {
        self.h.iter().enumerate().all(|(i, e)| i == k || e.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.h.iter().all(Entry::is_zero)
    }

    /// Drops provenance fields so tables compare by values alone.
    pub fn values_only(&self) -> Self {
        Self {
            n: self.n,
            twist: None,
            h: self.h.clone(),
            bound_used: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("table serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: Self = serde_json::from_str(s)?;
        if t.h.len() != t.n + 1 {
            return Err(QdError::TableDimension(t.h.len(), t.n + 1));
        }
        Ok(t)
    }
}

/// Table of `O(d)` on the smooth quadric of dimension `n`, from the
/// restriction sequence `0 -> O_P(d-2) -> O_P(d) -> O_Q(d) -> 0`.
pub fn line_bundle_table(n: usize, d: i32) -> CohTable {
    let h0 = |d: i64| -> u64 {
        let n = n as i64;
        if d < 0 {
            0
        } else {
            (binomial(n + 1 + d, n + 1) - binomial(n + d - 1, n + 1)) as u64
        }
    };
    let mut h = vec![0u64; n + 1];
    h[0] = h0(d as i64);
    h[n] += h0(-(n as i64) - d as i64);
    let mut t = CohTable::exact(n, &h).expect("length matches");
    t.twist = Some(d);
    t
}

pub fn serre_dual_table(t: &CohTable) -> Result<CohTable> {
    let mut v = t.values()?;
    v.reverse();
    CohTable::exact(t.n, &v)
}

pub fn kunneth_table(a: &CohTable, b: &CohTable) -> Result<CohTable> {
    let (x, y) = (a.values()?, b.values()?);
    let mut h = vec![0u64; a.n + b.n + 1];
    for (i, u) in x.iter().enumerate() {
        for (j, v) in y.iter().enumerate() {
            h[i + j] += u * v;
        }
    }
    CohTable::exact(a.n + b.n, &h)
}

pub fn euler_char(t: &CohTable) -> Result<i64> {
    Ok(t
        .values()?
        .iter()
        .enumerate()
        .map(|(i, &v)| if i % 2 == 0 { v as i64 } else { -(v as i64) })
        .sum())
}
