//! Interval tables: long exact sequence narrowing, Künneth and Serre duality
//! for tables whose entries may be unknown.

use serde::{Deserialize, Serialize};

use crate::cohomeng::{CohTable, Entry};
use crate::error::{QdError, Result};

/// Closed interval with `u64::MAX` standing for infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Iv {
    lo: u64,
    hi: u64,
}

const INF: u64 = u64::MAX;

impl Iv {
    fn of(e: Entry) -> Self {
        Iv {
            lo: e.lo(),
            hi: e.hi().unwrap_or(INF),
        }
    }

    fn entry(self) -> Entry {
        Entry::new(self.lo, (self.hi != INF).then_some(self.hi))
    }

    fn raise(&mut self, lo: u64) -> bool {
        if lo > self.lo {
            self.lo = lo;
            true
        } else {
            false
        }
    }

    fn lower(&mut self, hi: u64) -> bool {
        if hi < self.hi {
            self.hi = hi;
            true
        } else {
            false
        }
    }
}

fn add(a: u64, b: u64) -> u64 {
    a.saturating_add(b)
}

/// `a - b` for an upper bound `a`: stays infinite, floors at zero.
fn sub_hi(a: u64, b: u64) -> u64 {
    if a == INF {
        INF
    } else {
        a.saturating_sub(b)
    }
}

/// `a - b` for a lower bound `a` and upper bound `b`.
fn sub_lo(a: u64, b: u64) -> u64 {
    if b == INF {
        0
    } else {
        a.saturating_sub(b)
    }
}

/// A map of the long exact sequence of `0 -> A -> B -> C -> 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LesMap {
    /// `H^i(A) -> H^i(B)`
    AB,
    /// `H^i(B) -> H^i(C)`
    BC,
    /// `H^i(C) -> H^{i+1}(A)`
    Connecting,
}

/// A known rank of one map in the long exact sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankHint {
    pub map: LesMap,
    pub degree: usize,
    pub rank: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Feasibility {
    Consistent,
    Contradicted(String),
}

/// Narrowed tables of `A`, `B`, `C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LesOutcome {
    pub a: CohTable,
    pub b: CohTable,
    pub c: CohTable,
    pub status: Feasibility,
}

pub fn les_bounds(a: &CohTable, b: &CohTable, c: &CohTable) -> Result<LesOutcome> {
    les_bounds_with(a, b, c, &[])
}

/// Narrows the three tables of a short exact sequence `0 -> A -> B -> C -> 0`
/// using exactness of the long exact sequence, optionally with known ranks.
///
/// Each term of the sequence is the sum of the ranks of its incoming and
/// outgoing maps; intervals for terms and ranks are tightened against each
/// other until nothing changes. Only true consequences are drawn, so the
/// true dimensions always remain inside the result.
pub fn les_bounds_with(a: &CohTable, b: &CohTable, c: &CohTable, hints: &[RankHint]) -> Result<LesOutcome> {
    let n = a.n;
    if b.n != n || c.n != n {
        return Err(QdError::ShapeMismatch("tables of different dimension".into()));
    }
    let tables = [a, b, c];
    let len = 3 * (n + 1);
    let mut x: Vec<Iv> = (0..len).map(|k| Iv::of(tables[k % 3].get(k / 3))).collect();
    // r[k + 1] is the rank of X_k -> X_{k+1}; r[0] and r[len] are the zero
    // maps into X_0 and out of X_{len-1}
    let mut r: Vec<Iv> = (0..=len).map(|_| Iv { lo: 0, hi: INF }).collect();
    r[0] = Iv { lo: 0, hi: 0 };
    r[len] = Iv { lo: 0, hi: 0 };
    for h in hints {
        if h.degree > n {
            return Err(QdError::ShapeMismatch(format!("rank hint in degree {}", h.degree)));
        }
        let offset = match h.map {
            LesMap::AB => 0,
            LesMap::BC => 1,
            LesMap::Connecting => 2,
        };
        let k = 3 * h.degree + offset + 1;
        if k >= len {
            return Err(QdError::ShapeMismatch("connecting map out of the top degree".into()));
        }
        r[k].raise(h.rank);
        r[k].lower(h.rank);
    }

    let mut status = Feasibility::Consistent;
    for _ in 0..10 * len + 10 {
        let mut changed = false;
        for k in 0..len {
            let (lo_in, hi_in) = (r[k].lo, r[k].hi);
            let (lo_out, hi_out) = (r[k + 1].lo, r[k + 1].hi);
            changed |= x[k].raise(add(lo_in, lo_out));
            changed |= x[k].lower(add(hi_in, hi_out));
            changed |= r[k + 1].raise(sub_lo(x[k].lo, hi_in));
            changed |= r[k + 1].lower(sub_hi(x[k].hi, lo_in));
            let (out_lo, out_hi) = (r[k + 1].lo, r[k + 1].hi);
            changed |= r[k].raise(sub_lo(x[k].lo, out_hi));
            changed |= r[k].lower(sub_hi(x[k].hi, out_lo));
            // a rank never exceeds either end
            changed |= r[k + 1].lower(x[k].hi);
            if k + 1 < len {
                changed |= r[k + 1].lower(x[k + 1].hi);
            }
        }
        if let Some(k) = (0..len).find(|&k| x[k].lo > x[k].hi) {
            status = Feasibility::Contradicted(format!(
                "no exact sequence fits: H^{} of {} is forced empty",
                k / 3,
                ["A", "B", "C"][k % 3]
            ));
            break;
        }
        if let Some(k) = (0..=len).find(|&k| r[k].lo > r[k].hi) {
            status = Feasibility::Contradicted(format!("no rank fits the map number {k} of the sequence"));
            break;
        }
        if !changed {
            break;
        }
    }

    let rebuild = |which: usize, src: &CohTable| -> Result<CohTable> {
        let mut t = src.clone();
        if status == Feasibility::Consistent {
            t.h = (0..=n).map(|i| x[3 * i + which].entry()).collect();
        }
        Ok(t)
    };
    Ok(LesOutcome {
        a: rebuild(0, a)?,
        b: rebuild(1, b)?,
        c: rebuild(2, c)?,
        status,
    })
}

/// Künneth on interval tables: products of bounds, with `0 * ∞ = 0`.
pub fn kunneth_interval(a: &CohTable, b: &CohTable) -> CohTable {
    let mul = |u: u64, v: u64| {
        if u == 0 || v == 0 {
            0
        } else {
            u.saturating_mul(v)
        }
    };
    let mut h = vec![Iv { lo: 0, hi: 0 }; a.n + b.n + 1];
    for i in 0..=a.n {
        for j in 0..=b.n {
            let (u, v) = (Iv::of(a.get(i)), Iv::of(b.get(j)));
            h[i + j].lo = add(h[i + j].lo, mul(u.lo, v.lo));
            h[i + j].hi = add(h[i + j].hi, mul(u.hi, v.hi));
        }
    }
    let mut t = CohTable::unknown(a.n + b.n);
    t.h = h.into_iter().map(Iv::entry).collect();
    t
}

/// Serre duality on interval tables: entry `i` becomes entry `n - i`.
pub fn serre_interval(t: &CohTable) -> CohTable {
    let mut out = CohTable::unknown(t.n);
    out.h = (0..=t.n).map(|i| t.get(t.n - i)).collect();
    out
}
