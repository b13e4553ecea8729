//! Bounded complexes of bundles on `Q` or `Q × Q`, and the vanishing
//! arguments run on them.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bundlecat::BundleExpr;
use crate::cohomeng::{CohTable, Entry};
use crate::error::{QdError, Result};

use super::interval::kunneth_interval;

/// `mult` copies of a bundle on `Q`, or of a box product on `Q × Q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sheaf {
    pub left: BundleExpr,
    pub right: Option<BundleExpr>,
    pub mult: u64,
}

const BOX: &str = " ⊠ ";

impl Sheaf {
    pub fn on(e: BundleExpr) -> Self {
        Sheaf {
            left: e,
            right: None,
            mult: 1,
        }
    }

    pub fn boxed(a: BundleExpr, b: BundleExpr) -> Self {
        Sheaf {
            left: a,
            right: Some(b),
            mult: 1,
        }
    }

    pub fn times(mut self, mult: u64) -> Self {
        self.mult = mult;
        self
    }

    pub fn is_boxed(&self) -> bool {
        self.right.is_some()
    }

    pub fn normalize(&self, n: usize, p: u32) -> Self {
        Sheaf {
            left: self.left.normalize(n, p),
            right: self.right.as_ref().map(|r| r.normalize(n, p)),
            mult: self.mult,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (body, mult) = match text.rsplit_once('^') {
            Some((b, m)) if !m.is_empty() && m.bytes().all(|c| c.is_ascii_digit()) => (
                b,
                m.parse::<u64>()
                    .map_err(|_| QdError::Parse { pos: b.len(), msg: "bad multiplicity".into() })?,
            ),
            _ => (text, 1),
        };
        let sheaf = match body.split_once(BOX.trim()) {
            Some((a, b)) => Sheaf::boxed(BundleExpr::parse(a)?, BundleExpr::parse(b)?),
            None => Sheaf::on(BundleExpr::parse(body)?),
        };
        Ok(sheaf.times(mult))
    }
}

impl fmt::Display for Sheaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.left)?;
        if let Some(r) = &self.right {
            write!(f, "{BOX}{r}")?;
        }
        if self.mult != 1 {
            write!(f, "^{}", self.mult)?;
        }
        Ok(())
    }
}

impl Serialize for Sheaf {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Sheaf {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Sheaf::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// `mult` copies of a table, entrywise.
pub fn scale_table(t: &CohTable, mult: u64) -> CohTable {
    let mut out = t.clone();
    out.h = t
        .h
        .iter()
        .map(|e| Entry::new(e.lo().saturating_mul(mult), e.hi().map(|h| h.saturating_mul(mult))))
        .collect();
    out
}

/// Entrywise sum of interval tables of equal dimension.
pub fn sum_tables(tables: &[CohTable]) -> Result<CohTable> {
    let first = tables
        .first()
        .ok_or_else(|| QdError::ShapeMismatch("empty sum".into()))?;
    let mut out = CohTable::zero(first.n);
    for t in tables {
        if t.n != first.n {
            return Err(QdError::TableDimension(first.n, t.n));
        }
        for (slot, e) in out.h.iter_mut().zip(&t.h) {
            let hi = match (slot.hi(), e.hi()) {
                (Some(a), Some(b)) => Some(a.saturating_add(b)),
                _ => None,
            };
            *slot = Entry::new(slot.lo().saturating_add(e.lo()), hi);
        }
    }
    Ok(out)
}

/// Table of a box product from the tables of its factors.
pub fn box_table(a: &CohTable, b: &CohTable, mult: u64) -> CohTable {
    scale_table(&kunneth_interval(a, b), mult)
}

/// The summands of one cohomological degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexTerm {
    pub degree: i32,
    pub summands: Vec<Sheaf>,
}

/// A bounded complex, named by the object it represents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexSpec {
    pub name: String,
    pub terms: Vec<ComplexTerm>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl ComplexSpec {
    pub fn new(name: impl Into<String>, terms: Vec<ComplexTerm>, note: impl Into<String>) -> Result<Self> {
        let c = ComplexSpec {
            name: name.into(),
            terms,
            note: note.into(),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.terms.is_empty() {
            return Err(QdError::ShapeMismatch(format!("complex {} has no terms", self.name)));
        }
        if self.terms.windows(2).any(|w| w[0].degree >= w[1].degree) {
            return Err(QdError::ShapeMismatch(format!(
                "degrees of {} must increase strictly",
                self.name
            )));
        }
        if self.terms.iter().any(|t| t.summands.is_empty()) {
            return Err(QdError::ShapeMismatch(format!("empty term in {}", self.name)));
        }
        let boxed = self.terms[0].summands[0].is_boxed();
        if self.summands().any(|s| s.is_boxed() != boxed) {
            return Err(QdError::ShapeMismatch(format!(
                "{} mixes sheaves on Q and on Q × Q",
                self.name
            )));
        }
        Ok(())
    }

    pub fn summands(&self) -> impl Iterator<Item = &Sheaf> {
        self.terms.iter().flat_map(|t| t.summands.iter())
    }

    /// Name of the stupid truncation keeping degrees `>= cut`.
    pub fn truncated_name(&self, cut: i32) -> String {
        format!("σ≥{cut}({})", self.name)
    }

    /// The stupid truncation keeping degrees `>= cut`.
    pub fn truncate(&self, cut: i32) -> Result<ComplexSpec> {
        ComplexSpec::new(
            self.truncated_name(cut),
            self.terms.iter().filter(|t| t.degree >= cut).cloned().collect(),
            self.note.clone(),
        )
    }

    /// Terms strictly below `cut`.
    pub fn below(&self, cut: i32) -> Vec<&ComplexTerm> {
        self.terms.iter().filter(|t| t.degree < cut).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Vanishes,
    Unknown,
}

fn term_dims(c: &ComplexSpec, tables: &[CohTable]) -> Result<usize> {
    if tables.len() != c.terms.len() {
        return Err(QdError::ShapeMismatch(format!(
            "{} terms but {} tables",
            c.terms.len(),
            tables.len()
        )));
    }
    let dim = tables[0].n;
    if let Some(t) = tables.iter().find(|t| t.n != dim) {
        return Err(QdError::TableDimension(dim, t.n));
    }
    Ok(dim)
}

/// `ℍ^i` of the complex vanishes when every `H^a(F^q)` with `a + q = i`
/// does. `tables[k]` is the table of the whole term `k`.
pub fn hyper_vanish(c: &ComplexSpec, tables: &[CohTable], i: i32) -> Result<Verdict> {
    term_dims(c, tables)?;
    let all_zero = c.terms.iter().zip(tables).all(|(term, t)| {
        let a = i - term.degree;
        a < 0 || a as usize > t.n || t.get(a as usize).is_zero()
    });
    Ok(if all_zero { Verdict::Vanishes } else { Verdict::Unknown })
}

/// `ℍ^i = 0` for every `i > above`.
pub fn hyper_vanish_above(c: &ComplexSpec, tables: &[CohTable], above: i32) -> Result<Verdict> {
    let dim = term_dims(c, tables)? as i32;
    let top = c.terms.last().map_or(0, |t| t.degree) + dim;
    for i in above + 1..=top {
        if hyper_vanish(c, tables, i)? == Verdict::Unknown {
            return Ok(Verdict::Unknown);
        }
    }
    Ok(Verdict::Vanishes)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TriangleVerdict {
    /// `ℍ^i(full) = 0` for all `i > 0`.
    Vanishes,
    Inconclusive(String),
    Contradicted(String),
}

/// The triangle `L[-q] -> full -> σ≥cut(full) ->` where `L` is the single
/// term below the cut, sitting in degree `q`. The full complex has no
/// cohomology above degree 0 once the truncation has none and `H^j(L) = 0`
/// for `j > -q`.
pub fn truncation_triangle(
    full: &ComplexSpec,
    cut: i32,
    left: &CohTable,
    truncated: &Verdict,
) -> TriangleVerdict {
    if let Err(e) = full.validate() {
        return TriangleVerdict::Contradicted(e.to_string());
    }
    let below = full.below(cut);
    if below.len() > 1 {
        return TriangleVerdict::Contradicted(format!(
            "{} terms below the cut, the triangle needs one",
            below.len()
        ));
    }
    if full.terms.iter().all(|t| t.degree < cut) {
        return TriangleVerdict::Contradicted("nothing above the cut".into());
    }
    let Some(term) = below.first() else {
        if !left.is_zero() {
            return TriangleVerdict::Contradicted("no term below the cut but a nonzero left table".into());
        }
        return match truncated {
            Verdict::Vanishes => TriangleVerdict::Vanishes,
            Verdict::Unknown => TriangleVerdict::Inconclusive("truncated complex not known to vanish".into()),
        };
    };
    if *truncated != Verdict::Vanishes {
        return TriangleVerdict::Inconclusive("truncated complex not known to vanish".into());
    }
    let first = (-term.degree + 1).max(0) as usize;
    match (first..=left.n).find(|&j| !left.get(j).is_zero()) {
        None => TriangleVerdict::Vanishes,
        Some(j) => TriangleVerdict::Inconclusive(format!(
            "left term may have H^{j}, which lands in degree {}",
            j as i32 + term.degree
        )),
    }
}
