use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::map::{weights_in_degree, Block, Generator, GradedMap};
use crate::error::{QdError, Result};
use crate::exactla::FpMatrix;
use crate::polyring::{
    add_weight, frob_power, scale_weight, sub_weight, Monomial, Polynomial, RingSpec, Weight,
    ZERO_WEIGHT,
};

/// A finitely generated graded `S`-module `coker(F1 -> F0)`.
///
/// When `annihilated_by_q` is set the relations `q * e_i` are implied for
/// every generator; they are appended by [`Self::effective_map`] rather than
/// stored. Twist convention: `M(d)_e = M_{d+e}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GradedModulePresentation {
    ring: RingSpec,
    map: GradedMap,
    annihilated_by_q: bool,
}

/// Dimension and a deterministic basis of one graded piece.
#[derive(Clone, Debug)]
pub struct GradedPiece {
    pub degree: i32,
    pub dim: usize,
    /// Per weight: the `(generator, monomial)` pairs whose images form a basis.
    pub blocks: Vec<(Weight, Vec<(usize, Monomial)>)>,
}

impl GradedModulePresentation {
    pub fn new(ring: RingSpec, map: GradedMap, annihilated_by_q: bool) -> Result<Self> {
        if annihilated_by_q && !ring.has_quadric() {
            return Err(QdError::Unsupported("q-annihilated module over the ambient ring".into()));
        }
        if let Some((i, j)) = map.degree_violation(ring.nvars()) {
            return Err(QdError::DegreeMismatch(format!(
                "entry ({i},{j}) = {:?} between {:?} and {:?}",
                map.entry(i, j),
                map.target[i],
                map.source[j]
            )));
        }
        Ok(Self {
            ring,
            map,
            annihilated_by_q,
        })
    }

    /// Free module `⊕ S(-g_i)` (or `⊕ R(-g_i)` when `over_quadric`).
    pub fn free(ring: &RingSpec, degrees: &[i32], over_quadric: bool) -> Result<Self> {
        let gens = degrees.iter().map(|&d| Generator::new(d, ZERO_WEIGHT)).collect();
        Self::new(ring.clone(), GradedMap::new(gens), over_quadric)
    }

    /// `R(d)` (or `S(d)` in ambient mode): the module of `O(d)`.
    pub fn line_bundle(ring: &RingSpec, d: i32) -> Result<Self> {
        Self::free(ring, &[-d], ring.has_quadric())
    }

    pub fn zero(ring: &RingSpec) -> Self {
        Self {
            ring: ring.clone(),
            map: GradedMap::new(Vec::new()),
            annihilated_by_q: false,
        }
    }

    pub fn ring(&self) -> &RingSpec {
        &self.ring
    }

    pub fn generators(&self) -> &[Generator] {
        &self.map.target
    }

    pub fn generator_degrees(&self) -> Vec<i32> {
        self.map.target.iter().map(|g| g.degree).collect()
    }

    pub fn relations(&self) -> &GradedMap {
        &self.map
    }

    pub fn annihilated_by_q(&self) -> bool {
        self.annihilated_by_q
    }

    /// The relation matrix including the implied `q * e_i` columns.
    pub fn effective_map(&self) -> GradedMap {
        let mut map = self.map.clone();
        if self.annihilated_by_q {
            let q = self.ring.quadric_poly().expect("flag implies quadric").clone();
            for (i, g) in self.map.target.iter().enumerate() {
                map.push_column(Generator::new(g.degree + 2, g.weight), vec![(i, q.clone())]);
            }
        }
        map
    }

    fn p(&self) -> u32 {
        self.ring.modulus()
    }

    /// Whether pieces can be computed over `R` in normal-form monomials.
    pub(crate) fn over_quotient(&self) -> bool {
        self.annihilated_by_q && self.ring.has_quadric()
    }

    /// Relations to use with [`Block::choose`]: the stored ones over `R`,
    /// the effective ones over `S`.
    pub(crate) fn working_map(&self) -> GradedMap {
        if self.over_quotient() {
            self.map.clone()
        } else {
            self.effective_map()
        }
    }

    /// Basis block of the free module on the `(d, w)` piece and the matrix
    /// of relations into it.
    pub(crate) fn piece_matrix(&self, map: &GradedMap, d: i32, w: Weight) -> (Block, FpMatrix) {
        let nvars = self.ring.nvars();
        let quo = self.over_quotient();
        let src = Block::choose(&map.source, d, w, nvars, quo);
        let dst = Block::choose(&map.target, d, w, nvars, quo);
        let m = map.evaluate_on(&src, &dst, self.p());
        (dst, m)
    }

    /// `dim M_d`.
    pub fn hilbert(&self, d: i32) -> usize {
        let map = self.working_map();
        let nvars = self.ring.nvars();
        weights_in_degree(&map.target, d, nvars, 1)
            .par_iter()
            .map(|w| {
                let (dst, m) = self.piece_matrix(&map, d, *w);
                dst.len - m.rank()
            })
            .sum()
    }

    /// A monomial basis of `M_d`, over `R` in normal form when the module
    /// is annihilated by `q`.
    pub fn graded_piece(&self, d: i32) -> GradedPiece {
        let map = self.working_map();
        let nvars = self.ring.nvars();
        let blocks: Vec<(Weight, Vec<(usize, Monomial)>)> = weights_in_degree(&map.target, d, nvars, 1)
            .into_par_iter()
            .map(|w| {
                let (dst, m) = self.piece_matrix(&map, d, w);
                // coordinates outside the pivots of the image span a complement
                let red = m.transpose().rank_and_reduce();
                let mut is_pivot = vec![false; dst.len];
                for &c in &red.pivots {
                    is_pivot[c] = true;
                }
                let basis = (0..dst.len)
                    .filter(|&c| !is_pivot[c])
                    .map(|c| dst.element(c))
                    .collect::<Vec<_>>();
                (w, basis)
            })
            .filter(|(_, b)| !b.is_empty())
            .collect();
        GradedPiece {
            degree: d,
            dim: blocks.iter().map(|(_, b)| b.len()).sum(),
            blocks,
        }
    }

    /// Checks `q * M_d = 0` on the pieces `d in lo..=hi`.
    pub fn q_annihilates(&self, lo: i32, hi: i32) -> bool {
        let Some(q) = self.ring.quadric_poly() else {
            return false;
        };
        let map = self.effective_map();
        let nvars = self.ring.nvars();
        (lo..=hi).all(|d| {
            weights_in_degree(&map.target, d + 2, nvars, 1).iter().all(|w| {
                // image of q * F0_d inside F0_{d+2} must lie in the relations
                let src_gens = &map.target;
                let mut qmap = GradedMap::new(map.target.clone());
                for (i, g) in src_gens.iter().enumerate() {
                    qmap.push_column(Generator::new(g.degree + 2, g.weight), vec![(i, q.clone())]);
                }
                let rel = map.evaluate(d + 2, *w, nvars, self.p());
                let qm = qmap.evaluate(d + 2, *w, nvars, self.p());
                rel.hcat(&qm).rank() == rel.rank()
            })
        })
    }

    fn same_ring(&self, other: &Self) -> Result<()> {
        if self.ring != other.ring {
            return Err(QdError::RingMismatch);
        }
        Ok(())
    }

    /// `M(a)`.
    pub fn twist(&self, a: i32) -> Self {
        let shift = |g: &Generator| Generator::new(g.degree - a, g.weight);
        Self {
            ring: self.ring.clone(),
            map: GradedMap {
                target: self.map.target.iter().map(shift).collect(),
                source: self.map.source.iter().map(shift).collect(),
                columns: self.map.columns.clone(),
            },
            annihilated_by_q: self.annihilated_by_q,
        }
    }

    /// `M ⊕ N`, keeping implied `q` relations per summand.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        self.same_ring(other)?;
        let a = if other.annihilated_by_q && !self.annihilated_by_q {
            self.clone()
        } else {
            self.with_explicit_q_if(other.annihilated_by_q != self.annihilated_by_q)
        };
        let b = other.with_explicit_q_if(other.annihilated_by_q != self.annihilated_by_q);
        let flag = a.annihilated_by_q && b.annihilated_by_q;
        let off = a.map.target.len();
        let mut target = a.map.target.clone();
        target.extend_from_slice(&b.map.target);
        let mut map = GradedMap::new(target);
        for (g, col) in a.map.source.iter().zip(&a.map.columns) {
            map.push_column(*g, col.clone());
        }
        for (g, col) in b.map.source.iter().zip(&b.map.columns) {
            map.push_column(*g, col.iter().map(|(i, f)| (i + off, f.clone())).collect());
        }
        Ok(Self {
            ring: self.ring.clone(),
            map,
            annihilated_by_q: flag,
        })
    }

    fn with_explicit_q_if(&self, cond: bool) -> Self {
        if cond && self.annihilated_by_q {
            Self {
                ring: self.ring.clone(),
                map: self.effective_map(),
                annihilated_by_q: false,
            }
        } else {
            self.clone()
        }
    }

    /// `M ⊗_S N` presented as `coker(F1⊗G0 ⊕ F0⊗G1 -> F0⊗G0)`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        self.same_ring(other)?;
        let (ga, gb) = (&self.map.target, &other.map.target);
        let idx = |i: usize, j: usize| i * gb.len() + j;
        let mut target = Vec::with_capacity(ga.len() * gb.len());
        for a in ga {
            for b in gb {
                target.push(Generator::new(a.degree + b.degree, add_weight(a.weight, b.weight)));
            }
        }
        let mut map = GradedMap::new(target);
        for (rel, col) in self.map.source.iter().zip(&self.map.columns) {
            for (j, b) in gb.iter().enumerate() {
                let entries = col.iter().map(|(i, f)| (idx(*i, j), f.clone())).collect();
                map.push_column(Generator::new(rel.degree + b.degree, add_weight(rel.weight, b.weight)), entries);
            }
        }
        for (i, a) in ga.iter().enumerate() {
            for (rel, col) in other.map.source.iter().zip(&other.map.columns) {
                let entries = col.iter().map(|(j, f)| (idx(i, *j), f.clone())).collect();
                map.push_column(Generator::new(a.degree + rel.degree, add_weight(a.weight, rel.weight)), entries);
            }
        }
        Ok(Self {
            ring: self.ring.clone(),
            map,
            annihilated_by_q: self.annihilated_by_q || other.annihilated_by_q,
        })
    }

    /// `Sym^k M = coker(F1 ⊗ S^{k-1}F0 -> S^k F0)`. Generators are the
    /// size-`k` multisets of generators of `M`, listed in lexicographic order.
    pub fn sym_power(&self, k: usize) -> Self {
        if k == 0 {
            let gens = vec![Generator::new(0, ZERO_WEIGHT)];
            return Self {
                ring: self.ring.clone(),
                map: GradedMap::new(gens),
                annihilated_by_q: self.ring.has_quadric() && self.annihilated_by_q,
            };
        }
        let r = self.map.target.len();
        let top = multisets(r, k);
        let index: HashMap<Vec<usize>, usize> =
            top.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let gen_of = |ms: &[usize]| {
            ms.iter().fold(Generator::new(0, ZERO_WEIGHT), |acc, &i| {
                let g = self.map.target[i];
                Generator::new(acc.degree + g.degree, add_weight(acc.weight, g.weight))
            })
        };
        let mut map = GradedMap::new(top.iter().map(|m| gen_of(m)).collect());
        for lower in multisets(r, k - 1) {
            let base = gen_of(&lower);
            for (rel, col) in self.map.source.iter().zip(&self.map.columns) {
                let mut entries: Vec<(usize, Polynomial)> = Vec::new();
                for (i, f) in col {
                    let mut ms = lower.clone();
                    ms.push(*i);
                    ms.sort_unstable();
                    let row = index[&ms];
                    match entries.iter_mut().find(|(r, _)| *r == row) {
                        Some((_, g)) => *g = g.add(f),
                        None => entries.push((row, f.clone())),
                    }
                }
                entries.sort_by_key(|(r, _)| *r);
                map.push_column(
                    Generator::new(base.degree + rel.degree, add_weight(base.weight, rel.weight)),
                    entries,
                );
            }
        }
        Self {
            ring: self.ring.clone(),
            map,
            annihilated_by_q: self.annihilated_by_q,
        }
    }

    /// Base change along the Frobenius of `S` (of `R` when q-annihilated):
    /// degrees and weights scale by `p`, entries become `p`-th powers.
    pub fn frobenius_pullback(&self) -> Self {
        let p = self.p();
        let up = |g: &Generator| Generator::new(g.degree * p as i32, scale_weight(g.weight, p as i32));
        Self {
            ring: self.ring.clone(),
            map: GradedMap {
                target: self.map.target.iter().map(up).collect(),
                source: self.map.source.iter().map(up).collect(),
                columns: self
                    .map
                    .columns
                    .iter()
                    .map(|col| col.iter().map(|(i, f)| (*i, frob_power(f, p))).collect())
                    .collect(),
            },
            annihilated_by_q: self.annihilated_by_q,
        }
    }

    /// Splits into direct summands along connected components of the
    /// generator/relation incidence graph.
    pub fn components(&self) -> Vec<Self> {
        let n = self.map.target.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            let mut y = x;
            while parent[y] != r {
                let next = parent[y];
                parent[y] = r;
                y = next;
            }
            r
        }
        for col in &self.map.columns {
            if let Some((first, _)) = col.first() {
                for (i, _) in col.iter().skip(1) {
                    let (a, b) = (find(&mut parent, *first), find(&mut parent, *i));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
        for i in 0..n {
            let root = find(&mut parent, i);
            match groups.iter_mut().find(|(r, _)| *r == root) {
                Some((_, v)) => v.push(i),
                None => groups.push((root, vec![i])),
            }
        }
        if groups.len() <= 1 {
            return vec![self.clone()];
        }
        groups
            .into_iter()
            .map(|(_, members)| {
                let local: HashMap<usize, usize> =
                    members.iter().enumerate().map(|(k, &i)| (i, k)).collect();
                let mut map = GradedMap::new(members.iter().map(|&i| self.map.target[i]).collect());
                for (g, col) in self.map.source.iter().zip(&self.map.columns) {
                    if let Some((first, _)) = col.first() {
                        if local.contains_key(first) {
                            map.push_column(*g, col.iter().map(|(i, f)| (local[i], f.clone())).collect());
                        }
                    }
                }
                Self {
                    ring: self.ring.clone(),
                    map,
                    annihilated_by_q: self.annihilated_by_q,
                }
            })
            .collect()
    }

    /// Quotient by extra relations given as polynomial columns on the generators.
    pub fn with_relations(&self, extra: Vec<(Generator, Vec<(usize, Polynomial)>)>) -> Result<Self> {
        let mut map = self.map.clone();
        for (g, col) in extra {
            map.push_column(g, col);
        }
        Self::new(self.ring.clone(), map, self.annihilated_by_q)
    }

    /// Sheaf rank from the Hilbert function: the leading coefficient ratio
    /// against the structure module, estimated from pieces at degrees
    /// `lo..lo+span` via finite differences.
    pub fn sheaf_rank(&self, lo: i32) -> Option<usize> {
        let dim = self.ring.variety_dim() as i32;
        let structure = if self.ring.has_quadric() {
            Self::line_bundle(&self.ring, 0).ok()?
        } else {
            Self::free(&self.ring, &[0], false).ok()?
        };
        let diff = |m: &Self| -> i64 {
            // dim-th finite difference of the Hilbert function is eventually constant
            let vals: Vec<i64> = (0..=dim).map(|k| m.hilbert(lo + k) as i64).collect();
            let mut v = vals;
            for _ in 0..dim {
                v = v.windows(2).map(|w| w[1] - w[0]).collect();
            }
            v[0]
        };
        let num = diff(self);
        let den = diff(&structure);
        (den > 0 && num % den == 0 && num >= 0).then(|| (num / den) as usize)
    }

    pub fn p_weight_of(&self, gen: usize) -> Weight {
        self.map.target[gen].weight
    }

    /// Re-derives torus weights for generators and relations from the
    /// entries; used for hand-built matrices such as matrix factorizations.
    pub fn assign_weights(ring: &RingSpec, map: &mut GradedMap) -> Result<()> {
        let nvars = ring.nvars();
        let nt = map.target.len();
        let ns = map.source.len();
        let mut tw: Vec<Option<Weight>> = vec![None; nt];
        let mut sw: Vec<Option<Weight>> = vec![None; ns];
        let entry_weight = |f: &Polynomial| {
            f.weight(nvars)
                .ok_or_else(|| QdError::DegreeMismatch(format!("{f:?} is not torus-homogeneous")))
        };
        loop {
            let seed = (0..nt).find(|&i| tw[i].is_none());
            let Some(seed) = seed else { break };
            tw[seed] = Some(ZERO_WEIGHT);
            let mut changed = true;
            while changed {
                changed = false;
                for (j, col) in map.columns.iter().enumerate() {
                    for (i, f) in col {
                        let w = entry_weight(f)?;
                        match (tw[*i], sw[j]) {
                            (Some(a), None) => {
                                sw[j] = Some(add_weight(a, w));
                                changed = true;
                            }
                            (None, Some(b)) => {
                                tw[*i] = Some(sub_weight(b, w));
                                changed = true;
                            }
                            (Some(a), Some(b)) if add_weight(a, w) != b => {
                                return Err(QdError::DegreeMismatch(
                                    "relations admit no consistent torus grading".into(),
                                ));
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
        for (g, w) in map.target.iter_mut().zip(tw) {
            g.weight = w.unwrap_or(ZERO_WEIGHT);
        }
        for (g, w) in map.source.iter_mut().zip(sw) {
            g.weight = w.unwrap_or(ZERO_WEIGHT);
        }
        Ok(())
    }

    /// Dense matrix of the relations on the `(d, w)` piece (effective map).
    pub fn relation_block(&self, d: i32, w: Weight) -> FpMatrix {
        self.effective_map().evaluate(d, w, self.ring.nvars(), self.p())
    }
}

/// Size-`k` multisets of `0..r` as sorted vectors, in lexicographic order.
pub fn multisets(r: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(r: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..r {
            cur.push(i);
            go(r, k, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(r, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Versioned JSON form of a presentation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentationDoc {
    pub version: u32,
    pub nvars: usize,
    pub p: u32,
    pub quadric: bool,
    pub annihilated_by_q: bool,
    pub generators: Vec<Generator>,
    pub relations: Vec<RelationDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationDoc {
    pub degree: i32,
    pub weight: Weight,
    pub entries: Vec<EntryDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryDoc {
    pub row: usize,
    /// `(exponents, coefficient)` pairs.
    pub terms: Vec<(Vec<u16>, u32)>,
}

pub const PRESENTATION_VERSION: u32 = 1;

impl GradedModulePresentation {
    pub fn to_doc(&self) -> PresentationDoc {
        let nvars = self.ring.nvars();
        PresentationDoc {
            version: PRESENTATION_VERSION,
            nvars,
            p: self.p(),
            quadric: self.ring.has_quadric(),
            annihilated_by_q: self.annihilated_by_q,
            generators: self.map.target.clone(),
            relations: self
                .map
                .source
                .iter()
                .zip(&self.map.columns)
                .map(|(g, col)| RelationDoc {
                    degree: g.degree,
                    weight: g.weight,
                    entries: col
                        .iter()
                        .map(|(row, f)| EntryDoc {
                            row: *row,
                            terms: f
                                .terms()
                                .map(|(m, c)| (m.exponents()[..nvars].to_vec(), c))
                                .collect(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &PresentationDoc) -> Result<Self> {
        if doc.version != PRESENTATION_VERSION {
            return Err(QdError::Unsupported(format!("presentation version {}", doc.version)));
        }
        let ring = if doc.quadric {
            RingSpec::quadric(doc.nvars - 2, doc.p)?
        } else {
            RingSpec::ambient(doc.nvars, doc.p)?
        };
        let mut map = GradedMap::new(doc.generators.clone());
        for rel in &doc.relations {
            let mut entries = Vec::new();
            for e in &rel.entries {
                let terms: Vec<(Vec<u16>, i64)> =
                    e.terms.iter().map(|(x, c)| (x.clone(), *c as i64)).collect();
                entries.push((e.row, Polynomial::from_terms(&terms, doc.p)?));
            }
            map.push_column(Generator::new(rel.degree, rel.weight), entries);
        }
        Self::new(ring, map, doc.annihilated_by_q)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("presentation serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_doc(&serde_json::from_str(s)?)
    }

    /// Stable 64-bit key of the presentation.
    pub fn fingerprint(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.hash(&mut h);
        h.finish()
    }
}
