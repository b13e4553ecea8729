//! Graded maps between free modules and their evaluation on weight blocks.
//!
//! A free module `⊕ S(-a_i)` is described by its generators `(a_i, w_i)`.
//! Its piece of degree `e` and torus weight `w` has basis the pairs
//! `(i, m)` with `deg m = e - a_i` and `scale * wt(m) = w - w_i`. The scale is
//! 1 everywhere except while building the Frobenius pushforward, where `S`
//! acts through `p`-th powers.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::exactla::{add_mod, FpMatrix};
use crate::polyring::{
    add_weight, neg_tail_power, scale_weight, sub_weight, Monomial, MonomialTable, Polynomial, Weight,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Generator {
    pub degree: i32,
    pub weight: Weight,
}

impl Generator {
    pub fn new(degree: i32, weight: Weight) -> Self {
        Self { degree, weight }
    }
}

/// Sparse matrix of homogeneous polynomials `⊕ S(-b_j) -> ⊕ S(-a_i)`, stored
/// by columns. Entry `(i, j)` has degree `b_j - a_i` and weight `v_j - w_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GradedMap {
    pub target: Vec<Generator>,
    pub source: Vec<Generator>,
    pub columns: Vec<Vec<(usize, Polynomial)>>,
}

impl GradedMap {
    pub fn new(target: Vec<Generator>) -> Self {
        Self {
            target,
            source: Vec::new(),
            columns: Vec::new(),
        }
    }

    pub fn push_column(&mut self, gen: Generator, entries: Vec<(usize, Polynomial)>) {
        let entries = entries.into_iter().filter(|(_, f)| !f.is_zero()).collect();
        self.source.push(gen);
        self.columns.push(entries);
    }

    pub fn entry(&self, row: usize, col: usize) -> Option<&Polynomial> {
        self.columns[col].iter().find(|(r, _)| *r == row).map(|(_, f)| f)
    }

    /// Checks degrees of all entries; returns the offending position if any.
    pub fn degree_violation(&self, nvars: usize) -> Option<(usize, usize)> {
        for (j, col) in self.columns.iter().enumerate() {
            for (i, f) in col {
                let want = self.source[j].degree - self.target[*i].degree;
                if f.degree() != Some(want) {
                    return Some((*i, j));
                }
                let wt = sub_weight(self.source[j].weight, self.target[*i].weight);
                if f.weight(nvars) != Some(wt) {
                    return Some((*i, j));
                }
            }
        }
        None
    }

    /// Composition `self ∘ rhs`.
    pub fn compose(&self, rhs: &GradedMap) -> GradedMap {
        assert_eq!(self.source.len(), rhs.target.len());
        let mut out = GradedMap::new(self.target.clone());
        for (j, col) in rhs.columns.iter().enumerate() {
            let mut acc: Vec<Option<Polynomial>> = vec![None; self.target.len()];
            for (k, g) in col {
                for (i, f) in &self.columns[*k] {
                    let prod = f.mul(g);
                    acc[*i] = Some(match acc[*i].take() {
                        Some(a) => a.add(&prod),
                        None => prod,
                    });
                }
            }
            let entries = acc
                .into_iter()
                .enumerate()
                .filter_map(|(i, f)| f.map(|f| (i, f)))
                .collect();
            out.push_column(rhs.source[j], entries);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(Vec::is_empty)
    }

    /// `Hom(-, S(-twist))` applied to this map: the transpose between dual
    /// free modules whose generators are `(twist - a, -w)`.
    pub fn dual(&self, twist: i32) -> GradedMap {
        let dual_gen = |g: &Generator| Generator::new(twist - g.degree, scale_weight(g.weight, -1));
        let mut rows: Vec<Vec<(usize, Polynomial)>> = vec![Vec::new(); self.target.len()];
        for (j, col) in self.columns.iter().enumerate() {
            for (i, f) in col {
                rows[*i].push((j, f.clone()));
            }
        }
        let mut out = GradedMap::new(self.source.iter().map(dual_gen).collect());
        for (i, entries) in rows.into_iter().enumerate() {
            out.push_column(dual_gen(&self.target[i]), entries);
        }
        out
    }

    /// Dense matrix of the map on the `(e, w)` piece.
    pub fn evaluate(&self, e: i32, w: Weight, nvars: usize, p: u32) -> FpMatrix {
        let src = Block::new(&self.source, e, w, nvars, 1);
        let dst = Block::new(&self.target, e, w, nvars, 1);
        self.evaluate_on(&src, &dst, p)
    }

    pub(crate) fn evaluate_on(&self, src: &Block, dst: &Block, p: u32) -> FpMatrix {
        let mut data = vec![0u32; dst.len * src.len];
        let cols = src.len;
        for part in &src.parts {
            let entries = &self.columns[part.gen];
            if entries.is_empty() {
                continue;
            }
            for (k, m) in part.monomials().iter().enumerate() {
                let col = part.start + k;
                for (row_gen, f) in entries {
                    for (mu, c) in f.terms() {
                        let target = m.mul(mu);
                        let e = target.exponents();
                        let k = e[0].min(e[1]);
                        if !dst.quotient || k == 0 {
                            if let Some(row) = dst.index(*row_gen, &target) {
                                let slot = &mut data[row * cols + col];
                                *slot = add_mod(*slot, c, p);
                            }
                            continue;
                        }
                        // (x0 x1)^k rest = rest * (x0 x1 - q)^k in R
                        let mut exps = *e;
                        exps[0] -= k;
                        exps[1] -= k;
                        let rest = Monomial::from_exponents(&exps);
                        for (nu, c2) in neg_tail_power(dst.nvars, p, k as usize).terms() {
                            if let Some(row) = dst.index(*row_gen, &rest.mul(nu)) {
                                let slot = &mut data[row * cols + col];
                                *slot = add_mod(*slot, (c as u64 * c2 as u64 % p as u64) as u32, p);
                            }
                        }
                    }
                }
            }
        }
        FpMatrix::from_raw(dst.len, src.len, p, data)
    }
}

pub(crate) struct Part {
    pub gen: usize,
    pub start: usize,
    table: Arc<MonomialTable>,
    sub: Weight,
}

impl Part {
    pub fn monomials(&self) -> &[Monomial] {
        self.table.with_weight(&self.sub)
    }
}

/// Basis of one `(degree, weight)` piece of a free module over `S`, or over
/// `R = S/(q)` in normal-form monomials when `quotient` is set.
pub(crate) struct Block {
    pub parts: Vec<Part>,
    pub len: usize,
    lookup: Vec<Option<usize>>,
    quotient: bool,
    nvars: usize,
}

impl Block {
    pub fn new(gens: &[Generator], e: i32, w: Weight, nvars: usize, scale: i32) -> Self {
        Self::build(gens, e, w, nvars, scale, false)
    }

    /// The piece over `R` when `quotient` is set, over `S` otherwise.
    pub fn choose(gens: &[Generator], e: i32, w: Weight, nvars: usize, quotient: bool) -> Self {
        Self::build(gens, e, w, nvars, 1, quotient)
    }

    fn build(gens: &[Generator], e: i32, w: Weight, nvars: usize, scale: i32, quotient: bool) -> Self {
        let mut parts = Vec::new();
        let mut lookup = vec![None; gens.len()];
        let mut len = 0;
        for (i, g) in gens.iter().enumerate() {
            let d = e - g.degree;
            if d < 0 {
                continue;
            }
            let diff = sub_weight(w, g.weight);
            if diff.iter().any(|x| x.rem_euclid(scale) != 0) {
                continue;
            }
            let sub = [diff[0] / scale, diff[1] / scale, diff[2] / scale];
            let table = MonomialTable::get_in(nvars, d, quotient);
            let count = table.with_weight(&sub).len();
            if count == 0 {
                continue;
            }
            lookup[i] = Some(parts.len());
            parts.push(Part {
                gen: i,
                start: len,
                table,
                sub,
            });
            len += count;
        }
        Self {
            parts,
            len,
            lookup,
            quotient,
            nvars,
        }
    }

    /// Coordinate of `(gen, monomial)`; the monomial is a plain `S`-monomial
    /// of the generator's complementary degree.
    #[inline]
    pub fn index(&self, gen: usize, m: &Monomial) -> Option<usize> {
        let part = &self.parts[self.lookup[gen]?];
        part.table.position.get(&m.key()).map(|&k| part.start + k)
    }

    /// `(generator, monomial)` behind a coordinate.
    pub fn element(&self, idx: usize) -> (usize, Monomial) {
        let part = self
            .parts
            .iter()
            .rev()
            .find(|pt| pt.start <= idx)
            .expect("index in range");
        (part.gen, part.monomials()[idx - part.start])
    }
}

/// Every weight occurring in degree `e` of the free module, sorted.
pub(crate) fn weights_in_degree(gens: &[Generator], e: i32, nvars: usize, scale: i32) -> Vec<Weight> {
    let mut out = std::collections::BTreeSet::new();
    for g in gens {
        let d = e - g.degree;
        if d < 0 {
            continue;
        }
        let table = MonomialTable::get(nvars, d);
        for w in table.by_weight.keys() {
            out.insert(add_weight(g.weight, scale_weight(*w, scale)));
        }
    }
    out.into_iter().collect()
}

/// Reassembles a coordinate vector of a block into a polynomial column.
pub(crate) fn vector_to_column(block: &Block, v: &[u32], p: u32) -> Vec<(usize, Polynomial)> {
    let mut entries: Vec<(usize, Polynomial)> = Vec::new();
    for (idx, &c) in v.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let (gen, m) = block.element(idx);
        match entries.iter_mut().find(|(g, _)| *g == gen) {
            Some((_, f)) => f.add_term(m, c),
            None => {
                let mut f = Polynomial::zero(p);
                f.add_term(m, c);
                entries.push((gen, f));
            }
        }
    }
    entries.sort_by_key(|(g, _)| *g);
    entries
}
