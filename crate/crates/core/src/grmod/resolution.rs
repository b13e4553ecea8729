//! Minimal free resolutions over the ambient ring, built degree by degree.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::map::{vector_to_column, weights_in_degree, Block, Generator, GradedMap};
use super::presentation::GradedModulePresentation;
use crate::error::{QdError, Result};
use crate::exactla::FpMatrix;
use crate::polyring::{Polynomial, Weight};

/// A minimal free resolution `... -> F_2 -> F_1 -> F_0 -> M`, exact in
/// internal degrees `<= bound`. `maps[j-1]` is `d_j : F_j -> F_{j-1}`.
#[derive(Clone, Debug)]
pub struct ResolutionData {
    pub maps: Vec<GradedMap>,
    pub bound: i32,
    /// Generators of the original presentation kept as `F_0`.
    pub kept: Vec<usize>,
    nvars: usize,
    p: u32,
}

impl ResolutionData {
    /// Homological length: index of the last nonzero free module.
    pub fn length(&self) -> usize {
        (1..=self.maps.len())
            .rev()
            .find(|&j| !self.maps[j - 1].source.is_empty())
            .unwrap_or(0)
    }

    /// Generators of `F_j`.
    pub fn free_module(&self, j: usize) -> &[Generator] {
        if j == 0 {
            &self.maps[0].target
        } else if j <= self.maps.len() {
            &self.maps[j - 1].source
        } else {
            &[]
        }
    }

    /// Graded Betti numbers `(j, degree) -> count`.
    pub fn betti(&self) -> BTreeMap<(usize, i32), usize> {
        let mut out = BTreeMap::new();
        for j in 0..=self.maps.len() {
            for g in self.free_module(j) {
                *out.entry((j, g.degree)).or_insert(0) += 1;
            }
        }
        out
    }

    pub fn betti_numbers(&self) -> Vec<usize> {
        (0..=self.length()).map(|j| self.free_module(j).len()).collect()
    }

    pub fn max_generator_degree(&self) -> Option<i32> {
        (0..=self.maps.len())
            .flat_map(|j| self.free_module(j).iter().map(|g| g.degree))
            .max()
    }

    pub fn composes_to_zero(&self) -> bool {
        self.maps.windows(2).all(|w| w[0].compose(&w[1]).is_zero())
    }

    /// No entry of any differential is a nonzero constant.
    pub fn is_minimal(&self) -> bool {
        self.maps.iter().all(|m| {
            m.columns.iter().enumerate().all(|(j, col)| {
                col.iter().all(|(i, _)| m.source[j].degree > m.target[*i].degree)
            })
        })
    }

    /// Rank checks on every `(degree, weight)` piece up to `upto`: the
    /// complex is exact at `F_j` for `j >= 1`, and `coker d_1` has the
    /// dimensions of `module`.
    pub fn is_exact_through(&self, module: &GradedModulePresentation, upto: i32) -> bool {
        let lo = self.free_module(0).iter().map(|g| g.degree).min().unwrap_or(0);
        let rel = module.effective_map();
        (lo..=upto).all(|e| {
            let weights = weights_in_degree(self.free_module(0), e, self.nvars, 1);
            let coker_ok = weights.par_iter().all(|w| {
                let r1 = self.maps[0].evaluate(e, *w, self.nvars, self.p).rank();
                let f0 = Block::new(self.free_module(0), e, *w, self.nvars, 1).len;
                let src = Block::new(&rel.source, e, *w, self.nvars, 1);
                let dst = Block::new(&rel.target, e, *w, self.nvars, 1);
                let m = dst.len - rel.evaluate_on(&src, &dst, self.p).rank();
                f0 - r1 == m
            });
            coker_ok
                && (1..self.maps.len()).all(|j| {
                    weights_in_degree(self.free_module(j), e, self.nvars, 1)
                        .par_iter()
                        .all(|w| {
                            let dj = self.maps[j - 1].evaluate(e, *w, self.nvars, self.p);
                            let dn = self.maps[j].evaluate(e, *w, self.nvars, self.p);
                            dj.cols() - dj.rank() == dn.rank()
                        })
                })
        })
    }
}

/// Incremental resolver: the resolution can be extended degree by degree
/// without recomputing earlier degrees.
#[derive(Clone, Debug)]
pub struct Resolver {
    /// Relations rewritten in the kept generators.
    relations: GradedMap,
    data: ResolutionData,
    next_degree: i32,
    hom_len: usize,
    last_new: Option<i32>,
}

/// New generators found on one `(degree, weight)` piece, per step.
type Found = Vec<Vec<Vec<(usize, Polynomial)>>>;

impl Resolver {
    pub fn new(module: &GradedModulePresentation, hom_len: usize) -> Self {
        let ring = module.ring();
        let nvars = ring.nvars();
        let p = ring.modulus();
        let (kept, relations) = prune(&module.effective_map(), p);
        let hom_len = hom_len.min(nvars).max(1);
        let mut maps = vec![GradedMap::new(relations.target.clone())];
        for _ in 1..hom_len {
            maps.push(GradedMap::new(Vec::new()));
        }
        let next_degree = relations.target.iter().map(|g| g.degree).min().unwrap_or(0);
        Self {
            relations,
            data: ResolutionData {
                maps,
                bound: next_degree - 1,
                kept,
                nvars,
                p,
            },
            next_degree,
            hom_len,
            last_new: None,
        }
    }

    pub fn data(&self) -> &ResolutionData {
        &self.data
    }

    pub fn bound(&self) -> i32 {
        self.data.bound
    }

    /// Highest degree in which a new generator was found so far.
    pub fn last_new_degree(&self) -> Option<i32> {
        self.last_new
    }

    /// Processes all internal degrees up to `bound`.
    pub fn extend_to(&mut self, bound: i32) {
        while self.next_degree <= bound {
            let e = self.next_degree;
            if !self.relations.target.is_empty() {
                self.step(e);
            }
            self.data.bound = e;
            self.next_degree += 1;
        }
    }

    fn step(&mut self, e: i32) {
        let nvars = self.data.nvars;
        // every weight of F_j in degree e occurs in F_0 shifted by a syzygy
        // weight, so the weights of F_0 and of the relations cover all pieces
        let mut weights = weights_in_degree(&self.data.maps[0].target, e, nvars, 1);
        for m in &self.data.maps {
            weights.extend(weights_in_degree(&m.source, e, nvars, 1));
        }
        weights.extend(
            self.relations
                .source
                .iter()
                .filter(|g| g.degree == e)
                .map(|g| g.weight),
        );
        weights.sort_unstable();
        weights.dedup();
        let found: Vec<(Weight, Found)> = weights
            .into_par_iter()
            .map(|w| (w, self.piece(e, w)))
            .filter(|(_, f)| f.iter().any(|c| !c.is_empty()))
            .collect();
        for (w, per_step) in found {
            for (j, cols) in per_step.into_iter().enumerate() {
                for col in cols {
                    self.add_generator(j + 1, Generator::new(e, w), col);
                }
            }
        }
    }

    fn add_generator(&mut self, j: usize, gen: Generator, col: Vec<(usize, Polynomial)>) {
        self.data.maps[j - 1].push_column(gen, col);
        if let Some(next) = self.data.maps.get_mut(j) {
            next.target.push(gen);
        }
        self.last_new = Some(gen.degree);
    }

    /// All steps on one `(e, w)` piece. New generators of `F_{j-1}` at this
    /// piece are unit vectors there, so steps only interact within a piece.
    /// They sit at the end of the target block and no old column reaches
    /// them, so they only add zero rows to `d_j`.
    fn piece(&self, e: i32, w: Weight) -> Found {
        let (nvars, p) = (self.data.nvars, self.data.p);
        let mut out: Found = Vec::new();
        // matrix of d_{j-1} on this piece including its new columns, and its rank
        let mut prev: Option<(FpMatrix, usize)> = None;
        for j in 1..=self.hom_len {
            let map = &self.data.maps[j - 1];
            let mut target = map.target.clone();
            if let Some(cols) = out.last() {
                target.extend(std::iter::repeat(Generator::new(e, w)).take(cols.len()));
            }
            let target_block = Block::new(&target, e, w, nvars, 1);
            let d = map.evaluate_on(&Block::new(&map.source, e, w, nvars, 1), &target_block, p);
            let rank = d.rank();
            let mut new_vecs = Vec::new();
            match &prev {
                None => {
                    // fresh first syzygies are relations of degree exactly e
                    let mut cand = GradedMap::new(self.relations.target.clone());
                    for (g, col) in self.relations.source.iter().zip(&self.relations.columns) {
                        if g.degree == e && g.weight == w {
                            cand.push_column(*g, col.clone());
                        }
                    }
                    if !cand.source.is_empty() {
                        let cb = Block::new(&cand.source, e, w, nvars, 1);
                        let c = cand.evaluate_on(&cb, &target_block, p);
                        new_vecs = new_directions(&d, &c);
                    }
                }
                Some((before, before_rank)) => {
                    if rank < target_block.len - before_rank {
                        new_vecs = new_directions(&d, &before.kernel_basis());
                    }
                }
            }
            let r = rank + new_vecs.len();
            let mut full = d;
            if !new_vecs.is_empty() {
                let mut add = FpMatrix::zeros(target_block.len, new_vecs.len(), p);
                for (k, v) in new_vecs.iter().enumerate() {
                    for (i, &x) in v.iter().enumerate() {
                        add.set(i, k, x);
                    }
                }
                full = full.hcat(&add);
            }
            prev = Some((full, r));
            out.push(new_vecs.iter().map(|v| vector_to_column(&target_block, v, p)).collect());
        }
        out
    }
}

/// Columns of `add` independent modulo the columns of `base`.
fn new_directions(base: &FpMatrix, add: &FpMatrix) -> Vec<Vec<u32>> {
    if add.cols() == 0 || add.is_zero() {
        return Vec::new();
    }
    let red = base.hcat(add).rank_and_reduce();
    red.pivots
        .iter()
        .filter(|&&c| c >= base.cols())
        .map(|&c| add.column(c - base.cols()))
        .collect()
}

/// Eliminates generators that a relation with a nonzero constant entry
/// expresses through the others. Returns the kept indices and the remaining
/// relations written in the kept generators.
fn prune(rel: &GradedMap, p: u32) -> (Vec<usize>, GradedMap) {
    let mut cols: Vec<(Generator, BTreeMap<usize, Polynomial>)> = rel
        .source
        .iter()
        .zip(&rel.columns)
        .map(|(g, c)| (*g, c.iter().cloned().collect()))
        .collect();
    let mut alive = vec![true; rel.target.len()];
    loop {
        let pick = cols.iter().enumerate().find_map(|(j, (g, c))| {
            c.iter()
                .find(|(i, f)| rel.target[**i].degree == g.degree && !f.is_zero())
                .map(|(i, f)| (j, *i, f.coefficient(&crate::polyring::Monomial::one())))
        });
        let Some((j, k, c)) = pick else { break };
        let (_, pivot) = cols.remove(j);
        let cinv = crate::exactla::inv_mod(c, p);
        for (_, col) in cols.iter_mut() {
            let Some(g) = col.remove(&k) else { continue };
            let factor = g.scale(cinv);
            for (i, f) in &pivot {
                if *i == k {
                    continue;
                }
                let entry = col.remove(i).unwrap_or_else(|| Polynomial::zero(p)).sub(&factor.mul(f));
                if !entry.is_zero() {
                    col.insert(*i, entry);
                }
            }
        }
        cols.retain(|(_, c)| !c.is_empty());
        alive[k] = false;
    }
    let kept: Vec<usize> = (0..alive.len()).filter(|&i| alive[i]).collect();
    let index: BTreeMap<usize, usize> = kept.iter().enumerate().map(|(a, &b)| (b, a)).collect();
    let mut out = GradedMap::new(kept.iter().map(|&i| rel.target[i]).collect());
    for (g, c) in cols {
        out.push_column(g, c.into_iter().map(|(i, f)| (index[&i], f)).collect());
    }
    (kept, out)
}

/// Resolution exact through internal degree `bound`.
///
/// Fails when new generators still appear at `bound`, since the truncation
/// may then be missing later syzygies.
pub fn truncated_min_resolution(
    module: &GradedModulePresentation,
    hom_len: usize,
    bound: i32,
) -> Result<ResolutionData> {
    let mut r = Resolver::new(module, hom_len);
    r.extend_to(bound);
    if r.last_new_degree() == Some(bound) {
        return Err(QdError::BoundExhausted(format!(
            "new generators at internal degree {bound}"
        )));
    }
    Ok(r.data)
}
