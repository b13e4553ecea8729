//! The graded module `N = ⊕_e R_{pe}` on which `S` acts through `p`-th
//! powers; it sheafifies to the Frobenius pushforward of the structure sheaf.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::map::{vector_to_column, Block, Generator, GradedMap};
use super::presentation::GradedModulePresentation;
use crate::error::{QdError, Result};
use crate::exactla::{add_mod, FpMatrix};
use crate::polyring::{Monomial, Polynomial, RingSpec, Weight};

/// Normal forms of monomials in `R = S/(q)`, using `x0 x1 = -r`.
struct MonomialReducer {
    neg_r_powers: Vec<Polynomial>,
}

impl MonomialReducer {
    fn new(ring: &RingSpec, max_power: usize) -> Self {
        let p = ring.modulus();
        let q = ring.quadric_poly().expect("quotient mode");
        let lead = Monomial::var(0).mul(&Monomial::var(1));
        let neg_r = q.sub(&Polynomial::term(lead, 1, p)).neg();
        let mut neg_r_powers = vec![Polynomial::constant(1, p)];
        for k in 1..=max_power {
            let next = neg_r_powers[k - 1].mul(&neg_r);
            neg_r_powers.push(next);
        }
        Self { neg_r_powers }
    }

    fn reduce(&self, m: &Monomial) -> Polynomial {
        let e = m.exponents();
        let k = e[0].min(e[1]);
        let mut exps = *e;
        exps[0] -= k;
        exps[1] -= k;
        self.neg_r_powers[k as usize].mul_monomial(&Monomial::from_exponents(&exps))
    }
}

/// Per-weight monomial bases of `R_d`.
fn quotient_basis(ring: &RingSpec, d: i32) -> BTreeMap<Weight, Vec<Monomial>> {
    let mut out: BTreeMap<Weight, Vec<Monomial>> = BTreeMap::new();
    for m in ring.monomial_basis(d, true) {
        out.entry(m.weight(ring.nvars())).or_default().push(m);
    }
    out
}

/// Presentation of `N` with `N_e = R_{pe}`, annihilated by `q`.
///
/// Generators are monomials of `R` found degree by degree; relations are
/// kernel vectors modulo those already implied. Generators lie below degree
/// `N` (number of variables) and the module is maximal Cohen-Macaulay, so
/// relations live in degrees at most `N + 1`; the result is checked against
/// `dim R_{pe}` a few degrees past the working range.
pub fn pushforward_module(ring: &RingSpec) -> Result<GradedModulePresentation> {
    if !ring.has_quadric() {
        return Err(QdError::Unsupported("pushforward needs the quadric ring".into()));
    }
    let nvars = ring.nvars();
    let p = ring.modulus();
    let pi = p as i32;
    let work = nvars as i32 + 2;
    let check = work + 3;
    let reducer = MonomialReducer::new(ring, (pi * check) as usize / 2 + 1);
    let q = ring.quadric_poly().unwrap().clone();

    let mut gens: Vec<Generator> = Vec::new();
    let mut gen_mono: Vec<Monomial> = Vec::new();
    // relations, including the implied q-multiples, in true weights
    let mut rels = GradedMap::new(Vec::new());
    let mut stored: Vec<bool> = Vec::new();

    for e in 0..=work {
        let basis = quotient_basis(ring, pi * e);
        let found: Vec<(Weight, Vec<Monomial>, Vec<Vec<(usize, Polynomial)>>)> = basis
            .par_iter()
            .map(|(w, mons)| {
                let pos: HashMap<Monomial, usize> =
                    mons.iter().enumerate().map(|(i, m)| (*m, i)).collect();
                let src = Block::new(&gens, e, *w, nvars, pi);
                let mut data = vec![0u32; mons.len() * src.len];
                for part in &src.parts {
                    for (k, m) in part.monomials().iter().enumerate() {
                        let col = part.start + k;
                        let img = reducer.reduce(&m.pow(p as u16).mul(&gen_mono[part.gen]));
                        for (t, c) in img.terms() {
                            let row = pos[t];
                            let slot = &mut data[row * src.len + col];
                            *slot = add_mod(*slot, c, p);
                        }
                    }
                }
                let a = FpMatrix::from_raw(mons.len(), src.len, p, data);
                let red = a.hcat(&FpMatrix::identity(mons.len(), p)).rank_and_reduce();
                let new_gens: Vec<Monomial> = red
                    .pivots
                    .iter()
                    .filter(|&&c| c >= src.len)
                    .map(|&c| mons[c - src.len])
                    .collect();
                let kernel = a.kernel_basis();
                let mut new_rels = Vec::new();
                if kernel.cols() > 0 {
                    let rsrc = Block::new(&rels.source, e, *w, nvars, pi);
                    let implied = rels.evaluate_on(&rsrc, &src, p);
                    if implied.rank() < kernel.cols() {
                        let red = implied.hcat(&kernel).rank_and_reduce();
                        new_rels = red
                            .pivots
                            .iter()
                            .filter(|&&c| c >= implied.cols())
                            .map(|&c| vector_to_column(&src, &kernel.column(c - implied.cols()), p))
                            .collect();
                    }
                }
                (*w, new_gens, new_rels)
            })
            .collect();
        for (w, new_gens, new_rels) in found {
            for col in new_rels {
                rels.push_column(Generator::new(e, w), col);
                stored.push(true);
            }
            for m in new_gens {
                let g = Generator::new(e, w);
                gens.push(g);
                gen_mono.push(m);
                rels.target.push(g);
                rels.push_column(Generator::new(e + 2, w), vec![(gens.len() - 1, q.clone())]);
                stored.push(false);
            }
        }
    }

    let lower = |g: &Generator| {
        let w = g.weight;
        Generator::new(
            g.degree,
            [
                w[0].div_euclid(pi),
                w[1].div_euclid(pi),
                w[2].div_euclid(pi),
            ],
        )
    };
    let mut map = GradedMap::new(gens.iter().map(lower).collect());
    for ((g, col), keep) in rels.source.iter().zip(&rels.columns).zip(&stored) {
        if *keep {
            map.push_column(lower(g), col.clone());
        }
    }
    let module = GradedModulePresentation::new(ring.clone(), map, true)?;
    for e in 0..=check {
        let want = ring.monomial_basis(pi * e, true).len();
        let got = module.hilbert(e);
        if got != want {
            return Err(QdError::BoundExhausted(format!(
                "pushforward piece {e}: {got} != {want}"
            )));
        }
    }
    Ok(module)
}
