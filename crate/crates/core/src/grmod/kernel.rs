//! Presentations of kernels of maps between free modules.

use rayon::prelude::*;

use super::map::{vector_to_column, weights_in_degree, Block, Generator, GradedMap};
use super::presentation::GradedModulePresentation;
use crate::error::{QdError, Result};
use crate::exactla::FpMatrix;
use crate::polyring::{Polynomial, RingSpec, Weight};

/// Multiplication by `q` on a free module, as a map from its `(-2)`-shift.
fn q_times(ring: &RingSpec, gens: &[Generator]) -> GradedMap {
    let q = ring.quadric_poly().expect("quadric ring").clone();
    let mut m = GradedMap::new(gens.to_vec());
    for (i, g) in gens.iter().enumerate() {
        m.push_column(Generator::new(g.degree + 2, g.weight), vec![(i, q.clone())]);
    }
    m
}

fn select_rows(m: &FpMatrix, rows: usize) -> FpMatrix {
    let mut out = FpMatrix::zeros(rows, m.cols(), m.modulus());
    for r in 0..rows {
        for c in 0..m.cols() {
            out.set(r, c, m.get(r, c));
        }
    }
    out
}

/// Columns of `add` independent modulo the span of `base` and earlier picks.
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

/// The kernel of `kappa : F -> G`, read over `R = S/(q)` when
/// `over_quadric` is set and over `S` otherwise.
///
/// Returns the presentation and its inclusion into `F` (a map whose
/// source generators are the kernel generators). Generators and relations
/// are searched in degrees up to `work`; the Hilbert function is then
/// compared with the kernel dimensions up to `check`.
pub fn kernel_module(
    ring: &RingSpec,
    kappa: &GradedMap,
    over_quadric: bool,
    work: i32,
    check: i32,
) -> Result<(GradedModulePresentation, GradedMap)> {
    let nvars = ring.nvars();
    let p = ring.modulus();
    let f = kappa.source.clone();
    let g = kappa.target.clone();
    let qf = over_quadric.then(|| q_times(ring, &f));
    let qg = over_quadric.then(|| q_times(ring, &g));
    let lo = f.iter().map(|x| x.degree).min().unwrap_or(0);

    // kernel vectors at (e, w), in coordinates of F, together with the
    // image of q F (which is zero in the quotient)
    let kernel_space = |e: i32, w: Weight| -> (Block, FpMatrix, FpMatrix) {
        let fb = Block::new(&f, e, w, nvars, 1);
        let gb = Block::new(&g, e, w, nvars, 1);
        let k = kappa.evaluate_on(&fb, &gb, p);
        let (theta, qpart) = match (&qf, &qg) {
            (Some(qf), Some(qg)) => {
                let qgm = qg.evaluate_on(&Block::new(&qg.source, e, w, nvars, 1), &gb, p);
                let qfm = qf.evaluate_on(&Block::new(&qf.source, e, w, nvars, 1), &fb, p);
                (k.hcat(&qgm), qfm)
            }
            _ => (k, FpMatrix::zeros(fb.len, 0, p)),
        };
        let ker = select_rows(&theta.kernel_basis(), fb.len);
        (fb, ker, qpart)
    };

    let mut incl = GradedMap::new(f.clone());
    let mut rels = GradedMap::new(Vec::new());
    let mut stored: Vec<bool> = Vec::new();
    let qpoly = ring.quadric_poly().cloned();

    for e in lo..=work {
        let weights = weights_in_degree(&f, e, nvars, 1);
        let found: Vec<(Weight, Vec<Vec<(usize, Polynomial)>>, Vec<Vec<(usize, Polynomial)>>)> = weights
            .into_par_iter()
            .map(|w| {
                let (fb, ker, qpart) = kernel_space(e, w);
                let kb = Block::new(&incl.source, e, w, nvars, 1);
                let current = incl.evaluate_on(&kb, &fb, p).hcat(&qpart);
                let gens = new_directions(&current, &ker)
                    .into_iter()
                    .map(|v| vector_to_column(&fb, &v, p))
                    .collect();
                // syzygies among existing generators
                let syz = select_rows(&current.kernel_basis(), kb.len);
                let implied = rels.evaluate_on(&Block::new(&rels.source, e, w, nvars, 1), &kb, p);
                let new_rels = new_directions(&implied, &syz)
                    .into_iter()
                    .map(|v| vector_to_column(&kb, &v, p))
                    .collect();
                (w, gens, new_rels)
            })
            .collect();
        for (w, gens, new_rels) in found {
            for col in new_rels {
                rels.push_column(Generator::new(e, w), col);
                stored.push(true);
            }
            for col in gens {
                let gen = Generator::new(e, w);
                incl.push_column(gen, col);
                rels.target.push(gen);
                if let Some(q) = &qpoly {
                    if over_quadric {
                        let k = rels.target.len() - 1;
                        rels.push_column(Generator::new(e + 2, w), vec![(k, q.clone())]);
                        stored.push(false);
                    }
                }
            }
        }
    }

    let mut map = GradedMap::new(incl.source.clone());
    for ((gen, col), keep) in rels.source.iter().zip(&rels.columns).zip(&stored) {
        if *keep {
            map.push_column(*gen, col.clone());
        }
    }
    let module = GradedModulePresentation::new(ring.clone(), map, over_quadric)?;
    for e in lo..=check {
        let want: usize = weights_in_degree(&f, e, nvars, 1)
            .par_iter()
            .map(|&w| {
                let (_, ker, qpart) = kernel_space(e, w);
                ker.rank() - qpart.rank()
            })
            .sum();
        let got = module.hilbert(e);
        if got != want {
            return Err(QdError::BoundExhausted(format!(
                "kernel piece {e}: presentation gives {got}, kernel has {want}"
            )));
        }
    }
    Ok((module, incl))
}
