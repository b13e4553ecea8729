use rayon::prelude::*;

use crate::error::{QdError, Result};
use crate::exactla::FpMatrix;
use crate::grmod::{vector_to_column, weights_in_degree, Block, Generator, GradedMap, GradedModulePresentation};
use crate::polyring::{Polynomial, Weight};

/// A module map given on generators: column `j` is the image of generator
/// `j` of the source, written in the generators of the target.
#[derive(Clone, Debug)]
pub struct ModuleMap {
    pub source: GradedModulePresentation,
    pub target: GradedModulePresentation,
    pub matrix: GradedMap,
}

/// Ranks of one graded piece of a module map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct PieceRanks {
    pub source_dim: usize,
    pub target_dim: usize,
    pub rank: usize,
}

impl ModuleMap {
    pub fn new(
        source: GradedModulePresentation,
        target: GradedModulePresentation,
        matrix: GradedMap,
    ) -> Result<Self> {
        if matrix.source != source.generators() || matrix.target != target.generators() {
            return Err(QdError::ShapeMismatch("map generators differ from module generators".into()));
        }
        let nvars = source.ring().nvars();
        if let Some((i, j)) = matrix.degree_violation(nvars) {
            return Err(QdError::DegreeMismatch(format!("map entry ({i},{j})")));
        }
        Ok(Self { source, target, matrix })
    }

    /// Source relations, target relations, the map, and the source block,
    /// on the `(e, w)` piece. Works over `R` when both modules allow it.
    fn quotient_mode(&self) -> bool {
        self.source.over_quotient() && self.target.over_quotient()
    }

    fn matrices(&self, e: i32, w: Weight, quo: bool) -> (FpMatrix, FpMatrix, FpMatrix, Block) {
        let ring = self.target.ring();
        let (nvars, p) = (ring.nvars(), ring.modulus());
        let (trel, srel) = if quo {
            (self.target.relations().clone(), self.source.relations().clone())
        } else {
            (self.target.effective_map(), self.source.effective_map())
        };
        let tb = Block::choose(&trel.target, e, w, nvars, quo);
        let sb = Block::choose(&srel.target, e, w, nvars, quo);
        let phi_t = trel.evaluate_on(&Block::choose(&trel.source, e, w, nvars, quo), &tb, p);
        let phi_s = srel.evaluate_on(&Block::choose(&srel.source, e, w, nvars, quo), &sb, p);
        let f = self.matrix.evaluate_on(&sb, &tb, p);
        (phi_s, phi_t, f, sb)
    }

    fn block_ranks(&self, e: i32, w: Weight) -> (PieceRanks, bool) {
        let (phi_s, phi_t, f, sb) = self.matrices(e, w, self.quotient_mode());
        let rt = phi_t.rank();
        let rank = phi_t.hcat(&f).rank() - rt;
        // relations of the source must land in the relations of the target
        let fphi = f.mul(&phi_s).expect("shapes agree");
        let well_defined = phi_t.hcat(&fphi).rank() == rt;
        (
            PieceRanks {
                source_dim: sb.len - phi_s.rank(),
                target_dim: phi_t.rows() - rt,
                rank,
            },
            well_defined,
        )
    }

    /// Ranks on the degree-`e` piece, summed over weights; errors when the
    /// matrix does not respect relations.
    pub fn piece(&self, e: i32) -> Result<PieceRanks> {
        let nvars = self.source.ring().nvars();
        let mut ws = weights_in_degree(self.source.generators(), e, nvars, 1);
        ws.extend(weights_in_degree(self.target.generators(), e, nvars, 1));
        ws.sort_unstable();
        ws.dedup();
        let parts: Vec<(PieceRanks, bool)> = ws.par_iter().map(|&w| self.block_ranks(e, w)).collect();
        if parts.iter().any(|(_, ok)| !ok) {
            return Err(QdError::NotExact(format!("map not well defined in degree {e}")));
        }
        Ok(parts.iter().fold(PieceRanks::default(), |acc, (r, _)| PieceRanks {
            source_dim: acc.source_dim + r.source_dim,
            target_dim: acc.target_dim + r.target_dim,
            rank: acc.rank + r.rank,
        }))
    }

    /// Elements of the source killed by the map in degree `e`, independent
    /// modulo the source relations, as columns on the source generators.
    pub fn kernel_columns(&self, e: i32) -> Vec<(Generator, Vec<(usize, Polynomial)>)> {
        let ring = self.source.ring();
        let (nvars, p) = (ring.nvars(), ring.modulus());
        let ws = weights_in_degree(self.source.generators(), e, nvars, 1);
        let per_weight: Vec<Vec<(Generator, Vec<(usize, Polynomial)>)>> = ws
            .par_iter()
            .map(|&w| {
                let (phi_s, phi_t, f, sb) = self.matrices(e, w, self.quotient_mode());
                let ker = f.hcat(&phi_t).kernel_basis();
                let rows: Vec<usize> = (0..sb.len).collect();
                let ker = ker.transpose().select_columns(&rows).transpose();
                if ker.cols() == 0 || ker.is_zero() {
                    return Vec::new();
                }
                let red = phi_s.hcat(&ker).rank_and_reduce();
                red.pivots
                    .iter()
                    .filter(|&&c| c >= phi_s.cols())
                    .map(|&c| (Generator::new(e, w), vector_to_column(&sb, &ker.column(c - phi_s.cols()), p)))
                    .collect()
            })
            .collect();
        per_weight.into_iter().flatten().collect()
    }

    /// The same map with its source replaced by the image, found by adding
    /// kernel elements as relations in degrees `lo..=hi`. Returns the map
    /// and the number of relations added per degree.
    ///
    /// The scan stops after `quiet` consecutive degrees without kernel, so
    /// this suits maps whose kernel has finite length; injectivity above
    /// that point is left to the caller's checks.
    pub fn onto_image(&self, lo: i32, hi: i32, quiet: i32) -> Result<(ModuleMap, Vec<(i32, usize)>)> {
        let mut map = self.clone();
        let mut added: Vec<(i32, usize)> = Vec::new();
        for e in lo..=hi {
            if e - added.last().map_or(lo - 1, |a| a.0) > quiet {
                break;
            }
            let cols = map.kernel_columns(e);
            if !cols.is_empty() {
                added.push((e, cols.len()));
                let source = map.source.with_relations(cols)?;
                map = ModuleMap::new(source, map.target, map.matrix)?;
            }
        }
        Ok((map, added))
    }

    pub fn compose(&self, first: &ModuleMap) -> Result<ModuleMap> {
        ModuleMap::new(first.source.clone(), self.target.clone(), self.matrix.compose(&first.matrix))
    }
}

/// `0 -> left -> middle -> right -> 0` with its two maps.
#[derive(Clone, Debug)]
pub struct ShortExactSequenceSpec {
    pub f: ModuleMap,
    pub g: ModuleMap,
    /// Internal degrees checked by [`Self::verify`].
    pub bound: i32,
}

impl ShortExactSequenceSpec {
    pub fn left(&self) -> &GradedModulePresentation {
        &self.f.source
    }

    pub fn middle(&self) -> &GradedModulePresentation {
        &self.f.target
    }

    pub fn right(&self) -> &GradedModulePresentation {
        &self.g.target
    }

    /// Rank checks on one `(e, w)` piece: both maps well defined, `g f = 0`,
    /// `f` injective, `g` surjective and `rank f + rank g = dim middle`.
    fn piece_exact(&self, e: i32, w: Weight) -> std::result::Result<(), String> {
        let quo = self.f.quotient_mode() && self.g.quotient_mode();
        let (phi_l, phi_m, f, lb) = self.f.matrices(e, w, quo);
        let (_, phi_r, g, _) = self.g.matrices(e, w, quo);
        let (rl, rm, rr) = (phi_l.rank(), phi_m.rank(), phi_r.rank());
        let rank_f = phi_m.hcat(&f).rank() - rm;
        let rank_g = phi_r.hcat(&g).rank() - rr;
        let dims = (lb.len - rl, phi_m.rows() - rm, phi_r.rows() - rr);
        let mul = |a: &FpMatrix, b: &FpMatrix| a.mul(b).expect("shapes agree");
        let f_ok = phi_m.hcat(&mul(&f, &phi_l)).rank() == rm;
        let g_ok = phi_r.hcat(&mul(&g, &phi_m)).rank() == rr;
        let gf_zero = phi_r.hcat(&mul(&g, &f)).rank() == rr;
        if f_ok && g_ok && gf_zero && rank_f == dims.0 && rank_g == dims.2 && rank_f + rank_g == dims.1 {
            Ok(())
        } else {
            Err(format!(
                "degree {e} weight {w:?}: dims {dims:?}, ranks f {rank_f} g {rank_g}, \
                 well defined {f_ok}/{g_ok}, composite zero {gf_zero}"
            ))
        }
    }

    /// Exactness on every piece from `lo` to the bound.
    pub fn verify_from(&self, lo: i32) -> Result<()> {
        let nvars = self.middle().ring().nvars();
        for e in lo..=self.bound {
            let mut ws = Vec::new();
            for m in [self.left(), self.middle(), self.right()] {
                ws.extend(weights_in_degree(m.generators(), e, nvars, 1));
            }
            ws.sort_unstable();
            ws.dedup();
            let failures: Vec<String> = ws
                .par_iter()
                .filter_map(|&w| self.piece_exact(e, w).err())
                .collect();
            if let Some(msg) = failures.into_iter().next() {
                return Err(QdError::NotExact(msg));
            }
        }
        Ok(())
    }

    pub fn verify(&self) -> Result<()> {
        let lo = [self.left(), self.middle(), self.right()]
            .iter()
            .flat_map(|m| m.generators().iter().map(|g| g.degree))
            .min()
            .unwrap_or(0);
        self.verify_from(lo)
    }
}
