use crate::error::{QdError, Result};
use crate::grmod::kernel::kernel_module;
use crate::grmod::{multisets, Generator, GradedMap, GradedModulePresentation};
use crate::polyring::{add_weight, variable_weight, Polynomial, RingSpec, ZERO_WEIGHT};

use super::mf::MatrixFactorization;
use super::ses::{ModuleMap, ShortExactSequenceSpec};

/// Internal-degree bound used for exactness checks on catalog sequences.
pub fn validity_bound(n: usize, p: u32) -> i32 {
    3 * p as i32 + 2 * n as i32 + 6
}

fn unit(p: u32) -> Polynomial {
    Polynomial::constant(1, p)
}

/// Sets source weights from the first nonzero entry of each column.
fn fill_source_weights(map: &mut GradedMap, nvars: usize) {
    for (j, col) in map.columns.iter().enumerate() {
        if let Some((i, f)) = col.first() {
            let w = f.weight(nvars).expect("homogeneous entry");
            map.source[j].weight = add_weight(map.target[*i].weight, w);
        }
    }
}

/// `0 -> coker(B)(-1) -> R^s -> coker(A) -> 0`: for `n = 3` this is
/// `0 -> U -> V ⊗ O -> U^* -> 0`, for `n = 4` its analogue with the two
/// spinor modules.
pub fn tautological_ses(n: usize, p: u32) -> Result<ShortExactSequenceSpec> {
    tautological_ses_for(n, p, false)
}

/// The tautological sequence with the two factors of the matrix
/// factorization exchanged when `swap` is set:
/// `0 -> coker(A)(-1) -> R^s -> coker(B) -> 0`.
pub fn tautological_ses_for(n: usize, p: u32, swap: bool) -> Result<ShortExactSequenceSpec> {
    let mut mf = MatrixFactorization::new(n, p)?;
    if swap {
        std::mem::swap(&mut mf.a, &mut mf.b);
    }
    let ring = mf.ring.clone();
    let nvars = ring.nvars();
    let right = mf.coker_a()?;
    let s = mf.size();
    let middle = GradedModulePresentation::new(ring.clone(), GradedMap::new(right.generators().to_vec()), true)?;

    let left_gens = right.relations().source.clone();
    let mut lmap = GradedMap::new(left_gens.clone());
    for k in 0..s {
        let col = (0..s).map(|j| (j, mf.b[j][k].clone())).collect();
        lmap.push_column(Generator::new(2, ZERO_WEIGHT), col);
    }
    fill_source_weights(&mut lmap, nvars);
    let left = GradedModulePresentation::new(ring.clone(), lmap, true)?;

    let mut fm = GradedMap::new(middle.generators().to_vec());
    for (j, g) in left_gens.iter().enumerate() {
        fm.push_column(*g, (0..s).map(|i| (i, mf.a[i][j].clone())).collect());
    }
    let mut gm = GradedMap::new(right.generators().to_vec());
    for (i, g) in middle.generators().iter().enumerate() {
        gm.push_column(*g, vec![(i, unit(p))]);
    }
    Ok(ShortExactSequenceSpec {
        f: ModuleMap::new(left, middle.clone(), fm)?,
        g: ModuleMap::new(middle, right, gm)?,
        bound: validity_bound(n, p),
    })
}

/// `0 -> F^*Σ -> Sym^p Σ -> Q -> 0` with `e_i -> e_i^p` and `Q` the induced
/// quotient, for the rank-2 spinor module `Σ = U^*`. The left module is the
/// image of the map; it differs from the naive Frobenius pullback only in
/// finitely many degrees.
pub fn carter_lusztig_ses(n: usize, p: u32) -> Result<ShortExactSequenceSpec> {
    carter_lusztig_ses_for(n, p, false)
}

/// The same sequence for `coker(B)` when `minus` is set.
pub fn carter_lusztig_ses_for(n: usize, p: u32, minus: bool) -> Result<ShortExactSequenceSpec> {
    if !(3..=4).contains(&n) {
        return Err(QdError::DimensionOutOfRange(n));
    }
    let mf = MatrixFactorization::new(n, p)?;
    let sigma = if minus { mf.coker_b()? } else { mf.coker_a()? };
    let left = sigma.frobenius_pullback();
    let middle = sigma.sym_power(p as usize);
    let r = sigma.generators().len();
    let nvars = sigma.ring().nvars();
    let index = multisets(r, p as usize);
    let pos = |i: usize| {
        index
            .iter()
            .position(|m| m.iter().all(|&x| x == i))
            .expect("pure power present")
    };
    let mut fm = GradedMap::new(middle.generators().to_vec());
    for (i, g) in left.generators().iter().enumerate() {
        fm.push_column(*g, vec![(pos(i), unit(p))]);
    }
    let extra = (0..r)
        .map(|i| (middle.generators()[pos(i)], vec![(pos(i), unit(p))]))
        .collect();
    let right = middle.with_relations(extra)?;
    let mut gm = GradedMap::new(right.generators().to_vec());
    for (i, g) in middle.generators().iter().enumerate() {
        gm.push_column(*g, vec![(i, unit(p))]);
    }
    // the presentation of F^*Σ carries finite-length torsion that the
    // p-th power map kills, so the left term is the image; observed kernels
    // sit in a single degree at most p + 2, and verify() checks the rest
    let bound = validity_bound(n, p);
    let lo = left.generators().iter().map(|g| g.degree).min().unwrap_or(0);
    let (f, _) = ModuleMap::new(left, middle.clone(), fm)?.onto_image(lo, bound, p as i32 + nvars as i32)?;
    Ok(ShortExactSequenceSpec {
        f,
        g: ModuleMap::new(middle, right, gm)?,
        bound,
    })
}

/// Subsets of `0..m` of size `k` in lexicographic order.
pub fn subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(m: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            go(m, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(m, k, 0, &mut Vec::new(), &mut out);
    out
}

fn exterior_gens(nvars: usize, j: usize, i: usize) -> Vec<Generator> {
    subsets(nvars, j)
        .iter()
        .map(|s| {
            let w = s
                .iter()
                .fold(ZERO_WEIGHT, |acc, &k| add_weight(acc, variable_weight(k, nvars)));
            Generator::new(j as i32 - i as i32, w)
        })
        .collect()
}

/// Koszul differential `Λ^j V' ⊗ R(j-i) -> Λ^{j-1} V' ⊗ R(j-1-i)`.
pub fn koszul_map(ring: &RingSpec, j: usize, i: usize) -> GradedMap {
    let nvars = ring.nvars();
    let p = ring.modulus();
    let lower = subsets(nvars, j - 1);
    let mut map = GradedMap::new(exterior_gens(nvars, j - 1, i));
    for (src, g) in subsets(nvars, j).iter().zip(exterior_gens(nvars, j, i)) {
        let col = src
            .iter()
            .enumerate()
            .map(|(t, &k)| {
                let mut rest = src.clone();
                rest.remove(t);
                let row = lower.iter().position(|s| *s == rest).expect("subset present");
                let x = Polynomial::var(k, p);
                (row, if t % 2 == 0 { x } else { x.neg() })
            })
            .collect();
        map.push_column(g, col);
    }
    map
}

/// `Ψ_i` with its right resolution by `B_j ⊗ O(i-j)`, `B_j = Λ^j V'`.
#[derive(Clone, Debug)]
pub struct PsiData {
    pub i: usize,
    pub module: GradedModulePresentation,
    /// Inclusion `Ψ_i -> B_i ⊗ R`.
    pub inclusion: ModuleMap,
    /// `koszul[k]` maps `B_{i-k} ⊗ R(k)` to `B_{i-k-1} ⊗ R(k+1)`.
    pub koszul: Vec<ModuleMap>,
    pub bound: i32,
}

impl PsiData {
    /// `dim B_j`.
    pub fn b_dims(&self) -> Vec<usize> {
        let nvars = self.module.ring().nvars() as i64;
        (0..=self.i)
            .map(|j| crate::polyring::binomial(nvars, j as i64) as usize)
            .collect()
    }

    /// Exactness of `0 -> Ψ -> B_i ⊗ R -> ... -> B_0 ⊗ R(i) -> 0` on the
    /// pieces `1 <= e <= bound`.
    pub fn verify(&self) -> Result<()> {
        for e in 1..=self.bound {
            let inc = self.inclusion.piece(e)?;
            let ranks = self
                .koszul
                .iter()
                .map(|k| k.piece(e))
                .collect::<Result<Vec<_>>>()?;
            let mut ok = inc.rank == inc.source_dim && inc.rank + ranks[0].rank == inc.target_dim;
            for w in ranks.windows(2) {
                ok &= w[0].rank + w[1].rank == w[0].target_dim;
            }
            let last = ranks.last().expect("i >= 1");
            ok &= last.rank == last.target_dim;
            if !ok {
                return Err(QdError::NotExact(format!("Ψ resolution fails in degree {e}")));
            }
        }
        Ok(())
    }
}

pub fn psi_module(n: usize, i: usize, p: u32) -> Result<PsiData> {
    if i == 0 || i >= n {
        return Err(QdError::Unsupported(format!("Ψ_{i} needs 1 <= i <= n-1")));
    }
    let ring = RingSpec::quadric(n, p)?;
    let free = |gens: &[Generator]| GradedModulePresentation::new(ring.clone(), GradedMap::new(gens.to_vec()), true);
    let kappa_i = koszul_map(&ring, i, i);
    let (module, incl) = kernel_module(&ring, &kappa_i, true, 6, 9)?;
    let top = free(&kappa_i.source)?;
    let inclusion = ModuleMap::new(module.clone(), top, incl)?;
    let koszul = (1..=i)
        .rev()
        .map(|j| {
            let k = koszul_map(&ring, j, i);
            ModuleMap::new(free(&k.source)?, free(&k.target)?, k)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PsiData {
        i,
        module,
        inclusion,
        koszul,
        bound: validity_bound(n, p),
    })
}
