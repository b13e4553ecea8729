use crate::error::{QdError, Result};
use crate::grmod::{Generator, GradedMap, GradedModulePresentation};
use crate::polyring::{Polynomial, RingSpec, ZERO_WEIGHT};

/// Square matrices `A`, `B` of linear forms with `A B = B A = q I`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixFactorization {
    pub ring: RingSpec,
    pub a: Vec<Vec<Polynomial>>,
    pub b: Vec<Vec<Polynomial>>,
}

fn block(
    tl: &[Vec<Polynomial>],
    u: &Polynomial,
    v: &Polynomial,
    br: &[Vec<Polynomial>],
    p: u32,
) -> Vec<Vec<Polynomial>> {
    let s = tl.len();
    let mut out = vec![vec![Polynomial::zero(p); 2 * s]; 2 * s];
    for i in 0..s {
        for j in 0..s {
            out[i][j] = tl[i][j].clone();
            out[s + i][s + j] = br[i][j].neg();
        }
        out[i][s + i] = u.clone();
        out[s + i][i] = v.clone();
    }
    out
}

fn mat_mul(x: &[Vec<Polynomial>], y: &[Vec<Polynomial>], p: u32) -> Vec<Vec<Polynomial>> {
    let s = x.len();
    (0..s)
        .map(|i| {
            (0..s)
                .map(|j| (0..s).fold(Polynomial::zero(p), |acc, k| acc.add(&x[i][k].mul(&y[k][j]))))
                .collect()
        })
        .collect()
}

impl MatrixFactorization {
    /// Knörrer doubling over the pairs `(x_{2k}, x_{2k+1})`, starting from
    /// `(x)(x)` for a trailing square or `(x)(y)` for a trailing product.
    pub fn new(n: usize, p: u32) -> Result<Self> {
        if !(1..=4).contains(&n) {
            return Err(QdError::DimensionOutOfRange(n));
        }
        let ring = RingSpec::quadric(n, p)?;
        let nvars = n + 2;
        let x = |i: usize| Polynomial::var(i, p);
        let (mut a, mut b, mut rest) = if nvars % 2 == 1 {
            (vec![vec![x(nvars - 1)]], vec![vec![x(nvars - 1)]], nvars - 1)
        } else {
            (vec![vec![x(nvars - 2)]], vec![vec![x(nvars - 1)]], nvars - 2)
        };
        while rest > 0 {
            let (u, v) = (x(rest - 2), x(rest - 1));
            let na = block(&a, &u, &v, &b, p);
            let nb = block(&b, &u, &v, &a, p);
            a = na;
            b = nb;
            rest -= 2;
        }
        Ok(Self { ring, a, b })
    }

    pub fn size(&self) -> usize {
        self.a.len()
    }

    pub fn ab(&self) -> Vec<Vec<Polynomial>> {
        mat_mul(&self.a, &self.b, self.ring.modulus())
    }

    pub fn ba(&self) -> Vec<Vec<Polynomial>> {
        mat_mul(&self.b, &self.a, self.ring.modulus())
    }

    /// Symbolic check of `A B = B A = q I`.
    pub fn is_valid(&self) -> bool {
        let q = self.ring.quadric_poly().expect("quadric ring");
        let s = self.size();
        [self.ab(), self.ba()].iter().all(|m| {
            (0..s).all(|i| {
                (0..s).all(|j| {
                    if i == j {
                        &m[i][j] == q
                    } else {
                        m[i][j].is_zero()
                    }
                })
            })
        })
    }

    /// `coker(M)` with generators in degree 0, annihilated by `q`.
    fn coker(&self, m: &[Vec<Polynomial>]) -> Result<GradedModulePresentation> {
        let s = m.len();
        let mut map = GradedMap::new(vec![Generator::new(0, ZERO_WEIGHT); s]);
        for j in 0..s {
            let col = (0..s).map(|i| (i, m[i][j].clone())).collect();
            map.push_column(Generator::new(1, ZERO_WEIGHT), col);
        }
        GradedModulePresentation::assign_weights(&self.ring, &mut map)?;
        GradedModulePresentation::new(self.ring.clone(), map, true)
    }

    pub fn coker_a(&self) -> Result<GradedModulePresentation> {
        self.coker(&self.a)
    }

    pub fn coker_b(&self) -> Result<GradedModulePresentation> {
        self.coker(&self.b)
    }
}

pub fn matrix_factorization(n: usize, p: u32) -> Result<MatrixFactorization> {
    MatrixFactorization::new(n, p)
}

/// The spinor modules: `coker(A)` and `coker(B)`. For odd `n` the two are
/// isomorphic up to presentation and callers use the first.
pub fn spinor_modules(n: usize, p: u32) -> Result<(GradedModulePresentation, GradedModulePresentation)> {
    let mf = MatrixFactorization::new(n, p)?;
    Ok((mf.coker_a()?, mf.coker_b()?))
}

/// `U^* = Σ` (the first spinor module).
pub fn ustar(n: usize, p: u32) -> Result<GradedModulePresentation> {
    Ok(spinor_modules(n, p)?.0)
}

/// `U = Σ(-1)`.
pub fn u_bundle(n: usize, p: u32) -> Result<GradedModulePresentation> {
    Ok(ustar(n, p)?.twist(-1))
}
