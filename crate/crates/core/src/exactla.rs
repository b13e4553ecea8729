//! Dense linear algebra over a prime field F_p.
//!
//! Everything downstream (graded pieces, resolutions, Ext groups) reduces to
//! ranks, kernels and cokernels of matrices built here. Pivoting is
//! deterministic: the first nonzero entry in column order wins, so reduced
//! forms and chosen bases are reproducible bit for bit.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{QdError, Result};

/// Checks that `p` is a prime in the supported range `2 <= p < 2^31`.
pub fn check_prime(p: u32) -> Result<()> {
    if p < 2 || p >= (1 << 31) {
        return Err(QdError::InvalidPrime(p));
    }
    let mut d = 2u64;
    while d * d <= p as u64 {
        if p as u64 % d == 0 {
            return Err(QdError::InvalidPrime(p));
        }
        d += 1;
    }
    Ok(())
}

#[inline]
pub(crate) fn mul_mod(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 * b as u64) % p as u64) as u32
}

#[inline]
pub(crate) fn add_mod(a: u32, b: u32, p: u32) -> u32 {
    let s = a as u64 + b as u64;
    if s >= p as u64 {
        (s - p as u64) as u32
    } else {
        s as u32
    }
}

#[inline]
pub(crate) fn neg_mod(a: u32, p: u32) -> u32 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

pub(crate) fn pow_mod(mut base: u32, mut exp: u64, p: u32) -> u32 {
    let mut acc = 1 % p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Inverse of a nonzero residue.
pub(crate) fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(a % p != 0, "inverse of zero");
    // extended Euclid on i64
    let (mut r0, mut r1) = (p as i64, a as i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    t0.rem_euclid(p as i64) as u32
}

/// Reduces a signed integer into `[0, p)`.
pub fn reduce_signed(v: i64, p: u32) -> u32 {
    v.rem_euclid(p as i64) as u32
}

/// An element of F_p carrying its modulus.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FpScalar {
    value: u32,
    modulus: u32,
}

impl FpScalar {
    pub fn new(value: i64, modulus: u32) -> Self {
        Self {
            value: reduce_signed(value, modulus),
            modulus,
        }
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn modulus(self) -> u32 {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn inv(self) -> Option<Self> {
        (self.value != 0).then(|| Self {
            value: inv_mod(self.value, self.modulus),
            modulus: self.modulus,
        })
    }

    pub fn pow(self, e: u64) -> Self {
        Self {
            value: pow_mod(self.value, e, self.modulus),
            modulus: self.modulus,
        }
    }
}

impl fmt::Debug for FpScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

impl std::ops::Add for FpScalar {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        debug_assert_eq!(self.modulus, rhs.modulus);
        Self {
            value: add_mod(self.value, rhs.value, self.modulus),
            modulus: self.modulus,
        }
    }
}

impl std::ops::Sub for FpScalar {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl std::ops::Neg for FpScalar {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            value: neg_mod(self.value, self.modulus),
            modulus: self.modulus,
        }
    }
}

impl std::ops::Mul for FpScalar {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        debug_assert_eq!(self.modulus, rhs.modulus);
        Self {
            value: mul_mod(self.value, rhs.value, self.modulus),
            modulus: self.modulus,
        }
    }
}

/// Dense row-major matrix over F_p.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FpMatrix {
    rows: usize,
    cols: usize,
    p: u32,
    data: Vec<u32>,
}

/// Output of [`FpMatrix::rank_and_reduce`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub rank: usize,
    pub rref: FpMatrix,
    pub pivots: Vec<usize>,
}

/// Output of [`FpMatrix::cokernel_data`]: `projection` is `dim x rows` and
/// annihilates the column space of the input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cokernel {
    pub dim: usize,
    pub projection: FpMatrix,
}

impl FpMatrix {
    pub fn zeros(rows: usize, cols: usize, p: u32) -> Self {
        Self {
            rows,
            cols,
            p,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize, p: u32) -> Self {
        let mut m = Self::zeros(n, n, p);
        for i in 0..n {
            m.data[i * n + i] = 1 % p;
        }
        m
    }

    /// Builds a matrix from signed integer rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<i64>], p: u32) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols, p);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged row {i}");
            for (j, &v) in row.iter().enumerate() {
                m.data[i * cols + j] = reduce_signed(v, p);
            }
        }
        m
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, p: u32, data: Vec<u32>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, p, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v % self.p;
    }

    pub fn scalar(&self, i: usize, j: usize) -> FpScalar {
        FpScalar::new(self.get(i, j) as i64, self.p)
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u32> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows, self.p);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn mul(&self, rhs: &FpMatrix) -> Result<FpMatrix> {
        if self.cols != rhs.rows || self.p != rhs.p {
            return Err(QdError::ShapeMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let p = self.p as u64;
        let mut out = Self::zeros(self.rows, rhs.cols, self.p);
        let mut acc = vec![0u64; rhs.cols];
        for i in 0..self.rows {
            acc.iter_mut().for_each(|a| *a = 0);
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k] as u64;
                if a == 0 {
                    continue;
                }
                for (j, slot) in acc.iter_mut().enumerate() {
                    *slot = (*slot + a * rhs.data[k * rhs.cols + j] as u64) % p;
                }
            }
            for j in 0..rhs.cols {
                out.data[i * rhs.cols + j] = acc[j] as u32;
            }
        }
        Ok(out)
    }

    /// Horizontal concatenation `[self | rhs]`.
    pub fn hcat(&self, rhs: &FpMatrix) -> FpMatrix {
        assert_eq!(self.rows, rhs.rows);
        let cols = self.cols + rhs.cols;
        let mut out = Self::zeros(self.rows, cols, self.p);
        for i in 0..self.rows {
            out.data[i * cols..i * cols + self.cols].copy_from_slice(self.row(i));
            out.data[i * cols + self.cols..(i + 1) * cols].copy_from_slice(rhs.row(i));
        }
        out
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> FpMatrix {
        let mut out = Self::zeros(self.rows, idx.len(), self.p);
        for i in 0..self.rows {
            for (k, &j) in idx.iter().enumerate() {
                out.data[i * idx.len() + k] = self.get(i, j);
            }
        }
        out
    }

    /// Reduced row-echelon form, rank and pivot columns.
    pub fn rank_and_reduce(&self) -> Reduction {
        let mut rref = self.clone();
        let pivots = rref.eliminate(true);
        Reduction {
            rank: pivots.len(),
            rref,
            pivots,
        }
    }

    /// Rank only; skips back-substitution. Sparse matrices go through
    /// [`FpMatrix::sparse_rank`].
    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        let nnz = self.data.iter().filter(|&&v| v != 0).count();
        if nnz * 64 < self.data.len() {
            if let Some(r) = self.sparse_rank_bounded(self.data.len() / 16) {
                return r;
            }
        }
        let mut work = self.clone();
        work.eliminate(false).len()
    }

    /// Rank by inserting sparse rows, shortest first, into a pivot table
    /// keyed by leading column.
    pub fn sparse_rank(&self) -> usize {
        self.sparse_rank_bounded(usize::MAX).expect("unbounded")
    }

    /// [`FpMatrix::sparse_rank`], giving up with `None` once the stored
    /// pivot rows hold more than `fill` entries.
    fn sparse_rank_bounded(&self, fill: usize) -> Option<usize> {
        let p = self.p;
        let mut rows: Vec<Vec<(u32, u32)>> = (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0)
                    .map(|(j, &v)| (j as u32, v))
                    .collect::<Vec<_>>()
            })
            .filter(|r| !r.is_empty())
            .collect();
        rows.sort_by_key(Vec::len);
        let mut pivot: Vec<Option<Vec<(u32, u32)>>> = vec![None; self.cols];
        let mut rank = 0;
        let mut stored = 0;
        let mut scratch = Vec::new();
        for mut row in rows {
            while let Some(&(c, v)) = row.first() {
                match &pivot[c as usize] {
                    Some(prow) => {
                        // row - v * prow, where prow leads with 1
                        sparse_axpy(&row, prow, p - v, p, &mut scratch);
                        std::mem::swap(&mut row, &mut scratch);
                    }
                    None => {
                        let inv = inv_mod(v, p);
                        for e in row.iter_mut() {
                            e.1 = mul_mod(e.1, inv, p);
                        }
                        stored += row.len();
                        if stored > fill {
                            return None;
                        }
                        pivot[c as usize] = Some(row);
                        rank += 1;
                        break;
                    }
                }
            }
        }
        Some(rank)
    }

    /// Columns of the result span the null space `{x : A x = 0}`.
    pub fn kernel_basis(&self) -> FpMatrix {
        let red = self.rank_and_reduce();
        let free: Vec<usize> = (0..self.cols)
            .filter(|c| red.pivots.binary_search(c).is_err())
            .collect();
        let mut k = Self::zeros(self.cols, free.len(), self.p);
        for (col, &f) in free.iter().enumerate() {
            k.data[f * free.len() + col] = 1 % self.p;
            for (r, &pc) in red.pivots.iter().enumerate() {
                let v = red.rref.get(r, f);
                k.data[pc * free.len() + col] = neg_mod(v, self.p);
            }
        }
        k
    }

    /// Dimension of `F_p^rows / colspace(A)` plus a projection onto it.
    ///
    /// The quotient basis is the set of coordinates that are not pivots of
    /// the reduced form of `Aᵗ`.
    pub fn cokernel_data(&self) -> Cokernel {
        let red = self.transpose().rank_and_reduce();
        let free: Vec<usize> = (0..self.rows)
            .filter(|c| red.pivots.binary_search(c).is_err())
            .collect();
        // e_pc ≡ -Σ_f rref[r][f] e_f modulo the column space
        let mut proj = Self::zeros(free.len(), self.rows, self.p);
        let pos_of: std::collections::HashMap<usize, usize> =
            free.iter().enumerate().map(|(k, &f)| (f, k)).collect();
        for &f in &free {
            proj.data[pos_of[&f] * self.rows + f] = 1 % self.p;
        }
        for (r, &pc) in red.pivots.iter().enumerate() {
            for &f in &free {
                let v = red.rref.get(r, f);
                if v != 0 {
                    proj.data[pos_of[&f] * self.rows + pc] = neg_mod(v, self.p);
                }
            }
        }
        Cokernel {
            dim: free.len(),
            projection: proj,
        }
    }

    /// Gaussian elimination in place; returns pivot columns. With `full`
    /// the result is the reduced row-echelon form.
    fn eliminate(&mut self, full: bool) -> Vec<usize> {
        eliminate_rows(&mut self.data, self.rows, self.cols, self.p, full)
    }
}

/// `out = a + m * b` on sorted sparse vectors.
fn sparse_axpy(a: &[(u32, u32)], b: &[(u32, u32)], m: u32, p: u32, out: &mut Vec<(u32, u32)>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ca = a.get(i).map_or(u32::MAX, |e| e.0);
        let cb = b.get(j).map_or(u32::MAX, |e| e.0);
        if ca < cb {
            out.push(a[i]);
            i += 1;
        } else if cb < ca {
            out.push((cb, mul_mod(m, b[j].1, p)));
            j += 1;
        } else {
            let v = add_mod(a[i].1, mul_mod(m, b[j].1, p), p);
            if v != 0 {
                out.push((ca, v));
            }
            i += 1;
            j += 1;
        }
    }
}

/// Reduction modulo a fixed small prime without division.
#[derive(Clone, Copy)]
struct Barrett {
    p: u32,
    r: u64,
}

impl Barrett {
    fn new(p: u32) -> Self {
        Self {
            p,
            r: (1u64 << 32) / p as u64,
        }
    }

    /// `x mod p` for any `x < 2^32`.
    #[inline]
    fn reduce(self, x: u32) -> u32 {
        let q = ((x as u64 * self.r) >> 32) as u32;
        let t = x - q * self.p;
        if t >= self.p {
            t - self.p
        } else {
            t
        }
    }
}

/// Row reduction on a raw row-major buffer. Shared with the block solvers in
/// `grmod`, which build their matrices directly in this layout.
pub(crate) fn eliminate_rows(
    data: &mut [u32],
    rows: usize,
    cols: usize,
    p: u32,
    full: bool,
) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    let pm = p as u64;
    let barrett = Barrett::new(p);
    let small = p < 1 << 16;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| data[i * cols + c] != 0) else {
            continue;
        };
        if piv != r {
            for k in c..cols {
                data.swap(piv * cols + k, r * cols + k);
            }
        }
        let inv = inv_mod(data[r * cols + c], p) as u64;
        if inv != 1 {
            for k in c..cols {
                let v = data[r * cols + k];
                if v != 0 {
                    data[r * cols + k] = ((v as u64 * inv) % pm) as u32;
                }
            }
        }
        let (head, tail) = data.split_at_mut(r * cols);
        let (pivot_row, below) = tail.split_at_mut(cols);
        // the pivot row is usually sparse; for p < 2^16 the update
        // row + m * pv stays below 2^32
        let support: Vec<(usize, u32)> = (c..cols)
            .filter(|&k| pivot_row[k] != 0)
            .map(|k| (k, pivot_row[k]))
            .collect();
        let dense = support.len() * 4 > cols - c;
        let reduce = |row: &mut [u32]| {
            let f = row[c];
            if f == 0 {
                return;
            }
            let m = p - f;
            if small && dense {
                // contiguous so the loop vectorizes
                for (x, &pv) in row[c..].iter_mut().zip(&pivot_row[c..]) {
                    *x = barrett.reduce(*x + m * pv);
                }
            } else if small {
                for &(k, pv) in &support {
                    row[k] = barrett.reduce(row[k] + m * pv);
                }
            } else {
                for &(k, pv) in &support {
                    row[k] = ((row[k] as u64 + m as u64 * pv as u64) % pm) as u32;
                }
            }
        };
        for row in below.chunks_mut(cols) {
            reduce(row);
        }
        if full {
            for row in head.chunks_mut(cols) {
                reduce(row);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

impl fmt::Debug for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FpMatrix {}x{} over F_{}", self.rows, self.cols, self.p)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_over_f2_has_full_rank() {
        let red = FpMatrix::identity(2, 2).rank_and_reduce();
        assert_eq!(red.rank, 2);
        assert_eq!(red.pivots, vec![0, 1]);
    }

    #[test]
    fn zero_matrix_rank_zero() {
        assert_eq!(FpMatrix::zeros(3, 4, 5).rank_and_reduce().rank, 0);
        assert_eq!(FpMatrix::zeros(0, 0, 5).rank(), 0);
    }

    #[test]
    fn duplicate_rows() {
        let m = FpMatrix::from_rows(&[vec![1, 1], vec![1, 1]], 2);
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(FpMatrix::identity(4, 7).kernel_basis().cols(), 0);
        let m = FpMatrix::from_rows(&[vec![1, 1]], 3);
        let k = m.kernel_basis();
        assert_eq!(k.cols(), 1);
        // (2,1) spans the same line as (1,2) over F_3
        assert!(m.mul(&k).unwrap().is_zero());
        assert_eq!(k.column(0), vec![2, 1]);
        let m = FpMatrix::from_rows(&[vec![1, 0], vec![0, 0]], 2);
        assert_eq!(m.kernel_basis().column(0), vec![0, 1]);
    }

    #[test]
    fn cokernel_examples() {
        let c = FpMatrix::zeros(3, 1, 5).cokernel_data();
        assert_eq!(c.dim, 3);
        assert_eq!(FpMatrix::identity(3, 5).cokernel_data().dim, 0);
        let m = FpMatrix::from_rows(&[vec![1], vec![1]], 2);
        let c = m.cokernel_data();
        assert_eq!(c.dim, 1);
        assert!(c.projection.mul(&m).unwrap().is_zero());
    }

    #[test]
    fn prime_checks() {
        assert!(check_prime(2).is_ok());
        assert!(check_prime(2_147_483_647).is_ok());
        assert!(check_prime(1 << 31).is_err());
        assert!(check_prime(9).is_err());
        assert!(check_prime(1).is_err());
        assert!(check_prime(65_521).is_ok());
    }

    #[test]
    fn scalar_arithmetic() {
        let a = FpScalar::new(-1, 7);
        assert_eq!(a.value(), 6);
        assert_eq!((a * a).value(), 1);
        assert_eq!(a.inv().unwrap().value(), 6);
        assert_eq!(FpScalar::new(3, 7).pow(6).value(), 1);
        assert!(FpScalar::new(0, 7).inv().is_none());
    }

    fn arb_matrix() -> impl Strategy<Value = FpMatrix> {
        (prop::sample::select(vec![2u32, 3, 5, 7, 101]), 0usize..7, 0usize..7).prop_flat_map(
            |(p, r, c)| {
                prop::collection::vec(0..p, r * c)
                    .prop_map(move |data| FpMatrix::from_raw(r, c, p, data))
            },
        )
    }

    proptest! {
        #[test]
        fn sparse_rank_matches_dense(m in arb_matrix(), keep in 1u32..6) {
            // thin the matrix out so both paths get exercised
            let mut t = m.clone();
            for i in 0..t.rows() {
                for j in 0..t.cols() {
                    if (i * 7 + j * 3) as u32 % keep != 0 {
                        t.set(i, j, 0);
                    }
                }
            }
            let mut dense = t.clone();
            prop_assert_eq!(t.sparse_rank(), dense.eliminate(false).len());
        }

        #[test]
        fn rank_of_transpose(m in arb_matrix()) {
            prop_assert_eq!(m.rank(), m.transpose().rank());
            prop_assert!(m.rank() <= m.rows().min(m.cols()));
        }

        #[test]
        fn rank_nullity(m in arb_matrix()) {
            let k = m.kernel_basis();
            prop_assert_eq!(k.cols() + m.rank(), m.cols());
            prop_assert_eq!(k.rank(), k.cols());
            if m.cols() > 0 && k.cols() > 0 {
                prop_assert!(m.mul(&k).unwrap().is_zero());
            }
        }

        #[test]
        fn cokernel_annihilates_columns(m in arb_matrix()) {
            let c = m.cokernel_data();
            prop_assert_eq!(c.dim, m.rows() - m.rank());
            if c.dim > 0 && m.cols() > 0 {
                prop_assert!(c.projection.mul(&m).unwrap().is_zero());
            }
            prop_assert_eq!(c.projection.rank(), c.dim);
        }

        #[test]
        fn rref_has_same_row_space(m in arb_matrix()) {
            let red = m.rank_and_reduce();
            let stacked_a = m.transpose().hcat(&red.rref.transpose());
            prop_assert_eq!(stacked_a.rank(), red.rank);
            prop_assert_eq!(m.rank(), red.rank);
        }

        #[test]
        fn rank_invariant_under_permutation(m in arb_matrix(), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let mut cols: Vec<usize> = (0..m.cols()).collect();
            cols.shuffle(&mut rng);
            let permuted = m.select_columns(&cols);
            prop_assert_eq!(permuted.rank(), m.rank());
            let mut rows: Vec<usize> = (0..m.rows()).collect();
            rows.shuffle(&mut rng);
            let rp = m.transpose().select_columns(&rows).transpose();
            prop_assert_eq!(rp.rank(), m.rank());
        }
    }
}
