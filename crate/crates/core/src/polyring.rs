//! Homogeneous polynomials over F_p and the quadric ring `R = S/(q)`.
//!
//! Monomials are ordered graded-lex with `x0 > x1 > ...`. The quadric is the
//! split form whose leading monomial is `x0*x1`, so reducing modulo `q` is the
//! single rewrite `x0*x1 -> -(q - x0*x1)`.
//!
//! Besides the total degree, every monomial carries a weight for the maximal
//! torus preserving `q`: the pair `(x_{2k}, x_{2k+1})` has weights `(+e_k, -e_k)`
//! and a trailing unpaired variable has weight zero. All catalog modules are
//! homogeneous for this grading, which lets the module engine split each
//! graded piece into much smaller weight blocks.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{QdError, Result};
use crate::exactla::{add_mod, check_prime, mul_mod, neg_mod, FpMatrix};

pub const MAX_VARS: usize = 6;

/// Torus weight; only the first `nvars / 2` coordinates are ever nonzero.
pub type Weight = [i32; 3];

pub const ZERO_WEIGHT: Weight = [0; 3];

pub fn add_weight(a: Weight, b: Weight) -> Weight {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub_weight(a: Weight, b: Weight) -> Weight {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale_weight(a: Weight, k: i32) -> Weight {
    [a[0] * k, a[1] * k, a[2] * k]
}

/// Weight of the variable `x_i` in a ring with `nvars` variables.
pub fn variable_weight(i: usize, nvars: usize) -> Weight {
    let mut w = ZERO_WEIGHT;
    if i < 2 * (nvars / 2) {
        w[i / 2] = if i % 2 == 0 { 1 } else { -1 };
    }
    w
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Monomial {
    exps: [u16; MAX_VARS],
}

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(i: usize) -> Self {
        let mut m = Self::default();
        m.exps[i] = 1;
        m
    }

    pub fn from_exponents(exps: &[u16]) -> Self {
        assert!(exps.len() <= MAX_VARS);
        let mut m = Self::default();
        m.exps[..exps.len()].copy_from_slice(exps);
        m
    }

    pub fn exponents(&self) -> &[u16; MAX_VARS] {
        &self.exps
    }

    pub fn degree(&self) -> i32 {
        self.exps.iter().map(|&e| e as i32).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut m = *self;
        for (a, b) in m.exps.iter_mut().zip(other.exps) {
            *a += b;
        }
        m
    }

    pub fn pow(&self, k: u16) -> Monomial {
        let mut m = *self;
        m.exps.iter_mut().for_each(|e| *e *= k);
        m
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(other.exps).all(|(&a, b)| a <= b)
    }

    /// `other / self`, assuming `self` divides `other`.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        let mut m = *other;
        for (a, b) in m.exps.iter_mut().zip(self.exps) {
            *a -= b;
        }
        m
    }

    pub fn weight(&self, nvars: usize) -> Weight {
        let mut w = ZERO_WEIGHT;
        for k in 0..nvars / 2 {
            w[k] = self.exps[2 * k] as i32 - self.exps[2 * k + 1] as i32;
        }
        w
    }

    /// Packed key, unique for exponents below 1024.
    #[inline]
    pub(crate) fn key(&self) -> u64 {
        self.exps
            .iter()
            .fold(0u64, |acc, &e| (acc << 10) | (e as u64 & 0x3ff))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "x{i}")?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

/// A homogeneous polynomial over F_p. No zero coefficients are stored.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Polynomial {
    p: u32,
    terms: BTreeMap<Monomial, u32>,
}

impl Polynomial {
    pub fn zero(p: u32) -> Self {
        Self {
            p,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: i64, p: u32) -> Self {
        Self::term(Monomial::one(), c, p)
    }

    pub fn term(m: Monomial, c: i64, p: u32) -> Self {
        let mut poly = Self::zero(p);
        poly.add_term(m, crate::exactla::reduce_signed(c, p));
        poly
    }

    pub fn var(i: usize, p: u32) -> Self {
        Self::term(Monomial::var(i), 1, p)
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs; fails if the
    /// terms do not share one degree.
    pub fn from_terms(terms: &[(Vec<u16>, i64)], p: u32) -> Result<Self> {
        let mut poly = Self::zero(p);
        for (e, c) in terms {
            poly.add_term(
                Monomial::from_exponents(e),
                crate::exactla::reduce_signed(*c, p),
            );
        }
        poly.check_homogeneous()?;
        Ok(poly)
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Degree of the leading term; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<i32> {
        self.terms.keys().next().map(Monomial::degree)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, u32)> + '_ {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> u32 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    pub fn leading_monomial(&self) -> Option<Monomial> {
        self.terms.keys().next_back().copied()
    }

    pub fn check_homogeneous(&self) -> Result<()> {
        let mut degs = self.terms.keys().map(Monomial::degree);
        if let Some(d) = degs.next() {
            if degs.any(|e| e != d) {
                return Err(QdError::DegreeMismatch(format!("{self:?} is not homogeneous")));
            }
        }
        Ok(())
    }

    /// The torus weight, if every term has the same one.
    pub fn weight(&self, nvars: usize) -> Option<Weight> {
        let mut ws = self.terms.keys().map(|m| m.weight(nvars));
        let w = ws.next()?;
        ws.all(|v| v == w).then_some(w)
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: u32) {
        if c == 0 {
            return;
        }
        let p = self.p;
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = add_mod(*o.get(), c, p);
                if s == 0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(*m, c);
        }
        out
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            p: self.p,
            terms: self.terms.iter().map(|(m, &c)| (*m, neg_mod(c, self.p))).collect(),
        }
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: u32) -> Polynomial {
        let mut out = Polynomial::zero(self.p);
        for (m, v) in self.terms() {
            out.add_term(*m, mul_mod(v, c, self.p));
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.p);
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                out.add_term(a.mul(b), mul_mod(ca, cb, self.p));
            }
        }
        out
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Polynomial {
        Polynomial {
            p: self.p,
            terms: self.terms.iter().map(|(a, &c)| (a.mul(m), c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut acc = Polynomial::constant(1, self.p);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Formal partial derivative in `x_i`.
    pub fn partial(&self, i: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.p);
        for (m, c) in self.terms() {
            let e = m.exps[i];
            if e == 0 {
                continue;
            }
            let mut d = *m;
            d.exps[i] -= 1;
            out.add_term(d, mul_mod(c, e as u32 % self.p, self.p));
        }
        out
    }

    /// Substitutes zero for every variable in `vars`.
    pub fn restrict_zero(&self, vars: &[usize]) -> Polynomial {
        Polynomial {
            p: self.p,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| vars.iter().all(|&v| m.exps[v] == 0))
                .map(|(m, &c)| (*m, c))
                .collect(),
        }
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if *c != 1 || m.degree() == 0 {
                write!(f, "{c}")?;
                if m.degree() > 0 {
                    write!(f, "*")?;
                }
            }
            if m.degree() > 0 {
                write!(f, "{m:?}")?;
            }
        }
        Ok(())
    }
}

/// `f^p` computed term by term: over F_p the Frobenius is additive and fixes
/// every coefficient.
pub fn frob_power(f: &Polynomial, p: u32) -> Polynomial {
    assert_eq!(f.p, p, "frob_power over a different prime");
    Polynomial {
        p,
        terms: f.terms.iter().map(|(m, &c)| (m.pow(p as u16), c)).collect(),
    }
}

/// The split quadratic form for `Q_n ⊂ P^{n+1}`:
/// `x0 x1 + x2 x3 + ...`, ending in `x_{N-1}^2` when `N = n + 2` is odd.
pub fn quadric_form(n: usize, p: u32) -> Result<Polynomial> {
    if !(1..=4).contains(&n) {
        return Err(QdError::DimensionOutOfRange(n));
    }
    check_prime(p)?;
    let nvars = n + 2;
    let mut q = Polynomial::zero(p);
    for k in 0..nvars / 2 {
        q.add_term(Monomial::var(2 * k).mul(&Monomial::var(2 * k + 1)), 1);
    }
    if nvars % 2 == 1 {
        q.add_term(Monomial::var(nvars - 1).pow(2), 1);
    }
    Ok(q)
}

/// Variables, prime and (optionally) the quadric.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RingSpec {
    nvars: usize,
    p: u32,
    quadric: Option<Polynomial>,
}

impl fmt::Debug for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.quadric {
            Some(q) => write!(f, "RingSpec(Q_{} over F_{}, q = {q:?})", self.nvars - 2, self.p),
            None => write!(f, "RingSpec(P^{} over F_{})", self.nvars - 1, self.p),
        }
    }
}

impl RingSpec {
    /// The ring of `Q_n`: `n + 2` variables with the split quadric, which is
    /// checked to be smooth.
    pub fn quadric(n: usize, p: u32) -> Result<Self> {
        let q = quadric_form(n, p)?;
        let spec = Self {
            nvars: n + 2,
            p,
            quadric: Some(q),
        };
        if !spec.is_smooth() {
            return Err(QdError::Unsupported(format!("singular quadric for n={n}, p={p}")));
        }
        Ok(spec)
    }

    /// Ambient polynomial ring only (projective space `P^{nvars-1}`).
    pub fn ambient(nvars: usize, p: u32) -> Result<Self> {
        check_prime(p)?;
        if nvars == 0 || nvars > MAX_VARS {
            return Err(QdError::Unsupported(format!("{nvars} variables")));
        }
        Ok(Self {
            nvars,
            p,
            quadric: None,
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn quadric_poly(&self) -> Option<&Polynomial> {
        self.quadric.as_ref()
    }

    pub fn has_quadric(&self) -> bool {
        self.quadric.is_some()
    }

    /// Dimension of the variety: `n` for `Q_n`, `N - 1` for projective space.
    pub fn variety_dim(&self) -> usize {
        if self.quadric.is_some() {
            self.nvars - 2
        } else {
            self.nvars - 1
        }
    }

    /// Jacobian criterion. Each partial of a split form is zero or a multiple
    /// of one variable, so the common zero locus of the partials is a
    /// coordinate subspace `L`; the quadric is smooth iff `q` has no nonzero
    /// zero on `L`.
    pub fn is_smooth(&self) -> bool {
        let Some(q) = &self.quadric else {
            return true;
        };
        let mut cut = Vec::new();
        for i in 0..self.nvars {
            let d = q.partial(i);
            if d.is_zero() {
                continue;
            }
            if d.num_terms() != 1 || d.degree() != Some(1) {
                return false;
            }
            let m = d.leading_monomial().unwrap();
            let v = m.exps.iter().position(|&e| e == 1).unwrap();
            if !cut.contains(&v) {
                cut.push(v);
            }
        }
        let free = self.nvars - cut.len();
        match free {
            0 => true,
            1 => {
                let rest = q.restrict_zero(&cut);
                let v = (0..self.nvars).find(|i| !cut.contains(i)).unwrap();
                rest.num_terms() == 1 && rest.coefficient(&Monomial::var(v).pow(2)) != 0
            }
            _ => false,
        }
    }

    /// Graded-lex-descending monomial basis of `S_d`, or of `R_d` (monomials
    /// not divisible by `x0 x1`) when `quotient` is set.
    pub fn monomial_basis(&self, d: i32, quotient: bool) -> Vec<Monomial> {
        let mut all = MonomialTable::get(self.nvars, d).all.clone();
        all.sort_by(|a, b| b.cmp(a));
        if quotient && self.quadric.is_some() {
            let lead = Monomial::var(0).mul(&Monomial::var(1));
            all.retain(|m| !lead.divides(m));
        }
        all
    }

    /// Normal form modulo `q`: supported on monomials not divisible by `x0 x1`.
    pub fn normal_form(&self, f: &Polynomial) -> Polynomial {
        let Some(q) = &self.quadric else {
            return f.clone();
        };
        let lead = Monomial::var(0).mul(&Monomial::var(1));
        let tail = q.sub(&Polynomial::term(lead, 1, self.p)).neg();
        let mut out = Polynomial::zero(self.p);
        let mut work = f.clone();
        while let Some((&m, &c)) = work.terms.iter().next_back() {
            work.terms.remove(&m);
            if lead.divides(&m) {
                let rest = lead.quotient_of(&m);
                let repl = tail.mul_monomial(&rest).scale(c);
                work = work.add(&repl);
            } else {
                out.add_term(m, c);
            }
        }
        out
    }

    /// Matrix of multiplication by `f` from degree `d` to `d + deg f`, in the
    /// bases of [`RingSpec::monomial_basis`].
    pub fn mult_matrix(&self, f: &Polynomial, d: i32, quotient: bool) -> FpMatrix {
        let e = f.degree().unwrap_or(0);
        let src = self.monomial_basis(d, quotient);
        let dst = self.monomial_basis(d + e, quotient);
        let index: HashMap<Monomial, usize> =
            dst.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let mut mat = FpMatrix::zeros(dst.len(), src.len(), self.p);
        for (j, m) in src.iter().enumerate() {
            let mut prod = f.mul_monomial(m);
            if quotient {
                prod = self.normal_form(&prod);
            }
            for (t, c) in prod.terms() {
                let i = index[t];
                mat.set(i, j, add_mod(mat.get(i, j), c, self.p));
            }
        }
        mat
    }
}

/// All monomials of one degree in `nvars` variables, grouped by weight.
#[derive(Debug)]
pub struct MonomialTable {
    pub all: Vec<Monomial>,
    pub by_weight: HashMap<Weight, Vec<Monomial>>,
    /// Position of each monomial inside its weight group.
    pub position: HashMap<u64, usize>,
}

type TableCache = RwLock<HashMap<(usize, i32, bool), Arc<MonomialTable>>>;

impl MonomialTable {
    /// Memoized table; empty for negative degrees.
    pub fn get(nvars: usize, d: i32) -> Arc<MonomialTable> {
        Self::get_in(nvars, d, false)
    }

    /// With `quotient` set, only monomials not divisible by `x0 x1`: the
    /// normal-form basis of `R_d`.
    pub fn get_in(nvars: usize, d: i32, quotient: bool) -> Arc<MonomialTable> {
        static CACHE: OnceLock<TableCache> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let key = (nvars, d, quotient);
        if let Some(t) = cache.read().unwrap().get(&key) {
            return t.clone();
        }
        let table = Arc::new(Self::build(nvars, d, quotient));
        cache.write().unwrap().entry(key).or_insert(table).clone()
    }

    fn build(nvars: usize, d: i32, quotient: bool) -> Self {
        let mut all = Vec::new();
        if d >= 0 {
            let mut exps = [0u16; MAX_VARS];
            enumerate(nvars, 0, d as u16, &mut exps, &mut all);
        }
        if quotient {
            all.retain(|m| m.exps[0] == 0 || m.exps[1] == 0);
        }
        all.sort();
        let mut by_weight: HashMap<Weight, Vec<Monomial>> = HashMap::new();
        let mut position = HashMap::with_capacity(all.len());
        for m in &all {
            let group = by_weight.entry(m.weight(nvars)).or_default();
            position.insert(m.key(), group.len());
            group.push(*m);
        }
        Self {
            all,
            by_weight,
            position,
        }
    }

    pub fn len(&self) -> usize {
        self.all.len()
    }

    pub fn is_empty(&self) -> bool {
        self.all.is_empty()
    }

    pub fn with_weight(&self, w: &Weight) -> &[Monomial] {
        self.by_weight.get(w).map_or(&[], Vec::as_slice)
    }
}

fn enumerate(nvars: usize, i: usize, left: u16, exps: &mut [u16; MAX_VARS], out: &mut Vec<Monomial>) {
    if i + 1 == nvars {
        exps[i] = left;
        out.push(Monomial { exps: *exps });
        exps[i] = 0;
        return;
    }
    for e in 0..=left {
        exps[i] = e;
        enumerate(nvars, i + 1, left - e, exps, out);
    }
    exps[i] = 0;
}

/// `(x0 x1 - q)^k` for the standard quadric in `nvars` variables: the
/// substitute for `(x0 x1)^k` in normal forms. Memoized.
pub(crate) fn neg_tail_power(nvars: usize, p: u32, k: usize) -> Arc<Polynomial> {
    type Cache = RwLock<HashMap<(usize, u32), Vec<Arc<Polynomial>>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.read().unwrap().get(&(nvars, p)) {
        if let Some(f) = v.get(k) {
            return f.clone();
        }
    }
    let mut guard = cache.write().unwrap();
    let powers = guard.entry((nvars, p)).or_insert_with(|| vec![Arc::new(Polynomial::constant(1, p))]);
    if powers.len() <= k {
        let q = quadric_form(nvars - 2, p).expect("quadric in range");
        let lead = Monomial::var(0).mul(&Monomial::var(1));
        let neg_tail = Polynomial::term(lead, 1, p).sub(&q);
        while powers.len() <= k {
            let next = powers.last().unwrap().mul(&neg_tail);
            powers.push(Arc::new(next));
        }
    }
    powers[k].clone()
}

pub fn binomial(n: i64, k: i64) -> i64 {
    if k < 0 || n < k || n < 0 {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn x(i: usize, p: u32) -> Polynomial {
        Polynomial::var(i, p)
    }

    #[test]
    fn quadric_forms() {
        let q = quadric_form(3, 2).unwrap();
        let want = x(0, 2).mul(&x(1, 2)).add(&x(2, 2).mul(&x(3, 2))).add(&x(4, 2).pow(2));
        assert_eq!(q, want);
        let q = quadric_form(4, 3).unwrap();
        let want = x(0, 3).mul(&x(1, 3)).add(&x(2, 3).mul(&x(3, 3))).add(&x(4, 3).mul(&x(5, 3)));
        assert_eq!(q, want);
        assert_eq!(quadric_form(1, 2).unwrap(), x(0, 2).mul(&x(1, 2)).add(&x(2, 2).pow(2)));
        assert!(quadric_form(0, 2).is_err());
        assert!(quadric_form(5, 2).is_err());
    }

    #[test]
    fn smooth_in_every_characteristic() {
        for n in 1..=4 {
            for p in [2, 3, 5, 7] {
                assert!(RingSpec::quadric(n, p).unwrap().is_smooth(), "n={n} p={p}");
            }
        }
    }

    #[test]
    fn monomial_counts() {
        let r = RingSpec::quadric(3, 2).unwrap();
        assert_eq!(r.monomial_basis(1, true).len(), 5);
        assert_eq!(r.monomial_basis(2, true).len(), 14);
        assert_eq!(r.monomial_basis(2, false).len(), 15);
        assert!(r.monomial_basis(-1, false).is_empty());
    }

    #[test]
    fn dim_s_is_binomial() {
        for nvars in 1..=6 {
            let s = RingSpec::ambient(nvars, 2).unwrap();
            for d in 0..=12 {
                let want = binomial(d as i64 + nvars as i64 - 1, nvars as i64 - 1);
                assert_eq!(s.monomial_basis(d, false).len() as i64, want);
            }
        }
    }

    #[test]
    fn dim_r_is_difference() {
        for n in 1..=4 {
            let r = RingSpec::quadric(n, 3).unwrap();
            for d in 0..=10 {
                let sd = r.monomial_basis(d, false).len();
                let sd2 = r.monomial_basis(d - 2, false).len();
                assert_eq!(r.monomial_basis(d, true).len(), sd - sd2);
            }
        }
    }

    #[test]
    fn normal_form_examples() {
        let r = RingSpec::quadric(3, 2).unwrap();
        let x0x1 = x(0, 2).mul(&x(1, 2));
        let want = x(2, 2).mul(&x(3, 2)).add(&x(4, 2).pow(2));
        assert_eq!(r.normal_form(&x0x1), want);
        let x2x3 = x(2, 2).mul(&x(3, 2));
        assert_eq!(r.normal_form(&x2x3), x2x3);
        // x0^2 x1^2 = x0 x1 (x2x3 + x4^2) = (x2x3 + x4^2)^2 in char 2
        let sq = x0x1.pow(2);
        let nf = r.normal_form(&sq);
        assert_eq!(nf, want.pow(2));
        assert_eq!(r.normal_form(&nf), nf);
    }

    #[test]
    fn normal_form_kernel_is_quadric_multiples() {
        // reduction map S_d -> R_d has rank dim R_d and kills q * S_{d-2}
        for n in [1, 3, 4] {
            let r = RingSpec::quadric(n, 5).unwrap();
            let q = r.quadric_poly().unwrap().clone();
            for d in 2..=5 {
                let src = r.monomial_basis(d, false);
                let dst = r.monomial_basis(d, true);
                let idx: HashMap<_, _> = dst.iter().enumerate().map(|(i, m)| (*m, i)).collect();
                let mut mat = FpMatrix::zeros(dst.len(), src.len(), 5);
                for (j, m) in src.iter().enumerate() {
                    for (t, c) in r.normal_form(&Polynomial::term(*m, 1, 5)).terms() {
                        mat.set(idx[t], j, c);
                    }
                }
                assert_eq!(mat.rank(), dst.len());
                for m in r.monomial_basis(d - 2, false) {
                    assert!(r.normal_form(&q.mul_monomial(&m)).is_zero());
                }
            }
        }
    }

    #[test]
    fn mult_matrix_examples() {
        let r = RingSpec::quadric(3, 3).unwrap();
        let one = Polynomial::constant(1, 3);
        assert_eq!(r.mult_matrix(&one, 2, true), FpMatrix::identity(14, 3));
        let m = r.mult_matrix(&x(0, 3), 0, true);
        assert_eq!((m.rows(), m.cols()), (5, 1));
        assert_eq!(m.column(0), vec![1, 0, 0, 0, 0]);
        let q = r.quadric_poly().unwrap().clone();
        for d in 0..4 {
            assert!(r.mult_matrix(&q, d, true).is_zero());
        }
    }

    #[test]
    fn frob_power_examples() {
        let f = x(0, 2).add(&x(1, 2));
        assert_eq!(frob_power(&f, 2), x(0, 2).pow(2).add(&x(1, 2).pow(2)));
        let g = x(0, 3).mul(&x(1, 3));
        assert_eq!(frob_power(&g, 3), x(0, 3).pow(3).mul(&x(1, 3).pow(3)));
        let q = quadric_form(3, 2).unwrap();
        let want = x(0, 2).pow(2).mul(&x(1, 2).pow(2))
            .add(&x(2, 2).pow(2).mul(&x(3, 2).pow(2)))
            .add(&x(4, 2).pow(4));
        assert_eq!(frob_power(&q, 2), want);
    }

    #[test]
    fn weights_of_quadric_vanish() {
        for n in 1..=4 {
            let q = quadric_form(n, 3).unwrap();
            assert_eq!(q.weight(n + 2), Some(ZERO_WEIGHT));
        }
    }

    fn arb_poly(p: u32) -> impl Strategy<Value = Polynomial> {
        prop::collection::vec((prop::collection::vec(0u16..3, 4), 0..p as i64), 0..5).prop_map(
            move |terms| {
                // homogenize to degree 3 by padding the last variable
                let mut f = Polynomial::zero(p);
                for (mut e, c) in terms {
                    let d: u16 = e.iter().sum();
                    if d > 3 {
                        continue;
                    }
                    e.push(3 - d);
                    f.add_term(Monomial::from_exponents(&e), c as u32);
                }
                f
            },
        )
    }

    proptest! {
        #[test]
        fn frobenius_is_a_ring_map(p in prop::sample::select(vec![2u32, 3, 5]), seed in 0u64..1000) {
            let _ = seed;
            let f = x(0, p).add(&x(2, p).scale(2 % p)).add(&x(4, p));
            let g = x(1, p).sub(&x(3, p));
            prop_assert_eq!(frob_power(&f.add(&g), p), frob_power(&f, p).add(&frob_power(&g, p)));
            prop_assert_eq!(frob_power(&f.mul(&g), p), frob_power(&f, p).mul(&frob_power(&g, p)));
            prop_assert_eq!(frob_power(&f, p), f.pow(p));
        }

        #[test]
        fn frobenius_matches_repeated_product(f in arb_poly(3), g in arb_poly(3)) {
            prop_assert_eq!(frob_power(&f, 3), f.pow(3));
            prop_assert_eq!(frob_power(&f.add(&g), 3), frob_power(&f, 3).add(&frob_power(&g, 3)));
            prop_assert_eq!(frob_power(&f.mul(&g), 3), frob_power(&f, 3).mul(&frob_power(&g, 3)));
        }

        #[test]
        fn normal_form_is_idempotent_projection(f in arb_poly(5), g in arb_poly(5)) {
            let r = RingSpec::quadric(3, 5).unwrap();
            let nf = r.normal_form(&f);
            prop_assert_eq!(r.normal_form(&nf), nf.clone());
            prop_assert_eq!(r.normal_form(&f.add(&g)), nf.add(&r.normal_form(&g)));
            let lead = Monomial::var(0).mul(&Monomial::var(1));
            prop_assert!(nf.terms().all(|(m, _)| !lead.divides(m)));
        }
    }
}
