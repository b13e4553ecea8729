use super::*;
use crate::cohomeng::{sheaf_cohomology, sheaf_cohomology_many, EngineConfig};
use crate::polyring::binomial;

/// Product over boxes of `(r + content) / hook`.
fn hook_content(lambda: &[usize], r: usize) -> u64 {
    let conj = |j: usize| lambda.iter().filter(|&&l| l > j).count();
    let (mut num, mut den) = (1i128, 1i128);
    for (i, &row) in lambda.iter().enumerate() {
        for j in 0..row {
            num *= r as i128 + j as i128 - i as i128;
            den *= (row - j - 1 + conj(j) - i - 1 + 1) as i128;
        }
    }
    (num / den) as u64
}

#[test]
fn schur_dims() {
    assert_eq!(schur_dim(&[1, 1], 4).unwrap(), 6);
    assert_eq!(schur_dim(&[2], 4).unwrap(), 10);
    assert_eq!(schur_dim(&[2, 1], 4).unwrap(), 20);
    assert!(schur_dim(&[1, 2], 4).is_err());
    assert!(schur_dim(&[1, 1, 1], 2).is_err());
    for lambda in [vec![3, 1], vec![2, 2], vec![4, 2, 1], vec![1, 1, 1, 1], vec![5]] {
        for r in lambda.len()..7 {
            assert_eq!(schur_dim(&lambda, r).unwrap(), hook_content(&lambda, r), "{lambda:?} r={r}");
        }
    }
}

#[test]
fn factorizations_square_to_q() {
    for n in 1..=4 {
        let mf = matrix_factorization(n, 3).unwrap();
        assert!(mf.is_valid(), "n={n}");
        let want = if n >= 3 { 4 } else { 2 };
        assert_eq!(mf.size(), want);
    }
    let (s, _) = spinor_modules(3, 5).unwrap();
    assert_eq!(s.sheaf_rank(4), Some(2));
    assert!(s.q_annihilates(0, 4));
}

#[test]
fn spinor_tables_on_q3() {
    let s = ustar(3, 5).unwrap();
    let t = sheaf_cohomology_many(&s, &[0, -1, -2, -3], &EngineConfig::default()).unwrap();
    assert_eq!(t[0].values().unwrap(), vec![4, 0, 0, 0]);
    assert!(t[1].is_zero() && t[2].is_zero() && t[3].is_zero());
}

#[test]
fn tautological_sequences_exact() {
    for n in [3, 4] {
        let ses = tautological_ses(n, 3).unwrap();
        ses.verify().unwrap();
        let r: Vec<_> = [ses.left(), ses.middle(), ses.right()]
            .iter()
            .map(|m| m.sheaf_rank(5).unwrap())
            .collect();
        assert_eq!(r, vec![2, 4, 2]);
    }
}

#[test]
fn carter_lusztig_exact_small() {
    for p in [2, 3] {
        let ses = carter_lusztig_ses(3, p).unwrap();
        ses.verify().unwrap();
        assert_eq!(ses.left().sheaf_rank(6), Some(2));
        assert_eq!(ses.middle().sheaf_rank(6), Some(p as usize + 1));
        assert_eq!(ses.right().sheaf_rank(6), Some(p as usize - 1));
        // the quotient agrees with Sym^{p-2} Σ (1) in large degrees
        let expected = ustar(3, p).unwrap().sym_power(p as usize - 2).twist(1);
        for e in 4..8 {
            assert_eq!(ses.right().hilbert(e), expected.hilbert(e), "degree {e}");
        }
    }
}

#[test]
fn psi_modules() {
    let psi = psi_module(3, 1, 5).unwrap();
    assert_eq!(psi.module.hilbert(0), 0);
    assert_eq!(psi.module.hilbert(1), 11);
    psi.verify().unwrap();
    let psi2 = psi_module(3, 2, 5).unwrap();
    assert_eq!(psi2.b_dims(), vec![1, 5, 10]);
    psi2.verify().unwrap();
    assert_eq!(binomial(5, 2), 10);
}

#[test]
fn expression_grammar() {
    let e = BundleExpr::parse("Sym(2, Ustar)(1) * Frob(U)").unwrap();
    assert_eq!(e.to_string(), "Sym(2,Ustar)(1)*Frob(U)");
    assert_eq!(BundleExpr::parse(&e.to_string()).unwrap(), e);
    assert_eq!(BundleExpr::parse("O(-3)").unwrap(), BundleExpr::Line(-3));
    assert!(matches!(BundleExpr::parse("Spinor-(2)").unwrap(), BundleExpr::Twist(_, 2)));
    for bad in ["", "O(", "Sym(2 Ustar)", "V", "U*", "O(1))", "Frob()"] {
        assert!(BundleExpr::parse(bad).is_err(), "{bad}");
    }
    let m = BundleExpr::parse("O(1)*O(2)").unwrap().realize(3, 3).unwrap();
    assert_eq!(sheaf_cohomology(&m, 0).unwrap().values().unwrap(), vec![30, 0, 0, 0]);
}
