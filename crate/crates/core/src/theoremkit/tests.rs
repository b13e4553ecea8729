use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::*;
use crate::bundlecat::BundleExpr;
use crate::cohomeng::{sheaf_cohomology_many, CohTable, EngineConfig, Entry};

fn exact(n: usize, v: &[u64]) -> CohTable {
    CohTable::exact(n, v).unwrap()
}

#[test]
fn les_forces_isomorphism() {
    let out = les_bounds(&exact(3, &[1, 0, 0, 0]), &CohTable::unknown(3), &CohTable::zero(3)).unwrap();
    assert_eq!(out.status, Feasibility::Consistent);
    assert_eq!(out.b, exact(3, &[1, 0, 0, 0]));
}

#[test]
fn les_of_zero_tables_is_zero() {
    let z = CohTable::zero(3);
    let out = les_bounds(&z, &z, &z).unwrap();
    assert!(out.a.is_zero() && out.b.is_zero() && out.c.is_zero());
}

#[test]
fn les_tautological_instance() {
    let c = {
        let mut t = exact(3, &[4, 0, 0, 0]);
        t.h[1] = Entry::UNKNOWN;
        t
    };
    let out = les_bounds(&CohTable::unknown(3), &exact(3, &[4, 0, 0, 0]), &c).unwrap();
    assert_eq!(out.a.get(0).hi(), Some(4));
    assert_eq!(out.a.get(1).hi(), Some(4));
    assert_eq!(out.a.get(2), Entry::UNKNOWN);
    assert!(out.a.get(3).is_zero());

    // with the rank of H^0(B) -> H^0(C) and an exact C the kernel is pinned
    let hint = RankHint {
        map: LesMap::BC,
        degree: 0,
        rank: 4,
    };
    let c = exact(3, &[4, 7, 0, 0]);
    let out = les_bounds_with(&CohTable::unknown(3), &exact(3, &[4, 0, 0, 0]), &c, &[hint]).unwrap();
    assert_eq!(out.a, exact(3, &[0, 0, 7, 0]));
}

#[test]
fn les_detects_infeasible_input() {
    let out = les_bounds(&exact(2, &[1, 0, 0]), &CohTable::zero(2), &CohTable::zero(2)).unwrap();
    assert!(matches!(out.status, Feasibility::Contradicted(_)));
}

/// Exact tables of twisted catalog sequences.
fn catalog_truth() -> Vec<[CohTable; 3]> {
    let cfg = EngineConfig::default();
    let twists: Vec<i32> = (-4..=4).collect();
    let mut out = vec![];
    for p in [2, 3] {
        let taut = crate::bundlecat::tautological_ses(3, p).unwrap();
        let cl = crate::bundlecat::carter_lusztig_ses(3, p).unwrap();
        for ses in [taut, cl] {
            let tabs: Vec<Vec<CohTable>> = [ses.left(), ses.middle(), ses.right()]
                .iter()
                .map(|m| sheaf_cohomology_many(m, &twists, &cfg).unwrap())
                .collect();
            for k in 0..twists.len() {
                out.push([tabs[0][k].clone(), tabs[1][k].clone(), tabs[2][k].clone()]);
            }
        }
    }
    out
}

fn blur(t: &CohTable, rng: &mut StdRng) -> CohTable {
    let mut out = t.clone();
    for e in out.h.iter_mut() {
        let v = e.exact().unwrap();
        *e = match rng.gen_range(0..4) {
            0 => Entry::Exact(v),
            1 => Entry::UNKNOWN,
            2 => Entry::new(v.saturating_sub(rng.gen_range(0..3)), None),
            _ => Entry::new(v.saturating_sub(rng.gen_range(0..3)), Some(v + rng.gen_range(0..3))),
        };
    }
    out
}

#[test]
fn les_never_excludes_the_truth() {
    let truth = catalog_truth();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for case in 0..200 {
        let [a, b, c] = &truth[case % truth.len()];
        let out = les_bounds(&blur(a, &mut rng), &blur(b, &mut rng), &blur(c, &mut rng)).unwrap();
        assert_eq!(out.status, Feasibility::Consistent, "case {case}");
        for (got, want) in [(&out.a, a), (&out.b, b), (&out.c, c)] {
            for i in 0..=3 {
                assert!(got.get(i).contains(want.get(i).exact().unwrap()), "case {case}, H^{i}");
            }
        }
    }
}

fn single_terms(tables: &[(i32, BundleExpr)]) -> ComplexSpec {
    ComplexSpec::new(
        "test",
        tables
            .iter()
            .map(|(d, e)| ComplexTerm {
                degree: *d,
                summands: vec![Sheaf::on(e.clone())],
            })
            .collect(),
        "",
    )
    .unwrap()
}

#[test]
fn hyper_vanish_on_acyclic_terms() {
    let c = single_terms(&[(-2, BundleExpr::Line(0)), (-1, BundleExpr::Line(1)), (0, BundleExpr::Line(2))]);
    let tables = [exact(3, &[1, 0, 0, 0]), exact(3, &[5, 0, 0, 0]), exact(3, &[15, 0, 0, 0])];
    assert_eq!(hyper_vanish_above(&c, &tables, 0).unwrap(), Verdict::Vanishes);
    assert_eq!(hyper_vanish(&c, &tables, -1).unwrap(), Verdict::Unknown);
}

#[test]
fn hyper_vanish_single_term_matches_the_term() {
    let c = single_terms(&[(0, BundleExpr::U)]);
    assert_eq!(hyper_vanish(&c, &[exact(3, &[0, 0, 2, 0])], 2).unwrap(), Verdict::Unknown);
    assert_eq!(hyper_vanish(&c, &[exact(3, &[0, 0, 2, 0])], 1).unwrap(), Verdict::Vanishes);
}

#[test]
fn complex_degrees_must_increase() {
    let t = |d| ComplexTerm {
        degree: d,
        summands: vec![Sheaf::on(BundleExpr::Line(0))],
    };
    assert!(ComplexSpec::new("bad", vec![t(0), t(0)], "").is_err());
    assert!(ComplexSpec::new("bad", vec![], "").is_err());
}

fn boxed_complex() -> ComplexSpec {
    let t = |d, s: &str| ComplexTerm {
        degree: d,
        summands: vec![Sheaf::parse(s).unwrap()],
    };
    ComplexSpec::new("full", vec![t(-3, "U ⊠ U(-2)"), t(-2, "O(0) ⊠ O(0)"), t(0, "O(0) ⊠ O(0)")], "").unwrap()
}

#[test]
fn triangle_cases() {
    let full = boxed_complex();
    let mut left = CohTable::zero(6);
    left.h[3] = Entry::Exact(2);
    assert_eq!(truncation_triangle(&full, -2, &left, &Verdict::Vanishes), TriangleVerdict::Vanishes);
    // wrong degree: H^4 of the left term lands in degree 1
    let mut wrong = CohTable::zero(6);
    wrong.h[4] = Entry::Exact(1);
    assert!(matches!(
        truncation_triangle(&full, -2, &wrong, &Verdict::Vanishes),
        TriangleVerdict::Inconclusive(_)
    ));
    assert!(matches!(
        truncation_triangle(&full, -2, &left, &Verdict::Unknown),
        TriangleVerdict::Inconclusive(_)
    ));
    // nothing below the cut: same verdict as the truncation
    assert_eq!(
        truncation_triangle(&full, -3, &CohTable::zero(6), &Verdict::Vanishes),
        TriangleVerdict::Vanishes
    );
    assert!(matches!(
        truncation_triangle(&full, -1, &left, &Verdict::Vanishes),
        TriangleVerdict::Contradicted(_)
    ));
}

#[test]
fn interval_kunneth_and_serre() {
    let a = exact(1, &[1, 2]);
    let mut b = exact(1, &[3, 0]);
    b.h[1] = Entry::new(0, None);
    let k = kunneth_interval(&a, &b);
    assert_eq!(k.get(0), Entry::Exact(3));
    assert_eq!(k.get(1), Entry::new(6, None));
    assert_eq!(serre_interval(&exact(2, &[1, 0, 5])), exact(2, &[5, 0, 1]));
}

#[test]
fn normal_forms() {
    let p = 3;
    let norm = |s: &str| BundleExpr::parse(s).unwrap().normalize(3, p).to_string();
    assert_eq!(norm("Frob(Ustar)"), "Frob(U)(3)");
    assert_eq!(norm("Sym(1,Ustar)(1)"), "U(2)");
    assert_eq!(norm("Sym(0,Ustar)(1)"), "O(1)");
    assert_eq!(norm("Frob(O(-2))(6)"), "O(0)");
    assert_eq!(norm("O(1)*U(-1)"), "U");
    assert_eq!(norm("Spinor-(-1)"), "U");
    let dual = BundleExpr::parse("Frob(U)").unwrap().dual(3, p).unwrap();
    assert_eq!(dual.to_string(), "Frob(U)(3)");
    let s = Sheaf::parse("Frob(Psi(2)) ⊠ O(-1)^3").unwrap();
    assert_eq!(s.mult, 3);
    assert_eq!(Sheaf::parse(&s.to_string()).unwrap(), s);
}

#[test]
fn spinor_dual_is_its_twist() {
    // U^∨ = U(1), so Serre duality pairs U with U(-2) on Q_3
    let cfg = EngineConfig::default();
    let u = crate::bundlecat::u_bundle(3, 2).unwrap();
    for d in -2..=2 {
        let t = sheaf_cohomology_many(&u, &[d, -2 - d], &cfg).unwrap();
        assert_eq!(serre_interval(&t[0]).h, t[1].h, "twist {d}");
    }
}

#[test]
fn certificate_q3_p2() {
    let cert = paper_certificate(3, 2).unwrap();
    assert_eq!(cert.status, Status::Proved, "{:?}", cert.failure);
    assert!(replay(&cert).unwrap() > 10);
    let again = Certificate::from_json(&cert.to_json()).unwrap();
    assert_eq!(again, cert);
    replay(&again).unwrap();
    let ids: Vec<&str> = cert.axioms.iter().map(|a| a.id.as_str()).collect();
    assert_eq!(ids, ["kunneth", "serre", "diagonal-resolution", "reduction"]);
    assert!(cert.axioms.iter().all(|a| !a.paper_ref.is_empty()));
    // H^k(F^*Ψ_i) = 0 for k > i
    for i in 1..3usize {
        let node = cert.node(&format!("hyper:Frob(Psi({i}))")).unwrap();
        let Statement::Table { table, .. } = &node.statement else { panic!() };
        assert!((i + 1..=3).all(|k| table.get(k).is_zero()));
    }
    assert!(matches!(
        &cert.node("hyper:truncated").unwrap().statement,
        Statement::Vanishing { above: 0, .. }
    ));
}

#[test]
fn tampered_certificates_fail_replay() {
    let cert = paper_certificate(3, 2).unwrap();
    // a rule conclusion edited by hand
    let mut bad = cert.clone();
    let node = bad.nodes.iter_mut().find(|n| n.id.starts_with("les:Frob(U)(")).unwrap();
    if let Statement::Table { table, .. } = &mut node.statement {
        table.h[1] = Entry::Exact(99);
    }
    assert!(replay(&bad).is_err());
    // an input that does not exist yet
    let mut bad = cert.clone();
    let last = bad.nodes.pop().unwrap();
    bad.nodes.insert(0, last);
    assert!(replay(&bad).is_err());
    // a proved status without the conclusion
    let mut bad = cert.clone();
    bad.nodes.retain(|n| n.id != "triangle");
    assert!(replay(&bad).is_err());
}

#[test]
fn dropping_leaf_information_never_contradicts() {
    let cert = paper_certificate(3, 2).unwrap();
    let (n, p) = (3, 2);
    for node in cert.nodes.iter().filter(|n| matches!(n.rule, Some(Rule::Les { .. }))) {
        let mut inputs: Vec<Statement> = node
            .inputs
            .iter()
            .map(|i| cert.node(i).unwrap().statement.clone())
            .collect();
        for st in inputs.iter_mut() {
            if let Statement::Table { table, .. } = st {
                *table = CohTable::unknown(table.n);
            }
        }
        let refs: Vec<&Statement> = inputs.iter().collect();
        let ids: Vec<&str> = node.inputs.iter().map(String::as_str).collect();
        let weaker = apply(node.rule.as_ref().unwrap(), &refs, &ids, n, p).unwrap();
        let (Statement::Table { table: w, .. }, Statement::Table { table: s, .. }) = (&weaker, &node.statement) else {
            panic!()
        };
        for i in 0..=n {
            let v = s.get(i).exact().unwrap();
            assert!(w.get(i).contains(v), "{} H^{i}", node.id);
        }
    }
}

#[test]
fn delegated_certificate_low_dimension() {
    let report = verify_theorem(1, 3).unwrap();
    assert!(report.pass, "{:?}", report.diagnostics);
    let cert = &report.certificate.as_ref().unwrap().certificate;
    assert_eq!(cert.axioms[0].id, "low-dimension");
    assert_eq!(report.oracle_table().unwrap().h, exact(1, &[9, 0]).h);
}

#[test]
fn budget_guard() {
    assert!(matches!(oracle_ext_table(3, 7), Err(crate::QdError::BudgetExceeded { .. })));
    assert!(verify_theorem(4, 5).is_err());
    assert!(within_budget(2, 13) && !within_budget(4, 5));
}

#[test]
fn verify_q3_p2_both_routes() {
    let report = verify_theorem(3, 2).unwrap();
    assert!(report.pass, "{:?}", report.diagnostics);
    assert_eq!(report.agree, Some(true));
    assert_eq!(report.oracle_vanishes(), Some(true));
    assert_eq!(report.certificate.as_ref().unwrap().replay, Ok(15));
}
