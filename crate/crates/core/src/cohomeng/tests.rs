use super::*;
use crate::grmod::pushforward::pushforward_module;
use crate::grmod::GradedModulePresentation;
use crate::polyring::RingSpec;

fn o(n: usize, p: u32, d: i32) -> GradedModulePresentation {
    GradedModulePresentation::line_bundle(&RingSpec::quadric(n, p).unwrap(), d).unwrap()
}

#[test]
fn closed_form_examples() {
    assert_eq!(line_bundle_table(3, 1).values().unwrap(), vec![5, 0, 0, 0]);
    assert_eq!(line_bundle_table(3, 2).values().unwrap(), vec![14, 0, 0, 0]);
    assert!(line_bundle_table(3, -1).is_zero() && line_bundle_table(3, -2).is_zero());
    assert_eq!(line_bundle_table(3, -3).values().unwrap(), vec![0, 0, 0, 1]);
    assert_eq!(line_bundle_table(3, 0).values().unwrap(), vec![1, 0, 0, 0]);
}

#[test]
fn table_algebra() {
    let a = CohTable::exact(3, &[1, 0, 0, 0]).unwrap();
    let d = serre_dual_table(&a).unwrap();
    assert_eq!(d.values().unwrap(), vec![0, 0, 0, 1]);
    assert_eq!(serre_dual_table(&d).unwrap(), a);
    assert_eq!(kunneth_table(&a, &a).unwrap().values().unwrap(), vec![1, 0, 0, 0, 0, 0, 0]);
    let x = CohTable::exact(3, &[0, 0, 7, 0]).unwrap();
    let y = CohTable::exact(3, &[0, 3, 0, 0]).unwrap();
    let k = kunneth_table(&x, &y).unwrap();
    assert!(k.concentrated_in(3) && k.get(3) == Entry::Exact(21));
    assert!(kunneth_table(&x, &CohTable::zero(3)).unwrap().is_zero());
    assert_eq!(euler_char(&a).unwrap(), 1);
    assert_eq!(euler_char(&d).unwrap(), -1);
    assert!(euler_char(&CohTable::unknown(2)).is_err());
    assert!(serre_dual_table(&CohTable::unknown(2)).is_err());
}

#[test]
fn json_shape() {
    let mut t = line_bundle_table(3, 1);
    t.bound_used = Some(21);
    let s = t.to_json();
    assert_eq!(s, r#"{"n":3,"twist":1,"h":[5,0,0,0],"bound_used":21}"#);
    assert_eq!(CohTable::from_json(&s).unwrap(), t);
}

#[test]
fn engine_matches_closed_form_small() {
    for n in 1..=3usize {
        let m = o(n, 3, 0);
        let twists: Vec<i32> = (-5..=5).collect();
        let tables = sheaf_cohomology_many(&m, &twists, &EngineConfig::default()).unwrap();
        for (d, t) in twists.iter().zip(tables) {
            assert_eq!(t.h, line_bundle_table(n, *d).h, "n={n} d={d}");
        }
    }
}

#[test]
fn pushforward_on_conic_splits() {
    // F_*O on P^1 is O + O(-1)^{p-1}; on the conic O_Q(1) = O_P1(2)
    let ring = RingSpec::quadric(1, 3).unwrap();
    let n = pushforward_module(&ring).unwrap();
    let t = sheaf_cohomology(&n, 0).unwrap();
    assert_eq!(t.values().unwrap(), vec![1, 0]);
}
