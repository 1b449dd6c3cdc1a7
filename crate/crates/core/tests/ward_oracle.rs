//! Ward linkage against recomputation from the raw points.

mod common;

use collab_core::cluster::{cut, leaf_order, ward_linkage};
use proptest::prelude::*;

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("d{i:02}")).collect()
}

fn points() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..=12, 1usize..=5).prop_flat_map(|(n, dim)| {
        prop::collection::vec(prop::collection::vec(-10.0f64..10.0, dim), n)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lance_williams_matches_from_scratch(pts in points()) {
        let l = ward_linkage(&pts, &ids(pts.len())).unwrap();
        let oracle = common::ward_from_scratch(&pts);
        prop_assert_eq!(l.merges.len(), oracle.len());
        for (m, (a, b, d)) in l.merges.iter().zip(&oracle) {
            prop_assert_eq!((m.a, m.b), (*a, *b));
            prop_assert!((m.distance - d).abs() <= 1e-9, "{} vs {}", m.distance, d);
        }
    }

    #[test]
    fn leaf_order_is_a_permutation(pts in points()) {
        let l = ward_linkage(&pts, &ids(pts.len())).unwrap();
        let mut order = leaf_order(&l).unwrap();
        order.sort();
        prop_assert_eq!(order, ids(pts.len()));
    }

    #[test]
    fn cuts_nest(pts in points()) {
        let n = pts.len();
        let l = ward_linkage(&pts, &ids(n)).unwrap();
        prop_assert_eq!(cut(&l, n).unwrap().len(), n);
        prop_assert_eq!(cut(&l, 1).unwrap(), vec![ids(n)]);
        for k in 1..n {
            let coarse = cut(&l, k).unwrap();
            let fine = cut(&l, k + 1).unwrap();
            prop_assert_eq!(coarse.len(), k);
            for f in &fine {
                prop_assert!(coarse.iter().any(|c| f.iter().all(|x| c.contains(x))));
            }
        }
    }
}
