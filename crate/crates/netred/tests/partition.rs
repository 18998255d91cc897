use nalgebra::DVector;
use netred::partition::{count_partitions, enumerate_partitions, Partition};
use proptest::prelude::*;

#[test]
fn stirling_counts() {
    // S(n, 1) = S(n, n) = 1
    assert_eq!(count_partitions(6, 1).unwrap(), 1);
    assert_eq!(count_partitions(6, 6).unwrap(), 1);
    // S(4, 2) = 7, S(5, 3) = 25, S(10, 5) = 42525
    assert_eq!(count_partitions(4, 2).unwrap(), 7);
    assert_eq!(count_partitions(5, 3).unwrap(), 25);
    assert_eq!(count_partitions(10, 5).unwrap(), 42_525);
    assert!(count_partitions(3, 4).is_err());
    assert!(count_partitions(0, 1).is_err());
}

#[test]
fn enumeration_of_4_into_2() {
    // restricted-growth-string order
    let got: Vec<Vec<Vec<usize>>> = enumerate_partitions(4, 2)
        .unwrap()
        .map(|p| p.clusters_one_based())
        .collect();
    let expect: Vec<Vec<Vec<usize>>> = vec![
        vec![vec![1, 2, 3], vec![4]],
        vec![vec![1, 2, 4], vec![3]],
        vec![vec![1, 2], vec![3, 4]],
        vec![vec![1, 3, 4], vec![2]],
        vec![vec![1, 3], vec![2, 4]],
        vec![vec![1, 4], vec![2, 3]],
        vec![vec![1], vec![2, 3, 4]],
    ];
    assert_eq!(got, expect);
}

#[test]
fn enumeration_count_matches_stirling() {
    for (n, r) in [(6, 1), (6, 2), (6, 3), (6, 6), (8, 4), (10, 5)] {
        let count = enumerate_partitions(n, r).unwrap().count() as u128;
        assert_eq!(count, count_partitions(n, r).unwrap(), "S({n}, {r})");
    }
}

#[test]
fn enumeration_yields_valid_unique_partitions() {
    let mut seen = std::collections::HashSet::new();
    for p in enumerate_partitions(6, 3).unwrap() {
        assert_eq!(p.n_vertices(), 6);
        assert_eq!(p.n_clusters(), 3);
        assert_eq!(p.cluster_sizes().iter().sum::<usize>(), 6);
        assert!(seen.insert(format!("{p}")), "duplicate {p}");
    }
    assert_eq!(seen.len(), 90);
}

#[test]
fn from_clusters_and_display() {
    let p = Partition::from_clusters(10, &[
        vec![1, 8],
        vec![2, 3, 4, 9, 10],
        vec![5],
        vec![6],
        vec![7],
    ])
    .unwrap();
    assert_eq!(format!("{p}"), "{{1, 8}, {2, 3, 4, 9, 10}, {5}, {6}, {7}}");
    assert_eq!(p.n_clusters(), 5);
    // order of clusters and members does not matter for identity
    let q = Partition::from_clusters(10, &[
        vec![5],
        vec![10, 9, 4, 3, 2],
        vec![8, 1],
        vec![7],
        vec![6],
    ])
    .unwrap();
    assert_eq!(p, q);
}

#[test]
fn from_clusters_validation() {
    assert!(Partition::from_clusters(3, &[vec![1, 2]]).is_err(), "missing vertex");
    assert!(Partition::from_clusters(3, &[vec![1, 2], vec![2, 3]]).is_err(), "overlap");
    assert!(Partition::from_clusters(3, &[vec![1, 2, 3], vec![]]).is_err(), "empty cluster");
    assert!(Partition::from_clusters(3, &[vec![1, 2, 4]]).is_err(), "out of range");
    assert!(Partition::from_clusters(3, &[vec![0, 1, 2]]).is_err(), "zero id");
}

#[test]
fn parse_round_trip() {
    let text = "{{1, 8}, {2, 3, 4, 9, 10}, {5}, {6}, {7}}";
    let p = Partition::parse(text, 10).unwrap();
    assert_eq!(format!("{p}"), text);
    assert!(Partition::parse("{{1, 2}", 2).is_err());
    assert!(Partition::parse("{{1}, {1, 2}}", 2).is_err());
    assert!(Partition::parse("{{1}, {3}}", 2).is_err());
}

#[test]
fn characteristic_matrix_structure() {
    let p = Partition::from_clusters(5, &[vec![1, 3], vec![2], vec![4, 5]]).unwrap();
    let pm = p.characteristic_matrix();
    assert_eq!((pm.nrows(), pm.ncols()), (5, 3));
    // exactly one 1 per row
    for i in 0..5 {
        let row: Vec<f64> = pm.row(i).iter().copied().collect();
        assert_eq!(row.iter().filter(|&&v| v == 1.0).count(), 1);
        assert_eq!(row.iter().filter(|&&v| v == 0.0).count(), 2);
    }
    // column sums are the cluster sizes
    let ones = DVector::from_element(5, 1.0);
    let sizes = pm.transpose() * ones;
    let mut got: Vec<f64> = sizes.iter().copied().collect();
    got.sort_by(f64::total_cmp);
    assert_eq!(got, vec![1.0, 2.0, 2.0]);
    // PᵀP is diagonal with the sizes
    let ptp = pm.transpose() * &pm;
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                assert_eq!(ptp[(i, j)], 0.0);
            }
        }
    }
}

#[test]
fn labels_round_trip() {
    let p = Partition::from_clusters(6, &[vec![1, 4], vec![2, 5], vec![3, 6]]).unwrap();
    let labels = p.labels();
    assert_eq!(labels, vec![0, 1, 2, 0, 1, 2]);
    assert_eq!(Partition::from_labels(&labels).unwrap(), p);
    // arbitrary tags are relabelled by first appearance
    let q = Partition::from_labels(&[7, 9, 2, 7, 9, 2]).unwrap();
    assert_eq!(q, p);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn labels_canonicalize(labels in proptest::collection::vec(0usize..5, 1..12)) {
        let p = Partition::from_labels(&labels).unwrap();
        let canon = p.labels();
        // canonical labels are a restricted growth string
        let mut maxseen = 0usize;
        for (i, &l) in canon.iter().enumerate() {
            if i == 0 {
                prop_assert_eq!(l, 0);
            } else {
                prop_assert!(l <= maxseen + 1);
            }
            maxseen = maxseen.max(l);
        }
        // idempotent
        prop_assert_eq!(Partition::from_labels(&canon).unwrap(), p);
        // same grouping as the input labels
        for i in 0..labels.len() {
            for j in 0..labels.len() {
                prop_assert_eq!(labels[i] == labels[j], canon[i] == canon[j]);
            }
        }
    }

    #[test]
    fn display_parse_round_trip(labels in proptest::collection::vec(0usize..4, 1..10)) {
        let p = Partition::from_labels(&labels).unwrap();
        let q = Partition::parse(&format!("{p}"), p.n_vertices()).unwrap();
        prop_assert_eq!(p, q);
    }
}
