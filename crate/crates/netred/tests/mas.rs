use nalgebra::{DMatrix, DVector};
use netred::graph::WeightedGraph;
use netred::mas::{
    check_sync_preserved_for_all_partitions, cluster_reduce, coupling_eigenvalues,
    is_synchronized, leader_follower_input, realize, AgentDynamics, LinearMas,
};
use netred::numerics::kron;
use netred::partition::{enumerate_partitions, Partition};
use netred::presets::{small_network, SMALL_NETWORK_EDGES};
use proptest::prelude::*;

fn small() -> LinearMas {
    small_network().to_linear().unwrap()
}

#[test]
fn small_network_assembly() {
    let sys = small();
    assert_eq!(sys.n_agents(), 10);
    assert_eq!(sys.order(), 10);
    assert!(sys.agent.is_single_integrator());
    assert_eq!(sys.inertias, DVector::from_element(10, 1.0));

    let r = realize(&sys);
    assert_eq!(r.e, DMatrix::identity(10, 10));
    assert!((&r.a + sys.laplacian()).norm() < 1e-14, "A = -L for single integrators");
    // leaders 6 and 7
    let mut b_expect = DMatrix::zeros(10, 2);
    b_expect[(5, 0)] = 1.0;
    b_expect[(6, 1)] = 1.0;
    assert_eq!(r.b, b_expect);
    // output picks up sqrt(w) * incidence transposed: one row per edge
    assert_eq!(r.c.shape(), (15, 10));
    for (e, &(i, j, w)) in SMALL_NETWORK_EDGES.iter().enumerate() {
        let (lo, hi) = (i.min(j) - 1, i.max(j) - 1);
        assert!((r.c[(e, lo)] + w.sqrt()).abs() < 1e-14);
        assert!((r.c[(e, hi)] - w.sqrt()).abs() < 1e-14);
        let row_norm2: f64 = r.c.row(e).iter().map(|x| x * x).sum();
        assert!((row_norm2 - 2.0 * w).abs() < 1e-12);
    }
}

#[test]
fn leader_follower_validation() {
    let b = leader_follower_input(5, &[2, 4]).unwrap();
    assert_eq!(b.shape(), (5, 2));
    assert_eq!(b[(1, 0)], 1.0);
    assert_eq!(b[(3, 1)], 1.0);
    assert_eq!(b.iter().filter(|&&x| x != 0.0).count(), 2);
    assert!(leader_follower_input(5, &[]).is_err());
    assert!(leader_follower_input(5, &[6]).is_err());
    assert!(leader_follower_input(5, &[0]).is_err());
    assert!(leader_follower_input(5, &[2, 2]).is_err());
}

#[test]
fn coupling_eigenvalues_drop_zero() {
    let sys = small();
    let eigs = coupling_eigenvalues(&sys).unwrap();
    assert_eq!(eigs.len(), 9, "the zero eigenvalue is excluded");
    assert!((eigs[0] - 1.0).abs() < 1e-9);
    assert!((eigs[8] - 33.4932).abs() < 1e-4);
    assert!(eigs.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn single_integrator_network_synchronizes() {
    let report = is_synchronized(&small()).unwrap();
    assert!(report.synchronized);
    assert!(report.max_real_part < 0.0);
    assert!(report.witness_lambda.is_none());
    assert!(check_sync_preserved_for_all_partitions(&small(), 50).unwrap());
}

#[test]
fn unstable_agent_detected() {
    // scalar agent x' = +x with weak coupling never synchronizes
    let graph = WeightedGraph::undirected(3, &[(1, 2, 0.1), (2, 3, 0.1)]).unwrap();
    let agent = AgentDynamics::new(
        DMatrix::identity(1, 1),
        DMatrix::from_element(1, 1, 1.0),
        DMatrix::identity(1, 1),
        DMatrix::identity(1, 1),
        DMatrix::identity(1, 1),
    )
    .unwrap();
    let sys = LinearMas::new(
        graph,
        DVector::from_element(3, 1.0),
        DMatrix::from_element(3, 1, 1.0),
        DMatrix::identity(3, 3),
        agent,
    )
    .unwrap();
    let report = is_synchronized(&sys).unwrap();
    assert!(!report.synchronized);
    assert!(report.witness_lambda.is_some());
    assert!(!check_sync_preserved_for_all_partitions(&sys, 20).unwrap());
}

#[test]
fn model_validation() {
    let graph = WeightedGraph::undirected(3, &[(1, 2, 1.0)]).unwrap(); // disconnected
    let agent = AgentDynamics::single_integrator();
    assert!(LinearMas::new(
        graph,
        DVector::from_element(3, 1.0),
        DMatrix::zeros(3, 1),
        DMatrix::identity(3, 3),
        agent.clone(),
    )
    .is_err());

    let graph = WeightedGraph::undirected(3, &[(1, 2, 1.0), (2, 3, 1.0)]).unwrap();
    assert!(LinearMas::new(
        graph.clone(),
        DVector::from_column_slice(&[1.0, -1.0, 1.0]),
        DMatrix::zeros(3, 1),
        DMatrix::identity(3, 3),
        agent.clone(),
    )
    .is_err(), "negative inertia");
    assert!(LinearMas::new(
        graph.clone(),
        DVector::from_element(2, 1.0),
        DMatrix::zeros(3, 1),
        DMatrix::identity(3, 3),
        agent.clone(),
    )
    .is_err(), "inertia count");
    assert!(LinearMas::new(
        graph,
        DVector::from_element(3, 1.0),
        DMatrix::zeros(2, 1),
        DMatrix::identity(3, 3),
        agent,
    )
    .is_err(), "input rows");
}

#[test]
fn cluster_reduce_galerkin_projection() {
    let sys = small();
    let p = Partition::parse("{{1, 8}, {2, 3, 4, 9, 10}, {5}, {6}, {7}}", 10).unwrap();
    let red = cluster_reduce(&sys, &p).unwrap();
    assert_eq!(red.n_agents(), 5);

    let pm = p.characteristic_matrix();
    // M̂ = PᵀMP, L̂ = PᵀLP, B̂ = Pᵀ𝖡, Ĉ = 𝖢P
    assert!((red.inertia_matrix() - pm.transpose() * sys.inertia_matrix() * &pm).norm() < 1e-12);
    assert!((red.laplacian() - pm.transpose() * sys.laplacian() * &pm).norm() < 1e-12);
    assert!((&red.input - pm.transpose() * &sys.input).norm() < 1e-12);
    assert!((&red.output - &sys.output * &pm).norm() < 1e-12);

    // Kronecker form of the same identity on the realizations
    let v = kron(&pm, &DMatrix::identity(1, 1));
    let (rf, rr) = (realize(&sys), realize(&red));
    assert!((v.transpose() * &rf.e * &v - &rr.e).norm() < 1e-12);
    assert!((v.transpose() * &rf.a * &v - &rr.a).norm() < 1e-12);
    assert!((v.transpose() * &rf.b - &rr.b).norm() < 1e-12);
    assert!((&rf.c * &v - &rr.c).norm() < 1e-12);
}

#[test]
fn cluster_reduce_preserves_laplacian_structure() {
    let sys = small();
    for p in enumerate_partitions(10, 5).unwrap().take(200) {
        let red = cluster_reduce(&sys, &p).unwrap();
        let l = red.laplacian();
        assert!((&l - l.transpose()).norm() < 1e-12);
        let ones = DVector::from_element(5, 1.0);
        assert!((&l * ones).norm() < 1e-10);
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    assert!(l[(i, j)] <= 1e-12);
                }
            }
        }
        assert!(red.graph.is_connected().unwrap());
        // inertias merge additively
        assert!((red.inertias.sum() - 10.0).abs() < 1e-12);
    }
}

#[test]
fn singleton_partition_is_identity() {
    let sys = small();
    let p = Partition::from_labels(&(0..10).collect::<Vec<_>>()).unwrap();
    let red = cluster_reduce(&sys, &p).unwrap();
    assert_eq!(red.n_agents(), 10);
    assert!((red.laplacian() - sys.laplacian()).norm() < 1e-12);
    assert!((&red.input - &sys.input).norm() < 1e-12);
    assert!((&red.output - &sys.output).norm() < 1e-12);
}

#[test]
fn cluster_reduce_wrong_size() {
    let sys = small();
    let p = Partition::from_labels(&[0, 1, 0]).unwrap();
    assert!(cluster_reduce(&sys, &p).is_err());
}

#[test]
fn agent_dynamics_validation() {
    // dimension mismatches rejected
    assert!(AgentDynamics::new(
        DMatrix::identity(2, 2),
        DMatrix::zeros(2, 2),
        DMatrix::zeros(3, 1),
        DMatrix::zeros(1, 2),
        DMatrix::identity(1, 1),
    )
    .is_err());
    let a = AgentDynamics::single_integrator();
    assert_eq!((a.dim(), a.n_inputs(), a.n_outputs()), (1, 1, 1));
    // coupled(λ) = A - λBKC
    let c = a.coupled(2.5);
    assert!((c[(0, 0)] + 2.5).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// Galerkin identity on random partitions of the small network.
    #[test]
    fn galerkin_identity_random_partitions(labels in proptest::collection::vec(0usize..4, 10)) {
        let sys = small();
        let p = Partition::from_labels(&labels).unwrap();
        let red = cluster_reduce(&sys, &p).unwrap();
        let pm = p.characteristic_matrix();
        prop_assert!((red.laplacian() - pm.transpose() * sys.laplacian() * &pm).norm() < 1e-11);
        prop_assert!((&red.input - pm.transpose() * &sys.input).norm() < 1e-12);
        prop_assert!((&red.output - &sys.output * &pm).norm() < 1e-12);
        // synchronization is preserved under clustering
        prop_assert!(is_synchronized(&red).unwrap().synchronized);
    }
}
