use nalgebra::DVector;
use netred::graph::WeightedGraph;
use netred::numerics::sym_gen_eig;
use netred::presets::SMALL_NETWORK_EDGES;
use proptest::prelude::*;

fn small() -> WeightedGraph {
    WeightedGraph::undirected(10, &SMALL_NETWORK_EDGES).unwrap()
}

#[test]
fn small_network_shape() {
    let g = small();
    assert_eq!(g.n_vertices(), 10);
    assert_eq!(g.n_edges(), 15);
    assert!(!g.is_directed());
    assert!(g.is_connected().unwrap());
}

#[test]
fn laplacian_spectrum_of_small_network() {
    let g = small();
    let m = g.build_matrices();
    let eye = nalgebra::DMatrix::identity(10, 10);
    let (vals, _) = sym_gen_eig(&m.laplacian, &eye).unwrap();
    assert!(vals[0].abs() < 1e-10);
    assert!((vals[1] - 1.0).abs() < 1e-9, "lambda_2 = {}", vals[1]);
    assert!((vals[9] - 33.4932).abs() < 1e-4, "lambda_n = {}", vals[9]);
}

#[test]
fn matrix_identities() {
    let g = small();
    let m = g.build_matrices();
    // L = D - A
    assert!((&m.laplacian - (&m.in_degree - &m.adjacency)).norm() < 1e-14);
    // L = R Γ Rᵀ for undirected graphs
    let rgr = &m.incidence * &m.weight * m.incidence.transpose();
    assert!((&m.laplacian - rgr).norm() < 1e-12);
    // row sums of L vanish
    let ones = DVector::from_element(10, 1.0);
    assert!((&m.laplacian * ones).norm() < 1e-12);
    // incidence columns: one -1, one +1
    for e in 0..15 {
        let col = m.incidence.column(e);
        assert_eq!(col.iter().filter(|&&v| v == 1.0).count(), 1);
        assert_eq!(col.iter().filter(|&&v| v == -1.0).count(), 1);
        assert_eq!(col.iter().filter(|&&v| v == 0.0).count(), 8);
    }
    // weight diagonal in edge order
    for (e, &(_, _, w)) in g.edges().iter().enumerate() {
        assert_eq!(m.weight[(e, e)], w);
    }
}

#[test]
fn directed_graph_in_degree() {
    // 1 -> 2 with weight 3: vertex 2 has in-degree 3, vertex 1 none.
    let g = WeightedGraph::directed(2, &[(1, 2, 3.0)]).unwrap();
    let m = g.build_matrices();
    assert_eq!(m.adjacency[(1, 0)], 3.0);
    assert_eq!(m.adjacency[(0, 1)], 0.0);
    assert_eq!(m.in_degree[(1, 1)], 3.0);
    assert_eq!(m.in_degree[(0, 0)], 0.0);
}

#[test]
fn connectivity_matches_lambda2() {
    let path = WeightedGraph::undirected(4, &[(1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0)]).unwrap();
    assert!(path.is_connected().unwrap());

    let split = WeightedGraph::undirected(4, &[(1, 2, 1.0), (3, 4, 1.0)]).unwrap();
    assert!(!split.is_connected().unwrap());
    let m = split.build_matrices();
    let eye = nalgebra::DMatrix::identity(4, 4);
    let (vals, _) = sym_gen_eig(&m.laplacian, &eye).unwrap();
    assert!(vals[1].abs() < 1e-10, "disconnected graph must have lambda_2 = 0");

    let lone = WeightedGraph::undirected(1, &[]).unwrap();
    assert!(lone.is_connected().unwrap());
}

#[test]
fn grid_graph() {
    let g = WeightedGraph::grid(10, 10, 1.0).unwrap();
    assert_eq!(g.n_vertices(), 100);
    assert_eq!(g.n_edges(), 180);
    assert!(g.is_connected().unwrap());
    // interior vertex has degree 4, corner 2
    let m = g.build_matrices();
    assert_eq!(m.in_degree[(0, 0)], 2.0);
    let interior = 5 * 10 + 5;
    assert_eq!(m.in_degree[(interior, interior)], 4.0);
}

#[test]
fn invalid_graphs_rejected() {
    assert!(WeightedGraph::undirected(0, &[]).is_err());
    assert!(WeightedGraph::undirected(3, &[(1, 1, 1.0)]).is_err());
    assert!(WeightedGraph::undirected(3, &[(1, 4, 1.0)]).is_err());
    assert!(WeightedGraph::undirected(3, &[(1, 2, 0.0)]).is_err());
    assert!(WeightedGraph::undirected(3, &[(1, 2, -2.0)]).is_err());
    assert!(WeightedGraph::undirected(3, &[(1, 2, f64::NAN)]).is_err());
    assert!(WeightedGraph::undirected(3, &[(1, 2, 1.0), (2, 1, 2.0)]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Random connected graphs: Laplacian symmetric, PSD, zero row sums,
    /// lambda_2 > 0.
    #[test]
    fn laplacian_invariants(n in 2usize..9, extra in proptest::collection::vec((0usize..8, 0usize..8, 0.1f64..5.0), 0..10)) {
        // spanning path keeps it connected, extras may duplicate (filtered)
        let mut edges: Vec<(usize, usize, f64)> = (1..n).map(|i| (i, i + 1, 1.0)).collect();
        for (a, b, w) in extra {
            let (i, j) = (a % n + 1, b % n + 1);
            if i != j && !edges.iter().any(|&(p, q, _)| (p.min(q), p.max(q)) == (i.min(j), i.max(j))) {
                edges.push((i, j, w));
            }
        }
        let g = WeightedGraph::undirected(n, &edges).unwrap();
        prop_assert!(g.is_connected().unwrap());
        let m = g.build_matrices();
        prop_assert!((&m.laplacian - m.laplacian.transpose()).norm() < 1e-12);
        let ones = DVector::from_element(n, 1.0);
        prop_assert!((&m.laplacian * ones).norm() < 1e-10);
        let eye = nalgebra::DMatrix::identity(n, n);
        let (vals, _) = sym_gen_eig(&m.laplacian, &eye).unwrap();
        prop_assert!(vals[0] > -1e-10);
        prop_assert!(vals[1] > 1e-12);
        prop_assert!((&m.laplacian - &m.incidence * &m.weight * m.incidence.transpose()).norm() < 1e-10);
    }
}
