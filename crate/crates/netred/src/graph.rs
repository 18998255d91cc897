//! Weighted graphs and their derived matrices (adjacency, in-degree
//! Laplacian, incidence, edge weights).

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Weighted graph with optional direction. Vertex ids are 1-based at the API
/// boundary and stored 0-based; undirected edges are normalized to
/// (min, max) with incidence orientation min → max.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    directed: bool,
}

/// Dense matrices derived from one graph; built once, then immutable.
#[derive(Debug, Clone)]
pub struct GraphMatrices {
    /// `a[(i, j)]` is the weight of the edge arriving at `i` from `j`.
    pub adjacency: DMatrix<f64>,
    /// Diagonal of in-degrees, `diag(A·1)`.
    pub in_degree: DMatrix<f64>,
    /// `L = D − A`.
    pub laplacian: DMatrix<f64>,
    /// n×|E| incidence matrix; column e has −1 at the tail, +1 at the head.
    pub incidence: DMatrix<f64>,
    /// |E|×|E| diagonal edge-weight matrix, input edge order.
    pub weight: DMatrix<f64>,
}

impl WeightedGraph {
    fn build(n: usize, edges: &[(usize, usize, f64)], directed: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::Graph("graph needs at least one vertex".into()));
        }
        let mut stored = Vec::with_capacity(edges.len());
        let mut seen = std::collections::HashSet::new();
        for &(i, j, w) in edges {
            if i < 1 || i > n || j < 1 || j > n {
                return Err(Error::Graph(format!(
                    "edge ({i}, {j}) references a vertex outside 1..={n}"
                )));
            }
            if i == j {
                return Err(Error::Graph(format!("self-loop at vertex {i}")));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::Graph(format!(
                    "edge ({i}, {j}) has non-positive weight {w}"
                )));
            }
            let (a, b) = if directed {
                (i - 1, j - 1)
            } else {
                (i.min(j) - 1, i.max(j) - 1)
            };
            if !seen.insert((a, b)) {
                return Err(Error::Graph(format!("duplicate edge ({i}, {j})")));
            }
            stored.push((a, b, w));
        }
        Ok(Self {
            n,
            edges: stored,
            directed,
        })
    }

    /// Undirected graph from 1-based edge triplets `(i, j, w)`.
    pub fn undirected(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        Self::build(n, edges, false)
    }

    /// Directed graph; edge `(i, j, w)` points i → j.
    pub fn directed(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        Self::build(n, edges, true)
    }

    /// 4-neighbor lattice with uniform weight `w`, vertices numbered row-major.
    pub fn grid(rows: usize, cols: usize, w: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Graph("grid dimensions must be positive".into()));
        }
        let id = |r: usize, c: usize| r * cols + c + 1;
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    edges.push((id(r, c), id(r, c + 1), w));
                }
                if r + 1 < rows {
                    edges.push((id(r, c), id(r + 1, c), w));
                }
            }
        }
        Self::build(rows * cols, &edges, false)
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Stored edges, 0-based endpoints in incidence orientation.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Edges with 1-based endpoints, as supplied (after orientation
    /// normalization for undirected graphs).
    pub fn edges_one_based(&self) -> Vec<(usize, usize, f64)> {
        self.edges.iter().map(|&(i, j, w)| (i + 1, j + 1, w)).collect()
    }

    /// Assemble every derived matrix.
    pub fn build_matrices(&self) -> GraphMatrices {
        let n = self.n;
        let m = self.edges.len();
        let mut adjacency = DMatrix::<f64>::zeros(n, n);
        let mut incidence = DMatrix::<f64>::zeros(n, m);
        let mut weight = DMatrix::<f64>::zeros(m, m);
        for (e, &(i, j, w)) in self.edges.iter().enumerate() {
            if self.directed {
                // a_kl = weight of the edge from l to k.
                adjacency[(j, i)] = w;
            } else {
                adjacency[(i, j)] = w;
                adjacency[(j, i)] = w;
            }
            incidence[(i, e)] = -1.0;
            incidence[(j, e)] = 1.0;
            weight[(e, e)] = w;
        }
        let mut in_degree = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            in_degree[(i, i)] = adjacency.row(i).sum();
        }
        let laplacian = &in_degree - &adjacency;
        GraphMatrices {
            adjacency,
            in_degree,
            laplacian,
            incidence,
            weight,
        }
    }

    /// Connectivity by breadth-first traversal; undirected graphs only.
    pub fn is_connected(&self) -> Result<bool> {
        if self.directed {
            return Err(Error::Graph(
                "connectivity check only supports undirected graphs".into(),
            ));
        }
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j, _) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut seen = vec![false; self.n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    queue.push_back(u);
                }
            }
        }
        Ok(count == self.n)
    }
}
