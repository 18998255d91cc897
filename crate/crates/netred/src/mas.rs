//! Linear multi-agent systems over weighted graphs: Kronecker realization,
//! synchronization tests, and structure-preserving clustering reduction.

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::numerics::{complex_eigenvalues, kron, sym_gen_eig};
use crate::partition::Partition;
use nalgebra::{DMatrix, DVector};

/// Identical dynamics `(E, A, B, C, K)` shared by every agent.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentDynamics {
    pub e: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub k: DMatrix<f64>,
}

impl AgentDynamics {
    pub fn new(
        e: DMatrix<f64>,
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        k: DMatrix<f64>,
    ) -> Result<Self> {
        let n = e.nrows();
        if e.ncols() != n || a.nrows() != n || a.ncols() != n {
            return Err(Error::Model("agent E/A must be square and same size".into()));
        }
        if b.nrows() != n || c.ncols() != n {
            return Err(Error::Model("agent B/C dimensions inconsistent with E".into()));
        }
        if k.nrows() != b.ncols() || k.ncols() != c.nrows() {
            return Err(Error::Model("agent K must be m×p".into()));
        }
        if e.clone().lu().try_inverse().is_none() {
            return Err(Error::Model("agent E is singular".into()));
        }
        Ok(Self { e, a, b, c, k })
    }

    /// `n = m = p = 1`, `E = B = C = K = 1`, `A = 0`.
    pub fn single_integrator() -> Self {
        Self {
            e: DMatrix::identity(1, 1),
            a: DMatrix::zeros(1, 1),
            b: DMatrix::identity(1, 1),
            c: DMatrix::identity(1, 1),
            k: DMatrix::identity(1, 1),
        }
    }

    pub fn is_single_integrator(&self) -> bool {
        self.dim() == 1
            && self.e[(0, 0)] == 1.0
            && self.a[(0, 0)] == 0.0
            && self.b == DMatrix::identity(1, 1)
            && self.c == DMatrix::identity(1, 1)
            && self.k == DMatrix::identity(1, 1)
    }

    pub fn dim(&self) -> usize {
        self.e.nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn n_outputs(&self) -> usize {
        self.c.nrows()
    }

    /// `A − λ B K C` for the synchronization pencil.
    pub fn coupled(&self, lambda: f64) -> DMatrix<f64> {
        &self.a - (&self.b * &self.k * &self.c) * lambda
    }
}

/// Diffusively coupled network of identical agents.
#[derive(Debug, Clone)]
pub struct LinearMas {
    pub graph: WeightedGraph,
    /// Positive inertias, the diagonal of 𝖬.
    pub inertias: DVector<f64>,
    /// 𝗇×𝗆 network-level input map.
    pub input: DMatrix<f64>,
    /// 𝗉×𝗇 network-level output map.
    pub output: DMatrix<f64>,
    pub agent: AgentDynamics,
}

/// Dense LTI realization `ℰ ẋ = 𝒜 x + ℬ u`, `y = 𝒞 x`.
#[derive(Debug, Clone)]
pub struct LtiRealization {
    pub e: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
}

impl LtiRealization {
    pub fn order(&self) -> usize {
        self.e.nrows()
    }
}

/// Synchronization verdict with a witness for failures.
#[derive(Debug, Clone)]
pub struct SyncReport {
    pub synchronized: bool,
    /// Largest real part seen over all tested pencils.
    pub max_real_part: f64,
    /// First Laplacian eigenvalue whose pencil is not Hurwitz.
    pub witness_lambda: Option<f64>,
}

const HURWITZ_TOL: f64 = -1e-9;

impl LinearMas {
    pub fn new(
        graph: WeightedGraph,
        inertias: DVector<f64>,
        input: DMatrix<f64>,
        output: DMatrix<f64>,
        agent: AgentDynamics,
    ) -> Result<Self> {
        let n = graph.n_vertices();
        if graph.is_directed() {
            return Err(Error::Model("network graph must be undirected".into()));
        }
        if !graph.is_connected()? {
            return Err(Error::Model("network graph must be connected".into()));
        }
        if inertias.len() != n {
            return Err(Error::Model(format!(
                "expected {n} inertias, got {}",
                inertias.len()
            )));
        }
        if inertias.iter().any(|&m| !(m > 0.0) || !m.is_finite()) {
            return Err(Error::Model("inertias must be positive".into()));
        }
        if input.nrows() != n {
            return Err(Error::Model("input map must have one row per vertex".into()));
        }
        if output.ncols() != n {
            return Err(Error::Model(
                "output map must have one column per vertex".into(),
            ));
        }
        Ok(Self {
            graph,
            inertias,
            input,
            output,
            agent,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.graph.n_vertices()
    }

    /// Full state dimension 𝗇·n.
    pub fn order(&self) -> usize {
        self.n_agents() * self.agent.dim()
    }

    pub fn inertia_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.inertias)
    }

    pub fn laplacian(&self) -> DMatrix<f64> {
        self.graph.build_matrices().laplacian
    }
}

/// `𝖻_ik = 1` iff vertex i is the k-th leader (1-based leader ids).
pub fn leader_follower_input(n: usize, leaders: &[usize]) -> Result<DMatrix<f64>> {
    if leaders.is_empty() {
        return Err(Error::Model("at least one leader required".into()));
    }
    let mut b = DMatrix::<f64>::zeros(n, leaders.len());
    let mut seen = vec![false; n];
    for (k, &v) in leaders.iter().enumerate() {
        if v < 1 || v > n {
            return Err(Error::Model(format!("leader {v} outside 1..={n}")));
        }
        if seen[v - 1] {
            return Err(Error::Model(format!("duplicate leader {v}")));
        }
        seen[v - 1] = true;
        b[(v - 1, k)] = 1.0;
    }
    Ok(b)
}

/// Kronecker assembly `(𝖬⊗E, 𝖬⊗A − 𝖫⊗BKC, 𝖡⊗B, 𝖢⊗C)`.
pub fn realize(sys: &LinearMas) -> LtiRealization {
    let m = sys.inertia_matrix();
    let l = sys.laplacian();
    let bkc = &sys.agent.b * &sys.agent.k * &sys.agent.c;
    LtiRealization {
        e: kron(&m, &sys.agent.e),
        a: kron(&m, &sys.agent.a) - kron(&l, &bkc),
        b: kron(&sys.input, &sys.agent.b),
        c: kron(&sys.output, &sys.agent.c),
    }
}

fn pencil_max_real(a: &DMatrix<f64>, e: &DMatrix<f64>) -> Result<f64> {
    let f = e
        .clone()
        .lu()
        .solve(a)
        .ok_or_else(|| Error::Model("agent E is singular".into()))?;
    Ok(complex_eigenvalues(&f)
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Nonzero eigenvalues λ₂ ≤ … ≤ λ_𝗇 of the pencil `(𝖫, 𝖬)`.
pub fn coupling_eigenvalues(sys: &LinearMas) -> Result<Vec<f64>> {
    let l = sys.laplacian();
    let m = sys.inertia_matrix();
    let (vals, _) = sym_gen_eig(&l, &m)?;
    Ok(vals.iter().skip(1).copied().collect())
}

/// Synchronization ⇔ `(A − λᵢ B K C, E)` Hurwitz for every nonzero Laplacian
/// eigenvalue λᵢ.
pub fn is_synchronized(sys: &LinearMas) -> Result<SyncReport> {
    let mut max_re = f64::NEG_INFINITY;
    let mut witness = None;
    for lam in coupling_eigenvalues(sys)? {
        let re = pencil_max_real(&sys.agent.coupled(lam), &sys.agent.e)?;
        if re > max_re {
            max_re = re;
        }
        if re >= HURWITZ_TOL && witness.is_none() {
            witness = Some(lam);
        }
    }
    Ok(SyncReport {
        synchronized: witness.is_none(),
        max_real_part: max_re,
        witness_lambda: witness,
    })
}

/// Sampled check that `(A − λBKC, E)` stays Hurwitz over the whole interval
/// `[λ₂, λ_𝗇]`; clustering can only move eigenvalues inside that interval
/// (interlacing), so a clean sweep implies every clustered model stays
/// synchronized. Sampling-based, not a certificate.
pub fn check_sync_preserved_for_all_partitions(
    sys: &LinearMas,
    lambda_samples: usize,
) -> Result<bool> {
    let eigs = coupling_eigenvalues(sys)?;
    let (Some(&lo), Some(&hi)) = (eigs.first(), eigs.last()) else {
        return Ok(true);
    };
    let samples = lambda_samples.max(2);
    for k in 0..samples {
        let lam = lo + (hi - lo) * k as f64 / (samples - 1) as f64;
        let re = pencil_max_real(&sys.agent.coupled(lam), &sys.agent.e)?;
        if re >= HURWITZ_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Project onto a partition: `𝖬̂ = Pᵀ𝖬P`, `𝖫̂ = Pᵀ𝖫P`, `𝖡̂ = Pᵀ𝖡`,
/// `𝖢̂ = 𝖢P`, agent dynamics unchanged. The reduced graph is rebuilt from
/// the off-diagonal of `𝖫̂` (merged parallel edges; any diagonal surplus is
/// implicit in the Laplacian reconstruction).
pub fn cluster_reduce(sys: &LinearMas, p: &Partition) -> Result<LinearMas> {
    if p.n_vertices() != sys.n_agents() {
        return Err(Error::Model(format!(
            "partition covers {} vertices, system has {}",
            p.n_vertices(),
            sys.n_agents()
        )));
    }
    let pm = p.characteristic_matrix();
    let r = p.n_clusters();
    let l_hat = pm.transpose() * sys.laplacian() * &pm;

    let mut edges = Vec::new();
    for i in 0..r {
        for j in i + 1..r {
            let w = -l_hat[(i, j)];
            if w > 1e-12 {
                edges.push((i + 1, j + 1, w));
            }
        }
    }
    let graph = WeightedGraph::undirected(r, &edges)?;

    let mut inertias = DVector::<f64>::zeros(r);
    for (k, cluster) in p.clusters().iter().enumerate() {
        inertias[k] = cluster.iter().map(|&v| sys.inertias[v]).sum();
    }

    LinearMas::new(
        graph,
        inertias,
        pm.transpose() * &sys.input,
        &sys.output * &pm,
        sys.agent.clone(),
    )
}
