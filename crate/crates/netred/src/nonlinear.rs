//! Control-affine nonlinear multi-agent networks, clustered reduction that
//! keeps the network form, time integration, and trajectory error metrics.

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::mas::LinearMas;
use crate::numerics::{integrate_ode, randn_matrix, OdeOptions, OdeSolution};
use crate::partition::Partition;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Agent drift `A(x)`.
pub type DriftFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
/// Agent input map `B(x)`, n×m.
pub type InputMapFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;
/// Agent output `C(x)`, ℝᵖ.
pub type OutputMapFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
/// Edge coupling `K(zᵢ, zⱼ)`, ℝᵐ; synchronizing couplings have `K(z,z)=0`.
pub type CouplingFn = Arc<dyn Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync>;

/// Network of identical control-affine agents
/// `ẋᵢ = A(xᵢ) + B(xᵢ)vᵢ`, `zᵢ = C(xᵢ)`, coupled through the graph by
/// `𝗆ᵢvᵢ = Σⱼ 𝖺ᵢⱼ K(zᵢ,zⱼ) + Σₖ 𝖻ᵢₖ uₖ`.
#[derive(Clone)]
pub struct NonlinearMas {
    pub graph: WeightedGraph,
    pub inertias: DVector<f64>,
    /// Network input map, 𝗇×𝗆.
    pub input: DMatrix<f64>,
    /// Network output map, 𝗉×𝗇.
    pub output: DMatrix<f64>,
    /// Agent state dimension n.
    pub agent_dim: usize,
    pub drift: DriftFn,
    pub input_map: InputMapFn,
    pub output_map: OutputMapFn,
    pub coupling: CouplingFn,
    /// Agent input dimension m (columns of `B(x)`).
    pub m_agent: usize,
    /// Agent output dimension p (length of `C(x)`).
    pub p_agent: usize,
}

impl std::fmt::Debug for NonlinearMas {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NonlinearMas")
            .field("n_agents", &self.n_agents())
            .field("agent_dim", &self.agent_dim)
            .field("m_agent", &self.m_agent)
            .field("p_agent", &self.p_agent)
            .finish()
    }
}

impl NonlinearMas {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        graph: WeightedGraph,
        inertias: DVector<f64>,
        input: DMatrix<f64>,
        output: DMatrix<f64>,
        agent_dim: usize,
        drift: DriftFn,
        input_map: InputMapFn,
        output_map: OutputMapFn,
        coupling: CouplingFn,
    ) -> Result<Self> {
        let nv = graph.n_vertices();
        if graph.is_directed() {
            return Err(Error::Model("nonlinear MAS requires an undirected graph".into()));
        }
        if inertias.len() != nv {
            return Err(Error::Model(format!(
                "expected {nv} inertias, got {}",
                inertias.len()
            )));
        }
        if inertias.iter().any(|&m| !(m > 0.0) || !m.is_finite()) {
            return Err(Error::Model("inertias must be positive and finite".into()));
        }
        if input.nrows() != nv {
            return Err(Error::Model(format!(
                "input map must have {nv} rows, got {}",
                input.nrows()
            )));
        }
        if output.ncols() != nv {
            return Err(Error::Model(format!(
                "output map must have {nv} columns, got {}",
                output.ncols()
            )));
        }
        if agent_dim == 0 {
            return Err(Error::Model("agent dimension must be positive".into()));
        }

        // Probe all four callbacks at the origin to pin dimensions down early.
        let zero = DVector::zeros(agent_dim);
        let a0 = drift(&zero);
        if a0.len() != agent_dim {
            return Err(Error::Model(format!(
                "drift callback returned length {} for agent dimension {agent_dim}",
                a0.len()
            )));
        }
        let b0 = input_map(&zero);
        if b0.nrows() != agent_dim {
            return Err(Error::Model(format!(
                "input-map callback returned {} rows for agent dimension {agent_dim}",
                b0.nrows()
            )));
        }
        let m_agent = b0.ncols();
        let c0 = output_map(&zero);
        let p_agent = c0.len();
        if p_agent == 0 {
            return Err(Error::Model("output callback returned an empty vector".into()));
        }
        let k0 = coupling(&c0, &c0);
        if k0.len() != m_agent {
            return Err(Error::Model(format!(
                "coupling callback returned length {}, expected agent input dimension {m_agent}",
                k0.len()
            )));
        }
        if a0.iter().chain(k0.iter()).any(|x| !x.is_finite())
            || b0.iter().any(|x| !x.is_finite())
            || c0.iter().any(|x| !x.is_finite())
        {
            return Err(Error::Model("callback probe produced non-finite values".into()));
        }

        Ok(Self {
            graph,
            inertias,
            input,
            output,
            agent_dim,
            drift,
            input_map,
            output_map,
            coupling,
            m_agent,
            p_agent,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.graph.n_vertices()
    }

    /// Full stacked state dimension 𝗇·n.
    pub fn order(&self) -> usize {
        self.n_agents() * self.agent_dim
    }

    pub fn n_inputs(&self) -> usize {
        self.input.ncols() * self.m_agent
    }

    fn agent_state(&self, x: &DVector<f64>, i: usize) -> DVector<f64> {
        x.rows(i * self.agent_dim, self.agent_dim).into_owned()
    }

    /// Mass-form right-hand side `f(x, u)` of `(𝖬⊗Iₙ)ẋ = f(x, u)`.
    ///
    /// `u` stacks the network inputs agent-input-major: length 𝗆·m.
    pub fn rhs(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let nv = self.n_agents();
        let n = self.agent_dim;
        let m = self.m_agent;
        let outputs: Vec<DVector<f64>> =
            (0..nv).map(|i| (self.output_map)(&self.agent_state(x, i))).collect();

        // External drive per agent: Σₖ 𝖻ᵢₖ uₖ, uₖ ∈ ℝᵐ.
        let mut drive = vec![DVector::<f64>::zeros(m); nv];
        for i in 0..nv {
            for k in 0..self.input.ncols() {
                let bik = self.input[(i, k)];
                if bik != 0.0 {
                    drive[i] += u.rows(k * m, m) * bik;
                }
            }
        }
        for &(i, j, w) in self.graph.edges() {
            let kij = (self.coupling)(&outputs[i], &outputs[j]);
            let kji = (self.coupling)(&outputs[j], &outputs[i]);
            drive[i] += kij * w;
            drive[j] += kji * w;
        }

        let mut f = DVector::<f64>::zeros(nv * n);
        for i in 0..nv {
            let xi = self.agent_state(x, i);
            let fi = (self.drift)(&xi) * self.inertias[i] + (self.input_map)(&xi) * &drive[i];
            f.rows_mut(i * n, n).copy_from(&fi);
        }
        f
    }

    /// Network output `y_ℓ = Σⱼ 𝖼_ℓⱼ C(xⱼ)`, stacked output-row-major.
    pub fn output_at(&self, x: &DVector<f64>) -> DVector<f64> {
        let nv = self.n_agents();
        let p = self.p_agent;
        let outputs: Vec<DVector<f64>> =
            (0..nv).map(|j| (self.output_map)(&self.agent_state(x, j))).collect();
        let mut y = DVector::<f64>::zeros(self.output.nrows() * p);
        for l in 0..self.output.nrows() {
            let mut yl = DVector::<f64>::zeros(p);
            for j in 0..nv {
                let clj = self.output[(l, j)];
                if clj != 0.0 {
                    yl += &outputs[j] * clj;
                }
            }
            y.rows_mut(l * p, p).copy_from(&yl);
        }
        y
    }

    /// Linear single-network instantiation: agent `ẋ = Ax + Bv`, `z = Cx`,
    /// diffusive coupling `K(zᵢ,zⱼ) = 𝖪(zⱼ − zᵢ)`. Requires `E = I`.
    pub fn from_linear(sys: &LinearMas) -> Result<Self> {
        let ag = &sys.agent;
        if (ag.e.clone() - DMatrix::<f64>::identity(ag.dim(), ag.dim())).amax() > 1e-14 {
            return Err(Error::Model(
                "nonlinear wrapper requires an identity agent descriptor matrix".into(),
            ));
        }
        let a = ag.a.clone();
        let b = ag.b.clone();
        let c = ag.c.clone();
        let k = ag.k.clone();
        Self::new(
            sys.graph.clone(),
            sys.inertias.clone(),
            sys.input.clone(),
            sys.output.clone(),
            ag.dim(),
            Arc::new(move |x: &DVector<f64>| &a * x),
            Arc::new(move |_: &DVector<f64>| b.clone()),
            Arc::new(move |x: &DVector<f64>| &c * x),
            Arc::new(move |zi: &DVector<f64>, zj: &DVector<f64>| &k * (zj - zi)),
        )
    }
}

/// Van der Pol oscillator lattice: each grid node carries
/// `ẋ₁ = x₂ + σv`, `ẋ₂ = μ(1−x₁²)x₂ − x₁ − cv` with diffusive coupling of
/// `z = x₁ + x₂` and the input entering at the first (corner) node.
#[derive(Debug, Clone, Copy)]
pub struct VanDerPolNetwork {
    pub mu: f64,
    pub sigma: f64,
    pub coupling: f64,
    pub rows: usize,
    pub cols: usize,
}

impl Default for VanDerPolNetwork {
    fn default() -> Self {
        Self { mu: 0.5, sigma: 0.1, coupling: 100.0, rows: 10, cols: 10 }
    }
}

impl VanDerPolNetwork {
    pub fn build(&self) -> Result<NonlinearMas> {
        let graph = WeightedGraph::grid(self.rows, self.cols, 1.0)?;
        let nv = graph.n_vertices();
        let inertias = DVector::from_element(nv, 1.0);
        let mut input = DMatrix::<f64>::zeros(nv, 1);
        input[(0, 0)] = 1.0;
        let output = DMatrix::<f64>::identity(nv, nv);
        let mu = self.mu;
        let sigma = self.sigma;
        let c = self.coupling;
        NonlinearMas::new(
            graph,
            inertias,
            input,
            output,
            2,
            Arc::new(move |x: &DVector<f64>| {
                DVector::from_vec(vec![x[1], mu * (1.0 - x[0] * x[0]) * x[1] - x[0]])
            }),
            Arc::new(move |_: &DVector<f64>| DMatrix::from_column_slice(2, 1, &[sigma, -c])),
            Arc::new(|x: &DVector<f64>| DVector::from_element(1, x[0] + x[1])),
            Arc::new(|zi: &DVector<f64>, zj: &DVector<f64>| zi - zj),
        )
    }
}

/// Merge clusters: summed inertias and edge weights, aggregated input and
/// output maps, identical agent callbacks. The Galerkin identity
/// `f̂(x̂,u) = (Pᵀ⊗Iₙ) f((P⊗Iₙ)x̂, u)` is spot-checked at 20 seeded random
/// points; couplings with `K(z,z) ≠ 0` fail it and are rejected.
pub fn cluster_reduce_nonlinear(sys: &NonlinearMas, p: &Partition) -> Result<NonlinearMas> {
    let nv = sys.n_agents();
    if p.n_vertices() != nv {
        return Err(Error::Partition(format!(
            "partition covers {} vertices, system has {nv}",
            p.n_vertices()
        )));
    }
    let pc = p.characteristic_matrix();
    let r = p.n_clusters();

    let mats = sys.graph.build_matrices();
    let lred = pc.transpose() * &mats.laplacian * &pc;
    let mut edges = Vec::new();
    for i in 0..r {
        for j in (i + 1)..r {
            let w = -lred[(i, j)];
            if w > 1e-12 {
                edges.push((i + 1, j + 1, w));
            }
        }
    }
    let graph = WeightedGraph::undirected(r, &edges)?;

    let inertias = DVector::from_fn(r, |ci, _| {
        p.clusters()[ci].iter().map(|&i| sys.inertias[i]).sum()
    });
    let input = pc.transpose() * &sys.input;
    let output = &sys.output * &pc;

    let red = NonlinearMas::new(
        graph,
        inertias,
        input,
        output,
        sys.agent_dim,
        sys.drift.clone(),
        sys.input_map.clone(),
        sys.output_map.clone(),
        sys.coupling.clone(),
    )?;

    // Pointwise Galerkin check; exact for the synchronizing class, so any
    // visible deviation means the coupling leaks self-interaction.
    let n = sys.agent_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e6c);
    let lift = crate::numerics::kron(&pc, &DMatrix::identity(n, n));
    for _ in 0..20 {
        let xh = randn_matrix(&mut rng, r * n, 1).column(0).into_owned();
        let u = randn_matrix(&mut rng, sys.n_inputs(), 1).column(0).into_owned();
        let lhs = red.rhs(&xh, &u);
        let projected = lift.transpose() * sys.rhs(&(&lift * &xh), &u);
        let scale = projected.amax().max(1.0);
        let dev = (&lhs - &projected).amax();
        if !(dev <= 1e-12 * scale) {
            return Err(Error::Model(format!(
                "clustered reduction violates the Galerkin identity \
                 (deviation {dev:.2e}); coupling must satisfy K(z,z)=0"
            )));
        }
    }
    Ok(red)
}

/// Integrate the network with mass `𝖬⊗Iₙ` (diagonal, absorbed into the rhs).
/// `sample_times: None` returns the integrator's accepted steps — the POD
/// snapshot schedule.
pub fn simulate(
    sys: &NonlinearMas,
    x0: &DVector<f64>,
    u: &dyn Fn(f64) -> DVector<f64>,
    t_span: (f64, f64),
    sample_times: Option<&[f64]>,
    opts: &OdeOptions,
) -> Result<OdeSolution> {
    let nv = sys.n_agents();
    let n = sys.agent_dim;
    if x0.len() != nv * n {
        return Err(Error::Model(format!(
            "initial state length {} does not match order {}",
            x0.len(),
            nv * n
        )));
    }
    let u0 = u(t_span.0);
    if u0.len() != sys.n_inputs() {
        return Err(Error::Model(format!(
            "input signal length {} does not match {} network inputs",
            u0.len(),
            sys.n_inputs()
        )));
    }
    let minv: Vec<f64> = sys.inertias.iter().map(|&m| 1.0 / m).collect();
    let mut rhs = |t: f64, x: &DVector<f64>| -> DVector<f64> {
        let mut f = sys.rhs(x, &u(t));
        for i in 0..nv {
            for a in 0..n {
                f[i * n + a] *= minv[i];
            }
        }
        f
    };
    integrate_ode(&mut rhs, None, t_span, x0, sample_times, opts)
}

/// Lift a reduced trajectory through `P⊗Iₙ`: every agent of cluster `ci`
/// copies the cluster state.
pub fn lift_trajectory(p: &Partition, agent_dim: usize, reduced: &DMatrix<f64>) -> DMatrix<f64> {
    let labels = p.labels();
    let nv = labels.len();
    DMatrix::from_fn(nv * agent_dim, reduced.ncols(), |row, col| {
        let (agent, a) = (row / agent_dim, row % agent_dim);
        reduced[(labels[agent] * agent_dim + a, col)]
    })
}

/// Mass-weighted cluster average of a full state: the natural reduced
/// initial condition (zero maps to zero).
pub fn project_state(sys: &NonlinearMas, p: &Partition, x: &DVector<f64>) -> DVector<f64> {
    let n = sys.agent_dim;
    let r = p.n_clusters();
    let mut xh = DVector::<f64>::zeros(r * n);
    for (ci, cluster) in p.clusters().iter().enumerate() {
        let mass: f64 = cluster.iter().map(|&i| sys.inertias[i]).sum();
        for a in 0..n {
            let s: f64 = cluster.iter().map(|&i| sys.inertias[i] * x[i * n + a]).sum();
            xh[ci * n + a] = s / mass;
        }
    }
    xh
}

/// Relative L2 trajectory error `‖x − (P⊗Iₙ)x̂‖ / ‖x‖` on a shared uniform
/// grid, trapezoidal in time.
pub fn l2_relative_error(
    sys: &NonlinearMas,
    red: &NonlinearMas,
    p: &Partition,
    x0: &DVector<f64>,
    u: &dyn Fn(f64) -> DVector<f64>,
    t_span: (f64, f64),
    samples: usize,
) -> Result<f64> {
    if samples < 2 {
        return Err(Error::Model("l2 error needs at least 2 samples".into()));
    }
    let grid: Vec<f64> = (0..samples)
        .map(|i| {
            t_span.0 + (t_span.1 - t_span.0) * i as f64 / (samples - 1) as f64
        })
        .collect();
    let opts = OdeOptions::default();
    let full = simulate(sys, x0, u, t_span, Some(&grid), &opts)?;
    let x0h = project_state(sys, p, x0);
    let reduced = simulate(red, &x0h, u, t_span, Some(&grid), &opts)?;
    let lifted = lift_trajectory(p, sys.agent_dim, &reduced.y);

    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for j in 0..samples {
        let w = if j == 0 || j == samples - 1 { 0.5 } else { 1.0 };
        let mut e2 = 0.0f64;
        let mut x2 = 0.0f64;
        for i in 0..full.y.nrows() {
            let d = full.y[(i, j)] - lifted[(i, j)];
            e2 += d * d;
            x2 += full.y[(i, j)] * full.y[(i, j)];
        }
        num += w * e2;
        den += w * x2;
    }
    if den <= 0.0 {
        return Err(Error::Model(
            "reference trajectory is identically zero; relative error undefined".into(),
        ));
    }
    Ok((num / den).sqrt())
}
