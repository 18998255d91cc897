//! The two bundled benchmark networks and the canonical input signals.

use crate::error::Result;
use crate::graph::WeightedGraph;
use crate::sysfile::{AgentSpec, InertiaSpec, InputSpec, OutputSpec, SystemFile};

/// Ten-vertex leader-follower network: unit inertias, leaders at 6 and 7,
/// edge-incidence output.
pub const SMALL_NETWORK_EDGES: [(usize, usize, f64); 15] = [
    (1, 6, 5.0),
    (2, 5, 3.0),
    (2, 6, 2.0),
    (3, 4, 1.0),
    (3, 5, 2.0),
    (3, 6, 3.0),
    (4, 5, 5.0),
    (5, 6, 2.0),
    (5, 7, 6.0),
    (5, 8, 7.0),
    (6, 7, 6.0),
    (6, 8, 7.0),
    (7, 8, 1.0),
    (7, 9, 1.0),
    (7, 10, 1.0),
];

pub fn small_network() -> SystemFile {
    SystemFile {
        name: "small_network".into(),
        n_vertices: 10,
        edges: SMALL_NETWORK_EDGES.to_vec(),
        inertias: InertiaSpec::Uniform(1.0),
        input: InputSpec::Leaders(vec![6, 7]),
        output: OutputSpec::Incidence,
        agent: AgentSpec::SingleIntegrator,
    }
}

/// 10×10 Van der Pol lattice, input at the first corner node, full state
/// observation.
pub fn vanderpol_grid() -> Result<SystemFile> {
    let graph = WeightedGraph::grid(10, 10, 1.0)?;
    Ok(SystemFile {
        name: "vdp_grid".into(),
        n_vertices: graph.n_vertices(),
        edges: graph.edges_one_based(),
        inertias: InertiaSpec::Uniform(1.0),
        input: InputSpec::Leaders(vec![1]),
        output: OutputSpec::Identity,
        agent: AgentSpec::VanDerPol { mu: 0.5, sigma: 0.1, c: 100.0 },
    })
}

/// Training signal `u(t) = e⁻ᵗ`.
pub fn train_input(t: f64) -> f64 {
    (-t).exp()
}

/// Test signal `u(t) = e^{−t/10} sin t`.
pub fn test_input(t: f64) -> f64 {
    (-t / 10.0).exp() * t.sin()
}

pub const TRAIN_INPUT_NAME: &str = "train";
pub const TEST_INPUT_NAME: &str = "test";
