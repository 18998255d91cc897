//! Clustering-based, structure-preserving model order reduction for
//! multi-agent network systems.
//!
//! The crate covers the full pipeline for linear and nonlinear network
//! systems coupled over weighted graphs:
//!
//! * graph matrices (adjacency, degree, Laplacian, incidence) — [`graph`]
//! * set partitions, characteristic matrices and exhaustive enumeration —
//!   [`partition`]
//! * dense linear algebra, Lyapunov solves and a stiff ODE integrator —
//!   [`numerics`]
//! * linear multi-agent assembly, synchronization checks and clustered
//!   (Petrov–Galerkin) reduction — [`mas`]
//! * stable/non-stable decomposition and H2 / H-infinity error evaluation —
//!   [`stabsep`]
//! * projection bases: IRKA, balanced truncation, POD — [`mor`]
//! * partition recovery from basis rows: QR-pivot and k-means — [`clustering`]
//! * the nonlinear network class with structure-preserving clustering —
//!   [`nonlinear`]
//! * exhaustive partition ranking and the MOR → cluster → evaluate pipeline —
//!   [`search`]
//! * a line-oriented system file format shared with the CLI — [`sysfile`]
//!
//! The `netred` binary exposes the same functionality as subcommands
//! (`graph-info`, `enumerate`, `cluster`, `simulate`, `repro`).

pub mod clustering;
pub mod error;
pub mod graph;
pub mod mas;
pub mod mor;
pub mod nonlinear;
pub mod numerics;
pub mod partition;
pub mod presets;
pub mod search;
pub mod stabsep;
pub mod sysfile;

pub use error::{Error, Result};
