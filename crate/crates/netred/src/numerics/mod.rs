//! Dense linear-algebra and integration contracts consumed by every other
//! module; also the single place tolerance policy lives.

mod eig;
mod expm;
mod lyap;
mod ode;
mod qr;
mod svd;

pub use eig::{complex_eigenvalues, gen_eig_lr, realify_columns, sym_gen_eig};
pub use expm::expm;
pub use lyap::{solve_gen_lyapunov, solve_gen_lyapunov_kron};
pub use ode::{integrate_ode, JacFn, OdeOptions, OdeSolution, RhsFn};
pub use qr::qr_column_pivot;
pub use svd::svd;

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Default factorization residual tolerance.
pub const FACT_TOL: f64 = 1e-10;

/// Standard-normal matrix via Box–Muller, deterministic for a given stream.
pub fn randn_matrix(rng: &mut ChaCha8Rng, n: usize, r: usize) -> DMatrix<f64> {
    let mut cache: Option<f64> = None;
    DMatrix::from_fn(n, r, |_, _| {
        if let Some(z) = cache.take() {
            z
        } else {
            let u1: f64 = rng.random::<f64>().max(1e-300);
            let u2: f64 = rng.random::<f64>();
            let radius = (-2.0 * u1.ln()).sqrt();
            let theta = std::f64::consts::TAU * u2;
            cache = Some(radius * theta.sin());
            radius * theta.cos()
        }
    })
}

/// Reject NaN/Inf before they enter any operation.
pub fn check_finite(name: &str, m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerics(format!("{name} contains non-finite entries")))
    }
}

/// Root-mean-square norm, `|x|_2 / sqrt(len)`.
pub fn rms_norm(x: &DVector<f64>) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        x.norm() / (x.len() as f64).sqrt()
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = DMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij != 0.0 {
                out.view_mut((i * br, j * bc), (br, bc))
                    .copy_from(&(b * aij));
            }
        }
    }
    out
}

/// Orthonormal basis of the column span via thin QR.
pub fn orthonormalize(m: &DMatrix<f64>) -> DMatrix<f64> {
    let qr = m.clone().qr();
    let q = qr.q();
    q.columns(0, m.ncols().min(m.nrows())).into_owned()
}
