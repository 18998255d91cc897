//! Generalized Lyapunov solvers: Bartels–Stewart on the transformed standard
//! equation, with a dense Kronecker fallback for small problems.

use crate::error::{Error, Result};
use crate::numerics::{check_finite, kron};
use nalgebra::{DMatrix, DVector, Schur};

/// Solve the standard Lyapunov equation `F Y + Y Fᵀ + C = 0` with `C`
/// symmetric, by real Schur reduction and block back-substitution.
fn solve_std_lyapunov(f: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = f.nrows();
    let schur = Schur::try_new(f.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerics("lyapunov: Schur iteration failed".into()))?;
    let (u, t) = schur.unpack();
    let ct = u.transpose() * c * &u;

    // Diagonal block boundaries of the quasi-triangular factor.
    let mut starts = Vec::new();
    let mut k = 0;
    while k < n {
        starts.push(k);
        if k + 1 < n && t[(k + 1, k)].abs() > 0.0 {
            k += 2;
        } else {
            k += 1;
        }
    }
    let nb = starts.len();
    let block = |b: usize| -> (usize, usize) {
        let s = starts[b];
        let e = if b + 1 < nb { starts[b + 1] } else { n };
        (s, e - s)
    };

    let mut y = DMatrix::<f64>::zeros(n, n);
    for bi in (0..nb).rev() {
        let (i0, p) = block(bi);
        for bj in (0..nb).rev() {
            let (j0, q) = block(bj);
            // RHS = −C̃_ij − Σ_{k>i} T_ik Y_kj − Σ_{l>j} Y_il T_jl
            let mut rhs = -ct.view((i0, j0), (p, q)).clone_owned();
            if i0 + p < n {
                rhs -= t.view((i0, i0 + p), (p, n - i0 - p))
                    * y.view((i0 + p, j0), (n - i0 - p, q));
            }
            if j0 + q < n {
                rhs -= y.view((i0, j0 + q), (p, n - j0 - q))
                    * t.view((j0, j0 + q), (q, n - j0 - q)).transpose();
            }
            // Small Sylvester T_ii Z + Z T_jjᵀ = RHS via Kronecker (pq ≤ 4).
            let tii = t.view((i0, i0), (p, p)).clone_owned();
            let tjj = t.view((j0, j0), (q, q)).clone_owned();
            let m = kron(&tjj, &DMatrix::identity(p, p)) + kron(&DMatrix::identity(q, q), &tii);
            let vec_rhs = DVector::from_iterator(p * q, rhs.iter().copied());
            let sol = m
                .lu()
                .solve(&vec_rhs)
                .ok_or_else(|| Error::Numerics("lyapunov: singular pencil (λ_i + λ_j = 0)".into()))?;
            for cjj in 0..q {
                for rii in 0..p {
                    y[(i0 + rii, j0 + cjj)] = sol[cjj * p + rii];
                }
            }
        }
    }
    let x = &u * y * u.transpose();
    Ok((&x + x.transpose()) * 0.5)
}

/// Solve `A X Eᵀ + E X Aᵀ + Q = 0` for symmetric `Q` via the equivalent
/// standard equation in `F = E⁻¹A`. Falls back to the Kronecker formulation
/// when the Schur iteration fails and the problem is small.
pub fn solve_gen_lyapunov(
    a: &DMatrix<f64>,
    e: &DMatrix<f64>,
    q: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    check_finite("lyapunov A", a)?;
    check_finite("lyapunov E", e)?;
    check_finite("lyapunov Q", q)?;
    let n = a.nrows();
    if a.ncols() != n || e.nrows() != n || e.ncols() != n || q.nrows() != n || q.ncols() != n {
        return Err(Error::Numerics("lyapunov: dimension mismatch".into()));
    }
    let lu = e.clone().lu();
    let f = lu
        .solve(a)
        .ok_or_else(|| Error::Numerics("lyapunov: E singular".into()))?;
    let tmp = lu
        .solve(q)
        .ok_or_else(|| Error::Numerics("lyapunov: E singular".into()))?;
    let c_raw = lu
        .solve(&tmp.transpose())
        .ok_or_else(|| Error::Numerics("lyapunov: E singular".into()))?
        .transpose();
    let c = (&c_raw + c_raw.transpose()) * 0.5;

    match solve_std_lyapunov(&f, &c) {
        Ok(x) => Ok(x),
        Err(err) => {
            if n <= 50 {
                solve_gen_lyapunov_kron(a, e, q)
            } else {
                Err(err)
            }
        }
    }
}

/// Dense Kronecker solve of `A X Eᵀ + E X Aᵀ + Q = 0`. Cubic in `n²`; meant
/// for cross-checking and for small systems (`n ≤ 50`).
pub fn solve_gen_lyapunov_kron(
    a: &DMatrix<f64>,
    e: &DMatrix<f64>,
    q: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if n > 50 {
        return Err(Error::Numerics(
            "kronecker lyapunov solver limited to n <= 50".into(),
        ));
    }
    let m = kron(e, a) + kron(a, e);
    let rhs = DVector::from_iterator(n * n, q.iter().map(|v| -v));
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerics("lyapunov: singular Kronecker system".into()))?;
    let x = DMatrix::from_iterator(n, n, sol.iter().copied());
    Ok((&x + x.transpose()) * 0.5)
}
