//! Eigenvalue machinery: symmetric generalized problems, complex spectra of
//! real matrices, and two-sided eigenvectors for small generalized pairs.

use crate::error::{Error, Result};
use crate::numerics::check_finite;
use nalgebra::{Complex, DMatrix, DVector};

type CMatrix = DMatrix<Complex<f64>>;
type CVector = DVector<Complex<f64>>;

/// Symmetric-definite generalized eigenproblem `A v = λ M v`.
///
/// `A` must be symmetric (within 1e-10 relative), `M` symmetric positive
/// definite. Eigenvalues are returned ascending, eigenvectors M-orthonormal.
pub fn sym_gen_eig(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    check_finite("sym_gen_eig A", a)?;
    check_finite("sym_gen_eig M", m)?;
    let n = a.nrows();
    if a.ncols() != n || m.nrows() != n || m.ncols() != n {
        return Err(Error::Numerics("sym_gen_eig: dimension mismatch".into()));
    }
    let scale = a.norm().max(1e-300);
    if (a - a.transpose()).norm() > 1e-10 * scale {
        return Err(Error::Numerics("sym_gen_eig: A not symmetric".into()));
    }
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerics("sym_gen_eig: M not positive definite".into()))?;
    let l = chol.l();
    // S = L⁻¹ A L⁻ᵀ, symmetrized.
    let la = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::Numerics("sym_gen_eig: singular Cholesky factor".into()))?;
    let s_raw = l
        .solve_lower_triangular(&la.transpose())
        .ok_or_else(|| Error::Numerics("sym_gen_eig: singular Cholesky factor".into()))?;
    let s = (&s_raw + s_raw.transpose()) * 0.5;

    let eig = s.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let mut vals = DVector::zeros(n);
    let mut q = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vals[k] = eig.eigenvalues[i];
        q.set_column(k, &eig.eigenvectors.column(i));
    }
    // v = L⁻ᵀ q, so that vᵀ M v = I.
    let lt = l.transpose();
    let vecs = lt
        .solve_upper_triangular(&q)
        .ok_or_else(|| Error::Numerics("sym_gen_eig: singular Cholesky factor".into()))?;

    #[cfg(debug_assertions)]
    {
        let resid = (a * &vecs - m * &vecs * DMatrix::from_diagonal(&vals)).norm();
        debug_assert!(
            resid <= 1e-8 * scale.max(1.0),
            "sym_gen_eig residual {resid:e} too large"
        );
    }
    Ok((vals, vecs))
}

/// Complex eigenvalues of a real square matrix, sorted by (re, im).
pub fn complex_eigenvalues(f: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let mut vals: Vec<Complex<f64>> = f.clone().complex_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    vals
}

fn inverse_iteration(f: &CMatrix, lambda: Complex<f64>, start_seed: usize) -> Result<CVector> {
    let n = f.nrows();
    let shift = lambda + Complex::new(1e-10 * (1.0 + lambda.norm()), 1e-12);
    let mut shifted = f.clone();
    for i in 0..n {
        shifted[(i, i)] -= shift;
    }
    let lu = shifted.lu();
    // Deterministic start vector; varied per eigenvalue index to avoid an
    // unlucky orthogonal start.
    let mut x = CVector::from_fn(n, |i, _| {
        let t = ((i + 1) * (start_seed + 2)) as f64;
        Complex::new((t * 0.7390851332151607).sin(), 0.0)
    });
    let nrm = x.norm();
    x /= Complex::new(nrm, 0.0);
    for _ in 0..3 {
        let y = lu
            .solve(&x)
            .ok_or_else(|| Error::Numerics("inverse iteration: singular shifted matrix".into()))?;
        let nrm = y.norm();
        if !nrm.is_finite() || nrm == 0.0 {
            return Err(Error::Numerics("inverse iteration diverged".into()));
        }
        x = y / Complex::new(nrm, 0.0);
    }
    // Phase normalization: largest-modulus entry made real positive.
    let mut imax = 0;
    let mut vmax = 0.0;
    for (i, v) in x.iter().enumerate() {
        if v.norm() > vmax {
            vmax = v.norm();
            imax = i;
        }
    }
    let phase = x[imax] / Complex::new(x[imax].norm(), 0.0);
    x /= phase;
    Ok(x)
}

/// Turn a conjugate-closed set of complex columns into a real matrix with the
/// same span: real eigenvalues keep `Re v`; each conjugate pair contributes
/// `[Re v, Im v]` once, with the partner column consumed.
pub fn realify_columns(cols: &CMatrix, vals: &[Complex<f64>]) -> Result<DMatrix<f64>> {
    let (n, r) = cols.shape();
    if vals.len() != r {
        return Err(Error::Numerics("realify: value/column count mismatch".into()));
    }
    let mut out = DMatrix::<f64>::zeros(n, r);
    let mut used = vec![false; r];
    let mut j = 0usize;
    for (i, &s) in vals.iter().enumerate() {
        if used[i] {
            continue;
        }
        if s.im.abs() < 1e-12 {
            for row in 0..n {
                out[(row, j)] = cols[(row, i)].re;
            }
            j += 1;
            used[i] = true;
        } else {
            let partner = (0..r).find(|&k| {
                !used[k] && k != i && (vals[k] - s.conj()).norm() < 1e-8 * s.norm().max(1.0)
            });
            let Some(k) = partner else {
                return Err(Error::Numerics(
                    "realify: complex value without conjugate partner".into(),
                ));
            };
            for row in 0..n {
                out[(row, j)] = cols[(row, i)].re;
                out[(row, j + 1)] = cols[(row, i)].im;
            }
            j += 2;
            used[i] = true;
            used[k] = true;
        }
    }
    if j != r {
        return Err(Error::Numerics("realify: column count mismatch".into()));
    }
    Ok(out)
}

/// Eigenvalues with right and left eigenvectors of the generalized pair
/// `(A, E)`: `A x = λ E x` and `yᴴ A = λ yᴴ E`.
///
/// Intended for small, well-separated spectra (reduced-order models, agent
/// blocks). Eigenvalues are sorted by (re(−λ), im(−λ)) to give IRKA a stable
/// shift ordering; columns of `X`/`Y` match the eigenvalue order.
pub fn gen_eig_lr(a: &DMatrix<f64>, e: &DMatrix<f64>) -> Result<(Vec<Complex<f64>>, CMatrix, CMatrix)> {
    let n = a.nrows();
    let lu_e = e.clone().lu();
    let f = lu_e
        .solve(a)
        .ok_or_else(|| Error::Numerics("gen_eig_lr: E singular".into()))?;
    // Left eigenvectors of (A, E) are conjugates of right eigenvectors of
    // (A E⁻¹)ᵀ = E⁻ᵀ Aᵀ at the same eigenvalue.
    let g = e
        .transpose()
        .lu()
        .solve(&a.transpose())
        .ok_or_else(|| Error::Numerics("gen_eig_lr: E singular".into()))?;

    let mut vals = complex_eigenvalues(&f);
    vals.sort_by(|a, b| {
        let (ma, mb) = (-a, -b);
        ma.re.total_cmp(&mb.re).then(ma.im.total_cmp(&mb.im))
    });

    let fc = f.map(|x| Complex::new(x, 0.0));
    let gc = g.map(|x| Complex::new(x, 0.0));
    let mut x_mat = CMatrix::zeros(n, n);
    let mut y_mat = CMatrix::zeros(n, n);
    for (k, &lam) in vals.iter().enumerate() {
        let x = inverse_iteration(&fc, lam, k)?;
        let z = inverse_iteration(&gc, lam, k)?;
        x_mat.set_column(k, &x);
        y_mat.set_column(k, &z.map(|v| v.conj()));
    }
    Ok((vals, x_mat, y_mat))
}
