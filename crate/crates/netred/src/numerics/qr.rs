//! Column-pivoted QR (Businger–Golub with Householder reflections).

use crate::error::Result;
use crate::numerics::check_finite;
use nalgebra::{DMatrix, DVector};

/// QR decomposition with column pivoting: `A Π = Q R` with `Q` having
/// orthonormal columns and the diagonal magnitudes of `R` non-increasing.
///
/// Returns `(Q, R, piv)` where `piv[k]` is the original index of the column
/// placed at pivot position `k`, i.e. `A[:, piv] = Q R`.
pub fn qr_column_pivot(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>, Vec<usize>)> {
    check_finite("qr_column_pivot input", a)?;
    let (m, n) = a.shape();
    let k = m.min(n);
    let mut r = a.clone();
    let mut piv: Vec<usize> = (0..n).collect();
    // Householder vectors stored below the diagonal; tau per column.
    let mut tau = DVector::zeros(k);
    // Running squared column norms for pivot selection, periodically
    // recomputed to dodge cancellation drift.
    let mut norms: Vec<f64> = (0..n).map(|j| r.column(j).norm_squared()).collect();

    for col in 0..k {
        // Pivot: remaining column with the largest residual norm.
        let (jmax, _) = norms
            .iter()
            .enumerate()
            .skip(col)
            .fold((col, -1.0), |acc, (j, &v)| if v > acc.1 { (j, v) } else { acc });
        if jmax != col {
            r.swap_columns(col, jmax);
            piv.swap(col, jmax);
            norms.swap(col, jmax);
        }

        // Householder reflection zeroing r[col+1.., col].
        let x_norm = r.view((col, col), (m - col, 1)).norm();
        if x_norm > 0.0 {
            let alpha = if r[(col, col)] >= 0.0 { -x_norm } else { x_norm };
            let v0 = r[(col, col)] - alpha;
            r[(col, col)] = alpha;
            if v0.abs() > 0.0 {
                for i in col + 1..m {
                    r[(i, col)] /= v0;
                }
                tau[col] = -v0 / alpha;
            } else {
                tau[col] = 0.0;
            }
            // Apply H = I - tau v v^T to the trailing columns (v0 = 1).
            for j in col + 1..n {
                let mut dot = r[(col, j)];
                for i in col + 1..m {
                    dot += r[(i, col)] * r[(i, j)];
                }
                let s = tau[col] * dot;
                r[(col, j)] -= s;
                for i in col + 1..m {
                    let vi = r[(i, col)];
                    r[(i, j)] -= s * vi;
                }
            }
        } else {
            tau[col] = 0.0;
        }

        // Downdate residual norms.
        for j in col + 1..n {
            norms[j] -= r[(col, j)] * r[(col, j)];
            if norms[j] < 1e-12 * r.column(j).norm_squared().max(1.0) {
                norms[j] = r.view((col + 1, j), (m - col - 1, 1)).norm_squared();
            }
        }
    }

    // Accumulate Q by applying the reflections to the identity.
    let mut q = DMatrix::identity(m, k);
    for col in (0..k).rev() {
        if tau[col] == 0.0 {
            continue;
        }
        for j in 0..k {
            let mut dot = q[(col, j)];
            for i in col + 1..m {
                dot += r[(i, col)] * q[(i, j)];
            }
            let s = tau[col] * dot;
            q[(col, j)] -= s;
            for i in col + 1..m {
                let vi = r[(i, col)];
                q[(i, j)] -= s * vi;
            }
        }
    }

    // Zero the sub-diagonal storage to leave a clean upper-triangular R.
    let mut r_clean = DMatrix::zeros(k, n);
    for i in 0..k {
        for j in i..n {
            r_clean[(i, j)] = r[(i, j)];
        }
    }
    Ok((q, r_clean, piv))
}
