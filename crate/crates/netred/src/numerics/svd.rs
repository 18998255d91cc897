//! SVD wrapper with a deterministic sign convention.

use crate::error::{Error, Result};
use crate::numerics::check_finite;
use nalgebra::{DMatrix, DVector};

/// Singular value decomposition `A = U Σ Vᵀ` with singular values descending.
///
/// Sign convention: the largest-magnitude entry of each left singular vector
/// is positive (the corresponding right vector is flipped along with it), so
/// repeated runs and different backends agree bit-for-bit on well-separated
/// spectra.
pub fn svd(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, DVector<f64>, DMatrix<f64>)> {
    check_finite("svd input", a)?;
    let svd = a.clone().svd(true, true);
    let mut u = svd.u.ok_or_else(|| Error::Numerics("svd: U not computed".into()))?;
    let mut vt = svd
        .v_t
        .ok_or_else(|| Error::Numerics("svd: Vᵀ not computed".into()))?;
    let s = svd.singular_values;

    for j in 0..u.ncols() {
        let col = u.column(j);
        let mut imax = 0;
        let mut vmax = 0.0f64;
        for (i, &x) in col.iter().enumerate() {
            if x.abs() > vmax {
                vmax = x.abs();
                imax = i;
            }
        }
        if u[(imax, j)] < 0.0 {
            u.column_mut(j).neg_mut();
            if j < vt.nrows() {
                vt.row_mut(j).neg_mut();
            }
        }
    }
    Ok((u, s, vt))
}
