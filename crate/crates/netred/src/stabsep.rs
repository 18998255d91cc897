//! Separation of a synchronized network into asymptotically stable and
//! non-asymptotically-stable parts, plus H2/H∞ error norms evaluated on the
//! stable parts.

use crate::error::{Error, Result};
use crate::mas::{is_synchronized, realize, LinearMas, LtiRealization};
use crate::numerics::{
    complex_eigenvalues, gen_eig_lr, kron, realify_columns, solve_gen_lyapunov, svd,
};
use nalgebra::{Complex, DMatrix, DVector};

/// Two-sided bases splitting a realization into stable/unstable blocks, with
/// the projected subsystems.
#[derive(Debug, Clone)]
pub struct StableDecomposition {
    pub t_minus: DMatrix<f64>,
    pub s_minus: DMatrix<f64>,
    pub t_plus: DMatrix<f64>,
    pub s_plus: DMatrix<f64>,
    pub stable: LtiRealization,
    pub unstable: LtiRealization,
}

/// Absolute and relative variants of an error norm.
#[derive(Debug, Clone, Copy)]
pub struct NormError {
    pub absolute: f64,
    pub relative: f64,
}

const STABLE_RE: f64 = -1e-9;

/// Lower-bidiagonal `T₋ ∈ ℝ^{𝗇×(𝗇−1)}` with unit columns and `T₋ᵀ𝖬1 = 0`,
/// plus `𝗆₊ = 1ᵀ𝖬1`.
pub fn mas_stable_basis(inertias: &DVector<f64>) -> (DMatrix<f64>, f64) {
    let n = inertias.len();
    let mut t = DMatrix::<f64>::zeros(n, n.saturating_sub(1));
    for i in 0..n.saturating_sub(1) {
        let (mi, mj) = (inertias[i], inertias[i + 1]);
        let denom = (mi * mi + mj * mj).sqrt();
        t[(i, i)] = mj / denom;
        t[(i + 1, i)] = -mi / denom;
    }
    (t, inertias.sum())
}

/// Split the agent pair `(A, E)` into real stable/unstable right and left
/// bases via its eigenvectors.
fn agent_split(
    a: &DMatrix<f64>,
    e: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let (vals, x, y) = gen_eig_lr(a, e)?;
    let n = a.nrows();
    let stable_idx: Vec<usize> = (0..n).filter(|&i| vals[i].re < STABLE_RE).collect();
    let unstable_idx: Vec<usize> = (0..n).filter(|&i| vals[i].re >= STABLE_RE).collect();

    let take = |m: &DMatrix<Complex<f64>>, idx: &[usize]| {
        let mut out = DMatrix::<Complex<f64>>::zeros(n, idx.len());
        for (k, &i) in idx.iter().enumerate() {
            out.set_column(k, &m.column(i));
        }
        out
    };
    let vals_at = |idx: &[usize]| -> Vec<Complex<f64>> { idx.iter().map(|&i| vals[i]).collect() };

    let t_minus = realify_columns(&take(&x, &stable_idx), &vals_at(&stable_idx))?;
    let t_plus = realify_columns(&take(&x, &unstable_idx), &vals_at(&unstable_idx))?;
    let s_minus = realify_columns(&take(&y, &stable_idx), &vals_at(&stable_idx))?;
    let s_plus = realify_columns(&take(&y, &unstable_idx), &vals_at(&unstable_idx))?;
    Ok((t_minus, t_plus, s_minus, s_plus))
}

fn hstack(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows = blocks.iter().map(|b| b.nrows()).max().unwrap_or(0);
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::<f64>::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((0, at), (b.nrows(), b.ncols())).copy_from(*b);
        at += b.ncols();
    }
    out
}

/// Decompose a synchronized network. The stable block carries every strictly
/// decaying mode; the unstable block is the consensus dynamics shared by all
/// clustered models.
pub fn decompose_mas(sys: &LinearMas) -> Result<StableDecomposition> {
    let report = is_synchronized(sys)?;
    if !report.synchronized {
        return Err(Error::Model(format!(
            "system is not synchronized (pencil real part {:.3e} at λ = {:?})",
            report.max_real_part, report.witness_lambda
        )));
    }
    let n = sys.n_agents();
    let na = sys.agent.dim();
    let (t_graph, _m_plus) = mas_stable_basis(&sys.inertias);
    let (ta_minus, ta_plus, sa_minus, sa_plus) = agent_split(&sys.agent.a, &sys.agent.e)?;

    let ones = DMatrix::<f64>::from_element(n, 1, 1.0);
    let eye_a = DMatrix::<f64>::identity(na, na);
    let graph_block = kron(&t_graph, &eye_a);

    let t_minus = hstack(&[&graph_block, &kron(&ones, &ta_minus)]);
    let s_minus = hstack(&[&graph_block, &kron(&ones, &sa_minus)]);
    let t_plus = kron(&ones, &ta_plus);
    let s_plus = kron(&ones, &sa_plus);

    let full = realize(sys);
    let project = |s: &DMatrix<f64>, t: &DMatrix<f64>| LtiRealization {
        e: s.transpose() * &full.e * t,
        a: s.transpose() * &full.a * t,
        b: s.transpose() * &full.b,
        c: &full.c * t,
    };
    let stable = project(&s_minus, &t_minus);
    let unstable = project(&s_plus, &t_plus);

    // The bases must actually decouple the realization.
    let cross_e = (s_minus.transpose() * &full.e * &t_plus).norm().max(
        (s_plus.transpose() * &full.e * &t_minus).norm(),
    );
    let cross_a = (s_minus.transpose() * &full.a * &t_plus).norm().max(
        (s_plus.transpose() * &full.a * &t_minus).norm(),
    );
    let scale_e = full.e.norm().max(1.0);
    let scale_a = full.a.norm().max(1.0);
    if cross_e > 1e-8 * scale_e || cross_a > 1e-8 * scale_a {
        return Err(Error::Model(
            "stable/unstable bases failed to block-diagonalize the realization".into(),
        ));
    }

    Ok(StableDecomposition {
        t_minus,
        s_minus,
        t_plus,
        s_plus,
        stable,
        unstable,
    })
}

/// `‖H‖_H2 = √(trace(C X Cᵀ))` with `A X Eᵀ + E X Aᵀ + BBᵀ = 0`.
pub fn h2_norm(r: &LtiRealization) -> Result<f64> {
    if r.order() == 0 {
        return Ok(0.0);
    }
    let x = solve_gen_lyapunov(&r.a, &r.e, &(&r.b * r.b.transpose()))?;
    let cxc = &r.c * x * r.c.transpose();
    Ok(cxc.trace().max(0.0).sqrt())
}

/// Largest singular value of `H(iω) = C(iωE − A)⁻¹B`, via the real embedding
/// `[[−A, −ωE], [ωE, −A]]`.
pub fn transfer_sv_max(r: &LtiRealization, omega: f64) -> f64 {
    let k = r.order();
    if k == 0 {
        return 0.0;
    }
    // Solve (iωE − A) Z = B in real form for Z = Zr + i Zi.
    let mut lhs = DMatrix::<f64>::zeros(2 * k, 2 * k);
    lhs.view_mut((0, 0), (k, k)).copy_from(&(-&r.a));
    lhs.view_mut((0, k), (k, k)).copy_from(&(&r.e * (-omega)));
    lhs.view_mut((k, 0), (k, k)).copy_from(&(&r.e * omega));
    lhs.view_mut((k, k), (k, k)).copy_from(&(-&r.a));
    let m = r.b.ncols();
    let mut rhs = DMatrix::<f64>::zeros(2 * k, m);
    rhs.view_mut((0, 0), (k, m)).copy_from(&r.b);
    let Some(z) = lhs.lu().solve(&rhs) else {
        return f64::INFINITY;
    };
    let zr = z.rows(0, k).clone_owned();
    let zi = z.rows(k, k).clone_owned();
    let hr = &r.c * zr;
    let hi = &r.c * zi;
    // σ_max of Hr + iHi equals σ_max of its 2×2 real embedding.
    let p = hr.nrows();
    let mut emb = DMatrix::<f64>::zeros(2 * p, 2 * m);
    emb.view_mut((0, 0), (p, m)).copy_from(&hr);
    emb.view_mut((0, m), (p, m)).copy_from(&(-&hi));
    emb.view_mut((p, 0), (p, m)).copy_from(&hi);
    emb.view_mut((p, m), (p, m)).copy_from(&hr);
    match svd(&emb) {
        Ok((_, s, _)) => s.iter().fold(0.0f64, |a, &b| a.max(b)),
        Err(_) => f64::INFINITY,
    }
}

/// Golden-section maximization of `σ_max(H(iω))` over `[lo, hi]`.
fn golden_refine(r: &LtiRealization, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = transfer_sv_max(r, x1);
    let mut f2 = transfer_sv_max(r, x2);
    while (hi - lo) > tol * hi.abs().max(1.0) {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = transfer_sv_max(r, x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = transfer_sv_max(r, x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Candidate frequencies: log grid over `[1e-3, 1e3]`, ω = 0, and the
/// imaginary parts of the realization's eigenvalues.
fn hinf_grid(r: &LtiRealization, points: usize) -> Vec<f64> {
    let mut grid = Vec::with_capacity(points + 16);
    grid.push(0.0);
    let (lo, hi) = (1e-3f64.ln(), 1e3f64.ln());
    for k in 0..points {
        let t = lo + (hi - lo) * k as f64 / (points - 1) as f64;
        grid.push(t.exp());
    }
    if let Some(f) = r.e.clone().lu().solve(&r.a) {
        for z in complex_eigenvalues(&f) {
            let w = z.im.abs();
            if w.is_finite() && w > 1e-12 {
                grid.push(w);
            }
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// `‖H‖_H∞` by grid search plus golden-section refinement around the best
/// grid point. `tol` is the relative frequency tolerance.
pub fn hinf_norm(r: &LtiRealization, tol: f64) -> f64 {
    if r.order() == 0 {
        return 0.0;
    }
    let grid = hinf_grid(r, 400);
    let mut best_idx = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, &w) in grid.iter().enumerate() {
        let v = transfer_sv_max(r, w);
        if v > best {
            best = v;
            best_idx = i;
        }
    }
    let lo = if best_idx == 0 {
        grid[0]
    } else {
        grid[best_idx - 1]
    };
    let hi = if best_idx + 1 < grid.len() {
        grid[best_idx + 1]
    } else {
        grid[best_idx] * 2.0 + 1.0
    };
    let (_, refined) = golden_refine(r, lo, hi, tol);
    refined.max(best)
}

/// Stacked error realization `H₋ − Ĥ₋` of two stable parts.
pub fn error_realization(a: &LtiRealization, b: &LtiRealization) -> LtiRealization {
    let (k1, k2) = (a.order(), b.order());
    let mut e = DMatrix::<f64>::zeros(k1 + k2, k1 + k2);
    e.view_mut((0, 0), (k1, k1)).copy_from(&a.e);
    e.view_mut((k1, k1), (k2, k2)).copy_from(&b.e);
    let mut am = DMatrix::<f64>::zeros(k1 + k2, k1 + k2);
    am.view_mut((0, 0), (k1, k1)).copy_from(&a.a);
    am.view_mut((k1, k1), (k2, k2)).copy_from(&b.a);
    let m = a.b.ncols();
    let mut bm = DMatrix::<f64>::zeros(k1 + k2, m);
    bm.view_mut((0, 0), (k1, m)).copy_from(&a.b);
    bm.view_mut((k1, 0), (k2, m)).copy_from(&b.b);
    let p = a.c.nrows();
    let mut cm = DMatrix::<f64>::zeros(p, k1 + k2);
    cm.view_mut((0, 0), (p, k1)).copy_from(&a.c);
    cm.view_mut((0, k1), (p, k2)).copy_from(&(-&b.c));
    LtiRealization {
        e,
        a: am,
        b: bm,
        c: cm,
    }
}

/// Error norms are only defined when the non-asymptotically-stable parts
/// cancel; verify that entrywise.
pub fn check_unstable_match(d1: &StableDecomposition, d2: &StableDecomposition) -> Result<()> {
    let u1 = &d1.unstable;
    let u2 = &d2.unstable;
    if u1.order() != u2.order() {
        return Err(Error::Model(
            "unstable parts have different dimensions".into(),
        ));
    }
    let tol = 1e-8;
    let close = |x: &DMatrix<f64>, y: &DMatrix<f64>| {
        (x - y).norm() <= tol * x.norm().max(1.0)
    };
    if !(close(&u1.e, &u2.e) && close(&u1.a, &u2.a) && close(&u1.b, &u2.b) && close(&u1.c, &u2.c)) {
        return Err(Error::Model(
            "non-asymptotically-stable parts differ; error norm undefined".into(),
        ));
    }
    Ok(())
}

/// Relative/absolute H2 error between the stable parts of two networks with
/// matching unstable parts.
pub fn h2_error(sys: &LinearMas, red: &LinearMas) -> Result<NormError> {
    let d1 = decompose_mas(sys)?;
    let d2 = decompose_mas(red)?;
    check_unstable_match(&d1, &d2)?;
    let err = error_realization(&d1.stable, &d2.stable);
    let absolute = h2_norm(&err)?;
    let denom = h2_norm(&d1.stable)?;
    if denom <= 0.0 {
        return Err(Error::Model("original stable part has zero H2 norm".into()));
    }
    Ok(NormError {
        absolute,
        relative: absolute / denom,
    })
}

/// Relative/absolute H∞ error between the stable parts.
pub fn hinf_error(sys: &LinearMas, red: &LinearMas, tol: f64) -> Result<NormError> {
    let d1 = decompose_mas(sys)?;
    let d2 = decompose_mas(red)?;
    check_unstable_match(&d1, &d2)?;
    let err = error_realization(&d1.stable, &d2.stable);
    let absolute = hinf_norm(&err, tol);
    let denom = hinf_norm(&d1.stable, tol);
    if denom <= 0.0 {
        return Err(Error::Model(
            "original stable part has zero Hinf norm".into(),
        ));
    }
    Ok(NormError {
        absolute,
        relative: absolute / denom,
    })
}

/// `sin` of the largest principal angle between the column spans.
pub fn principal_angle_sin(v1: &DMatrix<f64>, v2: &DMatrix<f64>) -> Result<f64> {
    let ortho = |m: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let (_, s, _) = svd(m)?;
        let smax = s.iter().fold(0.0f64, |a, &b| a.max(b));
        if s.len() < m.ncols() || s.iter().any(|&x| x <= 1e-10 * smax.max(1.0)) {
            return Err(Error::Numerics(
                "principal_angle_sin: rank-deficient input".into(),
            ));
        }
        Ok(crate::numerics::orthonormalize(m))
    };
    let q1 = ortho(v1)?;
    let q2 = ortho(v2)?;
    let resid = &q1 - &q2 * (q2.transpose() * &q1);
    let (_, s, _) = svd(&resid)?;
    Ok(s.iter().fold(0.0f64, |a, &b| a.max(b)).min(1.0))
}
