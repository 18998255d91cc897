//! Projection-basis generation: tangential IRKA, square-root balanced
//! truncation, and POD, plus assembly of bases that keep the
//! non-asymptotically-stable part intact.

use crate::error::{Error, Result};
use crate::mas::LtiRealization;
use crate::numerics::{
    complex_eigenvalues, gen_eig_lr, orthonormalize, randn_matrix, realify_columns, svd,
};
use crate::stabsep::StableDecomposition;
use nalgebra::{Complex, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type CMatrix = DMatrix<Complex<f64>>;
type CVector = DVector<Complex<f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorMethod {
    Irka,
    BalancedTruncation,
    Pod,
}

/// Run metadata; `converged` is always true for the direct methods.
#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub final_change: f64,
    /// Relative shift change per IRKA iteration.
    pub change_history: Vec<f64>,
    /// Requested order exceeded numerical rank (POD/BT truncation).
    pub rank_truncated: bool,
}

/// Two-sided projection basis; rows grouped in `block_size` chunks per agent.
#[derive(Debug, Clone)]
pub struct ProjectionBasis {
    pub v: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub block_size: usize,
    pub method: MorMethod,
    pub diagnostics: Diagnostics,
}

fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex::new(x, 0.0))
}

/// Mirror shifts into the open right half-plane, nudging anything on or
/// across the axis to Re = 1e-8.
fn clamp_shifts(sigma: &mut [Complex<f64>]) {
    for s in sigma.iter_mut() {
        if s.re < 1e-8 {
            *s = Complex::new(1e-8, s.im);
        }
    }
}

fn sort_by_re_im(vals: &mut [Complex<f64>]) {
    vals.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Tangential IRKA on `(ℰ, 𝒜, ℬ, 𝒞)`.
///
/// Fixed-point iteration over mirrored reduced poles with tangential
/// directions from the reduced two-sided eigenvectors. Deterministic for a
/// fixed `seed`. Non-convergence is reported in the diagnostics, not as an
/// error. The returned `w` is rescaled so that `wᵀℰv = I`.
pub fn irka(
    sys: &LtiRealization,
    r: usize,
    max_iter: usize,
    tol: f64,
    seed: u64,
) -> Result<ProjectionBasis> {
    let n = sys.order();
    if r == 0 || r >= n {
        return Err(Error::Model(format!(
            "irka order must satisfy 0 < r < N, got r={r}, N={n}"
        )));
    }
    let m_in = sys.b.ncols();
    let p_out = sys.c.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Initial shifts: mirrored spectrum of a random orthogonal compression.
    let q = orthonormalize(&randn_matrix(&mut rng, n, r));
    let aq = q.transpose() * &sys.a * &q;
    let eq = q.transpose() * &sys.e * &q;
    let f0 = eq
        .lu()
        .solve(&aq)
        .ok_or_else(|| Error::Numerics("irka: singular compressed E".into()))?;
    let mut sigma: Vec<Complex<f64>> = complex_eigenvalues(&f0).iter().map(|z| -z).collect();
    sort_by_re_im(&mut sigma);
    clamp_shifts(&mut sigma);

    let ce = to_complex(&sys.e);
    let ca = to_complex(&sys.a);
    let cet = to_complex(&sys.e.transpose());
    let cat = to_complex(&sys.a.transpose());
    let cb = to_complex(&sys.b);
    let cct = to_complex(&sys.c.transpose());

    let mut bdir = CMatrix::from_element(m_in, r, Complex::new(1.0, 0.0));
    let mut cdir = CMatrix::from_element(p_out, r, Complex::new(1.0, 0.0));

    // One tangential solve per shift for both sides.
    let solve_bases = |sigma: &[Complex<f64>],
                       bdir: &CMatrix,
                       cdir: &CMatrix|
     -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let mut vc = CMatrix::zeros(n, r);
        let mut wc = CMatrix::zeros(n, r);
        for i in 0..r {
            let lhs_v = &ce * sigma[i] - &ca;
            let rhs_v: CVector = &cb * bdir.column(i).clone_owned();
            let sol_v = lhs_v
                .lu()
                .solve(&rhs_v)
                .ok_or_else(|| Error::Numerics("irka: singular shifted system".into()))?;
            vc.set_column(i, &sol_v);

            // (σE − A)ᴴ = σ̄Eᵀ − Aᵀ for real E, A.
            let lhs_w = &cet * sigma[i].conj() - &cat;
            let rhs_w: CVector = &cct * cdir.column(i).clone_owned();
            let sol_w = lhs_w
                .lu()
                .solve(&rhs_w)
                .ok_or_else(|| Error::Numerics("irka: singular shifted system".into()))?;
            wc.set_column(i, &sol_w);
        }
        let v = orthonormalize(&realify_columns(&vc, sigma)?);
        let w = orthonormalize(&realify_columns(&wc, sigma)?);
        Ok((v, w))
    };

    let mut converged = false;
    let mut iterations = 0;
    let mut final_change = f64::NAN;
    let mut history = Vec::new();

    for it in 0..max_iter {
        iterations = it + 1;
        let (v, w) = solve_bases(&sigma, &bdir, &cdir)?;
        let er = w.transpose() * &sys.e * &v;
        let ar = w.transpose() * &sys.a * &v;
        let br = w.transpose() * &sys.b;
        let cr = &sys.c * &v;

        let (lam, x, y) = gen_eig_lr(&ar, &er)?;
        let mut signew: Vec<Complex<f64>> = lam.iter().map(|z| -z).collect();
        clamp_shifts(&mut signew);

        let num: f64 = signew
            .iter()
            .zip(&sigma)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let den: f64 = sigma.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let change = num / den.max(1e-300);
        history.push(change);
        final_change = change;

        sigma = signew;
        bdir = to_complex(&br.transpose()) * y.map(|z| z.conj());
        cdir = to_complex(&cr) * &x;

        if change < tol {
            converged = true;
            break;
        }
    }

    let (v, w) = solve_bases(&sigma, &bdir, &cdir)?;
    // Rescale W so the reduced descriptor matrix is the identity.
    let gram = v.transpose() * sys.e.transpose() * &w;
    let gram_inv = gram
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Numerics("irka: VᵀEᵀW singular, cannot biorthogonalize".into()))?;
    let w_b = &w * gram_inv;

    Ok(ProjectionBasis {
        v,
        w: w_b,
        block_size: 1,
        method: MorMethod::Irka,
        diagnostics: Diagnostics {
            iterations,
            converged,
            final_change,
            change_history: history,
            rank_truncated: false,
        },
    })
}

/// Symmetric PSD factor `Z` with `X ≈ ZZᵀ`; negative eigenvalues clipped.
fn psd_factor(x: &DMatrix<f64>) -> DMatrix<f64> {
    let sym = (x + x.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let lam_max = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > lam_max * 1e-14 && eig.eigenvalues[i] > 0.0)
        .collect();
    let mut z = DMatrix::<f64>::zeros(x.nrows(), keep.len());
    for (k, &i) in keep.iter().enumerate() {
        let scale = eig.eigenvalues[i].sqrt();
        z.set_column(k, &(eig.eigenvectors.column(i) * scale));
    }
    z
}

/// Balanced truncation output: basis, a-priori H∞ bound, Hankel values.
#[derive(Debug, Clone)]
pub struct BtResult {
    pub basis: ProjectionBasis,
    /// `2·Σ_{i>r} σᵢ` over the discarded Hankel singular values.
    pub bound: f64,
    pub hankel: Vec<f64>,
}

/// Square-root balanced truncation of a stable descriptor realization.
pub fn balanced_truncation(sys: &LtiRealization, r: usize) -> Result<BtResult> {
    use crate::numerics::solve_gen_lyapunov;
    let p = solve_gen_lyapunov(&sys.a, &sys.e, &(&sys.b * sys.b.transpose()))?;
    let q = solve_gen_lyapunov(
        &sys.a.transpose(),
        &sys.e.transpose(),
        &(sys.c.transpose() * &sys.c),
    )?;
    let zp = psd_factor(&p);
    let zq = psd_factor(&q);
    let (u, s, vt) = svd(&(zq.transpose() * &sys.e * &zp))?;

    let hankel: Vec<f64> = s.iter().copied().collect();
    let usable = hankel.iter().take_while(|&&x| x > 1e-12).count();
    let r_eff = r.min(usable);
    if r_eff == 0 {
        return Err(Error::Model("balanced truncation: system is numerically zero".into()));
    }
    let rank_truncated = r_eff < r;

    let mut v = DMatrix::<f64>::zeros(sys.order(), r_eff);
    let mut w = DMatrix::<f64>::zeros(sys.order(), r_eff);
    for k in 0..r_eff {
        let scale = 1.0 / hankel[k].sqrt();
        v.set_column(k, &(&zp * vt.row(k).transpose() * scale));
        w.set_column(k, &(&zq * u.column(k) * scale));
    }
    let bound = 2.0 * hankel.iter().skip(r_eff).sum::<f64>();

    Ok(BtResult {
        basis: ProjectionBasis {
            v,
            w,
            block_size: 1,
            method: MorMethod::BalancedTruncation,
            diagnostics: Diagnostics {
                iterations: 0,
                converged: true,
                final_change: 0.0,
                change_history: Vec::new(),
                rank_truncated,
            },
        },
        bound,
        hankel,
    })
}

/// POD basis: first `r` left singular vectors of the snapshot matrix.
pub fn pod(snapshots: &DMatrix<f64>, r: usize, block_size: usize) -> Result<ProjectionBasis> {
    if r == 0 {
        return Err(Error::Model("pod needs at least one mode".into()));
    }
    if snapshots.ncols() < r {
        return Err(Error::Model(format!(
            "pod needs at least {r} snapshots, got {}",
            snapshots.ncols()
        )));
    }
    if block_size == 0 || snapshots.nrows() % block_size != 0 {
        return Err(Error::Model("pod: rows not divisible by block size".into()));
    }
    let (u, s, _) = svd(snapshots)?;
    let smax = s.iter().fold(0.0f64, |a, &b| a.max(b));
    let rank = s.iter().take_while(|&&x| x > 1e-12 * smax.max(1e-300)).count();
    let r_eff = r.min(rank).max(1);
    let v = u.columns(0, r_eff).into_owned();
    Ok(ProjectionBasis {
        w: v.clone(),
        v,
        block_size,
        method: MorMethod::Pod,
        diagnostics: Diagnostics {
            iterations: 0,
            converged: true,
            final_change: 0.0,
            change_history: Vec::new(),
            rank_truncated: r_eff < r,
        },
    })
}

/// `𝒱 = [𝒯₋V₋, 𝒯₊]`, `𝒲 = [𝒮₋W₋, 𝒮₊]`: reduce the stable part, carry the
/// non-asymptotically-stable part over verbatim.
pub fn assemble_unstable_aware_basis(
    decomp: &StableDecomposition,
    inner: &ProjectionBasis,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let vs = &decomp.t_minus * &inner.v;
    let ws = &decomp.s_minus * &inner.w;
    let n = decomp.t_minus.nrows();
    let (rs, ru) = (vs.ncols(), decomp.t_plus.ncols());
    let mut v = DMatrix::<f64>::zeros(n, rs + ru);
    let mut w = DMatrix::<f64>::zeros(n, rs + ru);
    v.view_mut((0, 0), (n, rs)).copy_from(&vs);
    v.view_mut((0, rs), (n, ru)).copy_from(&decomp.t_plus);
    w.view_mut((0, 0), (n, rs)).copy_from(&ws);
    w.view_mut((0, rs), (n, ru)).copy_from(&decomp.s_plus);
    (v, w)
}
