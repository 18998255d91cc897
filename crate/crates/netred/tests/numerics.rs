use nalgebra::{DMatrix, DVector};
use netred::numerics::{
    complex_eigenvalues, expm, gen_eig_lr, integrate_ode, kron, orthonormalize, qr_column_pivot,
    randn_matrix, rms_norm, solve_gen_lyapunov, solve_gen_lyapunov_kron, svd, sym_gen_eig,
    OdeOptions,
};
use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;

fn seeded(n: usize, c: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    randn_matrix(&mut rng, n, c)
}

// ---------------------------------------------------------------- lyapunov

#[test]
fn lyapunov_diagonal_oracle() {
    // A = diag(-1, -2), Q = ones: x_ij = q_ij / -(λ_i + λ_j)
    let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -2.0]);
    let e = DMatrix::identity(2, 2);
    let q = DMatrix::from_element(2, 2, 1.0);
    let x = solve_gen_lyapunov(&a, &e, &q).unwrap();
    let expect = DMatrix::from_row_slice(2, 2, &[0.5, 1.0 / 3.0, 1.0 / 3.0, 0.25]);
    assert!((&x - &expect).norm() < 1e-12);
}

#[test]
fn lyapunov_residuals_random() {
    for seed in 0..6u64 {
        let n = 5 + (seed as usize % 4);
        let a = seeded(n, n, seed) - DMatrix::identity(n, n) * (3.0 + n as f64);
        let e = DMatrix::identity(n, n) + seeded(n, n, 100 + seed) * 0.1;
        let c = seeded(2, n, 200 + seed);
        let q = c.transpose() * &c;
        let x = solve_gen_lyapunov(&a, &e, &q).unwrap();
        let res = &a * &x * e.transpose() + &e * &x * a.transpose() + &q;
        assert!(res.norm() / q.norm() < 1e-8, "seed {seed}: residual {}", res.norm());
        // agrees with the dense Kronecker formulation
        let xk = solve_gen_lyapunov_kron(&a, &e, &q).unwrap();
        assert!((&x - &xk).norm() / x.norm().max(1.0) < 1e-8);
        // solution of a symmetric problem is symmetric
        assert!((&x - x.transpose()).norm() < 1e-10);
    }
}

// ------------------------------------------------------------------- qr/svd

#[test]
fn qr_column_pivot_reconstruction() {
    let a = seeded(8, 5, 7);
    let (q, r, perm) = qr_column_pivot(&a).unwrap();
    assert!((q.transpose() * &q - DMatrix::identity(5, 5)).norm() < 1e-10);
    // Q R = A[:, perm]
    let mut ap = DMatrix::zeros(8, 5);
    for (k, &j) in perm.iter().enumerate() {
        ap.set_column(k, &a.column(j));
    }
    assert!((&q * &r - ap).norm() < 1e-10);
    // pivoting: |r_11| >= |r_22| >= ...
    for k in 1..5 {
        assert!(r[(k - 1, k - 1)].abs() >= r[(k, k)].abs() - 1e-12);
    }
}

#[test]
fn qr_pivots_rank_deficient_matrix() {
    // two independent columns followed by copies
    let b = seeded(6, 2, 11);
    let mut a = DMatrix::zeros(6, 4);
    a.set_column(0, &b.column(0));
    a.set_column(1, &(b.column(0) * 0.5).into());
    a.set_column(2, &b.column(1));
    a.set_column(3, &(b.column(0) + b.column(1)).into());
    let (_, r, _) = qr_column_pivot(&a).unwrap();
    assert!(r[(2, 2)].abs() < 1e-10, "rank-2 matrix must zero out r_33");
    assert!(r[(1, 1)].abs() > 1e-8);
}

#[test]
fn svd_reconstruction_and_order() {
    let a = seeded(7, 4, 3);
    let (u, s, vt) = svd(&a).unwrap();
    let recon = &u * DMatrix::from_diagonal(&s) * &vt;
    assert!((&recon - &a).norm() < 1e-10);
    assert!((u.transpose() * &u - DMatrix::identity(4, 4)).norm() < 1e-10);
    assert!((&vt * vt.transpose() - DMatrix::identity(4, 4)).norm() < 1e-10);
    for k in 1..s.len() {
        assert!(s[k - 1] >= s[k] && s[k] >= 0.0);
    }
    // frobenius identity
    let fro2: f64 = s.iter().map(|x| x * x).sum();
    assert!((fro2 - a.norm_squared()).abs() < 1e-10 * a.norm_squared());
}

#[test]
fn svd_detects_rank() {
    let b = seeded(6, 2, 17);
    let a = &b * b.transpose(); // rank 2, 6x6
    let (_, s, _) = svd(&a).unwrap();
    assert!(s[1] > 1e-6);
    assert!(s[2] < 1e-10 * s[0]);
}

// ---------------------------------------------------------------------- eig

#[test]
fn sym_gen_eig_path_graph() {
    // P3 Laplacian eigenvalues: 0, 1, 3
    let l = DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]);
    let m = DMatrix::identity(3, 3);
    let (vals, vecs) = sym_gen_eig(&l, &m).unwrap();
    assert!(vals[0].abs() < 1e-12);
    assert!((vals[1] - 1.0).abs() < 1e-12);
    assert!((vals[2] - 3.0).abs() < 1e-12);
    // M-orthonormal eigenvectors
    assert!((vecs.transpose() * &m * &vecs - DMatrix::identity(3, 3)).norm() < 1e-10);
    // mass scaling halves the spectrum
    let (vals2, _) = sym_gen_eig(&l, &(2.0 * &m)).unwrap();
    assert!((vals2[2] - 1.5).abs() < 1e-12);
}

#[test]
fn complex_eigenvalues_rotation() {
    let a = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    let mut vals = complex_eigenvalues(&a);
    vals.sort_by(|x, y| x.im.total_cmp(&y.im));
    assert!((vals[0].im + 1.0).abs() < 1e-12 && vals[0].re.abs() < 1e-12);
    assert!((vals[1].im - 1.0).abs() < 1e-12 && vals[1].re.abs() < 1e-12);
}

#[test]
fn gen_eig_lr_residuals() {
    let a = seeded(5, 5, 23);
    let e = DMatrix::identity(5, 5) + seeded(5, 5, 24) * 0.05;
    let (vals, right, left) = gen_eig_lr(&a, &e).unwrap();
    let ac = a.map(|x| num_complex::Complex::new(x, 0.0));
    let ec = e.map(|x| num_complex::Complex::new(x, 0.0));
    for (k, lam) in vals.iter().enumerate() {
        let v = right.column(k);
        let w = left.column(k);
        let rres = &ac * v - &ec * v * *lam;
        let lres = w.adjoint() * &ac - (w.adjoint() * &ec) * *lam;
        assert!(rres.norm() < 1e-8 * a.norm(), "eig {k} right residual");
        assert!(lres.norm() < 1e-8 * a.norm(), "eig {k} left residual");
    }
}

// --------------------------------------------------------------------- expm

#[test]
fn expm_oracles() {
    // planar rotation
    let th = 0.7f64;
    let a = DMatrix::from_row_slice(2, 2, &[0.0, -th, th, 0.0]);
    let expect = DMatrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
    assert!((expm(&a).unwrap() - expect).norm() < 1e-12);
    // nilpotent
    let n = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    let expect = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
    assert!((expm(&n).unwrap() - expect).norm() < 1e-14);
    // diagonal
    let d = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 2.0]);
    let expect = DMatrix::from_row_slice(2, 2, &[(-1.0f64).exp(), 0.0, 0.0, 2.0f64.exp()]);
    assert!((expm(&d).unwrap() - expect).norm() < 1e-12);
    // large-norm argument exercises scaling and squaring
    let b = seeded(4, 4, 31) * 8.0;
    let half = expm(&(&b * 0.5)).unwrap();
    assert!((expm(&b).unwrap() - &half * &half).norm() / expm(&b).unwrap().norm() < 1e-10);
}

// ----------------------------------------------------------------- ode(bdf)

#[test]
fn ode_matches_matrix_exponential() {
    let a = seeded(4, 4, 41) - DMatrix::identity(4, 4) * 2.0;
    let x0 = DVector::from_column_slice(&[1.0, -0.5, 0.25, 2.0]);
    let mut f = |_t: f64, y: &DVector<f64>| &a * y;
    let opts = OdeOptions {
        rtol: 1e-9,
        atol: 1e-12,
        ..OdeOptions::default()
    };
    let grid = [0.0, 0.25, 0.5, 1.0];
    let sol = integrate_ode(&mut f, None, (0.0, 1.0), &x0, Some(&grid), &opts).unwrap();
    for (j, &t) in grid.iter().enumerate() {
        let expect = expm(&(&a * t)).unwrap() * &x0;
        let got = sol.y.column(j);
        assert!(
            (&got - &expect).norm() / expect.norm() < 1e-6,
            "t = {t}: relative error {}",
            (&got - &expect).norm() / expect.norm()
        );
    }
}

#[test]
fn ode_scalar_decay_analytic() {
    let mut f = |_t: f64, y: &DVector<f64>| -y.clone();
    let x0 = DVector::from_element(1, 1.0);
    let sol = integrate_ode(
        &mut f,
        None,
        (0.0, 5.0),
        &x0,
        Some(&[5.0]),
        &OdeOptions { rtol: 1e-10, atol: 1e-12, ..OdeOptions::default() },
    )
    .unwrap();
    assert!((sol.y[(0, 0)] - (-5.0f64).exp()).abs() < 1e-8);
}

#[test]
fn ode_handles_stiffness() {
    // widely separated time constants; explicit methods would need ~1e4 steps
    let a = DMatrix::from_row_slice(2, 2, &[-1000.0, 0.0, 0.0, -0.5]);
    let x0 = DVector::from_column_slice(&[1.0, 1.0]);
    let mut f = |_t: f64, y: &DVector<f64>| &a * y;
    let sol = integrate_ode(&mut f, None, (0.0, 10.0), &x0, Some(&[10.0]), &OdeOptions::default())
        .unwrap();
    assert!(sol.n_steps < 500, "stiff problem took {} steps", sol.n_steps);
    assert!((sol.y[(1, 0)] - (-5.0f64).exp()).abs() < 1e-4);
    assert!(sol.y[(0, 0)].abs() < 1e-6);
}

#[test]
fn ode_accepted_steps_mode() {
    let mut f = |_t: f64, y: &DVector<f64>| -y.clone();
    let x0 = DVector::from_element(1, 1.0);
    let sol = integrate_ode(&mut f, None, (0.0, 1.0), &x0, None, &OdeOptions::default()).unwrap();
    // starts at t0 with x0, ends at t_bound, strictly increasing
    assert_eq!(sol.t[0], 0.0);
    assert_eq!(sol.y[(0, 0)], 1.0);
    assert!((sol.t.last().unwrap() - 1.0).abs() < 1e-12);
    assert!(sol.t.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(sol.t.len(), sol.y.ncols());
}

#[test]
fn ode_rejects_bad_input() {
    let mut f = |_t: f64, y: &DVector<f64>| y.clone();
    let x0 = DVector::from_element(1, 1.0);
    assert!(integrate_ode(&mut f, None, (1.0, 0.0), &x0, None, &OdeOptions::default()).is_err());
    assert!(integrate_ode(
        &mut f,
        None,
        (0.0, 1.0),
        &DVector::from_element(1, f64::NAN),
        None,
        &OdeOptions::default()
    )
    .is_err());
    // t_eval outside the span
    assert!(integrate_ode(&mut f, None, (0.0, 1.0), &x0, Some(&[2.0]), &OdeOptions::default())
        .is_err());
}

// ------------------------------------------------------------------ helpers

#[test]
fn kron_mixed_product() {
    let a = seeded(2, 3, 51);
    let b = seeded(3, 2, 52);
    let c = seeded(3, 2, 53);
    let d = seeded(2, 4, 54);
    let lhs = kron(&a, &b) * kron(&c, &d);
    let rhs = kron(&(&a * &c), &(&b * &d));
    assert!((lhs - rhs).norm() < 1e-12);
    assert_eq!(kron(&a, &b).shape(), (6, 6));
}

#[test]
fn orthonormalize_preserves_span() {
    let a = seeded(8, 3, 61);
    let q = orthonormalize(&a);
    assert!((q.transpose() * &q - DMatrix::identity(3, 3)).norm() < 1e-12);
    // same column space: projectors agree
    let pa = &a * (a.transpose() * &a).try_inverse().unwrap() * a.transpose();
    let pq = &q * q.transpose();
    assert!((pa - pq).norm() < 1e-10);
}

#[test]
fn randn_is_seeded_and_plausible() {
    let a = seeded(50, 20, 9);
    let b = seeded(50, 20, 9);
    assert_eq!(a, b);
    let c = seeded(50, 20, 10);
    assert_ne!(a, c);
    let mean = a.iter().sum::<f64>() / 1000.0;
    let var = a.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 999.0;
    assert!(mean.abs() < 0.1, "mean {mean}");
    assert!((var - 1.0).abs() < 0.15, "var {var}");
}

#[test]
fn rms_norm_values() {
    assert_eq!(rms_norm(&DVector::from_element(4, 2.0)), 2.0);
    assert_eq!(rms_norm(&DVector::from_column_slice(&[3.0, 4.0, 0.0, 0.0])), 2.5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn qr_svd_reconstruct_random(rows in 2usize..9, cols in 2usize..9, seed in 0u64..1000) {
        let a = seeded(rows, cols, seed);
        let (u, s, vt) = svd(&a).unwrap();
        prop_assert!((&u * DMatrix::from_diagonal(&s) * &vt - &a).norm() < 1e-10 * a.norm().max(1.0));
        let (q, r, perm) = qr_column_pivot(&a).unwrap();
        let mut ap = DMatrix::zeros(rows, cols);
        for (k, &j) in perm.iter().enumerate() {
            ap.set_column(k, &a.column(j));
        }
        prop_assert!((&q * &r - ap).norm() < 1e-10 * a.norm().max(1.0));
    }

    #[test]
    fn lyapunov_random_residuals(n in 2usize..7, seed in 0u64..500) {
        let a = seeded(n, n, seed) - DMatrix::identity(n, n) * (n as f64 + 2.0);
        let e = DMatrix::identity(n, n);
        let c = seeded(1, n, seed + 1);
        let q = c.transpose() * &c;
        let x = solve_gen_lyapunov(&a, &e, &q).unwrap();
        let res = &a * &x + &x * a.transpose() + &q;
        prop_assert!(res.norm() / q.norm().max(1e-300) < 1e-8);
    }
}
