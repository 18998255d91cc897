use nalgebra::{DMatrix, DVector};
use netred::mas::LtiRealization;
use netred::mor::{assemble_unstable_aware_basis, balanced_truncation, irka, pod, MorMethod};
use netred::numerics::{gen_eig_lr, randn_matrix, svd};
use netred::presets::small_network;
use netred::stabsep::{decompose_mas, error_realization, h2_norm, hinf_norm};
use num_complex::Complex;
use rand_chacha::rand_core::SeedableRng;

type C64 = Complex<f64>;

fn seeded(n: usize, c: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    randn_matrix(&mut rng, n, c)
}

fn stable_part() -> LtiRealization {
    decompose_mas(&small_network().to_linear().unwrap())
        .unwrap()
        .stable
}

/// Stable random SISO test system.
fn siso(n: usize, seed: u64) -> LtiRealization {
    LtiRealization {
        e: DMatrix::identity(n, n),
        a: seeded(n, n, seed) - DMatrix::identity(n, n) * (2.0 + n as f64),
        b: seeded(n, 1, seed + 1),
        c: seeded(1, n, seed + 2),
    }
}

fn to_c(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

/// H(s) and H'(s) for a SISO realization.
fn transfer(r: &LtiRealization, s: C64) -> (C64, C64) {
    let se_a = to_c(&r.e) * s - to_c(&r.a);
    let lu = se_a.lu();
    let b = lu.solve(&to_c(&r.b)).unwrap();
    let h = (to_c(&r.c) * &b)[(0, 0)];
    // H'(s) = -C (sE-A)^{-1} E (sE-A)^{-1} B
    let eb = lu.solve(&(to_c(&r.e) * &b)).unwrap();
    let hp = -(to_c(&r.c) * eb)[(0, 0)];
    (h, hp)
}

fn reduced_model(full: &LtiRealization, v: &DMatrix<f64>, w: &DMatrix<f64>) -> LtiRealization {
    LtiRealization {
        e: w.transpose() * &full.e * v,
        a: w.transpose() * &full.a * v,
        b: w.transpose() * &full.b,
        c: &full.c * v,
    }
}

/// Shifts realized by a converged IRKA basis: mirrored reduced poles.
fn realized_shifts(full: &LtiRealization, v: &DMatrix<f64>, w: &DMatrix<f64>) -> Vec<C64> {
    let red = reduced_model(full, v, w);
    let (vals, _, _) = gen_eig_lr(&red.a, &red.e).unwrap();
    let mut shifts: Vec<C64> = vals.iter().map(|l| -l).collect();
    shifts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    shifts
}

#[test]
fn irka_hermite_interpolation() {
    // converged IRKA interpolates H and H' at the mirrored reduced poles
    let sys = siso(6, 7);
    let basis = irka(&sys, 2, 300, 1e-10, 0).unwrap();
    assert!(basis.diagnostics.converged);
    for sigma in realized_shifts(&sys, &basis.v, &basis.w) {
        assert!(sigma.re > 0.0, "shift in the open right half-plane");
        let red = reduced_model(&sys, &basis.v, &basis.w);
        let (h, hp) = transfer(&sys, sigma);
        let (hr, hrp) = transfer(&red, sigma);
        assert!(
            (h - hr).norm() / h.norm() < 1e-6,
            "value interpolation at {sigma}: {} vs {}",
            h,
            hr
        );
        assert!(
            (hp - hrp).norm() / hp.norm() < 1e-6,
            "derivative interpolation at {sigma}: {} vs {}",
            hp,
            hrp
        );
    }
}

#[test]
fn irka_on_stable_part_frozen() {
    let stable = stable_part();
    let basis = irka(&stable, 5, 200, 1e-6, 0).unwrap();
    assert!(basis.diagnostics.converged);
    assert_eq!(basis.method, MorMethod::Irka);
    assert_eq!(basis.v.shape(), (9, 5));

    // frozen converged shifts (all real for this system)
    let shifts = realized_shifts(&stable, &basis.v, &basis.w);
    let expect = [1.184205, 7.567603, 13.031632, 22.966613, 31.005988];
    for (s, e) in shifts.iter().zip(expect) {
        assert!(s.im.abs() < 1e-8);
        assert!((s.re - e).abs() < 1e-3, "shift {} vs {e}", s.re);
    }

    // frozen relative H2 error 3.30412e-2
    let red = reduced_model(&stable, &basis.v, &basis.w);
    let err = h2_norm(&error_realization(&stable, &red)).unwrap()
        / h2_norm(&stable).unwrap();
    assert!((err - 3.30412e-2).abs() / 3.30412e-2 < 0.02, "error {err}");
}

#[test]
fn irka_is_deterministic_per_seed() {
    let sys = siso(5, 21);
    let b1 = irka(&sys, 2, 100, 1e-8, 3).unwrap();
    let b2 = irka(&sys, 2, 100, 1e-8, 3).unwrap();
    assert_eq!(b1.v, b2.v);
    assert_eq!(b1.w, b2.w);
    assert_eq!(b1.diagnostics.iterations, b2.diagnostics.iterations);
}

#[test]
fn irka_biorthogonal_and_validated() {
    let sys = siso(6, 33);
    let basis = irka(&sys, 3, 200, 1e-9, 1).unwrap();
    // WᵀEV = I by construction
    let gram = basis.w.transpose() * &sys.e * &basis.v;
    assert!((gram - DMatrix::identity(3, 3)).norm() < 1e-8);
    assert!(irka(&sys, 0, 100, 1e-8, 0).is_err());
    assert!(irka(&sys, 6, 100, 1e-8, 0).is_err());
}

#[test]
fn balanced_truncation_frozen_hankel() {
    let stable = stable_part();
    let bt = balanced_truncation(&stable, 5).unwrap();
    let expect = [0.128496, 0.099986, 0.061597, 0.020744, 0.016746, 0.005537, 0.001035];
    assert!(bt.hankel.len() >= 7);
    for (k, e) in expect.iter().enumerate() {
        assert!((bt.hankel[k] - e).abs() < 1e-5, "sigma_{k} = {} vs {e}", bt.hankel[k]);
    }
    assert!(bt.hankel.windows(2).all(|w| w[0] >= w[1] - 1e-14));
    // error bound = twice the discarded tail
    let tail: f64 = bt.hankel[5..].iter().sum();
    assert!((bt.bound - 2.0 * tail).abs() < 1e-12);
    // actual H∞ error respects the bound
    let red = reduced_model(&stable, &bt.basis.v, &bt.basis.w);
    let actual = hinf_norm(&error_realization(&stable, &red), 1e-8);
    assert!(actual <= bt.bound + 1e-9, "{actual} > {}", bt.bound);
    // balancing is E-biorthogonal
    let gram = bt.basis.w.transpose() * &stable.e * &bt.basis.v;
    assert!((gram - DMatrix::identity(5, 5)).norm() < 1e-8);
}

#[test]
fn balanced_truncation_near_exact_at_full_order() {
    let stable = stable_part();
    // only two Hankel values are numerically zero; r = 9 keeps everything
    let bt = balanced_truncation(&stable, 9).unwrap();
    let red = reduced_model(&stable, &bt.basis.v, &bt.basis.w);
    let err = h2_norm(&error_realization(&stable, &red)).unwrap();
    assert!(err < 1e-6, "full-order BT error {err}");
}

#[test]
fn pod_recovers_low_rank_snapshots() {
    // exact rank-3 snapshot matrix
    let u0 = netred::numerics::orthonormalize(&seeded(8, 3, 55));
    let coef = seeded(3, 20, 56);
    let x = &u0 * DMatrix::from_diagonal(&DVector::from_column_slice(&[5.0, 2.0, 0.5])) * coef;
    let basis = pod(&x, 3, 1).unwrap();
    assert_eq!(basis.v.shape(), (8, 3));
    assert_eq!(basis.method, MorMethod::Pod);
    // same span as u0
    assert!(netred::stabsep::principal_angle_sin(&basis.v, &u0).unwrap() < 1e-8);
    // projection reproduces the snapshots
    let proj = &basis.v * basis.v.transpose() * &x;
    assert!((proj - &x).norm() < 1e-8);
    // v and w coincide (Galerkin POD)
    assert_eq!(basis.v, basis.w);

    // requesting more modes than the snapshot rank truncates to the rank
    let clipped = pod(&x, 7, 1).unwrap();
    assert_eq!(clipped.v.ncols(), 3);
    assert!(clipped.diagnostics.rank_truncated);
}

#[test]
fn pod_singular_value_ordering_matches_svd() {
    let x = seeded(10, 30, 77);
    let basis = pod(&x, 4, 2).unwrap();
    assert_eq!(basis.block_size, 2);
    let (u, _, _) = svd(&x).unwrap();
    for j in 0..4 {
        let dot = basis.v.column(j).dot(&u.column(j)).abs();
        assert!((dot - 1.0).abs() < 1e-10, "mode {j} mismatch");
    }
}

#[test]
fn pod_input_validation() {
    let x = seeded(6, 4, 88);
    assert!(pod(&x, 5, 1).is_err(), "more modes than snapshots");
    assert!(pod(&x, 2, 4).is_err(), "rows not divisible by block size");
    assert!(pod(&x, 0, 1).is_err());
}

#[test]
fn unstable_aware_assembly() {
    let sys = small_network().to_linear().unwrap();
    let d = decompose_mas(&sys).unwrap();
    let inner = irka(&d.stable, 4, 200, 1e-6, 0).unwrap();
    let (v, w) = assemble_unstable_aware_basis(&d, &inner);
    assert_eq!(v.shape(), (10, 5));
    assert_eq!(w.shape(), (10, 5));
    // full column rank
    let (_, s, _) = svd(&v).unwrap();
    assert!(s[4] > 1e-10);
    // consensus direction is inside span(V): residual of projecting 1
    let ones = DVector::from_element(10, 1.0);
    let coef = (v.transpose() * &v).lu().solve(&(v.transpose() * &ones)).unwrap();
    assert!((&v * coef - &ones).norm() < 1e-8);
}
