//! Implicit variable-order (1–5) NDF/BDF integrator with quasi-constant step
//! size, adaptive order selection, and polynomial dense output.
//!
//! The controller follows the classic Shampine–Reichelt design: modified BDF
//! (NDF) formulas, a simplified Newton iteration with rate-based convergence
//! prediction, and a backward-difference array `D` that is rescaled in place
//! whenever the step size changes.

use crate::error::{Error, Result};
use crate::numerics::rms_norm;
use nalgebra::{DMatrix, DVector, Dyn};

const MAX_ORDER: usize = 5;
const NEWTON_MAXITER: usize = 4;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const MAX_STEPS: usize = 5_000_000;
const KAPPA: [f64; 6] = [0.0, -0.1850, -1.0 / 9.0, -0.0823, -0.0415, 0.0];

type Lu = nalgebra::LU<f64, Dyn, Dyn>;

/// Right-hand side `f(t, y)`.
pub type RhsFn<'a> = &'a mut dyn FnMut(f64, &DVector<f64>) -> DVector<f64>;
/// Jacobian `∂f/∂y (t, y)`.
pub type JacFn<'a> = &'a mut dyn FnMut(f64, &DVector<f64>) -> DMatrix<f64>;

/// Tolerances and step-size limits for [`integrate_ode`].
#[derive(Debug, Clone)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub first_step: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-6,
            atol: 1e-9,
            max_step: f64::INFINITY,
            first_step: None,
        }
    }
}

/// Trajectory sampled on the caller's grid, plus solver statistics.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    /// Evaluation times (copy of the requested grid).
    pub t: Vec<f64>,
    /// States; column `j` is the solution at `t[j]`.
    pub y: DMatrix<f64>,
    pub n_steps: usize,
    pub n_fev: usize,
    pub n_jev: usize,
    pub n_lu: usize,
}

fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    f64::from_bits(if x > 0.0 { bits + 1 } else { bits - 1 })
}

/// Basis-change matrix for rescaling the difference array by `factor`.
fn compute_r(order: usize, factor: f64) -> DMatrix<f64> {
    let np = order + 1;
    let mut m = DMatrix::<f64>::zeros(np, np);
    for j in 0..np {
        m[(0, j)] = 1.0;
    }
    for i in 1..np {
        for j in 1..np {
            m[(i, j)] = (i as f64 - 1.0 - factor * j as f64) / i as f64;
        }
    }
    for i in 1..np {
        for j in 0..np {
            m[(i, j)] *= m[(i - 1, j)];
        }
    }
    m
}

/// Rescale rows `0..=order` of `D` in place for a step-size change by `factor`.
fn change_d(d: &mut DMatrix<f64>, order: usize, factor: f64) {
    let r = compute_r(order, factor);
    let u = compute_r(order, 1.0);
    let ru = r * u;
    let top = d.rows(0, order + 1).clone_owned();
    let new_top = ru.transpose() * top;
    d.rows_mut(0, order + 1).copy_from(&new_top);
}

/// Simplified Newton iteration for the implicit BDF stage equation.
///
/// Returns `(converged, n_iter, y, d)` where `d` is the accumulated
/// correction relative to the predictor.
fn solve_bdf_system(
    f: &mut dyn FnMut(f64, &DVector<f64>) -> DVector<f64>,
    n_fev: &mut usize,
    t_new: f64,
    y_predict: &DVector<f64>,
    c: f64,
    psi: &DVector<f64>,
    lu: &Lu,
    scale: &DVector<f64>,
    tol: f64,
) -> (bool, usize, DVector<f64>, DVector<f64>) {
    let n = y_predict.len();
    let mut d = DVector::<f64>::zeros(n);
    let mut y = y_predict.clone();
    let mut dy_norm_old: Option<f64> = None;
    let mut converged = false;
    let mut n_iter = 0;
    for k in 0..NEWTON_MAXITER {
        n_iter = k + 1;
        let fv = f(t_new, &y);
        *n_fev += 1;
        if !fv.iter().all(|v| v.is_finite()) {
            break;
        }
        let rhs = fv * c - psi - &d;
        let dy = match lu.solve(&rhs) {
            Some(x) => x,
            None => break,
        };
        let dy_norm = rms_norm(&dy.component_div(scale));
        let rate = dy_norm_old.map(|old| dy_norm / old);
        if let Some(r) = rate {
            if r >= 1.0 || r.powi((NEWTON_MAXITER - k) as i32) / (1.0 - r) * dy_norm > tol {
                break;
            }
        }
        y += &dy;
        d += &dy;
        if dy_norm == 0.0 || rate.is_some_and(|r| r / (1.0 - r) * dy_norm < tol) {
            converged = true;
            break;
        }
        dy_norm_old = Some(dy_norm);
    }
    (converged, n_iter, y, d)
}

fn fd_jacobian(
    f: &mut dyn FnMut(f64, &DVector<f64>) -> DVector<f64>,
    n_fev: &mut usize,
    t: f64,
    y: &DVector<f64>,
    f0: &DVector<f64>,
) -> DMatrix<f64> {
    let n = y.len();
    let mut j = DMatrix::<f64>::zeros(n, n);
    let mut yp = y.clone();
    let sqrt_eps = f64::EPSILON.sqrt();
    for col in 0..n {
        let h = sqrt_eps * y[col].abs().max(1e-8);
        yp[col] = y[col] + h;
        let fp = f(t, &yp);
        *n_fev += 1;
        j.set_column(col, &((fp - f0) / h));
        yp[col] = y[col];
    }
    j
}

fn select_initial_step(
    f: &mut dyn FnMut(f64, &DVector<f64>) -> DVector<f64>,
    n_fev: &mut usize,
    t0: f64,
    y0: &DVector<f64>,
    t_bound: f64,
    max_step: f64,
    f0: &DVector<f64>,
    rtol: f64,
    atol: f64,
) -> f64 {
    let interval = (t_bound - t0).abs();
    if interval == 0.0 {
        return 0.0;
    }
    let scale = y0.map(|v| atol + v.abs() * rtol);
    let d0 = rms_norm(&y0.component_div(&scale));
    let d1 = rms_norm(&f0.component_div(&scale));
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(interval);
    let y1 = y0 + f0 * h0;
    let f1 = f(t0 + h0, &y1);
    *n_fev += 1;
    let d2 = rms_norm(&(f1 - f0).component_div(&scale)) / h0;
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        1e-6f64.max(h0 * 1e-3)
    } else {
        (0.01 / d1.max(d2)).powf(0.5)
    };
    (100.0 * h0).min(h1).min(interval).min(max_step)
}

/// One accepted step's interpolating polynomial in backward-difference form.
struct DenseSegment {
    t_end: f64,
    h: f64,
    order: usize,
    /// Rows `0..=order` of the difference array at acceptance time.
    d: DMatrix<f64>,
}

impl DenseSegment {
    fn eval(&self, t: f64) -> DVector<f64> {
        let n = self.d.ncols();
        let mut y = self.d.row(0).transpose();
        let mut p = 1.0;
        for k in 0..self.order {
            p *= (t - (self.t_end - self.h * k as f64)) / (self.h * (k + 1) as f64);
            for c in 0..n {
                y[c] += p * self.d[(k + 1, c)];
            }
        }
        y
    }
}

/// Integrate `y' = f(t, y)` from `t_span.0` to `t_span.1`, sampling the dense
/// output on `t_eval` (which must be ascending and inside the span);
/// `t_eval: None` returns the accepted steps themselves, starting at `t0`.
///
/// When `jac` is `None` the Jacobian is approximated by forward differences.
pub fn integrate_ode(
    f: RhsFn,
    mut jac: Option<JacFn>,
    t_span: (f64, f64),
    y0: &DVector<f64>,
    t_eval: Option<&[f64]>,
    opts: &OdeOptions,
) -> Result<OdeSolution> {
    let (t0, t_bound) = t_span;
    let n = y0.len();
    if !t0.is_finite() || !t_bound.is_finite() || t_bound < t0 {
        return Err(Error::Integration {
            t: t0,
            msg: "invalid time span".into(),
        });
    }
    if !y0.iter().all(|v| v.is_finite()) {
        return Err(Error::Integration {
            t: t0,
            msg: "initial state is not finite".into(),
        });
    }
    let slack = 1e-9 * (t_bound - t0).abs().max(1.0);
    if let Some(grid) = t_eval {
        for w in grid.windows(2) {
            if w[1] < w[0] {
                return Err(Error::Integration {
                    t: w[1],
                    msg: "t_eval must be non-decreasing".into(),
                });
            }
        }
        if let (Some(&first), Some(&last)) = (grid.first(), grid.last()) {
            if first < t0 - slack || last > t_bound + slack {
                return Err(Error::Integration {
                    t: first.min(last),
                    msg: "t_eval outside integration span".into(),
                });
            }
        }
    }
    if opts.atol < 0.0 {
        return Err(Error::Integration {
            t: t0,
            msg: "atol must be non-negative".into(),
        });
    }
    let rtol = opts.rtol.max(100.0 * f64::EPSILON);
    let atol = opts.atol;

    let mut n_fev = 0usize;
    let mut n_jev = 0usize;
    let mut n_lu = 0usize;

    if t_bound == t0 {
        let grid = t_eval.map(|g| g.to_vec()).unwrap_or_else(|| vec![t0]);
        let mut y = DMatrix::<f64>::zeros(n, grid.len());
        for jcol in 0..grid.len() {
            y.set_column(jcol, y0);
        }
        return Ok(OdeSolution {
            t: grid,
            y,
            n_steps: 0,
            n_fev: 0,
            n_jev: 0,
            n_lu: 0,
        });
    }

    let f0 = f(t0, y0);
    n_fev += 1;
    if !f0.iter().all(|v| v.is_finite()) {
        return Err(Error::Integration {
            t: t0,
            msg: "right-hand side not finite at initial state".into(),
        });
    }

    let mut h_abs = match opts.first_step {
        Some(h) => {
            if h <= 0.0 || h > t_bound - t0 {
                return Err(Error::Integration {
                    t: t0,
                    msg: "first_step outside (0, t1 - t0]".into(),
                });
            }
            h
        }
        None => select_initial_step(
            &mut *f,
            &mut n_fev,
            t0,
            y0,
            t_bound,
            opts.max_step,
            &f0,
            rtol,
            atol,
        ),
    };

    let newton_tol = (10.0 * f64::EPSILON / rtol).max(0.03f64.min(rtol.sqrt()));

    let mut gamma = [0.0f64; MAX_ORDER + 1];
    for k in 1..=MAX_ORDER {
        gamma[k] = gamma[k - 1] + 1.0 / k as f64;
    }
    let mut alpha = [0.0f64; MAX_ORDER + 1];
    let mut error_const = [0.0f64; MAX_ORDER + 2];
    for k in 0..=MAX_ORDER {
        alpha[k] = (1.0 - KAPPA[k]) * gamma[k];
        error_const[k] = KAPPA[k] * gamma[k] + 1.0 / (k as f64 + 1.0);
    }
    error_const[MAX_ORDER + 1] = 1.0 / (MAX_ORDER as f64 + 2.0);

    let mut j_mat = match jac.as_mut() {
        Some(jf) => {
            n_jev += 1;
            jf(t0, y0)
        }
        None => {
            n_jev += 1;
            fd_jacobian(&mut *f, &mut n_fev, t0, y0, &f0)
        }
    };
    if j_mat.nrows() != n || j_mat.ncols() != n {
        return Err(Error::Integration {
            t: t0,
            msg: "jacobian has wrong shape".into(),
        });
    }

    let identity = DMatrix::<f64>::identity(n, n);
    let mut d_arr = DMatrix::<f64>::zeros(MAX_ORDER + 3, n);
    for c in 0..n {
        d_arr[(0, c)] = y0[c];
        d_arr[(1, c)] = f0[c] * h_abs;
    }

    let mut order = 1usize;
    let mut n_equal_steps = 0usize;
    let mut lu_opt: Option<Lu> = None;

    let mut t = t0;
    let mut segments: Vec<DenseSegment> = Vec::new();
    let mut n_steps = 0usize;

    while t < t_bound {
        n_steps += 1;
        if n_steps > MAX_STEPS {
            return Err(Error::Integration {
                t,
                msg: "step limit exceeded".into(),
            });
        }

        let min_step = 10.0 * (next_up(t) - t).abs();
        if h_abs > opts.max_step {
            change_d(&mut d_arr, order, opts.max_step / h_abs);
            n_equal_steps = 0;
            h_abs = opts.max_step;
        } else if h_abs < min_step {
            change_d(&mut d_arr, order, min_step / h_abs);
            n_equal_steps = 0;
            h_abs = min_step;
        }

        let mut current_jac = false;
        let (t_new, d_vec, safety, scale_new, error_norm) = loop {
            if h_abs < min_step {
                return Err(Error::Integration {
                    t,
                    msg: "required step size smaller than spacing between numbers".into(),
                });
            }
            let mut h = h_abs;
            let mut t_new = t + h;
            if t_new > t_bound {
                t_new = t_bound;
                change_d(&mut d_arr, order, (t_new - t).abs() / h_abs);
                n_equal_steps = 0;
                lu_opt = None;
            }
            h = t_new - t;
            h_abs = h.abs();

            let mut y_predict = DVector::<f64>::zeros(n);
            for i in 0..=order {
                for c in 0..n {
                    y_predict[c] += d_arr[(i, c)];
                }
            }
            let scale_p = y_predict.map(|v| atol + rtol * v.abs());
            let mut psi = DVector::<f64>::zeros(n);
            for i in 1..=order {
                for c in 0..n {
                    psi[c] += gamma[i] * d_arr[(i, c)];
                }
            }
            psi /= alpha[order];

            let c_coef = h / alpha[order];
            let (converged, n_iter, y_new, d_vec) = loop {
                if lu_opt.is_none() {
                    n_lu += 1;
                    lu_opt = Some((&identity - &j_mat * c_coef).lu());
                }
                let (conv, ni, yn, dv) = solve_bdf_system(
                    &mut *f,
                    &mut n_fev,
                    t_new,
                    &y_predict,
                    c_coef,
                    &psi,
                    lu_opt.as_ref().unwrap(),
                    &scale_p,
                    newton_tol,
                );
                if conv || current_jac {
                    break (conv, ni, yn, dv);
                }
                j_mat = match jac.as_mut() {
                    Some(jf) => {
                        n_jev += 1;
                        jf(t_new, &y_predict)
                    }
                    None => {
                        let f_pred = f(t_new, &y_predict);
                        n_fev += 1;
                        n_jev += 1;
                        fd_jacobian(&mut *f, &mut n_fev, t_new, &y_predict, &f_pred)
                    }
                };
                lu_opt = None;
                current_jac = true;
            };

            if !converged {
                let factor = 0.5;
                h_abs *= factor;
                change_d(&mut d_arr, order, factor);
                n_equal_steps = 0;
                lu_opt = None;
                continue;
            }

            let safety = 0.9 * (2 * NEWTON_MAXITER + 1) as f64
                / (2 * NEWTON_MAXITER + n_iter) as f64;
            let scale_new = y_new.map(|v| atol + rtol * v.abs());
            let error_norm = rms_norm(&(d_vec.map(|v| error_const[order] * v)).component_div(&scale_new));

            if error_norm > 1.0 {
                let factor =
                    MIN_FACTOR.max(safety * error_norm.powf(-1.0 / (order as f64 + 1.0)));
                h_abs *= factor;
                change_d(&mut d_arr, order, factor);
                n_equal_steps = 0;
                // Convergence was fine, so the factorization is kept on purpose.
            } else {
                // y_new itself is not needed past this point: folding `d` into
                // the difference array reproduces it as row 0.
                break (t_new, d_vec, safety, scale_new, error_norm);
            }
        };

        n_equal_steps += 1;
        t = t_new;

        // D[order+2] = d − D[order+1]; D[order+1] = d; then fold upward.
        for c in 0..n {
            d_arr[(order + 2, c)] = d_vec[c] - d_arr[(order + 1, c)];
            d_arr[(order + 1, c)] = d_vec[c];
        }
        for i in (0..=order).rev() {
            for c in 0..n {
                d_arr[(i, c)] += d_arr[(i + 1, c)];
            }
        }

        // Order/step-size adaptation after order+1 equally sized steps.
        if n_equal_steps >= order + 1 {
            let error_m_norm = if order > 1 {
                let em = d_arr.row(order).transpose() * error_const[order - 1];
                rms_norm(&em.component_div(&scale_new))
            } else {
                f64::INFINITY
            };
            let error_p_norm = if order < MAX_ORDER {
                let ep = d_arr.row(order + 2).transpose() * error_const[order + 1];
                rms_norm(&ep.component_div(&scale_new))
            } else {
                f64::INFINITY
            };
            let error_norms = [error_m_norm, error_norm, error_p_norm];
            let mut factors = [0.0f64; 3];
            for (i, &en) in error_norms.iter().enumerate() {
                factors[i] = en.powf(-1.0 / (order + i) as f64);
            }
            let mut best = 0usize;
            for i in 1..3 {
                if factors[i] > factors[best] {
                    best = i;
                }
            }
            order = order + best - 1;
            let factor = MAX_FACTOR.min(safety * factors.iter().fold(f64::MIN, |a, &b| a.max(b)));
            h_abs *= factor;
            change_d(&mut d_arr, order, factor);
            n_equal_steps = 0;
            lu_opt = None;
        }

        segments.push(DenseSegment {
            t_end: t,
            h: h_abs,
            order,
            d: d_arr.rows(0, order + 1).clone_owned(),
        });
    }

    match t_eval {
        // Sample the dense output on the requested grid.
        Some(grid) => {
            let mut y_out = DMatrix::<f64>::zeros(n, grid.len());
            let mut seg_idx = 0usize;
            for (jcol, &te) in grid.iter().enumerate() {
                while seg_idx + 1 < segments.len() && segments[seg_idx].t_end < te {
                    seg_idx += 1;
                }
                if segments.is_empty() {
                    y_out.set_column(jcol, y0);
                } else {
                    y_out.set_column(jcol, &segments[seg_idx].eval(te));
                }
            }
            Ok(OdeSolution {
                t: grid.to_vec(),
                y: y_out,
                n_steps,
                n_fev,
                n_jev,
                n_lu,
            })
        }
        // Report every accepted step (the row-0 state of each segment).
        None => {
            let mut t_out = Vec::with_capacity(segments.len() + 1);
            let mut y_out = DMatrix::<f64>::zeros(n, segments.len() + 1);
            t_out.push(t0);
            y_out.set_column(0, y0);
            for (k, seg) in segments.iter().enumerate() {
                t_out.push(seg.t_end);
                y_out.set_column(k + 1, &seg.d.row(0).transpose());
            }
            Ok(OdeSolution {
                t: t_out,
                y: y_out,
                n_steps,
                n_fev,
                n_jev,
                n_lu,
            })
        }
    }
}
