//! Conjugate gradients and BiCGStab over [`LinearOperator`].

use super::operator::LinearOperator;
use super::SolverOptions;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct KrylovOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final `‖b − Ax‖₂ / ‖b‖₂`, recomputed from scratch.
    pub residual: f64,
    pub converged: bool,
}

/// Stopping rule shared by both solvers.
#[derive(Debug, Clone, Copy)]
pub struct Stop {
    pub tol: f64,
    pub max_iter: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn remove_mean(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
}

fn true_residual<Op: LinearOperator>(op: &Op, b: &[f64], x: &[f64], scratch: &mut [f64]) -> f64 {
    op.apply(x, scratch);
    let r: f64 = b
        .iter()
        .zip(scratch.iter())
        .map(|(bi, ai)| (bi - ai).powi(2))
        .sum::<f64>()
        .sqrt();
    let nb = norm(b);
    if nb == 0.0 {
        r
    } else {
        r / nb
    }
}

/// Preconditioned CG. `precond` applies an SPD approximation of `A⁻¹`;
/// `mean_zero` projects out constants (for systems with a constant kernel).
pub fn pcg<Op, P>(
    op: &Op,
    rhs: &[f64],
    x0: Option<&[f64]>,
    precond: P,
    stop: Stop,
    mean_zero: bool,
) -> KrylovOutcome
where
    Op: LinearOperator,
    P: Fn(&[f64], &mut [f64]),
{
    let n = op.len();
    let mut b = rhs.to_vec();
    if mean_zero {
        remove_mean(&mut b);
    }
    let nb = norm(&b);
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    if nb == 0.0 {
        return KrylovOutcome {
            x: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
            converged: true,
        };
    }
    let mut ap = vec![0.0; n];
    op.apply(&x, &mut ap);
    let mut r: Vec<f64> = b.iter().zip(&ap).map(|(bi, ai)| bi - ai).collect();
    if mean_zero {
        remove_mean(&mut r);
    }
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    if mean_zero {
        remove_mean(&mut z);
    }
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut iterations = 0;
    let mut best = (norm(&r), x.clone());
    while iterations < stop.max_iter && norm(&r) > stop.tol * nb {
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        iterations += 1;
        let rn = norm(&r);
        if rn < best.0 {
            best = (rn, x.clone());
        }
        precond(&r, &mut z);
        if mean_zero {
            remove_mean(&mut z);
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let mut x = if norm(&r) <= best.0 { x } else { best.1 };
    if mean_zero {
        remove_mean(&mut x);
    }
    let residual = true_residual(op, &b, &x, &mut ap);
    KrylovOutcome {
        x,
        iterations,
        residual,
        // the recurrence residual can drift below the attainable floor
        converged: residual <= stop.tol.max(1e3 * f64::EPSILON),
    }
}

/// BiCGStab for nonsymmetric systems, unpreconditioned.
pub fn bicgstab<Op: LinearOperator>(
    op: &Op,
    rhs: &[f64],
    x0: Option<&[f64]>,
    stop: Stop,
) -> KrylovOutcome {
    let n = op.len();
    let nb = norm(rhs);
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    if nb == 0.0 {
        return KrylovOutcome {
            x: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
            converged: true,
        };
    }
    let mut v = vec![0.0; n];
    op.apply(&x, &mut v);
    let mut r: Vec<f64> = rhs.iter().zip(&v).map(|(b, a)| b - a).collect();
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut p = vec![0.0; n];
    v.iter_mut().for_each(|a| *a = 0.0);
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut iterations = 0;
    while iterations < stop.max_iter && norm(&r) > stop.tol * nb {
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 || omega == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        op.apply(&p, &mut v);
        let rv = dot(&r_hat, &v);
        if rv == 0.0 {
            break;
        }
        alpha = rho / rv;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        iterations += 1;
        if norm(&s) <= stop.tol * nb {
            for i in 0..n {
                x[i] += alpha * p[i];
            }
            r.copy_from_slice(&s);
            break;
        }
        op.apply(&s, &mut t);
        let tt = dot(&t, &t);
        omega = if tt == 0.0 { 0.0 } else { dot(&t, &s) / tt };
        for i in 0..n {
            x[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
    }
    let residual = true_residual(op, rhs, &x, &mut t);
    KrylovOutcome {
        x,
        iterations,
        residual,
        converged: residual <= stop.tol.max(1e3 * f64::EPSILON),
    }
}

fn stop_from(opts: &SolverOptions, n: usize) -> Stop {
    Stop {
        tol: opts.cg_tol,
        max_iter: opts.cg_max_iter.unwrap_or(10 * n),
    }
}

fn require(out: KrylovOutcome, solver: &'static str) -> Result<KrylovOutcome> {
    if out.converged {
        Ok(out)
    } else {
        Err(Error::NoConvergence {
            solver,
            iterations: out.iterations,
            residual: out.residual,
        })
    }
}

/// CG on a symmetric positive definite system.
pub fn cg_solve<Op: LinearOperator>(op: &Op, rhs: &[f64], opts: &SolverOptions) -> Result<KrylovOutcome> {
    let out = pcg(op, rhs, None, |r, z| z.copy_from_slice(r), stop_from(opts, op.len()), false);
    require(out, "conjugate gradients")
}

/// CG on a positive semi-definite system whose kernel is the constants; the
/// right-hand side must have zero mean and the solution is returned mean-zero.
pub fn cg_solve_mean_zero<Op: LinearOperator>(
    op: &Op,
    rhs: &[f64],
    opts: &SolverOptions,
) -> Result<KrylovOutcome> {
    let mean = rhs.iter().sum::<f64>() / rhs.len() as f64;
    let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if mean.abs() > 1e-10 * scale.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "right-hand side of a singular system has mean {mean:.3e}"
        )));
    }
    let out = pcg(op, rhs, None, |r, z| z.copy_from_slice(r), stop_from(opts, op.len()), true);
    require(out, "conjugate gradients")
}

pub fn bicgstab_solve<Op: LinearOperator>(
    op: &Op,
    rhs: &[f64],
    opts: &SolverOptions,
) -> Result<KrylovOutcome> {
    let out = bicgstab(op, rhs, None, stop_from(opts, op.len()));
    require(out, "BiCGStab")
}
