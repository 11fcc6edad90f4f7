use super::krylov::{bicgstab, pcg, Stop};
use super::operator::{DivOperator, LinearOperator, ShiftedNegation};
use super::tridiag::CyclicTridiagonal;
use super::SolverOptions;
use crate::error::{Error, Result};

/// Principal eigenpair of `−Lψ = λψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub lambda: f64,
    /// Positive, with maximum exactly 1.
    pub psi: Vec<f64>,
    /// `‖−Lψ − λψ‖_∞`.
    pub residual: f64,
    pub iterations: usize,
}

enum Inner<'a> {
    Direct(CyclicTridiagonal),
    Krylov(ShiftedNegation<'a, DivOperator>),
}

/// Shifted inverse iteration for the eigenvalue of `−L` with smallest real part.
///
/// The shift `1 + max|q|` bounds the principal eigenvalue of `−L + s` below by
/// one, since the potential-free part has the constants as principal
/// eigenvector. One-dimensional operators are inverted directly, two-dimensional
/// ones by CG (symmetric) or BiCGStab (with drift).
pub fn principal_eigen_iterate(
    op: &DivOperator,
    opts: &SolverOptions,
    warm: Option<&[f64]>,
) -> Result<EigenPair> {
    let n = op.len();
    let shift = 1.0 + op.max_abs_potential();
    let inner = match op.tridiagonal_1d() {
        Some((sub, diag, sup)) => {
            let neg = |v: Vec<f64>| v.into_iter().map(|x| -x).collect::<Vec<_>>();
            let d: Vec<f64> = diag.iter().map(|x| shift - x).collect();
            Inner::Direct(CyclicTridiagonal::factor(&neg(sub), &d, &neg(sup)))
        }
        None => Inner::Krylov(ShiftedNegation { op, shift }),
    };

    let mut psi = match warm {
        Some(w) if w.len() == n && w.iter().all(|v| *v > 0.0) => w.to_vec(),
        _ => vec![1.0; n],
    };
    normalize(&mut psi);
    let mut bpsi = vec![0.0; n];
    let mut lambda = rayleigh(op, &psi, &mut bpsi);
    let mut residual = residual_inf(&psi, &bpsi, lambda);
    // evaluating `Lψ` alone carries a rounding error of order ε‖L‖
    let tol = opts.eigen_tol.max(64.0 * f64::EPSILON * op.norm_bound());
    let mut iterations = 0;
    while residual > tol && iterations < opts.eigen_max_iter {
        iterations += 1;
        let next = match &inner {
            Inner::Direct(t) => {
                let mut y = psi.clone();
                t.solve_in_place(&mut y);
                y
            }
            Inner::Krylov(sys) => {
                // current iterate scaled by the expected growth is a good start
                let guess: Vec<f64> = psi.iter().map(|v| v / (lambda + shift)).collect();
                let stop = Stop {
                    tol: (1e-3 * residual).clamp(1e-14, 1e-6),
                    max_iter: opts.cg_max_iter.unwrap_or(10 * n),
                };
                if op.has_drift() {
                    bicgstab(sys, &psi, Some(&guess), stop).x
                } else {
                    pcg(sys, &psi, Some(&guess), |r, z| z.copy_from_slice(r), stop, false).x
                }
            }
        };
        psi = next;
        normalize(&mut psi);
        lambda = rayleigh(op, &psi, &mut bpsi);
        residual = residual_inf(&psi, &bpsi, lambda);
    }
    if residual > tol {
        return Err(Error::NoConvergence {
            solver: "inverse iteration",
            iterations,
            residual,
        });
    }
    let min = psi.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return Err(Error::PerronViolation { min });
    }
    Ok(EigenPair {
        lambda,
        psi,
        residual,
        iterations,
    })
}

/// Scales so the entry of largest magnitude equals exactly 1.
fn normalize(v: &mut [f64]) {
    let peak = v
        .iter()
        .copied()
        .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    v.iter_mut().for_each(|x| *x /= peak);
}

/// `⟨ψ, −Lψ⟩ / ⟨ψ, ψ⟩`, leaving `−Lψ` in `bpsi`.
fn rayleigh(op: &DivOperator, psi: &[f64], bpsi: &mut [f64]) -> f64 {
    op.apply(psi, bpsi);
    bpsi.iter_mut().for_each(|v| *v = -*v);
    let num: f64 = psi.iter().zip(bpsi.iter()).map(|(a, b)| a * b).sum();
    let den: f64 = psi.iter().map(|a| a * a).sum();
    num / den
}

fn residual_inf(psi: &[f64], bpsi: &[f64], lambda: f64) -> f64 {
    psi.iter()
        .zip(bpsi)
        .map(|(p, b)| (b - lambda * p).abs())
        .fold(0.0, f64::max)
}
