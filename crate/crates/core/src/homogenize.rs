//! Cell problem, effective diffusivity and the averaged nonlinearity.

use crate::discretize::{
    cg_solve_mean_zero, check_direction, DivOperator, Grid, LinearOperator, ShiftedNegation,
    SolverOptions,
};
use crate::error::{Error, Result};
use crate::media::Medium;

/// Corrector `χ` of `∇·(A(∇χ + e)) = 0` and the effective diffusivity.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSolution {
    pub e: Vec<f64>,
    /// Mean-zero grid function.
    pub chi: Vec<f64>,
    /// `⨍ e·A(∇χ + e)`.
    pub a0: f64,
    /// `⨍ (∇χ + e)·A(∇χ + e)`, equal to `a0` at the discrete solution.
    pub a0_energy: f64,
    /// `‖∇·(A(∇χ + e))‖_∞` on the grid.
    pub residual: f64,
}

pub fn solve_cell(m: &Medium, g: &Grid, e: &[f64], opts: &SolverOptions) -> Result<CellSolution> {
    check_direction(e, m.dim())?;
    let (gp, mp) = (g.cell().periods(), m.cell().periods());
    if gp.iter().zip(mp).any(|(a, b)| (a - b).abs() > 1e-12 * b) {
        return Err(Error::CellMismatch {
            grid: gp.to_vec(),
            medium: mp.to_vec(),
        });
    }
    let op = DivOperator::diffusion(m, g);
    let div_ae = op.flux_of_linear(e);
    let chi = cg_solve_mean_zero(&ShiftedNegation { op: &op, shift: 0.0 }, &div_ae, opts)?.x;

    let mut lchi = vec![0.0; g.len()];
    op.apply(&chi, &mut lchi);
    let residual = lchi
        .iter()
        .zip(&div_ae)
        .map(|(a, b)| (a + b).abs())
        .fold(0.0, f64::max);

    let (flux, energy) = effective_forms(&op, &chi, e);
    if (flux - energy).abs() > 1e-8 * flux.abs().max(energy.abs()) {
        return Err(Error::CellCrossCheck { flux, energy });
    }
    Ok(CellSolution {
        e: e.to_vec(),
        chi,
        a0: flux,
        a0_energy: energy,
        residual,
    })
}

/// Flux and energy averages of `w = χ + e·x` with the operator's own stencils.
fn effective_forms(op: &DivOperator, chi: &[f64], e: &[f64]) -> (f64, f64) {
    let g = op.grid();
    let h = g.h();
    let n = g.len();
    let mut flux = 0.0;
    let mut energy = 0.0;
    for axis in 0..g.dim() {
        let faces = op.faces(axis);
        for k in 0..n {
            let dw = (chi[g.neighbor(k, axis, 1)] - chi[k]) / h[axis] + e[axis];
            flux += e[axis] * faces[k] * dw;
            energy += faces[k] * dw * dw;
        }
    }
    if let Some(c) = op.cross() {
        for k in 0..n {
            let d1 = (chi[g.neighbor(k, 0, 1)] - chi[g.neighbor(k, 0, -1)]) / (2.0 * h[0]) + e[0];
            let d2 = (chi[g.neighbor(k, 1, 1)] - chi[g.neighbor(k, 1, -1)]) / (2.0 * h[1]) + e[1];
            flux += c[k] * (e[0] * d2 + e[1] * d1);
            energy += 2.0 * c[k] * d1 * d2;
        }
    }
    (flux / n as f64, energy / n as f64)
}

/// Samples of `f̄`, its primitive `F` and the zeros of `f̄` on a uniform `u`-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedReaction {
    pub u: Vec<f64>,
    pub fbar: Vec<f64>,
    pub big_f: Vec<f64>,
    /// Increasing, always containing 0 and 1.
    pub zeros: Vec<f64>,
    du0: f64,
    du1: f64,
}

pub const DEFAULT_U_POINTS: usize = 1025;
/// Simpson panels per axis for the cell average.
pub const CELL_QUADRATURE: usize = 64;

fn simpson_weights(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w / (3.0 * n as f64)
        })
        .collect()
}

/// Cell average of `f(x, ·)` by tensor Simpson quadrature.
pub fn average_reaction(m: &Medium) -> AveragedReaction {
    let nq = CELL_QUADRATURE;
    let w1 = simpson_weights(nq);
    let p = m.cell().periods();
    let mut nodes: Vec<([f64; 2], f64)> = Vec::new();
    if m.dim() == 1 {
        for (i, w) in w1.iter().enumerate() {
            nodes.push(([p[0] * i as f64 / nq as f64, 0.0], *w));
        }
    } else {
        for (j, wj) in w1.iter().enumerate() {
            for (i, wi) in w1.iter().enumerate() {
                let x = [p[0] * i as f64 / nq as f64, p[1] * j as f64 / nq as f64];
                nodes.push((x, wi * wj));
            }
        }
    }
    let avg = |f: &dyn Fn(&[f64; 2]) -> f64| nodes.iter().map(|(x, w)| w * f(x)).sum::<f64>();
    let nu = DEFAULT_U_POINTS;
    let u: Vec<f64> = (0..nu).map(|i| i as f64 / (nu - 1) as f64).collect();
    let mut fbar: Vec<f64> = u.iter().map(|&s| avg(&|x| m.reaction(x, s))).collect();
    fbar[0] = 0.0;
    fbar[nu - 1] = 0.0;
    let du0 = avg(&|x| m.reaction_du(x, 0.0));
    let du1 = avg(&|x| m.reaction_du(x, 1.0));
    AveragedReaction::from_samples(u, fbar, Some((du0, du1)))
}

impl AveragedReaction {
    /// Tabulates an explicitly given `f̄` on `n` uniform points (`n` odd).
    pub fn from_fn(f: impl Fn(f64) -> f64, n: usize) -> Result<Self> {
        if n < 5 || n % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "u-grid needs an odd number of at least 5 points, got {n}"
            )));
        }
        let u: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let mut fbar: Vec<f64> = u.iter().map(|&s| f(s)).collect();
        if fbar[0].abs() > 1e-12 || fbar[n - 1].abs() > 1e-12 {
            return Err(Error::InvalidArgument("f̄ must vanish at 0 and 1".into()));
        }
        fbar[0] = 0.0;
        fbar[n - 1] = 0.0;
        Ok(Self::from_samples(u, fbar, None))
    }

    fn from_samples(u: Vec<f64>, fbar: Vec<f64>, slopes: Option<(f64, f64)>) -> Self {
        let n = u.len();
        let h = u[1] - u[0];
        let mut big_f = vec![0.0; n];
        let mut i = 0;
        while i + 2 < n {
            let (f0, f1, f2) = (fbar[i], fbar[i + 1], fbar[i + 2]);
            big_f[i + 1] = big_f[i] + h * (5.0 * f0 + 8.0 * f1 - f2) / 12.0;
            big_f[i + 2] = big_f[i] + h * (f0 + 4.0 * f1 + f2) / 3.0;
            i += 2;
        }
        let (du0, du1) = slopes.unwrap_or_else(|| {
            (
                (-11.0 * fbar[0] + 18.0 * fbar[1] - 9.0 * fbar[2] + 2.0 * fbar[3]) / (6.0 * h),
                (11.0 * fbar[n - 1] - 18.0 * fbar[n - 2] + 9.0 * fbar[n - 3] - 2.0 * fbar[n - 4])
                    / (6.0 * h),
            )
        });
        let mut ar = Self {
            u,
            fbar,
            big_f,
            zeros: Vec::new(),
            du0,
            du1,
        };
        ar.zeros = ar.find_zeros();
        ar
    }

    fn h(&self) -> f64 {
        self.u[1] - self.u[0]
    }

    /// Four nodes around `s` and the local coordinate `t = (s − u_j)/h`.
    fn stencil(&self, s: f64) -> (usize, f64) {
        let n = self.u.len();
        let h = self.h();
        let cell = ((s / h).floor() as isize).clamp(0, n as isize - 2) as usize;
        let j = cell.saturating_sub(1).min(n - 4);
        (j, s / h - j as f64)
    }

    /// Cubic Lagrange interpolant of `f̄`.
    pub fn eval(&self, s: f64) -> f64 {
        let (j, t) = self.stencil(s);
        let f = &self.fbar[j..j + 4];
        let l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
        let l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
        let l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
        let l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
        f[0] * l0 + f[1] * l1 + f[2] * l2 + f[3] * l3
    }

    /// Derivative of the interpolant.
    pub fn deriv(&self, s: f64) -> f64 {
        let (j, t) = self.stencil(s);
        let f = &self.fbar[j..j + 4];
        let d0 = -(3.0 * t * t - 12.0 * t + 11.0) / 6.0;
        let d1 = (3.0 * t * t - 10.0 * t + 6.0) / 2.0;
        let d2 = -(3.0 * t * t - 8.0 * t + 3.0) / 2.0;
        let d3 = (3.0 * t * t - 6.0 * t + 2.0) / 6.0;
        (f[0] * d0 + f[1] * d1 + f[2] * d2 + f[3] * d3) / self.h()
    }

    /// `f̄'(0)`.
    pub fn slope_at_zero(&self) -> f64 {
        self.du0
    }

    /// `f̄'(1)`.
    pub fn slope_at_one(&self) -> f64 {
        self.du1
    }

    /// `F(1) = ∫₀¹ f̄`.
    pub fn f1(&self) -> f64 {
        *self.big_f.last().unwrap()
    }

    /// `f̄(lo + (hi − lo) v) / (hi − lo)` on `[0, 1]`: the nonlinearity seen by
    /// `v = (u − lo)/(hi − lo)`.
    pub fn restricted(&self, lo: f64, hi: f64) -> Result<Self> {
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(Error::InvalidArgument(format!("bad range [{lo}, {hi}]")));
        }
        let d = hi - lo;
        let n = self.u.len();
        let u: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let mut g: Vec<f64> = u.iter().map(|&v| self.eval(lo + d * v) / d).collect();
        g[0] = 0.0;
        g[n - 1] = 0.0;
        let slopes = (self.deriv(lo), self.deriv(hi));
        Ok(Self::from_samples(u, g, Some(slopes)))
    }

    fn find_zeros(&self) -> Vec<f64> {
        let n = self.u.len();
        let mut zeros = vec![0.0];
        for i in 1..n - 1 {
            if self.fbar[i] == 0.0 {
                zeros.push(self.u[i]);
            }
        }
        for i in 0..n - 1 {
            let (a, b) = (self.fbar[i], self.fbar[i + 1]);
            if a != 0.0 && b != 0.0 && (a < 0.0) != (b < 0.0) {
                zeros.push(self.bisect(self.u[i], self.u[i + 1]));
            }
        }
        zeros.push(1.0);
        zeros.sort_by(|a, b| a.partial_cmp(b).unwrap());
        zeros.dedup();
        zeros
    }

    fn bisect(&self, mut lo: f64, mut hi: f64) -> f64 {
        let neg_lo = self.eval(lo) < 0.0;
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            let v = self.eval(mid);
            if v == 0.0 {
                return mid;
            }
            if (v < 0.0) == neg_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}
