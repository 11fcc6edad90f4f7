use crate::discretize::grid::Grid;
use crate::error::{Error, Result};
use crate::media::Medium;

/// Anything that maps a grid function to another of the same length.
pub trait LinearOperator {
    fn len(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Which steady state a linearisation is taken around.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum State {
    Zero,
    One,
}

impl State {
    pub fn value(self) -> f64 {
        match self {
            State::Zero => 0.0,
            State::One => 1.0,
        }
    }
}

/// Discrete `ψ ↦ ∇·(A∇ψ) + b·∇ψ + qψ` on a periodic grid.
///
/// Diagonal fluxes use harmonic face averages of `A_ii`; the mixed part is
/// `D_1(A_12 D_2 ψ) + D_2(A_12 D_1 ψ)` with centred differences, which keeps
/// the drift-free operator symmetric.
#[derive(Debug, Clone)]
pub struct DivOperator {
    grid: Grid,
    /// `faces[i][k]`: coefficient on the face between node `k` and its `+e_i` neighbour.
    faces: Vec<Vec<f64>>,
    /// `A_12` at the nodes, present only when it is not identically zero.
    cross: Option<Vec<f64>>,
    /// Nodal drift coefficients per axis.
    drift: Option<Vec<Vec<f64>>>,
    potential: Option<Vec<f64>>,
}

/// Assembles the operator of the principal eigenvalue problems.
///
/// * no `state`: the pure diffusion part;
/// * `state` only: potential `∂_u f(x, state)`;
/// * `e`, `mu`, `state`: drift `2μ A e` and potential
///   `μ² eAe + μ ∇·(Ae) + ∂_u f(x, state)`.
pub fn assemble_div_operator(
    m: &Medium,
    g: &Grid,
    e: Option<&[f64]>,
    mu: Option<f64>,
    state: Option<State>,
) -> Result<DivOperator> {
    let (gp, mp) = (g.cell().periods(), m.cell().periods());
    if gp.len() != mp.len() || gp.iter().zip(mp).any(|(a, b)| (a - b).abs() > 1e-12 * b) {
        return Err(Error::CellMismatch {
            grid: gp.to_vec(),
            medium: mp.to_vec(),
        });
    }
    if mu.is_some() && (e.is_none() || state.is_none()) {
        return Err(Error::InvalidArgument(
            "a weighted operator needs both a direction and a state".into(),
        ));
    }
    if let Some(e) = e {
        check_direction(e, g.dim())?;
    }
    let mut op = DivOperator::diffusion(m, g);
    if let Some(state) = state {
        let s = state.value();
        let mut q: Vec<f64> = g.points().map(|x| m.reaction_du(&x, s)).collect();
        if let (Some(e), Some(mu)) = (e, mu) {
            if mu != 0.0 {
                let div = op.flux_of_linear(e);
                let mut drift = vec![vec![0.0; g.len()]; g.dim()];
                for (k, x) in g.points().enumerate() {
                    let a = m.diffusion(&x);
                    let ae = a.apply(e);
                    q[k] += mu * mu * a.quad(e, e) + mu * div[k];
                    for (i, d) in drift.iter_mut().enumerate() {
                        d[k] = 2.0 * mu * ae[i];
                    }
                }
                op.drift = Some(drift);
            }
        }
        op.potential = Some(q);
    }
    Ok(op)
}

pub(crate) fn check_direction(e: &[f64], dim: usize) -> Result<()> {
    if e.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "direction has {} components in dimension {dim}",
            e.len()
        )));
    }
    let norm = e.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("direction is not a unit vector (|e| = {norm})")));
    }
    Ok(())
}

impl DivOperator {
    /// `∇·(A∇ψ)` alone.
    pub fn diffusion(m: &Medium, g: &Grid) -> Self {
        let dim = g.dim();
        let nodal: Vec<_> = g.points().map(|x| m.diffusion(&x)).collect();
        let mut faces = Vec::with_capacity(dim);
        for axis in 0..dim {
            let f = (0..g.len())
                .map(|k| {
                    let kn = g.neighbor(k, axis, 1);
                    let (a, b) = if axis == 0 {
                        (nodal[k].xx, nodal[kn].xx)
                    } else {
                        (nodal[k].yy, nodal[kn].yy)
                    };
                    2.0 * a * b / (a + b)
                })
                .collect();
            faces.push(f);
        }
        let cross = if dim == 2 && nodal.iter().any(|a| a.xy != 0.0) {
            Some(nodal.iter().map(|a| a.xy).collect())
        } else {
            None
        };
        Self {
            grid: g.clone(),
            faces,
            cross,
            drift: None,
            potential: None,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn faces(&self, axis: usize) -> &[f64] {
        &self.faces[axis]
    }

    pub fn cross(&self) -> Option<&[f64]> {
        self.cross.as_deref()
    }

    pub fn potential(&self) -> Option<&[f64]> {
        self.potential.as_deref()
    }

    pub fn has_drift(&self) -> bool {
        self.drift.is_some()
    }

    /// Multiplies the second-order part by `s`.
    pub fn scale_diffusion(&mut self, s: f64) {
        for f in self.faces.iter_mut().flatten() {
            *f *= s;
        }
        if let Some(c) = &mut self.cross {
            c.iter_mut().for_each(|v| *v *= s);
        }
    }

    pub fn max_abs_potential(&self) -> f64 {
        self.potential
            .as_ref()
            .map(|q| q.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .unwrap_or(0.0)
    }

    /// Upper bound on the row-sum norm `‖L‖_∞`.
    pub fn norm_bound(&self) -> f64 {
        let h = self.grid.h();
        let maxabs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut s: f64 = (0..self.grid.dim())
            .map(|i| 4.0 * maxabs(&self.faces[i]) / (h[i] * h[i]))
            .sum();
        if let Some(c) = &self.cross {
            s += 4.0 * maxabs(c) / (h[0] * h[1]);
        }
        if let Some(d) = &self.drift {
            s += d.iter().enumerate().map(|(i, b)| maxabs(b) / h[i]).sum::<f64>();
        }
        s + self.max_abs_potential()
    }

    /// The operator applied to the (non-periodic) linear function `e·x`,
    /// i.e. the discrete `∇·(Ae)`.
    pub fn flux_of_linear(&self, e: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let h = g.h();
        let mut out = vec![0.0; g.len()];
        for (k, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for axis in 0..g.dim() {
                let km = g.neighbor(k, axis, -1);
                s += e[axis] * (self.faces[axis][k] - self.faces[axis][km]) / h[axis];
            }
            if let Some(c) = &self.cross {
                let d1 = (c[g.neighbor(k, 0, 1)] - c[g.neighbor(k, 0, -1)]) / (2.0 * h[0]);
                let d2 = (c[g.neighbor(k, 1, 1)] - c[g.neighbor(k, 1, -1)]) / (2.0 * h[1]);
                s += d1 * e[1] + d2 * e[0];
            }
            *o = s;
        }
        out
    }

    /// Rows `(sub, diag, sup)` of the periodic tridiagonal matrix of a 1-d operator.
    pub fn tridiagonal_1d(&self) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        if self.grid.dim() != 1 {
            return None;
        }
        let n = self.grid.len();
        let h = self.grid.h()[0];
        let inv = 1.0 / (h * h);
        let f = &self.faces[0];
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        for k in 0..n {
            let km = (k + n - 1) % n;
            sub[k] = inv * f[km];
            sup[k] = inv * f[k];
            diag[k] = -inv * (f[k] + f[km]);
            if let Some(d) = &self.drift {
                let b = d[0][k] / (2.0 * h);
                sub[k] -= b;
                sup[k] += b;
            }
            if let Some(q) = &self.potential {
                diag[k] += q[k];
            }
        }
        Some((sub, diag, sup))
    }

    /// Second-order part only, accumulated into `y`.
    fn apply_diffusion(&self, x: &[f64], y: &mut [f64]) {
        let g = &self.grid;
        let h = g.h();
        let n0 = g.n()[0];
        let len = g.len();
        // axis 0: rows are contiguous, handle wrap explicitly
        let inv = 1.0 / (h[0] * h[0]);
        let f0 = &self.faces[0];
        for row in (0..len).step_by(n0) {
            for i in 0..n0 {
                let k = row + i;
                let kp = if i + 1 == n0 { row } else { k + 1 };
                let km = if i == 0 { row + n0 - 1 } else { k - 1 };
                y[k] += inv * (f0[k] * (x[kp] - x[k]) - f0[km] * (x[k] - x[km]));
            }
        }
        if g.dim() == 2 {
            let inv = 1.0 / (h[1] * h[1]);
            let f1 = &self.faces[1];
            for k in 0..len {
                let kp = if k + n0 >= len { k + n0 - len } else { k + n0 };
                let km = if k < n0 { k + len - n0 } else { k - n0 };
                y[k] += inv * (f1[k] * (x[kp] - x[k]) - f1[km] * (x[k] - x[km]));
            }
            if let Some(c) = &self.cross {
                let s = 1.0 / (4.0 * h[0] * h[1]);
                for k in 0..len {
                    let (ip, im) = (g.neighbor(k, 0, 1), g.neighbor(k, 0, -1));
                    let (jp, jm) = (g.neighbor(k, 1, 1), g.neighbor(k, 1, -1));
                    // D_1(A_12 D_2 x)
                    let a = c[ip] * (x[g.neighbor(ip, 1, 1)] - x[g.neighbor(ip, 1, -1)])
                        - c[im] * (x[g.neighbor(im, 1, 1)] - x[g.neighbor(im, 1, -1)]);
                    // D_2(A_12 D_1 x)
                    let b = c[jp] * (x[g.neighbor(jp, 0, 1)] - x[g.neighbor(jp, 0, -1)])
                        - c[jm] * (x[g.neighbor(jm, 0, 1)] - x[g.neighbor(jm, 0, -1)]);
                    y[k] += s * (a + b);
                }
            }
        }
    }
}

impl LinearOperator for DivOperator {
    fn len(&self) -> usize {
        self.grid.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        self.apply_diffusion(x, y);
        let g = &self.grid;
        if let Some(drift) = &self.drift {
            for (axis, b) in drift.iter().enumerate() {
                let inv = 1.0 / (2.0 * g.h()[axis]);
                for k in 0..g.len() {
                    let d = x[g.neighbor(k, axis, 1)] - x[g.neighbor(k, axis, -1)];
                    y[k] += b[k] * inv * d;
                }
            }
        }
        if let Some(q) = &self.potential {
            for ((yk, qk), xk) in y.iter_mut().zip(q).zip(x) {
                *yk += qk * xk;
            }
        }
    }
}

/// `shift·I − L`, the positive form handed to Krylov solvers.
pub struct ShiftedNegation<'a, Op: LinearOperator> {
    pub op: &'a Op,
    pub shift: f64,
}

impl<Op: LinearOperator> LinearOperator for ShiftedNegation<'_, Op> {
    fn len(&self) -> usize {
        self.op.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.op.apply(x, y);
        for (yk, xk) in y.iter_mut().zip(x) {
            *yk = self.shift * xk - *yk;
        }
    }
}
