//! Physical-coordinate box: a long axis with fixed end rows and, in two
//! dimensions, one periodic transverse period.

use crate::discretize::{CyclicTridiagonal, LinearOperator, Tridiagonal};
use crate::media::{Medium, ReactionTable};

pub(crate) struct Strip {
    pub n_long: usize,
    pub n_t: usize,
    pub h_long: f64,
    pub h_t: f64,
    face_long: Vec<f64>,
    face_t: Vec<f64>,
    cross: Option<Vec<f64>>,
    pub reaction: ReactionTable,
    pub kappa_long: f64,
    pub kappa_t: f64,
}

impl Strip {
    /// Samples `m` (already at physical scale) at `x_axis = origin + i h_long`
    /// and, when `m` is two-dimensional, `x_other = j h_t` with `n_t h_t`
    /// equal to the transverse period.
    pub fn new(m: &Medium, axis: usize, n_long: usize, h_long: f64, origin: f64, n_t: usize) -> Self {
        let dim = m.dim();
        let other = 1 - axis.min(1);
        let h_t = if dim == 2 {
            m.cell().periods()[other] / n_t as f64
        } else {
            1.0
        };
        let n_t = if dim == 2 { n_t } else { 1 };
        let point = |i: usize, j: usize| {
            let mut x = [0.0; 2];
            x[axis] = origin + i as f64 * h_long;
            if dim == 2 {
                x[other] = j as f64 * h_t;
            }
            x
        };
        let len = n_long * n_t;
        let nodal: Vec<_> = (0..len).map(|k| m.diffusion(&point(k / n_t, k % n_t))).collect();
        let along = |a: &crate::media::Sym2| if axis == 0 { a.xx } else { a.yy };
        let across = |a: &crate::media::Sym2| if axis == 0 { a.yy } else { a.xx };
        let harmonic = |a: f64, b: f64| 2.0 * a * b / (a + b);
        let face_long = (0..len)
            .map(|k| {
                if k + n_t < len {
                    harmonic(along(&nodal[k]), along(&nodal[k + n_t]))
                } else {
                    0.0
                }
            })
            .collect();
        let face_t = (0..len)
            .map(|k| {
                let kn = k - k % n_t + (k % n_t + 1) % n_t;
                if dim == 2 {
                    harmonic(across(&nodal[k]), across(&nodal[kn]))
                } else {
                    0.0
                }
            })
            .collect();
        let cross = (dim == 2 && nodal.iter().any(|a| a.xy != 0.0))
            .then(|| nodal.iter().map(|a| a.xy).collect());
        let kappa_long = nodal.iter().map(along).fold(0.0, f64::max);
        let kappa_t = if dim == 2 {
            nodal.iter().map(across).fold(0.0, f64::max)
        } else {
            0.0
        };
        let reaction = m.reaction_table((0..len).map(|k| point(k / n_t, k % n_t)));
        Self {
            n_long,
            n_t,
            h_long,
            h_t,
            face_long,
            face_t,
            cross,
            reaction,
            kappa_long,
            kappa_t,
        }
    }

    pub fn len(&self) -> usize {
        self.n_long * self.n_t
    }

    /// `∇·(A∇u)` on the interior rows; the end rows of `out` are zero.
    pub fn apply_diffusion(&self, u: &[f64], out: &mut [f64]) {
        let (nt, len) = (self.n_t, self.len());
        let il = 1.0 / (self.h_long * self.h_long);
        let it = 1.0 / (self.h_t * self.h_t);
        out[..nt].iter_mut().for_each(|v| *v = 0.0);
        out[len - nt..].iter_mut().for_each(|v| *v = 0.0);
        let fl = &self.face_long;
        let ft = &self.face_t;
        for i in 1..self.n_long - 1 {
            for j in 0..nt {
                let k = i * nt + j;
                let mut s = il * (fl[k] * (u[k + nt] - u[k]) - fl[k - nt] * (u[k] - u[k - nt]));
                if nt > 1 {
                    let row = i * nt;
                    let (jp, jm) = (row + (j + 1) % nt, row + (j + nt - 1) % nt);
                    s += it * (ft[k] * (u[jp] - u[k]) - ft[jm] * (u[k] - u[jm]));
                    if let Some(c) = &self.cross {
                        let dt = |r: usize| {
                            let row = r - r % nt;
                            let jj = r % nt;
                            u[row + (jj + 1) % nt] - u[row + (jj + nt - 1) % nt]
                        };
                        let a = c[k + nt] * dt(k + nt) - c[k - nt] * dt(k - nt);
                        let b = c[jp] * (u[jp + nt] - u[jp - nt]) - c[jm] * (u[jm + nt] - u[jm - nt]);
                        s += (a + b) / (4.0 * self.h_long * self.h_t);
                    }
                }
                out[k] = s;
            }
        }
    }

    /// Transverse average of every long row.
    pub fn row_means(&self, u: &[f64]) -> Vec<f64> {
        u.chunks(self.n_t).map(|r| r.iter().sum::<f64>() / self.n_t as f64).collect()
    }
}

/// `σ u - Δt ∇·(A∇u)` on the interior rows, identity on the end rows.
pub(crate) struct ImplicitStrip<'a> {
    pub strip: &'a Strip,
    pub sigma: f64,
    pub dt: f64,
}

impl LinearOperator for ImplicitStrip<'_> {
    fn len(&self) -> usize {
        self.strip.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let nt = self.strip.n_t;
        let len = self.len();
        let mut masked = x.to_vec();
        masked[..nt].iter_mut().for_each(|v| *v = 0.0);
        masked[len - nt..].iter_mut().for_each(|v| *v = 0.0);
        self.strip.apply_diffusion(&masked, y);
        for k in 0..len {
            y[k] = if k < nt || k >= len - nt {
                x[k]
            } else {
                self.sigma * x[k] - self.dt * y[k]
            };
        }
    }
}

/// Constant-coefficient factorization approximating [`ImplicitStrip`].
pub(crate) struct StripPreconditioner {
    long: Tridiagonal,
    trans: Option<CyclicTridiagonal>,
    n_t: usize,
    sigma: f64,
}

impl StripPreconditioner {
    pub fn new(strip: &Strip, sigma: f64, dt: f64) -> Self {
        let rows = strip.n_long - 2;
        let r = dt / sigma * strip.kappa_long / (strip.h_long * strip.h_long);
        let long = Tridiagonal::factor(&vec![-r; rows], &vec![1.0 + 2.0 * r; rows], &vec![-r; rows]);
        let trans = (strip.n_t > 1).then(|| {
            let n = strip.n_t;
            let r = dt / sigma * strip.kappa_t / (strip.h_t * strip.h_t);
            CyclicTridiagonal::factor(&vec![-r; n], &vec![1.0 + 2.0 * r; n], &vec![-r; n])
        });
        Self {
            long,
            trans,
            n_t: strip.n_t,
            sigma,
        }
    }

    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        let nt = self.n_t;
        let len = r.len();
        z.copy_from_slice(r);
        let inner = &mut z[nt..len - nt];
        inner.iter_mut().for_each(|v| *v /= self.sigma);
        self.long.solve_lanes(inner, nt);
        if let Some(t) = &self.trans {
            for seg in inner.chunks_mut(nt) {
                t.solve_in_place(seg);
            }
        }
    }
}
