//! Factored tridiagonal systems, plain and periodic (cyclic).

/// LU factors of a tridiagonal matrix with rows `a_i x_{i-1} + b_i x_i + c_i x_{i+1}`.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    sub: Vec<f64>,
    sup: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl Tridiagonal {
    /// `sub[0]` and `sup[n-1]` are ignored.
    pub fn factor(sub: &[f64], diag: &[f64], sup: &[f64]) -> Self {
        let n = diag.len();
        let mut inv_pivot = vec![0.0; n];
        let mut prev_ratio = 0.0;
        for i in 0..n {
            let piv = if i == 0 {
                diag[0]
            } else {
                diag[i] - sub[i] * prev_ratio
            };
            inv_pivot[i] = 1.0 / piv;
            prev_ratio = sup[i] * inv_pivot[i];
        }
        Self {
            sub: sub.to_vec(),
            sup: sup.to_vec(),
            inv_pivot,
        }
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Overwrites `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.len();
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.sub[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.sup[i] * self.inv_pivot[i] * rhs[i + 1];
        }
    }

    /// Solves one system per lane, with `data[i * lanes + lane]` holding
    /// entry `i` of that lane.
    pub fn solve_lanes(&self, data: &mut [f64], lanes: usize) {
        let n = self.len();
        data[..lanes].iter_mut().for_each(|v| *v *= self.inv_pivot[0]);
        for i in 1..n {
            let (done, rest) = data.split_at_mut(i * lanes);
            let prev = &done[(i - 1) * lanes..];
            let (s, p) = (self.sub[i], self.inv_pivot[i]);
            for (v, w) in rest[..lanes].iter_mut().zip(prev) {
                *v = (*v - s * w) * p;
            }
        }
        for i in (0..n - 1).rev() {
            let (head, next) = data.split_at_mut((i + 1) * lanes);
            let f = self.sup[i] * self.inv_pivot[i];
            for (v, w) in head[i * lanes..].iter_mut().zip(&next[..lanes]) {
                *v -= f * w;
            }
        }
    }

    /// Same as [`solve_in_place`](Self::solve_in_place) on a strided view.
    pub fn solve_strided(&self, data: &mut [f64], offset: usize, stride: usize) {
        let n = self.len();
        let at = |i: usize| offset + i * stride;
        data[at(0)] *= self.inv_pivot[0];
        for i in 1..n {
            data[at(i)] = (data[at(i)] - self.sub[i] * data[at(i - 1)]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            data[at(i)] -= self.sup[i] * self.inv_pivot[i] * data[at(i + 1)];
        }
    }
}

/// Periodic tridiagonal system: row 0 also couples to `x_{n-1}` through
/// `sub[0]`, row `n-1` to `x_0` through `sup[n-1]`. Solved by Sherman–Morrison.
#[derive(Debug, Clone)]
pub struct CyclicTridiagonal {
    inner: Tridiagonal,
    z: Vec<f64>,
    corner_top: f64,
    gamma: f64,
}

impl CyclicTridiagonal {
    pub fn factor(sub: &[f64], diag: &[f64], sup: &[f64]) -> Self {
        let n = diag.len();
        let (alpha, beta) = (sup[n - 1], sub[0]);
        let gamma = -diag[0];
        let mut d = diag.to_vec();
        d[0] -= gamma;
        d[n - 1] -= alpha * beta / gamma;
        let inner = Tridiagonal::factor(sub, &d, sup);
        let mut z = vec![0.0; n];
        z[0] = gamma;
        z[n - 1] = alpha;
        inner.solve_in_place(&mut z);
        Self {
            inner,
            z,
            corner_top: beta,
            gamma,
        }
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Lane-interleaved counterpart of [`solve_in_place`](Self::solve_in_place).
    pub fn solve_lanes(&self, data: &mut [f64], lanes: usize) {
        let n = self.len();
        self.inner.solve_lanes(data, lanes);
        let den = 1.0 + self.z[0] + self.corner_top * self.z[n - 1] / self.gamma;
        for lane in 0..lanes {
            let fact = (data[lane] + self.corner_top * data[(n - 1) * lanes + lane] / self.gamma) / den;
            for (i, z) in self.z.iter().enumerate() {
                data[i * lanes + lane] -= fact * z;
            }
        }
    }

    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        self.inner.solve_in_place(rhs);
        let fact = (rhs[0] + self.corner_top * rhs[n - 1] / self.gamma)
            / (1.0 + self.z[0] + self.corner_top * self.z[n - 1] / self.gamma);
        for (r, z) in rhs.iter_mut().zip(&self.z) {
            *r -= fact * z;
        }
    }
}
