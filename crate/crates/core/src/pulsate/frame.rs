use crate::discretize::{
    check_direction, CyclicTridiagonal, DivOperator, Grid, LinearOperator, SolverOptions, Tridiagonal,
};
use crate::error::{Error, Result};
use crate::homogenize::{average_reaction, solve_cell};
use crate::media::{Medium, ReactionTable};
use crate::spectral::{stability_eigen, State};
use crate::terrace::{level_crossing, tw_speed_1d, WaveParams};

/// Lower and upper admissible profile values.
pub const PROFILE_RANGE: (f64, f64) = (-0.05, 1.05);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialProfile {
    /// Heaviside jump at `ξ = 0`.
    Step,
    /// `(1 - tanh(ξ / 2√(eAe))) / 2`.
    Smoothed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulsateParams {
    pub n_xi: usize,
    /// Half-width `W` of the `ξ` window; derived from the homogenized wave when unset.
    pub half_width: Option<f64>,
    /// Pseudo-time step; `min(1, 1/max|∂_u f|)` when unset.
    pub dtau: Option<f64>,
    pub kappa: f64,
    pub tol: f64,
    pub window: usize,
    pub max_steps: usize,
    pub initial: InitialProfile,
    pub initial_speed: f64,
    /// Speed band for the stationary verdict.
    pub stationary_band: f64,
    pub linear: SolverOptions,
}

impl Default for PulsateParams {
    fn default() -> Self {
        Self {
            n_xi: 512,
            half_width: None,
            dtau: None,
            kappa: 0.5,
            tol: 1e-8,
            window: 100,
            max_steps: 20_000,
            initial: InitialProfile::Smoothed,
            initial_speed: 0.0,
            stationary_band: 2e-3,
            linear: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    PinnedFrame,
    DirectTracking,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeedStatus {
    Converged,
    /// The speed estimate stayed inside the stationary band without settling;
    /// reported as `c* = 0`.
    Stationary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingFit {
    pub t_start: f64,
    pub t_end: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedMeasurement {
    pub c_star: f64,
    pub method: Method,
    pub status: SpeedStatus,
    /// Last raw controller value (pinned) or fitted slope (direct).
    pub raw_speed: f64,
    pub steps: usize,
    pub residual: f64,
    pub fit: Option<TrackingFit>,
}

/// Profile `Φ(ξ, y)` on `[-W, W] × T`, stored row by row in `ξ` with the
/// cell grid contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileFrame {
    pub e: Vec<f64>,
    pub l: f64,
    pub xi: Vec<f64>,
    pub grid: Grid,
    pub phi: Vec<f64>,
    pub c: f64,
    pub residual: f64,
    pub status: SpeedStatus,
}

impl ProfileFrame {
    pub fn n_xi(&self) -> usize {
        self.xi.len()
    }

    pub fn h_xi(&self) -> f64 {
        self.xi[1] - self.xi[0]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let ny = self.grid.len();
        &self.phi[i * ny..(i + 1) * ny]
    }

    /// Cell average of `Φ(ξ_i, ·)` for every `i`.
    pub fn averaged(&self) -> Vec<f64> {
        (0..self.n_xi()).map(|i| self.grid.mean(self.row(i))).collect()
    }

    pub fn half_width(&self) -> f64 {
        *self.xi.last().unwrap()
    }

    /// Largest `Φ(ξ_{i+1}, y) - Φ(ξ_i, y)`.
    pub fn max_forward_increment(&self) -> f64 {
        (0..self.n_xi() - 1)
            .flat_map(|i| self.row(i + 1).iter().zip(self.row(i)).map(|(a, b)| a - b))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// The spatial part of the wave-coordinate equation,
/// `∂̃·(A ∂̃Φ) + c ∂_ξΦ + f(y, Φ)` with `∂̃ = e∂_ξ + ∇_y / l`.
///
/// The diagonal entries of `A` enter through the face coefficients of the
/// cell operator, so that the `l → 0` limit of the discrete operator has the
/// same effective coefficient as the discrete cell problem.
pub(crate) struct FrameOperator {
    grid: Grid,
    lap: DivOperator,
    /// Coefficient of `∂_ξξ`.
    eae: Vec<f64>,
    /// `e_j` times the face coefficients along axis `j`.
    face_e: Vec<Vec<f64>>,
    /// `a12 e_{1-j}` at the nodes, when `A` has an off-diagonal entry.
    off: Option<Vec<Vec<f64>>>,
    plus: Vec<Vec<usize>>,
    minus: Vec<Vec<usize>>,
    reaction: ReactionTable,
    inv_l: f64,
    h_xi: f64,
    n_xi: usize,
}

impl FrameOperator {
    pub(crate) fn new(m: &Medium, g: &Grid, e: &[f64], l: f64, h_xi: f64, n_xi: usize) -> Self {
        let dim = g.dim();
        let lap = DivOperator::diffusion(m, g);
        let plus: Vec<Vec<usize>> = (0..dim)
            .map(|j| (0..g.len()).map(|k| g.neighbor(k, j, 1)).collect())
            .collect();
        let minus: Vec<Vec<usize>> = (0..dim)
            .map(|j| (0..g.len()).map(|k| g.neighbor(k, j, -1)).collect())
            .collect();
        let cross = lap.cross().map(|c| c.to_vec());
        let eae = (0..g.len())
            .map(|k| {
                let diag: f64 = (0..dim)
                    .map(|j| {
                        let f = lap.faces(j);
                        e[j] * e[j] * 0.5 * (f[k] + f[minus[j][k]])
                    })
                    .sum();
                diag + cross.as_ref().map_or(0.0, |c| 2.0 * e[0] * e[1] * c[k])
            })
            .collect();
        let face_e = (0..dim).map(|j| lap.faces(j).iter().map(|f| e[j] * f).collect()).collect();
        let off = cross.map(|c| {
            (0..dim)
                .map(|j| c.iter().map(|v| v * e[1 - j]).collect())
                .collect()
        });
        Self {
            grid: g.clone(),
            lap,
            eae,
            face_e,
            off,
            plus,
            minus,
            reaction: m.reaction_table(g.points()),
            inv_l: 1.0 / l,
            h_xi,
            n_xi,
        }
    }

    pub(crate) fn mean_eae(&self) -> f64 {
        self.grid.mean(&self.eae)
    }

    /// Writes the spatial operator at every interior row `1..n_xi-1` of
    /// `phi` into the matching rows of `out`.
    pub(crate) fn residual(&self, phi: &[f64], c: f64, out: &mut [f64], scratch: &mut [Vec<f64>; 2]) {
        let ny = self.grid.len();
        let h = self.grid.h();
        let inv_h2 = 1.0 / (self.h_xi * self.h_xi);
        let inv_2h = 0.5 / self.h_xi;
        let inv_l2 = self.inv_l * self.inv_l;
        let [lap, grad] = scratch;
        for i in 1..self.n_xi - 1 {
            let prev = &phi[(i - 1) * ny..i * ny];
            let cur = &phi[i * ny..(i + 1) * ny];
            let next = &phi[(i + 1) * ny..(i + 2) * ny];
            self.lap.apply(cur, lap);
            for k in 0..ny {
                grad[k] = (next[k] - prev[k]) * inv_2h;
            }
            let row = &mut out[i * ny..(i + 1) * ny];
            for k in 0..ny {
                let mut cross = 0.0;
                for (j, fe) in self.face_e.iter().enumerate() {
                    let (kp, km) = (self.plus[j][k], self.minus[j][k]);
                    cross += (fe[k] * grad[kp] - fe[km] * grad[km]) / h[j];
                    if let Some(off) = &self.off {
                        let b = &off[j];
                        cross += (b[k] * (grad[kp] - grad[km]) + b[kp] * grad[kp] - b[km] * grad[km])
                            / (2.0 * h[j]);
                    }
                }
                row[k] = self.eae[k] * (next[k] - 2.0 * cur[k] + prev[k]) * inv_h2
                    + inv_l2 * lap[k]
                    + self.inv_l * cross
                    + c * grad[k]
                    + self.reaction.eval(k, cur[k]);
            }
        }
    }
}

/// Alternating-direction factors `(I - Δτ κ_ξ D_ξξ) Π_j (I - Δτ κ_j D_jj)`
/// with constant coefficients dominating the frame operator.
pub(crate) struct AdiPreconditioner {
    xi: Tridiagonal,
    y: Vec<CyclicTridiagonal>,
    n: Vec<usize>,
    ny: usize,
}

impl AdiPreconditioner {
    pub(crate) fn new(kappa_xi: f64, kappa_y: &[f64], h_xi: f64, rows: usize, g: &Grid, dtau: f64) -> Self {
        let xi = constant_tridiagonal(dtau * kappa_xi / (h_xi * h_xi), rows);
        let y = kappa_y
            .iter()
            .zip(g.n().iter().zip(g.h()))
            .map(|(k, (&n, h))| {
                let r = dtau * k / (h * h);
                CyclicTridiagonal::factor(&vec![-r; n], &vec![1.0 + 2.0 * r; n], &vec![-r; n])
            })
            .collect();
        Self {
            xi,
            y,
            n: g.n().to_vec(),
            ny: g.len(),
        }
    }

    /// In place on the interior block of `rows × ny` values.
    pub(crate) fn solve(&self, data: &mut [f64]) {
        self.xi.solve_lanes(data, self.ny);
        let n0 = self.n[0];
        for seg in data.chunks_mut(n0) {
            self.y[0].solve_in_place(seg);
        }
        if self.y.len() == 2 {
            for row in data.chunks_mut(self.ny) {
                self.y[1].solve_lanes(row, n0);
            }
        }
    }
}

fn constant_tridiagonal(r: f64, n: usize) -> Tridiagonal {
    Tridiagonal::factor(&vec![-r; n], &vec![1.0 + 2.0 * r; n], &vec![-r; n])
}

/// Coefficients `(κ_ξ, κ_y)` of the dominating constant-coefficient operator.
pub(crate) fn dominating_coefficients(m: &Medium, g: &Grid, e: &[f64], l: f64) -> (f64, Vec<f64>) {
    let nodal: Vec<_> = g.points().map(|x| m.diffusion(&x)).collect();
    let kxi = nodal.iter().map(|a| a.quad(e, e)).fold(0.0, f64::max);
    let ky = (0..g.dim())
        .map(|j| {
            nodal
                .iter()
                .map(|a| if j == 0 { a.xx } else { a.yy } + a.xy.abs())
                .fold(0.0, f64::max)
                / (l * l)
        })
        .collect();
    (kxi, ky)
}

/// `W = 30 √A0(e) · max(1/|μ̲|, 1/μ̄)` from the decay rates of the
/// homogenized wave.
pub fn default_half_width(m: &Medium, g: &Grid, e: &[f64], opts: &SolverOptions) -> Result<f64> {
    let a0 = solve_cell(m, g, e, opts)?.a0;
    let ar = average_reaction(m);
    let (g0, g1) = (-ar.slope_at_zero(), -ar.slope_at_one());
    if !(g0 > 0.0 && g1 > 0.0) {
        return Err(Error::Precondition(
            "the averaged nonlinearity is not bistable at 0 and 1".into(),
        ));
    }
    let c = tw_speed_1d(
        1.0,
        &ar,
        &WaveParams {
            n_xi: 257,
            ..WaveParams::default()
        },
    )
    .map(|w| w.c0)
    .unwrap_or(0.0);
    let ahead = (c + (c * c + 4.0 * g0).sqrt()) / 2.0;
    let behind = (-c + (c * c + 4.0 * g1).sqrt()) / 2.0;
    Ok(30.0 * a0.sqrt() * f64::max(1.0 / ahead, 1.0 / behind))
}

pub(crate) fn check_frame_inputs(m: &Medium, e: &[f64], l: f64, g: &Grid, p: &PulsateParams) -> Result<()> {
    check_direction(e, m.dim())?;
    if g.cell() != m.cell() {
        return Err(Error::CellMismatch {
            grid: g.cell().periods().to_vec(),
            medium: m.cell().periods().to_vec(),
        });
    }
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidArgument(format!("period scale l = {l} must be positive")));
    }
    if p.n_xi < 16 || !(p.kappa > 0.0 && p.kappa <= 1.0) || !(p.tol > 0.0) || p.window == 0 {
        return Err(Error::InvalidArgument("pulsating solver parameters out of range".into()));
    }
    if let Some(w) = p.half_width {
        if !(w > 0.0) {
            return Err(Error::InvalidArgument(format!("half width {w} must be positive")));
        }
    }
    if let Some(dt) = p.dtau {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("time step {dt} must be positive")));
        }
    }
    Ok(())
}

/// Errors unless both states are linearly stable for the medium at scale `l`.
pub fn check_stable_states(m: &Medium, g: &Grid, l: f64, opts: &SolverOptions) -> Result<(f64, f64)> {
    let (ms, gs) = (m.scaled(l), g.scaled(l));
    let minus = stability_eigen(&ms, &gs, State::Zero, opts)?.lambda;
    let plus = stability_eigen(&ms, &gs, State::One, opts)?.lambda;
    if minus <= 0.0 || plus <= 0.0 {
        return Err(Error::Precondition(format!(
            "states are not linearly stable (λ⁻ = {minus:.6e}, λ⁺ = {plus:.6e})"
        )));
    }
    Ok((minus, plus))
}

/// Pulsating wave in direction `e` for the medium at scale `l`, by pinned
/// evolution in wave coordinates.
pub fn pulsating_speed(
    m: &Medium,
    e: &[f64],
    l: f64,
    g: &Grid,
    p: &PulsateParams,
) -> Result<(SpeedMeasurement, ProfileFrame)> {
    check_frame_inputs(m, e, l, g, p)?;
    check_stable_states(m, g, l, &p.linear)?;
    solve_frame(m, e, l, g, p)
}

/// [`pulsating_speed`] without the stability precondition.
pub(crate) fn solve_frame(
    m: &Medium,
    e: &[f64],
    l: f64,
    g: &Grid,
    p: &PulsateParams,
) -> Result<(SpeedMeasurement, ProfileFrame)> {
    let w = match p.half_width {
        Some(w) => w,
        None => default_half_width(m, g, e, &p.linear)?,
    };
    let n = p.n_xi;
    let ny = g.len();
    let h = 2.0 * w / (n - 1) as f64;
    let xi: Vec<f64> = (0..n).map(|i| -w + i as f64 * h).collect();
    let op = FrameOperator::new(m, g, e, l, h, n);
    let dtau = p.dtau.unwrap_or_else(|| {
        let fmax = m.max_abs_reaction_du(32, PROFILE_RANGE.0, PROFILE_RANGE.1);
        if fmax > 0.0 {
            f64::min(1.0, 1.0 / fmax)
        } else {
            1.0
        }
    });
    let (kxi, ky) = dominating_coefficients(m, g, e, l);
    let adi = AdiPreconditioner::new(kxi, &ky, h, n - 2, g, dtau);

    let width = 2.0 * op.mean_eae().sqrt();
    let mut phi = vec![0.0; n * ny];
    for (i, &x) in xi.iter().enumerate() {
        let v = match p.initial {
            InitialProfile::Step if x < 0.0 => 1.0,
            InitialProfile::Step if x > 0.0 => 0.0,
            InitialProfile::Step => 0.5,
            InitialProfile::Smoothed => 0.5 * (1.0 - (x / width).tanh()),
        };
        phi[i * ny..(i + 1) * ny].iter_mut().for_each(|u| *u = v);
    }
    phi[..ny].iter_mut().for_each(|u| *u = 1.0);
    phi[(n - 1) * ny..].iter_mut().for_each(|u| *u = 0.0);

    let averaged = |phi: &[f64]| -> Vec<f64> { phi.chunks(ny).map(|r| g.mean(r)).collect() };
    let mut front = level_crossing(&xi, &averaged(&phi), 0.5).ok_or(Error::FrontEscaped { position: 0.0 })?;
    let mut c = p.initial_speed;
    let mut speeds = Vec::new();
    let mut r = vec![0.0; n * ny];
    let mut scratch = [vec![0.0; ny], vec![0.0; ny]];
    let mut residual = f64::INFINITY;
    let interior = ny..(n - 1) * ny;
    for step in 1..=p.max_steps {
        op.residual(&phi, c, &mut r, &mut scratch);
        let upd = &mut r[interior.clone()];
        upd.iter_mut().for_each(|v| *v *= dtau);
        adi.solve(upd);
        residual = 0.0;
        for (u, d) in phi[interior.clone()].iter_mut().zip(upd.iter()) {
            *u += d;
            residual = f64::max(residual, d.abs());
            if !(*u >= PROFILE_RANGE.0 && *u <= PROFILE_RANGE.1) {
                return Err(Error::ProfileOutOfRange { value: *u });
            }
        }
        residual /= dtau;
        let new_front = level_crossing(&xi, &averaged(&phi), 0.5).ok_or(Error::FrontEscaped { position: front })?;
        if new_front.abs() > 0.75 * w {
            return Err(Error::FrontEscaped { position: new_front });
        }
        c += (new_front - front + p.kappa * new_front) / dtau;
        front = new_front;
        speeds.push(c);
        let settled = speeds.len() >= p.window && {
            let tail = &speeds[speeds.len() - p.window..];
            (tail[p.window - 1] - tail[0]).abs() <= p.tol
        };
        if residual <= p.tol && settled {
            return Ok(finish(e, l, xi, g, phi, c, residual, step, SpeedStatus::Converged));
        }
    }
    let tail = &speeds[speeds.len() - (speeds.len() / 5).max(1)..];
    if tail.iter().all(|v| v.abs() <= p.stationary_band) {
        return Ok(finish(e, l, xi, g, phi, c, residual, p.max_steps, SpeedStatus::Stationary));
    }
    Err(Error::NoConvergence {
        solver: "pinned frame",
        iterations: p.max_steps,
        residual,
    })
}

#[allow(clippy::too_many_arguments)]
fn finish(
    e: &[f64],
    l: f64,
    xi: Vec<f64>,
    g: &Grid,
    phi: Vec<f64>,
    c: f64,
    residual: f64,
    steps: usize,
    status: SpeedStatus,
) -> (SpeedMeasurement, ProfileFrame) {
    let c_star = match status {
        SpeedStatus::Converged => c,
        SpeedStatus::Stationary => 0.0,
    };
    (
        SpeedMeasurement {
            c_star,
            method: Method::PinnedFrame,
            status,
            raw_speed: c,
            steps,
            residual,
            fit: None,
        },
        ProfileFrame {
            e: e.to_vec(),
            l,
            xi,
            grid: g.clone(),
            phi,
            c,
            residual,
            status,
        },
    )
}
