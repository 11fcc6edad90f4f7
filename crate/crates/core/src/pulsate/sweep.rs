use rayon::prelude::*;

use super::frame::{
    check_frame_inputs, check_stable_states, default_half_width, solve_frame, ProfileFrame, PulsateParams,
    SpeedMeasurement,
};
use crate::discretize::Grid;
use crate::error::{Error, Result};
use crate::homogenize::{average_reaction, solve_cell};
use crate::media::Medium;
use crate::terrace::{tw_speed_1d, WaveParams};

/// Speeds at or below this magnitude carry no sign.
pub const ZERO_SPEED_TOL: f64 = 2e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub angle: f64,
    pub e: Vec<f64>,
    pub result: std::result::Result<SpeedMeasurement, Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub l: f64,
    pub rows: Vec<SweepRow>,
    /// Largest speed difference between neighbouring directions (cyclically),
    /// over pairs where both solves succeeded.
    pub max_gap: f64,
    /// Sign of `∫₀¹ ⨍ f(x, u) dx du`.
    pub integral_sign: f64,
    /// Every successful speed above [`ZERO_SPEED_TOL`] has `integral_sign`.
    pub signs_agree: bool,
    /// A priori bound `2 √(A_max F_max)`.
    pub speed_bound: f64,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))
}

/// `c*(e_i)` at `n_dirs` equally spaced angles on the circle, solved on a
/// pool of `workers` threads and merged in angle order.
pub fn direction_sweep(
    m: &Medium,
    l: f64,
    n_dirs: usize,
    g: &Grid,
    p: &PulsateParams,
    workers: usize,
) -> Result<SweepTable> {
    if m.dim() != 2 {
        return Err(Error::InvalidArgument("direction sweeps need d = 2".into()));
    }
    if n_dirs < 8 {
        return Err(Error::InvalidArgument(format!("n_dirs = {n_dirs} is below 8")));
    }
    check_frame_inputs(m, &[1.0, 0.0], l, g, p)?;
    check_stable_states(m, g, l, &p.linear)?;
    let solve = |i: usize| -> SweepRow {
        let angle = 2.0 * std::f64::consts::PI * i as f64 / n_dirs as f64;
        let e = vec![angle.cos(), angle.sin()];
        let result = solve_frame(m, &e, l, g, p).map(|(s, _)| s);
        SweepRow { angle, e, result }
    };
    let rows: Vec<SweepRow> = pool(workers)?.install(|| (0..n_dirs).into_par_iter().map(solve).collect());

    let speeds: Vec<Option<f64>> = rows.iter().map(|r| r.result.as_ref().ok().map(|s| s.c_star)).collect();
    let max_gap = (0..n_dirs)
        .filter_map(|i| match (speeds[i], speeds[(i + 1) % n_dirs]) {
            (Some(a), Some(b)) => Some((a - b).abs()),
            _ => None,
        })
        .fold(0.0, f64::max);
    let integral_sign = average_reaction(m).f1().signum();
    let signs_agree = speeds
        .iter()
        .flatten()
        .all(|c| c.abs() <= ZERO_SPEED_TOL || c.signum() == integral_sign);
    Ok(SweepTable {
        l,
        rows,
        max_gap,
        integral_sign,
        signs_agree,
        speed_bound: 2.0 * (m.diffusion_max(64) * m.growth_bound(64)).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderEntry {
    pub c_star: f64,
    pub speed_gap: f64,
    /// Discrete `H¹` distance to the shifted homogenized profile.
    pub h1_gap: f64,
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderRow {
    pub l: f64,
    pub result: std::result::Result<LadderEntry, Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderTable {
    pub c0: f64,
    pub a0: f64,
    pub half_width: f64,
    pub phi0: Vec<f64>,
    pub rows: Vec<LadderRow>,
}

/// `c*_l` and the profile gap to the homogenized wave along decreasing
/// scales, all on one `ξ` grid.
pub fn epsilon_ladder(
    m: &Medium,
    e: &[f64],
    ls: &[f64],
    g: &Grid,
    p: &PulsateParams,
    workers: usize,
) -> Result<LadderTable> {
    check_frame_inputs(m, e, 1.0, g, p)?;
    if ls.is_empty() || ls.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(Error::InvalidArgument("scales must be positive".into()));
    }
    let w = match p.half_width {
        Some(w) => w,
        None => default_half_width(m, g, e, &p.linear)?,
    };
    let a0 = solve_cell(m, g, e, &p.linear)?.a0;
    let wave = tw_speed_1d(
        a0,
        &average_reaction(m),
        &WaveParams {
            n_xi: p.n_xi,
            half_width: Some(w),
            ..WaveParams::default()
        },
    )?;
    if wave.c0.abs() <= ZERO_SPEED_TOL {
        return Err(Error::Precondition(format!(
            "homogenized speed {:.3e} is zero; the ladder needs c0 ≠ 0",
            wave.c0
        )));
    }
    let fixed = PulsateParams {
        half_width: Some(w),
        ..p.clone()
    };
    let run = |&l: &f64| -> LadderRow {
        let result = check_stable_states(m, g, l, &p.linear)
            .and_then(|_| solve_frame(m, e, l, g, &fixed))
            .map(|(s, pf)| {
                let (shift, h1_gap) = h1_distance(&pf, &wave.phi0);
                LadderEntry {
                    c_star: s.c_star,
                    speed_gap: (s.c_star - wave.c0).abs(),
                    h1_gap,
                    shift,
                }
            });
        LadderRow { l, result }
    };
    let rows = pool(workers)?.install(|| ls.par_iter().map(run).collect());
    Ok(LadderTable {
        c0: wave.c0,
        a0,
        half_width: w,
        phi0: wave.phi0,
        rows,
    })
}

/// Cubic interpolation of a profile sampled on `xi`, constant beyond the ends.
fn interpolate(xi: &[f64], v: &[f64], x: f64) -> f64 {
    let h = xi[1] - xi[0];
    let n = xi.len();
    let s = (x - xi[0]) / h;
    if s <= 0.0 {
        return v[0];
    }
    if s >= (n - 1) as f64 {
        return v[n - 1];
    }
    let i = (s.floor() as usize).clamp(1, n - 3);
    let t = s - i as f64;
    -t * (t - 1.0) * (t - 2.0) / 6.0 * v[i - 1] + (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0 * v[i]
        - (t + 1.0) * t * (t - 2.0) / 2.0 * v[i + 1]
        + (t + 1.0) * t * (t - 1.0) / 6.0 * v[i + 2]
}

/// `(s*, ‖Φ − φ₀(· + s*)‖_{H¹})` with `s*` minimizing the `L²` distance.
pub fn h1_distance(pf: &ProfileFrame, phi0: &[f64]) -> (f64, f64) {
    let xi = &pf.xi;
    let hx = pf.h_xi();
    let ny = pf.grid.len();
    let shifted = |s: f64| -> Vec<f64> { xi.iter().map(|&x| interpolate(xi, phi0, x + s)).collect() };
    let l2 = |s: f64| -> f64 {
        let p0 = shifted(s);
        (0..pf.n_xi())
            .map(|i| pf.row(i).iter().map(|v| (v - p0[i]).powi(2)).sum::<f64>() / ny as f64)
            .sum::<f64>()
            * hx
    };
    // golden-section search on a window of a few grid cells
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (-5.0 * hx, 5.0 * hx);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut f1, mut f2) = (l2(x1), l2(x2));
    while b - a > 1e-10 * hx.max(1.0) {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = l2(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = l2(x2);
        }
    }
    let s = 0.5 * (a + b);
    let p0 = shifted(s);
    let g = &pf.grid;
    let hy = g.h();
    let mut total = 0.0;
    for i in 0..pf.n_xi() {
        let row = pf.row(i);
        let mut acc = 0.0;
        for (k, v) in row.iter().enumerate() {
            let d = v - p0[i];
            acc += d * d;
            if i + 1 < pf.n_xi() {
                let dn = pf.row(i + 1)[k] - p0[i + 1];
                acc += ((dn - d) / hx).powi(2);
            }
            for (j, h) in hy.iter().enumerate() {
                acc += ((row[g.neighbor(k, j, 1)] - v) / h).powi(2);
            }
        }
        total += acc / ny as f64 * hx;
    }
    (s, total.sqrt())
}
