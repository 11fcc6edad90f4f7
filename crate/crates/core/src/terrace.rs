//! The averaged one-dimensional equation `v_t = A₀ v_zz + f̄(v)`: sign
//! conditions, traveling waves by front pinning, and terrace decomposition.

use crate::discretize::Tridiagonal;
use crate::error::{Error, Result};
use crate::homogenize::AveragedReaction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// `F(1) < 0` and `f̄ < 0` wherever `F > F(1)`: a wave with negative speed.
    A,
    /// `F(1) > 0` and `f̄ > 0` wherever `F > 0`: a wave with positive speed.
    B,
    Neither,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub f1: f64,
    pub condition: Condition,
    /// First grid value of `u` violating the sign requirement, for `Neither`.
    pub violation: Option<f64>,
    pub detail: String,
}

/// `|F(1)|` below this is treated as a balanced nonlinearity.
pub const BALANCE_TOL: f64 = 1e-12;

pub fn classify_conditions(ar: &AveragedReaction) -> ConditionReport {
    let f1 = ar.f1();
    let n = ar.u.len();
    if f1.abs() <= BALANCE_TOL {
        return ConditionReport {
            f1,
            condition: Condition::Neither,
            violation: None,
            detail: format!("F(1) = {f1:.3e} is balanced"),
        };
    }
    // a small slack keeps the level-set membership away from rounding noise
    let slack = 1e-14;
    let (level, sign, cond) = if f1 < 0.0 {
        (f1, -1.0, Condition::A)
    } else {
        (0.0, 1.0, Condition::B)
    };
    let violation = (1..n - 1)
        .find(|&i| ar.big_f[i] > level + slack && sign * ar.fbar[i] <= 0.0)
        .map(|i| ar.u[i]);
    match violation {
        None => ConditionReport {
            f1,
            condition: cond,
            violation: None,
            detail: format!("F(1) = {f1:.6e}"),
        },
        Some(u) => ConditionReport {
            f1,
            condition: Condition::Neither,
            violation: Some(u),
            detail: format!(
                "F(1) = {f1:.6e} but f̄({u:.6}) = {:.3e} has the wrong sign on the level set",
                ar.eval(u)
            ),
        },
    }
}

/// Homogenized traveling wave.
#[derive(Debug, Clone, PartialEq)]
pub struct Wave1D {
    pub c0: f64,
    pub xi: Vec<f64>,
    pub phi0: Vec<f64>,
    /// Final `‖∂_τ φ‖_∞`.
    pub residual: f64,
    pub steps: usize,
    /// Set when `f̄'(0) < 0` or `f̄'(1) < 0` fails.
    pub unstable_ends: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveParams {
    /// Grid points on `[−W, W]`, boundaries included.
    pub n_xi: usize,
    /// Defaults to `40 √A₀ / √|f̄'(0)|`.
    pub half_width: Option<f64>,
    /// Defaults to `0.25 h² / A₀`.
    pub dtau: Option<f64>,
    pub kappa: f64,
    pub tol: f64,
    /// Steps over which the speed must settle.
    pub window: usize,
    pub max_steps: usize,
    /// Position of the initial step.
    pub shift: f64,
}

impl Default for WaveParams {
    fn default() -> Self {
        Self {
            n_xi: 2048,
            half_width: None,
            dtau: None,
            kappa: 0.5,
            tol: 1e-8,
            window: 100,
            max_steps: 3_000_000,
            shift: 0.0,
        }
    }
}

/// Position of the first downward crossing of `level`, linearly interpolated.
pub fn level_crossing(xi: &[f64], phi: &[f64], level: f64) -> Option<f64> {
    phi.windows(2).enumerate().find_map(|(i, w)| {
        if w[0] >= level && w[1] < level {
            let t = (w[0] - level) / (w[0] - w[1]);
            Some(xi[i] + t * (xi[i + 1] - xi[i]))
        } else {
            None
        }
    })
}

fn default_half_width(a0: f64, ar: &AveragedReaction) -> f64 {
    let s = ar.slope_at_zero();
    // a degenerate zero slope still needs a finite window
    let rate = if s < 0.0 { s.abs().max(1e-3) } else { 1e-2 };
    (40.0 * a0.sqrt() / rate.sqrt()).min(2000.0)
}

/// Traveling wave of `A₀ v'' + c v' + f̄(v) = 0` by evolving the profile in
/// a frame whose speed is adjusted so the 1/2-level stays at `ξ = 0`.
///
/// The speed update `c ← c + (Δξ½ + κ ξ½)/Δτ` combines the observed drift of
/// the level set with a proportional pull, so the front offset contracts by
/// `1 − κ` per step.
pub fn tw_speed_1d(a0: f64, ar: &AveragedReaction, p: &WaveParams) -> Result<Wave1D> {
    if !(a0 > 0.0) {
        return Err(Error::InvalidArgument(format!("A0 = {a0} must be positive")));
    }
    if p.n_xi < 16 || !(p.kappa > 0.0 && p.kappa <= 1.0) || !(p.tol > 0.0) {
        return Err(Error::InvalidArgument("wave solver parameters out of range".into()));
    }
    let unstable_ends = !(ar.slope_at_zero() < 0.0 && ar.slope_at_one() < 0.0);
    let w = p.half_width.unwrap_or_else(|| default_half_width(a0, ar));
    let n = p.n_xi;
    let h = 2.0 * w / (n - 1) as f64;
    let dt = p.dtau.unwrap_or(0.25 * h * h / a0);
    let xi: Vec<f64> = (0..n).map(|i| -w + i as f64 * h).collect();

    // implicit diffusion on interior nodes
    let m = n - 2;
    let r = a0 * dt / (h * h);
    let sys = Tridiagonal::factor(&vec![-r; m], &vec![1.0 + 2.0 * r; m], &vec![-r; m]);

    let mut phi: Vec<f64> = xi
        .iter()
        .map(|&x| 0.5 * (1.0 - ((x - p.shift) / (2.0 * a0.sqrt())).tanh()))
        .collect();
    phi[0] = 1.0;
    phi[n - 1] = 0.0;
    let mut front = level_crossing(&xi, &phi, 0.5).ok_or(Error::FrontEscaped { position: p.shift })?;
    let mut c = 0.0;
    let mut history = std::collections::VecDeque::with_capacity(p.window + 1);
    let mut rhs = vec![0.0; m];
    let mut residual = f64::INFINITY;
    for step in 1..=p.max_steps {
        for i in 1..n - 1 {
            let adv = c * (phi[i + 1] - phi[i - 1]) / (2.0 * h);
            rhs[i - 1] = phi[i] + dt * (adv + ar.eval(phi[i]));
        }
        rhs[0] += r * phi[0];
        rhs[m - 1] += r * phi[n - 1];
        sys.solve_in_place(&mut rhs);
        residual = 0.0;
        for i in 1..n - 1 {
            residual = f64::max(residual, (rhs[i - 1] - phi[i]).abs() / dt);
            phi[i] = rhs[i - 1];
        }
        if let Some(bad) = phi.iter().find(|v| !v.is_finite()) {
            return Err(Error::ProfileOutOfRange { value: *bad });
        }
        let new_front = level_crossing(&xi, &phi, 0.5).ok_or(Error::FrontEscaped { position: front })?;
        if new_front.abs() > 0.75 * w {
            return Err(Error::FrontEscaped { position: new_front });
        }
        c += (new_front - front + p.kappa * new_front) / dt;
        front = new_front;
        history.push_back(c);
        if history.len() > p.window {
            history.pop_front();
        }
        let settled = history.len() == p.window
            && (history.back().unwrap() - history.front().unwrap()).abs() <= p.tol;
        if residual <= p.tol && settled {
            return Ok(Wave1D {
                c0: c,
                xi,
                phi0: phi,
                residual,
                steps: step,
                unstable_ends,
            });
        }
    }
    Err(Error::NoConvergence {
        solver: "front pinning",
        iterations: p.max_steps,
        residual,
    })
}

/// Evolution of the averaged equation in a fixed frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation1D {
    pub z: Vec<f64>,
    pub u: Vec<f64>,
    /// `(t, position of the 1/2 level)` samples.
    pub fronts: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationParams {
    pub half_width: f64,
    pub h: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Front position is recorded every this many steps.
    pub record_every: usize,
}

/// Step initial data (`1` for `z < 0`) evolved with implicit diffusion,
/// explicit reaction and reflecting ends.
pub fn simulate_step_1d(a0: f64, ar: &AveragedReaction, p: &SimulationParams) -> Result<Simulation1D> {
    if !(a0 > 0.0 && p.h > 0.0 && p.dt > 0.0 && p.half_width > 10.0 * p.h) {
        return Err(Error::InvalidArgument("simulation parameters out of range".into()));
    }
    let n = (2.0 * p.half_width / p.h).round() as usize + 1;
    let h = 2.0 * p.half_width / (n - 1) as f64;
    let z: Vec<f64> = (0..n).map(|i| -p.half_width + i as f64 * h).collect();
    let mut u: Vec<f64> = z.iter().map(|&x| if x < 0.0 { 1.0 } else { 0.0 }).collect();
    let r = a0 * p.dt / (h * h);
    let mut sub = vec![-r; n];
    let mut sup = vec![-r; n];
    sup[0] = -2.0 * r;
    sub[n - 1] = -2.0 * r;
    let sys = Tridiagonal::factor(&sub, &vec![1.0 + 2.0 * r; n], &sup);
    let steps = (p.t_end / p.dt).ceil() as usize;
    let mut fronts = Vec::new();
    for step in 1..=steps {
        for v in u.iter_mut() {
            *v += p.dt * ar.eval(*v);
        }
        sys.solve_in_place(&mut u);
        if step % p.record_every.max(1) == 0 || step == steps {
            if let Some(x) = level_crossing(&z, &u, 0.5) {
                if x.abs() > p.half_width - 10.0 * h {
                    return Err(Error::FrontEscaped { position: x });
                }
                fronts.push((step as f64 * p.dt, x));
            }
        }
    }
    Ok(Simulation1D { z, u, fronts })
}

/// Least-squares line through `(t, x)` pairs: slope and `R²`.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let (mt, mx) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (t, x)| (a + t / n, b + x / n));
    let (mut stt, mut stx, mut sxx) = (0.0, 0.0, 0.0);
    for (t, x) in points {
        stt += (t - mt) * (t - mt);
        stx += (t - mt) * (x - mx);
        sxx += (x - mx) * (x - mx);
    }
    let slope = stx / stt;
    let r2 = if sxx == 0.0 { 1.0 } else { stx * stx / (stt * sxx) };
    (slope, r2)
}

/// Propagating terrace: platforms `1 = p_0 > … > p_N = 0` and the waves between them.
#[derive(Debug, Clone, PartialEq)]
pub struct TerraceDecomposition {
    pub platforms: Vec<f64>,
    pub waves: Vec<Wave1D>,
    pub speeds: Vec<f64>,
}

impl TerraceDecomposition {
    pub fn len(&self) -> usize {
        self.speeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.speeds.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TerraceParams {
    pub wave: WaveParams,
    /// Defaults to `100 / min(|f̄'(0)|, |f̄'(1)|)` capped at 20000.
    pub t_end: Option<f64>,
    pub plateau_cells: usize,
    pub plateau_band: f64,
    pub speed_tol: f64,
}

impl Default for TerraceParams {
    fn default() -> Self {
        Self {
            wave: WaveParams::default(),
            t_end: None,
            plateau_cells: 10,
            plateau_band: 1e-3,
            speed_tol: 1e-3,
        }
    }
}

fn max_abs_slope(ar: &AveragedReaction) -> f64 {
    ar.u.iter().map(|&s| ar.deriv(s).abs()).fold(0.0, f64::max)
}

/// Speed bound `2 √(A₀ max(f̄/u, −f̄/(1−u)))` for step data.
pub fn speed_bound(a0: f64, ar: &AveragedReaction) -> f64 {
    let n = ar.u.len();
    let k = (1..n - 1)
        .map(|i| {
            let (u, f) = (ar.u[i], ar.fbar[i]);
            f64::max(f / u, -f / (1.0 - u))
        })
        .fold(0.0, f64::max);
    2.0 * (a0 * k).sqrt()
}

/// Platforms seen in a step-data simulation, then one pinned wave per step
/// of the terrace.
pub fn terrace_decompose(a0: f64, ar: &AveragedReaction, p: &TerraceParams) -> Result<TerraceDecomposition> {
    let gamma = ar.slope_at_zero().abs().min(ar.slope_at_one().abs()).max(1e-3);
    let t_end = p.t_end.unwrap_or((100.0 / gamma).min(20_000.0));
    let fmax = max_abs_slope(ar).max(1e-6);
    let h = 0.2 * (a0 / fmax).sqrt();
    let dt = (0.2 / fmax).min(0.5 * h * h / a0 * 50.0);
    let half_width = speed_bound(a0, ar) * t_end + 60.0 * (a0 / gamma).sqrt();
    let sim = simulate_step_1d(
        a0,
        ar,
        &SimulationParams {
            half_width,
            h,
            dt,
            t_end,
            record_every: 100,
        },
    )?;
    let platforms = detect_platforms(&sim.u, ar, p.plateau_cells, p.plateau_band)?;
    let mut waves = Vec::new();
    let mut speeds = Vec::new();
    for pair in platforms.windows(2) {
        let (hi, lo) = (pair[0], pair[1]);
        let wave = if lo == 0.0 && hi == 1.0 {
            tw_speed_1d(a0, ar, &p.wave)?
        } else {
            tw_speed_1d(a0, &ar.restricted(lo, hi)?, &p.wave)?
        };
        speeds.push(wave.c0);
        waves.push(wave);
    }
    for (k, w) in speeds.windows(2).enumerate() {
        if w[0] > w[1] + p.speed_tol {
            return Err(Error::SpeedOrdering {
                index: k + 1,
                upper: w[0],
                lower: w[1],
            });
        }
    }
    Ok(TerraceDecomposition {
        platforms,
        waves,
        speeds,
    })
}

/// Interior zeros of `f̄` the profile dwells at for at least `cells` nodes,
/// listed from behind the front (near 1) to ahead (near 0), bracketed by 1 and 0.
fn detect_platforms(u: &[f64], ar: &AveragedReaction, cells: usize, band: f64) -> Result<Vec<f64>> {
    let interior: Vec<f64> = ar.zeros[1..ar.zeros.len() - 1].to_vec();
    for w in interior.windows(2) {
        if w[1] - w[0] < 2.0 * band {
            return Err(Error::AmbiguousPlateau(format!(
                "zeros {:.6} and {:.6} are closer than the plateau band",
                w[0], w[1]
            )));
        }
    }
    let mut found = vec![1.0];
    let mut i = 0;
    while i < u.len() {
        let near = interior.iter().copied().find(|z| (u[i] - z).abs() <= band);
        match near {
            Some(z) => {
                let start = i;
                while i < u.len() && (u[i] - z).abs() <= band {
                    i += 1;
                }
                if i - start >= cells {
                    if z >= *found.last().unwrap() {
                        return Err(Error::AmbiguousPlateau(format!(
                            "plateau at {z:.6} is out of order after {:.6}",
                            found.last().unwrap()
                        )));
                    }
                    found.push(z);
                }
            }
            None => i += 1,
        }
    }
    found.push(0.0);
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic(a: f64) -> AveragedReaction {
        AveragedReaction::from_fn(|u| u * (u - a) * (1.0 - u), 1025).unwrap()
    }

    fn quintic() -> AveragedReaction {
        AveragedReaction::from_fn(|u| u * (u - 0.125) * (u - 0.25) * (u - 0.375) * (1.0 - u), 1025)
            .unwrap()
    }

    #[test]
    fn classifies_cubic_and_quintic() {
        let r = classify_conditions(&cubic(0.3));
        assert_eq!(r.condition, Condition::B);
        assert!((r.f1 - 1.0 / 30.0).abs() < 1e-12);
        assert_eq!(classify_conditions(&cubic(0.7)).condition, Condition::A);
        assert_eq!(classify_conditions(&quintic()).condition, Condition::B);
        let bal = classify_conditions(&cubic(0.5));
        assert_eq!(bal.condition, Condition::Neither);
        assert!(bal.f1.abs() <= 1e-12);
    }

    #[test]
    fn sign_violation_is_reported() {
        // F(1) > 0 but f̄ dips negative after F has become positive
        let f = |u: f64| {
            u * (1.0 - u) * (u - 0.1) * (u - 0.6) * (u - 0.7) * 10.0
        };
        let ar = AveragedReaction::from_fn(f, 1025).unwrap();
        let r = classify_conditions(&ar);
        assert!(r.f1 > 0.0);
        assert_eq!(r.condition, Condition::Neither);
        let v = r.violation.unwrap();
        assert!(v > 0.59 && v < 0.71);
    }

    #[test]
    fn cubic_speed_and_profile() {
        let w = tw_speed_1d(1.0, &cubic(0.3), &WaveParams::default()).unwrap();
        let exact = 2f64.sqrt() * 0.2;
        assert!((w.c0 - exact).abs() < 0.02 * exact, "c0 = {}", w.c0);
        assert!(!w.unstable_ends);
        for pair in w.phi0.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-8);
        }
        let x = level_crossing(&w.xi, &w.phi0, 0.5).unwrap();
        assert!(x.abs() < 1e-6);
    }

    #[test]
    fn balanced_cubic_is_stationary() {
        let w = tw_speed_1d(1.0, &cubic(0.5), &WaveParams::default()).unwrap();
        assert!(w.c0.abs() <= 1e-3);
    }

    #[test]
    fn translation_does_not_change_speed() {
        let ar = cubic(0.3);
        let a = tw_speed_1d(1.0, &ar, &WaveParams::default()).unwrap();
        let b = tw_speed_1d(
            1.0,
            &ar,
            &WaveParams {
                shift: 3.7,
                ..WaveParams::default()
            },
        )
        .unwrap();
        assert!((a.c0 - b.c0).abs() < 1e-6);
    }

    #[test]
    fn simulation_tracks_the_same_speed() {
        let ar = cubic(0.3);
        let sim = simulate_step_1d(
            1.0,
            &ar,
            &SimulationParams {
                half_width: 80.0,
                h: 0.05,
                dt: 0.01,
                t_end: 200.0,
                record_every: 100,
            },
        )
        .unwrap();
        let half = &sim.fronts[sim.fronts.len() / 2..];
        let (c, r2) = linear_fit(half);
        assert!(r2 > 0.999);
        let exact = 2f64.sqrt() * 0.2;
        assert!((c - exact).abs() < 0.02 * exact, "c = {c}");
    }

    #[test]
    fn linear_fit_recovers_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 2.0 * i as f64 - 1.0)).collect();
        let (s, r2) = linear_fit(&pts);
        assert!((s - 2.0).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn platforms_require_long_runs() {
        let ar = cubic(0.3);
        let mut u = vec![1.0; 50];
        u.extend(vec![0.3; 5]);
        u.extend(vec![0.0; 50]);
        assert_eq!(detect_platforms(&u, &ar, 10, 1e-3).unwrap(), vec![1.0, 0.0]);
        let mut v = vec![1.0; 50];
        v.extend(vec![0.3; 15]);
        v.extend(vec![0.0; 50]);
        let p = detect_platforms(&v, &ar, 10, 1e-3).unwrap();
        assert_eq!(p.len(), 3);
        assert!((p[1] - 0.3).abs() < 1e-12);
    }
}
