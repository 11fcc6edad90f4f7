use super::frame::{ProfileFrame, SpeedStatus};
use super::strip::Strip;
use crate::discretize::{DivOperator, LinearOperator, SolverOptions};
use crate::error::{Error, Result};
use crate::media::Medium;
use crate::spectral::{stability_eigen, State};

/// Cutoff with `ρ = 1` on `(-∞, 0]`, `ρ = 0` on `[2, ∞)`, `-1 ≤ ρ' ≤ 0` and
/// `|ρ''| = 1` on `(0, 2)` away from `1`.
pub fn rho(z: f64) -> f64 {
    if z <= 0.0 {
        1.0
    } else if z <= 1.0 {
        1.0 - 0.5 * z * z
    } else if z <= 2.0 {
        0.5 * (2.0 - z) * (2.0 - z)
    } else {
        0.0
    }
}

pub fn rho_prime(z: f64) -> f64 {
    if z <= 0.0 || z >= 2.0 {
        0.0
    } else if z <= 1.0 {
        -z
    } else {
        -(2.0 - z)
    }
}

/// One-sided values are used at the kinks `0, 1, 2`.
pub fn rho_second(z: f64) -> f64 {
    if z <= 0.0 || z >= 2.0 {
        0.0
    } else if z <= 1.0 {
        -1.0
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubSuperParams {
    pub delta0: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub mu: f64,
    pub beta: f64,
    pub b1: f64,
    pub b2: f64,
    pub k: f64,
    pub eps0: f64,
    /// `‖ψ⁺ + ψ⁻‖_∞`.
    pub psi_sum_norm: f64,
    /// Eigenfunctions on the profile's cell grid, maximum 1.
    pub psi_plus: Vec<f64>,
    pub psi_minus: Vec<f64>,
}

const U_SAMPLES: usize = 200;

/// Constants of the Fife–McLeod construction for a converged wave with `c* > 0`.
pub fn sub_super_params(m: &Medium, pf: &ProfileFrame, opts: &SolverOptions) -> Result<SubSuperParams> {
    if pf.status != SpeedStatus::Converged || !(pf.c > 0.0) {
        return Err(Error::Precondition("needs a converged wave with positive speed".into()));
    }
    let ms = m.scaled(pf.l);
    let gs = pf.grid.scaled(pf.l);
    let minus = stability_eigen(&ms, &gs, State::Zero, opts)?;
    let plus = stability_eigen(&ms, &gs, State::One, opts)?;
    let (lm, lp) = (minus.lambda, plus.lambda);
    if lm <= 0.0 || lp <= 0.0 {
        return Err(Error::Precondition("states 0 and 1 must be linearly stable".into()));
    }
    let table = ms.reaction_table(gs.points());
    let nodes = table.len();
    let deviation = |base: f64, radius: f64| -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..nodes {
            let f0 = table.eval_du(k, base);
            for s in 0..=U_SAMPLES {
                let u = base - radius + 2.0 * radius * s as f64 / U_SAMPLES as f64;
                worst = worst.max((f0 - table.eval_du(k, u)).abs());
            }
        }
        worst
    };
    let delta0 = (2..40)
        .map(|j| 0.5f64.powi(j))
        .find(|&d| deviation(0.0, 2.0 * d) <= lm / 2.0 && deviation(1.0, 2.0 * d) <= lp / 2.0)
        .ok_or_else(|| Error::Precondition("no admissible δ₀ on the dyadic ladder".into()))?;
    let mu = 0.5 * lm.min(lp);

    let ny = pf.grid.len();
    let hx = pf.h_xi();
    let mut beta = f64::INFINITY;
    for i in 1..pf.n_xi() - 1 {
        for k in 0..ny {
            let v = pf.phi[i * ny + k];
            if v >= delta0 / 2.0 && v <= 1.0 - delta0 / 2.0 {
                let d = (pf.phi[(i + 1) * ny + k] - pf.phi[(i - 1) * ny + k]) / (2.0 * hx);
                beta = beta.min(pf.c * d.abs());
            }
        }
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Precondition("profile has no monotone middle region".into()));
    }

    let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let (pp, pm) = (&plus.psi, &minus.psi);
    let diff: Vec<f64> = pp.iter().zip(pm).map(|(a, b)| a - b).collect();
    let sum: Vec<f64> = pp.iter().zip(pm).map(|(a, b)| a + b).collect();
    let op = DivOperator::diffusion(&ms, &gs);
    let nodal: Vec<_> = gs.points().map(|x| ms.diffusion(&x)).collect();
    let e = &pf.e;
    let eae = nodal.iter().map(|a| a.quad(e, e)).fold(0.0, f64::max);
    let div_ae = sup(&op.flux_of_linear(e));
    let h = gs.h();
    let ea_grad = (0..gs.len())
        .map(|k| {
            let ae = nodal[k].apply(e);
            (0..gs.dim())
                .map(|j| {
                    let d = diff[gs.neighbor(k, j, 1)] - diff[gs.neighbor(k, j, -1)];
                    ae[j] * d / (2.0 * h[j])
                })
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max);
    let mut buf = vec![0.0; gs.len()];
    op.apply(pp, &mut buf);
    let lap_plus = sup(&buf);
    op.apply(pm, &mut buf);
    let lap_minus = sup(&buf);
    let b1 = (pf.c.abs() + eae + div_ae) * sup(&diff) + 2.0 * ea_grad + lap_plus + lap_minus;
    let mut fmax: f64 = 0.0;
    for k in 0..nodes {
        for s in 0..=U_SAMPLES {
            let u = -delta0 + (1.0 + 2.0 * delta0) * s as f64 / U_SAMPLES as f64;
            fmax = fmax.max(table.eval_du(k, u).abs());
        }
    }
    let psi_sum_norm = sup(&sum);
    let b2 = fmax * psi_sum_norm;
    let k = (b1 + b2 + mu * psi_sum_norm) / (beta * mu);
    let eps0 = f64::min(delta0 / psi_sum_norm, 1.0 / (pf.c * k));
    Ok(SubSuperParams {
        delta0,
        lambda_minus: lm,
        lambda_plus: lp,
        mu,
        beta,
        b1,
        b2,
        k,
        eps0,
        psi_sum_norm,
        psi_plus: plus.psi,
        psi_minus: minus.psi,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckGrid {
    /// Spatial step as a multiple of the profile's cell spacing (times `l`).
    pub stride: usize,
    pub dt: f64,
    /// Defaults to `min(3/μ, W/(4c*))`.
    pub t_end: Option<f64>,
    /// `C` in `tol_fd = C (h + Δt)`; calibrated as twice the `ε = 0`
    /// residual when unset.
    pub constant: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubSuperReport {
    pub eps: f64,
    pub h: f64,
    pub dt: f64,
    pub t_end: f64,
    /// `max N[u⁻]`, nonpositive for a subsolution.
    pub max_sub: f64,
    /// `min N[u⁺]`, nonnegative for a supersolution.
    pub min_super: f64,
    /// `max |N[U]|` of the unperturbed wave.
    pub baseline: f64,
    pub constant: f64,
    pub tol_fd: f64,
    pub holds: bool,
}

/// Residuals of the perturbed waves `u±` on a space-time grid.
pub fn verify_subsupersolution(
    m: &Medium,
    pf: &ProfileFrame,
    params: &SubSuperParams,
    eps: f64,
    shift: &[i64],
    check: &CheckGrid,
) -> Result<SubSuperReport> {
    if pf.status != SpeedStatus::Converged || !(pf.c > 0.0) {
        return Err(Error::Precondition("needs a converged wave with positive speed".into()));
    }
    if !(eps >= 0.0 && eps <= params.eps0) {
        return Err(Error::Precondition(format!(
            "ε = {eps:.6e} outside [0, ε₀ = {:.6e}]",
            params.eps0
        )));
    }
    let dim = m.dim();
    let axis = pf
        .e
        .iter()
        .position(|v| v.abs() == 1.0)
        .filter(|_| pf.e.iter().filter(|v| **v != 0.0).count() == 1)
        .ok_or_else(|| Error::InvalidArgument("the residual check needs a lattice direction".into()))?;
    if shift.len() != dim || check.stride == 0 || !(check.dt > 0.0) {
        return Err(Error::InvalidArgument("check grid parameters out of range".into()));
    }
    let sign = pf.e[axis];
    let l = pf.l;
    let g = &pf.grid;
    let n = g.n();
    let other = 1 - axis.min(1);
    if dim == 2 && n[other] % check.stride != 0 {
        return Err(Error::InvalidArgument("stride must divide the transverse grid".into()));
    }
    let ms = m.scaled(l);
    let periods = ms.cell().periods();
    let h = l * g.h()[axis] * check.stride as f64;
    let w = pf.half_width();
    let half = (0.5 * w / h).floor() as i64;
    let n_long = (2 * half + 1) as usize;
    let n_t = if dim == 2 { n[other] / check.stride } else { 1 };
    let strip = Strip::new(&ms, axis, n_long, h, -(half as f64) * h, n_t);
    let len = strip.len();
    let c = pf.c;
    let t_end = check.t_end.unwrap_or_else(|| f64::min(3.0 / params.mu, 0.25 * w / c));
    let steps = (t_end / check.dt).ceil() as usize;
    let kl = shift[axis] as f64 * periods[axis] * sign;

    // cell-grid node and e-coordinate of every strip node
    let mut node = vec![0usize; len];
    let mut xe = vec![0.0; len];
    for i in 0..n_long {
        let gi = ((i as i64 - half) * check.stride as i64).rem_euclid(n[axis] as i64) as usize;
        for j in 0..n_t {
            let gj = j * check.stride;
            let (i0, i1) = if axis == 0 { (gi, gj) } else { (gj, gi) };
            node[i * n_t + j] = if dim == 2 { i0 + n[0] * i1 } else { i0 };
            xe[i * n_t + j] = sign * (i as i64 - half) as f64 * h;
        }
    }

    let ny = g.len();
    let hx = pf.h_xi();
    let profile = |xi: f64, k: usize| -> f64 {
        let s = (xi + w) / hx;
        let nx = pf.n_xi();
        if s <= 0.0 {
            return 1.0;
        }
        if s >= (nx - 1) as f64 {
            return 0.0;
        }
        let i = (s.floor() as usize).clamp(1, nx - 3);
        let t = s - i as f64;
        let v = |r: usize| pf.phi[r * ny + k];
        let (a, b, cc, d) = (v(i - 1), v(i), v(i + 1), v(i + 2));
        // cubic through the nodes i-1, i, i+1, i+2 at offsets -1, 0, 1, 2
        -t * (t - 1.0) * (t - 2.0) / 6.0 * a + (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0 * b
            - (t + 1.0) * t * (t - 2.0) / 2.0 * cc
            + (t + 1.0) * t * (t - 1.0) / 6.0 * d
    };
    let fields = |t: f64| -> [Vec<f64>; 3] {
        let q = eps * (-params.mu * t).exp();
        let eta = eps * params.k * (1.0 - (-params.mu * t).exp());
        let mut out = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
        for p in 0..len {
            let k = node[p];
            let r = rho(xe[p] - c * t);
            let bump = q * (r * params.psi_plus[k] + (1.0 - r) * params.psi_minus[k]);
            let base = xe[p] + kl;
            out[0][p] = profile(base - c * (t - eta), k) - bump;
            out[1][p] = profile(base - c * (t + eta), k) + bump;
            out[2][p] = profile(base - c * t, k);
        }
        out
    };
    let mut levels = [fields(0.0), fields(check.dt)];
    let nt = strip.n_t;
    let mut lap = vec![0.0; len];
    let (mut max_sub, mut min_super, mut baseline) = (f64::NEG_INFINITY, f64::INFINITY, 0.0f64);
    for step in 1..steps {
        let next = fields((step + 1) as f64 * check.dt);
        let cur = &levels[1];
        for (which, field) in cur.iter().enumerate() {
            strip.apply_diffusion(field, &mut lap);
            for p in nt..len - nt {
                let dtu = (next[which][p] - levels[0][which][p]) / (2.0 * check.dt);
                let res = dtu - lap[p] - strip.reaction.eval(p, field[p]);
                match which {
                    0 => max_sub = max_sub.max(res),
                    1 => min_super = min_super.min(res),
                    _ => baseline = baseline.max(res.abs()),
                }
            }
        }
        levels = [std::mem::take(&mut levels[1]), next];
    }
    let constant = check.constant.unwrap_or(2.0 * baseline / (h + check.dt));
    let tol_fd = constant * (h + check.dt);
    Ok(SubSuperReport {
        eps,
        h,
        dt: check.dt,
        t_end,
        max_sub,
        min_super,
        baseline,
        constant,
        tol_fd,
        holds: max_sub <= tol_fd && min_super >= -tol_fd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::Grid;
    use crate::media::Cell;
    use crate::pulsate::{pulsating_speed, PulsateParams};
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn cutoff_is_monotone_and_bounded(z in -1.0f64..3.0, dz in 0.0f64..1.0) {
            prop_assert!((0.0..=1.0).contains(&rho(z)));
            prop_assert!(rho(z + dz) <= rho(z));
            prop_assert!((-1.0..=0.0).contains(&rho_prime(z)));
            prop_assert!(rho_second(z).abs() <= 1.0);
        }

        #[test]
        fn cutoff_derivatives_match_differences(z in 0.01f64..1.99) {
            prop_assume!((z - 1.0).abs() > 0.01);
            let h = 1e-5;
            let d1 = (rho(z + h) - rho(z - h)) / (2.0 * h);
            let d2 = (rho(z + h) - 2.0 * rho(z) + rho(z - h)) / (h * h);
            prop_assert!((d1 - rho_prime(z)).abs() <= 1e-8);
            prop_assert!((d2 - rho_second(z)).abs() <= 1e-3);
        }
    }

    fn cubic_wave() -> (Medium, ProfileFrame) {
        let m = Medium::homogeneous_cubic(1, 1.0, 0.3).unwrap();
        let g = Grid::uniform(&Cell::unit(1), 16).unwrap();
        let p = PulsateParams {
            n_xi: 2049,
            ..PulsateParams::default()
        };
        let pf = pulsating_speed(&m, &[1.0], 1.0, &g, &p).unwrap().1;
        (m, pf)
    }

    #[test]
    fn perturbed_waves_bracket_the_equation() {
        let (m, pf) = cubic_wave();
        let params = sub_super_params(&m, &pf, &SolverOptions::default()).unwrap();
        assert_eq!(params.delta0, 1.0 / 64.0);
        assert!((params.mu - 0.15).abs() <= 1e-6);
        assert!(params.eps0 > 0.0);
        let check = CheckGrid {
            stride: 2,
            dt: 0.25,
            t_end: None,
            constant: None,
        };
        let r = verify_subsupersolution(&m, &pf, &params, 0.5 * params.eps0, &[0], &check).unwrap();
        assert!(r.holds, "{r:?}");
        assert!(r.max_sub < 0.0 && r.min_super > 0.0);

        let plain = verify_subsupersolution(&m, &pf, &params, 0.0, &[3], &check).unwrap();
        assert!(plain.max_sub <= plain.baseline && plain.min_super >= -plain.baseline);
        assert!(plain.holds);

        assert!(verify_subsupersolution(&m, &pf, &params, 2.0 * params.eps0, &[0], &check).is_err());
    }
}
