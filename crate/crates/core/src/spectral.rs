//! Stability eigenvalues of the states 0 and 1, the weighted curves
//! `μ ↦ λ₁(μ)` and the exponential decay rates of fronts.

use crate::discretize::{
    assemble_div_operator, check_direction, principal_eigen_iterate, Grid, SolverOptions,
};
use crate::error::{Error, Result};
use crate::media::Medium;

pub use crate::discretize::{EigenPair, State};

/// Principal eigenpair of `−∇·(A∇ψ) − ∂_u f(x, state) ψ = λψ`.
pub fn stability_eigen(m: &Medium, g: &Grid, state: State, opts: &SolverOptions) -> Result<EigenPair> {
    let op = assemble_div_operator(m, g, None, None, Some(state))?;
    principal_eigen_iterate(&op, opts, None)
}

/// Principal eigenpair of the `μ`-weighted operator, optionally warm-started.
pub fn weighted_eigen(
    m: &Medium,
    g: &Grid,
    e: &[f64],
    mu: f64,
    state: State,
    opts: &SolverOptions,
    warm: Option<&[f64]>,
) -> Result<EigenPair> {
    let op = assemble_div_operator(m, g, Some(e), Some(mu), Some(state))?;
    principal_eigen_iterate(&op, opts, warm)
}

/// `λ₁(μ)` for the requested state.
pub fn weighted_lambda(
    m: &Medium,
    g: &Grid,
    e: &[f64],
    mu: f64,
    state: State,
    opts: &SolverOptions,
) -> Result<f64> {
    weighted_eigen(m, g, e, mu, state, opts, None).map(|p| p.lambda)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayExponents {
    /// Negative root of `λ₁⁻(μ) = cμ`: the decay rate ahead of the front.
    pub mu_minus: f64,
    /// Positive root of `λ₁⁺(μ) = cμ`: the decay rate behind the front.
    pub mu_plus: f64,
    pub c: f64,
    pub residual_minus: f64,
    pub residual_plus: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootOptions {
    /// Largest `|μ|` the bracket may reach; defaults to `20 / min L_i`.
    pub mu_limit: Option<f64>,
    pub tol: f64,
    pub eigen: SolverOptions,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            mu_limit: None,
            tol: 1e-10,
            eigen: SolverOptions::default(),
        }
    }
}

/// Both decay roots at speed `c`, by geometric bracketing and bisection.
pub fn decay_roots(m: &Medium, g: &Grid, e: &[f64], c: f64, opts: &RootOptions) -> Result<DecayExponents> {
    check_direction(e, m.dim())?;
    let limit = opts.mu_limit.unwrap_or_else(|| {
        20.0 / m
            .cell()
            .periods()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    });
    let (mu_minus, residual_minus) = root(m, g, e, c, State::Zero, -1.0, limit, opts)?;
    let (mu_plus, residual_plus) = root(m, g, e, c, State::One, 1.0, limit, opts)?;
    Ok(DecayExponents {
        mu_minus,
        mu_plus,
        c,
        residual_minus,
        residual_plus,
    })
}

/// Root of `g(μ) = λ₁(μ) − cμ` on the half line `sign·μ > 0`; `g(0) > 0`
/// and `g` is concave, so the root is unique.
#[allow(clippy::too_many_arguments)]
fn root(
    m: &Medium,
    g: &Grid,
    e: &[f64],
    c: f64,
    state: State,
    sign: f64,
    limit: f64,
    opts: &RootOptions,
) -> Result<(f64, f64)> {
    let mut warm: Option<Vec<f64>> = None;
    let mut eval = |mu: f64| -> Result<f64> {
        let p = weighted_eigen(m, g, e, mu, state, &opts.eigen, warm.as_deref())?;
        let v = p.lambda - c * mu;
        warm = Some(p.psi);
        Ok(v)
    };
    let g0 = eval(0.0)?;
    if g0 <= 0.0 {
        return Err(Error::Precondition(format!(
            "state {} is not linearly stable (λ = {g0:.6e})",
            state.value()
        )));
    }
    let mut inner = 0.0;
    let mut step = 0.25_f64.min(limit);
    let mut outer = sign * step;
    let mut g_outer = eval(outer)?;
    while g_outer > 0.0 {
        inner = outer;
        if step >= limit {
            return Err(Error::BracketExhausted { limit });
        }
        step = (2.0 * step).min(limit);
        outer = sign * step;
        g_outer = eval(outer)?;
    }
    while (outer - inner).abs() > opts.tol {
        let mid = 0.5 * (inner + outer);
        if eval(mid)? > 0.0 {
            inner = mid;
        } else {
            outer = mid;
        }
    }
    let mu = 0.5 * (inner + outer);
    let r = eval(mu)?;
    Ok((mu, r.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::{build_medium, Cell, DiffusionSpec, MediumConfig, ReactionSpec, TrigSeries};

    fn periodic_1d() -> Medium {
        build_medium(&MediumConfig {
            cell: Cell::unit(1),
            diffusion: DiffusionSpec::identity(),
            reaction: ReactionSpec::Cubic {
                a: "0.3, 0.1*cos1(1)".parse::<TrigSeries>().unwrap().into(),
            },
        })
        .unwrap()
    }

    #[test]
    fn constant_cubic_stability() {
        let m = Medium::homogeneous_cubic(1, 1.0, 0.3).unwrap();
        let g = Grid::uniform(m.cell(), 64).unwrap();
        let opts = SolverOptions::default();
        let lm = stability_eigen(&m, &g, State::Zero, &opts).unwrap().lambda;
        let lp = stability_eigen(&m, &g, State::One, &opts).unwrap().lambda;
        assert!((lm - 0.3).abs() < 1e-12);
        assert!((lp - 0.7).abs() < 1e-12);
    }

    #[test]
    fn quintic_stability() {
        let m = build_medium(&MediumConfig {
            cell: Cell::unit(1),
            diffusion: DiffusionSpec::identity(),
            reaction: ReactionSpec::Quintic,
        })
        .unwrap();
        let g = Grid::uniform(m.cell(), 64).unwrap();
        let l = stability_eigen(&m, &g, State::Zero, &SolverOptions::default())
            .unwrap()
            .lambda;
        assert!((l - 3.0 / 256.0).abs() < 1e-12);
    }

    #[test]
    fn periodic_threshold_brackets_and_refines() {
        let m = periodic_1d();
        let opts = SolverOptions::default();
        let lam = |n: usize| {
            let g = Grid::uniform(m.cell(), n).unwrap();
            stability_eigen(&m, &g, State::Zero, &opts).unwrap().lambda
        };
        let (a, b) = (lam(128), lam(512));
        assert!(a > 0.2 && a < 0.3);
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn weighted_at_zero_is_stability() {
        let m = periodic_1d();
        let g = Grid::uniform(m.cell(), 128).unwrap();
        let opts = SolverOptions::default();
        for state in [State::Zero, State::One] {
            let a = stability_eigen(&m, &g, state, &opts).unwrap().lambda;
            let b = weighted_lambda(&m, &g, &[1.0], 0.0, state, &opts).unwrap();
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_closed_form() {
        let m = Medium::homogeneous_cubic(2, 1.0, 0.3).unwrap();
        let g = Grid::uniform(m.cell(), 16).unwrap();
        let l = weighted_lambda(&m, &g, &[1.0, 0.0], 1.0, State::Zero, &SolverOptions::default())
            .unwrap();
        assert!((l + 0.7).abs() < 1e-10);
    }

    #[test]
    fn weighted_curve_is_concave() {
        let m = periodic_1d();
        let g = Grid::uniform(m.cell(), 128).unwrap();
        let opts = SolverOptions::default();
        for state in [State::Zero, State::One] {
            let ls: Vec<f64> = (-4..=4)
                .map(|k| weighted_lambda(&m, &g, &[1.0], 0.5 * k as f64, state, &opts).unwrap())
                .collect();
            for w in ls.windows(3) {
                assert!(w[0] - 2.0 * w[1] + w[2] <= 1e-8);
            }
        }
    }

    #[test]
    fn roots_match_quadratic_formula() {
        let m = Medium::homogeneous_cubic(1, 1.0, 0.3).unwrap();
        let g = Grid::uniform(m.cell(), 64).unwrap();
        let opts = RootOptions::default();
        let c = 2f64.sqrt() * 0.2;
        let d = decay_roots(&m, &g, &[1.0], c, &opts).unwrap();
        assert!((d.mu_minus + 0.5f64.sqrt()).abs() < 1e-9);
        let plus = (-c + (c * c + 2.8f64).sqrt()) / 2.0;
        assert!((d.mu_plus - plus).abs() < 1e-9);
        assert!(d.residual_minus <= 1e-8 && d.residual_plus <= 1e-8);
        let d0 = decay_roots(&m, &g, &[1.0], 0.0, &opts).unwrap();
        assert!((d0.mu_minus + 0.3f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn roots_decrease_with_speed() {
        let m = periodic_1d();
        let g = Grid::uniform(m.cell(), 64).unwrap();
        let opts = RootOptions::default();
        let roots: Vec<DecayExponents> = [0.0, 0.1, 0.2, 0.3]
            .iter()
            .map(|&c| decay_roots(&m, &g, &[1.0], c, &opts).unwrap())
            .collect();
        for w in roots.windows(2) {
            assert!(w[1].mu_minus < w[0].mu_minus);
            assert!(w[1].mu_plus < w[0].mu_plus);
        }
    }

    #[test]
    fn unstable_state_is_a_precondition_failure() {
        let m = Medium::homogeneous_cubic(1, 1.0, -0.2).unwrap();
        let g = Grid::uniform(m.cell(), 32).unwrap();
        assert!(matches!(
            decay_roots(&m, &g, &[1.0], 0.0, &RootOptions::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn tiny_limit_exhausts_bracket() {
        let m = Medium::homogeneous_cubic(1, 1.0, 0.3).unwrap();
        let g = Grid::uniform(m.cell(), 32).unwrap();
        let opts = RootOptions {
            mu_limit: Some(0.1),
            ..RootOptions::default()
        };
        assert!(matches!(
            decay_roots(&m, &g, &[1.0], 0.0, &opts),
            Err(Error::BracketExhausted { .. })
        ));
    }
}
