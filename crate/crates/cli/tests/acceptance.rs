//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//! Run with `cargo test -p frontlab --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use frontlab::discretize::{assemble_div_operator, Grid, LinearOperator, SolverOptions};
use frontlab::homogenize::{average_reaction, solve_cell};
use frontlab::media::Medium;
use frontlab::pulsate::{
    direction_sweep, epsilon_ladder, measure_decay, pulsating_speed, sub_super_params, verify_subsupersolution,
    CheckGrid, InitialProfile, PulsateParams, SpeedStatus, ZERO_SPEED_TOL,
};
use frontlab::spectral::{decay_roots, stability_eigen, weighted_eigen, weighted_lambda, RootOptions, State};
use frontlab::terrace::{
    classify_conditions, linear_fit, simulate_step_1d, terrace_decompose, tw_speed_1d, Condition, SimulationParams,
    TerraceParams, WaveParams,
};
use frontlab_cli::parse_config;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn medium(text: &str) -> Medium {
    parse_config(text).unwrap().medium
}

/// Prints the verdict line, then fails the test if any check failed or the
/// budget was exceeded.
fn verdict(id: u32, name: &str, checks: &[(&str, bool)], detail: &str, start: Instant, budget: Duration) {
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let failed: Vec<&str> = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
    let pass = failed.is_empty() && in_time;
    println!(
        "criterion {id:>2} [{}] {name}: {detail} ({:.1} s of {} s){}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failed: {}", failed.join(", "))
        }
    );
    assert!(pass, "criterion {id} failed");
}

const CUBIC_LINE: &str = "medium.dim = 1\nmedium.reaction = cubic\nmedium.threshold = 0.3\n";

fn eq_d2(mean: f64) -> Medium {
    medium(&format!(
        "medium.dim = 2\nmedium.reaction = cubic\nmedium.threshold = {mean}, 0.2*cos1(1)*cos2(1)\n"
    ))
}

#[test]
fn c01_eigen_closed_forms() {
    let start = Instant::now();
    let opts = SolverOptions::default();
    let cases = [
        (
            medium("medium.dim = 1\nmedium.a11 = 1.7\nmedium.reaction = cubic\nmedium.threshold = 0.3\n"),
            vec![1.0],
        ),
        (
            medium(
                "medium.dim = 2\nmedium.a11 = 1.5\nmedium.a22 = 0.8\nmedium.a12 = 0.3\n\
                 medium.reaction = cubic\nmedium.threshold = 0.3\n",
            ),
            vec![0.6, 0.8],
        ),
    ];
    let mut worst: f64 = 0.0;
    for (m, e) in &cases {
        let g = Grid::uniform(m.cell(), 16).unwrap();
        let a = m.diffusion(&[0.0, 0.0]);
        let eae = a.quad(e, e);
        for (state, fu) in [(State::Zero, -0.3), (State::One, -0.7)] {
            for k in -4..=4 {
                let mu = 0.5 * k as f64;
                let lam = weighted_lambda(m, &g, e, mu, state, &opts).unwrap();
                worst = worst.max((lam - (-mu * mu * eae - fu)).abs());
            }
        }
    }
    verdict(
        1,
        "eigen closed forms",
        &[("|λ - closed form| <= 1e-8", worst <= 1e-8)],
        &format!("max deviation {worst:.2e} over mu in -2..2, d = 1 and 2"),
        start,
        Duration::from_secs(5),
    );
}

#[test]
fn c02_cell_problem() {
    let start = Instant::now();
    let opts = SolverOptions::default();
    let line = medium(
        "medium.dim = 1\nmedium.diffusion = trigonometric\nmedium.a11 = 2, 1*sin1(1)\n\
         medium.reaction = quintic\n",
    );
    let c1 = solve_cell(&line, &Grid::uniform(line.cell(), 256).unwrap(), &[1.0], &opts).unwrap();
    let harmonic = 3f64.sqrt();
    let lam = medium(
        "medium.dim = 2\nmedium.diffusion = laminate\nmedium.laminate_profile = 2, 1*cos1(1)\n\
         medium.reaction = quintic\n",
    );
    let g = Grid::uniform(lam.cell(), 64).unwrap();
    let across = solve_cell(&lam, &g, &[1.0, 0.0], &opts).unwrap();
    let along = solve_cell(&lam, &g, &[0.0, 1.0], &opts).unwrap();

    // bounds over a family of anisotropic media and directions
    let trig = medium(
        "medium.dim = 2\nmedium.diffusion = trigonometric\nmedium.a11 = 2, 0.5*cos1(1)*sin2(1)\n\
         medium.a22 = 1.5, 0.4*sin1(2)\nmedium.a12 = 0.3, 0.2*cos2(1)\nmedium.reaction = quintic\n",
    );
    let gt = Grid::uniform(trig.cell(), 32).unwrap();
    let mut bounds = true;
    let mut dual: f64 = (c1.a0 - c1.a0_energy).abs().max((across.a0 - across.a0_energy).abs());
    for k in 0..8 {
        let th = std::f64::consts::PI * k as f64 / 8.0;
        let e = [th.cos(), th.sin()];
        for (m, g) in [(&lam, &g), (&trig, &gt)] {
            let c = solve_cell(m, g, &e, &opts).unwrap();
            let mean_eae = g.mean(&g.sample(|x| m.diffusion(x).quad(&e, &e)));
            bounds &= m.alpha1() <= c.a0 + 1e-12 && c.a0 <= mean_eae + 1e-12;
            dual = dual.max((c.a0 - c.a0_energy).abs());
        }
    }
    let e1 = (c1.a0 - harmonic).abs();
    let e2 = (across.a0 - harmonic).abs().max((along.a0 - 2.0).abs());
    verdict(
        2,
        "cell problem",
        &[
            ("1-d harmonic mean to 1e-6", e1 <= 1e-6),
            ("laminate means to 1e-5", e2 <= 1e-5),
            ("dual forms to 1e-8", dual <= 1e-8),
            ("alpha1 <= A0 <= mean eAe", bounds),
        ],
        &format!("1-d error {e1:.2e}, laminate error {e2:.2e}, dual gap {dual:.2e}"),
        start,
        Duration::from_secs(30),
    );
}

#[test]
fn c03_homogenized_speed() {
    let start = Instant::now();
    let ar = average_reaction(&medium(CUBIC_LINE));
    let exact = 2f64.sqrt() * 0.2;
    let speed = |n: usize| {
        tw_speed_1d(
            1.0,
            &ar,
            &WaveParams {
                n_xi: n,
                half_width: Some(60.0),
                ..WaveParams::default()
            },
        )
        .unwrap()
        .c0
    };
    let (c1, c2, c3) = (speed(1024), speed(2048), speed(4096));
    let sim = simulate_step_1d(
        1.0,
        &ar,
        &SimulationParams {
            half_width: 120.0,
            h: 0.1,
            dt: 0.004,
            t_end: 200.0,
            record_every: 50,
        },
    )
    .unwrap();
    let tail: Vec<(f64, f64)> = sim.fronts.iter().copied().filter(|(t, _)| *t >= 100.0).collect();
    let direct = linear_fit(&tail).0;
    let balanced = tw_speed_1d(
        1.0,
        &average_reaction(&medium("medium.dim = 1\nmedium.reaction = cubic\nmedium.threshold = 0.5\n")),
        &WaveParams::default(),
    )
    .unwrap()
    .c0;
    verdict(
        3,
        "homogenized wave speed",
        &[
            ("within 2% of sqrt(2)/5", (c3 - exact).abs() <= 0.02 * exact),
            ("direct tracking within 2%", (direct - c3).abs() <= 0.02 * c3),
            ("refinement converges", (c3 - c2).abs() < (c2 - c1).abs() || (c3 - c2).abs() < 1e-9),
            ("balanced |c0| <= 1e-3", balanced.abs() <= 1e-3),
        ],
        &format!("c0 {c3:.8} (n 1024/2048: {c1:.8}/{c2:.8}), direct {direct:.6}, balanced {balanced:.1e}"),
        start,
        Duration::from_secs(120),
    );
}

#[test]
fn c04_decay_exponents() {
    let start = Instant::now();
    let p = PulsateParams::default();
    let m = medium(CUBIC_LINE);
    let g = Grid::uniform(m.cell(), 16).unwrap();
    let (s, pf) = pulsating_speed(&m, &[1.0], 1.0, &g, &p).unwrap();
    let de = decay_roots(&m, &g, &[1.0], s.c_star, &RootOptions::default()).unwrap();
    let r = measure_decay(&pf, &de).unwrap();
    let rate = 0.5f64.sqrt();
    let cubic_err = ((r.slope_right + rate) / rate).abs();

    let pm = medium(
        "medium.dim = 1\nmedium.diffusion = trigonometric\nmedium.a11 = 1, 0.4*sin1(1)\n\
         medium.reaction = cubic\nmedium.threshold = 0.3, 0.1*cos1(1)\n",
    );
    let gp = Grid::uniform(pm.cell(), 64).unwrap();
    let l = 1.0;
    let (sp, pfp) = pulsating_speed(&pm, &[1.0], l, &gp, &p).unwrap();
    let dp = decay_roots(&pm.scaled(l), &gp.scaled(l), &[1.0], sp.c_star, &RootOptions::default()).unwrap();
    let rp = measure_decay(&pfp, &dp).unwrap();
    verdict(
        4,
        "decay exponents",
        &[
            ("cubic right slope within 5% of -1/sqrt(2)", cubic_err <= 0.05),
            ("periodic slopes within 10% of the roots", rp.rel_err_right <= 0.1 && rp.rel_err_left <= 0.1),
        ],
        &format!(
            "cubic slope {:.5} ({:.2}%), periodic ahead {:.5} vs {:.5}, behind {:.5} vs {:.5}",
            r.slope_right,
            100.0 * cubic_err,
            rp.slope_right,
            dp.mu_minus,
            rp.slope_left,
            -dp.mu_plus
        ),
        start,
        Duration::from_secs(120),
    );
}

#[test]
fn c05_terrace_classifier() {
    let start = Instant::now();
    let quintic = medium("medium.dim = 1\nmedium.reaction = quintic\n");
    let ar = average_reaction(&quintic);
    let cond = classify_conditions(&ar);
    let a0 = solve_cell(&quintic, &Grid::uniform(quintic.cell(), 32).unwrap(), &[1.0], &SolverOptions::default())
        .unwrap()
        .a0;
    let single = terrace_decompose(a0, &ar, &TerraceParams::default()).unwrap();

    // u(1-u) 10(u - 0.05)(u - 0.5)(u - 0.7), with an x-dependent part that averages out
    let two = medium(
        "medium.dim = 1\nmedium.reaction = polynomial\n\
         medium.coeffs = -0.175, 0.1*cos1(1); 4.1; -12.5; 10\n",
    );
    let ar2 = average_reaction(&two);
    let split = terrace_decompose(1.0, &ar2, &TerraceParams::default()).unwrap();
    let ordered = split.speeds.windows(2).all(|w| w[0] <= w[1]);
    verdict(
        5,
        "terrace classifier",
        &[
            ("quintic is condition (b)", cond.condition == Condition::B),
            ("quintic c0 > 0", single.speeds.first().is_some_and(|c| *c > 0.0)),
            ("quintic terrace N = 1", single.len() == 1),
            ("two-well terrace N = 2", split.len() == 2),
            ("speeds nondecreasing", ordered),
        ],
        &format!(
            "quintic F(1) {:.4e}, c0 {:.6}; two-well platforms {:?}, speeds {:?}",
            cond.f1,
            single.speeds.first().copied().unwrap_or(f64::NAN),
            split.platforms,
            split.speeds
        ),
        start,
        Duration::from_secs(180),
    );
}

#[test]
fn c06_sign_law() {
    let start = Instant::now();
    let p = PulsateParams {
        n_xi: 512,
        ..PulsateParams::default()
    };
    let balanced = eq_d2(0.5);
    let g = Grid::uniform(balanced.cell(), 64).unwrap();
    let (s0, _) = pulsating_speed(&balanced, &[1.0, 0.0], 0.5, &g, &p).unwrap();
    let (s1, _) = pulsating_speed(&eq_d2(0.35), &[1.0, 0.0], 0.5, &g, &p).unwrap();
    verdict(
        6,
        "sign law",
        &[
            ("balanced |c*| <= 2e-3", s0.c_star.abs() <= 2e-3),
            ("shifted c* > 0", s1.c_star > 0.0 && s1.status == SpeedStatus::Converged),
        ],
        &format!(
            "mean 1/2: c* {:.3e} ({:?}, raw {:.3e}); mean 0.35: c* {:.6}",
            s0.c_star, s0.status, s0.raw_speed, s1.c_star
        ),
        start,
        Duration::from_secs(600),
    );
}

#[test]
fn c07_continuity_proxy() {
    let start = Instant::now();
    let m = medium(
        "medium.dim = 2\nmedium.diffusion = laminate\nmedium.laminate_profile = 2, 1*cos1(1)\n\
         medium.reaction = cubic\nmedium.threshold = 0.3\n",
    );
    let g = Grid::uniform(m.cell(), 16).unwrap();
    let p = PulsateParams {
        n_xi: 256,
        ..PulsateParams::default()
    };
    let coarse = direction_sweep(&m, 0.5, 16, &g, &p, 1).unwrap();
    let fine = direction_sweep(&m, 0.5, 32, &g, &p, 1).unwrap();
    let all_ok = coarse.rows.iter().chain(&fine.rows).all(|r| r.result.is_ok());
    let one_sign = |t: &frontlab::pulsate::SweepTable| {
        let cs: Vec<f64> = t.rows.iter().filter_map(|r| r.result.as_ref().ok()).map(|s| s.c_star).collect();
        cs.iter().all(|c| *c > ZERO_SPEED_TOL) || cs.iter().all(|c| *c < -ZERO_SPEED_TOL) || cs.iter().all(|c| c.abs() <= ZERO_SPEED_TOL)
    };
    verdict(
        7,
        "continuity proxy",
        &[
            ("all directions solved", all_ok),
            ("gap(16) > gap(32)", coarse.max_gap > fine.max_gap),
            ("one sign", one_sign(&coarse) && one_sign(&fine) && coarse.signs_agree && fine.signs_agree),
        ],
        &format!("max gap {:.4e} (16) vs {:.4e} (32)", coarse.max_gap, fine.max_gap),
        start,
        Duration::from_secs(1800),
    );
}

#[test]
fn c08_homogenization_ladder() {
    let start = Instant::now();
    let m = eq_d2(0.35);
    let g = Grid::uniform(m.cell(), 32).unwrap();
    let p = PulsateParams {
        n_xi: 256,
        ..PulsateParams::default()
    };
    let t = epsilon_ladder(&m, &[1.0, 0.0], &[0.8, 0.4, 0.2, 0.1], &g, &p, 1).unwrap();
    let entries: Vec<_> = t.rows.iter().filter_map(|r| r.result.as_ref().ok()).collect();
    let complete = entries.len() == t.rows.len();
    let speed: Vec<f64> = entries.iter().map(|e| e.speed_gap).collect();
    let h1: Vec<f64> = entries.iter().map(|e| e.h1_gap).collect();
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let last = speed.last().copied().unwrap_or(f64::INFINITY);
    verdict(
        8,
        "homogenization ladder",
        &[
            ("all scales solved", complete),
            ("speed gap decreasing", decreasing(&speed)),
            ("H1 gap decreasing", decreasing(&h1)),
            ("final gap <= 5% of |c0|", last <= 0.05 * t.c0.abs()),
        ],
        &format!(
            "c0 {:.6}; speed gaps {:?}; H1 gaps {:?}",
            t.c0,
            speed.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>(),
            h1.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>()
        ),
        start,
        Duration::from_secs(1800),
    );
}

#[test]
fn c09_fife_mcleod() {
    let start = Instant::now();
    let m = medium("medium.dim = 1\nmedium.reaction = cubic\nmedium.threshold = 0.3, 0.1*cos1(1)\n");
    let g = Grid::uniform(m.cell(), 64).unwrap();
    let p = PulsateParams {
        n_xi: 4097,
        ..PulsateParams::default()
    };
    let (_, pf) = pulsating_speed(&m, &[1.0], 1.0, &g, &p).unwrap();
    let params = sub_super_params(&m, &pf, &SolverOptions::default()).unwrap();
    let constants = [params.delta0, params.mu, params.beta, params.b2, params.k, params.eps0];
    let finite = constants.iter().all(|v| v.is_finite() && *v > 0.0) && params.b1 >= 0.0;
    let eps = 0.5 * params.eps0;
    let coarse_grid = CheckGrid {
        stride: 2,
        dt: 0.25,
        t_end: None,
        constant: None,
    };
    let coarse = verify_subsupersolution(&m, &pf, &params, eps, &[0], &coarse_grid).unwrap();
    let fine_grid = CheckGrid {
        stride: 1,
        dt: 0.125,
        t_end: None,
        constant: Some(coarse.constant),
    };
    let fine = verify_subsupersolution(&m, &pf, &params, eps, &[0], &fine_grid).unwrap();
    let plain = verify_subsupersolution(&m, &pf, &params, 0.0, &[0], &fine_grid).unwrap();
    let halves = (fine.tol_fd - 0.5 * coarse.tol_fd).abs() <= 1e-12 * coarse.tol_fd;
    let zero = plain.max_sub.abs().max(plain.min_super.abs());
    verdict(
        9,
        "Fife-McLeod verification",
        &[
            ("constants computed", finite),
            ("coarse residuals within tolerance", coarse.holds),
            ("fine residuals within halved tolerance", fine.holds && halves),
            ("eps = 0 residual near zero", zero <= fine.tol_fd && plain.baseline < coarse.baseline),
        ],
        &format!(
            "eps0 {:.3e}; max N[u-] {:.2e} / {:.2e}, min N[u+] {:.2e} / {:.2e} vs tol {:.2e} / {:.2e}; eps = 0 residual {:.2e}",
            params.eps0, coarse.max_sub, fine.max_sub, coarse.min_super, fine.min_super, coarse.tol_fd, fine.tol_fd, zero
        ),
        start,
        Duration::from_secs(300),
    );
}

fn random_trig_medium(rng: &mut ChaCha8Rng, dim: usize) -> Medium {
    let mut amp = || rng.gen_range(-0.3..0.3);
    let text = if dim == 1 {
        format!(
            "medium.dim = 1\nmedium.diffusion = trigonometric\nmedium.a11 = 1.5, {}*cos1(1), {}*sin1(2)\n\
             medium.reaction = cubic\nmedium.threshold = 0.3, {}*cos1(1)\n",
            amp(),
            amp(),
            0.5 * amp()
        )
    } else {
        format!(
            "medium.dim = 2\nmedium.diffusion = trigonometric\nmedium.a11 = 1.5, {}*cos1(1)*sin2(1)\n\
             medium.a22 = 1.2, {}*sin1(1)\nmedium.a12 = {}, {}*cos2(1)\n\
             medium.reaction = cubic\nmedium.threshold = 0.35, {}*cos1(1)*cos2(1)\n",
            amp(),
            amp(),
            amp(),
            0.5 * amp(),
            0.5 * amp()
        )
    };
    medium(&text)
}

#[test]
fn c10_invariant_suite() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let opts = SolverOptions::default();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    // symmetry and conservation of the diffusion operator
    let mut symmetric = true;
    let mut conservative = true;
    for dim in [1, 2, 2] {
        let m = random_trig_medium(&mut rng, dim);
        let g = Grid::uniform(m.cell(), if dim == 1 { 64 } else { 16 }).unwrap();
        let op = assemble_div_operator(&m, &g, None, None, None).unwrap();
        let n = g.len();
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (mut lu, mut lv) = (vec![0.0; n], vec![0.0; n]);
        op.apply(&u, &mut lu);
        op.apply(&v, &mut lv);
        let scale = dot(&lu, &lu).sqrt() * dot(&v, &v).sqrt();
        symmetric &= (dot(&lu, &v) - dot(&u, &lv)).abs() <= 1e-12 * scale;
        conservative &= lu.iter().sum::<f64>().abs() <= 1e-10 * lu.iter().map(|x| x.abs()).sum::<f64>();
    }

    // positivity of the principal eigenfunction, against a dense eigensolver
    let mut positive = true;
    let mut dense_gap: f64 = 0.0;
    for _ in 0..3 {
        let m = random_trig_medium(&mut rng, 1);
        let g = Grid::uniform(m.cell(), 48).unwrap();
        for state in [State::Zero, State::One] {
            let pair = stability_eigen(&m, &g, state, &opts).unwrap();
            positive &= pair.psi.iter().all(|v| *v > 0.0);
            let op = assemble_div_operator(&m, &g, None, None, Some(state)).unwrap();
            let n = g.len();
            let mut a = DMatrix::zeros(n, n);
            let mut col = vec![0.0; n];
            for j in 0..n {
                let mut unit = vec![0.0; n];
                unit[j] = 1.0;
                op.apply(&unit, &mut col);
                for i in 0..n {
                    a[(i, j)] = col[i];
                }
            }
            let top = SymmetricEigen::new(a).eigenvalues.iter().copied().fold(f64::MIN, f64::max);
            dense_gap = dense_gap.max((pair.lambda + top).abs());
        }
    }

    // concavity of μ ↦ λ(μ)
    let m2 = random_trig_medium(&mut rng, 2);
    let g2 = Grid::uniform(m2.cell(), 16).unwrap();
    let mut concave = true;
    for state in [State::Zero, State::One] {
        let mut warm: Option<Vec<f64>> = None;
        let mut ls = Vec::new();
        for k in -4..=4 {
            let pair = weighted_eigen(&m2, &g2, &[0.6, 0.8], 0.5 * k as f64, state, &opts, warm.as_deref()).unwrap();
            ls.push(pair.lambda);
            warm = Some(pair.psi);
        }
        concave &= ls.windows(3).all(|w| w[0] - 2.0 * w[1] + w[2] <= 1e-8);
    }

    // monotone profile and a speed independent of the initial data
    let p = PulsateParams {
        n_xi: 256,
        ..PulsateParams::default()
    };
    let (s, pf) = pulsating_speed(&m2, &[0.6, 0.8], 0.5, &g2, &p).unwrap();
    let monotone = pf.max_forward_increment() <= 1e-8;
    let alt = PulsateParams {
        initial: InitialProfile::Step,
        initial_speed: 0.5,
        ..p.clone()
    };
    let (s_alt, _) = pulsating_speed(&m2, &[0.6, 0.8], 0.5, &g2, &alt).unwrap();
    let unique = (s.c_star - s_alt.c_star).abs() <= 1e-6;

    // deterministic parallel merge
    let gs = Grid::uniform(m2.cell(), 8).unwrap();
    let one = direction_sweep(&m2, 0.5, 8, &gs, &p, 1).unwrap();
    let many = direction_sweep(&m2, 0.5, 8, &gs, &p, 4).unwrap();
    let merged = one == many;

    verdict(
        10,
        "invariant suite",
        &[
            ("operator symmetric", symmetric),
            ("operator conservative", conservative),
            ("eigenfunctions positive", positive),
            ("dense eigenvalue agreement 1e-8", dense_gap <= 1e-8),
            ("lambda concave in mu", concave),
            ("profile monotone", monotone),
            ("speed independent of initial data", unique),
            ("parallel merge deterministic", merged),
        ],
        &format!(
            "dense gap {dense_gap:.1e}, speeds {:.8} / {:.8}",
            s.c_star, s_alt.c_star
        ),
        start,
        Duration::from_secs(600),
    );
}
