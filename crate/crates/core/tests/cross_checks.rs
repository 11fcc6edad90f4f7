use frontlab::discretize::Grid;
use frontlab::homogenize::AveragedReaction;
use frontlab::media::{build_medium, Cell, DiffusionSpec, Medium, MediumConfig, ReactionSpec, TrigSeries};
use frontlab::pulsate::{direct_simulation, epsilon_ladder, pulsating_speed, DirectParams, PulsateParams};
use frontlab::terrace::{terrace_decompose, TerraceParams};

fn quintic(u: f64) -> f64 {
    u * (u - 0.125) * (u - 0.25) * (u - 0.375) * (1.0 - u)
}

/// Front speed of `φ'' + cφ' + f(φ) = 0` from 1 to 0 by shooting along the
/// unstable manifold of 1 and bisecting on `c`.
fn shooting_speed(f: impl Fn(f64) -> f64, df1: f64) -> f64 {
    let overshoots = |c: f64| -> bool {
        let lam = 0.5 * (-c + (c * c - 4.0 * df1).sqrt());
        let (mut p, mut q) = (1.0 - 1e-7, -1e-7 * lam);
        let h = 1e-3;
        let rhs = |p: f64, q: f64| (q, -c * q - f(p));
        for _ in 0..2_000_000 {
            let k1 = rhs(p, q);
            let k2 = rhs(p + 0.5 * h * k1.0, q + 0.5 * h * k1.1);
            let k3 = rhs(p + 0.5 * h * k2.0, q + 0.5 * h * k2.1);
            let k4 = rhs(p + h * k3.0, q + h * k3.1);
            p += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            q += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            if p < 0.0 {
                return true;
            }
            if q > 0.0 {
                return false;
            }
        }
        false
    };
    let (mut lo, mut hi) = (0.0, 2.0);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if overshoots(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn quintic_step_data_form_one_front() {
    let ar = AveragedReaction::from_fn(quintic, 1025).unwrap();
    let d = terrace_decompose(1.0, &ar, &TerraceParams::default()).unwrap();
    assert_eq!(d.platforms, vec![1.0, 0.0]);
    // f'(1) = -(7/8)(3/4)(5/8)
    let oracle = shooting_speed(quintic, -0.875 * 0.75 * 0.625);
    assert!((d.speeds[0] - oracle).abs() <= 1e-3, "{} {oracle}", d.speeds[0]);
}

#[test]
fn two_hump_nonlinearity_splits_into_a_terrace() {
    // cubic humps on [0, 1/2] and [1/2, 1] with closed-form speeds 0.8 and 0.2
    let f = |u: f64| {
        if u < 0.5 {
            8.0 * u * (u - 0.05) * (0.5 - u)
        } else {
            8.0 * (u - 0.5) * (u - 0.7) * (1.0 - u)
        }
    };
    let ar = AveragedReaction::from_fn(f, 1025).unwrap();
    let d = terrace_decompose(1.0, &ar, &TerraceParams::default()).unwrap();
    assert_eq!(d.platforms.len(), 3);
    assert!((d.platforms[1] - 0.5).abs() <= 1e-9);
    assert!((d.speeds[0] - 0.2).abs() <= 1e-3 && (d.speeds[1] - 0.8).abs() <= 1e-3, "{:?}", d.speeds);
}

fn laminate() -> Medium {
    build_medium(&MediumConfig {
        cell: Cell::unit(2),
        diffusion: DiffusionSpec::Laminate {
            axis: 0,
            profile: "2, 1*cos1(1)".parse::<TrigSeries>().unwrap().into(),
        },
        reaction: ReactionSpec::cubic(0.3),
    })
    .unwrap()
}

#[test]
fn laminate_pinned_and_direct_speeds_agree() {
    let m = laminate();
    let g = Grid::uniform(m.cell(), 16).unwrap();
    let p = PulsateParams {
        n_xi: 256,
        ..PulsateParams::default()
    };
    let direct = DirectParams {
        n_per_cell: 16,
        cells: 60,
        t_end: 60.0,
        ..DirectParams::default()
    };
    for axis in 0..2 {
        let mut e = [0.0; 2];
        e[axis] = 1.0;
        let pinned = pulsating_speed(&m, &e, 0.5, &g, &p).unwrap().0.c_star;
        let run = direct_simulation(&m, axis, 1.0, 0.5, &direct).unwrap().measurement.c_star;
        assert!((pinned - run).abs() <= 0.02 * pinned, "axis {axis}: {pinned} {run}");
    }
}

#[test]
fn even_laminate_speeds_are_reflection_symmetric() {
    let m = laminate();
    let g = Grid::uniform(m.cell(), 16).unwrap();
    let p = PulsateParams {
        n_xi: 256,
        ..PulsateParams::default()
    };
    let e = [0.8, 0.6];
    let fwd = pulsating_speed(&m, &e, 0.5, &g, &p).unwrap().0.c_star;
    let back = pulsating_speed(&m, &[-0.8, -0.6], 0.5, &g, &p).unwrap().0.c_star;
    let mirror = pulsating_speed(&m, &[-0.8, 0.6], 0.5, &g, &p).unwrap().0.c_star;
    assert!((fwd - back).abs() <= 1e-6 && (fwd - mirror).abs() <= 1e-6, "{fwd} {back} {mirror}");
}

#[test]
fn laminate_speeds_approach_the_homogenized_speed() {
    let m = laminate();
    let g = Grid::uniform(m.cell(), 16).unwrap();
    let p = PulsateParams {
        n_xi: 256,
        ..PulsateParams::default()
    };
    let t = epsilon_ladder(&m, &[1.0, 0.0], &[0.4, 0.2, 0.1, 0.05], &g, &p, 1).unwrap();
    // across the layers A0 is the harmonic mean of 2 + cos, √3
    assert!((t.a0 - 3f64.sqrt()).abs() <= 1e-8, "{}", t.a0);
    let speeds: Vec<f64> = t.rows.iter().map(|r| r.result.as_ref().unwrap().c_star).collect();
    let steps: Vec<f64> = speeds.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    // second order in l
    assert!(steps.windows(2).all(|w| w[1] < w[0] / 3.0), "{speeds:?}");
    assert!((speeds[3] - t.c0).abs() <= 1e-3 * t.c0);
    let h1: Vec<f64> = t.rows.iter().map(|r| r.result.as_ref().unwrap().h1_gap).collect();
    assert!(h1.windows(2).all(|w| w[1] < w[0]), "{h1:?}");
}
