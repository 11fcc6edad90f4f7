//! Command dispatch. Solves run here; files are written by [`persist`].

use std::path::Path;
use std::time::Instant;

use frontlab::discretize::Grid;
use frontlab::homogenize::{average_reaction, solve_cell};
use frontlab::media::{check_assumption_a3, Medium};
use frontlab::pulsate::{
    direct_simulation, direction_sweep, epsilon_ladder, measure_decay, pulsating_speed, sub_super_params,
    verify_subsupersolution, CheckGrid, DirectParams, ProfileFrame, SpeedMeasurement, SpeedStatus,
};
use frontlab::spectral::{decay_roots, weighted_eigen, RootOptions, State};
use frontlab::terrace::{classify_conditions, terrace_decompose, TerraceParams, WaveParams};

use crate::config::RunConfig;
use crate::results::{append_rows, Profile, ResultRow, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Eigen,
    Cell,
    Terrace,
    Speed,
    Decay,
    SweepDir,
    LadderL,
    VerifySubsol,
    DirectSim,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eigen => "eigen",
            Command::Cell => "cell",
            Command::Terrace => "terrace",
            Command::Speed => "speed",
            Command::Decay => "decay",
            Command::SweepDir => "sweep-dir",
            Command::LadderL => "ladder-l",
            Command::VerifySubsol => "verify-subsol",
            Command::DirectSim => "direct-sim",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outcome {
    pub rows: Vec<ResultRow>,
    pub profiles: Vec<Profile>,
    /// Human-readable summary lines.
    pub report: Vec<String>,
}

impl Outcome {
    /// 0 when every row is ok or stationary, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if !self.rows.is_empty() && self.rows.iter().all(|r| r.status != Status::Failed) {
            0
        } else {
            1
        }
    }
}

/// Angle of `e` in degrees in `[0, 360)`; `0` or `180` on the line.
pub fn angle_deg(e: &[f64]) -> f64 {
    let a = if e.len() == 1 {
        if e[0] > 0.0 {
            0.0
        } else {
            180.0
        }
    } else {
        e[1].atan2(e[0]).to_degrees()
    };
    if a < 0.0 {
        a + 360.0
    } else {
        a
    }
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    cmd: Command,
    start: Instant,
    out: Outcome,
}

impl Ctx<'_> {
    fn id(&self) -> String {
        format!("{}-{}-{:03}", self.cmd.name(), self.cfg.medium_hash, self.out.rows.len())
    }

    fn push(&mut self, angle: Option<f64>, l: Option<f64>, c_star: Option<f64>, residual: Option<f64>, status: Status) -> String {
        let id = self.id();
        self.out.rows.push(ResultRow {
            experiment_id: id.clone(),
            command: self.cmd.name().into(),
            medium_hash: self.cfg.medium_hash.clone(),
            angle_deg: angle,
            l,
            c_star,
            residual,
            wall_ms: self.start.elapsed().as_millis() as u64,
            status,
        });
        id
    }

    fn fail(&mut self, angle: Option<f64>, l: Option<f64>, err: impl std::fmt::Display) {
        let id = self.push(angle, l, None, None, Status::Failed);
        self.out.report.push(format!("{id}: {err}"));
    }

    fn frame_profile(&mut self, id: String, pf: &ProfileFrame) {
        if !self.cfg.output.profiles {
            return;
        }
        let ny = pf.grid.len();
        let dim = pf.grid.dim();
        let columns = if dim == 1 {
            vec!["xi", "y1", "Phi"]
        } else {
            vec!["xi", "y1", "y2", "Phi"]
        };
        let mut rows = Vec::with_capacity(pf.phi.len());
        for (i, x) in pf.xi.iter().enumerate() {
            for k in 0..ny {
                let y = pf.grid.point(k);
                let mut r = vec![*x];
                r.extend_from_slice(&y[..dim]);
                r.push(pf.phi[i * ny + k]);
                rows.push(r);
            }
        }
        self.out.profiles.push(Profile { id, columns, rows });
    }

    fn speed_row(&mut self, angle: f64, l: f64, s: &SpeedMeasurement) -> String {
        let status = match s.status {
            SpeedStatus::Converged => Status::Ok,
            SpeedStatus::Stationary => Status::Stationary,
        };
        self.push(Some(angle), Some(l), Some(s.c_star), Some(s.residual), status)
    }
}

/// Runs `cmd` with `workers` threads for the parallel sweeps.
pub fn run_command(cfg: &RunConfig, cmd: Command, workers: usize) -> Outcome {
    let mut cx = Ctx {
        cfg,
        cmd,
        start: Instant::now(),
        out: Outcome::default(),
    };
    let m = &cfg.medium;
    let grid = match Grid::uniform(m.cell(), cfg.solver.cell_n) {
        Ok(g) => g,
        Err(err) => {
            cx.fail(None, None, err);
            return cx.out;
        }
    };
    match cmd {
        Command::Eigen => eigen(&mut cx, m, &grid),
        Command::Cell => cell(&mut cx, m, &grid),
        Command::Terrace => terrace(&mut cx, m, &grid),
        Command::Speed => speed(&mut cx, m, &grid),
        Command::Decay => decay(&mut cx, m, &grid),
        Command::SweepDir => sweep(&mut cx, m, &grid, workers),
        Command::LadderL => ladder(&mut cx, m, &grid, workers),
        Command::VerifySubsol => subsol(&mut cx, m, &grid),
        Command::DirectSim => direct(&mut cx, m),
    }
    cx.out
}

fn eigen(cx: &mut Ctx, m: &Medium, g: &Grid) {
    let ex = &cx.cfg.experiment;
    let (e, l) = (ex.direction.clone(), ex.l);
    let (ms, gs) = (m.scaled(l), g.scaled(l));
    let a3 = check_assumption_a3(m, ex.gamma0);
    cx.out.report.push(format!(
        "stability of 0 and 1 with gamma0 = {}: {} (max f_u(x,0) = {:.6e}, max f_u(x,1) = {:.6e})",
        a3.gamma0, a3.holds, a3.max_du_at_zero, a3.max_du_at_one
    ));
    for state in [State::Zero, State::One] {
        for &mu in &ex.mu.clone() {
            match weighted_eigen(&ms, &gs, &e, mu, state, &cx.cfg.solver.linear, None) {
                Ok(p) => {
                    let id = cx.push(Some(angle_deg(&e)), Some(l), Some(p.lambda), Some(p.residual), Status::Ok);
                    cx.out.report.push(format!(
                        "{id}: state {} mu {mu} lambda {:.12e} residual {:.3e}",
                        state.value(),
                        p.lambda,
                        p.residual
                    ));
                }
                Err(err) => cx.fail(Some(angle_deg(&e)), Some(l), err),
            }
        }
    }
}

fn cell(cx: &mut Ctx, m: &Medium, g: &Grid) {
    let e = cx.cfg.experiment.direction.clone();
    match solve_cell(m, g, &e, &cx.cfg.solver.linear) {
        Ok(c) => {
            let id = cx.push(Some(angle_deg(&e)), None, Some(c.a0), Some(c.residual), Status::Ok);
            cx.out.report.push(format!(
                "{id}: A0 {:.12e} (energy form {:.12e}), alpha1 {:.6e}, corrector residual {:.3e}",
                c.a0,
                c.a0_energy,
                m.alpha1(),
                c.residual
            ));
        }
        Err(err) => cx.fail(Some(angle_deg(&e)), None, err),
    }
}

fn terrace(cx: &mut Ctx, m: &Medium, g: &Grid) {
    let e = cx.cfg.experiment.direction.clone();
    let angle = Some(angle_deg(&e));
    let a0 = match solve_cell(m, g, &e, &cx.cfg.solver.linear) {
        Ok(c) => c.a0,
        Err(err) => return cx.fail(angle, None, err),
    };
    let ar = average_reaction(m);
    let cond = classify_conditions(&ar);
    cx.out
        .report
        .push(format!("A0 {a0:.12e}; condition {:?}: {}", cond.condition, cond.detail));
    let params = TerraceParams {
        wave: WaveParams {
            n_xi: cx.cfg.solver.wave_n_xi,
            ..WaveParams::default()
        },
        ..TerraceParams::default()
    };
    match terrace_decompose(a0, &ar, &params) {
        Ok(d) => {
            cx.out.report.push(format!("platforms {:?}", d.platforms));
            for (k, w) in d.waves.iter().enumerate() {
                let id = cx.push(angle, None, Some(w.c0), Some(w.residual), Status::Ok);
                cx.out.report.push(format!(
                    "{id}: wave {} -> {} speed {:.12e}",
                    d.platforms[k],
                    d.platforms[k + 1],
                    w.c0
                ));
                if cx.cfg.output.profiles {
                    cx.out.profiles.push(Profile {
                        id,
                        columns: vec!["xi", "Phi"],
                        rows: w.xi.iter().zip(&w.phi0).map(|(x, p)| vec![*x, *p]).collect(),
                    });
                }
            }
        }
        Err(err) => cx.fail(angle, None, err),
    }
}

fn speed(cx: &mut Ctx, m: &Medium, g: &Grid) {
    let ex = &cx.cfg.experiment;
    let (e, l) = (ex.direction.clone(), ex.l);
    let angle = angle_deg(&e);
    match pulsating_speed(m, &e, l, g, &cx.cfg.solver.pulsate) {
        Ok((s, pf)) => {
            let id = cx.speed_row(angle, l, &s);
            cx.out.report.push(format!(
                "{id}: c* {:.12e} ({:?}, {} steps, residual {:.3e})",
                s.c_star, s.status, s.steps, s.residual
            ));
            cx.frame_profile(id, &pf);
        }
        Err(err) => cx.fail(Some(angle), Some(l), err),
    }
}

fn decay(cx: &mut Ctx, m: &Medium, g: &Grid) {
    let ex = &cx.cfg.experiment;
    let (e, l) = (ex.direction.clone(), ex.l);
    let angle = angle_deg(&e);
    let result = pulsating_speed(m, &e, l, g, &cx.cfg.solver.pulsate).and_then(|(s, pf)| {
        let roots = RootOptions {
            eigen: cx.cfg.solver.linear.clone(),
            ..RootOptions::default()
        };
        let de = decay_roots(&m.scaled(l), &g.scaled(l), &e, s.c_star, &roots)?;
        let r = measure_decay(&pf, &de)?;
        Ok((s, pf, de, r))
    });
    match result {
        Ok((s, pf, de, r)) => {
            let err = r.rel_err_right.max(r.rel_err_left);
            let id = cx.push(Some(angle), Some(l), Some(s.c_star), Some(err), Status::Ok);
            cx.out.report.push(format!(
                "{id}: ahead slope {:.6e} vs {:.6e} ({} points), behind slope {:.6e} vs {:.6e} ({} points)",
                r.slope_right, de.mu_minus, r.points_right, r.slope_left, -de.mu_plus, r.points_left
            ));
            cx.frame_profile(id, &pf);
        }
        Err(err) => cx.fail(Some(angle), Some(l), err),
    }
}

fn sweep(cx: &mut Ctx, m: &Medium, g: &Grid, workers: usize) {
    let ex = &cx.cfg.experiment;
    let (l, n) = (ex.l, ex.n_dirs);
    match direction_sweep(m, l, n, g, &cx.cfg.solver.pulsate, workers) {
        Ok(t) => {
            for r in &t.rows {
                let angle = r.angle.to_degrees();
                match &r.result {
                    Ok(s) => {
                        cx.speed_row(angle, l, s);
                    }
                    Err(err) => cx.fail(Some(angle), Some(l), err),
                }
            }
            cx.out.report.push(format!(
                "max adjacent gap {:.6e}; sign of the averaged integral {}; signs agree {}; speed bound {:.6e}",
                t.max_gap, t.integral_sign, t.signs_agree, t.speed_bound
            ));
        }
        Err(err) => cx.fail(None, Some(l), err),
    }
}

fn ladder(cx: &mut Ctx, m: &Medium, g: &Grid, workers: usize) {
    let ex = &cx.cfg.experiment;
    let e = ex.direction.clone();
    let ls = ex.ls.clone();
    let angle = angle_deg(&e);
    match epsilon_ladder(m, &e, &ls, g, &cx.cfg.solver.pulsate, workers) {
        Ok(t) => {
            cx.out
                .report
                .push(format!("homogenized: A0 {:.12e}, c0 {:.12e}", t.a0, t.c0));
            for r in &t.rows {
                match &r.result {
                    Ok(en) => {
                        let id = cx.push(Some(angle), Some(r.l), Some(en.c_star), Some(en.h1_gap), Status::Ok);
                        cx.out.report.push(format!(
                            "{id}: l {} c* {:.12e} speed gap {:.6e} H1 gap {:.6e} shift {:.4e}",
                            r.l, en.c_star, en.speed_gap, en.h1_gap, en.shift
                        ));
                    }
                    Err(err) => cx.fail(Some(angle), Some(r.l), err),
                }
            }
        }
        Err(err) => cx.fail(Some(angle), None, err),
    }
}

fn subsol(cx: &mut Ctx, m: &Medium, g: &Grid) {
    let ex = cx.cfg.experiment.clone();
    let (e, l) = (ex.direction.clone(), ex.l);
    let angle = angle_deg(&e);
    let prepared = pulsating_speed(m, &e, l, g, &cx.cfg.solver.pulsate)
        .and_then(|(_, pf)| sub_super_params(m, &pf, &cx.cfg.solver.linear).map(|p| (pf, p)));
    let (pf, params) = match prepared {
        Ok(v) => v,
        Err(err) => return cx.fail(Some(angle), Some(l), err),
    };
    cx.out.report.push(format!(
        "delta0 {:.6e} mu {:.6e} beta {:.6e} B1 {:.6e} B2 {:.6e} K {:.6e} eps0 {:.6e}",
        params.delta0, params.mu, params.beta, params.b1, params.b2, params.k, params.eps0
    ));
    let coarse = ex.strides[0] as f64;
    for &frac in &ex.eps_fraction {
        let eps = frac * params.eps0;
        let mut constant = None;
        for &stride in &ex.strides {
            let check = CheckGrid {
                stride,
                dt: ex.check_dt * stride as f64 / coarse,
                t_end: None,
                constant,
            };
            match verify_subsupersolution(m, &pf, &params, eps, &ex.shift, &check) {
                Ok(r) => {
                    constant = Some(r.constant);
                    let worst = r.max_sub.max(-r.min_super);
                    let status = if r.holds { Status::Ok } else { Status::Failed };
                    let id = cx.push(Some(angle), Some(l), Some(pf.c), Some(worst), status);
                    cx.out.report.push(format!(
                        "{id}: eps {eps:.6e} h {:.4e} dt {:.4e} max N[u-] {:.6e} min N[u+] {:.6e} baseline {:.6e} tol {:.6e}",
                        r.h, r.dt, r.max_sub, r.min_super, r.baseline, r.tol_fd
                    ));
                }
                Err(err) => cx.fail(Some(angle), Some(l), err),
            }
        }
    }
}

fn direct(cx: &mut Ctx, m: &Medium) {
    let ex = &cx.cfg.experiment;
    let (e, l) = (ex.direction.clone(), ex.l);
    let angle = angle_deg(&e);
    let Some(axis) = e.iter().position(|v| v.abs() == 1.0) else {
        return cx.fail(Some(angle), Some(l), "direct simulation needs a lattice direction");
    };
    let p = DirectParams {
        n_per_cell: ex.n_per_cell,
        cells: ex.cells,
        t_end: ex.t_end,
        dt: ex.dt,
        linear_tol: cx.cfg.solver.linear.cg_tol,
        ..DirectParams::default()
    };
    match direct_simulation(m, axis, e[axis], l, &p) {
        Ok(run) => {
            let s = &run.measurement;
            let id = cx.push(Some(angle), Some(l), Some(s.c_star), Some(s.residual), Status::Ok);
            cx.out.report.push(format!(
                "{id}: fitted speed {:.12e}, R² {:.8}",
                s.c_star,
                s.fit.map_or(f64::NAN, |f| f.r2)
            ));
            if cx.cfg.output.profiles {
                cx.out.profiles.push(Profile {
                    id,
                    columns: vec!["t", "front"],
                    rows: run.track.iter().map(|(t, x)| vec![*t, *x]).collect(),
                });
            }
        }
        Err(err) => cx.fail(Some(angle), Some(l), err),
    }
}

/// Appends the rows to the results table and writes the profiles, both
/// under `out_dir`.
pub fn persist(cfg: &RunConfig, out: &Outcome, out_dir: &Path) -> std::io::Result<()> {
    append_rows(&out_dir.join(&cfg.output.results), &out.rows)?;
    for p in &out.profiles {
        p.write(out_dir)?;
    }
    Ok(())
}
