use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Result};
use bvlasov_core::diagnostics::{
    check_mass, evaluate, time_series_csv, CheckRecord, DiagnosticsReport, ReportOptions,
    RiemannStates,
};
use bvlasov_core::{
    cfl_dt, epsilon_sweep, exact_const_u, l1_distance, mollified_initial_data, picard_solve, run,
    vlasov_step, Error, FluidField, InitialData, KineticField, ScenarioConfig, Trajectory,
};

use crate::config;
use crate::output::{fluid_csv, kinetic_csv, OutputDir, RunManifest, Timing, Versions};

pub const PICARD_TOL: f64 = 1e-10;
pub const PICARD_MAX_ITER: usize = 60;
/// Agreement bound `factor * (dx^2 + dt)` between the Picard and
/// time-stepping solutions.
pub const PICARD_AGREEMENT_FACTOR: f64 = 10.0;
pub const ORACLE_MASS_TOL: f64 = 1e-6;
/// The closed-form comparison stops here so that particles of long runs do
/// not leave the box, which would show up as truncation rather than scheme error.
pub const ORACLE_HORIZON: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    DiagnosticFailure,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::DiagnosticFailure => 2,
        }
    }

    fn from_pass(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::DiagnosticFailure
        }
    }
}

fn manifest(command: &str, cfg: &ScenarioConfig, start: Instant, status: Status) -> RunManifest {
    RunManifest {
        command: command.to_string(),
        config: cfg.clone(),
        epsilons: None,
        versions: Versions {
            bvlasov: env!("CARGO_PKG_VERSION"),
            manifest_format: 1,
        },
        threads: rayon::current_num_threads(),
        timing: Timing {
            wall_seconds: start.elapsed().as_secs_f64(),
        },
        exit_code: status.code(),
        files: Vec::new(),
    }
}

fn report_options(cfg: &ScenarioConfig) -> ReportOptions {
    let mut opts = ReportOptions::new(cfg.m0);
    if let InitialData::Riemann {
        u_left,
        u_right,
        x0,
        particles: None,
    } = cfg.initial
    {
        if u_left != u_right {
            opts.riemann = Some(RiemannStates {
                u_left,
                u_right,
                x0,
            });
        }
    }
    opts
}

fn write_trajectory(dir: &mut OutputDir, traj: &Trajectory) -> Result<()> {
    dir.write("u.csv", fluid_csv(traj).as_bytes())?;
    if let Some(f) = kinetic_csv(traj) {
        dir.write("f.csv", f.as_bytes())?;
    }
    dir.write("time_series.csv", time_series_csv(&traj.steps).as_bytes())
}

fn summarize(report: &DiagnosticsReport) {
    for r in &report.records {
        log::info!("{:<24} {:>12.4e} {:?}", r.name, r.measured, r.verdict);
    }
    for w in &report.warnings {
        log::warn!("{w}");
    }
    for r in report.records.iter().filter(|r| r.failed()) {
        eprintln!(
            "diagnostic failed: {} = {:e} (tolerance {:?}) {}",
            r.name,
            r.measured,
            r.tolerance,
            r.detail.as_deref().unwrap_or("")
        );
    }
}

pub fn cmd_run(config_path: &Path, out: &Path) -> Result<Status> {
    let start = Instant::now();
    let cfg = config::load(config_path)?;
    log::info!(
        "running {} ({} x {}, eps = {})",
        cfg.name,
        cfg.grid.nx(),
        cfg.grid.nv(),
        cfg.grid.epsilon()
    );
    let traj = run(&cfg)?;
    let report = evaluate(&cfg.name, &traj, &report_options(&cfg))?;
    summarize(&report);

    let mut dir = OutputDir::create(out)?;
    write_trajectory(&mut dir, &traj)?;
    dir.write_json("diagnostics.json", &report)?;
    let status = Status::from_pass(report.passed());
    dir.finish(manifest("run", &cfg, start, status))?;
    Ok(status)
}

pub fn cmd_sweep(config_path: &Path, eps: &[f64], out: &Path) -> Result<Status> {
    let start = Instant::now();
    let cfg = config::load(config_path)?;
    let rep = epsilon_sweep(&cfg, eps)?;
    for (e, d) in rep.epsilons.windows(2).zip(&rep.distances) {
        log::info!("|u({}) - u({})|_1 = {d:e}", e[0], e[1]);
    }

    let mut csv = String::from("epsilon_coarse,epsilon_fine,l1_u,l1_rho\n");
    for (k, (d, dm)) in rep.distances.iter().zip(&rep.moment_distances).enumerate() {
        let _ = writeln!(
            csv,
            "{:?},{:?},{d:?},{dm:?}",
            rep.epsilons[k],
            rep.epsilons[k + 1]
        );
    }
    let mut dir = OutputDir::create(out)?;
    dir.write_json("convergence.json", &rep)?;
    dir.write("distances.csv", csv.as_bytes())?;
    let status = Status::from_pass(rep.consistent_with_convergence);
    if status != Status::Pass {
        eprintln!(
            "sweep distances are not consistent with convergence: {:?}",
            rep.distances
        );
    }
    let mut m = manifest("sweep", &cfg, start, status);
    m.epsilons = Some(eps.to_vec());
    dir.finish(m)?;
    Ok(status)
}

/// Relative `L1` error of the scheme against the closed form for `u = 0`,
/// and the mass drift of the closed-form trajectory itself, on
/// `[0, min(t_end, ORACLE_HORIZON)]`.
fn vlasov_oracle_records(cfg: &ScenarioConfig) -> Result<Vec<CheckRecord>> {
    let horizon = cfg.grid.t_end().min(ORACLE_HORIZON);
    let g = &cfg.grid.with_t_end(horizon)?;
    let p = cfg.initial.profiles(g);
    let f0 = |x: f64, v: f64| (p.f0)(x, v);
    let u = FluidField::zeros(g);
    let steps = (g.t_end() / cfl_dt(&u, g)).ceil().max(1.0) as usize;
    let dt = g.t_end() / steps as f64;
    let mut f = KineticField::from_fn(g, f0);
    for _ in 0..steps {
        f = vlasov_step(&f, &u, dt, g);
    }
    let exact = exact_const_u(f0, 0.0, g.t_end(), g);
    let err = (&f.values - &exact.values).mapv(f64::abs).sum() * g.dx() * g.dv();
    let scale = exact.mass(g);
    let rel = if scale > 0.0 { err / scale } else { err };

    let states = (0..=10)
        .map(|k| {
            let t = g.t_end() * k as f64 / 10.0;
            let mut z = FluidField::zeros(g);
            z.time = t;
            (z, exact_const_u(f0, 0.0, t, g))
        })
        .collect();
    let oracle = Trajectory::from_states(g, cfg.m0, states)?;
    let mut mass = check_mass(&oracle, ORACLE_MASS_TOL);
    mass.name = "vlasov_oracle_mass".into();
    Ok(vec![
        CheckRecord::info(
            "vlasov_oracle_l1",
            "|f_h(T) - f_exact(T)|_1 / |f_exact(T)|_1 with u = 0, T = min(t_end, 0.5)",
            rel,
        ),
        mass,
    ])
}

pub fn cmd_verify(config_path: &Path, out: &Path) -> Result<Status> {
    let start = Instant::now();
    let cfg = config::load(config_path)?;
    if !cfg.initial.is_smooth() {
        bail!(
            "verify needs smooth initial data; {:?} has a discontinuous velocity",
            cfg.name
        );
    }
    let g = &cfg.grid;
    let traj = run(&cfg)?;
    let mut report = evaluate(&cfg.name, &traj, &report_options(&cfg))?;

    let p = cfg.initial.profiles(g);
    let (u0, f0) = mollified_initial_data(&*p.u0, &*p.f0, g.epsilon(), g)?;
    match picard_solve(&u0, &f0, g, g.t_end(), PICARD_TOL, PICARD_MAX_ITER) {
        Ok(sol) => {
            let ratio = sol.final_ratio().unwrap_or(0.0);
            let mut contraction = CheckRecord::upper(
                "picard_contraction",
                "final ratio |u_k - u_{k-1}| / |u_{k-1} - u_{k-2}|",
                ratio,
                1.0,
            )
            .detail(format!(
                "{} iterations, converged = {}",
                sol.iterations, sol.converged
            ));
            if !sol.converged {
                contraction.verdict = bvlasov_core::Verdict::Fail;
            }
            report.records.push(contraction);
            let dt = traj.steps.iter().map(|s| s.dt).fold(0.0, f64::max);
            let dist = l1_distance(&sol.u, &traj.final_snapshot().u, g)?;
            report.records.push(CheckRecord::upper(
                "picard_vs_run",
                "|u_picard(t_end) - u_run(t_end)|_1 <= 10 (dx^2 + max dt)",
                dist,
                PICARD_AGREEMENT_FACTOR * (g.dx() * g.dx() + dt),
            ));
        }
        Err(Error::NoContraction { ratios }) => {
            let last = ratios.last().copied().unwrap_or(f64::INFINITY);
            eprintln!(
                "picard iteration is not contracting on [0, {}]: ratios {ratios:?}",
                g.t_end()
            );
            report.records.push(
                CheckRecord::upper("picard_contraction", "final contraction ratio", last, 1.0)
                    .detail(format!("not contracting, ratios {ratios:?}")),
            );
        }
        Err(e) => return Err(e.into()),
    }
    report.records.extend(vlasov_oracle_records(&cfg)?);
    summarize(&report);

    let mut dir = OutputDir::create(out)?;
    write_trajectory(&mut dir, &traj)?;
    dir.write_json("diagnostics.json", &report)?;
    let status = Status::from_pass(report.passed());
    dir.finish(manifest("verify", &cfg, start, status))?;
    Ok(status)
}
