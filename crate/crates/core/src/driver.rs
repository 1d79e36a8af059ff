//! Regularized initial data, the coupled time loop, and the vanishing
//! viscosity sweep.
//!
//! Each step is a Lie splitting: the Burgers update uses the moments of the
//! current density, then the density is transported with the updated
//! velocity.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::burgers::{
    burgers_step, cfl_dt, control_from_density, entropy_dissipation_increment, BurgersOptions,
};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::field::{FluidField, KineticField, MomentSet};
use crate::grid::GridSpec;
use crate::quadrature::{l1_distance_values, restrict_average};
use crate::vlasov::{moments, support_box, vlasov_step_with, VlasovScheme};

/// Steps shorter than this (from the CFL bound) abort the run.
pub const MIN_DT: f64 = 1e-12;
/// Cells between the particle support and the boundary below which a run is flagged.
pub const BOUNDARY_MARGIN_CELLS: usize = 5;

/// Normalized raised-cosine bump of radius `radius` sampled with spacing `h`.
/// Returns the single weight `[1]` when the radius is below one cell.
pub fn mollifier_weights(radius: f64, h: f64) -> Vec<f64> {
    if radius < h {
        return vec![1.0];
    }
    let m = (radius / h).floor() as isize;
    let mut w: Vec<f64> = (-m..=m)
        .map(|j| {
            let r = (j as f64 * h / radius).abs();
            if r < 1.0 {
                0.5 * (1.0 + (std::f64::consts::PI * r).cos())
            } else {
                0.0
            }
        })
        .collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|a| *a /= s);
    w
}

/// Discrete convolution along one axis of a 1D slice; `extend` supplies
/// values for out-of-range indices.
fn convolve_slice(
    src: &[f64],
    weights: &[f64],
    extend: impl Fn(&[f64], isize) -> f64,
    out: &mut [f64],
) {
    let m = (weights.len() / 2) as isize;
    for (i, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (jj, w) in weights.iter().enumerate() {
            let off = jj as isize - m;
            acc += w * extend(src, i as isize - off);
        }
        *slot = acc;
    }
}

fn clamp_ext(src: &[f64], i: isize) -> f64 {
    src[i.clamp(0, src.len() as isize - 1) as usize]
}

fn zero_ext(src: &[f64], i: isize) -> f64 {
    if i < 0 || i >= src.len() as isize {
        0.0
    } else {
        src[i as usize]
    }
}

/// Sample, cap, truncate and mollify the initial data of the regularized
/// problem.
///
/// `f0` is capped at `eps^{-1/6}` and cut to the diamond
/// `|x| + |v| <= eps^{-1/6}` before both fields are convolved with a
/// raised-cosine mollifier of radius `eps` (in `x` for `u`, in `x` and `v`
/// for `f`).
pub fn mollified_initial_data(
    u0: impl Fn(f64) -> f64,
    f0: impl Fn(f64, f64) -> f64,
    epsilon: f64,
    grid: &GridSpec,
) -> Result<(FluidField, KineticField)> {
    if !(epsilon > 0.0) {
        return Err(Error::Precondition(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let cap = epsilon.powf(-1.0 / 6.0);
    let (nx, nv) = (grid.nx(), grid.nv());

    let u_samples: Vec<f64> = grid.xs().map(&u0).collect();
    if u_samples.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidData("u0 is not finite on the grid".into()));
    }
    let mut f = Array2::zeros((nx, nv));
    for i in 0..nx {
        let x = grid.x(i);
        for k in 0..nv {
            let v = grid.v(k);
            let val = f0(x, v);
            if !(val >= 0.0) || !val.is_finite() {
                return Err(Error::InvalidData(format!(
                    "f0({x}, {v}) = {val}; the density must be finite and nonnegative"
                )));
            }
            f[[i, k]] = if x.abs() + v.abs() <= cap {
                val.min(cap)
            } else {
                0.0
            };
        }
    }

    let wx = mollifier_weights(epsilon, grid.dx());
    let wv = mollifier_weights(epsilon, grid.dv());

    let mut u = vec![0.0; nx];
    convolve_slice(&u_samples, &wx, clamp_ext, &mut u);

    if wx.len() > 1 {
        let mut col_in = vec![0.0; nx];
        let mut col_out = vec![0.0; nx];
        for k in 0..nv {
            for i in 0..nx {
                col_in[i] = f[[i, k]];
            }
            convolve_slice(&col_in, &wx, zero_ext, &mut col_out);
            for i in 0..nx {
                f[[i, k]] = col_out[i];
            }
        }
    }
    if wv.len() > 1 {
        let mut row_out = vec![0.0; nv];
        for i in 0..nx {
            let row: Vec<f64> = f.row(i).to_vec();
            convolve_slice(&row, &wv, zero_ext, &mut row_out);
            f.row_mut(i)
                .assign(&ndarray::ArrayView1::from(&row_out[..]));
        }
    }
    Ok((FluidField::new(u.into(), 0.0), KineticField::new(f, 0.0)))
}

/// Stored state at an output time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub time: f64,
    pub u: FluidField,
    pub moments: MomentSet,
    pub f: Option<KineticField>,
}

/// Scalars recorded after every step (and once for the initial state).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub dt: f64,
    pub mass: f64,
    pub kinetic_energy: f64,
    pub max_abs_u: f64,
    pub max_abs_u_minus_psi: f64,
    /// Accumulated dissipation integral up to `time`.
    pub dissipation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub grid: GridSpec,
    pub m0: f64,
    pub technical_viscosity: bool,
    pub snapshots: Vec<Snapshot>,
    pub steps: Vec<StepRecord>,
    /// Accumulated `int int eps u_x^2 dx dt`.
    pub dissipation: f64,
    pub warnings: Vec<String>,
}

impl Trajectory {
    /// A trajectory assembled from externally produced states, e.g. closed-form
    /// oracle fields. Step records are derived from the snapshots.
    pub fn from_states(
        grid: &GridSpec,
        m0: f64,
        states: Vec<(FluidField, KineticField)>,
    ) -> Result<Trajectory> {
        let mut snapshots = Vec::with_capacity(states.len());
        for (u, f) in states {
            if u.len() != grid.nx() || f.values.dim() != (grid.nx(), grid.nv()) {
                return Err(Error::GridMismatch(
                    "oracle state does not match grid".into(),
                ));
            }
            let m = moments(&f, grid);
            snapshots.push(Snapshot {
                time: u.time,
                u,
                moments: m,
                f: Some(f),
            });
        }
        if snapshots.windows(2).any(|w| w[1].time <= w[0].time) {
            return Err(Error::Precondition(
                "snapshot times must increase strictly".into(),
            ));
        }
        let steps = snapshots
            .iter()
            .enumerate()
            .map(|(n, s)| step_record(n, s.time, 0.0, &s.u, &s.moments, grid))
            .collect();
        Ok(Trajectory {
            grid: grid.clone(),
            m0,
            technical_viscosity: true,
            snapshots,
            steps,
            dissipation: 0.0,
            warnings: Vec::new(),
        })
    }

    pub fn final_snapshot(&self) -> &Snapshot {
        self.snapshots
            .last()
            .expect("trajectory has at least one snapshot")
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    pub fn max_abs_u(&self) -> f64 {
        self.steps.iter().fold(0.0, |m, s| m.max(s.max_abs_u))
    }
}

fn step_record(
    step: usize,
    time: f64,
    dt: f64,
    u: &FluidField,
    m: &MomentSet,
    grid: &GridSpec,
) -> StepRecord {
    let psi = control_from_density(&m.rho, grid).psi;
    let dev = u
        .values
        .iter()
        .zip(psi.iter())
        .fold(0.0f64, |a, (u, p)| a.max((u - p).abs()));
    StepRecord {
        step,
        time,
        dt,
        mass: m.mass(grid),
        kinetic_energy: m.kinetic_energy(grid),
        max_abs_u: u.max_abs(),
        max_abs_u_minus_psi: dev,
        dissipation: 0.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub m0: f64,
    pub output_interval: f64,
    pub store_kinetic: bool,
    pub burgers: BurgersOptions,
    pub vlasov: VlasovScheme,
}

/// Output times `k * interval` below `t_end`, then `t_end` itself.
fn output_times(t_end: f64, interval: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 1usize;
    loop {
        let t = k as f64 * interval;
        if t >= t_end * (1.0 - 1e-12) {
            break;
        }
        out.push(t);
        k += 1;
    }
    if t_end > 0.0 {
        out.push(t_end);
    }
    out
}

/// Run the scenario: regularize the initial data and integrate to `t_end`.
pub fn run(config: &ScenarioConfig) -> Result<Trajectory> {
    config.validate()?;
    let grid = &config.grid;
    let profiles = config.initial.profiles(grid);
    let (u0, f0) = if config.solver.regularize_initial_data {
        mollified_initial_data(&*profiles.u0, &*profiles.f0, grid.epsilon(), grid)?
    } else {
        let f0 = KineticField::from_fn(grid, |x, v| (profiles.f0)(x, v));
        if !f0.is_nonnegative() {
            return Err(Error::InvalidData("f0 has negative samples".into()));
        }
        (FluidField::from_fn(grid, |x| (profiles.u0)(x)), f0)
    };
    let opts = RunOptions {
        m0: config.m0,
        output_interval: config.output_interval(),
        store_kinetic: config.output.store_kinetic,
        burgers: BurgersOptions {
            technical_viscosity: config.solver.technical_viscosity,
        },
        vlasov: config.solver.vlasov_scheme,
    };
    run_from(grid, u0, f0, &opts)
}

/// Integrate prepared discrete initial data to `grid.t_end()`.
pub fn run_from(
    grid: &GridSpec,
    u0: FluidField,
    f0: KineticField,
    opts: &RunOptions,
) -> Result<Trajectory> {
    if u0.len() != grid.nx() || f0.values.dim() != (grid.nx(), grid.nv()) {
        return Err(Error::GridMismatch(
            "initial data does not match grid".into(),
        ));
    }
    let threshold = 1e-12 * f0.max();
    let mut u = FluidField::new(u0.values, 0.0);
    let mut f = KineticField::new(f0.values, 0.0);
    let mut m = moments(&f, grid);
    let mut traj = Trajectory {
        grid: grid.clone(),
        m0: opts.m0,
        technical_viscosity: opts.burgers.technical_viscosity,
        snapshots: Vec::new(),
        steps: vec![step_record(0, 0.0, 0.0, &u, &m, grid)],
        dissipation: 0.0,
        warnings: Vec::new(),
    };
    let mut flagged = false;
    let mut snapshot = |traj: &mut Trajectory, u: &FluidField, f: &KineticField, m: &MomentSet| {
        if !flagged {
            if let Some(b) = support_box(f, threshold, grid) {
                if b.boundary_margin(grid) < BOUNDARY_MARGIN_CELLS {
                    let msg = format!(
                        "particle support within {} cells of the boundary at t = {}; \
                         results past this time are not trusted",
                        b.boundary_margin(grid),
                        u.time
                    );
                    log::warn!("{msg}");
                    traj.warnings.push(msg);
                    flagged = true;
                }
            }
        }
        traj.snapshots.push(Snapshot {
            time: u.time,
            u: u.clone(),
            moments: m.clone(),
            f: opts.store_kinetic.then(|| f.clone()),
        });
    };
    snapshot(&mut traj, &u, &f, &m);

    let mut t = 0.0;
    let mut step = 0usize;
    for target in output_times(grid.t_end(), opts.output_interval) {
        while t < target {
            let dt_cfl = cfl_dt(&u, grid);
            if !(dt_cfl >= MIN_DT) {
                return Err(Error::Aborted {
                    step,
                    time: t,
                    reason: format!("CFL time step collapsed to {dt_cfl:e}"),
                });
            }
            let (dt, hit) = if target - t <= dt_cfl {
                (target - t, true)
            } else {
                (dt_cfl, false)
            };
            step += 1;
            let mut u_new = burgers_step(&u, &m, grid, dt, opts.burgers)?;
            if !u_new.is_finite() {
                return Err(Error::Aborted {
                    step,
                    time: t,
                    reason: "non-finite value in the fluid velocity u".into(),
                });
            }
            let mut f_new = vlasov_step_with(opts.vlasov, &f, &u_new, dt, grid);
            if !f_new.is_finite() {
                return Err(Error::Aborted {
                    step,
                    time: t,
                    reason: "non-finite value in the particle density f".into(),
                });
            }
            t = if hit { target } else { t + dt };
            u_new.time = t;
            f_new.time = t;
            traj.dissipation += entropy_dissipation_increment(&u, &u_new, grid, dt);
            m = moments(&f_new, grid);
            let mut rec = step_record(step, t, dt, &u_new, &m, grid);
            rec.dissipation = traj.dissipation;
            traj.steps.push(rec);
            u = u_new;
            f = f_new;
        }
        snapshot(&mut traj, &u, &f, &m);
    }
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub epsilons: Vec<f64>,
    pub resolutions: Vec<(usize, usize)>,
    /// `|u^{eps_k} - u^{eps_{k+1}}|_1` at `t_end` on the coarsest grid.
    pub distances: Vec<f64>,
    /// Same for the particle density `rho`.
    pub moment_distances: Vec<f64>,
    pub dissipation: Vec<f64>,
    pub max_abs_u: Vec<f64>,
    /// Distances nonincreasing within 10 % slack.
    pub consistent_with_convergence: bool,
}

pub const SWEEP_SLACK: f64 = 0.10;

/// Resolution for `epsilon` keeping `dx` (and `dv`) proportional to
/// `sqrt(epsilon)` relative to the configured grid.
pub fn tandem_resolution(grid: &GridSpec, epsilon: f64) -> (usize, usize) {
    let scale = (grid.epsilon() / epsilon).sqrt();
    let nx = (grid.nx() as f64 * scale).round() as usize;
    let nv = (grid.nv() as f64 * scale).round() as usize;
    (nx.max(4), nv.max(4))
}

/// Run the scenario at each viscosity of a strictly decreasing list,
/// refining the grid in tandem, and compare consecutive final states.
pub fn epsilon_sweep(config: &ScenarioConfig, eps_list: &[f64]) -> Result<ConvergenceReport> {
    if eps_list.len() < 2 {
        return Err(Error::Precondition(format!(
            "epsilon sweep needs at least 2 values, got {}",
            eps_list.len()
        )));
    }
    if eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Precondition(
            "epsilon values must be positive".into(),
        ));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition(format!(
            "epsilon list must be strictly decreasing, got {eps_list:?}"
        )));
    }
    let members: Vec<ScenarioConfig> = eps_list
        .iter()
        .map(|&eps| {
            let (nx, nv) = tandem_resolution(&config.grid, eps);
            let grid = config
                .grid
                .with_resolution(nx, nv)
                .and_then(|g| g.with_epsilon(eps))?;
            let mut c = config.with_grid(grid);
            c.output.store_kinetic = false;
            Ok(c)
        })
        .collect::<Result<_>>()?;
    let runs: Vec<Trajectory> = members
        .par_iter()
        .zip(eps_list.par_iter())
        .map(|(c, &eps)| {
            run(c).map_err(|e| Error::Sweep {
                epsilon: eps,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let coarsest = runs
        .iter()
        .map(|t| &t.grid)
        .min_by_key(|g| g.nx())
        .expect("non-empty")
        .clone();
    let restricted = |t: &Trajectory| -> Result<(ndarray::Array1<f64>, ndarray::Array1<f64>)> {
        let s = t.final_snapshot();
        Ok((
            restrict_average(s.u.values.view(), &t.grid, &coarsest)?,
            restrict_average(s.moments.rho.view(), &t.grid, &coarsest)?,
        ))
    };
    let finals: Vec<_> = runs.iter().map(restricted).collect::<Result<_>>()?;
    let mut distances = Vec::new();
    let mut moment_distances = Vec::new();
    for w in finals.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        distances.push(l1_distance_values(
            a.0.view(),
            b.0.view(),
            coarsest.dx(),
            coarsest.nx(),
        )?);
        moment_distances.push(l1_distance_values(
            a.1.view(),
            b.1.view(),
            coarsest.dx(),
            coarsest.nx(),
        )?);
    }
    let consistent = distances
        .windows(2)
        .all(|w| w[1] <= (1.0 + SWEEP_SLACK) * w[0]);
    Ok(ConvergenceReport {
        epsilons: eps_list.to_vec(),
        resolutions: runs.iter().map(|t| (t.grid.nx(), t.grid.nv())).collect(),
        distances,
        moment_distances,
        dissipation: runs.iter().map(|t| t.dissipation).collect(),
        max_abs_u: runs.iter().map(|t| t.max_abs_u()).collect(),
        consistent_with_convergence: consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{InitialData, ParticleBlob};

    fn grid() -> GridSpec {
        GridSpec::new((-4.0, 4.0), (-2.5, 2.5), 64, 64, 0.02, 0.3, 0.4).unwrap()
    }

    #[test]
    fn mollifier_is_normalized_and_falls_back_to_identity() {
        assert_eq!(mollifier_weights(0.01, 0.1), vec![1.0]);
        let w = mollifier_weights(0.35, 0.1);
        assert_eq!(w.len(), 7);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((w[0] - w[6]).abs() < 1e-15 && w[3] > w[2]);
    }

    #[test]
    fn regularization_at_unit_epsilon() {
        // eps = 1: cap 1 and diamond |x| + |v| <= 1
        let g = GridSpec::new((-3.0, 3.0), (-3.0, 3.0), 6, 6, 1.0, 1.0, 0.5).unwrap();
        let (_, f) = mollified_initial_data(|_| 0.0, |_, _| 5.0, 0.5f64.powi(6), &g).unwrap();
        // eps^{-1/6} = 2 here; only cells with |x| + |v| <= 2 survive, capped at 2
        assert!(f.values.iter().all(|&a| a <= 2.0 + 1e-12));
        let (_, f1) = mollified_initial_data(|_| 0.0, |_, _| 5.0, 1.0, &g).unwrap();
        // dx = 1 = eps, so the mollifier is the identity; cells (+-0.5, +-0.5) survive
        for i in 0..6 {
            for k in 0..6 {
                let inside = g.x(i).abs() + g.v(k).abs() <= 1.0;
                assert_eq!(f1.values[[i, k]], if inside { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn zero_particles_and_lipschitz_velocity() {
        let g = GridSpec::new((-2.0, 2.0), (-1.0, 1.0), 200, 8, 0.1, 1.0, 0.5).unwrap();
        let (u, f) = mollified_initial_data(|x: f64| x.sin(), |_, _| 0.0, 0.1, &g).unwrap();
        assert!(f.values.iter().all(|&a| a == 0.0));
        for i in 3..197 {
            assert!((u.values[i] - g.x(i).sin()).abs() < 0.1);
        }
    }

    #[test]
    fn regularization_only_removes_mass() {
        let g = grid();
        let f0 = |x: f64, v: f64| 3.0 * (-(x * x) / 0.5 - v * v / 0.3).exp();
        let raw = KineticField::from_fn(&g, f0).mass(&g);
        for eps in [0.02, 0.2, 1.0] {
            let (_, f) = mollified_initial_data(|_| 0.0, f0, eps, &g).unwrap();
            assert!(f.mass(&g) <= raw * (1.0 + 1e-12));
            assert!(f.is_nonnegative());
        }
    }

    #[test]
    fn rejects_negative_density() {
        let g = grid();
        let r = mollified_initial_data(|_| 0.0, |x, _| x, 0.1, &g);
        assert!(matches!(r, Err(Error::InvalidData(_))));
    }

    #[test]
    fn zero_data_stays_zero() {
        let init = InitialData::GaussianBump {
            amplitude: 0.0,
            center: 0.0,
            width: 1.0,
            particles: None,
        };
        let traj = run(&ScenarioConfig::new("zero", 1.0, grid(), init)).unwrap();
        for s in &traj.snapshots {
            assert!(s.u.values.iter().all(|&a| a == 0.0));
            assert!(s.f.as_ref().unwrap().values.iter().all(|&a| a == 0.0));
        }
        assert_eq!(traj.final_snapshot().time, 0.3);
    }

    #[test]
    fn snapshots_start_at_zero_and_increase() {
        let init = InitialData::GaussianBump {
            amplitude: 0.5,
            center: 0.0,
            width: 0.5,
            particles: Some(ParticleBlob {
                x_center: 0.0,
                v_center: 0.0,
                x_width: 0.3,
                v_width: 0.25,
                weighted_mass: 0.5,
            }),
        };
        let mut cfg = ScenarioConfig::new("bump", 1.0, grid(), init);
        cfg.output.interval = Some(0.07);
        let traj = run(&cfg).unwrap();
        let times = traj.times();
        assert_eq!(times[0], 0.0);
        assert_eq!(*times.last().unwrap(), 0.3);
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(times.len(), 6);
        for s in &traj.snapshots {
            assert!(s.f.as_ref().unwrap().is_nonnegative());
        }
        // identical configuration, identical trajectory
        assert_eq!(run(&cfg).unwrap(), traj);
    }

    #[test]
    fn sweep_preconditions() {
        let init = InitialData::Riemann {
            u_left: 1.0,
            u_right: 0.0,
            x0: 0.0,
            particles: None,
        };
        let cfg = ScenarioConfig::new("r", 1.0, grid(), init);
        for bad in [&[0.02][..], &[0.02, 0.02], &[0.01, 0.02]] {
            assert!(matches!(
                epsilon_sweep(&cfg, bad),
                Err(Error::Precondition(_))
            ));
        }
    }
}
