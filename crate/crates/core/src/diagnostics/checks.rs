//! Invariant monitors, refinement verdicts and the exact Riemann oracle.

use crate::burgers::control_from_density;
use crate::driver::Trajectory;
use crate::field::FluidField;
use crate::grid::GridSpec;

use super::CheckRecord;

/// Absolute floor below which changes count as round-off in monotonicity checks.
pub const MONOTONE_FLOOR: f64 = 1e-12;

fn snapshot_mass(traj: &Trajectory) -> Vec<f64> {
    traj.snapshots
        .iter()
        .map(|s| s.moments.mass(&traj.grid))
        .collect()
}

/// Largest relative deviation of the particle mass from its initial value.
/// A run without particles passes with drift 0.
pub fn check_mass(traj: &Trajectory, tol_rel: f64) -> CheckRecord {
    let m = snapshot_mass(traj);
    let formula = "max_n |M(t_n) - M(0)| / M(0), M = sum f dx dv";
    if !(m[0] > 0.0) {
        return CheckRecord::upper("mass", formula, 0.0, tol_rel).detail("no particles");
    }
    let drift = m
        .iter()
        .fold(0.0f64, |a, &mt| a.max((mt - m[0]).abs() / m[0]));
    CheckRecord::upper("mass", formula, drift, tol_rel)
}

/// `E(t) <= (e^{-t} E(0) + 9 M0^3 (1 - e^{-t})) (1 + slack)` at every
/// snapshot and `E(t) <= M0 + 9 M0^3`. `measured` is the largest ratio of
/// energy to its envelope; the cap is reported in the detail.
pub fn check_kinetic_energy(traj: &Trajectory, m0: f64, slack: f64) -> CheckRecord {
    let g = &traj.grid;
    let e: Vec<(f64, f64)> = traj
        .snapshots
        .iter()
        .map(|s| (s.time, s.moments.kinetic_energy(g)))
        .collect();
    let e0 = e[0].1;
    let c = 9.0 * m0 * m0 * m0;
    let cap = m0 + c;
    let mut worst = 0.0f64;
    let mut emax = 0.0f64;
    for &(t, et) in &e {
        let env = (-t).exp() * e0 + c * (1.0 - (-t).exp());
        worst = worst.max(if env > 0.0 {
            et / env
        } else if et > 0.0 {
            f64::INFINITY
        } else {
            0.0
        });
        emax = emax.max(et);
    }
    let mut rec = CheckRecord::upper(
        "kinetic_energy",
        "max_n E(t_n) / (e^{-t} E(0) + 9 M0^3 (1 - e^{-t})), E = sum v^2 f dx dv",
        worst,
        1.0 + slack,
    )
    .detail(format!("max E = {emax}, cap M0 + 9 M0^3 = {cap}"));
    if emax > cap {
        rec.verdict = super::Verdict::Fail;
    }
    rec
}

/// Uniform bounds `max|u - psi| <= 2 M0`, `max|u| <= 3 M0` (each with
/// relative slack) and monotonicity of `max|u - psi| - t (dx + dt_max)`,
/// evaluated on every step record.
pub fn check_max_principle(traj: &Trajectory, m0: f64, slack: f64) -> Vec<CheckRecord> {
    let g = &traj.grid;
    // snapshots are recomputed from stored fields; step records cover the rest
    let mut dev_snap = 0.0f64;
    for s in &traj.snapshots {
        let psi = control_from_density(&s.moments.rho, g).psi;
        for (u, p) in s.u.values.iter().zip(psi.iter()) {
            dev_snap = dev_snap.max((u - p).abs());
        }
    }
    let dev = traj
        .steps
        .iter()
        .fold(dev_snap, |a, s| a.max(s.max_abs_u_minus_psi));
    let umax = traj
        .snapshots
        .iter()
        .fold(traj.max_abs_u(), |a, s| a.max(s.u.max_abs()));
    let dt_max = traj.steps.iter().fold(0.0f64, |a, s| a.max(s.dt));
    let c = g.dx() + dt_max;
    let mut worst_rise = 0.0f64;
    for w in traj.steps.windows(2) {
        let a = w[0].max_abs_u_minus_psi - w[0].time * c;
        let b = w[1].max_abs_u_minus_psi - w[1].time * c;
        worst_rise = worst_rise.max(b - a);
    }
    vec![
        CheckRecord::upper(
            "max_abs_u_minus_psi",
            "max_t |u - psi|_inf",
            dev,
            2.0 * m0 * (1.0 + slack),
        ),
        CheckRecord::upper("max_abs_u", "max_t |u|_inf", umax, 3.0 * m0 * (1.0 + slack)),
        CheckRecord::upper(
            "max_principle_monotone",
            "max_n [g(t_{n+1}) - g(t_n)], g = |u - psi|_inf - t (dx + dt_max)",
            worst_rise,
            MONOTONE_FLOOR,
        ),
    ]
}

/// `sum_i |(rho^{n+1} - rho^n) / dt + D_x j^n| dx` for every pair of
/// consecutive snapshots, with centred `D_x` (one-sided at the ends).
pub fn moment_continuity_residuals(traj: &Trajectory) -> Vec<f64> {
    let g = &traj.grid;
    let n = g.nx();
    traj.snapshots
        .windows(2)
        .map(|w| {
            let dt = w[1].time - w[0].time;
            let (r0, r1, j) = (&w[0].moments.rho, &w[1].moments.rho, &w[0].moments.j);
            let mut acc = 0.0;
            for i in 0..n {
                let (l, r) = (i.saturating_sub(1), (i + 1).min(n - 1));
                let djx = (j[r] - j[l]) / ((r - l) as f64 * g.dx());
                acc += ((r1[i] - r0[i]) / dt + djx).abs();
            }
            acc * g.dx()
        })
        .collect()
}

pub fn check_moment_continuity(traj: &Trajectory) -> CheckRecord {
    let worst = moment_continuity_residuals(traj)
        .into_iter()
        .fold(0.0f64, f64::max);
    CheckRecord::info(
        "moment_continuity",
        "max_n |(rho^{n+1} - rho^n)/dt + D_x j^n|_1",
        worst,
    )
}

pub fn dissipation_budget(traj: &Trajectory) -> CheckRecord {
    CheckRecord::info(
        "dissipation",
        "sum_n eps |D_x u^{n+1}|_2^2 dt_n",
        traj.dissipation,
    )
}

/// Values from an epsilon sweep stay within a factor-`factor` band.
pub fn dissipation_band(values: &[f64], factor: f64) -> CheckRecord {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(0.0f64, f64::max);
    let ratio = if lo > 0.0 {
        hi / lo
    } else if hi == 0.0 {
        1.0
    } else {
        f64::INFINITY
    };
    CheckRecord::upper(
        "dissipation_band",
        "max D / min D across the sweep",
        ratio,
        factor,
    )
}

/// `|values|` strictly decreasing along a refinement sequence, where a level
/// already below [`MONOTONE_FLOOR`] counts as converged.
pub fn refinement_decreasing(name: &str, values: &[f64]) -> CheckRecord {
    let mut worst = 0.0f64;
    for w in values.windows(2) {
        let (a, b) = (w[0].abs(), w[1].abs());
        if b >= MONOTONE_FLOOR && b >= a {
            worst = worst.max(b / a.max(f64::MIN_POSITIVE));
        }
    }
    CheckRecord::upper(
        name,
        "max over levels of |r_{l+1}| / |r_l| where it is >= 1 (0 when decreasing)",
        worst,
        0.0,
    )
    .detail(format!("levels: {values:?}"))
}

/// Observed orders `log2(e_l / e_{l+1})` for a sequence halving the mesh.
pub fn fitted_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Entropy solution of `u_t + (u^2/2)_x = 0` with Riemann data at `x0`.
pub fn riemann_exact(u_l: f64, u_r: f64, x0: f64, x: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return if x < x0 { u_l } else { u_r };
    }
    let xi = (x - x0) / t;
    if u_l > u_r {
        let s = 0.5 * (u_l + u_r);
        if xi < s {
            u_l
        } else {
            u_r
        }
    } else if xi <= u_l {
        u_l
    } else if xi >= u_r {
        u_r
    } else {
        xi
    }
}

/// First position (from the left) where `u` crosses `level`, linearly
/// interpolated between cell centres.
pub fn half_max_position(u: &FluidField, grid: &GridSpec, level: f64) -> Option<f64> {
    let v = &u.values;
    (0..v.len() - 1).find_map(|i| {
        let (a, b) = (v[i] - level, v[i + 1] - level);
        if a == 0.0 {
            Some(grid.x(i))
        } else if a * b < 0.0 {
            Some(grid.x(i) + grid.dx() * a / (a - b))
        } else {
            None
        }
    })
}

/// Half-max location of the final state against the Rankine-Hugoniot
/// position, with bound `2 dx + 3 sqrt(eps)`.
pub fn check_shock_location(traj: &Trajectory, u_l: f64, u_r: f64, x0: f64) -> CheckRecord {
    let g = &traj.grid;
    let s = traj.final_snapshot();
    let exact = x0 + 0.5 * (u_l + u_r) * s.time;
    let tol = 2.0 * g.dx() + 3.0 * g.epsilon().sqrt();
    let found = half_max_position(&s.u, g, 0.5 * (u_l + u_r));
    let err = found.map_or(f64::INFINITY, |x| (x - exact).abs());
    CheckRecord::upper(
        "shock_position",
        "|x_half(t_end) - (x0 + t_end (u_l + u_r)/2)|",
        err,
        tol,
    )
    .detail(format!("half-max at {found:?}, exact {exact}"))
}

/// `L1` distance of the final state to the exact Riemann solution.
pub fn check_rarefaction(traj: &Trajectory, u_l: f64, u_r: f64, x0: f64, tol: f64) -> CheckRecord {
    let g = &traj.grid;
    let s = traj.final_snapshot();
    let err: f64 = g
        .xs()
        .zip(s.u.values.iter())
        .map(|(x, u)| (u - riemann_exact(u_l, u_r, x0, x, s.time)).abs())
        .sum::<f64>()
        * g.dx();
    CheckRecord::upper("riemann_l1", "|u(t_end) - u_exact(t_end)|_1", err, tol)
}
