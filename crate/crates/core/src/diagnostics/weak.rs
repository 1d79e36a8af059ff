//! Weak-form and entropy residuals evaluated on stored snapshots: midpoint
//! rule in `x` (and `v`), trapezoid rule in `t`.

use crate::burgers::EntropyPair;
use crate::driver::{Snapshot, Trajectory};
use crate::error::{Error, Result};
use crate::grid::GridSpec;

use super::test_function::{TestFunction, TestKind};

/// Largest snapshot gap allowed inside the test function's support, as a
/// fraction of its temporal radius.
pub const CADENCE_FRACTION: f64 = 0.25;

/// Check support and snapshot cadence; returns the snapshot index range
/// whose intervals cover the temporal support.
fn prepare(traj: &Trajectory, phi: &TestFunction, kind: TestKind) -> Result<(usize, usize)> {
    if phi.kind != kind {
        return Err(Error::InvalidTestFunction(format!(
            "expected a {kind:?} test function, got {:?}",
            phi.kind
        )));
    }
    let t_end = traj.final_snapshot().time;
    phi.validate(&traj.grid, t_end)?;
    if traj.snapshots[0].time != 0.0 {
        return Err(Error::Precondition("trajectory must start at t = 0".into()));
    }
    let (lo, hi) = phi.t_support();
    let times = traj.times();
    let first = times.partition_point(|&t| t <= lo).saturating_sub(1);
    let last = times.partition_point(|&t| t < hi).min(times.len() - 1);
    let limit = CADENCE_FRACTION * phi.t_radius;
    for w in times[first..=last].windows(2) {
        if w[1] - w[0] > limit * (1.0 + 1e-12) {
            return Err(Error::InvalidTestFunction(format!(
                "snapshot gap {} exceeds {limit} (a quarter of the temporal radius)",
                w[1] - w[0]
            )));
        }
    }
    Ok((first, last))
}

/// Trapezoid rule over snapshots `first..=last` of a per-snapshot integral.
fn trapezoid(
    snaps: &[Snapshot],
    first: usize,
    last: usize,
    mut per: impl FnMut(&Snapshot) -> Result<f64>,
) -> Result<f64> {
    let mut acc = 0.0;
    let mut prev = per(&snaps[first])?;
    for n in first + 1..=last {
        let cur = per(&snaps[n])?;
        acc += 0.5 * (prev + cur) * (snaps[n].time - snaps[n - 1].time);
        prev = cur;
    }
    Ok(acc)
}

/// Cells whose centres fall inside `[c - r, c + r]`.
fn x_range(grid: &GridSpec, c: f64, r: f64) -> std::ops::Range<usize> {
    let lo = ((c - r - grid.x_min()) / grid.dx() - 0.5).floor().max(0.0) as usize;
    let hi = (((c + r - grid.x_min()) / grid.dx() - 0.5).ceil() as usize + 1).min(grid.nx());
    lo..hi
}

/// Fluid-side integral `sum_i g(i, phi-jet) dx` at one snapshot.
fn x_integral(
    grid: &GridSpec,
    phi: &TestFunction,
    s: &Snapshot,
    g: impl Fn(usize, &super::test_function::Jet) -> f64,
) -> f64 {
    let mut acc = 0.0;
    for i in x_range(grid, phi.x_center, phi.x_radius) {
        let jet = phi.jet(grid.x(i), 0.0, s.time);
        if jet.value != 0.0 || jet.dx != 0.0 || jet.dt != 0.0 {
            acc += g(i, &jet);
        }
    }
    acc * grid.dx()
}

/// `int phi(x, 0) u0 dx + int int (u phi_t + u^2/2 phi_x + phi (j - u rho)) dx dt`.
pub fn weak_residual_burgers(traj: &Trajectory, phi: &TestFunction) -> Result<f64> {
    let (first, last) = prepare(traj, phi, TestKind::Xt)?;
    let grid = &traj.grid;
    let s0 = &traj.snapshots[0];
    let initial = x_integral(grid, phi, s0, |i, jet| jet.value * s0.u.values[i]);
    let body = trapezoid(&traj.snapshots, first, last, |s| {
        Ok(x_integral(grid, phi, s, |i, jet| {
            let u = s.u.values[i];
            let drag = s.moments.j[i] - u * s.moments.rho[i];
            u * jet.dt + 0.5 * u * u * jet.dx + jet.value * drag
        }))
    })?;
    Ok(initial + body)
}

/// `int int eta(u0) phi(x, 0) + int int (eta(u) phi_t + q(u) phi_x - phi eta'(u) (u rho - j))`.
///
/// Nonnegative for an entropy solution and `phi >= 0`; `phi` is rejected when
/// any sampled value is negative.
pub fn entropy_inequality_residual(
    traj: &Trajectory,
    pair: EntropyPair,
    phi: &TestFunction,
) -> Result<f64> {
    if phi.amplitude < 0.0 {
        return Err(Error::InvalidTestFunction(format!(
            "entropy test functions must be nonnegative, amplitude is {}",
            phi.amplitude
        )));
    }
    let (first, last) = prepare(traj, phi, TestKind::Xt)?;
    let grid = &traj.grid;
    let s0 = &traj.snapshots[0];
    let initial = x_integral(grid, phi, s0, |i, jet| jet.value * pair.eta(s0.u.values[i]));
    let body = trapezoid(&traj.snapshots, first, last, |s| {
        Ok(x_integral(grid, phi, s, |i, jet| {
            let u = s.u.values[i];
            let source = u * s.moments.rho[i] - s.moments.j[i];
            pair.eta(u) * jet.dt + pair.q(u) * jet.dx - jet.value * pair.eta_prime(u) * source
        }))
    })?;
    Ok(initial + body)
}

/// `int int psi(x, v, 0) f0 + int int int f (psi_t + v psi_x + (u - v) psi_v)`.
pub fn weak_residual_vlasov(traj: &Trajectory, psi: &TestFunction) -> Result<f64> {
    let (first, last) = prepare(traj, psi, TestKind::Xvt)?;
    if traj.snapshots.iter().any(|s| s.f.is_none()) {
        return Err(Error::Precondition(
            "the Vlasov residual needs stored kinetic snapshots".into(),
        ));
    }
    let grid = &traj.grid;
    let ks: Vec<usize> = (0..grid.nv())
        .filter(|&k| (grid.v(k) - psi.v_center).abs() < psi.v_radius + grid.dv())
        .collect();
    let phase = |s: &Snapshot, initial: bool| -> f64 {
        let f = s.f.as_ref().expect("checked above");
        let mut acc = 0.0;
        for i in x_range(grid, psi.x_center, psi.x_radius) {
            let (x, u) = (grid.x(i), s.u.values[i]);
            for &k in &ks {
                let fv = f.values[[i, k]];
                if fv == 0.0 {
                    continue;
                }
                let v = grid.v(k);
                let jet = psi.jet(x, v, s.time);
                acc += if initial {
                    jet.value * fv
                } else {
                    fv * (jet.dt + v * jet.dx + (u - v) * jet.dv)
                };
            }
        }
        acc * grid.dx() * grid.dv()
    };
    let initial = phase(&traj.snapshots[0], true);
    let body = trapezoid(&traj.snapshots, first, last, |s| Ok(phase(s, false)))?;
    Ok(initial + body)
}
