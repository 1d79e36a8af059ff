//! Heat-kernel fixed-point iteration for the regularized system on a short
//! time window.
//!
//! Iterate `k` solves the linear problems
//!
//! ```text
//! u_k = G(t) * u0 + int_0^t G(t - s) * (j - u rho)_{k-1} + G_x(t - s) * (eps rho - u^2/2)_{k-1} ds
//! f_k(x, v, t) = f0(X(0), V(0)) e^t,   dX/ds = V, dV/ds = u_{k-1}(X, s) - V
//! ```
//!
//! where `G` is the heat kernel of `u_t = eps u_xx`. This is independent of
//! the finite-volume stepper and serves as a cross-check on smooth data.

use ndarray::Array1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FluidField, KineticField, MomentSet};
use crate::grid::GridSpec;
use crate::quadrature::interp2;
use crate::vlasov::{moments, trace_back};

/// Kernel truncation in standard deviations.
pub const KERNEL_SIGMAS: f64 = 8.0;
/// Midpoint nodes of the Duhamel time quadrature per window.
pub const TIME_NODES: usize = 16;
/// Consecutive ratios `>= 1` that count as non-contraction.
pub const NON_CONTRACTING_RUN: usize = 3;

/// Index of the mirror image of `j` for an even reflection at both ends of
/// `0..n`.
#[inline]
fn reflect(j: isize, n: usize) -> usize {
    let p = 2 * n as isize;
    let r = j.rem_euclid(p);
    if r < n as isize {
        r as usize
    } else {
        (p - 1 - r) as usize
    }
}

/// Apply `out[i] = sum_j w[j] g[i - (j - m)]`, `m = len/2`, with `g` reflected at the ends.
fn convolve_reflect(g: &Array1<f64>, w: &[f64]) -> Array1<f64> {
    let n = g.len();
    let m = (w.len() / 2) as isize;
    let out: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for (jj, wj) in w.iter().enumerate() {
                acc += wj * g[reflect(i as isize - (jj as isize - m), n)];
            }
            acc
        })
        .collect();
    Array1::from(out)
}

/// Gaussian weights of variance `2 eps t` at multiples of `dx`, truncated at
/// eight standard deviations and renormalized to sum 1. `t = 0` gives `[1]`.
pub fn heat_kernel_weights(t: f64, epsilon: f64, dx: f64) -> Vec<f64> {
    let sigma = (2.0 * epsilon * t).sqrt();
    if !(sigma > 0.0) {
        return vec![1.0];
    }
    let m = (KERNEL_SIGMAS * sigma / dx).ceil() as isize;
    let mut w: Vec<f64> = (-m..=m)
        .map(|j| {
            let y = j as f64 * dx;
            (-y * y / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|a| *a /= s);
    w
}

/// Weights of the derivative kernel `dx * G_x(j dx, t)`, antisymmetric and
/// scaled to the first moment `sum_j w_j j dx = -1`, so constants are
/// annihilated and affine data are differentiated exactly. When the kernel
/// is narrower than half a cell the centred difference is returned.
pub fn heat_kernel_dx_weights(t: f64, epsilon: f64, dx: f64) -> Result<Vec<f64>> {
    if !(t > 0.0) {
        return Err(Error::SingularKernel { t });
    }
    let sigma = (2.0 * epsilon * t).sqrt();
    let centred = vec![0.5 / dx, 0.0, -0.5 / dx];
    if sigma < 0.5 * dx {
        return Ok(centred);
    }
    let m = (KERNEL_SIGMAS * sigma / dx).ceil() as isize;
    let mut w: Vec<f64> = (-m..=m)
        .map(|j| {
            let y = j as f64 * dx;
            -y / (sigma * sigma) * (-y * y / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let len = w.len();
    for j in 0..len / 2 {
        let a = 0.5 * (w[j] - w[len - 1 - j]);
        w[j] = a;
        w[len - 1 - j] = -a;
    }
    w[len / 2] = 0.0;
    let moment: f64 = (-m..=m).zip(&w).map(|(j, wj)| wj * j as f64 * dx).sum();
    if !(moment.abs() > 0.0) || !moment.is_finite() {
        return Ok(centred);
    }
    let scale = -1.0 / moment;
    w.iter_mut().for_each(|a| *a *= scale);
    Ok(w)
}

/// `G(t) * g` with even reflection at the ends of the grid.
pub fn heat_convolve(g: &FluidField, t: f64, epsilon: f64, grid: &GridSpec) -> FluidField {
    let w = heat_kernel_weights(t, epsilon, grid.dx());
    FluidField::new(convolve_reflect(&g.values, &w), g.time + t)
}

/// `G_x(t) * g` with even reflection at the ends of the grid.
pub fn heat_convolve_dx(
    g: &FluidField,
    t: f64,
    epsilon: f64,
    grid: &GridSpec,
) -> Result<FluidField> {
    let w = heat_kernel_dx_weights(t, epsilon, grid.dx())?;
    Ok(FluidField::new(convolve_reflect(&g.values, &w), g.time + t))
}

/// Iterates stored on a uniform time grid over the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationState {
    pub k: usize,
    pub t_grid: Vec<f64>,
    pub u: Vec<FluidField>,
    pub f: Vec<KineticField>,
    pub moments: Vec<MomentSet>,
    /// `max_t |u_k - u_{k-1}|_inf` for every completed iterate.
    pub differences: Vec<f64>,
    pub contraction_ratios: Vec<f64>,
}

impl IterationState {
    /// The zeroth iterate: the initial data held constant in time.
    pub fn initial(u0: &FluidField, f0: &KineticField, grid: &GridSpec, t_grid: Vec<f64>) -> Self {
        let m0 = moments(f0, grid);
        let n = t_grid.len();
        IterationState {
            k: 0,
            u: t_grid
                .iter()
                .map(|&t| FluidField::new(u0.values.clone(), t))
                .collect(),
            f: t_grid
                .iter()
                .map(|&t| KineticField::new(f0.values.clone(), t))
                .collect(),
            moments: vec![m0; n],
            t_grid,
            differences: Vec::new(),
            contraction_ratios: Vec::new(),
        }
    }

    /// Linear-in-time interpolation of the stored `u` and moments.
    fn at(&self, s: f64) -> (Array1<f64>, MomentSet) {
        let tg = &self.t_grid;
        let last = tg.len() - 1;
        if s <= tg[0] || last == 0 {
            return (self.u[0].values.clone(), self.moments[0].clone());
        }
        if s >= tg[last] {
            return (self.u[last].values.clone(), self.moments[last].clone());
        }
        let n = tg.partition_point(|&t| t <= s) - 1;
        let w = (s - tg[n]) / (tg[n + 1] - tg[n]);
        let u = &self.u[n].values * (1.0 - w) + &self.u[n + 1].values * w;
        (
            u,
            MomentSet::lerp(&self.moments[n], &self.moments[n + 1], w),
        )
    }

    pub fn last_ratio(&self) -> Option<f64> {
        self.contraction_ratios.last().copied()
    }
}

/// Uniform time grid `0, T/n, ..., T`.
pub fn uniform_t_grid(t_end: f64, intervals: usize) -> Vec<f64> {
    (0..=intervals)
        .map(|n| t_end * n as f64 / intervals as f64)
        .collect()
}

/// Compute iterate `k + 1` from `state`.
pub fn picard_iterate(
    state: &IterationState,
    u0: &FluidField,
    f0: &KineticField,
    grid: &GridSpec,
) -> Result<IterationState> {
    let eps = grid.epsilon();
    let tg = &state.t_grid;
    if tg.is_empty() || tg[0] != 0.0 || tg.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition(
            "time grid must start at 0 and increase strictly".into(),
        ));
    }

    let u_new: Vec<FluidField> = tg
        .par_iter()
        .map(|&t| -> Result<FluidField> {
            let mut acc = heat_convolve(u0, t, eps, grid).values;
            if t > 0.0 {
                let h = t / TIME_NODES as f64;
                for node in 0..TIME_NODES {
                    // midpoint nodes keep s < t, away from the G_x singularity
                    let s = (node as f64 + 0.5) * h;
                    let (u, m) = state.at(s);
                    let drag = &m.j - &(&u * &m.rho);
                    let flux = &m.rho * eps - &(&u * &u * 0.5);
                    let a = heat_convolve(&FluidField::new(drag, s), t - s, eps, grid);
                    let b = heat_convolve_dx(&FluidField::new(flux, s), t - s, eps, grid)?;
                    acc = acc + (a.values + b.values) * h;
                }
            }
            Ok(FluidField::new(acc, t))
        })
        .collect::<Result<_>>()?;

    let f_new: Vec<KineticField> = (0..tg.len())
        .into_par_iter()
        .map(|n| trace_density(state, f0, grid, n))
        .collect();
    let moments_new: Vec<MomentSet> = f_new.iter().map(|f| moments(f, grid)).collect();

    let diff = u_new
        .iter()
        .zip(&state.u)
        .map(|(a, b)| {
            a.values
                .iter()
                .zip(b.values.iter())
                .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()))
        })
        .fold(0.0f64, |m, d| {
            if d.is_nan() || m.is_nan() {
                f64::NAN
            } else {
                m.max(d)
            }
        });
    let mut differences = state.differences.clone();
    let mut ratios = state.contraction_ratios.clone();
    if let Some(&prev) = differences.last() {
        let r = if prev > 0.0 {
            diff / prev
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        ratios.push(r);
    }
    differences.push(diff);
    Ok(IterationState {
        k: state.k + 1,
        t_grid: tg.clone(),
        u: u_new,
        f: f_new,
        moments: moments_new,
        differences,
        contraction_ratios: ratios,
    })
}

/// `f_k` at `t_grid[n]`: trace every node back to time 0 through the stored
/// `u_{k-1}`, one midpoint step per time-grid interval, and sample `f0`.
fn trace_density(
    state: &IterationState,
    f0: &KineticField,
    grid: &GridSpec,
    n: usize,
) -> KineticField {
    let tg = &state.t_grid;
    let t = tg[n];
    let gain = t.exp();
    // u at interval midpoints, newest first
    let mids: Vec<(f64, FluidField)> = (0..n)
        .rev()
        .map(|m| {
            let (u, _) = state.at(0.5 * (tg[m] + tg[m + 1]));
            (tg[m + 1] - tg[m], FluidField::new(u, tg[m + 1]))
        })
        .collect();
    let mut out = ndarray::Array2::zeros((grid.nx(), grid.nv()));
    for ((i, k), slot) in out.indexed_iter_mut() {
        let (mut x, mut v, mut s) = (grid.x(i), grid.v(k), t);
        for (dt, u) in &mids {
            let c = trace_back(x, v, s, *dt, u, grid);
            x = c.x;
            v = c.v;
            s = c.s;
        }
        *slot = interp2(f0, grid, x, v) * gain;
    }
    KineticField::new(out, t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardSolution {
    pub u: FluidField,
    pub f: KineticField,
    pub iterations: usize,
    pub converged: bool,
    pub differences: Vec<f64>,
    pub contraction_ratios: Vec<f64>,
}

impl PicardSolution {
    pub fn final_ratio(&self) -> Option<f64> {
        self.contraction_ratios.last().copied()
    }
}

/// Iterate until `max_t |u_k - u_{k-1}|_inf < tol` or `max_iter` iterates.
///
/// Fails with [`Error::NoContraction`] once three consecutive ratios are
/// `>= 1` (or an iterate is not finite); the window is then too long.
pub fn picard_solve(
    u0: &FluidField,
    f0: &KineticField,
    grid: &GridSpec,
    t_end: f64,
    tol: f64,
    max_iter: usize,
) -> Result<PicardSolution> {
    if !(t_end >= 0.0) {
        return Err(Error::Precondition(format!(
            "t_end must be nonnegative, got {t_end}"
        )));
    }
    if u0.len() != grid.nx() || f0.values.dim() != (grid.nx(), grid.nv()) {
        return Err(Error::GridMismatch(
            "initial data does not match grid".into(),
        ));
    }
    let mut state = IterationState::initial(u0, f0, grid, uniform_t_grid(t_end, TIME_NODES));
    let mut converged = false;
    while state.k < max_iter {
        state = picard_iterate(&state, u0, f0, grid)?;
        let diff = *state
            .differences
            .last()
            .expect("one difference per iterate");
        if diff < tol {
            converged = true;
            break;
        }
        let r = &state.contraction_ratios;
        let stalled = !diff.is_finite()
            || (r.len() >= NON_CONTRACTING_RUN
                && r[r.len() - NON_CONTRACTING_RUN..]
                    .iter()
                    .all(|&x| !(x < 1.0)));
        if stalled {
            log::warn!("picard iteration is not contracting: ratios {:?}", r);
            return Err(Error::NoContraction {
                ratios: state.contraction_ratios.clone(),
            });
        }
    }
    let last = state.t_grid.len() - 1;
    Ok(PicardSolution {
        u: state.u[last].clone(),
        f: state.f[last].clone(),
        iterations: state.k,
        converged,
        differences: state.differences,
        contraction_ratios: state.contraction_ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> GridSpec {
        GridSpec::new((-4.0, 4.0), (-2.0, 2.0), n, 16, 0.05, 0.05, 0.4).unwrap()
    }

    #[test]
    fn reflection_indices() {
        let idx: Vec<usize> = (-3..8).map(|j| reflect(j, 4)).collect();
        assert_eq!(idx, vec![2, 1, 0, 0, 1, 2, 3, 3, 2, 1, 0]);
    }

    #[test]
    fn heat_convolve_identity_and_constants() {
        let g = grid(64);
        let field = FluidField::from_fn(&g, |x| x.sin() + 0.2 * x);
        assert_eq!(heat_convolve(&field, 0.0, 0.05, &g).values, field.values);
        let c = FluidField::constant(&g, 1.7);
        let out = heat_convolve(&c, 0.3, 0.05, &g);
        assert!(out.values.iter().all(|&a| (a - 1.7).abs() < 1e-14));
    }

    #[test]
    fn heat_convolve_mean_and_max() {
        let g = grid(128);
        let field = FluidField::from_fn(&g, |x| (3.0 * x).sin() * (-x * x).exp() + 0.3 * x);
        let out = heat_convolve(&field, 2.0, 0.1, &g);
        let (s0, s1) = (field.values.sum(), out.values.sum());
        assert!((s0 - s1).abs() < 1e-12 * field.values.len() as f64);
        assert!(out.max_abs() <= field.max_abs());
    }

    #[test]
    fn heat_convolve_delta_second_moment() {
        let g = GridSpec::new((-4.0, 4.0), (-1.0, 1.0), 401, 4, 0.05, 1.0, 0.4).unwrap();
        let mut delta = FluidField::zeros(&g);
        delta.values[200] = 1.0 / g.dx();
        let (eps, t) = (0.05, 1.5);
        let out = heat_convolve(&delta, t, eps, &g);
        let mass: f64 = out.values.sum() * g.dx();
        let second: f64 = g
            .xs()
            .zip(out.values.iter())
            .map(|(x, a)| x * x * a)
            .sum::<f64>()
            * g.dx();
        assert!((mass - 1.0).abs() < 1e-12);
        assert!((second - 2.0 * eps * t).abs() < g.dx() * g.dx(), "{second}");
    }

    #[test]
    fn heat_convolve_semigroup() {
        let g = grid(256);
        let field = FluidField::from_fn(&g, |x| (-(x * x)).exp() * (2.0 * x).cos());
        let eps = 0.1;
        let two = heat_convolve(&heat_convolve(&field, 0.5, eps, &g), 0.7, eps, &g);
        let one = heat_convolve(&field, 1.2, eps, &g);
        let err = two
            .values
            .iter()
            .zip(one.values.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < g.dx() * g.dx(), "{err}");
    }

    #[test]
    fn derivative_kernel_properties() {
        let g = grid(256);
        assert!(matches!(
            heat_convolve_dx(&FluidField::zeros(&g), 0.0, 0.1, &g),
            Err(Error::SingularKernel { .. })
        ));
        let c = FluidField::constant(&g, 3.0);
        let out = heat_convolve_dx(&c, 0.4, 0.1, &g).unwrap();
        assert!(out.values.iter().all(|&a| a.abs() < 1e-12));

        // affine data far from the ends: derivative is the slope
        let lin = FluidField::from_fn(&g, |x| 2.0 * x - 1.0);
        let d = heat_convolve_dx(&lin, 0.4, 0.1, &g).unwrap();
        for i in 100..156 {
            assert!((d.values[i] - 2.0).abs() < 1e-10);
        }

        // L1 norm of G_x is (pi eps t)^{-1/2}
        for (eps, t) in [(0.1, 0.4), (0.05, 1.0), (0.02, 2.0)] {
            let w = heat_kernel_dx_weights(t, eps, g.dx()).unwrap();
            let l1: f64 = w.iter().map(|a| a.abs()).sum();
            let exact = 1.0 / (std::f64::consts::PI * eps * t).sqrt();
            assert!((l1 / exact - 1.0).abs() < 0.2, "{l1} vs {exact}");
        }
    }

    #[test]
    fn derivative_commutes_with_smoothing() {
        let g = grid(400);
        let field = FluidField::from_fn(&g, |x| (-(x * x)).exp());
        let (eps, t) = (0.1, 0.5);
        let a = heat_convolve_dx(&field, t, eps, &g).unwrap();
        let n = g.nx();
        let diff = FluidField::new(
            Array1::from_shape_fn(n, |i| {
                let (l, r) = (i.saturating_sub(1), (i + 1).min(n - 1));
                (field.values[r] - field.values[l]) / (g.x(r) - g.x(l))
            }),
            0.0,
        );
        let b = heat_convolve(&diff, t, eps, &g);
        for i in 20..n - 20 {
            assert!((a.values[i] - b.values[i]).abs() < 2.0 * g.dx() * g.dx());
        }
    }

    #[test]
    fn zero_data_converges_in_one_iterate() {
        let g = grid(32);
        let sol = picard_solve(
            &FluidField::zeros(&g),
            &KineticField::zeros(&g),
            &g,
            0.05,
            1e-12,
            10,
        )
        .unwrap();
        assert!(sol.converged);
        assert_eq!(sol.iterations, 1);
        assert!(sol.u.values.iter().all(|&a| a == 0.0));
        assert!(sol.f.values.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn iterates_stay_nonnegative_and_contract() {
        let g = grid(64);
        let u0 = FluidField::from_fn(&g, |x| 0.5 * (-2.0 * x * x).exp());
        let f0 = KineticField::from_fn(&g, |x, v| (-(x * x) / 0.2 - v * v / 0.1).exp());
        let sol = picard_solve(&u0, &f0, &g, 0.05, 1e-10, 30).unwrap();
        assert!(sol.converged);
        assert!(sol.f.is_nonnegative());
        assert!(sol.contraction_ratios.iter().all(|&r| r >= 0.0));
        assert!(sol.final_ratio().unwrap() < 1.0);
    }
}
