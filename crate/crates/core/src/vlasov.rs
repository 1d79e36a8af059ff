//! Semi-Lagrangian transport of the particle density.
//!
//! The density obeys `f_t + v f_x + (u - v) f_v = f`. Along the backward
//! characteristics `dX/ds = V`, `dV/ds = u(X) - V` it is amplified by
//! `e^{dt}` per step, which exactly compensates the phase-space contraction
//! of the drag flow (the Jacobian of the backward map is `e^{dt}`).
//!
//! The default stepper, [`vlasov_step`], treats grid values as cell averages
//! and gives every cell the mass of its backward image, one direction at a
//! time (free streaming in `x`, then drag in `v`). With a piecewise-constant
//! reconstruction this is linear interpolation of the cumulative mass at the
//! traced cell edges; mass is conserved up to boundary outflow.
//! [`vlasov_step_bilinear`] samples the old field at the traced foot of
//! each node instead.

use ndarray::{Array1, Array2, Axis, Zip};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::field::{FluidField, KineticField, MomentSet};
use crate::grid::GridSpec;
use crate::quadrature::interp2;

/// A point on a characteristic curve at parameter `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharState {
    pub x: f64,
    pub v: f64,
    pub s: f64,
}

/// Trace the characteristic through `(x, v)` at time `t` back to `t - dt`
/// with one explicit midpoint step; `u` is frozen over the step.
pub fn trace_back(x: f64, v: f64, t: f64, dt: f64, u: &FluidField, grid: &GridSpec) -> CharState {
    let h = -dt;
    let a1 = u.sample(grid, x) - v;
    let xm = x + 0.5 * h * v;
    let vm = v + 0.5 * h * a1;
    let a2 = u.sample(grid, xm) - vm;
    CharState {
        x: x + h * vm,
        v: v + h * a2,
        s: t - dt,
    }
}

/// Which discretization of the transport step the driver uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VlasovScheme {
    /// Conservative split remap, piecewise-constant reconstruction.
    #[default]
    Remap,
    /// Conservative split remap, monotonized-central linear reconstruction.
    RemapLinear,
    /// Pointwise bilinear semi-Lagrangian.
    Bilinear,
}

/// Advance `f` by `dt` with the selected scheme.
pub fn vlasov_step_with(
    scheme: VlasovScheme,
    f: &KineticField,
    u: &FluidField,
    dt: f64,
    grid: &GridSpec,
) -> KineticField {
    match scheme {
        VlasovScheme::Remap => remap_step(f, u, dt, grid, false),
        VlasovScheme::RemapLinear => remap_step(f, u, dt, grid, true),
        VlasovScheme::Bilinear => vlasov_step_bilinear(f, u, dt, grid),
    }
}

/// One semi-Lagrangian step: `f_new(x, v) = f_old(trace_back(x, v)) e^{dt}`,
/// with the old field evaluated by [`interp2`].
pub fn vlasov_step_bilinear(
    f: &KineticField,
    u: &FluidField,
    dt: f64,
    grid: &GridSpec,
) -> KineticField {
    let gain = dt.exp();
    let t = f.time + dt;
    let mut out = Array2::zeros((grid.nx(), grid.nv()));
    Zip::indexed(&mut out).par_for_each(|(i, k), slot| {
        let c = trace_back(grid.x(i), grid.v(k), t, dt, u, grid);
        *slot = interp2(f, grid, c.x, c.v) * gain;
    });
    KineticField::new(out, t)
}

/// Monotonized-central slopes (per cell) of cell averages extended by zero.
fn limited_slopes(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let at = |j: isize| {
        if j < 0 || j >= n as isize {
            0.0
        } else {
            a[j as usize]
        }
    };
    (0..n as isize)
        .map(|j| {
            let dl = at(j) - at(j - 1);
            let dr = at(j + 1) - at(j);
            if dl * dr <= 0.0 {
                0.0
            } else {
                let m = (2.0 * dl.abs())
                    .min(2.0 * dr.abs())
                    .min(0.5 * (dl + dr).abs());
                m.copysign(dl)
            }
        })
        .collect()
}

/// Integral over `[lo, hi]` (in cell units, cell `j` is `[j, j + 1]`) of the
/// reconstruction with averages `a` and slopes `s`, zero outside the cells.
/// Every contribution is nonnegative when `a` is.
fn integrate_reconstruction(a: &[f64], s: &[f64], lo: f64, hi: f64) -> f64 {
    let n = a.len() as f64;
    let lo = lo.max(0.0);
    let hi = hi.min(n);
    if !(hi > lo) {
        return 0.0;
    }
    let j0 = lo.floor() as usize;
    let j1 = (hi.ceil() as usize).min(a.len());
    let mut acc = 0.0;
    for j in j0..j1 {
        let l = lo.max(j as f64);
        let r = hi.min(j as f64 + 1.0);
        if r > l {
            let mid = 0.5 * (l + r) - j as f64 - 0.5;
            acc += (r - l) * (a[j] + s[j] * mid);
        }
    }
    acc
}

/// New cell averages after mapping every target cell `[j, j + 1]` back to
/// `[pre(j), pre(j + 1)]`: the mass of the preimage divided by the cell size.
fn remap_line(a: &[f64], linear: bool, pre: impl Fn(f64) -> f64, out: &mut [f64]) {
    let s = if linear {
        limited_slopes(a)
    } else {
        vec![0.0; a.len()]
    };
    let mut left = pre(0.0);
    for (j, slot) in out.iter_mut().enumerate() {
        let right = pre(j as f64 + 1.0);
        *slot = integrate_reconstruction(a, &s, left, right);
        left = right;
    }
}

/// One conservative transport step ([`VlasovScheme::Remap`]).
///
/// Free streaming shifts row `v` by `v dt`; the drag map at fixed `x` sends
/// `v` back to `u(x) + (v - u(x)) e^{dt}`, so each velocity cell gathers the
/// mass of an interval `e^{dt}` times longer (the Jacobian factor). Both
/// substeps are exact for their own characteristics; the only errors are the
/// reconstruction and the splitting.
pub fn vlasov_step(f: &KineticField, u: &FluidField, dt: f64, grid: &GridSpec) -> KineticField {
    remap_step(f, u, dt, grid, false)
}

fn remap_step(
    f: &KineticField,
    u: &FluidField,
    dt: f64,
    grid: &GridSpec,
    linear: bool,
) -> KineticField {
    let (nx, nv) = (grid.nx(), grid.nv());
    let (dx, dv) = (grid.dx(), grid.dv());
    let t = f.time + dt;

    // free streaming, one velocity column at a time
    let columns: Vec<Vec<f64>> = (0..nv)
        .into_par_iter()
        .map(|k| {
            let col: Vec<f64> = f.values.column(k).to_vec();
            let shift = grid.v(k) * dt / dx;
            let mut out = vec![0.0; nx];
            remap_line(&col, linear, |e| e - shift, &mut out);
            out
        })
        .collect();
    let mut g = Array2::zeros((nx, nv));
    for (k, col) in columns.iter().enumerate() {
        g.column_mut(k).assign(&Array1::from(col.clone()));
    }

    // drag, one position row at a time
    let gain = dt.exp();
    let v_lo = grid.v_min();
    let mut out = Array2::zeros((nx, nv));
    Zip::indexed(out.axis_iter_mut(Axis(0)))
        .and(g.axis_iter(Axis(0)))
        .par_for_each(|i, mut row_out, row_in| {
            let ui = u.values[i];
            // edge at cell units e sits at velocity v_lo + e dv
            let pre = |e: f64| {
                let v = v_lo + e * dv;
                (ui + (v - ui) * gain - v_lo) / dv
            };
            let src = row_in.to_vec();
            let mut dst = vec![0.0; nv];
            remap_line(&src, linear, pre, &mut dst);
            row_out.assign(&Array1::from(dst));
        });
    KineticField::new(out, t)
}

/// Closed-form solution of the transport equation for a constant fluid
/// velocity `u_const`, sampled on the grid:
/// `V(0) = u + (v - u) e^t`, `X(0) = x - u t + (v - u)(1 - e^t)`.
pub fn exact_const_u(
    f0: impl Fn(f64, f64) -> f64 + Sync,
    u_const: f64,
    t: f64,
    grid: &GridSpec,
) -> KineticField {
    let et = t.exp();
    let mut out = Array2::zeros((grid.nx(), grid.nv()));
    Zip::indexed(&mut out).par_for_each(|(i, k), slot| {
        let (x, v) = (grid.x(i), grid.v(k));
        let v0 = u_const + (v - u_const) * et;
        let x0 = x - u_const * t + (v - u_const) * (1.0 - et);
        *slot = f0(x0, v0) * et;
    });
    KineticField::new(out, t)
}

/// Density, momentum and second velocity moment on the position grid.
pub fn moments(f: &KineticField, grid: &GridSpec) -> MomentSet {
    let nx = grid.nx();
    let mut m = MomentSet::zeros(nx);
    let dv = grid.dv();
    let vs: Vec<f64> = grid.vs().collect();
    Zip::from(f.values.axis_iter(Axis(0)))
        .and(&mut m.rho)
        .and(&mut m.j)
        .and(&mut m.e2)
        .par_for_each(|row, rho, j, e2| {
            let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
            for (&fk, &v) in row.iter().zip(&vs) {
                s0 += fk;
                s1 += v * fk;
                s2 += v * v * fk;
            }
            *rho = s0 * dv;
            *j = s1 * dv;
            *e2 = s2 * dv;
        });
    m
}

/// Jacobian of the backward characteristic map from time `t` to `tau`:
/// the solution of `dJ/dtau = -J`, `J(t) = 1`.
pub fn jacobian(t: f64, tau: f64) -> f64 {
    (t - tau).exp()
}

/// Inclusive index bounds and physical extent of the cells where `f > threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportBox {
    pub i_lo: usize,
    pub i_hi: usize,
    pub k_lo: usize,
    pub k_hi: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub v_lo: f64,
    pub v_hi: f64,
}

impl SupportBox {
    /// Distance in cells from the box to the nearest grid boundary.
    pub fn boundary_margin(&self, grid: &GridSpec) -> usize {
        let mx = self.i_lo.min(grid.nx() - 1 - self.i_hi);
        let mv = self.k_lo.min(grid.nv() - 1 - self.k_hi);
        mx.min(mv)
    }
}

/// Smallest grid-aligned box containing every cell with `f > threshold`;
/// `None` when no cell qualifies.
pub fn support_box(f: &KineticField, threshold: f64, grid: &GridSpec) -> Option<SupportBox> {
    let mut bounds: Option<(usize, usize, usize, usize)> = None;
    for ((i, k), &val) in f.values.indexed_iter() {
        if val > threshold {
            bounds = Some(match bounds {
                None => (i, i, k, k),
                Some((a, b, c, d)) => (a.min(i), b.max(i), c.min(k), d.max(k)),
            });
        }
    }
    bounds.map(|(i_lo, i_hi, k_lo, k_hi)| SupportBox {
        i_lo,
        i_hi,
        k_lo,
        k_hi,
        x_lo: grid.x_min() + i_lo as f64 * grid.dx(),
        x_hi: grid.x_min() + (i_hi + 1) as f64 * grid.dx(),
        v_lo: grid.v_min() + k_lo as f64 * grid.dv(),
        v_hi: grid.v_min() + (k_hi + 1) as f64 * grid.dv(),
    })
}

/// Default support threshold: `1e-12 * max f`.
pub fn default_support_threshold(f: &KineticField) -> f64 {
    1e-12 * f.max()
}
