//! Quadrature, interpolation and distance primitives shared by the solvers.

use ndarray::{Array1, ArrayView1};

use crate::error::{Error, Result};
use crate::field::{FluidField, KineticField};
use crate::grid::GridSpec;

/// Midpoint rule over the velocity cells: `sum_k weight(v_k) f[k] dv`.
pub fn quad_v(f_slice: ArrayView1<f64>, weight: impl Fn(f64) -> f64, grid: &GridSpec) -> f64 {
    let mut s = 0.0;
    for (k, &fk) in f_slice.iter().enumerate() {
        s += weight(grid.v(k)) * fk;
    }
    s * grid.dv()
}

/// Bilinear interpolation of `f` at `(x, v)`.
///
/// The field is extended by zero outside the grid box, so queries outside
/// `[x_min, x_max] x [v_min, v_max]` return 0 and queries in the outer
/// half-cells blend towards zero. The result is clamped to
/// `[0, max of the four stencil values]`.
pub fn interp2(f: &KineticField, grid: &GridSpec, x: f64, v: f64) -> f64 {
    if !(x >= grid.x_min() && x <= grid.x_max() && v >= grid.v_min() && v <= grid.v_max()) {
        return 0.0;
    }
    let s = (x - grid.x_min()) / grid.dx() - 0.5;
    let r = (v - grid.v_min()) / grid.dv() - 0.5;
    let i0 = s.floor();
    let k0 = r.floor();
    let wx = s - i0;
    let wv = r - k0;
    let (i0, k0) = (i0 as isize, k0 as isize);
    let node = |i: isize, k: isize| -> f64 {
        if i < 0 || k < 0 || i >= grid.nx() as isize || k >= grid.nv() as isize {
            0.0
        } else {
            f.values[[i as usize, k as usize]]
        }
    };
    let f00 = node(i0, k0);
    let f10 = node(i0 + 1, k0);
    let f01 = node(i0, k0 + 1);
    let f11 = node(i0 + 1, k0 + 1);
    let val = (1.0 - wx) * ((1.0 - wv) * f00 + wv * f01) + wx * ((1.0 - wv) * f10 + wv * f11);
    let hi = f00.max(f10).max(f01).max(f11);
    val.clamp(0.0, hi.max(0.0))
}

/// Discrete L1 distance `sum_i |a_i - b_i| dx`.
pub fn l1_distance(a: &FluidField, b: &FluidField, grid: &GridSpec) -> Result<f64> {
    l1_distance_values(a.values.view(), b.values.view(), grid.dx(), grid.nx())
}

pub(crate) fn l1_distance_values(
    a: ArrayView1<f64>,
    b: ArrayView1<f64>,
    dx: f64,
    nx: usize,
) -> Result<f64> {
    if a.len() != nx || b.len() != nx {
        return Err(Error::GridMismatch(format!(
            "fields of length {} and {} on a grid with nx = {nx}",
            a.len(),
            b.len()
        )));
    }
    let mut s = 0.0;
    for (p, q) in a.iter().zip(b.iter()) {
        s += (p - q).abs();
    }
    Ok(s * dx)
}

/// Cell-average `values` (piecewise constant on `fine`) onto the `coarse`
/// x-cells. Both grids must cover the same position interval; the mesh sizes
/// need not be commensurate.
pub fn restrict_average(
    values: ArrayView1<f64>,
    fine: &GridSpec,
    coarse: &GridSpec,
) -> Result<Array1<f64>> {
    if fine.x_min() != coarse.x_min() || fine.x_max() != coarse.x_max() {
        return Err(Error::GridMismatch(
            "restriction requires identical position intervals".into(),
        ));
    }
    if values.len() != fine.nx() {
        return Err(Error::GridMismatch(format!(
            "field of length {} on a grid with nx = {}",
            values.len(),
            fine.nx()
        )));
    }
    let mut out = Array1::zeros(coarse.nx());
    let mut j = 0;
    for (c, slot) in out.iter_mut().enumerate() {
        let lo = coarse.x_min() + c as f64 * coarse.dx();
        let hi = lo + coarse.dx();
        let mut acc = 0.0;
        // advance to the first fine cell overlapping [lo, hi)
        while j < fine.nx() && fine.x_min() + (j + 1) as f64 * fine.dx() <= lo {
            j += 1;
        }
        let mut jj = j;
        while jj < fine.nx() {
            let flo = fine.x_min() + jj as f64 * fine.dx();
            if flo >= hi {
                break;
            }
            let fhi = flo + fine.dx();
            let overlap = fhi.min(hi) - flo.max(lo);
            if overlap > 0.0 {
                acc += values[jj] * overlap;
            }
            jj += 1;
        }
        *slot = acc / coarse.dx();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array1;

    fn grid(nx: usize, nv: usize) -> GridSpec {
        GridSpec::new((-1.0, 1.0), (-1.0, 1.0), nx, nv, 0.1, 1.0, 0.5).unwrap()
    }

    #[test]
    fn quad_v_zero_and_interval_measure() {
        let g = grid(4, 16);
        let zero = Array1::<f64>::zeros(16);
        assert_eq!(quad_v(zero.view(), |v| v.exp(), &g), 0.0);
        let ones = Array1::from_elem(16, 1.0);
        let m = quad_v(ones.view(), |_| 1.0, &g);
        assert!((m - 2.0).abs() <= g.dv());
    }

    #[test]
    fn interp2_reproduces_nodes_and_vanishes_outside() {
        let g = grid(8, 6);
        let f = KineticField::from_fn(&g, |x, v| 1.0 + x * x + 0.5 * v);
        for i in 0..8 {
            for k in 0..6 {
                let stored = f.values[[i, k]];
                assert!((interp2(&f, &g, g.x(i), g.v(k)) - stored).abs() <= 1e-14 * stored);
            }
        }
        assert_eq!(interp2(&f, &g, 1.01, 0.0), 0.0);
        assert_eq!(interp2(&f, &g, 0.0, -1.5), 0.0);
        assert_eq!(interp2(&f, &g, f64::NAN, 0.0), 0.0);
    }

    #[test]
    fn interp2_exact_on_affine_data() {
        let g = grid(10, 10);
        let f = KineticField::from_fn(&g, |x, v| x + v + 3.0);
        for &(x, v) in &[(0.13, -0.41), (-0.77, 0.6), (0.8, 0.8), (0.0, 0.0)] {
            let got = interp2(&f, &g, x, v);
            assert!((got - (x + v + 3.0)).abs() < 1e-13, "{got}");
        }
    }

    #[test]
    fn l1_distance_constant_difference() {
        let g = GridSpec::new((-5.0, 5.0), (-1.0, 1.0), 20, 4, 0.1, 1.0, 0.5).unwrap();
        let a = FluidField::constant(&g, 1.0);
        let b = FluidField::zeros(&g);
        assert!((l1_distance(&a, &b, &g).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(l1_distance(&a, &a, &g).unwrap(), 0.0);
        let short = FluidField::new(Array1::zeros(3), 0.0);
        assert!(matches!(
            l1_distance(&a, &short, &g),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn restriction_preserves_integral() {
        let fine = grid(30, 4);
        let coarse = grid(7, 4);
        let vals: Array1<f64> = fine.xs().map(|x| (3.0 * x).sin() + x * x).collect();
        let r = restrict_average(vals.view(), &fine, &coarse).unwrap();
        let lhs = vals.sum() * fine.dx();
        let rhs = r.sum() * coarse.dx();
        assert!((lhs - rhs).abs() < 1e-13);
        let same = restrict_average(vals.view(), &fine, &fine).unwrap();
        for (a, b) in same.iter().zip(vals.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
