use ndarray::{Array1, Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::grid::GridSpec;

/// Bulk fluid velocity sampled at the position-cell centres at one time level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluidField {
    pub values: Array1<f64>,
    pub time: f64,
}

impl FluidField {
    pub fn new(values: Array1<f64>, time: f64) -> Self {
        FluidField { values, time }
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        FluidField::new(Array1::zeros(grid.nx()), 0.0)
    }

    pub fn constant(grid: &GridSpec, c: f64) -> Self {
        FluidField::new(Array1::from_elem(grid.nx(), c), 0.0)
    }

    pub fn from_fn(grid: &GridSpec, u: impl Fn(f64) -> f64) -> Self {
        FluidField::new(grid.xs().map(u).collect(), 0.0)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &a| m.max(a.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|a| a.is_finite())
    }

    /// Linear interpolation in x between cell centres. Queries beyond the
    /// outermost centres take the edge value (zero-gradient extension).
    pub fn sample(&self, grid: &GridSpec, x: f64) -> f64 {
        let n = self.values.len();
        let s = (x - grid.x_min()) / grid.dx() - 0.5;
        if !(s > 0.0) {
            return self.values[0];
        }
        if s >= (n - 1) as f64 {
            return self.values[n - 1];
        }
        let i = s.floor() as usize;
        let w = s - i as f64;
        (1.0 - w) * self.values[i] + w * self.values[i + 1]
    }
}

/// Particle phase-space density sampled on the `(nx, nv)` cell centres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticField {
    pub values: Array2<f64>,
    pub time: f64,
}

impl KineticField {
    pub fn new(values: Array2<f64>, time: f64) -> Self {
        KineticField { values, time }
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        KineticField::new(Array2::zeros((grid.nx(), grid.nv())), 0.0)
    }

    pub fn from_fn(grid: &GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let values =
            Array2::from_shape_fn((grid.nx(), grid.nv()), |(i, k)| f(grid.x(i), grid.v(k)));
        KineticField::new(values, 0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &a| m.max(a))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &a| m.min(a))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|a| a.is_finite())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&a| a >= 0.0)
    }

    /// Discrete phase-space integral of `weight(v) f`.
    pub fn integral(&self, grid: &GridSpec, weight: impl Fn(f64) -> f64) -> f64 {
        let w: Vec<f64> = grid.vs().map(weight).collect();
        let mut total = 0.0;
        for row in self.values.rows() {
            let mut s = 0.0;
            for (fk, wk) in row.iter().zip(&w) {
                s += wk * fk;
            }
            total += s;
        }
        total * grid.dx() * grid.dv()
    }

    pub fn mass(&self, grid: &GridSpec) -> f64 {
        self.integral(grid, |_| 1.0)
    }

    pub fn kinetic_energy(&self, grid: &GridSpec) -> f64 {
        self.integral(grid, |v| v * v)
    }
}

/// Velocity moments of a kinetic field on the position grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    /// Particle density, the zeroth moment.
    pub rho: Array1<f64>,
    /// Particle momentum, the first moment.
    pub j: Array1<f64>,
    /// Second moment.
    pub e2: Array1<f64>,
}

impl MomentSet {
    pub fn zeros(nx: usize) -> Self {
        MomentSet {
            rho: Array1::zeros(nx),
            j: Array1::zeros(nx),
            e2: Array1::zeros(nx),
        }
    }

    pub fn mass(&self, grid: &GridSpec) -> f64 {
        self.rho.sum() * grid.dx()
    }

    pub fn kinetic_energy(&self, grid: &GridSpec) -> f64 {
        self.e2.sum() * grid.dx()
    }

    /// Linear blend `(1 - w) a + w b`; used for time interpolation.
    pub fn lerp(a: &MomentSet, b: &MomentSet, w: f64) -> MomentSet {
        let mix = |p: &Array1<f64>, q: &Array1<f64>| {
            let mut out = Array1::zeros(p.len());
            Zip::from(&mut out)
                .and(p)
                .and(q)
                .for_each(|o, &p, &q| *o = (1.0 - w) * p + w * q);
            out
        };
        MomentSet {
            rho: mix(&a.rho, &b.rho),
            j: mix(&a.j, &b.j),
            e2: mix(&a.e2, &b.e2),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fluid_sample_extends_by_edge_value() {
        let g = GridSpec::new((0.0, 4.0), (-1.0, 1.0), 4, 4, 0.1, 1.0, 0.5).unwrap();
        let u = FluidField::from_fn(&g, |x| 2.0 * x);
        assert_eq!(u.sample(&g, 0.5), 1.0);
        assert!((u.sample(&g, 1.0) - 2.0).abs() < 1e-15);
        assert_eq!(u.sample(&g, -3.0), 1.0);
        assert_eq!(u.sample(&g, 9.0), 7.0);
    }
}
