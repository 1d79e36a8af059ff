use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform, truncated phase-space grid plus the time horizon and the
/// artificial viscosity of the regularized system.
///
/// Both axes are cell-centred: `x(i) = x_min + (i + 1/2) dx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpecRaw", into = "GridSpecRaw")]
pub struct GridSpec {
    x_min: f64,
    x_max: f64,
    v_min: f64,
    v_max: f64,
    nx: usize,
    nv: usize,
    dx: f64,
    dv: f64,
    epsilon: f64,
    t_end: f64,
    cfl_safety: f64,
}

/// Serialized form of [`GridSpec`]. Every field is required: physical
/// parameters never fall back to defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpecRaw {
    pub x_min: f64,
    pub x_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub nx: usize,
    pub nv: usize,
    pub epsilon: f64,
    pub t_end: f64,
    pub cfl_safety: f64,
}

impl TryFrom<GridSpecRaw> for GridSpec {
    type Error = Error;

    fn try_from(raw: GridSpecRaw) -> Result<Self> {
        GridSpec::new(
            (raw.x_min, raw.x_max),
            (raw.v_min, raw.v_max),
            raw.nx,
            raw.nv,
            raw.epsilon,
            raw.t_end,
            raw.cfl_safety,
        )
    }
}

impl From<GridSpec> for GridSpecRaw {
    fn from(g: GridSpec) -> Self {
        GridSpecRaw {
            x_min: g.x_min,
            x_max: g.x_max,
            v_min: g.v_min,
            v_max: g.v_max,
            nx: g.nx,
            nv: g.nv,
            epsilon: g.epsilon,
            t_end: g.t_end,
            cfl_safety: g.cfl_safety,
        }
    }
}

impl GridSpec {
    pub fn new(
        (x_min, x_max): (f64, f64),
        (v_min, v_max): (f64, f64),
        nx: usize,
        nv: usize,
        epsilon: f64,
        t_end: f64,
        cfl_safety: f64,
    ) -> Result<Self> {
        let finite = [x_min, x_max, v_min, v_max, epsilon, t_end, cfl_safety]
            .iter()
            .all(|a| a.is_finite());
        if !finite {
            return Err(Error::config("grid", "all grid parameters must be finite"));
        }
        if x_max <= x_min {
            return Err(Error::config(
                "grid.x_max",
                format!("must exceed x_min (got x_min = {x_min}, x_max = {x_max})"),
            ));
        }
        if v_max <= v_min {
            return Err(Error::config(
                "grid.v_max",
                format!("must exceed v_min (got v_min = {v_min}, v_max = {v_max})"),
            ));
        }
        if nx < 4 {
            return Err(Error::config(
                "grid.nx",
                format!("must be at least 4 (got {nx})"),
            ));
        }
        if nv < 4 {
            return Err(Error::config(
                "grid.nv",
                format!("must be at least 4 (got {nv})"),
            ));
        }
        if epsilon <= 0.0 {
            return Err(Error::config(
                "grid.epsilon",
                format!("must be strictly positive (got {epsilon})"),
            ));
        }
        if t_end < 0.0 {
            return Err(Error::config(
                "grid.t_end",
                format!("must be nonnegative (got {t_end})"),
            ));
        }
        if !(cfl_safety > 0.0 && cfl_safety <= 1.0) {
            return Err(Error::config(
                "grid.cfl_safety",
                format!("must lie in (0, 1] (got {cfl_safety})"),
            ));
        }
        Ok(GridSpec {
            x_min,
            x_max,
            v_min,
            v_max,
            nx,
            nv,
            dx: (x_max - x_min) / nx as f64,
            dv: (v_max - v_min) / nv as f64,
            epsilon,
            t_end,
            cfl_safety,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn v_min(&self) -> f64 {
        self.v_min
    }
    pub fn v_max(&self) -> f64 {
        self.v_max
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn nv(&self) -> usize {
        self.nv
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn dv(&self) -> f64 {
        self.dv
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn t_end(&self) -> f64 {
        self.t_end
    }
    pub fn cfl_safety(&self) -> f64 {
        self.cfl_safety
    }

    pub fn x_len(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn v_len(&self) -> f64 {
        self.v_max - self.v_min
    }

    /// Cell centre of the `i`-th position cell.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx
    }

    /// Cell centre of the `k`-th velocity cell.
    #[inline]
    pub fn v(&self, k: usize) -> f64 {
        self.v_min + (k as f64 + 0.5) * self.dv
    }

    /// Largest |v| on the velocity box.
    pub fn v_abs_max(&self) -> f64 {
        self.v_min.abs().max(self.v_max.abs())
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nx).map(|i| self.x(i))
    }

    pub fn vs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nv).map(|k| self.v(k))
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        self.rebuilt(self.nx, self.nv, epsilon, self.t_end, self.cfl_safety)
    }

    pub fn with_resolution(&self, nx: usize, nv: usize) -> Result<Self> {
        self.rebuilt(nx, nv, self.epsilon, self.t_end, self.cfl_safety)
    }

    pub fn with_t_end(&self, t_end: f64) -> Result<Self> {
        self.rebuilt(self.nx, self.nv, self.epsilon, t_end, self.cfl_safety)
    }

    pub fn with_cfl_safety(&self, cfl_safety: f64) -> Result<Self> {
        self.rebuilt(self.nx, self.nv, self.epsilon, self.t_end, cfl_safety)
    }

    fn rebuilt(&self, nx: usize, nv: usize, epsilon: f64, t_end: f64, cfl: f64) -> Result<Self> {
        GridSpec::new(
            (self.x_min, self.x_max),
            (self.v_min, self.v_max),
            nx,
            nv,
            epsilon,
            t_end,
            cfl,
        )
    }

    /// True when both grids discretize the same box with the same cell counts.
    pub fn same_mesh(&self, other: &GridSpec) -> bool {
        self.nx == other.nx
            && self.nv == other.nv
            && self.x_min == other.x_min
            && self.x_max == other.x_max
            && self.v_min == other.v_min
            && self.v_max == other.v_max
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nx: usize, eps: f64) -> Result<GridSpec> {
        GridSpec::new((-1.0, 1.0), (-2.0, 2.0), nx, 8, eps, 1.0, 0.5)
    }

    #[test]
    fn spacings_are_derived_exactly() {
        let g = grid(10, 0.1).unwrap();
        assert_eq!(g.dx(), 2.0 / 10.0);
        assert_eq!(g.dv(), 4.0 / 8.0);
        assert_eq!(g.x(0), -1.0 + 0.1);
        assert_eq!(g.v(7), -2.0 + 7.5 * 0.5);
    }

    #[test]
    fn rejects_degenerate_parameters() {
        assert!(matches!(grid(2, 0.1), Err(Error::Config { key, .. }) if key == "grid.nx"));
        assert!(matches!(grid(8, 0.0), Err(Error::Config { key, .. }) if key == "grid.epsilon"));
        assert!(GridSpec::new((1.0, 1.0), (-1.0, 1.0), 8, 8, 0.1, 1.0, 0.5).is_err());
        assert!(GridSpec::new((0.0, 1.0), (-1.0, 1.0), 8, 8, 0.1, 1.0, 1.5).is_err());
        assert!(GridSpec::new((0.0, 1.0), (-1.0, 1.0), 8, 8, 0.1, 1.0, 0.0).is_err());
    }
}
