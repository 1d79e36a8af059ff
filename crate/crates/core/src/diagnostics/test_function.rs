//! Polynomial bump test functions `A (1 - r^2)^3` with analytic gradients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// `max_s |d/ds (1 - s^2)^3| = 96 / (25 sqrt 5)`, attained at `s = 1/sqrt 5`.
const BUMP_SLOPE_MAX: f64 = 1.717_300_206_719_838_4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    /// `phi(x, t)`.
    Xt,
    /// `phi(x, v, t)`.
    Xvt,
}

/// An ellipsoidal bump. For [`TestKind::Xt`] the velocity entries are unused.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub kind: TestKind,
    pub amplitude: f64,
    pub x_center: f64,
    pub x_radius: f64,
    pub v_center: f64,
    pub v_radius: f64,
    pub t_center: f64,
    pub t_radius: f64,
}

/// Value and first derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub dx: f64,
    pub dv: f64,
    pub dt: f64,
}

impl TestFunction {
    pub fn xt(x_center: f64, x_radius: f64, t_center: f64, t_radius: f64) -> Self {
        TestFunction {
            kind: TestKind::Xt,
            amplitude: 1.0,
            x_center,
            x_radius,
            v_center: 0.0,
            v_radius: 1.0,
            t_center,
            t_radius,
        }
    }

    pub fn xvt(
        (x_center, x_radius): (f64, f64),
        (v_center, v_radius): (f64, f64),
        (t_center, t_radius): (f64, f64),
    ) -> Self {
        TestFunction {
            kind: TestKind::Xvt,
            amplitude: 1.0,
            x_center,
            x_radius,
            v_center,
            v_radius,
            t_center,
            t_radius,
        }
    }

    pub fn scaled(mut self, alpha: f64) -> Self {
        self.amplitude *= alpha;
        self
    }

    pub fn jet(&self, x: f64, v: f64, t: f64) -> Jet {
        let sx = (x - self.x_center) / self.x_radius;
        let st = (t - self.t_center) / self.t_radius;
        let sv = match self.kind {
            TestKind::Xt => 0.0,
            TestKind::Xvt => (v - self.v_center) / self.v_radius,
        };
        let r2 = sx * sx + sv * sv + st * st;
        if r2 >= 1.0 {
            return Jet::default();
        }
        let b = 1.0 - r2;
        let a = self.amplitude;
        // d/dz (1 - r^2)^3 = -6 (1 - r^2)^2 s / R
        let g = -6.0 * a * b * b;
        Jet {
            value: a * b * b * b,
            dx: g * sx / self.x_radius,
            dv: if self.kind == TestKind::Xvt {
                g * sv / self.v_radius
            } else {
                0.0
            },
            dt: g * st / self.t_radius,
        }
    }

    pub fn value(&self, x: f64, v: f64, t: f64) -> f64 {
        self.jet(x, v, t).value
    }

    /// `sup |phi| + sum_i sup |d_i phi|`.
    pub fn c1_norm(&self) -> f64 {
        let mut inv = 1.0 / self.x_radius + 1.0 / self.t_radius;
        if self.kind == TestKind::Xvt {
            inv += 1.0 / self.v_radius;
        }
        self.amplitude.abs() * (1.0 + BUMP_SLOPE_MAX * inv)
    }

    /// Support strictly inside the box and before `t_end`.
    pub fn validate(&self, grid: &GridSpec, t_end: f64) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidTestFunction(m));
        let radii_ok = self.x_radius > 0.0
            && self.t_radius > 0.0
            && (self.kind == TestKind::Xt || self.v_radius > 0.0);
        if !radii_ok || !self.amplitude.is_finite() {
            return bad(format!(
                "radii must be positive and amplitude finite: {self:?}"
            ));
        }
        if self.x_center - self.x_radius <= grid.x_min()
            || self.x_center + self.x_radius >= grid.x_max()
        {
            return bad(format!(
                "x-support [{}, {}] is not inside ({}, {})",
                self.x_center - self.x_radius,
                self.x_center + self.x_radius,
                grid.x_min(),
                grid.x_max()
            ));
        }
        if self.kind == TestKind::Xvt
            && (self.v_center - self.v_radius <= grid.v_min()
                || self.v_center + self.v_radius >= grid.v_max())
        {
            return bad(format!(
                "v-support [{}, {}] is not inside ({}, {})",
                self.v_center - self.v_radius,
                self.v_center + self.v_radius,
                grid.v_min(),
                grid.v_max()
            ));
        }
        if self.t_center + self.t_radius >= t_end {
            return bad(format!(
                "t-support ends at {} which is not before t_end = {t_end}",
                self.t_center + self.t_radius
            ));
        }
        Ok(())
    }

    /// Temporal extent `[lo, hi]` of the support intersected with `t >= 0`.
    pub fn t_support(&self) -> (f64, f64) {
        (
            (self.t_center - self.t_radius).max(0.0),
            self.t_center + self.t_radius,
        )
    }
}

/// Default family: 5 centres across the middle of the box times 3 radii,
/// all centred at `t_end / 2`.
pub fn default_family(grid: &GridSpec, t_end: f64, kind: TestKind) -> Vec<TestFunction> {
    let xm = 0.5 * (grid.x_min() + grid.x_max());
    let vm = 0.5 * (grid.v_min() + grid.v_max());
    let (lx, lv) = (grid.x_len(), grid.v_len());
    let mut out = Vec::with_capacity(15);
    for c in 0..5 {
        let xc = xm + (c as f64 - 2.0) * 0.125 * lx;
        for (rx, rv, rt) in [(0.08, 0.2, 0.25), (0.14, 0.3, 0.35), (0.2, 0.4, 0.45)] {
            let phi = match kind {
                TestKind::Xt => TestFunction::xt(xc, rx * lx, 0.5 * t_end, rt * t_end),
                TestKind::Xvt => {
                    TestFunction::xvt((xc, rx * lx), (vm, rv * lv), (0.5 * t_end, rt * t_end))
                }
            };
            out.push(phi);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_constant() {
        let s = 1.0 / 5f64.sqrt();
        let exact = 6.0 * s * (1.0 - s * s).powi(2);
        assert!((BUMP_SLOPE_MAX - exact).abs() < 1e-15);
        assert!((BUMP_SLOPE_MAX - 96.0 / (25.0 * 5f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn jet_matches_finite_differences() {
        let phi = TestFunction::xvt((0.1, 0.7), (-0.2, 0.5), (0.4, 0.3));
        let h = 1e-6;
        for &(x, v, t) in &[(0.2, -0.1, 0.45), (-0.3, 0.0, 0.3), (0.5, -0.4, 0.5)] {
            let j = phi.jet(x, v, t);
            let fd = |dx: f64, dv: f64, dt: f64| {
                (phi.value(x + dx, v + dv, t + dt) - phi.value(x - dx, v - dv, t - dt)) / (2.0 * h)
            };
            assert!((j.dx - fd(h, 0.0, 0.0)).abs() < 1e-7);
            assert!((j.dv - fd(0.0, h, 0.0)).abs() < 1e-7);
            assert!((j.dt - fd(0.0, 0.0, h)).abs() < 1e-7);
        }
        assert_eq!(phi.value(0.8, -0.2, 0.4), 0.0);
    }

    #[test]
    fn c1_norm_bounds_sampled_derivatives() {
        let phi = TestFunction::xt(0.0, 0.5, 0.5, 0.25).scaled(-2.0);
        let mut sup = 0.0f64;
        let (mut sx, mut st) = (0.0f64, 0.0f64);
        for a in -100..=100 {
            for b in -100..=100 {
                let j = phi.jet(a as f64 * 0.005, 0.0, 0.5 + b as f64 * 0.0025);
                sup = sup.max(j.value.abs());
                sx = sx.max(j.dx.abs());
                st = st.max(j.dt.abs());
            }
        }
        assert!(sup + sx + st <= phi.c1_norm() + 1e-12);
        assert!((sup + sx + st) / phi.c1_norm() > 0.99);
    }

    #[test]
    fn default_family_is_admissible() {
        let g = GridSpec::new((-4.0, 4.0), (-2.5, 2.5), 64, 64, 0.02, 2.0, 0.4).unwrap();
        for kind in [TestKind::Xt, TestKind::Xvt] {
            let fam = default_family(&g, 2.0, kind);
            assert_eq!(fam.len(), 15);
            for phi in &fam {
                phi.validate(&g, 2.0).unwrap();
            }
        }
        let bad = TestFunction::xt(3.8, 0.5, 0.5, 0.2);
        assert!(matches!(
            bad.validate(&g, 2.0),
            Err(Error::InvalidTestFunction(_))
        ));
        let late = TestFunction::xt(0.0, 0.5, 1.9, 0.2);
        assert!(late.validate(&g, 2.0).is_err());
    }
}
