//! Scenario description: initial-data presets, the declared bound `M0`,
//! the grid, and output cadence.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::vlasov::VlasovScheme;

/// Gaussian particle cloud, scaled so that its discrete weighted mass
/// `sum (1 + v^2) f dx dv` on the run grid equals `weighted_mass`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleBlob {
    pub x_center: f64,
    pub v_center: f64,
    pub x_width: f64,
    pub v_width: f64,
    pub weighted_mass: f64,
}

impl ParticleBlob {
    fn shape(&self, x: f64, v: f64) -> f64 {
        let a = (x - self.x_center) / self.x_width;
        let b = (v - self.v_center) / self.v_width;
        (-0.5 * (a * a + b * b)).exp()
    }

    fn validate(&self) -> Result<()> {
        if !(self.x_width > 0.0 && self.v_width > 0.0) {
            return Err(Error::config(
                "initial.particles",
                "x_width and v_width must be strictly positive",
            ));
        }
        if !(self.weighted_mass >= 0.0) {
            return Err(Error::config(
                "initial.particles.weighted_mass",
                "must be nonnegative",
            ));
        }
        Ok(())
    }
}

/// Piecewise-linear velocity table; values beyond the table take the end values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidTable {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
}

/// Density on a rectangular node table (row-major in `x`), bilinear between
/// nodes and zero outside the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KineticTable {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// Step `u_left` / `u_right` at `x0`, optionally with a particle cloud.
    Riemann {
        u_left: f64,
        u_right: f64,
        #[serde(default)]
        x0: f64,
        #[serde(default)]
        particles: Option<ParticleBlob>,
    },
    /// `u0 = amplitude * exp(-(x - center)^2 / (2 width^2))`.
    GaussianBump {
        amplitude: f64,
        center: f64,
        width: f64,
        #[serde(default)]
        particles: Option<ParticleBlob>,
    },
    /// Uniform background flow with a particle beam.
    Beam {
        u_background: f64,
        particles: ParticleBlob,
    },
    #[serde(rename = "custom-tabulated", alias = "tabulated")]
    Tabulated {
        u0: FluidTable,
        #[serde(default)]
        f0: Option<KineticTable>,
    },
}

pub type FluidProfile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type KineticProfile = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Continuous initial data resolved against a concrete grid.
#[derive(Clone)]
pub struct InitialProfiles {
    pub u0: FluidProfile,
    pub f0: KineticProfile,
}

impl InitialData {
    pub fn validate(&self) -> Result<()> {
        match self {
            InitialData::Riemann { particles, .. }
            | InitialData::GaussianBump { particles, .. } => {
                if let InitialData::GaussianBump { width, .. } = self {
                    if !(*width > 0.0) {
                        return Err(Error::config("initial.width", "must be strictly positive"));
                    }
                }
                if let Some(p) = particles {
                    p.validate()?;
                }
            }
            InitialData::Beam { particles, .. } => particles.validate()?,
            InitialData::Tabulated { u0, f0 } => {
                if u0.x.len() < 2 || u0.x.len() != u0.u.len() {
                    return Err(Error::config(
                        "initial.u0",
                        "x and u must have equal length of at least 2",
                    ));
                }
                if u0.x.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::config("initial.u0.x", "must be strictly increasing"));
                }
                if let Some(t) = f0 {
                    if t.x.len() < 2 || t.v.len() < 2 {
                        return Err(Error::config(
                            "initial.f0",
                            "needs at least 2 x and 2 v nodes",
                        ));
                    }
                    if t.values.len() != t.x.len() * t.v.len() {
                        return Err(Error::config(
                            "initial.f0.values",
                            format!("expected {} values", t.x.len() * t.v.len()),
                        ));
                    }
                    if t.x.windows(2).any(|w| w[1] <= w[0]) || t.v.windows(2).any(|w| w[1] <= w[0])
                    {
                        return Err(Error::config(
                            "initial.f0",
                            "node coordinates must be strictly increasing",
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Whether the velocity data is continuous (smooth presets only).
    pub fn is_smooth(&self) -> bool {
        match self {
            InitialData::Riemann {
                u_left, u_right, ..
            } => u_left == u_right,
            _ => true,
        }
    }

    pub fn profiles(&self, grid: &GridSpec) -> InitialProfiles {
        let blob = |p: &ParticleBlob| -> KineticProfile {
            let p = p.clone();
            let raw = grid_weighted_mass(grid, |x, v| p.shape(x, v));
            let scale = if raw > 0.0 {
                p.weighted_mass / raw
            } else {
                0.0
            };
            Arc::new(move |x, v| scale * p.shape(x, v))
        };
        let none: KineticProfile = Arc::new(|_, _| 0.0);
        match self.clone() {
            InitialData::Riemann {
                u_left,
                u_right,
                x0,
                particles,
            } => InitialProfiles {
                u0: Arc::new(move |x| if x < x0 { u_left } else { u_right }),
                f0: particles.as_ref().map_or(none, blob),
            },
            InitialData::GaussianBump {
                amplitude,
                center,
                width,
                particles,
            } => InitialProfiles {
                u0: Arc::new(move |x| {
                    let a = (x - center) / width;
                    amplitude * (-0.5 * a * a).exp()
                }),
                f0: particles.as_ref().map_or(none, blob),
            },
            InitialData::Beam {
                u_background,
                particles,
            } => InitialProfiles {
                u0: Arc::new(move |_| u_background),
                f0: blob(&particles),
            },
            InitialData::Tabulated { u0, f0 } => InitialProfiles {
                u0: Arc::new(move |x| table1(&u0.x, &u0.u, x)),
                f0: match f0 {
                    Some(t) => Arc::new(move |x, v| table2(&t, x, v)),
                    None => none,
                },
            },
        }
    }
}

fn grid_weighted_mass(grid: &GridSpec, f: impl Fn(f64, f64) -> f64) -> f64 {
    let mut s = 0.0;
    for i in 0..grid.nx() {
        let x = grid.x(i);
        for k in 0..grid.nv() {
            let v = grid.v(k);
            s += (1.0 + v * v) * f(x, v);
        }
    }
    s * grid.dx() * grid.dv()
}

fn table1(xs: &[f64], us: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return us[0];
    }
    if x >= xs[n - 1] {
        return us[n - 1];
    }
    let i = xs.partition_point(|&a| a <= x) - 1;
    let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    (1.0 - w) * us[i] + w * us[i + 1]
}

fn table2(t: &KineticTable, x: f64, v: f64) -> f64 {
    let (nx, nv) = (t.x.len(), t.v.len());
    if x < t.x[0] || x > t.x[nx - 1] || v < t.v[0] || v > t.v[nv - 1] {
        return 0.0;
    }
    let i = (t.x.partition_point(|&a| a <= x).max(1) - 1).min(nx - 2);
    let k = (t.v.partition_point(|&a| a <= v).max(1) - 1).min(nv - 2);
    let wx = (x - t.x[i]) / (t.x[i + 1] - t.x[i]);
    let wv = (v - t.v[k]) / (t.v[k + 1] - t.v[k]);
    let at = |i: usize, k: usize| t.values[i * nv + k];
    (1.0 - wx) * ((1.0 - wv) * at(i, k) + wv * at(i, k + 1))
        + wx * ((1.0 - wv) * at(i + 1, k) + wv * at(i + 1, k + 1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Snapshot spacing in time; defaults to `t_end / 20`.
    #[serde(default)]
    pub interval: Option<f64>,
    /// Keep the full phase-space density at each snapshot (moments are
    /// always kept).
    #[serde(default = "yes")]
    pub store_kinetic: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            interval: None,
            store_kinetic: true,
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    /// Include the `eps (int f dv)_x` term.
    #[serde(default = "yes")]
    pub technical_viscosity: bool,
    /// Cap, truncate and mollify the initial data as in the regularized problem.
    #[serde(default = "yes")]
    pub regularize_initial_data: bool,
    #[serde(default)]
    pub vlasov_scheme: VlasovScheme,
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec {
            technical_viscosity: true,
            regularize_initial_data: true,
            vlasov_scheme: VlasovScheme::Remap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    /// Declared bound on `|u0|_inf + |(1 + v^2) f0|_1`.
    pub m0: f64,
    pub grid: GridSpec,
    pub initial: InitialData,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub solver: SolverSpec,
}

impl ScenarioConfig {
    pub fn new(name: &str, m0: f64, grid: GridSpec, initial: InitialData) -> Self {
        ScenarioConfig {
            name: name.to_string(),
            m0,
            grid,
            initial,
            output: OutputSpec::default(),
            solver: SolverSpec::default(),
        }
    }

    pub fn with_grid(&self, grid: GridSpec) -> Self {
        ScenarioConfig {
            grid,
            ..self.clone()
        }
    }

    pub fn output_interval(&self) -> f64 {
        self.output.interval.unwrap_or(self.grid.t_end() / 20.0)
    }

    /// `max |u0| + sum (1 + v^2) f0 dx dv` on the configured grid.
    pub fn measured_m0(&self) -> f64 {
        let p = self.initial.profiles(&self.grid);
        let umax = self.grid.xs().fold(0.0f64, |m, x| m.max((p.u0)(x).abs()));
        umax + grid_weighted_mass(&self.grid, |x, v| (p.f0)(x, v))
    }

    pub fn validate(&self) -> Result<()> {
        self.initial.validate()?;
        if !(self.m0 > 0.0) {
            return Err(Error::config(
                "m0",
                format!("must be strictly positive (got {})", self.m0),
            ));
        }
        if let Some(iv) = self.output.interval {
            if !(iv > 0.0) {
                return Err(Error::config(
                    "output.interval",
                    "must be strictly positive",
                ));
            }
        }
        let measured = self.measured_m0();
        if !measured.is_finite() {
            return Err(Error::config(
                "initial",
                "initial data is not finite on the grid",
            ));
        }
        if self.m0 < measured * (1.0 - 1e-12) {
            return Err(Error::config(
                "m0",
                format!(
                    "declared bound {} is below the measured |u0|_inf + weighted f0 mass {measured}",
                    self.m0
                ),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::new((-4.0, 4.0), (-2.5, 2.5), 64, 64, 0.02, 1.0, 0.4).unwrap()
    }

    fn blob() -> ParticleBlob {
        ParticleBlob {
            x_center: 0.0,
            v_center: 0.0,
            x_width: 0.3,
            v_width: 0.25,
            weighted_mass: 0.5,
        }
    }

    #[test]
    fn blob_is_normalized_on_the_grid() {
        let init = InitialData::GaussianBump {
            amplitude: 0.5,
            center: 0.0,
            width: 0.5,
            particles: Some(blob()),
        };
        let cfg = ScenarioConfig::new("bump", 1.0, grid(), init);
        let m = cfg.measured_m0();
        assert!(m <= 1.0 + 1e-12 && m > 0.99, "{m}");
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_understated_m0() {
        let init = InitialData::Riemann {
            u_left: 1.0,
            u_right: 0.0,
            x0: 0.0,
            particles: Some(blob()),
        };
        let cfg = ScenarioConfig::new("r", 1.0, grid(), init);
        assert!(matches!(cfg.validate(), Err(Error::Config { key, .. }) if key == "m0"));
    }

    #[test]
    fn tables_interpolate() {
        let t = KineticTable {
            x: vec![0.0, 1.0],
            v: vec![0.0, 2.0],
            values: vec![0.0, 2.0, 1.0, 3.0],
        };
        assert!((table2(&t, 0.5, 1.0) - 1.5).abs() < 1e-15);
        assert_eq!(table2(&t, 1.5, 1.0), 0.0);
        assert_eq!(table1(&[0.0, 1.0, 3.0], &[1.0, 3.0, 7.0], 2.0), 5.0);
        assert_eq!(table1(&[0.0, 1.0], &[1.0, 3.0], -5.0), 1.0);
    }
}
