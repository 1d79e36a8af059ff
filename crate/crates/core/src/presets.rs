//! Named scenarios used by the acceptance suite, the benches and the CLI.

use crate::config::{InitialData, ParticleBlob, ScenarioConfig};
use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Names accepted by [`by_name`].
pub const NAMES: &[&str] = &[
    "coupled",
    "riemann_pure_fluid",
    "rarefaction_pure_fluid",
    "riemann_particles",
    "smooth_short_time",
    "smooth_long_time",
    "zero",
];

fn blob(weighted_mass: f64) -> ParticleBlob {
    ParticleBlob {
        x_center: 0.0,
        v_center: 0.0,
        x_width: 0.3,
        v_width: 0.25,
        weighted_mass,
    }
}

/// Smooth bump with a particle cloud at rest: `|u0| = 0.5`, weighted mass 0.5,
/// so the measured bound is `M0 = 1`.
///
/// The bump width is 1, which keeps the inviscid profile free of shocks
/// until roughly `t = 3.3`, beyond `t_end = 2`.
pub fn coupled(n: usize, epsilon: f64) -> Result<ScenarioConfig> {
    let grid = GridSpec::new((-4.0, 4.0), (-2.5, 2.5), n, n, epsilon, 2.0, 0.4)?;
    let init = InitialData::GaussianBump {
        amplitude: 0.5,
        center: 0.0,
        width: 1.0,
        particles: Some(blob(0.5)),
    };
    Ok(ScenarioConfig::new("coupled", 1.0, grid, init))
}

/// Pure-fluid Riemann problem on `[-2, 2]`; `nv` is kept minimal since
/// there are no particles.
pub fn riemann_pure_fluid(
    u_left: f64,
    u_right: f64,
    nx: usize,
    epsilon: f64,
) -> Result<ScenarioConfig> {
    let grid = GridSpec::new((-2.0, 2.0), (-1.0, 1.0), nx, 4, epsilon, 1.0, 0.4)?;
    let init = InitialData::Riemann {
        u_left,
        u_right,
        x0: 0.0,
        particles: None,
    };
    let m0 = u_left.abs().max(u_right.abs()).max(1e-3);
    let name = if u_left > u_right {
        "riemann_pure_fluid"
    } else {
        "rarefaction_pure_fluid"
    };
    Ok(ScenarioConfig::new(name, m0, grid, init))
}

/// Shock `1 -> 0` at the origin with a particle cloud upstream, at the
/// coarsest sweep member `eps = 0.04`. The box leaves room for the `1e-12`
/// tails of the cloud on every side.
pub fn riemann_particles() -> Result<ScenarioConfig> {
    let grid = GridSpec::new((-3.0, 3.0), (-2.0, 2.0), 300, 86, 0.04, 1.0, 0.4)?;
    let init = InitialData::Riemann {
        u_left: 1.0,
        u_right: 0.0,
        x0: 0.0,
        particles: Some(ParticleBlob {
            x_center: -0.5,
            v_center: 0.0,
            x_width: 0.2,
            v_width: 0.2,
            weighted_mass: 0.5,
        }),
    };
    let mut cfg = ScenarioConfig::new("riemann_particles", 1.5, grid, init);
    cfg.output.store_kinetic = false;
    Ok(cfg)
}

/// Smooth data of unit size for the Picard cross-check.
pub fn smooth(t_end: f64) -> Result<ScenarioConfig> {
    let grid = GridSpec::new((-4.0, 4.0), (-2.5, 2.5), 64, 64, 0.01, t_end, 0.4)?;
    let init = InitialData::GaussianBump {
        amplitude: 1.0,
        center: 0.0,
        width: 0.5,
        particles: Some(blob(1.0)),
    };
    let name = if t_end <= 0.1 {
        "smooth_short_time"
    } else {
        "smooth_long_time"
    };
    Ok(ScenarioConfig::new(name, 2.0, grid, init))
}

/// `u0 = 0`, `f0 = 0`: every field must stay identically zero.
pub fn zero() -> Result<ScenarioConfig> {
    let grid = GridSpec::new((-1.0, 1.0), (-1.0, 1.0), 32, 16, 0.05, 0.5, 0.4)?;
    let init = InitialData::GaussianBump {
        amplitude: 0.0,
        center: 0.0,
        width: 1.0,
        particles: None,
    };
    Ok(ScenarioConfig::new("zero", 1.0, grid, init))
}

pub fn by_name(name: &str) -> Result<ScenarioConfig> {
    match name {
        "coupled" => coupled(128, 0.02),
        "riemann_pure_fluid" => riemann_pure_fluid(1.0, 0.0, 512, 0.005),
        "rarefaction_pure_fluid" => riemann_pure_fluid(0.0, 1.0, 512, 0.005),
        "riemann_particles" => riemann_particles(),
        "smooth_short_time" => smooth(0.05),
        "smooth_long_time" => smooth(2.0),
        "zero" => zero(),
        other => Err(Error::config(
            "preset",
            format!(
                "unknown preset {other:?}; expected one of {}",
                NAMES.join(", ")
            ),
        )),
    }
}
