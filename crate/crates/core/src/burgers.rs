//! Explicit finite-volume step for the viscous Burgers equation with the
//! particle drag source, plus entropy pairs and the control function.

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FluidField, KineticField, MomentSet};
use crate::grid::GridSpec;
use crate::vlasov::moments;

/// Convex entropy / entropy-flux pair for Burgers' flux `u^2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntropyPair {
    /// `eta = u^2 / 2`, `q = u^3 / 3`.
    Square,
    /// `eta = |u - c|`, `q = sign(u - c) (u^2 - c^2) / 2`.
    Kruzkov { c: f64 },
}

impl EntropyPair {
    pub fn eta(&self, u: f64) -> f64 {
        match *self {
            EntropyPair::Square => 0.5 * u * u,
            EntropyPair::Kruzkov { c } => (u - c).abs(),
        }
    }

    pub fn q(&self, u: f64) -> f64 {
        match *self {
            EntropyPair::Square => u * u * u / 3.0,
            EntropyPair::Kruzkov { c } => sign(u - c) * 0.5 * (u * u - c * c),
        }
    }

    /// `eta'(u)`; the Kruzkov kink takes the subgradient value 0.
    pub fn eta_prime(&self, u: f64) -> f64 {
        match *self {
            EntropyPair::Square => u,
            EntropyPair::Kruzkov { c } => sign(u - c),
        }
    }

    /// `n` Kruzkov constants equispaced over `[-3 m0, 3 m0]`.
    pub fn kruzkov_family(m0: f64, n: usize) -> Vec<EntropyPair> {
        let lo = -3.0 * m0;
        let hi = 3.0 * m0;
        (0..n)
            .map(|k| {
                let c = if n == 1 {
                    0.0
                } else {
                    lo + (hi - lo) * k as f64 / (n - 1) as f64
                };
                EntropyPair::Kruzkov { c }
            })
            .collect()
    }
}

fn sign(a: f64) -> f64 {
    if a > 0.0 {
        1.0
    } else if a < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Pointwise `(eta(u), q(u))`.
pub fn entropy_pair_eval(pair: EntropyPair, u: &FluidField) -> (Array1<f64>, Array1<f64>) {
    (u.values.mapv(|a| pair.eta(a)), u.values.mapv(|a| pair.q(a)))
}

/// Tail mass `psi(x) = int_x^inf int f dv dy` on the position grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlField {
    pub psi: Array1<f64>,
    pub time: f64,
}

pub fn control_function(f: &KineticField, grid: &GridSpec) -> ControlField {
    let mut c = control_from_density(&moments(f, grid).rho, grid);
    c.time = f.time;
    c
}

/// Midpoint tail sum `psi[i] = sum_{i' > i} rho[i'] dx + rho[i] dx / 2`.
pub fn control_from_density(rho: &Array1<f64>, grid: &GridSpec) -> ControlField {
    let n = rho.len();
    let dx = grid.dx();
    let mut psi = Array1::zeros(n);
    let mut tail = 0.0;
    for i in (0..n).rev() {
        psi[i] = tail + 0.5 * rho[i] * dx;
        tail += rho[i] * dx;
    }
    ControlField { psi, time: 0.0 }
}

const SPEED_FLOOR: f64 = 1e-12;

/// Admissible explicit time step for the coupled scheme:
/// `safety * min(dx / max|u|, dx^2 / (2 eps), dv / (max|u| + max|v|))`.
pub fn cfl_dt(u: &FluidField, grid: &GridSpec) -> f64 {
    let umax = u.max_abs();
    let convective = grid.dx() / (umax + SPEED_FLOOR);
    let diffusive = grid.dx() * grid.dx() / (2.0 * grid.epsilon());
    let kinetic = grid.dv() / (umax + grid.v_abs_max() + SPEED_FLOOR);
    grid.cfl_safety() * convective.min(diffusive).min(kinetic)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurgersOptions {
    /// Include the `eps (int f dv)_x` term of the regularized system.
    pub technical_viscosity: bool,
}

impl Default for BurgersOptions {
    fn default() -> Self {
        BurgersOptions {
            technical_viscosity: true,
        }
    }
}

/// Godunov flux for `u^2 / 2`.
#[inline]
pub fn godunov_flux(ul: f64, ur: f64) -> f64 {
    if ul <= ur {
        if ul > 0.0 {
            0.5 * ul * ul
        } else if ur < 0.0 {
            0.5 * ur * ur
        } else {
            0.0
        }
    } else {
        0.5 * (ul * ul).max(ur * ur)
    }
}

/// One forward-Euler step of
/// `u_t + (u^2/2)_x = eps u_xx + eps rho_x + j - u rho`
/// with zero-gradient ghost cells.
pub fn burgers_step(
    u: &FluidField,
    m: &MomentSet,
    grid: &GridSpec,
    dt: f64,
    opts: BurgersOptions,
) -> Result<FluidField> {
    let n = grid.nx();
    if u.len() != n || m.rho.len() != n || m.j.len() != n {
        return Err(Error::GridMismatch(format!(
            "burgers_step: u has {} cells, moments {}, grid nx = {n}",
            u.len(),
            m.rho.len()
        )));
    }
    let admissible = cfl_dt(u, grid);
    if dt > admissible * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, admissible });
    }
    let dx = grid.dx();
    let eps = grid.epsilon();
    let uv = &u.values;
    let at = |a: &Array1<f64>, i: isize| a[i.clamp(0, n as isize - 1) as usize];

    // fluxes[i] is the interface flux at x_{i - 1/2}, i = 0..=n
    let fluxes: Vec<f64> = (0..=n as isize)
        .map(|i| godunov_flux(at(uv, i - 1), at(uv, i)))
        .collect();
    let lam = dt / dx;
    let mu = eps * dt / (dx * dx);
    let nu = if opts.technical_viscosity {
        eps * dt / (2.0 * dx)
    } else {
        0.0
    };
    let values = Array1::from_shape_fn(n, |i| {
        let ii = i as isize;
        let ui = uv[i];
        let conv = lam * (fluxes[i + 1] - fluxes[i]);
        let diff = mu * (at(uv, ii + 1) - 2.0 * ui + at(uv, ii - 1));
        let tech = nu * (at(&m.rho, ii + 1) - at(&m.rho, ii - 1));
        let drag = dt * (m.j[i] - ui * m.rho[i]);
        ui - conv + diff + tech + drag
    });
    Ok(FluidField::new(values, u.time + dt))
}

/// Discrete increment of `int int eps u_x^2 dx dt` over one step.
pub fn entropy_dissipation_increment(
    _u_old: &FluidField,
    u_new: &FluidField,
    grid: &GridSpec,
    dt: f64,
) -> f64 {
    let dx = grid.dx();
    let s: f64 = u_new
        .values
        .windows(2)
        .into_iter()
        .map(|w| {
            let g = (w[1] - w[0]) / dx;
            g * g
        })
        .sum();
    grid.epsilon() * s * dx * dt
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nx: usize, eps: f64) -> GridSpec {
        GridSpec::new((-2.0, 2.0), (-1.0, 1.0), nx, 4, eps, 1.0, 0.4).unwrap()
    }

    #[test]
    fn entropy_pair_formulas() {
        let g = grid(8, 0.1);
        let (eta, q) = entropy_pair_eval(EntropyPair::Square, &FluidField::constant(&g, 2.0));
        assert!(eta.iter().all(|&a| a == 2.0));
        assert!(q.iter().all(|&a| (a - 8.0 / 3.0).abs() < 1e-15));
        let (eta, q) = entropy_pair_eval(
            EntropyPair::Kruzkov { c: 0.0 },
            &FluidField::constant(&g, -1.0),
        );
        assert!(eta.iter().all(|&a| a == 1.0));
        assert!(q.iter().all(|&a| a == -0.5));
    }

    #[test]
    fn entropy_flux_compatibility_on_smooth_data() {
        // q_x = u eta'(u) u_x, checked by central differences away from kinks
        let n = 400;
        let g = GridSpec::new((0.0, 6.0), (-1.0, 1.0), n, 4, 0.1, 1.0, 0.4).unwrap();
        let u = FluidField::from_fn(&g, |x| x.sin());
        for pair in [EntropyPair::Square, EntropyPair::Kruzkov { c: 0.3 }] {
            let (_, q) = entropy_pair_eval(pair, &u);
            for i in 1..n - 1 {
                let (a, b) = (u.values[i - 1], u.values[i + 1]);
                if let EntropyPair::Kruzkov { c } = pair {
                    if (a - c) * (b - c) <= 0.0 {
                        continue;
                    }
                }
                let qx = (q[i + 1] - q[i - 1]) / (2.0 * g.dx());
                let ui = u.values[i];
                let expect = ui * pair.eta_prime(ui) * g.x(i).cos();
                assert!((qx - expect).abs() < 2.0 * g.dx().powi(2), "{pair:?} i={i}");
            }
        }
    }

    #[test]
    fn kruzkov_family_spans_the_uniform_bound() {
        let fam = EntropyPair::kruzkov_family(1.0, 8);
        assert_eq!(fam.len(), 8);
        assert_eq!(fam[0], EntropyPair::Kruzkov { c: -3.0 });
        assert_eq!(fam[7], EntropyPair::Kruzkov { c: 3.0 });
    }

    #[test]
    fn control_function_properties() {
        let g = GridSpec::new((-4.0, 4.0), (-2.0, 2.0), 64, 32, 0.1, 1.0, 0.4).unwrap();
        let zero = control_function(&KineticField::zeros(&g), &g);
        assert!(zero.psi.iter().all(|&p| p == 0.0));

        let norm = 1.0 / (2.0 * std::f64::consts::PI * 0.3 * 0.3);
        let f = KineticField::from_fn(&g, |x, v| {
            norm * (-(x * x) / (2.0 * 0.09) - v * v / (2.0 * 0.09)).exp()
        });
        let c = control_function(&f, &g);
        let rho = moments(&f, &g).rho;
        assert!((c.psi[0] - 1.0).abs() < 1e-6);
        assert!(c.psi[63].abs() < 1e-6);
        for i in 0..63 {
            assert!(c.psi[i + 1] <= c.psi[i]);
            let d = (c.psi[i + 1] - c.psi[i]) / g.dx();
            assert!((d + 0.5 * (rho[i] + rho[i + 1])).abs() < 1e-10);
        }
    }

    #[test]
    fn cfl_dt_formula() {
        let g = grid(40, 0.5);
        let u = FluidField::zeros(&g);
        let dt = cfl_dt(&u, &g);
        let diffusive = 0.4 * g.dx() * g.dx() / (2.0 * 0.5);
        assert!((dt - diffusive).abs() < 1e-15);
        let fine = g.with_resolution(80, 4).unwrap();
        assert!(cfl_dt(&FluidField::zeros(&fine), &fine) >= 0.25 * dt * (1.0 - 1e-12));
    }

    #[test]
    fn constants_are_steady() {
        let g = grid(32, 0.05);
        let u = FluidField::constant(&g, 0.7);
        let m = MomentSet::zeros(32);
        let dt = cfl_dt(&u, &g);
        let next = burgers_step(&u, &m, &g, dt, BurgersOptions::default()).unwrap();
        assert!(next.values.iter().all(|&a| (a - 0.7).abs() < 1e-15));
    }

    #[test]
    fn pure_source_acts_pointwise() {
        let g = grid(16, 0.05);
        let u = FluidField::zeros(&g);
        let mut m = MomentSet::zeros(16);
        m.rho.fill(0.4);
        for i in 0..16 {
            m.j[i] = if i % 3 == 0 { 0.2 * i as f64 } else { 0.0 };
        }
        let dt = 0.5 * cfl_dt(&u, &g);
        let next = burgers_step(&u, &m, &g, dt, BurgersOptions::default()).unwrap();
        for i in 0..16 {
            assert!((next.values[i] - dt * m.j[i]).abs() < 1e-15);
        }
        // with a nonuniform density only the technical viscosity adds a gradient term
        for i in 0..16 {
            m.rho[i] = (i as f64 * 0.7).sin().abs();
        }
        let off = BurgersOptions {
            technical_viscosity: false,
        };
        let next = burgers_step(&u, &m, &g, dt, off).unwrap();
        for i in 0..16 {
            assert!((next.values[i] - dt * m.j[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_steps_above_cfl() {
        let g = grid(16, 0.05);
        let u = FluidField::constant(&g, 1.0);
        let m = MomentSet::zeros(16);
        let adm = cfl_dt(&u, &g);
        match burgers_step(&u, &m, &g, 2.0 * adm, BurgersOptions::default()) {
            Err(Error::CflViolation { admissible, .. }) => assert_eq!(admissible, adm),
            other => panic!("expected CFL violation, got {other:?}"),
        }
    }

    #[test]
    fn interior_fluxes_telescope() {
        let g = grid(64, 0.02);
        let u = FluidField::from_fn(&g, |x| 0.5 + 0.4 * (2.0 * x).sin());
        let m = MomentSet::zeros(64);
        let dt = cfl_dt(&u, &g);
        let next = burgers_step(&u, &m, &g, dt, BurgersOptions::default()).unwrap();
        let n = 64;
        let f_left = godunov_flux(u.values[0], u.values[0]);
        let f_right = godunov_flux(u.values[n - 1], u.values[n - 1]);
        let change = (next.values.sum() - u.values.sum()) * g.dx();
        assert!((change + dt * (f_right - f_left)).abs() < 1e-14);
    }

    #[test]
    fn godunov_flux_cases() {
        assert_eq!(godunov_flux(1.0, 2.0), 0.5);
        assert_eq!(godunov_flux(-2.0, -1.0), 0.5);
        assert_eq!(godunov_flux(-1.0, 1.0), 0.0);
        assert_eq!(godunov_flux(1.0, -3.0), 4.5);
        assert_eq!(godunov_flux(2.0, 1.0), 2.0);
    }

    #[test]
    fn dissipation_increment_formula() {
        let g = GridSpec::new((0.0, 3.0), (-1.0, 1.0), 30, 4, 0.2, 1.0, 0.4).unwrap();
        let c = FluidField::constant(&g, 1.0);
        assert_eq!(entropy_dissipation_increment(&c, &c, &g, 0.1), 0.0);
        let ramp = FluidField::new((0..30).map(|i| i as f64 * g.dx()).collect(), 0.0);
        let inc = entropy_dissipation_increment(&c, &ramp, &g, 0.1);
        // the sum runs over the nx - 1 interior differences
        let len = (g.nx() - 1) as f64 * g.dx();
        assert!((inc - 0.2 * len * 0.1).abs() < 1e-12);
    }
}
