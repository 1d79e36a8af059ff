//! Aggregated diagnostics for one trajectory.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::burgers::EntropyPair;
use crate::driver::{StepRecord, Trajectory};
use crate::error::Result;

use super::checks::{
    check_kinetic_energy, check_mass, check_max_principle, check_moment_continuity,
    check_rarefaction, check_shock_location, dissipation_budget,
};
use super::test_function::{default_family, TestKind};
use super::weak::{entropy_inequality_residual, weak_residual_burgers, weak_residual_vlasov};
use super::CheckRecord;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannStates {
    pub u_left: f64,
    pub u_right: f64,
    pub x0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub m0: f64,
    /// Relative mass drift allowed.
    pub mass_tolerance: f64,
    /// Relative slack on the analytic bounds.
    pub slack: f64,
    /// Entropy residuals pass when `>= -entropy_tolerance * |phi|_C1`.
    pub entropy_tolerance: f64,
    pub kruzkov_constants: usize,
    /// Pure-fluid Riemann data enable the exact-solution checks.
    pub riemann: Option<RiemannStates>,
    pub rarefaction_tolerance: f64,
}

impl ReportOptions {
    pub fn new(m0: f64) -> Self {
        ReportOptions {
            m0,
            mass_tolerance: 1e-3,
            slack: 0.05,
            entropy_tolerance: 0.02,
            kruzkov_constants: 8,
            riemann: None,
            rarefaction_tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub scenario: String,
    pub epsilon: f64,
    pub nx: usize,
    pub nv: usize,
    pub t_end: f64,
    pub m0: f64,
    pub records: Vec<CheckRecord>,
    pub warnings: Vec<String>,
}

impl DiagnosticsReport {
    pub fn passed(&self) -> bool {
        !self.records.iter().any(|r| r.failed())
    }

    pub fn record(&self, name: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.name == name)
    }
}

/// Evaluate every standard check on `traj`.
pub fn evaluate(
    scenario: &str,
    traj: &Trajectory,
    opts: &ReportOptions,
) -> Result<DiagnosticsReport> {
    let g = &traj.grid;
    let t_end = traj.final_snapshot().time;
    let mut records = vec![
        check_mass(traj, opts.mass_tolerance),
        check_kinetic_energy(traj, opts.m0, opts.slack),
    ];
    records.extend(check_max_principle(traj, opts.m0, opts.slack));
    records.push(check_moment_continuity(traj));
    records.push(dissipation_budget(traj));

    if let Some(r) = opts.riemann {
        if r.u_left > r.u_right {
            records.push(check_shock_location(traj, r.u_left, r.u_right, r.x0));
        } else {
            records.push(check_rarefaction(
                traj,
                r.u_left,
                r.u_right,
                r.x0,
                opts.rarefaction_tolerance,
            ));
        }
    }

    if t_end > 0.0 {
        let fam = default_family(g, t_end, TestKind::Xt);
        let burgers: Vec<f64> = fam
            .par_iter()
            .map(|phi| weak_residual_burgers(traj, phi).map(|r| r.abs() / phi.c1_norm()))
            .collect::<Result<_>>()?;
        records.push(CheckRecord::info(
            "weak_residual_burgers",
            "max_phi |R_B(phi)| / |phi|_C1 over the default family",
            burgers.iter().cloned().fold(0.0, f64::max),
        ));

        let pairs = EntropyPair::kruzkov_family(opts.m0, opts.kruzkov_constants);
        let jobs: Vec<_> = pairs
            .iter()
            .flat_map(|p| fam.iter().map(move |phi| (*p, *phi)))
            .collect();
        let entropy: Vec<f64> = jobs
            .par_iter()
            .map(|(p, phi)| entropy_inequality_residual(traj, *p, phi).map(|r| r / phi.c1_norm()))
            .collect::<Result<_>>()?;
        records.push(CheckRecord::lower(
            "entropy_inequality",
            "min over Kruzkov c and phi of R_eta(phi) / |phi|_C1",
            entropy.iter().cloned().fold(f64::INFINITY, f64::min),
            -opts.entropy_tolerance,
        ));

        if traj.snapshots.iter().all(|s| s.f.is_some()) {
            let fam_v = default_family(g, t_end, TestKind::Xvt);
            let vlasov: Vec<f64> = fam_v
                .par_iter()
                .map(|psi| weak_residual_vlasov(traj, psi).map(|r| r.abs() / psi.c1_norm()))
                .collect::<Result<_>>()?;
            records.push(CheckRecord::info(
                "weak_residual_vlasov",
                "max_psi |R_V(psi)| / |psi|_C1 over the default family",
                vlasov.iter().cloned().fold(0.0, f64::max),
            ));
        }
    }

    Ok(DiagnosticsReport {
        scenario: scenario.to_string(),
        epsilon: g.epsilon(),
        nx: g.nx(),
        nv: g.nv(),
        t_end,
        m0: opts.m0,
        records,
        warnings: traj.warnings.clone(),
    })
}

/// Per-step scalars as CSV. Floats use the shortest representation that
/// parses back to the same value (exponent form for tiny magnitudes).
pub fn time_series_csv(steps: &[StepRecord]) -> String {
    let mut out =
        String::from("step,t,dt,mass,kinetic_energy,max_abs_u,max_abs_u_minus_psi,dissipation\n");
    for s in steps {
        out.push_str(&format!(
            "{},{:?},{:?},{:?},{:?},{:?},{:?},{:?}\n",
            s.step,
            s.time,
            s.dt,
            s.mass,
            s.kinetic_energy,
            s.max_abs_u,
            s.max_abs_u_minus_psi,
            s.dissipation
        ));
    }
    out
}
