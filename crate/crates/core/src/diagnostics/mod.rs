//! Measured residuals and bounds with pass/fail verdicts.

mod checks;
mod report;
mod test_function;
mod weak;

pub use checks::{
    check_kinetic_energy, check_mass, check_max_principle, check_moment_continuity,
    check_rarefaction, check_shock_location, dissipation_band, dissipation_budget, fitted_orders,
    half_max_position, moment_continuity_residuals, refinement_decreasing, riemann_exact,
    MONOTONE_FLOOR,
};
pub use report::{evaluate, time_series_csv, DiagnosticsReport, ReportOptions, RiemannStates};
pub use test_function::{default_family, Jet, TestFunction, TestKind};
pub use weak::{
    entropy_inequality_residual, weak_residual_burgers, weak_residual_vlasov, CADENCE_FRACTION,
};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Measured and reported; a verdict needs a refinement sequence.
    Info,
}

/// One evaluated check. `tolerance` is the bound `measured` is compared
/// against; it is `None` only for [`Verdict::Info`] records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub formula: String,
    pub measured: f64,
    pub tolerance: Option<f64>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckRecord {
    pub fn upper(name: &str, formula: &str, measured: f64, tolerance: f64) -> Self {
        Self::with_verdict(
            name,
            formula,
            measured,
            Some(tolerance),
            measured <= tolerance,
        )
    }

    pub fn lower(name: &str, formula: &str, measured: f64, tolerance: f64) -> Self {
        Self::with_verdict(
            name,
            formula,
            measured,
            Some(tolerance),
            measured >= tolerance,
        )
    }

    pub fn info(name: &str, formula: &str, measured: f64) -> Self {
        CheckRecord {
            name: name.into(),
            formula: formula.into(),
            measured,
            tolerance: None,
            verdict: Verdict::Info,
            detail: None,
        }
    }

    fn with_verdict(
        name: &str,
        formula: &str,
        measured: f64,
        tolerance: Option<f64>,
        ok: bool,
    ) -> Self {
        CheckRecord {
            name: name.into(),
            formula: formula.into(),
            measured,
            tolerance,
            // NaN compares false and fails
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            detail: None,
        }
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}
