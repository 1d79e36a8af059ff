//! Vanishing-viscosity solver for the one-dimensional Burgers–Vlasov system
//!
//! ```text
//! u_t + u u_x = eps u_xx + eps rho_x + j - u rho
//! f_t + v f_x + ((u - v) f)_v = 0
//! ```
//!
//! with `rho = int f dv` and `j = int v f dv`, together with diagnostics that
//! check the solutions against the a priori bounds and weak formulations
//! of the limit problem.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod burgers;
pub mod config;
pub mod diagnostics;
pub mod driver;
pub mod error;
pub mod field;
pub mod grid;
pub mod picard;
pub mod presets;
pub mod quadrature;
pub mod vlasov;

pub use burgers::{
    burgers_step, cfl_dt, control_function, entropy_pair_eval, BurgersOptions, ControlField,
    EntropyPair,
};
pub use config::{InitialData, OutputSpec, ParticleBlob, ScenarioConfig, SolverSpec};
pub use diagnostics::{CheckRecord, DiagnosticsReport, TestFunction, Verdict};
pub use driver::{
    epsilon_sweep, mollified_initial_data, run, run_from, ConvergenceReport, RunOptions, Snapshot,
    StepRecord, Trajectory,
};
pub use error::{Error, Result};
pub use field::{FluidField, KineticField, MomentSet};
pub use grid::GridSpec;
pub use picard::{
    heat_convolve, heat_convolve_dx, picard_iterate, picard_solve, IterationState, PicardSolution,
};
pub use quadrature::{interp2, l1_distance, quad_v, restrict_average};
pub use vlasov::{
    exact_const_u, jacobian, moments, trace_back, vlasov_step, vlasov_step_bilinear, CharState,
    VlasovScheme,
};
