//! Canceller settings: closed-form seeds, direct-search refinement and an
//! empirical check of the phase constant.

mod analytic;
mod search;
mod settings;

pub use analytic::{
    analytic_alpha, analytic_tau2, analytic_tau2_with_phase, seed_settings, PHASE_CONSTANT,
};
pub use search::{
    auto_tune, golden_section, refine, refine_on_probe, refine_prepared, verify_phase_constant,
    TuneReport, ALPHA_TOLERANCE, MAX_SWEEPS, SWEEP_IMPROVEMENT_DB, TAU2_TOLERANCE,
};
pub use settings::SicSettings;
