//! Scan drivers, photon counting, visibility fits and efficiency budgets.

pub mod budget;
pub mod counting;
pub mod scan;
pub mod visibility;

pub use budget::{
    efficiency_budget, metrology_limits, EfficiencyBudget, EfficiencyChain, EfficiencyStage,
    MetrologyLimits, BUDGET_AGREEMENT_FACTOR,
};
pub use counting::{
    point_rng, poisson_draw, poisson_draws, poisson_sample, sample_counts, Sampling,
};
pub use scan::{
    bunching_scan, fock_bunching_coincidence, fock_fringe_probabilities, fock_hom_coincidence,
    fringe_closed_form, hom_scan, noon_fringe, plate_phase, Acquisition, PhasePlate, ScanAxis,
    ScanMetadata, ScanResult, FRINGE_PHASE_OFFSET,
};
pub use visibility::{fit_visibility, sql_verdict, FitReport, SqlVerdict};
