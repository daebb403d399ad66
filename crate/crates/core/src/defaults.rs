//! Parameters of the reference setup: a 773.5 nm-pumped type-II source of
//! degenerate 1547 nm pairs, up-converted to 525 nm by 795 nm-pumped
//! converters. Used as defaults by the CLI and the acceptance suite.

pub const SOURCE_PUMP_NM: f64 = 773.5;
pub const DEGENERATE_NM: f64 = 1547.0;
pub const CONVERTER_PUMP_NM: f64 = 795.0;
pub const CRYSTAL_LENGTH_MM: f64 = 20.0;

/// Visibilities reported for the four interference measurements.
pub const SOURCE_HOM_VISIBILITY: f64 = 0.979;
pub const UPCONVERTED_HOM_VISIBILITY: f64 = 0.9672;
pub const VISIBLE_HOM_VISIBILITY: f64 = 0.9766;
pub const ONE_PHOTON_FRINGE_VISIBILITY: f64 = 0.9751;
pub const TWO_PHOTON_FRINGE_VISIBILITY: f64 = 0.8493;
pub const TWO_PHOTON_FRINGE_VISIBILITY_SIGMA: f64 = 0.0318;

/// Peak measured internal conversion efficiency and its circulating power.
pub const CALIBRATION_POWER_W: f64 = 0.660;
pub const CALIBRATION_EFFICIENCY: f64 = 0.37;

/// Quoted overall detection efficiency.
pub const QUOTED_OVERALL_EFFICIENCY: f64 = 2.0e-6;

/// Pair rate and bin time giving a few hundred coincidences per bin.
pub const PAIR_RATE_HZ: f64 = 50.0;
pub const INTEGRATION_TIME_S: f64 = 10.0;

/// Phase plate used to map tilt angle to phase.
pub const PLATE_THICKNESS_MM: f64 = 1.0;
pub const PLATE_INDEX: f64 = 1.46;
