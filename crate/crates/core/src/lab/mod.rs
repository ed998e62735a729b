//! Gauss-divisible ensembles `A + √t·B` and their bulk correlation functions.

mod correlation;
mod ensemble;
mod experiment;
mod fixed_point;
mod kernel;

pub use correlation::{
    chi_square, disk_intersection_area, estimate_correlation, ChiSquare, CorrelationBin, CorrelationEstimate,
    ScalarEstimate, MIN_EXPECTED_PAIRS, PAIR_RANGE_FRACTION,
};
pub use ensemble::{
    draw_noise, sample_ensemble, sample_ensemble_with, EnsembleRun, FailedSample, RunManifest, MANIFEST_SCHEMA_VERSION,
};
pub use experiment::{
    universality_experiment, AuditOutcome, BandCheck, ExperimentConfig, ExperimentOutput, ExperimentReport,
    HypothesisGate, BAND_Z, CHI2_P_MIN, DEFAULT_SEED, PAIR_BAND_RANGE,
};
pub use fixed_point::{solve_eta_star, FixedPointResult};
pub use kernel::{
    ginibre_kernel, ginibre_kernel_entry, ginibre_pair_correlation, ginibre_pair_correlation_bin, GinibreKernelEval,
};
