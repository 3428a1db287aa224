//! Configuration files, grid and exponent sweeps, the verification suite
//! and the run manifest; everything the `qcs` binary drives.

mod config;
mod exponents;
mod grid;
mod manifest;
mod verify;

pub use config::{
    config_digest, load_config, parse_config, to_document, ConfigDocument, ConfigError,
};
pub use exponents::{sweep_exponent, write_exponent_csv, DirectionMode, ExponentRow, Target};
pub use grid::{
    sweep_distortion, write_field_csv, Axis, FieldGrid, FieldMetrics, FieldRecord, GridSpec,
};
pub use manifest::RunManifest;
pub use verify::{
    run_verification_suite, CenterExponent, CheckOutcome, FailureWitness, SuiteOptions,
    VerificationReport,
};

/// Lossless decimal rendering used by every CSV writer: 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}
