//! Runtime verification of the distortion bound and of the stretching
//! behaviour at the centers.

mod distortion;
mod exponent;
mod stretching;

pub use distortion::{
    alternating_tail, check_determinant_bound, check_operator_norm_bound, check_pk_chain,
    determinant_expansion, distortion_report, DistortionReport, SPECTRUM_SLACK,
};
pub use exponent::{estimate_exponent, ExponentEstimate, ScaleLadder};
pub use stretching::{
    calibrate_stretch_constant, check_stretch_bound, predict_r_star, split_tail_check,
    stretching_lower_bound, LowerBoundCheck, RStarPlan, StretchBoundReport, StretchCalibration,
    TailSums, CALIBRATION_MARGIN,
};
