//! Seeded environment simulator: sun, dust deposition, rain washing and
//! the sensor streams they produce.

mod calibrate;
mod dust;
mod generate;
mod optimize;
mod scenario;
mod solar;

use thiserror::Error;

pub use calibrate::{
    calibrate, Calibration, CalibrationTargets, ProfileFit, ProfileTarget, Residual, TargetPoint,
};
pub use dust::{
    daily_trajectory, deposit_step, effective_blockage, rain_wash, AngleModel, DepositionParams,
    DustState, HEAVY_RAIN_RESIDUAL,
};
pub use generate::{generate_stream, recover_points, SimDay, SimOutput, TruthRow};
pub use optimize::{golden_section, nelder_mead, Minimum, NelderMeadOptions};
pub use scenario::{SimScenario, PRESET_NAMES};
pub use solar::{
    clear_sky_lux, declination_deg, elevation_at, solar_elevation, CLEAR_SKY_EXPONENT,
    DEFAULT_CLEAN_MAX_LUX,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("unknown scenario preset {0:?}")]
    UnknownPreset(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid calibration targets: {0}")]
    InvalidTargets(String),
    #[error("infeasible calibration targets: {0}")]
    Infeasible(String),
}
