use serde::{Deserialize, Serialize};

use super::{DustLevel, SoilingError};

/// Open-sensor readings below this are too unstable to use (low sun, dawn/dusk).
pub const DEFAULT_DAY_FLOOR_LUX: f64 = 1000.0;

/// Signed relative change `(v2 - v1) / v1`.
pub fn relative_change(v1: f64, v2: f64) -> Result<f64, SoilingError> {
    if v1 <= 0.0 || !v1.is_finite() {
        return Err(SoilingError::NonPositiveReference(v1));
    }
    Ok((v2 - v1) / v1)
}

fn loss_fraction(reference: f64, measured: f64) -> f64 {
    ((reference - measured) / reference).clamp(0.0, 1.0)
}

fn check_lux(lux: f64) -> Result<(), SoilingError> {
    if !lux.is_finite() || lux < 0.0 {
        return Err(SoilingError::InvalidLux(lux));
    }
    Ok(())
}

/// Fraction of light lost through the dusty glass relative to the open sensor.
///
/// Glass brighter than open (sensor noise) clamps to zero.
pub fn blockage_day(open_lux: f64, glass_lux: f64, floor_lux: f64) -> Result<f64, SoilingError> {
    check_lux(open_lux)?;
    check_lux(glass_lux)?;
    if open_lux < floor_lux || open_lux <= 0.0 {
        return Err(SoilingError::BelowValidityFloor {
            lux: open_lux,
            floor: floor_lux,
        });
    }
    Ok(loss_fraction(open_lux, glass_lux))
}

/// Fraction of the calibrated LED output that does not reach the sensor.
pub fn blockage_night(led_reference_lux: f64, measured_lux: f64) -> Result<f64, SoilingError> {
    if led_reference_lux <= 0.0 || !led_reference_lux.is_finite() {
        return Err(SoilingError::NonPositiveReference(led_reference_lux));
    }
    check_lux(measured_lux)?;
    Ok(loss_fraction(led_reference_lux, measured_lux))
}

/// Lower edges of the Moderate, High and Severe levels (left-closed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelBounds {
    pub moderate: f64,
    pub high: f64,
    pub severe: f64,
}

impl Default for LevelBounds {
    fn default() -> Self {
        Self {
            moderate: 0.05,
            high: 0.20,
            severe: 0.40,
        }
    }
}

impl LevelBounds {
    pub fn new(moderate: f64, high: f64, severe: f64) -> Result<Self, SoilingError> {
        if !(0.0 < moderate && moderate < high && high < severe && severe <= 1.0) {
            return Err(SoilingError::InvalidBounds(
                "need 0 < moderate < high < severe <= 1",
            ));
        }
        Ok(Self {
            moderate,
            high,
            severe,
        })
    }

    pub fn classify(&self, blockage: f64) -> Result<DustLevel, SoilingError> {
        if !(0.0..=1.0).contains(&blockage) {
            return Err(SoilingError::BlockageOutOfRange(blockage));
        }
        Ok(if blockage >= self.severe {
            DustLevel::Severe
        } else if blockage >= self.high {
            DustLevel::High
        } else if blockage >= self.moderate {
            DustLevel::Moderate
        } else {
            DustLevel::Low
        })
    }
}

/// Classify with the default level boundaries.
pub fn classify_dust_level(blockage: f64) -> Result<DustLevel, SoilingError> {
    LevelBounds::default().classify(blockage)
}
