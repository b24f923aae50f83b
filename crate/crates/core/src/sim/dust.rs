use serde::{Deserialize, Serialize};

use crate::soiling::NATURAL_CLEANING_MM;

/// Fraction of the load left after a rain day at or above the cleaning threshold.
pub const HEAVY_RAIN_RESIDUAL: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DepositionParams {
    /// Load units per (ug/m3 * day).
    pub k: f64,
    pub beta: f64,
    pub b_max: f64,
    /// Partial wash rate per mm below the cleaning threshold.
    pub gamma: f64,
}

impl Default for DepositionParams {
    fn default() -> Self {
        Self {
            k: 0.002,
            beta: 0.11084214926661436,
            b_max: 0.5771210513921259,
            gamma: 0.08,
        }
    }
}

impl DepositionParams {
    pub fn blockage_for(&self, load: f64) -> f64 {
        self.b_max * (1.0 - (-self.beta * load).exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DustState {
    pub load: f64,
    pub base_blockage: f64,
}

impl DustState {
    pub fn with_load(load: f64, params: &DepositionParams) -> Self {
        let load = load.max(0.0);
        Self {
            load,
            base_blockage: params.blockage_for(load),
        }
    }
}

pub fn deposit_step(state: DustState, pm10: f64, dt_days: f64, params: &DepositionParams) -> DustState {
    DustState::with_load(state.load + params.k * pm10.max(0.0) * dt_days, params)
}

pub fn rain_wash(state: DustState, rain_mm: f64, params: &DepositionParams) -> DustState {
    let load = if rain_mm >= NATURAL_CLEANING_MM {
        state.load * HEAVY_RAIN_RESIDUAL
    } else if rain_mm > 0.0 {
        state.load * (-params.gamma * rain_mm).exp()
    } else {
        state.load
    };
    DustState::with_load(load, params)
}

/// Base blockage after each day: deposit, then that day's rain.
pub fn daily_trajectory(pm10: &[f64], rain: &[f64], params: &DepositionParams) -> Vec<DustState> {
    let mut state = DustState::default();
    pm10.iter()
        .zip(rain)
        .map(|(&pm, &r)| {
            state = rain_wash(deposit_step(state, pm, 1.0, params), r, params);
            state
        })
        .collect()
}

/// Instantaneous loss factor `c0 + c1 * sin(elev)`, before normalisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AngleModel {
    pub c0: f64,
    pub c1: f64,
}

impl Default for AngleModel {
    fn default() -> Self {
        Self {
            c0: 1.0,
            c1: DEFAULT_C1,
        }
    }
}

// fitted to the week-one midday/afternoon anchors of april-month
pub(crate) const DEFAULT_C1: f64 = 0.8139738773176475;

impl AngleModel {
    pub fn raw(&self, elevation_deg: f64) -> f64 {
        self.c0 + self.c1 * elevation_deg.to_radians().sin().max(0.0)
    }

    /// Mean of `raw` over a day's valid elevations; the divisor that keeps the
    /// daily mean of effective blockage equal to the base value.
    pub fn normaliser(&self, elevations_deg: &[f64]) -> f64 {
        if elevations_deg.is_empty() {
            return 1.0;
        }
        elevations_deg.iter().map(|&e| self.raw(e)).sum::<f64>() / elevations_deg.len() as f64
    }
}

pub fn effective_blockage(base: f64, elevation_deg: f64, angle: &AngleModel, normaliser: f64) -> f64 {
    if normaliser <= 0.0 {
        return base;
    }
    (base * angle.raw(elevation_deg) / normaliser).clamp(0.0, 1.0)
}
