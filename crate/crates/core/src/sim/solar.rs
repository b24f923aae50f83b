use chrono::{DateTime, Datelike, NaiveDate, Timelike, Utc};

/// Cooper's approximation, degrees.
pub fn declination_deg(day_of_year: u32) -> f64 {
    23.44 * (2.0 * std::f64::consts::PI * (284.0 + day_of_year as f64) / 365.0).sin()
}

/// Elevation in degrees at local solar time `solar_hours` (12.0 = solar noon).
pub fn solar_elevation(latitude_deg: f64, date: NaiveDate, solar_hours: f64) -> f64 {
    let phi = latitude_deg.to_radians();
    let delta = declination_deg(date.ordinal()).to_radians();
    let h = (15.0 * (solar_hours - 12.0)).to_radians();
    let s = phi.sin() * delta.sin() + phi.cos() * delta.cos() * h.cos();
    s.clamp(-1.0, 1.0).asin().to_degrees()
}

/// Elevation at a UTC instant; solar time is UTC shifted by longitude/15 hours.
pub fn elevation_at(latitude_deg: f64, longitude_deg: f64, t: DateTime<Utc>) -> f64 {
    let utc_hours = t.num_seconds_from_midnight() as f64 / 3600.0;
    let mut solar = utc_hours + longitude_deg / 15.0;
    let mut date = t.date_naive();
    if solar >= 24.0 {
        solar -= 24.0;
        date = date.succ_opt().unwrap_or(date);
    } else if solar < 0.0 {
        solar += 24.0;
        date = date.pred_opt().unwrap_or(date);
    }
    solar_elevation(latitude_deg, date, solar)
}

pub const DEFAULT_CLEAN_MAX_LUX: f64 = 120_000.0;
pub const CLEAR_SKY_EXPONENT: f64 = 1.2;

pub fn clear_sky_lux(elevation_deg: f64, clean_max_lux: f64, cloud_factor: f64) -> f64 {
    let s = elevation_deg.to_radians().sin();
    if s <= 0.0 {
        return 0.0;
    }
    clean_max_lux * s.powf(CLEAR_SKY_EXPONENT) * cloud_factor
}
