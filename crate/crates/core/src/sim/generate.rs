use chrono::{DateTime, NaiveDate, TimeDelta, TimeZone, Utc};
use chrono_tz::Tz;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    clear_sky_lux, deposit_step, effective_blockage, elevation_at, rain_wash, DustState, SimError,
    SimScenario,
};
use crate::soiling::{pair_readings, BlockagePoint, LuxReading, Mode, Role};

/// Emitted ground truth for one reading instant.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthRow {
    pub timestamp: DateTime<Utc>,
    pub mode: Mode,
    pub blockage: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimDay {
    pub date: NaiveDate,
    pub pm10: f64,
    pub rain_mm: f64,
    pub state: DustState,
    /// Instants whose clean open lux clears the day floor.
    pub valid_instants: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimOutput {
    pub readings: Vec<LuxReading>,
    pub truth: Vec<TruthRow>,
    pub days: Vec<SimDay>,
    pub instants: usize,
}

pub(crate) fn local_midnight(tz: Tz, date: NaiveDate) -> DateTime<Utc> {
    let naive = date.and_hms_opt(0, 0, 0).expect("midnight");
    tz.from_local_datetime(&naive)
        .earliest()
        // a zone whose midnight falls in a gap: the instant one hour later exists
        .unwrap_or_else(|| tz.from_local_datetime(&(naive + TimeDelta::hours(1))).unwrap())
        .with_timezone(&Utc)
}

/// Sample instants of one local day with their solar elevation.
pub(crate) fn day_instants(s: &SimScenario, tz: Tz, date: NaiveDate) -> Vec<(DateTime<Utc>, f64)> {
    let start = local_midnight(tz, date);
    let end = local_midnight(tz, date.succ_opt().expect("date in range"));
    let step = TimeDelta::seconds(s.sample_interval_s as i64);
    let mut out = Vec::with_capacity(86_400 / s.sample_interval_s as usize);
    let mut t = start;
    while t < end {
        out.push((t, elevation_at(s.latitude, s.longitude, t)));
        t += step;
    }
    out
}

pub(crate) fn cloud_factor(s: &SimScenario, rain_mm: f64) -> f64 {
    if rain_mm > 0.0 {
        s.rain_cloud_factor
    } else {
        1.0
    }
}

fn round_lux(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// Deterministic in the scenario (seed included): same input, same output.
pub fn generate_stream(s: &SimScenario) -> Result<SimOutput, SimError> {
    s.validate()?;
    let tz = s.tz()?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut noise = move || s.noise * (2.0 * rng.random::<f64>() - 1.0);
    let mut out = SimOutput::default();
    let mut state = DustState::default();

    for (i, date) in s.start_date.iter_days().take(s.days()).enumerate() {
        let (pm, rain) = (s.pm10_series[i], s.rain_series[i]);
        state = rain_wash(deposit_step(state, pm, 1.0, &s.deposition), rain, &s.deposition);
        let cloud = cloud_factor(s, rain);

        let instants = day_instants(s, tz, date);
        let clean: Vec<f64> = instants
            .iter()
            .map(|&(_, e)| clear_sky_lux(e, s.clean_max_lux, cloud))
            .collect();
        let valid_elev: Vec<f64> = instants
            .iter()
            .zip(&clean)
            .filter(|(_, &lux)| lux >= s.day_floor_lux)
            .map(|(&(_, e), _)| e)
            .collect();
        let norm = s.angle.normaliser(&valid_elev);

        for (k, (&(t, elev), &lux)) in instants.iter().zip(&clean).enumerate() {
            let eff = effective_blockage(state.base_blockage, elev, &s.angle, norm);
            let open = round_lux(lux * (1.0 + noise()));
            let glass = round_lux(lux * (1.0 - eff) * (1.0 + noise()));
            out.readings.push(reading(s, t, Role::Open, Mode::Day, open));
            out.readings.push(reading(s, t, Role::UnderGlass, Mode::Day, glass));
            if lux >= s.day_floor_lux {
                out.truth.push(TruthRow {
                    timestamp: t,
                    mode: Mode::Day,
                    blockage: eff,
                });
            }
            if k == 0 {
                // off the sample grid so it never shares (node, ts, role) with a day reading
                let tn = t + TimeDelta::milliseconds(s.sample_interval_s as i64 * 500);
                let led = round_lux(s.led_reference_lux * (1.0 - state.base_blockage) * (1.0 + noise()));
                out.readings.push(reading(s, tn, Role::UnderGlass, Mode::Night, led));
                out.truth.push(TruthRow {
                    timestamp: tn,
                    mode: Mode::Night,
                    blockage: state.base_blockage,
                });
            }
        }
        out.instants += instants.len();
        out.days.push(SimDay {
            date,
            pm10: pm,
            rain_mm: rain,
            state,
            valid_instants: valid_elev.len(),
        });
    }
    Ok(out)
}

fn reading(s: &SimScenario, t: DateTime<Utc>, role: Role, mode: Mode, lux: f64) -> LuxReading {
    LuxReading {
        node_id: s.node_id.clone(),
        timestamp: t,
        role,
        mode,
        lux,
    }
}

/// Blockage points recovered from a stream the way the ingestion service
/// computes them: pair, apply the day floor, and score night readings
/// against the LED reference. Rejected readings are dropped.
pub fn recover_points(
    readings: &[LuxReading],
    window: TimeDelta,
    floor_lux: f64,
    led_reference_lux: Option<f64>,
) -> Vec<BlockagePoint> {
    let outcome = pair_readings(readings, window);
    let mut points: Vec<BlockagePoint> = outcome
        .pairs
        .iter()
        .filter_map(|p| BlockagePoint::day(p.glass.timestamp, p.open.lux, p.glass.lux, floor_lux).ok())
        .chain(outcome.night.iter().filter_map(|r| {
            BlockagePoint::night(r.timestamp, led_reference_lux, r.lux, &r.node_id).ok()
        }))
        .collect();
    points.sort_by_key(|p| p.timestamp);
    points
}
