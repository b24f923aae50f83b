use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::generate::{cloud_factor, day_instants};
use super::{
    clear_sky_lux, daily_trajectory, golden_section, nelder_mead, AngleModel, DepositionParams,
    NelderMeadOptions, SimError, SimScenario,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetPoint {
    /// 1-based scenario day.
    pub day: usize,
    pub blockage_pct: f64,
}

/// Intraday anchors: loss at the highest-sun instant and averaged over the
/// last valid hour of the given day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileTarget {
    pub day: usize,
    pub midday_pct: f64,
    pub afternoon_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTargets {
    /// Preset the fit runs against when no scenario is supplied.
    #[serde(default)]
    pub base: Option<String>,
    pub points: Vec<TargetPoint>,
    #[serde(default)]
    pub profile: Option<ProfileTarget>,
}

impl CalibrationTargets {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        toml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("targets serialise")
    }

    /// Day-average anchors for the April field month, with the week-one
    /// midday/late-afternoon profile.
    pub fn april_anchors() -> Self {
        Self {
            base: Some("april-month".into()),
            points: vec![
                TargetPoint { day: 7, blockage_pct: 8.44 },
                TargetPoint { day: 15, blockage_pct: 19.05 },
                TargetPoint { day: 30, blockage_pct: 31.0 },
            ],
            profile: Some(ProfileTarget {
                day: 7,
                midday_pct: 9.86,
                afternoon_pct: 6.17,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub day: usize,
    pub target_pct: f64,
    pub fitted_pct: f64,
}

impl Residual {
    pub fn error_pp(&self) -> f64 {
        self.fitted_pct - self.target_pct
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileFit {
    pub day: usize,
    pub midday_pct: f64,
    pub afternoon_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub deposition: DepositionParams,
    pub angle: AngleModel,
    pub residuals: Vec<Residual>,
    pub profile: Option<ProfileFit>,
    pub warnings: Vec<String>,
}

impl Calibration {
    pub fn apply(&self, scenario: &mut SimScenario) {
        scenario.deposition = self.deposition;
        scenario.angle = self.angle;
    }

    pub fn max_abs_residual_pp(&self) -> f64 {
        self.residuals.iter().map(|r| r.error_pp().abs()).fold(0.0, f64::max)
    }
}

fn check_targets(s: &SimScenario, points: &[TargetPoint]) -> Result<Vec<TargetPoint>, SimError> {
    if points.is_empty() {
        return Err(SimError::InvalidTargets("no target points".into()));
    }
    let n = s.days();
    let mut pts = points.to_vec();
    pts.sort_by_key(|p| p.day);
    for p in &pts {
        if p.day == 0 || p.day > n {
            return Err(SimError::InvalidTargets(format!(
                "day {} outside the scenario's 1..={n}",
                p.day
            )));
        }
        if !(0.0..100.0).contains(&p.blockage_pct) {
            return Err(SimError::InvalidTargets(format!(
                "target {}% on day {} must lie in [0, 100)",
                p.blockage_pct, p.day
            )));
        }
    }
    for w in pts.windows(2) {
        if w[0].day == w[1].day {
            return Err(SimError::InvalidTargets(format!("day {} given twice", w[0].day)));
        }
        // without rain the load never falls, so neither can blockage
        let rained = s.rain_series[w[0].day..w[1].day].iter().any(|&r| r > 0.0);
        if w[1].blockage_pct < w[0].blockage_pct && !rained {
            return Err(SimError::Infeasible(format!(
                "blockage falls from {}% (day {}) to {}% (day {}) with no rain in between",
                w[0].blockage_pct, w[0].day, w[1].blockage_pct, w[1].day
            )));
        }
    }
    Ok(pts)
}

fn loads(s: &SimScenario) -> Vec<f64> {
    let unit = DepositionParams {
        beta: 1.0,
        b_max: 1.0,
        ..s.deposition
    };
    daily_trajectory(&s.pm10_series, &s.rain_series, &unit)
        .iter()
        .map(|st| st.load)
        .collect()
}

/// Fits beta and B_max to day-average targets (k and gamma are kept), then
/// the angle coefficient c1 to the intraday profile when one is given.
pub fn calibrate(s: &SimScenario, targets: &CalibrationTargets) -> Result<Calibration, SimError> {
    s.validate()?;
    let pts = check_targets(s, &targets.points)?;
    let load = loads(s);
    for p in &pts {
        if p.blockage_pct > 0.0 && load[p.day - 1] <= 0.0 {
            return Err(SimError::Infeasible(format!(
                "day {} carries no dust load but targets {}%",
                p.day, p.blockage_pct
            )));
        }
    }
    let frac: Vec<(usize, f64)> = pts.iter().map(|p| (p.day, p.blockage_pct / 100.0)).collect();
    let max_t = frac.iter().map(|p| p.1).fold(0.0, f64::max);
    let mut warnings = Vec::new();

    let mut dep = s.deposition;
    if frac.len() == 1 {
        warnings.push(
            "a single target cannot pin both beta and B_max; B_max kept, beta solved".to_string(),
        );
        let (day, t) = frac[0];
        if t >= dep.b_max {
            return Err(SimError::Infeasible(format!(
                "target {}% is not below B_max {}%",
                t * 100.0,
                dep.b_max * 100.0
            )));
        }
        if t > 0.0 {
            dep.beta = -(1.0 - t / dep.b_max).ln() / load[day - 1];
        }
    } else {
        let sse = |v: &[f64]| {
            let (beta, b_max) = (v[0].exp(), v[1]);
            if !(b_max > max_t && b_max <= 1.0) || !beta.is_finite() {
                return 1e9;
            }
            frac.iter()
                .map(|&(d, t)| {
                    let b = b_max * (1.0 - (-beta * load[d - 1]).exp());
                    (b - t).powi(2)
                })
                .sum()
        };
        let mut best: Option<(Vec<f64>, f64)> = None;
        for ln_beta in [-6.0, -3.0, 0.0] {
            for f in [0.1, 0.4, 0.8] {
                let x0 = [ln_beta, max_t + f * (1.0 - max_t)];
                let m = nelder_mead(sse, &x0, NelderMeadOptions::default());
                if best.as_ref().is_none_or(|b| m.f < b.1) {
                    best = Some((m.x, m.f));
                }
            }
        }
        let (x, _) = best.expect("at least one start");
        dep.beta = x[0].exp();
        dep.b_max = x[1];
    }

    let traj = daily_trajectory(&s.pm10_series, &s.rain_series, &dep);
    let residuals = pts
        .iter()
        .map(|p| Residual {
            day: p.day,
            target_pct: p.blockage_pct,
            fitted_pct: traj[p.day - 1].base_blockage * 100.0,
        })
        .collect();

    let mut angle = s.angle;
    let mut profile = None;
    if let Some(pt) = targets.profile {
        let shape = DayShape::of(s, pt.day)?;
        if !(pt.afternoon_pct > 0.0 && pt.midday_pct >= pt.afternoon_pct) {
            return Err(SimError::Infeasible(
                "profile needs midday loss at or above a positive afternoon loss".into(),
            ));
        }
        let want = pt.midday_pct / pt.afternoon_pct;
        let c0 = angle.c0;
        angle.c1 = golden_section(
            |c1| (shape.ratio(&AngleModel { c0, c1 }) - want).powi(2),
            0.0,
            50.0,
            1e-12,
        );
        let limit = shape.ratio(&AngleModel { c0, c1: 50.0 });
        if want > limit {
            warnings.push(format!(
                "midday/afternoon ratio {want:.3} exceeds what this site geometry allows ({limit:.3})"
            ));
        }
        let base = traj[pt.day - 1].base_blockage * 100.0;
        let (mid, aft) = shape.profile(&angle);
        profile = Some(ProfileFit {
            day: pt.day,
            midday_pct: base * mid,
            afternoon_pct: base * aft,
        });
    }

    Ok(Calibration {
        deposition: dep,
        angle,
        residuals,
        profile,
        warnings,
    })
}

/// Valid-instant elevations of one day, split out for the profile fit.
struct DayShape {
    all: Vec<f64>,
    peak: f64,
    last_hour: Vec<f64>,
}

impl DayShape {
    fn of(s: &SimScenario, day: usize) -> Result<Self, SimError> {
        if day == 0 || day > s.days() {
            return Err(SimError::InvalidTargets(format!("profile day {day} out of range")));
        }
        let tz = s.tz()?;
        let date: NaiveDate = s.start_date + chrono::Days::new(day as u64 - 1);
        let cloud = cloud_factor(s, s.rain_series[day - 1]);
        let valid: Vec<_> = day_instants(s, tz, date)
            .into_iter()
            .filter(|&(_, e)| clear_sky_lux(e, s.clean_max_lux, cloud) >= s.day_floor_lux)
            .collect();
        let Some(&(last, _)) = valid.last() else {
            return Err(SimError::Infeasible(format!("day {day} has no valid daylight instants")));
        };
        let cut = last - chrono::TimeDelta::hours(1);
        Ok(Self {
            peak: valid.iter().map(|v| v.1).fold(f64::MIN, f64::max),
            last_hour: valid.iter().filter(|v| v.0 > cut).map(|v| v.1).collect(),
            all: valid.iter().map(|v| v.1).collect(),
        })
    }

    fn ratio(&self, a: &AngleModel) -> f64 {
        a.raw(self.peak) / a.normaliser(&self.last_hour)
    }

    /// (midday, afternoon) as multiples of the day's base blockage.
    fn profile(&self, a: &AngleModel) -> (f64, f64) {
        let n = a.normaliser(&self.all);
        (a.raw(self.peak) / n, a.normaliser(&self.last_hour) / n)
    }
}
