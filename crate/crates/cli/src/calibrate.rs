use std::fs;

use anyhow::Context;
use soilsense_core::sim::{calibrate, CalibrationTargets};

use crate::args::{CalibrateArgs, Global};
use crate::simulate::{apply_overrides, load_scenario};

pub fn run(g: &Global, a: &CalibrateArgs) -> anyhow::Result<()> {
    let text = fs::read_to_string(&a.targets)
        .with_context(|| format!("reading {}", a.targets.display()))?;
    let targets = CalibrationTargets::from_toml(&text)
        .with_context(|| format!("targets {}", a.targets.display()))?;
    let base = match (&a.scenario, &targets.base) {
        (Some(s), _) | (None, Some(s)) => s.clone(),
        (None, None) => {
            return Err(crate::UsageError(
                "no scenario: pass --scenario or set `base` in the targets file".into(),
            )
            .into())
        }
    };
    let mut s = load_scenario(&base)?;
    apply_overrides(&mut s, g);
    let fit = calibrate(&s, &targets)?;
    for w in &fit.warnings {
        eprintln!("warning: {w}");
    }
    let d = &fit.deposition;
    println!(
        "k={} beta={} b_max={} gamma={} c0={} c1={}",
        d.k, d.beta, d.b_max, d.gamma, fit.angle.c0, fit.angle.c1
    );
    println!("day target_pct fitted_pct residual_pp");
    for r in &fit.residuals {
        println!(
            "{} {:.2} {:.2} {:+.2}",
            r.day,
            r.target_pct,
            r.fitted_pct,
            r.error_pp()
        );
    }
    if let Some(p) = &fit.profile {
        println!(
            "profile day {}: midday {:.2}%, last valid hour {:.2}%",
            p.day, p.midday_pct, p.afternoon_pct
        );
    }
    fit.apply(&mut s);
    if let Some(out) = &a.out {
        fs::write(out, s.to_toml()).with_context(|| format!("writing {}", out.display()))?;
        eprintln!("wrote {}", out.display());
    }
    Ok(())
}
