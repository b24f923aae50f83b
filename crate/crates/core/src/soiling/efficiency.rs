use serde::{Deserialize, Serialize};

use super::SoilingError;

/// Linear relation between blockage (%) and PV efficiency loss (%).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyModel {
    pub slope: f64,
    pub intercept: f64,
    pub pearson_r: f64,
}

/// Ordinary least squares of efficiency loss on blockage, both in percent.
pub fn fit_efficiency_model(rows: &[(f64, f64)]) -> Result<EfficiencyModel, SoilingError> {
    if rows.len() < 2 {
        return Err(SoilingError::DegenerateFit("need at least two rows"));
    }
    if rows.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(SoilingError::DegenerateFit("non-finite value"));
    }
    let n = rows.len() as f64;
    let mean_x = rows.iter().map(|r| r.0).sum::<f64>() / n;
    let mean_y = rows.iter().map(|r| r.1).sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(x, y) in rows {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 {
        return Err(SoilingError::DegenerateFit("constant blockage column"));
    }
    let slope = sxy / sxx;
    // constant y: the line is exact but correlation is undefined
    let pearson_r = if syy == 0.0 {
        0.0
    } else {
        (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
    };
    Ok(EfficiencyModel {
        slope,
        intercept: mean_y - slope * mean_x,
        pearson_r,
    })
}

pub fn predict_efficiency_loss(model: &EfficiencyModel, blockage_pct: f64) -> f64 {
    model.slope * blockage_pct + model.intercept
}

impl EfficiencyModel {
    pub fn predict(&self, blockage_pct: f64) -> f64 {
        predict_efficiency_loss(self, blockage_pct)
    }
}
