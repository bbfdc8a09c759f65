use serde::{Deserialize, Serialize};

use super::SearchError;

/// Least-squares fit of `log(value)` against `log(scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Fits `value ≈ e^intercept · scale^slope`. Needs at least four points with
/// positive scales and values and at least two distinct scales.
pub fn trend_fit(values: &[(f64, f64)]) -> Result<TrendFit, SearchError> {
    if values.len() < 4 {
        return Err(SearchError::DegenerateInput(format!("{} points, need at least 4", values.len())));
    }
    if values.iter().any(|&(s, v)| !(s > 0.0 && v > 0.0 && s.is_finite() && v.is_finite())) {
        return Err(SearchError::DegenerateInput("scales and values must be positive and finite".into()));
    }
    let xs: Vec<f64> = values.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|p| p.1.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 1e-300 {
        return Err(SearchError::DegenerateInput("all scales are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if ss_tot <= 1e-24 * m { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok(TrendFit { slope, intercept, r_squared, points: values.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = (0..8).map(|k| 2f64.powi(k)).map(|s| (s, 3.0 * s.powf(1.0 / 6.0))).collect();
        let f = trend_fit(&pts).unwrap();
        assert!((f.slope - 1.0 / 6.0).abs() < 1e-9);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_values_have_zero_slope() {
        let pts: Vec<(f64, f64)> = (0..6).map(|k| (2f64.powi(k), 5.0)).collect();
        assert_eq!(trend_fit(&pts).unwrap().slope, 0.0);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(trend_fit(&[(1.0, 1.0); 3]).is_err());
        assert!(trend_fit(&[(2.0, 1.0), (2.0, 3.0), (2.0, 2.0), (2.0, 5.0)]).is_err());
    }
}
