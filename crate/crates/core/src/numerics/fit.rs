//! Small fitting helpers used by the estimate checks: log-log slopes and
//! fitted constants with a calibration/validation split.

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Slope of log(y) against log(x).
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    slope(&lx, &ly)
}

/// Result of fitting a constant `c` with `ratio ≤ c` on a calibration set and
/// checking it on held-out samples.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedConstant {
    pub fitted: f64,
    pub max_validation: f64,
    /// `max_validation ≤ factor · fitted`
    pub stable: bool,
}

/// Fits `c = max(calibration)` and checks every validation ratio stays within `factor · c`.
pub fn fit_constant(calibration: &[f64], validation: &[f64], factor: f64) -> FittedConstant {
    let fitted = calibration.iter().cloned().fold(0.0, f64::max);
    let max_validation = validation.iter().cloned().fold(0.0, f64::max);
    FittedConstant { fitted, max_validation, stable: max_validation <= factor * fitted.max(f64::MIN_POSITIVE) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-1.5)).collect();
        assert!((loglog_slope(&xs, &ys) + 1.5).abs() < 1e-12);
    }

    #[test]
    fn fitted_constant_flags_outliers() {
        assert!(fit_constant(&[1.0, 2.0], &[3.9], 2.0).stable);
        assert!(!fit_constant(&[1.0, 2.0], &[4.1], 2.0).stable);
    }
}
