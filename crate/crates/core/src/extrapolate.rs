//! Extrapolation of `E(eps)` to `eps = 0` from the last three samples.
//!
//! [`richardson`] assumes `E = L + a eps`. [`log_corrected`] assumes
//! `E = L + a eps ln(l / eps)`, the leading correction when a transition layer
//! of width `eps` overlaps a bulk density that grows like `1 / r` toward
//! point singularities a distance `l` apart.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extrapolation {
    /// Intercept at `eps = 0`.
    pub limit: f64,
    /// Fitted slope `dE/deps`.
    pub slope: f64,
    pub points: usize,
}

fn check_samples(eps: &[f64], values: &[f64]) -> Result<()> {
    if eps.len() != values.len() {
        return Err(Error::Dimension(format!(
            "{} epsilons but {} energies",
            eps.len(),
            values.len()
        )));
    }
    if eps.len() < 3 {
        return Err(Error::Domain(format!(
            "extrapolation needs at least 3 points, got {}",
            eps.len()
        )));
    }
    if eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Domain("epsilons must be strictly decreasing".into()));
    }
    Ok(())
}

/// Least-squares line `y = L + a x` through three points.
fn fit_line(x: &[f64], y: &[f64]) -> Extrapolation {
    let mx = x.iter().sum::<f64>() / 3.0;
    let my = y.iter().sum::<f64>() / 3.0;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    Extrapolation {
        limit: my - slope * mx,
        slope,
        points: 3,
    }
}

/// Least-squares fit of `E = L + a eps` through the last three samples.
pub fn richardson(eps: &[f64], values: &[f64]) -> Result<Extrapolation> {
    check_samples(eps, values)?;
    let n = eps.len();
    Ok(fit_line(&eps[n - 3..], &values[n - 3..]))
}

/// Least-squares fit of `E = L + a eps ln(length / eps)` through the last
/// three samples; `slope` is `a`.
pub fn log_corrected(eps: &[f64], values: &[f64], length: f64) -> Result<Extrapolation> {
    check_samples(eps, values)?;
    if !(length > 0.0) {
        return Err(Error::Domain(format!("length scale must be positive, got {length}")));
    }
    let n = eps.len();
    let x: Vec<f64> = eps[n - 3..].iter().map(|e| e * (length / e).ln()).collect();
    Ok(fit_line(&x, &values[n - 3..]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_affine_data() {
        let eps = [0.1, 0.05, 0.025, 0.0125];
        let e: Vec<f64> = eps.iter().map(|x| 0.88 + 3.0 * x).collect();
        let r = richardson(&eps, &e).unwrap();
        assert!((r.limit - 0.88).abs() < 1e-12);
        assert!((r.slope - 3.0).abs() < 1e-10);
    }

    #[test]
    fn uses_last_three_only() {
        let eps = [0.4, 0.2, 0.1, 0.05];
        let e = [100.0, 2.2, 2.1, 2.05];
        assert!((richardson(&eps, &e).unwrap().limit - 2.0).abs() < 1e-12);
    }

    #[test]
    fn log_fit_exact_on_model_data() {
        let eps: [f64; 4] = [0.05, 0.025, 0.0125, 0.00625];
        let e: Vec<f64> = eps.iter().map(|x| 0.75 - 6.0 * x * (0.5 / x).ln()).collect();
        let r = log_corrected(&eps, &e, 0.5).unwrap();
        assert!((r.limit - 0.75).abs() < 1e-12);
        assert!((r.slope + 6.0).abs() < 1e-9);
        // the linear fit misses the same data by a wide margin
        assert!(richardson(&eps, &e).unwrap().limit < 0.7);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(log_corrected(&[0.1, 0.05, 0.01], &[1.0; 3], 0.0).is_err());
        assert!(richardson(&[0.1, 0.05], &[1.0, 1.0]).is_err());
        assert!(richardson(&[0.1, 0.2, 0.05], &[1.0, 1.0, 1.0]).is_err());
        assert!(richardson(&[0.1, 0.05, 0.01], &[1.0, 1.0]).is_err());
    }
}
