//! Straight-line least squares and the slope → weak value rule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    /// Residual sum of squares (weighted, for the weighted fit).
    pub rss: f64,
}

fn check_points(points: &[(f64, f64)]) -> Result<()> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints(points.len()));
    }
    let x0 = points[0].0;
    if points.iter().all(|p| p.0 == x0) {
        return Err(Error::DegenerateAbscissa);
    }
    Ok(())
}

/// Ordinary least squares for `y = intercept + slope·x`.
///
/// `slope_stderr` uses the residual variance `rss/(n − 2)`; it is zero for
/// two points.
pub fn least_squares_line(points: &[(f64, f64)]) -> Result<FitResult> {
    check_points(points)?;
    let n = points.len() as f64;
    let x_mean = points.iter().map(|p| p.0).sum::<f64>() / n;
    let y_mean = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in points {
        let dx = x - x_mean;
        sxx += dx * dx;
        sxy += dx * (y - y_mean);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let rss: f64 = points
        .iter()
        .map(|&(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let slope_stderr = if points.len() > 2 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(FitResult {
        slope,
        intercept,
        slope_stderr,
        rss,
    })
}

/// Weighted least squares with weights `1/σᵢ²`.
///
/// The variances are taken as known, so `slope_stderr = 1/√Σwᵢ(xᵢ − x̄)²`
/// without rescaling by the residuals.
pub fn least_squares_line_weighted(points: &[(f64, f64)], weights: &[f64]) -> Result<FitResult> {
    check_points(points)?;
    if weights.len() != points.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            found: weights.len(),
        });
    }
    if let Some(&w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::domain("weight", w, "(0, ∞)"));
    }
    let wsum: f64 = weights.iter().sum();
    let x_mean = points
        .iter()
        .zip(weights)
        .map(|(p, w)| w * p.0)
        .sum::<f64>()
        / wsum;
    let y_mean = points
        .iter()
        .zip(weights)
        .map(|(p, w)| w * p.1)
        .sum::<f64>()
        / wsum;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (&(x, y), &w) in points.iter().zip(weights) {
        let dx = x - x_mean;
        sxx += w * dx * dx;
        sxy += w * dx * (y - y_mean);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let rss = points
        .iter()
        .zip(weights)
        .map(|(&(x, y), w)| w * (y - intercept - slope * x).powi(2))
        .sum();
    Ok(FitResult {
        slope,
        intercept,
        slope_stderr: sxx.recip().sqrt(),
        rss,
    })
}

/// `(−slope/2, slope_stderr/2)`.
pub fn weak_value_estimate(fit: &FitResult) -> (f64, f64) {
    (-fit.slope / 2.0 + 0.0, fit.slope_stderr / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ite::{analytic_incidence, transmission_to_time, AttenuationSchedule};
    use crate::qstate::Complex;
    use proptest::prelude::*;

    #[test]
    fn two_points() {
        let f = least_squares_line(&[(0.0, 1.0), (1.0, 0.0)]).unwrap();
        assert_eq!(f.slope, -1.0);
        assert_eq!(f.intercept, 1.0);
        assert_eq!(f.slope_stderr, 0.0);
        assert_eq!(f.rss, 0.0);
    }

    #[test]
    fn flat_data_gives_zero_weak_value() {
        let f = least_squares_line(&[(0.0, 1.0), (0.1, 1.0), (0.2, 1.0), (0.5, 1.0)]).unwrap();
        assert_eq!(f.slope, 0.0);
        assert_eq!(weak_value_estimate(&f), (0.0, 0.0));
    }

    #[test]
    fn collinear_points_have_zero_stderr() {
        let pts: Vec<_> = (0..5).map(|i| (i as f64, 3.0 - 2.0 * i as f64)).collect();
        let f = least_squares_line(&pts).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-15);
        assert!(f.slope_stderr < 1e-15);
    }

    #[test]
    fn stderr_matches_textbook_formula() {
        // y = 1 + x with residuals (+0.1, −0.1, −0.1, +0.1) at x = 0..3
        let pts = [(0.0, 1.1), (1.0, 1.9), (2.0, 2.9), (3.0, 4.1)];
        let f = least_squares_line(&pts).unwrap();
        // Σ(x−x̄)² = 5, Σ(x−x̄)(y−ȳ) = 5.0 → slope 1.0
        assert!((f.slope - 1.0).abs() < 1e-14);
        assert!((f.intercept - 1.0).abs() < 1e-14);
        assert!((f.rss - 0.04).abs() < 1e-14);
        assert!((f.slope_stderr - (0.04f64 / 2.0 / 5.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn errors() {
        assert_eq!(
            least_squares_line(&[(1.0, 2.0)]).unwrap_err(),
            Error::TooFewPoints(1)
        );
        assert_eq!(
            least_squares_line(&[(1.0, 2.0), (1.0, 3.0)]).unwrap_err(),
            Error::DegenerateAbscissa
        );
        assert!(least_squares_line_weighted(&[(0.0, 1.0), (1.0, 2.0)], &[1.0]).is_err());
        assert!(least_squares_line_weighted(&[(0.0, 1.0), (1.0, 2.0)], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn exact_half_weak_value_curve_fits_slope_minus_one() {
        let pts: Vec<_> = AttenuationSchedule::default()
            .transmissions()
            .iter()
            .map(|&tr| {
                let t = transmission_to_time(tr).unwrap();
                (t, analytic_incidence(Complex::new(0.5, 0.0), t))
            })
            .collect();
        let f = least_squares_line(&pts).unwrap();
        assert!((f.slope + 1.0).abs() < 0.01);
    }

    #[test]
    fn weak_value_from_slope() {
        let mk = |slope| FitResult {
            slope,
            intercept: 1.0,
            slope_stderr: 0.2,
            rss: 0.0,
        };
        assert_eq!(weak_value_estimate(&mk(-1.0)), (0.5, 0.1));
        assert_eq!(weak_value_estimate(&mk(0.0)).0, 0.0);
        assert_eq!(weak_value_estimate(&mk(-2.0)).0, 1.0);
    }

    #[test]
    fn uniform_weights_reproduce_ols() {
        let pts = [(0.0, 1.1), (1.0, 1.9), (2.0, 2.9), (3.0, 4.1)];
        let a = least_squares_line(&pts).unwrap();
        let b = least_squares_line_weighted(&pts, &[4.0; 4]).unwrap();
        assert!((a.slope - b.slope).abs() < 1e-14);
        assert!((a.intercept - b.intercept).abs() < 1e-14);
        // σ = 1/2 per point: stderr = (1/2)/√5
        assert!((b.slope_stderr - 0.5 / 5f64.sqrt()).abs() < 1e-15);
    }

    fn arb_points() -> impl Strategy<Value = Vec<(f64, f64)>> {
        proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 3..8).prop_filter(
            "needs spread in x",
            |pts| {
                let (lo, hi) = pts
                    .iter()
                    .fold((f64::MAX, f64::MIN), |(l, h), p| (l.min(p.0), h.max(p.0)));
                hi - lo > 0.1
            },
        )
    }

    proptest! {
        #[test]
        fn shifting_y_moves_only_the_intercept(pts in arb_points(), shift in -10.0..10.0f64) {
            let a = least_squares_line(&pts).unwrap();
            let shifted: Vec<_> = pts.iter().map(|&(x, y)| (x, y + shift)).collect();
            let b = least_squares_line(&shifted).unwrap();
            prop_assert!((a.slope - b.slope).abs() <= 1e-14 * (1.0 + a.slope.abs()));
            prop_assert!((b.intercept - a.intercept - shift).abs() < 1e-12);
        }

        #[test]
        fn scaling_x_scales_slope_inversely(pts in arb_points(), c in 0.01..100.0f64) {
            let a = least_squares_line(&pts).unwrap();
            let scaled: Vec<_> = pts.iter().map(|&(x, y)| (c * x, y)).collect();
            let b = least_squares_line(&scaled).unwrap();
            prop_assert!((b.slope - a.slope / c).abs() <= 1e-12 * (1.0 + (a.slope / c).abs()));
        }
    }
}
