//! Curve analysis on (epsilon, bit erasure probability) points: power-law
//! floor fits and threshold crossings.

use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `P_b ~ alpha * epsilon^d` fitted in log-log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloorFit<T> {
    pub alpha: T,
    pub d: T,
    pub r_squared: T,
    /// Points used.
    pub points: usize,
    /// Points inside the window dropped because their probability was zero.
    pub zero_excluded: usize,
}

/// Least-squares line through `(ln eps, ln p)` for the points whose epsilon
/// lies in `window`. Zero-probability points are skipped and counted.
pub fn fit_floor_slope<T: Scalar>(
    points: &[(T, T)],
    window: RangeInclusive<T>,
) -> Result<FloorFit<T>> {
    let inside: Vec<(T, T)> = points
        .iter()
        .copied()
        .filter(|(e, _)| window.contains(e))
        .collect();
    let logs: Vec<(T, T)> = inside
        .iter()
        .filter(|(e, p)| *p > T::zero() && *e > T::zero())
        .map(|(e, p)| (e.ln(), p.ln()))
        .collect();
    let zero_excluded = inside.len() - logs.len();
    if logs.len() < 3 {
        return Err(Error::InsufficientPoints(format!(
            "{} nonzero points in the window ({zero_excluded} zero rows excluded), need 3",
            logs.len()
        )));
    }
    let count = T::from_usize(logs.len()).unwrap();
    let mean_x = logs.iter().fold(T::zero(), |a, (x, _)| a + *x) / count;
    let mean_y = logs.iter().fold(T::zero(), |a, (_, y)| a + *y) / count;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for &(x, y) in &logs {
        let (dx, dy) = (x - mean_x, y - mean_y);
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    if sxx == T::zero() {
        return Err(Error::InsufficientPoints(
            "all points share one epsilon".into(),
        ));
    }
    let d = sxy / sxx;
    let intercept = mean_y - d * mean_x;
    let ss_res = logs.iter().fold(T::zero(), |a, &(x, y)| {
        let r = y - (intercept + d * x);
        a + r * r
    });
    let r_squared = if syy == T::zero() {
        T::one()
    } else {
        T::one() - ss_res / syy
    };
    Ok(FloorFit {
        alpha: intercept.exp(),
        d,
        r_squared,
        points: logs.len(),
        zero_excluded,
    })
}

/// Epsilon at which the curve first rises through `level`, interpolating
/// `ln p` linearly in epsilon between the two bracketing points. Points are
/// sorted by epsilon first; both bracketing probabilities must be positive.
pub fn threshold_estimate<T: Scalar>(points: &[(T, T)], level: T) -> Result<T> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("NaN epsilon"));
    let lvl = level.to_f64().unwrap_or(f64::NAN);
    let pair = sorted
        .windows(2)
        .find(|w| w[0].1 <= level && w[1].1 > level)
        .ok_or(Error::NotBracketed(lvl))?;
    let ((e0, p0), (e1, p1)) = (pair[0], pair[1]);
    if p0 <= T::zero() {
        return Err(Error::InsufficientPoints(format!(
            "zero probability at epsilon {e0} cannot be log-interpolated"
        )));
    }
    let t = (level.ln() - p0.ln()) / (p1.ln() - p0.ln());
    Ok(e0 + t * (e1 - e0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = (1..=8)
            .map(|i| {
                let e = 0.05 * i as f64;
                (e, 1e-3 * e.powi(12))
            })
            .collect();
        let fit = fit_floor_slope(&pts, 0.0..=1.0).unwrap();
        assert!((fit.d - 12.0).abs() < 1e-9, "{}", fit.d);
        assert!((fit.alpha - 1e-3).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(fit.points, 8);
    }

    #[test]
    fn works_in_f32() {
        let pts: Vec<(f32, f32)> = [0.2f32, 0.25, 0.3, 0.35]
            .iter()
            .map(|&e| (e, 0.5 * e.powi(3)))
            .collect();
        let fit = fit_floor_slope(&pts, 0.0..=1.0).unwrap();
        assert!((fit.d - 3.0).abs() < 1e-4);
        let t = threshold_estimate(&pts, 0.5 * 0.27f32.powi(3)).unwrap();
        assert!((t - 0.27).abs() < 1e-2);
    }

    #[test]
    fn window_and_zeros() {
        let pts = [(0.1, 0.0), (0.2, 1e-6), (0.3, 1e-5), (0.9, 0.5)];
        let e = fit_floor_slope(&pts, 0.0..=0.35).unwrap_err();
        assert!(matches!(e, Error::InsufficientPoints(_)));
        let one = [(0.2, 1e-6)];
        assert!(fit_floor_slope(&one, 0.0..=1.0).is_err());
        let pts = [(0.1, 0.0), (0.2, 1e-6), (0.3, 1e-5), (0.35, 1e-4)];
        let fit = fit_floor_slope(&pts, 0.0..=0.35).unwrap();
        assert_eq!(fit.zero_excluded, 1);
        assert_eq!(fit.points, 3);
    }

    #[test]
    fn interpolation_example() {
        // ln-linear between (0.4, 1e-4) and (0.45, 1e-1): 1e-2 sits 2/3 of the way.
        let t: f64 = threshold_estimate(&[(0.45, 1e-1), (0.4, 1e-4)], 1e-2).unwrap();
        assert!((t - (0.4 + 0.05 * 2.0 / 3.0)).abs() < 1e-12);
        assert!((t - 0.433).abs() < 1e-3);
    }

    #[test]
    fn not_bracketed() {
        let pts = [(0.3, 1e-3), (0.4, 1e-1)];
        assert!(matches!(
            threshold_estimate(&pts, 1e-4),
            Err(Error::NotBracketed(_))
        ));
        assert!(matches!(
            threshold_estimate(&pts, 0.5),
            Err(Error::NotBracketed(_))
        ));
        let zero_low = [(0.3, 0.0), (0.4, 1e-1)];
        assert!(threshold_estimate(&zero_low, 1e-2).is_err());
    }

    #[test]
    fn first_upward_crossing_wins() {
        let pts = [(0.1, 1e-4), (0.2, 1e-1), (0.3, 1e-4), (0.4, 1e-1)];
        let t = threshold_estimate(&pts, 1e-2).unwrap();
        assert!(t > 0.1 && t < 0.2);
    }
}
