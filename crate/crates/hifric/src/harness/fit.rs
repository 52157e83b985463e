//! Log-log least-squares rate fitting.

use crate::error::{Error, Result};

/// Least-squares line through (log10 eps, log10 value).
#[derive(Debug, Clone, Copy)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS residual in log10 coordinates.
    pub residual: f64,
}

pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "rate fit needs at least 2 points, got {}",
            points.len()
        )));
    }
    for &(x, y) in points {
        if !(x > 0.0) || !(y > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "rate fit needs positive coordinates, got ({x:.3e}, {y:.3e})"
            )));
        }
    }
    let logs: Vec<(f64, f64)> = points
        .iter()
        .map(|&(x, y)| (x.log10(), y.log10()))
        .collect();
    let m = logs.len() as f64;
    let sx: f64 = logs.iter().map(|p| p.0).sum();
    let sy: f64 = logs.iter().map(|p| p.1).sum();
    let sxx: f64 = logs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = logs.iter().map(|p| p.0 * p.1).sum();
    let denom = m * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return Err(Error::InvalidArgument(
            "rate fit needs at least two distinct abscissae".into(),
        ));
    }
    let slope = (m * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / m;
    let residual = (logs
        .iter()
        .map(|&(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(RateFit {
        slope,
        intercept,
        residual,
    })
}

/// Observed order between two refinement levels: log2(coarse / fine).
pub fn observed_order(coarse_err: f64, fine_err: f64) -> f64 {
    (coarse_err / fine_err).log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_slope_one() {
        let fit = fit_rate(&[(1.0, 1.0), (0.1, 0.1), (0.01, 0.01)]).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn exact_slope_two() {
        let fit = fit_rate(&[(1.0, 1.0), (0.1, 0.01)]).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
    }

    #[test]
    fn noisy_slope_one_within_three_sigma() {
        // synthetic data with known generator: value = eps * 10^noise
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let sigma = 0.05;
        let mut slopes = Vec::new();
        for _ in 0..50 {
            let pts: Vec<(f64, f64)> = (0..7)
                .map(|k| {
                    let eps = 10f64.powi(-k);
                    let noise: f64 = rng.gen_range(-sigma..sigma);
                    (eps, eps * 10f64.powf(noise))
                })
                .collect();
            slopes.push(fit_rate(&pts).unwrap().slope);
        }
        let mean: f64 = slopes.iter().sum::<f64>() / slopes.len() as f64;
        let sd = (slopes.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>()
            / slopes.len() as f64)
            .sqrt();
        assert!((mean - 1.0).abs() < 3.0 * sd.max(1e-3), "mean {mean}, sd {sd}");
    }

    #[test]
    fn rejects_nonpositive_values() {
        assert!(fit_rate(&[(1.0, 1.0), (0.1, -0.1)]).is_err());
        assert!(fit_rate(&[(1.0, 1.0)]).is_err());
    }
}
