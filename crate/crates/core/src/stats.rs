//! Small statistics helpers: confidence intervals and log-linear fits.

use serde::Serialize;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
}

/// Wilson score interval for a binomial proportion.
pub fn wilson(successes: u64, trials: u64, z: f64) -> Interval {
    if trials == 0 {
        return Interval {
            estimate: f64::NAN,
            low: 0.0,
            high: 1.0,
        };
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Interval {
        estimate: p,
        low: if successes == 0 { 0.0 } else { (center - half).max(0.0) },
        high: if successes == trials { 1.0 } else { (center + half).min(1.0) },
    }
}

/// Running mean and variance (Welford).
#[derive(Debug, Clone, Default)]
pub struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_err(&self) -> f64 {
        if self.count == 0 {
            f64::INFINITY
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }

    /// Normal-approximation interval for the mean.
    pub fn interval(&self, z: f64) -> Interval {
        let half = z * self.std_err();
        Interval {
            estimate: self.mean,
            low: self.mean - half,
            high: self.mean + half,
        }
    }
}

/// Least-squares fit of `ln y = a - rate * x`, skipping `y < floor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpFit {
    pub rate: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log values.
    pub residual: f64,
    pub points: usize,
}

pub const FIT_FLOOR: f64 = 1e-13;

pub fn fit_exponential(xs: &[f64], ys: &[f64]) -> Option<ExpFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, &y)| y >= FIT_FLOOR && y.is_finite())
        .map(|(&x, &y)| (x, y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    Some(ExpFit {
        rate: -slope,
        intercept,
        residual: (sse / k).sqrt(),
        points: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_truth() {
        let iv = wilson(50, 100, Z95);
        assert!(iv.low < 0.5 && iv.high > 0.5);
        let iv = wilson(0, 1000, Z95);
        assert_eq!(iv.low, 0.0);
        assert!((iv.high - 0.003_83).abs() < 1e-4);
    }

    #[test]
    fn moments_match_direct() {
        let xs = [1.0, 2.0, 4.0, 7.0];
        let mut m = Moments::default();
        xs.iter().for_each(|&x| m.push(x));
        assert!((m.mean() - 3.5).abs() < 1e-15);
        let var = xs.iter().map(|x| (x - 3.5f64).powi(2)).sum::<f64>() / 3.0;
        assert!((m.variance() - var).abs() < 1e-12);
    }

    #[test]
    fn exponential_fit_recovers_rate() {
        let xs: Vec<f64> = (0..6).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * (-0.7 * x).exp()).collect();
        let fit = fit_exponential(&xs, &ys).unwrap();
        assert!((fit.rate - 0.7).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
        assert!(fit_exponential(&[1.0], &[1.0]).is_none());
    }
}
