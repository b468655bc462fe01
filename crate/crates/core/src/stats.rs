//! Sample statistics used by the Monte Carlo estimators.

use crate::error::{Error, Result};

/// Mean with standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub count: usize,
}

/// Welford accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise merge.
    pub fn merge(&mut self, other: &Accumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn estimate(&self) -> Estimate {
        let se = if self.count < 2 { 0.0 } else { (self.variance() / self.count as f64).sqrt() };
        Estimate { mean: self.mean, se, count: self.count }
    }
}

impl FromIterator<f64> for Accumulator {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Accumulator::new();
        for x in iter {
            acc.push(x);
        }
        acc
    }
}

/// Mean and standard error, requiring at least two samples.
pub fn mean_se(xs: &[f64]) -> Result<Estimate> {
    if xs.len() < 2 {
        return Err(Error::Statistics(format!("need at least 2 samples, got {}", xs.len())));
    }
    Ok(xs.iter().copied().collect::<Accumulator>().estimate())
}

/// Delete-one jackknife standard error of the sample mean. For the mean this
/// coincides with `s / sqrt(n)`; the leave-one-out form is kept so the
/// estimator matches what is reported for general statistics.
pub fn jackknife_mean(xs: &[f64]) -> Result<Estimate> {
    let n = xs.len();
    if n < 2 {
        return Err(Error::Statistics(format!("jackknife needs 2 samples, got {n}")));
    }
    let total: f64 = xs.iter().sum();
    let mean = total / n as f64;
    let nf = n as f64;
    let mut ss = 0.0;
    for &x in xs {
        let loo = (total - x) / (nf - 1.0);
        ss += (loo - mean) * (loo - mean);
    }
    Ok(Estimate { mean, se: ((nf - 1.0) / nf * ss).sqrt(), count: n })
}

/// Kolmogorov-Smirnov distance between a sample and the standard normal law.
pub fn ks_distance_standard_normal(samples: &[f64]) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (k, &x) in xs.iter().enumerate() {
        let f = crate::numerics::normal_cdf(x);
        d = d.max((k as f64 + 1.0) / n - f).max(f - k as f64 / n);
    }
    d
}

/// Ordinary least-squares line `y = intercept + slope * x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Statistics("linear fit needs two or more paired points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Statistics("degenerate abscissae in linear fit".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Ok((my - slope * mx, slope))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_matches_two_pass() {
        let xs = [1.0, 4.0, 2.5, -3.0, 8.0, 0.5];
        let e = mean_se(&xs).unwrap();
        let m = xs.iter().sum::<f64>() / 6.0;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 5.0;
        assert!((e.mean - m).abs() < 1e-14);
        assert!((e.se - (v / 6.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn merge_equals_single_pass() {
        let xs: Vec<f64> = (0..37).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut a: Accumulator = xs[..11].iter().copied().collect();
        let b: Accumulator = xs[11..].iter().copied().collect();
        a.merge(&b);
        let all: Accumulator = xs.iter().copied().collect();
        assert!((a.mean() - all.mean()).abs() < 1e-14);
        assert!((a.variance() - all.variance()).abs() < 1e-13);
    }

    #[test]
    fn jackknife_of_mean_is_classical_se() {
        let xs = [0.3, 1.7, -0.2, 2.2, 0.9];
        let j = jackknife_mean(&xs).unwrap();
        let c = mean_se(&xs).unwrap();
        assert!((j.se - c.se).abs() < 1e-14);
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(mean_se(&[1.0]), Err(Error::Statistics(_))));
    }

    #[test]
    fn fit_recovers_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let (a, b) = linear_fit(&x, &y).unwrap();
        assert!((a - 2.0).abs() < 1e-12 && (b + 0.5).abs() < 1e-12);
    }
}
