//! Summation and summary statistics used by the experiments and the exact
//! entropy checks.

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().collect::<CompensatedSum>().value()
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    sum(xs.iter().copied()) / xs.len() as f64
}

/// Unbiased sample variance (denominator n - 1).
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    sum(xs.iter().map(|x| (x - m) * (x - m))) / (n - 1) as f64
}

/// Standard error of the sample mean.
pub fn std_err_mean(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

impl Estimate {
    pub fn scaled(self, c: f64) -> Estimate {
        Estimate {
            value: self.value * c,
            std_err: self.std_err * c.abs(),
        }
    }

    /// Standard error of the difference of two independent estimates.
    pub fn combined_err(&self, other: &Estimate) -> f64 {
        (self.std_err * self.std_err + other.std_err * other.std_err).sqrt()
    }
}

pub fn mean_estimate(xs: &[f64]) -> Estimate {
    Estimate {
        value: mean(xs),
        std_err: std_err_mean(xs),
    }
}

/// Delete-one jackknife for an arbitrary statistic of a sample.
///
/// Returns the full-sample value and the jackknife standard error
/// `sqrt((n-1)/n * sum_i (theta_(i) - theta_bar)^2)`.
pub fn jackknife<T: Clone>(sample: &[T], statistic: impl Fn(&[T]) -> f64) -> Estimate {
    let n = sample.len();
    let value = statistic(sample);
    if n < 2 {
        return Estimate {
            value,
            std_err: f64::NAN,
        };
    }
    let mut buf: Vec<T> = Vec::with_capacity(n - 1);
    let mut loo = Vec::with_capacity(n);
    for i in 0..n {
        buf.clear();
        buf.extend_from_slice(&sample[..i]);
        buf.extend_from_slice(&sample[i + 1..]);
        loo.push(statistic(&buf));
    }
    let bar = mean(&loo);
    let ss = sum(loo.iter().map(|t| (t - bar) * (t - bar)));
    Estimate {
        value,
        std_err: ((n - 1) as f64 / n as f64 * ss).sqrt(),
    }
}

/// Jackknife of the sample variance in O(n), using leave-one-out moment
/// updates instead of recomputing each subsample.
pub fn jackknife_variance(xs: &[f64]) -> Estimate {
    let n = xs.len();
    if n < 3 {
        return Estimate {
            value: variance(xs),
            std_err: f64::NAN,
        };
    }
    let m = mean(xs);
    let dev: Vec<f64> = xs.iter().map(|x| x - m).collect();
    let ss = sum(dev.iter().map(|d| d * d));
    let nf = n as f64;
    // Removing x_i shifts the mean by -d_i/(n-1) and the sum of squares by
    // -d_i^2 * n/(n-1).
    let loo: Vec<f64> = dev
        .iter()
        .map(|d| (ss - d * d * nf / (nf - 1.0)) / (nf - 2.0))
        .collect();
    let bar = mean(&loo);
    let s2 = sum(loo.iter().map(|t| (t - bar) * (t - bar)));
    Estimate {
        value: ss / (nf - 1.0),
        std_err: ((nf - 1.0) / nf * s2).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(sum(xs), 2.0);
    }

    #[test]
    fn fast_variance_jackknife_matches_generic() {
        let xs: Vec<f64> = (0..40).map(|i| ((i * 37) % 11) as f64 * 0.7 + (i as f64).sqrt()).collect();
        let fast = jackknife_variance(&xs);
        let slow = jackknife(&xs, variance);
        assert!((fast.value - slow.value).abs() < 1e-10);
        assert!((fast.std_err - slow.std_err).abs() < 1e-10 * slow.std_err.max(1.0));
    }

    #[test]
    fn jackknife_of_mean_is_classical_se() {
        let xs = [1.0, 4.0, 2.0, 8.0, 5.0];
        let jk = jackknife(&xs, mean);
        assert!((jk.std_err - std_err_mean(&xs)).abs() < 1e-12);
    }
}
