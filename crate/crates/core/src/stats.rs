//! Normal and beta distribution helpers.

use crate::error::{Error, Result};
use statrs::distribution::{Beta, ContinuousCDF, Normal};

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Inverse normal CDF, polished with two Newton steps against [`norm_cdf`].
pub fn norm_ppf(p: f64) -> f64 {
    let mut x = std_normal().inverse_cdf(p);
    if x.is_finite() {
        for _ in 0..2 {
            let d = norm_pdf(x);
            if d > 0.0 {
                x -= (norm_cdf(x) - p) / d;
            }
        }
    }
    x
}

/// Two-sided Clopper–Pearson interval for `ones` successes in `shots`
/// trials at level 1 − `alpha`.
pub fn clopper_pearson(ones: u64, shots: u64, alpha: f64) -> Result<(f64, f64)> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", format!("{alpha} not in (0, 1)")));
    }
    let (k, n) = (ones as f64, shots as f64);
    let lo = if ones == 0 {
        0.0
    } else {
        Beta::new(k, n - k + 1.0)
            .map_err(|e| Error::param("shots", e.to_string()))?
            .inverse_cdf(alpha / 2.0)
    };
    let hi = if ones == shots {
        1.0
    } else {
        Beta::new(k + 1.0, n - k)
            .map_err(|e| Error::param("shots", e.to_string()))?
            .inverse_cdf(1.0 - alpha / 2.0)
    };
    Ok((lo, hi))
}

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_values() {
        assert!((norm_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((norm_ppf(0.975) - 1.959_963_984_540_054).abs() < 1e-14);
        for p in [1e-6, 0.1, 0.2, 0.5, 0.9] {
            assert!((norm_cdf(norm_ppf(p)) - p).abs() < 1e-15 * p.max(0.1) * 10.0);
        }
    }

    #[test]
    fn clopper_pearson_reference() {
        // scipy.stats.beta.ppf(0.025, 30, 71), beta.ppf(0.975, 31, 70)
        let (lo, hi) = clopper_pearson(30, 100, 0.05).unwrap();
        assert!((lo - 0.212_406_420_5).abs() < 1e-7, "{lo}");
        assert!((hi - 0.399_814_676_2).abs() < 1e-7, "{hi}");
        assert_eq!(clopper_pearson(0, 10, 0.05).unwrap().0, 0.0);
        assert_eq!(clopper_pearson(10, 10, 0.05).unwrap().1, 1.0);
    }
}
