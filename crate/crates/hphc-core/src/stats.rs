//! Small statistics toolbox shared by the verification experiments:
//! chi-square goodness of fit, Kolmogorov-Smirnov distance against the
//! standard exponential, and a percentile bootstrap for ratio means.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pools (observed, expected) cells so every kept cell has expected count at
/// least `min_expected`; everything below is merged into one overflow cell.
pub fn pool_cells(cells: &[(f64, f64)], min_expected: f64) -> Vec<(f64, f64)> {
    let mut kept = Vec::new();
    let mut pooled = (0.0, 0.0);
    for &(obs, exp) in cells {
        if exp >= min_expected {
            kept.push((obs, exp));
        } else {
            pooled.0 += obs;
            pooled.1 += exp;
        }
    }
    if pooled.1 > 0.0 {
        kept.push(pooled);
    }
    kept
}

/// Pearson statistic sum (O - E)^2 / E.
pub fn chi_square_statistic(cells: &[(f64, f64)]) -> f64 {
    cells
        .iter()
        .map(|&(obs, exp)| {
            let d = obs - exp;
            d * d / exp
        })
        .sum()
}

/// Upper tail probability of the chi-square law with `df` degrees of freedom.
pub fn chi_square_pvalue(statistic: f64, df: f64) -> f64 {
    let dist = ChiSquared::new(df).expect("positive degrees of freedom");
    1.0 - dist.cdf(statistic)
}

/// Kolmogorov-Smirnov distance of a sample against the standard exponential
/// (survival e^-x).
pub fn ks_distance_exponential(samples: &[f64]) -> f64 {
    assert!(!samples.is_empty(), "KS distance needs at least one sample");
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("no NaN samples"));
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = 1.0 - (-x).exp();
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// Mean of a slice, in a fixed summation order.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Percentile bootstrap confidence interval for the mean at the given
/// level (e.g. 0.95). Deterministic given the RNG state.
pub fn bootstrap_mean_ci(
    values: &[f64],
    resamples: u32,
    level: f64,
    rng: &mut ChaCha8Rng,
) -> (f64, f64) {
    assert!(!values.is_empty());
    let n = values.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| {
            let mut acc = 0.0;
            for _ in 0..n {
                acc += values[rng.random_range(0..n)];
            }
            acc / n as f64
        })
        .collect();
    means.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite means"));
    let alpha = (1.0 - level) / 2.0;
    let idx = |q: f64| {
        let i = (q * (resamples as f64 - 1.0)).round() as usize;
        means[i.min(means.len() - 1)]
    };
    (idx(alpha), idx(1.0 - alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn pooling_keeps_mass() {
        let cells = vec![(10.0, 12.0), (1.0, 0.5), (2.0, 0.25), (30.0, 29.0)];
        let pooled = pool_cells(&cells, 5.0);
        assert_eq!(pooled.len(), 3);
        let obs: f64 = pooled.iter().map(|c| c.0).sum();
        let exp: f64 = pooled.iter().map(|c| c.1).sum();
        assert_eq!(obs, 43.0);
        assert!((exp - 41.75).abs() < 1e-12);
    }

    #[test]
    fn chi_square_statistic_zero_for_perfect_fit() {
        let cells = vec![(10.0, 10.0), (20.0, 20.0)];
        assert_eq!(chi_square_statistic(&cells), 0.0);
    }

    #[test]
    fn chi_square_pvalue_is_monotone() {
        let p_small = chi_square_pvalue(1.0, 5.0);
        let p_large = chi_square_pvalue(30.0, 5.0);
        assert!(p_small > 0.9);
        assert!(p_large < 1e-4);
    }

    #[test]
    fn ks_distance_of_exact_quantiles_is_small() {
        // quantiles of Exp(1) at (i - 1/2)/n give distance ~ 1/(2n)
        let n = 1000;
        let samples: Vec<f64> = (0..n)
            .map(|i| -(1.0 - (i as f64 + 0.5) / n as f64).ln())
            .collect();
        let d = ks_distance_exponential(&samples);
        assert!(d <= 0.5 / n as f64 + 1e-9, "d={d}");
    }

    #[test]
    fn ks_distance_of_wrong_law_is_large() {
        let samples: Vec<f64> = (0..1000).map(|i| 5.0 + i as f64 * 1e-3).collect();
        assert!(ks_distance_exponential(&samples) > 0.9);
    }

    #[test]
    fn bootstrap_ci_brackets_mean_of_tight_sample() {
        let values: Vec<f64> = (0..200).map(|i| 2.0 + 0.001 * (i % 7) as f64).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let (lo, hi) = bootstrap_mean_ci(&values, 500, 0.95, &mut rng);
        let m = mean(&values);
        assert!(lo <= m && m <= hi);
        assert!(hi - lo < 0.01);
    }
}
