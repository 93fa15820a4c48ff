//! Binomial confidence intervals.

use statrs::distribution::{Beta, ContinuousCDF};

/// Two-sided Clopper-Pearson interval at level `1 - alpha`.
///
/// With zero observed errors only an upper bound is meaningful; it is
/// reported one-sided, `1 - alpha^(1/n)`, with the lower end at 0.
pub fn clopper_pearson(errors: usize, total: usize, alpha: f64) -> (f64, f64) {
    if total == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (errors as f64, total as f64);
    if errors == 0 {
        return (0.0, 1.0 - alpha.powf(1.0 / n));
    }
    let lo = Beta::new(k, n - k + 1.0)
        .map(|b| b.inverse_cdf(alpha / 2.0))
        .unwrap_or(0.0);
    let hi = if errors >= total {
        1.0
    } else {
        Beta::new(k + 1.0, n - k)
            .map(|b| b.inverse_cdf(1.0 - alpha / 2.0))
            .unwrap_or(1.0)
    };
    (lo, hi)
}
