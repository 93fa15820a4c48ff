//! Section posteriors to per-bit posteriors.

use crate::error::{Error, Result};

/// `P(bit k = 0)` for each of the `log2 M` bits of a normalized section
/// posterior. Bit `k` has weight `2^k` in the 0-based position, so `b_k` sums
/// the entries at positions whose bit `k` is clear.
pub fn section_to_bit_posteriors(posterior: &[f64]) -> Result<Vec<f64>> {
    let sum: f64 = posterior.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(sum));
    }
    let m = posterior.len();
    if !m.is_power_of_two() || m < 2 {
        return Err(Error::InvalidParameter(format!(
            "section size {m} is not a power of two >= 2"
        )));
    }
    let log2_m = m.trailing_zeros() as usize;
    Ok((0..log2_m)
        .map(|k| {
            posterior
                .iter()
                .enumerate()
                .filter(|(i, _)| (i >> k) & 1 == 0)
                .map(|(_, p)| p)
                .sum()
        })
        .collect())
}

/// Hard decision on bit posteriors: 0 when `P(0) >= 1/2`.
pub fn hard_bits(posteriors: &[f64]) -> Vec<u8> {
    posteriors.iter().map(|&p| u8::from(p < 0.5)).collect()
}
