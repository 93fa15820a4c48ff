use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Adds circularly-symmetric complex Gaussian noise of total variance `sigma2`
/// (each of the real and imaginary parts has variance `sigma2 / 2`).
pub fn awgn_channel<R: Rng + ?Sized>(x: &[Complex64], sigma2: f64, rng: &mut R) -> Result<Vec<Complex64>> {
    if !(sigma2 >= 0.0) || !sigma2.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "noise variance must be nonnegative, got {sigma2}"
        )));
    }
    if sigma2 == 0.0 {
        return Ok(x.to_vec());
    }
    let sd = (sigma2 / 2.0).sqrt();
    Ok(x.iter()
        .map(|&xi| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            xi + Complex64::new(sd * re, sd * im)
        })
        .collect())
}

/// `sigma^2 = P / (R 10^(snr_b_db / 10))`.
pub fn snr_to_sigma2(snr_b_db: f64, power: f64, rate: f64) -> Result<f64> {
    if !(power > 0.0) || !(rate > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "P and R must be positive (P = {power}, R = {rate})"
        )));
    }
    Ok(power / (rate * 10f64.powf(snr_b_db / 10.0)))
}

/// Inverse of [`snr_to_sigma2`], in dB.
pub fn sigma2_to_snr_db(sigma2: f64, power: f64, rate: f64) -> f64 {
    10.0 * (power / (sigma2 * rate)).log10()
}
