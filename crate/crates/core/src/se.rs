//! State evolution: the scalar recursion predicting AMP's effective noise.
//!
//! `tau_0^2 = sigma^2 + P`, `tau_{t+1}^2 = sigma^2 + P (1 - x(tau_t))`, where
//! `x(tau)` is the power-weighted probability-like mass the denoiser puts on
//! the true column. Only the real parts of the Gaussian draws enter the
//! expectation, so each section of size `M` costs `M` real normals per sample.

use std::f64::consts::LN_2;
use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::power::{asymptotic_x, PowerAllocation};
use crate::seed;

/// Samples per independently seeded chunk; results merge in chunk order.
const CHUNK: usize = 1024;

/// Relative slack for sections sitting exactly on the decoding threshold.
const BOUNDARY_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeConfig {
    pub max_iters: usize,
    pub mc_samples: usize,
    pub seed: u64,
    /// Relative change in `tau^2` below which the recursion is at a fixed point.
    pub tol: f64,
}

impl Default for SeConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            mc_samples: 10_000,
            seed: 0,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeSchedule {
    /// `tau_t^2` for `t = 0, 1, ...`
    pub tau2: Vec<f64>,
    /// `x(tau_t)`, same length as `tau2`.
    pub x: Vec<f64>,
    pub fixed_point: bool,
    /// Zero for the asymptotic recursion.
    pub mc_samples: usize,
}

impl SeSchedule {
    pub fn final_tau2(&self) -> f64 {
        *self.tau2.last().expect("schedule is never empty")
    }

    pub fn final_x(&self) -> f64 {
        *self.x.last().expect("schedule is never empty")
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,tau2,x")?;
        for (t, (tau2, x)) in self.tau2.iter().zip(&self.x).enumerate() {
            writeln!(w, "{t},{tau2:e},{x:e}")?;
        }
        Ok(())
    }
}

/// Monte-Carlo estimate of `E[e^{A_1} / sum_j e^{A_j}]` for one section with
/// signal-to-noise ratio `c = sqrt(n P_l) / tau`:
/// `A_1 = 2c (Re U_1 + c)`, `A_j = 2c Re U_j`, `Re U ~ N(0, 1/2)`.
fn section_expectation(c: f64, m: usize, samples: usize, seed: u64, group: u64) -> (f64, f64) {
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let count = CHUNK.min(samples - k * CHUNK);
            let mut rng = seed::rng(seed, &[seed::stream::MONTE_CARLO, group, k as u64]);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..count {
                let u1: f64 = rng.sample::<f64, _>(StandardNormal) * std::f64::consts::FRAC_1_SQRT_2;
                let a1 = 2.0 * c * (u1 + c);
                // log(1 + sum_{j>1} e^{A_j - A_1}) via a running log-sum-exp
                let mut max = 0.0f64;
                let mut acc = 1.0f64;
                for _ in 1..m {
                    let u: f64 = rng.sample::<f64, _>(StandardNormal) * std::f64::consts::FRAC_1_SQRT_2;
                    let d = 2.0 * c * u - a1;
                    if d > max {
                        acc = acc * (max - d).exp() + 1.0;
                        max = d;
                    } else {
                        acc += (d - max).exp();
                    }
                }
                let ratio = (-max).exp() / acc;
                sum += ratio;
                sum_sq += ratio * ratio;
            }
            (sum, sum_sq)
        })
        .collect();
    let (sum, sum_sq) = partial.iter().fold((0.0, 0.0), |(a, b), (s, q)| (a + s, b + q));
    let n = samples as f64;
    let mean = sum / n;
    let var = if samples > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    (mean, var)
}

/// Monte-Carlo `x(tau)` at block length `n` and section size `M`.
///
/// Sections with identical power share one expectation, and every call with
/// the same seed reuses the same draws, so trajectories are smooth in `tau`.
pub fn se_x(
    alloc: &PowerAllocation,
    tau2: f64,
    section_size: usize,
    n: usize,
    mc_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if !(tau2 > 0.0) || !tau2.is_finite() {
        return Err(Error::InvalidParameter(format!("tau^2 must be positive, got {tau2}")));
    }
    if mc_samples == 0 || section_size == 0 {
        return Err(Error::InvalidParameter("need mc_samples >= 1 and M >= 1".into()));
    }
    let mut groups: Vec<(f64, usize)> = Vec::new();
    for &p in alloc.powers() {
        match groups.iter_mut().find(|(q, _)| *q == p) {
            Some(g) => g.1 += 1,
            None => groups.push((p, 1)),
        }
    }
    let tau = tau2.sqrt();
    let total = alloc.total();
    let mut value = 0.0;
    let mut var = 0.0;
    for (g, &(p, count)) in groups.iter().enumerate() {
        let c = (n as f64 * p).sqrt() / tau;
        let (mean, v) = section_expectation(c, section_size, mc_samples, seed, g as u64);
        let weight = count as f64 * p / total;
        value += weight * mean;
        var += weight * weight * v / mc_samples as f64;
    }
    Ok(McEstimate {
        value: value.clamp(0.0, 1.0),
        std_err: var.sqrt(),
    })
}

fn iterate(
    sigma2: f64,
    power: f64,
    max_iters: usize,
    tol: f64,
    mut x_of: impl FnMut(f64) -> Result<f64>,
) -> Result<(Vec<f64>, Vec<f64>, bool)> {
    if !(sigma2 >= 0.0) || max_iters == 0 {
        return Err(Error::InvalidParameter("need sigma^2 >= 0 and max_iters >= 1".into()));
    }
    let mut tau2 = sigma2 + power;
    let mut taus = Vec::new();
    let mut xs = Vec::new();
    let mut fixed = false;
    for _ in 0..max_iters {
        let x = x_of(tau2)?;
        taus.push(tau2);
        xs.push(x);
        let next = sigma2 + power * (1.0 - x);
        if (next - tau2).abs() <= tol * next {
            fixed = true;
            break;
        }
        tau2 = next;
    }
    Ok((taus, xs, fixed))
}

/// Monte-Carlo state evolution until a fixed point or `max_iters`.
pub fn se_trajectory(
    alloc: &PowerAllocation,
    sigma2: f64,
    section_size: usize,
    n: usize,
    config: &SeConfig,
) -> Result<SeSchedule> {
    let (tau2, x, fixed_point) = iterate(sigma2, alloc.total(), config.max_iters, config.tol, |t| {
        Ok(se_x(alloc, t, section_size, n, config.mc_samples, config.seed)?.value)
    })?;
    Ok(SeSchedule {
        tau2,
        x,
        fixed_point,
        mc_samples: config.mc_samples,
    })
}

/// State evolution with the large-`M` indicator form of `x(tau)`.
pub fn asymptotic_trajectory(
    alloc: &PowerAllocation,
    sigma2: f64,
    rate: f64,
    max_iters: usize,
    tol: f64,
) -> Result<SeSchedule> {
    let (tau2, x, fixed_point) = iterate(sigma2, alloc.total(), max_iters, tol, |t| {
        Ok(asymptotic_x(alloc, t, rate))
    })?;
    Ok(SeSchedule {
        tau2,
        x,
        fixed_point,
        mc_samples: 0,
    })
}

/// Large-system decodability check. Returns `(decodable, final x)`.
///
/// Sections whose power sits on the threshold `L P_l = R tau^2 ln 2` (up to
/// rounding) count as decoded, which is the limit the iterative allocation is
/// constructed on.
pub fn predict_decodable(alloc: &PowerAllocation, sigma2: f64, rate: f64) -> Result<(bool, f64)> {
    let l = alloc.len() as f64;
    let total = alloc.total();
    let x_of = |tau2: f64| {
        let threshold = rate * tau2 * LN_2 * (1.0 - BOUNDARY_RTOL);
        let x: f64 = alloc
            .powers()
            .iter()
            .filter(|&&p| l * p >= threshold)
            .map(|p| p / total)
            .sum();
        Ok(x.min(1.0))
    };
    let (_, xs, _) = iterate(sigma2, total, alloc.len() + 2, 0.0, x_of)?;
    let x = *xs.last().expect("at least one iteration");
    Ok((x >= 1.0 - 1e-12, x))
}
