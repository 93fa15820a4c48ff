//! AMP decoding for SPARCs over the complex AWGN channel.
//!
//! One engine serves both plain and spatially coupled operators. It keeps a
//! residual variance per row-block and an effective noise level per
//! column-block, both read off the operator's [`CouplingProfile`]:
//!
//! ```text
//! z      = y - A beta + ons[r] * z_prev                (per row-block r)
//! phi[r] = |z_r|^2 / |r|
//! tau[c] = 1 / sum_r g[r][c] / phi[r]
//! s      = beta + tau[c] * A^*(z / phi)
//! beta'  = eta(s; tau[c])                               (section-wise)
//! ons[r] = sum_c g[r][c] * sum_{l in c}(a_l^2 - |beta'_l|^2) / (|r| phi[r])
//! ```
//!
//! With a single block and `g = 1` this is exactly the textbook recursion
//! `z = y - A beta + z_prev / tau^2 (P - |beta|^2 / n)`, `s = beta + A^* z`.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::operators::{CouplingProfile, DesignOperator};
use crate::params::MessageVector;
use crate::power::PowerAllocation;

/// Floor applied to residual-variance estimates so a perfectly cancelled
/// residual does not divide by zero.
const VARIANCE_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, PartialEq)]
pub enum TauMode {
    /// `phi = |z|^2 / n` from the current residual.
    Online,
    /// Precomputed `tau_t^2` (e.g. from state evolution); the last value is
    /// reused past the end of the schedule.
    Schedule(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmpConfig {
    pub max_iters: usize,
    pub halt_tol: f64,
    pub tau_mode: TauMode,
    /// `(section, position)` pairs held fixed during decoding.
    pub pinned: Vec<(usize, usize)>,
    /// Keep a dense copy of every iterate (debug only).
    pub snapshots: bool,
}

impl Default for AmpConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            halt_tol: 1e-5,
            tau_mode: TauMode::Online,
            pinned: Vec::new(),
            snapshots: false,
        }
    }
}

impl AmpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("T_max must be at least 1".into()));
        }
        if !(self.halt_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "halt_tol must be positive, got {}",
                self.halt_tol
            )));
        }
        if let TauMode::Schedule(s) = &self.tau_mode {
            if s.is_empty() || s.iter().any(|&t| !(t > 0.0)) {
                return Err(Error::InvalidParameter(
                    "tau schedule must be nonempty and positive".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmpTrace {
    /// `|z^t|^2 / n` per iteration.
    pub tau2: Vec<f64>,
    /// Per-row-block residual variance per iteration.
    pub block_tau2: Vec<Vec<f64>>,
    /// Section-wise hard decisions of `beta^{t+1}` per iteration.
    pub decisions: Vec<Vec<usize>>,
    pub snapshots: Vec<Vec<f64>>,
    /// Final estimate, nonnegative, length `M L`.
    pub beta: Vec<f64>,
    pub iterations: usize,
    pub halted: bool,
    pub section_size: usize,
}

impl AmpTrace {
    pub fn final_decisions(&self) -> Vec<usize> {
        hard_decision(&self.beta, self.section_size)
    }

    /// Writes `t,tau2,section_errors` rows; the last column is empty without truth.
    pub fn write_csv<W: Write>(&self, mut w: W, truth: Option<&[usize]>) -> Result<()> {
        writeln!(w, "t,tau2,section_errors")?;
        for (t, tau2) in self.tau2.iter().enumerate() {
            let errs = match (truth, self.decisions.get(t)) {
                (Some(truth), Some(dec)) => dec.iter().zip(truth).filter(|(a, b)| a != b).count().to_string(),
                _ => String::new(),
            };
            writeln!(w, "{t},{tau2:e},{errs}")?;
        }
        Ok(())
    }
}

/// Posterior-mean denoiser for one section: `a * softmax(2 Re(s) a / tau^2)`.
pub fn denoise_section(s: &[Complex64], amplitude: f64, tau2: f64, out: &mut [f64]) -> Result<()> {
    check_len("denoiser output", s.len(), out.len())?;
    let c = 2.0 * amplitude / tau2;
    let mut max = f64::NEG_INFINITY;
    for (o, v) in out.iter_mut().zip(s) {
        *o = c * v.re;
        max = max.max(*o);
    }
    if !max.is_finite() {
        return Err(Error::Divergence { iteration: 0 });
    }
    let mut sum = 0.0;
    for o in out.iter_mut() {
        *o = (*o - max).exp();
        sum += *o;
    }
    let scale = amplitude / sum;
    for o in out.iter_mut() {
        *o *= scale;
    }
    Ok(())
}

/// Convenience form taking `(P_l, n)` instead of the amplitude.
pub fn denoise_section_power(s: &[Complex64], section_power: f64, n: usize, tau2: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; s.len()];
    denoise_section(s, (n as f64 * section_power).sqrt(), tau2, &mut out)?;
    Ok(out)
}

/// Argmax per section, ties toward the smallest index.
pub fn hard_decision(beta: &[f64], section_size: usize) -> Vec<usize> {
    beta.chunks(section_size)
        .map(|sec| {
            sec.iter()
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) },
                )
                .0
        })
        .collect()
}

pub fn hard_decision_message(beta: &[f64], amplitudes: &[f64], section_size: usize) -> Result<MessageVector> {
    MessageVector::from_positions(section_size, &hard_decision(beta, section_size), amplitudes)
}

/// Runs AMP to convergence or `max_iters`.
pub fn amp_decode(
    y: &[Complex64],
    op: &dyn DesignOperator,
    alloc: &PowerAllocation,
    config: &AmpConfig,
) -> Result<AmpTrace> {
    let n = op.rows() as f64;
    check_len("power allocation", op.sections(), alloc.len())?;
    let amps: Vec<f64> = alloc.powers().iter().map(|p| (n * p).sqrt()).collect();
    amp_decode_amplitudes(y, op, &amps, config)
}

/// [`amp_decode`] with explicit per-section amplitudes `sqrt(n P_l)`.
pub fn amp_decode_amplitudes(
    y: &[Complex64],
    op: &dyn DesignOperator,
    amps: &[f64],
    config: &AmpConfig,
) -> Result<AmpTrace> {
    config.validate()?;
    let n = op.rows();
    let m = op.section_size();
    let l = op.sections();
    check_len("channel output", n, y.len())?;
    check_len("amplitudes", l, amps.len())?;
    let profile = op.coupling();
    let CouplingProfile {
        row_blocks,
        section_block,
        weights,
    } = &profile;
    let n_col_blocks = profile.column_blocks();
    let amp2: Vec<f64> = amps.iter().map(|a| a * a).collect();

    let mut pinned: Vec<Option<usize>> = vec![None; l];
    for &(sec, pos) in &config.pinned {
        if sec >= l || pos >= m {
            return Err(Error::InvalidParameter(format!(
                "pinned entry ({sec}, {pos}) outside {l} sections of size {m}"
            )));
        }
        pinned[sec] = Some(pos);
    }

    let mut beta = vec![0.0; l * m];
    for (sec, p) in pinned.iter().enumerate() {
        if let Some(pos) = p {
            beta[sec * m + pos] = amps[sec];
        }
    }

    let mut trace = AmpTrace {
        tau2: Vec::new(),
        block_tau2: Vec::new(),
        decisions: Vec::new(),
        snapshots: Vec::new(),
        beta: Vec::new(),
        iterations: 0,
        halted: false,
        section_size: m,
    };

    let zero = Complex64::new(0.0, 0.0);
    let mut z_prev: Vec<Complex64> = Vec::new();
    let mut onsager = vec![0.0; row_blocks.len()];
    let mut phi = vec![0.0; row_blocks.len()];
    let mut tau_col = vec![0.0; n_col_blocks];
    let mut scaled = vec![zero; n];

    for t in 0..config.max_iters {
        let ab = op.forward_real(&beta)?;
        let mut z: Vec<Complex64> = y.iter().zip(&ab).map(|(yi, xi)| yi - xi).collect();
        if t > 0 {
            for (rows, &o) in row_blocks.iter().zip(&onsager) {
                for i in rows.clone() {
                    z[i] += z_prev[i] * o;
                }
            }
        }

        let total: f64 = z.iter().map(|v| v.norm_sqr()).sum();
        let tau_hat = total / n as f64;
        if !tau_hat.is_finite() {
            return Err(Error::Divergence { iteration: t });
        }
        for (p, rows) in phi.iter_mut().zip(row_blocks) {
            *p = match &config.tau_mode {
                TauMode::Online => {
                    let e: f64 = z[rows.clone()].iter().map(|v| v.norm_sqr()).sum();
                    (e / rows.len() as f64).max(VARIANCE_FLOOR)
                }
                TauMode::Schedule(s) => s[t.min(s.len() - 1)],
            };
        }
        trace.tau2.push(tau_hat);
        trace.block_tau2.push(phi.clone());

        for (c, tc) in tau_col.iter_mut().enumerate() {
            let prec: f64 = weights.iter().zip(&phi).map(|(w, p)| w[c] / p).sum();
            *tc = 1.0 / prec;
        }

        for (rows, &p) in row_blocks.iter().zip(&phi) {
            let inv = 1.0 / p;
            for i in rows.clone() {
                scaled[i] = z[i] * inv;
            }
        }
        let v = op.adjoint(&scaled)?;

        let mut s = vec![zero; m];
        for sec in 0..l {
            if pinned[sec].is_some() {
                continue;
            }
            let tc = tau_col[section_block[sec]];
            let range = sec * m..(sec + 1) * m;
            for ((sj, &bj), vj) in s.iter_mut().zip(&beta[range.clone()]).zip(&v[range.clone()]) {
                *sj = bj + vj * tc;
            }
            denoise_section(&s, amps[sec], tc, &mut beta[range]).map_err(|_| Error::Divergence { iteration: t })?;
        }

        let mut deficit = vec![0.0; n_col_blocks];
        for sec in 0..l {
            let e: f64 = beta[sec * m..(sec + 1) * m].iter().map(|b| b * b).sum();
            deficit[section_block[sec]] += amp2[sec] - e;
        }
        for (((o, rows), w), &p) in onsager.iter_mut().zip(row_blocks).zip(weights).zip(&phi) {
            let acc: f64 = w.iter().zip(&deficit).map(|(g, d)| g * d).sum();
            *o = acc / (rows.len() as f64 * p);
        }

        trace.decisions.push(hard_decision(&beta, m));
        if config.snapshots {
            trace.snapshots.push(beta.clone());
        }
        trace.iterations = t + 1;

        if tau_hat <= VARIANCE_FLOOR {
            trace.halted = true;
            break;
        }
        if t > 0 {
            let prev = trace.tau2[t - 1];
            if ((tau_hat - prev) / tau_hat).abs() < config.halt_tol {
                trace.halted = true;
                break;
            }
        }
        z_prev = z;
    }
    trace.beta = beta;
    Ok(trace)
}
