//! Monte-Carlo execution of an [`ExperimentConfig`].
//!
//! Trial `t` at SNR index `i` draws its message from
//! `seed::rng(base, [i, t, MESSAGE])` and its noise from
//! `seed::rng(base, [i, t, NOISE])`. Trials run in parallel batches and are
//! folded in index order, so early stopping and every count are independent
//! of the thread count.

use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{AllocationConfig, ExperimentConfig};
use super::stats::clopper_pearson;
use crate::amp::{amp_decode, hard_decision, AmpConfig};
use crate::channel::{awgn_channel, snr_to_sigma2};
use crate::error::{Error, Result};
use crate::operators::{CirculantOperator, DenseOperator, DesignOperator, DftBlockOperator, OperatorFamily};
use crate::outer::{
    decode_pipeline, error_metrics, uncoded_metrics, CheckPlacement, CrcSpec, ErrorMetrics, GroupingLayout, ListConfig,
    OuterCode,
};
use crate::params::{build_message, positions_to_bits, random_bits, SparcParams};
use crate::power::{iterative_allocation, PowerAllocation};
use crate::sc::{base_matrix, ScParams};
use crate::seed;
use crate::sequences::sequence_for_length;

/// Environment variable selecting the worker thread count.
pub const THREADS_ENV: &str = "SPARC_THREADS";

const BATCH: usize = 32;

pub const CSV_HEADER: &str =
    "snr_b_db,trials,bit_errors,ber,ci_low,ci_high,sec_errors,secer,detected,undetected,mean_iters,seconds";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// `None` reads [`THREADS_ENV`], falling back to all cores.
    pub threads: Option<usize>,
}

pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub snr_b_db: f64,
    pub sigma2: f64,
    pub trials: usize,
    pub metrics: ErrorMetrics,
    /// Bitwise hard decisions of the first AMP pass on the same received
    /// words, present when an outer code is configured.
    pub baseline: Option<ErrorMetrics>,
    pub ci_low: f64,
    pub ci_high: f64,
    /// AMP iterations per trial, summed over passes.
    pub mean_iters: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub points: Vec<PointResult>,
    pub provenance: Provenance,
    pub block_length: usize,
    pub transmitted_sections: usize,
    /// `L log2 M / n`.
    pub info_rate: f64,
    /// `(L + N_g r) log2 M / n`.
    pub inner_rate: f64,
}

impl SimResult {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for p in &self.points {
            let m = &p.metrics;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{:.3}",
                p.snr_b_db,
                p.trials,
                m.bit_errors,
                m.ber(),
                p.ci_low,
                p.ci_high,
                m.section_errors,
                m.secer(),
                m.detected,
                m.undetected,
                p.mean_iters,
                p.seconds
            )?;
        }
        Ok(())
    }

    /// Same columns for the uncoded hard-decision baseline, if any.
    pub fn write_baseline_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for p in &self.points {
            let Some(m) = &p.baseline else { continue };
            let (lo, hi) = clopper_pearson(m.bit_errors, m.bits, 0.05);
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},0,0,{},{:.3}",
                p.snr_b_db,
                p.trials,
                m.bit_errors,
                m.ber(),
                lo,
                hi,
                m.section_errors,
                m.secer(),
                p.mean_iters,
                p.seconds
            )?;
        }
        Ok(())
    }

    pub fn write_provenance<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "config_hash = \"{}\"", self.provenance.config_hash)?;
        writeln!(w, "seed = {}", self.provenance.seed)?;
        writeln!(w, "version = \"{}\"", self.provenance.version)?;
        writeln!(w, "block_length = {}", self.block_length)?;
        writeln!(w, "transmitted_sections = {}", self.transmitted_sections)?;
        writeln!(w, "info_rate = {}", self.info_rate)?;
        writeln!(w, "inner_rate = {}", self.inner_rate)?;
        Ok(())
    }
}

/// Everything fixed across trials: dimensions, outer code and operator.
pub struct Scenario {
    pub info_sections: usize,
    pub params: SparcParams,
    pub outer: Option<OuterCode>,
    pub operator: Box<dyn DesignOperator>,
    pub info_rate: f64,
}

impl Scenario {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let c = &cfg.code;
        let m = c.section_size;
        let log2_m = m.trailing_zeros() as usize;
        let info_bits = c.sections * log2_m;
        let family = cfg.operator.family;
        let outer = match &cfg.outer {
            Some(o) => {
                let crc = CrcSpec::from_koopman_str(&o.crc_poly, o.group_size)?;
                let placement = o.placement.unwrap_or(if family == OperatorFamily::SpatiallyCoupled {
                    CheckPlacement::Middle
                } else {
                    CheckPlacement::End
                });
                let layout = GroupingLayout::new(c.sections, o.group_size, crc.degree(), log2_m, placement)?;
                Some(OuterCode {
                    layout,
                    crc,
                    list: ListConfig::new(o.list_size)?,
                })
            }
            None => None,
        };
        let sections = outer.as_ref().map_or(c.sections, |o| o.layout.total_sections());
        let mut n = match (c.block_length, c.rate) {
            (Some(n), _) => n,
            (None, Some(r)) => (info_bits as f64 / r).ceil() as usize,
            (None, None) => unreachable!("validated"),
        };
        let seed = cfg.operator.seed;
        let operator: Box<dyn DesignOperator> = match family {
            OperatorFamily::Gaussian => {
                let params = SparcParams::with_block_length(sections, m, n, c.power, 1.0)?;
                Box::new(DenseOperator::gaussian(&params, seed)?)
            }
            OperatorFamily::Dft => {
                let params = SparcParams::with_block_length(sections, m, n, c.power, 1.0)?;
                Box::new(DftBlockOperator::new(&params, seed)?)
            }
            OperatorFamily::Circulant => {
                let (params, adjusted) =
                    SparcParams::with_block_length(sections, m, n, c.power, 1.0)?.round_block_length_to(m);
                if adjusted {
                    log::warn!(
                        "circulant family: block length {n} rounded up to {} (a multiple of M)",
                        params.block_length()
                    );
                }
                n = params.block_length();
                Box::new(CirculantOperator::new(&params, seed, sequence_for_length(m)?)?)
            }
            OperatorFamily::SpatiallyCoupled => {
                let sc = cfg.sc.clone().unwrap_or_default();
                let base = base_matrix(sc.width, sc.length, c.power)?;
                let rate = info_bits as f64 / n as f64;
                let scp = ScParams::for_rate(base, sections, m, info_bits, rate)?;
                if scp.block_length() != n {
                    log::warn!(
                        "spatially coupled: block length {n} rounded up to {}",
                        scp.block_length()
                    );
                }
                n = scp.block_length();
                Box::new(scp.operator(seed)?)
            }
        };
        let params = SparcParams::with_block_length(sections, m, n, c.power, 1.0)?;
        Ok(Self {
            info_sections: c.sections,
            info_rate: info_bits as f64 / n as f64,
            params,
            outer,
            operator,
        })
    }

    pub fn inner_rate(&self) -> f64 {
        self.params.rate()
    }

    pub fn allocation(&self, cfg: &ExperimentConfig, sigma2: f64) -> Result<PowerAllocation> {
        let (l, p) = (self.params.sections(), self.params.power());
        match cfg.allocation {
            AllocationConfig::Flat => PowerAllocation::flat(l, p),
            AllocationConfig::Iterative { .. } if sigma2 == 0.0 => PowerAllocation::flat(l, p),
            AllocationConfig::Iterative { blocks, rate_pa } => iterative_allocation(l, blocks, p, sigma2, rate_pa),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub metrics: ErrorMetrics,
    pub baseline: Option<ErrorMetrics>,
    pub iterations: usize,
}

/// Fixed inputs shared by every trial at one SNR point.
pub struct PointSetup<'a> {
    pub scenario: &'a Scenario,
    pub alloc: PowerAllocation,
    pub amp: AmpConfig,
    pub amp_again: bool,
    pub sigma2: f64,
    pub base_seed: u64,
    pub snr_index: usize,
}

impl PointSetup<'_> {
    /// One transmission and decode.
    pub fn run_trial(&self, trial: usize) -> Result<TrialOutcome> {
        let scenario = self.scenario;
        let alloc = &self.alloc;
        let log2_m = scenario.params.log2_m();
        let (si, t) = (self.snr_index as u64, trial as u64);
        let mut msg_rng = seed::rng(self.base_seed, &[si, t, seed::stream::MESSAGE]);
        let info = random_bits(scenario.info_sections * log2_m, &mut msg_rng);
        let stream = match &scenario.outer {
            Some(o) => o.layout.encode(&info, &o.crc)?,
            None => info.clone(),
        };
        let msg = build_message(&stream, alloc, &scenario.params)?;
        let x = scenario.operator.forward_real(&msg.to_dense())?;
        let mut noise_rng = seed::rng(self.base_seed, &[si, t, seed::stream::NOISE]);
        let y: Vec<Complex64> = awgn_channel(&x, self.sigma2, &mut noise_rng)?;

        match &scenario.outer {
            Some(o) => {
                let out = decode_pipeline(&y, scenario.operator.as_ref(), alloc, o, &self.amp, self.amp_again)?;
                let metrics = error_metrics(&out.stream, &stream, &o.layout, &out.statuses())?;
                let baseline = uncoded_metrics(&o.layout.extract_info(&out.hard_stream)?, &info, log2_m)?;
                Ok(TrialOutcome {
                    metrics,
                    baseline: Some(baseline),
                    iterations: out.amp_iterations.iter().sum(),
                })
            }
            None => {
                let trace = amp_decode(&y, scenario.operator.as_ref(), alloc, &self.amp)?;
                let bits = positions_to_bits(&hard_decision(&trace.beta, scenario.params.section_size()), log2_m);
                Ok(TrialOutcome {
                    metrics: uncoded_metrics(&bits, &info, log2_m)?,
                    baseline: None,
                    iterations: trace.iterations,
                })
            }
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<SimResult> {
    run_experiment_with(cfg, &RunOptions::default())
}

pub fn run_experiment_with(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SimResult> {
    let threads = opts.threads.or_else(threads_from_env).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let scenario = Scenario::new(cfg)?;
    let amp = AmpConfig {
        max_iters: cfg.amp.max_iters,
        halt_tol: cfg.amp.halt_tol,
        ..AmpConfig::default()
    };
    let amp_again = cfg.outer.as_ref().is_some_and(|o| o.amp_again);
    let mut points = Vec::new();
    for (si, &snr) in cfg.channel.snr_b_db.iter().enumerate() {
        let start = Instant::now();
        let sigma2 = snr_to_sigma2(snr, scenario.params.power(), scenario.info_rate)?;
        let setup = PointSetup {
            scenario: &scenario,
            alloc: scenario.allocation(cfg, sigma2)?,
            amp: amp.clone(),
            amp_again,
            sigma2,
            base_seed: cfg.run.seed,
            snr_index: si,
        };
        let mut metrics = ErrorMetrics::default();
        let mut baseline: Option<ErrorMetrics> = None;
        let mut iterations = 0usize;
        let mut trials = 0usize;
        let mut done = false;
        let mut next = 0;
        while !done && next < cfg.run.trials {
            let end = (next + BATCH).min(cfg.run.trials);
            let outcomes: Vec<Result<TrialOutcome>> =
                pool.install(|| (next..end).into_par_iter().map(|t| setup.run_trial(t)).collect());
            for (t, outcome) in (next..end).zip(outcomes) {
                let o = outcome.inspect_err(|e| log::error!("SNR_b {snr} dB, trial {t}: {e}"))?;
                metrics.merge(&o.metrics);
                if let Some(b) = &o.baseline {
                    baseline.get_or_insert_with(ErrorMetrics::default).merge(b);
                }
                iterations += o.iterations;
                trials += 1;
                if cfg.run.target_errors > 0 && metrics.section_errors >= cfg.run.target_errors {
                    done = true;
                    break;
                }
            }
            next = end;
        }
        let (ci_low, ci_high) = clopper_pearson(metrics.bit_errors, metrics.bits, 0.05);
        log::info!(
            "SNR_b {snr} dB: {trials} trials, BER {:.3e}, SecER {:.3e}",
            metrics.ber(),
            metrics.secer()
        );
        points.push(PointResult {
            snr_b_db: snr,
            sigma2,
            trials,
            metrics,
            baseline,
            ci_low,
            ci_high,
            mean_iters: iterations as f64 / trials as f64,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(SimResult {
        points,
        provenance: Provenance {
            config_hash: cfg.hash()?,
            seed: cfg.run.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        block_length: scenario.params.block_length(),
        transmitted_sections: scenario.params.sections(),
        info_rate: scenario.info_rate,
        inner_rate: scenario.inner_rate(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(extra: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml(&format!(
            r#"
[code]
sections = 32
section_size = 16
rate = 1.0
[operator]
family = "dft"
seed = 5
[channel]
snr_b_db = [inf, 4.0]
[run]
trials = 40
seed = 9
target_errors = 0
{extra}
"#
        ))
        .unwrap()
    }

    fn strip_time(mut r: SimResult) -> SimResult {
        for p in &mut r.points {
            p.seconds = 0.0;
        }
        r
    }

    #[test]
    fn noise_free_point_is_clean() {
        let r = run_experiment_with(&config(""), &RunOptions { threads: Some(1) }).unwrap();
        assert_eq!(r.points[0].sigma2, 0.0);
        assert_eq!(r.points[0].metrics.bit_errors, 0);
        assert_eq!(r.points[0].trials, 40);
        assert_eq!(r.block_length, 128);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let cfg = config("[outer]\ngroup_size = 8\ncrc_poly = \"0x97\"\nlist_size = 4\n");
        let a = strip_time(run_experiment_with(&cfg, &RunOptions { threads: Some(1) }).unwrap());
        let b = strip_time(run_experiment_with(&cfg, &RunOptions { threads: Some(3) }).unwrap());
        assert_eq!(a, b);
        assert!(a.points[1].baseline.is_some());
        assert!(a.inner_rate > a.info_rate);
    }

    #[test]
    fn early_stop_is_exact() {
        let mut cfg = config("");
        cfg.channel.snr_b_db = vec![-2.0];
        cfg.run.target_errors = 5;
        let r = run_experiment_with(&cfg, &RunOptions { threads: Some(2) }).unwrap();
        let p = &r.points[0];
        assert!(p.metrics.section_errors >= 5);
        assert!(p.trials < 40);
        let r2 = run_experiment_with(&cfg, &RunOptions { threads: Some(1) }).unwrap();
        assert_eq!(r2.points[0].trials, p.trials);
    }

    #[test]
    fn csv_header_is_exact() {
        let r = run_experiment_with(&config(""), &RunOptions { threads: Some(1) }).unwrap();
        let mut out = Vec::new();
        r.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert!(lines.next().unwrap().starts_with("inf,40,0,0,0,"));
    }
}
