use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use sparc_core::amp::{amp_decode, AmpConfig};
use sparc_core::channel::{awgn_channel, snr_to_sigma2};
use sparc_core::operators::{
    check_operator, CirculantOperator, DenseOperator, DesignOperator, DftBlockOperator, OperatorFamily,
};
use sparc_core::params::{build_message, random_bits, SparcParams};
use sparc_core::power::{iterative_allocation, PowerAllocation};
use sparc_core::sc::{base_matrix, ScParams};
use sparc_core::se::{asymptotic_trajectory, predict_decodable, se_trajectory, SeConfig};
use sparc_core::seed;
use sparc_core::sequences::{
    autocorrelation_profile, frank_sequence, milewski_sequence, sequence_for_length, PerfectSequence,
};
use sparc_core::sim::{run_experiment_with, ExperimentConfig, RunOptions, THREADS_ENV};

#[derive(Parser)]
#[command(
    name = "sparc",
    version,
    about = "Sparse regression codes over the complex AWGN channel"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo experiment from a TOML config and write the BER/SecER CSV.
    Simulate(SimulateArgs),
    /// State-evolution trajectory as CSV (t, tau2, x).
    SePredict(SeArgs),
    /// Power allocation as CSV (section, power).
    PowerAlloc(AllocArgs),
    /// Check adjoint consistency, dense agreement and row/column sums of an operator.
    MatrixCheck(MatrixArgs),
    /// Emit a perfect sequence or its autocorrelation profile as CSV.
    Seq(SeqArgs),
    /// Decode one random transmission and emit the AMP trace as CSV.
    Trace(TraceArgs),
    /// Emit a spatially coupled base matrix as CSV.
    BaseMatrix(BaseArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment config (TOML).
    #[arg(short, long)]
    config: PathBuf,
    /// Output CSV; stdout when omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// CSV for the uncoded hard-decision baseline (outer code runs only).
    #[arg(long)]
    baseline_out: Option<PathBuf>,
    /// Worker threads; overrides the environment variable.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Clone)]
struct CodeArgs {
    /// Number of sections L.
    #[arg(long, default_value_t = 128)]
    sections: usize,
    /// Section size M (power of two).
    #[arg(long, default_value_t = 64)]
    section_size: usize,
    /// Rate in bits per channel use; sets n = ceil(L log2 M / R).
    #[arg(long, default_value_t = 0.8)]
    rate: f64,
    #[arg(long, default_value_t = 1.0)]
    power: f64,
    /// SNR per information bit in dB.
    #[arg(long, default_value_t = 6.0)]
    snr_db: f64,
    /// Iterative allocation block count; flat when omitted.
    #[arg(long)]
    blocks: Option<usize>,
    /// Tuning rate for the iterative allocation (defaults to the code rate).
    #[arg(long)]
    rate_pa: Option<f64>,
}

impl CodeArgs {
    fn params(&self) -> Result<SparcParams> {
        let p = SparcParams::from_rate(self.sections, self.section_size, self.rate, self.power, 1.0)?;
        let sigma2 = snr_to_sigma2(self.snr_db, self.power, p.rate())?;
        Ok(p.with_sigma2(sigma2)?)
    }

    fn allocation(&self, params: &SparcParams) -> Result<PowerAllocation> {
        Ok(match self.blocks {
            None => PowerAllocation::flat(params.sections(), params.power())?,
            Some(b) => iterative_allocation(
                params.sections(),
                b,
                params.power(),
                params.sigma2(),
                self.rate_pa.unwrap_or(params.rate()),
            )?,
        })
    }
}

#[derive(Args)]
struct SeArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Use the large-M indicator form instead of Monte-Carlo.
    #[arg(long)]
    asymptotic: bool,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct AllocArgs {
    #[command(flatten)]
    code: CodeArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Gaussian,
    Dft,
    Circulant,
    SpatiallyCoupled,
}

impl From<Family> for OperatorFamily {
    fn from(f: Family) -> Self {
        match f {
            Family::Gaussian => OperatorFamily::Gaussian,
            Family::Dft => OperatorFamily::Dft,
            Family::Circulant => OperatorFamily::Circulant,
            Family::SpatiallyCoupled => OperatorFamily::SpatiallyCoupled,
        }
    }
}

#[derive(Args)]
struct OperatorArgs {
    #[arg(long, value_enum, default_value = "dft")]
    family: Family,
    #[arg(long, default_value_t = 1)]
    operator_seed: u64,
    /// Coupling width (spatially coupled family).
    #[arg(long, default_value_t = 2)]
    sc_width: usize,
    /// Coupling length (spatially coupled family).
    #[arg(long, default_value_t = 4)]
    sc_length: usize,
}

impl OperatorArgs {
    fn build(&self, params: &SparcParams) -> Result<(Box<dyn DesignOperator>, SparcParams)> {
        let seed = self.operator_seed;
        Ok(match OperatorFamily::from(self.family) {
            OperatorFamily::Gaussian => (Box::new(DenseOperator::gaussian(params, seed)?), *params),
            OperatorFamily::Dft => (Box::new(DftBlockOperator::new(params, seed)?), *params),
            OperatorFamily::Circulant => {
                let (p, adjusted) = (*params).round_block_length_to(params.section_size());
                if adjusted {
                    log::warn!("block length rounded up to {}", p.block_length());
                }
                let seq = sequence_for_length(p.section_size())?;
                (Box::new(CirculantOperator::new(&p, seed, seq)?), p)
            }
            OperatorFamily::SpatiallyCoupled => {
                let base = base_matrix(self.sc_width, self.sc_length, params.power())?;
                let sc = ScParams::for_rate(
                    base,
                    params.sections(),
                    params.section_size(),
                    params.message_bits(),
                    params.rate(),
                )?;
                let p = SparcParams::with_block_length(
                    params.sections(),
                    params.section_size(),
                    sc.block_length(),
                    params.power(),
                    params.sigma2(),
                )?;
                (Box::new(sc.operator(seed)?), p)
            }
        })
    }
}

#[derive(Args)]
struct MatrixArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[command(flatten)]
    operator: OperatorArgs,
    /// Random vector pairs for the adjoint check.
    #[arg(long, default_value_t = 100)]
    pairs: usize,
}

#[derive(Args)]
struct SeqArgs {
    /// Length M; picks Frank for perfect squares, else Milewski.
    #[arg(long, conflicts_with_all = ["frank", "milewski"])]
    length: Option<usize>,
    /// Frank sequence with this d.
    #[arg(long)]
    frank: Option<usize>,
    /// Milewski sequence as d,h.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    milewski: Option<Vec<usize>>,
    /// Emit lag,abs_corr instead of index,re,im.
    #[arg(long)]
    autocorr: bool,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[command(flatten)]
    operator: OperatorArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
}

#[derive(Args)]
struct BaseArgs {
    #[arg(long, default_value_t = 6)]
    width: usize,
    #[arg(long, default_value_t = 40)]
    length: usize,
    #[arg(long, default_value_t = 1.0)]
    power: f64,
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let cfg =
        ExperimentConfig::from_file(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let result = run_experiment_with(&cfg, &RunOptions { threads: args.threads })?;
    let mut out = output(args.out.as_ref())?;
    result.write_csv(&mut out)?;
    out.flush()?;
    if let Some(path) = &args.baseline_out {
        let mut w = output(Some(path))?;
        result.write_baseline_csv(&mut w)?;
        w.flush()?;
    }
    let mut err = io::stderr().lock();
    result.write_provenance(&mut err)?;
    Ok(())
}

fn se_predict(args: &SeArgs) -> Result<()> {
    let params = args.code.params()?;
    let alloc = args.code.allocation(&params)?;
    let schedule = if args.asymptotic {
        asymptotic_trajectory(&alloc, params.sigma2(), params.rate(), args.max_iters, 1e-6)?
    } else {
        let cfg = SeConfig {
            max_iters: args.max_iters,
            mc_samples: args.samples,
            seed: args.seed,
            ..SeConfig::default()
        };
        se_trajectory(
            &alloc,
            params.sigma2(),
            params.section_size(),
            params.block_length(),
            &cfg,
        )?
    };
    let (decodable, x) = predict_decodable(&alloc, params.sigma2(), params.rate())?;
    log::info!(
        "n = {}, sigma2 = {}, large-system decodable: {decodable} (x = {x})",
        params.block_length(),
        params.sigma2()
    );
    let mut out = output(None)?;
    schedule.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn power_alloc(args: &AllocArgs) -> Result<()> {
    let params = args.code.params()?;
    let alloc = args.code.allocation(&params)?;
    let mut out = output(None)?;
    writeln!(out, "section,power")?;
    for (l, p) in alloc.powers().iter().enumerate() {
        writeln!(out, "{l},{p}")?;
    }
    out.flush()?;
    Ok(())
}

fn matrix_check(args: &MatrixArgs) -> Result<()> {
    let params = args.code.params()?;
    let (op, params) = args.operator.build(&params)?;
    let r = check_operator(op.as_ref(), args.operator.operator_seed ^ 0x5eed, args.pairs)?;
    let mut out = output(None)?;
    writeln!(out, "family = {}", op.family())?;
    writeln!(out, "rows = {}", r.rows)?;
    writeln!(out, "columns = {}", r.columns)?;
    writeln!(out, "rate = {}", params.rate())?;
    writeln!(out, "adjoint_rel_err = {:e}", r.adjoint_rel_err)?;
    writeln!(out, "max_dc_per_sqrt_n = {:e}", r.max_dc)?;
    match &r.dense {
        Some(d) => {
            writeln!(out, "fast_vs_dense = {:e}", d.fast_vs_dense)?;
            writeln!(out, "column_norm2_mean = {}", d.column_norm2_mean)?;
            writeln!(
                out,
                "column_norm2_range = [{}, {}]",
                d.column_norm2_min, d.column_norm2_max
            )?;
            writeln!(out, "max_row_sum = {:e}", d.max_row_sum)?;
            writeln!(out, "max_column_sum = {:e}", d.max_column_sum)?;
        }
        None => writeln!(out, "dense checks skipped (operator too large)")?,
    }
    out.flush()?;
    Ok(())
}

fn seq(args: &SeqArgs) -> Result<()> {
    let s: PerfectSequence = match (args.length, args.frank, &args.milewski) {
        (Some(m), None, None) => sequence_for_length(m)?,
        (None, Some(d), None) => frank_sequence(d)?,
        (None, None, Some(dh)) => milewski_sequence(dh[0], u32::try_from(dh[1])?)?,
        _ => bail!("give exactly one of --length, --frank, --milewski"),
    };
    log::info!("{} of length {}", s.family(), s.len());
    let mut out = output(None)?;
    if args.autocorr {
        writeln!(out, "lag,abs_corr")?;
        for (lag, c) in autocorrelation_profile(s.entries()).iter().enumerate() {
            writeln!(out, "{lag},{:e}", c.norm())?;
        }
    } else {
        writeln!(out, "index,re,im")?;
        for (i, v) in s.entries().iter().enumerate() {
            writeln!(out, "{i},{},{}", v.re, v.im)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn trace(args: &TraceArgs) -> Result<()> {
    let params = args.code.params()?;
    let (op, params) = args.operator.build(&params)?;
    let alloc = args.code.allocation(&params)?;
    let mut rng = seed::rng(args.seed, &[seed::stream::MESSAGE]);
    let bits = random_bits(params.message_bits(), &mut rng);
    let msg = build_message(&bits, &alloc, &params)?;
    let x = op.forward_real(&msg.to_dense())?;
    let mut noise = seed::rng(args.seed, &[seed::stream::NOISE]);
    let y = awgn_channel(&x, params.sigma2(), &mut noise)?;
    let cfg = AmpConfig {
        max_iters: args.max_iters,
        ..AmpConfig::default()
    };
    let trace = amp_decode(&y, op.as_ref(), &alloc, &cfg)?;
    let mut out = output(None)?;
    trace.write_csv(&mut out, Some(&msg.positions()))?;
    out.flush()?;
    Ok(())
}

fn base(args: &BaseArgs) -> Result<()> {
    let b = base_matrix(args.width, args.length, args.power)?;
    let mut out = output(None)?;
    b.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        log::debug!("{THREADS_ENV} = {v}");
    }
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::SePredict(a) => se_predict(a),
        Command::PowerAlloc(a) => power_alloc(a),
        Command::MatrixCheck(a) => matrix_check(a),
        Command::Seq(a) => seq(a),
        Command::Trace(a) => trace(a),
        Command::BaseMatrix(a) => base(a),
    }
}
