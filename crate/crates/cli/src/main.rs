//! `mlhy`: construct shaped multilevel polar codes, sweep their FER and
//! collect re-encoding statistics.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use mlhy::codec::{CodeSpec, HyCodec};
use mlhy::construction::{build_code_spec, ConstructionParams};
use mlhy::crc::CrcConfig;
use mlhy::modulation::{conditional_entropy, mutual_information, ChannelParams};
use mlhy::sim::{run_sweep, write_fer_csv, write_histogram_csv, DecoderKind, FerPoint, StopRule, SweepConfig};
use toml::{Table, Value};

/// Overrides the worker count of every subcommand (the `--workers` flag wins).
const WORKERS_ENV: &str = "MLHY_WORKERS";

#[derive(Parser)]
#[command(name = "mlhy", version, about = "Shaped multilevel polar codes with validity-checking list decoders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a code spec by Monte-Carlo construction.
    Construct(ConstructArgs),
    /// Run an FER sweep and write the CSV.
    Simulate(SimulateArgs),
    /// Collect the re-encoding count histogram at chosen SNRs.
    Lambda(SimulateArgs),
    /// Print a summary of a code spec.
    Info(InfoArgs),
}

#[derive(Args)]
struct ConstructArgs {
    /// TOML file with construction parameters; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output code spec (TOML).
    #[arg(long, short)]
    out: PathBuf,
    /// `4-PAM` or `8-ASK`.
    #[arg(long)]
    constellation: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Size of the information set, CRC included.
    #[arg(long)]
    k: Option<usize>,
    /// CRC generator as a binary string, MSB first.
    #[arg(long, conflicts_with = "crc_bits")]
    crc: Option<String>,
    /// Use the default CRC generator of this degree (0, 3, 5 or 7).
    #[arg(long)]
    crc_bits: Option<usize>,
    #[arg(long)]
    n_dm: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    dsnr: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<f64>,
    #[arg(long)]
    encoder_list: Option<usize>,
    /// Fix the Maxwell-Boltzmann parameter instead of optimizing it (0 = uniform).
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    entropy_trials: Option<usize>,
    #[arg(long)]
    distribution_trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Sweep config (TOML); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Code spec; overrides the config's `spec`.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Main CSV: FER rows (`simulate`) or the histogram (`lambda`).
    #[arg(long, short)]
    out: PathBuf,
    /// Companion histogram CSV (`simulate` only).
    #[arg(long)]
    hist: Option<PathBuf>,
    /// Comma-separated SNR grid in dB.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    snr: Option<Vec<f64>>,
    /// Comma-separated subset of standard, dynfrozen, reencode.
    #[arg(long, value_delimiter = ',')]
    decoders: Option<Vec<String>>,
    #[arg(long)]
    decoder_list: Option<usize>,
    #[arg(long)]
    max_trials: Option<u64>,
    /// Frame errors per point (`lambda`: standard-decoder failures).
    #[arg(long)]
    min_errors: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Suppress per-point progress on stderr.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Args)]
struct InfoArgs {
    spec: PathBuf,
    /// Also report rates at this SNR (dB).
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<f64>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Construct(a) => construct(a),
        Command::Simulate(a) => simulate(a, false),
        Command::Lambda(a) => simulate(a, true),
        Command::Info(a) => info(a),
    }
}

fn read_table(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))
}

fn set(table: &mut Table, key: &str, value: Option<impl Into<Value>>) {
    if let Some(v) = value {
        table.insert(key.to_owned(), v.into());
    }
}

fn to_int(v: impl TryInto<i64>) -> Result<i64> {
    v.try_into().map_err(|_| anyhow::anyhow!("value out of range"))
}

fn workers(flag: Option<usize>, config: usize) -> Result<usize> {
    if let Some(w) = flag {
        return Ok(w.max(1));
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => Ok(v
            .trim()
            .parse::<usize>()
            .with_context(|| format!("{WORKERS_ENV}='{v}' is not a worker count"))?
            .max(1)),
        Err(_) => Ok(config.max(1)),
    }
}

fn construct(a: ConstructArgs) -> Result<()> {
    let mut t = match &a.config {
        Some(p) => read_table(p)?,
        None => Table::new(),
    };
    set(&mut t, "constellation", a.constellation);
    set(&mut t, "n", a.n.map(to_int).transpose()?);
    set(&mut t, "k", a.k.map(to_int).transpose()?);
    set(&mut t, "n_dm", a.n_dm.map(to_int).transpose()?);
    set(&mut t, "dsnr_db", a.dsnr);
    set(&mut t, "kappa_db", a.kappa);
    set(&mut t, "encoder_list", a.encoder_list.map(to_int).transpose()?);
    set(&mut t, "nu", a.nu);
    set(&mut t, "entropy_trials", a.entropy_trials.map(to_int).transpose()?);
    set(&mut t, "distribution_trials", a.distribution_trials.map(to_int).transpose()?);
    set(&mut t, "seed", a.seed.map(to_int).transpose()?);
    let crc = match (a.crc, a.crc_bits) {
        (Some(poly), _) => Some(poly.parse::<CrcConfig>()?),
        (None, Some(p)) => Some(CrcConfig::default_for(p)?),
        (None, None) => None,
    };
    if let Some(crc) = crc {
        t.insert("crc".into(), Value::try_from(&crc)?);
    }
    let config_workers = t.remove("workers").and_then(|v| v.as_integer()).unwrap_or(1);
    let params: ConstructionParams = t.try_into().context("incomplete construction parameters")?;
    let workers = workers(a.workers, usize::try_from(config_workers).unwrap_or(1))?;
    let spec = build_code_spec(&params, workers)?;
    spec.save(&a.out)?;
    eprintln!(
        "wrote {}: K = {}, N_DM = {}, |F| = {}, rate {} bpcu, target H = {:.4} bits",
        a.out.display(),
        spec.info.len(),
        spec.shaping.len(),
        spec.frozen.len(),
        spec.rate(),
        spec.target.entropy_bits()
    );
    Ok(())
}

fn sweep_config(a: &SimulateArgs, lambda_mode: bool) -> Result<SweepConfig> {
    let (mut t, base) = match &a.config {
        Some(p) => (read_table(p)?, p.parent().map(Path::to_path_buf)),
        None => (Table::new(), None),
    };
    if let Some(spec) = &a.spec {
        t.insert("spec".into(), spec.display().to_string().into());
    }
    set(&mut t, "snr_db", a.snr.clone());
    if let Some(d) = &a.decoders {
        let parsed = d.iter().map(|s| s.trim().parse::<DecoderKind>()).collect::<mlhy::Result<Vec<_>>>()?;
        t.insert("decoders".into(), Value::try_from(parsed)?);
    }
    set(&mut t, "decoder_list", a.decoder_list.map(to_int).transpose()?);
    set(&mut t, "max_trials", a.max_trials.map(to_int).transpose()?);
    set(&mut t, "min_frame_errors", a.min_errors.map(to_int).transpose()?);
    set(&mut t, "seed", a.seed.map(to_int).transpose()?);
    if lambda_mode {
        t.insert("decoders".into(), Value::try_from([DecoderKind::Reencode])?);
        t.insert("stop".into(), Value::try_from(StopRule::SclFailures)?);
    }
    let mut cfg: SweepConfig = t.try_into().context("incomplete sweep config")?;
    if a.spec.is_none() && cfg.spec.is_relative() {
        if let Some(dir) = base {
            cfg.spec = dir.join(&cfg.spec);
        }
    }
    cfg.workers = workers(a.workers, cfg.workers)?;
    cfg.validate()?;
    Ok(cfg)
}

fn simulate(a: SimulateArgs, lambda_mode: bool) -> Result<()> {
    let cfg = sweep_config(&a, lambda_mode)?;
    let spec = CodeSpec::load(&cfg.spec)?;
    if cfg.decoders.contains(&DecoderKind::Dynfrozen) && spec.encoder_list != 1 {
        eprintln!("warning: dynfrozen decoding assumes an SC encoder, spec has encoder_list = {}", spec.encoder_list);
    }
    let codec = HyCodec::new(spec)?;
    let quiet = a.quiet;
    let points = run_sweep(&cfg, &codec, |rows| {
        if !quiet {
            progress(rows);
        }
    })?;
    if lambda_mode {
        write_histogram_csv(&points, create(&a.out)?)?;
    } else {
        write_fer_csv(&points, create(&a.out)?)?;
        if let Some(h) = &a.hist {
            write_histogram_csv(&points, create(h)?)?;
        }
    }
    Ok(())
}

fn progress(rows: &[FerPoint]) {
    for r in rows {
        let lambda = r.mean_lambda_fail().map(|l| format!(" E[Λ|fail] = {l:.2}")).unwrap_or_default();
        eprintln!(
            "{:>6.2} dB {:<9} {:>8} trials {:>5} errors FER {:.3e}{lambda}",
            r.snr_db,
            r.decoder.name(),
            r.trials,
            r.frame_errors,
            r.fer()
        );
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

fn info(a: InfoArgs) -> Result<()> {
    let spec = CodeSpec::load(&a.spec)?;
    let c = spec.constellation();
    let m = &spec.metadata;
    let mut out = std::io::stdout().lock();
    writeln!(out, "constellation     {} (m = {})", spec.constellation, spec.levels)?;
    writeln!(out, "block length      N = {} symbols, {} bits", spec.n, spec.combined_len())?;
    writeln!(
        out,
        "sets              |I| = {} (CRC {} bits), |D| = {}, |F| = {}",
        spec.info.len(),
        spec.crc.degree(),
        spec.shaping.len(),
        spec.frozen.len()
    )?;
    if spec.crc.degree() > 0 {
        writeln!(out, "crc generator     {}", spec.crc)?;
    }
    writeln!(out, "rate              {} bpcu", spec.rate())?;
    writeln!(out, "encoder list      {}", spec.encoder_list)?;
    writeln!(
        out,
        "design            nu = {:.6}, dSNR = {} dB, kappa = {} dB, H = {:.4} bits",
        m.nu,
        m.dsnr_db,
        m.kappa_db,
        spec.design.entropy_bits()
    )?;
    writeln!(
        out,
        "effective         H = {:.4} bits, E[X^2] = {:.4}, TV to design = {:.4}",
        spec.target.entropy_bits(),
        spec.target.second_moment(&c),
        spec.target.total_variation(&spec.design)
    )?;
    writeln!(out, "effective probs   {:?}", spec.target.probs.iter().map(|p| (p * 1e4).round() / 1e4).collect::<Vec<_>>())?;
    writeln!(
        out,
        "construction      {} entropy trials, {} encodings, seed {}",
        m.entropy_trials, m.distribution_trials, m.seed
    )?;
    if let Some(snr) = a.snr {
        let ch = ChannelParams::new(&c, &spec.target, snr)?;
        writeln!(
            out,
            "at {snr} dB         I(X;Y) = {:.4} bits, H(X|Y) = {:.4} bits",
            mutual_information(&c, &spec.target, ch.noise_var),
            conditional_entropy(&c, &spec.target, ch.noise_var)
        )?;
    }
    Ok(())
}
