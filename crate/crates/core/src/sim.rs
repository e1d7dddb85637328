//! Seeded frame-error-rate sweeps.
//!
//! Trial `t` at SNR index `s` draws everything (data and noise) from
//! `seed_stream(seed, [TRIAL, s, t])`, so a sweep is a pure function of its
//! config and code spec. Trials run in fixed-size chunks on worker threads;
//! outcomes are reduced in trial order and a point stops at the first trial
//! that satisfies the stopping rule, whatever the worker count.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::codec::{HyCodec, ShapingDecisions};
use crate::error::{invalid, Error, Result};
use crate::modulation::{awgn, ChannelParams};
use crate::par::map_chunks;
use crate::seed::{seed_stream, tag};

const CHUNK: usize = 32;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    Standard,
    Dynfrozen,
    Reencode,
}

impl DecoderKind {
    pub const ALL: [DecoderKind; 3] = [DecoderKind::Standard, DecoderKind::Dynfrozen, DecoderKind::Reencode];

    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Standard => "standard",
            DecoderKind::Dynfrozen => "dynfrozen",
            DecoderKind::Reencode => "reencode",
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DecoderKind::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown decoder '{s}' (standard, dynfrozen, reencode)")))
    }
}

/// What ends a sweep point besides `max_trials`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Every decoder has `min_frame_errors` frame errors.
    #[default]
    FrameErrors,
    /// `min_frame_errors` trials where standard list decoding fails.
    SclFailures,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StandardShaping {
    #[default]
    Branch,
    PosteriorArgmax,
}

impl From<StandardShaping> for ShapingDecisions {
    fn from(s: StandardShaping) -> Self {
        match s {
            StandardShaping::Branch => ShapingDecisions::Branch,
            StandardShaping::PosteriorArgmax => ShapingDecisions::PosteriorArgmax,
        }
    }
}

fn default_max_trials() -> u64 {
    3_000_000
}

fn default_min_errors() -> u64 {
    100
}

fn default_workers() -> usize {
    1
}

fn default_decoders() -> Vec<DecoderKind> {
    vec![DecoderKind::Standard]
}

/// One sweep, as read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Code spec file, relative to the config file.
    pub spec: PathBuf,
    #[serde(default = "default_decoders")]
    pub decoders: Vec<DecoderKind>,
    pub decoder_list: usize,
    pub snr_db: Vec<f64>,
    #[serde(default = "default_max_trials")]
    pub max_trials: u64,
    #[serde(default = "default_min_errors")]
    pub min_frame_errors: u64,
    #[serde(default)]
    pub stop: StopRule,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Treatment of shaping bits by the standard decoder.
    #[serde(default)]
    pub standard_shaping: StandardShaping,
}

impl SweepConfig {
    /// Reads a config; a relative `spec` path is resolved against the
    /// config's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read sweep config {}: {e}", path.display())))?;
        let mut cfg: SweepConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if cfg.spec.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.spec = dir.join(&cfg.spec);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("snr grid must be a non-empty list of finite values".into()));
        }
        if self.decoders.is_empty() {
            return Err(Error::Config("no decoders selected".into()));
        }
        if self.decoder_list == 0 {
            return Err(Error::Config("decoder_list must be at least 1".into()));
        }
        if self.min_frame_errors == 0 {
            return Err(Error::Config("min_frame_errors must be at least 1".into()));
        }
        if self.max_trials == 0 {
            return invalid("max_trials must be at least 1");
        }
        Ok(())
    }
}

/// Outcome of one decoder on one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderOutcome {
    pub decoder: DecoderKind,
    pub success: bool,
    pub valid: bool,
    pub metric: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: u64,
    /// In the order of the requested decoders.
    pub outcomes: Vec<DecoderOutcome>,
    /// Re-encodings, when the re-encoding decoder ran.
    pub lambda: Option<usize>,
    /// Standard CRC-aided selection from the branching list is not the
    /// transmitted `u` (data and shaping bits). Present when that list was built.
    pub scl_would_fail: Option<bool>,
}

/// Decoding setup shared by every trial of a point.
#[derive(Debug, Clone, Copy)]
pub struct TrialSetup<'a> {
    pub codec: &'a HyCodec,
    pub channel: ChannelParams,
    pub decoders: &'a [DecoderKind],
    pub decoder_list: usize,
    pub standard_shaping: ShapingDecisions,
}

/// Uniform data, encoding, AWGN and every requested decoder on the same `y`.
pub fn run_trial<R: Rng>(setup: &TrialSetup<'_>, trial: u64, rng: &mut R) -> Result<TrialRecord> {
    let codec = setup.codec;
    let data: Vec<u8> = (0..codec.spec().data_len()).map(|_| rng.random_range(0..2u8)).collect();
    let cw = codec.encode_default(&data)?;
    let y = awgn(&cw.symbols, setup.channel.noise_var, rng)?;

    let wants_list = setup.decoders.contains(&DecoderKind::Reencode)
        || (setup.decoders.contains(&DecoderKind::Standard) && setup.standard_shaping == ShapingDecisions::Branch);
    let shared = if wants_list {
        let list = codec.list_decode(&y, setup.decoder_list, &setup.channel)?;
        Some(codec.reencode_select(&list)?)
    } else {
        None
    };
    let correct = |r: &crate::codec::DecodeResult| r.valid && r.data == data;

    let mut outcomes = Vec::with_capacity(setup.decoders.len());
    let mut lambda = None;
    for &decoder in setup.decoders {
        let result = match (decoder, &shared) {
            (DecoderKind::Standard, Some(s)) if setup.standard_shaping == ShapingDecisions::Branch => s.standard.clone(),
            (DecoderKind::Standard, _) => {
                codec.decode_standard_with(&y, setup.decoder_list, &setup.channel, setup.standard_shaping)?
            }
            (DecoderKind::Dynfrozen, _) => codec.decode_dynfrozen(&y, setup.decoder_list, &setup.channel)?,
            (DecoderKind::Reencode, Some(s)) => {
                lambda = s.result.lambda;
                s.result.clone()
            }
            (DecoderKind::Reencode, None) => unreachable!("list is built whenever re-encoding is requested"),
        };
        outcomes.push(DecoderOutcome {
            decoder,
            success: correct(&result),
            valid: result.valid,
            metric: result.metric,
        });
    }
    Ok(TrialRecord {
        trial,
        outcomes,
        lambda,
        scl_would_fail: shared.map(|s| !(s.standard.valid && s.standard.u_hat == cw.u)),
    })
}

/// Aggregate for one (SNR, decoder) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FerPoint {
    pub snr_db: f64,
    pub decoder: DecoderKind,
    pub encoder_list: usize,
    pub decoder_list: usize,
    pub trials: u64,
    pub frame_errors: u64,
    /// Trials where standard list decoding fails.
    pub scl_failures: u64,
    /// Re-encoding decoder only: counts of Λ = 0..=decoder_list over
    /// trials where standard list decoding fails.
    pub lambda_hist: Option<Vec<u64>>,
}

impl FerPoint {
    pub fn fer(&self) -> f64 {
        self.frame_errors as f64 / self.trials as f64
    }

    /// 95% Wilson score interval.
    pub fn fer_ci(&self) -> (f64, f64) {
        wilson_interval(self.frame_errors, self.trials)
    }

    /// `E[Λ | standard list decoding fails]`.
    pub fn mean_lambda_fail(&self) -> Option<f64> {
        let hist = self.lambda_hist.as_ref()?;
        let total: u64 = hist.iter().sum();
        (total > 0).then(|| hist.iter().enumerate().map(|(l, &c)| l as f64 * c as f64).sum::<f64>() / total as f64)
    }
}

pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Running totals for one SNR point.
struct Tally {
    trials: u64,
    errors: Vec<u64>,
    scl_failures: u64,
    hist: Vec<u64>,
}

impl Tally {
    fn new(decoders: usize, list: usize) -> Self {
        Self {
            trials: 0,
            errors: vec![0; decoders],
            scl_failures: 0,
            hist: vec![0; list + 1],
        }
    }

    fn add(&mut self, r: &TrialRecord) {
        self.trials += 1;
        for (e, o) in self.errors.iter_mut().zip(&r.outcomes) {
            *e += u64::from(!o.success);
        }
        if r.scl_would_fail == Some(true) {
            self.scl_failures += 1;
            if let Some(l) = r.lambda {
                self.hist[l] += 1;
            }
        }
    }

    fn done(&self, cfg: &SweepConfig) -> bool {
        self.trials >= cfg.max_trials
            || match cfg.stop {
                StopRule::FrameErrors => self.errors.iter().all(|&e| e >= cfg.min_frame_errors),
                StopRule::SclFailures => self.scl_failures >= cfg.min_frame_errors,
            }
    }
}

/// Runs every SNR point of `cfg` against `codec`. `on_point` sees the rows
/// of each point as soon as it finishes.
pub fn run_sweep(cfg: &SweepConfig, codec: &HyCodec, mut on_point: impl FnMut(&[FerPoint])) -> Result<Vec<FerPoint>> {
    cfg.validate()?;
    let mut seen = Vec::new();
    for d in &cfg.decoders {
        if seen.contains(d) {
            return Err(Error::Config(format!("decoder '{d}' listed twice")));
        }
        seen.push(*d);
    }
    let workers = cfg.workers.max(1);
    let mut rows = Vec::new();
    for (s, &snr_db) in cfg.snr_db.iter().enumerate() {
        let setup = TrialSetup {
            codec,
            channel: codec.channel(snr_db)?,
            decoders: &cfg.decoders,
            decoder_list: cfg.decoder_list,
            standard_shaping: cfg.standard_shaping.into(),
        };
        let mut tally = Tally::new(cfg.decoders.len(), cfg.decoder_list);
        let batch = (CHUNK * workers) as u64;
        'point: while !tally.done(cfg) {
            let start = tally.trials;
            let count = batch.min(cfg.max_trials - start) as usize;
            let chunks = map_chunks(count, CHUNK, workers, |range| -> Result<Vec<TrialRecord>> {
                range
                    .map(|i| {
                        let t = start + i as u64;
                        let mut rng = seed_stream(cfg.seed, &[tag::TRIAL, s as u64, t]);
                        run_trial(&setup, t, &mut rng)
                    })
                    .collect()
            });
            for chunk in chunks {
                for record in chunk? {
                    tally.add(&record);
                    if tally.done(cfg) {
                        break 'point;
                    }
                }
            }
        }
        let point: Vec<FerPoint> = cfg
            .decoders
            .iter()
            .zip(&tally.errors)
            .map(|(&decoder, &frame_errors)| FerPoint {
                snr_db,
                decoder,
                encoder_list: codec.spec().encoder_list,
                decoder_list: cfg.decoder_list,
                trials: tally.trials,
                frame_errors,
                scl_failures: tally.scl_failures,
                lambda_hist: (decoder == DecoderKind::Reencode).then(|| tally.hist.clone()),
            })
            .collect();
        on_point(&point);
        rows.extend(point);
    }
    Ok(rows)
}

pub const FER_COLUMNS: [&str; 10] = [
    "snr_db",
    "decoder",
    "encoder_list",
    "decoder_list",
    "trials",
    "frame_errors",
    "fer",
    "fer_ci_low",
    "fer_ci_high",
    "mean_lambda_fail",
];

#[derive(Serialize)]
struct FerRow {
    snr_db: f64,
    decoder: &'static str,
    encoder_list: usize,
    decoder_list: usize,
    trials: u64,
    frame_errors: u64,
    fer: f64,
    fer_ci_low: f64,
    fer_ci_high: f64,
    mean_lambda_fail: Option<f64>,
}

#[derive(Serialize)]
struct HistRow {
    snr_db: f64,
    lambda: usize,
    count: u64,
}

/// One row per (SNR, decoder), columns [`FER_COLUMNS`].
pub fn write_fer_csv<W: Write>(points: &[FerPoint], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(FER_COLUMNS)?;
    for p in points {
        let (lo, hi) = p.fer_ci();
        w.serialize(FerRow {
            snr_db: p.snr_db,
            decoder: p.decoder.name(),
            encoder_list: p.encoder_list,
            decoder_list: p.decoder_list,
            trials: p.trials,
            frame_errors: p.frame_errors,
            fer: p.fer(),
            fer_ci_low: lo,
            fer_ci_high: hi,
            mean_lambda_fail: p.mean_lambda_fail(),
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Columns: `snr_db,lambda,count`. Rows for Λ = 1..=L of every re-encoding
/// point, preceded by Λ = 0 when it occurred.
pub fn write_histogram_csv<W: Write>(points: &[FerPoint], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(["snr_db", "lambda", "count"])?;
    for p in points {
        let Some(hist) = &p.lambda_hist else { continue };
        for (lambda, &count) in hist.iter().enumerate() {
            if lambda == 0 && count == 0 {
                continue;
            }
            w.serialize(HistRow {
                snr_db: p.snr_db,
                lambda,
                count,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}
