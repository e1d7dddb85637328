//! Monte-Carlo code construction.
//!
//! Bit-channel entropies are estimated with a genie-aided SC pass over iid
//! symbol words: decisions are forced to the true `u` and the binary entropy
//! of every decision LLR is averaged. Shaping positions take the smallest
//! prior entropies, information positions the smallest posterior entropies
//! among the rest.
//!
//! [`build_code_spec`] runs two passes. A provisional information set from
//! posterior entropies under the design distribution is used to measure the
//! effective distribution; posterior entropies under that distribution fix
//! the final sets, and the effective distribution of the final code is
//! stored as the spec's target.

use serde::{Deserialize, Serialize};

use crate::codec::{CodeSpec, HyCodec, SpecMetadata};
use crate::crc::CrcConfig;
use crate::error::{invalid, Result};
use crate::modulation::{
    awgn, indices_to_level_bits, maxwell_boltzmann, optimize_nu, ChannelParams, Constellation, ConstellationKind,
    InputDistribution, PosteriorSource, PriorSource,
};
use crate::par::map_chunks;
use crate::polar::{binary_entropy_of_llr, genie_leaf_llrs, polar_transform_in_place, LevelSource};
use crate::seed::{seed_stream, tag};
use rand::Rng;

const CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyKind {
    /// `H(U_j | U_<j)`.
    Prior,
    /// `H(U_j | U_<j, Y)`.
    Posterior,
}

/// Per-index entropy estimates in bits.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyProfile {
    pub kind: EntropyKind,
    pub h: Vec<f64>,
    /// Standard error of each `h[j]`.
    pub std_err: Vec<f64>,
    pub samples: usize,
    /// Standard error of [`total`](Self::total), from per-trial totals.
    pub total_std_err: f64,
}

impl EntropyProfile {
    pub fn total(&self) -> f64 {
        self.h.iter().sum()
    }
}

/// Accumulated sums over a block of trials.
#[derive(Debug, Clone)]
struct Moments {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    total_sum: f64,
    total_sq: f64,
}

impl Moments {
    fn new(len: usize) -> Self {
        Self {
            sum: vec![0.0; len],
            sum_sq: vec![0.0; len],
            total_sum: 0.0,
            total_sq: 0.0,
        }
    }

    fn push(&mut self, h: &[f64]) {
        let mut total = 0.0;
        for ((s, q), &v) in self.sum.iter_mut().zip(&mut self.sum_sq).zip(h) {
            *s += v;
            *q += v * v;
            total += v;
        }
        self.total_sum += total;
        self.total_sq += total * total;
    }

    fn merge(&mut self, other: &Moments) {
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
        self.total_sum += other.total_sum;
        self.total_sq += other.total_sq;
    }
}

fn std_err(sum: f64, sum_sq: f64, n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let nf = n as f64;
    let mean = sum / nf;
    ((sum_sq / nf - mean * mean).max(0.0) * nf / (nf - 1.0) / nf).sqrt()
}

/// Settings shared by the entropy estimators.
#[derive(Debug, Clone)]
pub struct EntropyEstimator {
    pub constellation: Constellation,
    /// Symbols per word.
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub workers: usize,
}

impl EntropyEstimator {
    pub fn new(kind: ConstellationKind, n: usize, trials: usize, seed: u64) -> Self {
        Self {
            constellation: Constellation::new(kind),
            n,
            trials,
            seed,
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    fn check(&self) -> Result<()> {
        if self.trials == 0 {
            return invalid("entropy estimation needs at least one trial");
        }
        if self.n < 2 || !self.n.is_power_of_two() {
            return invalid(format!("n = {} is not a power of two >= 2", self.n));
        }
        Ok(())
    }

    /// Random `u` for one iid word drawn from `d`, plus the point indices.
    fn sample_u(&self, d: &InputDistribution, rng: &mut impl Rng) -> (Vec<usize>, Vec<u8>) {
        let indices = d.sample_indices(self.n, rng);
        let mut u = indices_to_level_bits(&indices, self.constellation.bits_per_symbol());
        for level in u.chunks_mut(self.n) {
            polar_transform_in_place(level).expect("n is a power of two");
        }
        (indices, u)
    }

    fn run<F>(&self, kind: EntropyKind, stream: u64, trial: F) -> Result<EntropyProfile>
    where
        F: Fn(&mut rand_chacha::ChaCha8Rng) -> Result<Vec<f64>> + Sync,
    {
        self.check()?;
        let len = self.n * self.constellation.bits_per_symbol();
        let blocks = map_chunks(self.trials, CHUNK, self.workers, |range| -> Result<Moments> {
            let mut m = Moments::new(len);
            for t in range {
                let mut rng = seed_stream(self.seed, &[stream, t as u64]);
                let llrs = trial(&mut rng)?;
                let h: Vec<f64> = llrs.iter().map(|&l| binary_entropy_of_llr(l)).collect();
                m.push(&h);
            }
            Ok(m)
        });
        let mut acc = Moments::new(len);
        for b in blocks {
            acc.merge(&b?);
        }
        let nf = self.trials as f64;
        Ok(EntropyProfile {
            kind,
            h: acc.sum.iter().map(|s| (s / nf).clamp(0.0, 1.0)).collect(),
            std_err: acc
                .sum
                .iter()
                .zip(&acc.sum_sq)
                .map(|(&s, &q)| std_err(s, q, self.trials))
                .collect(),
            samples: self.trials,
            total_std_err: std_err(acc.total_sum, acc.total_sq, self.trials),
        })
    }

    /// `H(U_j | U_<j)` for words drawn iid from `design`.
    pub fn prior(&self, design: &InputDistribution) -> Result<EntropyProfile> {
        self.prior_tagged(design, tag::PRIOR_ENTROPY)
    }

    fn prior_tagged(&self, design: &InputDistribution, stream: u64) -> Result<EntropyProfile> {
        let source = PriorSource::new(&self.constellation, design, self.n)?;
        self.run(EntropyKind::Prior, stream, |rng| {
            let (_, u) = self.sample_u(design, rng);
            genie_leaf_llrs(&source, &u)
        })
    }

    /// `H(U_j | U_<j, Y)` for words drawn iid from `dist` over AWGN at `dsnr_db`.
    pub fn posterior(&self, dist: &InputDistribution, dsnr_db: f64) -> Result<EntropyProfile> {
        self.posterior_tagged(dist, dsnr_db, tag::POSTERIOR_ENTROPY)
    }

    fn posterior_tagged(&self, dist: &InputDistribution, dsnr_db: f64, stream: u64) -> Result<EntropyProfile> {
        let channel = ChannelParams::new(&self.constellation, dist, dsnr_db)?;
        let points = self.constellation.points();
        self.run(EntropyKind::Posterior, stream, |rng| {
            let (indices, u) = self.sample_u(dist, rng);
            let x: Vec<f64> = indices.iter().map(|&k| points[k]).collect();
            let y = awgn(&x, channel.noise_var, rng)?;
            let source = PosteriorSource::new(&self.constellation, dist, channel.noise_var, &y)?;
            genie_leaf_llrs(&source as &dyn LevelSource, &u)
        })
    }
}

/// Frozen, information and shaping index sets, each ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSets {
    pub frozen: Vec<usize>,
    pub info: Vec<usize>,
    pub shaping: Vec<usize>,
}

/// Indices of `h` in ascending entropy, ties by smaller index.
fn ranked(h: &[f64], allowed: impl Fn(usize) -> bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..h.len()).filter(|&j| allowed(j)).collect();
    idx.sort_by(|&a, &b| h[a].total_cmp(&h[b]).then(a.cmp(&b)));
    idx
}

/// D = the `n_dm` smallest prior entropies, I = the `k` smallest posterior
/// entropies outside D, F = the rest.
pub fn select_sets(h_prior: &[f64], h_posterior: &[f64], n_dm: usize, k: usize) -> Result<IndexSets> {
    let nb = h_prior.len();
    if h_posterior.len() != nb {
        return invalid(format!("entropy profiles differ in length ({nb} vs {})", h_posterior.len()));
    }
    if n_dm + k > nb {
        return invalid(format!("N_DM + K = {} exceeds {nb} indices", n_dm + k));
    }
    let mut shaping: Vec<usize> = ranked(h_prior, |_| true).into_iter().take(n_dm).collect();
    shaping.sort_unstable();
    let mut info: Vec<usize> = ranked(h_posterior, |j| shaping.binary_search(&j).is_err())
        .into_iter()
        .take(k)
        .collect();
    info.sort_unstable();
    let frozen = (0..nb)
        .filter(|j| shaping.binary_search(j).is_err() && info.binary_search(j).is_err())
        .collect();
    Ok(IndexSets { frozen, info, shaping })
}

/// Empirical symbol distribution of `trials` encodings of uniform random data.
pub fn measure_effective_distribution(codec: &HyCodec, trials: usize, seed: u64, workers: usize) -> Result<InputDistribution> {
    measure_tagged(codec, trials, seed, workers, 0)
}

fn measure_tagged(codec: &HyCodec, trials: usize, seed: u64, workers: usize, pass: u64) -> Result<InputDistribution> {
    if trials == 0 {
        return invalid("distribution measurement needs at least one encoding");
    }
    let size = codec.constellation().size();
    let k = codec.spec().data_len();
    let blocks = map_chunks(trials, CHUNK, workers, |range| -> Result<Vec<u64>> {
        let mut counts = vec![0u64; size];
        for t in range {
            let mut rng = seed_stream(seed, &[tag::EFFECTIVE_DISTRIBUTION, pass, t as u64]);
            let data: Vec<u8> = (0..k).map(|_| rng.random_range(0..2u8)).collect();
            for idx in codec.encode_default(&data)?.symbol_indices() {
                counts[idx] += 1;
            }
        }
        Ok(counts)
    });
    let mut counts = vec![0u64; size];
    for b in blocks {
        for (c, v) in counts.iter_mut().zip(b?) {
            *c += v;
        }
    }
    InputDistribution::from_counts(&counts)
}

fn default_entropy_trials() -> usize {
    100_000
}

fn default_list() -> usize {
    1
}

fn default_crc() -> CrcConfig {
    CrcConfig::none()
}

/// Inputs of [`build_code_spec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub constellation: ConstellationKind,
    pub n: usize,
    /// Size of I, checksum included.
    pub k: usize,
    #[serde(default = "default_crc")]
    pub crc: CrcConfig,
    #[serde(default)]
    pub n_dm: usize,
    pub dsnr_db: f64,
    #[serde(default)]
    pub kappa_db: f64,
    #[serde(default = "default_list")]
    pub encoder_list: usize,
    /// Fixes the design parameter instead of optimizing it; 0 is uniform.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default = "default_entropy_trials")]
    pub entropy_trials: usize,
    #[serde(default = "default_entropy_trials")]
    pub distribution_trials: usize,
    #[serde(default)]
    pub seed: u64,
}

/// Full construction pipeline.
pub fn build_code_spec(params: &ConstructionParams, workers: usize) -> Result<CodeSpec> {
    let c = Constellation::new(params.constellation);
    let nb = params.n * c.bits_per_symbol();
    if params.k <= params.crc.degree() {
        return invalid(format!("K = {} must exceed the CRC length {}", params.k, params.crc.degree()));
    }
    if params.n_dm + params.k > nb {
        return invalid(format!("N_DM + K = {} exceeds {nb} indices", params.n_dm + params.k));
    }
    let nu = match params.nu {
        Some(nu) => nu,
        None => optimize_nu(&c, params.dsnr_db + params.kappa_db),
    };
    let design = maxwell_boltzmann(&c, nu)?;
    let est = EntropyEstimator {
        constellation: c.clone(),
        n: params.n,
        trials: params.entropy_trials,
        seed: params.seed,
        workers,
    };
    let h_prior = est.prior(&design)?;
    let provisional = est.posterior_tagged(&design, params.dsnr_db, tag::PROVISIONAL_ENTROPY)?;
    let sets = select_sets(&h_prior.h, &provisional.h, params.n_dm, params.k)?;

    let assemble = |sets: IndexSets, target: InputDistribution| CodeSpec {
        n: params.n,
        levels: c.bits_per_symbol(),
        constellation: params.constellation,
        encoder_list: params.encoder_list,
        frozen: sets.frozen,
        info: sets.info,
        shaping: sets.shaping,
        crc: params.crc.clone(),
        design: design.clone(),
        target,
        metadata: SpecMetadata {
            k: params.k,
            n_dm: params.n_dm,
            dsnr_db: params.dsnr_db,
            kappa_db: params.kappa_db,
            nu,
            entropy_trials: params.entropy_trials,
            distribution_trials: params.distribution_trials,
            seed: params.seed,
        },
    };

    let draft = HyCodec::new(assemble(sets, design.clone()))?;
    let effective = measure_tagged(&draft, params.distribution_trials, params.seed, workers, 0)?;
    let h_post = est.posterior(&effective, params.dsnr_db)?;
    let sets = select_sets(&h_prior.h, &h_post.h, params.n_dm, params.k)?;
    let draft = HyCodec::new(assemble(sets.clone(), effective))?;
    let target = measure_tagged(&draft, params.distribution_trials, params.seed, workers, 1)?;
    let spec = assemble(sets, target);
    spec.validate()?;
    Ok(spec)
}
