//! Shaped multilevel polar codes with frozen, information and shaping sets.
//!
//! The combined index `j = level * n + i` addresses bit `i` of the polar
//! segment of label level `level`. Every index belongs to exactly one of
//!
//! * `frozen` (F): fixed to 0,
//! * `info` (I): data followed by the CRC checksum, in ascending index order,
//! * `shaping` (D): chosen by the encoder from the design distribution.
//!
//! The SC encoder (list size 1) sets each shaping bit to the argmax of
//! `P(u_j | u_<j)` under the design distribution; the SCL encoder branches
//! on shaping bits and keeps the most probable word. Shaping bits make the
//! code a non-linear subcode of the polar code with frozen set F, which the
//! dynamic-frozen and re-encoding decoders exploit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::crc::{crc_check, crc_compute, CrcConfig};
use crate::error::{invalid, Error, Result};
use crate::modulation::{
    map_symbols, ChannelParams, Constellation, ConstellationKind, InputDistribution, PosteriorSource, PriorSource,
};
use crate::polar::{scl_run, BitPolicy, LevelSource, ListCandidate};

/// Construction parameters recorded alongside the sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecMetadata {
    /// Size of I, checksum included.
    pub k: usize,
    /// Size of D.
    pub n_dm: usize,
    pub dsnr_db: f64,
    pub kappa_db: f64,
    /// Maxwell-Boltzmann parameter of the design distribution.
    pub nu: f64,
    /// Monte-Carlo samples per entropy profile.
    pub entropy_trials: usize,
    /// Encodings used to measure the effective distribution.
    pub distribution_trials: usize,
    pub seed: u64,
}

/// Full description of a shaped multilevel polar code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeSpec {
    /// Symbols per codeword.
    pub n: usize,
    /// Label bits per symbol.
    pub levels: usize,
    pub constellation: ConstellationKind,
    /// List size of the transmitter's encoder.
    pub encoder_list: usize,
    pub frozen: Vec<usize>,
    pub info: Vec<usize>,
    pub shaping: Vec<usize>,
    pub crc: CrcConfig,
    /// Distribution the shaping rule decodes (`P_X*`).
    pub design: InputDistribution,
    /// Effective channel input distribution, used by the receiver.
    pub target: InputDistribution,
    pub metadata: SpecMetadata,
}

impl CodeSpec {
    /// `m * n`.
    pub fn combined_len(&self) -> usize {
        self.levels * self.n
    }

    /// Data bits per codeword, `K - p`.
    pub fn data_len(&self) -> usize {
        self.info.len().saturating_sub(self.crc.degree())
    }

    /// Bits per channel use, `(K - p) / n`.
    pub fn rate(&self) -> f64 {
        self.data_len() as f64 / self.n as f64
    }

    pub fn constellation(&self) -> Constellation {
        Constellation::new(self.constellation)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.n < 2 || !self.n.is_power_of_two() {
            return bad(format!("n = {} is not a power of two >= 2", self.n));
        }
        let c = self.constellation();
        if self.levels != c.bits_per_symbol() {
            return bad(format!("{} levels for {}", self.levels, self.constellation));
        }
        if self.encoder_list == 0 {
            return bad("encoder list size must be at least 1".into());
        }
        for (name, d) in [("design", &self.design), ("target", &self.target)] {
            if d.probs.len() != c.size() {
                return bad(format!("{name} distribution has {} entries", d.probs.len()));
            }
            let total: f64 = d.probs.iter().sum();
            if d.probs.iter().any(|p| !p.is_finite() || *p < 0.0) || (total - 1.0).abs() > 1e-9 {
                return bad(format!("{name} distribution is not a probability vector"));
            }
        }
        let nb = self.combined_len();
        let mut seen = vec![false; nb];
        for (name, set) in [("frozen", &self.frozen), ("info", &self.info), ("shaping", &self.shaping)] {
            if set.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("{name} set is not strictly ascending"));
            }
            for &j in set {
                if j >= nb {
                    return bad(format!("{name} index {j} outside [0, {nb})"));
                }
                if std::mem::replace(&mut seen[j], true) {
                    return bad(format!("index {j} is in more than one set"));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return bad("frozen, info and shaping sets do not cover every index".into());
        }
        if self.info.len() != self.metadata.k || self.shaping.len() != self.metadata.n_dm {
            return bad(format!(
                "set sizes |I| = {}, |D| = {} disagree with k = {}, n_dm = {}",
                self.info.len(),
                self.shaping.len(),
                self.metadata.k,
                self.metadata.n_dm
            ));
        }
        if self.info.len() <= self.crc.degree() {
            return bad(format!("K = {} must exceed the CRC length {}", self.info.len(), self.crc.degree()));
        }
        Ok(())
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: CodeSpec = toml::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read code spec {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Frozen,
    Info,
    Shaping,
}

/// An encoded frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Codeword {
    /// Level-major `u`, `m * n` bits.
    pub u: Vec<u8>,
    /// Level-major label bits: the polar transform of each level of `u`.
    pub level_bits: Vec<u8>,
    pub symbols: Vec<f64>,
}

impl Codeword {
    /// Point index of every symbol (label, level 0 = LSB).
    pub fn symbol_indices(&self) -> Vec<usize> {
        let n = self.symbols.len();
        let levels = self.level_bits.len() / n;
        (0..n)
            .map(|t| (0..levels).fold(0, |acc, l| acc | usize::from(self.level_bits[l * n + t]) << l))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub data: Vec<u8>,
    pub u_hat: Vec<u8>,
    pub metric: f64,
    /// CRC passed and, for the re-encoding decoder, the word re-encodes to itself.
    pub valid: bool,
    /// Re-encodings performed, re-encoding decoder only.
    pub lambda: Option<usize>,
}

/// How the standard decoder treats shaping bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShapingDecisions {
    /// Branch like data bits (`R = I ∪ D`).
    #[default]
    Branch,
    /// Hard-decide each shaping bit per path from the posterior.
    PosteriorArgmax,
}

/// Outcome of re-encoding validation over a candidate list.
#[derive(Debug, Clone, PartialEq)]
pub struct ReencodeOutcome {
    pub result: DecodeResult,
    /// What the standard CRC-aided selection picks from the same list.
    pub standard: DecodeResult,
}

/// Encoder and decoders for one [`CodeSpec`].
#[derive(Debug, Clone)]
pub struct HyCodec {
    spec: CodeSpec,
    constellation: Constellation,
    prior: PriorSource,
    roles: Vec<Role>,
}

impl HyCodec {
    pub fn new(spec: CodeSpec) -> Result<Self> {
        spec.validate()?;
        let constellation = spec.constellation();
        let prior = PriorSource::new(&constellation, &spec.design, spec.n)?;
        let mut roles = vec![Role::Frozen; spec.combined_len()];
        for &j in &spec.info {
            roles[j] = Role::Info;
        }
        for &j in &spec.shaping {
            roles[j] = Role::Shaping;
        }
        Ok(Self {
            spec,
            constellation,
            prior,
            roles,
        })
    }

    pub fn spec(&self) -> &CodeSpec {
        &self.spec
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    /// Channel parameters at `snr_db` under the effective distribution.
    pub fn channel(&self, snr_db: f64) -> Result<ChannelParams> {
        ChannelParams::new(&self.constellation, &self.spec.target, snr_db)
    }

    /// Encodes `K - p` data bits with an encoder of list size `list_size`.
    pub fn encode(&self, data: &[u8], list_size: usize) -> Result<Codeword> {
        if data.len() != self.spec.data_len() {
            return invalid(format!("expected {} data bits, got {}", self.spec.data_len(), data.len()));
        }
        if data.iter().any(|&b| b > 1) {
            return invalid("data bits must be 0 or 1");
        }
        let mut word = data.to_vec();
        word.extend(crc_compute(data, &self.spec.crc));
        let mut info_bits = word.into_iter();
        let policy: Vec<BitPolicy> = self
            .roles
            .iter()
            .map(|role| match role {
                Role::Frozen => BitPolicy::Forced(0),
                Role::Info => BitPolicy::Forced(info_bits.next().expect("one bit per info index")),
                Role::Shaping if list_size == 1 => BitPolicy::ArgmaxRule,
                Role::Shaping => BitPolicy::Branch,
            })
            .collect();
        let rule: Option<&dyn LevelSource> = (list_size == 1).then_some(&self.prior as &dyn LevelSource);
        let best = scl_run(&self.prior, rule, &policy, list_size)?
            .into_iter()
            .next()
            .expect("list is never empty");
        let levels: Vec<&[u8]> = best.codeword.chunks(self.spec.n).collect();
        let symbols = map_symbols(&self.constellation, &levels)?;
        Ok(Codeword {
            u: best.u,
            level_bits: best.codeword,
            symbols,
        })
    }

    /// Encodes with the transmitter's list size from the spec.
    pub fn encode_default(&self, data: &[u8]) -> Result<Codeword> {
        self.encode(data, self.spec.encoder_list)
    }

    /// Data and checksum, in order, from the info positions of `u`.
    fn info_word(&self, u: &[u8]) -> Vec<u8> {
        self.spec.info.iter().map(|&j| u[j]).collect()
    }

    fn result_from(&self, cand: &ListCandidate, valid: bool, lambda: Option<usize>) -> DecodeResult {
        let mut data = self.info_word(&cand.u);
        data.truncate(self.spec.data_len());
        DecodeResult {
            data,
            u_hat: cand.u.clone(),
            metric: cand.metric,
            valid,
            lambda,
        }
    }

    fn crc_ok(&self, u: &[u8]) -> bool {
        crc_check(&self.info_word(u), &self.spec.crc)
    }

    /// True iff `u_hat` passes the CRC and re-encodes to itself with the
    /// transmitter's encoder.
    pub fn is_valid_codeword(&self, u_hat: &[u8]) -> bool {
        if u_hat.len() != self.spec.combined_len() || !self.crc_ok(u_hat) {
            return false;
        }
        let data = &self.info_word(u_hat)[..self.spec.data_len()];
        self.encode_default(data).map(|cw| cw.u == u_hat).unwrap_or(false)
    }

    fn posterior(&self, y: &[f64], channel: &ChannelParams) -> Result<PosteriorSource> {
        if y.len() != self.spec.n {
            return invalid(format!("received {} symbols, expected {}", y.len(), self.spec.n));
        }
        PosteriorSource::new(&self.constellation, &self.spec.target, channel.noise_var, y)
    }

    fn check_list(list_size: usize) -> Result<()> {
        if list_size == 0 {
            return invalid("decoder list size must be at least 1");
        }
        Ok(())
    }

    /// Candidate list of the standard decoder, ascending metric.
    pub fn list_decode(&self, y: &[f64], list_size: usize, channel: &ChannelParams) -> Result<Vec<ListCandidate>> {
        self.list_decode_with(y, list_size, channel, ShapingDecisions::Branch)
    }

    fn list_decode_with(
        &self,
        y: &[f64],
        list_size: usize,
        channel: &ChannelParams,
        shaping: ShapingDecisions,
    ) -> Result<Vec<ListCandidate>> {
        Self::check_list(list_size)?;
        let post = self.posterior(y, channel)?;
        let policy: Vec<BitPolicy> = self
            .roles
            .iter()
            .map(|role| match (role, shaping) {
                (Role::Frozen, _) => BitPolicy::Forced(0),
                (Role::Shaping, ShapingDecisions::PosteriorArgmax) => BitPolicy::ArgmaxRule,
                _ => BitPolicy::Branch,
            })
            .collect();
        let rule: Option<&dyn LevelSource> =
            (shaping == ShapingDecisions::PosteriorArgmax).then_some(&post as &dyn LevelSource);
        scl_run(&post, rule, &policy, list_size)
    }

    /// Most likely CRC-passing candidate, else the most likely one flagged invalid.
    pub fn select_crc(&self, candidates: &[ListCandidate]) -> DecodeResult {
        match candidates.iter().find(|c| self.crc_ok(&c.u)) {
            Some(c) => self.result_from(c, true, None),
            None => self.result_from(&candidates[0], false, None),
        }
    }

    /// Standard CRC-aided SCL decoding with `R = I ∪ D`.
    pub fn decode_standard(&self, y: &[f64], list_size: usize, channel: &ChannelParams) -> Result<DecodeResult> {
        self.decode_standard_with(y, list_size, channel, ShapingDecisions::Branch)
    }

    pub fn decode_standard_with(
        &self,
        y: &[f64],
        list_size: usize,
        channel: &ChannelParams,
        shaping: ShapingDecisions,
    ) -> Result<DecodeResult> {
        let list = self.list_decode_with(y, list_size, channel, shaping)?;
        Ok(self.select_crc(&list))
    }

    /// Shaping bits as dynamic frozen bits: each path sets them by the prior
    /// argmax, the path metric follows the posterior. Meant for codes encoded
    /// with list size 1; every candidate is then a valid codeword.
    pub fn decode_dynfrozen(&self, y: &[f64], list_size: usize, channel: &ChannelParams) -> Result<DecodeResult> {
        Self::check_list(list_size)?;
        let post = self.posterior(y, channel)?;
        let policy: Vec<BitPolicy> = self
            .roles
            .iter()
            .map(|role| match role {
                Role::Frozen => BitPolicy::Forced(0),
                Role::Info => BitPolicy::Branch,
                Role::Shaping => BitPolicy::ArgmaxRule,
            })
            .collect();
        let list = scl_run(&post, Some(&self.prior), &policy, list_size)?;
        Ok(self.select_crc(&list))
    }

    /// Standard list decoding followed by sequential re-encoding validation.
    pub fn decode_reencode(&self, y: &[f64], list_size: usize, channel: &ChannelParams) -> Result<DecodeResult> {
        let list = self.list_decode(y, list_size, channel)?;
        Ok(self.reencode_select(&list)?.result)
    }

    /// Walks `candidates` in ascending metric order: skip CRC failures,
    /// re-encode the data of the rest, accept the first that reproduces
    /// itself. Without a valid candidate the best one is returned flagged
    /// invalid.
    pub fn reencode_select(&self, candidates: &[ListCandidate]) -> Result<ReencodeOutcome> {
        if candidates.is_empty() {
            return invalid("empty candidate list");
        }
        let standard = self.select_crc(candidates);
        let mut lambda = 0;
        for cand in candidates {
            if !self.crc_ok(&cand.u) {
                continue;
            }
            lambda += 1;
            let data = &self.info_word(&cand.u)[..self.spec.data_len()];
            if self.encode_default(data)?.u == cand.u {
                return Ok(ReencodeOutcome {
                    result: self.result_from(cand, true, Some(lambda)),
                    standard,
                });
            }
        }
        Ok(ReencodeOutcome {
            result: self.result_from(&candidates[0], false, Some(lambda)),
            standard,
        })
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::modulation::{maxwell_boltzmann, ConstellationKind};
    use crate::polar::polar_transform;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Hand-picked partition: the first indices of each level are frozen,
    /// the next ones shape, the rest carry data.
    pub(crate) fn small_spec(kind: ConstellationKind, n: usize, nu: f64, frozen_per_level: usize, shaping_per_level: usize, p: usize, encoder_list: usize) -> CodeSpec {
        let c = Constellation::new(kind);
        let levels = c.bits_per_symbol();
        let (mut frozen, mut info, mut shaping) = (vec![], vec![], vec![]);
        for level in 0..levels {
            for i in 0..n {
                let j = level * n + i;
                // interleave shaping among early indices so D is spread over the tree
                if i < frozen_per_level {
                    frozen.push(j);
                } else if i < frozen_per_level + shaping_per_level {
                    shaping.push(j);
                } else {
                    info.push(j);
                }
            }
        }
        let design = maxwell_boltzmann(&c, nu).unwrap();
        CodeSpec {
            n,
            levels,
            constellation: kind,
            encoder_list,
            metadata: SpecMetadata {
                k: info.len(),
                n_dm: shaping.len(),
                dsnr_db: 10.0,
                kappa_db: 0.0,
                nu,
                entropy_trials: 0,
                distribution_trials: 0,
                seed: 0,
            },
            frozen,
            info,
            shaping,
            crc: CrcConfig::default_for(p).unwrap(),
            target: design.clone(),
            design,
        }
    }

    fn random_data(rng: &mut impl Rng, len: usize) -> Vec<u8> {
        (0..len).map(|_| rng.random_range(0..2)).collect()
    }

    #[test]
    fn uniform_unshaped_is_plain_multilevel_polar() {
        let spec = small_spec(ConstellationKind::Pam4, 16, 0.0, 4, 0, 0, 4);
        let codec = HyCodec::new(spec.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let data = random_data(&mut rng, spec.data_len());
        let cw = codec.encode_default(&data).unwrap();
        let mut u = vec![0u8; 32];
        for (&j, &b) in spec.info.iter().zip(&data) {
            u[j] = b;
        }
        assert_eq!(cw.u, u);
        let mut x = polar_transform(&u[..16]).unwrap();
        x.extend(polar_transform(&u[16..]).unwrap());
        assert_eq!(cw.level_bits, x);
        assert_eq!(cw.symbols, map_symbols(codec.constellation(), &[&x[..16], &x[16..]]).unwrap());
    }

    #[test]
    fn encoder_is_deterministic_and_in_subcode() {
        for list in [1, 4] {
            let spec = small_spec(ConstellationKind::Ask8, 16, 0.06, 4, 5, 3, list);
            let codec = HyCodec::new(spec.clone()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(2);
            for _ in 0..50 {
                let data = random_data(&mut rng, spec.data_len());
                let a = codec.encode_default(&data).unwrap();
                assert_eq!(a, codec.encode_default(&data).unwrap());
                assert!(spec.frozen.iter().all(|&j| a.u[j] == 0));
                assert!(codec.is_valid_codeword(&a.u));
                assert_eq!(codec.info_word(&a.u)[..spec.data_len()], data[..]);
            }
        }
    }

    #[test]
    fn encode_rejects_wrong_length() {
        let spec = small_spec(ConstellationKind::Pam4, 8, 0.2, 2, 2, 0, 1);
        let codec = HyCodec::new(spec.clone()).unwrap();
        assert!(codec.encode(&vec![0; spec.data_len() + 1], 1).is_err());
        assert!(codec.encode(&vec![2; spec.data_len()], 1).is_err());
    }

    #[test]
    fn noiseless_decoding_recovers_data() {
        for list in [1, 8] {
            let spec = small_spec(ConstellationKind::Ask8, 16, 0.05, 4, 5, 3, list);
            let codec = HyCodec::new(spec.clone()).unwrap();
            let channel = ChannelParams { snr_db: 120.0, noise_var: 1e-9 };
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for _ in 0..20 {
                let data = random_data(&mut rng, spec.data_len());
                let cw = codec.encode_default(&data).unwrap();
                let std = codec.decode_standard(&cw.symbols, 8, &channel).unwrap();
                assert!(std.valid && std.data == data);
                let re = codec.decode_reencode(&cw.symbols, 8, &channel).unwrap();
                assert!(re.valid && re.data == data);
                assert_eq!(re.lambda, Some(1));
                if list == 1 {
                    let dy = codec.decode_dynfrozen(&cw.symbols, 8, &channel).unwrap();
                    assert!(dy.valid && dy.data == data);
                }
            }
        }
    }

    #[test]
    fn all_crc_failures_flag_invalid() {
        let spec = small_spec(ConstellationKind::Pam4, 8, 0.2, 2, 2, 3, 1);
        let codec = HyCodec::new(spec.clone()).unwrap();
        let mut bad = codec.encode_default(&vec![1; spec.data_len()]).unwrap().u;
        bad[spec.info[0]] ^= 1;
        let cands = vec![ListCandidate {
            u: bad.clone(),
            codeword: vec![0; 16],
            metric: 1.0,
        }];
        let r = codec.select_crc(&cands);
        assert!(!r.valid);
        assert_eq!(r.u_hat, bad);
        let out = codec.reencode_select(&cands).unwrap();
        assert!(!out.result.valid);
        assert_eq!(out.result.lambda, Some(0));
    }

    #[test]
    fn single_bit_flips_are_invalid() {
        let spec = small_spec(ConstellationKind::Pam4, 8, 0.25, 2, 3, 3, 1);
        let codec = HyCodec::new(spec.clone()).unwrap();
        for w in 0..1u32 << spec.data_len() {
            let data: Vec<u8> = (0..spec.data_len()).map(|k| ((w >> k) & 1) as u8).collect();
            let u = codec.encode_default(&data).unwrap().u;
            assert!(codec.is_valid_codeword(&u));
            for j in 0..u.len() {
                let mut f = u.clone();
                f[j] ^= 1;
                assert!(!codec.is_valid_codeword(&f), "flip at {j} accepted");
            }
        }
    }

    #[test]
    fn unshaped_decoders_agree() {
        let spec = small_spec(ConstellationKind::Pam4, 16, 0.0, 6, 0, 3, 1);
        let codec = HyCodec::new(spec.clone()).unwrap();
        let channel = codec.channel(9.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let data = random_data(&mut rng, spec.data_len());
            let cw = codec.encode_default(&data).unwrap();
            let y = crate::modulation::awgn(&cw.symbols, channel.noise_var, &mut rng).unwrap();
            let a = codec.decode_standard(&y, 4, &channel).unwrap();
            let b = codec.decode_dynfrozen(&y, 4, &channel).unwrap();
            let mut c = codec.decode_reencode(&y, 4, &channel).unwrap();
            assert_eq!(a, b);
            c.lambda = None;
            assert_eq!(a, c);
        }
    }

    #[test]
    fn dynfrozen_candidates_reencode_and_lambda_bounded() {
        let spec = small_spec(ConstellationKind::Ask8, 16, 0.06, 4, 6, 3, 1);
        let codec = HyCodec::new(spec.clone()).unwrap();
        let channel = codec.channel(8.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let data = random_data(&mut rng, spec.data_len());
            let cw = codec.encode_default(&data).unwrap();
            let y = crate::modulation::awgn(&cw.symbols, channel.noise_var, &mut rng).unwrap();
            let d = codec.decode_dynfrozen(&y, 8, &channel).unwrap();
            if d.valid {
                let data_part = &codec.info_word(&d.u_hat)[..spec.data_len()];
                assert_eq!(codec.encode_default(data_part).unwrap().u, d.u_hat);
            }
            let r = codec.decode_reencode(&y, 1, &channel).unwrap();
            assert!(matches!(r.lambda, Some(0) | Some(1)));
        }
    }

    #[test]
    fn posterior_argmax_variant_runs() {
        let spec = small_spec(ConstellationKind::Pam4, 16, 0.2, 4, 4, 0, 1);
        let codec = HyCodec::new(spec.clone()).unwrap();
        let channel = ChannelParams { snr_db: 120.0, noise_var: 1e-9 };
        let data = vec![1; spec.data_len()];
        let cw = codec.encode_default(&data).unwrap();
        let r = codec
            .decode_standard_with(&cw.symbols, 4, &channel, ShapingDecisions::PosteriorArgmax)
            .unwrap();
        assert_eq!(r.data, data);
    }

    #[test]
    fn spec_validation_and_round_trip() {
        let spec = small_spec(ConstellationKind::Ask8, 8, 0.05, 2, 2, 3, 4);
        let text = spec.to_toml_string().unwrap();
        assert_eq!(CodeSpec::from_toml_str(&text).unwrap(), spec);
        assert_eq!(spec.rate(), (spec.info.len() - 3) as f64 / 8.0);

        let mut broken = spec.clone();
        broken.info.push(broken.frozen[0]);
        broken.info.sort();
        assert!(broken.validate().is_err());
        let mut broken = spec.clone();
        broken.frozen.pop();
        assert!(broken.validate().is_err());
        let mut broken = spec.clone();
        broken.levels = 2;
        assert!(broken.validate().is_err());
        let mut broken = spec;
        broken.metadata.k += 1;
        assert!(broken.validate().is_err());
    }
}
