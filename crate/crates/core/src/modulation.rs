//! Constellations, input distributions, the AWGN channel and level-wise LLRs.
//!
//! Labels follow set partitioning: the label of a point is the natural binary
//! index of the point in ascending order, and level 0 is the least
//! significant label bit (decoded first). Fixing the level-0 bit of an
//! equally spaced alphabet leaves every other point, fixing the next bit
//! every fourth, so the intra-subset distance doubles per level.

use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::polar::{LevelSource, LLR_CLIP};

/// Number of Gauss-Hermite nodes used for information-rate integrals.
pub const GAUSS_HERMITE_NODES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstellationKind {
    #[serde(rename = "4-PAM")]
    Pam4,
    #[serde(rename = "8-ASK")]
    Ask8,
}

impl fmt::Display for ConstellationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstellationKind::Pam4 => "4-PAM",
            ConstellationKind::Ask8 => "8-ASK",
        })
    }
}

impl FromStr for ConstellationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace(['-', '_'], "").as_str() {
            "4PAM" | "PAM4" => Ok(ConstellationKind::Pam4),
            "8ASK" | "ASK8" => Ok(ConstellationKind::Ask8),
            _ => invalid(format!("unknown constellation '{s}' (expected 4-PAM or 8-ASK)")),
        }
    }
}

/// Real constellation with set-partitioning labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<f64>,
    bits: usize,
}

impl Constellation {
    pub fn new(kind: ConstellationKind) -> Self {
        let points = match kind {
            ConstellationKind::Pam4 => vec![0.0, 1.0, 2.0, 3.0],
            ConstellationKind::Ask8 => vec![-7.0, -5.0, -3.0, -1.0, 1.0, 3.0, 5.0, 7.0],
        };
        Self::from_points(points).expect("built-in alphabets are valid")
    }

    /// Builds a constellation from strictly increasing points; the count must
    /// be a power of two, at least 2.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        let m = points.len();
        if m < 2 || !m.is_power_of_two() {
            return invalid(format!("constellation size {m} is not a power of two >= 2"));
        }
        if points.iter().any(|p| !p.is_finite()) || points.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("constellation points must be finite and strictly increasing");
        }
        Ok(Self {
            bits: m.trailing_zeros() as usize,
            points,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    /// Number of label bits `m`.
    pub fn bits_per_symbol(&self) -> usize {
        self.bits
    }

    /// Label bit of point `index` at `level` (level 0 = LSB).
    #[inline]
    pub fn label_bit(&self, index: usize, level: usize) -> u8 {
        ((index >> level) & 1) as u8
    }

    /// Smallest distance between two points whose labels agree on the `level`
    /// least significant bits. Infinite if every such subset is a singleton.
    pub fn subset_min_distance(&self, level: usize) -> f64 {
        let mask = (1usize << level) - 1;
        let mut best = f64::INFINITY;
        for a in 0..self.size() {
            for b in a + 1..self.size() {
                if a & mask == b & mask {
                    best = best.min((self.points[b] - self.points[a]).abs());
                }
            }
        }
        best
    }
}

/// Probability mass function over the points of a constellation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDistribution {
    pub probs: Vec<f64>,
    /// Maxwell-Boltzmann parameter, when the distribution was built from one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
}

impl InputDistribution {
    pub fn uniform(size: usize) -> Self {
        Self {
            probs: vec![1.0 / size as f64; size],
            nu: None,
        }
    }

    /// Validates and renormalizes a probability vector.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return invalid("probabilities must be finite and non-negative");
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return invalid(format!("probabilities sum to {total}, not 1"));
        }
        Ok(Self {
            probs: probs.iter().map(|p| p / total).collect(),
            nu: None,
        })
    }

    /// Empirical distribution of symbol counts.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return invalid("histogram is empty");
        }
        Ok(Self {
            probs: counts.iter().map(|&c| c as f64 / total as f64).collect(),
            nu: None,
        })
    }

    pub fn entropy_bits(&self) -> f64 {
        self.probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.log2())
            .sum()
    }

    /// `E[|X|^2]` over the points of `c`.
    pub fn second_moment(&self, c: &Constellation) -> f64 {
        self.probs.iter().zip(c.points()).map(|(p, x)| p * x * x).sum()
    }

    pub fn total_variation(&self, other: &InputDistribution) -> f64 {
        0.5 * self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }

    pub(crate) fn check_size(&self, c: &Constellation) -> Result<()> {
        if self.probs.len() != c.size() {
            return invalid(format!(
                "distribution has {} entries for a {}-point constellation",
                self.probs.len(),
                c.size()
            ));
        }
        Ok(())
    }

    /// Draws `n` iid point indices.
    pub fn sample_indices<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        let dist = WeightedIndex::new(&self.probs).expect("valid distribution");
        (0..n).map(|_| dist.sample(rng)).collect()
    }
}

/// `P(x) ∝ exp(-nu x^2)`.
pub fn maxwell_boltzmann(c: &Constellation, nu: f64) -> Result<InputDistribution> {
    if !(nu.is_finite() && nu >= 0.0) {
        return invalid(format!("shaping parameter {nu} must be finite and >= 0"));
    }
    let weights: Vec<f64> = c.points().iter().map(|x| (-nu * x * x).exp()).collect();
    let z: f64 = weights.iter().sum();
    Ok(InputDistribution {
        probs: weights.iter().map(|w| w / z).collect(),
        nu: Some(nu),
    })
}

/// SNR and the resulting noise variance, `E[|X|^2] / 10^(snr/10)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub snr_db: f64,
    pub noise_var: f64,
}

impl ChannelParams {
    pub fn new(c: &Constellation, d: &InputDistribution, snr_db: f64) -> Result<Self> {
        d.check_size(c)?;
        let noise_var = noise_variance(d.second_moment(c), snr_db);
        if !(noise_var.is_finite() && noise_var > 0.0) {
            return invalid(format!("SNR {snr_db} dB gives noise variance {noise_var}"));
        }
        Ok(Self { snr_db, noise_var })
    }
}

fn noise_variance(second_moment: f64, snr_db: f64) -> f64 {
    second_moment / 10f64.powf(snr_db / 10.0)
}

/// Physicists' Gauss-Hermite rule: `∫ e^{-t^2} f(t) dt ≈ Σ w_k f(t_k)`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    const PI_M4: f64 = 0.751_125_544_464_942_5;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z: f64 = 0.0;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = PI_M4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / j as f64).sqrt() * p2 - ((j - 1) as f64 / j as f64).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-14 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// `H(X|Y)` in bits for `Y = X + N`, `N ~ N(0, noise_var)`.
pub fn conditional_entropy(c: &Constellation, d: &InputDistribution, noise_var: f64) -> f64 {
    let (t, w) = gauss_hermite(GAUSS_HERMITE_NODES);
    let scale = (2.0 * noise_var).sqrt();
    let norm = std::f64::consts::PI.sqrt();
    let pts = c.points();
    let mut h = 0.0;
    for (i, (&p, &x)) in d.probs.iter().zip(pts).enumerate() {
        if p == 0.0 {
            continue;
        }
        let mut acc = 0.0;
        for (&tk, &wk) in t.iter().zip(&w) {
            let y = x + scale * tk;
            // -ln P(x|y) = ln Σ_x' P(x') e^{-(y-x')^2/2σ²} - ln P(x) + (y-x)^2/2σ²
            let own = -(y - x) * (y - x) / (2.0 * noise_var);
            let lse = log_sum_exp(d.probs.iter().zip(pts).enumerate().map(|(k, (&q, &xk))| {
                if k == i {
                    q.ln() + own
                } else if q > 0.0 {
                    q.ln() - (y - xk) * (y - xk) / (2.0 * noise_var)
                } else {
                    f64::NEG_INFINITY
                }
            }));
            acc += wk * (lse - p.ln() - own);
        }
        h += p * acc / norm;
    }
    (h / std::f64::consts::LN_2).max(0.0)
}

/// `I(X;Y)` in bits by Gauss-Hermite quadrature.
pub fn mutual_information(c: &Constellation, d: &InputDistribution, noise_var: f64) -> f64 {
    (d.entropy_bits() - conditional_entropy(c, d, noise_var)).max(0.0)
}

fn mi_at_pinned_snr(c: &Constellation, nu: f64, snr_db: f64) -> f64 {
    let d = maxwell_boltzmann(c, nu).expect("nu in range");
    let var = noise_variance(d.second_moment(c), snr_db);
    mutual_information(c, &d, var)
}

/// Maxwell-Boltzmann parameter in `[0, 2]` maximizing the mutual information
/// at `snr_db`, with the noise variance pinned to each candidate's second
/// moment. Golden-section search, tolerance `1e-4`.
pub fn optimize_nu(c: &Constellation, snr_db: f64) -> f64 {
    const TOL: f64 = 1e-4;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let f = |nu: f64| mi_at_pinned_snr(c, nu, snr_db);
    let (mut a, mut b) = (0.0f64, 2.0f64);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > TOL {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// Maps per-level bit words (level 0 = LSB) to constellation points.
pub fn map_symbols<B: AsRef<[u8]>>(c: &Constellation, level_bits: &[B]) -> Result<Vec<f64>> {
    if level_bits.len() != c.bits_per_symbol() {
        return invalid(format!(
            "{} bit levels given for a {}-level constellation",
            level_bits.len(),
            c.bits_per_symbol()
        ));
    }
    let n = level_bits[0].as_ref().len();
    if level_bits.iter().any(|l| l.as_ref().len() != n) {
        return invalid("bit levels differ in length");
    }
    Ok((0..n)
        .map(|t| {
            let label = level_bits
                .iter()
                .enumerate()
                .fold(0usize, |acc, (l, bits)| acc | (usize::from(bits.as_ref()[t] & 1) << l));
            c.points()[label]
        })
        .collect())
}

/// Splits point indices into level-major label bits.
pub fn indices_to_level_bits(indices: &[usize], levels: usize) -> Vec<u8> {
    let n = indices.len();
    let mut out = vec![0u8; levels * n];
    for (t, &k) in indices.iter().enumerate() {
        for l in 0..levels {
            out[l * n + t] = ((k >> l) & 1) as u8;
        }
    }
    out
}

/// `y = x + n` with iid zero-mean Gaussian noise of variance `noise_var`.
pub fn awgn<R: Rng + ?Sized>(x: &[f64], noise_var: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(noise_var.is_finite() && noise_var > 0.0) {
        return invalid(format!("noise variance {noise_var} must be positive"));
    }
    let normal = Normal::new(0.0, noise_var.sqrt()).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(x.iter().map(|&xi| xi + normal.sample(rng)).collect())
}

pub(crate) fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// LLR from the log-masses of the bit-0 and bit-1 subsets.
fn subset_llr(zero: f64, one: f64) -> Option<f64> {
    match (zero == f64::NEG_INFINITY, one == f64::NEG_INFINITY) {
        (true, true) => None,
        (false, true) => Some(LLR_CLIP),
        (true, false) => Some(-LLR_CLIP),
        (false, false) => Some((zero - one).clamp(-LLR_CLIP, LLR_CLIP)),
    }
}

/// Point indices consistent with `prefix` on the lower `level` bits, split by
/// the bit at `level`.
fn level_subsets(size: usize, level: usize, prefix: usize) -> [Vec<usize>; 2] {
    let mask = (1usize << level) - 1;
    let mut out = [Vec::new(), Vec::new()];
    for k in (0..size).filter(|k| k & mask == prefix) {
        out[(k >> level) & 1].push(k);
    }
    out
}

fn check_level(c: &Constellation, level: usize, lower_bits: &[u8]) -> Result<usize> {
    if level >= c.bits_per_symbol() {
        return invalid(format!("level {level} out of range for {} levels", c.bits_per_symbol()));
    }
    if lower_bits.len() != level {
        return invalid(format!("level {level} needs {level} lower bits, got {}", lower_bits.len()));
    }
    Ok(lower_bits
        .iter()
        .enumerate()
        .fold(0usize, |acc, (l, &b)| acc | (usize::from(b & 1) << l)))
}

/// Posterior LLR of label bit `level` of the symbol observed as `y`, given
/// the decided lower label bits.
pub fn posterior_level_llr(
    c: &Constellation,
    d: &InputDistribution,
    noise_var: f64,
    y: f64,
    level: usize,
    lower_bits: &[u8],
) -> Result<f64> {
    d.check_size(c)?;
    let prefix = check_level(c, level, lower_bits)?;
    let mass = |set: &[usize]| {
        log_sum_exp(set.iter().map(|&k| {
            let x = c.points()[k];
            d.probs[k].ln() - (y - x) * (y - x) / (2.0 * noise_var)
        }))
    };
    let [zeros, ones] = level_subsets(c.size(), level, prefix);
    subset_llr(mass(&zeros), mass(&ones))
        .ok_or_else(|| Error::DegenerateInput(format!("no prior mass below level {level}")))
}

/// Prior LLR `ln P(B_l = 0 | b_<l) - ln P(B_l = 1 | b_<l)`.
pub fn prior_level_llr(c: &Constellation, d: &InputDistribution, level: usize, lower_bits: &[u8]) -> Result<f64> {
    d.check_size(c)?;
    let prefix = check_level(c, level, lower_bits)?;
    let mass = |set: &[usize]| log_sum_exp(set.iter().map(|&k| d.probs[k].ln()));
    let [zeros, ones] = level_subsets(c.size(), level, prefix);
    subset_llr(mass(&zeros), mass(&ones))
        .ok_or_else(|| Error::DegenerateInput(format!("no prior mass below level {level}")))
}

fn prefix_of(lower: &[u8], n: usize, level: usize, t: usize) -> usize {
    (0..level).fold(0usize, |acc, l| acc | (usize::from(lower[l * n + t]) << l))
}

/// Prior soft source `P_X^N` for the SC encoder and the shaping rule.
#[derive(Debug, Clone)]
pub struct PriorSource {
    n: usize,
    /// `table[level][prefix]`, zero where no mass is left below `level`.
    table: Vec<Vec<f64>>,
}

impl PriorSource {
    pub fn new(c: &Constellation, d: &InputDistribution, n: usize) -> Result<Self> {
        d.check_size(c)?;
        let m = c.bits_per_symbol();
        let table = (0..m)
            .map(|level| {
                (0..1usize << level)
                    .map(|prefix| {
                        let lower: Vec<u8> = (0..level).map(|l| ((prefix >> l) & 1) as u8).collect();
                        prior_level_llr(c, d, level, &lower).unwrap_or(0.0)
                    })
                    .collect()
            })
            .collect();
        Ok(Self { n, table })
    }
}

impl LevelSource for PriorSource {
    fn levels(&self) -> usize {
        self.table.len()
    }

    fn segment_len(&self) -> usize {
        self.n
    }

    fn level_llrs(&self, level: usize, lower: &[u8], out: &mut [f64]) {
        let row = &self.table[level];
        for (t, o) in out.iter_mut().enumerate() {
            *o = row[prefix_of(lower, self.n, level, t)];
        }
    }
}

/// Posterior soft source `P_{X|Y}^N(·|y)` for one received word.
#[derive(Debug, Clone)]
pub struct PosteriorSource {
    n: usize,
    levels: usize,
    size: usize,
    /// `ln P(x_k) - (y_t - x_k)^2 / 2σ²`, row per symbol.
    log_weights: Vec<f64>,
    /// Flattened `[level][prefix]` bit-0/bit-1 subsets.
    subsets: Vec<[Vec<usize>; 2]>,
}

impl PosteriorSource {
    pub fn new(c: &Constellation, d: &InputDistribution, noise_var: f64, y: &[f64]) -> Result<Self> {
        d.check_size(c)?;
        let n = y.len();
        if n < 2 || !n.is_power_of_two() {
            return invalid(format!("received length {n} is not a power of two >= 2"));
        }
        if !(noise_var.is_finite() && noise_var > 0.0) {
            return invalid(format!("noise variance {noise_var} must be positive"));
        }
        let size = c.size();
        let mut log_weights = Vec::with_capacity(n * size);
        for &yt in y {
            for (&p, &x) in d.probs.iter().zip(c.points()) {
                log_weights.push(p.ln() - (yt - x) * (yt - x) / (2.0 * noise_var));
            }
        }
        let levels = c.bits_per_symbol();
        let subsets = (0..levels)
            .flat_map(|level| (0..1usize << level).map(move |prefix| level_subsets(size, level, prefix)))
            .collect();
        Ok(Self {
            n,
            levels,
            size,
            log_weights,
            subsets,
        })
    }
}

impl LevelSource for PosteriorSource {
    fn levels(&self) -> usize {
        self.levels
    }

    fn segment_len(&self) -> usize {
        self.n
    }

    fn level_llrs(&self, level: usize, lower: &[u8], out: &mut [f64]) {
        let base = (1usize << level) - 1;
        for (t, o) in out.iter_mut().enumerate() {
            let row = &self.log_weights[t * self.size..(t + 1) * self.size];
            let [zeros, ones] = &self.subsets[base + prefix_of(lower, self.n, level, t)];
            let zero = log_sum_exp(zeros.iter().map(|&k| row[k]));
            let one = log_sum_exp(ones.iter().map(|&k| row[k]));
            *o = subset_llr(zero, one).unwrap_or(0.0);
        }
    }
}
