//! Successive-cancellation list engine.
//!
//! One engine serves as SC/SCL encoder and as every decoder variant. Each
//! combined index carries a [`BitPolicy`]; soft information comes from a
//! mandatory metric source and an optional rule source. Levels are decoded
//! in order with one joint list; at every level start each path re-derives
//! its layer-0 LLRs from the codeword bits it decided on the lower levels.
//!
//! Per path and per source the soft state uses the compact `2n` layout:
//! depth `d` of the recursion lives at `[n >> d, 2n >> d)`, so depth 0 holds
//! the (bit-reversed) layer-0 LLRs and slot 1 the decision LLR. Partial sums
//! of finished left subtrees use the same layout.

use super::kernel::{checknode, clip_llr, metric_update, varnode};
use super::transform::bit_reversal_table;
use crate::error::{invalid, Result};

/// Decision rule for one combined index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitPolicy {
    /// Every path takes this bit.
    Forced(u8),
    /// Every path is extended with both values, then the list is pruned.
    Branch,
    /// Each path takes the argmax of the rule-source conditional; ties go to 0.
    ArgmaxRule,
}

/// Supplies layer-0 LLRs for each level segment.
pub trait LevelSource {
    fn levels(&self) -> usize;

    /// Polar segment length `n` (a power of two, at least 2).
    fn segment_len(&self) -> usize;

    /// Writes the LLRs of the codeword bits of `level` (channel order) into
    /// `out`, given the codeword bits of all lower levels, level-major.
    fn level_llrs(&self, level: usize, lower_codewords: &[u8], out: &mut [f64]);
}

/// A surviving path.
#[derive(Debug, Clone, PartialEq)]
pub struct ListCandidate {
    /// Decided `u`, level-major.
    pub u: Vec<u8>,
    /// `polar_transform` of each level segment of `u`, level-major.
    pub codeword: Vec<u8>,
    /// Accumulated `-ln P` of the decisions under the metric source.
    pub metric: f64,
}

struct Geometry {
    n: usize,
    stages: usize,
    levels: usize,
    bitrev: Vec<usize>,
}

impl Geometry {
    fn new(levels: usize, n: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return invalid(format!("segment length {n} is not a power of two >= 2"));
        }
        if levels == 0 {
            return invalid("a source must have at least one level");
        }
        Ok(Self {
            n,
            stages: n.trailing_zeros() as usize,
            levels,
            bitrev: bit_reversal_table(n),
        })
    }

    fn load(&self, llr: &mut [f64], channel_order: &[f64]) {
        for (k, &r) in self.bitrev.iter().enumerate() {
            llr[self.n + k] = clip_llr(channel_order[r]);
        }
    }

    /// Decision LLR of leaf `i`, updating the depths below the last common
    /// ancestor with leaf `i - 1`.
    fn leaf_llr(&self, llr: &mut [f64], sums: &[u8], i: usize) -> f64 {
        let n = self.n;
        let mut depth = 0;
        if i > 0 {
            let d = self.stages - 1 - i.trailing_zeros() as usize;
            let size = n >> d;
            let half = size / 2;
            for k in 0..half {
                llr[half + k] = varnode(llr[size + k], llr[size + half + k], sums[half + k]);
            }
            depth = d + 1;
        }
        for d in depth..self.stages {
            let size = n >> d;
            let half = size / 2;
            for k in 0..half {
                llr[half + k] = checknode(llr[size + k], llr[size + half + k]);
            }
        }
        llr[1]
    }

    /// Records decision `bit` at leaf `i`. Returns true when the segment is
    /// complete; `scratch[..n]` then holds `u F^{⊗n}` of the segment.
    fn commit(&self, sums: &mut [u8], i: usize, bit: u8, scratch: &mut [u8]) -> bool {
        scratch[0] = bit;
        let mut len = 1;
        let mut depth = self.stages;
        let mut idx = i;
        while depth > 0 && idx & 1 == 1 {
            scratch.copy_within(0..len, len);
            for k in 0..len {
                scratch[k] ^= sums[len + k];
            }
            len *= 2;
            depth -= 1;
            idx >>= 1;
        }
        if depth > 0 {
            sums[len..2 * len].copy_from_slice(&scratch[..len]);
            false
        } else {
            true
        }
    }

    fn emit_codeword(&self, scratch: &[u8], out: &mut [u8]) {
        for (x, &r) in out.iter_mut().zip(&self.bitrev) {
            *x = scratch[r];
        }
    }
}

#[derive(Clone)]
struct Path {
    metric: f64,
    u: Vec<u8>,
    codeword: Vec<u8>,
    sums: Vec<u8>,
    metric_llr: Vec<f64>,
    rule_llr: Vec<f64>,
}

impl Path {
    fn new(geom: &Geometry, with_rule: bool) -> Self {
        let nb = geom.levels * geom.n;
        Self {
            metric: 0.0,
            u: vec![0; nb],
            codeword: vec![0; nb],
            sums: vec![0; 2 * geom.n],
            metric_llr: vec![0.0; 2 * geom.n],
            rule_llr: if with_rule { vec![0.0; 2 * geom.n] } else { Vec::new() },
        }
    }

    fn copy_from(&mut self, other: &Path) {
        self.metric = other.metric;
        self.u.copy_from_slice(&other.u);
        self.codeword.copy_from_slice(&other.codeword);
        self.sums.copy_from_slice(&other.sums);
        self.metric_llr.copy_from_slice(&other.metric_llr);
        self.rule_llr.copy_from_slice(&other.rule_llr);
    }
}

/// Runs the list engine over all `levels * n` combined indices.
///
/// Returns the surviving paths sorted by ascending metric. Pruning keeps the
/// `list_size` lowest metrics; ties are broken by candidate creation order
/// (parent list position, then the parent's hard decision before its
/// complement, bit 0 on a zero LLR), so the output is a deterministic
/// function of the inputs and `list_size = 1` reproduces plain SC exactly.
pub fn scl_run(
    metric_source: &dyn LevelSource,
    rule_source: Option<&dyn LevelSource>,
    policy: &[BitPolicy],
    list_size: usize,
) -> Result<Vec<ListCandidate>> {
    if list_size == 0 {
        return invalid("list size must be at least 1");
    }
    let geom = Geometry::new(metric_source.levels(), metric_source.segment_len())?;
    let (n, levels) = (geom.n, geom.levels);
    if policy.len() != levels * n {
        return invalid(format!(
            "policy covers {} indices, expected {}",
            policy.len(),
            levels * n
        ));
    }
    if let Some(rule) = rule_source {
        if rule.levels() != levels || rule.segment_len() != n {
            return invalid("rule source geometry differs from metric source");
        }
    } else if policy.contains(&BitPolicy::ArgmaxRule) {
        return invalid("ArgmaxRule policy requires a rule source");
    }
    if let Some(BitPolicy::Forced(b)) = policy.iter().find(|p| matches!(p, BitPolicy::Forced(b) if *b > 1)) {
        return invalid(format!("forced bit {b} is not binary"));
    }

    let with_rule = rule_source.is_some();
    let mut paths = vec![Path::new(&geom, with_rule)];
    let mut spare: Vec<Path> = Vec::new();
    let mut layer0 = vec![0.0; n];
    let mut scratch = vec![0u8; n];
    let mut leaf = Vec::with_capacity(list_size);
    let mut rule_leaf = Vec::with_capacity(list_size);
    let mut ranked: Vec<(f64, usize)> = Vec::with_capacity(2 * list_size);

    for level in 0..levels {
        for p in paths.iter_mut() {
            let lower = &p.codeword[..level * n];
            metric_source.level_llrs(level, lower, &mut layer0);
            geom.load(&mut p.metric_llr, &layer0);
            if let Some(rule) = rule_source {
                rule.level_llrs(level, lower, &mut layer0);
                geom.load(&mut p.rule_llr, &layer0);
            }
        }

        for i in 0..n {
            let j = level * n + i;
            leaf.clear();
            rule_leaf.clear();
            for p in paths.iter_mut() {
                leaf.push(geom.leaf_llr(&mut p.metric_llr, &p.sums, i));
                if with_rule {
                    rule_leaf.push(geom.leaf_llr(&mut p.rule_llr, &p.sums, i));
                }
            }

            match policy[j] {
                BitPolicy::Forced(bit) => {
                    for (p, &l) in paths.iter_mut().zip(&leaf) {
                        p.metric = metric_update(p.metric, l, bit);
                        p.u[j] = bit;
                    }
                }
                BitPolicy::ArgmaxRule => {
                    for ((p, &l), &r) in paths.iter_mut().zip(&leaf).zip(&rule_leaf) {
                        let bit = u8::from(r < 0.0);
                        p.metric = metric_update(p.metric, l, bit);
                        p.u[j] = bit;
                    }
                }
                BitPolicy::Branch => {
                    ranked.clear();
                    for (idx, (p, &l)) in paths.iter().zip(&leaf).enumerate() {
                        // The hard decision is created first so that rounding
                        // ties between siblings resolve like plain SC.
                        let hard = u8::from(l < 0.0);
                        ranked.push((metric_update(p.metric, l, hard), 2 * idx + usize::from(hard)));
                        ranked.push((metric_update(p.metric, l, 1 - hard), 2 * idx + usize::from(1 - hard)));
                    }
                    ranked.sort_by(|a, b| {
                        a.0.total_cmp(&b.0)
                            .then_with(|| creation_order(a.1, &leaf).cmp(&creation_order(b.1, &leaf)))
                    });
                    ranked.truncate(list_size);
                    paths = prune(paths, &ranked, j, &mut spare, &geom, with_rule);
                }
            }

            for p in paths.iter_mut() {
                let bit = p.u[j];
                if geom.commit(&mut p.sums, i, bit, &mut scratch) {
                    geom.emit_codeword(&scratch, &mut p.codeword[level * n..(level + 1) * n]);
                }
            }
        }
    }

    let mut out: Vec<ListCandidate> = paths
        .into_iter()
        .map(|p| ListCandidate {
            u: p.u,
            codeword: p.codeword,
            metric: p.metric,
        })
        .collect();
    out.sort_by(|a, b| a.metric.total_cmp(&b.metric));
    Ok(out)
}

/// Creation rank of child `2 * parent + bit`: parents in list order, the
/// hard decision of the parent's LLR before its complement.
fn creation_order(child: usize, leaf: &[f64]) -> usize {
    let parent = child / 2;
    let hard = usize::from(leaf[parent] < 0.0);
    2 * parent + usize::from(child & 1 != hard)
}

/// Rebuilds the list from ranked `(metric, 2 * parent + bit)` children.
fn prune(
    parents: Vec<Path>,
    ranked: &[(f64, usize)],
    j: usize,
    spare: &mut Vec<Path>,
    geom: &Geometry,
    with_rule: bool,
) -> Vec<Path> {
    let mut children = vec![0usize; parents.len()];
    for &(_, c) in ranked {
        children[c / 2] += 1;
    }
    let mut parents: Vec<Option<Path>> = parents.into_iter().map(Some).collect();

    // Children that need a copy of their parent are served first, while every
    // parent is still in place.
    let mut next: Vec<Option<Path>> = (0..ranked.len()).map(|_| None).collect();
    let mut first_seen = vec![false; parents.len()];
    for (slot, &(metric, c)) in ranked.iter().enumerate() {
        let parent = c / 2;
        if first_seen[parent] {
            let src = parents[parent].as_ref().expect("parent still present");
            let mut copy = spare.pop().unwrap_or_else(|| Path::new(geom, with_rule));
            copy.copy_from(src);
            copy.metric = metric;
            copy.u[j] = (c & 1) as u8;
            next[slot] = Some(copy);
        } else {
            first_seen[parent] = true;
        }
    }
    for (slot, &(metric, c)) in ranked.iter().enumerate() {
        if next[slot].is_none() {
            let mut p = parents[c / 2].take().expect("first child moves its parent");
            p.metric = metric;
            p.u[j] = (c & 1) as u8;
            next[slot] = Some(p);
        }
    }
    for (p, count) in parents.into_iter().zip(children) {
        if let Some(p) = p {
            debug_assert_eq!(count, 0);
            spare.push(p);
        }
    }
    next.into_iter().map(|p| p.expect("every slot filled")).collect()
}

/// Genie-aided SC pass: decisions are forced to `u` and the decision LLR of
/// every combined index is returned.
pub fn genie_leaf_llrs(source: &dyn LevelSource, u: &[u8]) -> Result<Vec<f64>> {
    let geom = Geometry::new(source.levels(), source.segment_len())?;
    let (n, levels) = (geom.n, geom.levels);
    if u.len() != levels * n {
        return invalid(format!("u has length {}, expected {}", u.len(), levels * n));
    }
    let mut llr = vec![0.0; 2 * n];
    let mut sums = vec![0u8; 2 * n];
    let mut codeword = vec![0u8; levels * n];
    let mut layer0 = vec![0.0; n];
    let mut scratch = vec![0u8; n];
    let mut out = Vec::with_capacity(levels * n);
    for level in 0..levels {
        source.level_llrs(level, &codeword[..level * n], &mut layer0);
        geom.load(&mut llr, &layer0);
        for i in 0..n {
            out.push(geom.leaf_llr(&mut llr, &sums, i));
            if geom.commit(&mut sums, i, u[level * n + i], &mut scratch) {
                geom.emit_codeword(&scratch, &mut codeword[level * n..(level + 1) * n]);
            }
        }
    }
    Ok(out)
}
