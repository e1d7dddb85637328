/// Magnitude at which every LLR is saturated.
pub const LLR_CLIP: f64 = 40.0;

#[inline]
pub fn clip_llr(llr: f64) -> f64 {
    llr.clamp(-LLR_CLIP, LLR_CLIP)
}

/// `ln(1 + e^{-x})` for any finite `x`.
#[inline]
pub(crate) fn softplus_neg(x: f64) -> f64 {
    if x >= 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

/// Exact box-plus of two LLRs (upper branch of the SC recursion).
#[inline]
pub fn checknode(a: f64, b: f64) -> f64 {
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    let core = sign * a.abs().min(b.abs());
    clip_llr(core + softplus_neg((a + b).abs()) - softplus_neg((a - b).abs()))
}

/// Lower branch of the SC recursion: `b + (1 - 2u) a`.
#[inline]
pub fn varnode(a: f64, b: f64, u: u8) -> f64 {
    if u == 0 {
        clip_llr(b + a)
    } else {
        clip_llr(b - a)
    }
}

/// Path-metric increment `ln(1 + exp(-(1 - 2u) llr))` added to `pm`.
#[inline]
pub fn metric_update(pm: f64, llr: f64, u: u8) -> f64 {
    let signed = if u == 0 { llr } else { -llr };
    pm + softplus_neg(signed)
}

/// Binary entropy in bits of the bit distribution described by `llr`.
pub fn binary_entropy_of_llr(llr: f64) -> f64 {
    let a = llr.abs();
    let e = (-a).exp();
    let nats = e.ln_1p() + a * e / (1.0 + e);
    nats / std::f64::consts::LN_2
}
