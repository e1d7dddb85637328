//! Browser bindings for `mlhy`.
//!
//! Three interactive operations, each returning a JSON string:
//!
//! * [`shaping_curve`]: Maxwell-Boltzmann distribution and `I(X;Y)` against ν,
//! * [`entropy_profile`]: prior and posterior bit-channel entropies,
//! * [`FrameDemo`]: build a small shaped code, then push single frames
//!   through the channel and all three decoders.
//!
//! The plain Rust functions behind the exports are public so they run in
//! native tests.

use rand::Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use mlhy::codec::{CodeSpec, HyCodec};
use mlhy::construction::{build_code_spec, ConstructionParams, EntropyEstimator};
use mlhy::crc::CrcConfig;
use mlhy::modulation::{
    awgn, maxwell_boltzmann, mutual_information, optimize_nu, ChannelParams, Constellation, ConstellationKind,
};
use mlhy::seed::seed_stream;

const NU_STEPS: usize = 60;

fn kind(name: &str) -> Result<ConstellationKind, String> {
    name.parse().map_err(|e: mlhy::Error| e.to_string())
}

fn json(v: &impl Serialize) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct ShapingCurve {
    points: Vec<f64>,
    nu: Vec<f64>,
    mi: Vec<f64>,
    best_nu: f64,
    best_mi: f64,
    best_probs: Vec<f64>,
    uniform_mi: f64,
}

/// `I(X;Y)` over a ν grid on `[0, nu_max]` at `snr_db`, plus the optimum.
pub fn shaping_curve_json(constellation: &str, snr_db: f64, nu_max: f64) -> Result<String, String> {
    let c = Constellation::new(kind(constellation)?);
    let mi_at = |nu: f64| -> Result<f64, String> {
        let d = maxwell_boltzmann(&c, nu).map_err(|e| e.to_string())?;
        let ch = ChannelParams::new(&c, &d, snr_db).map_err(|e| e.to_string())?;
        Ok(mutual_information(&c, &d, ch.noise_var))
    };
    let nu: Vec<f64> = (0..=NU_STEPS).map(|i| nu_max * i as f64 / NU_STEPS as f64).collect();
    let mi = nu.iter().map(|&v| mi_at(v)).collect::<Result<Vec<_>, _>>()?;
    let best_nu = optimize_nu(&c, snr_db);
    json(&ShapingCurve {
        points: c.points().to_vec(),
        best_mi: mi_at(best_nu)?,
        best_probs: maxwell_boltzmann(&c, best_nu).map_err(|e| e.to_string())?.probs,
        uniform_mi: mi_at(0.0)?,
        nu,
        mi,
        best_nu,
    })
}

#[derive(Serialize)]
struct Profile {
    nu: f64,
    prior: Vec<f64>,
    posterior: Vec<f64>,
    prior_total: f64,
    posterior_total: f64,
}

/// Bit-channel entropies of `n`-symbol words under the rate-optimal
/// distribution at `dsnr_db + kappa_db`.
pub fn entropy_profile_json(
    constellation: &str,
    n: usize,
    dsnr_db: f64,
    kappa_db: f64,
    trials: usize,
    seed: u64,
) -> Result<String, String> {
    let k = kind(constellation)?;
    let c = Constellation::new(k);
    let nu = optimize_nu(&c, dsnr_db + kappa_db);
    let d = maxwell_boltzmann(&c, nu).map_err(|e| e.to_string())?;
    let est = EntropyEstimator::new(k, n, trials, seed);
    let prior = est.prior(&d).map_err(|e| e.to_string())?;
    let post = est.posterior(&d, dsnr_db).map_err(|e| e.to_string())?;
    json(&Profile {
        nu,
        prior_total: prior.total(),
        posterior_total: post.total(),
        prior: prior.h,
        posterior: post.h,
    })
}

#[wasm_bindgen]
pub fn shaping_curve(constellation: &str, snr_db: f64, nu_max: f64) -> Result<String, JsError> {
    shaping_curve_json(constellation, snr_db, nu_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn entropy_profile(
    constellation: &str,
    n: usize,
    dsnr_db: f64,
    kappa_db: f64,
    trials: usize,
    seed: u32,
) -> Result<String, JsError> {
    entropy_profile_json(constellation, n, dsnr_db, kappa_db, trials, seed.into()).map_err(|e| JsError::new(&e))
}

#[derive(Serialize)]
struct DecoderView {
    name: &'static str,
    correct: bool,
    valid: bool,
    metric: f64,
    lambda: Option<usize>,
}

#[derive(Serialize)]
struct FrameView {
    data: Vec<u8>,
    symbols: Vec<f64>,
    received: Vec<f64>,
    decoders: Vec<DecoderView>,
}

/// A small shaped code kept alive between frames.
#[wasm_bindgen]
pub struct FrameDemo {
    codec: HyCodec,
}

impl FrameDemo {
    pub fn build(constellation: &str, n: usize, k: usize, n_dm: usize, dsnr_db: f64, trials: usize) -> Result<Self, String> {
        let params = ConstructionParams {
            constellation: kind(constellation)?,
            n,
            k,
            crc: CrcConfig::default_for(3).map_err(|e| e.to_string())?,
            n_dm,
            dsnr_db,
            kappa_db: -1.0,
            encoder_list: 1,
            nu: None,
            entropy_trials: trials,
            distribution_trials: trials,
            seed: 1,
        };
        let spec = build_code_spec(&params, 1).map_err(|e| e.to_string())?;
        Ok(Self {
            codec: HyCodec::new(spec).map_err(|e| e.to_string())?,
        })
    }

    pub fn spec(&self) -> &CodeSpec {
        self.codec.spec()
    }

    /// One frame at `snr_db` through every decoder with list size `list`.
    pub fn frame_json(&self, snr_db: f64, list: usize, seed: u64) -> Result<String, String> {
        let err = |e: mlhy::Error| e.to_string();
        let mut rng = seed_stream(seed, &[]);
        let data: Vec<u8> = (0..self.codec.spec().data_len()).map(|_| rng.random_range(0..2u8)).collect();
        let cw = self.codec.encode_default(&data).map_err(err)?;
        let channel = self.codec.channel(snr_db).map_err(err)?;
        let y = awgn(&cw.symbols, channel.noise_var, &mut rng).map_err(err)?;
        let view = |name, r: mlhy::codec::DecodeResult| DecoderView {
            name,
            correct: r.valid && r.data == data,
            valid: r.valid,
            metric: r.metric,
            lambda: r.lambda,
        };
        let decoders = vec![
            view("standard", self.codec.decode_standard(&y, list, &channel).map_err(err)?),
            view("dynfrozen", self.codec.decode_dynfrozen(&y, list, &channel).map_err(err)?),
            view("reencode", self.codec.decode_reencode(&y, list, &channel).map_err(err)?),
        ];
        json(&FrameView {
            data,
            symbols: cw.symbols,
            received: y,
            decoders,
        })
    }
}

#[wasm_bindgen]
impl FrameDemo {
    /// SC-encoded code with a 3-bit CRC; `trials` sets the construction effort.
    #[wasm_bindgen(constructor)]
    pub fn new(constellation: &str, n: usize, k: usize, n_dm: usize, dsnr_db: f64, trials: usize) -> Result<FrameDemo, JsError> {
        Self::build(constellation, n, k, n_dm, dsnr_db, trials).map_err(|e| JsError::new(&e))
    }

    /// Code summary as JSON.
    pub fn summary(&self) -> Result<String, JsError> {
        let s = self.codec.spec();
        let c = s.constellation();
        let v = serde_json::json!({
            "rate": s.rate(),
            "info": s.info.len(),
            "shaping": s.shaping.len(),
            "frozen": s.frozen.len(),
            "points": c.points(),
            "design": s.design.probs,
            "effective": s.target.probs,
        });
        Ok(v.to_string())
    }

    /// Seeds are `u32` so plain JavaScript numbers can be passed.
    pub fn frame(&self, snr_db: f64, list: usize, seed: u32) -> Result<String, JsError> {
        self.frame_json(snr_db, list, seed.into()).map_err(|e| JsError::new(&e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn curve_peaks_at_reported_optimum() {
        let v: Value = serde_json::from_str(&shaping_curve_json("8-ASK", 12.0, 0.1).unwrap()).unwrap();
        let best = v["best_mi"].as_f64().unwrap();
        assert!(v["mi"].as_array().unwrap().iter().all(|m| m.as_f64().unwrap() <= best + 1e-6));
        assert!(best > v["uniform_mi"].as_f64().unwrap());
        assert!(shaping_curve_json("16-QAM", 12.0, 0.1).is_err());
    }

    #[test]
    fn profile_has_one_entry_per_bit() {
        let v: Value = serde_json::from_str(&entropy_profile_json("4-PAM", 16, 12.0, -1.0, 200, 3).unwrap()).unwrap();
        assert_eq!(v["prior"].as_array().unwrap().len(), 32);
        assert_eq!(v["posterior"].as_array().unwrap().len(), 32);
    }

    #[test]
    fn clean_frame_decodes_everywhere() {
        let demo = FrameDemo::build("4-PAM", 16, 20, 6, 12.0, 500).unwrap();
        assert_eq!(demo.spec().info.len(), 20);
        let v: Value = serde_json::from_str(&demo.frame_json(40.0, 4, 7).unwrap()).unwrap();
        for d in v["decoders"].as_array().unwrap() {
            assert_eq!(d["correct"], Value::Bool(true), "{d}");
        }
    }
}
