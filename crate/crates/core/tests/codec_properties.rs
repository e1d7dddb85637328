use std::sync::OnceLock;

use mlhy::codec::{CodeSpec, HyCodec};
use mlhy::construction::{build_code_spec, ConstructionParams};
use mlhy::crc::CrcConfig;
use mlhy::modulation::{awgn, ConstellationKind};
use mlhy::seed::seed_stream;
use proptest::prelude::*;
use rand::Rng;

fn params(kind: ConstellationKind, n: usize, k: usize, n_dm: usize, p: usize, encoder_list: usize) -> ConstructionParams {
    ConstructionParams {
        constellation: kind,
        n,
        k,
        crc: CrcConfig::default_for(p).unwrap(),
        n_dm,
        dsnr_db: if kind == ConstellationKind::Pam4 { 14.0 } else { 12.0 },
        kappa_db: -1.0,
        encoder_list,
        nu: None,
        entropy_trials: 2000,
        distribution_trials: 2000,
        seed: 5,
    }
}

fn sc_code() -> &'static HyCodec {
    static CODE: OnceLock<HyCodec> = OnceLock::new();
    CODE.get_or_init(|| {
        HyCodec::new(build_code_spec(&params(ConstellationKind::Ask8, 16, 26, 8, 3, 1), 1).unwrap()).unwrap()
    })
}

fn scl_code() -> &'static HyCodec {
    static CODE: OnceLock<HyCodec> = OnceLock::new();
    CODE.get_or_init(|| {
        HyCodec::new(build_code_spec(&params(ConstellationKind::Pam4, 16, 18, 6, 3, 4), 1).unwrap()).unwrap()
    })
}

fn uniform_code() -> &'static HyCodec {
    static CODE: OnceLock<HyCodec> = OnceLock::new();
    CODE.get_or_init(|| {
        let mut p = params(ConstellationKind::Pam4, 16, 20, 0, 3, 1);
        p.nu = Some(0.0);
        HyCodec::new(build_code_spec(&p, 1).unwrap()).unwrap()
    })
}

fn random_frame(codec: &HyCodec, seed: u64, snr_db: f64) -> (Vec<u8>, Vec<u8>, Vec<f64>) {
    let mut rng = seed_stream(seed, &[77]);
    let data: Vec<u8> = (0..codec.spec().data_len()).map(|_| rng.random_range(0..2u8)).collect();
    let cw = codec.encode_default(&data).unwrap();
    let ch = codec.channel(snr_db).unwrap();
    let y = awgn(&cw.symbols, ch.noise_var, &mut rng).unwrap();
    (data, cw.u, y)
}

#[test]
fn spec_files_round_trip() {
    let spec = scl_code().spec();
    let dir = std::env::temp_dir().join(format!("mlhy-spec-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("spec.toml");
    spec.save(&path).unwrap();
    assert_eq!(&CodeSpec::load(&path).unwrap(), spec);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("[crc]") && text.contains("[target]") && text.contains("[metadata]"));
    std::fs::remove_dir_all(dir).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encoder_output_lies_in_the_frozen_subcode(seed in any::<u64>()) {
        for codec in [sc_code(), scl_code()] {
            let (data, u, _) = random_frame(codec, seed, 30.0);
            prop_assert!(codec.spec().frozen.iter().all(|&j| u[j] == 0));
            prop_assert_eq!(&codec.encode_default(&data).unwrap().u, &u);
            prop_assert!(codec.is_valid_codeword(&u));
        }
    }

    #[test]
    fn dynfrozen_output_is_a_codeword_iff_crc_passes(seed in any::<u64>(), snr in 6.0f64..14.0) {
        let codec = sc_code();
        let (_, _, y) = random_frame(codec, seed, snr);
        let ch = codec.channel(snr).unwrap();
        let r = codec.decode_dynfrozen(&y, 8, &ch).unwrap();
        prop_assert_eq!(r.valid, codec.is_valid_codeword(&r.u_hat));
    }

    #[test]
    fn reencode_is_sound_and_complete_over_the_list(seed in any::<u64>(), snr in 4.0f64..12.0) {
        let codec = scl_code();
        let (_, u, y) = random_frame(codec, seed, snr);
        let ch = codec.channel(snr).unwrap();
        let list = codec.list_decode(&y, 8, &ch).unwrap();
        let out = codec.reencode_select(&list).unwrap();
        if out.result.valid {
            prop_assert!(codec.is_valid_codeword(&out.result.u_hat));
        }
        if let Some(pos) = list.iter().position(|c| c.u == u) {
            // nothing ahead of the transmitted word was accepted, so it is the answer
            let earlier_valid = list[..pos].iter().any(|c| codec.is_valid_codeword(&c.u));
            prop_assert!(out.result.valid);
            if !earlier_valid {
                prop_assert_eq!(&out.result.u_hat, &u);
            }
        }
        let lambda = out.result.lambda.unwrap();
        prop_assert!(lambda <= list.len());
    }

    #[test]
    fn unshaped_code_decoders_coincide(seed in any::<u64>(), snr in 3.0f64..10.0) {
        let codec = uniform_code();
        let (_, _, y) = random_frame(codec, seed, snr);
        let ch = codec.channel(snr).unwrap();
        let a = codec.decode_standard(&y, 4, &ch).unwrap();
        let b = codec.decode_dynfrozen(&y, 4, &ch).unwrap();
        let c = codec.decode_reencode(&y, 4, &ch).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!((&a.data, &a.u_hat, a.valid), (&c.data, &c.u_hat, c.valid));
    }

    #[test]
    fn single_path_reencoding_count_is_at_most_one(seed in any::<u64>(), snr in 4.0f64..12.0) {
        let codec = scl_code();
        let (_, _, y) = random_frame(codec, seed, snr);
        let r = codec.decode_reencode(&y, 1, &codec.channel(snr).unwrap()).unwrap();
        prop_assert!(matches!(r.lambda, Some(0) | Some(1)));
    }
}
