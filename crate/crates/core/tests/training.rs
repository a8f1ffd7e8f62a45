use beamlevel::array_channel::sample_channel;
use beamlevel::beam_training::{measure, np_threshold};
use beamlevel::codebook::best_beam_oracle;
use beamlevel::{build_codebook, train_hop, ArrayConfig, BeamIndex, DetectorConfig, MeasurementModel};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn noiseless() -> MeasurementModel {
    MeasurementModel {
        signal_scale: 1.0,
        noise_variance: 0.0,
    }
}

#[test]
fn noiseless_training_finds_exhaustive_pair() {
    let book = build_codebook(&ArrayConfig::default(), 4, 2.24).unwrap();
    let det = DetectorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 2000;
    let mut hits = 0;
    for _ in 0..n {
        let ch = sample_channel(1.0, &mut rng);
        let out = train_hop(&ch, &book, &book, 3, &noiseless(), &det, &mut rng).unwrap();
        let tx = best_beam_oracle(ch.aod, 3, &book).unwrap();
        let rx = best_beam_oracle(ch.aoa, 3, &book).unwrap();
        hits += (out.tx_beam == tx && out.rx_beam == rx) as usize;
    }
    let rate = hits as f64 / n as f64;
    assert!(rate >= 0.95, "pair agreement {rate}");
}

#[test]
fn deeper_training_does_not_lower_median_snr() {
    let book = build_codebook(&ArrayConfig::default(), 4, 2.24).unwrap();
    let det = DetectorConfig::default();
    let model = MeasurementModel {
        signal_scale: 1e3,
        noise_variance: 1.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut diffs: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for _ in 0..10_000 {
        let ch = sample_channel(1.0, &mut rng);
        let snr: Vec<f64> = (1..=3)
            .map(|m| {
                train_hop(&ch, &book, &book, m, &model, &det, &mut rng)
                    .unwrap()
                    .snr
            })
            .collect();
        diffs[0].push(snr[1] - snr[0]);
        diffs[1].push(snr[2] - snr[1]);
    }
    for d in &mut diffs {
        d.sort_by(f64::total_cmp);
        assert!(d[d.len() / 2] >= 0.0, "median gain {}", d[d.len() / 2]);
    }
}

#[test]
fn noise_only_false_alarm_rate() {
    let array = ArrayConfig::default();
    let det = DetectorConfig::default();
    let eta = np_threshold(&det);
    let silent = beamlevel::ChannelRealization::new(0.0, 0.0, Complex64::new(0.0, 0.0)).unwrap();
    let book = build_codebook(&array, 4, 2.24).unwrap();
    let w = book.codeword(BeamIndex::new(1, 1)).unwrap();
    let resp = silent.responses(&array, &array);
    let model = MeasurementModel {
        signal_scale: 1.0,
        noise_variance: 1.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let n = 1_000_000;
    let alarms = (0..n)
        .filter(|_| measure(w, w, &resp, &model, &mut rng).unwrap().norm_sqr() > eta)
        .count();
    let rate = alarms as f64 / n as f64;
    assert!((rate - 0.01).abs() <= 0.001, "false-alarm rate {rate}");
}
