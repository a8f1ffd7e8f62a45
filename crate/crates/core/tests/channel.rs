use std::f64::consts::PI;

use beamlevel::array_channel::{inner, norm, steering_vector};
use beamlevel::{beamformed_gain, received_snr, ArrayConfig, ChannelRealization, LinkBudget};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_unit<R: Rng>(n: usize, rng: &mut R) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let s = norm(&v);
    v.into_iter().map(|c| c / s).collect()
}

/// `v^H (beta a_rx a_tx^H) w` with the channel matrix written out entry by entry.
fn materialized_gain(v: &[Complex64], ch: &ChannelRealization, array: &ArrayConfig, w: &[Complex64]) -> f64 {
    let a_tx = steering_vector(ch.aod, array).unwrap();
    let a_rx = steering_vector(ch.aoa, array).unwrap();
    let n = array.num_antennas;
    let h: Vec<Vec<Complex64>> = (0..n)
        .map(|r| (0..n).map(|c| ch.gain * a_rx[r] * a_tx[c].conj()).collect())
        .collect();
    let hw: Vec<Complex64> = h
        .iter()
        .map(|row| row.iter().zip(w).map(|(x, y)| x * y).sum())
        .collect();
    inner(v, &hw).norm_sqr()
}

#[test]
fn rank_one_matches_materialized_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(2..=16);
        let array = ArrayConfig::new(n, 0.5).unwrap();
        let ch = ChannelRealization::new(
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            Complex64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0),
        )
        .unwrap();
        let (v, w) = (random_unit(n, &mut rng), random_unit(n, &mut rng));
        let fast = beamformed_gain(&v, &ch.responses(&array, &array), &w).unwrap();
        let slow = materialized_gain(&v, &ch, &array, &w);
        worst = worst.max((fast - slow).abs() / slow.abs().max(1e-300));
    }
    assert!(worst < 1e-9, "worst relative error {worst}");
}

#[test]
fn matched_beams_give_n_squared_gain() {
    let array = ArrayConfig::default();
    let ch = ChannelRealization::new(0.3, -0.7, Complex64::new(1.0, 0.0)).unwrap();
    let scale = 1.0 / (array.num_antennas as f64).sqrt();
    let w: Vec<_> = steering_vector(0.3, &array)
        .unwrap()
        .iter()
        .map(|c| c * scale)
        .collect();
    let v: Vec<_> = steering_vector(-0.7, &array)
        .unwrap()
        .iter()
        .map(|c| c * scale)
        .collect();
    let g = beamformed_gain(&v, &ch.responses(&array, &array), &w).unwrap();
    assert!((g - 4096.0).abs() < 1e-7);
}

fn budget(distance_m: f64) -> LinkBudget {
    LinkBudget {
        distance_m,
        carrier_hz: 240e9,
        path_loss_exponent: 2.02,
        reference_distance_m: 1.0,
        bandwidth_hz: 4e9,
        noise_psd_dbm_hz: -204.0,
        transmit_snr_db: 40.0,
        matched_filter_length: 33_333,
    }
}

proptest! {
    #[test]
    fn steering_vector_has_norm_sqrt_n(theta in -1.0f64..=1.0, n in 2usize..=128) {
        let a = steering_vector(theta, &ArrayConfig::new(n, 0.5).unwrap()).unwrap();
        prop_assert!((norm(&a) - (n as f64).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn gain_is_phase_invariant(
        aod in -1.0f64..=1.0,
        aoa in -1.0f64..=1.0,
        phi in 0.0f64..(2.0 * PI),
        psi in 0.0f64..(2.0 * PI),
        seed in any::<u64>(),
    ) {
        let array = ArrayConfig::new(16, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = ChannelRealization::new(aod, aoa, Complex64::new(0.8, -0.3)).unwrap();
        let resp = ch.responses(&array, &array);
        let (v, w) = (random_unit(16, &mut rng), random_unit(16, &mut rng));
        let g = beamformed_gain(&v, &resp, &w).unwrap();
        let rot = |x: &[Complex64], a: f64| x.iter().map(|c| c * Complex64::from_polar(1.0, a)).collect::<Vec<_>>();
        let g2 = beamformed_gain(&rot(&v, phi), &resp, &rot(&w, psi)).unwrap();
        prop_assert!((g - g2).abs() <= 1e-9 * g.max(1.0));
    }

    #[test]
    fn received_snr_falls_with_distance(d1 in 1.0f64..500.0, extra in 0.01f64..500.0, gain in 1e-3f64..4096.0) {
        prop_assert!(received_snr(&budget(d1 + extra), gain) < received_snr(&budget(d1), gain));
    }

    #[test]
    fn gain_is_bounded_by_n_squared(aod in -1.0f64..=1.0, aoa in -1.0f64..=1.0, seed in any::<u64>()) {
        let array = ArrayConfig::new(8, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = ChannelRealization::new(aod, aoa, Complex64::new(1.0, 0.0)).unwrap();
        let g = beamformed_gain(&random_unit(8, &mut rng), &ch.responses(&array, &array), &random_unit(8, &mut rng)).unwrap();
        prop_assert!(g <= 64.0 + 1e-9);
    }
}
