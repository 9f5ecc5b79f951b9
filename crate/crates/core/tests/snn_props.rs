mod common;

use proptest::prelude::*;

use spikefeat::coding::encode_latency;
use spikefeat::snn::{train_snn, Inhibition, SnnConfig, SnnState, THRESHOLD_FLOOR};

fn layer(n_f: usize, n_in: usize, seed: u64, threshold: f64) -> SnnState {
    let mut s = SnnState::new(SnnConfig {
        seed,
        ..SnnConfig::new(n_f, n_in)
    })
    .unwrap();
    s.thresholds = vec![threshold; n_f];
    s
}

fn unit_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..=1.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn engine_matches_reference(seed in any::<u64>(), values in unit_vec(6), th in 0.05f64..6.0) {
        let s = layer(3, 6, seed, th);
        let train = encode_latency(&values, 1.0).unwrap();
        let r = s.simulate_wta(&train).unwrap();
        let (w, t) = common::reference_wta(&s, &train);
        prop_assert_eq!(r.winner, w);
        prop_assert_eq!(r.fire_time, t);
    }

    #[test]
    fn wta_winner_is_earliest_free_spike(seed in any::<u64>(), values in unit_vec(12), th in 0.5f64..8.0) {
        let s = layer(5, 12, seed, th);
        let train = encode_latency(&values, 1.0).unwrap();
        let free = s.simulate(&train, Inhibition::Off).unwrap();
        let wta = s.simulate(&train, Inhibition::On).unwrap();
        prop_assert!(wta.iter().filter(|t| t.is_some()).count() <= 1);
        let earliest = free.iter().enumerate().filter_map(|(i, t)| t.map(|t| (t, i)))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        match earliest {
            None => prop_assert!(wta.iter().all(Option::is_none)),
            Some((t, i)) => prop_assert_eq!(wta[i], Some(t)),
        }
    }

    #[test]
    fn weights_stay_bounded(seed in any::<u64>(), samples in prop::collection::vec(unit_vec(10), 1..40), alpha in 0.001f64..0.9) {
        let mut s = SnnState::new(SnnConfig { seed, alpha_plus: alpha, alpha_minus: alpha, ..SnnConfig::new(3, 10) }).unwrap();
        s.thresholds = vec![1.5; 3];
        for v in &samples {
            s.present(&encode_latency(v, 1.0).unwrap()).unwrap();
            prop_assert!(s.weights.iter().all(|&w| (s.config.w_min..=s.config.w_max).contains(&w)));
            prop_assert!(s.thresholds.iter().all(|&t| t >= THRESHOLD_FLOOR));
        }
    }

    #[test]
    fn only_the_winner_learns(seed in any::<u64>(), values in unit_vec(8)) {
        let mut s = layer(4, 8, seed, 2.0);
        let before = s.clone();
        let r = s.present(&encode_latency(&values, 1.0).unwrap()).unwrap();
        for i in 0..4 {
            if Some(i) != r.winner {
                prop_assert_eq!(s.weight_row(i), before.weight_row(i));
            }
        }
        prop_assert_eq!(&s.delays, &before.delays);
        if r.winner.is_none() {
            prop_assert_eq!(s, before);
        }
    }

    #[test]
    fn features_lie_in_unit_interval(seed in any::<u64>(), values in unit_vec(9), th in 0.5f64..6.0) {
        let s = layer(4, 9, seed, th);
        for inh in [Inhibition::On, Inhibition::Off] {
            let f = s.extract(&values, inh).unwrap();
            prop_assert!(f.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}

#[test]
fn training_is_deterministic() {
    let mut rng = common::rng(11);
    let patches: Vec<Vec<f64>> = (0..300).map(|_| common::random_vec(&mut rng, 25, 0.0, 1.0)).collect();
    let run = || {
        let mut s = SnnState::new(SnnConfig {
            seed: 5,
            ..SnnConfig::new(4, 25)
        })
        .unwrap();
        let log = train_snn(&mut s, &patches, 3).unwrap();
        (s, log)
    };
    assert_eq!(run(), run());
}

#[test]
fn default_layer_fires_on_blank_input() {
    // every input spikes by the end of the window, so a fresh layer with the
    // default threshold can still fire on empty patches
    let s = SnnState::new(SnnConfig {
        seed: 1,
        ..SnnConfig::new(8, 50)
    })
    .unwrap();
    let total: f64 = (0..8).map(|i| s.weight_row(i).iter().sum::<f64>()).fold(f64::MIN, f64::max);
    let r = s.simulate_wta(&encode_latency(&[0.0; 50], 1.0).unwrap()).unwrap();
    assert_eq!(r.winner.is_some(), total >= s.config.v_th0);
}

#[test]
fn homeostasis_spreads_wins() {
    let mut rng = common::rng(12);
    let patches: Vec<Vec<f64>> = (0..2000).map(|_| common::random_vec(&mut rng, 25, 0.0, 1.0)).collect();
    let mut s = SnnState::new(SnnConfig {
        seed: 3,
        ..SnnConfig::new(4, 25)
    })
    .unwrap();
    s.thresholds = vec![4.0; 4];
    let log = train_snn(&mut s, &patches, 5).unwrap();
    assert!(log.silent_neurons().is_empty(), "wins {:?}", log.total_wins());
}
