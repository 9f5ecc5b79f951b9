mod common;

use proptest::prelude::*;

use spikefeat::coding::{
    decode_features, dog_filter, encode_image, encode_latency, gaussian_kernel, on_off_split, ColorStrategy,
    DogParams,
};
use spikefeat::data::Image;

const STRATEGIES: [ColorStrategy; 6] = [
    ColorStrategy::Grayscale,
    ColorStrategy::RgbOpponent,
    ColorStrategy::BioColor,
    ColorStrategy::GrayscalePlusColor,
    ColorStrategy::RawGray,
    ColorStrategy::RawRgb,
];

fn image(side: usize, channels: usize) -> impl Strategy<Value = Image> {
    prop::collection::vec(0.0f64..=1.0, side * side * channels)
        .prop_map(move |d| Image::new(side, side, channels, d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn larger_values_spike_earlier(values in prop::collection::vec(0.0f64..=1.0, 1..30), dur in 0.1f64..5.0) {
        let t = encode_latency(&values, dur).unwrap();
        prop_assert_eq!(t.events.len(), values.len());
        prop_assert!(t.events.windows(2).all(|w| w[0].time < w[1].time || (w[0].time == w[1].time && w[0].input < w[1].input)));
        for e in &t.events {
            prop_assert!((0.0..=dur).contains(&e.time));
            for f in &t.events {
                if values[e.input] > values[f.input] {
                    prop_assert!(e.time < f.time);
                }
            }
        }
    }

    #[test]
    fn decoded_features_are_unit(spikes in prop::collection::vec(prop::option::of(0.0f64..=1.01), 1..20)) {
        let f = decode_features(&spikes, 0.0, 1.01).unwrap();
        prop_assert!(f.iter().all(|v| (0.0..=1.0).contains(v)));
        for (s, v) in spikes.iter().zip(&f) {
            if s.is_none() {
                prop_assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn dog_is_linear_and_matches_brute_force(img in image(12, 1), a in -3.0f64..3.0) {
        let p = DogParams::default();
        let d = dog_filter(&img, &p).unwrap();
        let c = common::convolve_2d(&img, &common::gaussian_2d(p.size, p.center_sigma), p.size);
        let s = common::convolve_2d(&img, &common::gaussian_2d(p.size, p.surround_sigma), p.size);
        for k in 0..d.data.len() {
            prop_assert!((d.data[k] - (c[k] - s[k])).abs() < 1e-10);
        }
        let scaled = Image::new(12, 12, 1, img.data.iter().map(|v| a * v).collect()).unwrap();
        let ds = dog_filter(&scaled, &p).unwrap();
        for (x, y) in d.data.iter().zip(&ds.data) {
            prop_assert!((a * x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn on_off_split_is_lossless(data in prop::collection::vec(-1.0f64..1.0, 16)) {
        let m = Image::new(4, 4, 1, data).unwrap();
        let (on, off) = on_off_split(&m);
        for k in 0..16 {
            prop_assert!(on.data[k] >= 0.0 && off.data[k] >= 0.0);
            prop_assert!(on.data[k] == 0.0 || off.data[k] == 0.0);
            prop_assert_eq!(on.data[k] - off.data[k], m.data[k]);
        }
    }

    #[test]
    fn coded_stacks_are_unit_and_shaped(img in image(9, 3)) {
        for s in STRATEGIES {
            let st = encode_image(&img, s, &DogParams::default()).unwrap();
            prop_assert_eq!(st.parts.len(), s.part_channels().len());
            for (part, &c) in st.parts.iter().zip(&s.part_channels()) {
                prop_assert_eq!((part.height, part.width, part.channels), (9, 9, c));
                prop_assert!(part.data.iter().all(|v| (0.0..=1.0).contains(v)));
                if s.uses_dog() {
                    let peak = part.data.iter().cloned().fold(0.0, f64::max);
                    prop_assert!(peak == 0.0 || (peak - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn kernels_are_normalized_and_symmetric(half in 0usize..8, sigma in 0.1f64..20.0) {
        let size = 2 * half + 1;
        let k = gaussian_kernel(size, sigma).unwrap();
        prop_assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for u in 0..size {
            for v in 0..size {
                prop_assert_eq!(k[u * size + v], k[v * size + u]);
                prop_assert_eq!(k[u * size + v], k[(size - 1 - u) * size + v]);
            }
        }
    }
}

#[test]
fn even_kernel_sizes_are_rejected() {
    assert!(gaussian_kernel(4, 1.0).is_err());
    assert!(gaussian_kernel(3, 0.0).is_err());
}
