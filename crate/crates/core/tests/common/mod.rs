//! Independent reference implementations used as test oracles. They favour
//! the most literal formulation over speed and share no code with the
//! library beyond plain data types.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spikefeat::ae::AeState;
use spikefeat::{Image, SnnState, SpikeTrain};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Winner-take-all by stepping a global clock over every distinct arrival
/// time: all neurons integrate everything that arrives at that instant, then
/// the lowest-index neuron at or above threshold wins.
pub fn reference_wta(state: &SnnState, train: &SpikeTrain) -> (Option<usize>, Option<f64>) {
    let (n_f, n_in) = (state.config.n_f, state.config.n_inputs);
    // (arrival time, neuron, input)
    let mut arrivals = Vec::new();
    for i in 0..n_f {
        for e in &train.events {
            arrivals.push((e.time + state.delays[i * n_in + e.input], i, e.input));
        }
    }
    arrivals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.2.cmp(&b.2)));
    let mut potential = vec![state.config.v_rest; n_f];
    let mut k = 0;
    while k < arrivals.len() {
        let now = arrivals[k].0;
        while k < arrivals.len() && arrivals[k].0 == now {
            let (_, i, j) = arrivals[k];
            potential[i] += state.weights[i * n_in + j];
            k += 1;
        }
        if let Some(i) = (0..n_f).find(|&i| potential[i] >= state.thresholds[i]) {
            return (Some(i), Some(now));
        }
    }
    (None, None)
}

/// Replicate-edge clamp of a signed index.
fn clamp_idx(i: i64, n: usize) -> usize {
    i.clamp(0, n as i64 - 1) as usize
}

/// Direct 2D correlation with a full square kernel and replicate borders.
pub fn convolve_2d(map: &Image, kernel: &[f64], size: usize) -> Vec<f64> {
    let (h, w) = (map.height, map.width);
    let mu = (size / 2) as i64;
    let mut out = vec![0.0; h * w];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for u in 0..size {
                for v in 0..size {
                    let yy = clamp_idx(y as i64 + u as i64 - mu, h);
                    let xx = clamp_idx(x as i64 + v as i64 - mu, w);
                    acc += kernel[u * size + v] * map.data[yy * w + xx];
                }
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Gaussian from its closed form, normalized; `var` is the variance.
pub fn gaussian_2d(size: usize, var: f64) -> Vec<f64> {
    let mu = (size / 2) as f64;
    let mut k = Vec::with_capacity(size * size);
    for u in 0..size {
        for v in 0..size {
            let (a, b) = (u as f64 - mu, v as f64 - mu);
            k.push((-(a * a + b * b) / (2.0 * var)).exp());
        }
    }
    let s: f64 = k.iter().sum();
    k.into_iter().map(|x| x / s).collect()
}

/// Auto-encoder objective written out with explicit loops: half squared
/// error averaged over the batch, L2 on both weight matrices and a summed
/// Bernoulli KL on the mean activations.
pub fn dense_ae_loss(s: &AeState, batch: &[Vec<f64>]) -> f64 {
    let c = &s.config;
    let (n, f) = (c.n_inputs, c.n_f);
    let p = &s.params;
    let mut sq = 0.0;
    let mut mean_act = vec![0.0; f];
    for x in batch {
        let mut z = vec![0.0; f];
        for j in 0..f {
            let mut a = p.b_enc[j];
            for i in 0..n {
                a += p.w_enc[j * n + i] * x[i];
            }
            z[j] = 1.0 / (1.0 + (-a).exp());
            mean_act[j] += z[j] / batch.len() as f64;
        }
        for i in 0..n {
            let mut r = p.b_dec[i];
            for j in 0..f {
                r += p.w_dec[i * f + j] * z[j];
            }
            sq += (r - x[i]).powi(2);
        }
    }
    let mse = 0.5 * sq / batch.len() as f64;
    let l2 = 0.5
        * c.lambda
        * (p.w_enc.iter().map(|w| w * w).sum::<f64>() + p.w_dec.iter().map(|w| w * w).sum::<f64>());
    let rho = c.rho;
    let kl: f64 = mean_act
        .iter()
        .map(|&q| rho * (rho / q).ln() + (1.0 - rho) * ((1.0 - rho) / (1.0 - q)).ln())
        .sum();
    mse + l2 + c.gamma * kl
}

/// Central finite-difference gradient of [`dense_ae_loss`], in the block
/// order `w_enc, b_enc, w_dec, b_dec`.
pub fn fd_gradient(s: &AeState, batch: &[Vec<f64>], h: f64) -> Vec<f64> {
    let mut probe = s.clone();
    let mut out = Vec::new();
    for block in 0..4 {
        let len = probe.params.blocks()[block].len();
        for k in 0..len {
            let orig = probe.params.blocks()[block][k];
            probe.params.blocks_mut()[block][k] = orig + h;
            let up = dense_ae_loss(&probe, batch);
            probe.params.blocks_mut()[block][k] = orig - h;
            let down = dense_ae_loss(&probe, batch);
            probe.params.blocks_mut()[block][k] = orig;
            out.push((up - down) / (2.0 * h));
        }
    }
    out
}

pub fn random_vec<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Relative error between two vectors in the Euclidean norm.
pub fn rel_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}
