//! Sparse auto-encoder baseline.
//!
//! Encoder `z = sigmoid(W_enc x + b_enc)`, linear decoder
//! `x~ = W_dec z + b_dec`, trained with Adadelta on
//!
//! ```text
//! L = 1/(2B) sum_b |x_b - x~_b|^2 + lambda/2 (|W_enc|^2 + |W_dec|^2) + gamma * KL(rho || rho^)
//! ```
//!
//! where `rho^` is the batch-mean activation of each hidden unit.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, stream};

/// Clamp applied to batch-mean activations inside the KL logarithms.
pub const RHO_HAT_EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AeConfig {
    pub n_f: usize,
    pub n_inputs: usize,
    /// Target mean activation.
    pub rho: f64,
    /// Sparsity penalty weight.
    pub gamma: f64,
    /// L2 weight decay.
    pub lambda: f64,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Adadelta decay of both running averages.
    pub ada_decay: f64,
    pub ada_eps: f64,
    pub seed: u64,
}

impl AeConfig {
    /// Defaults for a grayscale dictionary of 64 features.
    pub fn new(n_f: usize, n_inputs: usize) -> Self {
        Self {
            n_f,
            n_inputs,
            rho: 0.01,
            gamma: 0.05,
            lambda: 1e-5,
            lr: 1.0,
            epochs: 1000,
            batch_size: 128,
            ada_decay: 0.95,
            ada_eps: 1e-6,
            seed: 0,
        }
    }

    /// Tuned `(rho, gamma, lambda)` for a data kind and dictionary size.
    pub fn tuned(color: bool, n_f: usize) -> (f64, f64, f64) {
        match (color, n_f <= 64) {
            (true, true) => (0.005, 0.5, 1e-4),
            (true, false) => (0.005, 0.1, 1e-5),
            (false, true) => (0.01, 0.05, 1e-5),
            (false, false) => (0.005, 0.1, 1e-5),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParam(m.to_string()));
        if self.n_f == 0 || self.n_inputs == 0 || self.batch_size == 0 {
            return bad("n_f, n_inputs and batch_size must be positive");
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return bad("rho must lie in (0, 1)");
        }
        if !(self.gamma >= 0.0 && self.lambda >= 0.0) {
            return bad("gamma and lambda must be >= 0");
        }
        if !(self.ada_decay > 0.0 && self.ada_decay < 1.0 && self.ada_eps > 0.0) {
            return bad("adadelta decay must lie in (0, 1) and eps > 0");
        }
        Ok(())
    }
}

/// The four parameter blocks. Also used for gradients and optimizer accumulators.
#[derive(Debug, Clone, PartialEq)]
pub struct AeParams {
    /// `n_f × n_inputs`, row-major.
    pub w_enc: Vec<f64>,
    pub b_enc: Vec<f64>,
    /// `n_inputs × n_f`, row-major.
    pub w_dec: Vec<f64>,
    pub b_dec: Vec<f64>,
}

impl AeParams {
    pub fn zeros(n_f: usize, n_inputs: usize) -> Self {
        Self {
            w_enc: vec![0.0; n_f * n_inputs],
            b_enc: vec![0.0; n_f],
            w_dec: vec![0.0; n_inputs * n_f],
            b_dec: vec![0.0; n_inputs],
        }
    }

    pub fn blocks(&self) -> [&[f64]; 4] {
        [&self.w_enc, &self.b_enc, &self.w_dec, &self.b_dec]
    }

    pub fn blocks_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [&mut self.w_enc, &mut self.b_enc, &mut self.w_dec, &mut self.b_dec]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AeState {
    pub config: AeConfig,
    pub params: AeParams,
    /// Running average of squared gradients.
    pub acc_grad: AeParams,
    /// Running average of squared updates.
    pub acc_update: AeParams,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeLoss {
    pub total: f64,
    pub mse: f64,
    pub l2: f64,
    pub kl: f64,
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `KL(rho || rho_hat)` for a single Bernoulli unit, `rho_hat` clamped.
pub fn kl_bernoulli(rho: f64, rho_hat: f64) -> f64 {
    let q = rho_hat.clamp(RHO_HAT_EPS, 1.0 - RHO_HAT_EPS);
    rho * (rho / q).ln() + (1.0 - rho) * ((1.0 - rho) / (1.0 - q)).ln()
}

impl AeState {
    /// Encoder and decoder weights uniform in `±1/sqrt(n_inputs)`, zero biases.
    pub fn new(config: AeConfig) -> Result<Self> {
        config.validate()?;
        let (n_f, n_in) = (config.n_f, config.n_inputs);
        let bound = 1.0 / (n_in as f64).sqrt();
        let mut rng = rng::seeded(config.seed, stream::AE_INIT);
        let mut params = AeParams::zeros(n_f, n_in);
        params.w_enc.iter_mut().for_each(|w| *w = rng.gen_range(-bound..=bound));
        params.w_dec.iter_mut().for_each(|w| *w = rng.gen_range(-bound..=bound));
        Ok(Self {
            config,
            params,
            acc_grad: AeParams::zeros(n_f, n_in),
            acc_update: AeParams::zeros(n_f, n_in),
        })
    }

    fn check_batch(&self, batch: &[f64]) -> Result<usize> {
        let n = self.config.n_inputs;
        if batch.is_empty() || !batch.len().is_multiple_of(n) {
            return Err(Error::Dimension {
                expected: n,
                got: batch.len(),
            });
        }
        Ok(batch.len() / n)
    }

    /// Hidden activations of one input vector.
    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.config.n_inputs {
            return Err(Error::Dimension {
                expected: self.config.n_inputs,
                got: x.len(),
            });
        }
        Ok(self.encode_unchecked(x))
    }

    fn encode_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let n = self.config.n_inputs;
        self.params
            .w_enc
            .chunks_exact(n)
            .zip(&self.params.b_enc)
            .map(|(row, b)| sigmoid(row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b))
            .collect()
    }

    /// Affine decoder applied to hidden activations.
    pub fn decode(&self, z: &[f64]) -> Vec<f64> {
        let f = self.config.n_f;
        self.params
            .w_dec
            .chunks_exact(f)
            .zip(&self.params.b_dec)
            .map(|(row, b)| row.iter().zip(z).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect()
    }

    /// Row-major batch forward pass: `(z, x_recon)`.
    pub fn forward(&self, batch: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_batch(batch)?;
        let n = self.config.n_inputs;
        let mut z = Vec::with_capacity(batch.len() / n * self.config.n_f);
        let mut xr = Vec::with_capacity(batch.len());
        for x in batch.chunks_exact(n) {
            let zb = self.encode_unchecked(x);
            xr.extend(self.decode(&zb));
            z.extend(zb);
        }
        Ok((z, xr))
    }

    fn rho_hat(&self, z: &[f64], b: usize) -> Vec<f64> {
        let f = self.config.n_f;
        let mut m = vec![0.0; f];
        for row in z.chunks_exact(f) {
            for (a, v) in m.iter_mut().zip(row) {
                *a += v;
            }
        }
        m.iter_mut().for_each(|v| *v /= b as f64);
        m
    }

    pub fn loss(&self, batch: &[f64]) -> Result<AeLoss> {
        let b = self.check_batch(batch)?;
        let (z, xr) = self.forward(batch)?;
        let c = &self.config;
        let sq: f64 = batch.iter().zip(&xr).map(|(x, r)| (x - r) * (x - r)).sum();
        let mse = 0.5 * sq / b as f64;
        let frob = |v: &[f64]| v.iter().map(|w| w * w).sum::<f64>();
        let l2 = 0.5 * c.lambda * (frob(&self.params.w_enc) + frob(&self.params.w_dec));
        let kl = c.gamma * self.rho_hat(&z, b).iter().map(|&q| kl_bernoulli(c.rho, q)).sum::<f64>();
        Ok(AeLoss {
            total: mse + l2 + kl,
            mse,
            l2,
            kl,
        })
    }

    /// Exact gradient of [`AeState::loss`] with respect to every parameter.
    pub fn gradient(&self, batch: &[f64]) -> Result<AeParams> {
        let b = self.check_batch(batch)?;
        let c = &self.config;
        let (n, f) = (c.n_inputs, c.n_f);
        let (z, xr) = self.forward(batch)?;
        let mut g = AeParams::zeros(f, n);
        let scale = 1.0 / b as f64;

        // d KL / d z_bj, identical for every sample (flows through the batch mean)
        let dkl: Vec<f64> = self
            .rho_hat(&z, b)
            .iter()
            .map(|&q| {
                if q <= RHO_HAT_EPS || q >= 1.0 - RHO_HAT_EPS {
                    0.0
                } else {
                    c.gamma * (-c.rho / q + (1.0 - c.rho) / (1.0 - q)) * scale
                }
            })
            .collect();

        let mut dz = vec![0.0; f];
        for ((x, zb), rb) in batch.chunks_exact(n).zip(z.chunks_exact(f)).zip(xr.chunks_exact(n)) {
            dz.copy_from_slice(&dkl);
            for i in 0..n {
                let e = (rb[i] - x[i]) * scale;
                if e == 0.0 {
                    continue;
                }
                g.b_dec[i] += e;
                let wrow = &self.params.w_dec[i * f..(i + 1) * f];
                let grow = &mut g.w_dec[i * f..(i + 1) * f];
                for j in 0..f {
                    grow[j] += e * zb[j];
                    dz[j] += wrow[j] * e;
                }
            }
            for j in 0..f {
                let delta = dz[j] * zb[j] * (1.0 - zb[j]);
                g.b_enc[j] += delta;
                for (gw, xv) in g.w_enc[j * n..(j + 1) * n].iter_mut().zip(x) {
                    *gw += delta * xv;
                }
            }
        }
        for (gw, w) in g.w_enc.iter_mut().zip(&self.params.w_enc) {
            *gw += c.lambda * w;
        }
        for (gw, w) in g.w_dec.iter_mut().zip(&self.params.w_dec) {
            *gw += c.lambda * w;
        }
        Ok(g)
    }

    /// Adadelta update of every parameter in place.
    pub fn adadelta_step(&mut self, grads: &AeParams) {
        let c = self.config;
        let (rho, eps) = (c.ada_decay, c.ada_eps);
        let params = self.params.blocks_mut();
        let acc_g = self.acc_grad.blocks_mut();
        let acc_u = self.acc_update.blocks_mut();
        for (((p, g), ag), au) in params.into_iter().zip(grads.blocks()).zip(acc_g).zip(acc_u) {
            for i in 0..p.len() {
                ag[i] = rho * ag[i] + (1.0 - rho) * g[i] * g[i];
                let delta = (au[i] + eps).sqrt() / (ag[i] + eps).sqrt() * g[i];
                au[i] = rho * au[i] + (1.0 - rho) * delta * delta;
                p[i] -= c.lr * delta;
            }
        }
    }
}

/// Trains from scratch on flattened patches. Returns the state and the mean
/// batch loss of every epoch.
pub fn train_ae(config: AeConfig, patches: &[Vec<f64>]) -> Result<(AeState, Vec<f64>)> {
    let mut state = AeState::new(config)?;
    let n = config.n_inputs;
    if let Some(p) = patches.iter().find(|p| p.len() != n) {
        return Err(Error::Dimension {
            expected: n,
            got: p.len(),
        });
    }
    let mut rng = rng::seeded(config.seed, stream::AE_SHUFFLE);
    let mut order: Vec<usize> = (0..patches.len()).collect();
    let mut curve = Vec::with_capacity(config.epochs);
    let mut batch = Vec::with_capacity(config.batch_size * n);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut sum = 0.0;
        let mut count = 0;
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            for &k in chunk {
                batch.extend_from_slice(&patches[k]);
            }
            sum += state.loss(&batch)?.total;
            count += 1;
            let g = state.gradient(&batch)?;
            state.adadelta_step(&g);
        }
        curve.push(if count > 0 { sum / count as f64 } else { 0.0 });
    }
    Ok((state, curve))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_state(n_f: usize, n_in: usize) -> AeState {
        let mut s = AeState::new(AeConfig::new(n_f, n_in)).unwrap();
        s.params = AeParams::zeros(n_f, n_in);
        s
    }

    #[test]
    fn zero_state_forward() {
        let s = zero_state(3, 4);
        let (z, xr) = s.forward(&[0.1, 0.2, 0.3, 0.4, 1.0, 0.0, 0.5, 0.5]).unwrap();
        assert!(z.iter().all(|&v| v == 0.5));
        assert!(xr.iter().all(|&v| v == 0.0));
        assert!(s.forward(&[0.1, 0.2, 0.3]).is_err());
        assert!(s.forward(&[]).is_err());
    }

    #[test]
    fn kl_values() {
        assert!(kl_bernoulli(0.3, 0.3).abs() < 1e-15);
        let want = 0.005 * (0.01f64).ln() + 0.995 * (1.99f64).ln();
        assert!((kl_bernoulli(0.005, 0.5) - want).abs() < 1e-15);
        assert!((want - 0.661668).abs() < 1e-6);
        assert!(kl_bernoulli(0.2, 0.0).is_finite());
        assert!(kl_bernoulli(0.2, 1.0).is_finite());
    }

    #[test]
    fn perfect_reconstruction_zero_loss() {
        let mut s = zero_state(2, 3);
        s.config.gamma = 0.0;
        s.config.lambda = 0.0;
        s.params.b_dec = vec![0.2, 0.7, 0.1];
        let l = s.loss(&[0.2, 0.7, 0.1, 0.2, 0.7, 0.1]).unwrap();
        assert_eq!(l.total, 0.0);
        let g = s.gradient(&[0.2, 0.7, 0.1]).unwrap();
        assert!(g.b_dec.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn weight_decay_gradient_is_lambda_w() {
        let mut s = AeState::new(AeConfig { seed: 5, ..AeConfig::new(3, 4) }).unwrap();
        let batch = [0.1, 0.9, 0.3, 0.5];
        s.config.lambda = 0.0;
        let g0 = s.gradient(&batch).unwrap();
        s.config.lambda = 0.25;
        let g1 = s.gradient(&batch).unwrap();
        for ((a, b), w) in g1.w_enc.iter().zip(&g0.w_enc).zip(&s.params.w_enc) {
            assert!((a - b - 0.25 * w).abs() < 1e-15);
        }
        for ((a, b), w) in g1.w_dec.iter().zip(&g0.w_dec).zip(&s.params.w_dec) {
            assert!((a - b - 0.25 * w).abs() < 1e-15);
        }
        assert_eq!(g1.b_enc, g0.b_enc);
    }

    #[test]
    fn adadelta_zero_gradient() {
        let mut s = AeState::new(AeConfig::new(2, 2)).unwrap();
        s.acc_grad.w_enc = vec![1.0; 4];
        let before = s.params.clone();
        s.adadelta_step(&AeParams::zeros(2, 2));
        assert_eq!(s.params, before);
        assert!(s.acc_grad.w_enc.iter().all(|&v| (v - 0.95).abs() < 1e-15));
    }

    #[test]
    fn adadelta_first_step_closed_form() {
        let mut s = zero_state(1, 1);
        let mut g = AeParams::zeros(1, 1);
        g.w_enc[0] = 0.3;
        s.adadelta_step(&g);
        let want = 1e-6f64.sqrt() / (0.05 * 0.09 + 1e-6f64).sqrt() * 0.3;
        assert!((s.params.w_enc[0] + want).abs() < 1e-15);
    }

    #[test]
    fn adadelta_repeated_gradient_grows_step() {
        for g0 in [1e-4, 1e-2, 0.3, 10.0, 1e3] {
            let mut s = zero_state(1, 1);
            let mut g = AeParams::zeros(1, 1);
            g.w_enc[0] = g0;
            s.adadelta_step(&g);
            let first = -s.params.w_enc[0];
            s.adadelta_step(&g);
            let second = -s.params.w_enc[0] - first;
            assert!(second >= first, "g={g0}: {second} < {first}");
        }
    }

    #[test]
    fn zero_epochs_returns_init() {
        let cfg = AeConfig { epochs: 0, seed: 2, ..AeConfig::new(4, 3) };
        let (s, curve) = train_ae(cfg, &[vec![0.1, 0.2, 0.3]]).unwrap();
        assert!(curve.is_empty());
        assert_eq!(s, AeState::new(cfg).unwrap());
    }

    #[test]
    fn tuned_table() {
        assert_eq!(AeConfig::tuned(true, 64), (0.005, 0.5, 1e-4));
        assert_eq!(AeConfig::tuned(false, 64), (0.01, 0.05, 1e-5));
        assert_eq!(AeConfig::tuned(true, 1024), (0.005, 0.1, 1e-5));
        assert_eq!(AeConfig::tuned(false, 1024), (0.005, 0.1, 1e-5));
    }
}
