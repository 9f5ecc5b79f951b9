//! Single-layer spiking network: integrate-and-fire neurons without leak,
//! per-synapse delays, winner-take-all inhibition, multiplicative STDP and
//! threshold homeostasis.
//!
//! Neurons never interact except through inhibition, so each neuron's first
//! threshold crossing can be computed independently from its own sorted
//! arrival list; the winner is the earliest crossing, lowest index on ties.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::coding::{decode_features, encode_latency, SpikeTrain};
use crate::error::{Error, Result};
use crate::rng::{self, stream};

/// Lower bound kept on every threshold.
pub const THRESHOLD_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnnConfig {
    pub n_f: usize,
    pub n_inputs: usize,
    /// Initial threshold (mV).
    pub v_th0: f64,
    pub v_rest: f64,
    pub w_min: f64,
    pub w_max: f64,
    pub d_min: f64,
    pub d_max: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    /// Objective firing time for homeostasis.
    pub t_obj: f64,
    /// Threshold learning rate.
    pub eta: f64,
    /// Input presentation window.
    pub t_duration: f64,
    pub seed: u64,
}

impl SnnConfig {
    /// Default parameters for a layer of `n_f` neurons with `n_inputs` synapses each.
    pub fn new(n_f: usize, n_inputs: usize) -> Self {
        Self {
            n_f,
            n_inputs,
            v_th0: 20.0,
            v_rest: 0.0,
            w_min: 0.0,
            w_max: 1.0,
            d_min: 0.0,
            d_max: 0.01,
            alpha_plus: 0.001,
            alpha_minus: 0.001,
            beta_plus: 1.0,
            beta_minus: 1.0,
            t_obj: 0.7,
            eta: 0.001,
            t_duration: 1.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParam(m.to_string()));
        if self.n_f == 0 || self.n_inputs == 0 {
            return bad("n_f and n_inputs must be positive");
        }
        if !(self.w_min < self.w_max) {
            return bad("w_min must be < w_max");
        }
        if !(self.d_min >= 0.0 && self.d_min <= self.d_max) {
            return bad("delays must satisfy 0 <= d_min <= d_max");
        }
        if !(self.t_obj > 0.0 && self.t_obj < self.t_duration) {
            return bad("t_obj must lie in (0, t_duration)");
        }
        if !(self.alpha_plus > 0.0 && self.alpha_minus > 0.0 && self.beta_plus > 0.0 && self.beta_minus > 0.0 && self.eta > 0.0) {
            return bad("learning rates and slopes must be positive");
        }
        if !(self.v_th0 > self.v_rest) {
            return bad("v_th0 must exceed v_rest");
        }
        Ok(())
    }

    /// Range of output spike times: `[d_min, t_duration + d_max]`.
    pub fn output_window(&self) -> (f64, f64) {
        (self.d_min, self.t_duration + self.d_max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnnState {
    pub config: SnnConfig,
    /// Row-major `n_f × n_inputs`.
    pub weights: Vec<f64>,
    /// Row-major `n_f × n_inputs`, fixed after init.
    pub delays: Vec<f64>,
    pub thresholds: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inhibition {
    On,
    Off,
}

/// Outcome of one presentation under winner-take-all.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimResult {
    pub winner: Option<usize>,
    pub fire_time: Option<f64>,
}

impl SimResult {
    const NONE: SimResult = SimResult {
        winner: None,
        fire_time: None,
    };
}

/// Multiplicative STDP: potentiation when the input arrived no later than
/// the output spike, depression otherwise (including `t_pre = +inf`).
pub fn stdp_delta(w: f64, t_pre: f64, t_post: f64, cfg: &SnnConfig) -> f64 {
    let range = cfg.w_max - cfg.w_min;
    if t_post >= t_pre {
        cfg.alpha_plus * (-cfg.beta_plus * (w - cfg.w_min) / range).exp()
    } else {
        -cfg.alpha_minus * (-cfg.beta_minus * (cfg.w_max - w) / range).exp()
    }
}

/// Homeostatic threshold changes for one sample. The winner moves by
/// `-eta * (t_fire - t_obj) + eta`, everyone else by `-eta / (n_f - 1)`.
/// Nothing changes when no neuron fired.
pub fn threshold_deltas(winner: Option<usize>, fire_time: f64, cfg: &SnnConfig) -> Vec<f64> {
    let n = cfg.n_f;
    let Some(win) = winner else {
        return vec![0.0; n];
    };
    let others = if n > 1 { -cfg.eta / (n - 1) as f64 } else { 0.0 };
    (0..n)
        .map(|i| {
            if i == win {
                -cfg.eta * (fire_time - cfg.t_obj) + cfg.eta
            } else {
                others
            }
        })
        .collect()
}

impl SnnState {
    /// Uniform weights in `[w_min, w_max]`, uniform delays in `[d_min, d_max]`,
    /// thresholds at `v_th0`.
    pub fn new(config: SnnConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = rng::seeded(config.seed, stream::SNN_INIT);
        let n = config.n_f * config.n_inputs;
        let weights = (0..n).map(|_| rng.gen_range(config.w_min..=config.w_max)).collect();
        let delays = (0..n).map(|_| rng.gen_range(config.d_min..=config.d_max)).collect();
        Ok(Self {
            config,
            weights,
            delays,
            thresholds: vec![config.v_th0; config.n_f],
        })
    }

    pub fn n_f(&self) -> usize {
        self.config.n_f
    }

    pub fn n_inputs(&self) -> usize {
        self.config.n_inputs
    }

    pub fn weight_row(&self, i: usize) -> &[f64] {
        let n = self.config.n_inputs;
        &self.weights[i * n..(i + 1) * n]
    }

    fn check(&self, train: &SpikeTrain) -> Result<()> {
        if train.n_inputs != self.config.n_inputs {
            return Err(Error::Dimension {
                expected: self.config.n_inputs,
                got: train.n_inputs,
            });
        }
        Ok(())
    }

    /// First time neuron `i` reaches threshold, considering only arrivals
    /// strictly before `horizon`.
    fn first_crossing(
        &self,
        i: usize,
        train: &SpikeTrain,
        horizon: f64,
        arrivals: &mut Vec<(f64, usize)>,
    ) -> Option<f64> {
        let n = self.config.n_inputs;
        let delays = &self.delays[i * n..(i + 1) * n];
        let weights = &self.weights[i * n..(i + 1) * n];
        arrivals.clear();
        arrivals.extend(
            train
                .events
                .iter()
                .map(|e| (e.time + delays[e.input], e.input))
                .filter(|&(t, _)| t < horizon),
        );
        arrivals.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let threshold = self.thresholds[i];
        let mut v = self.config.v_rest;
        for &(t, j) in arrivals.iter() {
            v += weights[j];
            if v >= threshold {
                return Some(t);
            }
        }
        None
    }

    /// Winner-take-all presentation: at most one output spike.
    pub fn simulate_wta(&self, train: &SpikeTrain) -> Result<SimResult> {
        self.check(train)?;
        let mut arrivals = Vec::with_capacity(train.events.len());
        let mut best = SimResult::NONE;
        let mut horizon = f64::INFINITY;
        for i in 0..self.config.n_f {
            if let Some(t) = self.first_crossing(i, train, horizon, &mut arrivals) {
                // strict `<` in the horizon keeps the lowest index on ties
                horizon = t;
                best = SimResult {
                    winner: Some(i),
                    fire_time: Some(t),
                };
            }
        }
        Ok(best)
    }

    /// Presentation without inhibition: each neuron's first spike time.
    pub fn simulate_free(&self, train: &SpikeTrain) -> Result<Vec<Option<f64>>> {
        self.check(train)?;
        let mut arrivals = Vec::with_capacity(train.events.len());
        Ok((0..self.config.n_f)
            .map(|i| self.first_crossing(i, train, f64::INFINITY, &mut arrivals))
            .collect())
    }

    /// First spike time per neuron under the given inhibition mode.
    pub fn simulate(&self, train: &SpikeTrain, inhibition: Inhibition) -> Result<Vec<Option<f64>>> {
        match inhibition {
            Inhibition::Off => self.simulate_free(train),
            Inhibition::On => {
                let r = self.simulate_wta(train)?;
                let mut out = vec![None; self.config.n_f];
                if let Some(w) = r.winner {
                    out[w] = r.fire_time;
                }
                Ok(out)
            }
        }
    }

    /// One training step: WTA simulation, STDP on the winner's synapses,
    /// then homeostasis over the whole layer.
    pub fn present(&mut self, train: &SpikeTrain) -> Result<SimResult> {
        let result = self.simulate_wta(train)?;
        let (Some(win), Some(t_post)) = (result.winner, result.fire_time) else {
            return Ok(result);
        };
        let cfg = self.config;
        let n = cfg.n_inputs;
        let mut t_pre = vec![f64::INFINITY; n];
        let delays = &self.delays[win * n..(win + 1) * n];
        for e in &train.events {
            t_pre[e.input] = e.time + delays[e.input];
        }
        for (w, &tp) in self.weights[win * n..(win + 1) * n].iter_mut().zip(&t_pre) {
            *w = (*w + stdp_delta(*w, tp, t_post, &cfg)).clamp(cfg.w_min, cfg.w_max);
        }
        for (th, d) in self.thresholds.iter_mut().zip(threshold_deltas(Some(win), t_post, &cfg)) {
            *th = (*th + d).max(THRESHOLD_FLOOR);
        }
        Ok(result)
    }

    /// Latency-codes `values` and returns decoded feature values.
    pub fn extract(&self, values: &[f64], inhibition: Inhibition) -> Result<Vec<f64>> {
        let train = encode_latency(values, self.config.t_duration)?;
        let spikes = self.simulate(&train, inhibition)?;
        let (lo, hi) = self.config.output_window();
        decode_features(&spikes, lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Presentations that produced an output spike.
    pub spikes: usize,
    pub wins: Vec<u64>,
    pub threshold_mean: f64,
    pub threshold_min: f64,
    pub threshold_max: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochStats>,
}

impl TrainingLog {
    /// Total wins per neuron over all epochs.
    pub fn total_wins(&self) -> Vec<u64> {
        let n = self.epochs.first().map_or(0, |e| e.wins.len());
        let mut out = vec![0u64; n];
        for e in &self.epochs {
            for (o, w) in out.iter_mut().zip(&e.wins) {
                *o += w;
            }
        }
        out
    }

    /// Neurons that never won a presentation.
    pub fn silent_neurons(&self) -> Vec<usize> {
        self.total_wins()
            .iter()
            .enumerate()
            .filter(|(_, &w)| w == 0)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Trains on flattened patches (values in `[0, 1]`), reshuffling the
/// presentation order every epoch from the config seed.
pub fn train_snn(state: &mut SnnState, patches: &[Vec<f64>], epochs: usize) -> Result<TrainingLog> {
    let trains = patches
        .iter()
        .map(|p| {
            if p.len() != state.n_inputs() {
                return Err(Error::Dimension {
                    expected: state.n_inputs(),
                    got: p.len(),
                });
            }
            encode_latency(p, state.config.t_duration)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rng = rng::seeded(state.config.seed, stream::SNN_SHUFFLE);
    let mut order: Vec<usize> = (0..trains.len()).collect();
    let mut log = TrainingLog::default();
    for epoch in 0..epochs {
        order.shuffle(&mut rng);
        let mut wins = vec![0u64; state.n_f()];
        let mut spikes = 0;
        for &k in &order {
            if let Some(w) = state.present(&trains[k])?.winner {
                wins[w] += 1;
                spikes += 1;
            }
        }
        let th = &state.thresholds;
        log.epochs.push(EpochStats {
            epoch,
            spikes,
            wins,
            threshold_mean: th.iter().sum::<f64>() / th.len() as f64,
            threshold_min: th.iter().cloned().fold(f64::INFINITY, f64::min),
            threshold_max: th.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        });
    }
    Ok(log)
}
