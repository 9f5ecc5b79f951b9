//! Trained feature extractors and their on-disk format.
//!
//! A [`Dictionary`] bundles one extractor per coded sub-stack (two for the
//! grayscale + color strategy, one otherwise) so that classification and
//! analysis treat SNN and AE dictionaries uniformly.
//!
//! File layout (all little-endian):
//!
//! ```text
//! "SPKFDICT" | version u32 | strategy u32 | patch side u32 | n_parts u32
//! per part: kind u32 (1 = snn, 2 = ae) | config block | parameter blocks (f64)
//! ```

use std::path::Path;

use crate::ae::{AeConfig, AeParams, AeState};
use crate::binio::{self, ByteReader, ByteWriter};
use crate::coding::ColorStrategy;
use crate::error::{Error, Result};
use crate::snn::{Inhibition, SnnConfig, SnnState};

const MAGIC: &[u8; 8] = b"SPKFDICT";
const VERSION: u32 = 1;
const KIND_SNN: u32 = 1;
const KIND_AE: u32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum Extractor {
    Snn(SnnState),
    Ae(AeState),
}

impl Extractor {
    pub fn n_f(&self) -> usize {
        match self {
            Extractor::Snn(s) => s.config.n_f,
            Extractor::Ae(a) => a.config.n_f,
        }
    }

    pub fn n_inputs(&self) -> usize {
        match self {
            Extractor::Snn(s) => s.config.n_inputs,
            Extractor::Ae(a) => a.config.n_inputs,
        }
    }

    /// Feature vector for one flattened patch. Inhibition only affects SNNs.
    pub fn features(&self, values: &[f64], inhibition: Inhibition) -> Result<Vec<f64>> {
        match self {
            Extractor::Snn(s) => s.extract(values, inhibition),
            Extractor::Ae(a) => a.encode(values),
        }
    }

    /// Filter rows (`n_f` vectors of `n_inputs`): synaptic weights or encoder rows.
    pub fn filters(&self) -> Vec<&[f64]> {
        let (w, n) = match self {
            Extractor::Snn(s) => (&s.weights, s.config.n_inputs),
            Extractor::Ae(a) => (&a.params.w_enc, a.config.n_inputs),
        };
        w.chunks_exact(n).collect()
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Extractor::Snn(_) => "snn",
            Extractor::Ae(_) => "ae",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    pub strategy: ColorStrategy,
    pub patch_side: usize,
    pub parts: Vec<Extractor>,
}

impl Dictionary {
    pub fn new(strategy: ColorStrategy, patch_side: usize, parts: Vec<Extractor>) -> Result<Self> {
        let chans = strategy.part_channels();
        if chans.len() != parts.len() {
            return Err(Error::InvalidParam(format!(
                "strategy {strategy} needs {} extractors, got {}",
                chans.len(),
                parts.len()
            )));
        }
        for (c, p) in chans.iter().zip(&parts) {
            let want = patch_side * patch_side * c;
            if p.n_inputs() != want {
                return Err(Error::Dimension {
                    expected: want,
                    got: p.n_inputs(),
                });
            }
        }
        Ok(Self {
            strategy,
            patch_side,
            parts,
        })
    }

    /// Total feature count across parts.
    pub fn n_f(&self) -> usize {
        self.parts.iter().map(Extractor::n_f).sum()
    }

    pub fn kind(&self) -> &'static str {
        self.parts.first().map_or("empty", Extractor::kind)
    }

    /// Concatenated features of one patch given per-part flattened values.
    pub fn features(&self, part_values: &[&[f64]], inhibition: Inhibition) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.n_f());
        for (e, v) in self.parts.iter().zip(part_values) {
            out.extend(e.features(v, inhibition)?);
        }
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = ByteWriter::new();
        w.bytes(MAGIC);
        w.u32(VERSION);
        w.u32(self.strategy.tag());
        w.u32(self.patch_side as u32);
        w.u32(self.parts.len() as u32);
        for p in &self.parts {
            match p {
                Extractor::Snn(s) => write_snn(&mut w, s),
                Extractor::Ae(a) => write_ae(&mut w, a),
            }
        }
        w.write(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = binio::read_all(path)?;
        let mut r = ByteReader::new(&bytes, path);
        r.expect_magic(MAGIC)?;
        let version = r.u32()?;
        if version != VERSION {
            return Err(r.error(format!("unsupported version {version}")));
        }
        let strategy = ColorStrategy::from_tag(r.u32()?).ok_or_else(|| r.error("unknown strategy tag"))?;
        let patch_side = r.u32()? as usize;
        let n_parts = r.u32()? as usize;
        let mut parts = Vec::with_capacity(n_parts);
        for _ in 0..n_parts {
            parts.push(match r.u32()? {
                KIND_SNN => Extractor::Snn(read_snn(&mut r)?),
                KIND_AE => Extractor::Ae(read_ae(&mut r)?),
                k => return Err(r.error(format!("unknown extractor kind {k}"))),
            });
        }
        r.finish()?;
        Dictionary::new(strategy, patch_side, parts)
    }
}

fn write_snn(w: &mut ByteWriter, s: &SnnState) {
    let c = &s.config;
    w.u32(KIND_SNN);
    w.u64(c.n_f as u64);
    w.u64(c.n_inputs as u64);
    for v in [
        c.v_th0,
        c.v_rest,
        c.w_min,
        c.w_max,
        c.d_min,
        c.d_max,
        c.alpha_plus,
        c.alpha_minus,
        c.beta_plus,
        c.beta_minus,
        c.t_obj,
        c.eta,
        c.t_duration,
    ] {
        w.f64(v);
    }
    w.u64(c.seed);
    w.f64s(&s.weights);
    w.f64s(&s.delays);
    w.f64s(&s.thresholds);
}

fn read_snn(r: &mut ByteReader) -> Result<SnnState> {
    let n_f = r.usize()?;
    let n_inputs = r.usize()?;
    let mut v = [0.0; 13];
    for x in v.iter_mut() {
        *x = r.f64()?;
    }
    let config = SnnConfig {
        n_f,
        n_inputs,
        v_th0: v[0],
        v_rest: v[1],
        w_min: v[2],
        w_max: v[3],
        d_min: v[4],
        d_max: v[5],
        alpha_plus: v[6],
        alpha_minus: v[7],
        beta_plus: v[8],
        beta_minus: v[9],
        t_obj: v[10],
        eta: v[11],
        t_duration: v[12],
        seed: r.u64()?,
    };
    let n = n_f * n_inputs;
    Ok(SnnState {
        config,
        weights: r.f64s(n)?,
        delays: r.f64s(n)?,
        thresholds: r.f64s(n_f)?,
    })
}

fn write_ae(w: &mut ByteWriter, a: &AeState) {
    let c = &a.config;
    w.u32(KIND_AE);
    w.u64(c.n_f as u64);
    w.u64(c.n_inputs as u64);
    for v in [c.rho, c.gamma, c.lambda, c.lr] {
        w.f64(v);
    }
    w.u64(c.epochs as u64);
    w.u64(c.batch_size as u64);
    w.f64(c.ada_decay);
    w.f64(c.ada_eps);
    w.u64(c.seed);
    for p in [&a.params, &a.acc_grad, &a.acc_update] {
        for b in p.blocks() {
            w.f64s(b);
        }
    }
}

fn read_ae(r: &mut ByteReader) -> Result<AeState> {
    let n_f = r.usize()?;
    let n_inputs = r.usize()?;
    let (rho, gamma, lambda, lr) = (r.f64()?, r.f64()?, r.f64()?, r.f64()?);
    let config = AeConfig {
        n_f,
        n_inputs,
        rho,
        gamma,
        lambda,
        lr,
        epochs: r.usize()?,
        batch_size: r.usize()?,
        ada_decay: r.f64()?,
        ada_eps: r.f64()?,
        seed: r.u64()?,
    };
    let read_params = |r: &mut ByteReader| -> Result<AeParams> {
        Ok(AeParams {
            w_enc: r.f64s(n_f * n_inputs)?,
            b_enc: r.f64s(n_f)?,
            w_dec: r.f64s(n_inputs * n_f)?,
            b_dec: r.f64s(n_inputs)?,
        })
    };
    Ok(AeState {
        config,
        params: read_params(r)?,
        acc_grad: read_params(r)?,
        acc_update: read_params(r)?,
    })
}
