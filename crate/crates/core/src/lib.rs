//! Unsupervised visual feature learning with a single-layer STDP spiking
//! network, compared against a sparse auto-encoder under one classification
//! protocol.
//!
//! The modules follow the pipeline: [`data`] loads images and patches,
//! [`coding`] turns them into on/off channels and spike latencies, [`snn`]
//! and [`ae`] learn dictionaries, [`classify`] pools features and trains a
//! linear classifier, and [`metrics`] measures feature quality. [`cli`]
//! drives whole experiments from a [`config::RunConfig`].

pub mod ae;
mod binio;
pub mod classify;
pub mod cli;
pub mod coding;
pub mod config;
pub mod data;
pub mod dictionary;
pub mod error;
pub mod metrics;
pub mod pipeline;
pub mod rng;
pub mod snn;

pub use ae::{AeConfig, AeState};
pub use classify::{ImageDescriptor, LinearModel, Protocol, SvmOptions};
pub use coding::{ChannelStack, CodedSet, ColorStrategy, DogParams, SpikeEvent, SpikeTrain};
pub use config::RunConfig;
pub use data::{Image, LabeledImage, LabeledImageSet, Split};
pub use dictionary::{Dictionary, Extractor};
pub use error::{Error, Result};
pub use snn::{Inhibition, SnnConfig, SnnState};
