//! Python bindings: spike coding, the spiking network, the sparse
//! auto-encoder, analysis measures and the linear classifier.
//!
//! Arrays cross the boundary as flat Python lists of floats.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use spikefeat::classify::{evaluate, train_linear, ImageDescriptor, SvmOptions};
use spikefeat::coding::{self, ColorStrategy, DogParams};
use spikefeat::dictionary::{Dictionary, Extractor};
use spikefeat::{ae, data, metrics, snn};

fn to_py(e: spikefeat::Error) -> PyErr {
    match e {
        spikefeat::Error::Io { .. } | spikefeat::Error::MissingFile { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn inhibition(on: bool) -> snn::Inhibition {
    if on {
        snn::Inhibition::On
    } else {
        snn::Inhibition::Off
    }
}

/// Latency code: `(time, input)` pairs sorted by time.
#[pyfunction]
#[pyo3(signature = (values, duration = 1.0))]
fn encode_latency(values: Vec<f64>, duration: f64) -> PyResult<Vec<(f64, usize)>> {
    let t = coding::encode_latency(&values, duration).map_err(to_py)?;
    Ok(t.events.iter().map(|e| (e.time, e.input)).collect())
}

#[pyfunction]
fn decode_features(spikes: Vec<Option<f64>>, t_min: f64, t_max: f64) -> PyResult<Vec<f64>> {
    coding::decode_features(&spikes, t_min, t_max).map_err(to_py)
}

#[pyfunction]
fn gaussian_kernel(size: usize, sigma: f64) -> PyResult<Vec<f64>> {
    coding::gaussian_kernel(size, sigma).map_err(to_py)
}

/// Codes an HWC image; returns one flat HWC list per sub-stack.
#[pyfunction]
#[pyo3(signature = (pixels, height, width, channels, strategy = "grayscale"))]
fn encode_image(pixels: Vec<f64>, height: usize, width: usize, channels: usize, strategy: &str) -> PyResult<Vec<Vec<f64>>> {
    let s: ColorStrategy = strategy.parse().map_err(to_py)?;
    let img = data::Image::new(height, width, channels, pixels).map_err(to_py)?;
    let st = coding::encode_image(&img, s, &DogParams::default()).map_err(to_py)?;
    Ok(st.parts.into_iter().map(|p| p.data).collect())
}

/// Synthetic striped images: `(images, labels)` with flat HWC RGB images.
#[pyfunction]
fn make_synthetic(n_images: usize, side: usize, n_classes: usize, seed: u64) -> PyResult<(Vec<Vec<f64>>, Vec<usize>)> {
    let set = data::make_synthetic(n_images, side, n_classes, seed).map_err(to_py)?;
    let labels = set.labels();
    Ok((set.images.into_iter().map(|i| i.pixels.data).collect(), labels))
}

#[pyfunction]
fn sparseness(f: Vec<f64>) -> PyResult<f64> {
    metrics::sparseness(&f).map_err(to_py)
}

/// Coherence of filter rows: `(matrix, mean, max, dead)`.
#[pyfunction]
fn coherence(filters: Vec<Vec<f64>>) -> (Vec<Vec<f64>>, f64, f64, usize) {
    let rows: Vec<&[f64]> = filters.iter().map(Vec::as_slice).collect();
    let r = metrics::coherence_matrix(&rows);
    let m = r.matrix.chunks(r.n.max(1)).map(<[f64]>::to_vec).take(r.n).collect();
    (m, r.mean, r.max, r.dead)
}

/// Trains a standardized one-vs-rest linear SVM and returns test accuracy.
#[pyfunction]
#[pyo3(signature = (train_x, train_y, test_x, test_y, c = 1.0))]
fn linear_accuracy(
    train_x: Vec<Vec<f64>>,
    train_y: Vec<usize>,
    test_x: Vec<Vec<f64>>,
    test_y: Vec<usize>,
    c: f64,
) -> PyResult<f64> {
    let wrap = |xs: Vec<Vec<f64>>, ys: Vec<usize>| -> Vec<ImageDescriptor> {
        xs.into_iter().zip(ys).map(|(values, label)| ImageDescriptor { values, label }).collect()
    };
    let tr = wrap(train_x, train_y);
    let te = wrap(test_x, test_y);
    let n_classes = tr.iter().chain(&te).map(|d| d.label + 1).max().unwrap_or(0);
    let model = train_linear(&tr, Some(n_classes), &SvmOptions { c, ..SvmOptions::default() }).map_err(to_py)?;
    Ok(evaluate(&model, &te).map_err(to_py)?.accuracy)
}

/// Single-layer STDP spiking network.
#[pyclass(name = "Snn")]
struct PySnn {
    inner: snn::SnnState,
}

#[pymethods]
impl PySnn {
    #[new]
    #[pyo3(signature = (n_f, n_inputs, seed = 0, beta = 1.0))]
    fn new(n_f: usize, n_inputs: usize, seed: u64, beta: f64) -> PyResult<Self> {
        let cfg = snn::SnnConfig {
            seed,
            beta_plus: beta,
            beta_minus: beta,
            ..snn::SnnConfig::new(n_f, n_inputs)
        };
        Ok(Self {
            inner: snn::SnnState::new(cfg).map_err(to_py)?,
        })
    }

    /// Trains on flattened patches; returns total wins per neuron.
    fn train(&mut self, patches: Vec<Vec<f64>>, epochs: usize) -> PyResult<Vec<u64>> {
        let log = snn::train_snn(&mut self.inner, &patches, epochs).map_err(to_py)?;
        Ok(log.total_wins())
    }

    /// `(winner, fire_time)` under winner-take-all, both `None` when silent.
    fn simulate(&self, values: Vec<f64>) -> PyResult<(Option<usize>, Option<f64>)> {
        let t = coding::encode_latency(&values, self.inner.config.t_duration).map_err(to_py)?;
        let r = self.inner.simulate_wta(&t).map_err(to_py)?;
        Ok((r.winner, r.fire_time))
    }

    #[pyo3(signature = (values, inhibition = true))]
    fn extract(&self, values: Vec<f64>, inhibition: bool) -> PyResult<Vec<f64>> {
        self.inner.extract(&values, self::inhibition(inhibition)).map_err(to_py)
    }

    #[getter]
    fn weights(&self) -> Vec<Vec<f64>> {
        self.inner.weights.chunks(self.inner.config.n_inputs).map(<[f64]>::to_vec).collect()
    }

    #[getter]
    fn thresholds(&self) -> Vec<f64> {
        self.inner.thresholds.clone()
    }

    #[getter]
    fn n_f(&self) -> usize {
        self.inner.config.n_f
    }

    /// Saves as a single-part grayscale dictionary with patch side `side`.
    fn save(&self, path: PathBuf, side: usize) -> PyResult<()> {
        Dictionary::new(ColorStrategy::Grayscale, side, vec![Extractor::Snn(self.inner.clone())])
            .and_then(|d| d.write(&path))
            .map_err(to_py)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let d = Dictionary::read(&path).map_err(to_py)?;
        match d.parts.into_iter().next() {
            Some(Extractor::Snn(s)) => Ok(Self { inner: s }),
            _ => Err(PyValueError::new_err("dictionary does not hold a spiking network")),
        }
    }
}

/// Sparse auto-encoder.
#[pyclass(name = "Ae")]
struct PyAe {
    inner: ae::AeState,
}

#[pymethods]
impl PyAe {
    #[new]
    #[pyo3(signature = (n_f, n_inputs, seed = 0, rho = 0.01, gamma = 0.05, lam = 1e-5, epochs = 100, batch_size = 128))]
    #[allow(clippy::too_many_arguments)]
    fn new(n_f: usize, n_inputs: usize, seed: u64, rho: f64, gamma: f64, lam: f64, epochs: usize, batch_size: usize) -> PyResult<Self> {
        let cfg = ae::AeConfig {
            seed,
            rho,
            gamma,
            lambda: lam,
            epochs,
            batch_size,
            ..ae::AeConfig::new(n_f, n_inputs)
        };
        Ok(Self {
            inner: ae::AeState::new(cfg).map_err(to_py)?,
        })
    }

    /// Trains from the configured initialization; returns the per-epoch loss.
    fn train(&mut self, patches: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        let (state, curve) = ae::train_ae(self.inner.config, &patches).map_err(to_py)?;
        self.inner = state;
        Ok(curve)
    }

    fn encode(&self, values: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.encode(&values).map_err(to_py)
    }

    fn decode(&self, z: Vec<f64>) -> Vec<f64> {
        self.inner.decode(&z)
    }

    /// `(total, mse, l2, kl)` on a batch of flattened patches.
    fn loss(&self, batch: Vec<Vec<f64>>) -> PyResult<(f64, f64, f64, f64)> {
        let flat: Vec<f64> = batch.into_iter().flatten().collect();
        let l = self.inner.loss(&flat).map_err(to_py)?;
        Ok((l.total, l.mse, l.l2, l.kl))
    }
}

#[pymodule]
pub fn spikefeat_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(encode_latency, m)?)?;
    m.add_function(wrap_pyfunction!(decode_features, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(encode_image, m)?)?;
    m.add_function(wrap_pyfunction!(make_synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(sparseness, m)?)?;
    m.add_function(wrap_pyfunction!(coherence, m)?)?;
    m.add_function(wrap_pyfunction!(linear_accuracy, m)?)?;
    m.add_class::<PySnn>()?;
    m.add_class::<PyAe>()?;
    Ok(())
}
