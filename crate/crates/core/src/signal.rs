//! Synthetic BPSK/QPSK observations at each receiver node.
//!
//! A transmitter at a fixed position sends 16 random bits per sample. Each
//! node sees the waveform attenuated by log-distance path loss, with additive
//! white Gaussian noise and a random carrier phase offset. Every sample is 16
//! complex baseband values: one per BPSK symbol, or two half-symbol windows
//! per QPSK symbol. The classifier input interleaves, for each value, the
//! phase change from the previous value and the instantaneous power.

use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fnn::LabeledData;
use crate::graph::{NodeId, Position, Topology};
use crate::seed::{node_stream, Purpose};

pub const BITS_PER_SAMPLE: usize = 16;
pub const FEATURES: usize = 32;
/// Complex values per sample, for either scheme.
pub const WINDOWS: usize = FEATURES / 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModScheme {
    #[serde(rename = "BPSK")]
    Bpsk,
    #[serde(rename = "QPSK")]
    Qpsk,
}

impl ModScheme {
    pub const ALL: [ModScheme; 2] = [ModScheme::Bpsk, ModScheme::Qpsk];

    /// Classifier output index.
    pub fn index(self) -> usize {
        match self {
            ModScheme::Bpsk => 0,
            ModScheme::Qpsk => 1,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn bits_per_symbol(self) -> usize {
        self.index() + 1
    }

    /// Baseband values emitted per symbol.
    pub fn samples_per_symbol(self) -> usize {
        self.bits_per_symbol()
    }
}

impl fmt::Display for ModScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModScheme::Bpsk => "BPSK",
            ModScheme::Qpsk => "QPSK",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelParams {
    pub tx_position: Position,
    pub path_loss_exponent: f64,
    /// SNR at `reference_distance` from the transmitter.
    pub reference_snr_db: f64,
    pub reference_distance: f64,
    /// Standard deviation of the per-sample carrier phase offset, radians.
    pub phase_offset_sigma: f64,
    /// Noise variance relative to the nominal floor the SNR is quoted
    /// against; 0 gives a noiseless channel with unchanged signal gain.
    pub noise_power: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            tx_position: Position::new(0.0, 0.0),
            path_loss_exponent: 2.7,
            reference_snr_db: 25.0,
            reference_distance: 200.0,
            phase_offset_sigma: 0.1,
            noise_power: 1.0,
        }
    }
}

impl ChannelParams {
    pub fn noiseless(mut self) -> Self {
        self.noise_power = 0.0;
        self.phase_offset_sigma = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.path_loss_exponent > 0.0 && self.path_loss_exponent.is_finite()) {
            return Err(Error::config("path_loss_exponent", "must be positive"));
        }
        if !(self.reference_distance > 0.0 && self.reference_distance.is_finite()) {
            return Err(Error::config("reference_distance", "must be positive"));
        }
        if !self.reference_snr_db.is_finite() {
            return Err(Error::config("reference_snr_db", "must be finite"));
        }
        if !(self.phase_offset_sigma >= 0.0 && self.phase_offset_sigma.is_finite()) {
            return Err(Error::config("phase_offset_sigma", "must be non-negative"));
        }
        if !(self.noise_power >= 0.0 && self.noise_power.is_finite()) {
            return Err(Error::config("noise_power", "must be non-negative"));
        }
        if !self.tx_position.is_finite() {
            return Err(Error::config("tx_position", "must be finite"));
        }
        Ok(())
    }

    /// Log-distance SNR at `distance` metres from the transmitter.
    pub fn snr_db(&self, distance: f64) -> f64 {
        let d = distance.max(1e-6);
        self.reference_snr_db - 10.0 * self.path_loss_exponent * (d / self.reference_distance).log10()
    }

    pub fn snr_db_at(&self, position: &Position) -> f64 {
        self.snr_db(self.tx_position.distance(position))
    }

    /// Received symbol amplitude at `position`; noise floor has unit power.
    pub fn amplitude_at(&self, position: &Position) -> f64 {
        10f64.powf(self.snr_db_at(position) / 20.0)
    }
}

/// Received complex baseband for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Baseband {
    pub samples: Vec<Complex64>,
    pub samples_per_symbol: usize,
}

fn constellation_phase(scheme: ModScheme, bits: &[bool]) -> f64 {
    match (scheme, bits) {
        (ModScheme::Bpsk, [false]) => 0.0,
        (ModScheme::Bpsk, [true]) => PI,
        // Gray mapping: neighbouring phases differ in one bit
        (ModScheme::Qpsk, [false, false]) => FRAC_PI_4,
        (ModScheme::Qpsk, [false, true]) => 3.0 * FRAC_PI_4,
        (ModScheme::Qpsk, [true, true]) => 5.0 * FRAC_PI_4,
        (ModScheme::Qpsk, [true, false]) => 7.0 * FRAC_PI_4,
        _ => unreachable!("symbol width matches scheme"),
    }
}

/// Modulates 16 bits as seen by a receiver at `node_position`.
pub fn modulate<R: Rng + ?Sized>(
    bits: &[bool],
    scheme: ModScheme,
    channel: &ChannelParams,
    node_position: &Position,
    rng: &mut R,
) -> Result<Baseband> {
    if bits.len() != BITS_PER_SAMPLE {
        return Err(Error::BitCount {
            expected: BITS_PER_SAMPLE,
            got: bits.len(),
        });
    }
    let amplitude = channel.amplitude_at(node_position);
    let offset = if channel.phase_offset_sigma > 0.0 {
        Normal::new(0.0, channel.phase_offset_sigma)
            .expect("validated sigma")
            .sample(rng)
    } else {
        0.0
    };
    let noise = (channel.noise_power > 0.0)
        .then(|| Normal::new(0.0, (channel.noise_power / 2.0).sqrt()).expect("validated noise power"));

    let per_symbol = scheme.samples_per_symbol();
    let mut samples = Vec::with_capacity(WINDOWS);
    for symbol in bits.chunks(scheme.bits_per_symbol()) {
        let clean = Complex64::from_polar(amplitude, constellation_phase(scheme, symbol) + offset);
        for _ in 0..per_symbol {
            let z = match &noise {
                Some(n) => clean + Complex64::new(n.sample(rng), n.sample(rng)),
                None => clean,
            };
            samples.push(z);
        }
    }
    Ok(Baseband {
        samples,
        samples_per_symbol: per_symbol,
    })
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_phase(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    if a > PI {
        a - TAU
    } else {
        a
    }
}

/// Interleaved `[Δphase_0, power_0, Δphase_1, power_1, ...]`; the first
/// phase change is measured against phase 0.
pub fn extract_features(iq: &Baseband, scheme: ModScheme) -> Result<[f64; FEATURES]> {
    if iq.samples.len() != WINDOWS {
        return Err(Error::SampleLength {
            expected: WINDOWS,
            got: iq.samples.len(),
        });
    }
    if iq.samples_per_symbol != scheme.samples_per_symbol() {
        return Err(Error::Dimension {
            expected: scheme.samples_per_symbol(),
            got: iq.samples_per_symbol,
        });
    }
    let mut out = [0.0; FEATURES];
    let mut prev = 0.0;
    for (k, z) in iq.samples.iter().enumerate() {
        let phase = z.arg();
        out[2 * k] = wrap_phase(phase - prev);
        out[2 * k + 1] = z.norm_sqr();
        prev = phase;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: [f64; FEATURES],
    pub label: ModScheme,
}

pub fn draw_sample<R: Rng + ?Sized>(
    scheme: ModScheme,
    channel: &ChannelParams,
    position: &Position,
    rng: &mut R,
) -> Result<Sample> {
    let bits: Vec<bool> = (0..BITS_PER_SAMPLE).map(|_| rng.random()).collect();
    let iq = modulate(&bits, scheme, channel, position, rng)?;
    Ok(Sample {
        features: extract_features(&iq, scheme)?,
        label: scheme,
    })
}

/// `n` labels, as balanced as `n` allows, in random order.
fn balanced_labels<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<ModScheme> {
    let mut labels: Vec<ModScheme> = (0..n / 2).flat_map(|_| ModScheme::ALL).collect();
    if n % 2 == 1 {
        labels.push(if rng.random() { ModScheme::Qpsk } else { ModScheme::Bpsk });
    }
    labels.shuffle(rng);
    labels
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSizes {
    pub train: usize,
    pub test: usize,
}

impl Default for DatasetSizes {
    fn default() -> Self {
        DatasetSizes { train: 1000, test: 100 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeDataset {
    pub node: NodeId,
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Datasets {
    pub nodes: Vec<NodeDataset>,
    /// Every node's test samples, concatenated in node order.
    pub pooled_test: Vec<Sample>,
}

fn node_dataset(
    node: NodeId,
    position: &Position,
    channel: &ChannelParams,
    sizes: DatasetSizes,
    master_seed: u64,
) -> Result<NodeDataset> {
    let mut rng = node_stream(master_seed, Purpose::Data, node);
    let mut draw = |n: usize| -> Result<Vec<Sample>> {
        balanced_labels(n, &mut rng)
            .into_iter()
            .map(|scheme| draw_sample(scheme, channel, position, &mut rng))
            .collect()
    };
    let train = draw(sizes.train)?;
    let test = draw(sizes.test)?;
    Ok(NodeDataset { node, train, test })
}

/// Per-node train/test sets. Each node draws from its own stream keyed by
/// `(master_seed, node)`, so the result does not depend on thread scheduling.
pub fn build_datasets(
    topology: &Topology,
    channel: &ChannelParams,
    sizes: DatasetSizes,
    master_seed: u64,
) -> Result<Datasets> {
    channel.validate()?;
    let nodes = topology
        .positions()
        .par_iter()
        .enumerate()
        .map(|(node, pos)| node_dataset(node, pos, channel, sizes, master_seed))
        .collect::<Result<Vec<_>>>()?;
    let pooled_test = nodes.iter().flat_map(|d| d.test.iter().cloned()).collect();
    Ok(Datasets { nodes, pooled_test })
}

pub fn to_labeled(samples: &[Sample]) -> LabeledData {
    let flat: Vec<f64> = samples.iter().flat_map(|s| s.features).collect();
    let features = Array2::from_shape_vec((samples.len(), FEATURES), flat).expect("fixed width");
    LabeledData::new(features, samples.iter().map(|s| s.label.index()).collect()).expect("one label per row")
}

/// One line of a dataset dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub node: NodeId,
    pub label: ModScheme,
    pub features: [f64; FEATURES],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub master_seed: u64,
    pub node_count: usize,
    pub sizes: DatasetSizes,
    pub channel: ChannelParams,
}

fn write_records<'a>(path: &Path, records: impl Iterator<Item = (NodeId, &'a Sample)>) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = std::io::BufWriter::new(file);
    for (node, s) in records {
        let rec = SampleRecord {
            node,
            label: s.label,
            features: s.features,
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn read_records(path: &Path) -> Result<Vec<SampleRecord>> {
    let file = std::fs::File::open(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for line in std::io::BufReader::new(file).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

impl Datasets {
    /// Writes `train.jsonl`, `test.jsonl` and `manifest.json` into `dir`.
    pub fn dump(&self, dir: &Path, manifest: &DatasetManifest) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_records(
            &dir.join("train.jsonl"),
            self.nodes.iter().flat_map(|d| d.train.iter().map(move |s| (d.node, s))),
        )?;
        write_records(
            &dir.join("test.jsonl"),
            self.nodes.iter().flat_map(|d| d.test.iter().map(move |s| (d.node, s))),
        )?;
        std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(manifest)?)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<(Datasets, DatasetManifest)> {
        let manifest: DatasetManifest = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json"))?)?;
        let mut nodes: Vec<NodeDataset> = (0..manifest.node_count)
            .map(|node| NodeDataset {
                node,
                train: Vec::new(),
                test: Vec::new(),
            })
            .collect();
        for (file, is_train) in [("train.jsonl", true), ("test.jsonl", false)] {
            for rec in read_records(&dir.join(file))? {
                let slot = nodes
                    .get_mut(rec.node)
                    .ok_or_else(|| Error::config("node", format!("record for node {} outside manifest", rec.node)))?;
                let sample = Sample {
                    features: rec.features,
                    label: rec.label,
                };
                if is_train {
                    slot.train.push(sample);
                } else {
                    slot.test.push(sample);
                }
            }
        }
        let pooled_test = nodes.iter().flat_map(|d| d.test.iter().cloned()).collect();
        Ok((Datasets { nodes, pooled_test }, manifest))
    }
}
