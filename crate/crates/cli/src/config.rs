//! Flat JSON experiment configuration.
//!
//! Resolution order: preset defaults, then the config file, then command-line
//! flags. Budgets left unset fall back to the per-topology defaults. The
//! resolved config is what gets written as `manifest.json`, so feeding a
//! manifest back in reproduces the run.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dfljam_core::attack::{Algorithm, Scenario};
use dfljam_core::dfl::ConvergenceConfig;
use dfljam_core::fnn::{FnnSpec, TrainConfig};
use dfljam_core::graph::{LayoutParams, Position, Topology, TopologyKind, DEFAULT_RESAMPLE_CAP};
use dfljam_core::signal::{ChannelParams, DatasetSizes};
use dfljam_core::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Full scale: 1000 training samples per node, up to 1000 rounds.
    Paper,
    /// 300 training samples per node, up to 300 rounds.
    Desk,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Preset::Paper),
            "desk" => Ok(Preset::Desk),
            _ => Err(Error::config("preset", format!("expected paper or desk, got `{s}`"))),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Paper => "paper",
            Preset::Desk => "desk",
        })
    }
}

/// Default `(M_b, M_d)` for a topology.
pub fn default_budgets(kind: TopologyKind) -> (usize, usize) {
    match kind {
        TopologyKind::Line | TopologyKind::Star => (2, 4),
        TopologyKind::Ring => (4, 8),
        TopologyKind::Grid | TopologyKind::Random | TopologyKind::Explicit => (10, 20),
    }
}

pub const DEFAULT_JAMMERS: usize = 2;
pub const DEFAULT_JAMMING_RANGE: f64 = 200.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub seed: u64,

    pub topology: TopologyKind,
    pub topology_file: Option<PathBuf>,
    pub comm_range: f64,
    pub spacing: f64,
    pub random_nodes: usize,
    pub area_min: f64,
    pub area_max: f64,

    pub tx_position: Position,
    pub path_loss_exponent: f64,
    pub reference_snr_db: f64,
    pub reference_distance: f64,
    pub phase_offset_sigma: f64,
    pub noise_power: f64,
    pub train_samples: usize,
    pub test_samples: usize,

    pub hidden_sizes: Vec<usize>,
    pub dropout_rate: f64,
    pub learning_rate: f64,
    pub rms_decay: f64,
    pub rms_epsilon: f64,
    pub batch_size: usize,
    pub epochs_per_round: usize,

    pub convergence_epsilon: f64,
    pub window_m: usize,
    pub max_rounds: usize,

    pub scenario: Scenario,
    pub algo: Algorithm,
    /// Scenario 1 budget: jammed undirected links.
    pub mb: usize,
    /// Scenario 2 budget: jammed directed links.
    pub md: usize,
    /// Number of jammers.
    pub na: usize,
    /// Jamming range, meters.
    pub rj: f64,
}

impl ExperimentConfig {
    pub fn preset(preset: Preset, topology: TopologyKind) -> Self {
        let layout = LayoutParams::default();
        let channel = ChannelParams::default();
        let spec = FnnSpec::default();
        let train = TrainConfig::default();
        let conv = ConvergenceConfig::default();
        let (train_samples, max_rounds) = match preset {
            Preset::Paper => (DatasetSizes::default().train, conv.max_rounds),
            Preset::Desk => (300, 300),
        };
        let (mb, md) = default_budgets(topology);
        ExperimentConfig {
            preset,
            seed: 1,
            topology,
            topology_file: None,
            comm_range: layout.comm_range,
            spacing: layout.spacing,
            random_nodes: layout.random_nodes,
            area_min: layout.area_min,
            area_max: layout.area_max,
            tx_position: channel.tx_position,
            path_loss_exponent: channel.path_loss_exponent,
            reference_snr_db: channel.reference_snr_db,
            reference_distance: channel.reference_distance,
            phase_offset_sigma: channel.phase_offset_sigma,
            noise_power: channel.noise_power,
            train_samples,
            test_samples: DatasetSizes::default().test,
            hidden_sizes: spec.hidden_sizes,
            dropout_rate: spec.dropout_rate,
            learning_rate: train.learning_rate,
            rms_decay: train.rms_decay,
            rms_epsilon: train.rms_epsilon,
            batch_size: train.batch_size,
            epochs_per_round: train.epochs_per_round,
            convergence_epsilon: conv.epsilon,
            window_m: conv.window_m,
            max_rounds,
            scenario: Scenario::S1,
            algo: Algorithm::Mcba,
            mb,
            md,
            na: DEFAULT_JAMMERS,
            rj: DEFAULT_JAMMING_RANGE,
        }
    }

    /// Applies `overrides` (file values, then flags) on top of a preset.
    /// `preset` and `topology` in the overrides select the base; budgets not
    /// overridden follow the chosen topology. A topology file without a
    /// topology kind counts as `explicit`.
    pub fn resolve(overrides: &Map<String, Value>) -> Result<Self> {
        let pick = |key: &str| -> Result<Option<String>> {
            match overrides.get(key) {
                None | Some(Value::Null) => Ok(None),
                Some(Value::String(s)) => Ok(Some(s.clone())),
                Some(other) => Err(Error::config(key, format!("expected a string, got {other}"))),
            }
        };
        let preset = pick("preset")?.map(|s| s.parse()).transpose()?.unwrap_or(Preset::Paper);
        let default_kind = if pick("topology_file")?.is_some() {
            TopologyKind::Explicit
        } else {
            TopologyKind::Random
        };
        let topology = pick("topology")?
            .map(|s| s.parse())
            .transpose()?
            .unwrap_or(default_kind);
        let base = serde_json::to_value(Self::preset(preset, topology))?;
        let Value::Object(mut merged) = base else {
            unreachable!("config serializes to an object")
        };
        for (key, value) in overrides {
            if !merged.contains_key(key) {
                return Err(Error::config(key.clone(), "unknown field"));
            }
            // type-check one field at a time so the error names it
            let mut probe = merged.clone();
            probe.insert(key.clone(), value.clone());
            if let Err(e) = serde_json::from_value::<Self>(Value::Object(probe)) {
                return Err(Error::config(key.clone(), e.to_string()));
            }
            merged.insert(key.clone(), value.clone());
        }
        let config: Self = serde_json::from_value(Value::Object(merged))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Map<String, Value>> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::File {
            path: path.to_path_buf(),
            source,
        })?;
        match serde_json::from_str(&text)? {
            Value::Object(map) => Ok(map),
            _ => Err(Error::config(
                "config",
                format!("{} is not a JSON object", path.display()),
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.layout().validate()?;
        self.channel().validate()?;
        self.fnn_spec().validate()?;
        self.train_config().validate()?;
        self.convergence().validate()?;
        if self.train_samples == 0 {
            return Err(Error::config("train_samples", "must be at least 1"));
        }
        if self.test_samples == 0 {
            return Err(Error::config("test_samples", "must be at least 1"));
        }
        if self.topology == TopologyKind::Explicit && self.topology_file.is_none() {
            return Err(Error::config("topology", "explicit topologies need topology_file"));
        }
        if self.scenario == Scenario::None && !matches!(self.algo, Algorithm::None | Algorithm::All) {
            return Err(Error::config(
                "scenario",
                format!("{} needs scenario s1 or s2", self.algo),
            ));
        }
        if self.scenario == Scenario::S2 && !(self.rj > 0.0 && self.rj.is_finite()) {
            return Err(Error::config("rj", "jamming range must be positive"));
        }
        Ok(())
    }

    /// Caps budgets at what the topology offers. Returns one warning per
    /// clamped value.
    pub fn clamp_budgets(&mut self, topology: &Topology) -> Vec<String> {
        let mut warnings = Vec::new();
        let links = topology.links().len();
        if self.mb > links {
            warnings.push(format!(
                "mb = {} exceeds the {links} links; clamped to {links}",
                self.mb
            ));
            self.mb = links;
        }
        let arcs = 2 * links;
        if self.md > arcs {
            warnings.push(format!(
                "md = {} exceeds the {arcs} directed links; clamped to {arcs}",
                self.md
            ));
            self.md = arcs;
        }
        warnings
    }

    pub fn layout(&self) -> LayoutParams {
        LayoutParams {
            comm_range: self.comm_range,
            spacing: self.spacing,
            random_nodes: self.random_nodes,
            area_min: self.area_min,
            area_max: self.area_max,
            resample_cap: DEFAULT_RESAMPLE_CAP,
        }
    }

    pub fn channel(&self) -> ChannelParams {
        ChannelParams {
            tx_position: self.tx_position,
            path_loss_exponent: self.path_loss_exponent,
            reference_snr_db: self.reference_snr_db,
            reference_distance: self.reference_distance,
            phase_offset_sigma: self.phase_offset_sigma,
            noise_power: self.noise_power,
        }
    }

    pub fn sizes(&self) -> DatasetSizes {
        DatasetSizes {
            train: self.train_samples,
            test: self.test_samples,
        }
    }

    pub fn fnn_spec(&self) -> FnnSpec {
        FnnSpec {
            hidden_sizes: self.hidden_sizes.clone(),
            dropout_rate: self.dropout_rate,
            ..FnnSpec::default()
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            rms_decay: self.rms_decay,
            rms_epsilon: self.rms_epsilon,
            batch_size: self.batch_size,
            epochs_per_round: self.epochs_per_round,
        }
    }

    pub fn convergence(&self) -> ConvergenceConfig {
        ConvergenceConfig {
            epsilon: self.convergence_epsilon,
            window_m: self.window_m,
            max_rounds: self.max_rounds,
        }
    }
}
