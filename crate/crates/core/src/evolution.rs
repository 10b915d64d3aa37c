//! Generational driver: synthesize, inherit, train, quantize, record.

use serde::{Deserialize, Serialize};

use crate::dataio::{Dataset, ModelMeta, SplitInfo};
use crate::error::{Error, Result};
use crate::genetics::{calibrate_alpha, encode_dna, synthesize_offspring};
use crate::halfprec::{quantize_network, PrecisionPolicy};
use crate::metrics::evaluate;
use crate::netcore::{
    count_active_synapses, inference_cost, init_network, train_on_split, validate_spec, LayerSpec, Network,
    Precision, Split, TrainConfig,
};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for generation `g` of a lineage.
///
/// This is the `(g + 1)`-th output of a SplitMix64 generator started at
/// `master_seed`: `mix64(master_seed + (g + 1) · 0x9E3779B97F4A7C15)`
/// (wrapping). The golden-ratio increment is odd and `mix64` is a bijection,
/// so distinct `g` never collide for a fixed master seed.
/// `derive_seed(0, 0) == 0xE220A8397B1DCDAF`.
pub fn derive_seed(master_seed: u64, g: u64) -> u64 {
    mix64(master_seed.wrapping_add(g.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Seed of the lineage-wide validation split.
pub fn split_seed(master_seed: u64) -> u64 {
    derive_seed(master_seed, 0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionConfig {
    pub generations: u32,
    pub retention_per_generation: f64,
    /// Training recipe for every generation. Its `seed` is replaced by one
    /// derived from `master_seed`.
    pub train: TrainConfig,
    pub precision: PrecisionPolicy,
    pub inherit_weights: bool,
    /// Largest tolerated drop in F1 relative to generation 1.
    pub stop_on_metric_drop: Option<f64>,
    pub master_seed: u64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            generations: 13,
            retention_per_generation: 0.84,
            train: TrainConfig::default(),
            precision: PrecisionPolicy::default(),
            inherit_weights: true,
            stop_on_metric_drop: Some(0.10),
            master_seed: 0,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.generations == 0 {
            return Err(Error::InvalidParam("generations must be positive".into()));
        }
        let rho = self.retention_per_generation;
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::InvalidParam(format!("retention_per_generation {rho} outside (0, 1]")));
        }
        if let Some(d) = self.stop_on_metric_drop {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::InvalidParam(format!("stop_on_metric_drop {d} must be non-negative")));
            }
        }
        self.train.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: u32,
    pub alpha_used: f64,
    pub active_synapses: usize,
    pub total_synapses: usize,
    pub macs: usize,
    /// Mean cross-entropy of the stored model on the training rows.
    pub train_loss: f64,
    pub precision_metric: f64,
    pub recall_metric: f64,
    pub f1: f64,
    pub seed: u64,
    pub model_path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopReason {
    Completed,
    /// Generation `generation` lost more F1 than allowed and was discarded.
    MetricDrop { generation: u32, f1: f64 },
    /// The parent of generation `generation` had a layer with no usable synapse.
    DeadLayer { generation: u32, layer: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lineage {
    pub records: Vec<GenerationRecord>,
    pub config: EvolutionConfig,
    pub stop_reason: StopReason,
}

/// A lineage together with every stored generation's model.
#[derive(Debug, Clone)]
pub struct Evolved {
    pub lineage: Lineage,
    pub networks: Vec<Network>,
    pub metas: Vec<ModelMeta>,
}

pub fn model_file_name(g: u32) -> String {
    format!("gen_{g}.json")
}

fn lineage_split(data: &Dataset, cfg: &EvolutionConfig) -> Result<Split> {
    Split::derive(data.len(), cfg.train.validation_fraction, split_seed(cfg.master_seed))
}

/// Trains `net` for generation `g` and imposes binary16 precision.
fn develop(
    net: Network,
    data: &Dataset,
    split: &Split,
    cfg: &EvolutionConfig,
    g: u32,
    alpha: f64,
) -> Result<(Network, GenerationRecord)> {
    let seed = derive_seed(cfg.master_seed, g as u64);
    let train_cfg = TrainConfig {
        seed: derive_seed(seed, 1),
        ..cfg.train
    };
    let (trained, _log) = train_on_split(&net, data, split, &train_cfg)?;
    let mut stored = quantize_network(&trained, cfg.precision)?;
    stored.generation = g;

    let (precision, recall, f1) = evaluate(&stored, data, &split.validation)?.summary();
    let record = GenerationRecord {
        generation: g,
        alpha_used: alpha,
        active_synapses: count_active_synapses(&stored),
        total_synapses: stored.total_synapses(),
        macs: inference_cost(&stored),
        train_loss: stored.mean_loss(data, &split.train)?,
        precision_metric: precision,
        recall_metric: recall,
        f1,
        seed,
        model_path: model_file_name(g),
    };
    Ok((stored, record))
}

/// Produces generation `g ≥ 2` from a trained parent.
///
/// The parent is encoded, `α` is calibrated so the expected retention is
/// `cfg.retention_per_generation`, and an offspring topology is sampled with
/// `derive_seed(master_seed, g)`. Surviving synapses keep the parent's
/// weights (or get a fresh Glorot draw when `inherit_weights` is off) before
/// training and quantization.
pub fn step_generation(
    parent: &Network,
    data: &Dataset,
    cfg: &EvolutionConfig,
    g: u32,
) -> Result<(Network, GenerationRecord)> {
    if g < 2 {
        return Err(Error::InvalidParam("offspring generations start at 2".into()));
    }
    let split = lineage_split(data, cfg)?;
    step_on_split(parent, data, &split, cfg, g)
}

fn step_on_split(
    parent: &Network,
    data: &Dataset,
    split: &Split,
    cfg: &EvolutionConfig,
    g: u32,
) -> Result<(Network, GenerationRecord)> {
    let seed = derive_seed(cfg.master_seed, g as u64);
    let dna = encode_dna(parent)?;
    let calibration = calibrate_alpha(&dna, cfg.retention_per_generation)?;
    let mask = synthesize_offspring(&dna, &calibration.env, seed);

    let base = if cfg.inherit_weights {
        parent.clone()
    } else {
        let mut fresh = init_network(&parent.spec(), derive_seed(seed, 2))?;
        fresh.generation = g;
        fresh
    };
    let mut offspring = base.with_mask(&mask)?;
    offspring.generation = g;
    offspring.precision = Precision::Full;
    develop(offspring, data, split, cfg, g, calibration.env.alpha)
}

/// Runs a whole lineage.
///
/// Generation 1 is a Glorot-initialised ancestor, trained and quantized.
/// Dead layers and F1 drops end the lineage early and are reported through
/// [`StopReason`]; only configuration, data and numeric errors are returned
/// as `Err`.
pub fn evolve(spec: &[LayerSpec], data: &Dataset, cfg: &EvolutionConfig) -> Result<Evolved> {
    validate_spec(spec)?;
    cfg.validate()?;
    if data.n_features != spec[0].in_dim {
        return Err(Error::ShapeMismatch {
            expected: spec[0].in_dim,
            got: data.n_features,
        });
    }
    let split = lineage_split(data, cfg)?;
    let split_info = SplitInfo {
        seed: split_seed(cfg.master_seed),
        validation_fraction: cfg.train.validation_fraction,
    };

    let ancestor = init_network(spec, derive_seed(cfg.master_seed, 1))?;
    let (mut parent, first) = develop(ancestor, data, &split, cfg, 1, 1.0)?;
    let mut alphas = vec![1.0];
    let meta_for = |record: &GenerationRecord, alphas: &[f64]| ModelMeta {
        seed: record.seed,
        alpha_history: alphas.to_vec(),
        split: Some(split_info),
    };

    let baseline_f1 = first.f1;
    let mut metas = vec![meta_for(&first, &alphas)];
    let mut networks = vec![parent.clone()];
    let mut records = vec![first];
    let mut stop_reason = StopReason::Completed;

    for g in 2..=cfg.generations {
        let (child, record) = match step_on_split(&parent, data, &split, cfg, g) {
            Ok(out) => out,
            Err(Error::DeadLayer { layer }) => {
                stop_reason = StopReason::DeadLayer { generation: g, layer };
                break;
            }
            Err(e) => return Err(e),
        };
        if let Some(drop) = cfg.stop_on_metric_drop {
            if record.f1 < baseline_f1 - drop {
                stop_reason = StopReason::MetricDrop {
                    generation: g,
                    f1: record.f1,
                };
                break;
            }
        }
        alphas.push(record.alpha_used);
        metas.push(meta_for(&record, &alphas));
        networks.push(child.clone());
        records.push(record);
        parent = child;
    }

    Ok(Evolved {
        lineage: Lineage {
            records,
            config: cfg.clone(),
            stop_reason,
        },
        networks,
        metas,
    })
}
