//! Evolutionary synthesis of progressively sparser, half-precision
//! feedforward networks.
//!
//! Each generation's topology is sampled from a synaptic probability model
//! built from its parent's weight magnitudes, trained at binary32 with
//! masked gradients, then restricted to IEEE binary16.

pub mod dataio;
pub mod error;
pub mod evolution;
pub mod genetics;
pub mod halfprec;
pub mod metrics;
pub mod netcore;

pub use dataio::{Dataset, ModelMeta};
pub use error::{Error, Result};
pub use evolution::{derive_seed, evolve, step_generation, EvolutionConfig, Evolved, GenerationRecord, Lineage, StopReason};
pub use genetics::{calibrate_alpha, encode_dna, synthesize_offspring, EnvironmentalFactor, SynapticProbabilityModel};
pub use halfprec::{decode_f16, encode_f16, quantize_network, HalfCode, Overflow, PrecisionPolicy};
pub use netcore::{
    count_active_synapses, inference_cost, init_network, train, Activation, LayerSpec, Network, Precision, SynapseMask,
    TrainConfig,
};
