//! Synaptic probability model ("DNA") and stochastic offspring synthesis.
//!
//! A trained parent is encoded as per-synapse existence probabilities
//! `p = |w| / max|w|` (per layer). An environmental factor `α` scales them to
//! synthesis probabilities `q = min(1, α·p)`, and an offspring topology is
//! drawn as independent Bernoulli(q) variables.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcore::{LayerMask, Network, SynapseMask};

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    /// Row-major `[out_dim × in_dim]`, each entry in `[0, 1]`.
    pub probs: Vec<f64>,
    /// Synapses present in the parent, including ones whose weight is zero.
    pub parent_active: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynapticProbabilityModel {
    pub layers: Vec<ProbabilityLayer>,
    pub source_generation: u32,
}

impl SynapticProbabilityModel {
    pub fn parent_active(&self) -> usize {
        self.layers.iter().map(|l| l.parent_active).sum()
    }
}

/// Efficiency pressure applied during synthesis. `alpha` applies to every
/// layer without an entry in `overrides`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentalFactor {
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<usize, f64>,
}

impl EnvironmentalFactor {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(EnvironmentalFactor {
            alpha,
            overrides: BTreeMap::new(),
        })
    }

    pub fn with_override(mut self, layer: usize, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        self.overrides.insert(layer, alpha);
        Ok(self)
    }

    pub fn alpha_for(&self, layer: usize) -> f64 {
        self.overrides.get(&layer).copied().unwrap_or(self.alpha)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!("alpha {alpha} outside (0, 1]")))
    }
}

/// Encodes a network's synaptic strengths as existence probabilities.
pub fn encode_dna(net: &Network) -> Result<SynapticProbabilityModel> {
    let layers = net
        .layers
        .iter()
        .enumerate()
        .map(|(idx, layer)| {
            let magnitude = |(&w, &m): (&f32, &bool)| if m { (w as f64).abs() } else { 0.0 };
            let max = layer.weights.iter().zip(&layer.mask).map(magnitude).fold(0.0, f64::max);
            if max == 0.0 || !max.is_finite() {
                return Err(Error::DeadLayer { layer: idx });
            }
            Ok(ProbabilityLayer {
                in_dim: layer.in_dim,
                out_dim: layer.out_dim,
                probs: layer.weights.iter().zip(&layer.mask).map(|s| magnitude(s) / max).collect(),
                parent_active: layer.active_synapses(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SynapticProbabilityModel {
        layers,
        source_generation: net.generation,
    })
}

/// Per-layer `q = min(1, α_layer · p)`.
pub fn synthesis_probability(dna: &SynapticProbabilityModel, env: &EnvironmentalFactor) -> Vec<Vec<f64>> {
    dna.layers
        .iter()
        .enumerate()
        .map(|(idx, l)| {
            let alpha = env.alpha_for(idx);
            l.probs.iter().map(|&p| (alpha * p).min(1.0)).collect()
        })
        .collect()
}

/// An offspring mask together with the synapses switched on by the repair rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Synthesis {
    pub mask: SynapseMask,
    /// `(layer, row, column)` of every repair-forced synapse.
    pub forced: Vec<(usize, usize, usize)>,
}

/// Samples an offspring topology. See [`synthesize_detailed`].
pub fn synthesize_offspring(dna: &SynapticProbabilityModel, env: &EnvironmentalFactor, seed: u64) -> SynapseMask {
    synthesize_detailed(dna, env, seed).mask
}

/// Draws every synapse as Bernoulli(q) from one ChaCha8 stream seeded with
/// `seed`, visiting layers in order and each weight matrix row-major. One
/// uniform is consumed per synapse, including those with `q = 0`.
///
/// Afterwards, any output neuron left with no incoming synapse gets its
/// highest-`q` incoming synapse switched back on (ties to the lowest column).
/// Only synapses with `q > 0` are candidates, so repair never resurrects a
/// synapse the parent lacked; a neuron with no such candidate stays empty.
pub fn synthesize_detailed(dna: &SynapticProbabilityModel, env: &EnvironmentalFactor, seed: u64) -> Synthesis {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = synthesis_probability(dna, env);
    let mut forced = Vec::new();
    let layers = dna
        .layers
        .iter()
        .zip(&q)
        .enumerate()
        .map(|(idx, (layer, q))| {
            let mut bits: Vec<bool> = q.iter().map(|&qi| rng.random::<f64>() < qi).collect();
            for r in 0..layer.out_dim {
                let row = r * layer.in_dim..(r + 1) * layer.in_dim;
                if bits[row.clone()].iter().any(|&b| b) {
                    continue;
                }
                let mut best: Option<usize> = None;
                for (c, &qi) in q[row.clone()].iter().enumerate() {
                    if qi > 0.0 && best.is_none_or(|b| qi > q[row.start + b]) {
                        best = Some(c);
                    }
                }
                if let Some(c) = best {
                    bits[row.start + c] = true;
                    forced.push((idx, r, c));
                }
            }
            LayerMask {
                in_dim: layer.in_dim,
                out_dim: layer.out_dim,
                bits,
            }
        })
        .collect();
    Synthesis {
        mask: SynapseMask { layers },
        forced,
    }
}

/// Expected fraction of parent synapses that survive one synthesis, ignoring
/// the repair rule.
pub fn expected_density(dna: &SynapticProbabilityModel, env: &EnvironmentalFactor) -> Result<f64> {
    let active = dna.parent_active();
    if active == 0 {
        return Err(Error::DeadLayer { layer: 0 });
    }
    let total: f64 = synthesis_probability(dna, env).iter().flatten().sum();
    Ok(total / active as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub env: EnvironmentalFactor,
    /// The target exceeded the density reachable at `α = 1`.
    pub saturated: bool,
}

/// Finds the global `α` whose expected density meets `target_retention`.
///
/// Expected density is continuous and non-decreasing in `α`, so bisection
/// over `(0, 1]` converges; it runs until the bracket stops shrinking (at
/// most 64 halvings), which leaves `|E(α) − target|` far below `1e-4`.
pub fn calibrate_alpha(dna: &SynapticProbabilityModel, target_retention: f64) -> Result<Calibration> {
    if !(target_retention > 0.0 && target_retention <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "target retention {target_retention} outside (0, 1]"
        )));
    }
    let density = |alpha: f64| expected_density(dna, &EnvironmentalFactor { alpha, overrides: BTreeMap::new() });
    let at_one = density(1.0)?;
    if at_one <= target_retention {
        return Ok(Calibration {
            env: EnvironmentalFactor::new(1.0)?,
            saturated: at_one < target_retention,
        });
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if density(mid)? < target_retention {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Calibration {
        env: EnvironmentalFactor::new(hi)?,
        saturated: false,
    })
}
