//! Test-only oracles, independent of the library's own forward/backward code.
#![allow(dead_code)]

use evosynth::netcore::{gradients, DenseLayer};
use evosynth::{Activation, Network, Precision};
use rand::Rng;

/// Random network with weights in ±1, biases in ±0.5 and each synapse masked
/// off with probability `drop`.
pub fn random_masked_net(widths: &[usize], activation: Activation, drop: f64, rng: &mut impl Rng) -> Network {
    let layers = widths
        .windows(2)
        .map(|w| {
            let n = w[0] * w[1];
            let mask: Vec<bool> = (0..n).map(|_| !rng.random_bool(drop)).collect();
            let weights = mask
                .iter()
                .map(|&m| if m { rng.random_range(-1.0f32..1.0) } else { 0.0 })
                .collect();
            DenseLayer {
                in_dim: w[0],
                out_dim: w[1],
                activation,
                weights,
                mask,
                bias: (0..w[1]).map(|_| rng.random_range(-0.5f32..0.5)).collect(),
            }
        })
        .collect();
    Network {
        layers,
        generation: 1,
        precision: Precision::Full,
    }
}

/// Parameters in binary64: per layer (weights, bias).
pub type Params = Vec<(Vec<f64>, Vec<f64>)>;

pub fn params_of(net: &Network) -> Params {
    net.layers
        .iter()
        .map(|l| {
            (
                l.weights.iter().zip(&l.mask).map(|(&w, &m)| if m { w as f64 } else { 0.0 }).collect(),
                l.bias.iter().map(|&b| b as f64).collect(),
            )
        })
        .collect()
}

fn act(a: Activation, z: f64) -> f64 {
    match a {
        Activation::Relu => z.max(0.0),
        Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
    }
}

/// Hidden pre-activations and final logits for one sample.
fn reference_pass(net: &Network, params: &Params, x: &[f32]) -> (Vec<f64>, Vec<f64>) {
    let mut a: Vec<f64> = x.iter().map(|&v| v as f64).collect();
    let mut pre = Vec::new();
    for (i, (layer, (w, b))) in net.layers.iter().zip(params).enumerate() {
        let z: Vec<f64> = (0..layer.out_dim)
            .map(|r| b[r] + (0..layer.in_dim).map(|c| w[r * layer.in_dim + c] * a[c]).sum::<f64>())
            .collect();
        if i + 1 == net.layers.len() {
            return (pre, z);
        }
        pre.extend_from_slice(&z);
        a = z.iter().map(|&v| act(layer.activation, v)).collect();
    }
    unreachable!()
}

/// Mean softmax cross-entropy, computed naively in binary64.
pub fn reference_loss(net: &Network, params: &Params, inputs: &[Vec<f32>], labels: &[usize]) -> f64 {
    let mut total = 0.0;
    for (x, &y) in inputs.iter().zip(labels) {
        let (_, z) = reference_pass(net, params, x);
        let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = z.iter().map(|v| (v - max).exp()).sum();
        total += -((z[y] - max).exp() / sum).ln();
    }
    total / inputs.len() as f64
}

pub fn min_hidden_preactivation(net: &Network, inputs: &[Vec<f32>]) -> f64 {
    let params = params_of(net);
    inputs
        .iter()
        .flat_map(|x| reference_pass(net, &params, x).0)
        .map(f64::abs)
        .fold(f64::INFINITY, f64::min)
}

/// Worst relative error `|a − n| / max(|a|, |n|, 1e-8)` between analytic and
/// central-difference gradients over every unmasked weight and every bias.
pub fn finite_difference_check(net: &Network, inputs: &[Vec<f32>], labels: &[usize], eps: f64) -> f64 {
    let refs: Vec<&[f32]> = inputs.iter().map(Vec::as_slice).collect();
    let analytic = gradients(net, &refs, labels).unwrap();
    let base = params_of(net);
    let mut worst = 0.0f64;
    let mut compare = |a: f64, n: f64| {
        let rel = (a - n).abs() / a.abs().max(n.abs()).max(1e-8);
        worst = worst.max(rel);
    };
    for (li, layer) in net.layers.iter().enumerate() {
        for i in 0..layer.weights.len() {
            if !layer.mask[i] {
                continue;
            }
            let mut plus = base.clone();
            plus[li].0[i] += eps;
            let mut minus = base.clone();
            minus[li].0[i] -= eps;
            let numeric = (reference_loss(net, &plus, inputs, labels) - reference_loss(net, &minus, inputs, labels)) / (2.0 * eps);
            compare(analytic.layers[li].weights[i], numeric);
        }
        for i in 0..layer.bias.len() {
            let mut plus = base.clone();
            plus[li].1[i] += eps;
            let mut minus = base.clone();
            minus[li].1[i] -= eps;
            let numeric = (reference_loss(net, &plus, inputs, labels) - reference_loss(net, &minus, inputs, labels)) / (2.0 * eps);
            compare(analytic.layers[li].bias[i], numeric);
        }
    }
    worst
}
